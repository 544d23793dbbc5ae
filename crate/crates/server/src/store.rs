//! Durable state: account and object metadata in one JSON document, blobs as
//! files named by object id.
//!
//! Every metadata change rewrites `meta.json` via a temp file and rename, so a
//! reader never observes a partial document. Blobs are written the same way
//! and committed to metadata afterwards; a crash in between leaves an orphan
//! blob that [`Store::open`] removes.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use ringvault_core::classification::{classify, CiaRating, ProtectionRing};
use ringvault_core::graphical::GraphicalSecret;
use ringvault_core::otp::OtpAccount;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::password::PasswordVerifier;

const META_FILE: &str = "meta.json";
const BLOB_DIR: &str = "blobs";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("username already taken")]
    DuplicateUsername,
    #[error("storage i/o: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt metadata: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserAccount {
    pub user_id: String,
    pub username: String,
    pub password_verifier: PasswordVerifier,
    pub email: String,
    pub mobile: String,
    pub graphical_secret: Option<GraphicalSecret>,
    #[serde(skip)]
    verifier_string: String,
}

impl UserAccount {
    pub fn new(
        user_id: String,
        username: String,
        password_verifier: PasswordVerifier,
        email: String,
        mobile: String,
        graphical_secret: Option<GraphicalSecret>,
    ) -> Self {
        let verifier_string = password_verifier.record_string();
        UserAccount { user_id, username, password_verifier, email, mobile, graphical_secret, verifier_string }
    }

    fn refresh(&mut self) {
        self.verifier_string = self.password_verifier.record_string();
    }
}

impl OtpAccount for UserAccount {
    fn user_id(&self) -> &str {
        &self.user_id
    }
    fn username(&self) -> &str {
        &self.username
    }
    fn password_material(&self) -> &str {
        &self.verifier_string
    }
    fn email(&self) -> &str {
        &self.email
    }
    fn mobile(&self) -> Option<&str> {
        Some(self.mobile.as_str()).filter(|m| !m.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredObject {
    pub object_id: String,
    pub owner: String,
    pub name: String,
    pub cia: CiaRating,
    pub ring: ProtectionRing,
    pub encrypted: bool,
    pub blob_ref: String,
    pub size_bytes: u64,
    pub created_at: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Meta {
    version: u32,
    accounts: BTreeMap<String, UserAccount>,
    objects: BTreeMap<String, StoredObject>,
}

pub struct Store {
    dir: PathBuf,
    meta: Mutex<Meta>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

impl Store {
    /// Opens (or initialises) the store under `dir`. Returns the store and the
    /// number of orphan blobs removed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<(Self, usize), StoreError> {
        let dir = dir.into();
        fs::create_dir_all(dir.join(BLOB_DIR))?;
        let meta_path = dir.join(META_FILE);
        let mut meta = match fs::read(&meta_path) {
            Ok(bytes) => serde_json::from_slice::<Meta>(&bytes)
                .map_err(|e| StoreError::Corrupt(e.to_string()))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Meta { version: FORMAT_VERSION, ..Default::default() },
            Err(e) => return Err(e.into()),
        };
        if meta.version != FORMAT_VERSION {
            return Err(StoreError::Corrupt(format!("unsupported format version {}", meta.version)));
        }
        for acct in meta.accounts.values_mut() {
            acct.refresh();
        }
        for obj in meta.objects.values() {
            if obj.ring != classify(&obj.cia) {
                return Err(StoreError::Corrupt(format!(
                    "object {} has ring {} but rating {} classifies as {}",
                    obj.object_id,
                    obj.ring,
                    obj.cia,
                    classify(&obj.cia)
                )));
            }
        }
        let store = Store { dir, meta: Mutex::new(meta) };
        let reaped = store.reap_orphans()?;
        Ok((store, reaped))
    }

    fn lock(&self) -> MutexGuard<'_, Meta> {
        self.meta.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn meta_path(&self) -> PathBuf {
        self.dir.join(META_FILE)
    }

    pub fn blob_dir(&self) -> PathBuf {
        self.dir.join(BLOB_DIR)
    }

    fn reap_orphans(&self) -> io::Result<usize> {
        let meta = self.lock();
        let mut reaped = 0;
        for entry in fs::read_dir(self.blob_dir())? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if !meta.objects.contains_key(&name) {
                fs::remove_file(entry.path())?;
                reaped += 1;
            }
        }
        Ok(reaped)
    }

    /// Applies `change` to a copy of the metadata, persists it, then publishes it.
    fn commit<T>(&self, change: impl FnOnce(&mut Meta) -> Result<T, StoreError>) -> Result<T, StoreError> {
        let mut guard = self.lock();
        let mut next = guard.clone();
        let out = change(&mut next)?;
        let bytes = serde_json::to_vec_pretty(&next).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        write_atomic(&self.meta_path(), &bytes)?;
        *guard = next;
        Ok(out)
    }

    pub fn insert_account(&self, account: UserAccount) -> Result<(), StoreError> {
        self.commit(|meta| {
            if meta.accounts.values().any(|a| a.username == account.username) {
                return Err(StoreError::DuplicateUsername);
            }
            meta.accounts.insert(account.user_id.clone(), account);
            Ok(())
        })
    }

    pub fn account(&self, user_id: &str) -> Option<UserAccount> {
        self.lock().accounts.get(user_id).cloned()
    }

    pub fn account_by_username(&self, username: &str) -> Option<UserAccount> {
        self.lock().accounts.values().find(|a| a.username == username).cloned()
    }

    pub fn set_graphical_secret(&self, user_id: &str, secret: GraphicalSecret) -> Result<(), StoreError> {
        self.commit(|meta| {
            let acct = meta
                .accounts
                .get_mut(user_id)
                .ok_or_else(|| StoreError::Corrupt(format!("no account {user_id}")))?;
            acct.graphical_secret = Some(secret);
            Ok(())
        })
    }

    /// Writes blob bytes under `object_id`, visible only once complete.
    pub fn write_blob(&self, object_id: &str, bytes: &[u8]) -> Result<String, StoreError> {
        let path = self.blob_dir().join(object_id);
        write_atomic(&path, bytes)?;
        Ok(format!("{BLOB_DIR}/{object_id}"))
    }

    pub fn insert_object(&self, object: StoredObject) -> Result<(), StoreError> {
        self.commit(|meta| {
            meta.objects.insert(object.object_id.clone(), object);
            Ok(())
        })
    }

    pub fn object(&self, object_id: &str) -> Option<StoredObject> {
        self.lock().objects.get(object_id).cloned()
    }

    pub fn objects_of(&self, owner: &str) -> Vec<StoredObject> {
        let mut objs: Vec<_> = self.lock().objects.values().filter(|o| o.owner == owner).cloned().collect();
        objs.sort_by(|a, b| (a.created_at, &a.object_id).cmp(&(b.created_at, &b.object_id)));
        objs
    }

    pub fn read_blob(&self, object: &StoredObject) -> Result<Vec<u8>, StoreError> {
        let bytes = fs::read(self.dir.join(&object.blob_ref))?;
        if bytes.len() as u64 != object.size_bytes {
            return Err(StoreError::Corrupt(format!(
                "blob {} is {} bytes, expected {}",
                object.object_id,
                bytes.len(),
                object.size_bytes
            )));
        }
        Ok(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn account(name: &str) -> UserAccount {
        UserAccount::new(
            format!("id-{name}"),
            name.into(),
            PasswordVerifier::create("pw", 1, &mut rand::rng()),
            format!("{name}@x.io"),
            "5550001".into(),
            None,
        )
    }

    fn object(id: &str, owner: &str, size: u64) -> StoredObject {
        let cia = CiaRating::new(7, 7, 2).unwrap();
        StoredObject {
            object_id: id.into(),
            owner: owner.into(),
            name: "f.txt".into(),
            cia,
            ring: classify(&cia),
            encrypted: false,
            blob_ref: format!("blobs/{id}"),
            size_bytes: size,
            created_at: 1,
        }
    }

    #[test]
    fn accounts_persist_and_stay_unique() {
        let dir = tempfile::tempdir().unwrap();
        {
            let (store, _) = Store::open(dir.path()).unwrap();
            store.insert_account(account("alice")).unwrap();
            assert!(matches!(store.insert_account(account("alice")), Err(StoreError::DuplicateUsername)));
        }
        let (store, _) = Store::open(dir.path()).unwrap();
        let a = store.account_by_username("alice").unwrap();
        assert_eq!(a.password_material(), a.password_verifier.record_string());
        assert!(store.account_by_username("bob").is_none());
    }

    #[test]
    fn orphan_blobs_reaped_on_open() {
        let dir = tempfile::tempdir().unwrap();
        {
            let (store, _) = Store::open(dir.path()).unwrap();
            store.write_blob("kept", b"abc").unwrap();
            store.insert_object(object("kept", "u", 3)).unwrap();
            // blob written, metadata never committed
            store.write_blob("orphan", b"zzz").unwrap();
            fs::write(store.blob_dir().join("half.tmp"), b"x").unwrap();
        }
        let (store, reaped) = Store::open(dir.path()).unwrap();
        assert_eq!(reaped, 2);
        assert!(!store.blob_dir().join("orphan").exists());
        assert_eq!(store.read_blob(&store.object("kept").unwrap()).unwrap(), b"abc");
    }

    #[test]
    fn ring_mismatch_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        {
            let (store, _) = Store::open(dir.path()).unwrap();
            let mut obj = object("o", "u", 0);
            obj.ring = ProtectionRing::Ring3Low;
            store.write_blob("o", b"").unwrap();
            store.insert_object(obj).unwrap();
        }
        assert!(matches!(Store::open(dir.path()), Err(StoreError::Corrupt(_))));
    }

    #[test]
    fn size_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let (store, _) = Store::open(dir.path()).unwrap();
        store.write_blob("o", b"abcd").unwrap();
        store.insert_object(object("o", "u", 3)).unwrap();
        assert!(matches!(store.read_blob(&store.object("o").unwrap()), Err(StoreError::Corrupt(_))));
    }

    #[test]
    fn objects_listed_per_owner() {
        let dir = tempfile::tempdir().unwrap();
        let (store, _) = Store::open(dir.path()).unwrap();
        for (id, owner) in [("a", "u1"), ("b", "u2"), ("c", "u1")] {
            store.write_blob(id, b"").unwrap();
            store.insert_object(object(id, owner, 0)).unwrap();
        }
        let ids: Vec<_> = store.objects_of("u1").into_iter().map(|o| o.object_id).collect();
        assert_eq!(ids, ["a", "c"]);
    }
}
