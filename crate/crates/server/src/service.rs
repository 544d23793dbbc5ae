//! The provider side of the protocol, independent of HTTP.
//!
//! Retrieval is a three-step exchange: `request_download` issues the challenge
//! that the object's ring calls for, `complete_challenge` checks the answer and
//! mints a single-use [`AccessGrant`], and `download` redeems the grant.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};

use ringvault_core::challenge::{is_live, RejectReason};
use ringvault_core::classification::{classify, validate_rating, ProtectionRing, RatingError};
use ringvault_core::clock::{Clock, SystemClock};
use ringvault_core::graphical::{
    enroll, GraphicalAuthority, GraphicalError, ImageCatalog, ImageId, LockoutPolicy, LockoutTracker,
};
use ringvault_core::otp::{OtpAuthority, OtpError, OutboxTransport, SmsTransport};
use ringvault_core::token::new_token;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{AuditEvent, AuditLog};
use crate::config::ServerConfig;
use crate::password::{dummy_verify, PasswordVerifier};
use crate::store::{Store, StoreError, StoredObject, UserAccount};

const MAX_NAME_LEN: usize = 255;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    OutOfRange(#[from] RatingError),
    #[error("username already taken")]
    DuplicateUsername,
    #[error("{0}")]
    InvalidSelection(String),
    #[error("{0}")]
    WeakInput(String),
    #[error("bad credentials")]
    BadCredentials,
    #[error("not authenticated")]
    Unauthenticated,
    #[error("object belongs to another user")]
    NotOwner,
    #[error("no such object")]
    NotFound,
    #[error("too many failed attempts; try again later")]
    LockedOut,
    #[error("challenge failed")]
    ChallengeFailed,
    #[error("grant invalid")]
    GrantInvalid,
    #[error("payload exceeds {0} bytes")]
    PayloadTooLarge(usize),
    #[error("message delivery failed")]
    Transport(String),
    #[error("storage failure")]
    Storage(String),
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::DuplicateUsername => ServiceError::DuplicateUsername,
            other => ServiceError::Storage(other.to_string()),
        }
    }
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Catalog(#[from] GraphicalError),
    #[error("audit log: {0}")]
    Audit(#[from] std::io::Error),
}

/// Authentication method guarding a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChallengeKind {
    PasswordReentry,
    Graphical,
    Otp,
}

impl ChallengeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChallengeKind::PasswordReentry => "password_reentry",
            ChallengeKind::Graphical => "graphical",
            ChallengeKind::Otp => "otp",
        }
    }
}

pub fn route_challenge(ring: ProtectionRing) -> ChallengeKind {
    match ring {
        ProtectionRing::Ring1High => ChallengeKind::Otp,
        ProtectionRing::Ring2Mid => ChallengeKind::Graphical,
        ProtectionRing::Ring3Low => ChallengeKind::PasswordReentry,
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct RegisterRequest {
    pub username: String,
    pub password: String,
    pub email: String,
    pub mobile: String,
    pub graphical: Vec<ImageId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountView {
    pub user_id: String,
    pub username: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub token: String,
    pub idle_timeout_secs: u64,
}

#[derive(Debug, Clone)]
pub struct UploadRequest {
    pub name: String,
    pub payload: Vec<u8>,
    pub confidentiality: i64,
    pub integrity: i64,
    pub availability: i64,
    pub encrypted: bool,
}

/// Object metadata as exposed to clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectView {
    pub object_id: String,
    pub name: String,
    pub ring: ProtectionRing,
    pub confidentiality: u8,
    pub integrity: u8,
    pub availability: u8,
    pub encrypted: bool,
    pub size_bytes: u64,
    pub created_at: u64,
}

impl From<&StoredObject> for ObjectView {
    fn from(o: &StoredObject) -> Self {
        ObjectView {
            object_id: o.object_id.clone(),
            name: o.name.clone(),
            ring: o.ring,
            confidentiality: o.cia.confidentiality(),
            integrity: o.cia.integrity(),
            availability: o.cia.availability(),
            encrypted: o.encrypted,
            size_bytes: o.size_bytes,
            created_at: o.created_at,
        }
    }
}

/// What the client sees of a pending challenge. Never contains the expected answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeView {
    pub challenge_id: String,
    pub kind: ChallengeKind,
    pub object_id: String,
    pub expires_at: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub presented_sets: Option<[Vec<ImageId>; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Otp(String),
    Password(String),
    Choices(Vec<ImageId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrantView {
    pub grant_id: String,
    pub object_id: String,
    pub expires_at: u64,
}

#[derive(Debug, Clone)]
pub struct AccessGrant {
    pub grant_id: String,
    pub user_id: String,
    pub object_id: String,
    pub issued_at: u64,
    pub ttl_seconds: u64,
    pub consumed: bool,
}

#[derive(Debug, Clone)]
pub struct PendingChallenge {
    pub challenge_id: String,
    pub kind: ChallengeKind,
    pub user_id: String,
    pub object_id: String,
    pub issued_at: u64,
    pub ttl_seconds: u64,
    /// Only tracked here for password re-entry; the OTP and graphical
    /// authorities track their own consumption.
    pub consumed: bool,
}

#[derive(Default)]
struct PendingBook {
    by_id: HashMap<String, PendingChallenge>,
    by_target: HashMap<(String, String), String>,
}

struct Session {
    user_id: String,
    last_seen: u64,
}

pub struct Service {
    config: ServerConfig,
    clock: Arc<dyn Clock>,
    store: Store,
    audit: AuditLog,
    transport: Arc<dyn SmsTransport>,
    otp: OtpAuthority,
    graphical: GraphicalAuthority,
    lockout: LockoutTracker,
    sessions: Mutex<HashMap<String, Session>>,
    pending: Mutex<PendingBook>,
    grants: Mutex<HashMap<String, AccessGrant>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Service {
    /// Production wiring: system clock and the file outbox.
    pub fn open(config: ServerConfig) -> Result<Self, StartupError> {
        let clock: Arc<dyn Clock> = Arc::new(SystemClock);
        let transport = Arc::new(OutboxTransport::new(config.outbox_path(), clock.clone()));
        Self::with_parts(config, clock, transport)
    }

    pub fn with_parts(
        config: ServerConfig,
        clock: Arc<dyn Clock>,
        transport: Arc<dyn SmsTransport>,
    ) -> Result<Self, StartupError> {
        let (store, reaped) = Store::open(&config.data_dir)?;
        if reaped > 0 {
            tracing::warn!(reaped, "removed orphan blobs");
        }
        let catalog = match &config.catalog_path {
            Some(p) => ImageCatalog::load(p)?,
            None => ImageCatalog::bundled(),
        };
        let audit = AuditLog::open(config.data_dir.join("audit.log"))?;
        Ok(Service {
            otp: OtpAuthority::new(config.otp_ttl_secs),
            graphical: GraphicalAuthority::new(catalog, config.graphical_ttl_secs),
            lockout: LockoutTracker::new(LockoutPolicy {
                threshold: config.lockout_threshold,
                cooldown_seconds: config.lockout_cooldown_secs,
            }),
            config,
            clock,
            store,
            audit,
            transport,
            sessions: Mutex::new(HashMap::new()),
            pending: Mutex::new(PendingBook::default()),
            grants: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    pub fn catalog(&self) -> &ImageCatalog {
        self.graphical.catalog()
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn audit_path(&self) -> &std::path::Path {
        self.audit.path()
    }

    fn now(&self) -> u64 {
        self.clock.now()
    }

    pub fn register(&self, req: RegisterRequest) -> Result<AccountView, ServiceError> {
        for (field, value) in [
            ("username", &req.username),
            ("password", &req.password),
            ("email", &req.email),
            ("mobile", &req.mobile),
        ] {
            if value.trim().is_empty() {
                return Err(ServiceError::WeakInput(format!("{field} must not be empty")));
            }
        }
        if req.mobile.contains(['\t', '\n', '\r']) {
            return Err(ServiceError::WeakInput("mobile contains control characters".into()));
        }
        let secret = enroll(self.catalog(), &req.graphical)
            .map_err(|e| ServiceError::InvalidSelection(e.to_string()))?;
        if self.store.account_by_username(&req.username).is_some() {
            return Err(ServiceError::DuplicateUsername);
        }
        let verifier = PasswordVerifier::create(&req.password, self.config.password_iterations, &mut rand::rng());
        let account = UserAccount::new(new_token(), req.username, verifier, req.email, req.mobile, Some(secret));
        self.store.insert_account(account.clone())?;
        self.audit.record(&AuditEvent::new(self.now(), "register", "accept").user(&account.user_id));
        Ok(AccountView { user_id: account.user_id, username: account.username })
    }

    pub fn login(&self, username: &str, password: &str) -> Result<SessionView, ServiceError> {
        let now = self.now();
        let Some(account) = self.store.account_by_username(username) else {
            dummy_verify(password, self.config.password_iterations);
            self.audit.record(&AuditEvent::new(now, "login", "reject").reason("unknown_user"));
            return Err(ServiceError::BadCredentials);
        };
        if !account.password_verifier.verify(password) {
            self.audit.record(&AuditEvent::new(now, "login", "reject").user(&account.user_id).reason("wrong_password"));
            return Err(ServiceError::BadCredentials);
        }
        let token = new_token();
        let mut sessions = lock(&self.sessions);
        let idle = self.config.session_idle_secs;
        sessions.retain(|_, s| is_live(s.last_seen, idle, now));
        sessions.insert(token.clone(), Session { user_id: account.user_id.clone(), last_seen: now });
        drop(sessions);
        self.audit.record(&AuditEvent::new(now, "login", "accept").user(&account.user_id));
        Ok(SessionView { token, idle_timeout_secs: idle })
    }

    /// Resolves a session token to its user and refreshes its idle timer.
    pub fn authenticate(&self, token: &str) -> Result<String, ServiceError> {
        let now = self.now();
        let mut sessions = lock(&self.sessions);
        let idle = self.config.session_idle_secs;
        match sessions.get_mut(token) {
            Some(s) if is_live(s.last_seen, idle, now) => {
                s.last_seen = now;
                Ok(s.user_id.clone())
            }
            Some(_) => {
                sessions.remove(token);
                Err(ServiceError::Unauthenticated)
            }
            None => Err(ServiceError::Unauthenticated),
        }
    }

    pub fn logout(&self, token: &str) {
        lock(&self.sessions).remove(token);
    }

    pub fn upload(&self, token: &str, req: UploadRequest) -> Result<ObjectView, ServiceError> {
        let user_id = self.authenticate(token)?;
        let cia = validate_rating(req.confidentiality, req.integrity, req.availability)?;
        if req.name.is_empty() || req.name.len() > MAX_NAME_LEN || req.name.contains(['\n', '\r', '\0']) {
            return Err(ServiceError::WeakInput(format!("name must be 1..={MAX_NAME_LEN} bytes on one line")));
        }
        if req.payload.len() > self.config.max_upload_bytes {
            return Err(ServiceError::PayloadTooLarge(self.config.max_upload_bytes));
        }
        let object_id = new_token();
        let blob_ref = self.store.write_blob(&object_id, &req.payload)?;
        let object = StoredObject {
            object_id: object_id.clone(),
            owner: user_id.clone(),
            name: req.name,
            cia,
            ring: classify(&cia),
            encrypted: req.encrypted,
            blob_ref,
            size_bytes: req.payload.len() as u64,
            created_at: self.now(),
        };
        self.store.insert_object(object.clone())?;
        self.audit.record(
            &AuditEvent::new(object.created_at, "upload", "accept")
                .user(&user_id)
                .object(&object_id)
                .reason(&format!("ring_{}", object.ring.level())),
        );
        Ok(ObjectView::from(&object))
    }

    pub fn list(&self, token: &str) -> Result<Vec<ObjectView>, ServiceError> {
        let user_id = self.authenticate(token)?;
        Ok(self.store.objects_of(&user_id).iter().map(ObjectView::from).collect())
    }

    fn owned_object(&self, user_id: &str, object_id: &str) -> Result<StoredObject, ServiceError> {
        let object = self.store.object(object_id).ok_or(ServiceError::NotFound)?;
        if object.owner != user_id {
            return Err(ServiceError::NotOwner);
        }
        Ok(object)
    }

    fn lockout_key(user_id: &str, object_id: &str) -> String {
        format!("{user_id}/{object_id}")
    }

    /// Issues the challenge the object's ring requires, replacing any pending
    /// challenge for the same user and object.
    pub fn request_download(&self, token: &str, object_id: &str) -> Result<ChallengeView, ServiceError> {
        let user_id = self.authenticate(token)?;
        let object = self.owned_object(&user_id, object_id)?;
        let account = self.store.account(&user_id).ok_or(ServiceError::Unauthenticated)?;
        let now = self.now();
        let kind = route_challenge(object.ring);

        let (challenge_id, ttl_seconds, presented_sets) = match kind {
            ChallengeKind::Otp => {
                let issued = self
                    .otp
                    .issue_challenge(&account, object_id, self.clock.as_ref(), self.transport.as_ref())
                    .map_err(|e| match e {
                        OtpError::Transport(t) => ServiceError::Transport(t.to_string()),
                        other => ServiceError::WeakInput(other.to_string()),
                    })?;
                (issued.challenge_id, issued.ttl_seconds, None)
            }
            ChallengeKind::Graphical => {
                if self.lockout.is_locked(&Self::lockout_key(&user_id, object_id), now) {
                    self.audit.record(
                        &AuditEvent::new(now, "access_request", "reject")
                            .user(&user_id)
                            .object(object_id)
                            .reason(RejectReason::LockedOut.as_str()),
                    );
                    return Err(ServiceError::LockedOut);
                }
                let ch = self.graphical.issue(&user_id, object_id, &mut rand::rng(), now);
                (ch.challenge_id, ch.ttl_seconds, Some(ch.presented_sets))
            }
            ChallengeKind::PasswordReentry => (new_token(), self.config.otp_ttl_secs, None),
        };

        let pending = PendingChallenge {
            challenge_id: challenge_id.clone(),
            kind,
            user_id: user_id.clone(),
            object_id: object_id.to_owned(),
            issued_at: now,
            ttl_seconds,
            consumed: false,
        };
        let prior = {
            let mut book = lock(&self.pending);
            let horizon_ok = |p: &PendingChallenge| is_live(p.issued_at, 2 * p.ttl_seconds, now);
            book.by_id.retain(|_, p| horizon_ok(p));
            let prior = book
                .by_target
                .insert((user_id.clone(), object_id.to_owned()), challenge_id.clone())
                .and_then(|old| book.by_id.remove(&old));
            book.by_id.insert(challenge_id.clone(), pending.clone());
            prior
        };
        if let Some(old) = prior {
            match old.kind {
                ChallengeKind::Otp => self.otp.revoke(&old.challenge_id),
                ChallengeKind::Graphical => self.graphical.revoke(&old.challenge_id),
                ChallengeKind::PasswordReentry => {}
            }
        }
        self.audit.record(
            &AuditEvent::new(now, "access_request", "issued")
                .user(&user_id)
                .object(object_id)
                .challenge(&challenge_id, kind.as_str()),
        );
        Ok(ChallengeView {
            challenge_id,
            kind,
            object_id: object_id.to_owned(),
            expires_at: now.saturating_add(ttl_seconds),
            presented_sets,
        })
    }

    /// Checks an answer. Every rejection surfaces as [`ServiceError::ChallengeFailed`];
    /// the precise reason goes to the audit log.
    pub fn complete_challenge(
        &self,
        token: &str,
        challenge_id: &str,
        answer: &Answer,
    ) -> Result<GrantView, ServiceError> {
        let user_id = self.authenticate(token)?;
        let now = self.now();
        let pending = lock(&self.pending).by_id.get(challenge_id).cloned();
        let verdict = match &pending {
            None => Err(RejectReason::Unknown),
            Some(p) if p.user_id != user_id => Err(RejectReason::Unknown),
            Some(p) => self.check_answer(p, answer, now),
        };
        let kind = pending.as_ref().map_or("unknown", |p| p.kind.as_str());
        let mut event = AuditEvent::new(now, "challenge_answer", "accept")
            .user(&user_id)
            .challenge(challenge_id, kind);
        if let Some(p) = &pending {
            event = event.object(&p.object_id);
        }
        match verdict.map(|()| pending) {
            Ok(Some(p)) => {
                let grant = AccessGrant {
                    grant_id: new_token(),
                    user_id,
                    object_id: p.object_id.clone(),
                    issued_at: now,
                    ttl_seconds: self.config.grant_ttl_secs,
                    consumed: false,
                };
                let view = GrantView {
                    grant_id: grant.grant_id.clone(),
                    object_id: grant.object_id.clone(),
                    expires_at: now.saturating_add(grant.ttl_seconds),
                };
                lock(&self.grants).insert(grant.grant_id.clone(), grant);
                self.audit.record(&event);
                Ok(view)
            }
            other => {
                let reason = other.err().unwrap_or(RejectReason::Unknown);
                event.outcome = "reject".into();
                self.audit.record(&event.reason(reason.as_str()));
                Err(ServiceError::ChallengeFailed)
            }
        }
    }

    fn check_answer(&self, pending: &PendingChallenge, answer: &Answer, now: u64) -> Result<(), RejectReason> {
        match (pending.kind, answer) {
            (ChallengeKind::Otp, Answer::Otp(code)) => self.otp.verify(&pending.challenge_id, code, now),
            (ChallengeKind::Graphical, Answer::Choices(ids)) => {
                let key = Self::lockout_key(&pending.user_id, &pending.object_id);
                if self.lockout.is_locked(&key, now) {
                    return Err(RejectReason::LockedOut);
                }
                let secret = self
                    .store
                    .account(&pending.user_id)
                    .and_then(|a| a.graphical_secret)
                    .ok_or(RejectReason::Mismatch)?;
                let verdict = self.graphical.verify(&pending.challenge_id, &secret, ids, now);
                match verdict {
                    Ok(()) => self.lockout.record_success(&key),
                    Err(RejectReason::Mismatch) => {
                        if self.lockout.record_failure(&key, now) {
                            self.graphical.revoke(&pending.challenge_id);
                        }
                    }
                    Err(_) => {}
                }
                verdict
            }
            (ChallengeKind::PasswordReentry, Answer::Password(password)) => {
                if pending.consumed {
                    return Err(RejectReason::AlreadyUsed);
                }
                if !is_live(pending.issued_at, pending.ttl_seconds, now) {
                    return Err(RejectReason::Expired);
                }
                let account = self.store.account(&pending.user_id).ok_or(RejectReason::Unknown)?;
                // The expensive hash runs outside any lock; consumption is decided below.
                if !account.password_verifier.verify(password) {
                    return Err(RejectReason::Mismatch);
                }
                let mut book = lock(&self.pending);
                match book.by_id.get_mut(&pending.challenge_id) {
                    Some(p) if !p.consumed => {
                        p.consumed = true;
                        Ok(())
                    }
                    Some(_) => Err(RejectReason::AlreadyUsed),
                    None => Err(RejectReason::Unknown),
                }
            }
            _ => Err(RejectReason::Mismatch),
        }
    }

    /// Redeems a grant for the object's bytes. A grant works once, for its owner, within its ttl.
    pub fn download(&self, token: &str, grant_id: &str) -> Result<(ObjectView, Vec<u8>), ServiceError> {
        let user_id = self.authenticate(token)?;
        let now = self.now();
        let object_id = {
            let mut grants = lock(&self.grants);
            grants.retain(|_, g| is_live(g.issued_at, 2 * g.ttl_seconds, now));
            let reason = match grants.get_mut(grant_id) {
                None => Some("unknown"),
                Some(g) if g.user_id != user_id => Some("wrong_user"),
                Some(g) if g.consumed => Some("already_used"),
                Some(g) if !is_live(g.issued_at, g.ttl_seconds, now) => Some("expired"),
                Some(g) => {
                    g.consumed = true;
                    None
                }
            };
            if let Some(reason) = reason {
                drop(grants);
                self.audit.record(&AuditEvent::new(now, "download", "reject").user(&user_id).reason(reason));
                return Err(ServiceError::GrantInvalid);
            }
            grants[grant_id].object_id.clone()
        };
        let object = self.store.object(&object_id).ok_or(ServiceError::NotFound)?;
        let bytes = self.store.read_blob(&object)?;
        self.audit.record(&AuditEvent::new(now, "download", "accept").user(&user_id).object(&object_id));
        Ok((ObjectView::from(&object), bytes))
    }
}
