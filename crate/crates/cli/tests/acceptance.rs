//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod support;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Barrier};
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};
use reqwest::blocking::Client;
use ringvault_core::challenge::RejectReason;
use ringvault_core::classification::{classify, classify_batch, CiaRating, ProtectionRing};
use ringvault_core::clock::ManualClock;
use ringvault_core::crypto::{
    ciphertext_len, decrypt, derive_key, des_block_encrypt, encrypt, EncryptionKey, BLOCK_SIZE,
};
use ringvault_core::graphical::{enroll, GraphicalAuthority, ImageCatalog, SET_COUNT, SET_SIZE};
use ringvault_core::otp::{
    build_seed_string, digest_seed, encode_otp, fold_digest, generate_code, MemoryTransport, OtpAccount,
    OtpAuthority, OtpSeed, OutboxTransport,
};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use support::{contains, walk, CliRunner, TestServer};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------- 1

/// The paper's rules restated over integer sums, independent of the library.
fn oracle_ring(c: u8, i: u8, a: u8) -> u8 {
    let sum = c + i; // ci = sum / 2
    if c >= 7 && i >= 7 {
        1
    } else if sum <= 6 {
        3
    } else if sum >= 10 || a <= 5 {
        // ci >= 5 outside the high ring, or the middle band with a <= 5
        2
    } else {
        3
    }
}

fn classification() -> Check {
    let mut n = 0;
    let mut ratings = Vec::new();
    for c in 1..=10u8 {
        for i in 1..=10u8 {
            for a in 1..=10u8 {
                let r = CiaRating::new(c.into(), i.into(), a.into()).map_err(|e| e.to_string())?;
                let got = classify(&r).level();
                ensure!(got == oracle_ring(c, i, a), "({c},{i},{a}): library {got}, oracle {}", oracle_ring(c, i, a));
                ensure!(classify(&r).level() == got, "({c},{i},{a}) not deterministic");
                ratings.push(r);
                n += 1;
            }
        }
    }
    let batch = classify_batch(&ratings);
    ensure!(batch.iter().zip(&ratings).all(|(b, r)| *b == classify(r)), "batch disagrees with map");
    let examples = [
        ((7, 7, 1), ProtectionRing::Ring1High),
        ((4, 4, 3), ProtectionRing::Ring2Mid),
        ((4, 4, 8), ProtectionRing::Ring3Low),
        ((2, 2, 9), ProtectionRing::Ring3Low),
        ((10, 2, 5), ProtectionRing::Ring2Mid),
        ((4, 4, 5), ProtectionRing::Ring2Mid),
    ];
    for ((c, i, a), want) in examples {
        let got = classify(&CiaRating::new(c, i, a).unwrap());
        ensure!(got == want, "({c},{i},{a}) -> {got:?}, expected {want:?}");
    }
    Ok(format!("{n} triples agree with the rule-table oracle; 6 worked examples hold"))
}

// ---------------------------------------------------------------- 2

#[derive(Deserialize)]
struct Vectors {
    otp: Vec<OtpVector>,
}

#[derive(Deserialize)]
struct OtpVector {
    username: String,
    password_material: String,
    email: String,
    mobile: String,
    timestamp: u64,
    expected: String,
}

fn is_code(s: &str) -> bool {
    s.len() == 10 && s.bytes().all(|b| b.is_ascii_digit() || (b'A'..=b'F').contains(&b))
}

fn otp_construction() -> Check {
    ensure!(fold_digest(&[0u8; 20]).unwrap() == [0u8; 5], "all-zero digest does not fold to zeros");
    let group = [1u8, 2, 3, 4, 5];
    let repeated: Vec<u8> = group.iter().cycle().take(20).copied().collect();
    ensure!(fold_digest(&repeated).unwrap() == [0u8; 5], "four equal groups do not cancel");
    let mut firsts = [0u8; 20];
    for (g, v) in [1u8, 2, 4, 8].into_iter().enumerate() {
        firsts[g * 5] = v;
    }
    ensure!(fold_digest(&firsts).unwrap() == [0x0F, 0, 0, 0, 0], "first-byte fold is not 0F");
    ensure!(fold_digest(&[0u8; 19]).is_err(), "short digest accepted");

    let mut rng = StdRng::seed_from_u64(0x07b);
    for _ in 0..1_000 {
        let (mut a, mut b) = ([0u8; 20], [0u8; 20]);
        rng.fill_bytes(&mut a);
        rng.fill_bytes(&mut b);
        let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let (fa, fb, fab) = (fold_digest(&a).unwrap(), fold_digest(&b).unwrap(), fold_digest(&ab).unwrap());
        ensure!((0..5).all(|j| fab[j] == fa[j] ^ fb[j]), "fold is not XOR-linear");
    }

    let vectors: Vectors = serde_json::from_str(include_str!("../../core/tests/data/vectors.json")).unwrap();
    ensure!(vectors.otp.len() >= 100, "only {} oracle seeds", vectors.otp.len());
    let mut mismatches = 0;
    for v in &vectors.otp {
        let seed = OtpSeed {
            username: v.username.clone(),
            password_material: v.password_material.clone(),
            email: v.email.clone(),
            mobile: v.mobile.clone(),
            timestamp: v.timestamp,
        };
        let staged = encode_otp(&fold_digest(&digest_seed(&build_seed_string(&seed))).unwrap());
        let code = generate_code(&seed);
        ensure!(staged == code, "staged pipeline differs from generate_code");
        ensure!(is_code(code.as_str()), "{:?} is not ^[0-9A-F]{{10}}$", code.as_str());
        if code.as_str() != v.expected {
            mismatches += 1;
        }
    }
    ensure!(mismatches == 0, "{mismatches} mismatches against the oracle");

    for _ in 0..10_000 {
        let mut d = [0u8; 20];
        rng.fill_bytes(&mut d);
        let code = encode_otp(&fold_digest(&d).unwrap());
        ensure!(is_code(code.as_str()), "{:?} is not ^[0-9A-F]{{10}}$", code.as_str());
    }
    Ok(format!("fold identities hold; {} oracle seeds, 0 mismatches; 10128 codes well-formed", vectors.otp.len()))
}

// ---------------------------------------------------------------- 3

struct Account;

impl OtpAccount for Account {
    fn user_id(&self) -> &str {
        "user-1"
    }
    fn username(&self) -> &str {
        "alice"
    }
    fn password_material(&self) -> &str {
        "pbkdf2-sha256$100000$00$11"
    }
    fn email(&self) -> &str {
        "alice@example.org"
    }
    fn mobile(&self) -> Option<&str> {
        Some("+15550100")
    }
}

fn otp_lifecycle() -> Check {
    let issued = 1_700_000_000;
    let auth = OtpAuthority::new(600);
    let clock = ManualClock::new(issued);
    let sms = MemoryTransport::new();

    let ch = auth.issue_challenge(&Account, "obj-a", &clock, &sms).map_err(|e| e.to_string())?;
    let code = sms.last_code().ok_or("no message delivered")?;
    let r = auth.verify(&ch.challenge_id, code.as_str(), issued + 599);
    ensure!(r == Ok(()), "rejected at issued+599: {r:?}");
    let r = auth.verify(&ch.challenge_id, code.as_str(), issued + 599);
    ensure!(r == Err(RejectReason::AlreadyUsed), "second submission gave {r:?}");

    let late = auth.issue_challenge(&Account, "obj-b", &clock, &sms).map_err(|e| e.to_string())?;
    let code = sms.last_code().unwrap();
    let r = auth.verify(&late.challenge_id, code.as_str(), issued + 601);
    ensure!(r == Err(RejectReason::Expired), "issued+601 gave {r:?}");

    let auth = Arc::new(auth);
    let ch = auth.issue_challenge(&Account, "obj-c", &clock, &sms).map_err(|e| e.to_string())?;
    let code = sms.last_code().unwrap().as_str().to_owned();
    let barrier = Arc::new(Barrier::new(16));
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let (auth, barrier, id, code) = (auth.clone(), barrier.clone(), ch.challenge_id.clone(), code.clone());
            std::thread::spawn(move || {
                barrier.wait();
                auth.verify(&id, &code, issued + 1)
            })
        })
        .collect();
    let verdicts: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    let accepts = verdicts.iter().filter(|v| v.is_ok()).count();
    ensure!(accepts == 1, "{accepts} of 16 concurrent verifications accepted");
    Ok("accept at +599, reject at +601, replay rejected, 1 of 16 concurrent accepts".into())
}

// ---------------------------------------------------------------- 4

fn des() -> Check {
    let key = EncryptionKey::from_bytes(0x1334_5779_9BBC_DFF1u64.to_be_bytes());
    let ct = des_block_encrypt(&0x0123_4567_89AB_CDEFu64.to_be_bytes(), &key);
    ensure!(u64::from_be_bytes(ct) == 0x85E8_1354_0F0A_B405, "KAT gave {:016X}", u64::from_be_bytes(ct));

    let mut rng = StdRng::seed_from_u64(0xde5);
    let key = derive_key("acceptance passphrase").unwrap();
    for n in 0..1_000 {
        let len = match n {
            0 => 0,
            1 => 4096,
            _ => rng.random_range(0..=4096),
        };
        let mut pt = vec![0u8; len];
        rng.fill_bytes(&mut pt);
        let env = encrypt(&pt, &key, &mut rng);
        let back = decrypt(&env, &key).map_err(|e| format!("len {len}: {e}"))?;
        ensure!(back == pt, "roundtrip mismatch at len {len}");
    }
    for len in 0..=64usize {
        let expected = len + (BLOCK_SIZE - len % BLOCK_SIZE);
        let env = encrypt(&vec![0xA5; len], &key, &mut rng);
        ensure!(ciphertext_len(len) == expected, "formula gives {} for {len}", ciphertext_len(len));
        ensure!(env.ciphertext().len() == expected, "ciphertext {} bytes for {len}", env.ciphertext().len());
    }
    Ok("KAT exact; 1000 CBC roundtrips (0..=4096 bytes); length formula exact for 0..=64".into())
}

// ---------------------------------------------------------------- 5

fn graphical() -> Check {
    let catalog = ImageCatalog::bundled();
    let authority = GraphicalAuthority::new(catalog.clone(), 600);
    let mut rng = StdRng::seed_from_u64(512);
    let now = 1_700_000_000;

    for _ in 0..1_000 {
        let ch = authority.issue("u", "soundness", &mut rng, now);
        for k in 0..SET_COUNT {
            let mut shown = ch.presented_sets[k].clone();
            ensure!(shown.len() == SET_SIZE, "set {k} has {} entries", shown.len());
            shown.sort_unstable();
            let mut want = catalog.set_ids(k);
            want.sort_unstable();
            ensure!(shown == want, "set {k} is not a permutation of the catalog set");
        }
    }

    let secret = enroll(&catalog, &[catalog.set_ids(0)[2], catalog.set_ids(1)[5], catalog.set_ids(2)[7]]).unwrap();
    let mut layouts = HashSet::new();
    let mut attempts = 0;
    while layouts.len() < 100 {
        attempts += 1;
        ensure!(attempts < 10_000, "could not draw 100 distinct shuffles");
        let ch = authority.issue("u", "position", &mut rng, now);
        if !layouts.insert(ch.presented_sets.clone()) {
            continue;
        }
        // the user finds their images wherever they landed
        let picks: Vec<u32> = (0..SET_COUNT)
            .map(|k| *ch.presented_sets[k].iter().find(|id| secret.selections.contains(id)).unwrap())
            .collect();
        let r = authority.verify(&ch.challenge_id, &secret, &picks, now);
        ensure!(r == Ok(()), "correct answer rejected under a shuffle: {r:?}");
    }

    let trials = 100_000u32;
    let mut accepted = 0u32;
    for _ in 0..trials {
        let picks: Vec<u32> =
            (0..SET_COUNT).map(|k| catalog.set_ids(k)[rng.random_range(0..SET_SIZE)]).collect();
        let secret = enroll(&catalog, &picks).unwrap();
        let ch = authority.issue("u", "guess", &mut rng, now);
        let guess: Vec<u32> =
            (0..SET_COUNT).map(|k| ch.presented_sets[k][rng.random_range(0..SET_SIZE)]).collect();
        if authority.verify(&ch.challenge_id, &secret, &guess, now).is_ok() {
            accepted += 1;
        }
    }
    let p = 1.0 / (SET_SIZE as f64).powi(SET_COUNT as i32);
    let n = f64::from(trials);
    let z = 2.575_829_303_549; // two-sided 99%
    let half = z * (p * (1.0 - p) / n).sqrt();
    let (lo, hi) = (p - half, p + half);
    let rate = f64::from(accepted) / n;
    ensure!((lo..=hi).contains(&rate), "guess rate {rate:.5} outside 99% CI [{lo:.5}, {hi:.5}]");
    Ok(format!(
        "1000 challenges are permutations; 100 distinct shuffles accepted; guess rate {rate:.5} in [{lo:.5}, {hi:.5}]"
    ))
}

// ---------------------------------------------------------------- 6, 7

struct Api {
    http: Client,
    base: String,
}

impl Api {
    fn call(&self, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> (u16, Value) {
        let url = format!("{}{path}", self.base);
        let mut req = match method {
            "GET" => self.http.get(url),
            _ => self.http.post(url),
        };
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().expect("request failed");
        let status = resp.status().as_u16();
        (status, resp.json().unwrap_or(Value::Null))
    }
}

const ALICE_PW: &str = "alice-password-7Qx";
const MALLORY_PW: &str = "mallory-password-2Vn";
const CLI_PW: &str = "cli-user-password-9Kd";
const PASSPHRASE: &str = "client side passphrase 4Tz";
const ALICE_MOBILE: &str = "+15550101";
const SECRET: [u32; 3] = [6, 11, 19];

fn sha256(bytes: &[u8]) -> Vec<u8> {
    Sha256::digest(bytes).to_vec()
}

fn end_to_end(server: &TestServer) -> Check {
    let api = Api { http: Client::new(), base: server.url.clone() };
    for (user, pw, mobile) in [("alice", ALICE_PW, ALICE_MOBILE), ("mallory", MALLORY_PW, "+15550102")] {
        let (s, b) = api.call(
            "POST",
            "/register",
            None,
            Some(json!({"username": user, "password": pw, "email": format!("{user}@example.org"), "mobile": mobile, "graphical": SECRET})),
        );
        ensure!(s == 200, "register {user}: {s} {b}");
    }
    let login = |user: &str, pw: &str| -> Result<String, String> {
        let (s, b) = api.call("POST", "/login", None, Some(json!({"username": user, "password": pw})));
        ensure!(s == 200, "login {user}: {s} {b}");
        Ok(b["token"].as_str().unwrap().to_owned())
    };
    let alice = login("alice", ALICE_PW)?;
    let mallory = login("mallory", MALLORY_PW)?;

    let mut rng = StdRng::seed_from_u64(6);
    for (ring, cia, kind) in [(1u64, (9, 8, 2), "otp"), (2, (4, 5, 3), "graphical"), (3, (2, 3, 9), "password_reentry")] {
        let mut payload = vec![0u8; 10_000 + ring as usize];
        rng.fill_bytes(&mut payload);
        let (s, obj) = api.call(
            "POST",
            "/objects",
            Some(&alice),
            Some(json!({"name": format!("ring{ring}.bin"), "payload_b64": B64.encode(&payload),
                        "confidentiality": cia.0, "integrity": cia.1, "availability": cia.2})),
        );
        ensure!(s == 200 && obj["ring"] == ring, "upload for ring {ring}: {s} {obj}");
        let id = obj["object_id"].as_str().unwrap();

        let (s, ch) = api.call("POST", &format!("/objects/{id}/access-request"), Some(&alice), None);
        ensure!(s == 200 && ch["kind"] == kind, "ring {ring} challenge: {s} {ch}");
        let cid = ch["challenge_id"].as_str().unwrap();
        let answer = match kind {
            "otp" => {
                let code = OutboxTransport::latest_code_for(&server.outbox, ALICE_MOBILE)
                    .map_err(|e| e.to_string())?
                    .ok_or("no code in outbox")?;
                json!({"otp": code.as_str()})
            }
            "graphical" => {
                let sets: Vec<Vec<u32>> = serde_json::from_value(ch["presented_sets"].clone()).unwrap();
                let picks: Vec<u32> =
                    sets.iter().map(|s| *s.iter().find(|id| SECRET.contains(id)).unwrap()).collect();
                json!({"choices": picks})
            }
            _ => json!({"password": ALICE_PW}),
        };

        let (s, _) = api.call("GET", "/download/not-a-grant", Some(&alice), None);
        ensure!(s == 403, "download without a grant gave {s}");

        let (s, grant) = api.call("POST", &format!("/challenges/{cid}/answer"), Some(&alice), Some(answer));
        ensure!(s == 200, "ring {ring} answer: {s} {grant}");
        let gid = grant["grant_id"].as_str().unwrap();

        let (s, _) = api.call("GET", &format!("/download/{gid}"), Some(&mallory), None);
        ensure!(s == 403, "another user's session redeemed the grant ({s})");

        let (s, dl) = api.call("GET", &format!("/download/{gid}"), Some(&alice), None);
        ensure!(s == 200, "ring {ring} download: {s}");
        let got = B64.decode(dl["payload_b64"].as_str().unwrap()).unwrap();
        ensure!(sha256(&got) == sha256(&payload), "ring {ring}: downloaded bytes differ");

        let (s, _) = api.call("GET", &format!("/download/{gid}"), Some(&alice), None);
        ensure!(s == 403, "consumed grant redeemed again ({s})");
    }
    Ok("rings 1-3 roundtrip hash-equal; no-grant, consumed-grant and foreign-session downloads refused".into())
}

/// Drives the real client binary so its requests pass through the capture layer.
fn client_traffic(server: &TestServer) -> Result<(), String> {
    let cli = CliRunner::new(server);
    let pw = [("RINGVAULT_PASSWORD", CLI_PW)];
    let phrase = [("RINGVAULT_PASSPHRASE", PASSPHRASE)];
    let ok = |out: std::process::Output, what: &str| -> Result<String, String> {
        ensure!(out.status.success(), "{what}: {}", String::from_utf8_lossy(&out.stderr));
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    };
    ok(
        cli.run(
            &["register", "--username", "carol", "--email", "c@example.org", "--mobile", "+15550103", "--choices", "2,10,18"],
            &pw,
        ),
        "register",
    )?;
    ok(cli.run(&["login", "--username", "carol"], &pw), "login")?;
    std::fs::write(cli.path("notes.txt"), b"cli plaintext body").unwrap();
    for (cia, extra) in [(["2", "2", "9"], vec!["--password", CLI_PW]), (["4", "4", "4"], vec!["--choices", "18,2,10"])] {
        let text = ok(
            cli.run(
                &["put", "notes.txt", "--confidentiality", cia[0], "--integrity", cia[1], "--availability", cia[2], "--encrypted"],
                &phrase,
            ),
            "put",
        )?;
        let id = text.lines().find_map(|l| l.strip_prefix("object_id: ")).ok_or("no object id")?.to_owned();
        let mut args = vec!["get", id.as_str(), "-o", "back.txt", "--decrypt"];
        args.extend(extra.iter().copied());
        ok(cli.run(&args, &phrase), "get")?;
        ensure!(std::fs::read(cli.path("back.txt")).unwrap() == b"cli plaintext body", "cli roundtrip differs");
    }
    ok(cli.run(&["list"], &[]), "list")?;
    Ok(())
}

fn secrecy(server: &TestServer) -> Check {
    client_traffic(server)?;

    let key = derive_key(PASSPHRASE).unwrap();
    let hex = |upper: bool| -> Vec<u8> {
        key.as_bytes()
            .iter()
            .map(|b| if upper { format!("{b:02X}") } else { format!("{b:02x}") })
            .collect::<String>()
            .into_bytes()
    };
    let codes: Vec<String> = OutboxTransport::read_records(&server.outbox)
        .map_err(|e| e.to_string())?
        .iter()
        .filter_map(|r| r.code())
        .map(|c| c.as_str().to_owned())
        .collect();
    ensure!(!codes.is_empty(), "no OTP was issued, scan would be vacuous");

    // (label, needle, endpoints whose request body legitimately carries it)
    let mut needles: Vec<(&str, Vec<u8>, &[&str])> = vec![
        ("passphrase", PASSPHRASE.as_bytes().to_vec(), &[]),
        ("key bytes", key.as_bytes().to_vec(), &[]),
        ("key hex", hex(true), &[]),
        ("key hex", hex(false), &[]),
    ];
    let passwords = [ALICE_PW, MALLORY_PW, CLI_PW];
    for pw in passwords {
        needles.push(("password", pw.as_bytes().to_vec(), &["/register", "/login", "/answer"]));
    }
    for c in &codes {
        needles.push(("otp code", c.as_bytes().to_vec(), &["/answer"]));
        needles.push(("otp code", c.to_lowercase().into_bytes(), &["/answer"]));
    }

    let files = walk(&server.data_dir());
    ensure!(files.iter().any(|p| p.ends_with("meta.json")), "no serialized store found");
    for path in &files {
        let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
        for (what, needle, _) in &needles {
            ensure!(!contains(&bytes, needle), "{what} found in {}", path.display());
        }
    }

    let exchanges = server.exchanges();
    for x in &exchanges {
        for (what, needle, carriers) in &needles {
            ensure!(!contains(&x.response_body, needle), "{what} in response to {} {}", x.method, x.uri);
            ensure!(!contains(x.uri.as_bytes(), needle), "{what} in request uri {}", x.uri);
            ensure!(!contains(x.request_headers.as_bytes(), needle), "{what} in request headers for {}", x.uri);
            let carrier = x.method == "POST" && carriers.iter().any(|c| x.uri.ends_with(c));
            ensure!(carrier || !contains(&x.request_body, needle), "{what} in request body of {} {}", x.method, x.uri);
        }
    }
    Ok(format!(
        "{} stored files and {} HTTP exchanges clean of {} passwords, {} OTP code(s), key and passphrase",
        files.len(),
        exchanges.len(),
        passwords.len(),
        codes.len()
    ))
}

// ----------------------------------------------------------------

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Option<Duration>,
}

fn run(c: &Criterion, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let result = match (result, c.budget) {
        (Ok(_), Some(b)) if elapsed > b => Err(format!("took {:.2}s, budget {:.0}s", elapsed.as_secs_f64(), b.as_secs_f64())),
        (r, _) => r,
    };
    let budget = c.budget.map_or(String::new(), |b| format!(" / {:.0}s", b.as_secs_f64()));
    let (tag, detail) = match &result {
        Ok(d) => ("PASS", d.as_str()),
        Err(e) => ("FAIL", e.as_str()),
    };
    println!("{tag} [{}] {:<26} {:>7.3}s{budget:<6}  {detail}", c.id, c.name, elapsed.as_secs_f64());
    result.is_ok()
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let mut ok = true;
    ok &= run(&Criterion { id: 1, name: "classification", budget: secs(1) }, classification);
    ok &= run(&Criterion { id: 2, name: "otp construction", budget: secs(5) }, otp_construction);
    ok &= run(&Criterion { id: 3, name: "otp lifecycle", budget: None }, otp_lifecycle);
    ok &= run(&Criterion { id: 4, name: "des", budget: None }, des);
    ok &= run(&Criterion { id: 5, name: "graphical password", budget: secs(30) }, graphical);

    // Production password hashing cost, so the runtime budget is honest.
    let server = TestServer::start_with(|_| {});
    ok &= run(&Criterion { id: 6, name: "end-to-end per ring", budget: secs(30) }, || end_to_end(&server));
    ok &= run(&Criterion { id: 7, name: "secrecy scans", budget: None }, || secrecy(&server));
    drop(server);

    if !ok {
        println!("acceptance: FAILED");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
