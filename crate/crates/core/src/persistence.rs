//! Player profiles and in-flight sessions on disk.
//!
//! Every stored file is a checksummed document: a pretty-printed JSON body
//! ending in a newline, then one footer line `#crc32 <8 lowercase hex>` with
//! the CRC-32 (IEEE) of the body bytes. See `docs/save-format.md` for the
//! full layout.
//!
//! ```text
//! <data-dir>/index.json          name (lowercased) -> player id
//! <data-dir>/players/<id>.json   PlayerProfile
//! <data-dir>/sessions/<id>.json  GameSession
//! ```
//!
//! Writes go to a temporary file in the target directory which is synced
//! and renamed over the destination, so readers see either the old or the
//! new document. Writers are serialized per key through [`Store::with_player`]
//! and [`Store::with_session`].

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::economy::{Economy, QuestState, Wallet};
use crate::gameplay::GameSession;

pub const PROFILE_SCHEMA_VERSION: u32 = 2;
pub const SESSION_SCHEMA_VERSION: u32 = 1;
pub const MAX_NAME_CHARS: usize = 32;

const FOOTER_TAG: &str = "#crc32 ";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no record for {0}")]
    NotFound(String),
    #[error("name `{0}` is already taken")]
    DuplicateName(String),
    #[error("invalid name: {0}")]
    InvalidName(String),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("stored document {path} is corrupt: {reason}")]
    LoadCorrupt { path: PathBuf, reason: String },
    #[error("document schema version {found} is newer than supported {supported}")]
    UnsupportedVersion { found: u64, supported: u32 },
    #[error("data directory {path} is not writable: {source}")]
    DataDirUnwritable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settings {
    pub music_on: bool,
    pub volume: u8,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            music_on: true,
            volume: 80,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<(), StoreError> {
        if self.volume > 100 {
            return Err(StoreError::InvalidSettings(format!(
                "volume {} outside 0..=100",
                self.volume
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub games_played: u64,
    pub victories: u64,
    pub questions_answered: u64,
    pub correct_answers: u64,
}

/// One finished game, kept as the player's history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSummary {
    pub session_id: String,
    pub victory: bool,
    pub turns: u32,
    pub points: u64,
    pub finished_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub schema_version: u32,
    pub player_id: String,
    pub name: String,
    pub settings: Settings,
    pub wallet: Wallet,
    pub quests: QuestState,
    pub stats: Stats,
    pub history: Vec<GameSummary>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    /// Fields written by newer tools; kept and written back untouched.
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl PlayerProfile {
    pub fn new(player_id: String, name: &str, now: DateTime<Utc>, economy: &Economy) -> Result<Self, StoreError> {
        Ok(Self {
            schema_version: PROFILE_SCHEMA_VERSION,
            player_id,
            name: validate_name(name)?,
            settings: Settings::default(),
            wallet: economy.new_wallet(now),
            quests: QuestState::fresh(now),
            stats: Stats::default(),
            history: Vec::new(),
            created_at: now,
            updated_at: now,
            extra: BTreeMap::new(),
        })
    }
}

/// Trimmed name of 1 to 32 characters without control characters.
pub fn validate_name(raw: &str) -> Result<String, StoreError> {
    let name = raw.trim();
    let chars = name.chars().count();
    if chars == 0 {
        return Err(StoreError::InvalidName("name is empty".into()));
    }
    if chars > MAX_NAME_CHARS {
        return Err(StoreError::InvalidName(format!(
            "name has {chars} characters, at most {MAX_NAME_CHARS} allowed"
        )));
    }
    if name.chars().any(char::is_control) {
        return Err(StoreError::InvalidName("name contains control characters".into()));
    }
    Ok(name.to_string())
}

fn name_key(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Frames a JSON body with the checksum footer.
pub fn encode_document<T: Serialize>(value: &T) -> Vec<u8> {
    let mut body = serde_json::to_vec_pretty(value).expect("document types serialize");
    body.push(b'\n');
    let crc = crc32fast::hash(&body);
    body.extend_from_slice(format!("{FOOTER_TAG}{crc:08x}\n").as_bytes());
    body
}

/// Verifies the footer and returns the JSON body.
pub fn decode_document(bytes: &[u8]) -> Result<&[u8], String> {
    let text = std::str::from_utf8(bytes).map_err(|_| "not UTF-8".to_string())?;
    let body_end = text
        .strip_suffix('\n')
        .and_then(|t| t.rfind('\n'))
        .map(|i| i + 1)
        .ok_or("missing checksum footer")?;
    let footer = text[body_end..].trim_end_matches('\n');
    let hex = footer
        .strip_prefix(FOOTER_TAG)
        .ok_or("missing checksum footer")?;
    if hex.len() != 8 {
        return Err(format!("malformed checksum `{hex}`"));
    }
    let expected = u32::from_str_radix(hex, 16).map_err(|_| format!("malformed checksum `{hex}`"))?;
    let body = &bytes[..body_end];
    let actual = crc32fast::hash(body);
    if actual != expected {
        return Err(format!("checksum mismatch: footer {expected:08x}, body {actual:08x}"));
    }
    Ok(body)
}

/// Upgrades a profile document to [`PROFILE_SCHEMA_VERSION`].
///
/// Version 1 predates quests and history: quests start fresh for `now`'s UTC
/// day and history starts empty. Fields this version does not know are left
/// in place.
pub fn migrate(mut doc: Value, now: DateTime<Utc>) -> Result<Value, StoreError> {
    let version = doc
        .get("schema_version")
        .and_then(Value::as_u64)
        .unwrap_or(1);
    if version > PROFILE_SCHEMA_VERSION as u64 {
        return Err(StoreError::UnsupportedVersion {
            found: version,
            supported: PROFILE_SCHEMA_VERSION,
        });
    }
    let Some(obj) = doc.as_object_mut() else {
        return Ok(doc);
    };
    if version < 2 {
        obj.entry("quests")
            .or_insert_with(|| serde_json::to_value(QuestState::fresh(now)).unwrap());
        obj.entry("history").or_insert_with(|| Value::Array(Vec::new()));
    }
    obj.insert("schema_version".into(), Value::from(PROFILE_SCHEMA_VERSION));
    Ok(doc)
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct NameIndex {
    schema_version: u32,
    names: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct SessionDocument {
    schema_version: u32,
    session: GameSession,
}

pub struct Store {
    root: PathBuf,
    index: Mutex<NameIndex>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for dir in [root.clone(), root.join("players"), root.join("sessions")] {
            std::fs::create_dir_all(&dir).map_err(|source| StoreError::DataDirUnwritable {
                path: dir.clone(),
                source,
            })?;
        }
        // Probe write access up front rather than on the first save.
        tempfile::NamedTempFile::new_in(&root).map_err(|source| StoreError::DataDirUnwritable {
            path: root.clone(),
            source,
        })?;
        let index_path = root.join("index.json");
        let index = if index_path.exists() {
            read_document(&index_path)?
        } else {
            NameIndex {
                schema_version: 1,
                names: BTreeMap::new(),
            }
        };
        Ok(Self {
            root,
            index: Mutex::new(index),
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn profile_path(&self, player_id: &str) -> PathBuf {
        self.root.join("players").join(format!("{}.json", file_stem(player_id)))
    }

    fn session_path(&self, session_id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{}.json", file_stem(session_id)))
    }

    fn lock_for(&self, key: String) -> Arc<Mutex<()>> {
        self.locks.lock().unwrap().entry(key).or_default().clone()
    }

    /// Creates a profile with a unique (case-insensitive) name. Registration
    /// holds the name index lock throughout, so of two concurrent attempts
    /// on the same name exactly one succeeds.
    pub fn register(&self, name: &str, now: DateTime<Utc>, economy: &Economy) -> Result<PlayerProfile, StoreError> {
        let name = validate_name(name)?;
        let key = name_key(&name);
        let mut index = self.index.lock().unwrap();
        if index.names.contains_key(&key) {
            return Err(StoreError::DuplicateName(name));
        }
        let profile = PlayerProfile::new(uuid::Uuid::new_v4().simple().to_string(), &name, now, economy)?;
        self.save_profile(&profile)?;
        index.names.insert(key, profile.player_id.clone());
        if let Err(e) = write_document(&self.root.join("index.json"), &*index) {
            index.names.remove(&name_key(&name));
            let _ = std::fs::remove_file(self.profile_path(&profile.player_id));
            return Err(e);
        }
        Ok(profile)
    }

    pub fn find_by_name(&self, name: &str) -> Option<String> {
        self.index.lock().unwrap().names.get(&name_key(name)).cloned()
    }

    pub fn save_profile(&self, profile: &PlayerProfile) -> Result<(), StoreError> {
        write_document(&self.profile_path(&profile.player_id), profile)
    }

    pub fn load_profile(&self, player_id: &str) -> Result<PlayerProfile, StoreError> {
        self.load_profile_at(player_id, Utc::now())
    }

    /// Loads and migrates; `now` seeds any quest state a migration creates.
    pub fn load_profile_at(&self, player_id: &str, now: DateTime<Utc>) -> Result<PlayerProfile, StoreError> {
        let path = self.profile_path(player_id);
        let doc: Value = read_document(&path)?;
        let doc = migrate(doc, now)?;
        let profile: PlayerProfile = serde_json::from_value(doc).map_err(|e| corrupt(&path, e.to_string()))?;
        if profile.player_id != player_id {
            return Err(StoreError::NotFound(player_id.to_string()));
        }
        Ok(profile)
    }

    /// Runs `f` on the stored profile while holding the player's write lock
    /// and saves the result if `f` succeeds. Nothing is written on error.
    pub fn with_player<T, E>(
        &self,
        player_id: &str,
        f: impl FnOnce(&mut PlayerProfile) -> Result<T, E>,
    ) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let lock = self.lock_for(format!("player:{player_id}"));
        let _guard = lock.lock().unwrap();
        let mut profile = self.load_profile(player_id)?;
        let out = f(&mut profile)?;
        self.save_profile(&profile)?;
        Ok(out)
    }

    pub fn save_session(&self, session: &GameSession) -> Result<(), StoreError> {
        write_document(
            &self.session_path(&session.session_id),
            &SessionDocument {
                schema_version: SESSION_SCHEMA_VERSION,
                session: session.clone(),
            },
        )
    }

    pub fn load_session(&self, session_id: &str) -> Result<GameSession, StoreError> {
        let path = self.session_path(session_id);
        let doc: SessionDocument = read_document(&path)?;
        if doc.schema_version > SESSION_SCHEMA_VERSION {
            return Err(StoreError::UnsupportedVersion {
                found: doc.schema_version as u64,
                supported: SESSION_SCHEMA_VERSION,
            });
        }
        if doc.session.session_id != session_id {
            return Err(StoreError::NotFound(session_id.to_string()));
        }
        Ok(doc.session)
    }

    /// Session counterpart of [`Store::with_player`].
    pub fn with_session<T, E>(
        &self,
        session_id: &str,
        f: impl FnOnce(&mut GameSession) -> Result<T, E>,
    ) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let lock = self.lock_for(format!("session:{session_id}"));
        let _guard = lock.lock().unwrap();
        let mut session = self.load_session(session_id)?;
        let out = f(&mut session)?;
        self.save_session(&session)?;
        Ok(out)
    }

    /// Syncs the data directory. Every write is already durable when it
    /// returns; this only flushes directory metadata.
    pub fn flush(&self) -> Result<(), StoreError> {
        for dir in [self.root.clone(), self.root.join("players"), self.root.join("sessions")] {
            if let Ok(handle) = std::fs::File::open(&dir) {
                let _ = handle.sync_all();
            }
        }
        Ok(())
    }
}

/// Ids are generated hex strings; anything else is mapped to a safe stem so
/// a crafted id cannot escape the data directory.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn corrupt(path: &Path, reason: String) -> StoreError {
    StoreError::LoadCorrupt {
        path: path.to_path_buf(),
        reason,
    }
}

fn read_document<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, StoreError> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let id = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            return Err(StoreError::NotFound(id.unwrap_or_default()));
        }
        Err(source) => {
            return Err(StoreError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let body = decode_document(&bytes).map_err(|r| corrupt(path, r))?;
    serde_json::from_slice(body).map_err(|e| corrupt(path, e.to_string()))
}

fn write_document<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let io = |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().expect("document paths have a parent");
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(&encode_document(value)).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn now() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 5, 2, 12, 0, 0).unwrap()
    }

    fn store() -> (tempfile::TempDir, Store) {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        (dir, store)
    }

    #[test]
    fn register_initial_state() {
        let (_d, store) = store();
        let p = store.register("  Ana ", now(), &Economy::default()).unwrap();
        assert_eq!(p.name, "Ana");
        assert_eq!(p.wallet.points, 0);
        assert_eq!(p.wallet.energy, 5);
        assert_eq!(p.wallet.active_avatar, "starter");
        assert!(p.wallet.owned_avatars.contains("starter"));
        assert_eq!(p.quests, QuestState::fresh(now()));
        assert_eq!(store.find_by_name("ANA"), Some(p.player_id.clone()));
    }

    #[test]
    fn register_rejects_duplicates_and_bad_names() {
        let (_d, store) = store();
        let eco = Economy::default();
        store.register("Ana", now(), &eco).unwrap();
        assert!(matches!(
            store.register("ana", now(), &eco),
            Err(StoreError::DuplicateName(_))
        ));
        assert!(matches!(store.register("", now(), &eco), Err(StoreError::InvalidName(_))));
        assert!(matches!(store.register("   ", now(), &eco), Err(StoreError::InvalidName(_))));
        assert!(matches!(
            store.register(&"x".repeat(33), now(), &eco),
            Err(StoreError::InvalidName(_))
        ));
        assert!(store.register(&"é".repeat(32), now(), &eco).is_ok());
    }

    #[test]
    fn index_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let id = {
            let store = Store::open(dir.path()).unwrap();
            store.register("Ben", now(), &Economy::default()).unwrap().player_id
        };
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.find_by_name("ben"), Some(id));
        assert!(store.register("BEN", now(), &Economy::default()).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let (_d, store) = store();
        let mut p = store.register("Cy", now(), &Economy::default()).unwrap();
        p.stats.games_played = 4;
        p.extra.insert("future_field".into(), serde_json::json!({"a": [1, 2]}));
        store.save_profile(&p).unwrap();
        assert_eq!(store.load_profile_at(&p.player_id, now()).unwrap(), p);
    }

    #[test]
    fn missing_and_corrupt_documents() {
        let (_d, store) = store();
        assert!(matches!(store.load_profile("nobody"), Err(StoreError::NotFound(_))));
        let p = store.register("Di", now(), &Economy::default()).unwrap();
        let path = store.profile_path(&p.player_id);
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(
            store.load_profile(&p.player_id),
            Err(StoreError::LoadCorrupt { .. })
        ));
        let mut flipped = bytes.clone();
        flipped[10] ^= 0x01;
        std::fs::write(&path, &flipped).unwrap();
        assert!(matches!(
            store.load_profile(&p.player_id),
            Err(StoreError::LoadCorrupt { .. })
        ));
    }

    #[test]
    fn migrate_examples() {
        let eco = Economy::default();
        let p = PlayerProfile::new("id".into(), "Ed", now(), &eco).unwrap();
        let current = serde_json::to_value(&p).unwrap();
        assert_eq!(migrate(current.clone(), now()).unwrap(), current);

        let mut newer = current.clone();
        newer["schema_version"] = Value::from(PROFILE_SCHEMA_VERSION + 1);
        assert!(matches!(
            migrate(newer, now()),
            Err(StoreError::UnsupportedVersion { .. })
        ));

        let mut v1 = current.clone();
        let obj = v1.as_object_mut().unwrap();
        obj.remove("quests");
        obj.remove("history");
        obj.insert("schema_version".into(), Value::from(1));
        obj.insert("legacy_note".into(), Value::from("keep me"));
        let later = now() + chrono::Duration::days(3);
        let up = migrate(v1, later).unwrap();
        let loaded: PlayerProfile = serde_json::from_value(up).unwrap();
        assert_eq!(loaded.quests, QuestState::fresh(later));
        assert!(loaded.history.is_empty());
        assert_eq!(loaded.schema_version, PROFILE_SCHEMA_VERSION);
        assert_eq!(loaded.extra["legacy_note"], Value::from("keep me"));
    }

    #[test]
    fn with_player_writes_only_on_success() {
        let (_d, store) = store();
        let p = store.register("Flo", now(), &Economy::default()).unwrap();
        let r: Result<(), StoreError> = store.with_player(&p.player_id, |prof| {
            prof.wallet.points = 99;
            Err(StoreError::InvalidSettings("nope".into()))
        });
        assert!(r.is_err());
        assert_eq!(store.load_profile(&p.player_id).unwrap().wallet.points, 0);
        store
            .with_player::<_, StoreError>(&p.player_id, |prof| {
                prof.wallet.points = 99;
                Ok(())
            })
            .unwrap();
        assert_eq!(store.load_profile(&p.player_id).unwrap().wallet.points, 99);
    }

    #[test]
    fn crafted_ids_stay_inside_the_store() {
        let (_d, store) = store();
        let path = store.profile_path("../../etc/passwd");
        assert!(path.starts_with(store.root().join("players")));
    }

    #[test]
    fn document_framing() {
        let doc = encode_document(&serde_json::json!({"k": 1}));
        let text = String::from_utf8(doc.clone()).unwrap();
        assert!(text.starts_with("{\n  \"k\": 1\n}\n#crc32 "));
        assert!(text.ends_with('\n'));
        assert_eq!(decode_document(&doc).unwrap(), b"{\n  \"k\": 1\n}\n");
        assert!(decode_document(b"{}\n").is_err());
        assert!(decode_document(b"").is_err());
    }
}
