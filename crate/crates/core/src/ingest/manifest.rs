//! Dataset manifests.
//!
//! A dataset root holds one `manifest.json` listing, per user, the genuine
//! sample files grouped by session and any forgery files. Paths are relative
//! to the directory containing the manifest.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "modality": "signature",
//!   "pressure_max": 1023,
//!   "users": [
//!     {
//!       "user_id": "u000",
//!       "genuine": [ { "session": 1, "files": ["u000/s1_00.svc"] } ],
//!       "forgeries": [ { "label": "skilled_forgery", "file": "u000/f_00.svc" } ]
//!     }
//!   ]
//! }
//! ```
//!
//! Keystroke datasets set `"modality": "keystroke"` and name the timing CSV
//! in `"keystroke_file"`; users and sessions come from the CSV itself.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    parse_keystroke_csv, parse_svc, IngestError, KeystrokeSample, SampleLabel, SignatureSample,
    DEFAULT_PRESSURE_MAX,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Signature,
    Keystroke,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub modality: Modality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pressure_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keystroke_file: Option<String>,
    #[serde(default)]
    pub users: Vec<UserEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserEntry {
    pub user_id: String,
    pub genuine: Vec<SessionRefs>,
    #[serde(default)]
    pub forgeries: Vec<ForgeryRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRefs {
    pub session: u32,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForgeryRef {
    pub label: SampleLabel,
    pub file: String,
}

impl DatasetManifest {
    pub fn pressure_max(&self) -> u32 {
        self.pressure_max.unwrap_or(DEFAULT_PRESSURE_MAX)
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        let m: DatasetManifest =
            serde_json::from_str(text).map_err(|e| IngestError::Manifest(e.to_string()))?;
        if m.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(IngestError::Manifest(format!(
                "unsupported schema_version {}",
                m.schema_version
            )));
        }
        if m.pressure_max == Some(0) {
            return Err(IngestError::Manifest(
                "pressure_max must be positive".into(),
            ));
        }
        match m.modality {
            Modality::Keystroke if m.keystroke_file.is_none() => {
                return Err(IngestError::Manifest(
                    "keystroke manifest needs keystroke_file".into(),
                ))
            }
            Modality::Signature if m.users.is_empty() => {
                return Err(IngestError::Manifest(
                    "signature manifest lists no users".into(),
                ))
            }
            _ => {}
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// One user's parsed samples. Genuine samples are ordered by session, then
/// by their listing order within the session.
#[derive(Debug, Clone, PartialEq)]
pub struct UserData {
    pub user_id: String,
    pub genuine: Vec<SignatureSample>,
    pub forgeries: Vec<SignatureSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub pressure_max: u32,
    pub users: Vec<UserData>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeystrokeDataset {
    /// Samples grouped per subject in first-appearance order, each group
    /// sorted by (session, rep).
    pub users: Vec<(String, Vec<KeystrokeSample>)>,
}

impl KeystrokeDataset {
    pub fn from_samples(samples: Vec<KeystrokeSample>) -> Self {
        let mut users: Vec<(String, Vec<KeystrokeSample>)> = Vec::new();
        for s in samples {
            match users.iter_mut().find(|(id, _)| *id == s.user_id) {
                Some((_, group)) => group.push(s),
                None => users.push((s.user_id.clone(), vec![s])),
            }
        }
        for (_, group) in &mut users {
            group.sort_by_key(|s| (s.session_id, s.rep));
        }
        KeystrokeDataset { users }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedDataset {
    Signature(Dataset),
    Keystroke(KeystrokeDataset),
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn resolve(root: &Path, rel: &str) -> PathBuf {
    root.join(rel)
}

/// Reads a manifest and every file it references.
pub fn load_dataset(manifest_path: &Path) -> Result<LoadedDataset, IngestError> {
    let manifest =
        DatasetManifest::from_json(&read(manifest_path)?).map_err(|e| IngestError::File {
            path: manifest_path.display().to_string(),
            source: Box::new(e),
        })?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));

    match manifest.modality {
        Modality::Keystroke => {
            let file = resolve(root, manifest.keystroke_file.as_deref().unwrap_or_default());
            let samples = parse_keystroke_csv(&read(&file)?).map_err(|e| IngestError::File {
                path: file.display().to_string(),
                source: Box::new(e),
            })?;
            Ok(LoadedDataset::Keystroke(KeystrokeDataset::from_samples(
                samples,
            )))
        }
        Modality::Signature => {
            let load = |rel: &str, user: &str, session: u32, label: SampleLabel| {
                let path = resolve(root, rel);
                parse_svc(&read(&path)?)
                    .map(|s| s.with_identity(user, session, label))
                    .map_err(|e| IngestError::File {
                        path: path.display().to_string(),
                        source: Box::new(e),
                    })
            };
            let mut users = Vec::with_capacity(manifest.users.len());
            for entry in &manifest.users {
                let mut sessions: Vec<&SessionRefs> = entry.genuine.iter().collect();
                sessions.sort_by_key(|s| s.session);
                let mut genuine = Vec::new();
                for session in sessions {
                    for f in &session.files {
                        genuine.push(load(
                            f,
                            &entry.user_id,
                            session.session,
                            SampleLabel::Genuine,
                        )?);
                    }
                }
                let forgeries = entry
                    .forgeries
                    .iter()
                    .map(|f| load(&f.file, &entry.user_id, 0, f.label))
                    .collect::<Result<Vec<_>, _>>()?;
                users.push(UserData {
                    user_id: entry.user_id.clone(),
                    genuine,
                    forgeries,
                });
            }
            Ok(LoadedDataset::Signature(Dataset {
                pressure_max: manifest.pressure_max(),
                users,
            }))
        }
    }
}
