//! Dataset manifests: one `<class_id> <role> <path>` record per line.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Train,
    Genuine,
    Impostor,
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Role::Train),
            "genuine" => Ok(Role::Genuine),
            "impostor" => Ok(Role::Impostor),
            other => Err(format!("unknown role `{other}` (expected train, genuine or impostor)")),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Train => "train",
            Role::Genuine => "genuine",
            Role::Impostor => "impostor",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRecord {
    pub class_id: String,
    pub role: Role,
    pub path: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(move |r| r.role == role)
    }

    /// Checks that every class with test records has at least one training record.
    pub fn validate(&self) -> Result<()> {
        let trained: HashSet<&str> = self.with_role(Role::Train).map(|r| r.class_id.as_str()).collect();
        let untrained: BTreeSet<&str> = self
            .records
            .iter()
            .filter(|r| r.role != Role::Train && !trained.contains(r.class_id.as_str()))
            .map(|r| r.class_id.as_str())
            .collect();
        if let Some(class) = untrained.first() {
            return Err(Error::Validation(format!(
                "class `{class}` has test records but no train record"
            )));
        }
        Ok(())
    }

    /// Manifest text; paths are written as stored.
    pub fn to_text(&self) -> String {
        self.records
            .iter()
            .map(|r| format!("{} {} {}\n", r.class_id, r.role, r.path.display()))
            .collect()
    }
}

/// Parses manifest text. Relative paths are resolved against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<DatasetManifest> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, char::is_whitespace);
        let (class_id, role, path) = match (parts.next(), parts.next(), parts.next().map(str::trim)) {
            (Some(c), Some(r), Some(p)) if !p.is_empty() => (c, r, p),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `<class_id> <role> <path>`, got `{line}`"),
                })
            }
        };
        let role: Role = role.parse().map_err(|msg| Error::Parse { line: line_no, msg })?;
        let path = base_dir.join(path);
        if !seen.insert((class_id.to_owned(), role, path.clone())) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate record `{class_id} {role} {}`", path.display()),
            });
        }
        records.push(ManifestRecord {
            class_id: class_id.to_owned(),
            role,
            path,
        });
    }
    let manifest = DatasetManifest { records };
    manifest.validate()?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

/// Builds a genuine/impostor protocol from per-subject image lists.
///
/// For every subject the first `n_train` images train its class and the rest
/// are genuine trials. Each class additionally receives `n_impostors` images
/// of other subjects: the `k`-th impostor (k = 1..) of subject `s` is taken
/// from subject `s + k` (cyclically), cycling through that subject's images.
pub fn build_protocol(
    subjects: &[(String, Vec<PathBuf>)],
    n_train: usize,
    n_impostors: usize,
) -> Result<DatasetManifest> {
    if n_impostors >= subjects.len() && n_impostors > 0 {
        return Err(Error::Config(format!(
            "{n_impostors} impostors per class need more than {} subjects",
            subjects.len()
        )));
    }
    let mut records = Vec::new();
    for (class_id, images) in subjects {
        if images.len() <= n_train {
            return Err(Error::Config(format!(
                "subject `{class_id}` has {} images, need more than {n_train}",
                images.len()
            )));
        }
        for (i, path) in images.iter().enumerate() {
            let role = if i < n_train { Role::Train } else { Role::Genuine };
            records.push(ManifestRecord {
                class_id: class_id.clone(),
                role,
                path: path.clone(),
            });
        }
    }
    for (s, (class_id, _)) in subjects.iter().enumerate() {
        for k in 1..=n_impostors {
            let other = &subjects[(s + k) % subjects.len()].1;
            let path = other[(s + k) % other.len()].clone();
            records.push(ManifestRecord {
                class_id: class_id.clone(),
                role: Role::Impostor,
                path,
            });
        }
    }
    let manifest = DatasetManifest { records };
    manifest.validate()?;
    Ok(manifest)
}
