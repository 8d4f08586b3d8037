//! On-disk workspace: `sheets/<id>.json`, `datasets/<id>.json`, the block
//! store and per-run logs.

use super::{edit::apply_ops, EditOp, FactSheet, SheetError};
use crate::agent::{BlockStore, RunLog};
use crate::ingest::{classify_columns, load_csv, ClassOverrides, Dataset};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use uuid::Uuid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredDataset {
    pub id: String,
    pub dataset: Dataset,
}

pub struct Workspace {
    root: PathBuf,
    blocks: BlockStore,
    locks: Mutex<HashMap<Uuid, Arc<Mutex<()>>>>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SheetError> {
    let dir = path.parent().expect("store paths have a parent");
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{}.tmp", Uuid::new_v4()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Dataset ids are chosen by the store or the bundled catalogue; reject
/// anything that could escape the datasets directory.
fn valid_dataset_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Workspace {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, SheetError> {
        let root = root.into();
        for d in ["sheets", "datasets", "blocks", "runs"] {
            fs::create_dir_all(root.join(d))?;
        }
        Ok(Workspace {
            blocks: BlockStore::new(&root),
            root,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn blocks(&self) -> &BlockStore {
        &self.blocks
    }

    pub fn sheet_path(&self, id: Uuid) -> PathBuf {
        self.root.join("sheets").join(format!("{id}.json"))
    }

    pub fn run_log(&self, id: Uuid) -> RunLog {
        RunLog::to_file(self.root.join("runs").join(format!("{id}.jsonl")))
    }

    /// Lock serializing writers of one sheet.
    pub fn lock(&self, id: Uuid) -> Arc<Mutex<()>> {
        self.locks.lock().unwrap().entry(id).or_default().clone()
    }

    pub fn save_sheet(&self, sheet: &FactSheet) -> Result<(), SheetError> {
        let json = serde_json::to_vec_pretty(sheet)?;
        write_atomic(&self.sheet_path(sheet.id), &json)
    }

    pub fn load_sheet(&self, id: Uuid) -> Result<FactSheet, SheetError> {
        let path = self.sheet_path(id);
        let bytes = fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => SheetError::NotFound {
                kind: "sheet",
                id: id.to_string(),
            },
            _ => e.into(),
        })?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn list_sheets(&self) -> Result<Vec<Uuid>, SheetError> {
        let mut ids: Vec<Uuid> = fs::read_dir(self.root.join("sheets"))?
            .filter_map(|e| {
                let name = e.ok()?.file_name();
                Uuid::parse_str(name.to_str()?.strip_suffix(".json")?).ok()
            })
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// Applies `ops` under the sheet lock. With `expected_revision` set, a
    /// stale revision is a conflict. Nothing is written unless every op
    /// succeeds.
    pub fn apply_edit(&self, id: Uuid, expected_revision: Option<u64>, ops: &[EditOp]) -> Result<FactSheet, SheetError> {
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap();
        let sheet = self.load_sheet(id)?;
        if let Some(expected) = expected_revision {
            if expected != sheet.revision {
                return Err(SheetError::Conflict {
                    expected,
                    actual: sheet.revision,
                });
            }
        }
        if ops.is_empty() {
            return Ok(sheet);
        }
        let mut next = apply_ops(&sheet, ops, &self.blocks)?;
        next.updated_at = Utc::now();
        self.save_sheet(&next)?;
        Ok(next)
    }

    /// Parses, classifies and stores a CSV upload under a fresh id.
    pub fn ingest_csv(&self, bytes: &[u8], name: &str, overrides: Option<&ClassOverrides>) -> Result<StoredDataset, SheetError> {
        let ds = classify_columns(&load_csv(bytes, name)?, overrides)?;
        let stored = StoredDataset {
            id: Uuid::new_v4().simple().to_string(),
            dataset: ds,
        };
        self.save_dataset(&stored)?;
        Ok(stored)
    }

    pub fn save_dataset(&self, stored: &StoredDataset) -> Result<(), SheetError> {
        if !valid_dataset_id(&stored.id) {
            return Err(SheetError::Validation(format!("invalid dataset id {:?}", stored.id)));
        }
        let json = serde_json::to_vec(stored)?;
        write_atomic(&self.root.join("datasets").join(format!("{}.json", stored.id)), &json)
    }

    /// A stored upload, or a bundled dataset by name (`carsales`, `movies`).
    pub fn load_dataset(&self, id: &str) -> Result<Dataset, SheetError> {
        let not_found = || SheetError::NotFound {
            kind: "dataset",
            id: id.to_string(),
        };
        if !valid_dataset_id(id) {
            return Err(not_found());
        }
        let path = self.root.join("datasets").join(format!("{id}.json"));
        match fs::read(&path) {
            Ok(bytes) => Ok(serde_json::from_slice::<StoredDataset>(&bytes)?.dataset),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                crate::datasets::bundled(id).ok_or_else(not_found)
            }
            Err(e) => Err(e.into()),
        }
    }
}
