//! Content-addressed block store under `<workspace>/blocks/`.

use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum BlockError {
    #[error("block not found: {0}")]
    NotFound(String),
    #[error("invalid block path {0:?}; expected blocks/<sha256>")]
    InvalidPath(String),
    #[error("block store I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct BlockStore {
    root: PathBuf,
}

pub const BLOCK_DIR: &str = "blocks";

impl BlockStore {
    /// `workspace` is the directory holding `blocks/`.
    pub fn new(workspace: impl Into<PathBuf>) -> Self {
        BlockStore {
            root: workspace.into(),
        }
    }

    pub fn workspace(&self) -> &Path {
        &self.root
    }

    /// Stores `bytes` and returns the workspace-relative path
    /// `blocks/<sha256>`. Identical content yields the identical path.
    pub fn put(&self, bytes: &[u8]) -> Result<String, BlockError> {
        let name = hex::encode(Sha256::digest(bytes));
        let dir = self.root.join(BLOCK_DIR);
        let target = dir.join(&name);
        if !target.exists() {
            std::fs::create_dir_all(&dir)?;
            // write-then-rename keeps concurrent puts of the same block safe
            let tmp = dir.join(format!(".{name}.{}.tmp", uuid::Uuid::new_v4()));
            std::fs::write(&tmp, bytes)?;
            std::fs::rename(&tmp, &target)?;
        }
        Ok(format!("{BLOCK_DIR}/{name}"))
    }

    fn resolve(&self, path: &str) -> Result<PathBuf, BlockError> {
        let name = path
            .strip_prefix(BLOCK_DIR)
            .and_then(|p| p.strip_prefix('/'))
            .filter(|n| n.len() == 64 && n.bytes().all(|b| b.is_ascii_hexdigit()))
            .ok_or_else(|| BlockError::InvalidPath(path.to_string()))?;
        Ok(self.root.join(BLOCK_DIR).join(name))
    }

    pub fn get(&self, path: &str) -> Result<Vec<u8>, BlockError> {
        let p = self.resolve(path)?;
        std::fs::read(&p).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => BlockError::NotFound(path.to_string()),
            _ => BlockError::Io(e),
        })
    }

    pub fn contains(&self, path: &str) -> bool {
        self.resolve(path).map(|p| p.is_file()).unwrap_or(false)
    }
}
