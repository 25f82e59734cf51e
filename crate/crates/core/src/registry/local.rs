use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use super::{normalize_uri, Kind, Registry, RegistryError, RegistryStore, SearchHit};
use crate::nanopub::Nanopub;
use crate::query::ResultTable;

/// A registry held in memory and, when opened on a directory, persisted as
/// one TriG file per nanopub under `np/` with a derived token index under
/// `index/`.
#[derive(Debug, Default)]
pub struct LocalRegistry {
    dir: Option<PathBuf>,
    store: RwLock<RegistryStore>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(tmp, path)
}

impl LocalRegistry {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads every stored nanopub, re-verifying each, and rebuilds the index.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let dir = dir.into();
        let np_dir = dir.join("np");
        fs::create_dir_all(&np_dir)?;
        fs::create_dir_all(dir.join("index"))?;
        let mut files: Vec<PathBuf> = fs::read_dir(&np_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "trig"))
            .collect();
        files.sort();
        let mut store = RegistryStore::new();
        for path in files {
            let corrupt = |message: String| RegistryError::Corrupt { path: path.display().to_string(), message };
            let text = fs::read_to_string(&path)?;
            let np = Nanopub::from_trig(&text).map_err(|e| corrupt(e.to_string()))?;
            if path.file_stem().and_then(|s| s.to_str()) != Some(np.code()) {
                return Err(corrupt(format!("file name does not match {}", np.uri())));
            }
            store.insert(np).map_err(|e| corrupt(e.to_string()))?;
        }
        let reg = LocalRegistry { dir: Some(dir), store: RwLock::new(store) };
        reg.write_index(&reg.read())?;
        Ok(reg)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn read(&self) -> RwLockReadGuard<'_, RegistryStore> {
        self.store.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, RegistryStore> {
        self.store.write().unwrap_or_else(|e| e.into_inner())
    }

    /// Runs `f` against a consistent snapshot of the store.
    pub fn with_store<T>(&self, f: impl FnOnce(&RegistryStore) -> T) -> T {
        f(&self.read())
    }

    pub fn len(&self) -> usize {
        self.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.read().is_empty()
    }

    fn write_index(&self, store: &RegistryStore) -> Result<(), RegistryError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let json = serde_json::to_vec_pretty(store.index()).expect("index serializes");
        write_atomic(&dir.join("index").join("tokens.json"), &json)?;
        Ok(())
    }

    /// The persisted token index, if any.
    pub fn stored_index(&self) -> Result<Option<BTreeMap<String, BTreeSet<String>>>, RegistryError> {
        let Some(dir) = &self.dir else { return Ok(None) };
        let path = dir.join("index").join("tokens.json");
        let bytes = fs::read(&path)?;
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| RegistryError::Corrupt { path: path.display().to_string(), message: e.to_string() })
    }
}

impl Registry for LocalRegistry {
    fn publish(&self, np: &Nanopub) -> Result<String, RegistryError> {
        let mut store = self.write();
        if store.insert(np.clone())? {
            if let Some(dir) = &self.dir {
                write_atomic(&dir.join("np").join(format!("{}.trig", np.code())), np.to_trig().as_bytes())?;
                self.write_index(&store)?;
            }
        }
        Ok(np.uri().to_string())
    }

    fn fetch(&self, uri: &str) -> Result<Nanopub, RegistryError> {
        let uri = normalize_uri(uri);
        self.read().get(&uri).cloned().ok_or(RegistryError::NotFound(uri))
    }

    fn search(&self, q: &str) -> Result<Vec<SearchHit>, RegistryError> {
        Ok(self.read().search(q))
    }

    fn list(&self, kind: Option<Kind>) -> Result<Vec<SearchHit>, RegistryError> {
        Ok(self.read().list(kind))
    }

    fn query(&self, text: &str) -> Result<ResultTable, RegistryError> {
        self.read().query(text)
    }
}
