//! On-disk result store: one JSON file per `(p, k)` plus `manifest.json`
//! holding the tool version, per-record SHA-256 checksums and status.
//! Every file is written to a temporary name and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::modforms::is_prime;
use crate::record::{parse_record, record_file_name, to_json_string, RecordError, TOOL_VERSION};
use crate::slopes::{compute_record, SlopeRecord};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store I/O error at {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest at {path} is unreadable: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
    #[error("record {name}: {source}")]
    Record { name: String, source: RecordError },
    #[error("record {0} does not match its manifest checksum")]
    Checksum(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub p: u64,
    pub k: u32,
    pub status: EntryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub exceptional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub records: BTreeMap<String, ManifestEntry>,
    /// Exceptional weights per prime among complete records.
    #[serde(default)]
    pub exceptional_weights: BTreeMap<u64, Vec<u32>>,
}

impl Manifest {
    fn new() -> Self {
        Manifest { tool_version: TOOL_VERSION.to_string(), records: BTreeMap::new(), exceptional_weights: BTreeMap::new() }
    }

    fn refresh_summary(&mut self) {
        let mut summary: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for e in self.records.values() {
            if e.status == EntryStatus::Complete && e.exceptional {
                summary.entry(e.p).or_default().push(e.k);
            }
        }
        for ks in summary.values_mut() {
            ks.sort_unstable();
        }
        self.exceptional_weights = summary;
    }

    pub fn failures(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.records.values().filter(|e| e.status == EntryStatus::Failed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[derive(Debug)]
pub struct ResultStore {
    root: PathBuf,
    manifest: Manifest,
}

impl ResultStore {
    /// Opens (creating if needed) a store. A manifest from another tool
    /// version is discarded so every record is recomputed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let path = root.join(MANIFEST_NAME);
        let manifest = match fs::read_to_string(&path) {
            Ok(text) => {
                let m: Manifest =
                    serde_json::from_str(&text).map_err(|source| StoreError::Manifest { path: path.clone(), source })?;
                if m.tool_version == TOOL_VERSION {
                    m
                } else {
                    Manifest::new()
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Manifest::new(),
            Err(e) => return Err(StoreError::Io { path, source: e }),
        };
        Ok(ResultStore { root, manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn record_path(&self, p: u64, k: u32) -> PathBuf {
        self.root.join(record_file_name(p, k))
    }

    fn save_manifest(&mut self) -> Result<(), StoreError> {
        self.manifest.refresh_summary();
        let mut text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|source| StoreError::Manifest { path: self.root.join(MANIFEST_NAME), source })?;
        text.push('\n');
        write_atomic(&self.root.join(MANIFEST_NAME), text.as_bytes())
    }

    /// A complete manifest entry whose file exists and matches its checksum.
    pub fn is_current(&self, p: u64, k: u32) -> bool {
        let name = record_file_name(p, k);
        let Some(entry) = self.manifest.records.get(&name) else { return false };
        if entry.status != EntryStatus::Complete {
            return false;
        }
        match fs::read(self.root.join(&name)) {
            Ok(bytes) => entry.sha256.as_deref() == Some(sha256_hex(&bytes).as_str()),
            Err(_) => false,
        }
    }

    pub fn put(&mut self, rec: &SlopeRecord) -> Result<(), StoreError> {
        let name = record_file_name(rec.p, rec.k);
        let text = to_json_string(rec).map_err(|source| StoreError::Record { name: name.clone(), source })?;
        write_atomic(&self.root.join(&name), text.as_bytes())?;
        self.manifest.records.insert(
            name,
            ManifestEntry {
                p: rec.p,
                k: rec.k,
                status: EntryStatus::Complete,
                sha256: Some(sha256_hex(text.as_bytes())),
                error: None,
                exceptional: rec.is_exceptional_weight(),
            },
        );
        self.save_manifest()
    }

    pub fn put_failure(&mut self, p: u64, k: u32, error: &str) -> Result<(), StoreError> {
        self.manifest.records.insert(
            record_file_name(p, k),
            ManifestEntry { p, k, status: EntryStatus::Failed, sha256: None, error: Some(error.to_string()), exceptional: false },
        );
        self.save_manifest()
    }

    /// Loads one complete record, verifying its checksum.
    pub fn get(&self, p: u64, k: u32) -> Result<Option<SlopeRecord>, StoreError> {
        let name = record_file_name(p, k);
        let Some(entry) = self.manifest.records.get(&name) else { return Ok(None) };
        if entry.status != EntryStatus::Complete {
            return Ok(None);
        }
        let path = self.root.join(&name);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        if entry.sha256.as_deref() != Some(sha256_hex(&bytes).as_str()) {
            return Err(StoreError::Checksum(name));
        }
        let text = String::from_utf8_lossy(&bytes);
        let (rec, _) = parse_record(&text).map_err(|source| StoreError::Record { name, source })?;
        Ok(Some(rec))
    }

    /// All complete records, ordered by `(p, k)`; optionally one prime only.
    pub fn records(&self, prime: Option<u64>) -> Result<Vec<SlopeRecord>, StoreError> {
        let mut keys: Vec<(u64, u32)> = self
            .manifest
            .records
            .values()
            .filter(|e| e.status == EntryStatus::Complete && prime.is_none_or(|p| e.p == p))
            .map(|e| (e.p, e.k))
            .collect();
        keys.sort_unstable();
        let mut out = Vec::with_capacity(keys.len());
        for (p, k) in keys {
            if let Some(rec) = self.get(p, k)? {
                out.push(rec);
            }
        }
        Ok(out)
    }

    /// Record files in the directory that the manifest does not list.
    pub fn orphans(&self) -> Result<Vec<String>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io_err(&self.root))? {
            let entry = entry.map_err(io_err(&self.root))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with('p') && name.ends_with(".json") && !self.manifest.records.contains_key(&name) {
                out.push(name);
            }
        }
        out.sort();
        Ok(out)
    }
}

/// Jobs of a sweep: every prime in `primes` and every even `k >= 12` in `weights`.
pub fn sweep_jobs(primes: (u64, u64), weights: (u32, u32)) -> Vec<(u64, u32)> {
    let mut jobs = Vec::new();
    for p in primes.0..=primes.1 {
        if !is_prime(p) {
            continue;
        }
        for k in weights.0.max(12)..=weights.1 {
            if k % 2 == 0 {
                jobs.push((p, k));
            }
        }
    }
    jobs
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct SweepOutcome {
    pub computed: Vec<(u64, u32)>,
    pub skipped: Vec<(u64, u32)>,
    pub failed: Vec<(u64, u32, String)>,
}

/// Computes every job not already current in the store using `workers`
/// threads. Records are written as they finish; content does not depend on
/// the number of workers or the completion order.
pub fn run_sweep(store: &mut ResultStore, jobs: &[(u64, u32)], workers: usize) -> Result<SweepOutcome, StoreError> {
    let mut outcome = SweepOutcome::default();
    let mut todo = Vec::new();
    for &(p, k) in jobs {
        if store.is_current(p, k) {
            outcome.skipped.push((p, k));
        } else {
            todo.push((p, k));
        }
    }
    // Largest weights first.
    todo.sort_by_key(|&(p, k)| std::cmp::Reverse((k, p)));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| StoreError::Pool(e.to_string()))?;
    let shared = Mutex::new((store, Vec::new(), Vec::new(), None::<StoreError>));
    pool.install(|| {
        todo.par_iter().for_each(|&(p, k)| {
            let result = compute_record(p, k);
            let mut guard = shared.lock().expect("store lock poisoned");
            let (store, done, failed, first_err) = &mut *guard;
            if first_err.is_some() {
                return;
            }
            let write = match result {
                Ok(rec) => store.put(&rec).map(|_| done.push((p, k))),
                Err(e) => {
                    let msg = e.to_string();
                    let r = store.put_failure(p, k, &msg);
                    failed.push((p, k, msg));
                    r
                }
            };
            if let Err(e) = write {
                *first_err = Some(e);
            }
        });
    });
    let (_, mut done, mut failed, first_err) = shared.into_inner().expect("store lock poisoned");
    if let Some(e) = first_err {
        return Err(e);
    }
    done.sort_unstable();
    failed.sort();
    outcome.computed = done;
    outcome.failed = failed;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn job_enumeration() {
        let jobs = sweep_jobs((2, 3), (12, 28));
        assert_eq!(jobs.len(), 18);
        assert!(jobs.contains(&(2, 14)) && jobs.contains(&(3, 26)));
        assert!(sweep_jobs((4, 4), (12, 20)).is_empty());
        assert_eq!(sweep_jobs((5, 5), (2, 13)), vec![(5, 12)]);
    }

    #[test]
    fn put_get_and_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ResultStore::open(dir.path()).unwrap();
        let rec = compute_record(3, 24).unwrap();
        store.put(&rec).unwrap();
        assert!(store.is_current(3, 24));
        assert_eq!(store.get(3, 24).unwrap(), Some(rec.clone()));

        let reopened = ResultStore::open(dir.path()).unwrap();
        assert!(reopened.is_current(3, 24));
        assert_eq!(reopened.records(None).unwrap(), vec![rec]);

        fs::write(reopened.record_path(3, 24), b"{}").unwrap();
        assert!(!reopened.is_current(3, 24));
        assert!(matches!(reopened.get(3, 24), Err(StoreError::Checksum(_))));
    }

    #[test]
    fn stale_version_is_discarded() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ResultStore::open(dir.path()).unwrap();
        store.put(&compute_record(5, 16).unwrap()).unwrap();
        let path = dir.path().join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).unwrap().replace(TOOL_VERSION, "0.0.0-old");
        fs::write(&path, text).unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        assert!(!store.is_current(5, 16));
        assert_eq!(store.orphans().unwrap(), vec!["p5_k16.json".to_string()]);
    }

    #[test]
    fn failures_are_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ResultStore::open(dir.path()).unwrap();
        store.put_failure(7, 12, "boom").unwrap();
        assert_eq!(store.manifest().failures().count(), 1);
        assert!(!store.is_current(7, 12));
        assert_eq!(store.get(7, 12).unwrap(), None);
    }
}
