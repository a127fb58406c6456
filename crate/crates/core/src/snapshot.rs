//! Local NetDB directory snapshots.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::classify;
use crate::codec::{decode_router_info, encode_router_info, EncodeError};
use crate::hash::RouterHash;
use crate::lenient::{lenient_extract, LenientRecord};
use crate::record::RouterInfo;
use crate::shade::Shade;

const FILE_PREFIX: &str = "routerInfo-";
const FILE_SUFFIX: &str = ".dat";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("cannot read NetDB directory {path}: {source}")]
    Unreadable { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SnapshotStats {
    /// Files seen: parsed records plus failures.
    pub total: usize,
    pub floodfill_count: usize,
    pub parse_failures: usize,
}

/// A file that failed strict decoding.
#[derive(Debug, Clone, Serialize)]
pub struct ParseFailure {
    pub path: PathBuf,
    pub error: String,
    /// Hash taken from the file name, when it parses.
    pub name_hash: Option<RouterHash>,
    /// What the lenient extractor still recovered.
    pub recovered: LenientRecord,
}

#[derive(Debug, Clone, Default)]
pub struct NetDbSnapshot {
    pub records: BTreeMap<RouterHash, RouterInfo>,
    pub source_dir: Option<PathBuf>,
    pub stats: SnapshotStats,
    pub failures: Vec<ParseFailure>,
    pub warnings: Vec<String>,
}

impl NetDbSnapshot {
    pub fn from_records(records: impl IntoIterator<Item = RouterInfo>) -> Self {
        let records: BTreeMap<_, _> = records.into_iter().map(|r| (r.hash, r)).collect();
        let mut snap = Self {
            records,
            ..Default::default()
        };
        snap.recount();
        snap
    }

    fn recount(&mut self) {
        self.stats = SnapshotStats {
            total: self.records.len() + self.failures.len(),
            floodfill_count: self.records.values().filter(|r| r.is_floodfill()).count(),
            parse_failures: self.failures.len(),
        };
    }

    pub fn get(&self, hash: &RouterHash) -> Option<&RouterInfo> {
        self.records.get(hash)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Floodfill hashes in snapshot iteration order.
    pub fn floodfills(&self) -> Vec<RouterHash> {
        self.records
            .values()
            .filter(|r| r.is_floodfill())
            .map(|r| r.hash)
            .collect()
    }

    /// Floodfill share of parsed records, in percent.
    pub fn floodfill_percent(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            100.0 * self.stats.floodfill_count as f64 / self.records.len() as f64
        }
    }

    /// Record count per shade. Shade 8 is never present in a snapshot.
    pub fn shade_histogram(&self) -> BTreeMap<Shade, usize> {
        let mut hist: BTreeMap<Shade, usize> = Shade::ALL[..7].iter().map(|&s| (s, 0)).collect();
        for r in self.records.values() {
            *hist.entry(classify(&r.profile())).or_default() += 1;
        }
        hist
    }

    pub fn export_records(&self) -> Vec<RecordSummary> {
        self.records.values().map(RecordSummary::from).collect()
    }
}

/// Per-record JSON export row.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordSummary {
    pub hash: RouterHash,
    pub caps: String,
    pub alpha: bool,
    pub iota: bool,
    pub version: Option<String>,
    pub known_routers: Option<u64>,
    pub known_lease_sets: Option<u64>,
    pub addresses: Vec<AddressSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AddressSummary {
    pub style: String,
    pub host: Option<String>,
    pub port: Option<u16>,
}

impl From<&RouterInfo> for RecordSummary {
    fn from(r: &RouterInfo) -> Self {
        Self {
            hash: r.hash,
            caps: r.caps().to_string(),
            alpha: r.has_direct_address(),
            iota: r.has_introducers(),
            version: r.version().map(str::to_string),
            known_routers: r.known_routers(),
            known_lease_sets: r.known_leasesets(),
            addresses: r
                .addresses
                .iter()
                .map(|a| AddressSummary {
                    style: a.style.clone(),
                    host: a.host().map(str::to_string),
                    port: a.port(),
                })
                .collect(),
        }
    }
}

/// `routerInfo-<hash>.dat`, with the hash in the overlay's base64.
pub fn router_info_file_name(hash: &RouterHash) -> String {
    format!("{FILE_PREFIX}{}{FILE_SUFFIX}", hash.to_base64())
}

fn name_hash(path: &Path) -> Option<RouterHash> {
    let name = path.file_name()?.to_str()?;
    let b64 = name.strip_prefix(FILE_PREFIX)?.strip_suffix(FILE_SUFFIX)?;
    RouterHash::from_base64(b64).ok()
}

fn is_router_info_file(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.starts_with(FILE_PREFIX) && n.ends_with(FILE_SUFFIX))
}

enum Loaded {
    Record(RouterInfo, PathBuf),
    Failed(ParseFailure),
}

fn load_file(path: PathBuf) -> Loaded {
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) => {
            return Loaded::Failed(ParseFailure {
                name_hash: name_hash(&path),
                error: e.to_string(),
                recovered: LenientRecord::default(),
                path,
            })
        }
    };
    match decode_router_info(&bytes) {
        Ok(r) => Loaded::Record(r, path),
        Err(e) => Loaded::Failed(ParseFailure {
            name_hash: name_hash(&path),
            error: e.to_string(),
            recovered: lenient_extract(&bytes),
            path,
        }),
    }
}

/// Decode every `routerInfo-*.dat` below `dir` (the `r?/` subdirectories of
/// a router's `netDb/` included). Files are decoded in parallel; the result
/// does not depend on scheduling.
pub fn load_netdb_dir(dir: impl AsRef<Path>) -> Result<NetDbSnapshot, SnapshotError> {
    let dir = dir.as_ref();
    let unreadable = |source| SnapshotError::Unreadable {
        path: dir.to_path_buf(),
        source,
    };
    if !fs::metadata(dir).map_err(unreadable)?.is_dir() {
        return Err(unreadable(io::Error::new(
            io::ErrorKind::InvalidInput,
            "not a directory",
        )));
    }
    fs::read_dir(dir).map_err(unreadable)?;

    let mut warnings = Vec::new();
    let mut paths = Vec::new();
    for entry in walkdir::WalkDir::new(dir).follow_links(true) {
        match entry {
            Ok(e) if e.file_type().is_file() && is_router_info_file(e.path()) => {
                paths.push(e.into_path())
            }
            Ok(_) => {}
            Err(e) => warnings.push(format!("skipped entry: {e}")),
        }
    }
    paths.sort();

    let loaded: Vec<Loaded> = paths.into_par_iter().map(load_file).collect();

    let mut snap = NetDbSnapshot {
        source_dir: Some(dir.to_path_buf()),
        warnings,
        ..Default::default()
    };
    for item in loaded {
        match item {
            Loaded::Record(r, path) => {
                if let Some(h) = name_hash(&path) {
                    if h != r.hash {
                        snap.warnings.push(format!(
                            "{}: file name hash differs from record hash {}",
                            path.display(),
                            r.hash
                        ));
                    }
                }
                if snap.records.insert(r.hash, r).is_some() {
                    snap.warnings
                        .push(format!("{}: duplicate record", path.display()));
                }
            }
            Loaded::Failed(f) => snap.failures.push(f),
        }
    }
    snap.recount();
    Ok(snap)
}

/// Write records in the router's on-disk layout: `r<c>/routerInfo-<hash>.dat`,
/// where `<c>` is the first base64 character of the hash.
pub fn write_netdb_dir<'a>(
    dir: impl AsRef<Path>,
    records: impl IntoIterator<Item = &'a RouterInfo>,
) -> Result<usize, SnapshotError> {
    let dir = dir.as_ref();
    let mut n = 0;
    for r in records {
        let b64 = r.hash.to_base64();
        let sub = dir.join(format!("r{}", &b64[..1]));
        fs::create_dir_all(&sub).map_err(|source| SnapshotError::Write {
            path: sub.clone(),
            source,
        })?;
        let path = sub.join(router_info_file_name(&r.hash));
        let bytes = encode_router_info(r)?;
        fs::write(&path, bytes).map_err(|source| SnapshotError::Write { path, source })?;
        n += 1;
    }
    Ok(n)
}
