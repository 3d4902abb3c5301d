//! Run artifacts: data files written atomically next to a JSON manifest that is
//! written first as `incomplete` and rewritten once every data file is in place.

use crate::config::RunConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};
use thiserror::Error;

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot serialise {what}: {source}")]
    Json { what: String, source: serde_json::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Incomplete,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub experiment: String,
    pub criterion: String,
    pub statistic: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub name: String,
    /// Fully resolved configuration, defaults included.
    pub config: BTreeMap<String, String>,
    pub config_hash: String,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Grouping key for reports: `airy1`, `airy2`, `tracy-widom`, `max-distribution`, `bounds`.
    pub family: String,
    pub files: Vec<FileRecord>,
    pub verdicts: Vec<VerdictRecord>,
    pub summary: BTreeMap<String, f64>,
    pub started_unix_s: f64,
    pub finished_unix_s: Option<f64>,
    pub wall_time_s: Option<f64>,
}

impl Manifest {
    pub fn passed(&self) -> bool {
        self.status == RunStatus::Complete && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let io = |source| OutputError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(what: &str, value: &T) -> Result<Vec<u8>, OutputError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|source| OutputError::Json { what: what.into(), source })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// CSV with a header row; reals use the shortest round-trip representation.
pub fn to_csv<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, OutputError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| OutputError::Csv(e.into_error().into()))
}

pub fn real(x: f64) -> String {
    format!("{x}")
}

/// One run's artifact set in `output_dir`: `{stem}.manifest.json` plus data files `{stem}{suffix}`.
pub struct RunWriter {
    dir: PathBuf,
    stem: String,
    manifest: Manifest,
    clock: Instant,
}

impl RunWriter {
    /// Creates the output directory and writes the `incomplete` manifest.
    pub fn begin(config: &RunConfig, family: &str) -> Result<Self, OutputError> {
        let dir = config.output_dir.clone();
        std::fs::create_dir_all(&dir).map_err(|source| OutputError::Io { path: dir.clone(), source })?;
        let echo = config.echo();
        let hashed: BTreeMap<&String, &String> = echo.iter().filter(|(k, _)| *k != "output_dir").collect();
        let config_hash = sha256_hex(&to_json("configuration", &hashed)?);
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: config.subcommand.name().into(),
            name: config.stem(),
            config: echo,
            config_hash,
            status: RunStatus::Incomplete,
            error: None,
            family: family.into(),
            files: Vec::new(),
            verdicts: Vec::new(),
            summary: BTreeMap::new(),
            started_unix_s: unix_now(),
            finished_unix_s: None,
            wall_time_s: None,
        };
        let writer = Self { dir, stem: config.stem(), manifest, clock: Instant::now() };
        writer.flush_manifest()?;
        Ok(writer)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(format!("{}{MANIFEST_SUFFIX}", self.stem))
    }

    fn flush_manifest(&self) -> Result<(), OutputError> {
        write_atomic(&self.manifest_path(), &to_json("manifest", &self.manifest)?)
    }

    /// Writes `{stem}{suffix}` and records its hash; the manifest still says `incomplete`.
    pub fn data_file(&mut self, suffix: &str, bytes: &[u8]) -> Result<PathBuf, OutputError> {
        let name = format!("{}{suffix}", self.stem);
        let path = self.dir.join(&name);
        write_atomic(&path, bytes)?;
        self.manifest.files.retain(|f| f.name != name);
        self.manifest.files.push(FileRecord { name, sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        self.flush_manifest()?;
        Ok(path)
    }

    pub fn verdict(&mut self, record: VerdictRecord) {
        self.manifest.verdicts.push(record);
    }

    pub fn summary(&mut self, key: impl Into<String>, value: f64) {
        self.manifest.summary.insert(key.into(), value);
    }

    fn close(mut self, status: RunStatus, error: Option<String>) -> Result<Manifest, OutputError> {
        self.manifest.status = status;
        self.manifest.error = error;
        self.manifest.finished_unix_s = Some(unix_now());
        self.manifest.wall_time_s = Some(self.clock.elapsed().as_secs_f64());
        self.flush_manifest()?;
        Ok(self.manifest)
    }

    pub fn finish(self) -> Result<Manifest, OutputError> {
        self.close(RunStatus::Complete, None)
    }

    pub fn fail(self, error: String) -> Result<Manifest, OutputError> {
        self.close(RunStatus::Failed, Some(error))
    }
}

/// A manifest path and its parsed contents, or the reason it could not be read.
pub type ScannedManifest = (PathBuf, Result<Manifest, String>);

/// Manifests in `dir`, sorted by file name; unreadable ones are returned as errors.
pub fn scan_manifests(dir: &Path) -> Result<Vec<ScannedManifest>, OutputError> {
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(OutputError::Io { path: dir.into(), source }),
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(MANIFEST_SUFFIX)))
        .collect();
    paths.sort();
    Ok(paths.into_iter().map(|p| { let m = Manifest::read(&p); (p, m) }).collect())
}
