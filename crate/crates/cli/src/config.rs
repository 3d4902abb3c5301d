//! Run configuration: typed parameters resolved from flags, a flat `key = value`
//! file, and built-in defaults, in that order of precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const OUTPUT_DIR_ENV: &str = "AIRYLAB_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "airylab-out";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{key}` for `{subcommand}`")]
    UnknownKey { subcommand: Subcommand, key: String },
    #[error("`{key}`: cannot parse `{value}` as {expected}")]
    Parse { key: String, value: String, expected: &'static str },
    #[error("{}:{line}: expected `key = value`", path.display())]
    Syntax { path: PathBuf, line: usize },
    #[error("`{key}` given twice in {}", path.display())]
    Duplicate { path: PathBuf, key: String },
    #[error("cannot read config file {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subcommand {
    Tw,
    Maxdist,
    Sample,
    Calibrate,
    Verify,
    BenchBounds,
    Report,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tw => "tw",
            Self::Maxdist => "maxdist",
            Self::Sample => "sample",
            Self::Calibrate => "calibrate",
            Self::Verify => "verify",
            Self::BenchBounds => "bench-bounds",
            Self::Report => "report",
        }
    }

    /// Accepted keys with their defaults; `seed` and `name` are accepted everywhere.
    pub fn params(self) -> &'static [(&'static str, Kind, &'static str)] {
        use Kind::*;
        match self {
            Self::Tw => &[("table", Range, "-8:6:0.05")],
            Self::Maxdist => &[("M", Range, "2:8:0.5"), ("nodes", Count, "120")],
            Self::Sample => &[
                ("ic", Choice(IC), "flat"),
                ("horizon", Real, "1000"),
                ("replicas", Count, "1000"),
                ("grid", Range, "0:2:0.1"),
                ("rescaling", Choice(RESCALINGS), "default"),
                ("calibration", Choice(CALIBRATION), "require"),
            ],
            Self::Calibrate => &[("ic", Choice(IC), "flat"), ("horizon", Real, "1000"), ("replicas", Count, "5000")],
            Self::Verify => &[
                ("experiment", Choice(EXPERIMENTS), "association"),
                ("input", Text, ""),
                ("ic", Choice(IC), "flat"),
                ("horizon", Real, "1000"),
                ("replicas", Count, "2000"),
                ("grid", Range, "0:4:0.5"),
                ("rescaling", Choice(RESCALINGS), "default"),
                ("calibration", Choice(CALIBRATION), "require"),
                ("x0", Real, "0"),
                ("lambda", Real, "1"),
                ("points", Count, "50"),
                ("spacing", Real, "1.2"),
                ("length", Real, "30"),
                ("alpha", Real, "0.5"),
                ("n_grid", List, "6,12,25,50"),
            ],
            Self::BenchBounds => &[
                ("theta", Range, "1:6:0.25"),
                ("M", Range, "2:8:0.5"),
                ("z_lo", Real, "20"),
                ("z_hi", Real, "10000"),
                ("z_points", Count, "41"),
                ("lambda", Real, "1"),
                ("eps", Real, "0.1"),
                ("quad_tol", Real, "1e-10"),
            ],
            Self::Report => &[("input", Text, "")],
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const IC: &[&str] = &["flat", "step"];
pub const RESCALINGS: &[&str] = &["default", "airy1", "airy2", "airy2-parabolic"];
/// `require` refuses to sample without a passing calibration in the output directory.
pub const CALIBRATION: &[&str] = &["require", "skip"];
pub const EXPERIMENTS: &[&str] = &[
    "association",
    "fkg",
    "newman",
    "covariance-probability",
    "poisson",
    "clt",
    "ergodicity",
    "max-growth",
    "exceedance",
    "modulus",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Count,
    /// `lo:hi:step`
    Range,
    /// Comma-separated reals.
    List,
    Choice(&'static [&'static str]),
    /// Unsigned 64-bit seed; decimal or `0x` hexadecimal.
    Seed,
    Text,
}

const COMMON: &[(&str, Kind, &str)] = &[("seed", Kind::Seed, "1"), ("name", Kind::Text, "")];

/// A uniform grid `lo, lo + step, ..., hi` (the last point is included when it
/// lies on the grid up to rounding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridRange {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        // multiply rather than accumulate so that points are reproducible and land on round values
        (0..=n).map(|k| round_to_step(self.lo + k as f64 * self.step)).collect()
    }
}

fn round_to_step(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

pub fn parse_range(key: &str, text: &str) -> Result<GridRange, ConfigError> {
    let err = || ConfigError::Parse { key: key.into(), value: text.into(), expected: "lo:hi:step" };
    let parts: Vec<f64> = text.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| err())?;
    match parts[..] {
        [lo, hi, step] if lo.is_finite() && hi >= lo && step > 0.0 && step.is_finite() => Ok(GridRange { lo, hi, step }),
        _ => Err(err()),
    }
}

pub fn parse_seed(key: &str, text: &str) -> Result<u64, ConfigError> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|_| ConfigError::Parse { key: key.into(), value: text.into(), expected: "an unsigned 64-bit integer" })
}

fn validate(key: &str, kind: Kind, value: &str) -> Result<(), ConfigError> {
    let bad = |expected| ConfigError::Parse { key: key.into(), value: value.into(), expected };
    match kind {
        Kind::Real => value.trim().parse::<f64>().ok().filter(|v| v.is_finite()).map(|_| ()).ok_or_else(|| bad("a real number")),
        Kind::Count => value.trim().parse::<usize>().map(|_| ()).map_err(|_| bad("a nonnegative integer")),
        Kind::Range => parse_range(key, value).map(|_| ()),
        Kind::List => value
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map(|_| ())
            .map_err(|_| bad("comma-separated reals")),
        Kind::Seed => parse_seed(key, value).map(|_| ()),
        Kind::Choice(options) => {
            if options.contains(&value.trim()) {
                Ok(())
            } else {
                Err(ConfigError::Invalid { key: key.into(), reason: format!("`{value}` is not one of {options:?}") })
            }
        }
        Kind::Text => Ok(()),
    }
}

/// Reads a flat `key = value` file; blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { path: path.into(), line: i + 1 })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Syntax { path: path.into(), line: i + 1 });
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate { path: path.into(), key });
        }
    }
    Ok(map)
}

/// The fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub params: BTreeMap<String, String>,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Resolves every accepted key: `flags` (set by the user) override `file`,
    /// which overrides the defaults. Keys not accepted by the subcommand are rejected.
    pub fn resolve(
        subcommand: Subcommand,
        flags: &BTreeMap<String, String>,
        file: &BTreeMap<String, String>,
        output_dir: Option<PathBuf>,
    ) -> Result<Self, ConfigError> {
        let accepted: Vec<(&str, Kind, &str)> = subcommand.params().iter().chain(COMMON).copied().collect();
        for key in flags.keys().chain(file.keys()) {
            if !accepted.iter().any(|(k, _, _)| k == key) {
                return Err(ConfigError::UnknownKey { subcommand, key: key.clone() });
            }
        }
        let mut params = BTreeMap::new();
        for (key, kind, default) in accepted {
            let value = flags.get(key).or_else(|| file.get(key)).cloned().unwrap_or_else(|| default.to_string());
            validate(key, kind, &value)?;
            params.insert(key.to_string(), value.trim().to_string());
        }
        let master_seed = parse_seed("seed", &params["seed"])?;
        let output_dir = output_dir
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        Ok(Self { subcommand, params, master_seed, output_dir })
    }

    /// File stem for this run's artifacts: the `name` key, or the subcommand.
    pub fn stem(&self) -> String {
        match self.params.get("name").map(String::as_str) {
            Some("") | None => self.subcommand.name().to_string(),
            Some(name) => name.to_string(),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn real(&self, key: &str) -> f64 {
        self.text(key).parse().expect("validated on resolution")
    }

    pub fn count(&self, key: &str) -> usize {
        self.text(key).parse().expect("validated on resolution")
    }

    pub fn range(&self, key: &str) -> GridRange {
        parse_range(key, self.text(key)).expect("validated on resolution")
    }

    pub fn list(&self, key: &str) -> Vec<f64> {
        self.text(key).split(',').map(|p| p.trim().parse().expect("validated on resolution")).collect()
    }

    /// Fails with a configuration error unless `check` holds for the real-valued key.
    pub fn require(&self, key: &str, check: impl Fn(f64) -> bool, reason: &str) -> Result<f64, ConfigError> {
        let v = self.real(key);
        if check(v) {
            Ok(v)
        } else {
            Err(ConfigError::Invalid { key: key.into(), reason: reason.into() })
        }
    }

    /// The resolved set as echoed in manifests, including the seed and output directory.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut all = self.params.clone();
        all.insert("output_dir".into(), self.output_dir.display().to_string());
        all
    }
}
