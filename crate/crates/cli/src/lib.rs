//! Command-line front end: parses flags, resolves the run configuration and
//! dispatches to the subcommands.
//!
//! Exit codes: 0 when every verdict passes, 1 on a failed verdict or computation,
//! 2 on a configuration error.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use config::{read_config_file, RunConfig, Subcommand};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "airylab", version, about = "Seeded, configured runs for Airy-process and Tracy-Widom computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags accepted by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed, decimal or 0x-prefixed hexadecimal.
    #[arg(long)]
    pub seed: Option<String>,
    /// Defaults to $AIRYLAB_OUTPUT_DIR, then `airylab-out`.
    #[arg(long, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Stem of the artifact file names; defaults to the subcommand.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, ClapSubcommand)]
pub enum Command {
    /// Tabulate F, E, F1, F2 and the F1 density.
    Tw {
        #[command(flatten)]
        common: Common,
        /// `lo:hi:step`
        #[arg(long, allow_hyphen_values = true)]
        table: Option<String>,
    },
    /// Tail of the Airy1 maximum over a range of levels.
    Maxdist {
        #[command(flatten)]
        common: Common,
        /// Levels `lo:hi:step`.
        #[arg(long = "M", allow_hyphen_values = true)]
        levels: Option<String>,
        #[arg(long)]
        nodes: Option<String>,
    },
    /// Sample rescaled TASEP height paths.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Check the one-point law of rescaled samples at the origin.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ic: Option<String>,
        #[arg(long)]
        horizon: Option<String>,
        #[arg(long)]
        replicas: Option<String>,
    },
    /// Run one statistical experiment on fresh or stored samples.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        experiment: Option<String>,
        /// Sample CSV written by `sample`; when given nothing is simulated.
        #[arg(long)]
        input: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        spacing: Option<String>,
        #[arg(long)]
        length: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        /// Comma-separated window lengths.
        #[arg(long)]
        n_grid: Option<String>,
    },
    /// Numerical checks of the steepest-descent, Hilbert-Schmidt and quantile-spacing bounds.
    BenchBounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long = "M")]
        levels: Option<String>,
        #[arg(long)]
        z_lo: Option<String>,
        #[arg(long)]
        z_hi: Option<String>,
        #[arg(long)]
        z_points: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        quad_tol: Option<String>,
    },
    /// Consolidate the manifests in a directory into a pass/fail matrix.
    Report {
        #[command(flatten)]
        common: Common,
        /// Directory to scan; defaults to the output directory.
        #[arg(long)]
        input: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Sampling {
    /// `flat` or `step`.
    #[arg(long)]
    pub ic: Option<String>,
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub replicas: Option<String>,
    /// Airy coordinates `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// `default`, `airy1`, `airy2` or `airy2-parabolic`.
    #[arg(long)]
    pub rescaling: Option<String>,
    /// `require` or `skip`.
    #[arg(long)]
    pub calibration: Option<String>,
}

impl Sampling {
    fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("ic", self.ic.clone()),
            ("horizon", self.horizon.clone()),
            ("replicas", self.replicas.clone()),
            ("grid", self.grid.clone()),
            ("rescaling", self.rescaling.clone()),
            ("calibration", self.calibration.clone()),
        ]
    }
}

impl Command {
    /// The subcommand, its shared flags, and the per-subcommand flags as configuration keys.
    pub fn split(&self) -> (Subcommand, &Common, Vec<(&'static str, Option<String>)>) {
        match self {
            Command::Tw { common, table } => (Subcommand::Tw, common, vec![("table", table.clone())]),
            Command::Maxdist { common, levels, nodes } => {
                (Subcommand::Maxdist, common, vec![("M", levels.clone()), ("nodes", nodes.clone())])
            }
            Command::Sample { common, sampling } => (Subcommand::Sample, common, sampling.pairs()),
            Command::Calibrate { common, ic, horizon, replicas } => (
                Subcommand::Calibrate,
                common,
                vec![("ic", ic.clone()), ("horizon", horizon.clone()), ("replicas", replicas.clone())],
            ),
            Command::Verify { common, sampling, experiment, input, x0, lambda, points, spacing, length, alpha, n_grid } => {
                let mut pairs = sampling.pairs();
                pairs.extend([
                    ("experiment", experiment.clone()),
                    ("input", input.clone()),
                    ("x0", x0.clone()),
                    ("lambda", lambda.clone()),
                    ("points", points.clone()),
                    ("spacing", spacing.clone()),
                    ("length", length.clone()),
                    ("alpha", alpha.clone()),
                    ("n_grid", n_grid.clone()),
                ]);
                (Subcommand::Verify, common, pairs)
            }
            Command::BenchBounds { common, theta, levels, z_lo, z_hi, z_points, lambda, eps, quad_tol } => (
                Subcommand::BenchBounds,
                common,
                vec![
                    ("theta", theta.clone()),
                    ("M", levels.clone()),
                    ("z_lo", z_lo.clone()),
                    ("z_hi", z_hi.clone()),
                    ("z_points", z_points.clone()),
                    ("lambda", lambda.clone()),
                    ("eps", eps.clone()),
                    ("quad_tol", quad_tol.clone()),
                ],
            ),
            Command::Report { common, input } => (Subcommand::Report, common, vec![("input", input.clone())]),
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, config::ConfigError> {
        let (subcommand, common, pairs) = self.split();
        let mut flags: BTreeMap<String, String> =
            pairs.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))).collect();
        if let Some(seed) = &common.seed {
            flags.insert("seed".into(), seed.clone());
        }
        if let Some(name) = &common.name {
            flags.insert("name".into(), name.clone());
        }
        let file = match &common.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        RunConfig::resolve(subcommand, &flags, &file, common.output_dir.clone())
    }
}

/// Parses `args`, runs, prints a one-line outcome and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let config = match cli.command.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: configuration: {e}");
            return 2;
        }
    };
    match commands::run(&config) {
        Ok(outcome) => {
            let failed: Vec<_> = outcome.manifest.verdicts.iter().filter(|v| !v.passed).collect();
            for v in &failed {
                eprintln!("FAIL {}: {} ({} = {}, threshold {})", v.experiment, v.criterion, v.statistic, v.value, v.threshold);
            }
            println!(
                "{} {}: {} verdicts, {} failed; manifest {}",
                if failed.is_empty() { "ok" } else { "failed" },
                config.subcommand,
                outcome.manifest.verdicts.len(),
                failed.len(),
                outcome.manifest_path.display()
            );
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
