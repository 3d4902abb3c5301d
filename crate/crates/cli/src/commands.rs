//! The subcommands. Each validates its configuration before anything is written,
//! then runs inside a [`RunWriter`] so that a failure leaves a `failed` manifest.

use crate::config::{ConfigError, RunConfig, Subcommand};
use crate::output::{real, scan_manifests, sha256_hex, to_csv, to_json, Manifest, OutputError, RunStatus, RunWriter, VerdictRecord};
use airylab_core::bounds::{
    check_hs_shapes, check_sd, check_tdiff, log_slope_in_cube, tdiff_onset, BoundCheck, HsResolution, LemmaId,
};
use airylab_core::fredholm::maxtail_asymptotics;
use airylab_core::sampler::{
    calibrate, sample_paths, Airy2Map, InitialCondition, PathSample, Rescaling, ScalingConstants, TasepConfig,
};
use airylab_core::stats::{
    a2_modulus_tail, association_catalogue, association_suite, clt_experiment, covariance_probability_bound,
    ergodicity_decay, exceedance_measure, fkg_catalogue, fkg_suite, max_growth, newman_catalogue, newman_suite,
    poisson_experiment, CltConfig, ExceedanceConfig, ExperimentReport, MaxProcess, PathSet, PoissonConfig, Trig,
    AIRY1_MAX_LIMIT, AIRY2_MAX_WINDOW,
};
use airylab_core::tracy_widom::{Family, TracyWidom};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{operation} failed: {message}")]
    Compute { operation: &'static str, message: String },
    #[error("output: {0}")]
    Output(#[from] OutputError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Compute { .. } | Self::Output(_) => 1,
        }
    }
}

fn op<E: std::fmt::Display>(operation: &'static str) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Compute { operation, message: e.to_string() }
}

/// A finished run: its final manifest and where it was written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.passed() { 0 } else { 1 }
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.subcommand {
        Subcommand::Tw => tw(config),
        Subcommand::Maxdist => maxdist(config),
        Subcommand::Sample => sample(config),
        Subcommand::Calibrate => calibrate_cmd(config),
        Subcommand::Verify => verify(config),
        Subcommand::BenchBounds => bench_bounds(config),
        Subcommand::Report => report(config),
    }
}

/// Runs `body` with a writer whose manifest ends `complete`, or `failed` on error.
fn with_writer(
    config: &RunConfig,
    family: &str,
    body: impl FnOnce(&mut RunWriter) -> Result<(), CliError>,
) -> Result<Outcome, CliError> {
    let mut writer = RunWriter::begin(config, family)?;
    let manifest_path = writer.manifest_path();
    match body(&mut writer) {
        Ok(()) => Ok(Outcome { manifest: writer.finish()?, manifest_path }),
        Err(e) => {
            writer.fail(e.to_string())?;
            Err(e)
        }
    }
}

fn check(writer: &mut RunWriter, experiment: &str, criterion: &str, statistic: &str, value: f64, threshold: f64, passed: bool) {
    writer.summary(format!("{experiment}.{statistic}"), value);
    writer.verdict(VerdictRecord {
        experiment: experiment.into(),
        criterion: criterion.into(),
        statistic: statistic.into(),
        value,
        threshold,
        passed,
    });
}

fn record_report(writer: &mut RunWriter, report: &ExperimentReport) {
    for (k, v) in &report.statistics {
        writer.summary(k.clone(), *v);
    }
    for v in &report.verdicts {
        writer.verdict(VerdictRecord {
            experiment: report.name.clone(),
            criterion: v.criterion.clone(),
            statistic: v.statistic.clone(),
            value: v.value,
            threshold: v.threshold,
            passed: v.passed,
        });
    }
}

fn tw(config: &RunConfig) -> Result<Outcome, CliError> {
    let range = config.range("table");
    with_writer(config, "tracy-widom", |w| {
        let table = TracyWidom::shared().map_err(op("tracy_widom_table"))?;
        let rows = table.rows(range.lo, range.hi, range.step).map_err(op("tracy_widom_table"))?;
        let csv = to_csv(
            &["s", "F", "E", "F1", "F2", "f1_pdf"],
            rows.iter().map(|r| [r.s, r.f, r.e, r.f1, r.f2, r.f1_pdf].map(real)),
        )?;
        w.data_file(".csv", &csv)?;
        w.summary("rows", rows.len() as f64);
        Ok(())
    })
}

fn maxdist(config: &RunConfig) -> Result<Outcome, CliError> {
    let levels = config.range("M").points();
    let nodes = config.count("nodes");
    if nodes < 20 {
        return Err(ConfigError::Invalid { key: "nodes".into(), reason: "at least 20 quadrature nodes".into() }.into());
    }
    with_writer(config, "max-distribution", |w| {
        let rep = maxtail_asymptotics(&levels, nodes).map_err(op("max_cdf"))?;
        let csv = to_csv(
            &["M", "tail", "log_tail_over_M^1.5", "bound_ratio"],
            rep.rows.iter().map(|r| [r.level, r.tail, r.log_ratio, r.bound_ratio].map(real)),
        )?;
        w.data_file(".csv", &csv)?;
        w.data_file(".json", &to_json("max tail report", &rep)?)?;
        w.summary("fit_constant", rep.fit_constant);
        w.summary("limit", rep.limit);
        let decreasing = rep.log_ratio_strictly_decreasing();
        check(w, "maxdist", "log tail / M^1.5 strictly decreasing", "strictly_decreasing", decreasing as u8 as f64, 1.0, decreasing);
        let holds = rep.bound_holds();
        let worst = rep.rows.iter().map(|r| r.bound_ratio).fold(0.0, f64::max);
        check(w, "maxdist", "tail <= C shape with C fitted at the smallest M", "max_bound_ratio", worst, 1.0, holds);
        if let Some(last) = rep.rows.last() {
            let inside = last.log_ratio > -1.886 && last.log_ratio < -1.0;
            check(w, "maxdist", "log ratio at the largest M in (-1.886, -1.0)", "last_log_ratio", last.log_ratio, -1.886, inside);
        }
        Ok(())
    })
}

/// Initial condition and rescaling, checked for compatibility.
fn process_of(config: &RunConfig) -> Result<(InitialCondition, Rescaling), ConfigError> {
    let ic = match config.text("ic") {
        "step" => InitialCondition::Step,
        _ => InitialCondition::Flat,
    };
    let rescaling = match config.text("rescaling") {
        "airy1" => Rescaling::Airy1,
        "airy2" => Rescaling::Airy2(Airy2Map::Characteristic),
        "airy2-parabolic" => Rescaling::Airy2(Airy2Map::Parabolic),
        _ => Rescaling::default_for(ic),
    };
    let compatible = matches!(
        (ic, rescaling),
        (InitialCondition::Flat, Rescaling::Airy1) | (InitialCondition::Step, Rescaling::Airy2(_))
    );
    if !compatible {
        return Err(ConfigError::Invalid {
            key: "rescaling".into(),
            reason: format!("`{}` does not apply to `{}` initial data", config.text("rescaling"), config.text("ic")),
        });
    }
    Ok((ic, rescaling))
}

fn family_of(rescaling: Rescaling) -> &'static str {
    match rescaling {
        Rescaling::Airy1 => "airy1",
        Rescaling::Airy2(_) => "airy2",
    }
}

fn horizon_of(config: &RunConfig) -> Result<f64, ConfigError> {
    config.require("horizon", |t| t >= 100.0, "horizon must be at least 100")
}

/// Refuses to sample unless a complete, passing calibration for the same
/// initial condition and horizon exists in the output directory.
fn calibration_gate(config: &RunConfig, ic_name: &str, horizon: f64) -> Result<Option<String>, CliError> {
    if config.text("calibration") == "skip" {
        return Ok(None);
    }
    let matching: Vec<Manifest> = scan_manifests(&config.output_dir)?
        .into_iter()
        .filter_map(|(_, m)| m.ok())
        .filter(|m| {
            m.subcommand == Subcommand::Calibrate.name()
                && m.status == RunStatus::Complete
                && m.config.get("ic").map(String::as_str) == Some(ic_name)
                && m.config.get("horizon").and_then(|h| h.parse::<f64>().ok()) == Some(horizon)
        })
        .collect();
    let latest = matching.into_iter().max_by(|a, b| a.started_unix_s.total_cmp(&b.started_unix_s));
    match latest {
        Some(m) if m.passed() => Ok(Some(m.name)),
        Some(m) => Err(CliError::Compute {
            operation: "calibration",
            message: format!("calibration `{}` for ic={ic_name} T={horizon} did not pass; sampling is blocked", m.name),
        }),
        None => Err(CliError::Compute {
            operation: "calibration",
            message: format!(
                "no calibration for ic={ic_name} T={horizon} in {}; run `airylab calibrate` first or set calibration=skip",
                config.output_dir.display()
            ),
        }),
    }
}

fn draw_paths(config: &RunConfig, ic: InitialCondition, rescaling: Rescaling, grid: &[f64]) -> Result<Vec<PathSample>, CliError> {
    let horizon = config.real("horizon");
    let tasep = TasepConfig::for_grid(ic, horizon, grid, rescaling, config.master_seed, ScalingConstants::for_ic(ic))
        .map_err(op("sample_paths"))?;
    sample_paths(&tasep, config.count("replicas"), grid, rescaling).map_err(op("sample_paths"))
}

fn samples_csv(paths: &[PathSample]) -> Result<Vec<u8>, OutputError> {
    let grid = paths.first().map(|p| p.x_grid.clone()).unwrap_or_default();
    let names: Vec<String> = ["replica", "seed"].into_iter().map(String::from).chain(grid.iter().map(|&x| real(x))).collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    to_csv(
        &header,
        paths.iter().enumerate().map(|(r, p)| {
            [r.to_string(), p.meta.seed.to_string()].into_iter().chain(p.values.iter().map(|&v| real(v))).collect::<Vec<_>>()
        }),
    )
}

fn sample(config: &RunConfig) -> Result<Outcome, CliError> {
    let (ic, rescaling) = process_of(config)?;
    let horizon = horizon_of(config)?;
    let grid = config.range("grid").points();
    if config.count("replicas") == 0 {
        return Err(ConfigError::Invalid { key: "replicas".into(), reason: "must be positive".into() }.into());
    }
    with_writer(config, family_of(rescaling), |w| {
        if let Some(name) = calibration_gate(config, config.text("ic"), horizon)? {
            w.summary(format!("calibration.{name}"), 1.0);
        }
        let paths = draw_paths(config, ic, rescaling, &grid)?;
        w.data_file(".csv", &samples_csv(&paths)?)?;
        w.summary("replicas", paths.len() as f64);
        w.summary("grid_points", grid.len() as f64);
        Ok(())
    })
}

fn calibrate_cmd(config: &RunConfig) -> Result<Outcome, CliError> {
    let (ic, rescaling) = process_of(config)?;
    let horizon = horizon_of(config)?;
    let replicas = config.count("replicas");
    if replicas < 5000 {
        return Err(ConfigError::Invalid { key: "replicas".into(), reason: "calibration needs at least 5000".into() }.into());
    }
    with_writer(config, family_of(rescaling), |w| {
        let tasep = TasepConfig::new(ic, horizon, (0, 1), config.master_seed, ScalingConstants::for_ic(ic));
        let rep = calibrate(&tasep, replicas).map_err(op("calibrate"))?;
        w.data_file(".json", &to_json("calibration report", &rep)?)?;
        w.summary("sample_mean", rep.sample_mean);
        w.summary("sample_variance", rep.sample_variance);
        w.summary("height_rate_fit", rep.height_rate_fit);
        check(w, "calibration", "KS distance to the one-point law", "ks", rep.ks, rep.ks_threshold, rep.ks < rep.ks_threshold);
        let drift_ok = rep.height_rate_drift <= airylab_core::sampler::MAX_HEIGHT_RATE_DRIFT;
        check(
            w,
            "calibration",
            "fitted height rate drift",
            "height_rate_drift",
            rep.height_rate_drift,
            airylab_core::sampler::MAX_HEIGHT_RATE_DRIFT,
            drift_ok,
        );
        Ok(())
    })
}

/// Reads a sample CSV as written by `sample`.
pub fn read_samples(path: &Path) -> Result<PathSet, CliError> {
    let bad = |m: String| CliError::Compute { operation: "read_samples", message: format!("{}: {m}", path.display()) };
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() < 3 || &header[0] != "replica" {
        return Err(bad("expected columns replica, seed, then one per grid point".into()));
    }
    let grid: Vec<f64> = header.iter().skip(2).map(|h| h.parse::<f64>()).collect::<Result<_, _>>().map_err(|e| bad(e.to_string()))?;
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            rec.iter().skip(2).map(|v| v.parse::<f64>().map_err(|e| bad(e.to_string()))).collect()
        })
        .collect::<Result<_, _>>()?;
    PathSet::new(grid, rows, vec![path.display().to_string()]).map_err(op("read_samples"))
}

fn median_at(paths: &PathSet, x: f64) -> Result<f64, CliError> {
    let mut col = paths.column(paths.index_of(x).map_err(op("verify"))?);
    col.sort_by(f64::total_cmp);
    Ok(col[col.len() / 2])
}

fn law_mean(rescaling: Rescaling) -> Result<f64, CliError> {
    let tw = TracyWidom::shared().map_err(op("tracy_widom_table"))?;
    Ok(match rescaling {
        Rescaling::Airy1 => 0.5 * tw.moments(Family::Goe).0,
        Rescaling::Airy2(_) => tw.moments(Family::Gue).0,
    })
}

/// Runs one named experiment of the statistics harness on `paths`.
pub fn run_experiment(config: &RunConfig, rescaling: Rescaling, paths: &PathSet) -> Result<ExperimentReport, CliError> {
    let x0 = config.real("x0");
    let n_grid = config.list("n_grid");
    let experiment = config.text("experiment");
    let fail = op("verify");
    let report = match experiment {
        "association" => {
            let cases = association_catalogue(x0, median_at(paths, x0)?).map_err(op("verify"))?;
            association_suite(paths, &cases)
        }
        "fkg" => fkg_suite(paths, &fkg_catalogue(x0, median_at(paths, x0)?)),
        "newman" => {
            let cases = newman_catalogue(x0, median_at(paths, x0)?).map_err(op("verify"))?;
            newman_suite(paths, &cases)
        }
        "covariance-probability" => {
            let lags: Vec<f64> = [0.5, 1.0, 1.5, 2.0, 3.0].into_iter().filter(|l| paths.index_of(x0 + l).is_ok()).collect();
            covariance_probability_bound(paths, x0, &lags, &[0.25, 0.5, 0.75])
        }
        "poisson" => {
            let tw = TracyWidom::shared().map_err(op("tracy_widom_table"))?;
            let poisson = PoissonConfig {
                lambda: config.real("lambda"),
                points: config.count("points"),
                spacing_multiplier: config.real("spacing"),
                x0,
                check_seed: config.master_seed,
            };
            poisson_experiment(paths, tw, &poisson)
        }
        "clt" => {
            let clt = CltConfig { x0, length: config.real("length"), lag_cut: 4.0, law_mean: law_mean(rescaling)? };
            clt_experiment(paths, &clt)
        }
        "ergodicity" => {
            let mut combined = ExperimentReport::new("ergodicity", paths.provenance());
            for trig in [Trig::Cos, Trig::Sin] {
                let one = ergodicity_decay(paths, x0, &n_grid, trig, &[1.0], &[0.0]).map_err(op("verify"))?;
                combined.absorb(&format!("{trig:?}").to_lowercase(), one);
            }
            Ok(combined)
        }
        "max-growth" => {
            let process = match rescaling {
                Rescaling::Airy1 => MaxProcess::Airy1,
                Rescaling::Airy2(_) => MaxProcess::Airy2,
            };
            max_growth(paths, process, x0, &n_grid)
        }
        "exceedance" => exceedance_measure(paths, &ExceedanceConfig { alpha: config.real("alpha"), x0 }, &n_grid),
        "modulus" => {
            let s_grid: Vec<f64> = (2..=16).map(|k| 0.5 * k as f64).collect();
            a2_modulus_tail(paths, &[x0], &s_grid)
        }
        other => unreachable!("experiment `{other}` passed validation"),
    };
    report.map_err(fail)
}

fn verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let (ic, rescaling) = process_of(config)?;
    let horizon = horizon_of(config)?;
    let input = config.text("input").to_string();
    let grid = config.range("grid").points();
    if config.text("experiment") == "modulus" && !matches!(rescaling, Rescaling::Airy2(_)) {
        return Err(ConfigError::Invalid { key: "experiment".into(), reason: "modulus applies to Airy2 samples".into() }.into());
    }
    with_writer(config, family_of(rescaling), |w| {
        let paths = if input.is_empty() {
            if let Some(name) = calibration_gate(config, config.text("ic"), horizon)? {
                w.summary(format!("calibration.{name}"), 1.0);
            }
            let samples = draw_paths(config, ic, rescaling, &grid)?;
            let provenance = vec![format!(
                "tasep ic={} T={horizon} replicas={} seed={}",
                config.text("ic"),
                samples.len(),
                config.master_seed
            )];
            PathSet::from_samples(&samples, provenance).map_err(op("verify"))?
        } else {
            let bytes = std::fs::read(&input).map_err(|e| CliError::Compute { operation: "read_samples", message: format!("{input}: {e}") })?;
            w.summary(format!("input.sha256.{}", &sha256_hex(&bytes)[..16]), 1.0);
            read_samples(Path::new(&input))?
        };
        let rep = run_experiment(config, rescaling, &paths)?;
        w.data_file(".json", &to_json("experiment report", &rep)?)?;
        let csv = to_csv(&["statistic", "value"], rep.statistics.iter().map(|(k, v)| [k.clone(), real(*v)]))?;
        w.data_file(".csv", &csv)?;
        record_report(w, &rep);
        Ok(())
    })
}

#[derive(Debug, Serialize)]
struct BoundSummary {
    lemma: String,
    term: String,
    fitted_constant: f64,
    refined_constant: f64,
    constant_drift: f64,
    max_identity_rel_error: f64,
    bound_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_log_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    onset: Option<f64>,
}

fn bound_csv(check: &BoundCheck) -> Result<Vec<u8>, OutputError> {
    let ratios = check.log_ratios();
    to_csv(
        &["grid", "log_lhs", "log_rhs_shape", "log_ratio", "identity_rel_error"],
        (0..check.grid.len()).map(|k| {
            [check.grid[k], check.log_lhs[k], check.log_rhs_shape[k], ratios[k], check.identity_rel_error[k]].map(real)
        }),
    )
}

/// `sd1`, `tdiff`, or `hsw.i1` when the term differs from the lemma.
fn check_id(check: &BoundCheck) -> String {
    let lemma = check.lemma_id.name();
    if check.term == lemma { lemma.to_lowercase() } else { format!("{lemma}.{}", check.term).to_lowercase() }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| lo * (hi / lo).powf(k as f64 / (points - 1) as f64)).collect()
}

fn bench_bounds(config: &RunConfig) -> Result<Outcome, CliError> {
    let theta = config.range("theta");
    let theta_fine = crate::config::GridRange { step: 0.5 * theta.step, ..theta };
    let levels = config.range("M").points();
    let tol = config.require("quad_tol", |t| t > 0.0 && t <= 1e-8, "quad_tol must lie in (0, 1e-8]")?;
    let (z_lo, z_hi) = (config.real("z_lo"), config.real("z_hi"));
    let z_points = config.count("z_points");
    if !(z_lo > 0.0 && z_hi > z_lo) || z_points < 3 {
        return Err(ConfigError::Invalid { key: "z_lo".into(), reason: "need 0 < z_lo < z_hi and z_points >= 3".into() }.into());
    }
    with_writer(config, "bounds", |w| {
        let mut summaries = Vec::new();
        let mut record = |w: &mut RunWriter, coarse: &BoundCheck, fine: &BoundCheck, drift_max: f64, extra: Option<f64>| -> Result<(), CliError> {
            let id = check_id(coarse);
            w.data_file(&format!(".{id}.csv"), &bound_csv(coarse)?)?;
            let drift = coarse.constant_drift(fine);
            let identity = coarse.max_identity_error().max(fine.max_identity_error());
            check(w, &id, "bound holds on the grid with the fitted constant", "bound_holds", coarse.bound_holds() as u8 as f64, 1.0, coarse.bound_holds());
            check(w, &id, "second-route identity", "max_identity_rel_error", identity, 1e-6, identity < 1e-6);
            check(w, &id, "fitted constant stable under refinement", "constant_drift", drift, drift_max, drift < drift_max);
            summaries.push(BoundSummary {
                lemma: coarse.lemma_id.name().into(),
                term: coarse.term.clone(),
                fitted_constant: coarse.fitted_constant,
                refined_constant: fine.fitted_constant,
                constant_drift: drift,
                max_identity_rel_error: identity,
                bound_holds: coarse.bound_holds(),
                final_log_slope: extra,
                onset: None,
            });
            Ok(())
        };
        for lemma in LemmaId::STEEPEST_DESCENT {
            let coarse = check_sd(lemma, &theta.points(), tol).map_err(op("steepest_descent_bounds"))?;
            let fine = check_sd(lemma, &theta_fine.points(), 0.1 * tol).map_err(op("steepest_descent_bounds"))?;
            let slope = (lemma == LemmaId::Sd1).then(|| log_slope_in_cube(&fine).last().copied()).flatten();
            record(w, &coarse, &fine, 0.05, slope)?;
            if let Some(s) = slope {
                check(w, "sd1", "log slope in theta^3 at the largest theta within 0.01 of 2/3", "final_log_slope", s, 0.01, (s - 2.0 / 3.0).abs() < 0.01);
            }
        }
        let base = check_hs_shapes(&levels, HsResolution::default()).map_err(op("hilbert_schmidt_bounds"))?;
        let refined = check_hs_shapes(&levels, HsResolution::default().refined()).map_err(op("hilbert_schmidt_bounds"))?;
        for (coarse, fine) in base.iter().zip(&refined) {
            record(w, coarse, fine, 0.02, None)?;
        }

        let tw = TracyWidom::shared().map_err(op("tracy_widom_table"))?;
        let (lambda, eps) = (config.real("lambda"), config.real("eps"));
        let tdiff = check_tdiff(tw, lambda, eps, &log_grid(z_lo, z_hi, z_points)).map_err(op("quantile_spacing_bound"))?;
        let id = check_id(&tdiff);
        w.data_file(&format!(".{id}.csv"), &bound_csv(&tdiff)?)?;
        let density = tdiff.max_identity_error();
        check(w, &id, "bound holds on the grid with the fitted constant", "bound_holds", tdiff.bound_holds() as u8 as f64, 1.0, tdiff.bound_holds());
        check(w, &id, "derivative identity against the density", "max_identity_rel_error", density, 0.01, density < 0.01);
        summaries.push(BoundSummary {
            lemma: tdiff.lemma_id.name().into(),
            term: tdiff.term.clone(),
            fitted_constant: tdiff.fitted_constant,
            refined_constant: tdiff.fitted_constant,
            constant_drift: 0.0,
            max_identity_rel_error: density,
            bound_holds: tdiff.bound_holds(),
            final_log_slope: None,
            onset: tdiff_onset(&tdiff, tdiff.fitted_constant),
        });
        w.data_file(".json", &to_json("bound summary", &summaries)?)?;
        Ok(())
    })
}

#[derive(Debug, Serialize)]
struct ArtifactRow {
    manifest: String,
    name: String,
    subcommand: String,
    status: String,
    verdicts: usize,
    failed: Vec<String>,
    problems: Vec<String>,
}

fn artifact_problems(dir: &Path, m: &Manifest) -> Vec<String> {
    let mut problems = Vec::new();
    if m.status != RunStatus::Complete {
        problems.push(format!("manifest status {:?}{}", m.status, m.error.as_ref().map(|e| format!(": {e}")).unwrap_or_default()));
    }
    for f in &m.files {
        match std::fs::read(dir.join(&f.name)) {
            Ok(bytes) if sha256_hex(&bytes) == f.sha256 => {}
            Ok(_) => problems.push(format!("{}: checksum mismatch", f.name)),
            Err(e) => problems.push(format!("{}: {e}", f.name)),
        }
    }
    problems
}

fn report(config: &RunConfig) -> Result<Outcome, CliError> {
    let input = match config.text("input") {
        "" => config.output_dir.clone(),
        dir => PathBuf::from(dir),
    };
    with_writer(config, "report", |w| {
        let mut matrix: BTreeMap<String, Vec<ArtifactRow>> = BTreeMap::new();
        let mut growth: Vec<[String; 7]> = Vec::new();
        for (path, manifest) in scan_manifests(&input)? {
            let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let m = match manifest {
                Ok(m) => m,
                Err(e) => {
                    check(w, &file, "manifest readable", "readable", 0.0, 1.0, false);
                    matrix.entry("unreadable".into()).or_default().push(ArtifactRow {
                        manifest: file,
                        name: String::new(),
                        subcommand: String::new(),
                        status: "unreadable".into(),
                        verdicts: 0,
                        failed: Vec::new(),
                        problems: vec![e],
                    });
                    continue;
                }
            };
            if m.subcommand == Subcommand::Report.name() {
                continue;
            }
            let problems = artifact_problems(&input, &m);
            let failed: Vec<String> = m.verdicts.iter().filter(|v| !v.passed).map(|v| format!("{}: {}", v.experiment, v.criterion)).collect();
            check(w, &m.name, "artifact complete and intact", "problems", problems.len() as f64, 0.0, problems.is_empty());
            check(w, &m.name, "all verdicts pass", "failed_verdicts", failed.len() as f64, 0.0, failed.is_empty());
            if m.config.get("experiment").map(String::as_str) == Some("max-growth") {
                let (low, high) = match m.family.as_str() {
                    "airy2" => AIRY2_MAX_WINDOW,
                    _ => (AIRY1_MAX_LIMIT, AIRY1_MAX_LIMIT),
                };
                let mut ns: Vec<(f64, String)> = m
                    .summary
                    .keys()
                    .filter_map(|k| k.strip_prefix('N').and_then(|r| r.strip_suffix(".mean")).map(|n| (n.parse::<f64>().unwrap_or(f64::NAN), n.to_string())))
                    .filter(|(n, _)| n.is_finite())
                    .collect();
                ns.sort_by(|a, b| a.0.total_cmp(&b.0));
                for (n, key) in ns {
                    let mean = m.summary[&format!("N{key}.mean")];
                    let se = m.summary.get(&format!("N{key}.se")).copied().unwrap_or(f64::NAN);
                    growth.push([m.name.clone(), m.family.clone(), real(n), real(mean), real(se), real(low), real(high)]);
                }
            }
            matrix.entry(m.family.clone()).or_default().push(ArtifactRow {
                manifest: file,
                name: m.name.clone(),
                subcommand: m.subcommand.clone(),
                status: format!("{:?}", m.status).to_lowercase(),
                verdicts: m.verdicts.len(),
                failed,
                problems,
            });
        }
        w.summary("artifacts", matrix.values().map(Vec::len).sum::<usize>() as f64);
        w.data_file(".json", &to_json("report matrix", &matrix)?)?;
        let csv = to_csv(&["run", "family", "N", "mean_max_over_logN^(2/3)", "se", "reference_low", "reference_high"], growth)?;
        w.data_file(".max_growth.csv", &csv)?;
        Ok(())
    })
}
