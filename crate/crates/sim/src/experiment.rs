//! Experiment orchestration: sweep grid x replications, then artifacts.
//!
//! Every run writes into one directory:
//! `raw.csv` (one row per replication and measured quantity), `summary.csv`
//! (one block per sweep point) and `manifest.json`, plus kind-specific
//! extras (`histograms.csv`, `hop_length.csv`, `fit.csv`, `times.json`,
//! `components.json`, `formulas.json`).

use std::path::{Path, PathBuf};
use std::time::Instant;

use aloha_core::analytics::{self, AnalyticsError};
use aloha_core::estimators::{
    self, nn_diverges, opportunistic_diverges, ConnectTimeEstimate, DegreeSample, DegreeStats, EstimatorError,
};
use aloha_core::fit::{fit_time_constant, summarise_by_distance, FitError};
use aloha_core::stats::Summary;
use aloha_core::{replication_stream, NetworkConfig};
use serde_json::{json, Value};
use thiserror::Error;

use crate::export::{cell, delay_row, opt, write_json, CsvWriter, RAW_DELAY_HEADER};
use crate::formulas::{closed_forms, mean_time, number};
use crate::parallel::Runner;
use crate::spec::{ExperimentKind, ExperimentSpec, SweepPoint};

pub const STREAM_SCHEME: &str =
    "ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(splitmix64(seed) ^ sweep_index) ^ replication))";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's master seed.
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    /// Overrides the config's output directory.
    pub out_dir: Option<PathBuf>,
    /// Compare summaries with the closed forms (3 SE).
    pub verify: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub sweep_value: String,
    pub observed: f64,
    pub expected: f64,
    pub std_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub planned_runs: u64,
    pub wall_seconds: f64,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn verified(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("sweep value {sweep_value:?}, replication {replication}, seed {seed}: {source}")]
    Replication { sweep_value: String, replication: u64, seed: u64, source: EstimatorError },
    #[error("sweep value {sweep_value:?}: {source}")]
    Estimate { sweep_value: String, source: EstimatorError },
    #[error("sweep value {sweep_value:?}: time-constant fit failed: {source}")]
    Fit { sweep_value: String, source: FitError },
    #[error("sweep value {sweep_value:?}: {source}")]
    Analytics { sweep_value: String, source: AnalyticsError },
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn csv(&mut self, name: &str, header: &[&str]) -> Result<(CsvWriter<std::fs::File>, PathBuf), ExperimentError> {
        let path = self.path(name);
        let w =
            CsvWriter::create(&path, header).map_err(|source| ExperimentError::Io { path: path.clone(), source })?;
        Ok((w, path))
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), ExperimentError> {
        let path = self.path(name);
        write_json(&path, value).map_err(|source| ExperimentError::Io { path, source })
    }
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

fn gather<T>(point: &SweepPoint, results: Vec<Result<T, EstimatorError>>) -> Result<Vec<T>, ExperimentError> {
    results
        .into_iter()
        .enumerate()
        .map(|(r, res)| {
            res.map_err(|source| ExperimentError::Replication {
                sweep_value: point.label.clone(),
                replication: r as u64,
                seed: point.config.seed,
                source,
            })
        })
        .collect()
}

fn within(observed: f64, expected: f64, se: f64) -> bool {
    (observed - expected).abs() <= 3.0 * se
}

/// Runs every sweep point and replication of `spec` and writes the artifacts.
pub fn run_experiment(spec: &ExperimentSpec, options: &RunOptions) -> Result<RunReport, ExperimentError> {
    let started = Instant::now();
    let mut spec = spec.clone();
    if let Some(seed) = options.seed {
        spec.base.seed = seed;
    }
    let dir = options.out_dir.clone().unwrap_or_else(|| PathBuf::from(&spec.output));
    std::fs::create_dir_all(&dir).map_err(io_at(&dir))?;
    let mut out = Output { dir: dir.clone(), files: Vec::new() };
    let runner = Runner { jobs: options.jobs };
    let points = spec.sweep_points();

    let checks = match spec.kind {
        ExperimentKind::Degrees => run_degrees(&spec, &points, &runner, &mut out)?,
        ExperimentKind::NnTime | ExperimentKind::OpportunisticTime => {
            run_connect_times(&spec, &points, &runner, &mut out)?
        }
        ExperimentKind::DelayVsDistance | ExperimentKind::TimeConstantVsP | ExperimentKind::HopsVsDistance => {
            run_delays(&spec, &points, &runner, &mut out)?;
            Vec::new()
        }
        ExperimentKind::PercolationScan => {
            run_percolation(&spec, &points, &runner, &mut out)?;
            Vec::new()
        }
        ExperimentKind::Formulas => {
            let forms = points
                .iter()
                .map(|pt| {
                    let c = &pt.config;
                    closed_forms(c.lambda, c.p, c.beta, c.eta)
                        .map(|v| json!({ "sweep_value": pt.label, "values": v }))
                        .map_err(|source| ExperimentError::Analytics { sweep_value: pt.label.clone(), source })
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.json("formulas.json", &Value::Array(forms))?;
            Vec::new()
        }
    };

    let manifest_path = dir.join("manifest.json");
    let mut files: Vec<String> =
        out.files.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect();
    files.push("manifest.json".into());
    let wall_seconds = started.elapsed().as_secs_f64();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "kind": spec.kind.name(),
        "config": config_json(&spec.base),
        "seed": spec.base.seed,
        "stream": STREAM_SCHEME,
        "sweep": spec.sweep.iter().map(|(n, v)| json!({ "parameter": n, "values": v.iter().map(|&x| number(x)).collect::<Vec<_>>() })).collect::<Vec<_>>(),
        "sweep_points": points.iter().map(|p| json!({ "index": p.index, "label": p.label })).collect::<Vec<_>>(),
        "replications": spec.replications,
        "planned_runs": spec.planned_runs(),
        "distances": spec.distances,
        "giant_only": spec.giant_only,
        "min_distance": spec.min_distance,
        "jobs": options.jobs,
        "verify": options.verify,
        "checks_passed": options.verify.then(|| checks.iter().all(|c| c.passed)),
        "wall_time_seconds": wall_seconds,
        "files": files,
    });
    write_json(&manifest_path, &manifest).map_err(io_at(&manifest_path))?;
    out.files.push(manifest_path);

    Ok(RunReport {
        out_dir: dir,
        files: out.files,
        planned_runs: spec.planned_runs(),
        wall_seconds,
        checks: if options.verify { checks } else { Vec::new() },
    })
}

pub fn config_json(c: &NetworkConfig) -> Value {
    json!({
        "lambda": c.lambda,
        "p": c.p,
        "beta": c.beta,
        "eta": number(c.eta),
        "window_half": c.window_half,
        "boundary": c.boundary.as_str(),
        "seed": c.seed,
        "max_slots": c.max_slots,
    })
}

fn run_degrees(
    spec: &ExperimentSpec,
    points: &[SweepPoint],
    runner: &Runner,
    out: &mut Output,
) -> Result<Vec<Check>, ExperimentError> {
    let (mut raw, raw_path) = out.csv(
        "raw.csv",
        &[
            "sweep_value",
            "replication",
            "transmitters",
            "receivers",
            "edges",
            "out_sum",
            "in_sum",
            "isolated",
            "max_in_degree",
        ],
    )?;
    let (mut summary, summary_path) = out.csv(
        "summary.csv",
        &[
            "sweep_value",
            "n",
            "mean_out",
            "se_out",
            "mean_in",
            "se_in",
            "isolation_fraction",
            "se_isolation",
            "flow_gap",
            "se_flow_gap",
            "max_in_degree",
            "expected_out",
            "expected_in",
            "isolation_lb",
        ],
    )?;
    let (mut hist, hist_path) =
        out.csv("histograms.csv", &["sweep_value", "direction", "degree", "count", "fraction"])?;
    let mut checks = Vec::new();

    for pt in points {
        let c = &pt.config;
        let samples: Vec<DegreeSample> = gather(
            pt,
            runner.map(spec.replications, |r| {
                estimators::sample_degrees(c, &mut replication_stream(c.seed, pt.index, r))
            }),
        )?;
        for (r, s) in samples.iter().enumerate() {
            raw.row(&[
                pt.label.clone(),
                r.to_string(),
                s.transmitters.to_string(),
                s.receivers.to_string(),
                s.edges.to_string(),
                s.out_sum.to_string(),
                s.in_sum.to_string(),
                s.isolated.to_string(),
                s.max_in_degree.to_string(),
            ])
            .map_err(io_at(&raw_path))?;
        }
        let st = DegreeStats::from_samples(&samples, c.p);
        let analytic = |f: fn(f64, f64, f64, f64) -> Result<f64, AnalyticsError>| {
            f(c.lambda, c.p, c.beta, c.eta)
                .map_err(|source| ExperimentError::Analytics { sweep_value: pt.label.clone(), source })
        };
        let e_out = analytic(analytics::expected_out_degree)?;
        let e_in = analytic(analytics::expected_in_degree)?;
        let iso = analytic(analytics::isolation_probability_lb)?;
        summary
            .row(&[
                pt.label.clone(),
                st.replications.to_string(),
                cell(st.mean_out),
                cell(st.se_out),
                cell(st.mean_in),
                cell(st.se_in),
                cell(st.isolation_fraction),
                cell(st.se_isolation),
                cell(st.flow_gap),
                cell(st.se_flow_gap),
                st.max_in_degree.to_string(),
                cell(e_out),
                cell(e_in),
                cell(iso),
            ])
            .map_err(io_at(&summary_path))?;
        for (direction, counts, fractions) in
            [("out", &st.out_hist, st.out_fractions()), ("in", &st.in_hist, st.in_fractions())]
        {
            for (d, (&n, f)) in counts.iter().zip(fractions).enumerate() {
                hist.row(&[pt.label.clone(), direction.to_string(), d.to_string(), n.to_string(), cell(f)])
                    .map_err(io_at(&hist_path))?;
            }
        }
        let check = |name: &str, observed: f64, expected: f64, se: f64, passed: bool| Check {
            name: name.to_string(),
            sweep_value: pt.label.clone(),
            observed,
            expected,
            std_error: se,
            passed,
        };
        checks.push(check("mean_out_degree", st.mean_out, e_out, st.se_out, within(st.mean_out, e_out, st.se_out)));
        checks.push(check("mean_in_degree", st.mean_in, e_in, st.se_in, within(st.mean_in, e_in, st.se_in)));
        checks.push(check("flow_identity", st.flow_gap, 0.0, st.se_flow_gap, within(st.flow_gap, 0.0, st.se_flow_gap)));
        checks.push(check(
            "isolation_lower_bound",
            st.isolation_fraction,
            iso,
            st.se_isolation,
            st.isolation_fraction >= iso - 3.0 * st.se_isolation,
        ));
        if c.beta >= 1.0 {
            checks.push(check("in_degree_at_most_one", st.max_in_degree as f64, 1.0, 0.0, st.max_in_degree <= 1));
        }
    }
    raw.finish().map_err(io_at(&raw_path))?;
    summary.finish().map_err(io_at(&summary_path))?;
    hist.finish().map_err(io_at(&hist_path))?;
    Ok(checks)
}

fn run_connect_times(
    spec: &ExperimentSpec,
    points: &[SweepPoint],
    runner: &Runner,
    out: &mut Output,
) -> Result<Vec<Check>, ExperimentError> {
    let nearest = spec.kind == ExperimentKind::NnTime;
    let (mut raw, raw_path) = out.csv("raw.csv", &["sweep_value", "replication", "time", "censored"])?;
    let (mut summary, summary_path) = out.csv(
        "summary.csv",
        &[
            "sweep_value",
            "estimate",
            "std_error",
            "n",
            "censored_fraction",
            "diverges",
            "max_slots",
            "tail_growth",
            "se_tail_growth",
            "closed_form",
        ],
    )?;
    let mut records = Vec::new();
    let mut checks = Vec::new();

    for pt in points {
        let c = &pt.config;
        let times: Vec<Option<u64>> = gather(
            pt,
            runner.map(spec.replications, |r| {
                let mut rng = replication_stream(c.seed, pt.index, r);
                if nearest {
                    estimators::sample_nn_connect_time(c, &mut rng)
                } else {
                    estimators::sample_opportunistic_time(c, &mut rng)
                }
            }),
        )?;
        for (r, t) in times.iter().enumerate() {
            raw.row(&[pt.label.clone(), r.to_string(), opt(*t), u8::from(t.is_none()).to_string()])
                .map_err(io_at(&raw_path))?;
        }
        let estimate_err = |source| ExperimentError::Estimate { sweep_value: pt.label.clone(), source };
        let diverges = if nearest { nn_diverges(c) } else { opportunistic_diverges(c) }.map_err(estimate_err)?;
        let est =
            ConnectTimeEstimate::from_samples(&times, c.max_slots, diverges).check_horizon().map_err(estimate_err)?;
        let analytics_err = |source| ExperimentError::Analytics { sweep_value: pt.label.clone(), source };
        let closed = if nearest {
            analytics::expected_nn_time(c.p, c.beta)
        } else {
            analytics::opportunistic_time_lb(c.p, c.beta)
        }
        .map_err(analytics_err)?;
        summary
            .row(&[
                pt.label.clone(),
                cell(est.estimate),
                cell(est.std_error),
                est.n.to_string(),
                cell(est.censored_fraction),
                est.diverges.to_string(),
                est.max_slots.to_string(),
                cell(est.tail_growth),
                cell(est.se_tail_growth),
                cell(closed.finite().unwrap_or(f64::INFINITY)),
            ])
            .map_err(io_at(&summary_path))?;
        records.push(json!({
            "sweep_value": pt.label,
            "estimate": est.estimate,
            "std_error": est.std_error,
            "n": est.n,
            "censored_fraction": est.censored_fraction,
            "diverges": est.diverges,
            "closed_form": mean_time(closed),
        }));
        if let Some(expected) = closed.finite() {
            let (name, passed) = if nearest {
                ("mean_nn_time", within(est.estimate, expected, est.std_error))
            } else {
                ("opportunistic_lower_bound", est.estimate >= expected - 3.0 * est.std_error)
            };
            checks.push(Check {
                name: name.into(),
                sweep_value: pt.label.clone(),
                observed: est.estimate,
                expected,
                std_error: est.std_error,
                passed,
            });
        }
    }
    raw.finish().map_err(io_at(&raw_path))?;
    summary.finish().map_err(io_at(&summary_path))?;
    out.json("times.json", &Value::Array(records))?;
    Ok(checks)
}

fn run_delays(
    spec: &ExperimentSpec,
    points: &[SweepPoint],
    runner: &Runner,
    out: &mut Output,
) -> Result<(), ExperimentError> {
    let (mut raw, raw_path) = out.csv("raw.csv", &RAW_DELAY_HEADER)?;
    let (mut summary, summary_path) = out.csv(
        "summary.csv",
        &["sweep_value", "distance", "mean_delay", "se_delay", "mean_hops", "se_hops", "n", "censored_fraction"],
    )?;
    let (mut lengths, lengths_path) =
        out.csv("hop_length.csv", &["sweep_value", "distance", "mean_hop_length", "se_hop_length", "n"])?;
    let mut fit = match spec.kind {
        ExperimentKind::TimeConstantVsP => {
            Some(out.csv("fit.csv", &["sweep_value", "mu_hat", "mu_se", "c_hat", "r_squared", "distances"])?)
        }
        _ => None,
    };

    for pt in points {
        let c = &pt.config;
        let records = runner.delays(c, pt.index, spec.replications, &spec.distances, spec.giant_only).map_err(
            |(replication, source)| ExperimentError::Replication {
                sweep_value: pt.label.clone(),
                replication,
                seed: c.seed,
                source,
            },
        )?;
        for r in &records {
            raw.row(&delay_row(&pt.label, r)).map_err(io_at(&raw_path))?;
        }
        for d in summarise_by_distance(&records) {
            summary
                .row(&[
                    pt.label.clone(),
                    cell(d.distance),
                    cell(d.delay.mean),
                    cell(d.delay.std_error),
                    cell(d.hops.mean),
                    cell(d.hops.std_error),
                    d.total.to_string(),
                    cell(d.censored_fraction),
                ])
                .map_err(io_at(&summary_path))?;
            lengths
                .row(&[
                    pt.label.clone(),
                    cell(d.distance),
                    cell(d.hop_length.mean),
                    cell(d.hop_length.std_error),
                    d.hop_length.n.to_string(),
                ])
                .map_err(io_at(&lengths_path))?;
        }
        if let Some((w, path)) = fit.as_mut() {
            let f = fit_time_constant(&records, spec.min_distance)
                .map_err(|source| ExperimentError::Fit { sweep_value: pt.label.clone(), source })?;
            w.row(&[
                pt.label.clone(),
                cell(f.mu_hat),
                cell(f.mu_se),
                cell(f.c_hat),
                cell(f.r_squared),
                f.points.len().to_string(),
            ])
            .map_err(io_at(path))?;
        }
    }
    raw.finish().map_err(io_at(&raw_path))?;
    summary.finish().map_err(io_at(&summary_path))?;
    lengths.finish().map_err(io_at(&lengths_path))?;
    if let Some((w, path)) = fit {
        w.finish().map_err(io_at(&path))?;
    }
    Ok(())
}

fn run_percolation(
    spec: &ExperimentSpec,
    points: &[SweepPoint],
    runner: &Runner,
    out: &mut Output,
) -> Result<(), ExperimentError> {
    let (mut raw, raw_path) =
        out.csv("raw.csv", &["sweep_value", "replication", "nodes", "giant_fraction", "n_components"])?;
    let (mut summary, summary_path) = out.csv(
        "summary.csv",
        &["sweep_value", "n", "mean_fraction", "se_fraction", "mean_components", "se_components", "threshold_ok"],
    )?;
    let mut records = Vec::new();
    for pt in points {
        let c = &pt.config;
        let rows = runner
            .giant_fractions(c, pt.index, spec.replications)
            .map_err(|source| ExperimentError::Estimate { sweep_value: pt.label.clone(), source })?;
        for (r, (fraction, components, nodes)) in rows.iter().enumerate() {
            raw.row(&[pt.label.clone(), r.to_string(), nodes.to_string(), cell(*fraction), components.to_string()])
                .map_err(io_at(&raw_path))?;
        }
        let fractions = Summary::of(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
        let components = Summary::of(&rows.iter().map(|r| r.1 as f64).collect::<Vec<_>>());
        let threshold_ok = c.eta > aloha_core::percolation::critical_radius(c.lambda);
        summary
            .row(&[
                pt.label.clone(),
                fractions.n.to_string(),
                cell(fractions.mean),
                cell(fractions.std_error),
                cell(components.mean),
                cell(components.std_error),
                threshold_ok.to_string(),
            ])
            .map_err(io_at(&summary_path))?;
        records.push(json!({
            "sweep_value": pt.label,
            "eta": number(c.eta),
            "lambda": c.lambda,
            "threshold_ok": threshold_ok,
            "giant_fraction": fractions.mean,
            "giant_fraction_se": fractions.std_error,
            "n_components": components.mean,
        }));
    }
    raw.finish().map_err(io_at(&raw_path))?;
    summary.finish().map_err(io_at(&summary_path))?;
    out.json("components.json", &Value::Array(records))?;
    Ok(())
}
