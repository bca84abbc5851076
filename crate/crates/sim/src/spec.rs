//! Experiment configuration files.
//!
//! A config is a TOML document with flat top-level keys and an optional
//! `[sweep]` table mapping network parameters to value lists:
//!
//! ```toml
//! kind = "delay_vs_distance"
//! lambda = 1.0
//! p = 0.2
//! beta = 1.2
//! eta = 1.5            # `inf` selects the interference-limited regime
//! replications = 200
//! distances = [5, 10, 15, 20]
//! giant_only = true
//!
//! [sweep]
//! p = [0.1, 0.2, 0.3]
//! ```
//!
//! Unknown keys, type mismatches and out-of-range values are errors that
//! name the offending line.

use std::collections::BTreeMap;
use std::fmt;

use aloha_core::{Boundary, NetworkConfig};
use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

pub const DEFAULT_WINDOW_HALF: f64 = 50.0;
pub const DEFAULT_REPLICATIONS: u64 = 200;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_MAX_SLOTS: u64 = 10_000;
pub const DEFAULT_OUTPUT: &str = "out";
/// Destination offsets used when `distances` is omitted.
pub const DEFAULT_DISTANCES: [f64; 9] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0];
/// `p` grid used by `time_constant_vs_p` when no sweep is given.
pub const DEFAULT_P_GRID: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];

pub const SWEEPABLE: [&str; 6] = ["lambda", "p", "beta", "eta", "window_half", "max_slots"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Degrees,
    NnTime,
    OpportunisticTime,
    DelayVsDistance,
    TimeConstantVsP,
    HopsVsDistance,
    PercolationScan,
    Formulas,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Degrees,
        ExperimentKind::NnTime,
        ExperimentKind::OpportunisticTime,
        ExperimentKind::DelayVsDistance,
        ExperimentKind::TimeConstantVsP,
        ExperimentKind::HopsVsDistance,
        ExperimentKind::PercolationScan,
        ExperimentKind::Formulas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Degrees => "degrees",
            ExperimentKind::NnTime => "nn_time",
            ExperimentKind::OpportunisticTime => "opportunistic_time",
            ExperimentKind::DelayVsDistance => "delay_vs_distance",
            ExperimentKind::TimeConstantVsP => "time_constant_vs_p",
            ExperimentKind::HopsVsDistance => "hops_vs_distance",
            ExperimentKind::PercolationScan => "percolation_scan",
            ExperimentKind::Formulas => "formulas",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Default boundary: torus for single-snapshot statistics, window for
    /// propagation experiments.
    pub fn default_boundary(self) -> Boundary {
        match self {
            ExperimentKind::Degrees | ExperimentKind::NnTime | ExperimentKind::OpportunisticTime => Boundary::Torus,
            _ => Boundary::Window,
        }
    }

    pub fn measures_delay(self) -> bool {
        matches!(
            self,
            ExperimentKind::DelayVsDistance | ExperimentKind::TimeConstantVsP | ExperimentKind::HopsVsDistance
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("{0}")]
    Toml(String),
    #[error("line {line}: {field}: {message}")]
    Invalid { line: usize, field: String, message: String },
}

/// Fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub base: NetworkConfig,
    /// Swept parameters in file order; the run grid is their Cartesian product.
    pub sweep: Vec<(String, Vec<f64>)>,
    pub replications: u64,
    pub output: String,
    pub distances: Vec<f64>,
    pub giant_only: bool,
    /// Smallest distance used by the time-constant fit.
    pub min_distance: f64,
}

/// One point of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: u64,
    pub label: String,
    pub config: NetworkConfig,
}

impl ExperimentSpec {
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let mut grid: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for (name, values) in &self.sweep {
            grid = grid
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut next = prefix.clone();
                        next.push((name.clone(), v));
                        next
                    })
                })
                .collect();
        }
        grid.into_iter()
            .enumerate()
            .map(|(index, assignment)| {
                let mut config = self.base.clone();
                for (name, v) in &assignment {
                    apply(&mut config, name, *v);
                }
                let label = match assignment.as_slice() {
                    [] => "base".to_string(),
                    [(_, v)] => format_value(*v),
                    many => many.iter().map(|(n, v)| format!("{n}={}", format_value(*v))).collect::<Vec<_>>().join(";"),
                };
                SweepPoint { index: index as u64, label, config }
            })
            .collect()
    }

    /// Sweep points times replications (`formulas` runs once per point).
    pub fn planned_runs(&self) -> u64 {
        let points = self.sweep.iter().map(|(_, v)| v.len() as u64).product::<u64>();
        match self.kind {
            ExperimentKind::Formulas => points,
            _ => points * self.replications,
        }
    }
}

pub fn format_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn apply(config: &mut NetworkConfig, name: &str, v: f64) {
    match name {
        "lambda" => config.lambda = v,
        "p" => config.p = v,
        "beta" => config.beta = v,
        "eta" => config.eta = v,
        "window_half" => config.window_half = v,
        "max_slots" => config.max_slots = v as u64,
        _ => unreachable!("sweep names are validated"),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: Spanned<String>,
    lambda: Spanned<f64>,
    p: Spanned<f64>,
    beta: Spanned<f64>,
    eta: Spanned<f64>,
    window_half: Option<Spanned<f64>>,
    boundary: Option<Spanned<String>>,
    seed: Option<Spanned<i64>>,
    max_slots: Option<Spanned<i64>>,
    replications: Option<Spanned<i64>>,
    output: Option<String>,
    distances: Option<Spanned<Vec<f64>>>,
    giant_only: Option<bool>,
    min_distance: Option<Spanned<f64>>,
    sweep: Option<BTreeMap<Spanned<String>, Spanned<Vec<f64>>>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses and validates a config file, filling in defaults.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, SpecError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start));
        match line {
            Some(l) => SpecError::Toml(format!("line {l}: {}", e.message())),
            None => SpecError::Toml(e.message().to_string()),
        }
    })?;
    let invalid = |span: std::ops::Range<usize>, field: &str, message: String| SpecError::Invalid {
        line: line_of(text, span.start),
        field: field.to_string(),
        message,
    };

    let kind = ExperimentKind::from_name(raw.kind.get_ref()).ok_or_else(|| {
        let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
        invalid(
            raw.kind.span(),
            "kind",
            format!("unknown kind {:?} (expected one of {})", raw.kind.get_ref(), names.join(", ")),
        )
    })?;

    let boundary = match &raw.boundary {
        None => kind.default_boundary(),
        Some(b) => match b.get_ref().as_str() {
            "window" => Boundary::Window,
            "torus" => Boundary::Torus,
            other => {
                return Err(invalid(b.span(), "boundary", format!("expected \"window\" or \"torus\", got {other:?}")))
            }
        },
    };
    let non_negative = |v: &Option<Spanned<i64>>, field: &str, default: u64, min: i64| -> Result<u64, SpecError> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() >= min => Ok(*s.get_ref() as u64),
            Some(s) => Err(invalid(s.span(), field, format!("must be >= {min} (got {})", s.get_ref()))),
        }
    };
    let seed = non_negative(&raw.seed, "seed", DEFAULT_SEED, 0)?;
    let max_slots = non_negative(&raw.max_slots, "max_slots", DEFAULT_MAX_SLOTS, 1)?;
    let replications = non_negative(&raw.replications, "replications", DEFAULT_REPLICATIONS, 1)?;

    let base = NetworkConfig {
        lambda: *raw.lambda.get_ref(),
        p: *raw.p.get_ref(),
        beta: *raw.beta.get_ref(),
        eta: *raw.eta.get_ref(),
        window_half: raw.window_half.as_ref().map_or(DEFAULT_WINDOW_HALF, |w| *w.get_ref()),
        boundary,
        seed,
        max_slots,
    };

    if let Err(e) = base.validate() {
        use aloha_core::ConfigError as E;
        let (field, span) = match e {
            E::Lambda(_) => ("lambda", raw.lambda.span()),
            E::TransmitProbability(_) => ("p", raw.p.span()),
            E::Beta(_) => ("beta", raw.beta.span()),
            E::Eta(_) => ("eta", raw.eta.span()),
            E::WindowHalf(_) | E::WindowTooSmall { .. } => {
                ("window_half", raw.window_half.as_ref().map_or(raw.eta.span(), |w| w.span()))
            }
            E::MaxSlots => ("max_slots", raw.max_slots.as_ref().map_or(raw.kind.span(), |m| m.span())),
        };
        return Err(invalid(span, field, e.to_string()));
    }

    let mut sweep = Vec::new();
    if let Some(table) = &raw.sweep {
        let mut entries: Vec<_> = table.iter().collect();
        entries.sort_by_key(|(k, _)| k.span().start);
        for (name, values) in entries {
            let key = name.get_ref().as_str();
            if !SWEEPABLE.contains(&key) {
                return Err(invalid(
                    name.span(),
                    key,
                    format!("not a sweepable network parameter (expected one of {})", SWEEPABLE.join(", ")),
                ));
            }
            if values.get_ref().is_empty() {
                return Err(invalid(values.span(), key, "sweep list is empty".to_string()));
            }
            for &v in values.get_ref() {
                let mut probe = base.clone();
                apply(&mut probe, key, v);
                if key == "max_slots" && (v < 1.0 || v.fract() != 0.0) {
                    return Err(invalid(values.span(), key, format!("max_slots must be a positive integer (got {v})")));
                }
                if let Err(e) = probe.validate() {
                    return Err(invalid(values.span(), key, format!("value {}: {e}", format_value(v))));
                }
            }
            sweep.push((key.to_string(), values.get_ref().clone()));
        }
    }
    if sweep.is_empty() && kind == ExperimentKind::TimeConstantVsP {
        sweep.push(("p".to_string(), DEFAULT_P_GRID.to_vec()));
    }

    let distances = match &raw.distances {
        None => DEFAULT_DISTANCES.to_vec(),
        Some(d) => {
            let v = d.get_ref();
            if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(invalid(
                    d.span(),
                    "distances",
                    "expected a non-empty list of finite distances >= 0".to_string(),
                ));
            }
            if v.iter().any(|&x| x > base.window_half) {
                return Err(invalid(
                    d.span(),
                    "distances",
                    format!("distances must not exceed window_half = {}", base.window_half),
                ));
            }
            v.clone()
        }
    };
    if matches!(kind, ExperimentKind::NnTime | ExperimentKind::OpportunisticTime) {
        let eta_swept = sweep.iter().any(|(n, v)| n == "eta" && v.iter().any(|x| x.is_finite()));
        if base.eta.is_finite() || eta_swept {
            return Err(invalid(
                raw.eta.span(),
                "eta",
                format!("{kind} needs eta = inf (interference-limited regime)"),
            ));
        }
    }
    let min_distance = match &raw.min_distance {
        None => {
            if base.eta.is_finite() {
                5.0 * base.eta
            } else {
                0.0
            }
        }
        Some(m) if m.get_ref().is_finite() && *m.get_ref() >= 0.0 => *m.get_ref(),
        Some(m) => return Err(invalid(m.span(), "min_distance", "must be finite and >= 0".to_string())),
    };

    let giant_only = raw.giant_only.unwrap_or(kind.measures_delay() && base.eta.is_finite());
    let eta_infinite =
        base.eta.is_infinite() || sweep.iter().any(|(n, v)| n == "eta" && v.iter().any(|x| x.is_infinite()));
    if giant_only && eta_infinite {
        return Err(invalid(raw.eta.span(), "giant_only", "the giant component needs a finite eta".to_string()));
    }
    Ok(ExperimentSpec {
        kind,
        base,
        sweep,
        replications,
        output: raw.output.unwrap_or_else(|| DEFAULT_OUTPUT.to_string()),
        distances,
        giant_only,
        min_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "kind = \"degrees\"\nlambda = 1.0\np = 0.2\nbeta = 1.2\neta = 1.0\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let s = parse_config(MINIMAL).unwrap();
        assert_eq!(s.kind, ExperimentKind::Degrees);
        assert_eq!(s.base.window_half, 50.0);
        assert_eq!(s.replications, 200);
        assert_eq!(s.base.seed, 0);
        assert_eq!(s.base.boundary, Boundary::Torus);
        assert_eq!(s.planned_runs(), 200);
    }

    #[test]
    fn out_of_range_p_names_the_field_and_line() {
        let text = MINIMAL.replace("p = 0.2", "p = 1.5");
        match parse_config(&text) {
            Err(SpecError::Invalid { line, field, .. }) => {
                assert_eq!(field, "p");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let text = format!("{MINIMAL}colour = \"blue\"\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("line 6") && err.contains("colour"), "{err}");
    }

    #[test]
    fn type_mismatch_is_reported() {
        let text = MINIMAL.replace("beta = 1.2", "beta = \"wide\"");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
    }

    #[test]
    fn sweep_counts_planned_runs() {
        let text = format!("{MINIMAL}[sweep]\np = [0.1, 0.2, 0.3, 0.4, 0.5]\n");
        let s = parse_config(&text).unwrap();
        assert_eq!(s.planned_runs(), 1000);
        let pts = s.sweep_points();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[2].label, "0.3");
        assert_eq!(pts[2].config.p, 0.3);
    }

    #[test]
    fn cartesian_sweep_labels() {
        let text = format!("{MINIMAL}[sweep]\np = [0.1, 0.2]\nbeta = [1.0, 2.0, 3.0]\n");
        let s = parse_config(&text).unwrap();
        let pts = s.sweep_points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1].label, "p=0.1;beta=2");
    }

    #[test]
    fn bad_sweep_entries() {
        let text = format!("{MINIMAL}[sweep]\ncolour = [1.0]\n");
        assert!(matches!(parse_config(&text), Err(SpecError::Invalid { line: 7, .. })));
        let text = format!("{MINIMAL}[sweep]\np = [0.1, 2.0]\n");
        assert!(matches!(parse_config(&text), Err(SpecError::Invalid { line: 7, .. })));
    }

    #[test]
    fn time_constant_default_grid() {
        let text = MINIMAL.replace("degrees", "time_constant_vs_p");
        let s = parse_config(&text).unwrap();
        assert_eq!(s.sweep, vec![("p".to_string(), DEFAULT_P_GRID.to_vec())]);
        assert_eq!(s.base.boundary, Boundary::Window);
        assert!(s.giant_only);
        assert_eq!(s.min_distance, 5.0);
    }

    #[test]
    fn connection_time_needs_infinite_eta() {
        let text = MINIMAL.replace("degrees", "nn_time");
        assert!(matches!(parse_config(&text), Err(SpecError::Invalid { ref field, .. }) if field == "eta"));
        let text = text.replace("eta = 1.0", "eta = inf\nwindow_half = 12.0");
        let s = parse_config(&text).unwrap();
        assert!(s.base.eta.is_infinite());
    }

    #[test]
    fn unknown_kind() {
        let text = MINIMAL.replace("degrees", "magic");
        assert!(matches!(parse_config(&text), Err(SpecError::Invalid { line: 1, .. })));
    }
}
