//! Least-squares fit of mean delay against distance, `E T(o, x) ~ mu x + C`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamic::DelayRecord;
use crate::stats::Summary;

pub const MIN_SAMPLES_PER_DISTANCE: u64 = 20;
pub const MAX_CENSORED_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 3 distances >= {min_distance}, found {found}")]
    TooFewDistances { found: usize, min_distance: f64 },
    #[error("distance {distance}: only {n} uncensored samples (need {MIN_SAMPLES_PER_DISTANCE})")]
    TooFewSamples { distance: f64, n: u64 },
    #[error("distance {distance}: censored fraction {fraction:.3} exceeds {MAX_CENSORED_FRACTION}")]
    TooCensored { distance: f64, fraction: f64 },
}

/// Per-distance delay and hop summary.
#[derive(Debug, Clone, PartialEq)]
pub struct DistancePoint {
    pub distance: f64,
    pub delay: Summary,
    pub hops: Summary,
    pub hop_length: Summary,
    pub total: u64,
    pub censored_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConstantFit {
    /// Slots per unit distance.
    pub mu_hat: f64,
    pub mu_se: f64,
    /// Slots.
    pub c_hat: f64,
    pub r_squared: f64,
    pub points: Vec<DistancePoint>,
}

/// Groups records by nominal target distance (ascending).
pub fn summarise_by_distance(records: &[DelayRecord]) -> Vec<DistancePoint> {
    let mut groups: BTreeMap<u64, Vec<&DelayRecord>> = BTreeMap::new();
    for r in records {
        // non-negative floats order like their bit patterns
        groups.entry(r.target.to_bits()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(bits, rs)| {
            let delays: Vec<f64> = rs.iter().filter_map(|r| r.delay.map(|d| d as f64)).collect();
            let hops: Vec<f64> = rs.iter().filter_map(|r| r.hops.map(|h| h as f64)).collect();
            let lengths: Vec<f64> = rs.iter().filter_map(|r| r.hop_length()).collect();
            let total = rs.len() as u64;
            DistancePoint {
                distance: f64::from_bits(bits),
                delay: Summary::of(&delays),
                hops: Summary::of(&hops),
                hop_length: Summary::of(&lengths),
                total,
                censored_fraction: (total - delays.len() as u64) as f64 / total as f64,
            }
        })
        .collect()
}

/// OLS of per-distance mean delay on distance, over distances `>= min_distance`.
pub fn fit_time_constant(records: &[DelayRecord], min_distance: f64) -> Result<TimeConstantFit, FitError> {
    let points: Vec<DistancePoint> =
        summarise_by_distance(records).into_iter().filter(|p| p.distance >= min_distance).collect();
    if points.len() < 3 {
        return Err(FitError::TooFewDistances { found: points.len(), min_distance });
    }
    for p in &points {
        if p.censored_fraction > MAX_CENSORED_FRACTION {
            return Err(FitError::TooCensored { distance: p.distance, fraction: p.censored_fraction });
        }
        if p.delay.n < MIN_SAMPLES_PER_DISTANCE {
            return Err(FitError::TooFewSamples { distance: p.distance, n: p.delay.n });
        }
    }
    let k = points.len() as f64;
    let x_bar = points.iter().map(|p| p.distance).sum::<f64>() / k;
    let y_bar = points.iter().map(|p| p.delay.mean).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.distance - x_bar) * (p.distance - x_bar)).sum();
    let sxy: f64 = points.iter().map(|p| (p.distance - x_bar) * (p.delay.mean - y_bar)).sum();
    let syy: f64 = points.iter().map(|p| (p.delay.mean - y_bar) * (p.delay.mean - y_bar)).sum();
    let mu_hat = sxy / sxx;
    let c_hat = y_bar - mu_hat * x_bar;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let weights: Vec<f64> = points.iter().map(|p| (p.distance - x_bar) / sxx).collect();
    let mu_se = slope_se(records, &points, &weights);
    Ok(TimeConstantFit { mu_hat, mu_se, c_hat, r_squared, points })
}

/// The slope is a fixed linear combination of per-distance means. When every
/// replication contributes one uncensored delay at every fitted distance the
/// slope is the mean of per-replication slopes, which carries the correlation
/// between distances; otherwise the means are treated as independent.
fn slope_se(records: &[DelayRecord], points: &[DistancePoint], weights: &[f64]) -> f64 {
    let mut per_rep: BTreeMap<u64, (usize, f64)> = BTreeMap::new();
    for r in records {
        let Some(idx) = points.iter().position(|p| p.distance.to_bits() == r.target.to_bits()) else {
            continue;
        };
        let entry = per_rep.entry(r.replication).or_insert((0, 0.0));
        match r.delay {
            Some(d) => {
                entry.0 += 1;
                entry.1 += weights[idx] * d as f64;
            }
            None => entry.0 = usize::MAX / 2,
        }
    }
    let complete = per_rep.values().all(|&(c, _)| c == points.len());
    let balanced = points.iter().all(|p| p.delay.n as usize == per_rep.len());
    if complete && balanced && per_rep.len() > 1 {
        let slopes: Vec<f64> = per_rep.values().map(|v| v.1).collect();
        Summary::of(&slopes).std_error
    } else {
        libm::sqrt(points.iter().zip(weights).map(|(p, w)| w * w * p.delay.std_error * p.delay.std_error).sum())
    }
}
