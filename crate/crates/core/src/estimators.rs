//! Monte Carlo estimators for snapshot degrees and single-hop connection
//! times.
//!
//! Each estimator is split into a per-replication sampler (fed its own
//! stream) and an order-independent reduction, so callers can fan
//! replications out however they like. The serial `estimate_*` drivers use
//! `replication_stream(config.seed, 0, r)` for replication `r`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::analytics::{self, AnalyticsError};
use crate::config::{ConfigError, NetworkConfig};
use crate::geometry::Point;
use crate::pointprocess::{PointSet, PointSetError};
use crate::protocol::{link_ok, snapshot_graph, AlohaMac, SlotState};
use crate::stats::{Ratio, Summary};
use crate::stream::replication_stream;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    PointSet(#[from] PointSetError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("at least one replication is required")]
    NoReplications,
    #[error("connection-time estimators need the interference-limited regime (eta = inf), got eta = {0}")]
    NeedsInterferenceLimited(f64),
    #[error(
        "{censored} of {runs} runs hit max_slots = {max_slots} although the mean should be finite; raise max_slots"
    )]
    HorizonTooShort { censored: u64, runs: u64, max_slots: u64 },
}

/// Degree tallies of one snapshot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DegreeSample {
    pub transmitters: u64,
    pub receivers: u64,
    pub edges: u64,
    /// Edges counted at tallied transmitters.
    pub out_sum: u64,
    /// Edges counted at tallied receivers.
    pub in_sum: u64,
    pub isolated: u64,
    pub out_hist: Vec<u64>,
    pub in_hist: Vec<u64>,
    pub max_in_degree: u32,
}

fn bump(hist: &mut Vec<u64>, d: usize) {
    if hist.len() <= d {
        hist.resize(d + 1, 0);
    }
    hist[d] += 1;
}

/// Degrees of one fresh network and slot. In window mode only nodes at least
/// `config.guard_distance()` from the edge are tallied; `max_in_degree` and
/// `edges` cover every node.
pub fn sample_degrees<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<DegreeSample, EstimatorError> {
    config.validate()?;
    let ps = PointSet::sample(config, rng)?;
    let mac = AlohaMac::new(config.p).expect("validated");
    let slot = mac.sample(ps.len(), 1, rng);
    Ok(tally_degrees(&ps, &slot, config))
}

pub fn tally_degrees(ps: &PointSet, slot: &SlotState, config: &NetworkConfig) -> DegreeSample {
    let g = snapshot_graph(ps, slot, config.beta, config.eta);
    let out = g.out_degrees(ps.len());
    let inn = g.in_degrees(ps.len());
    let guard = config.guard_distance();
    let metric = ps.metric();
    let mut s = DegreeSample { edges: g.edges.len() as u64, ..Default::default() };
    for i in 0..ps.len() {
        if !slot.is_transmitter(i) {
            s.max_in_degree = s.max_in_degree.max(inn[i]);
        }
        if metric.edge_clearance(ps.position(i)) < guard {
            continue;
        }
        if slot.is_transmitter(i) {
            s.transmitters += 1;
            s.out_sum += out[i] as u64;
            s.isolated += (out[i] == 0) as u64;
            bump(&mut s.out_hist, out[i] as usize);
        } else {
            s.receivers += 1;
            s.in_sum += inn[i] as u64;
            bump(&mut s.in_hist, inn[i] as usize);
        }
    }
    s
}

/// Pooled degree statistics. Standard errors treat replications as
/// independent clusters (nodes of one snapshot are correlated).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub replications: u64,
    pub transmitters: u64,
    pub receivers: u64,
    pub mean_out: f64,
    pub se_out: f64,
    pub mean_in: f64,
    pub se_in: f64,
    pub isolation_fraction: f64,
    pub se_isolation: f64,
    /// `p * mean_out - (1 - p) * mean_in`.
    pub flow_gap: f64,
    pub se_flow_gap: f64,
    pub out_hist: Vec<u64>,
    pub in_hist: Vec<u64>,
    pub max_in_degree: u32,
}

fn normalise(hist: &[u64]) -> Vec<f64> {
    let total: u64 = hist.iter().sum();
    hist.iter().map(|&c| c as f64 / total as f64).collect()
}

impl DegreeStats {
    pub fn from_samples(samples: &[DegreeSample], p: f64) -> Self {
        let out_pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.out_sum as f64, s.transmitters as f64)).collect();
        let in_pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.in_sum as f64, s.receivers as f64)).collect();
        let iso_pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.isolated as f64, s.transmitters as f64)).collect();
        let out = Ratio::of(&out_pairs);
        let inn = Ratio::of(&in_pairs);
        let iso = Ratio::of(&iso_pairs);
        let gap_infl: Vec<f64> = Ratio::influence(&out_pairs)
            .into_iter()
            .zip(Ratio::influence(&in_pairs))
            .map(|(a, b)| p * a - (1.0 - p) * b)
            .collect();
        let gap_se = Summary::of(&gap_infl).std_error;
        let mut out_hist = Vec::new();
        let mut in_hist = Vec::new();
        for s in samples {
            for (hist, add) in [(&mut out_hist, &s.out_hist), (&mut in_hist, &s.in_hist)] {
                if hist.len() < add.len() {
                    hist.resize(add.len(), 0);
                }
                for (h, a) in hist.iter_mut().zip(add) {
                    *h += a;
                }
            }
        }
        Self {
            replications: samples.len() as u64,
            transmitters: samples.iter().map(|s| s.transmitters).sum(),
            receivers: samples.iter().map(|s| s.receivers).sum(),
            mean_out: out.estimate,
            se_out: out.std_error,
            mean_in: inn.estimate,
            se_in: inn.std_error,
            isolation_fraction: iso.estimate,
            se_isolation: iso.std_error,
            flow_gap: p * out.estimate - (1.0 - p) * inn.estimate,
            se_flow_gap: gap_se,
            out_hist,
            in_hist,
            max_in_degree: samples.iter().map(|s| s.max_in_degree).max().unwrap_or(0),
        }
    }

    pub fn out_fractions(&self) -> Vec<f64> {
        normalise(&self.out_hist)
    }

    pub fn in_fractions(&self) -> Vec<f64> {
        normalise(&self.in_hist)
    }
}

pub fn estimate_degrees(config: &NetworkConfig, replications: u64) -> Result<DegreeStats, EstimatorError> {
    if replications == 0 {
        return Err(EstimatorError::NoReplications);
    }
    let samples = (0..replications)
        .map(|r| sample_degrees(config, &mut replication_stream(config.seed, 0, r)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DegreeStats::from_samples(&samples, config.p))
}

/// Slots until the probe first reaches `peer` (`None` if censored).
pub fn nn_connect_time_on<R: Rng + ?Sized>(
    ps: &PointSet,
    probe: usize,
    peer: usize,
    config: &NetworkConfig,
    rng: &mut R,
) -> Option<u64> {
    let mac = AlohaMac::new(config.p).expect("validated");
    let mut slot = SlotState::from_flags(0, vec![false; ps.len()]);
    for k in 1..=config.max_slots {
        mac.resample(&mut slot, k, rng);
        if slot.is_transmitter(probe)
            && !slot.is_transmitter(peer)
            && link_ok(ps, &slot, probe, peer, config.beta, config.eta)
        {
            return Some(k);
        }
    }
    None
}

/// Slots until the probe, while transmitting, reaches at least one receiver.
pub fn opportunistic_time_on<R: Rng + ?Sized>(
    ps: &PointSet,
    probe: usize,
    config: &NetworkConfig,
    rng: &mut R,
) -> Option<u64> {
    let mac = AlohaMac::new(config.p).expect("validated");
    let (beta, eta) = (config.beta, config.eta);
    let centre = ps.position(probe);
    let mut slot = SlotState::from_flags(0, vec![false; ps.len()]);
    for k in 1..=config.max_slots {
        mac.resample(&mut slot, k, rng);
        if !slot.is_transmitter(probe) {
            continue;
        }
        // For beta > 1 a receiver at distance r needs B(probe, (beta - 1) r) free
        // of other transmitters, so only r < d_t / (beta - 1) can succeed.
        let reach = if beta > 1.0 {
            match ps.nearest_where(centre, |j| j != probe && slot.is_transmitter(j)) {
                Some((_, d_t)) => d_t / (beta - 1.0),
                None => f64::INFINITY,
            }
        } else {
            f64::INFINITY
        };
        let radius = reach.min(eta);
        let hit = ps.any_within(centre, radius, |rx| {
            rx != probe && !slot.is_transmitter(rx) && link_ok(ps, &slot, probe, rx, beta, eta)
        });
        if hit {
            return Some(k);
        }
    }
    None
}

fn probe_network<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<(PointSet, usize), EstimatorError> {
    config.validate()?;
    if config.eta.is_finite() {
        return Err(EstimatorError::NeedsInterferenceLimited(config.eta));
    }
    let ps = PointSet::sample(config, rng)?.with_point(Point::ORIGIN)?;
    let probe = ps.len() - 1;
    Ok((ps, probe))
}

/// One replication of the nearest-neighbour connection time: fresh PPP, probe
/// at the origin, its nearest neighbour as the peer.
pub fn sample_nn_connect_time<R: Rng + ?Sized>(
    config: &NetworkConfig,
    rng: &mut R,
) -> Result<Option<u64>, EstimatorError> {
    let (ps, probe) = probe_network(config, rng)?;
    let (peer, _) = ps.nearest_neighbor(probe)?;
    Ok(nn_connect_time_on(&ps, probe, peer, config, rng))
}

pub fn sample_opportunistic_time<R: Rng + ?Sized>(
    config: &NetworkConfig,
    rng: &mut R,
) -> Result<Option<u64>, EstimatorError> {
    let (ps, probe) = probe_network(config, rng)?;
    if ps.len() < 2 {
        return Err(PointSetError::TooFewPoints(ps.len()).into());
    }
    Ok(opportunistic_time_on(&ps, probe, config, rng))
}

/// Summary of a (possibly heavy-tailed) connection time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectTimeEstimate {
    /// Mean of `min(T, max_slots)`; equals the plain mean when nothing is censored.
    pub estimate: f64,
    pub std_error: f64,
    pub n: u64,
    pub censored_fraction: f64,
    /// The closed form says the mean is infinite.
    pub diverges: bool,
    pub max_slots: u64,
    /// Growth of the restricted mean between horizons `max_slots / 10` and
    /// `max_slots`, with its standard error. Stays near zero for a finite
    /// mean; keeps growing (roughly with `log max_slots`) for a divergent one.
    pub tail_growth: f64,
    pub se_tail_growth: f64,
}

impl ConnectTimeEstimate {
    pub fn from_samples(samples: &[Option<u64>], max_slots: u64, diverges: bool) -> Self {
        let capped: Vec<f64> = samples.iter().map(|s| s.unwrap_or(max_slots) as f64).collect();
        let short = (max_slots / 10).max(1) as f64;
        let growth: Vec<f64> = capped.iter().map(|&t| t - t.min(short)).collect();
        let s = Summary::of(&capped);
        let g = Summary::of(&growth);
        let censored = samples.iter().filter(|s| s.is_none()).count();
        Self {
            estimate: s.mean,
            std_error: s.std_error,
            n: samples.len() as u64,
            censored_fraction: censored as f64 / samples.len() as f64,
            diverges,
            max_slots,
            tail_growth: g.mean,
            se_tail_growth: g.std_error,
        }
    }

    /// Refuses summaries where more than half the runs were censored although
    /// the mean is supposed to be finite.
    pub fn check_horizon(self) -> Result<Self, EstimatorError> {
        if !self.diverges && self.censored_fraction > 0.5 {
            let n = self.n;
            return Err(EstimatorError::HorizonTooShort {
                censored: libm::round(self.censored_fraction * n as f64) as u64,
                runs: n,
                max_slots: self.max_slots,
            });
        }
        Ok(self)
    }
}

pub fn nn_diverges(config: &NetworkConfig) -> Result<bool, EstimatorError> {
    Ok(analytics::expected_nn_time(config.p, config.beta)?.is_divergent())
}

pub fn opportunistic_diverges(config: &NetworkConfig) -> Result<bool, EstimatorError> {
    Ok(config.beta > 1.0 && analytics::opportunistic_time_lb(config.p, config.beta)?.is_divergent())
}

pub fn estimate_nn_connect_time(
    config: &NetworkConfig,
    replications: u64,
) -> Result<ConnectTimeEstimate, EstimatorError> {
    if replications == 0 {
        return Err(EstimatorError::NoReplications);
    }
    let samples = (0..replications)
        .map(|r| sample_nn_connect_time(config, &mut replication_stream(config.seed, 0, r)))
        .collect::<Result<Vec<_>, _>>()?;
    ConnectTimeEstimate::from_samples(&samples, config.max_slots, nn_diverges(config)?).check_horizon()
}

pub fn estimate_opportunistic_time(
    config: &NetworkConfig,
    replications: u64,
) -> Result<ConnectTimeEstimate, EstimatorError> {
    if replications == 0 {
        return Err(EstimatorError::NoReplications);
    }
    let samples = (0..replications)
        .map(|r| sample_opportunistic_time(config, &mut replication_stream(config.seed, 0, r)))
        .collect::<Result<Vec<_>, _>>()?;
    ConnectTimeEstimate::from_samples(&samples, config.max_slots, opportunistic_diverges(config)?).check_horizon()
}
