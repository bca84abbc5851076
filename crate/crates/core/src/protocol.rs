//! ALOHA slot marks and the protocol-model link rule.

use alloc::vec::Vec;

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use thiserror::Error;

use crate::pointprocess::PointSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("transmitter and receiver are the same node ({0})")]
    SameNode(usize),
    #[error("node {0} is not transmitting in this slot")]
    NotTransmitter(usize),
    #[error("node {0} is transmitting in this slot")]
    NotReceiver(usize),
    #[error("node {index} out of range ({count} nodes)")]
    BadIndex { index: usize, count: usize },
    #[error("transmit probability must lie in (0, 1) (got {0})")]
    Probability(f64),
}

/// Transmit/receive marks of every node in one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotState {
    pub slot: u64,
    transmitting: Vec<bool>,
}

/// Per-node Bernoulli(p) sampler for slot marks.
#[derive(Debug, Clone, Copy)]
pub struct AlohaMac {
    coin: Bernoulli,
}

impl AlohaMac {
    pub fn new(p: f64) -> Result<Self, ProtocolError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ProtocolError::Probability(p));
        }
        Ok(Self { coin: Bernoulli::new(p).map_err(|_| ProtocolError::Probability(p))? })
    }

    #[inline]
    pub fn transmits<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        self.coin.sample(rng)
    }

    /// Redraws `state` in place for slot `slot` (one draw per node, index order).
    pub fn resample<R: Rng + ?Sized>(&self, state: &mut SlotState, slot: u64, rng: &mut R) {
        state.slot = slot;
        for flag in state.transmitting.iter_mut() {
            *flag = self.coin.sample(rng);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, nodes: usize, slot: u64, rng: &mut R) -> SlotState {
        let transmitting = (0..nodes).map(|_| self.coin.sample(rng)).collect();
        SlotState { slot, transmitting }
    }
}

impl SlotState {
    pub fn from_flags(slot: u64, transmitting: Vec<bool>) -> Self {
        Self { slot, transmitting }
    }

    pub fn len(&self) -> usize {
        self.transmitting.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmitting.is_empty()
    }

    #[inline]
    pub fn is_transmitter(&self, i: usize) -> bool {
        self.transmitting[i]
    }

    pub fn flags(&self) -> &[bool] {
        &self.transmitting
    }

    pub fn transmitters(&self) -> impl Iterator<Item = usize> + '_ {
        self.transmitting.iter().enumerate().filter(|(_, &t)| t).map(|(i, _)| i)
    }

    pub fn transmitter_count(&self) -> usize {
        self.transmitting.iter().filter(|&&t| t).count()
    }
}

/// Draws the marks of slot `slot`: each node transmits independently with
/// probability `p`.
pub fn sample_slot<R: Rng + ?Sized>(ps: &PointSet, p: f64, slot: u64, rng: &mut R) -> Result<SlotState, ProtocolError> {
    Ok(AlohaMac::new(p)?.sample(ps.len(), slot, rng))
}

/// Link rule without role checks: `d(tx, rx) < eta` and no transmitter other
/// than `tx` inside the open disc `B(rx, beta * d)`.
#[inline]
pub fn link_ok(ps: &PointSet, slot: &SlotState, tx: usize, rx: usize, beta: f64, eta: f64) -> bool {
    let d = ps.distance(tx, rx);
    d < eta && !interfered(ps, slot, tx, rx, beta * d)
}

#[inline]
fn interfered(ps: &PointSet, slot: &SlotState, tx: usize, rx: usize, guard: f64) -> bool {
    ps.any_within(ps.position(rx), guard, |j| j != tx && slot.is_transmitter(j))
}

/// Protocol-model edge indicator `1(tx -> rx)`.
pub fn edge_indicator(
    ps: &PointSet,
    slot: &SlotState,
    tx: usize,
    rx: usize,
    beta: f64,
    eta: f64,
) -> Result<bool, ProtocolError> {
    let count = ps.len();
    for index in [tx, rx] {
        if index >= count || index >= slot.len() {
            return Err(ProtocolError::BadIndex { index, count });
        }
    }
    if tx == rx {
        return Err(ProtocolError::SameNode(tx));
    }
    if !slot.is_transmitter(tx) {
        return Err(ProtocolError::NotTransmitter(tx));
    }
    if slot.is_transmitter(rx) {
        return Err(ProtocolError::NotReceiver(rx));
    }
    Ok(link_ok(ps, slot, tx, rx, beta, eta))
}

/// Calls `f(rx, distance)` for every receiver that `tx` reaches in `slot`.
pub fn for_each_out_edge<F: FnMut(usize, f64)>(
    ps: &PointSet,
    slot: &SlotState,
    tx: usize,
    beta: f64,
    eta: f64,
    mut f: F,
) {
    ps.for_each_within(ps.position(tx), eta, |rx, d_sq| {
        if rx == tx || slot.is_transmitter(rx) {
            return;
        }
        let d = libm::sqrt(d_sq);
        if !interfered(ps, slot, tx, rx, beta * d) {
            f(rx, d);
        }
    });
}

/// Directed edge set `g(k)` of one slot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SnapshotGraph {
    pub slot: u64,
    /// `(transmitter, receiver)` pairs sorted ascending.
    pub edges: Vec<(u32, u32)>,
}

impl SnapshotGraph {
    pub fn out_degrees(&self, nodes: usize) -> Vec<u32> {
        let mut deg = alloc::vec![0u32; nodes];
        for &(t, _) in &self.edges {
            deg[t as usize] += 1;
        }
        deg
    }

    pub fn in_degrees(&self, nodes: usize) -> Vec<u32> {
        let mut deg = alloc::vec![0u32; nodes];
        for &(_, r) in &self.edges {
            deg[r as usize] += 1;
        }
        deg
    }
}

/// All edges of slot `slot.slot`.
///
/// Candidates are enumerated per receiver: if `d1` is the distance to the
/// nearest transmitter, a link from a transmitter at distance `d` needs
/// `d1 >= beta * d` unless it is that nearest one, so only transmitters within
/// `min(eta, max(d1, d1 / beta))` can qualify.
pub fn snapshot_graph(ps: &PointSet, slot: &SlotState, beta: f64, eta: f64) -> SnapshotGraph {
    let mut edges = Vec::new();
    for rx in 0..ps.len() {
        if slot.is_transmitter(rx) {
            continue;
        }
        let centre = ps.position(rx);
        let Some((_, d1)) = ps.nearest_where(centre, |j| slot.is_transmitter(j)) else {
            break;
        };
        if d1 >= eta {
            continue;
        }
        let reach = d1.max(d1 / beta).min(eta);
        // widen by one ulp-scale step: the candidate disc must be closed at `reach`
        let radius = reach + reach * 1e-12 + f64::MIN_POSITIVE;
        ps.for_each_within(centre, radius, |tx, _| {
            if slot.is_transmitter(tx) && link_ok(ps, slot, tx, rx, beta, eta) {
                edges.push((tx as u32, rx as u32));
            }
        });
    }
    edges.sort_unstable();
    SnapshotGraph { slot: slot.slot, edges }
}
