//! Slot-by-slot growth of the causal multigraph and path-formation times.
//!
//! A node reached at slot `t` may forward in any later slot, so reaching a
//! node earlier never hurts: one wavefront pass gives the earliest causal
//! arrival at every node. Alongside, a DP over every causal path (not only
//! first arrivals) minimises `(hops, Euclidean length)` lexicographically,
//! which gives the fastest path: fewest hops among delay-optimal paths, the
//! shortest of those on ties.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::config::NetworkConfig;
use crate::geometry::Point;
use crate::pointprocess::PointSet;
use crate::protocol::{for_each_out_edge, AlohaMac, SlotState};

pub const UNREACHED: u64 = u64::MAX;
pub const NO_HOPS: u32 = u32::MAX;
const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, Default)]
pub struct PropagationOptions<'a> {
    /// Slots simulated are `start_slot + 1 ..= start_slot + max_slots`.
    pub start_slot: u64,
    /// Nodes allowed to be reached and to relay. Every node still runs ALOHA
    /// and interferes.
    pub relay_mask: Option<&'a [bool]>,
    /// Stop as soon as all of these are reached.
    pub targets: Option<&'a [usize]>,
}

/// Arrival table of one propagation from `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationFront {
    pub source: usize,
    pub start_slot: u64,
    /// Absolute slot of first arrival, [`UNREACHED`] otherwise.
    pub first_arrival: Vec<u64>,
    /// Fewest hops among causal paths arriving by `horizon`.
    pub min_hops: Vec<u32>,
    /// Fewest hops among causal paths arriving at `first_arrival` (fastest paths).
    pub fastest_hops: Vec<u32>,
    /// Euclidean length of the fastest path; `NaN` when unreached.
    pub fastest_length: Vec<f64>,
    /// Smallest-index transmitter that delivered the first arrival.
    parent: Vec<u32>,
    /// Last simulated slot.
    pub horizon: u64,
}

impl PropagationFront {
    pub fn is_reached(&self, node: usize) -> bool {
        self.first_arrival[node] != UNREACHED
    }

    /// Path formation time in slots, counted from `start_slot`.
    pub fn delay(&self, node: usize) -> Option<u64> {
        self.is_reached(node).then(|| self.first_arrival[node] - self.start_slot)
    }

    pub fn hops(&self, node: usize) -> Option<u32> {
        self.is_reached(node).then(|| self.fastest_hops[node])
    }

    pub fn path_length(&self, node: usize) -> Option<f64> {
        self.is_reached(node).then(|| self.fastest_length[node])
    }

    pub fn reached_count(&self) -> usize {
        self.first_arrival.iter().filter(|&&t| t != UNREACHED).count()
    }

    /// First-arrival path to `node` as `(node, slot)` pairs from the source
    /// (stamped `start_slot`). Slots strictly increase along the path.
    pub fn first_arrival_path(&self, node: usize) -> Option<Vec<(usize, u64)>> {
        if !self.is_reached(node) {
            return None;
        }
        let mut path = vec![(node, self.first_arrival[node])];
        let mut cur = node;
        while cur != self.source {
            cur = self.parent[cur] as usize;
            path.push((cur, self.first_arrival[cur]));
        }
        path.reverse();
        Some(path)
    }
}

/// Runs up to `config.max_slots` slots of ALOHA from `source`.
///
/// Each slot draws fresh marks for every node (index order, one Bernoulli
/// draw each), then only edges leaving already-reached transmitters are
/// evaluated.
pub fn propagate<R: Rng + ?Sized>(
    ps: &PointSet,
    source: usize,
    config: &NetworkConfig,
    rng: &mut R,
    opts: PropagationOptions<'_>,
) -> PropagationFront {
    let n = ps.len();
    let mac = AlohaMac::new(config.p).expect("validated transmit probability");
    let (beta, eta) = (config.beta, config.eta);
    let mut first_arrival = vec![UNREACHED; n];
    let mut min_hops = vec![NO_HOPS; n];
    let mut fastest_hops = vec![NO_HOPS; n];
    // length paired with min_hops
    let mut min_length = vec![f64::NAN; n];
    let mut fastest_length = vec![f64::NAN; n];
    let mut parent = vec![NO_PARENT; n];
    first_arrival[source] = opts.start_slot;
    min_hops[source] = 0;
    fastest_hops[source] = 0;
    min_length[source] = 0.0;
    fastest_length[source] = 0.0;
    parent[source] = source as u32;

    let allowed = |y: usize| opts.relay_mask.is_none_or(|m| m[y]);
    let mut reached: Vec<usize> = vec![source];
    let mut fresh: Vec<usize> = Vec::new();
    let mut slot = SlotState::from_flags(opts.start_slot, vec![false; n]);
    let mut is_target = vec![false; n];
    for &y in opts.targets.unwrap_or(&[]) {
        is_target[y] = true;
    }
    let mut pending_targets = (0..n).filter(|&y| is_target[y] && first_arrival[y] == UNREACHED).count();
    let mut horizon = opts.start_slot;

    if opts.targets.is_some() && pending_targets == 0 {
        return PropagationFront {
            source,
            start_slot: opts.start_slot,
            first_arrival,
            min_hops,
            fastest_hops,
            fastest_length,
            parent,
            horizon,
        };
    }

    for k in (opts.start_slot + 1)..=(opts.start_slot + config.max_slots) {
        mac.resample(&mut slot, k, rng);
        horizon = k;
        for &u in &reached {
            if !slot.is_transmitter(u) {
                continue;
            }
            // a transmitter cannot receive, so its own entries are stable this slot
            let via = min_hops[u].saturating_add(1);
            let base = min_length[u];
            for_each_out_edge(ps, &slot, u, beta, eta, |y, d| {
                if !allowed(y) {
                    return;
                }
                let len = base + d;
                if first_arrival[y] == UNREACHED {
                    first_arrival[y] = k;
                    parent[y] = u as u32;
                    min_hops[y] = via;
                    min_length[y] = len;
                    fresh.push(y);
                } else {
                    if first_arrival[y] == k && (u as u32) < parent[y] {
                        parent[y] = u as u32;
                    }
                    if via < min_hops[y] || (via == min_hops[y] && len < min_length[y]) {
                        min_hops[y] = via;
                        min_length[y] = len;
                    }
                }
            });
        }
        for &y in &fresh {
            fastest_hops[y] = min_hops[y];
            fastest_length[y] = min_length[y];
            if is_target[y] {
                pending_targets -= 1;
            }
        }
        reached.append(&mut fresh);
        if opts.targets.is_some() && pending_targets == 0 {
            break;
        }
    }

    PropagationFront {
        source,
        start_slot: opts.start_slot,
        first_arrival,
        min_hops,
        fastest_hops,
        fastest_length,
        parent,
        horizon,
    }
}

/// One measured source–destination pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayRecord {
    pub replication: u64,
    /// Nominal destination offset along +x (the experiment grid value).
    pub target: f64,
    /// Distance between the actual source and destination nodes.
    pub distance: f64,
    /// Slots until a causal path exists; `None` when censored at the horizon.
    pub delay: Option<u64>,
    /// Hops of a fastest path.
    pub hops: Option<u32>,
    /// Euclidean length of that path.
    pub path_length: Option<f64>,
}

impl DelayRecord {
    pub fn censored(&self) -> bool {
        self.delay.is_none()
    }

    /// Mean Euclidean hop length of the fastest path.
    pub fn hop_length(&self) -> Option<f64> {
        match (self.hops, self.path_length) {
            (Some(h), Some(len)) if h > 0 => Some(len / h as f64),
            _ => None,
        }
    }
}

fn closest_allowed(ps: &PointSet, at: Point, mask: Option<&[bool]>) -> Option<usize> {
    match mask {
        None => ps.closest_node(at).map(|(i, _)| i),
        Some(m) => ps.nearest_where(at, |i| m[i]).map(|(i, _)| i),
    }
}

/// `T(x, y)` between arbitrary coordinates: both are mapped to their closest
/// (allowed) nodes first. `None` when no node qualifies.
pub fn path_formation_time<R: Rng + ?Sized>(
    ps: &PointSet,
    source_point: Point,
    dest_point: Point,
    config: &NetworkConfig,
    rng: &mut R,
    relay_mask: Option<&[bool]>,
) -> Option<DelayRecord> {
    let source = closest_allowed(ps, source_point, relay_mask)?;
    let dest = closest_allowed(ps, dest_point, relay_mask)?;
    let target = source_point.x - dest_point.x;
    let target = libm::hypot(target, source_point.y - dest_point.y);
    let targets = [dest];
    let front =
        propagate(ps, source, config, rng, PropagationOptions { start_slot: 0, relay_mask, targets: Some(&targets) });
    Some(DelayRecord {
        replication: 0,
        target,
        distance: ps.distance(source, dest),
        delay: front.delay(dest),
        hops: front.hops(dest),
        path_length: front.path_length(dest),
    })
}

/// Delays from the node closest to the origin to the nodes closest to
/// `(x, 0)` for every `x` in `offsets`, all from one propagation.
pub fn delays_along_axis<R: Rng + ?Sized>(
    ps: &PointSet,
    offsets: &[f64],
    config: &NetworkConfig,
    rng: &mut R,
    relay_mask: Option<&[bool]>,
    replication: u64,
) -> Option<Vec<DelayRecord>> {
    let source = closest_allowed(ps, Point::ORIGIN, relay_mask)?;
    let dests: Vec<usize> =
        offsets.iter().map(|&x| closest_allowed(ps, Point::new(x, 0.0), relay_mask)).collect::<Option<_>>()?;
    let front =
        propagate(ps, source, config, rng, PropagationOptions { start_slot: 0, relay_mask, targets: Some(&dests) });
    Some(
        offsets
            .iter()
            .zip(&dests)
            .map(|(&x, &d)| DelayRecord {
                replication,
                target: x,
                distance: ps.distance(source, d),
                delay: front.delay(d),
                hops: front.hops(d),
                path_length: front.path_length(d),
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Boundary;
    use crate::stream::replication_stream;

    fn pair() -> (PointSet, NetworkConfig) {
        let ps = PointSet::from_positions(vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0)], 5.0, Boundary::Window, 1.0)
            .unwrap();
        let cfg =
            NetworkConfig { p: 0.3, beta: 1.2, eta: 1.0, window_half: 5.0, max_slots: 10_000, ..Default::default() };
        (ps, cfg)
    }

    #[test]
    fn two_node_delay_is_geometric() {
        let (ps, cfg) = pair();
        let samples: Vec<f64> = (0..4000)
            .map(|r| {
                let f = propagate(&ps, 0, &cfg, &mut replication_stream(1, 0, r), PropagationOptions::default());
                f.delay(1).unwrap() as f64
            })
            .collect();
        let s = crate::stats::Summary::of(&samples);
        let expected = 1.0 / (0.3 * 0.7);
        assert!((s.mean - expected).abs() < 3.0 * s.std_error, "{s:?} vs {expected}");
    }

    #[test]
    fn same_point_has_zero_delay() {
        let (ps, cfg) = pair();
        let rec = path_formation_time(
            &ps,
            Point::new(0.1, 0.0),
            Point::new(0.1, 0.0),
            &cfg,
            &mut replication_stream(0, 0, 0),
            None,
        )
        .unwrap();
        assert_eq!(rec.delay, Some(0));
        assert_eq!(rec.hops, Some(0));
    }

    #[test]
    fn start_offset_shifts_absolute_slots() {
        let (ps, cfg) = pair();
        let a = propagate(&ps, 0, &cfg, &mut replication_stream(2, 0, 0), PropagationOptions::default());
        let b = propagate(
            &ps,
            0,
            &cfg,
            &mut replication_stream(2, 0, 0),
            PropagationOptions { start_slot: 40, ..Default::default() },
        );
        assert_eq!(a.delay(1), b.delay(1));
        assert_eq!(b.first_arrival[1], 40 + a.first_arrival[1]);
    }

    #[test]
    fn mask_blocks_relays() {
        let ps = PointSet::from_positions(
            vec![Point::new(0.0, 0.0), Point::new(0.9, 0.0), Point::new(1.8, 0.0)],
            5.0,
            Boundary::Window,
            1.0,
        )
        .unwrap();
        let cfg = NetworkConfig { p: 0.3, beta: 1.2, eta: 1.0, window_half: 5.0, max_slots: 500, ..Default::default() };
        let mask = [true, false, true];
        let f = propagate(
            &ps,
            0,
            &cfg,
            &mut replication_stream(0, 0, 0),
            PropagationOptions { relay_mask: Some(&mask), ..Default::default() },
        );
        assert!(!f.is_reached(1) && !f.is_reached(2));
        let f = propagate(&ps, 0, &cfg, &mut replication_stream(0, 0, 0), PropagationOptions::default());
        assert!(f.is_reached(2));
        assert_eq!(f.hops(2), Some(2));
        let path = f.first_arrival_path(2).unwrap();
        assert_eq!(path.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(path.windows(2).all(|w| w[0].1 < w[1].1));
    }
}
