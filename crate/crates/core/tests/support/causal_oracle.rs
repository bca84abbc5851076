//! Exhaustive causal-path search on the materialised multigraph G(1, K).
//! Independent of the wavefront: it enumerates every simple path whose edge
//! slot stamps strictly increase.

use aloha_core::protocol::{snapshot_graph, AlohaMac, SnapshotGraph};
use aloha_core::{NetworkConfig, PointSet, Stream};

pub struct OracleResult {
    /// Earliest arrival slot per node (`None` = unreachable by slot K).
    pub arrival: Vec<Option<u64>>,
    /// Fewest hops among paths arriving at that earliest slot.
    pub fastest_hops: Vec<Option<u32>>,
    /// Fewest hops among all paths arriving by slot K.
    pub min_hops: Vec<Option<u32>>,
    /// Shortest Euclidean length among the fastest paths.
    pub fastest_length: Vec<Option<f64>>,
}

/// Replays the stream exactly as `propagate` consumes it (one mark per node
/// per slot, index order).
pub fn materialise(ps: &PointSet, config: &NetworkConfig, rng: &mut Stream, slots: u64) -> Vec<SnapshotGraph> {
    let mac = AlohaMac::new(config.p).unwrap();
    (1..=slots)
        .map(|k| {
            let slot = mac.sample(ps.len(), k, rng);
            snapshot_graph(ps, &slot, config.beta, config.eta)
        })
        .collect()
}

pub fn exhaustive(ps: &PointSet, source: usize, graphs: Vec<SnapshotGraph>) -> OracleResult {
    let n = ps.len();
    // (slot, tx, rx, length) tuples
    let edges: Vec<(u64, usize, usize, f64)> = graphs
        .iter()
        .flat_map(|g| {
            g.edges.iter().map(move |&(t, r)| (g.slot, t as usize, r as usize, ps.distance(t as usize, r as usize)))
        })
        .collect();

    struct Search<'e> {
        edges: &'e [(u64, usize, usize, f64)],
        on_path: Vec<bool>,
        arrival: Vec<Option<u64>>,
        // (hops, length) of the best path arriving at `arrival`
        fastest: Vec<Option<(u32, f64)>>,
        min_hops: Vec<Option<u32>>,
    }

    impl Search<'_> {
        fn dfs(&mut self, u: usize, t: u64, hops: u32, length: f64) {
            for &(k, a, b, d) in self.edges {
                if a != u || k <= t || self.on_path[b] {
                    continue;
                }
                let cand = (hops + 1, length + d);
                let better = |old: (u32, f64)| cand.0 < old.0 || (cand.0 == old.0 && cand.1 < old.1);
                match self.arrival[b] {
                    Some(best) if k > best => {}
                    Some(best) if k == best => {
                        if better(self.fastest[b].unwrap()) {
                            self.fastest[b] = Some(cand);
                        }
                    }
                    _ => {
                        self.arrival[b] = Some(k);
                        self.fastest[b] = Some(cand);
                    }
                }
                self.min_hops[b] = Some(self.min_hops[b].map_or(cand.0, |m| m.min(cand.0)));
                self.on_path[b] = true;
                self.dfs(b, k, cand.0, cand.1);
                self.on_path[b] = false;
            }
        }
    }

    let mut search = Search {
        edges: &edges,
        on_path: vec![false; n],
        arrival: vec![None; n],
        fastest: vec![None; n],
        min_hops: vec![None; n],
    };
    search.arrival[source] = Some(0);
    search.fastest[source] = Some((0, 0.0));
    search.min_hops[source] = Some(0);
    search.on_path[source] = true;
    search.dfs(source, 0, 0, 0.0);
    OracleResult {
        arrival: search.arrival,
        fastest_hops: search.fastest.iter().map(|f| f.map(|(h, _)| h)).collect(),
        min_hops: search.min_hops,
        fastest_length: search.fastest.iter().map(|f| f.map(|(_, l)| l)).collect(),
    }
}
