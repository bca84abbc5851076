//! Components of the `eta`-disc graph and its giant component.

use alloc::vec;
use alloc::vec::Vec;

use crate::pointprocess::PointSet;

/// Continuum-percolation critical radius coefficient: the disc graph of a
/// density-`lambda` PPP percolates for `eta > sqrt(1.435 / lambda)`.
pub const CRITICAL_AREA: f64 = 1.435;

pub fn critical_radius(lambda: f64) -> f64 {
    libm::sqrt(CRITICAL_AREA / lambda)
}

/// Union–find with union by size and path halving.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Returns true when `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Component label per node. Labels are numbered `0..count` in order of each
/// component's smallest node index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    pub labels: Vec<u32>,
    pub sizes: Vec<u32>,
}

impl ComponentLabels {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Relabels an arbitrary component assignment canonically.
    pub fn canonical(raw: impl IntoIterator<Item = usize>) -> Self {
        let raw: Vec<usize> = raw.into_iter().collect();
        let mut map = vec![u32::MAX; raw.len().max(raw.iter().copied().max().map_or(0, |m| m + 1))];
        let mut labels = Vec::with_capacity(raw.len());
        let mut sizes = Vec::new();
        for &r in &raw {
            if map[r] == u32::MAX {
                map[r] = sizes.len() as u32;
                sizes.push(0);
            }
            labels.push(map[r]);
            sizes[map[r] as usize] += 1;
        }
        Self { labels, sizes }
    }

    /// Label of the largest component (smallest label on ties).
    pub fn largest(&self) -> Option<u32> {
        let mut best: Option<(u32, u32)> = None;
        for (label, &size) in self.sizes.iter().enumerate() {
            if best.is_none_or(|(_, s)| size > s) {
                best = Some((label as u32, size));
            }
        }
        best.map(|b| b.0)
    }
}

/// Connected components of the graph joining nodes closer than `eta`.
pub fn disc_components(ps: &PointSet, eta: f64) -> ComponentLabels {
    let mut dsu = DisjointSet::new(ps.len());
    for i in 0..ps.len() {
        ps.for_each_within(ps.position(i), eta, |j, _| {
            if j > i {
                dsu.union(i, j);
            }
        });
    }
    ComponentLabels::canonical((0..ps.len()).map(|i| dsu.find(i)))
}

/// Largest component `Psi_eta` of the disc graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GiantComponent {
    pub members: Vec<bool>,
    pub size: usize,
    pub fraction: f64,
    /// `eta > sqrt(1.435 / lambda)`.
    pub threshold_ok: bool,
    pub n_components: usize,
    pub eta: f64,
    pub lambda: f64,
}

impl GiantComponent {
    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }
}

pub fn giant_component(ps: &PointSet, eta: f64, lambda: f64) -> GiantComponent {
    let labels = disc_components(ps, eta);
    let giant = labels.largest();
    let members: Vec<bool> = labels.labels.iter().map(|&l| Some(l) == giant).collect();
    let size = giant.map_or(0, |g| labels.sizes[g as usize] as usize);
    let fraction = if ps.is_empty() { 0.0 } else { size as f64 / ps.len() as f64 };
    GiantComponent {
        members,
        size,
        fraction,
        threshold_ok: eta > critical_radius(lambda),
        n_components: labels.count(),
        eta,
        lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Boundary, NetworkConfig};
    use crate::geometry::Point;
    use crate::stream::replication_stream;
    use proptest::prelude::*;

    #[allow(clippy::needless_range_loop)]
    fn bfs_labels(ps: &PointSet, eta: f64) -> ComponentLabels {
        let n = ps.len();
        let mut comp = vec![usize::MAX; n];
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = s;
            let mut queue = alloc::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if comp[v] == usize::MAX && ps.distance(u, v) < eta {
                        comp[v] = s;
                        queue.push_back(v);
                    }
                }
            }
        }
        ComponentLabels::canonical(comp)
    }

    fn random(seed: u64, eta: f64, torus: bool) -> PointSet {
        let cfg = NetworkConfig {
            lambda: 1.0,
            eta,
            window_half: 6.0,
            boundary: if torus { Boundary::Torus } else { Boundary::Window },
            ..Default::default()
        };
        PointSet::sample(&cfg, &mut replication_stream(seed, 3, 0)).unwrap()
    }

    #[test]
    fn line_components() {
        let pts = [0.0, 0.5, 2.0].iter().map(|&x| Point::new(x, 0.0)).collect();
        let ps = PointSet::from_positions(pts, 5.0, Boundary::Window, 1.0).unwrap();
        let c = disc_components(&ps, 1.0);
        assert_eq!(c.labels, vec![0, 0, 1]);
        assert_eq!(c.sizes, vec![2, 1]);
    }

    #[test]
    fn clique_is_giant() {
        let pts = (0..5).map(|i| Point::new(0.1 * i as f64, 0.05 * i as f64)).collect();
        let ps = PointSet::from_positions(pts, 5.0, Boundary::Window, 1.0).unwrap();
        let g = giant_component(&ps, 1.0, 1.0);
        assert_eq!(g.size, 5);
        assert_eq!(g.fraction, 1.0);
        assert!(!g.threshold_ok);
    }

    #[test]
    fn union_find_matches_bfs_on_random_instances() {
        for seed in 0..100 {
            let eta = 0.5 + 0.02 * seed as f64;
            let ps = random(seed, eta, seed % 3 == 0);
            assert_eq!(disc_components(&ps, eta), bfs_labels(&ps, eta), "seed {seed}");
        }
    }

    proptest! {
        #[test]
        fn components_nest_as_eta_grows(seed in 0u64..1000, a in 0.3f64..2.0, b in 0.3f64..2.0) {
            let (small, large) = if a < b { (a, b) } else { (b, a) };
            let ps = random(seed, large, false);
            let cs = disc_components(&ps, small);
            let cl = disc_components(&ps, large);
            // same small-eta component implies same large-eta component
            for i in 0..ps.len() {
                for j in (i + 1)..ps.len() {
                    if cs.labels[i] == cs.labels[j] {
                        prop_assert_eq!(cl.labels[i], cl.labels[j]);
                    }
                }
            }
            prop_assert!(giant_component(&ps, large, 1.0).size >= giant_component(&ps, small, 1.0).size);
        }
    }
}
