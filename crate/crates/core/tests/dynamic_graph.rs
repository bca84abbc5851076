mod support;

use aloha_core::dynamic::{delays_along_axis, path_formation_time, propagate, PropagationOptions};
use aloha_core::geometry::Point;
use aloha_core::percolation::giant_component;
use aloha_core::stats::{combined_se, ks_two_sample, Summary};
use aloha_core::{replication_stream, Boundary, NetworkConfig, PointSet};

use support::causal_oracle::{exhaustive, materialise};

fn small_instance(inst: u64) -> (PointSet, NetworkConfig) {
    // window mode below 5 * eta is fine here: nothing calls validate()
    let cfg = NetworkConfig {
        lambda: 0.8 + 0.05 * (inst % 5) as f64,
        p: [0.2, 0.3, 0.4][(inst % 3) as usize],
        beta: [0.8, 1.2, 1.5, 2.0][(inst % 4) as usize],
        eta: if inst.is_multiple_of(7) { f64::INFINITY } else { 1.5 },
        window_half: 2.6,
        boundary: if inst.is_multiple_of(2) { Boundary::Window } else { Boundary::Torus },
        seed: inst,
        max_slots: 12,
    };
    let ps = PointSet::sample(&cfg, &mut replication_stream(inst, 7, 0)).unwrap();
    (ps, cfg)
}

#[test]
fn wavefront_matches_exhaustive_causal_search() {
    let mut checked = 0;
    for inst in 0..200u64 {
        let (ps, cfg) = small_instance(inst);
        if ps.is_empty() || ps.len() > 30 {
            continue;
        }
        checked += 1;
        let front = propagate(&ps, 0, &cfg, &mut replication_stream(inst, 8, 0), PropagationOptions::default());
        let graphs = materialise(&ps, &cfg, &mut replication_stream(inst, 8, 0), cfg.max_slots);
        let oracle = exhaustive(&ps, 0, graphs);
        for y in 0..ps.len() {
            assert_eq!(front.delay(y), oracle.arrival[y], "instance {inst} node {y}");
            assert_eq!(front.hops(y), oracle.fastest_hops[y], "instance {inst} node {y}");
            let running = front.is_reached(y).then(|| front.min_hops[y]);
            assert_eq!(running, oracle.min_hops[y], "instance {inst} node {y}");
            match (front.path_length(y), oracle.fastest_length[y]) {
                (Some(a), Some(b)) => {
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b), "instance {inst} node {y}: {a} vs {b}")
                }
                (a, b) => assert_eq!(a.is_some(), b.is_some(), "instance {inst} node {y}"),
            }
        }
    }
    assert!(checked >= 150, "only {checked} usable instances");
}

#[test]
fn first_arrival_paths_are_causal_and_realised() {
    for inst in 0..60u64 {
        let (ps, cfg) = small_instance(inst);
        if ps.len() < 2 {
            continue;
        }
        let front = propagate(&ps, 0, &cfg, &mut replication_stream(inst, 9, 0), PropagationOptions::default());
        let graphs = materialise(&ps, &cfg, &mut replication_stream(inst, 9, 0), cfg.max_slots);
        for y in 0..ps.len() {
            let Some(path) = front.first_arrival_path(y) else { continue };
            assert_eq!(path.first().unwrap().0, 0);
            for w in path.windows(2) {
                let ((u, _), (v, k)) = (w[0], w[1]);
                assert!(w[0].1 < k, "non-increasing stamps");
                let g = &graphs[(k - 1) as usize];
                assert!(g.edges.contains(&(u as u32, v as u32)), "edge {u}->{v} missing in slot {k}");
            }
        }
    }
}

#[test]
fn front_is_monotone_in_horizon_and_respects_hop_bound() {
    let base = NetworkConfig {
        lambda: 1.0,
        p: 0.25,
        beta: 1.2,
        eta: 1.5,
        window_half: 10.0,
        max_slots: 40,
        ..Default::default()
    };
    for rep in 0..10 {
        let ps = PointSet::sample(&base, &mut replication_stream(21, 0, rep)).unwrap();
        let (src, _) = ps.closest_node(Point::ORIGIN).unwrap();
        let short = propagate(&ps, src, &base, &mut replication_stream(21, 1, rep), PropagationOptions::default());
        let long_cfg = NetworkConfig { max_slots: 80, ..base.clone() };
        let long = propagate(&ps, src, &long_cfg, &mut replication_stream(21, 1, rep), PropagationOptions::default());
        assert!(long.reached_count() >= short.reached_count());
        for y in 0..ps.len() {
            if short.is_reached(y) {
                assert_eq!(short.first_arrival[y], long.first_arrival[y]);
                assert!(long.min_hops[y] <= short.min_hops[y]);
            }
            if long.is_reached(y) {
                let bound = (ps.distance(src, y) / base.eta).ceil() as u64;
                assert!(long.min_hops[y] as u64 >= bound);
                assert!(long.delay(y).unwrap() >= bound);
            }
        }
    }
}

#[test]
fn restart_offset_is_distributionally_identical() {
    let cfg = NetworkConfig {
        lambda: 1.0,
        p: 0.2,
        beta: 1.2,
        eta: 1.5,
        window_half: 8.0,
        max_slots: 2000,
        ..Default::default()
    };
    let ps = PointSet::sample(&cfg, &mut replication_stream(5, 0, 0)).unwrap();
    let giant = giant_component(&ps, cfg.eta, cfg.lambda);
    let src = ps.nearest_where(Point::ORIGIN, |i| giant.contains(i)).unwrap().0;
    let dst = ps.nearest_where(Point::new(4.0, 0.0), |i| giant.contains(i)).unwrap().0;
    let run = |start: u64, stream: u64| -> Vec<f64> {
        (0..500)
            .map(|r| {
                let front = propagate(
                    &ps,
                    src,
                    &cfg,
                    &mut replication_stream(77, stream, r),
                    PropagationOptions { start_slot: start, relay_mask: Some(&giant.members), targets: Some(&[dst]) },
                );
                front.delay(dst).unwrap() as f64
            })
            .collect()
    };
    let from_zero = run(0, 1);
    let from_later = run(137, 2);
    let d = ks_two_sample(&from_zero, &from_later);
    // two-sample KS critical value at alpha = 0.01, n = m = 500
    let critical = 1.628 * (2.0f64 / 500.0).sqrt();
    assert!(d < critical, "KS D = {d} >= {critical}");
}

#[test]
fn delay_at_short_range_is_dominated_by_contention() {
    let cfg = NetworkConfig {
        lambda: 1.0,
        p: 0.2,
        beta: 1.2,
        eta: 1.5,
        window_half: 20.0,
        max_slots: 5000,
        ..Default::default()
    };
    let mut near = Vec::new();
    let mut double = Vec::new();
    for rep in 0..200 {
        let mut rng = replication_stream(31, 0, rep);
        let ps = PointSet::sample(&cfg, &mut rng).unwrap();
        let giant = giant_component(&ps, cfg.eta, cfg.lambda);
        let recs = delays_along_axis(&ps, &[5.0, 10.0], &cfg, &mut rng, Some(&giant.members), rep).unwrap();
        for r in &recs {
            assert!(r.delay.unwrap() as f64 >= (r.distance / cfg.eta).ceil());
        }
        near.push(recs[0].delay.unwrap() as f64);
        double.push(recs[1].delay.unwrap() as f64);
    }
    let a = Summary::of(&near);
    let b = Summary::of(&double);
    assert!(a.mean.is_finite() && a.mean >= 1.0 / cfg.p, "{a:?}");
    // E T(o, 2x) <= 2 E T(o, x)
    assert!(b.mean <= 2.0 * a.mean + 3.0 * combined_se(b.std_error, 2.0 * a.std_error), "{a:?} {b:?}");
}

#[test]
fn coordinate_mapping_uses_closest_nodes() {
    let ps = PointSet::from_positions(
        vec![Point::new(0.0, 0.0), Point::new(0.9, 0.0), Point::new(1.8, 0.0)],
        10.0,
        Boundary::Window,
        1.0,
    )
    .unwrap();
    let cfg = NetworkConfig { p: 0.3, beta: 1.2, eta: 1.0, window_half: 10.0, max_slots: 1000, ..Default::default() };
    let rec = path_formation_time(
        &ps,
        Point::new(0.2, 0.1),
        Point::new(1.7, -0.2),
        &cfg,
        &mut replication_stream(1, 0, 0),
        None,
    )
    .unwrap();
    assert!((rec.distance - 1.8).abs() < 1e-12);
    assert_eq!(rec.hops, Some(2));
}
