//! Monte Carlo checks at 3σ. Seeds are fixed so results replay exactly.

use rmf_core::analytic::regular_tree_first_moment_bound;
use rmf_core::bricklayer::{
    edge_open, empirical_goodness, goodness_probability, simulate_bricklayer, BrickConfig, BrickEdge, EdgeKind,
};
use rmf_core::lattice_sim::{
    crossing_probability, crossing_probability_with, explore, LatticeConfig, PathMode, SiteTransform,
};
use rmf_core::tree_sim::{step_frontier, survival_probability, Frontier, Offspring};
use rmf_core::{Estimate, LabelField, Metric};

/// `|a - b| ≤ 3·sqrt(σa² + σb²)`.
fn agree(a: &Estimate, b: &Estimate) -> bool {
    (a.value - b.value).abs() <= 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

/// Kolmogorov–Smirnov distance of `xs` from the uniform law on `(lo, 1)`.
fn ks_uniform(xs: &mut [f64], lo: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = (x - lo) / (1.0 - lo);
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn kept_children_are_uniform_above_threshold() {
    let sampler = Offspring::Deterministic { k: 10 }.sampler().unwrap();
    for &(u, theta) in &[(0.8, 0.3), (0.2, 0.5), (0.95, 0.1)] {
        let lo = f64::max(u - theta, 0.0);
        let mut kept = Vec::new();
        let master = LabelField::new(31);
        let mut r = 0;
        while kept.len() < 100_000 {
            let f = step_frontier(&Frontier::with_root_uniform(u), theta, &sampler, &master.replica(r), usize::MAX);
            kept.extend(f.uniforms());
            r += 1;
        }
        assert!(kept.iter().all(|&x| x > lo && x < 1.0));
        let d = ks_uniform(&mut kept, lo);
        // 1% critical value of the KS statistic.
        assert!(d * (kept.len() as f64).sqrt() < 1.628, "u={u} θ={theta}: D = {d}");
        // Fraction kept is 1 - lo.
        let frac = kept.len() as f64 / (10 * r) as f64;
        assert!((frac - (1.0 - lo)).abs() < 0.01, "kept fraction {frac}");
    }
}

#[test]
fn survival_monotone_in_theta_and_horizon() {
    let field = LabelField::new(8);
    let off = Offspring::Deterministic { k: 2 };
    let runs: Vec<_> = [0.1, 0.2, 0.3, 0.4, 0.6]
        .iter()
        .map(|&t| survival_probability(t, &off, 30, 1000, 10_000, &field).unwrap())
        .collect();
    for w in runs.windows(2) {
        let (a, b) = (w[0].estimate(), w[1].estimate());
        assert!(b.value >= a.value - 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
        // Same fields: nestedness makes this exact.
        assert!(w[1].alive[30] >= w[0].alive[30]);
    }
    for r in &runs {
        assert!(r.alive.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn subcritical_survival_under_first_moment_bound() {
    let field = LabelField::new(9);
    for &(m, k) in &[(2.0, 2u32), (3.0, 3)] {
        let theta = 1.0 / (std::f64::consts::E * m);
        for &h in &[5usize, 10, 20] {
            let run = survival_probability(theta, &Offspring::Deterministic { k }, h, 20_000, 100_000, &field).unwrap();
            let e = run.estimate();
            let bound = regular_tree_first_moment_bound(m, h as u64, theta).unwrap().min(1.0);
            assert!(e.value <= bound + 3.0 * e.stderr, "m={m} h={h}: {} > {bound}", e.value);
        }
    }
}

#[test]
fn poisson_offspring_survive_less_than_fixed() {
    // Same mean, more variance: extinction is likelier for Poisson.
    let field = LabelField::new(10);
    let det = survival_probability(0.3, &Offspring::Deterministic { k: 3 }, 20, 4000, 100_000, &field).unwrap();
    let poi = survival_probability(0.3, &Offspring::Poisson { mean: 3.0 }, 20, 4000, 100_000, &field).unwrap();
    assert!(poi.estimate().value < det.estimate().value);
}

#[test]
fn tree_replay_is_exact() {
    let field = LabelField::new(77);
    let off = Offspring::Binomial { n: 4, p: 0.6 };
    let a = survival_probability(0.25, &off, 15, 500, 10_000, &field).unwrap();
    let b = survival_probability(0.25, &off, 15, 500, 10_000, &LabelField::new(77)).unwrap();
    assert_eq!(a, b);
}

fn flips() -> Vec<SiteTransform> {
    vec![
        SiteTransform { perm: vec![1, 0], signs: vec![1, 1] },
        SiteTransform { perm: vec![0, 1], signs: vec![-1, 1] },
        SiteTransform { perm: vec![1, 0], signs: vec![-1, -1] },
    ]
}

#[test]
fn crossing_law_is_symmetric() {
    for (mode, q, theta) in [
        (PathMode::NonBacktracking, Metric::l1(), 0.32),
        (PathMode::AllPaths, Metric::l2(), 0.42),
    ] {
        let c = LatticeConfig::new(2, q, mode, 30, theta, 5).unwrap();
        let base = crossing_probability(&c, 400).unwrap().estimate;
        for t in flips() {
            // Reflected field, same seeds: the event maps onto itself.
            let same = crossing_probability_with(&c, 400, Some(&t)).unwrap().estimate;
            let other = crossing_probability_with(&LatticeConfig { seed: 6, ..c }, 400, Some(&t)).unwrap().estimate;
            assert!(agree(&base, &same) && agree(&base, &other), "{:?} {:?} {:?}", base, same, other);
        }
    }
}

#[test]
fn reflection_maps_accessible_sets() {
    // Exploring with a reflected field gives the reflected set.
    let c = LatticeConfig::new(2, Metric::l2(), PathMode::NonBacktracking, 20, 0.45, 3).unwrap();
    let f = LabelField::new(3);
    let plain = explore(&c, &f, None, false).unwrap();
    for t in flips() {
        let refl = explore(&c, &f, Some(&t), false).unwrap();
        assert_eq!(plain.len(), refl.len());
        for v in refl.sites() {
            let mut w = [0i64; 2];
            for i in 0..2 {
                w[i] = t.signs[i] * v[t.perm[i]];
            }
            assert!(plain.contains(&w));
        }
    }
}

#[test]
fn vertical_edges_open_half_the_time() {
    let c = BrickConfig::new(16, Metric::infinity()).unwrap();
    let master = LabelField::new(12);
    let n = 100_000u64;
    let e = BrickEdge { from: (5, 0), to: (5, 1), kind: EdgeKind::LVer };
    let hits = (0..n).filter(|&k| edge_open(&e, &master.replica(k), &c)).count() as u64;
    assert!(Estimate::proportion(hits, n).within(0.5, 3.0));
}

#[test]
fn horizontal_openness_for_large_brick() {
    let c = BrickConfig::new(4096, Metric::l2()).unwrap();
    let p = 1.0 - 6.0 * 25.0 / 4096f64.powi(2);
    assert!((p - 0.99999106).abs() < 1e-8);
    let master = LabelField::new(13);
    let n = 1_000_000u64;
    let e = BrickEdge { from: (7, 2), to: (8, 2), kind: EdgeKind::Hor };
    let hits = (0..n).filter(|&k| edge_open(&e, &master.replica(k), &c)).count() as u64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((hits as f64 / n as f64 - p).abs() <= 3.0 * sigma);
}

#[test]
fn goodness_matches_closed_form() {
    for (n, q, reps) in [(64u64, Metric::infinity(), 10_000u64), (4096, Metric::l2(), 100), (32, Metric::infinity(), 10_000)] {
        let c = BrickConfig::new(n, q).unwrap();
        let p = goodness_probability(&c).unwrap();
        let e = empirical_goodness(&c, reps, 14);
        let sigma = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((e.value - p).abs() <= 3.0 * sigma, "n={n}: {} vs {p}", e.value);
    }
    let big = goodness_probability(&BrickConfig::new(1 << 16, Metric::l2()).unwrap()).unwrap();
    assert!(big > 0.995);
}

#[test]
fn bricklayer_frequency_grows_with_n() {
    let freq: Vec<Estimate> = [16u64, 32, 64]
        .iter()
        .map(|&n| {
            let c = BrickConfig::new(n, Metric::infinity()).unwrap();
            let s = simulate_bricklayer(&c, 30, 200, 15).unwrap();
            assert!(s.all_paths_verified());
            s.frequency
        })
        .collect();
    for w in freq.windows(2) {
        assert!(w[1].value >= w[0].value - 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt());
    }
}
