use std::f64::consts::PI;

use proptest::prelude::*;
use sfp_core::besov::{block_sups, decompose, norm};
use sfp_core::drift::gaussian_series;
use sfp_core::spectral::heat_semigroup;
use sfp_core::{holder_norm, Grid, Partition, SpectralField};

fn grid() -> Grid {
    Grid::new(1, 256, 2.0 * PI).unwrap()
}

/// Sup of `Δ_j(a cos(m x))` by an explicit O(N²) inverse DFT of the block multiplier.
fn direct_block_sup(n: usize, m: i64, amplitude: f64, j: i32) -> f64 {
    let p = Partition::standard();
    let mut sup = 0.0_f64;
    for i in 0..n {
        let x = 2.0 * PI * i as f64 / n as f64;
        // the two spectral lines ±m each carry a/2
        let mut v = 0.0;
        for k in [-m, m] {
            v += 0.5 * amplitude * p.multiplier(j, k.abs() as f64) * (k as f64 * x).cos();
        }
        sup = sup.max(v.abs());
    }
    sup
}

#[test]
fn interior_mode_has_one_block() {
    let g = grid();
    let f = SpectralField::from_fn(g, 1, |x, _| 3.0 * (12.0 * x[0]).cos());
    let sups = block_sups(&f);
    let significant: Vec<i32> = sups.iter().filter(|s| s.1 > 1e-12).map(|s| s.0).collect();
    assert_eq!(significant, vec![4]);
    for &(j, s) in &sups {
        assert!((s - direct_block_sup(256, 12, 3.0, j)).abs() < 1e-10);
    }
}

#[test]
fn single_mode_norm_matches_direct_sum() {
    let g = grid();
    for m in [5i64, 10, 23, 47] {
        let f = SpectralField::from_fn(g, 1, |x, _| 0.7 * (m as f64 * x[0]).cos());
        for gamma in [-0.5, 0.35, 1.2] {
            let expected = Partition::standard()
                .block_range(&g)
                .map(|j| (j as f64 * gamma).exp2() * direct_block_sup(256, m, 0.7, j))
                .fold(0.0, f64::max);
            let got = norm(&f, gamma).unwrap();
            assert!((got - expected).abs() <= 1e-8 * expected, "m={m} γ={gamma}: {got} vs {expected}");
        }
    }
}

#[test]
fn holder_norm_of_sine_matches_dense_sampling() {
    let g = grid();
    let f = SpectralField::from_fn(g, 1, |x, _| x[0].sin());
    let gamma = 0.5;
    // |sin(x+h) − sin x| peaks at 2 sin(h/2); scan h densely over (0, 1)
    let semi = (1..100_000).map(|k| k as f64 * 1e-5).map(|h| 2.0 * (h / 2.0).sin() / h.powf(gamma)).fold(0.0, f64::max);
    let oracle = 1.0 + semi;
    let got = holder_norm(&f, gamma).unwrap();
    assert!((got - oracle).abs() <= 0.01 * oracle, "{got} vs {oracle}");
}

#[test]
fn holder_and_besov_norms_are_equivalent() {
    let g = Grid::new(1, 128, 2.0 * PI).unwrap();
    let gamma = 0.4;
    let ratios: Vec<f64> = (0..100)
        .map(|seed| {
            let f = gaussian_series(g, 1.0 + (seed % 5) as f64 * 0.2, seed, 1, 1.0);
            holder_norm(&f, gamma).unwrap() / norm(&f, gamma).unwrap()
        })
        .collect();
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let c = hi.max(1.0 / lo);
    assert!(c < 10.0, "equivalence constant {c} (ratios in [{lo}, {hi}])");
}

#[test]
fn semigroup_is_holder_continuous_in_time() {
    // ‖P_t f − P_s f‖_γ ≤ c (t−s)^θ ‖f‖_{γ+2θ}
    let g = grid();
    let (gamma, theta) = (-0.2, 0.25);
    let f = gaussian_series(g, gamma + 2.0 * theta, 9, 1, 1.0);
    let rhs_norm = norm(&f, gamma + 2.0 * theta).unwrap();
    let mut per_gap = Vec::new();
    for gap in [1e-3, 3e-3, 1e-2, 3e-2, 1e-1] {
        let worst = [0.0, 0.01, 0.1]
            .iter()
            .map(|&s| {
                let a = heat_semigroup(&f, s + gap).unwrap();
                let b = heat_semigroup(&f, s).unwrap();
                norm(&a.sub(&b).unwrap(), gamma).unwrap() / (gap.powf(theta) * rhs_norm)
            })
            .fold(0.0, f64::max);
        per_gap.push(worst);
    }
    let hi = per_gap.iter().cloned().fold(0.0, f64::max);
    let lo = per_gap.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi < 5.0 && hi / lo < 4.0, "{per_gap:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reconstruction_is_exact(seed in any::<u64>(), s in -0.5f64..1.5, dim in 1usize..=2) {
        let g = Grid::new(dim, if dim == 1 { 256 } else { 32 }, 2.0 * PI).unwrap();
        let f = gaussian_series(g, s, seed, 1, 1.0);
        let back = decompose(&f).reconstruct();
        prop_assert!(back.sup_distance(&f).unwrap() <= 1e-10 * f.sup_norm().max(1.0));
    }

    #[test]
    fn norm_is_homogeneous(seed in any::<u64>(), lambda in -10.0f64..10.0, gamma in -1.0f64..1.0) {
        let f = gaussian_series(grid(), 0.3, seed, 1, 1.0);
        let a = norm(&f.scale(lambda), gamma).unwrap();
        let b = lambda.abs() * norm(&f, gamma).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn lower_exponent_norm_is_dominated(seed in any::<u64>(), g1 in -1.0f64..1.0, drop in 0.0f64..1.0) {
        let f = gaussian_series(grid(), 0.3, seed, 1, 1.0);
        let g0 = g1 - drop;
        // blocks start at j = −1, so the embedding constant is 2^{γ−γ′}
        let c = drop.exp2();
        prop_assert!(norm(&f, g0).unwrap() <= c * norm(&f, g1).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn distant_blocks_are_disjoint(j in -1i32..10, gap in 3i32..6, r in 0.0f64..5000.0) {
        let p = Partition::standard();
        prop_assert_eq!(p.multiplier(j, r) * p.multiplier(j + gap, r), 0.0);
    }
}
