use std::f64::consts::PI;

use proptest::prelude::*;
use sfp_core::drift::gaussian_series;
use sfp_core::particles::gaussian_density;
use sfp_core::solver::{
    apriori_bound, mild_map_i, solve_picard, stability_in_b, weighted_distance, Nonlinearity, SolverParams, Trajectory,
    WorkingConstant,
};
use sfp_core::spectral::{gradient, heat_semigroup};
use sfp_core::{besov, mollify, Drift, Grid, SpectralField, TimeGrid, TimeMode};

fn v0(grid: Grid) -> SpectralField {
    gaussian_density(grid, [PI, 0.0], 0.25).unwrap()
}

/// Explicit first-order upwind scheme for `∂_t v = ½∂²v − c∂v` with `c > 0`.
fn upwind(n: usize, c: f64, horizon: f64) -> Vec<f64> {
    let grid = Grid::new(1, n, 2.0 * PI).unwrap();
    let h = grid.spacing();
    let steps = (horizon / (0.4 * h * h)).ceil() as usize;
    let dt = horizon / steps as f64;
    let mut v = v0(grid).values(0).to_vec();
    let mut next = v.clone();
    for _ in 0..steps {
        for i in 0..n {
            let (l, r) = (v[(i + n - 1) % n], v[(i + 1) % n]);
            next[i] = v[i] + dt * (0.5 * (r - 2.0 * v[i] + l) / (h * h) - c * (v[i] - l) / h);
        }
        std::mem::swap(&mut v, &mut next);
    }
    v
}

#[test]
fn translation_solution_agrees_with_upwind_scheme() {
    let c = 0.5;
    let mut errs = Vec::new();
    for n in [256, 512] {
        let grid = Grid::new(1, n, 2.0 * PI).unwrap();
        let p = SolverParams::new(0.35, 0.25, TimeGrid::new(0.25, 100).unwrap()).unwrap();
        let r =
            solve_picard(&v0(grid), &Drift::constant(grid, &[c]).unwrap(), Nonlinearity::Constant { kappa: 1.0 }, &p)
                .unwrap();
        let fd = upwind(n, c, 0.25);
        errs.push(r.v.last().values(0).iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    // the upwind scheme is first order, its error halves with the spacing
    assert!(errs[1] < 2e-3, "{errs:?}");
    let order = (errs[0] / errs[1]).log2();
    assert!((order - 1.0).abs() < 0.25, "{errs:?}");
}

#[test]
fn mild_map_reproduces_the_translation_solution() {
    let grid = Grid::new(1, 512, 2.0 * PI).unwrap();
    let tg = TimeGrid::new(0.25, 200).unwrap();
    let c = 0.5;
    let exact: Vec<SpectralField> =
        tg.nodes().iter().map(|&t| gaussian_density(grid, [PI + c * t, 0.0], 0.25 + t).unwrap()).collect();
    let v = Trajectory::new(tg, exact).unwrap();
    let image = mild_map_i(&v, &v0(grid), &Drift::constant(grid, &[c]).unwrap(), Nonlinearity::Constant { kappa: 1.0 })
        .unwrap();
    let err = image.sup_distance(&v).unwrap();
    assert!(err <= 1e-6, "{err}");
}

fn rough_case(seed: u64) -> (SpectralField, sfp_core::MollifiedDrift, SolverParams) {
    let grid = Grid::new(1, 256, 2.0 * PI).unwrap();
    let b = mollify(&Drift::synthesize(grid, -0.2, seed, TimeMode::Static).unwrap(), 64).unwrap();
    let p = SolverParams::new(0.35, 0.25, TimeGrid::new(0.25, 100).unwrap()).unwrap();
    (v0(grid), b, p)
}

#[test]
fn fixed_point_solves_the_mild_equation() {
    for seed in 1..=3 {
        let (v0, b, p) = rough_case(seed);
        let r = solve_picard(&v0, &b, Nonlinearity::Arctan, &p).unwrap();
        let image = mild_map_i(&r.v, &v0, &b, Nonlinearity::Arctan).unwrap();
        let d = weighted_distance(&image, &r.v, 0.0, p.alpha).unwrap();
        assert!(d <= p.picard_tol, "seed {seed}: {d}");
        assert!(r.fixed_point_residual <= 2.0 * p.picard_tol);
        assert!(r.min_value() >= -1e-6, "seed {seed}: {}", r.min_value());
        assert!(r.mass_drift() <= 1e-12);
        assert!(r.sup_norm <= r.apriori_k.unwrap());
    }
}

#[test]
fn constant_drift_stability_matches_linearisation() {
    // v_c(t) = P_t v0(· − ct), so ∂_c v = −t ∂_x P_t v0 and
    // ‖v_{c₁} − v_{c₂}‖_α ≈ |c₁ − c₂| sup_t t‖∂_x P_t v0‖_α
    let grid = Grid::new(1, 256, 2.0 * PI).unwrap();
    let tg = TimeGrid::new(0.25, 100).unwrap();
    let p = SolverParams::new(0.35, 0.25, tg).unwrap();
    let ell = tg
        .nodes()
        .iter()
        .map(|&t| t * besov::norm(&gradient(&heat_semigroup(&v0(grid), t).unwrap()).unwrap(), 0.35).unwrap())
        .fold(0.0, f64::max);
    let dc = 0.01;
    let (rep, _, _) = stability_in_b(
        &v0(grid),
        &Drift::constant(grid, &[0.3]).unwrap(),
        &Drift::constant(grid, &[0.3 + dc]).unwrap(),
        Nonlinearity::Constant { kappa: 1.0 },
        &p,
    )
    .unwrap();
    assert!(rep.distance <= 1.05 * ell * dc, "{} vs ℓ|Δc| = {}", rep.distance, ell * dc);
    assert!(rep.distance >= 0.9 * ell * dc);
    assert!(rep.ratio.is_some());
}

#[test]
fn zero_gain_is_the_heat_flow() {
    let (v0, b, p) = rough_case(2);
    let r = solve_picard(&v0, &b, Nonlinearity::Constant { kappa: 0.0 }, &p).unwrap();
    assert_eq!(r.iterations(), 1);
    let exact = heat_semigroup(&v0, 0.25).unwrap();
    assert!(r.v.last().sup_distance(&exact).unwrap() < 1e-14);
}

fn trajectory(seed: u64, tg: TimeGrid) -> Trajectory {
    let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
    let nodes = (0..=tg.steps())
        .map(|k| {
            if k == 0 {
                SpectralField::zeros(grid, 1)
            } else {
                gaussian_series(grid, 0.8, seed * 100 + k as u64, 1, 1.0)
            }
        })
        .collect();
    Trajectory::new(tg, nodes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weighted_distance_decreases_in_rho(a in any::<u64>(), b in any::<u64>(), rho in 0.0f64..50.0, step in 0.0f64..50.0) {
        let tg = TimeGrid::new(0.5, 10).unwrap();
        let (w, z) = (trajectory(a % 1000, tg), trajectory(b % 1000 + 1000, tg));
        let lo = weighted_distance(&w, &z, rho + step, 0.4).unwrap();
        let hi = weighted_distance(&w, &z, rho, 0.4).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
        prop_assert_eq!(weighted_distance(&w, &w, rho, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn apriori_bound_grows_with_the_drift(v0n in 0.1f64..5.0, b1 in 0.0f64..1.0, extra in 0.0f64..1.0) {
        let c = WorkingConstant(1.3);
        let k1 = apriori_bound(v0n, b1, 0.35, 0.25, 0.25, c).unwrap();
        let k2 = apriori_bound(v0n, b1 + extra, 0.35, 0.25, 0.25, c).unwrap();
        prop_assert!(k2 >= k1);
        if b1 == 0.0 {
            prop_assert!((k1 - 1.3 * v0n).abs() <= 1e-12 * k1);
        }
    }
}
