use std::f64::consts::PI;

use proptest::prelude::*;
use sfp_core::drift::gaussian_series;
use sfp_core::spectral::{
    divergence, duhamel_step, gradient, heat_semigroup, laplacian, pointwise_product, semigroup_div_commute_check,
};
use sfp_core::{Grid, SpectralField};

fn wrapped_kernel(dx: f64, l: f64, t: f64) -> f64 {
    (-30..=30)
        .map(|k| {
            let y = dx + k as f64 * l;
            (-y * y / (2.0 * t)).exp()
        })
        .sum::<f64>()
        / (2.0 * PI * t).sqrt()
}

#[test]
fn heat_flow_matches_real_space_convolution() {
    let l = 2.0 * PI;
    let grid = Grid::new(1, 256, l).unwrap();
    let bump = |x: f64| wrapped_kernel(x - 2.0, l, 0.05);
    let v0 = SpectralField::from_fn(grid, 1, |x, _| bump(x[0]));
    let t = 0.1;
    let out = heat_semigroup(&v0, t).unwrap();
    // quadrature on a fine periodic grid: the trapezoid rule is spectrally accurate here
    let fine = 4096;
    let h = l / fine as f64;
    let src: Vec<f64> = (0..fine).map(|j| bump(j as f64 * h)).collect();
    let mut worst = 0.0_f64;
    for i in 0..grid.len() {
        let x = grid.coords(i)[0];
        let conv: f64 =
            src.iter().enumerate().map(|(j, s)| s * wrapped_kernel(x - j as f64 * h, l, t)).sum::<f64>() * h;
        worst = worst.max((out.values(0)[i] - conv).abs());
    }
    assert!(worst / out.sup_norm() <= 1e-8, "{worst}");
}

#[test]
fn laplacian_matches_second_differences() {
    let f = |x: f64| (x.sin()).exp() + 0.3 * (2.0 * x).cos();
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let grid = Grid::new(1, n, 2.0 * PI).unwrap();
        let field = SpectralField::from_fn(grid, 1, |x, _| f(x[0]));
        let lap = divergence(&gradient(&field).unwrap()).unwrap();
        assert!(lap.sup_distance(&laplacian(&field)).unwrap() < 1e-9);
        let h = grid.spacing();
        let v = field.values(0);
        let err = (0..n)
            .map(|i| {
                let fd = (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) / (h * h);
                (fd - lap.values(0)[i]).abs()
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    // halving h divides the central-difference error by four
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "{errs:?}");
    }
}

#[test]
fn divergence_has_zero_mean() {
    let grid = Grid::new(2, 32, 1.0).unwrap();
    for seed in 0..5 {
        let g = gaussian_series(grid, 0.3, seed, 2, 1.0);
        assert!(divergence(&g).unwrap().mean(0).abs() < 1e-14);
    }
}

#[test]
fn product_matches_fine_grid_reference() {
    let coarse = Grid::new(1, 64, 2.0 * PI).unwrap();
    let fine = Grid::new(1, 1024, 2.0 * PI).unwrap();
    let f = |x: f64| 1.0 / (2.0 + x.sin());
    let g = |x: f64| (0.5 * x.cos()).exp();
    let p = pointwise_product(
        &SpectralField::from_fn(coarse, 1, |x, _| f(x[0])),
        &SpectralField::from_fn(coarse, 1, |x, _| g(x[0])),
    )
    .unwrap();
    let pf = pointwise_product(
        &SpectralField::from_fn(fine, 1, |x, _| f(x[0])),
        &SpectralField::from_fn(fine, 1, |x, _| g(x[0])),
    )
    .unwrap();
    let err = (0..coarse.len()).map(|i| (p.values(0)[i] - pf.values(0)[16 * i]).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn duhamel_step_single_mode_closed_form() {
    let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
    let m = 3.0;
    let g = SpectralField::from_fn(grid, 1, |x, _| (m * x[0]).cos());
    let zero = SpectralField::zeros(grid, 1);
    let dt = 0.07;
    let out = duhamel_step(&zero, &[(0.0, g.clone()), (dt, g.clone())], 0.0, dt).unwrap();
    let lambda = 0.5 * m * m;
    let factor = (1.0 - (-lambda * dt).exp()) / lambda;
    assert!(out.sup_distance(&g.scale(factor)).unwrap() <= 1e-10);
    // a constant source adds c·Δt to the mean
    let c = SpectralField::constant(grid, &[2.5]);
    let out = duhamel_step(&zero, &[(0.0, c)], 0.0, dt).unwrap();
    assert!((out.mean(0) - 2.5 * dt).abs() < 1e-15);
}

#[test]
fn semigroup_and_divergence_commute() {
    let grid = Grid::new(2, 32, 1.0).unwrap();
    for seed in 0..4 {
        let f = gaussian_series(grid, 0.2, seed, 2, 1.0);
        let r = semigroup_div_commute_check(&f, 0.05).unwrap();
        assert!(r <= 1e-12 * f.sup_norm().max(1.0), "{r}");
    }
}

#[test]
fn strong_continuity_is_linear_for_smooth_data() {
    let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
    let f = SpectralField::from_fn(grid, 1, |x, _| (x[0].cos()).exp());
    let ts = [1e-4, 1e-3, 1e-2];
    let errs: Vec<f64> = ts.iter().map(|&t| heat_semigroup(&f, t).unwrap().sup_distance(&f).unwrap()).collect();
    let slope = sfp_core::fit::log_log_slope(&ts, &errs);
    assert!((slope - 1.0).abs() < 0.05, "{slope}");
}

fn field_strategy() -> impl Strategy<Value = SpectralField> {
    (any::<u64>(), 0.2f64..2.0).prop_map(|(seed, s)| {
        let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
        gaussian_series(grid, s, seed, 1, 1.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_property(f in field_strategy(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let a = heat_semigroup(&heat_semigroup(&f, s).unwrap(), t).unwrap();
        let b = heat_semigroup(&f, s + t).unwrap();
        prop_assert!(a.sup_distance(&b).unwrap() <= 1e-12 * b.sup_norm().max(1e-300) + 1e-300);
    }

    #[test]
    fn heat_flow_conserves_mass(f in field_strategy(), shift in -3.0f64..3.0, t in 0.0f64..2.0) {
        let g = f.map_values(|v| v + shift);
        let out = heat_semigroup(&g, t).unwrap();
        prop_assert!((out.mean(0) - g.mean(0)).abs() <= 1e-15 * (1.0 + g.mean(0).abs()) * 4.0);
    }

    #[test]
    fn heat_flow_preserves_sampled_positivity(
        centre in 0.0f64..(2.0 * PI),
        var in 0.05f64..1.0,
        t in 0.0f64..0.5,
    ) {
        let grid = Grid::new(1, 256, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(grid, 1, |x, _| wrapped_kernel(x[0] - centre, 2.0 * PI, var));
        let out = heat_semigroup(&f, t).unwrap();
        prop_assert!(out.min_value() >= -1e-9 * f.sup_norm());
    }
}
