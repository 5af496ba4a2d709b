use crate::spectral::Grid;

/// Catmull-Rom weights for the four nodes around a point at fraction `s ∈ [0,1)`.
fn weights(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [0.5 * (-s3 + 2.0 * s2 - s), 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0), 0.5 * (-3.0 * s3 + 4.0 * s2 + s), 0.5 * (s3 - s2)]
}

fn stencil(grid: &Grid, x: f64) -> ([usize; 4], [f64; 4]) {
    let n = grid.n() as i64;
    let u = grid.wrap(x) / grid.spacing();
    let base = u.floor();
    let i0 = base as i64;
    let idx = [-1, 0, 1, 2].map(|o| (i0 + o).rem_euclid(n) as usize);
    (idx, weights(u - base))
}

/// Periodic cubic (Catmull-Rom) interpolation of nodal `values` at `x`.
pub fn interpolate(grid: &Grid, values: &[f64], x: [f64; 2]) -> f64 {
    let (ia, wa) = stencil(grid, x[0]);
    if grid.dim() == 1 {
        return (0..4).map(|a| wa[a] * values[ia[a]]).sum();
    }
    let (ib, wb) = stencil(grid, x[1]);
    let mut acc = 0.0;
    for a in 0..4 {
        let row = ia[a] * grid.n();
        let inner: f64 = (0..4).map(|b| wb[b] * values[row + ib[b]]).sum();
        acc += wa[a] * inner;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reproduces_nodes_and_cubics() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let vals: Vec<f64> = (0..64).map(|i| (grid.coords(i)[0]).sin()).collect();
        for i in 0..64 {
            assert!((interpolate(&grid, &vals, grid.coords(i)) - vals[i]).abs() < 1e-15);
        }
        let mut worst = 0.0_f64;
        for k in 0..1000 {
            let x = k as f64 * 0.00731 * 2.0 * PI;
            worst = worst.max((interpolate(&grid, &vals, [x, 0.0]) - x.sin()).abs());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn two_dimensional_tensor_product() {
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let vals: Vec<f64> = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                c[0].cos() * (2.0 * c[1]).sin()
            })
            .collect();
        let x: [f64; 2] = [1.234, 5.678];
        let exact = x[0].cos() * (2.0 * x[1]).sin();
        assert!((interpolate(&grid, &vals, x) - exact).abs() < 5e-3);
    }
}
