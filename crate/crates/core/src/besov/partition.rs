use serde::Serialize;

use crate::spectral::Grid;

/// Smooth dyadic partition of unity built from a radial bump `χ` with `χ = 1`
/// on `|ξ| ≤ 1.1Λ` and `χ = 0` outside `1.4Λ`:
/// `φ_{-1}(ξ) = χ(2ξ)`, `φ_j(ξ) = χ(2^{-j}ξ) − χ(2^{-j+1}ξ)` for `j ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub scale: f64,
    pub inner: f64,
    pub outer: f64,
    /// Test hook: multiplies `φ_0` by `1 + corruption`, breaking the partition of unity.
    pub corruption: f64,
}

impl Default for Partition {
    fn default() -> Self {
        Self::standard()
    }
}

fn smooth_edge(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

impl Partition {
    pub fn standard() -> Self {
        Self { scale: 1.0, inner: 1.1, outer: 1.4, corruption: 0.0 }
    }

    pub fn corrupted(corruption: f64) -> Self {
        Self { corruption, ..Self::standard() }
    }

    /// The radial bump `χ(r)`.
    pub fn chi(&self, r: f64) -> f64 {
        let a = self.inner * self.scale;
        let b = self.outer * self.scale;
        if r <= a {
            1.0
        } else if r >= b {
            0.0
        } else {
            let s = (r - a) / (b - a);
            let up = smooth_edge(1.0 - s);
            up / (up + smooth_edge(s))
        }
    }

    /// `φ_j(r)` at radial frequency `r = |ξ|`.
    pub fn multiplier(&self, j: i32, r: f64) -> f64 {
        if j < 0 {
            return self.chi(2.0 * r);
        }
        let w = self.chi((-j as f64).exp2() * r) - self.chi(((1 - j) as f64).exp2() * r);
        if j == 0 {
            w * (1.0 + self.corruption)
        } else {
            w
        }
    }

    /// Annulus bounds `(c₁, c₂)·2^j` of block `j ≥ 0`.
    pub fn annulus(&self) -> (f64, f64) {
        (0.5 * self.inner * self.scale, self.outer * self.scale)
    }

    /// Smallest `J` with `χ(2^{-J}ξ) = 1` on every grid frequency, so blocks `-1..=J` sum to one.
    pub fn top_block(&self, grid: &Grid) -> i32 {
        let r_max = (grid.dim() as f64).sqrt() * grid.nyquist();
        let mut j = 0;
        while self.inner * self.scale * (j as f64).exp2() < r_max {
            j += 1;
        }
        j
    }

    pub fn block_range(&self, grid: &Grid) -> std::ops::RangeInclusive<i32> {
        -1..=self.top_block(grid)
    }

    /// `⌊log₂(Nπ/(L c₂))⌋`: last block whose outer edge stays below Nyquist.
    pub fn usable_max(&self, grid: &Grid) -> i32 {
        (grid.nyquist() / self.annulus().1).log2().floor() as i32
    }
}
