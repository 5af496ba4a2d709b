use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};

/// Largest `|z|` accepted by [`mittag_leffler`].
pub const MAX_ARGUMENT: f64 = 30.0;

/// One-parameter Mittag-Leffler function `E_η(z) = Σ_k z^k / Γ(kη + 1)`.
///
/// Plain series summation (Neumaier-compensated), stopped once a term drops
/// below `1e-16` of the partial sum after the terms have started to decrease.
/// Arguments where the series cancels too heavily to guarantee an absolute
/// error of `1e-12`, or whose value overflows, are rejected with a range error.
pub fn mittag_leffler(eta: f64, z: f64) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return domain(format!("Mittag-Leffler index must be positive, got {eta}"));
    }
    if !z.is_finite() || z.abs() > MAX_ARGUMENT {
        return Err(Error::Range(format!("Mittag-Leffler argument {z} outside |z| <= {MAX_ARGUMENT}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let log_abs = z.abs().ln();
    let negative = z < 0.0;
    let (mut sum, mut comp, mut abs_sum) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut prev = f64::INFINITY;
    for k in 0..100_000u32 {
        let kf = k as f64;
        let magnitude = (kf * log_abs - ln_gamma(kf * eta + 1.0)).exp();
        if !magnitude.is_finite() {
            return Err(Error::Range(format!("E_{eta}({z}) overflows double precision")));
        }
        let term = if negative && k % 2 == 1 { -magnitude } else { magnitude };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        abs_sum += magnitude;
        if magnitude < prev && magnitude <= 1e-16 * (sum + comp).abs() {
            break;
        }
        prev = magnitude;
    }
    let value = sum + comp;
    if !value.is_finite() {
        return Err(Error::Range(format!("E_{eta}({z}) overflows double precision")));
    }
    // cancellation leaves ~ulp(Σ|terms|) of absolute error
    if abs_sum * 4.0 * f64::EPSILON > 1e-12 * value.abs().max(1.0) {
        return Err(Error::Range(format!("E_{eta}({z}) loses too much precision to cancellation")));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::erf::erf;

    #[test]
    fn zero_argument() {
        for eta in [0.1, 0.5, 1.0, 3.0] {
            assert_eq!(mittag_leffler(eta, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn eta_one_is_exp() {
        for i in 0..=100 {
            let z = -5.0 + 0.1 * i as f64;
            let e = mittag_leffler(1.0, z).unwrap();
            assert!((e - z.exp()).abs() <= 1e-12 * z.exp().max(1.0), "z={z}");
        }
    }

    #[test]
    fn eta_half_erf_identity() {
        // E_{1/2}(z) = exp(z²)(1 + erf z)
        let z: f64 = 1.0;
        let oracle = (z * z).exp() * (1.0 + erf(z));
        assert!((mittag_leffler(0.5, z).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn eta_two_is_cosh_of_root() {
        let z: f64 = 4.0;
        assert!((mittag_leffler(2.0, z).unwrap() - z.sqrt().cosh()).abs() < 1e-13);
    }

    #[test]
    fn errors() {
        assert!(matches!(mittag_leffler(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(mittag_leffler(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(mittag_leffler(0.5, 31.0), Err(Error::Range(_))));
        assert!(matches!(mittag_leffler(0.2, 30.0), Err(Error::Range(_))));
    }
}
