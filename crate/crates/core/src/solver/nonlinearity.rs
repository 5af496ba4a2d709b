use serde::{Deserialize, Serialize};

/// Scalar gain `F`, applied as `F(z)·I_d`, with `F̃(z) = z F(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Nonlinearity {
    Constant {
        kappa: f64,
    },
    Arctan,
    /// `F(z) = 1/(1+z²)`
    Rational,
}

/// Numerically measured bounds of a nonlinearity on a dense `z`-grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonlinearityBounds {
    pub gain_sup: f64,
    pub gain_lipschitz: f64,
    pub tilde_lipschitz: f64,
}

impl Nonlinearity {
    pub fn gain(&self, z: f64) -> f64 {
        match *self {
            Nonlinearity::Constant { kappa } => kappa,
            Nonlinearity::Arctan => z.atan(),
            Nonlinearity::Rational => 1.0 / (1.0 + z * z),
        }
    }

    /// `F̃(z) = z F(z)`.
    pub fn tilde(&self, z: f64) -> f64 {
        z * self.gain(z)
    }

    pub fn label(&self) -> String {
        match self {
            Nonlinearity::Constant { kappa } => format!("constant({kappa})"),
            Nonlinearity::Arctan => "arctan".into(),
            Nonlinearity::Rational => "rational".into(),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        matches!(self, Nonlinearity::Constant { kappa } if *kappa == 0.0)
    }

    /// Sup of `|F|` and difference-quotient Lipschitz constants of `F`, `F̃`
    /// over `z ∈ [−200, 200]` with step `1e-3`.
    pub fn bounds(&self) -> NonlinearityBounds {
        let h = 1e-3;
        let steps = 400_000;
        let mut gain_sup = 0.0_f64;
        let mut gain_lipschitz = 0.0_f64;
        let mut tilde_lipschitz = 0.0_f64;
        let mut z0 = -200.0;
        let (mut f0, mut t0) = (self.gain(z0), self.tilde(z0));
        for i in 1..=steps {
            let z = -200.0 + i as f64 * h;
            let (f, t) = (self.gain(z), self.tilde(z));
            gain_sup = gain_sup.max(f.abs());
            gain_lipschitz = gain_lipschitz.max(((f - f0) / (z - z0)).abs());
            tilde_lipschitz = tilde_lipschitz.max(((t - t0) / (z - z0)).abs());
            (z0, f0, t0) = (z, f, t);
        }
        NonlinearityBounds { gain_sup, gain_lipschitz, tilde_lipschitz }
    }
}
