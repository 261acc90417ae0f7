use serde::{Deserialize, Serialize};

use super::minors::max_binomial;
use super::LinearFormsError;

/// Constants of the staged strategy. Only their existence is known, so the
/// values are supplied by the caller; derived quantities are computed here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub m: usize,
    pub n: usize,
    /// Bound on `|A|` over the support.
    pub sigma: f64,
    pub psi: f64,
    pub epsilon0: f64,
    #[serde(default)]
    pub alpha1: Option<f64>,
    #[serde(default)]
    pub alpha2: Option<f64>,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub c3_min: Option<f64>,
    #[serde(default)]
    pub c4: Option<f64>,
    /// `μ_ν`, filled in as stages complete.
    #[serde(default)]
    pub mu: Vec<f64>,
    /// `c_{ν-1}`.
    #[serde(default)]
    pub c: Vec<f64>,
    /// `K_{ν-1} = ρ(U(j_ν))/ρ_0`.
    #[serde(default)]
    pub k: Vec<f64>,
}

impl TheoremConstants {
    pub fn new(m: usize, n: usize, psi: f64, epsilon0: f64) -> Result<Self, LinearFormsError> {
        if m == 0 || n == 0 {
            return Err(LinearFormsError::Empty);
        }
        if !(psi > 0.0) || !(epsilon0 > 0.0 && epsilon0 < 1.0) {
            return Err(LinearFormsError::Schedule("ψ must be positive and ε₀ in (0, 1)".into()));
        }
        Ok(TheoremConstants {
            m,
            n,
            sigma: 0.0,
            psi,
            epsilon0,
            alpha1: None,
            alpha2: None,
            c1: None,
            c2: None,
            c3_min: None,
            c4: None,
            mu: Vec::new(),
            c: Vec::new(),
            k: Vec::new(),
        })
    }

    /// `σ = 3·max |X|` over the given support points.
    pub fn with_sigma_from(mut self, points: &[Vec<f64>]) -> Self {
        let max = points
            .iter()
            .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        self.sigma = 3.0 * max;
        self
    }

    /// `ψ_ν = (ε₀/2)^ν ψ`.
    pub fn psi_nu(&self, nu: usize) -> f64 {
        (self.epsilon0 / 2.0).powi(nu as i32) * self.psi
    }

    /// `L√L (2/ε₀)^L`, the value of `ψ` used when chaining the stages.
    pub fn chained_psi(&self) -> f64 {
        let l = (self.m + self.n) as f64;
        l * l.sqrt() * (2.0 / self.epsilon0).powf(l)
    }

    /// `min{1/2, ¼ψ_Nε₀/(N·max C(N,·)), C₃ᵐⁱⁿ, (15/32)C₄/ψ}`, the bound on `√α₁`.
    pub fn sqrt_alpha1_ceiling(&self) -> Option<f64> {
        let (c3, c4) = (self.c3_min?, self.c4?);
        let n = self.n as f64;
        let combinatorial = 0.25 * self.psi_nu(self.n) * self.epsilon0 / (n * max_binomial(self.n) as f64);
        Some(0.5f64.min(combinatorial).min(c3).min(15.0 / 32.0 * c4 / self.psi))
    }

    /// Checks `√α₁` against [`sqrt_alpha1_ceiling`](Self::sqrt_alpha1_ceiling).
    pub fn validate_alpha1(&self) -> Result<(), LinearFormsError> {
        let a = self
            .alpha1
            .ok_or_else(|| LinearFormsError::Schedule("α₁ missing".into()))?;
        let ceiling = self
            .sqrt_alpha1_ceiling()
            .ok_or_else(|| LinearFormsError::Schedule("C₃ᵐⁱⁿ and C₄ are required".into()))?;
        if !(a > 0.0 && a < 1.0) || a.sqrt() >= ceiling {
            return Err(LinearFormsError::Schedule(format!(
                "√α₁ = {:.6e} must lie below {ceiling:.6e}",
                a.sqrt()
            )));
        }
        Ok(())
    }
}
