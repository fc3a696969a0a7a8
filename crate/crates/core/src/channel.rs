//! Reconstruction models: binary test channels and jointly Gaussian
//! reconstruction parameters.

use serde::{Deserialize, Serialize};

use crate::entropy::check_probability;
use crate::error::{domain, Error, Result};

/// Conditional law of a binary `X̂` given binary `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinaryChannelParams", into = "BinaryChannelParams")]
pub struct BinaryChannel {
    p_a: f64,
    p_b: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BinaryChannelParams {
    pub p_a: f64,
    pub p_b: f64,
}

impl TryFrom<BinaryChannelParams> for BinaryChannel {
    type Error = Error;
    fn try_from(p: BinaryChannelParams) -> Result<Self> {
        Self::new(p.p_a, p.p_b)
    }
}

impl From<BinaryChannel> for BinaryChannelParams {
    fn from(c: BinaryChannel) -> Self {
        Self { p_a: c.p_a, p_b: c.p_b }
    }
}

impl BinaryChannel {
    /// `p_a = P(X̂=0 | X=0)`, `p_b = P(X̂=0 | X=1)`.
    pub fn new(p_a: f64, p_b: f64) -> Result<Self> {
        check_probability("channel p_a", p_a)?;
        check_probability("channel p_b", p_b)?;
        Ok(Self { p_a, p_b })
    }

    pub fn identity() -> Self {
        Self { p_a: 1.0, p_b: 0.0 }
    }

    /// `X̂ = 0` regardless of `X`.
    pub fn constant() -> Self {
        Self { p_a: 1.0, p_b: 1.0 }
    }

    /// The channel under which `X = X̂ ⊕ Z` with `Z ~ Bern(eps)` independent
    /// of `X̂`, for a source with `P(X=1) = b`.
    ///
    /// Both conditionals `P(X=1 | X̂)` are then `eps` and `1 − eps`, the
    /// equality case of Mrs. Gerber's lemma.
    pub fn complementary(b: f64, eps: f64) -> Result<Self> {
        check_probability("marginal b", b)?;
        check_probability("test-channel crossover", eps)?;
        if (1.0 - 2.0 * eps).abs() < 1e-12 {
            // X independent of X̂: only possible for b = 1/2, served by the constant channel.
            return if (b - 0.5).abs() < 1e-12 {
                Ok(Self::constant())
            } else {
                Err(Error::WitnessUnavailable(format!("crossover 1/2 cannot produce marginal {b}")))
            };
        }
        let w = (1.0 - eps - b) / (1.0 - 2.0 * eps);
        if !(-1e-12..=1.0 + 1e-12).contains(&w) {
            return Err(Error::WitnessUnavailable(format!(
                "implied P(X̂=0) = {w} outside [0, 1] for b = {b}, crossover {eps}"
            )));
        }
        let w = w.clamp(0.0, 1.0);
        let p_a = if b < 1.0 { w * (1.0 - eps) / (1.0 - b) } else { w };
        let p_b = if b > 0.0 { w * eps / b } else { w };
        Self::new(p_a.clamp(0.0, 1.0), p_b.clamp(0.0, 1.0))
    }

    pub fn p_a(&self) -> f64 {
        self.p_a
    }

    pub fn p_b(&self) -> f64 {
        self.p_b
    }
}

/// Jointly Gaussian reconstruction: `X̂ ~ N(μ_x̂, σ_x̂²)`, `Cov(X, X̂) = θ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianReconstructionParams", into = "GaussianReconstructionParams")]
pub struct GaussianReconstruction {
    mu_xh: f64,
    var_xh: f64,
    cov_xxh: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaussianReconstructionParams {
    pub mu_xh: f64,
    pub var_xh: f64,
    pub cov_xxh: f64,
}

impl TryFrom<GaussianReconstructionParams> for GaussianReconstruction {
    type Error = Error;
    fn try_from(p: GaussianReconstructionParams) -> Result<Self> {
        Self::new(p.mu_xh, p.var_xh, p.cov_xxh)
    }
}

impl From<GaussianReconstruction> for GaussianReconstructionParams {
    fn from(r: GaussianReconstruction) -> Self {
        Self { mu_xh: r.mu_xh, var_xh: r.var_xh, cov_xxh: r.cov_xxh }
    }
}

impl GaussianReconstruction {
    /// Compatibility with a particular source (`θ2² ≤ σx²·σ_x̂²`) is checked
    /// when the pair is evaluated, not here.
    pub fn new(mu_xh: f64, var_xh: f64, cov_xxh: f64) -> Result<Self> {
        if !mu_xh.is_finite() {
            return Err(domain("reconstruction mean", mu_xh));
        }
        if !(var_xh >= 0.0) || !var_xh.is_finite() {
            return Err(domain("reconstruction variance", var_xh));
        }
        if !cov_xxh.is_finite() {
            return Err(domain("reconstruction covariance", cov_xxh));
        }
        Ok(Self { mu_xh, var_xh, cov_xxh })
    }

    /// The constant reconstruction `X̂ = mean`.
    pub fn constant(mean: f64) -> Self {
        Self { mu_xh: mean, var_xh: 0.0, cov_xxh: 0.0 }
    }

    pub fn mu_xh(&self) -> f64 {
        self.mu_xh
    }
    pub fn var_xh(&self) -> f64 {
        self.var_xh
    }
    pub fn cov_xxh(&self) -> f64 {
        self.cov_xxh
    }
}

/// Achievability witness or oracle argmin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Binary(BinaryChannel),
    Gaussian(GaussianReconstruction),
}
