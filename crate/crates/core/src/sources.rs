//! Source models: the binary-symmetric (X, S) pair, the jointly Gaussian
//! (X, S) pair, and two-component Gaussian mixtures.

use serde::{Deserialize, Serialize};

use crate::entropy::{gaussian_diff_entropy, h2, normal_pdf, EntropyValue};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::serde_ext::ext_f64;

/// Bernoulli source `X` with label `S = X ⊕ S1`, `S ~ Bern(a)`, `S1 ~ Bern(p1)`.
///
/// Only `0 ≤ p1 < 1/2` and `p1 ≤ a ≤ 1/2` are accepted. With `p1 = 1/2` the
/// label carries no information about `X` and the classification
/// constraint is vacuous, which is reported as [`Error::IndependentLabel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinarySourceParams", into = "BinarySourceParams")]
pub struct BinaryPairSource {
    a: f64,
    p1: f64,
    b_raw: f64,
    b: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BinarySourceParams {
    pub a: f64,
    pub p1: f64,
}

impl TryFrom<BinarySourceParams> for BinaryPairSource {
    type Error = Error;
    fn try_from(p: BinarySourceParams) -> Result<Self> {
        Self::new(p.a, p.p1)
    }
}

impl From<BinaryPairSource> for BinarySourceParams {
    fn from(s: BinaryPairSource) -> Self {
        Self { a: s.a, p1: s.p1 }
    }
}

impl BinaryPairSource {
    pub fn new(a: f64, p1: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p1) {
            return Err(domain("crossover p1", p1));
        }
        if p1 == 0.5 {
            return Err(Error::IndependentLabel);
        }
        if 1.0 - 2.0 * p1 < 1e-12 {
            return Err(Error::DegenerateSource(format!("1 - 2·p1 = {} is numerically zero", 1.0 - 2.0 * p1)));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(domain("label probability a", a));
        }
        if a > 0.5 {
            return Err(Error::UnsupportedSource(format!("a = {a} > 1/2; relabel S to use 1 - a")));
        }
        if a < p1 {
            return Err(Error::UnsupportedSource(format!("a = {a} below the crossover p1 = {p1}")));
        }
        let b_raw = (a - p1) / (1.0 - 2.0 * p1);
        let b = b_raw.min(1.0 - b_raw);
        Ok(Self { a, p1, b_raw, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// `P(X = 1)` folded into `[0, 1/2]`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `P(X = 1)` before folding; identical to [`b`](Self::b) for `a ≤ 1/2`.
    pub fn b_raw(&self) -> f64 {
        self.b_raw
    }

    pub fn derived(&self) -> BinaryDerived {
        let h_p1 = h2(self.p1);
        BinaryDerived {
            b: self.b,
            b_raw: self.b_raw,
            h_b: EntropyValue::bits(h2(self.b)),
            h_a: EntropyValue::bits(h2(self.a)),
            h_p1: EntropyValue::bits(h_p1),
            feasibility_floor_c: EntropyValue::bits(h_p1),
        }
    }
}

/// Derived quantities of a [`BinaryPairSource`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryDerived {
    pub b: f64,
    pub b_raw: f64,
    pub h_b: EntropyValue,
    pub h_a: EntropyValue,
    pub h_p1: EntropyValue,
    /// Smallest admissible `C`: `H(S|X̂) ≥ H(S|X) = H(p1)`.
    pub feasibility_floor_c: EntropyValue,
}

pub fn binary_derived(src: &BinaryPairSource) -> BinaryDerived {
    src.derived()
}

/// Jointly Gaussian `(X, S)` with `Cov(X, S) = θ1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianSourceParams", into = "GaussianSourceParams")]
pub struct GaussianPairSource {
    mu_x: f64,
    mu_s: f64,
    var_x: f64,
    var_s: f64,
    cov: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaussianSourceParams {
    pub mu_x: f64,
    pub mu_s: f64,
    pub var_x: f64,
    pub var_s: f64,
    pub cov: f64,
}

impl TryFrom<GaussianSourceParams> for GaussianPairSource {
    type Error = Error;
    fn try_from(p: GaussianSourceParams) -> Result<Self> {
        Self::new(p.mu_x, p.mu_s, p.var_x, p.var_s, p.cov)
    }
}

impl From<GaussianPairSource> for GaussianSourceParams {
    fn from(s: GaussianPairSource) -> Self {
        Self { mu_x: s.mu_x, mu_s: s.mu_s, var_x: s.var_x, var_s: s.var_s, cov: s.cov }
    }
}

impl GaussianPairSource {
    pub fn new(mu_x: f64, mu_s: f64, var_x: f64, var_s: f64, cov: f64) -> Result<Self> {
        if !(var_x > 0.0) || !var_x.is_finite() {
            return Err(domain("source variance", var_x));
        }
        if !(var_s > 0.0) || !var_s.is_finite() {
            return Err(domain("label variance", var_s));
        }
        if !mu_x.is_finite() || !mu_s.is_finite() || !cov.is_finite() {
            return Err(domain("Gaussian source parameter", f64::NAN));
        }
        let bound = (var_x * var_s).sqrt();
        if cov.abs() > bound * (1.0 + 1e-12) {
            return Err(domain("covariance beyond Cauchy–Schwarz bound", cov));
        }
        Ok(Self { mu_x, mu_s, var_x, var_s, cov: cov.clamp(-bound, bound) })
    }

    /// Zero-mean source from standard deviations and covariance.
    pub fn from_std(sigma_x: f64, sigma_s: f64, theta1: f64) -> Result<Self> {
        Self::new(0.0, 0.0, sigma_x * sigma_x, sigma_s * sigma_s, theta1)
    }

    pub fn mu_x(&self) -> f64 {
        self.mu_x
    }
    pub fn mu_s(&self) -> f64 {
        self.mu_s
    }
    pub fn var_x(&self) -> f64 {
        self.var_x
    }
    pub fn var_s(&self) -> f64 {
        self.var_s
    }
    pub fn sigma_x(&self) -> f64 {
        self.var_x.sqrt()
    }
    pub fn cov(&self) -> f64 {
        self.cov
    }

    pub fn rho(&self) -> f64 {
        self.cov / (self.var_x * self.var_s).sqrt()
    }

    /// `h(S)` in nats.
    pub fn h_s(&self) -> f64 {
        // var_s > 0 is a construction invariant.
        gaussian_diff_entropy(self.var_s).map(|h| h.value).unwrap_or(f64::NAN)
    }

    /// `½·ln(1 − ρ²) + h(S)`; `-inf` for a deterministic relation.
    pub fn floor_c(&self) -> f64 {
        let rho = self.rho();
        0.5 * (-rho * rho).ln_1p() + self.h_s()
    }

    pub fn derived(&self) -> GaussianDerived {
        GaussianDerived {
            rho: self.rho(),
            h_s: EntropyValue::nats(self.h_s()),
            feasibility_floor_c: EntropyValue::nats(self.floor_c()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDerived {
    #[serde(with = "ext_f64")]
    pub rho: f64,
    pub h_s: EntropyValue,
    /// `-inf` when `|ρ| = 1`.
    pub feasibility_floor_c: EntropyValue,
}

pub fn gaussian_derived(src: &GaussianPairSource) -> GaussianDerived {
    src.derived()
}

/// `w1·N(m1, v1) + w2·N(m2, v2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture2 {
    pub w1: f64,
    pub w2: f64,
    pub m1: f64,
    pub m2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl GaussianMixture2 {
    pub fn new(w1: f64, m1: f64, v1: f64, w2: f64, m2: f64, v2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w1) {
            return Err(domain("mixture weight", w1));
        }
        if !(0.0..=1.0).contains(&w2) {
            return Err(domain("mixture weight", w2));
        }
        if (w1 + w2 - 1.0).abs() > 1e-12 {
            return Err(domain("mixture weight sum", w1 + w2));
        }
        if !(v1 > 0.0) {
            return Err(domain("component variance", v1));
        }
        if !(v2 > 0.0) {
            return Err(domain("component variance", v2));
        }
        if !m1.is_finite() || !m2.is_finite() {
            return Err(domain("component mean", if m1.is_finite() { m2 } else { m1 }));
        }
        Ok(Self { w1, w2, m1, m2, v1, v2 })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.w1 * normal_pdf(x, self.m1, self.v1) + self.w2 * normal_pdf(x, self.m2, self.v2)
    }

    /// `ln pdf(x)`, accurate far into the tails.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let term = |w: f64, m: f64, v: f64| {
            if w == 0.0 {
                f64::NEG_INFINITY
            } else {
                w.ln() - 0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m) * (x - m) / (2.0 * v)
            }
        };
        let (a, b) = (term(self.w1, self.m1, self.v1), term(self.w2, self.m2, self.v2));
        let hi = a.max(b);
        if hi == f64::NEG_INFINITY {
            return hi;
        }
        hi + ((a - hi).exp() + (b - hi).exp()).ln()
    }

    pub fn mean(&self) -> f64 {
        self.w1 * self.m1 + self.w2 * self.m2
    }

    /// `E[X²]`.
    pub fn second_moment(&self) -> f64 {
        self.w1 * (self.m1 * self.m1 + self.v1) + self.w2 * (self.m2 * self.m2 + self.v2)
    }

    /// Law of `g·X + N(0, noise_var)` componentwise: means scale by `g`,
    /// variances become `g²·v + noise_var·g²`. Used for `X̂ = a·(X + N)`.
    pub fn scaled_with_noise(&self, gain: f64, noise_var: f64) -> Self {
        let g2 = gain * gain;
        Self {
            m1: gain * self.m1,
            m2: gain * self.m2,
            v1: g2 * (self.v1 + noise_var),
            v2: g2 * (self.v2 + noise_var),
            ..*self
        }
    }

    /// Interval `[min mean − k·σmax, max mean + k·σmax]`.
    pub fn support(&self, k_sd: f64) -> (f64, f64) {
        let sd = self.v1.max(self.v2).sqrt();
        (self.m1.min(self.m2) - k_sd * sd, self.m1.max(self.m2) + k_sd * sd)
    }

    /// Quadrature mass over `±12` widest-component standard deviations.
    pub fn mass(&self) -> Result<f64> {
        let (lo, hi) = self.support(12.0);
        let cfg = QuadratureConfig { abs_tol: 1e-10, ..Default::default() };
        integrate(|x| self.pdf(x), lo, hi, &cfg).map(|(v, _)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_marginal_examples() {
        let s = BinaryPairSource::new(0.3, 0.1).unwrap();
        let d = s.derived();
        assert!((d.b - 0.25).abs() < 1e-15);
        assert!((d.h_a.value - 0.881_290_899_230_692_7).abs() < 1e-12);
        assert!((d.h_p1.value - 0.468_995_593_589_281_2).abs() < 1e-12);
        assert_eq!(d.feasibility_floor_c, d.h_p1);
        assert!((BinaryPairSource::new(0.5, 0.1).unwrap().b() - 0.5).abs() < 1e-15);
        assert_eq!(BinaryPairSource::new(0.1, 0.1).unwrap().b(), 0.0);
    }

    #[test]
    fn binary_source_rejections() {
        assert_eq!(BinaryPairSource::new(0.5, 0.5), Err(Error::IndependentLabel));
        assert!(matches!(BinaryPairSource::new(0.6, 0.1), Err(Error::UnsupportedSource(_))));
        assert!(matches!(BinaryPairSource::new(0.05, 0.1), Err(Error::UnsupportedSource(_))));
        assert!(matches!(BinaryPairSource::new(0.3, -0.1), Err(Error::Domain { .. })));
        assert!(matches!(BinaryPairSource::new(0.5, 0.5 - 1e-14), Err(Error::DegenerateSource(_))));
    }

    #[test]
    fn gaussian_reference_source() {
        let s = GaussianPairSource::from_std(1.0, 0.7, 0.63).unwrap();
        let d = s.derived();
        assert!((d.rho - 0.9).abs() < 1e-14);
        assert!((d.h_s.value - 1.062_263_589_265_94).abs() < 1e-12);
        assert!((d.feasibility_floor_c.value - 0.231_897_985_855_115).abs() < 1e-12);
    }

    #[test]
    fn gaussian_floor_edges() {
        let indep = GaussianPairSource::from_std(1.0, 0.7, 0.0).unwrap();
        assert_eq!(indep.floor_c(), indep.h_s());
        let det = GaussianPairSource::from_std(1.0, 1.0, 1.0).unwrap();
        assert_eq!(det.floor_c(), f64::NEG_INFINITY);
        assert!(GaussianPairSource::from_std(1.0, 1.0, 1.01).is_err());
        assert!(GaussianPairSource::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn mixture_invariants() {
        let m = GaussianMixture2::new(0.7, -1.0, 1.0, 0.3, 1.0, 1.0).unwrap();
        assert!((m.mass().unwrap() - 1.0).abs() < 1e-8);
        assert!((m.second_moment() - 2.0).abs() < 1e-15);
        assert!(GaussianMixture2::new(0.7, -1.0, 1.0, 0.4, 1.0, 1.0).is_err());
        assert!(GaussianMixture2::new(0.7, -1.0, 0.0, 0.3, 1.0, 1.0).is_err());
    }

    #[test]
    fn sources_roundtrip_through_json() {
        let s = BinaryPairSource::new(0.3, 0.1).unwrap();
        let back: BinaryPairSource = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
        assert!(serde_json::from_str::<BinaryPairSource>(r#"{"a":0.7,"p1":0.1}"#).is_err());
        let g = GaussianPairSource::from_std(1.0, 0.7, 0.63).unwrap();
        let back: GaussianPairSource = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(g, back);
    }
}
