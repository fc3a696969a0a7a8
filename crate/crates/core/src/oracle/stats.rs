//! Exact evaluation of a reconstruction against a source: rate, distortion,
//! perception and label uncertainty.

use serde::{Deserialize, Serialize};

use crate::channel::{BinaryChannel, GaussianReconstruction};
use crate::entropy::{binary_convolution, binary_entropy_inv, gaussian_kl, h2, EntropyValue};
use crate::error::{domain, Result};
use crate::serde_ext::ext_f64;
use crate::sources::{BinaryPairSource, GaussianPairSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    /// `I(X; X̂)`.
    pub mutual_info: EntropyValue,
    /// Hamming error probability or mean squared error.
    #[serde(with = "ext_f64")]
    pub distortion: f64,
    /// Total variation (binary) or `KL(p_X ‖ p_X̂)` in nats (Gaussian).
    #[serde(with = "ext_f64")]
    pub perception: f64,
    /// `H(S | X̂)`.
    pub cond_entropy_s: EntropyValue,
    /// `H(X | X̂)`; reported for binary channels only.
    pub cond_entropy_x: Option<EntropyValue>,
}

/// Joint law of `(X, X̂)` for a source with `P(X=1) = b`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BinaryJoint {
    /// `P(X̂=0)`, `P(X̂=1)`.
    pub q: [f64; 2],
    /// `P(X=1 | X̂=x̂)`; zero for atoms of probability zero.
    pub r: [f64; 2],
    pub distortion: f64,
    pub tv: f64,
}

#[inline]
pub(crate) fn binary_joint(b: f64, p_a: f64, p_b: f64) -> BinaryJoint {
    let j00 = (1.0 - b) * p_a;
    let j01 = (1.0 - b) * (1.0 - p_a);
    let j10 = b * p_b;
    let j11 = b * (1.0 - p_b);
    let q0 = j00 + j10;
    let q1 = j01 + j11;
    let r0 = if q0 > 0.0 { (j10 / q0).min(1.0) } else { 0.0 };
    let r1 = if q1 > 0.0 { (j11 / q1).min(1.0) } else { 0.0 };
    BinaryJoint { q: [q0, q1], r: [r0, r1], distortion: j01 + j10, tv: (q0 - (1.0 - b)).abs() }
}

impl BinaryJoint {
    /// `(I(X;X̂), H(X|X̂), H(S|X̂))` in bits, given `H(b)` and the label crossover.
    #[inline]
    pub(crate) fn entropies(&self, h_b: f64, p1: f64) -> (f64, f64, f64) {
        let mut h_x = 0.0;
        let mut h_s = 0.0;
        for k in 0..2 {
            let q = self.q[k];
            if q > 0.0 {
                let r = self.r[k];
                h_x += q * h2(r);
                h_s += q * h2(p1 * (1.0 - r) + r * (1.0 - p1));
            }
        }
        ((h_b - h_x).max(0.0), h_x, h_s)
    }
}

/// Rate, Hamming distortion, TV and `H(S|X̂)` of a binary channel, all in bits.
pub fn binary_channel_stats(src: &BinaryPairSource, ch: &BinaryChannel) -> ChannelStats {
    let b = src.b_raw();
    let joint = binary_joint(b, ch.p_a(), ch.p_b());
    let (i, h_x, h_s) = joint.entropies(h2(b), src.p1());
    ChannelStats {
        mutual_info: EntropyValue::bits(i),
        distortion: joint.distortion,
        perception: joint.tv,
        cond_entropy_s: EntropyValue::bits(h_s),
        cond_entropy_x: Some(EntropyValue::bits(h_x)),
    }
}

/// Gaussian quantities in the normalized coordinates `s = σ_x̂`,
/// `t = θ2/(σx·σ_x̂)` (the correlation of `X` and `X̂`), with `μ_x̂ = μx + dmu`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GaussianEval {
    pub rate: f64,
    pub mse: f64,
    pub kl: f64,
    /// `I(S; X̂)`.
    pub label_info: f64,
}

#[inline]
pub(crate) fn gaussian_eval(sigma_x: f64, rho: f64, s: f64, t: f64, dmu: f64) -> GaussianEval {
    if s == 0.0 {
        return GaussianEval { rate: 0.0, mse: sigma_x * sigma_x + dmu * dmu, kl: f64::INFINITY, label_info: 0.0 };
    }
    let t2 = t * t;
    let rate = -0.5 * (-t2).ln_1p();
    let mse = sigma_x * sigma_x + s * s - 2.0 * t * sigma_x * s + dmu * dmu;
    let ratio = s * s / (sigma_x * sigma_x);
    let kl = 0.5 * ratio.ln() + (1.0 / ratio - 1.0) * 0.5 + dmu * dmu / (2.0 * s * s);
    let label_info = -0.5 * (-(rho * rho * t2)).ln_1p();
    GaussianEval { rate, mse, kl: kl.max(0.0), label_info }
}

/// Rate, MSE, `KL(p_X ‖ p_X̂)` and `H(S|X̂)` of a jointly Gaussian
/// reconstruction, in nats.
///
/// `σ_x̂² = 0` is the constant reconstruction (rate 0, KL reported as `+inf`).
/// `X̂ = X` gives the `+inf` rate sentinel.
pub fn gaussian_recon_stats(src: &GaussianPairSource, rec: &GaussianReconstruction) -> Result<ChannelStats> {
    let var_x = src.var_x();
    let v = rec.var_xh();
    let theta2 = rec.cov_xxh();
    let bound = var_x * v;
    if theta2 * theta2 > bound * (1.0 + 1e-12) {
        return Err(domain("reconstruction covariance beyond Cauchy–Schwarz bound", theta2));
    }
    let s = v.sqrt();
    let t = if v > 0.0 { (theta2 / (src.sigma_x() * s)).clamp(-1.0, 1.0) } else { 0.0 };
    let dmu = rec.mu_xh() - src.mu_x();
    let mut e = gaussian_eval(src.sigma_x(), src.rho(), s, t, dmu);
    // Direct form avoids the rounding of the normalized one when s is exact.
    e.mse = dmu * dmu + var_x + v - 2.0 * theta2;
    if v > 0.0 {
        e.kl = gaussian_kl(src.mu_x(), var_x, rec.mu_xh(), v)?;
    }
    Ok(ChannelStats {
        mutual_info: EntropyValue::nats(e.rate),
        distortion: e.mse.max(0.0),
        perception: e.kl,
        cond_entropy_s: EntropyValue::nats(src.h_s() - e.label_info),
        cond_entropy_x: None,
    })
}

/// Both sides of Mrs. Gerber's lemma `H(S|X̂) ≥ H(p1 * H⁻¹(H(X|X̂)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrsGerberCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn mrs_gerber_check(src: &BinaryPairSource, ch: &BinaryChannel) -> MrsGerberCheck {
    let stats = binary_channel_stats(src, ch);
    let lhs = stats.cond_entropy_s.value;
    let h_x = stats.cond_entropy_x.map_or(0.0, |h| h.value).clamp(0.0, 1.0);
    // Both arguments are in range by construction.
    let inv = binary_entropy_inv(h_x).unwrap_or(0.5);
    let rhs = h2(binary_convolution(src.p1(), inv).unwrap_or(0.5));
    MrsGerberCheck { lhs, rhs, holds: lhs >= rhs - 1e-10 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src() -> BinaryPairSource {
        BinaryPairSource::new(0.3, 0.1).unwrap()
    }

    #[test]
    fn identity_and_constant_channels() {
        let s = binary_channel_stats(&src(), &BinaryChannel::identity());
        assert!((s.mutual_info.value - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert_eq!(s.distortion, 0.0);
        assert_eq!(s.perception, 0.0);
        assert!((s.cond_entropy_s.value - h2(0.1)).abs() < 1e-12);

        let s = binary_channel_stats(&src(), &BinaryChannel::constant());
        assert_eq!(s.mutual_info.value, 0.0);
        assert!((s.distortion - 0.25).abs() < 1e-15);
        assert!((s.perception - 0.25).abs() < 1e-15);
        assert!((s.cond_entropy_s.value - h2(0.3)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_boundary_reconstructions() {
        let g = GaussianPairSource::from_std(1.0, 0.7, 0.63).unwrap();
        let perfect = gaussian_recon_stats(&g, &GaussianReconstruction::new(0.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(perfect.mutual_info.value, f64::INFINITY);
        assert_eq!(perfect.distortion, 0.0);
        assert_eq!(perfect.perception, 0.0);

        let flat = gaussian_recon_stats(&g, &GaussianReconstruction::constant(0.0)).unwrap();
        assert_eq!(flat.mutual_info.value, 0.0);
        assert_eq!(flat.distortion, 1.0);
        assert_eq!(flat.perception, f64::INFINITY);
        assert!((flat.cond_entropy_s.value - g.h_s()).abs() < 1e-15);

        assert!(gaussian_recon_stats(&g, &GaussianReconstruction::new(0.0, 0.5, 0.8).unwrap()).is_err());
    }

    #[test]
    fn gerber_identity_equality() {
        let m = mrs_gerber_check(&src(), &BinaryChannel::identity());
        assert!((m.lhs - m.rhs).abs() < 1e-12);
        assert!(m.holds);
    }
}
