//! Closed-form rate-distortion-classification and
//! rate-perception-classification functions for the binary and Gaussian
//! sources, with region labels and achievability witnesses.
//!
//! Infeasible constraint sets are reported through the returned
//! [`TradeoffPoint`] (rate `+inf`, region [`Region::Infeasible`]) rather
//! than as errors, so sweeps can cover the whole plane.

use serde::{Deserialize, Serialize};

use crate::channel::{BinaryChannel, GaussianReconstruction, Witness};
use crate::entropy::{binary_entropy_inv, h2, EntropyValue};
use crate::error::{domain, Error, Result};
use crate::optimize::bisect;
use crate::oracle::stats::binary_joint;
use crate::serde_ext::ext_f64_opt;
use crate::sources::{BinaryPairSource, GaussianPairSource};

/// Slack applied when comparing against feasibility boundaries.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    DistortionLimited,
    ClassificationLimited,
    PerceptionLimited,
    ZeroRate,
    Infeasible,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::DistortionLimited => "distortion_limited",
            Region::ClassificationLimited => "classification_limited",
            Region::PerceptionLimited => "perception_limited",
            Region::ZeroRate => "zero_rate",
            Region::Infeasible => "infeasible",
        }
    }
}

/// A solved instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    #[serde(with = "ext_f64_opt")]
    pub d: Option<f64>,
    #[serde(with = "ext_f64_opt")]
    pub p: Option<f64>,
    pub c: EntropyValue,
    pub rate: EntropyValue,
    pub feasible: bool,
    pub region: Region,
    pub witness: Option<Witness>,
}

impl TradeoffPoint {
    fn infeasible(d: Option<f64>, p: Option<f64>, c: EntropyValue) -> Self {
        Self {
            d,
            p,
            c,
            rate: EntropyValue { value: f64::INFINITY, unit: c.unit },
            feasible: false,
            region: Region::Infeasible,
            witness: None,
        }
    }
}

fn check_level(what: &'static str, v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        Err(domain(what, v))
    } else {
        Ok(())
    }
}

/// `C1 = (H⁻¹(C) − p1)/(1 − 2p1)`, with `H⁻¹` saturating at `1/2` above one bit.
pub fn binary_c1(src: &BinaryPairSource, c: f64) -> f64 {
    let inv = if c >= 1.0 { 0.5 } else { binary_entropy_inv(c.max(0.0)).unwrap_or(0.0) };
    ((inv - src.p1()) / (1.0 - 2.0 * src.p1())).clamp(0.0, 0.5)
}

/// Binary rate-distortion-classification function with Hamming distortion, in bits.
pub fn rdc_binary(src: &BinaryPairSource, d: f64, c: f64) -> Result<TradeoffPoint> {
    check_level("distortion level", d)?;
    check_level("classification level", c)?;
    let c_val = EntropyValue::bits(c);
    if c < h2(src.p1()) - FEASIBILITY_TOL {
        return Ok(TradeoffPoint::infeasible(Some(d), None, c_val));
    }
    let b = src.b();
    let c1 = binary_c1(src, c);
    let (region, eps) = if d >= c1 && c1 <= b {
        (Region::ClassificationLimited, c1)
    } else if d < c1 && d <= b {
        (Region::DistortionLimited, d)
    } else {
        (Region::ZeroRate, b)
    };
    let rate = (h2(b) - h2(eps)).max(0.0);
    let (region, witness) = if region == Region::ZeroRate || rate == 0.0 {
        (Region::ZeroRate, Some(BinaryChannel::constant()))
    } else {
        (region, BinaryChannel::complementary(src.b_raw(), eps).ok())
    };
    Ok(TradeoffPoint {
        d: Some(d),
        p: None,
        c: c_val,
        rate: EntropyValue::bits(rate),
        feasible: true,
        region,
        witness: witness.map(Witness::Binary),
    })
}

/// The witness channel attached by [`rdc_binary`].
pub fn rdc_binary_witness(src: &BinaryPairSource, d: f64, c: f64) -> Result<BinaryChannel> {
    let pt = rdc_binary(src, d, c)?;
    if !pt.feasible {
        return Err(Error::Infeasible(format!("C = {c} below H(p1) = {}", h2(src.p1()))));
    }
    if pt.region == Region::ZeroRate {
        return Ok(BinaryChannel::constant());
    }
    let eps = if pt.region == Region::DistortionLimited { d } else { binary_c1(src, c) };
    BinaryChannel::complementary(src.b_raw(), eps)
}

/// `κ = ρ⁻²·(1 − e^{2C − 2h(S)})`; zero or negative once the label constraint is slack.
fn gaussian_kappa(src: &GaussianPairSource, c: f64) -> f64 {
    let slack = -(2.0 * (c - src.h_s())).exp_m1();
    if slack <= 0.0 {
        return slack.min(0.0);
    }
    let rho = src.rho();
    slack / (rho * rho)
}

/// `−½·ln(1 − κ)`, clamped at zero; `+inf` at the feasibility floor.
fn gaussian_class_rate(src: &GaussianPairSource, c: f64) -> f64 {
    let kappa = gaussian_kappa(src, c);
    if kappa <= 0.0 {
        0.0
    } else if kappa >= 1.0 {
        f64::INFINITY
    } else {
        -0.5 * (-kappa).ln_1p()
    }
}

fn gaussian_feasible(src: &GaussianPairSource, c: f64) -> bool {
    c >= src.floor_c() - FEASIBILITY_TOL
}

/// Region label and boundary distortion `D* = σx²(1 − κ)` of the Gaussian
/// RDC function.
pub fn rdc_gaussian_region(src: &GaussianPairSource, d: f64, c: f64) -> Result<(Region, f64)> {
    check_level("distortion level", d)?;
    if c.is_nan() {
        return Err(domain("classification level", c));
    }
    let kappa = gaussian_kappa(src, c);
    let d_star = if src.rho() == 0.0 { src.var_x() } else { src.var_x() * (1.0 - kappa) };
    if !gaussian_feasible(src, c) {
        return Ok((Region::Infeasible, d_star));
    }
    let (region, rate) = if d <= d_star {
        (Region::DistortionLimited, gaussian_rd(src, d))
    } else {
        (Region::ClassificationLimited, gaussian_class_rate(src, c))
    };
    Ok((if rate <= 0.0 { Region::ZeroRate } else { region }, d_star))
}

/// `½·ln(σx²/D)`; `+inf` at `D = 0`.
fn gaussian_rd(src: &GaussianPairSource, d: f64) -> f64 {
    if d == 0.0 {
        f64::INFINITY
    } else {
        0.5 * (src.var_x() / d).ln()
    }
}

/// Gaussian rate-distortion-classification function with MSE distortion, in nats.
pub fn rdc_gaussian(src: &GaussianPairSource, d: f64, c: f64) -> Result<TradeoffPoint> {
    let c_val = EntropyValue::nats(c);
    let (region, _) = rdc_gaussian_region(src, d, c)?;
    if region == Region::Infeasible {
        return Ok(TradeoffPoint::infeasible(Some(d), None, c_val));
    }
    let var_x = src.var_x();
    let (rate, rec) = match region {
        Region::DistortionLimited => {
            let v = (var_x - d).max(0.0);
            (gaussian_rd(src, d), GaussianReconstruction::new(src.mu_x(), v, v)?)
        }
        Region::ClassificationLimited => {
            let v = var_x * gaussian_kappa(src, c).min(1.0);
            (gaussian_class_rate(src, c), GaussianReconstruction::new(src.mu_x(), v, v)?)
        }
        _ => (0.0, GaussianReconstruction::constant(src.mu_x())),
    };
    Ok(TradeoffPoint {
        d: Some(d),
        p: None,
        c: c_val,
        rate: EntropyValue::nats(rate.max(0.0)),
        feasible: true,
        region,
        witness: Some(Witness::Gaussian(rec)),
    })
}

/// `H(S|X̂)` in bits along the zero-TV line `p_b = (1−b)(1−p_a)/b`.
pub fn g_function(src: &BinaryPairSource, p_a: f64) -> Result<f64> {
    let b = src.b_raw();
    if !(0.0..=1.0).contains(&p_a) || b <= 0.0 {
        return Err(domain("g-function argument p_a", p_a));
    }
    let p_b = (1.0 - b) * (1.0 - p_a) / b;
    if p_b > 1.0 + 1e-12 {
        return Err(domain("g-function argument p_a (implied p_b > 1)", p_a));
    }
    let joint = binary_joint(b, p_a, p_b.min(1.0));
    Ok(joint.entropies(h2(b), src.p1()).2)
}

/// Binary rate-perception-classification function with TV perception, in bits.
///
/// The value does not depend on `p`. The attached witness lies on the
/// zero-TV line; its own rate can exceed the returned one (see
/// [`rpc_binary_witness`]).
pub fn rpc_binary(src: &BinaryPairSource, p: f64, c: f64) -> Result<TradeoffPoint> {
    check_level("perception level", p)?;
    check_level("classification level", c)?;
    let c_val = EntropyValue::bits(c);
    if c < h2(src.p1()) - FEASIBILITY_TOL {
        return Ok(TradeoffPoint::infeasible(None, Some(p), c_val));
    }
    let b = src.b();
    let (region, rate) = if c > h2(src.a()) {
        (Region::ZeroRate, 0.0)
    } else {
        let rate = (h2(b) - h2(binary_c1(src, c).min(b))).max(0.0);
        (if rate == 0.0 { Region::ZeroRate } else { Region::ClassificationLimited }, rate)
    };
    let witness = rpc_binary_witness(src, c.min(h2(src.a()))).ok();
    Ok(TradeoffPoint {
        d: None,
        p: Some(p),
        c: c_val,
        rate: EntropyValue::bits(rate),
        feasible: true,
        region,
        witness: witness.map(Witness::Binary),
    })
}

/// Zero-TV channel with `H(S|X̂) = C`: `p_a = g⁻¹(C)` on `[1−b, 1]`.
pub fn rpc_binary_witness(src: &BinaryPairSource, c: f64) -> Result<BinaryChannel> {
    let lo_c = h2(src.p1());
    let hi_c = h2(src.a());
    if c < lo_c - FEASIBILITY_TOL || c > hi_c + FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!("C = {c} outside [H(p1), H(a)] = [{lo_c}, {hi_c}]")));
    }
    let b = src.b_raw();
    if b <= 0.0 {
        // X is constantly 0; every channel is both identity and constant.
        return Ok(BinaryChannel::identity());
    }
    let g = |p_a: f64| g_function(src, p_a).unwrap_or(f64::NAN) - c;
    let p_a = if c >= hi_c {
        1.0 - b
    } else if c <= lo_c {
        1.0
    } else {
        bisect(g, 1.0 - b, 1.0, 1e-16)
            .ok_or_else(|| Error::WitnessUnavailable(format!("g(p_a) = {c} has no root on [1-b, 1]")))?
    };
    let p_b = ((1.0 - b) * (1.0 - p_a) / b).clamp(0.0, 1.0);
    BinaryChannel::new(p_a, p_b)
}

/// Gaussian rate-perception-classification function with KL perception, in nats.
pub fn rpc_gaussian(src: &GaussianPairSource, p: f64, c: f64) -> Result<TradeoffPoint> {
    check_level("perception level", p)?;
    if c.is_nan() {
        return Err(domain("classification level", c));
    }
    let c_val = EntropyValue::nats(c);
    if !gaussian_feasible(src, c) {
        return Ok(TradeoffPoint::infeasible(None, Some(p), c_val));
    }
    let rate = gaussian_class_rate(src, c);
    let region = if rate > 0.0 { Region::ClassificationLimited } else { Region::ZeroRate };
    Ok(TradeoffPoint {
        d: None,
        p: Some(p),
        c: c_val,
        rate: EntropyValue::nats(rate),
        feasible: true,
        region,
        witness: rpc_gaussian_witness(src, c.min(src.h_s())).ok().map(Witness::Gaussian),
    })
}

/// Reconstruction with the source's own marginal and
/// `θ2 = sqrt(σs²σx⁶(1 − e^{2C−2h(S)})/θ1²)`.
pub fn rpc_gaussian_witness(src: &GaussianPairSource, c: f64) -> Result<GaussianReconstruction> {
    if !gaussian_feasible(src, c) || c > src.h_s() + FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!("C = {c} outside [{}, {}]", src.floor_c(), src.h_s())));
    }
    let var_x = src.var_x();
    let kappa = gaussian_kappa(src, c).clamp(0.0, 1.0);
    let theta2 = var_x * kappa.sqrt();
    GaussianReconstruction::new(src.mu_x(), var_x, theta2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsrc() -> BinaryPairSource {
        BinaryPairSource::new(0.3, 0.1).unwrap()
    }

    fn gsrc() -> GaussianPairSource {
        GaussianPairSource::from_std(1.0, 0.7, 0.63).unwrap()
    }

    #[test]
    fn binary_rdc_branches() {
        let p = rdc_binary(&bsrc(), 0.1, 0.85).unwrap();
        assert_eq!(p.region, Region::DistortionLimited);
        assert!((p.rate.value - 0.342_282_530_869_851_6).abs() < 1e-9, "{}", p.rate.value);

        let p = rdc_binary(&bsrc(), 0.3, 1.0).unwrap();
        assert_eq!((p.region, p.rate.value), (Region::ZeroRate, 0.0));
        assert_eq!(p.witness, Some(Witness::Binary(BinaryChannel::constant())));

        let p = rdc_binary(&bsrc(), 0.3, 0.4).unwrap();
        assert!(!p.feasible);
        assert_eq!(p.region, Region::Infeasible);
    }

    #[test]
    fn binary_tie_is_classification_limited() {
        let c1 = binary_c1(&bsrc(), 0.6);
        let p = rdc_binary(&bsrc(), c1, 0.6).unwrap();
        assert_eq!(p.region, Region::ClassificationLimited);
    }

    #[test]
    fn gaussian_rdc_branches() {
        let c = gsrc().h_s() - 0.5;
        let p = rdc_gaussian(&gsrc(), 0.1, c).unwrap();
        assert_eq!(p.region, Region::DistortionLimited);
        assert!((p.rate.value - 0.5 * 10f64.ln()).abs() < 1e-12);

        let p = rdc_gaussian(&gsrc(), 0.5, c).unwrap();
        assert_eq!(p.region, Region::ClassificationLimited);
        assert!((p.rate.value - 0.757_964).abs() < 1e-6, "{}", p.rate.value);

        let p = rdc_gaussian(&gsrc(), 1.5, 1.2).unwrap();
        assert_eq!((p.region, p.rate.value), (Region::ZeroRate, 0.0));

        let (_, d_star) = rdc_gaussian_region(&gsrc(), 0.1, c).unwrap();
        assert!((d_star - 0.219_604_2).abs() < 1e-7);

        let p = rdc_gaussian(&gsrc(), 0.0, c).unwrap();
        assert_eq!(p.rate.value, f64::INFINITY);
        assert!(p.feasible);
    }

    #[test]
    fn gaussian_independent_label() {
        let g = GaussianPairSource::from_std(1.0, 0.7, 0.0).unwrap();
        let h = g.h_s();
        assert!(!rdc_gaussian(&g, 0.5, h - 0.1).unwrap().feasible);
        let p = rdc_gaussian(&g, 0.5, h).unwrap();
        assert_eq!(p.region, Region::DistortionLimited);
        assert!((p.rate.value - 0.5 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(rdc_gaussian(&g, 2.0, h).unwrap().region, Region::ZeroRate);
    }

    #[test]
    fn rpc_values() {
        let p = rpc_binary(&bsrc(), 0.2, 0.6).unwrap();
        assert!((p.rate.value - 0.493_322).abs() < 1e-6, "{}", p.rate.value);
        assert_eq!(rpc_binary(&bsrc(), 0.0, 0.9).unwrap().region, Region::ZeroRate);
        assert!(!rpc_binary(&bsrc(), 1.0, 0.4).unwrap().feasible);

        let c = gsrc().h_s() - 0.5;
        let p = rpc_gaussian(&gsrc(), 0.01, c).unwrap();
        assert!((p.rate.value - 0.757_964).abs() < 1e-6);
        assert_eq!(rpc_gaussian(&gsrc(), 3.0, 1.2).unwrap().rate.value, 0.0);
        assert!(!rpc_gaussian(&gsrc(), 10.0, 0.2).unwrap().feasible);
    }

    #[test]
    fn g_function_endpoints() {
        let s = bsrc();
        assert!((g_function(&s, 0.75).unwrap() - h2(0.3)).abs() < 1e-12);
        assert!((g_function(&s, 1.0).unwrap() - h2(0.1)).abs() < 1e-12);
        assert!((g_function(&s, 0.96).unwrap() - 0.600_637).abs() < 1e-6);
        assert!(g_function(&s, 0.5).is_err());
    }

    #[test]
    fn rpc_witness_endpoints() {
        let s = bsrc();
        let ch = rpc_binary_witness(&s, h2(0.3)).unwrap();
        assert_eq!(ch.p_a(), 0.75);
        assert!((ch.p_b() - 0.75).abs() < 1e-15);
        let ch = rpc_binary_witness(&s, h2(0.1)).unwrap();
        assert_eq!((ch.p_a(), ch.p_b()), (1.0, 0.0));
        let ch = rpc_binary_witness(&s, 0.6).unwrap();
        assert!((ch.p_a() - 0.960_223).abs() < 1e-6, "{}", ch.p_a());
        assert!((ch.p_b() - 0.119_330).abs() < 1e-6, "{}", ch.p_b());
        assert!(rpc_binary_witness(&s, 0.95).is_err());
    }

    #[test]
    fn gaussian_rpc_witness_values() {
        let g = gsrc();
        let w = rpc_gaussian_witness(&g, g.h_s() - 0.5).unwrap();
        assert!((w.cov_xxh() - 0.883_400_1).abs() < 1e-7);
        assert_eq!(w.var_xh(), 1.0);
        assert_eq!(rpc_gaussian_witness(&g, g.h_s()).unwrap().cov_xxh(), 0.0);
        let edge = rpc_gaussian_witness(&g, g.floor_c()).unwrap();
        assert!((edge.cov_xxh() - 1.0).abs() < 1e-12);
    }
}
