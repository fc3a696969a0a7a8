//! Scalar information-theoretic primitives.
//!
//! Discrete (binary) quantities are reported in bits and Gaussian quantities
//! in nats. Every value that leaves the crate carries its [`Unit`].
//!
//! The convention `0·log 0 = 0` is applied everywhere through [`xlogx`].

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI, SQRT_2};
use std::fmt;

use crate::error::{domain, Result};
use crate::serde_ext::ext_f64;

/// Arguments below this are treated as exact zeros inside `x·ln x`.
pub const XLOGX_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Bits,
    Nats,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Bits => f.write_str("bits"),
            Unit::Nats => f.write_str("nats"),
        }
    }
}

/// An information quantity tagged with its logarithm base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub unit: Unit,
}

impl EntropyValue {
    pub fn bits(value: f64) -> Self {
        Self { value, unit: Unit::Bits }
    }

    pub fn nats(value: f64) -> Self {
        Self { value, unit: Unit::Nats }
    }

    /// Converts to the requested unit.
    pub fn to_unit(self, unit: Unit) -> Self {
        let value = match (self.unit, unit) {
            (Unit::Bits, Unit::Nats) => self.value * LN_2,
            (Unit::Nats, Unit::Bits) => self.value / LN_2,
            _ => self.value,
        };
        Self { value, unit }
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        check_probability("probability", value)?;
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = crate::Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

pub(crate) fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(what, p))
    }
}

/// `x·ln x` with the `0·ln 0 = 0` convention.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x < XLOGX_FLOOR {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy in nats, no domain check.
#[inline]
pub fn h2_nats(p: f64) -> f64 {
    -(xlogx(p) + xlogx(1.0 - p))
}

/// Binary entropy in bits, no domain check. Hot loops use this directly.
#[inline]
pub fn h2(p: f64) -> f64 {
    h2_nats(p) / LN_2
}

/// Shannon entropy of a Bernoulli(`p`) variable, in bits.
pub fn binary_entropy(p: f64) -> Result<EntropyValue> {
    check_probability("binary entropy argument", p)?;
    Ok(EntropyValue::bits(h2(p)))
}

/// Inverse of the binary entropy restricted to `[0, 1/2]`.
///
/// Bisection rather than Newton: the derivative of `H` blows up at `p = 0`,
/// where small entropies live. Iterates until the bracket stops shrinking in
/// floating point, which leaves an absolute error far below `1e-12`.
pub fn binary_entropy_inv(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(domain("binary entropy value (bits)", h));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    if h == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h2(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Crossover probability of two cascaded binary symmetric channels, `p * q`.
pub fn binary_convolution(p: f64, q: f64) -> Result<f64> {
    check_probability("binary convolution argument", p)?;
    check_probability("binary convolution argument", q)?;
    Ok(bconv(p, q))
}

#[inline]
pub(crate) fn bconv(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

/// Entropy of a finite distribution in bits. Atoms below the `xlogx` floor
/// contribute nothing.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| xlogx(p)).sum::<f64>() / LN_2
}

/// Differential entropy of `N(·, variance)` in nats.
pub fn gaussian_diff_entropy(variance: f64) -> Result<EntropyValue> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(domain("Gaussian variance", variance));
    }
    Ok(EntropyValue::nats(0.5 * (2.0 * PI * std::f64::consts::E * variance).ln()))
}

/// `KL(N(mean1, var1) ‖ N(mean2, var2))` in nats.
pub fn gaussian_kl(mean1: f64, var1: f64, mean2: f64, var2: f64) -> Result<f64> {
    if !(var1 > 0.0) {
        return Err(domain("Gaussian variance", var1));
    }
    if !(var2 > 0.0) {
        return Err(domain("Gaussian variance", var2));
    }
    let dm = mean1 - mean2;
    let kl = 0.5 * (var2 / var1).ln() + dm * dm / (2.0 * var2) + (var1 - var2) / (2.0 * var2);
    // Exact zero at coincidence; rounding can leave a few ulps below it.
    Ok(kl.max(0.0))
}

/// Standard normal CDF through the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x >= 40.0 {
        return 1.0;
    }
    if x <= -40.0 {
        return 0.0;
    }
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Density of `N(mean, variance)`.
#[inline]
pub fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    (-0.5 * z * z / variance).exp() / (2.0 * PI * variance).sqrt()
}
