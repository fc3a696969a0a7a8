//! Globally adaptive Gauss–Kronrod (7/15) quadrature and a numeric KL
//! divergence built on it.

// The rule tables are quoted to their published precision.
#![allow(clippy::excessive_precision)]

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::entropy::XLOGX_FLOOR;
use crate::error::{Error, Result};

// Kronrod abscissae (positive half, descending) and weights for the 15-point rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Embedded 7-point Gauss weights, paired with XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Target absolute error of the whole integral.
    pub abs_tol: f64,
    /// Maximum number of live subintervals.
    pub budget: usize,
    /// Number of equal pieces the support is cut into before adapting.
    pub initial_pieces: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-8, budget: 1_000_000, initial_pieces: 16 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn kronrod15(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment { lo, hi, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Integrates `f` over `[lo, hi]` to the configured absolute tolerance.
///
/// Returns the integral and its error estimate.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidGrid(format!("integration interval [{lo}, {hi}]")));
    }
    let pieces = cfg.initial_pieces.max(1);
    let width = (hi - lo) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(pieces * 4);
    for i in 0..pieces {
        let a = lo + width * i as f64;
        let b = if i + 1 == pieces { hi } else { lo + width * (i + 1) as f64 };
        heap.push(kronrod15(&f, a, b));
    }
    loop {
        let total_err: f64 = heap.iter().map(|s| s.error).sum();
        if total_err <= cfg.abs_tol {
            let total: f64 = heap.iter().map(|s| s.value).sum();
            return Ok((total, total_err));
        }
        if heap.len() >= cfg.budget {
            return Err(Error::IntegrationFailure { budget: cfg.budget, estimate: total_err });
        }
        // Split the worst segments in a batch so the error sum is not
        // recomputed after every single bisection.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.lo + worst.hi);
            if mid <= worst.lo || mid >= worst.hi {
                // Cannot split further in floating point; accept as is.
                heap.push(Segment { error: 0.0, ..worst });
                continue;
            }
            heap.push(kronrod15(&f, worst.lo, mid));
            heap.push(kronrod15(&f, mid, worst.hi));
        }
    }
}

/// `∫ p ln(p/q)` over `support`, in nats.
///
/// Both densities must integrate to one over the support within `1e-8`;
/// the integrand is taken as zero wherever `p < 1e-300`.
pub fn numeric_kl(p: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64, support: (f64, f64)) -> Result<f64> {
    numeric_kl_with(p, q, support, &QuadratureConfig::default())
}

pub fn numeric_kl_with(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    support: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<f64> {
    numeric_kl_log(|x| p(x).ln(), |x| q(x).ln(), support, cfg)
}

/// [`numeric_kl_with`] on log-densities, for references whose tails
/// underflow (a narrow `q` far from its mean).
pub fn numeric_kl_log(
    ln_p: impl Fn(f64) -> f64,
    ln_q: impl Fn(f64) -> f64,
    support: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (lo, hi) = support;
    let mass_cfg = QuadratureConfig { abs_tol: 1e-10, ..*cfg };
    for ln_density in [&ln_p as &dyn Fn(f64) -> f64, &ln_q as &dyn Fn(f64) -> f64] {
        let (mass, _) = integrate(|x| ln_density(x).exp(), lo, hi, &mass_cfg)?;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized { mass });
        }
    }

    let vanished: Cell<Option<f64>> = Cell::new(None);
    let integrand = |x: f64| {
        let lp = ln_p(x);
        let px = lp.exp();
        if px < XLOGX_FLOOR {
            return 0.0;
        }
        let lq = ln_q(x);
        if lq == f64::NEG_INFINITY || lq.is_nan() {
            if vanished.get().is_none() {
                vanished.set(Some(x));
            }
            return 0.0;
        }
        px * (lp - lq)
    };
    let (kl, _) = integrate(integrand, lo, hi, cfg)?;
    if let Some(x) = vanished.get() {
        return Err(Error::VanishingReference { x });
    }
    Ok(kl)
}
