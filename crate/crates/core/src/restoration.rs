//! Linear denoising of a two-class Gaussian mixture.
//!
//! The clean signal `X` is a [`GaussianMixture2`] whose components are the
//! two classes. It is observed as `Y = X + N` with `N ~ N(0, σN²)` and
//! restored as `X̂ = a·Y`. For each gain `a` the model reports the MSE, the
//! divergence `KL(p_X ‖ p_X̂)` and the error rate of a threshold classifier
//! whose threshold `c0` stays at the Bayes threshold of the clean source.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::std_normal_cdf;
use crate::error::{domain, Error, Result};
use crate::optimize::{bisect, golden_section_min};
use crate::quadrature::{numeric_kl_log, QuadratureConfig};
use crate::serde_ext::ext_f64;
use crate::sources::GaussianMixture2;

/// Target absolute error of the KL quadrature.
pub const KL_TOL: f64 = 1e-7;

/// Support half-width, in standard deviations of the widest component.
const SUPPORT_SDS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestorationModel {
    pub mixture: GaussianMixture2,
    /// Noise standard deviation.
    pub sigma_n: f64,
    pub threshold_c0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseCurvePoint {
    pub a: f64,
    pub mse: f64,
    #[serde(with = "ext_f64")]
    pub kl: f64,
    pub error_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mse,
    Kl,
    ErrorRate,
}

impl Metric {
    pub fn of(&self, p: &DenoiseCurvePoint) -> f64 {
        match self {
            Metric::Mse => p.mse,
            Metric::Kl => p.kl,
            Metric::ErrorRate => p.error_rate,
        }
    }
}

/// One bound of a frontier. `value` and `gain` are `None` where no gain
/// meets the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub bound: f64,
    pub value: Option<f64>,
    pub gain: Option<f64>,
}

impl FrontierPoint {
    pub fn feasible(&self) -> bool {
        self.value.is_some()
    }
}

/// Monte-Carlo MSE estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub a: f64,
    pub mean: f64,
    pub std_error: f64,
}

/// `x` where `w1·f1(x) = w2·f2(x)` between the component means.
pub fn bayes_threshold_clean(mixture: &GaussianMixture2) -> Result<f64> {
    let m = mixture;
    if m.m1 == m.m2 {
        return Err(Error::NoCrossing);
    }
    if m.v1 == m.v2 {
        let c = 0.5 * (m.m1 + m.m2) + m.v1 * (m.w1 / m.w2).ln() / (m.m2 - m.m1);
        return if c >= m.m1.min(m.m2) && c <= m.m1.max(m.m2) { Ok(c) } else { Err(Error::NoCrossing) };
    }
    let log_ratio = |x: f64| {
        let l1 = m.w1.ln() - 0.5 * m.v1.ln() - (x - m.m1).powi(2) / (2.0 * m.v1);
        let l2 = m.w2.ln() - 0.5 * m.v2.ln() - (x - m.m2).powi(2) / (2.0 * m.v2);
        l1 - l2
    };
    bisect(log_ratio, m.m1.min(m.m2), m.m1.max(m.m2), 1e-14).ok_or(Error::NoCrossing)
}

impl RestorationModel {
    /// Model with the threshold fixed at the clean-source Bayes threshold.
    pub fn new(mixture: GaussianMixture2, sigma_n: f64) -> Result<Self> {
        let c0 = bayes_threshold_clean(&mixture)?;
        Self::with_threshold(mixture, sigma_n, c0)
    }

    pub fn with_threshold(mixture: GaussianMixture2, sigma_n: f64, threshold_c0: f64) -> Result<Self> {
        if !(sigma_n >= 0.0) || !sigma_n.is_finite() {
            return Err(domain("noise standard deviation", sigma_n));
        }
        if !threshold_c0.is_finite() {
            return Err(domain("classifier threshold", threshold_c0));
        }
        Ok(Self { mixture, sigma_n, threshold_c0 })
    }

    /// `0.7·N(−1, 1) + 0.3·N(1, 1)` observed through unit-variance noise.
    pub fn reference() -> Self {
        Self::reference_with_noise(1.0).expect("reference model is valid")
    }

    pub fn reference_with_noise(sigma_n: f64) -> Result<Self> {
        Self::new(Self::reference_mixture(), sigma_n)
    }

    pub fn reference_mixture() -> GaussianMixture2 {
        GaussianMixture2 { w1: 0.7, w2: 0.3, m1: -1.0, m2: 1.0, v1: 1.0, v2: 1.0 }
    }

    fn noise_var(&self) -> f64 {
        self.sigma_n * self.sigma_n
    }

    /// Law of `X̂ = a·(X + N)`.
    pub fn restored(&self, a: f64) -> GaussianMixture2 {
        self.mixture.scaled_with_noise(a, self.noise_var())
    }

    /// `(1 − a)²·E[X²] + a²·σN²`.
    pub fn mse(&self, a: f64) -> f64 {
        (1.0 - a).powi(2) * self.mixture.second_moment() + a * a * self.noise_var()
    }

    /// Gain minimizing the MSE, `E[X²]/(E[X²] + σN²)`.
    pub fn mse_argmin(&self) -> f64 {
        let ex2 = self.mixture.second_moment();
        ex2 / (ex2 + self.noise_var())
    }

    /// Error rate of the rule "class of larger mean iff `x̂ > c`".
    pub fn error_rate_at_threshold(&self, a: f64, c: f64) -> Result<f64> {
        if a == 0.0 || !a.is_finite() {
            return Err(domain("denoiser gain", a));
        }
        let m = &self.mixture;
        let ((w_hi, m_hi, v_hi), (w_lo, m_lo, v_lo)) = if m.m2 >= m.m1 {
            ((m.w2, m.m2, m.v2), (m.w1, m.m1, m.v1))
        } else {
            ((m.w1, m.m1, m.v1), (m.w2, m.m2, m.v2))
        };
        let s_hi = a.abs() * (v_hi + self.noise_var()).sqrt();
        let s_lo = a.abs() * (v_lo + self.noise_var()).sqrt();
        let miss_hi = std_normal_cdf((c - a * m_hi) / s_hi);
        let miss_lo = std_normal_cdf(-(c - a * m_lo) / s_lo);
        Ok((w_hi * miss_hi + w_lo * miss_lo).clamp(0.0, 1.0))
    }

    /// Error rate with the fixed threshold `c0`.
    pub fn error_rate(&self, a: f64) -> Result<f64> {
        self.error_rate_at_threshold(a, self.threshold_c0)
    }

    /// Error rate when the threshold is re-derived as the Bayes threshold of
    /// `X̂ = a·Y` itself.
    pub fn error_rate_reoptimized(&self, a: f64) -> Result<f64> {
        let c = bayes_threshold_clean(&self.restored(a))?;
        self.error_rate_at_threshold(a, c)
    }

    /// `KL(p_X ‖ p_X̂)` in nats by adaptive quadrature.
    pub fn kl(&self, a: f64) -> Result<f64> {
        if a == 0.0 || !a.is_finite() {
            return Err(domain("denoiser gain", a));
        }
        let clean = self.mixture;
        let restored = self.restored(a);
        let (l1, h1) = clean.support(SUPPORT_SDS);
        let (l2, h2) = restored.support(SUPPORT_SDS);
        let cfg = QuadratureConfig { abs_tol: KL_TOL, ..Default::default() };
        let kl = numeric_kl_log(|x| clean.ln_pdf(x), |x| restored.ln_pdf(x), (l1.min(l2), h1.max(h2)), &cfg)?;
        Ok(kl.max(0.0))
    }

    pub fn point(&self, a: f64) -> Result<DenoiseCurvePoint> {
        Ok(DenoiseCurvePoint { a, mse: self.mse(a), kl: self.kl(a)?, error_rate: self.error_rate(a)? })
    }

    pub fn metric(&self, metric: Metric, a: f64) -> Result<f64> {
        match metric {
            Metric::Mse => Ok(self.mse(a)),
            Metric::Kl => self.kl(a),
            Metric::ErrorRate => self.error_rate(a),
        }
    }

    /// Gain minimizing `metric` on `[lo, hi]` (a grid of `steps` points plus
    /// golden section on the cells around the best one).
    pub fn argmin(&self, metric: Metric, lo: f64, hi: f64, steps: usize) -> Result<(f64, f64)> {
        let grid = linspace(lo, hi, steps.max(3));
        let vals: Vec<f64> = grid.par_iter().map(|&a| self.metric(metric, a)).collect::<Result<_>>()?;
        let k = argmin_index(&vals).ok_or(Error::InvalidGrid("no finite metric value".into()))?;
        let (a0, a1) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
        let (g, fg) = golden_section_min(|a| self.metric(metric, a).unwrap_or(f64::INFINITY), a0, a1, 1e-9);
        Ok(if fg < vals[k] { (g, fg) } else { (grid[k], vals[k]) })
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

fn argmin_index(vals: &[f64]) -> Option<usize> {
    vals.iter().enumerate().filter(|(_, v)| v.is_finite()).min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i)
}

/// The three metrics at every gain, in grid order.
pub fn sweep(model: &RestorationModel, a_grid: &[f64]) -> Result<Vec<DenoiseCurvePoint>> {
    if a_grid.is_empty() {
        return Err(Error::InvalidGrid("empty gain grid".into()));
    }
    a_grid.par_iter().map(|&a| model.point(a)).collect()
}

/// `min_a minimize(a)` subject to `subject_to(a) ≤ bound`, for each bound.
///
/// Gains are searched on `a_range` with `steps` grid points refined by golden
/// section. Because the feasible gains only grow as a bound relaxes, the
/// best gain of each bound is carried to the next, which keeps the frontier
/// non-increasing for sorted bounds.
pub fn frontier(
    model: &RestorationModel,
    minimize: Metric,
    subject_to: Metric,
    bounds: &[f64],
    a_range: (f64, f64),
    steps: usize,
) -> Result<Vec<FrontierPoint>> {
    if minimize == subject_to {
        return Err(Error::InvalidGrid("frontier metrics must differ".into()));
    }
    if bounds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidGrid("frontier bounds must be sorted".into()));
    }
    let (lo, hi) = a_range;
    if !(lo < hi) || (lo <= 0.0 && hi >= 0.0) {
        return Err(Error::InvalidGrid(format!("gain range [{lo}, {hi}] must be non-empty and exclude 0")));
    }
    let grid = linspace(lo, hi, steps.max(3));
    let pts = sweep(model, &grid)?;
    let refined: Vec<Option<(f64, f64)>> = bounds
        .par_iter()
        .map(|&bound| {
            let feasible = |p: &DenoiseCurvePoint| subject_to.of(p) <= bound;
            let k = pts
                .iter()
                .enumerate()
                .filter(|(_, p)| feasible(p))
                .min_by(|a, b| minimize.of(a.1).total_cmp(&minimize.of(b.1)))
                .map(|(i, _)| i)?;
            let objective = |a: f64| match (model.metric(subject_to, a), model.metric(minimize, a)) {
                (Ok(s), Ok(v)) if s <= bound => v,
                _ => f64::INFINITY,
            };
            let (a0, a1) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
            let (g, fg) = golden_section_min(objective, a0, a1, 1e-9);
            let grid_best = minimize.of(&pts[k]);
            Some(if fg < grid_best { (g, fg) } else { (grid[k], grid_best) })
        })
        .collect();
    let mut carried: Option<(f64, f64)> = None;
    Ok(bounds
        .iter()
        .zip(refined)
        .map(|(&bound, r)| {
            if let Some((g, v)) = r {
                if carried.is_none_or(|(_, cv)| v < cv) {
                    carried = Some((g, v));
                }
            }
            match carried {
                Some((g, v)) => FrontierPoint { bound, value: Some(v), gain: Some(g) },
                None => FrontierPoint { bound, value: None, gain: None },
            }
        })
        .collect())
}

/// Monte-Carlo estimates of `E[(X − a·(X+N))²]` for each gain, sharing one
/// sample stream. Samples are drawn in fixed-size chunks, each seeded from
/// `(seed, chunk index)`, and chunk sums are combined in order, so the result
/// does not depend on the number of worker threads.
pub fn mse_monte_carlo(model: &RestorationModel, gains: &[f64], samples: usize, seed: u64) -> Vec<McEstimate> {
    const CHUNK: usize = 100_000;
    let chunks = samples.div_ceil(CHUNK);
    let m = model.mixture;
    let (sd1, sd2) = (m.v1.sqrt(), m.v2.sqrt());
    let partial: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut acc = vec![(0.0, 0.0); gains.len()];
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                let x = if rng.random::<f64>() < m.w1 { m.m1 + sd1 * z } else { m.m2 + sd2 * z };
                let noise: f64 = model.sigma_n * rng.sample::<f64, _>(StandardNormal);
                for (slot, &a) in acc.iter_mut().zip(gains) {
                    let e = (1.0 - a) * x - a * noise;
                    let e2 = e * e;
                    slot.0 += e2;
                    slot.1 += e2 * e2;
                }
            }
            acc
        })
        .collect();
    let n = samples as f64;
    gains
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let (s1, s2) = partial.iter().fold((0.0, 0.0), |(s1, s2), acc| (s1 + acc[i].0, s2 + acc[i].1));
            let mean = s1 / n;
            let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
            McEstimate { a, mean, std_error: (var / n).sqrt() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_threshold() {
        let m = RestorationModel::reference();
        let c = bayes_threshold_clean(&m.mixture).unwrap();
        assert!((c - 0.423_648_930_193_601_8).abs() < 1e-12);
        assert!((c - m.threshold_c0).abs() < 1e-15);
        let sym = GaussianMixture2::new(0.5, -2.0, 1.0, 0.5, 2.0, 1.0).unwrap();
        assert_eq!(bayes_threshold_clean(&sym).unwrap(), 0.0);
        let apart = GaussianMixture2::new(0.5, 0.0, 1.0, 0.5, 4.0, 1.0).unwrap();
        assert_eq!(bayes_threshold_clean(&apart).unwrap(), 2.0);
        let unequal = GaussianMixture2::new(0.5, 0.0, 1.0, 0.5, 4.0, 2.0).unwrap();
        let c = bayes_threshold_clean(&unequal).unwrap();
        assert!(
            (unequal.w1 * crate::entropy::normal_pdf(c, 0.0, 1.0)
                - unequal.w2 * crate::entropy::normal_pdf(c, 4.0, 2.0))
            .abs()
                < 1e-12
        );
        let lopsided = GaussianMixture2::new(0.999, 0.0, 1.0, 0.001, 0.1, 1.0).unwrap();
        assert_eq!(bayes_threshold_clean(&lopsided), Err(Error::NoCrossing));
    }

    #[test]
    fn metric_values() {
        let m = RestorationModel::reference();
        assert!((m.mse(2.0 / 3.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.mse(0.0), 2.0);
        assert!((m.error_rate(0.5).unwrap() - 0.204_117).abs() < 1e-6);
        assert!(m.error_rate(0.0).is_err());
        let clean = RestorationModel::reference_with_noise(0.0).unwrap();
        assert_eq!(clean.mse(1.0), 0.0);
        assert!((clean.error_rate(1.0).unwrap() - 0.138_749).abs() < 1e-6);
        assert!(clean.kl(1.0).unwrap() < 1e-7);
    }

    #[test]
    fn narrow_restoration_has_finite_kl() {
        let m = RestorationModel::reference();
        let kl = m.kl(0.02).unwrap();
        assert!(kl.is_finite() && kl > 1.0);
    }
}
