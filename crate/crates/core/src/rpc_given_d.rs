//! Minimal Gaussian rate under perception and classification constraints
//! with the distortion pinned to an exact level, `R(P, C | D)`.
//!
//! With `μ_x̂ = μx` and `MSE = D` the covariance is forced to
//! `θ2 = (σx² + σ_x̂² − D)/2`, leaving a one-dimensional problem in `σ_x̂`.
//! Valid reconstructions satisfy `|θ2| ≤ σx·σ_x̂`, i.e.
//! `|σx − √D| ≤ σ_x̂ ≤ σx + √D`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{GaussianReconstruction, Witness};
use crate::closed_form::{Region, TradeoffPoint};
use crate::entropy::EntropyValue;
use crate::error::{domain, Result};
use crate::optimize::golden_section_min;
use crate::serde_ext::{ext_f64, ext_f64_opt};
use crate::sources::GaussianPairSource;

/// Number of scan points over the valid `σ_x̂` interval.
pub const SCAN_POINTS: usize = 100_000;
/// Golden-section tolerance in `σ_x̂`.
pub const REFINE_TOL: f64 = 1e-10;
/// Rates closer than this count as a tie, settled by the smaller perception.
pub const RATE_TIE: f64 = 1e-9;
/// Constraint tolerance.
pub const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub sigma_xh: f64,
    pub theta2: f64,
    #[serde(with = "ext_f64")]
    pub rate: f64,
    #[serde(with = "ext_f64")]
    pub perception_kl: f64,
    pub cond_entropy_s: f64,
}

impl ScanPoint {
    pub fn feasible_for(&self, p: f64, c: f64) -> bool {
        self.perception_kl <= p + TOL && self.cond_entropy_s <= c + TOL
    }
}

/// The scan for one source and distortion level, reusable across `(P, C)`.
#[derive(Debug, Clone)]
pub struct PinnedScan {
    src: GaussianPairSource,
    d: f64,
    lo: f64,
    hi: f64,
    points: Vec<ScanPoint>,
}

impl PinnedScan {
    pub fn new(src: &GaussianPairSource, d: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(domain("pinned distortion", d));
        }
        let sx = src.sigma_x();
        let lo = (sx - d.sqrt()).abs();
        let hi = sx + d.sqrt();
        let mut nodes: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| if i + 1 == SCAN_POINTS { hi } else { lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64 })
            .collect();
        // Zero perception (s = σx) and zero rate (θ2 = 0) are represented exactly.
        let mut exact = vec![sx];
        if d >= src.var_x() {
            exact.push((d - src.var_x()).sqrt());
        }
        for node in exact {
            if let Err(pos) = nodes.binary_search_by(|v| v.total_cmp(&node)) {
                nodes.insert(pos, node);
            }
        }
        let mut scan = Self { src: *src, d, lo, hi, points: Vec::new() };
        scan.points = nodes.iter().map(|&s| scan.at(s)).collect();
        Ok(scan)
    }

    pub fn distortion(&self) -> f64 {
        self.d
    }

    pub fn points(&self) -> &[ScanPoint] {
        &self.points
    }

    /// Evaluates the pinned reconstruction with standard deviation `s`.
    pub fn at(&self, s: f64) -> ScanPoint {
        let sx = self.src.sigma_x();
        let var_x = self.src.var_x();
        let theta2 = 0.5 * (var_x + s * s - self.d);
        if s <= 0.0 {
            // Only reachable when D = σx²; then θ2 = 0 and X̂ is constant.
            return ScanPoint {
                sigma_xh: 0.0,
                theta2: 0.0,
                rate: 0.0,
                perception_kl: f64::INFINITY,
                cond_entropy_s: self.src.h_s(),
            };
        }
        let t2 = (theta2 / (sx * s)).powi(2).min(1.0);
        let rho = self.src.rho();
        let ratio = s * s / var_x;
        ScanPoint {
            sigma_xh: s,
            theta2,
            rate: -0.5 * (-t2).ln_1p(),
            perception_kl: (0.5 * ratio.ln() + 0.5 * (1.0 / ratio - 1.0)).max(0.0),
            cond_entropy_s: self.src.h_s() + 0.5 * (-(rho * rho * t2)).ln_1p(),
        }
    }

    /// Minimal rate over the scan for perception bound `p` (`+inf` allowed)
    /// and classification bound `c`, refined by golden section on each
    /// feasible arc. `None` when no scan point is feasible.
    pub fn solve(&self, p: f64, c: f64) -> Option<ScanPoint> {
        let feasible_rate = |s: f64| {
            let q = self.at(s.clamp(self.lo, self.hi));
            if q.feasible_for(p, c) {
                q.rate
            } else {
                f64::INFINITY
            }
        };
        let mut candidates: Vec<ScanPoint> = Vec::new();
        let n = self.points.len();
        let mut i = 0;
        while i < n {
            if !self.points[i].feasible_for(p, c) {
                i += 1;
                continue;
            }
            let start = i;
            let mut best = i;
            while i < n && self.points[i].feasible_for(p, c) {
                if self.points[i].rate < self.points[best].rate {
                    best = i;
                }
                i += 1;
            }
            let raw = self.points[best];
            let a = self.points[best.saturating_sub(1)].sigma_xh;
            let b = self.points[(best + 1).min(n - 1)].sigma_xh;
            let (s, r) = golden_section_min(feasible_rate, a, b, REFINE_TOL);
            let refined = if r < raw.rate { self.at(s) } else { raw };
            debug_assert!(refined.rate <= raw.rate && refined.feasible_for(p, c));
            candidates.push(refined);
            // Equal-rate points elsewhere on the arc may have lower perception.
            let tied = (start..i)
                .filter(|&k| self.points[k].rate <= refined.rate + RATE_TIE)
                .min_by(|&x, &y| self.points[x].perception_kl.total_cmp(&self.points[y].perception_kl));
            if let Some(k) = tied {
                candidates.push(self.points[k]);
            }
        }
        let min_rate = candidates.iter().map(|q| q.rate).min_by(f64::total_cmp)?;
        candidates
            .into_iter()
            .filter(|q| q.rate <= min_rate + RATE_TIE)
            .min_by(|x, y| x.perception_kl.total_cmp(&y.perception_kl).then(x.rate.total_cmp(&y.rate)))
    }

    fn to_point(&self, p: f64, c: f64, sol: Option<ScanPoint>) -> TradeoffPoint {
        let Some(q) = sol else {
            return TradeoffPoint {
                d: Some(self.d),
                p: Some(p),
                c: EntropyValue::nats(c),
                rate: EntropyValue::nats(f64::INFINITY),
                feasible: false,
                region: Region::Infeasible,
                witness: None,
            };
        };
        let region = if q.rate <= RATE_TIE {
            Region::ZeroRate
        } else if p.is_finite() && q.perception_kl >= p - 1e-9 {
            Region::PerceptionLimited
        } else if q.cond_entropy_s >= c - 1e-9 {
            Region::ClassificationLimited
        } else {
            Region::DistortionLimited
        };
        let witness = GaussianReconstruction::new(self.src.mu_x(), q.sigma_xh * q.sigma_xh, q.theta2).ok();
        TradeoffPoint {
            d: Some(self.d),
            p: Some(p),
            c: EntropyValue::nats(c),
            rate: EntropyValue::nats(q.rate),
            feasible: true,
            region,
            witness: witness.map(Witness::Gaussian),
        }
    }
}

/// `R(P, C | D)` in nats. `p = +inf` leaves perception unconstrained.
pub fn rate_given_pcd(src: &GaussianPairSource, d: f64, p: f64, c: f64) -> Result<TradeoffPoint> {
    if p.is_nan() || p < 0.0 {
        return Err(domain("perception bound", p));
    }
    if c.is_nan() {
        return Err(domain("classification bound", c));
    }
    let scan = PinnedScan::new(src, d)?;
    Ok(scan.to_point(p, c, scan.solve(p, c)))
}

/// Same as [`rate_given_pcd`] on a prebuilt scan.
pub fn rate_given_pcd_on(scan: &PinnedScan, p: f64, c: f64) -> TradeoffPoint {
    scan.to_point(p, c, scan.solve(p, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcFrontierRow {
    pub c: f64,
    /// Smallest perception bound reaching the rate level; `None` if even an
    /// unconstrained perception cannot.
    #[serde(with = "ext_f64_opt")]
    pub min_p: Option<f64>,
    #[serde(with = "ext_f64_opt")]
    pub rate: Option<f64>,
    #[serde(with = "ext_f64_opt")]
    pub sigma_xh: Option<f64>,
}

impl PcFrontierRow {
    pub fn feasible(&self) -> bool {
        self.min_p.is_some()
    }
}

/// For each `C`, the least `P` with `R(P, C | D) ≤ rate_level`, by bisection
/// on `P` between 0 and the perception of the unconstrained solution.
pub fn pc_frontier_given_rd(
    src: &GaussianPairSource,
    d: f64,
    rate_level: f64,
    c_grid: &[f64],
) -> Result<Vec<PcFrontierRow>> {
    if rate_level.is_nan() || rate_level < 0.0 {
        return Err(domain("rate level", rate_level));
    }
    let scan = PinnedScan::new(src, d)?;
    Ok(c_grid.par_iter().map(|&c| frontier_row(&scan, rate_level, c)).collect())
}

fn frontier_row(scan: &PinnedScan, rate_level: f64, c: f64) -> PcFrontierRow {
    let target = rate_level + RATE_TIE;
    let row =
        |p: f64, q: ScanPoint| PcFrontierRow { c, min_p: Some(p), rate: Some(q.rate), sigma_xh: Some(q.sigma_xh) };
    let reaches = |p: f64| scan.solve(p, c).filter(|q| q.rate <= target);
    let Some(free) = reaches(f64::INFINITY) else {
        return PcFrontierRow { c, min_p: None, rate: None, sigma_xh: None };
    };
    if let Some(q) = reaches(0.0) {
        return row(0.0, q);
    }
    let (mut lo, mut hi) = (0.0, free.perception_kl);
    let mut best = free;
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.max(1e-12) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match reaches(mid) {
            Some(q) => {
                hi = mid;
                best = q;
            }
            None => lo = mid,
        }
    }
    row(hi, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src() -> GaussianPairSource {
        GaussianPairSource::from_std(1.0, 0.7, 0.63).unwrap()
    }

    #[test]
    fn spot_check_picks_low_perception_root() {
        let g = src();
        let pt = rate_given_pcd(&g, 0.5, f64::INFINITY, g.h_s() - 0.3).unwrap();
        assert!((pt.rate.value - 0.407_118).abs() < 1e-6, "{}", pt.rate.value);
        let Some(Witness::Gaussian(w)) = pt.witness else { panic!() };
        assert!((w.var_xh().sqrt() - 0.985_134).abs() < 1e-5, "{}", w.var_xh().sqrt());
        assert_eq!(pt.region, Region::ClassificationLimited);
    }

    #[test]
    fn independent_reconstruction_at_twice_the_variance() {
        let g = src();
        let scan = PinnedScan::new(&g, 2.0).unwrap();
        let q = scan.solve(0.0, g.h_s()).unwrap();
        assert_eq!(q.rate, 0.0);
        assert_eq!(q.sigma_xh, 1.0);
        assert_eq!(q.theta2, 0.0);
        assert_eq!(q.perception_kl, 0.0);
    }

    #[test]
    fn rejects_non_positive_distortion() {
        assert!(PinnedScan::new(&src(), 0.0).is_err());
        assert!(rate_given_pcd(&src(), 0.5, -1.0, 1.0).is_err());
    }
}
