//! Brute-force minimization of `I(X; X̂)` under distortion, perception and
//! classification constraints, independent of the closed forms.
//!
//! Binary reconstructions are searched over every channel `(p_a, p_b)`.
//! Gaussian reconstructions are searched over jointly Gaussian `X̂` only, with
//! `μ_x̂ = μx` (any mean offset worsens both distortion and perception and
//! leaves the rate unchanged); this restriction is part of every report.
//!
//! Grid evaluation runs on the ambient rayon pool. Results are identical for
//! any pool size.

pub mod search;
pub mod stats;

use serde::{Deserialize, Serialize};

use crate::channel::{BinaryChannel, GaussianReconstruction, Witness};
use crate::entropy::{h2, EntropyValue};
use crate::error::{Error, Result};
use crate::serde_ext::ext_f64_opt;
use crate::sources::{BinaryPairSource, GaussianPairSource};
use search::{minimize, Objective, Sample, CONSTRAINT_TOL};
use stats::{binary_channel_stats, binary_joint, gaussian_eval, gaussian_recon_stats, ChannelStats};

pub use search::REFINE_TOL;

/// Perception requests below this are executed at this level.
pub const MIN_PERCEPTION: f64 = 1e-6;

/// Requested upper bounds; `None` leaves a quantity unconstrained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    #[serde(with = "ext_f64_opt", default)]
    pub d: Option<f64>,
    #[serde(with = "ext_f64_opt", default)]
    pub p: Option<f64>,
    #[serde(with = "ext_f64_opt", default)]
    pub c: Option<f64>,
}

impl Constraints {
    fn validate(&self) -> Result<()> {
        if self.d.is_none() && self.p.is_none() && self.c.is_none() {
            return Err(Error::InvalidGrid("at least one constraint is required".into()));
        }
        for (what, v) in [("distortion bound", self.d), ("perception bound", self.p)] {
            if let Some(v) = v {
                if v.is_nan() || v < 0.0 {
                    return Err(Error::Domain { what, value: v });
                }
            }
        }
        if self.c.is_some_and(f64::is_nan) {
            return Err(Error::Domain { what: "classification bound", value: f64::NAN });
        }
        Ok(())
    }

    /// The perception bound actually enforced.
    pub fn effective_p(&self) -> Option<f64> {
        self.p.map(|p| p.max(MIN_PERCEPTION))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryOracleConfig {
    /// Grid spacing in `(p_a, p_b)`, within `[1e-4, 1e-1]`.
    pub resolution: f64,
    pub refine: bool,
}

impl Default for BinaryOracleConfig {
    fn default() -> Self {
        Self { resolution: 1e-3, refine: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianOracleConfig {
    pub sigma_steps: usize,
    pub theta_steps: usize,
    pub refine: bool,
}

impl Default for GaussianOracleConfig {
    fn default() -> Self {
        Self { sigma_steps: 1001, theta_steps: 1001, refine: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub rate: EntropyValue,
    pub argmin: Witness,
    /// Stats of `argmin`, recomputed from scratch.
    pub stats: ChannelStats,
    /// Largest grid spacing of the search.
    pub grid_resolution: f64,
    pub refined: bool,
    /// Grid nodes meeting every constraint within the tight tolerance.
    pub feasible_points: usize,
    /// Perception bound after the `P = 0` substitution.
    #[serde(with = "ext_f64_opt")]
    pub perception_bound: Option<f64>,
    pub search_space: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OracleOutcome {
    Solved(OracleResult),
    Infeasible { grid_resolution: f64, search_space: String },
}

impl OracleOutcome {
    pub fn solved(&self) -> Option<&OracleResult> {
        match self {
            OracleOutcome::Solved(r) => Some(r),
            OracleOutcome::Infeasible { .. } => None,
        }
    }
}

const BINARY_SPACE: &str = "binary channels (p_a, p_b) in [0,1]^2";
const GAUSSIAN_SPACE: &str = "jointly Gaussian reconstructions with mean mu_x";

struct BinaryProblem {
    b: f64,
    h_b: f64,
    p1: f64,
    d: Option<f64>,
    p: Option<f64>,
    c: Option<f64>,
    /// Lipschitz constant of `H(S|X̂)` in the channel parameters, in bits.
    lip_c: f64,
}

impl Objective for BinaryProblem {
    fn domain(&self) -> [(f64, f64); 2] {
        [(0.0, 1.0), (0.0, 1.0)]
    }

    #[inline]
    fn eval(&self, pa: f64, pb: f64, hx: f64, hy: f64) -> Sample {
        let j = binary_joint(self.b, pa, pb);
        let (rate, _, h_s) = j.entropies(self.h_b, self.p1);
        // Distortion and TV are linear with coefficients (1-b, b) in (p_a, p_b).
        let lin = 0.5 * ((1.0 - self.b) * hx + self.b * hy);
        let mut viol = f64::NEG_INFINITY;
        let mut loose = true;
        let mut check = |v: f64, bound: Option<f64>, slack: f64| {
            if let Some(bd) = bound {
                viol = viol.max(v - bd);
                loose &= v <= bd + CONSTRAINT_TOL + slack;
            }
        };
        check(j.distortion, self.d, lin);
        check(j.tv, self.p, lin);
        check(h_s, self.c, self.lip_c * 0.5 * (hx + hy));
        Sample { rate, viol, loose }
    }
}

/// Minimal `I(X; X̂)` in bits over binary channels.
pub fn binary_min_rate(
    src: &BinaryPairSource,
    constraints: &Constraints,
    cfg: &BinaryOracleConfig,
) -> Result<OracleOutcome> {
    constraints.validate()?;
    if !(1e-4..=1e-1).contains(&cfg.resolution) {
        return Err(Error::InvalidGrid(format!("resolution {} outside [1e-4, 1e-1]", cfg.resolution)));
    }
    let n = (1.0 / cfg.resolution).round() as usize + 1;
    let b = src.b_raw();
    let p1 = src.p1();
    let problem = BinaryProblem {
        b,
        h_b: h2(b),
        p1,
        d: constraints.d,
        p: constraints.effective_p(),
        c: constraints.c,
        lip_c: 1.0 + (1.0 / p1.max(1e-6)).log2(),
    };
    let out = minimize(&problem, n, n, cfg.refine);
    let grid_resolution = 1.0 / (n - 1) as f64;
    let Some(best) = out.best else {
        return Ok(OracleOutcome::Infeasible { grid_resolution, search_space: BINARY_SPACE.into() });
    };
    let ch = BinaryChannel::new(best.x, best.y)?;
    let stats = binary_channel_stats(src, &ch);
    Ok(OracleOutcome::Solved(OracleResult {
        rate: stats.mutual_info,
        argmin: Witness::Binary(ch),
        stats,
        grid_resolution,
        refined: out.refined,
        feasible_points: out.feasible_points,
        perception_bound: problem.p,
        search_space: BINARY_SPACE.into(),
    }))
}

struct GaussianProblem {
    sigma_x: f64,
    rho: f64,
    s_max: f64,
    d: Option<f64>,
    p: Option<f64>,
    /// Required `I(S; X̂) ≥ h(S) − C`.
    label_info_min: Option<f64>,
}

impl Objective for GaussianProblem {
    fn domain(&self) -> [(f64, f64); 2] {
        [(0.0, self.s_max), (-1.0, 1.0)]
    }

    #[inline]
    fn eval(&self, s: f64, t: f64, hs: f64, ht: f64) -> Sample {
        let e = gaussian_eval(self.sigma_x, self.rho, s, t, 0.0);
        let mut viol = f64::NEG_INFINITY;
        let mut loose = true;
        if let Some(d) = self.d {
            let sx = self.sigma_x;
            let first = 0.5 * ((2.0 * s - 2.0 * t * sx).abs() * hs + 2.0 * sx * s * ht);
            let second = 0.25 * hs * hs + 0.5 * sx * hs * ht;
            viol = viol.max(e.mse - d);
            loose &= e.mse <= d + CONSTRAINT_TOL + first + second;
        }
        if let Some(p) = self.p {
            viol = viol.max(e.kl - p);
            // KL is unimodal in s with its minimum at σx: exact cell minimum.
            let s_near = self.sigma_x.clamp(s - 0.5 * hs, s + 0.5 * hs).max(0.0);
            let kl_min = gaussian_eval(self.sigma_x, self.rho, s_near, t, 0.0).kl;
            loose &= kl_min <= p + CONSTRAINT_TOL;
        }
        if let Some(need) = self.label_info_min {
            viol = viol.max(need - e.label_info);
            // I(S; X̂) grows with |t|: exact cell maximum.
            let t_far = (t.abs() + 0.5 * ht).min(1.0);
            let s_far = if s == 0.0 { 0.5 * hs } else { s };
            let best = gaussian_eval(self.sigma_x, self.rho, s_far, t_far, 0.0).label_info;
            loose &= best >= need - CONSTRAINT_TOL;
        }
        Sample { rate: e.rate, viol, loose }
    }
}

/// Rate and label information depend on `t` alone, so the minimizer is not
/// unique in `s`. Picks the closest `s` to `σx` (least KL) that keeps the
/// distortion bound, falling back to `s` if that point is not tight-feasible.
fn least_perception_sigma(problem: &GaussianProblem, s: f64, t: f64) -> f64 {
    let sx = problem.sigma_x;
    let mut target = sx;
    if let Some(d) = problem.d {
        // MSE = s² − 2tσx·s + σx² ≤ D.
        let disc = t * t * sx * sx - sx * sx + d;
        if disc < 0.0 {
            return s;
        }
        target = sx.clamp(t * sx - disc.sqrt(), t * sx + disc.sqrt()).clamp(0.0, problem.s_max);
    }
    let kl = |v: f64| gaussian_eval(sx, problem.rho, v, t, 0.0).kl;
    let cand = problem.eval(target, t, 0.0, 0.0);
    let base = problem.eval(s, t, 0.0, 0.0);
    if target > 0.0 && cand.tight() && cand.rate <= base.rate && kl(target) < kl(s) {
        target
    } else {
        s
    }
}

/// Minimal `I(X; X̂)` in nats over jointly Gaussian reconstructions.
pub fn gaussian_min_rate(
    src: &GaussianPairSource,
    constraints: &Constraints,
    cfg: &GaussianOracleConfig,
) -> Result<OracleOutcome> {
    constraints.validate()?;
    if cfg.sigma_steps < 3 || cfg.theta_steps < 3 {
        return Err(Error::InvalidGrid("need at least 3 steps along each axis".into()));
    }
    let sigma_x = src.sigma_x();
    let spread = constraints.d.unwrap_or(src.var_x()).sqrt();
    let s_max = sigma_x * (1.0 + (2.0 * spread).max(3.0));
    let problem = GaussianProblem {
        sigma_x,
        rho: src.rho(),
        s_max,
        d: constraints.d,
        p: constraints.effective_p(),
        label_info_min: constraints.c.map(|c| src.h_s() - c),
    };
    let out = minimize(&problem, cfg.sigma_steps, cfg.theta_steps, cfg.refine);
    let grid_resolution = (s_max / (cfg.sigma_steps - 1) as f64).max(2.0 / (cfg.theta_steps - 1) as f64);
    let Some(best) = out.best else {
        return Ok(OracleOutcome::Infeasible { grid_resolution, search_space: GAUSSIAN_SPACE.into() });
    };
    let (mut s, t) = (best.x, if best.x == 0.0 { 0.0 } else { best.y });
    if s > 0.0 {
        s = least_perception_sigma(&problem, s, t);
    }
    let rec = GaussianReconstruction::new(src.mu_x(), s * s, t * sigma_x * s)?;
    let stats = gaussian_recon_stats(src, &rec)?;
    Ok(OracleOutcome::Solved(OracleResult {
        rate: stats.mutual_info,
        argmin: Witness::Gaussian(rec),
        stats,
        grid_resolution,
        refined: out.refined,
        feasible_points: out.feasible_points,
        perception_bound: problem.p,
        search_space: GAUSSIAN_SPACE.into(),
    }))
}
