//! Subcommand handlers.

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use rdpc_core::closed_form::{rdc_binary, rdc_gaussian, rpc_binary, rpc_gaussian};
use rdpc_core::oracle::{binary_min_rate, gaussian_min_rate, BinaryOracleConfig, Constraints, GaussianOracleConfig};
use rdpc_core::restoration::{frontier, linspace, sweep, Metric, RestorationModel};
use rdpc_core::rpc_given_d::{pc_frontier_given_rd, rate_given_pcd};
use rdpc_core::{BinaryPairSource, GaussianPairSource, TradeoffPoint, Unit};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::config::{FileConfig, Settings};
use crate::output::{emit, fmt_g9, num, to_json, unit_name, Csv, PointJson, TOOL_VERSION};
use crate::plot::{write_script, PlotKind};
use crate::verify::{self, Suite};

/// Process outcome, mapped to the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A verification suite failed.
    Failed,
    /// The requested instance has no feasible reconstruction.
    Infeasible,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Infeasible => 2,
        }
    }
}

pub const DEFAULT_A: f64 = 0.3;
pub const DEFAULT_P1: f64 = 0.1;
pub const DEFAULT_SIGMA_X: f64 = 1.0;
pub const DEFAULT_SIGMA_S: f64 = 0.7;
pub const DEFAULT_THETA1: f64 = 0.63;
pub const DEFAULT_PINNED_D: [f64; 3] = [0.5, 0.6, 0.8];

pub fn run(cli: Cli) -> Result<Status> {
    let cfg = match &cli.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let settings = Settings::resolve(&cli.common, &cfg)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(settings.workers).build()?;
    let ctx = Ctx { cfg, settings };
    pool.install(|| ctx.dispatch(cli.command))
}

/// Default ranges and evaluator of a surface, per source family.
struct SurfacePlan {
    rdc_x: (f64, f64),
    rpc_x: (f64, f64),
    c: (f64, f64),
    eval: Box<dyn Fn(Program, f64, f64) -> rdpc_core::Result<TradeoffPoint> + Sync>,
}

struct Ctx {
    cfg: FileConfig,
    settings: Settings,
}

fn need(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| anyhow!("missing --{flag} (flag or config key)"))
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn grid(lo: f64, hi: f64, steps: usize, what: &str) -> Result<Vec<f64>> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        bail!("{what} range [{lo}, {hi}] must be finite and sorted");
    }
    if steps == 0 {
        bail!("{what} steps must be at least 1");
    }
    Ok(linspace(lo, hi, steps))
}

impl Ctx {
    fn dispatch(&self, command: Command) -> Result<Status> {
        match command {
            Command::Rdc { family } => match family {
                PointFamily::Binary { src, bound } => {
                    let (s, mut inputs) = self.binary(&src)?;
                    let (d, c) = (need(bound.d.or(self.d_single()?), "d")?, need(bound.c.or(self.cfg.c), "c")?);
                    inputs.extend(object(json!({ "d": d, "c": c })));
                    self.points(inputs, &[rdc_binary(&s, d, c)?])
                }
                PointFamily::Gaussian { src, bound } => {
                    let (g, mut inputs) = self.gaussian(&src)?;
                    let (d, c) = (need(bound.d.or(self.d_single()?), "d")?, need(bound.c.or(self.cfg.c), "c")?);
                    inputs.extend(object(json!({ "d": d, "c": c })));
                    self.points(inputs, &[rdc_gaussian(&g, d, c)?])
                }
            },
            Command::Rpc { family } => match family {
                PointFamily::Binary { src, bound } => {
                    let (s, mut inputs) = self.binary(&src)?;
                    let (p, c) = (need(bound.p.or(self.cfg.p), "p")?, need(bound.c.or(self.cfg.c), "c")?);
                    inputs.extend(object(json!({ "p": num(p), "c": c })));
                    self.points(inputs, &[rpc_binary(&s, p, c)?])
                }
                PointFamily::Gaussian { src, bound } => {
                    let (g, mut inputs) = self.gaussian(&src)?;
                    let (p, c) = (need(bound.p.or(self.cfg.p), "p")?, need(bound.c.or(self.cfg.c), "c")?);
                    inputs.extend(object(json!({ "p": num(p), "c": c })));
                    self.points(inputs, &[rpc_gaussian(&g, p, c)?])
                }
            },
            Command::RpcGivenD(args) => self.rpc_given_d(&args),
            Command::Surface { family } => self.surface(family),
            Command::Oracle { family } => self.oracle(family),
            Command::Restore(args) => self.restore(&args),
            Command::Verify(args) => self.verify(&args),
        }
    }

    fn d_single(&self) -> Result<Option<f64>> {
        self.cfg.d.as_ref().map(|d| d.single()).transpose()
    }

    fn check_units(&self, native: Unit) -> Result<()> {
        let requested = match self.settings.units {
            None => return Ok(()),
            Some(UnitArg::Bits) => Unit::Bits,
            Some(UnitArg::Nats) => Unit::Nats,
        };
        if requested != native {
            bail!("--units {} does not match the source family ({} only)", unit_name(requested), unit_name(native));
        }
        Ok(())
    }

    fn plot_guard(&self, kind: Option<PlotKind>) -> Result<()> {
        if self.settings.emit_plot_script && kind.is_none() {
            bail!("--emit-plot-script is only available for dataset outputs (surface, restore, rpc-given-d --rate)");
        }
        Ok(())
    }

    fn deliver(&self, text: &str, kind: Option<PlotKind>) -> Result<()> {
        emit(text, self.settings.out.as_deref())?;
        if let (true, Some(kind), Some(out)) = (self.settings.emit_plot_script, kind, self.settings.out.as_deref()) {
            write_script(kind, out)?;
        }
        Ok(())
    }

    fn binary(&self, a: &BinarySourceArgs) -> Result<(BinaryPairSource, Map<String, Value>)> {
        self.check_units(Unit::Bits)?;
        let av = a.a.or(self.cfg.a).unwrap_or(DEFAULT_A);
        let p1 = a.p1.or(self.cfg.p1).unwrap_or(DEFAULT_P1);
        let src = BinaryPairSource::new(av, p1).context("binary source")?;
        Ok((src, object(json!({ "family": "binary", "a": av, "p1": p1 }))))
    }

    fn gaussian(&self, g: &GaussianSourceArgs) -> Result<(GaussianPairSource, Map<String, Value>)> {
        self.check_units(Unit::Nats)?;
        let sx = g.sigma_x.or(self.cfg.sigma_x).unwrap_or(DEFAULT_SIGMA_X);
        let ss = g.sigma_s.or(self.cfg.sigma_s).unwrap_or(DEFAULT_SIGMA_S);
        let t1 = g.theta1.or(self.cfg.theta1).unwrap_or(DEFAULT_THETA1);
        let mx = g.mu_x.or(self.cfg.mu_x).unwrap_or(0.0);
        let ms = g.mu_s.or(self.cfg.mu_s).unwrap_or(0.0);
        let src = GaussianPairSource::new(mx, ms, sx * sx, ss * ss, t1).context("Gaussian source")?;
        let inputs = json!({
            "family": "gaussian", "sigma_x": sx, "sigma_s": ss, "theta1": t1, "mu_x": mx, "mu_s": ms,
        });
        Ok((src, object(inputs)))
    }

    /// Point results: a JSON object (array for several), or one CSV row each.
    fn points(&self, inputs: Map<String, Value>, pts: &[TradeoffPoint]) -> Result<Status> {
        self.plot_guard(None)?;
        let text = match self.settings.format_or(Format::Json) {
            Format::Json => {
                let objs: Vec<PointJson> = pts
                    .iter()
                    .map(|pt| {
                        let mut inp = inputs.clone();
                        if let Some(d) = pt.d {
                            inp.insert("d".into(), num(d));
                        }
                        PointJson::new(inp, pt)
                    })
                    .collect();
                match objs.as_slice() {
                    [one] => to_json(one)?,
                    many => to_json(&many)?,
                }
            }
            Format::Csv => {
                let mut csv = Csv::new(&["d", "p", "c", "rate", "unit", "region", "feasible"]);
                let opt = |v: Option<f64>| fmt_g9(v.unwrap_or(f64::NAN));
                for pt in pts {
                    csv.row(&[
                        opt(pt.d),
                        opt(pt.p),
                        fmt_g9(pt.c.value),
                        fmt_g9(pt.rate.value),
                        unit_name(pt.rate.unit).into(),
                        pt.region.as_str().into(),
                        pt.feasible.to_string(),
                    ]);
                }
                csv.finish()
            }
        };
        self.deliver(&text, None)?;
        Ok(if pts.iter().all(|p| p.feasible) { Status::Ok } else { Status::Infeasible })
    }

    fn surface(&self, family: SurfaceFamily) -> Result<Status> {
        self.plot_guard(Some(PlotKind::Surface))?;
        let (g_args, plan) = match family {
            SurfaceFamily::Binary { src, grid } => {
                let (s, _) = self.binary(&src)?;
                let eval = move |prog: Program, x: f64, c: f64| match prog {
                    Program::Rdc => rdc_binary(&s, x, c),
                    Program::Rpc => rpc_binary(&s, x, c),
                };
                (grid, SurfacePlan { rdc_x: (0.0, 0.5), rpc_x: (0.0, 0.5), c: (0.0, 1.0), eval: Box::new(eval) })
            }
            SurfaceFamily::Gaussian { src, grid } => {
                let (g, _) = self.gaussian(&src)?;
                let v = g.var_x();
                let c = (g.floor_c(), g.h_s() + 0.2);
                let eval = move |prog: Program, x: f64, c: f64| match prog {
                    Program::Rdc => rdc_gaussian(&g, x, c),
                    Program::Rpc => rpc_gaussian(&g, x, c),
                };
                (grid, SurfacePlan { rdc_x: (0.01 * v, 1.5 * v), rpc_x: (0.0, 1.0), c, eval: Box::new(eval) })
            }
        };
        let program = g_args.program.or(self.cfg.program).unwrap_or(Program::Rdc);
        let (x_lo, x_hi) = match program {
            Program::Rdc => plan.rdc_x,
            Program::Rpc => plan.rpc_x,
        };
        let (c_range, eval) = (plan.c, plan.eval);
        let xs = grid(
            g_args.x_min.or(self.cfg.x_min).unwrap_or(x_lo),
            g_args.x_max.or(self.cfg.x_max).unwrap_or(x_hi),
            g_args.x_steps.or(self.cfg.x_steps).unwrap_or(100),
            "x",
        )?;
        let cs = grid(
            g_args.c_min.or(self.cfg.c_min).unwrap_or(c_range.0),
            g_args.c_max.or(self.cfg.c_max).unwrap_or(c_range.1),
            g_args.c_steps.or(self.cfg.c_steps).unwrap_or(100),
            "c",
        )?;
        let cells: Vec<(f64, f64)> = xs.iter().flat_map(|&x| cs.iter().map(move |&c| (x, c))).collect();
        let pts: Vec<TradeoffPoint> = cells.par_iter().map(|&(x, c)| eval(program, x, c)).collect::<Result<_, _>>()?;

        #[derive(Serialize)]
        struct Row<'a> {
            d_or_p: Value,
            c: f64,
            rate: Value,
            unit: &'a str,
            region: &'a str,
            feasible: bool,
        }
        let text = match self.settings.format_or(Format::Csv) {
            Format::Csv => {
                let mut csv = Csv::new(&["d_or_p", "c", "rate", "unit", "region", "feasible"]);
                for (&(x, c), pt) in cells.iter().zip(&pts) {
                    csv.row(&[
                        fmt_g9(x),
                        fmt_g9(c),
                        fmt_g9(pt.rate.value),
                        unit_name(pt.rate.unit).into(),
                        pt.region.as_str().into(),
                        pt.feasible.to_string(),
                    ]);
                }
                csv.finish()
            }
            Format::Json => {
                let rows: Vec<Row> = cells
                    .iter()
                    .zip(&pts)
                    .map(|(&(x, c), pt)| Row {
                        d_or_p: num(x),
                        c,
                        rate: num(pt.rate.value),
                        unit: unit_name(pt.rate.unit),
                        region: pt.region.as_str(),
                        feasible: pt.feasible,
                    })
                    .collect();
                to_json(&rows)?
            }
        };
        self.deliver(&text, Some(PlotKind::Surface))?;
        Ok(Status::Ok)
    }

    fn oracle(&self, family: OracleFamily) -> Result<Status> {
        self.plot_guard(None)?;
        if self.settings.format == Some(Format::Csv) {
            bail!("oracle results are JSON only");
        }
        let constraints = |b: &OracleBounds| -> Result<Constraints> {
            Ok(Constraints { d: b.d.or(self.d_single()?), p: b.p.or(self.cfg.p), c: b.c.or(self.cfg.c) })
        };
        let refine = |b: &OracleBounds| !(b.no_refine || self.cfg.no_refine.unwrap_or(false));
        let (inputs, outcome, closed) = match family {
            OracleFamily::Binary { src, bounds, resolution } => {
                let (s, mut inputs) = self.binary(&src)?;
                let k = constraints(&bounds)?;
                let cfg = BinaryOracleConfig {
                    resolution: resolution.or(self.cfg.resolution).unwrap_or(1e-3),
                    refine: refine(&bounds),
                };
                inputs.extend(object(json!({ "constraints": k, "config": cfg })));
                let closed = match (k.d, k.p, k.c) {
                    (Some(d), None, Some(c)) => Some(("rdc", rdc_binary(&s, d, c)?)),
                    (None, Some(p), Some(c)) => Some(("rpc", rpc_binary(&s, p, c)?)),
                    _ => None,
                };
                (inputs, binary_min_rate(&s, &k, &cfg)?, closed)
            }
            OracleFamily::Gaussian { src, bounds, sigma_steps, theta_steps } => {
                let (g, mut inputs) = self.gaussian(&src)?;
                let k = constraints(&bounds)?;
                let cfg = GaussianOracleConfig {
                    sigma_steps: sigma_steps.or(self.cfg.sigma_steps).unwrap_or(1001),
                    theta_steps: theta_steps.or(self.cfg.theta_steps).unwrap_or(1001),
                    refine: refine(&bounds),
                };
                inputs.extend(object(json!({ "constraints": k, "config": cfg })));
                let closed = match (k.d, k.p, k.c) {
                    (Some(d), None, Some(c)) => Some(("rdc", rdc_gaussian(&g, d, c)?)),
                    (None, Some(p), Some(c)) => Some(("rpc", rpc_gaussian(&g, p, c)?)),
                    _ => None,
                };
                (inputs, gaussian_min_rate(&g, &k, &cfg)?, closed)
            }
        };
        let status = if outcome.solved().is_some() { Status::Ok } else { Status::Infeasible };
        let closed =
            closed.map(|(program, pt)| json!({ "program": program, "rate": num(pt.rate.value), "region": pt.region }));
        let report = json!({
            "inputs": inputs,
            "outcome": outcome,
            "closed_form": closed,
            "tool_version": TOOL_VERSION,
        });
        self.deliver(&to_json(&report)?, None)?;
        Ok(status)
    }

    fn rpc_given_d(&self, args: &RpcGivenDArgs) -> Result<Status> {
        let (g, inputs) = self.gaussian(&args.src)?;
        let ds: Vec<f64> = if !args.d.is_empty() {
            args.d.clone()
        } else if let Some(d) = &self.cfg.d {
            d.to_vec()
        } else {
            DEFAULT_PINNED_D.to_vec()
        };
        let Some(rate) = args.rate.or(self.cfg.rate) else {
            let p = args.p.or(self.cfg.p).unwrap_or(f64::INFINITY);
            let c = need(args.c.or(self.cfg.c), "c (or --rate for a frontier)")?;
            let pts: Vec<TradeoffPoint> = ds.iter().map(|&d| rate_given_pcd(&g, d, p, c)).collect::<Result<_, _>>()?;
            let mut inputs = inputs;
            inputs.extend(object(json!({ "p": num(p), "c": c })));
            return self.points(inputs, &pts);
        };
        self.plot_guard(Some(PlotKind::PcFrontier))?;
        let cs = grid(
            args.c_min.or(self.cfg.c_min).unwrap_or(g.floor_c()),
            args.c_max.or(self.cfg.c_max).unwrap_or(g.h_s()),
            args.c_steps.or(self.cfg.c_steps).unwrap_or(50),
            "c",
        )?;
        let frontiers = ds
            .iter()
            .map(|&d| pc_frontier_given_rd(&g, d, rate, &cs).map(|rows| (d, rows)))
            .collect::<Result<Vec<_>, _>>()?;
        let text = match self.settings.format_or(Format::Csv) {
            Format::Csv => {
                let multi = ds.len() > 1;
                let mut header = vec!["C_nats", "min_P_nats", "rate_nats", "sigma_xh"];
                if multi {
                    header.insert(0, "D");
                }
                let mut csv = Csv::new(&header);
                let opt = |v: Option<f64>| fmt_g9(v.unwrap_or(f64::NAN));
                for (d, rows) in &frontiers {
                    for r in rows {
                        let mut fields = vec![fmt_g9(r.c), opt(r.min_p), opt(r.rate), opt(r.sigma_xh)];
                        if multi {
                            fields.insert(0, fmt_g9(*d));
                        }
                        csv.row(&fields);
                    }
                }
                csv.finish()
            }
            Format::Json => {
                let out: Vec<Value> = frontiers.iter().map(|(d, rows)| json!({ "d": d, "rows": rows })).collect();
                to_json(
                    &json!({ "inputs": inputs, "rate_level": rate, "unit": "nats", "frontiers": out, "tool_version": TOOL_VERSION }),
                )?
            }
        };
        self.deliver(&text, Some(PlotKind::PcFrontier))?;
        Ok(Status::Ok)
    }

    fn restore(&self, args: &RestoreArgs) -> Result<Status> {
        if self.settings.units == Some(UnitArg::Bits) {
            bail!("restoration KL is reported in nats");
        }
        let sigma_n = args.sigma_n.or(self.cfg.sigma_n).unwrap_or(1.0);
        let model = RestorationModel::reference_with_noise(sigma_n)?;
        let (a_lo, a_hi) =
            (args.a_min.or(self.cfg.a_min).unwrap_or(0.05), args.a_max.or(self.cfg.a_max).unwrap_or(1.5));
        let steps = args.a_steps.or(self.cfg.a_steps).unwrap_or(200);
        let gains = grid(a_lo, a_hi, steps, "a")?;
        if gains.contains(&0.0) {
            bail!("the gain grid must exclude a = 0");
        }
        let metric = |m: MetricArg| match m {
            MetricArg::Mse => Metric::Mse,
            MetricArg::Kl => Metric::Kl,
            MetricArg::ErrorRate => Metric::ErrorRate,
        };
        match (args.minimize.or(self.cfg.minimize), args.subject_to.or(self.cfg.subject_to)) {
            (None, None) => {
                self.plot_guard(Some(PlotKind::RestoreCurve))?;
                let pts = sweep(&model, &gains)?;
                let text = match self.settings.format_or(Format::Csv) {
                    Format::Csv => {
                        let mut csv = Csv::new(&["a", "mse", "kl_nats", "error_rate"]);
                        for p in &pts {
                            csv.row(&[fmt_g9(p.a), fmt_g9(p.mse), fmt_g9(p.kl), fmt_g9(p.error_rate)]);
                        }
                        csv.finish()
                    }
                    Format::Json => {
                        let rows: Vec<Value> = pts
                            .iter()
                            .map(
                                |p| json!({ "a": p.a, "mse": p.mse, "kl_nats": num(p.kl), "error_rate": p.error_rate }),
                            )
                            .collect();
                        to_json(&rows)?
                    }
                };
                self.deliver(&text, Some(PlotKind::RestoreCurve))?;
            }
            (Some(min), Some(sub)) => {
                self.plot_guard(Some(PlotKind::RestoreFrontier))?;
                let (min, sub) = (metric(min), metric(sub));
                let bound_steps = args.bound_steps.or(self.cfg.bound_steps).unwrap_or(50);
                let (b_lo, b_hi) = match (args.bound_min.or(self.cfg.bound_min), args.bound_max.or(self.cfg.bound_max))
                {
                    (Some(lo), Some(hi)) => (lo, hi),
                    (lo, hi) => {
                        let vals: Vec<f64> = sweep(&model, &gains)?.iter().map(|p| sub.of(p)).collect();
                        let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                        let vmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        (lo.unwrap_or(vmin), hi.unwrap_or(vmax))
                    }
                };
                let bounds = grid(b_lo, b_hi, bound_steps, "bound")?;
                let f = frontier(&model, min, sub, &bounds, (a_lo, a_hi), steps)?;
                let text = match self.settings.format_or(Format::Csv) {
                    Format::Csv => {
                        let mut csv = Csv::new(&["bound", "value", "gain"]);
                        let opt = |v: Option<f64>| fmt_g9(v.unwrap_or(f64::NAN));
                        for p in &f {
                            csv.row(&[fmt_g9(p.bound), opt(p.value), opt(p.gain)]);
                        }
                        csv.finish()
                    }
                    Format::Json => to_json(&f)?,
                };
                self.deliver(&text, Some(PlotKind::RestoreFrontier))?;
            }
            _ => bail!("--minimize and --subject-to must be given together"),
        }
        Ok(Status::Ok)
    }

    fn verify(&self, args: &VerifyArgs) -> Result<Status> {
        self.plot_guard(None)?;
        if self.settings.format == Some(Format::Csv) {
            bail!("the verification report is JSON only");
        }
        let suites: Vec<Suite> = if !args.suite.is_empty() {
            args.suite.clone()
        } else {
            self.cfg.suite.clone().unwrap_or_else(|| Suite::ALL.to_vec())
        };
        let report = verify::run(&suites, self.settings.seed)?;
        self.deliver(&to_json(&report)?, None)?;
        Ok(if report.passed { Status::Ok } else { Status::Failed })
    }
}
