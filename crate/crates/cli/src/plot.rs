//! Matplotlib scripts that redraw an emitted CSV.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Surface,
    RestoreCurve,
    RestoreFrontier,
    PcFrontier,
}

pub fn script_path(csv: &Path) -> PathBuf {
    csv.with_extension("py")
}

fn body(kind: PlotKind) -> &'static str {
    match kind {
        PlotKind::Surface => {
            r#"ok = [r for r in rows if r["feasible"] == "true" and r["rate"] != "inf"]
x = [float(r["d_or_p"]) for r in ok]
c = [float(r["c"]) for r in ok]
z = [float(r["rate"]) for r in ok]
fig, ax = plt.subplots()
cs = ax.tricontourf(x, c, z, levels=20)
ax.tricontour(x, c, z, levels=20, colors="k", linewidths=0.4)
fig.colorbar(cs, label="rate (" + rows[0]["unit"] + ")")
ax.set_xlabel("D or P")
ax.set_ylabel("C")
"#
        }
        PlotKind::RestoreCurve => {
            r#"a = [float(r["a"]) for r in rows]
fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
for ax, key, label in zip(axes, ["mse", "kl_nats", "error_rate"], ["MSE", "KL (nats)", "error rate"]):
    ax.plot(a, [float(r[key]) for r in rows])
    ax.set_xlabel("a")
    ax.set_ylabel(label)
"#
        }
        PlotKind::RestoreFrontier => {
            r#"ok = [r for r in rows if r["value"] != "nan"]
fig, ax = plt.subplots()
ax.plot([float(r["bound"]) for r in ok], [float(r["value"]) for r in ok], marker=".")
ax.set_xlabel("bound")
ax.set_ylabel("optimal value")
"#
        }
        PlotKind::PcFrontier => {
            r#"fig, ax = plt.subplots()
key = "D" if "D" in rows[0] else None
groups = {}
for r in rows:
    if r["min_P_nats"] != "nan":
        groups.setdefault(r[key] if key else "", []).append(r)
for d, rs in groups.items():
    ax.plot([float(r["min_P_nats"]) for r in rs], [float(r["C_nats"]) for r in rs], label=("D=" + d) if d else None)
if key:
    ax.legend()
ax.set_xlabel("P (nats)")
ax.set_ylabel("C (nats)")
"#
        }
    }
}

pub fn write_script(kind: PlotKind, csv: &Path) -> Result<PathBuf> {
    let name = csv.file_name().and_then(|n| n.to_str()).unwrap_or("data.csv");
    let png = Path::new(name).with_extension("png");
    let script = format!(
        "import csv\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n\
         here = os.path.dirname(os.path.abspath(__file__))\n\
         with open(os.path.join(here, {name:?})) as f:\n    rows = list(csv.DictReader(f))\n\n{}\
         fig.tight_layout()\nfig.savefig(os.path.join(here, {:?}), dpi=150)\n",
        body(kind),
        png.display().to_string(),
    );
    let path = script_path(csv);
    std::fs::write(&path, script).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
