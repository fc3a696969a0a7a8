//! CSV and JSON rendering.

use std::path::Path;

use anyhow::{Context, Result};
use rdpc_core::{ext_f64, Region, TradeoffPoint, Unit, Witness};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%.9g`: nine significant digits, trailing zeros trimmed, exponent form
/// outside `[1e-4, 1e9)`. Non-finite values print as `inf`, `-inf`, `nan`.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn unit_name(unit: Unit) -> &'static str {
    match unit {
        Unit::Bits => "bits",
        Unit::Nats => "nats",
    }
}

/// A small CSV builder; every field is numeric or a fixed identifier, so no
/// quoting is needed.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")) }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// JSON object for a single evaluated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub inputs: Map<String, Value>,
    #[serde(with = "ext_f64")]
    pub rate: f64,
    pub unit: String,
    pub feasible: bool,
    pub region: Region,
    pub witness: Option<Witness>,
    pub tool_version: String,
}

impl PointJson {
    pub fn new(inputs: Map<String, Value>, pt: &TradeoffPoint) -> Self {
        Self {
            inputs,
            rate: pt.rate.value,
            unit: unit_name(pt.rate.unit).into(),
            feasible: pt.feasible,
            region: pt.region,
            witness: pt.witness,
            tool_version: TOOL_VERSION.into(),
        }
    }
}

/// A JSON number, or the sentinel strings for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| Value::String(fmt_g9(x)))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // A closed reader (`| head`) is not an error of ours.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
    }
}
