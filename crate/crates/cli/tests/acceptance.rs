//! Acceptance run: the full verification report at seed 0, evaluated
//! criterion by criterion. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rdpc_cli::verify::{Suite, SuiteResult, VerifyReport};

fn run_verify(workers: &str, out: &std::path::Path) -> (Vec<u8>, f64) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_rdpc"))
        .args(["verify", "--seed", "0", "--workers", workers, "--out"])
        .arg(out)
        .status()
        .expect("rdpc runs");
    let secs = start.elapsed().as_secs_f64();
    // Exit 1 just means some suite failed; the criteria below say which.
    assert!(matches!(status.code(), Some(0 | 1)), "verify crashed: {status}");
    (std::fs::read(out).expect("report written"), secs)
}

struct Ledger {
    failed: usize,
}

impl Ledger {
    fn line(&mut self, n: u32, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("criterion {n} {}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn value(s: &SuiteResult, name: &str) -> f64 {
    s.check(name).map_or(f64::NAN, |c| c.value)
}

fn checks_pass(s: &SuiteResult, prefix: &str) -> bool {
    let matching: Vec<_> = s.checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
    !matching.is_empty() && matching.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let (wide, wide_secs) = run_verify("8", &dir.path().join("w8.json"));
    let (single, single_secs) = run_verify("1", &dir.path().join("w1.json"));
    println!("verify --seed 0: {wide_secs:.1} s with 8 workers, {single_secs:.1} s with 1 worker");
    let report: VerifyReport = serde_json::from_slice(&wide).expect("report parses");
    let suite = |s: Suite| report.suite(s).unwrap_or_else(|| panic!("suite {} missing", s.name()));
    let mut ledger = Ledger { failed: 0 };

    let s = suite(Suite::OracleRdcBinary);
    ledger.line(
        1,
        s.passed,
        format!(
            "binary RDC over {} instances, max |closed - oracle| = {:.3e} bits (<= 1e-3); regions covered {}/{}/{}",
            value(s, "instances"),
            value(s, "max_abs_diff"),
            value(s, "covers_distortion_limited"),
            value(s, "covers_classification_limited"),
            value(s, "covers_zero_rate"),
        ),
    );

    let (r, p) = (suite(Suite::OracleRdcGaussian), suite(Suite::OracleRpcGaussian));
    ledger.line(
        2,
        r.passed && p.passed,
        format!(
            "Gaussian RDC max diff {:.3e}, RPC max diff {:.3e} nats over {}+{} instances; RPC argmin KL <= {:.3e}",
            value(r, "max_abs_diff"),
            value(p, "max_abs_diff"),
            value(r, "instances"),
            value(p, "instances"),
            value(p, "max_argmin_kl"),
        ),
    );

    let s = suite(Suite::RpcBinaryGapProbe);
    let probe = report.gap_probes.first().expect("gap probe reported");
    let loose_ok = s
        .checks
        .iter()
        .filter(|c| c.name.starts_with("oracle_matches_closed_form"))
        .all(|c| c.passed && (c.value - 0.492_917).abs() <= 1e-3);
    let probe_ok = (probe.oracle - probe.tv0_line_optimum).abs() <= 1e-3 && probe.status == "probe";
    ledger.line(
        3,
        loose_ok && probe_ok,
        format!(
            "P >= 0.05 oracle {:.6} vs closed form {:.6} (and 0.492917 within 1e-3); P = 0 probe {:.6} vs TV=0-line optimum {:.6}; gap {:.4} bits reported as probe",
            value(s, "oracle_matches_closed_form_p0.05"),
            probe.closed_form,
            probe.oracle,
            probe.tv0_line_optimum,
            probe.gap,
        ),
    );

    let s = suite(Suite::Mgl);
    ledger.line(
        4,
        s.passed,
        format!(
            "{} pairs, min margin {:.3e} (>= -1e-10), complementary equality gap {:.3e} (<= 1e-10)",
            value(s, "pairs_checked"),
            value(s, "min_margin"),
            value(s, "complementary_equality_max_gap"),
        ),
    );

    let s = suite(Suite::Convexity);
    ledger.line(
        5,
        s.passed,
        format!(
            "convexity violation binary {:.3e} / Gaussian {:.3e} (<= 1e-9); monotonicity rise {:.3e} / {:.3e} (<= 1e-12)",
            value(s, "binary_convexity_max_violation"),
            value(s, "gaussian_convexity_max_violation"),
            value(s, "binary_monotonicity_max_rise"),
            value(s, "gaussian_monotonicity_max_rise"),
        ),
    );

    let s = suite(Suite::Restoration);
    let six = [
        "mse_",
        "monte_carlo",
        "error_rate_",
        "kl_argmin",
        "variance_matching",
        "reoptimized",
        "threshold",
        "noiseless_mse",
        "noiseless_kl",
        "noiseless_error",
    ];
    ledger.line(
        6,
        six.iter().all(|p| checks_pass(s, p)),
        format!(
            "MSE argmin {:.6} min {:.6}; MC max z {:.2}; error-rate argmin {:.4} min {:.4}; KL argmin {:.4}; re-optimized variation {:.1e}; noiseless argmins {:.3}/{:.3}/{:.3}",
            value(s, "mse_argmin"),
            value(s, "mse_min"),
            value(s, "monte_carlo_max_z"),
            value(s, "error_rate_argmin"),
            value(s, "error_rate_min"),
            value(s, "kl_argmin"),
            value(s, "reoptimized_error_rate_variation"),
            value(s, "noiseless_mse_argmin"),
            value(s, "noiseless_kl_argmin"),
            value(s, "noiseless_error_rate_argmin"),
        ),
    );

    let seven = [
        "dp_frontier",
        "dc_frontier",
        "pc_frontier",
        "noiseless_dp_frontier",
        "noiseless_dc_frontier",
        "noiseless_pc_frontier",
    ];
    ledger.line(
        7,
        seven.iter().all(|p| checks_pass(s, p)),
        format!(
            "frontier spans DP {:.2e} DC {:.2e} PC {:.2e} with no rise; noiseless spreads {:.1e}/{:.1e}/{:.1e}",
            value(s, "dp_frontier_span"),
            value(s, "dc_frontier_span"),
            value(s, "pc_frontier_span"),
            value(s, "noiseless_dp_frontier_spread"),
            value(s, "noiseless_dc_frontier_spread"),
            value(s, "noiseless_pc_frontier_spread"),
        ),
    );

    let s = suite(Suite::RpcGivenD);
    ledger.line(
        8,
        s.passed,
        format!(
            "spot check {:.6} nats (0.40704 +/- 1e-4); P-spread {:.4} at D=0.5 vs {:.4} at D=0.1",
            value(s, "spot_check_rate"),
            value(s, "frontier_spread_d0.5"),
            value(s, "frontier_spread_d0.1"),
        ),
    );

    ledger.line(
        9,
        wide == single,
        format!(
            "reports with 8 and 1 workers are {} ({} bytes)",
            if wide == single { "byte-identical" } else { "different" },
            wide.len()
        ),
    );

    if !report.passed {
        let failing: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name.name()).collect();
        println!("failing suites: {}", failing.join(", "));
    }
    if ledger.failed == 0 && report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
