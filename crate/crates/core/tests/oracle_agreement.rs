use rdpc_core::closed_form::*;
use rdpc_core::entropy::h2;
use rdpc_core::oracle::*;
use rdpc_core::*;

fn bsrc() -> BinaryPairSource {
    BinaryPairSource::new(0.3, 0.1).unwrap()
}

fn gsrc() -> GaussianPairSource {
    GaussianPairSource::from_std(1.0, 0.7, 0.63).unwrap()
}

fn solve_binary(d: Option<f64>, p: Option<f64>, c: Option<f64>) -> OracleResult {
    let out = binary_min_rate(&bsrc(), &Constraints { d, p, c }, &BinaryOracleConfig::default()).unwrap();
    out.solved().expect("feasible instance").clone()
}

fn solve_gaussian(d: Option<f64>, p: Option<f64>, c: Option<f64>) -> OracleResult {
    let out = gaussian_min_rate(&gsrc(), &Constraints { d, p, c }, &GaussianOracleConfig::default()).unwrap();
    out.solved().expect("feasible instance").clone()
}

#[test]
fn binary_rdc_distortion_limited() {
    let r = solve_binary(Some(0.1), None, Some(0.85));
    assert!((r.rate.value - 0.342_282_530_869_851_6).abs() < 1e-6, "{}", r.rate.value);
    assert!(r.stats.distortion <= 0.1 + 1e-9);
    assert!(r.refined);
}

#[test]
fn binary_rdc_classification_limited() {
    let s = bsrc();
    let closed = rdc_binary(&s, 0.12, 0.6).unwrap();
    assert_eq!(closed.region, Region::ClassificationLimited);
    let r = solve_binary(Some(0.12), None, Some(0.6));
    assert!((r.rate.value - closed.rate.value).abs() < 1e-6, "{} vs {}", r.rate.value, closed.rate.value);
    assert!(r.stats.cond_entropy_s.value <= 0.6 + 1e-9);
}

#[test]
fn binary_rdc_zero_rate() {
    let r = solve_binary(Some(0.35), None, Some(0.9));
    assert!(r.rate.value < 1e-9);
}

#[test]
fn binary_rdc_infeasible() {
    let out =
        binary_min_rate(&bsrc(), &Constraints { d: Some(0.3), p: None, c: Some(0.4) }, &BinaryOracleConfig::default())
            .unwrap();
    assert!(out.solved().is_none());
}

#[test]
fn binary_rpc_matches_closed_form_with_loose_perception() {
    let r = solve_binary(None, Some(0.05), Some(0.6));
    assert!((r.rate.value - 0.493_322).abs() < 1e-6, "{}", r.rate.value);
    let closed = rpc_binary(&bsrc(), 0.05, 0.6).unwrap();
    assert!((r.rate.value - closed.rate.value).abs() < 1e-6);
}

#[test]
fn binary_rpc_zero_perception_probe() {
    let r = solve_binary(None, Some(0.0), Some(0.6));
    assert_eq!(r.perception_bound, Some(MIN_PERCEPTION));
    assert!((r.rate.value - 0.498_470).abs() < 1e-5, "{}", r.rate.value);
    assert!(r.stats.perception <= MIN_PERCEPTION + 1e-9);
}

#[test]
fn gerber_is_strict_off_the_complementary_family() {
    let m = stats::mrs_gerber_check(&bsrc(), &BinaryChannel::new(0.96, 0.12).unwrap());
    assert!(m.holds && m.lhs > m.rhs);
    assert!((m.lhs - 0.600_637).abs() < 1e-6);
    assert!((m.rhs - 0.598_033).abs() < 1e-6);
}

#[test]
fn gerber_equality_on_complementary_witness() {
    let s = bsrc();
    let ch = rdc_binary_witness(&s, 0.1, 0.85).unwrap();
    let m = stats::mrs_gerber_check(&s, &ch);
    assert!((m.lhs - m.rhs).abs() < 1e-10, "{m:?}");
    let st = stats::binary_channel_stats(&s, &ch);
    assert!((st.mutual_info.value - (h2(s.b()) - h2(0.1))).abs() < 1e-12);
}

#[test]
fn gaussian_rdc_both_regions() {
    let g = gsrc();
    let c = g.h_s() - 0.5;
    for d in [0.1, 0.5] {
        let closed = rdc_gaussian(&g, d, c).unwrap();
        let r = solve_gaussian(Some(d), None, Some(c));
        assert!((r.rate.value - closed.rate.value).abs() < 1e-5, "D={d}: {} vs {}", r.rate.value, closed.rate.value);
        assert!(r.stats.distortion <= d + 1e-9);
    }
}

#[test]
fn gaussian_rpc_argmin_has_negligible_perception() {
    let g = gsrc();
    let c = g.h_s() - 0.5;
    let r = solve_gaussian(None, Some(0.01), Some(c));
    assert!((r.rate.value - 0.757_964).abs() < 1e-5, "{}", r.rate.value);
    assert!(r.stats.perception <= 1e-3, "{}", r.stats.perception);
}

#[test]
fn gaussian_infeasible_below_floor() {
    let g = gsrc();
    let out = gaussian_min_rate(
        &g,
        &Constraints { d: Some(1.0), p: None, c: Some(g.floor_c() - 0.05) },
        &GaussianOracleConfig::default(),
    )
    .unwrap();
    assert!(out.solved().is_none());
}

#[test]
fn oracle_rejects_bad_configs() {
    let s = bsrc();
    let none = Constraints::default();
    assert!(binary_min_rate(&s, &none, &BinaryOracleConfig::default()).is_err());
    let coarse = BinaryOracleConfig { resolution: 0.5, refine: true };
    assert!(binary_min_rate(&s, &Constraints { d: Some(0.1), p: None, c: None }, &coarse).is_err());
}

#[test]
fn oracle_result_round_trips_through_json() {
    let r = solve_binary(Some(0.1), None, Some(0.85));
    let out = OracleOutcome::Solved(r);
    let text = serde_json::to_string(&out).unwrap();
    let back: OracleOutcome = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
