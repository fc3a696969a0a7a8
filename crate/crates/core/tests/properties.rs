use proptest::prelude::*;
use rdpc_core::closed_form::*;
use rdpc_core::entropy::*;
use rdpc_core::oracle::stats::{binary_channel_stats, gaussian_recon_stats, mrs_gerber_check};
use rdpc_core::quadrature::{numeric_kl, numeric_kl_log, QuadratureConfig};
use rdpc_core::*;

fn binary_source() -> impl Strategy<Value = BinaryPairSource> {
    (0.0..0.49f64, 0.0..1.0f64).prop_map(|(p1, u)| BinaryPairSource::new(p1 + u * (0.5 - p1), p1).unwrap())
}

fn gaussian_source() -> impl Strategy<Value = GaussianPairSource> {
    (0.3..3.0f64, 0.3..3.0f64, -0.95..0.95f64)
        .prop_map(|(sx, ss, r)| GaussianPairSource::from_std(sx, ss, r * sx * ss).unwrap())
}

fn witness_stats_binary(src: &BinaryPairSource, pt: &TradeoffPoint) -> rdpc_core::oracle::stats::ChannelStats {
    match pt.witness {
        Some(Witness::Binary(ch)) => binary_channel_stats(src, &ch),
        other => panic!("expected binary witness, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn binary_entropy_symmetric(p in 0.0..=1.0f64) {
        prop_assert!((h2(p) - h2(1.0 - p)).abs() <= 1e-14);
    }

    #[test]
    fn binary_entropy_inverse_round_trips(h in 0.0..=1.0f64) {
        let p = binary_entropy_inv(h).unwrap();
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!((h2(p) - h).abs() <= 1e-10);
    }

    #[test]
    fn convolution_commutes_and_stays_in_range(p in 0.0..=1.0f64, q in 0.0..=1.0f64) {
        let a = binary_convolution(p, q).unwrap();
        prop_assert_eq!(a, binary_convolution(q, p).unwrap());
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn gaussian_kl_nonnegative(m1 in -5.0..5.0f64, v1 in 0.01..10.0f64, m2 in -5.0..5.0f64, v2 in 0.01..10.0f64) {
        prop_assert!(gaussian_kl(m1, v1, m2, v2).unwrap() >= 0.0);
        prop_assert!(gaussian_kl(m1, v1, m1, v1).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn binary_source_derived_quantities(src in binary_source()) {
        let d = src.derived();
        prop_assert!((0.0..=0.5).contains(&d.b));
        prop_assert!(d.h_b.value >= 0.0);
        prop_assert!(d.h_a.value >= d.h_p1.value - 1e-15);
    }

    #[test]
    fn gaussian_floor_decreases_with_correlation(sx in 0.3..3.0f64, ss in 0.3..3.0f64, r in 0.0..0.9f64, dr in 0.01..0.09f64) {
        let lo = GaussianPairSource::from_std(sx, ss, r * sx * ss).unwrap();
        let hi = GaussianPairSource::from_std(sx, ss, (r + dr) * sx * ss).unwrap();
        prop_assert!(hi.floor_c() < lo.floor_c());
    }

    #[test]
    fn mrs_gerber_and_data_processing(src in binary_source(), pa in 0.0..=1.0f64, pb in 0.0..=1.0f64) {
        let ch = BinaryChannel::new(pa, pb).unwrap();
        let m = mrs_gerber_check(&src, &ch);
        prop_assert!(m.lhs - m.rhs >= -1e-10, "{:?}", m);
        let s = binary_channel_stats(&src, &ch);
        prop_assert!(s.cond_entropy_s.value >= h2(src.p1()) - 1e-12);
    }

    #[test]
    fn binary_rdc_witness_is_valid(src in binary_source(), d in 0.0..0.5f64, u in 0.0..1.0f64) {
        let c = h2(src.p1()) + u * (1.0 - h2(src.p1()));
        let pt = rdc_binary(&src, d, c).unwrap();
        prop_assert!(pt.feasible);
        let s = witness_stats_binary(&src, &pt);
        prop_assert!(s.distortion <= d + 1e-9, "{} > {}", s.distortion, d);
        prop_assert!(s.cond_entropy_s.value <= c + 1e-9);
        prop_assert!((s.mutual_info.value - pt.rate.value).abs() <= 1e-9);
    }

    #[test]
    fn binary_rpc_witness_is_valid(src in binary_source(), p in 0.0..1.0f64, u in 0.0..1.0f64) {
        let c = h2(src.p1()) + u * (h2(src.a()) - h2(src.p1()));
        let pt = rpc_binary(&src, p, c).unwrap();
        let s = witness_stats_binary(&src, &pt);
        prop_assert!(s.perception <= p + 1e-9);
        prop_assert!(s.cond_entropy_s.value <= c + 1e-9);
        // The zero-TV witness upper-bounds the rate.
        prop_assert!(s.mutual_info.value >= pt.rate.value - 1e-9);
    }

    #[test]
    fn gaussian_witnesses_are_valid(src in gaussian_source(), d_frac in 0.01..1.2f64, u in 0.0..1.0f64) {
        let c = src.floor_c() + 1e-6 + u * (src.h_s() - src.floor_c());
        let d = d_frac * src.var_x();
        let pt = rdc_gaussian(&src, d, c).unwrap();
        let Some(Witness::Gaussian(rec)) = pt.witness else { panic!("missing witness") };
        let s = gaussian_recon_stats(&src, &rec).unwrap();
        prop_assert!(s.distortion <= d + 1e-9);
        prop_assert!(s.cond_entropy_s.value <= c + 1e-9);
        prop_assert!((s.mutual_info.value - pt.rate.value).abs() <= 1e-9);

        let rp = rpc_gaussian(&src, 0.0, c).unwrap();
        let Some(Witness::Gaussian(rec)) = rp.witness else { panic!("missing witness") };
        let s = gaussian_recon_stats(&src, &rec).unwrap();
        prop_assert!(s.perception <= 1e-9);
        prop_assert!(s.cond_entropy_s.value <= c + 1e-9);
        prop_assert!((s.mutual_info.value - rp.rate.value).abs() <= 1e-9);
    }

    #[test]
    fn rdc_rates_are_monotone(src in binary_source(), g in gaussian_source(), d in 0.0..0.5f64, dd in 0.0..0.1f64, u in 0.0..1.0f64, du in 0.0..0.2f64) {
        let cb = |u: f64| h2(src.p1()) + u.min(1.0) * (1.0 - h2(src.p1()));
        let r = |d: f64, u: f64| rdc_binary(&src, d, cb(u)).unwrap().rate.value;
        prop_assert!(r(d + dd, u) <= r(d, u) + 1e-12);
        prop_assert!(r(d, u + du) <= r(d, u) + 1e-12);
        let cg = |u: f64| g.floor_c() + 1e-9 + u.min(1.0) * (g.h_s() - g.floor_c());
        let dg = |d: f64| 2.0 * d * g.var_x() + 1e-6;
        let r = |d: f64, u: f64| rdc_gaussian(&g, dg(d), cg(u)).unwrap().rate.value;
        prop_assert!(r(d + dd, u) <= r(d, u) + 1e-12);
        prop_assert!(r(d, u + du) <= r(d, u) + 1e-12);
    }

    #[test]
    fn rdc_rates_are_convex(src in binary_source(), g in gaussian_source(), d1 in 0.0..0.5f64, d2 in 0.0..0.5f64, u1 in 0.0..1.0f64, u2 in 0.0..1.0f64, lam in 0.0..1.0f64) {
        let mix = |x: f64, y: f64| lam * x + (1.0 - lam) * y;
        let cb = |u: f64| h2(src.p1()) + u * (1.0 - h2(src.p1()));
        let r = |d: f64, c: f64| rdc_binary(&src, d, c).unwrap().rate.value;
        let (ca, cz) = (cb(u1), cb(u2));
        prop_assert!(r(mix(d1, d2), mix(ca, cz)) <= mix(r(d1, ca), r(d2, cz)) + 1e-9);
        let cg = |u: f64| g.floor_c() + 1e-3 + u * (g.h_s() - g.floor_c());
        let dg = |d: f64| (0.01 + 2.0 * d) * g.var_x();
        let r = |d: f64, c: f64| rdc_gaussian(&g, d, c).unwrap().rate.value;
        let (ca, cz, da, dz) = (cg(u1), cg(u2), dg(d1), dg(d2));
        prop_assert!(r(mix(da, dz), mix(ca, cz)) <= mix(r(da, ca), r(dz, cz)) + 1e-9);
    }

    #[test]
    fn rdc_continuous_across_branch_boundaries(src in binary_source(), g in gaussian_source(), u in 0.05..0.95f64) {
        let c = h2(src.p1()) + u * (1.0 - h2(src.p1()));
        let c1 = binary_c1(&src, c);
        if c1 > 1e-6 && c1 < src.b() {
            let below = rdc_binary(&src, c1 * (1.0 - 1e-12), c).unwrap().rate.value;
            let at = rdc_binary(&src, c1, c).unwrap().rate.value;
            prop_assert!((below - at).abs() <= 1e-9);
        }
        let cg = g.floor_c() + u * (g.h_s() - g.floor_c());
        let (_, d_star) = rdc_gaussian_region(&g, 1.0, cg).unwrap();
        let below = rdc_gaussian(&g, d_star, cg).unwrap().rate.value;
        let above = rdc_gaussian(&g, d_star * (1.0 + 1e-12), cg).unwrap().rate.value;
        prop_assert!((below - above).abs() <= 1e-9);
    }

    #[test]
    fn rpc_rates_ignore_perception(src in binary_source(), g in gaussian_source(), u in 0.0..1.0f64) {
        let cb = h2(src.p1()) + u * (1.0 - h2(src.p1()));
        let cg = g.floor_c() + u * (g.h_s() - g.floor_c());
        let rb = rpc_binary(&src, 0.0, cb).unwrap().rate.value;
        let rg = rpc_gaussian(&g, 0.0, cg).unwrap().rate.value;
        for p in [0.1, 1.0, 10.0] {
            prop_assert_eq!(rpc_binary(&src, p, cb).unwrap().rate.value.to_bits(), rb.to_bits());
            prop_assert_eq!(rpc_gaussian(&g, p, cg).unwrap().rate.value.to_bits(), rg.to_bits());
        }
    }

    #[test]
    fn gaussian_classification_rate_agrees_across_programs(g in gaussian_source(), u in 0.01..1.0f64) {
        let c = g.floor_c() + u * (g.h_s() - g.floor_c());
        let rdc = rdc_gaussian(&g, 10.0 * g.var_x(), c).unwrap().rate.value;
        let rpc = rpc_gaussian(&g, 1.0, c).unwrap().rate.value;
        prop_assert!((rdc - rpc).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn numeric_kl_matches_closed_form(m1 in -1.0..1.0f64, v1 in 0.5..2.0f64, m2 in -1.0..1.0f64, v2 in 0.5..2.0f64) {
        let p = |x: f64| normal_pdf(x, m1, v1);
        let q = |x: f64| normal_pdf(x, m2, v2);
        let sd = v1.max(v2).sqrt();
        let support = (m1.min(m2) - 12.0 * sd, m1.max(m2) + 12.0 * sd);
        let numeric = numeric_kl(p, q, support).unwrap();
        prop_assert!((numeric - gaussian_kl(m1, v1, m2, v2).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn log_density_kl_matches_closed_form(m1 in -2.0..2.0f64, v1 in 0.05..4.0f64, m2 in -2.0..2.0f64, v2 in 0.05..4.0f64) {
        let ln_normal = |m: f64, v: f64| move |x: f64| -0.5 * ((x - m).powi(2) / v + (2.0 * std::f64::consts::PI * v).ln());
        let sd = v1.max(v2).sqrt();
        let support = (m1.min(m2) - 12.0 * sd, m1.max(m2) + 12.0 * sd);
        let numeric = numeric_kl_log(ln_normal(m1, v1), ln_normal(m2, v2), support, &QuadratureConfig::default()).unwrap();
        prop_assert!((numeric - gaussian_kl(m1, v1, m2, v2).unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn binary_entropy_increasing_on_half_interval() {
    let grid: Vec<f64> = (0..=10_000).map(|i| 0.5 * i as f64 / 10_000.0).collect();
    assert!(grid.windows(2).all(|w| h2(w[1]) > h2(w[0])));
}
