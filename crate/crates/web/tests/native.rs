use ratcap_web::{density_curve_data, hop_curve_data, simulate_hop_data, MAX_BUDGET};

#[test]
fn hop_curve_stays_below_bound() {
    let c = hop_curve_data(0.1, 3.0, 3.0, 1.0, 10.0, 12).unwrap();
    assert_eq!(c.points.len(), 12);
    for p in &c.points {
        assert!(p.capacity <= p.bound * (1.0 + 1e-12), "{p:?}");
    }
    assert!(c.capacity <= c.bound);
    assert!((c.m_star as i64 - c.m_star_bound as i64).abs() <= 1);
    // 10 dB is the default SNR of 10
    assert!((c.m_star_continuous - 1.906023757563831).abs() < 1e-9);
}

#[test]
fn hop_curve_rejects_bad_input() {
    assert!(hop_curve_data(0.1, 3.0, 3.0, 1.0, 10.0, 0).is_err());
    assert!(hop_curve_data(0.1, 3.0, 3.0, 1.0, 10.0, MAX_BUDGET + 1).is_err());
    let e = hop_curve_data(0.1, 2.0, 3.0, 1.0, 10.0, 4).unwrap_err();
    assert!(e.contains("alpha > 2"), "{e}");
}

#[test]
fn density_curve_approaches_limits() {
    let c = density_curve_data(4.0, 3.0, 1.0, 10.0, 1e-2, 1e3, 40).unwrap();
    assert_eq!(c.points.len(), 40);
    let last = c.points.last().unwrap();
    assert!((last.lambda - 1e3).abs() < 1e-9);
    assert!((last.bound_per_sqrt_lambda / c.scaling_constant - 1.0).abs() < 0.02);
    assert!((last.m_star_per_sqrt_lambda / c.dense_slope - 1.0).abs() < 0.02);
    assert!((c.scaling_constant - 0.203365851463722).abs() < 1e-12);
    assert!(density_curve_data(4.0, 3.0, 1.0, 10.0, 1.0, 0.5, 10).is_err());
}

#[test]
fn simulated_hop_agrees() {
    let s = simulate_hop_data(0.1, 4.0, 3.0, 1.0, 10.0, 1, 50_000, 3).unwrap();
    assert!((s.analytic - 0.3151417272188861).abs() < 1e-14);
    assert!(s.agrees, "{s:?}");
    let s = simulate_hop_data(0.1, 3.0, 3.0, 1.0, 10.0, 2, 50_000, 3).unwrap();
    assert!((s.analytic - 0.6488248847079548).abs() < 1e-14);
    assert!(s.agrees, "{s:?}");
    assert!(simulate_hop_data(0.1, 3.0, 3.0, 1.0, 10.0, 0, 10, 1).is_err());
}

#[test]
fn results_serialize() {
    let c = hop_curve_data(0.1, 3.0, 3.0, 1.0, 10.0, 3).unwrap();
    let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
    assert!(v["points"][0]["bound"].is_number());
}
