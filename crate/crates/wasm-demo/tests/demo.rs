use transop_wasm_demo::{
    double_gyre_data, double_gyre_phi2, ou_eigenfunctions, ou_eigenfunctions_data, ou_timescales,
    ou_timescales_data,
};

#[test]
fn ou_eigenfunctions_match_hermite_oracle() {
    let r = ou_eigenfunctions_data(4.0, 0.25, 1.0, 20_000, 8, 3, 5).unwrap();
    assert_eq!(r.x.len(), 200);
    for (got, want) in r.eigenvalues.iter().zip(&r.analytic_eigenvalues) {
        assert!((got - want).abs() < 0.03, "{:?} vs {:?}", r.eigenvalues, r.analytic_eigenvalues);
    }
    assert!(r.relative_l2_error[1] < 0.05, "{:?}", r.relative_l2_error);
    for f in &r.estimated {
        let ms = f.iter().map(|a| a * a).sum::<f64>() / f.len() as f64;
        assert!((ms - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ou_timescales_approach_analytic_value() {
    let r = ou_timescales_data(1.0, 1.0, 0.5, 50_000, &[1, 2, 4], 3).unwrap();
    assert_eq!(r.lag_times, [0.5, 1.0, 2.0]);
    assert_eq!(r.analytic, 1.0);
    for t in &r.estimated {
        assert!((t.unwrap() - 1.0).abs() < 0.1, "{:?}", r.estimated);
    }
}

#[test]
fn double_gyre_phi2_splits_the_gyres() {
    let r = double_gyre_data(0.25, 0.05, 3.0, 1500, 12, 6, 20, 10, 1).unwrap();
    assert_eq!(r.phi2.len(), 200);
    assert!((r.lambda[0][0] - 1.0).abs() < 0.05, "{:?}", r.lambda);
    assert!(r.split >= 0.9, "{}", r.split);
}

#[test]
fn exported_functions_return_json_or_message() {
    let v: serde_json::Value =
        serde_json::from_str(&ou_eigenfunctions(1.0, 1.0, 0.5, 2000, 6, 1).unwrap()).unwrap();
    assert_eq!(v["estimated"].as_array().unwrap().len(), 4);
    let v: serde_json::Value = serde_json::from_str(&ou_timescales(1.0, 1.0, 0.5, 2000, "1, 2", 1).unwrap()).unwrap();
    assert_eq!(v["lag_times"].as_array().unwrap().len(), 2);
    assert!(ou_timescales(1.0, 1.0, 0.5, 2000, "1,x", 1).unwrap_err().contains("`x`"));
    assert!(ou_eigenfunctions(-1.0, 1.0, 0.5, 100, 4, 1).is_err());
    assert!(double_gyre_phi2(0.25, 0.05, 0.0, 10, 1).is_err());
}
