use conefix_web::{estimate_demo, ratio_field_demo, solve_demo};
use serde_json::Value;

fn input(t: &str, s: &str, kind: &str, constant: f64, x0: f64) -> String {
    format!(r#"{{"T":"{t}","S":"{s}","kind":"{kind}","constant":{constant},"x0":{x0},"lo":-10,"hi":10}}"#)
}

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn chatterjea_solve_converges_to_zero() {
    let v = parse(solve_demo(&input("x^2", "x/2", "TK2", 0.200001, 7.0)).unwrap());
    assert_eq!(v["converged"], true);
    assert!(v["u"].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn kannan_identity_solve_matches_closed_form() {
    let v = parse(solve_demo(&input("x", "x/5", "K1", 0.25, 3.0)).unwrap());
    let iterates = v["iterates"].as_array().unwrap();
    for (n, x) in iterates.iter().enumerate().take(6) {
        let want = 3.0 / 5f64.powi(n as i32);
        assert!((x.as_f64().unwrap() - want).abs() <= 1e-15 * want.max(1.0));
    }
}

#[test]
fn violations_are_counted_for_a_too_small_constant() {
    let v = parse(estimate_demo(&input("x^2", "x/2", "TK1", 0.1, 1.0), 2000, 3).unwrap());
    assert!(v["violations"].as_u64().unwrap() > 0);
    assert!((v["estimate"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-2);
}

#[test]
fn undefined_constant_reports_a_witness() {
    // S = identity: every right-hand side vanishes while d(Sx, Sy) does not.
    let v = parse(estimate_demo(&input("x", "x", "K1", 0.2, 1.0), 500, 3).unwrap());
    assert!(v["estimate"].is_null());
    let w = v["witness"].as_array().unwrap();
    assert_ne!(w[0], w[1]);
}

#[test]
fn ratio_field_shape_and_clamping() {
    let v = parse(ratio_field_demo(&input("x^2", "x/2", "TK2", 0.2, 1.0), 1).unwrap());
    assert_eq!(v["resolution"], 2);
    assert_eq!(v["values"].as_array().unwrap().len(), 4);
    let v = parse(ratio_field_demo(&input("x^2", "x/2", "TK2", 0.2, 1.0), 51).unwrap());
    assert!(v["max"].as_f64().unwrap() <= 0.2 + 1e-12);
}
