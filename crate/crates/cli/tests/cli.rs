use std::process::{Command, Output};

use serde_json::Value;

fn bessel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bessel")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn norm_reports_three_estimates() {
    let v = json(&bessel(&["norm", "--alpha", "0.25", "--kind", "Q", "--n", "256"]));
    let exact = 4.0 / 3.0;
    for key in ["distance_closed_form", "multiplier_sup"] {
        assert!((v[key]["value"].as_f64().unwrap() - exact).abs() < 1e-10, "{key}");
    }
    let svd = v["discretized_svd"]["value"].as_f64().unwrap();
    assert!(svd < exact && svd > 0.9 * exact, "svd = {svd}");
    assert_eq!(v["discretized_svd"]["grid"]["n"], 256);
}

#[test]
fn region_of_boundary_point() {
    let v = json(&bessel(&["region", "--alpha", "-3+4i"]));
    assert_eq!(v["region"], "boundary");
    let v = json(&bessel(&["region", "--m", "0.5+0.2i"]));
    assert_eq!(v["region"], "inside");
}

#[test]
fn pathology_csv_columns() {
    let out = bessel(&["pathology", "--tau", "0.75", "--m", "1+1i", "--out", "csv", "--n", "512"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,|I|,bound,residual"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 5);
    // |I| grows as x decreases
    assert!(rows.windows(2).all(|w| w[1][0] < w[0][0] && w[1][1] > w[0][1]));
}

#[test]
fn exit_codes() {
    assert_eq!(bessel(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(bessel(&[]).status.code(), Some(64));
    assert_eq!(bessel(&["region", "--alpha", "nonsense"]).status.code(), Some(2));
    assert_eq!(bessel(&["pathology", "--tau", "0.4", "--m", "1"]).status.code(), Some(2));
    assert_eq!(bessel(&["pathology", "--tau", "0.75", "--m", "1.2"]).status.code(), Some(2));
    assert_eq!(bessel(&["norm", "--alpha", "-3+4i"]).status.code(), Some(2));
    assert_eq!(bessel(&["norm", "--alpha", "0.25", "--n", "8"]).status.code(), Some(2));
    assert_eq!(bessel(&["region", "--alpha", "1", "--tol", "form=-1"]).status.code(), Some(2));
    assert_eq!(bessel(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_then_flags() {
    let dir = std::env::temp_dir().join(format!("bessel-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "# small grid\nn = 128\nt_min = -6\nformat = csv\n").unwrap();
    let p = path.to_str().unwrap();
    let out = bessel(&["norm", "--alpha", "0.25", "--config", p]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("method,value"));
    let v = json(&bessel(&["norm", "--alpha", "0.25", "--config", p, "--format", "json", "--n", "64"]));
    assert_eq!(v["discretized_svd"]["grid"]["n"], 64);
    assert_eq!(v["discretized_svd"]["grid"]["t_min"], -6.0);
    std::fs::write(&path, "bogus = 1\n").unwrap();
    assert_eq!(bessel(&["region", "--alpha", "1", "--config", p]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn green_check_converges() {
    for kind in ["forward", "two-sided"] {
        let v = json(&bessel(&["green-check", "--alpha", "0.25+1i", "--kind", kind, "--n", "512"]));
        assert_eq!(v["passed"], true, "{kind}: {v}");
        assert!(v["order"].as_f64().unwrap() >= 2.0);
    }
    let out = bessel(&["green-check", "--alpha", "1", "--kind", "compressed-forward"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn boundary_classifies_samples() {
    let v = json(&bessel(&["boundary", "--m", "0.3", "--t-min", "-20", "--t-max", "2"]));
    let cp = &v["coefficients"]["c_plus"];
    assert!((cp[0].as_f64().unwrap() - 1.0).abs() < 1e-4);
    assert_eq!(v["classification"], "hm_only");
    let v = json(&bessel(&["boundary", "--m", "0.3", "--sample", "smooth", "--t-min", "-20", "--t-max", "2"]));
    assert_eq!(v["classification"], "min_domain");
    assert_eq!(bessel(&["boundary", "--m", "1.5"]).status.code(), Some(2));
}

#[test]
fn inequality_examples() {
    let v = json(&bessel(&["check", "--inequality", "estima"]));
    let lhs = v["record"]["lhs"].as_f64().unwrap();
    assert!((lhs * lhs - 5.0 / 6.0).abs() < 1e-8);
    let v = json(&bessel(&["check", "--inequality", "rellich"]));
    assert!((v["record"]["ratio"].as_f64().unwrap() - 0.375).abs() < 1e-8);
    let v = json(&bessel(&["check", "--inequality", "kato-bound", "--n", "256"]));
    assert_eq!(v["holds"], true);
}

#[test]
fn factorize_matches_reference() {
    let v = json(&bessel(&["factorize", "--m", "1+1i", "--sign", "minus", "--n", "1024"]));
    assert!(v["deviation_plus"].as_f64().unwrap() < 1e-6);
    assert!(v["deviation_minus"].as_f64().unwrap() < 1e-6);
    assert_eq!(bessel(&["factorize", "--m", "-0.5", "--sign", "minus"]).status.code(), Some(2));
}

#[test]
fn holo_is_deterministic() {
    let args = ["holo", "--alpha0", "0.5i", "--size", "12", "--n", "128", "--seed", "3"];
    let a = bessel(&args);
    let b = bessel(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["analyticity"]["cauchy_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["kato_rellich"]["all_bounds_hold"], true);
    assert_eq!(bessel(&["holo", "--alpha0", "-3+4i"]).status.code(), Some(2));
}
