use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cosine-rays"))
}

#[test]
fn trace_ray_constant_address_is_real() {
    let out = bin()
        .args([
            "trace-ray",
            "--family",
            "sinh",
            "--k",
            "1",
            "--address",
            "(0R)*",
            "--t",
            "0.5:10:64",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,re,im,residual");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 64, "{} rows", rows.len());
    for row in rows {
        let im: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(im.abs() < 1e-9, "non-real sample: {row}");
    }
}

#[test]
fn land_reports_the_origin() {
    let out = bin()
        .args(["land", "--family", "sinh", "--k", "1", "--address", "(0R)*"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["converged"], true);
    assert!(v["landing"][0].as_f64().unwrap().abs() < 1e-8);
    assert!(v["landing"][1].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn find_params_fixed_value_residual_is_tiny() {
    let out = bin()
        .args(["find-params", "--fixed-value-family", "--k", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(
        &cfg,
        r#"{"version": 1, "family": "sinh", "k": 1, "address": "(0L)*"}"#,
    )
    .unwrap();
    // config supplies everything
    let out = bin()
        .args(["land", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["landing"][0].as_f64().unwrap().abs() < 1e-8);
    // an explicit flag overrides the config value
    let out = bin()
        .args([
            "land",
            "--config",
            cfg.to_str().unwrap(),
            "--address",
            "(1R)*",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["landing"][1].as_f64().unwrap() > 1.0, "{v}");
}

#[test]
fn domain_errors_exit_one_usage_errors_exit_two() {
    let out = bin()
        .args(["land", "--family", "sinh", "--k", "1", "--address", "oops"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    let out = bin().args(["no-such-subcommand"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn itinerary_of_origin_is_constant_zero() {
    let out = bin()
        .args([
            "itinerary",
            "--family",
            "sinh",
            "--k",
            "1",
            "--point",
            "0,0",
            "--length",
            "10",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["doubled_labels"], serde_json::json!(vec![0; 10]));
}

#[test]
fn render_writes_valid_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("img.ppm");
    let out = bin()
        .args([
            "render",
            "--family",
            "sinh",
            "--k",
            "1",
            "--width",
            "32",
            "--height",
            "24",
            "--budget",
            "10",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let bytes = std::fs::read(&path).unwrap();
    assert!(bytes.starts_with(b"P6\n32 24\n255\n"));
    assert_eq!(bytes.len(), 13 + 32 * 24 * 3);
}

#[test]
fn escape_stats_round_trips_as_json() {
    let out = bin()
        .args([
            "escape-stats",
            "--family",
            "sinh",
            "--k",
            "1",
            "--samples",
            "1500",
            "--budget",
            "25",
            "--seed",
            "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let fr = v["fraction"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&fr));
    assert_eq!(
        v["escaped"].as_u64().unwrap() as f64 / 1500.0,
        fr
    );
}
