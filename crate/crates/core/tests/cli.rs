use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("specs")
        .join(name)
}

fn waring(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waring"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn verify(name: &str) -> Output {
    waring(&["verify", "--spec", spec(name).to_str().unwrap()])
}

#[test]
fn verdicts_map_to_exit_codes() {
    for (name, code, verdict) in [
        ("isotropic_linear.json", 0, "pass"),
        ("paraboloid.json", 0, "pass"),
        ("isotropic_envelope.json", 0, "pass"),
        ("fail_precondition.json", 1, "fail"),
        ("cubic_linear.json", 2, "unconfirmed"),
    ] {
        let out = verify(name);
        assert_eq!(out.status.code(), Some(code), "{name}");
        assert_eq!(json(&out)["verdict"], verdict, "{name}");
    }
}

#[test]
fn unconfirmed_report_lists_power_conditions() {
    let r = json(&verify("cubic_linear.json"));
    let names: Vec<&str> = r["constraints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for want in [
        "pde_residual",
        "null_power_1",
        "null_power_2",
        "null_power_3",
        "null_power_3_literal",
    ] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    assert_eq!(r["instance"]["unconfirmed"], true);
    assert_eq!(r["seed"], 0xC0FFEE);
}

#[test]
fn dumped_spec_reverifies_identically() {
    let dir = std::env::temp_dir().join(format!("waring-dump-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for name in [
        "isotropic_linear.json",
        "cubic_linear.json",
        "isotropic_envelope.json",
        "paraboloid.json",
    ] {
        let src = spec(name);
        let dump = waring(&["verify", "--spec", src.to_str().unwrap(), "--dump-spec"]);
        assert_eq!(dump.status.code(), Some(0));
        let copy = dir.join(name);
        std::fs::write(&copy, &dump.stdout).unwrap();
        let a = verify(name);
        let b = waring(&["verify", "--spec", copy.to_str().unwrap()]);
        assert_eq!(a.stdout, b.stdout, "{name}");
        assert_eq!(a.status.code(), b.status.code());
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sampling_options_are_honoured() {
    let path = spec("isotropic_linear.json");
    let p = path.to_str().unwrap();
    let a = json(&waring(&[
        "verify",
        "--spec",
        p,
        "--samples",
        "17",
        "--seed",
        "42",
    ]));
    assert_eq!(a["samples"], 17);
    assert_eq!(a["seed"], 42);
    let b = json(&waring(&[
        "verify",
        "--spec",
        p,
        "--samples",
        "17",
        "--seed",
        "0x2a",
    ]));
    assert_eq!(a, b);
    let strict = waring(&["verify", "--spec", p, "--tol", "0"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn usage_and_spec_errors_exit_three() {
    assert_eq!(waring(&[]).status.code(), Some(3));
    assert_eq!(waring(&["verify"]).status.code(), Some(3));
    assert_eq!(
        waring(&["verify", "--spec", "/nonexistent.json"])
            .status
            .code(),
        Some(3)
    );
    let dir = std::env::temp_dir().join(format!("waring-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"dimension": 2, "family": {"t8_case2": {"c": [[0,0]]}}}"#,
    )
    .unwrap();
    let out = waring(&["verify", "--spec", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(waring(&["--help"]).status.code(), Some(0));
}

#[test]
fn roots_of_the_cubic() {
    let out = waring(&["roots", "--coeffs", "-152,80,-100,91"]);
    assert_eq!(out.status.code(), Some(0));
    let roots = json(&out);
    let roots = roots.as_array().unwrap();
    assert_eq!(roots.len(), 3);
    let real: Vec<f64> = roots
        .iter()
        .filter(|r| r[1].as_f64().unwrap().abs() < 1e-8)
        .map(|r| r[0].as_f64().unwrap())
        .collect();
    assert_eq!(real.len(), 1);
    assert!(real[0] > 1.35 && real[0] < 1.36);
}

#[test]
fn isotropic_direction_from_the_command_line() {
    let out = waring(&[
        "solve-direction",
        "--c",
        "0.2857142857142857,0.42857142857142855,0.8571428571428571",
        "--ell",
        "2",
        "--fix",
        "3=-1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let cands = r["candidates"].as_array().unwrap();
    assert_eq!(cands.len(), 2);
    let want = [(12.0 / 13.0, -21.0 / 13.0), (12.0 / 13.0, 21.0 / 13.0)];
    for c in cands {
        assert!(c["max_residual"].as_f64().unwrap() < 1e-12);
        let d1 = (
            c["d"][0][0].as_f64().unwrap(),
            c["d"][0][1].as_f64().unwrap(),
        );
        assert!(want
            .iter()
            .any(|w| (w.0 - d1.0).abs() < 1e-12 && (w.1 - d1.1).abs() < 1e-12));
    }
}

#[test]
fn trace_reports_records_and_blow_up() {
    let p = spec("paraboloid.json");
    let out = waring(&[
        "trace",
        "--spec",
        p.to_str().unwrap(),
        "--tau-end",
        "0.5,0",
        "--steps",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let recs = r["records"].as_array().unwrap();
    assert_eq!(recs.len(), 101);
    for key in ["tau", "z", "Du", "u", "residual"] {
        assert!(recs[0].get(key).is_some(), "{key}");
    }
    assert!(r["max_deviation_from_family"].as_f64().unwrap() < 1e-7);

    // u₀ = −1 at the origin of the envelope family puts τ* = −1/2 on the segment
    let env = spec("isotropic_envelope.json");
    let out = waring(&[
        "trace",
        "--spec",
        env.to_str().unwrap(),
        "--tau-end",
        "-2",
        "--steps",
        "10",
        "--z0",
        "0,0,0",
    ]);
    let r = json(&out);
    assert_eq!(out.status.code(), Some(1), "{r}");
    assert!(r["error"].as_str().unwrap().contains("singular"));
}

#[test]
fn left_factor_case_file() {
    let out = waring(&[
        "verify-ode",
        "--case",
        spec("ode_c3_sin.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["verdict"], "pass");
    assert!(r["report"]["max_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn null_function_generator() {
    let out = waring(&[
        "phi",
        "--variant",
        "weighted_diff",
        "--core",
        "sin(z1)^2",
        "--rho",
        "1,2i,-0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(r["annihilation"]["max_scaled_residual"].as_f64().unwrap() <= 1e-10);
    assert!(r["phi"].as_str().unwrap().contains("sin"));
    assert_eq!(
        waring(&["phi", "--variant", "nope", "--dim", "2"])
            .status
            .code(),
        Some(3)
    );
}
