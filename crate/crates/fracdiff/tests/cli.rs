//! End-to-end runs of the `fracdiff` binary: exit-code taxonomy, file
//! formats, config resolution, and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracdiff"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary spawns")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Data rows of a CSV artifact, header checked and stripped.
fn csv_rows(path: &Path, header: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).expect("csv exists");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header), "{}", path.display());
    lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn json_at(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("json exists")).expect("parses")
}

#[test]
fn coeffs_writes_the_kernel_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["coeffs", "--alpha", "0.5", "--M", "4"]);
    assert_eq!(code(&out), 0, "{out:?}");

    let rows = csv_rows(&dir.path().join("coeffs.csv"), "m,lambda");
    assert_eq!(rows.len(), 5);
    let want = [1.0, -0.5, -0.125, -0.0625, -0.0390625];
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], i.to_string());
        assert_eq!(row[1].parse::<f64>().unwrap(), want[i]);
    }

    let meta = json_at(&dir.path().join("coeffs.csv.meta.json"));
    assert_eq!(meta["command"], "coeffs");
    assert_eq!(meta["params"]["alpha"], 0.5);
    assert_eq!(meta["params"]["m"], 4);
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["coeffs", "--alpha", "1.5", "--M", "4"],
        &["coeffs", "--alpha", "0.5", "--M", "0"],
        &["coeffs", "--M", "4"],
        &["converge", "--f", "nosuch", "--alpha", "0.5"],
        &["converge", "--f", "cos", "--alpha", "0.5", "--h", "0.2:0.1"],
        &["harmonic", "--op", "poisson_max"],
        &["harmonic", "--op", "heat_max", "--sizes", "96:384"],
        &["extension", "--gamma", "0.5", "--f", "indicator", "--window", "3:40"],
        &["dirichlet", "--r", "1.2"],
        &["nosuchcommand"],
    ];
    for args in cases {
        let out = run_in(dir.path(), args);
        assert_eq!(code(&out), 2, "args {args:?}: {out:?}");
    }
}

#[test]
fn converge_band_is_config_not_truth() {
    let dir = tempfile::tempdir().unwrap();
    // smooth data: the sweep fits cleanly and exits 0 when no band is set
    let out = run_in(dir.path(), &["converge", "--f", "cos", "--alpha", "0.5"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let doc = json_at(&dir.path().join("converge.json"));
    assert_eq!(doc["degenerate"], false);
    let slope = doc["report"]["slope"].as_f64().unwrap();
    assert!(slope > 0.0, "slope {slope}");
    assert_eq!(csv_rows(&dir.path().join("converge.csv"), "h,err").len(), 5);

    // a band the measurement does not meet flips only the exit code; the
    // artifacts are still written
    let out = run_in(
        dir.path(),
        &["converge", "--f", "cos", "--alpha", "0.5", "--band", "0.49:0.51",
          "--json", "b.json", "--csv", "b.csv"],
    );
    assert_eq!(code(&out), 3, "{out:?}");
    let doc = json_at(&dir.path().join("b.json"));
    assert_eq!(doc["in_band"], false);
    assert_eq!(doc["report"]["slope"].as_f64().unwrap(), slope);

    // constant data has no measurable error: degenerate, flagged, exit 0
    let out = run_in(
        dir.path(),
        &["converge", "--f", "const_one", "--alpha", "0.5",
          "--json", "c.json", "--csv", "c.csv"],
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let doc = json_at(&dir.path().join("c.json"));
    assert_eq!(doc["degenerate"], true);
    assert_eq!(doc["report"], serde_json::Value::Null);
    assert_eq!(csv_rows(&dir.path().join("c.csv"), "h,err").len(), 0);
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let growth = |json: &str| {
        let out = run_in(
            dir.path(),
            &["harmonic", "--op", "poisson_max", "--gamma", "0.5",
              "--family", "random_signs", "--sizes", "32:64",
              "--trials", "2", "--seed", "9", "--json", json],
        );
        assert_eq!(code(&out), 0, "{out:?}");
        std::fs::read(dir.path().join(json)).unwrap()
    };
    let a = growth("g1.json");
    let b = growth("g2.json");
    assert_eq!(a, b);

    let sweep = |json: &str, csv: &str| {
        let out = run_in(
            dir.path(),
            &["converge", "--f", "sin", "--alpha", "0.3", "--x", "-0.7",
              "--json", json, "--csv", csv],
        );
        assert_eq!(code(&out), 0, "{out:?}");
        (
            std::fs::read(dir.path().join(json)).unwrap(),
            std::fs::read(dir.path().join(csv)).unwrap(),
        )
    };
    assert_eq!(sweep("s1.json", "s1.csv"), sweep("s2.json", "s2.csv"));

    // the seed is honored, not ignored
    let out = run_in(
        dir.path(),
        &["harmonic", "--op", "poisson_max", "--gamma", "0.5",
          "--family", "random_signs", "--sizes", "32:64",
          "--trials", "2", "--seed", "10", "--json", "g3.json"],
    );
    assert_eq!(code(&out), 0);
    assert_ne!(a, std::fs::read(dir.path().join("g3.json")).unwrap());
}

#[test]
fn config_file_defaults_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "alpha = 0.5 # order\nM = 4\nout = from_cfg.csv\n",
    )
    .unwrap();

    let out = run_in(dir.path(), &["coeffs", "--config", "run.cfg"]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(csv_rows(&dir.path().join("from_cfg.csv"), "m,lambda").len(), 5);

    let out = run_in(
        dir.path(),
        &["coeffs", "--config", "run.cfg", "--M", "6", "--out", "override.csv"],
    );
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(csv_rows(&dir.path().join("override.csv"), "m,lambda").len(), 7);

    std::fs::write(dir.path().join("bad.cfg"), "alpha 0.5\n").unwrap();
    let out = run_in(dir.path(), &["coeffs", "--config", "bad.cfg", "--M", "4"]);
    assert_eq!(code(&out), 2, "{out:?}");

    let out = run_in(dir.path(), &["coeffs", "--config", "absent.cfg", "--alpha", "0.5", "--M", "4"]);
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn dirichlet_eigenfixture_residuals_within_tol() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["dirichlet"]);
    assert_eq!(code(&out), 0, "{out:?}");

    let rows = csv_rows(&dir.path().join("dirichlet.csv"), "j,u,exact,residual");
    assert_eq!(rows.len(), 40);
    for row in &rows {
        let (u, exact, res): (f64, f64, f64) = (
            row[1].parse().unwrap(),
            row[2].parse().unwrap(),
            row[3].parse().unwrap(),
        );
        assert!((u - exact).abs() <= 1e-8 * exact.abs());
        assert!(res.abs() <= 1e-10);
    }

    // an unmeetable residual band exits 3, not 2 or 4
    let out = run_in(dir.path(), &["dirichlet", "--tol", "1e-18"]);
    assert_eq!(code(&out), 3, "{out:?}");
}

#[test]
fn extension_neumann_within_band() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["extension", "--gamma", "0.5", "--f", "indicator"]);
    assert_eq!(code(&out), 0, "{out:?}");

    let doc = json_at(&dir.path().join("neumann.json"));
    let max_rel = doc["max_rel_err"].as_f64().unwrap();
    assert!(max_rel <= 1e-3, "rel {max_rel}");
    assert_eq!(doc["comparisons"].as_array().unwrap().len(), 65);

    // three heights over the 65-site window
    let rows = csv_rows(&dir.path().join("extension.csv"), "z,n,U");
    assert_eq!(rows.len(), 3 * 65);
    assert!(dir.path().join("extension.csv.meta.json").exists());
    assert!(dir.path().join("neumann.json.meta.json").exists());
}

#[test]
fn harmonic_growth_and_cz_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["harmonic", "--op", "heat_max", "--family", "indicator", "--sizes", "64:512"],
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let doc = json_at(&dir.path().join("harmonic.json"));
    assert_eq!(doc["op"], "heat_max");
    assert_eq!(doc["family"], "indicator");
    let slope = doc["squared_norm_slope"].as_f64().unwrap();
    let expect = 0.5 / std::f64::consts::PI;
    assert!((slope - expect).abs() <= 0.25 * expect, "slope {slope}");

    let out = run_in(
        dir.path(),
        &["harmonic", "--op", "cz", "--gamma", "0.5", "--j", "8:64", "--k", "48"],
    );
    assert_eq!(code(&out), 0, "{out:?}");
    let rows = csv_rows(&dir.path().join("cz.csv"), "j,s,d");
    assert_eq!(rows.len(), 16);
    let doc = json_at(&dir.path().join("harmonic.json"));
    assert!(doc["s_exponent"].as_f64().unwrap() < -0.5);
    assert!(doc["d_exponent"].as_f64().unwrap() < -1.0);
}

#[test]
fn apply_matches_the_eigen_identity() {
    let dir = tempfile::tempdir().unwrap();
    let (alpha, h) = (0.5f64, 0.5f64);
    let out = run_in(
        dir.path(),
        &["apply", "--f", "exp_neg", "--alpha", "0.5", "--h", "0.5",
          "--window", "-2:2", "--M", "4000"],
    );
    assert_eq!(code(&out), 0, "{out:?}");

    // right difference of e^{-x}: eigenvalue (1 - e^{-h})^alpha / h^alpha
    let eig = (1.0 - (-h).exp()).powf(alpha) / h.powf(alpha);
    let rows = csv_rows(&dir.path().join("apply.csv"), "n,x,value,bound");
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let (x, v, b): (f64, f64, f64) = (
            row[1].parse().unwrap(),
            row[2].parse().unwrap(),
            row[3].parse().unwrap(),
        );
        let want = eig * (-x).exp();
        assert!((v - want).abs() <= b + 1e-12 * want.abs(), "x={x}: {v} vs {want}");
    }
}
