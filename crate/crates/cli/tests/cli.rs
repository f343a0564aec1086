use std::process::{Command, Output};

fn rydberg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydberg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows after the column header line.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn gamma_table_layout() {
    let o = rydberg(&["gamma-table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# rydberg "));
    assert!(text.contains("# command = gamma-table"));
    assert!(text.contains("shape,C3_isotropic,C3_aligned_dipole,C6"));
    let r = rows(&text);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][0], "square");
    assert_eq!(r[1][0], "gaussian");
    // 12 significant digits.
    assert_eq!(r[1][3], "1.08626478725e1");
}

#[test]
fn fig1_curve_clamps_at_saturated_fraction() {
    let o = rydberg(&["pexc", "--preset", "fig1", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let p0 = doc["summary"]["P0"].as_f64().unwrap();
    let rows = doc["rows"].as_array().unwrap();
    let top = rows
        .iter()
        .map(|r| r[1].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!((top - p0).abs() < 1e-15);
    let last = rows.last().unwrap();
    assert_eq!(last[1].as_f64().unwrap(), p0);
    assert!(last[2].as_f64().unwrap() > 0.4);
    assert_eq!(doc["config"]["rho"], "6.5e10");
}

#[test]
fn fig3a_emits_five_curves() {
    let o = rydberg(&["correlation", "--preset", "fig3a", "--set", "sweep.r_points=20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let r = rows(&text);
    assert_eq!(r.len(), 100);
    let variants: std::collections::BTreeSet<&str> = r.iter().map(|x| x[0].as_str()).collect();
    assert_eq!(variants.len(), 5);
    assert!(text.contains("# result variant4.max_P"));
}

#[test]
fn density_sweep_needs_rho() {
    let o = rydberg(&["density-sweep", "--preset", "fig2", "--set", "rho="]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`rho`"));
    let o = rydberg(&["validate", "--set", "command=density-sweep", "--set", "pulse.bandwidth=1e8", "--set", "kernel.c_au=1e21"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`rho`"));
}

#[test]
fn unsupported_exponent_and_unknown_preset() {
    let o = rydberg(&["validate", "--preset", "fig1", "--set", "kernel.s=4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kernel.s"));
    let o = rydberg(&["pexc", "--preset", "fig4"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    for name in ["fig1", "fig2", "fig3a", "fig3b", "table1", "singer-params"] {
        assert!(e.contains(name), "{e}");
    }
}

#[test]
fn config_file_diagnostics_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "# scenario\nrho = 1e10\npulse.lenght = 3e-9\n").unwrap();
    let o = rydberg(&["saturation", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("bad.cfg:3") && e.contains("pulse.lenght"), "{e}");

    std::fs::write(&path, "rho = dense\n").unwrap();
    let o = rydberg(&["saturation", "--preset", "singer-params", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.cfg:1"));
}

#[test]
fn file_then_flags_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(
        &cfg,
        "command = saturation\npulse.duration = 3.75e-8\nkernel.c_au = 4.97e22\nrho = 1e9\n",
    )
    .unwrap();
    let out = dir.path().join("s.csv");
    let o = rydberg(&[
        "saturation",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "rho=2e9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# config rho = 2e9"));
    let p0: f64 = rows(&text)[0][2].parse().unwrap();
    assert!((0.074..0.09).contains(&p0));
    let v = rydberg(&["validate", "--config", cfg.to_str().unwrap()]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("rho = 1e9"));
}

#[test]
fn numerical_failure_exits_three() {
    // The cloud is too small to pad the test atom.
    let o = rydberg(&["mc-validate", "--preset", "fig1", "--set", "mc.atoms=50", "--set", "mc.samples=4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("padding"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = [
        "mc-validate",
        "--set", "pulse.shape=square",
        "--set", "pulse.duration=1e-8",
        "--set", "kernel.c_au=-1e22",
        "--set", "rho=4e9",
        "--set", "mc.atoms=800",
        "--set", "mc.samples=16",
        "--seed", "5",
    ];
    let a = rydberg(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let mut single = args.to_vec();
    single.extend(["--workers", "1"]);
    let b = rydberg(&single);
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("# config workers"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    let mut other = args.to_vec();
    let last = other.len() - 1;
    other[last] = "6";
    assert_ne!(rows(&stdout(&a)), rows(&stdout(&rydberg(&other))));
}

#[test]
fn oracle_trajectory_columns() {
    let o = rydberg(&[
        "oracle",
        "--set", "pulse.shape=square",
        "--set", "pulse.duration=1e-8",
        "--set", "oracle.atoms=3",
        "--set", "oracle.couplings=random",
        "--set", "oracle.points=5",
        "--set", "oracle.residual=true",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("tau,P_1,P_2,P_3,pair_1_2,pair_1_3"));
    assert!(text.contains("# result residual_passes = true"));
    assert_eq!(rows(&text).len(), 5);
}
