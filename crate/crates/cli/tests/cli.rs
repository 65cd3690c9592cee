use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use trackback_cli::config::bundled;

fn trackback(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trackback"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn metric<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no `{key}` in metrics"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn uncontrolled_run_drifts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = trackback(
        &["run", "case1_generalized", "--no-control", "--out", "free"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = fs::read_to_string(dir.path().join("free/trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("t,vx,vy,wz,x,y,psi,delta_s,f_xt"));
    assert_eq!(trace.lines().count(), 2002);
    assert!(trace.ends_with('\n'));
    let last: Vec<f64> = trace
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(last[0], 20.0);
    assert!(last[5] > 5.0);
    assert_eq!(last[7], 0.0);
    let metrics = fs::read_to_string(dir.path().join("free/metrics.txt")).unwrap();
    assert_eq!(metric(&metrics, "recovered"), "false");
    assert_eq!(metric(&metrics, "control"), "off");
    assert_eq!(metric(&metrics, "sim.dt"), "0.001");
    assert_eq!(metric(&metrics, "scenario.vy0"), "20.0");
    assert_eq!(metric(&metrics, "steering.a2"), "0.0");
}

#[test]
fn stock_parameters_do_not_recover_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = trackback(&["run", "case2_reference"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let metrics = fs::read_to_string(dir.path().join("out/case2_reference/metrics.txt")).unwrap();
    assert_eq!(metric(&metrics, "recovered"), "false");
    assert_eq!(metric(&metrics, "steering.a2"), "-1.353");
    assert_eq!(metric(&metrics, "tune.norm"), "squared");
}

#[test]
fn speed_floor_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = bundled("case1_generalized")
        .unwrap()
        .replace("[force]", "[force]\nf_initial = -20000.0");
    let cfg = write_config(dir.path(), "brake.toml", &text);
    let out = trackback(&["run", &cfg, "--no-control"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let metrics = fs::read_to_string(dir.path().join("out/brake/metrics.txt")).unwrap();
    assert!(metric(&metrics, "failure").contains("below the model validity floor"));
    assert_ne!(metric(&metrics, "failure_time"), "none");
    assert_eq!(metric(&metrics, "force.f_initial_source"), "config");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = trackback(&["run", "no_such_config"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("case1_generalized"));
    let cfg = write_config(dir.path(), "bad.toml", "[vehicle]\ndist_front = 1.2\n");
    let out = trackback(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dist_rear"));
}

#[test]
fn model_override_and_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[output]\ndir = \"elsewhere\"\n",
        bundled("case1_generalized").unwrap()
    );
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = trackback(
        &["run", &cfg, "--model", "reference", "--no-control"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let metrics = fs::read_to_string(dir.path().join("elsewhere/metrics.txt")).unwrap();
    assert_eq!(metric(&metrics, "sim.model"), "reference");
    let out = trackback(&["run", &cfg, "--model", "magic"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tune_writes_history_and_a_recovering_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = trackback(&["tune", "case2_generalized", "--out", "t"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let history = fs::read_to_string(dir.path().join("t/history.csv")).unwrap();
    assert_eq!(
        history.lines().next(),
        Some("iter,objective,a1,a2,a_c,tau_c1")
    );
    let rows = history.lines().count() - 1;
    assert!(rows > 1 && rows <= 2000);
    let metrics = fs::read_to_string(dir.path().join("t/metrics.txt")).unwrap();
    assert_eq!(metric(&metrics, "recovered"), "true");

    let rerun = trackback(&["run", "t/tuned.toml", "--out", "r"], dir.path());
    assert_eq!(rerun.status.code(), Some(0));
    assert_eq!(
        fs::read(dir.path().join("t/trace.csv")).unwrap(),
        fs::read(dir.path().join("r/trace.csv")).unwrap()
    );
}

#[test]
fn compare_models_without_control() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |name: &str| {
        let text = bundled(name).unwrap();
        let head = &text[..text.find("[steering]").unwrap()];
        write_config(dir.path(), &format!("{name}.toml"), head)
    };
    let g = strip("case1_generalized");
    let m = strip("case1_reference");
    let out = trackback(&["compare", &g, &m, "--out", "cmp"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let merged = fs::read_to_string(dir.path().join("cmp/compare.csv")).unwrap();
    let header: Vec<&str> = merged.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 17);
    assert_eq!(header[1], "vx_g");
    assert_eq!(header[9], "vx_m");
    // Without steering the rolling-friction terms vanish, so the models coincide up to roundoff.
    for line in merged.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        for i in 1..9 {
            assert!(
                (v[i] - v[i + 8]).abs() <= 1e-9 * (1.0 + v[i].abs()),
                "{line}"
            );
        }
    }
    let report = fs::read_to_string(dir.path().join("cmp/compare.txt")).unwrap();
    let recovered = report.lines().find(|l| l.starts_with("recovered")).unwrap();
    assert_eq!(
        recovered.split_whitespace().collect::<Vec<_>>(),
        ["recovered", "false", "false"]
    );
    assert!(report
        .lines()
        .find(|l| l.starts_with("sim.model"))
        .unwrap()
        .ends_with('*'));
}

#[test]
fn compare_identical_configs_has_no_differences() {
    let dir = tempfile::tempdir().unwrap();
    let out = trackback(
        &[
            "compare",
            "case2_generalized",
            "case2_generalized",
            "--out",
            "same",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let merged = fs::read_to_string(dir.path().join("same/compare.csv")).unwrap();
    assert!(merged.starts_with("t,vx_a,"));
    for line in merged.lines().skip(1) {
        let v: Vec<&str> = line.split(',').collect();
        assert_eq!(v[1..9], v[9..17]);
    }
    let report = fs::read_to_string(dir.path().join("same/compare.txt")).unwrap();
    assert!(!report.lines().any(|l| l.ends_with('*')));
}

#[test]
fn compare_rejects_different_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = trackback(
        &["compare", "case1_generalized", "case2_generalized"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different scenarios"));
}
