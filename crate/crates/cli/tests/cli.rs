//! End-to-end tests of the `satflux` binary: run directories, the metadata
//! round trip, tamper detection, wave profiles, sweeps, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CONFIG: &str = r#"
[flux]
family = "classical"
nu = 1.0
c = 1.0

[model]
a = 1.0
m = 0.0
M = 1.0

[grid]
N = 64

[time]
t_end = 0.05
snapshot_dt = 0.01

[initial]
kind = "constant"
value = 1.0
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_satflux"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_cfg(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_writes_complete_run_directory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(tmp.path(), CONFIG);
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "--seedless",
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--emit-svg",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let diag = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,sigma_minus,sigma_plus,ell,mu_bar,sigma_c,mass_center,vmin,vmax,\
         mass_law_residual,bv_seminorm,rh_minus,rh_plus"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 6, "expected a row per cadence tick, got {}", rows.len());

    // spreading run: ell column strictly increasing
    let ells: Vec<f64> =
        rows.iter().map(|r| r.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert!(ells.windows(2).all(|w| w[1] > w[0]), "ell not increasing: {ells:?}");

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("metadata.json")).unwrap())
            .unwrap();
    assert_eq!(meta["run"]["termination"]["kind"], "completed");
    assert_eq!(meta["run"]["snapshots"].as_u64().unwrap() as usize, rows.len());
    assert_eq!(meta["config"]["grid"]["N"].as_u64().unwrap(), 64);

    let n_snaps = fs::read_dir(out_dir.join("snapshots")).unwrap().count();
    assert_eq!(n_snaps, rows.len());
    let snap0 = fs::read_to_string(out_dir.join("snapshots/snap_000000.csv")).unwrap();
    assert!(snap0.starts_with("eta,v\n"));
    assert_eq!(snap0.lines().count(), 65);

    for name in ["ell.svg", "profiles.svg"] {
        let svg = fs::read_to_string(out_dir.join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name} is not svg");
        assert!(svg.contains("viewBox=\"0 0 800 500\""));
    }
}

#[test]
fn metadata_round_trip_reproduces_diagnostics_bit_for_bit() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(tmp.path(), CONFIG);
    let out1 = tmp.path().join("one");
    let out2 = tmp.path().join("two");

    let first = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
    ]);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));

    let meta_path = out1.join("metadata.json");
    let second = run(&[
        "simulate",
        "--config",
        meta_path.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(code(&second), 0, "stderr: {}", stderr(&second));

    let a = fs::read(out1.join("diagnostics.csv")).unwrap();
    let b = fs::read(out2.join("diagnostics.csv")).unwrap();
    assert_eq!(a, b, "diagnostics differ between original and metadata replay");

    for name in ["snap_000000.csv", "snap_000003.csv"] {
        let a = fs::read(out1.join("snapshots").join(name)).unwrap();
        let b = fs::read(out2.join("snapshots").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
}

#[test]
fn check_passes_clean_run_and_fails_tampered_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(tmp.path(), CONFIG);
    let out_dir = tmp.path().join("out");
    let sim = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&sim), 0, "stderr: {}", stderr(&sim));

    let clean = run(&["check", "--run", out_dir.to_str().unwrap()]);
    assert_eq!(code(&clean), 0, "stderr: {}", stderr(&clean));
    assert!(stdout(&clean).contains("PASS mass-law"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert!(report.as_array().unwrap().len() >= 6);

    // perturb one cell average in a middle snapshot by 1e-6
    let snap = out_dir.join("snapshots/snap_000003.csv");
    let text = fs::read_to_string(&snap).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let (eta, v) = lines[10].split_once(',').unwrap();
    let bumped: f64 = v.parse::<f64>().unwrap() + 1e-6;
    lines[10] = format!("{eta},{bumped:.16e}");
    fs::write(&snap, lines.join("\n") + "\n").unwrap();

    let tampered = run(&["check", "--run", out_dir.to_str().unwrap()]);
    assert_eq!(code(&tampered), 1, "stdout: {}", stdout(&tampered));
    assert!(stdout(&tampered).contains("FAIL mass-law"));
}

#[test]
fn unknown_config_key_is_rejected_with_diagnostic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(tmp.path(), &CONFIG.replace("N = 64", "N = 64\nextra_knob = 1"));
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("extra_knob"), "diagnostic must name the key: {err}");
    assert!(err.contains("line"), "diagnostic must locate the key: {err}");
}

#[test]
fn malformed_configs_exit_two() {
    let tmp = TempDir::new().unwrap();
    // missing [time] table
    let truncated: String =
        CONFIG.lines().take_while(|l| !l.starts_with("[time]")).collect::<Vec<_>>().join("\n");
    let cfg = write_cfg(tmp.path(), &truncated);
    assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap()])), 2);

    // invalid model number caught by parse-time validation
    let cfg2 = tmp.path().join("bad.toml");
    fs::write(&cfg2, CONFIG.replace("a = 1.0", "a = -2.0")).unwrap();
    assert_eq!(code(&run(&["simulate", "--config", cfg2.to_str().unwrap()])), 2);

    // nonexistent path
    let missing = tmp.path().join("nope.toml");
    assert_eq!(code(&run(&["simulate", "--config", missing.to_str().unwrap()])), 2);
}

#[test]
fn jump_wave_midpoint_doubles_unit_edge() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("tw");
    let out = run(&[
        "tw", "--kind", "jump", "--a", "1", "--c", "1", "--m", "0", "--nu", "1",
        "--v-edge", "1", "--nodes", "51", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let csv = fs::read_to_string(out_dir.join("profile.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kappa,U,xi");
    assert_eq!(lines.len(), 52);
    let mid: Vec<f64> = lines[26].split(',').map(|t| t.parse().unwrap()).collect();
    assert!((mid[0] - 1.0).abs() < 1e-12, "midpoint kappa = M/2 = 1, got {}", mid[0]);
    assert!((mid[1] - 2.0).abs() < 1e-9, "midpoint U, got {}", mid[1]);

    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("profile.json")).unwrap())
            .unwrap();
    assert_eq!(side["kind"], "jump");
    assert_eq!(side["M"].as_f64().unwrap(), 2.0);
    assert!(side["sigma"].as_f64().unwrap().abs() < 1e-9);
    assert!(side["residuals"]["edge_max"].as_f64().unwrap() < 1e-9);
}

#[test]
fn continuous_wave_defaults_to_the_balanced_speed() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("tw");
    let out = run(&[
        "tw", "--kind", "continuous", "--a", "1", "--c", "1", "--m", "1", "--nu", "1",
        "--M", "1", "--nodes", "101", "--out", out_dir.to_str().unwrap(), "--emit-svg",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("profile.json")).unwrap())
            .unwrap();
    assert_eq!(side["kind"], "continuous");
    assert_eq!(side["tau"].as_f64().unwrap(), -0.5);
    assert!((side["kappa_bar"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert!(side["sigma"].as_f64().unwrap().abs() < 1e-8);
    assert!(side["residuals"]["edge_max"].as_f64().unwrap() < 1e-8);
    assert!(fs::read_to_string(out_dir.join("profile.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn tw_rejects_mismatched_flags() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("tw");
    // continuous without --M
    let out = run(&["tw", "--kind", "continuous", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    // jump with --tau
    let out = run(&[
        "tw", "--kind", "jump", "--v-edge", "1", "--tau=-0.5",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_runs_each_value_into_its_subdirectory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(tmp.path(), &CONFIG.replace("t_end = 0.05", "t_end = 0.02"));
    let root = tmp.path().join("sweep");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--param",
        "M",
        "--values",
        "0.5,1.0",
        "--out",
        root.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    for (token, mass) in [("0.5", 0.5), ("1.0", 1.0)] {
        let dir = root.join(format!("M={token}"));
        assert!(dir.join("diagnostics.csv").is_file(), "missing member {token}");
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap())
                .unwrap();
        assert_eq!(meta["config"]["model"]["M"].as_f64().unwrap(), mass);
    }
    assert_eq!(code(&run(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--param", "bogus", "--values", "1",
    ])), 2);
}

#[test]
fn satflux_out_env_supplies_default_directory() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("env-out");
    let out = bin()
        .env("SATFLUX_OUT", out_dir.to_str().unwrap())
        .args(["tw", "--kind", "jump", "--v-edge", "1", "--nodes", "25"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(out_dir.join("profile.csv").is_file());
}
