use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-cool"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

/// φ = 0.05 at 1 K, where the second-order rates are accurate.
const SMALL_ANGLE: &str = "t_bath_K = 1\ng_over_2pi_MHz = 0.159155\nrate_R_per_s = 1e6\nkappa_per_s = 1e4\n";

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn sweep_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--axis", "delta_MHz:-10:10:5"];
    let a = cli(&args, dir.path());
    let b = cli(&args, dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(data_rows(&text).len(), 5);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("delta_MHz,"));
    assert!(header.contains("t_cav_K_one") && header.contains("t_cav_K_two"));
    assert!(text.lines().any(|l| l.starts_with("# cavity-cool")));
}

#[test]
fn two_axis_sweep_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(
        &["--variant", "two", "--out", "grid.csv", "sweep", "--axis", "delta_MHz:-1:1:3", "--axis", "kappa_per_s=1,100"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(data_rows(&text).len(), 6);
    assert!(!text.contains("_one"));
}

#[test]
fn oracle_same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.cfg"), SMALL_ANGLE).unwrap();
    let args = ["--config", "small.cfg", "--seed", "11", "oracle"];
    let a = cli(&args, dir.path());
    let b = cli(&args, dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn oracle_trajectory_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.cfg"), SMALL_ANGLE).unwrap();
    let out = cli(&["--config", "small.cfg", "oracle", "--mean-field", "--trajectory", "traj.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for suffix in ["one", "two"] {
        let text = fs::read_to_string(dir.path().join(format!("traj_{suffix}.csv"))).unwrap();
        assert!(text.starts_with("t,n_mean,tail_mass"));
        assert!(text.lines().count() > 10);
    }
}

#[test]
fn figure_panels_get_their_own_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["figure", "fig2", "--out", "f2.csv"], dir.path());
    assert!(out.status.success());
    let kappa = fs::read_to_string(dir.path().join("f2_kappa.csv")).unwrap();
    let g = fs::read_to_string(dir.path().join("f2_g.csv")).unwrap();
    assert_eq!(data_rows(&kappa).len(), 81);
    assert_eq!(data_rows(&g).len(), 39);
    assert!(kappa.contains("# preset: fig2"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "t_atom_mK = 50\nbogus_key = 3\n").unwrap();
    let out = cli(&["--config", "bad.cfg", "point"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let out = cli(&["sweep", "--axis", "nonsense:0:1:3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn large_angle_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("big.cfg"), "g_over_2pi_MHz = 4\ntau_ns = 50\n").unwrap();
    let out = cli(&["--config", "big.cfg", "point"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unconverged_oracle_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("hot.cfg"), "t_bath_K = 1\nkappa_per_s = 1e4\nrate_R_per_s = 1e6\n").unwrap();
    let out = cli(
        &["--config", "hot.cfg", "--variant", "one", "oracle", "--mean-field", "--burn-in", "0", "--collisions", "100"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn weights_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["weights"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let w = &v["weights"];
    let f = |k: &str| w[k].as_f64().unwrap();
    let sum = f("rho_e") + f("rho_g") + 2.0 * f("rho_d");
    assert!((sum - 1.0).abs() < 1e-12);
}
