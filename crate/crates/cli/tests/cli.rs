use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn blie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blie")).args(args).env_remove(blie_cli::OUT_DIR_ENV).output().expect("run blie")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
fn run_in_process(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = blie_cli::run(std::iter::once("blie").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn describe_se2() {
    let o = blie(&["describe", "--config", &config("se2.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("dim G=3, dim H=2, G/H ≅ S¹"), "{text}");
    assert!(text.contains("[J, P1] = P2"));
    assert!(text.contains("[J, P2] = -P1"));
}

#[test]
fn describe_galilean() {
    let (code, text, _) = run_in_process(&["describe", "--config", &config("galilean.toml")]);
    assert_eq!(code, 0);
    assert!(text.contains("dim G=10, dim H=9"), "{text}");
    assert!(text.contains("basis: J1, J2, J3, K1, K2, K3, P1, P2, P3, E"), "{text}");
}

#[test]
fn reduce_tables() {
    let o = blie(&["reduce", "--config", &config("heisenberg.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let nonzero: Vec<&str> = csv.lines().skip(1).filter(|l| !l.ends_with(",0")).collect();
    assert_eq!(nonzero, ["mu_X2,mu_Y2,-mu_Z", "a1,p,a1"]);

    let (code, csv, _) = run_in_process(&["reduce", "--ambient", "--config", &config("galilean.toml")]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("kind,left,right,value\n"));
    assert!(csv.contains("ambient,mu_K1,mu_E,-mu_P1\n"), "{csv}");
}

#[test]
fn bracket_table_csv() {
    let (code, csv, _) = run_in_process(&["bracket-table", "--config", &config("se2.toml")]);
    assert_eq!(code, 0);
    assert_eq!(csv, "left,right,J,P1,P2\nJ,P1,0,0,1\nJ,P2,0,-1,0\nP1,P2,0,0,0\n");
}

#[test]
fn verify_heisenberg_q2_passes() {
    let o = blie(&["verify", "--config", &config("heisenberg.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("status: pass"));
}

#[test]
fn verify_fault_injection_names_jacobi() {
    let o = blie(&["verify", "--config", &config("se2_corrupted.toml")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("verification failed: lie: Jacobi"), "{}", stderr(&o));
    assert!(stdout(&o).contains("Jacobi: ") && stdout(&o).contains("status=FAIL"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown_key.toml", "[group]\nbuiltin = \"se2\"\nwidth = 2\n"),
        ("two_sources.toml", "[group]\nbuiltin = \"se2\"\nstructure_constants = []\nbasis = []\n"),
        ("no_group.toml", "seed = 1\n"),
        ("bad_builtin.toml", "[group]\nbuiltin = \"so3\"\n"),
        ("bad_tolerance.toml", "[group]\nbuiltin = \"se2\"\n[verify]\ntolerance = -1.0\n"),
        ("bad_hamiltonian.toml", "[group]\nbuiltin = \"se2\"\n[flow]\nhamiltonian = \"p +\"\n"),
        ("not_toml.toml", "[group\n"),
    ];
    for (name, body) in cases {
        let path = write_config(dir.path(), name, body);
        let cmd = if name == "bad_hamiltonian.toml" { "flow" } else { "verify" };
        let (code, _, err) = run_in_process(&[cmd, "--config", &path]);
        assert_eq!(code, 2, "{name}: {err}");
        assert!(err.starts_with("error: "), "{name}: {err}");
    }
    let (code, _, err) = run_in_process(&["describe", "--config", "/nonexistent/blie.toml"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run_in_process(&["describe"]);
    assert_eq!(code, 2);
    let (code, _, _) = run_in_process(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn flow_from_z_keeps_phi_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "z.toml",
        "[group]\nbuiltin = \"se2\"\n[flow]\nhamiltonian = \"p^2/2 + mu_P1*p\"\nx0 = { phi = 0.0, p = 0.7, mu_P1 = 0.2 }\nt_end = 2.0\n",
    );
    let o = blie(&["flow", "--config", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let phi = header.iter().position(|h| *h == "phi").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2001);
    assert!(rows.iter().all(|r| r.split(',').nth(phi) == Some("0.0")));
    assert!(stderr(&o).contains("phi_sign_constant: true"), "{}", stderr(&o));
}

#[test]
fn flow_se2_reaches_e() {
    let (code, csv, err) = run_in_process(&["flow", "--config", &config("se2.toml")]);
    assert_eq!(code, 0, "{err}");
    let last = csv.lines().last().unwrap();
    let phi: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((phi - std::f64::consts::E).abs() <= 1e-6);
    assert!(csv.starts_with("t,mu_P1,mu_P2,phi,p,H,C[mu_P1],C[mu_P2]\n"));
}

#[test]
fn output_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_blie"))
        .args(["reduce", "--config", &config("se2.toml")])
        .env(blie_cli::OUT_DIR_ENV, &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(env_dir.join("reduce.csv")).unwrap();
    assert!(written.contains("phi,p,phi"));
    assert!(stdout(&o).starts_with("wrote "));

    let explicit = dir.path().join("explicit.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_blie"))
        .args(["reduce", "--config", &config("se2.toml"), "--out", &explicit.display().to_string()])
        .env(blie_cli::OUT_DIR_ENV, &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&explicit).unwrap(), written);
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["verify", "--config", "galilean.toml", "--seed", "3"],
        vec!["flow", "--config", "galilean.toml"],
        vec!["describe", "--config", "heisenberg.toml"],
    ] {
        let path = config(args[2]);
        let mut full = args.clone();
        full[2] = &path;
        let a = blie(&full);
        let b = blie(&full);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stderr, b.stderr, "{args:?}");
    }
}

#[test]
fn seed_changes_samples_but_not_verdict() {
    let a = blie(&["verify", "--config", &config("se2.toml"), "--seed", "1"]);
    let b = blie(&["verify", "--config", &config("se2.toml"), "--seed", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert!(stdout(&a).contains("seed: 1"));
    assert!(stdout(&b).contains("seed: 2"));
}

#[test]
fn tolerance_override_can_fail_verification() {
    let (code, _, err) = run_in_process(&["verify", "--config", &config("galilean.toml"), "--tolerance", "1e-300"]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = run_in_process(&["verify", "--config", &config("se2.toml"), "--tolerance", "0"]);
    assert_eq!(code, 2);
}
