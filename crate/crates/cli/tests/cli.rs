use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn pwtool(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwtool"))
        .args(args)
        .arg("--out")
        .arg(out)
        .current_dir(data())
        .env_remove("PWTOOL_OUT_DIR")
        .output()
        .unwrap()
}

fn result(out: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn out_of_range_exponent_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let r = pwtool(&["build-family", "-c", "configs/family.cfg", "p=1"], &out);
    assert_eq!(r.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn single_mode_control() {
    let dir = tempfile::tempdir().unwrap();
    let r = pwtool(&["control-solve", "-c", "configs/control_single.cfg"], dir.path());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let norm2: f64 = result(&r, "control_norm_sqr").parse().unwrap();
    assert!((norm2 - 2.0 / (1.0 - (-2.0f64).exp())).abs() < 1e-8);
    let signal = fs::read_to_string(dir.path().join("signal.csv")).unwrap();
    assert!(signal.starts_with("# pwtool control-solve seed=0\nt,re_u,im_u\n"));
    assert_eq!(signal.lines().count(), 2 + 1025);
}

#[test]
fn sampled_signal_replays_through_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let solve = dir.path().join("solve");
    assert!(pwtool(&["control-solve", "-c", "configs/control_single.cfg"], &solve)
        .status
        .success());
    let signal = solve.join("signal.csv");
    let r = pwtool(
        &[
            "control-simulate",
            "-c",
            "configs/control_single.cfg",
            &format!("signal={}", signal.display()),
        ],
        &dir.path().join("sim"),
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let err: f64 = result(&r, "endpoint_error").parse().unwrap();
    assert!(err < 1e-6, "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path();
    assert_eq!(pwtool(&["--help"], o).status.code(), Some(0));
    assert_eq!(pwtool(&["no-such-command"], o).status.code(), Some(2));
    assert_eq!(pwtool(&["density", "not-an-override"], o).status.code(), Some(2));
    assert_eq!(
        pwtool(&["density", "-c", "configs/analyze.cfg", "typo=1"], o)
            .status
            .code(),
        Some(3)
    );
    assert_eq!(pwtool(&["build-multiplier", "epsilon=-1"], o).status.code(), Some(4));

    let bad = o.join("bad.csv");
    fs::write(&bad, "n,re_lambda,im_lambda,re_b,im_b\n1,x,0,1,0\n").unwrap();
    let sys = format!("system={}", bad.display());
    assert_eq!(pwtool(&["control-solve", &sys, "tau=1"], o).status.code(), Some(3));

    fs::write(&bad, "n,re_lambda,im_lambda,re_b,im_b\n1,-1,0,1,0\n").unwrap();
    assert_eq!(pwtool(&["control-solve", &sys, "tau=1"], o).status.code(), Some(5));

    let dup = o.join("dup.txt");
    fs::write(&dup, "0 0\n0 0\n").unwrap();
    let seq = format!("sequence={}", dup.display());
    assert_eq!(pwtool(&["analyze-sequence", &seq], o).status.code(), Some(5));

    let blocker = o.join("file");
    fs::write(&blocker, "").unwrap();
    assert_eq!(
        pwtool(&["build-multiplier", "epsilon=0.5"], &blocker.join("sub"))
            .status
            .code(),
        Some(7)
    );
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let r = Command::new(env!("CARGO_BIN_EXE_pwtool"))
        .args(["build-multiplier", "epsilon=1"])
        .env("PWTOOL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(r.status.success());
    assert!(dir.path().join("spectrum.csv").exists());
}

#[test]
fn summary_records_inputs_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let r = pwtool(&["analyze-sequence", "-c", "configs/analyze.cfg"], dir.path());
    assert!(r.status.success());
    let s = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(s.contains("input.analyze.cfg = sha256:"));
    assert!(s.contains("input.perturbed_p2_n25.txt = sha256:"));
    assert!(s.contains("artifact.analysis.csv = sha256:"));
    assert!(s.contains("param.sequence = perturbed_p2_n25.txt"));
    let rows = fs::read_to_string(dir.path().join("analysis.csv")).unwrap();
    assert_eq!(rows.lines().count(), 2 + 51);
}

#[test]
fn spectrum_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pwtool(&["build-multiplier", "epsilon=0.5"], dir.path())
        .status
        .success());
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let f = pwinterp::io::parse_spectrum(&text, "h").unwrap();
    let h0 = f.eval(num_complex::Complex64::new(0.0, 0.0)).unwrap();
    assert!((h0.re - 1.0).abs() < 1e-10 && h0.im.abs() < 1e-10);
}

#[test]
fn every_bundled_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        ("analyze-sequence", "analyze"),
        ("density", "analyze"),
        ("carleson-measure", "analyze"),
        ("build-multiplier", "multiplier"),
        ("multiplier-probe", "multiplier"),
        ("build-family", "family"),
        ("solve-interpolation", "interpolation"),
        ("mcphail-check", "mcphail"),
        ("control-solve", "control_ladder"),
        ("control-simulate", "control_ladder"),
        ("control-report", "control_report"),
    ];
    for (cmd, cfg) in runs {
        let r = pwtool(&[cmd, "-c", &format!("configs/{cfg}.cfg")], &dir.path().join(cmd));
        assert!(r.status.success(), "{cmd}: {}", String::from_utf8_lossy(&r.stderr));
    }
}
