use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_emr-dlt"))
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn design_writes_report_and_distribution() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    let st = bin().args(["design", "--users", "10", "--delta", "0.02", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let dist = emr_dlt::DegreeDistribution::read_file(&out.join("relay.dist")).unwrap();
    assert!(dist.max_degree() <= 10);
    let report = String::from_utf8(read(&out, "design_report.txt")).unwrap();
    assert!(report.contains("gamma_bar\tfeasible\tobjective\toverhead"));
    assert!(String::from_utf8(read(&out, "de_curve.csv")).unwrap().starts_with("overhead,erasure_rate\n"));
    assert!(String::from_utf8(read(&out, "manifest.txt")).unwrap().contains("command=design"));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).arg("--out").arg(tmp.path()).status().unwrap().code();
    assert_eq!(code(&["simulate", "--config", "/nonexistent/run.cfg"]), Some(2));
    assert_eq!(code(&["simulate", "--trials", "abc"]), Some(2));
    assert_eq!(code(&["simulate", "--mode", "sideways"]), Some(2));
    assert_eq!(code(&["simulate", "--eps-down", "0.1,0.2"]), Some(2));

    let bad = tmp.path().join("bad.dist");
    std::fs::write(&bad, "# perspective=node\n1\t0.5\n2\t0.2\n").unwrap();
    assert_eq!(code(&["simulate", "--relay-dist", bad.to_str().unwrap()]), Some(2));

    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "users=10\ncolour=blue\n").unwrap();
    assert_eq!(code(&["de-curve", "--config", cfg.to_str().unwrap()]), Some(2));
}

#[test]
fn infeasible_design_is_a_runtime_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["design", "--sweep-start", "0.5", "--sweep-stop", "1.0", "--sweep-step", "0.5", "--out"])
        .arg(tmp.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |sub: &str, workers: &str| {
        let out = tmp.path().join(format!("{sub}-{workers}"));
        let st = bin()
            .args(["compare", "--users", "10", "--k", "100", "--trials", "6", "--seed", "7"])
            .args(["--eps-up", "0.05", "--user-dist", "rsd", "--workers", workers])
            .arg("--relay-dist")
            .arg(data("reference.dist"))
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        out
    };
    let a = run("a", "1");
    let b = run("b", "2");
    for f in ["sim_buffered.csv", "sim_unbuffered.csv", "sim_uncoded.csv", "de_curve.csv", "sim_buffered_summary.txt"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn config_file_drives_a_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "# small run\nusers=10\nk=50\neps-down=0.1\nrelay-dist={}\ntrials=3\nseed=7\nout={}\n",
            data("reference.dist"),
            out.display()
        ),
    )
    .unwrap();
    let st = bin().args(["simulate", "--compare-buffer", "--eps-up", "0.05", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(0));
    for f in ["sim_buffered.csv", "sim_unbuffered.csv", "sim_buffered_lossless.csv", "manifest.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest = String::from_utf8(read(&out, "manifest.txt")).unwrap();
    assert!(manifest.contains("eps-up=0.05\n") && manifest.contains("compare-buffer=true\n"));
    // the manifest body is itself a valid config
    let body: String = manifest.lines().filter(|l| !l.starts_with("command=") && !l.starts_with("output=")).map(|l| format!("{l}\n")).collect();
    assert!(emr_dlt::cli::ExperimentConfig::from_text(&body).is_ok());
}
