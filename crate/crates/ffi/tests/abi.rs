use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use emr_dlt_ffi::*;

#[test]
fn reference_distribution_accessors() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(emr_distribution_reference(&mut d), EmrStatus::Ok);
        assert_eq!(emr_distribution_max_degree(d), 10);
        assert_eq!(emr_distribution_prob(d, 2), 0.4281);
        assert_eq!(emr_distribution_prob(d, 40), 0.0);
        let mut p = 0.0;
        assert_eq!(emr_de_erasure(d, 10, 0.0, &mut p), EmrStatus::Ok);
        assert_eq!(p, 1.0);
        emr_distribution_free(d);
    }
}

#[test]
fn null_handles_and_bad_input() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(emr_de_erasure(ptr::null(), 10, 1.0, &mut out), EmrStatus::NullPointer);
        let msg = CStr::from_ptr(emr_last_error_message()).to_str().unwrap();
        assert!(msg.contains("gamma"));
        assert_eq!(emr_distribution_max_degree(ptr::null()), 0);
        assert!(emr_design_overhead(ptr::null()).is_nan());

        let mut d = ptr::null_mut();
        assert_eq!(
            emr_distribution_robust_soliton(1, 0.03, 0.05, &mut d),
            EmrStatus::InvalidArgument
        );
        assert!(d.is_null());
        let missing = CString::new("/nonexistent/x.dist").unwrap();
        assert_eq!(emr_distribution_read_file(missing.as_ptr(), &mut d), EmrStatus::Io);
    }
}

#[test]
fn design_round_trip() {
    unsafe {
        let mut design = ptr::null_mut();
        assert_eq!(emr_design_run(10, 0, 0.02, 200, &mut design), EmrStatus::Ok);
        let eps = emr_design_overhead(design);
        assert!(eps > 1.0 && eps < 1.2, "{eps}");
        let mut g = ptr::null_mut();
        assert_eq!(emr_design_distribution(design, &mut g), EmrStatus::Ok);
        let mut t = 0.0;
        assert_eq!(emr_de_threshold(g, 10, 0.02, &mut t), EmrStatus::Ok);
        assert!((t - eps).abs() < 1e-9);
        emr_distribution_free(g);
        emr_design_free(design);

        assert_eq!(emr_design_run(1, 0, 0.02, 200, &mut design), EmrStatus::InvalidArgument);
    }
}

#[test]
fn uncoded_campaign_needs_user_dist() {
    unsafe {
        let mut g = ptr::null_mut();
        emr_distribution_reference(&mut g);
        let p = EmrNetworkParams {
            users: 10,
            k: 20,
            eps_up: 0.0,
            eps_down: 0.0,
            mode: EmrRelayMode::Uncoded,
            max_broadcast_phases: 0,
            seed: 1,
        };
        let grid = [1.0];
        let mut c = ptr::null_mut();
        assert_eq!(
            emr_campaign_run(&p, g, ptr::null(), 2, grid.as_ptr(), 1, &mut c),
            EmrStatus::NullPointer
        );
        let mut raptor = ptr::null_mut();
        emr_distribution_raptor(&mut raptor);
        // raptor reaches degree 66 > K
        assert_eq!(
            emr_campaign_run(&p, g, raptor, 2, grid.as_ptr(), 1, &mut c),
            EmrStatus::InvalidArgument
        );
        emr_distribution_free(raptor);
        emr_distribution_free(g);
    }
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header_and_staticlib() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libemr_dlt_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("threshold 1.15"));
}
