use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bearing_ffi::*;

fn last_error() -> String {
    let p = bearing_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn square_framework(diagonal: bool) -> *mut BearingFramework {
    let mut edges = vec![0usize, 1, 1, 3, 3, 2, 2, 0];
    if diagonal {
        edges.extend([0, 3]);
    }
    let mut g = ptr::null_mut();
    assert_eq!(bearing_graph_new(4, edges.as_ptr(), edges.len() / 2, &mut g), BearingStatus::Ok);
    let coords = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
    let mut fw = ptr::null_mut();
    assert_eq!(bearing_framework_new(g, 2, coords.as_ptr(), coords.len(), &mut fw), BearingStatus::Ok);
    bearing_graph_free(g);
    fw
}

#[test]
fn rigidity_through_handles() {
    unsafe {
        let fw = square_framework(false);
        let (mut rank, mut req, mut rigid) = (0usize, 0usize, true);
        assert_eq!(bearing_framework_rigidity(fw, &mut rank, &mut req, &mut rigid), BearingStatus::Ok);
        assert_eq!((rank, req, rigid), (4, 5, false));
        bearing_framework_free(fw);

        let fw = square_framework(true);
        assert_eq!(bearing_framework_rigidity(fw, &mut rank, &mut req, &mut rigid), BearingStatus::Ok);
        assert_eq!((rank, rigid), (5, true));

        let mut written = 0usize;
        assert_eq!(
            bearing_framework_bearings(fw, ptr::null_mut(), 0, &mut written),
            BearingStatus::BufferTooSmall
        );
        assert_eq!(written, 10);
        let mut buf = vec![0.0; written];
        assert_eq!(bearing_framework_bearings(fw, buf.as_mut_ptr(), buf.len(), &mut written), BearingStatus::Ok);
        assert_eq!(&buf[..4], &[1.0, 0.0, 0.0, 1.0]);

        let (mut rows, mut cols) = (0usize, 0usize);
        bearing_framework_rigidity_matrix(fw, ptr::null_mut(), 0, &mut rows, &mut cols);
        assert_eq!((rows, cols), (10, 8));
        let mut l = vec![0.0; 64];
        assert_eq!(bearing_framework_laplacian(fw, l.as_mut_ptr(), 64, &mut written), BearingStatus::Ok);
        for i in 0..8 {
            for j in 0..8 {
                assert!((l[i * 8 + j] - l[j * 8 + i]).abs() < 1e-15);
            }
        }
        bearing_framework_free(fw);
    }
}

#[test]
fn errors_map_to_codes_and_messages() {
    unsafe {
        let mut g = ptr::null_mut();
        let edges = [0usize, 0];
        assert_eq!(bearing_graph_new(3, edges.as_ptr(), 1, &mut g), BearingStatus::InvalidInput);
        assert!(last_error().contains("self-loop") || last_error().contains('0'), "{}", last_error());
        assert_eq!(bearing_graph_new(3, ptr::null(), 1, &mut g), BearingStatus::NullPointer);

        let edges = [0usize, 1];
        assert_eq!(bearing_graph_new(2, edges.as_ptr(), 1, &mut g), BearingStatus::Ok);
        assert!(bearing_last_error_message().is_null());
        let coords = [1.0, 1.0, 1.0, 1.0];
        let mut fw = ptr::null_mut();
        assert_eq!(bearing_framework_new(g, 2, coords.as_ptr(), 4, &mut fw), BearingStatus::Ok);
        let mut buf = [0.0; 2];
        assert_eq!(bearing_framework_bearings(fw, buf.as_mut_ptr(), 2, ptr::null_mut()), BearingStatus::Degenerate);
        bearing_framework_free(fw);
        bearing_graph_free(g);
    }
}

#[test]
fn closed_forms() {
    unsafe {
        let p0 = [0.0, 0.0, 2.0, 1.0];
        let target = [0.0, 0.0, 0.0, 1.0];
        let mut out = [0.0; 4];
        assert_eq!(
            bearing_predict_leaderless(2, p0.as_ptr(), target.as_ptr(), 4, out.as_mut_ptr()),
            BearingStatus::Ok
        );
        let want = [1.0, 0.0, 1.0, 1.0];
        for k in 0..4 {
            assert!((out[k] - want[k]).abs() < 1e-12);
        }

        let fw = square_framework(true);
        let leaders = [3usize, 0];
        let pos = [4.0, 4.0, 2.0, 2.0];
        let mut full = [0.0; 8];
        let mut feasible = false;
        assert_eq!(
            bearing_predict_leader_follower(fw, leaders.as_ptr(), 2, pos.as_ptr(), full.as_mut_ptr(), 8, &mut feasible),
            BearingStatus::Ok
        );
        assert!(feasible);
        let want = [2.0, 2.0, 4.0, 2.0, 2.0, 4.0, 4.0, 4.0];
        for k in 0..8 {
            assert!((full[k] - want[k]).abs() < 1e-10, "{full:?}");
        }

        let anchors = [0usize, 3];
        assert_eq!(bearing_localize(fw, anchors.as_ptr(), 2, full.as_mut_ptr(), 8), BearingStatus::Ok);
        let truth = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        for k in 0..8 {
            assert!((full[k] - truth[k]).abs() < 1e-10);
        }
        assert_eq!(bearing_localize(fw, anchors.as_ptr(), 1, full.as_mut_ptr(), 8), BearingStatus::Singular);
        bearing_framework_free(fw);
    }
}

const PAIR: &str = r#"
name = "pair"
kind = "formation-leaderless"
dimension = 2
agents = 2
edges = [[0, 1]]
[[bearings]]
from = 0
to = 1
g = [0.0, 1.0]
[initial]
mode = "explicit"
positions = [[0.0, 0.0], [2.0, 1.0]]
[assertions]
prediction_tolerance = 1e-6
"#;

#[test]
fn scenario_run_and_report() {
    unsafe {
        let text = CString::new(PAIR).unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(bearing_scenario_parse(text.as_ptr(), &mut s), BearingStatus::Ok);
        let dir = tempfile::tempdir().unwrap();
        let dir_c = CString::new(dir.path().to_str().unwrap()).unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(bearing_scenario_run(s, dir_c.as_ptr(), &mut r), BearingStatus::Ok);
        assert!(bearing_report_passed(r));
        let mut json = ptr::null_mut();
        assert_eq!(bearing_report_json(r, &mut json), BearingStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["scenario"], "pair");
        bearing_string_free(json);
        bearing_report_free(r);
        bearing_scenario_free(s);
        assert!(dir.path().join("pair.csv").exists());

        let bad = CString::new("kind = ").unwrap();
        assert_eq!(bearing_scenario_parse(bad.as_ptr(), &mut s), BearingStatus::Parse);
        let missing = CString::new("/nonexistent/scenario.toml").unwrap();
        assert_eq!(bearing_scenario_load(missing.as_ptr(), &mut s), BearingStatus::Io);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bearing.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    for line in src.lines().filter(|l| l.contains("extern \"C\" fn ")) {
        let name = line.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("BEARING_STATUS_BUFFER_TOO_SMALL = 9"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "bearing.h"

int main(void) {
    size_t edges[] = {0, 1, 1, 3, 3, 2, 2, 0, 0, 3};
    double coords[] = {0, 0, 1, 0, 0, 1, 1, 1};
    BearingGraph *g = NULL;
    BearingFramework *fw = NULL;
    if (bearing_graph_new(4, edges, 5, &g) != BEARING_STATUS_OK) return 1;
    if (bearing_framework_new(g, 2, coords, 8, &fw) != BEARING_STATUS_OK) return 2;
    size_t rank = 0, required = 0;
    bool rigid = false;
    if (bearing_framework_rigidity(fw, &rank, &required, &rigid) != BEARING_STATUS_OK) return 3;
    printf("rank=%zu required=%zu rigid=%d\n", rank, required, (int)rigid);
    size_t bad[] = {0, 9};
    BearingGraph *g2 = NULL;
    BearingStatus st = bearing_graph_new(4, bad, 1, &g2);
    printf("status=%d message=%s\n", (int)st, bearing_last_error_message());
    bearing_framework_free(fw);
    bearing_graph_free(g);
    return rigid ? 0 : 4;
}
"#;

/// Compiles a small C client against the static library and header.
#[test]
fn c_client_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir: PathBuf = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libbearing_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.path().join("client");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("rank=5 required=5 rigid=1"), "{stdout}");
    assert!(stdout.contains("status=2 message="), "{stdout}");
}
