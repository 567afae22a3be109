use std::ffi::{CStr, CString};
use std::ptr;

use trajmatch::io::write_scene_csv;
use trajmatch::synth::{drop_back_play, generate_play, wide_left_play, PerturbConfig};
use trajmatch_ffi::*;

fn last_error() -> String {
    let p = tm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scene_from_csv(path: &std::path::Path) -> *mut TmScene {
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut scene = ptr::null_mut();
    assert_eq!(unsafe { tm_scene_from_csv(c.as_ptr(), &mut scene) }, TmStatus::Ok);
    scene
}

fn segment(scene: *const TmScene) -> *mut TmGraph {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { tm_scene_segment(scene, ptr::null(), &mut g) }, TmStatus::Ok);
    g
}

fn play_csv(dir: &std::path::Path, name: &str, wide: bool) -> std::path::PathBuf {
    let play = if wide { wide_left_play() } else { drop_back_play() };
    let scene = generate_play(&play, &PerturbConfig::default()).unwrap();
    let path = dir.join(name);
    write_scene_csv(&scene, &path).unwrap();
    path
}

#[test]
fn version_is_a_semver_string() {
    let v = unsafe { CStr::from_ptr(tm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn csv_segment_match_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let a = scene_from_csv(&play_csv(dir.path(), "a.csv", false));
    let b = scene_from_csv(&play_csv(dir.path(), "b.csv", true));

    let mut count = 0usize;
    assert_eq!(unsafe { tm_scene_trajectory_count(a, &mut count) }, TmStatus::Ok);
    assert_eq!(count, 10);

    let (ga, gb) = (segment(a), segment(b));
    let mut nodes = 0usize;
    assert_eq!(unsafe { tm_graph_node_count(ga, &mut nodes) }, TmStatus::Ok);
    assert!(nodes >= 5);

    let mut self_report = ptr::null_mut();
    assert_eq!(
        unsafe { tm_match(ga, ga, TmMethod::Icm, ptr::null(), &mut self_report) },
        TmStatus::Ok
    );
    let mut len = 0usize;
    assert_eq!(unsafe { tm_report_mapping_len(self_report, &mut len) }, TmStatus::Ok);
    assert_eq!(len, nodes);
    let mut mapping = vec![usize::MAX; len];
    assert_eq!(
        unsafe { tm_report_mapping(self_report, mapping.as_mut_ptr(), len) },
        TmStatus::Ok
    );
    assert_eq!(mapping, (0..nodes).collect::<Vec<_>>());
    let mut self_sim = f64::NAN;
    assert_eq!(unsafe { tm_report_log_similarity(self_report, &mut self_sim) }, TmStatus::Ok);
    assert!(self_sim.abs() < 1e-9);

    let mut cross = ptr::null_mut();
    assert_eq!(
        unsafe { tm_match(ga, gb, TmMethod::Meanfield, ptr::null(), &mut cross) },
        TmStatus::Ok
    );
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { tm_report_to_json(cross, &mut json) }, TmStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["method"], "meanfield");
    assert!(v["marginals"]["q"].is_array());
    unsafe { tm_string_free(json) };

    let mut gjson = ptr::null_mut();
    assert_eq!(unsafe { tm_graph_to_json(ga, &mut gjson) }, TmStatus::Ok);
    let g: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(gjson) }.to_str().unwrap()).unwrap();
    assert_eq!(g["nodes"].as_array().unwrap().len(), nodes);
    assert_eq!(g["edges"].as_array().unwrap().len(), nodes * (nodes - 1) / 2);
    unsafe {
        tm_string_free(gjson);
        tm_report_free(self_report);
        tm_report_free(cross);
        tm_graph_free(ga);
        tm_graph_free(gb);
        tm_scene_free(a);
        tm_scene_free(b);
    }
}

#[test]
fn samples_constructor_groups_and_sorts() {
    let ents: Vec<CString> = ["e", "e", "e", "e", "f", "f"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let pts: Vec<CString> = ["p", "p", "q", "q", "p", "p"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ep: Vec<_> = ents.iter().map(|c| c.as_ptr()).collect();
    let pp: Vec<_> = pts.iter().map(|c| c.as_ptr()).collect();
    let frames = [1i64, 0, 0, 1, 0, 1];
    let xs = [1.0, 0.0, 0.0, 1.0, 2.0, 3.0];
    let ys = [0.0; 6];
    let mut scene = ptr::null_mut();
    let st = unsafe {
        tm_scene_from_samples(6, ep.as_ptr(), pp.as_ptr(), frames.as_ptr(), xs.as_ptr(), ys.as_ptr(), &mut scene)
    };
    assert_eq!(st, TmStatus::Ok);
    let mut count = 0;
    unsafe { tm_scene_trajectory_count(scene, &mut count) };
    assert_eq!(count, 3);
    unsafe { tm_scene_free(scene) };

    // duplicate frame in one trajectory
    let frames = [0i64, 0, 0, 1, 0, 1];
    let st = unsafe {
        tm_scene_from_samples(6, ep.as_ptr(), pp.as_ptr(), frames.as_ptr(), xs.as_ptr(), ys.as_ptr(), &mut scene)
    };
    assert_eq!(st, TmStatus::InvalidInput);
    assert!(last_error().contains("`p`"), "{}", last_error());
}

#[test]
fn error_codes_and_messages() {
    let mut scene = ptr::null_mut();
    assert_eq!(unsafe { tm_scene_from_csv(ptr::null(), &mut scene) }, TmStatus::NullPointer);
    assert!(last_error().contains("path"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "entity_id,point_id,frame,x,y\na,p,0,0,0\na,p,x,1,1\n").unwrap();
    let c = CString::new(bad.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { tm_scene_from_csv(c.as_ptr(), &mut scene) }, TmStatus::InvalidInput);
    assert!(last_error().contains("line 3"), "{}", last_error());

    // a successful call clears the message
    assert!(!tm_version().is_null());
    let good = scene_from_csv(&play_csv(dir.path(), "g.csv", false));
    assert!(tm_last_error_message().is_null());

    let bad_cfg = CString::new(r#"{"embedding": {"dim": 0}}"#).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { tm_scene_segment(good, bad_cfg.as_ptr(), &mut g) }, TmStatus::InvalidInput);
    let unknown = CString::new(r#"{"nope": 1}"#).unwrap();
    assert_eq!(unsafe { tm_scene_segment(good, unknown.as_ptr(), &mut g) }, TmStatus::InvalidInput);

    let g = segment(good);
    let mut report = ptr::null_mut();
    // 8^8 mappings already exceed the exact budget
    let mut n = 0;
    unsafe { tm_graph_node_count(g, &mut n) };
    assert!(n >= 8);
    assert_eq!(
        unsafe { tm_match(g, g, TmMethod::Exact, ptr::null(), &mut report) },
        TmStatus::BudgetExceeded
    );
    assert!(last_error().contains("budget"));

    assert_eq!(unsafe { tm_report_log_similarity(ptr::null(), &mut 0.0) }, TmStatus::NullPointer);
    assert_eq!(unsafe { tm_graph_node_count(g, ptr::null_mut()) }, TmStatus::NullPointer);
    unsafe {
        tm_graph_free(g);
        tm_scene_free(good);
        tm_scene_free(ptr::null_mut());
        tm_graph_free(ptr::null_mut());
        tm_report_free(ptr::null_mut());
        tm_string_free(ptr::null_mut());
    }
}

#[test]
fn mapping_buffer_length_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let s = scene_from_csv(&play_csv(dir.path(), "a.csv", false));
    let g = segment(s);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { tm_match(g, g, TmMethod::Icm, ptr::null(), &mut r) }, TmStatus::Ok);
    let mut buf = [0usize; 1];
    assert_eq!(unsafe { tm_report_mapping(r, buf.as_mut_ptr(), 1) }, TmStatus::InvalidInput);
    assert_eq!(unsafe { tm_report_mapping(r, ptr::null_mut(), 1) }, TmStatus::NullPointer);
    unsafe {
        tm_report_free(r);
        tm_graph_free(g);
        tm_scene_free(s);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/trajmatch.h")).unwrap();
    for needle in [
        "#ifndef TRAJMATCH_H",
        "TM_STATUS_OK = 0",
        "TM_STATUS_NULL_POINTER = 1",
        "TM_STATUS_INVALID_INPUT = 2",
        "TM_STATUS_BUDGET_EXCEEDED = 3",
        "TM_STATUS_INTERNAL = 4",
        "TM_METHOD_ICM = 2",
        "typedef struct TmScene TmScene;",
        "typedef struct TmGraph TmGraph;",
        "typedef struct TmReport TmReport;",
        "const char *tm_version(void);",
        "const char *tm_last_error_message(void);",
        "tm_scene_from_csv(const char *path, struct TmScene **out)",
        "tm_scene_from_samples(",
        "tm_scene_segment(",
        "tm_match(",
        "tm_report_mapping(",
        "tm_report_to_json(",
        "void tm_string_free(char *s);",
        "void tm_scene_free(struct TmScene *scene);",
    ] {
        assert!(header.contains(needle), "header lacks `{needle}`");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    if std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libtrajmatch_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("match");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = std::process::Command::new("cc")
        .arg(format!("{manifest}/examples/match.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let a = play_csv(dir.path(), "a.csv", false);
    let out = std::process::Command::new(&exe).arg(&a).arg(&a).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("log_similarity"), "{text}");
    let mapping: Vec<usize> = text
        .lines()
        .find_map(|l| l.strip_prefix("mapping"))
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(mapping, (0..mapping.len()).collect::<Vec<_>>());

    let missing = std::process::Command::new(&exe).arg("/nonexistent.csv").arg(&a).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("query"));
}
