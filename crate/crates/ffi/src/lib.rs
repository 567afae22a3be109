//! C ABI for trajmatch.
//!
//! Objects are opaque handles created by `tm_*` constructors and released
//! with the matching `*_free`. Every fallible call returns a [`TmStatus`];
//! on failure `tm_last_error_message` describes the error for the calling
//! thread. Strings returned through out-parameters are owned by the caller
//! and released with `tm_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use trajmatch::inference::{match_graphs, Method, SimilarityReport};
use trajmatch::io::read_scene_csv;
use trajmatch::model::EventGraph;
use trajmatch::pipeline::{scene_graph, PipelineConfig};
use trajmatch::traj::{EntityTrack, Sample, Scene, Trajectory};
use trajmatch::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    BudgetExceeded = 3,
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmMethod {
    Exact = 0,
    Meanfield = 1,
    Icm = 2,
}

impl From<TmMethod> for Method {
    fn from(m: TmMethod) -> Self {
        match m {
            TmMethod::Exact => Method::Exact,
            TmMethod::Meanfield => Method::Meanfield,
            TmMethod::Icm => Method::Icm,
        }
    }
}

/// A scene of entity tracks.
pub struct TmScene {
    scene: Scene,
}

/// An event graph of atomic motions.
pub struct TmGraph {
    graph: EventGraph,
}

/// The result of matching two graphs.
pub struct TmReport {
    report: SimilarityReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TmStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            TmStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            if e.is_budget() {
                TmStatus::BudgetExceeded
            } else {
                TmStatus::InvalidInput
            }
        }
        Err(_) => {
            set_error("internal error");
            TmStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidParameter(format!("{what} is not UTF-8"))))
}

unsafe fn config(json: *const c_char) -> Result<PipelineConfig, Failure> {
    if json.is_null() {
        return Ok(PipelineConfig::default());
    }
    let cfg: PipelineConfig = serde_json::from_str(string(json, "config")?).map_err(Error::from)?;
    cfg.validate()?;
    Ok(cfg)
}

fn out_string(text: serde_json::Result<String>, out: *mut *mut c_char) -> Result<(), Failure> {
    let text = text.map_err(Error::from)?;
    let c = CString::new(text).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::Null("out"))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next `tm_*` call on the same thread.
#[no_mangle]
pub extern "C" fn tm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Load a scene from a trajectory CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_scene_from_csv(path: *const c_char, out: *mut *mut TmScene) -> TmStatus {
    guard(|| {
        check_out(out)?;
        let path = string(path, "path")?;
        let scene = read_scene_csv(Path::new(path))?;
        *out = Box::into_raw(Box::new(TmScene { scene }));
        Ok(())
    })
}

/// Build a scene from `n` samples given as parallel arrays. Samples are
/// grouped by entity and point id in order of first appearance and sorted by
/// frame.
///
/// # Safety
/// Every array must hold `n` elements; ids must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn tm_scene_from_samples(
    n: usize,
    entity_ids: *const *const c_char,
    point_ids: *const *const c_char,
    frames: *const i64,
    xs: *const f64,
    ys: *const f64,
    out: *mut *mut TmScene,
) -> TmStatus {
    guard(|| {
        check_out(out)?;
        if n == 0 {
            return Err(Error::EmptyScene.into());
        }
        for (p, what) in [
            (entity_ids as *const u8, "entity_ids"),
            (point_ids as *const u8, "point_ids"),
            (frames as *const u8, "frames"),
            (xs as *const u8, "xs"),
            (ys as *const u8, "ys"),
        ] {
            if p.is_null() {
                return Err(Failure::Null(what));
            }
        }
        let entity_ids = std::slice::from_raw_parts(entity_ids, n);
        let point_ids = std::slice::from_raw_parts(point_ids, n);
        let frames = std::slice::from_raw_parts(frames, n);
        let xs = std::slice::from_raw_parts(xs, n);
        let ys = std::slice::from_raw_parts(ys, n);

        let mut groups: Vec<(String, Vec<(String, Vec<Sample>)>)> = Vec::new();
        for i in 0..n {
            let e = string(entity_ids[i], "entity id")?;
            let p = string(point_ids[i], "point id")?;
            let gi = match groups.iter().position(|(id, _)| id == e) {
                Some(g) => g,
                None => {
                    groups.push((e.to_string(), Vec::new()));
                    groups.len() - 1
                }
            };
            let points = &mut groups[gi].1;
            let pi = match points.iter().position(|(id, _)| id == p) {
                Some(x) => x,
                None => {
                    points.push((p.to_string(), Vec::new()));
                    points.len() - 1
                }
            };
            points[pi].1.push(Sample::new(frames[i], xs[i], ys[i]));
        }
        let tracks = groups
            .into_iter()
            .map(|(e, points)| {
                let trajs = points
                    .into_iter()
                    .map(|(p, mut samples)| {
                        samples.sort_by_key(|s| s.frame);
                        Trajectory::new(p, samples)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                EntityTrack::new(e, trajs)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let scene = Scene::new(tracks)?;
        *out = Box::into_raw(Box::new(TmScene { scene }));
        Ok(())
    })
}

/// # Safety
/// `scene` must come from a `tm_scene_*` constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tm_scene_free(scene: *mut TmScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_scene_trajectory_count(scene: *const TmScene, out: *mut usize) -> TmStatus {
    guard(|| {
        check_out(out)?;
        *out = deref(scene, "scene")?.scene.trajectory_count();
        Ok(())
    })
}

/// Normalize and segment a scene and build its event graph. `config_json`
/// holds pipeline parameters as JSON, or NULL for the defaults.
///
/// # Safety
/// `scene` must be a live handle; `config_json` NULL or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_scene_segment(
    scene: *const TmScene,
    config_json: *const c_char,
    out: *mut *mut TmGraph,
) -> TmStatus {
    guard(|| {
        check_out(out)?;
        let scene = deref(scene, "scene")?;
        let cfg = config(config_json)?;
        let graph = scene_graph(&scene.scene, &cfg)?;
        *out = Box::into_raw(Box::new(TmGraph { graph }));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from `tm_scene_segment` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tm_graph_free(graph: *mut TmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_graph_node_count(graph: *const TmGraph, out: *mut usize) -> TmStatus {
    guard(|| {
        check_out(out)?;
        *out = deref(graph, "graph")?.graph.len();
        Ok(())
    })
}

/// The graph's nodes and edges as JSON.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_graph_to_json(graph: *const TmGraph, out: *mut *mut c_char) -> TmStatus {
    guard(|| {
        check_out(out)?;
        out_string(serde_json::to_string(&deref(graph, "graph")?.graph.dump(None)), out)
    })
}

/// Similarity of observation `query` to model `model`. `config_json` holds
/// pipeline parameters as JSON, or NULL; `method` overrides its method.
///
/// # Safety
/// Handles must be live; `config_json` NULL or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tm_match(
    query: *const TmGraph,
    model: *const TmGraph,
    method: TmMethod,
    config_json: *const c_char,
    out: *mut *mut TmReport,
) -> TmStatus {
    guard(|| {
        check_out(out)?;
        let z = deref(query, "query")?;
        let y = deref(model, "model")?;
        let mut cfg = config(config_json)?;
        cfg.matching.method = method.into();
        let report = match_graphs(&z.graph, &y.graph, &cfg.matching)?;
        *out = Box::into_raw(Box::new(TmReport { report }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from `tm_match` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tm_report_free(report: *mut TmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_report_log_similarity(report: *const TmReport, out: *mut f64) -> TmStatus {
    guard(|| {
        check_out(out)?;
        *out = deref(report, "report")?.report.log_similarity;
        Ok(())
    })
}

/// Number of observed nodes in the report's mapping.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_report_mapping_len(report: *const TmReport, out: *mut usize) -> TmStatus {
    guard(|| {
        check_out(out)?;
        *out = deref(report, "report")?.report.mapping.0.len();
        Ok(())
    })
}

/// Copy the 0-based mapping into `buf`, which must hold `len` entries, with
/// `len` equal to `tm_report_mapping_len`.
///
/// # Safety
/// `report` must be a live handle; `buf` must hold `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn tm_report_mapping(report: *const TmReport, buf: *mut usize, len: usize) -> TmStatus {
    guard(|| {
        let mapping = &deref(report, "report")?.report.mapping.0;
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        if len != mapping.len() {
            return Err(Error::DimensionMismatch(format!(
                "mapping has {} entries, buffer {len}",
                mapping.len()
            ))
            .into());
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(mapping);
        Ok(())
    })
}

/// The full report as JSON.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tm_report_to_json(report: *const TmReport, out: *mut *mut c_char) -> TmStatus {
    guard(|| {
        check_out(out)?;
        out_string(serde_json::to_string(&deref(report, "report")?.report), out)
    })
}

/// # Safety
/// `s` must come from a `tm_*_to_json` call or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
