//! C ABI over `bearing-core`.
//!
//! Objects are opaque handles created by `*_new`/`*_load` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`BearingStatus`]; on failure a message is available from
//! [`bearing_last_error_message`] on the same thread. Arrays are stacked
//! row-major `double` buffers with explicit lengths; output buffers are
//! written only when large enough, and the required length is always
//! reported.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use bearing_core::formation::{predict_leader_follower_equilibrium, predict_leaderless_equilibrium};
use bearing_core::laplacian::{assemble_laplacian, partition};
use bearing_core::localization::{localize_closed_form, measure_bearings};
use bearing_core::rigidity::{bearing_function, bearing_rigidity_matrix, is_infinitesimally_bearing_rigid};
use bearing_core::scenario::{run, RunOptions, RunReport, Scenario, ScenarioFile};
use bearing_core::{Configuration, Error, Framework, Graph, Tolerances};
use nalgebra::DVector;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BearingStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed graph, configuration, sizes or scenario fields.
    InvalidInput = 2,
    /// Coincident points or a degenerate configuration.
    Degenerate = 3,
    /// Missing, non-unit or inconsistent bearings.
    InvalidBearings = 4,
    /// Singular follower block, too few anchors or a disconnected graph.
    Singular = 5,
    Parse = 6,
    Io = 7,
    Integrator = 8,
    /// Output buffer shorter than the reported required length.
    BufferTooSmall = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> BearingStatus {
    use Error::*;
    match e {
        TooFewVertices(_)
        | SelfLoop(_)
        | DuplicateEdge(..)
        | VertexOutOfRange { .. }
        | InvalidDimension(_)
        | SizeMismatch { .. }
        | Validation { .. }
        | GenerationFailure(_) => BearingStatus::InvalidInput,
        DegenerateVector(_) | CoincidentPoints { .. } | DegenerateConfiguration | DegenerateTarget => {
            BearingStatus::Degenerate
        }
        MissingBearing(..)
        | BearingOnNonEdge(..)
        | NonUnitBearing { .. }
        | AntisymmetryViolation(..)
        | BearingDimension { .. } => BearingStatus::InvalidBearings,
        DisconnectedGraph | EmptyFollowerSet | SingularFollowerBlock | TooFewAnchors(_) => BearingStatus::Singular,
        Parse(_) => BearingStatus::Parse,
        Io(_) => BearingStatus::Io,
        InvalidIntegrator(_) => BearingStatus::Integrator,
    }
}

/// Runs `f`, recording errors and panics for the calling thread.
fn guard(f: impl FnOnce() -> Result<(), (BearingStatus, String)>) -> BearingStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BearingStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BearingStatus::Panic
        }
    }
}

type Failure = (BearingStatus, String);

fn core(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> Failure {
    (BearingStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `data` into `out` when it fits; always stores the length.
unsafe fn write_out(data: &[f64], out: *mut f64, capacity: usize, written: *mut usize) -> Result<(), Failure> {
    if !written.is_null() {
        *written = data.len();
    }
    if data.len() > capacity {
        return Err((
            BearingStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", data.len()),
        ));
    }
    if !data.is_empty() {
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
    }
    Ok(())
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (BearingStatus::InvalidInput, format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bearing_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bearing_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque undirected graph.
pub struct BearingGraph(Graph);

/// Opaque graph plus configuration.
pub struct BearingFramework(Framework);

/// Opaque validated scenario.
pub struct BearingScenario(Scenario);

/// Opaque run report.
pub struct BearingReport(RunReport);

/// Builds a graph on `n` vertices from `m` edges given as `2m` vertex
/// indices.
///
/// # Safety
/// `edges` must point to `2 * m` values (may be null when `m == 0`) and
/// `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn bearing_graph_new(
    n: usize,
    edges: *const usize,
    m: usize,
    out: *mut *mut BearingGraph,
) -> BearingStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let flat = slice(edges, 2 * m, "edges")?;
        let pairs: Vec<(usize, usize)> = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        let g = Graph::new(n, &pairs).map_err(core)?;
        *out = Box::into_raw(Box::new(BearingGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from [`bearing_graph_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bearing_graph_free(graph: *mut BearingGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Edge count after canonical ordering.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bearing_graph_edge_count(graph: *const BearingGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Framework from a graph and `len = n * d` stacked coordinates. The graph
/// is copied; the caller keeps ownership of it.
///
/// # Safety
/// `graph` must be live, `coords` must hold `len` values and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bearing_framework_new(
    graph: *const BearingGraph,
    d: usize,
    coords: *const f64,
    len: usize,
    out: *mut *mut BearingFramework,
) -> BearingStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let c = slice(coords, len, "coords")?;
        let config = Configuration::new(d, DVector::from_column_slice(c)).map_err(core)?;
        let fw = Framework::new(g.0.clone(), config).map_err(core)?;
        *out = Box::into_raw(Box::new(BearingFramework(fw)));
        Ok(())
    })
}

/// # Safety
/// `fw` must come from [`bearing_framework_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bearing_framework_free(fw: *mut BearingFramework) {
    if !fw.is_null() {
        drop(Box::from_raw(fw));
    }
}

/// Rank of the bearing rigidity matrix, the rank required for
/// infinitesimal rigidity, and the verdict.
///
/// # Safety
/// `fw` must be live; output pointers may be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn bearing_framework_rigidity(
    fw: *const BearingFramework,
    rank: *mut usize,
    required_rank: *mut usize,
    rigid: *mut bool,
) -> BearingStatus {
    guard(|| {
        let fw = fw.as_ref().ok_or_else(|| null("framework"))?;
        let r = is_infinitesimally_bearing_rigid(&fw.0).map_err(core)?;
        if !rank.is_null() {
            *rank = r.rank;
        }
        if !required_rank.is_null() {
            *required_rank = r.required_rank;
        }
        if !rigid.is_null() {
            *rigid = r.rigid;
        }
        Ok(())
    })
}

/// Unit bearings `m * d`, one per canonical edge (tail < head).
///
/// # Safety
/// `fw` must be live and `out` must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn bearing_framework_bearings(
    fw: *const BearingFramework,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> BearingStatus {
    guard(|| {
        let fw = fw.as_ref().ok_or_else(|| null("framework"))?;
        let b = bearing_function(&fw.0).map_err(core)?;
        write_out(b.stacked().as_slice(), out, capacity, written)
    })
}

/// Bearing rigidity matrix, `(m d) x (n d)`, row-major.
///
/// # Safety
/// `fw` must be live and `out` must hold `capacity` values; `rows` and
/// `cols` may be null.
#[no_mangle]
pub unsafe extern "C" fn bearing_framework_rigidity_matrix(
    fw: *const BearingFramework,
    out: *mut f64,
    capacity: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> BearingStatus {
    guard(|| {
        let fw = fw.as_ref().ok_or_else(|| null("framework"))?;
        let r = bearing_rigidity_matrix(&fw.0).map_err(core)?;
        if !rows.is_null() {
            *rows = r.matrix.nrows();
        }
        if !cols.is_null() {
            *cols = r.matrix.ncols();
        }
        let row_major: Vec<f64> = r.matrix.transpose().as_slice().to_vec();
        write_out(&row_major, out, capacity, ptr::null_mut())
    })
}

/// Bearing Laplacian of the framework's own bearings, `(n d) x (n d)`.
///
/// # Safety
/// `fw` must be live and `out` must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn bearing_framework_laplacian(
    fw: *const BearingFramework,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> BearingStatus {
    guard(|| {
        let fw = fw.as_ref().ok_or_else(|| null("framework"))?;
        let b = bearing_function(&fw.0).map_err(core)?;
        let l = assemble_laplacian(fw.0.graph(), &b).map_err(core)?;
        // Symmetric, so column-major storage is also row-major.
        write_out(l.matrix().as_slice(), out, capacity, written)
    })
}

/// Limit of the leaderless flow from `p0` toward the shape `target`
/// (both `len = n * d`). Writes `len` values to `out`.
///
/// # Safety
/// `p0`, `target` and `out` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn bearing_predict_leaderless(
    d: usize,
    p0: *const f64,
    target: *const f64,
    len: usize,
    out: *mut f64,
) -> BearingStatus {
    guard(|| {
        if d < 2 || !len.is_multiple_of(d) {
            return Err(core(Error::InvalidDimension(d)));
        }
        let p0 = DVector::from_column_slice(slice(p0, len, "p0")?);
        let r = DVector::from_column_slice(slice(target, len, "target")?);
        let pr = predict_leaderless_equilibrium(d, &p0, &r).map_err(core)?;
        write_out(pr.final_state.as_slice(), out, len, ptr::null_mut())
    })
}

/// Limit of the leader-follower flow whose bearing constraints are those
/// of `target`. Leaders `leaders[0..nl]` sit at `leader_positions`
/// (`nl * d`, same order); the full `n * d` state is written to `out`.
/// `feasible` (optional) receives the leader feasibility verdict.
///
/// # Safety
/// Buffers must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn bearing_predict_leader_follower(
    target: *const BearingFramework,
    leaders: *const usize,
    nl: usize,
    leader_positions: *const f64,
    out: *mut f64,
    capacity: usize,
    feasible: *mut bool,
) -> BearingStatus {
    guard(|| {
        let fw = target.as_ref().ok_or_else(|| null("target"))?;
        let d = fw.0.dimension();
        let ids = slice(leaders, nl, "leaders")?;
        let pos = slice(leader_positions, nl * d, "leader_positions")?;
        let b = bearing_function(&fw.0).map_err(core)?;
        let l = assemble_laplacian(fw.0.graph(), &b).map_err(core)?;
        let part = partition(&l, ids).map_err(core)?;
        // Reorder positions to the partition's sorted leader order.
        let mut sorted = DVector::zeros(nl * d);
        for (k, &v) in part.special().iter().enumerate() {
            let src = ids.iter().position(|&x| x == v).expect("leader present");
            sorted.rows_mut(k * d, d).copy_from_slice(&pos[src * d..(src + 1) * d]);
        }
        let pr = predict_leader_follower_equilibrium(&part, &sorted, &Tolerances::default()).map_err(core)?;
        if !feasible.is_null() {
            *feasible = pr.feasibility.feasible;
        }
        write_out(pr.final_state.as_slice(), out, capacity, ptr::null_mut())
    })
}

/// Closed-form network localization: measures bearings of `truth`, keeps
/// `anchors` at their true positions and writes the estimate of the whole
/// network (`n * d`) to `out`.
///
/// # Safety
/// Buffers must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn bearing_localize(
    truth: *const BearingFramework,
    anchors: *const usize,
    na: usize,
    out: *mut f64,
    capacity: usize,
) -> BearingStatus {
    guard(|| {
        let fw = truth.as_ref().ok_or_else(|| null("truth"))?;
        let ids = slice(anchors, na, "anchors")?;
        let b = measure_bearings(&fw.0).map_err(core)?;
        let l = assemble_laplacian(fw.0.graph(), &b).map_err(core)?;
        let part = partition(&l, ids).map_err(core)?;
        let pa = part.gather_special(fw.0.config().stacked());
        let pf = localize_closed_form(&part, &pa, &Tolerances::default()).map_err(core)?;
        write_out(part.scatter(&pa, &pf).as_slice(), out, capacity, ptr::null_mut())
    })
}

/// Loads and validates a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bearing_scenario_load(path: *const c_char, out: *mut *mut BearingScenario) -> BearingStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = path_arg(path, "path")?;
        let s = bearing_core::scenario::load_scenario(path).map_err(core)?;
        *out = Box::into_raw(Box::new(BearingScenario(s)));
        Ok(())
    })
}

/// Parses and validates scenario text (TOML).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bearing_scenario_parse(text: *const c_char, out: *mut *mut BearingScenario) -> BearingStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (BearingStatus::Parse, "scenario text is not UTF-8".to_string()))?;
        let s = ScenarioFile::parse(text).and_then(Scenario::from_file).map_err(core)?;
        *out = Box::into_raw(Box::new(BearingScenario(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from a scenario constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bearing_scenario_free(s: *mut BearingScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Runs a scenario. `out_dir` may be null to skip writing files.
///
/// # Safety
/// `s` must be live, `out_dir` null or NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bearing_scenario_run(
    s: *const BearingScenario,
    out_dir: *const c_char,
    out: *mut *mut BearingReport,
) -> BearingStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        let out_dir = if out_dir.is_null() { None } else { Some(path_arg(out_dir, "out_dir")?) };
        let opts = RunOptions { out_dir, ..RunOptions::default() };
        let outcome = run(&s.0, &opts).map_err(core)?;
        *out = Box::into_raw(Box::new(BearingReport(outcome.report)));
        Ok(())
    })
}

/// Whether every assertion of the run passed; false for a null handle.
///
/// # Safety
/// `r` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn bearing_report_passed(r: *const BearingReport) -> bool {
    r.as_ref().is_some_and(|r| r.0.passed)
}

/// Report as a JSON string; release it with [`bearing_string_free`].
///
/// # Safety
/// `r` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bearing_report_json(r: *const BearingReport, out: *mut *mut c_char) -> BearingStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        let json = serde_json::to_string(&r.0).map_err(|e| (BearingStatus::Io, e.to_string()))?;
        *out = CString::new(json).expect("json has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `r` must come from [`bearing_scenario_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bearing_report_free(r: *mut BearingReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn bearing_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
