//! C ABI over the MaxCut toolkit: opaque handles, integer status codes, and
//! a per-thread error message. Every entry point catches panics, checks its
//! pointers, and reports failures through the returned status plus
//! hc_last_error. The C declarations live in include/hypercut.h, generated
//! by cbindgen at build time.

use hypercut::harness::{load_graph, INIT_STREAM};
use hypercut::{
    cut_of_hyperplane, cut_value, default_rank, derive_seed, expected_cut_analytic, forward,
    generate_er, init_params, pgw, sdp_objective, solve_sdp, train, transition, AgentParams,
    Assignment, Embedding, Error, Graph, Hyperplane, StepMetrics, TrainConfig,
};
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Result code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// An argument violated the called operation's contract.
    InvalidArgument = 3,
    /// Malformed graph text.
    Parse = 4,
    /// Malformed binary or JSON payload.
    BadFormat = 5,
    Io = 6,
    /// Training produced a non-finite quantity.
    PolicyCollapse = 7,
    /// The call panicked; treat involved handles as poisoned.
    Panic = 8,
}

/// Opaque graph handle. Create with an hc_graph_* constructor, release with
/// hc_graph_free.
pub struct HcGraph {
    inner: Graph,
}

/// Opaque unit-vector embedding handle. Produced by hc_solve or
/// hc_embedding_load, released with hc_embedding_free.
pub struct HcEmbedding {
    inner: Embedding,
}

/// Opaque policy-network handle. Produced by hc_train or hc_agent_load,
/// released with hc_agent_free.
pub struct HcAgent {
    inner: AgentParams,
}

/// Convergence report for one relaxation solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcSdpReport {
    /// Relaxation objective at the final iterate.
    pub objective: f64,
    /// Full sweeps performed.
    pub iterations: usize,
    /// Largest column displacement in the final sweep.
    pub final_delta: f64,
    /// Whether final_delta reached the tolerance before the sweep cap.
    pub converged: bool,
}

/// Batched hyperplane-rounding statistics.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcPgwResult {
    pub avg_cut: f64,
    pub max_cut: i64,
    pub samples: usize,
}

/// Training hyperparameters. Fill with hc_train_config_default, then adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcTrainConfig {
    /// Hidden width of the policy network.
    pub hidden: usize,
    /// Parallel rounding chains.
    pub chains: usize,
    /// Total environment steps.
    pub total_steps: usize,
    /// Steps between parameter updates.
    pub t_step: usize,
    /// Optimization epochs per update.
    pub n_epochs: usize,
    /// Minibatch size within an update epoch.
    pub minibatch: usize,
    pub learning_rate: f64,
    /// Surrogate clip width.
    pub clip_epsilon: f64,
    /// Discount factor in the TD target.
    pub gamma: f64,
    /// Seed for chains, shuffling, and network initialization.
    pub seed: u64,
    /// Use Adam instead of plain gradient descent.
    pub use_adam: bool,
    /// Subtract a running mean of rewards inside TD targets.
    pub reward_baseline: bool,
    /// Suppress wall-clock measurement for byte-stable metrics.
    pub deterministic: bool,
}

/// One training-step row; mirrors the metrics CSV columns.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcStepMetrics {
    pub t: usize,
    pub avg_cut: f64,
    pub max_cut: i64,
    pub mean_reward: f64,
    pub loss_ppo: f64,
    pub loss_vf: f64,
    pub wall_ms: u64,
}

impl HcStepMetrics {
    fn of(m: &StepMetrics) -> Self {
        HcStepMetrics {
            t: m.t,
            avg_cut: m.avg_cut,
            max_cut: m.max_cut,
            mean_reward: m.mean_reward,
            loss_ppo: m.loss_ppo,
            loss_vf: m.loss_vf,
            wall_ms: m.wall_ms,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    // Interior nul bytes cannot survive the CString boundary.
    let clean = CString::new(msg.replace('\0', " ")).expect("nul bytes stripped");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = clean);
}

fn fail(err: &Error) -> HcStatus {
    set_error(err.to_string());
    match err {
        Error::Parse { .. } => HcStatus::Parse,
        Error::InvalidArgument(_) => HcStatus::InvalidArgument,
        Error::BadFormat(_) | Error::Json(_) => HcStatus::BadFormat,
        Error::PolicyCollapse(_) => HcStatus::PolicyCollapse,
        Error::Io(_) => HcStatus::Io,
    }
}

fn null_err(what: &str) -> HcStatus {
    set_error(format!("{} must not be null", what));
    HcStatus::NullPointer
}

/// Runs an FFI body, converting panics into HcStatus::Panic.
fn guard(f: impl FnOnce() -> HcStatus) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "opaque panic payload".into());
            set_error(format!("panic: {}", msg));
            HcStatus::Panic
        }
    }
}

macro_rules! ffi_try {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

unsafe fn ref_arg<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, HcStatus> {
    if ptr.is_null() {
        Err(null_err(what))
    } else {
        Ok(unsafe { &*ptr })
    }
}

unsafe fn out_arg<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, HcStatus> {
    if ptr.is_null() {
        Err(null_err(what))
    } else {
        Ok(unsafe { &mut *ptr })
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, HcStatus> {
    if ptr.is_null() {
        return Err(null_err(what));
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error(format!("{} is not valid UTF-8", what));
        HcStatus::Utf8
    })
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], HcStatus> {
    if ptr.is_null() {
        return Err(null_err(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

fn give<T>(handle: T) -> *mut T {
    Box::into_raw(Box::new(handle))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message from the most recent failing call on this thread. Never null;
/// empty before the first failure. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn hc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static human-readable name for a status code; "unknown" for values
/// outside the enum.
#[no_mangle]
pub extern "C" fn hc_status_name(status: c_int) -> *const c_char {
    let name: &'static str = match status {
        0 => "ok\0",
        1 => "null pointer\0",
        2 => "invalid utf-8\0",
        3 => "invalid argument\0",
        4 => "parse error\0",
        5 => "bad format\0",
        6 => "io error\0",
        7 => "policy collapse\0",
        8 => "panic\0",
        _ => "unknown\0",
    };
    name.as_ptr() as *const c_char
}

/// Parses Gset text: an "n m" header line, then one "i j w" line per edge,
/// 1-based endpoints.
///
/// # Safety
/// `text` must point to a nul-terminated string and `out` to writable
/// storage for one pointer. On success `*out` owns a new graph; release it
/// with hc_graph_free.
#[no_mangle]
pub unsafe extern "C" fn hc_graph_parse_gset(
    text: *const c_char,
    out: *mut *mut HcGraph,
) -> HcStatus {
    guard(|| {
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        let text = ffi_try!(unsafe { str_arg(text, "text") });
        match Graph::parse_gset(text) {
            Ok(g) => {
                *out = give(HcGraph { inner: g });
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Parses the JSON graph form `{"n": ..., "edges": [[i, j, w], ...]}`.
///
/// # Safety
/// Same contract as hc_graph_parse_gset.
#[no_mangle]
pub unsafe extern "C" fn hc_graph_from_json(
    text: *const c_char,
    out: *mut *mut HcGraph,
) -> HcStatus {
    guard(|| {
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        let text = ffi_try!(unsafe { str_arg(text, "text") });
        match Graph::from_json_str(text) {
            Ok(g) => {
                *out = give(HcGraph { inner: g });
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads a graph file, sniffing JSON (leading '{') versus Gset text.
///
/// # Safety
/// `path` must be nul-terminated; `out` as in hc_graph_parse_gset.
#[no_mangle]
pub unsafe extern "C" fn hc_graph_load(path: *const c_char, out: *mut *mut HcGraph) -> HcStatus {
    guard(|| {
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        let path = ffi_try!(unsafe { str_arg(path, "path") });
        match load_graph(Path::new(path)) {
            Ok(g) => {
                *out = give(HcGraph { inner: g });
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Generates a seeded Erdos-Renyi graph with unit weights.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_graph_gen_er(
    n: usize,
    p: f64,
    seed: u64,
    out: *mut *mut HcGraph,
) -> HcStatus {
    guard(|| {
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        match generate_er(n, p, seed) {
            Ok(g) => {
                *out = give(HcGraph { inner: g });
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Node count; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn hc_graph_n(g: *const HcGraph) -> usize {
    if g.is_null() {
        0
    } else {
        unsafe { &*g }.inner.n()
    }
}

/// Edge count; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn hc_graph_m(g: *const HcGraph) -> usize {
    if g.is_null() {
        0
    } else {
        unsafe { &*g }.inner.m()
    }
}

/// Cut value of a node assignment. `values` holds one +1 or -1 per node.
///
/// # Safety
/// `values` must point to `len` readable bytes; `out_cut` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_graph_cut_value(
    g: *const HcGraph,
    values: *const i8,
    len: usize,
    out_cut: *mut i64,
) -> HcStatus {
    guard(|| {
        let g = ffi_try!(unsafe { ref_arg(g, "graph") });
        let out_cut = ffi_try!(unsafe { out_arg(out_cut, "out_cut") });
        let values = ffi_try!(unsafe { slice_arg(values, len, "values") });
        let assignment = match Assignment::new(values.to_vec()) {
            Ok(a) => a,
            Err(e) => return fail(&e),
        };
        match cut_value(&g.inner, &assignment) {
            Ok(cut) => {
                *out_cut = cut;
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a graph handle; null is a no-op.
///
/// # Safety
/// `g` must be null or a pointer returned by an hc_graph_* constructor, not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn hc_graph_free(g: *mut HcGraph) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

/// Solves the low-rank relaxation. `d` is the embedding rank; pass 0 for the
/// generic-optimality default. `out_report` may be null.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable; `out_report`
/// must be null or writable. On success `*out` owns a new embedding;
/// release it with hc_embedding_free.
#[no_mangle]
pub unsafe extern "C" fn hc_solve(
    g: *const HcGraph,
    d: usize,
    tol: f64,
    max_sweeps: usize,
    seed: u64,
    out: *mut *mut HcEmbedding,
    out_report: *mut HcSdpReport,
) -> HcStatus {
    guard(|| {
        let g = ffi_try!(unsafe { ref_arg(g, "graph") });
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        let d = if d == 0 { default_rank(g.inner.n()) } else { d };
        match solve_sdp(&g.inner, d, tol, max_sweeps, seed) {
            Ok((e, report)) => {
                if !out_report.is_null() {
                    unsafe {
                        *out_report = HcSdpReport {
                            objective: report.objective,
                            iterations: report.iterations,
                            final_delta: report.final_delta,
                            converged: report.converged,
                        };
                    }
                }
                *out = give(HcEmbedding { inner: e });
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Column count (one unit vector per node); 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live embedding handle.
#[no_mangle]
pub unsafe extern "C" fn hc_embedding_n(e: *const HcEmbedding) -> usize {
    if e.is_null() {
        0
    } else {
        unsafe { &*e }.inner.n()
    }
}

/// Embedding rank; 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live embedding handle.
#[no_mangle]
pub unsafe extern "C" fn hc_embedding_dim(e: *const HcEmbedding) -> usize {
    if e.is_null() {
        0
    } else {
        unsafe { &*e }.inner.dim()
    }
}

/// Writes the embedding's binary form to a file.
///
/// # Safety
/// `e` must be a live embedding handle; `path` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn hc_embedding_save(
    e: *const HcEmbedding,
    path: *const c_char,
) -> HcStatus {
    guard(|| {
        let e = ffi_try!(unsafe { ref_arg(e, "embedding") });
        let path = ffi_try!(unsafe { str_arg(path, "path") });
        match std::fs::write(path, e.inner.to_bytes()) {
            Ok(()) => HcStatus::Ok,
            Err(err) => fail(&Error::Io(err)),
        }
    })
}

/// Loads an embedding previously written by hc_embedding_save.
///
/// # Safety
/// `path` must be nul-terminated; `out` must be writable. On success `*out`
/// owns a new embedding.
#[no_mangle]
pub unsafe extern "C" fn hc_embedding_load(
    path: *const c_char,
    out: *mut *mut HcEmbedding,
) -> HcStatus {
    guard(|| {
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        let path = ffi_try!(unsafe { str_arg(path, "path") });
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(err) => return fail(&Error::Io(err)),
        };
        match Embedding::from_bytes(&bytes) {
            Ok(e) => {
                *out = give(HcEmbedding { inner: e });
                HcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases an embedding handle; null is a no-op.
///
/// # Safety
/// `e` must be null or a pointer returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hc_embedding_free(e: *mut HcEmbedding) {
    if !e.is_null() {
        drop(unsafe { Box::from_raw(e) });
    }
}

/// Relaxation objective of an embedding for a graph.
///
/// # Safety
/// `g` and `e` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_sdp_objective(
    g: *const HcGraph,
    e: *const HcEmbedding,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let g = ffi_try!(unsafe { ref_arg(g, "graph") });
        let e = ffi_try!(unsafe { ref_arg(e, "embedding") });
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        match sdp_objective(&g.inner, &e.inner) {
            Ok(v) => {
                *out = v;
                HcStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Closed-form expected rounded cut of an embedding under a uniform random
/// hyperplane.
///
/// # Safety
/// `g` and `e` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_expected_cut_analytic(
    g: *const HcGraph,
    e: *const HcEmbedding,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let g = ffi_try!(unsafe { ref_arg(g, "graph") });
        let e = ffi_try!(unsafe { ref_arg(e, "embedding") });
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        match expected_cut_analytic(&g.inner, &e.inner) {
            Ok(v) => {
                *out = v;
                HcStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Cut obtained by rounding the embedding with the hyperplane whose normal
/// is `normal` (length `len`, need not be unit).
///
/// # Safety
/// `normal` must point to `len` readable doubles; `out_cut` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hc_cut_of_normal(
    g: *const HcGraph,
    e: *const HcEmbedding,
    normal: *const f64,
    len: usize,
    out_cut: *mut i64,
) -> HcStatus {
    guard(|| {
        let g = ffi_try!(unsafe { ref_arg(g, "graph") });
        let e = ffi_try!(unsafe { ref_arg(e, "embedding") });
        let out_cut = ffi_try!(unsafe { out_arg(out_cut, "out_cut") });
        let normal = ffi_try!(unsafe { slice_arg(normal, len, "normal") });
        let h = match Hyperplane::new(normal.to_vec()) {
            Ok(h) => h,
            Err(err) => return fail(&err),
        };
        match cut_of_hyperplane(&g.inner, &e.inner, &h) {
            Ok(cut) => {
                *out_cut = cut;
                HcStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Rounds an embedding with `b_samples` seeded random hyperplanes. When
/// `incumbent_out` is non-null it receives the best assignment found, one
/// +1/-1 byte per node.
///
/// # Safety
/// `g` and `e` must be live handles; `out_result` must be writable;
/// `incumbent_out` must be null or point to at least hc_graph_n(g) writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn hc_pgw(
    g: *const HcGraph,
    e: *const HcEmbedding,
    b_samples: usize,
    seed: u64,
    out_result: *mut HcPgwResult,
    incumbent_out: *mut i8,
) -> HcStatus {
    guard(|| {
        let g = ffi_try!(unsafe { ref_arg(g, "graph") });
        let e = ffi_try!(unsafe { ref_arg(e, "embedding") });
        let out_result = ffi_try!(unsafe { out_arg(out_result, "out_result") });
        match pgw(&g.inner, &e.inner, b_samples, seed) {
            Ok(r) => {
                *out_result = HcPgwResult {
                    avg_cut: r.avg_cut,
                    max_cut: r.max_cut,
                    samples: r.samples,
                };
                if !incumbent_out.is_null() {
                    let values = r.incumbent.values();
                    unsafe {
                        std::ptr::copy_nonoverlapping(
                            values.as_ptr(),
                            incumbent_out,
                            values.len(),
                        );
                    }
                }
                HcStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Fills `out` with the default training hyperparameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_train_config_default(out: *mut HcTrainConfig) -> HcStatus {
    guard(|| {
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        let c = TrainConfig::default();
        *out = HcTrainConfig {
            hidden: 256,
            chains: c.chains,
            total_steps: c.total_steps,
            t_step: c.t_step,
            n_epochs: c.n_epochs,
            minibatch: c.minibatch,
            learning_rate: c.learning_rate,
            clip_epsilon: c.clip_epsilon,
            gamma: c.gamma,
            seed: c.seed,
            use_adam: c.use_adam,
            reward_baseline: c.reward_baseline,
            deterministic: c.deterministic,
        };
        HcStatus::Ok
    })
}

/// Trains the rounding agent on one graph and embedding. `out_final` may be
/// null; otherwise it receives the last step's metrics (zeroed when
/// total_steps is 0).
///
/// # Safety
/// `g` and `e` must be live handles; `config` must be readable; `out_agent`
/// must be writable; `out_final` must be null or writable. On success
/// `*out_agent` owns a new agent; release it with hc_agent_free.
#[no_mangle]
pub unsafe extern "C" fn hc_train(
    g: *const HcGraph,
    e: *const HcEmbedding,
    config: *const HcTrainConfig,
    out_agent: *mut *mut HcAgent,
    out_final: *mut HcStepMetrics,
) -> HcStatus {
    guard(|| {
        let g = ffi_try!(unsafe { ref_arg(g, "graph") });
        let e = ffi_try!(unsafe { ref_arg(e, "embedding") });
        let config = ffi_try!(unsafe { ref_arg(config, "config") });
        let out_agent = ffi_try!(unsafe { out_arg(out_agent, "out_agent") });
        let train_config = TrainConfig {
            chains: config.chains,
            total_steps: config.total_steps,
            t_step: config.t_step,
            n_epochs: config.n_epochs,
            minibatch: config.minibatch,
            learning_rate: config.learning_rate,
            clip_epsilon: config.clip_epsilon,
            gamma: config.gamma,
            seed: config.seed,
            use_adam: config.use_adam,
            reward_baseline: config.reward_baseline,
            deterministic: config.deterministic,
        };
        let initial = match init_params(
            e.inner.dim(),
            config.hidden,
            derive_seed(config.seed, INIT_STREAM),
        ) {
            Ok(p) => p,
            Err(err) => return fail(&err),
        };
        match train(&g.inner, &e.inner, &train_config, &initial) {
            Ok((params, metrics)) => {
                if !out_final.is_null() {
                    let row = metrics.last().map(HcStepMetrics::of).unwrap_or(HcStepMetrics {
                        t: 0,
                        avg_cut: 0.0,
                        max_cut: 0,
                        mean_reward: 0.0,
                        loss_ppo: 0.0,
                        loss_vf: 0.0,
                        wall_ms: 0,
                    });
                    unsafe {
                        *out_final = row;
                    }
                }
                *out_agent = give(HcAgent { inner: params });
                HcStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// State dimension the agent was built for; 0 for a null handle.
///
/// # Safety
/// `a` must be null or a live agent handle.
#[no_mangle]
pub unsafe extern "C" fn hc_agent_d(a: *const HcAgent) -> usize {
    if a.is_null() {
        0
    } else {
        unsafe { &*a }.inner.d()
    }
}

/// Hidden width of the agent's network; 0 for a null handle.
///
/// # Safety
/// `a` must be null or a live agent handle.
#[no_mangle]
pub unsafe extern "C" fn hc_agent_l(a: *const HcAgent) -> usize {
    if a.is_null() {
        0
    } else {
        unsafe { &*a }.inner.l()
    }
}

/// Deterministic greedy policy step: runs the network on `state` (a unit
/// vector of length `len`), takes the mean action, and writes the
/// normalized next state to `out_next` (also `len` doubles).
///
/// # Safety
/// `state` must point to `len` readable doubles and `out_next` to `len`
/// writable doubles; the two may alias only exactly (equal pointers).
#[no_mangle]
pub unsafe extern "C" fn hc_agent_mean_step(
    a: *const HcAgent,
    state: *const f64,
    len: usize,
    out_next: *mut f64,
) -> HcStatus {
    guard(|| {
        let a = ffi_try!(unsafe { ref_arg(a, "agent") });
        let state = ffi_try!(unsafe { slice_arg(state, len, "state") });
        if out_next.is_null() {
            return null_err("out_next");
        }
        let out = match forward(&a.inner, state) {
            Ok(o) => o,
            Err(err) => return fail(&err),
        };
        match transition(&out.mean) {
            Some(next) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(next.as_ptr(), out_next, next.len());
                }
                HcStatus::Ok
            }
            None => fail(&Error::PolicyCollapse(
                "mean action cannot be normalized".into(),
            )),
        }
    })
}

/// Writes the agent's binary checkpoint form to a file.
///
/// # Safety
/// `a` must be a live agent handle; `path` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn hc_agent_save(a: *const HcAgent, path: *const c_char) -> HcStatus {
    guard(|| {
        let a = ffi_try!(unsafe { ref_arg(a, "agent") });
        let path = ffi_try!(unsafe { str_arg(path, "path") });
        match std::fs::write(path, a.inner.to_bytes()) {
            Ok(()) => HcStatus::Ok,
            Err(err) => fail(&Error::Io(err)),
        }
    })
}

/// Loads an agent checkpoint previously written by hc_agent_save (or by the
/// training pipeline).
///
/// # Safety
/// `path` must be nul-terminated; `out` must be writable. On success `*out`
/// owns a new agent.
#[no_mangle]
pub unsafe extern "C" fn hc_agent_load(path: *const c_char, out: *mut *mut HcAgent) -> HcStatus {
    guard(|| {
        let out = ffi_try!(unsafe { out_arg(out, "out") });
        let path = ffi_try!(unsafe { str_arg(path, "path") });
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(err) => return fail(&Error::Io(err)),
        };
        match AgentParams::from_bytes(&bytes) {
            Ok(p) => {
                *out = give(HcAgent { inner: p });
                HcStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases an agent handle; null is a no-op.
///
/// # Safety
/// `a` must be null or a pointer returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hc_agent_free(a: *mut HcAgent) {
    if !a.is_null() {
        drop(unsafe { Box::from_raw(a) });
    }
}
