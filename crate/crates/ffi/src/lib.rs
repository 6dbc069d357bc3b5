//! C ABI over `gvdx`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns a [`GvdxStatus`]
//! and leaves a message for [`gvdx_last_error_message`] on the calling
//! thread. Cell codes follow the ROS convention: `-1` unknown, `0` free,
//! `100` occupied.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gvdx::grid::{load_map, map_entropy, Cell, CellState, MapError, OccupancyGrid, Point};
use gvdx::gvd::{build_gvd, GvdError, GvdGraph, GvdParams};
use gvdx::gvd_path::{GvdPlanner, PathError};
use gvdx::sim::{run_exploration, ExploreConfig, Strategy, Termination, WorldSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GvdxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    /// The map has no obstacle or unknown cell to measure clearance from.
    NoObstacle = 5,
    Unreachable = 6,
    Internal = 7,
}

/// Occupancy grid handle.
pub struct GvdxGrid {
    grid: OccupancyGrid,
}

/// Built GVD handle; keeps a copy of the grid it was built from.
pub struct GvdxGvd {
    grid: OccupancyGrid,
    graph: GvdGraph,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GvdxGvdParams {
    pub ridge_threshold: f64,
    pub min_clearance: f64,
    pub closed_world: bool,
    pub bridge_gaps: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GvdxNode {
    pub col: usize,
    pub row: usize,
    pub x: f64,
    pub y: f64,
    /// Clearance in meters.
    pub radius: f64,
    pub component: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GvdxRunSummary {
    pub steps: u64,
    pub total_time: f64,
    pub total_path: f64,
    pub explored_fraction: f64,
    /// 0 done, 1 explored, 2 timeout.
    pub termination: i32,
    pub decisions: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: GvdxStatus, msg: impl Into<String>) -> GvdxStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> GvdxStatus) -> GvdxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == GvdxStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(GvdxStatus::Internal, "internal panic"),
    }
}

fn map_error(e: MapError) -> GvdxStatus {
    let status = match e {
        MapError::Io { .. } => GvdxStatus::Io,
        MapError::Invalid(_) | MapError::Dimensions { .. } => GvdxStatus::InvalidArgument,
        _ => GvdxStatus::Parse,
    };
    fail(status, e.to_string())
}

fn gvd_error(e: GvdError) -> GvdxStatus {
    let status = match e {
        GvdError::NoObstacle => GvdxStatus::NoObstacle,
        _ => GvdxStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn path_error(e: PathError) -> GvdxStatus {
    let status = match e {
        PathError::OutsideMap | PathError::NotFree => GvdxStatus::InvalidArgument,
        PathError::Unattachable | PathError::Disconnected => GvdxStatus::Unreachable,
    };
    fail(status, e.to_string())
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, GvdxStatus> {
    if p.is_null() {
        return Err(fail(GvdxStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(GvdxStatus::InvalidArgument, "string is not UTF-8"))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(GvdxStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gvdx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated and
/// NUL-terminated) and returns the full length excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gvdx_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a grid from `width * height` row-major cell codes.
///
/// # Safety
/// `cells` must be valid for `width * height` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gvdx_grid_new(
    width: usize,
    height: usize,
    resolution: f64,
    origin_x: f64,
    origin_y: f64,
    cells: *const i8,
    out: *mut *mut GvdxGrid,
) -> GvdxStatus {
    non_null!(cells, out);
    guard(|| {
        let Some(n) = width.checked_mul(height) else {
            return fail(GvdxStatus::InvalidArgument, "width * height overflows");
        };
        let codes = std::slice::from_raw_parts(cells, n);
        let mut states = Vec::with_capacity(n);
        for (i, &c) in codes.iter().enumerate() {
            match CellState::from_code(c) {
                Some(s) => states.push(s),
                None => return fail(GvdxStatus::InvalidArgument, format!("cell {i} has code {c}")),
            }
        }
        match OccupancyGrid::new(width, height, resolution, Point::new(origin_x, origin_y), states) {
            Ok(grid) => {
                *out = Box::into_raw(Box::new(GvdxGrid { grid }));
                GvdxStatus::Ok
            }
            Err(e) => map_error(e),
        }
    })
}

/// Loads a PGM (with `.cfg` sidecar) or ASCII map.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gvdx_grid_load(path: *const c_char, out: *mut *mut GvdxGrid) -> GvdxStatus {
    non_null!(out);
    let path = match c_str(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    guard(|| match load_map(path) {
        Ok(grid) => {
            *out = Box::into_raw(Box::new(GvdxGrid { grid }));
            GvdxStatus::Ok
        }
        Err(e) => map_error(e),
    })
}

/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gvdx_grid_width(grid: *const GvdxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.grid.width())
}

/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gvdx_grid_height(grid: *const GvdxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.grid.height())
}

/// # Safety
/// `grid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gvdx_grid_get(grid: *const GvdxGrid, col: usize, row: usize, out: *mut i8) -> GvdxStatus {
    non_null!(grid, out);
    let g = &(*grid).grid;
    if col >= g.width() || row >= g.height() {
        return fail(GvdxStatus::InvalidArgument, format!("cell ({col}, {row}) is outside the grid"));
    }
    *out = g.get(Cell::new(col, row)).code();
    GvdxStatus::Ok
}

/// # Safety
/// `grid` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gvdx_grid_set(grid: *mut GvdxGrid, col: usize, row: usize, code: i8) -> GvdxStatus {
    non_null!(grid);
    let g = &mut (*grid).grid;
    if col >= g.width() || row >= g.height() {
        return fail(GvdxStatus::InvalidArgument, format!("cell ({col}, {row}) is outside the grid"));
    }
    let Some(state) = CellState::from_code(code) else {
        return fail(GvdxStatus::InvalidArgument, format!("unknown cell code {code}"));
    };
    g.set(Cell::new(col, row), state);
    GvdxStatus::Ok
}

/// Map entropy: the number of unknown cells.
///
/// # Safety
/// `grid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gvdx_grid_entropy(grid: *const GvdxGrid, out: *mut f64) -> GvdxStatus {
    non_null!(grid, out);
    *out = map_entropy(&(*grid).grid);
    GvdxStatus::Ok
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gvdx_grid_free(grid: *mut GvdxGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

#[no_mangle]
pub extern "C" fn gvdx_gvd_params_default() -> GvdxGvdParams {
    let d = GvdParams::default();
    GvdxGvdParams {
        ridge_threshold: d.ridge_threshold,
        min_clearance: d.min_clearance,
        closed_world: d.closed_world,
        bridge_gaps: d.bridge_gaps,
    }
}

/// Builds the GVD of `grid`; `params` may be null for the defaults.
///
/// # Safety
/// `grid` must be a live handle, `params` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gvdx_gvd_build(
    grid: *const GvdxGrid,
    params: *const GvdxGvdParams,
    out: *mut *mut GvdxGvd,
) -> GvdxStatus {
    non_null!(grid, out);
    let p = params.as_ref().copied().unwrap_or_else(|| gvdx_gvd_params_default());
    if !p.ridge_threshold.is_finite() || !(p.min_clearance >= 0.0) {
        return fail(GvdxStatus::InvalidArgument, "ridge_threshold must be finite and min_clearance >= 0");
    }
    let params = GvdParams {
        ridge_threshold: p.ridge_threshold,
        min_clearance: p.min_clearance,
        closed_world: p.closed_world,
        bridge_gaps: p.bridge_gaps,
    };
    let grid = &(*grid).grid;
    guard(|| match build_gvd(grid, &params) {
        Ok(gvd) => {
            *out = Box::into_raw(Box::new(GvdxGvd {
                grid: grid.clone(),
                graph: gvd.graph,
            }));
            GvdxStatus::Ok
        }
        Err(e) => gvd_error(e),
    })
}

/// # Safety
/// `gvd` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gvdx_gvd_node_count(gvd: *const GvdxGvd) -> usize {
    gvd.as_ref().map_or(0, |g| g.graph.len())
}

/// # Safety
/// `gvd` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gvdx_gvd_node(gvd: *const GvdxGvd, index: usize, out: *mut GvdxNode) -> GvdxStatus {
    non_null!(gvd, out);
    let graph = &(*gvd).graph;
    if index >= graph.len() {
        return fail(GvdxStatus::InvalidArgument, format!("node {index} of {}", graph.len()));
    }
    let node = graph.node(index);
    let p = graph.position(index);
    *out = GvdxNode {
        col: node.cell.col,
        row: node.cell.row,
        x: p.x,
        y: p.y,
        radius: node.radius,
        component: graph.component(index),
    };
    GvdxStatus::Ok
}

/// Path cost in meters between two world points along the GVD.
///
/// # Safety
/// `gvd` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gvdx_gvd_path_cost(
    gvd: *const GvdxGvd,
    from_x: f64,
    from_y: f64,
    to_x: f64,
    to_y: f64,
    out: *mut f64,
) -> GvdxStatus {
    non_null!(gvd, out);
    let g = &*gvd;
    guard(|| {
        let planner = GvdPlanner::new(&g.graph, &g.grid);
        match planner.path_cost(Point::new(from_x, from_y), Point::new(to_x, to_y)) {
            Ok(c) => {
                *out = c;
                GvdxStatus::Ok
            }
            Err(e) => path_error(e),
        }
    })
}

/// # Safety
/// `gvd` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gvdx_gvd_free(gvd: *mut GvdxGvd) {
    if !gvd.is_null() {
        drop(Box::from_raw(gvd));
    }
}

/// Runs one exploration with default parameters. `world` is a map path or
/// `gen:<kind>:<N|WxH>:<seed>`; `strategy` is `gvd`, `nearest` or `greedy`;
/// `max_steps == 0` keeps the default cap.
///
/// # Safety
/// `world` and `strategy` must be NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gvdx_explore(
    world: *const c_char,
    strategy: *const c_char,
    seed: u64,
    max_steps: u64,
    out: *mut GvdxRunSummary,
) -> GvdxStatus {
    non_null!(out);
    let (world, strategy) = match (c_str(world), c_str(strategy)) {
        (Ok(w), Ok(s)) => (w, s),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    guard(|| {
        let spec: WorldSpec = match world.parse() {
            Ok(s) => s,
            Err(e) => return fail(GvdxStatus::Parse, e),
        };
        let strategy: Strategy = match strategy.parse() {
            Ok(s) => s,
            Err(e) => return fail(GvdxStatus::InvalidArgument, e),
        };
        let world = match spec.build() {
            Ok(w) => w,
            Err(e) => return map_error(e),
        };
        let mut cfg = ExploreConfig::default();
        if max_steps > 0 {
            cfg.max_steps = max_steps;
        }
        let s = run_exploration(&world, strategy, &cfg, seed).summary;
        *out = GvdxRunSummary {
            steps: s.steps,
            total_time: s.total_time,
            total_path: s.total_path,
            explored_fraction: s.explored_fraction,
            termination: match s.termination {
                Termination::Done => 0,
                Termination::Explored => 1,
                Termination::Timeout => 2,
            },
            decisions: s.decisions as u64,
        };
        GvdxStatus::Ok
    })
}
