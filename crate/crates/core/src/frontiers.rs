//! Heuristic frontier fusion extraction over GVD nodes, and the three
//! frontier ledgers (real-time local, reserved local, global).

use std::fmt::Write as _;

use crate::grid::{window_bounds, Cell, CellState, MapError, OccupancyGrid, Point, Pose};
use crate::gvd::{GvdGraph, GvdNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrontierKind {
    RealtimeLocal,
    ReservedLocal,
    Global,
}

impl FrontierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontierKind::RealtimeLocal => "realtime_local",
            FrontierKind::ReservedLocal => "reserved_local",
            FrontierKind::Global => "global",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub cell: Cell,
    pub position: Point,
    /// GVD node radius in meters.
    pub radius: f64,
    /// Unknown cells inside the radius disc.
    pub unknown_count: usize,
    /// Unknown cells inside the fixed information-gain disc; refreshed by
    /// the assignment policy.
    pub gain: usize,
    pub born_at: u64,
    pub kind: FrontierKind,
}

/// Unknown cells whose centre lies within `radius` meters of `center`'s
/// centre. The disc is clipped at the map border.
pub fn count_unknown_in_disc(grid: &OccupancyGrid, center: Cell, radius: f64) -> usize {
    let r = (radius / grid.resolution()).max(0.0) + 1e-9;
    let r2 = r * r;
    let reach = r.floor() as i64;
    let (cc, cr) = (center.col as i64, center.row as i64);
    let mut count = 0;
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            if ((dc * dc + dr * dr) as f64) > r2 {
                continue;
            }
            if grid.get_signed(cc + dc, cr + dr) == Some(CellState::Unknown) {
                count += 1;
            }
        }
    }
    count
}

/// Largest-radius-first fusion: emit a node when its disc holds more than
/// `delta` unknown cells and drop every remaining node within its radius;
/// otherwise drop just that node. Equal radii are taken in `(row, col)`
/// order. Output is in emission order, tagged `Global` with `born_at = 0`.
pub fn fuse_extract(grid: &OccupancyGrid, nodes: &[GvdNode], delta: usize) -> Vec<Frontier> {
    let mut order: Vec<&GvdNode> = nodes.iter().collect();
    order.sort_by(|a, b| b.radius.total_cmp(&a.radius).then(a.cell.cmp(&b.cell)));
    let mut removed = vec![false; order.len()];
    let mut out = Vec::new();
    let res = grid.resolution();
    for i in 0..order.len() {
        if removed[i] {
            continue;
        }
        removed[i] = true;
        let node = order[i];
        let num = count_unknown_in_disc(grid, node.cell, node.radius);
        if num <= delta {
            continue;
        }
        let reach = node.radius / res + 1e-9;
        for (j, other) in order.iter().enumerate().skip(i + 1) {
            if !removed[j] && node.cell.dist(other.cell) <= reach {
                removed[j] = true;
            }
        }
        out.push(Frontier {
            cell: node.cell,
            position: grid.cell_center(node.cell),
            radius: node.radius,
            unknown_count: num,
            gain: 0,
            born_at: 0,
            kind: FrontierKind::Global,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scope {
    /// Nodes inside the `side` x `side` meter window centred on the robot.
    Local { center: Pose, side: f64 },
    Global,
}

/// Runs [`fuse_extract`] over the nodes in `scope`; local results are tagged
/// `RealtimeLocal`, global ones `Global`, all born at `step`.
pub fn extract_scoped(
    grid: &OccupancyGrid,
    gvd: &GvdGraph,
    scope: Scope,
    delta: usize,
    step: u64,
) -> Result<Vec<Frontier>, MapError> {
    let (nodes, kind): (Vec<GvdNode>, _) = match scope {
        Scope::Local { center, side } => {
            let win = window_bounds(grid, center.position(), side)?;
            (
                gvd.nodes().iter().copied().filter(|n| win.contains(n.cell)).collect(),
                FrontierKind::RealtimeLocal,
            )
        }
        Scope::Global => (gvd.nodes().to_vec(), FrontierKind::Global),
    };
    let mut out = fuse_extract(grid, &nodes, delta);
    for f in &mut out {
        f.kind = kind;
        f.born_at = step;
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrontierLedger {
    pub v_current: Vec<Frontier>,
    pub v_local: Vec<Frontier>,
    pub v_global: Vec<Frontier>,
}

impl FrontierLedger {
    pub fn is_empty(&self) -> bool {
        self.v_current.is_empty() && self.v_local.is_empty() && self.v_global.is_empty()
    }

    pub fn len(&self) -> usize {
        self.v_current.len() + self.v_local.len() + self.v_global.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Frontier> {
        self.v_current.iter().chain(&self.v_local).chain(&self.v_global)
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.v_current.len(), self.v_local.len(), self.v_global.len())
    }

    /// Recounts unknown cells in each frontier's own disc and deletes those
    /// with none left.
    pub fn prune_zero_gain(&mut self, grid: &OccupancyGrid) {
        for set in [&mut self.v_current, &mut self.v_local, &mut self.v_global] {
            for f in set.iter_mut() {
                f.unknown_count = count_unknown_in_disc(grid, f.cell, f.radius);
            }
            set.retain(|f| f.unknown_count > 0);
        }
    }

    /// Removes every frontier at `cell` from all three sets.
    pub fn remove_cell(&mut self, cell: Cell) {
        for set in [&mut self.v_current, &mut self.v_local, &mut self.v_global] {
            set.retain(|f| f.cell != cell);
        }
    }

    /// CSV rows `step,kind,col,row,radius_m,unknown_count`.
    pub fn csv_rows(&self, step: u64) -> String {
        let mut out = String::new();
        for f in self.iter() {
            let _ = writeln!(
                out,
                "{step},{},{},{},{:.4},{}",
                f.kind.as_str(),
                f.cell.col,
                f.cell.row,
                f.radius,
                f.unknown_count
            );
        }
        out
    }
}

pub const FRONTIER_CSV_HEADER: &str = "step,kind,col,row,radius_m,unknown_count";

/// Advances the ledger by one step.
///
/// Previous real-time frontiers are demoted to reserved; `fresh_local`
/// becomes the real-time set; `fresh_global` joins the global set. Reserved
/// and global members are re-scored and deleted at zero unknown count.
/// Duplicates are resolved in precedence order real-time > reserved >
/// global (fresh before stale within a tier): a candidate is dropped when a
/// kept frontier sits on the same cell, or when it lies within the radius of
/// a kept frontier born this step.
pub fn ledger_update(
    ledger: FrontierLedger,
    fresh_local: Vec<Frontier>,
    fresh_global: Vec<Frontier>,
    grid: &OccupancyGrid,
    step: u64,
) -> FrontierLedger {
    let FrontierLedger {
        v_current,
        v_local,
        v_global,
    } = ledger;
    let res = grid.resolution();

    let rescore = |mut f: Frontier| {
        f.unknown_count = count_unknown_in_disc(grid, f.cell, f.radius);
        f
    };
    let reserved = v_local
        .into_iter()
        .chain(v_current.into_iter().map(|mut f| {
            f.kind = FrontierKind::ReservedLocal;
            f
        }))
        .map(rescore)
        .filter(|f| f.unknown_count > 0);
    let stale_global = v_global.into_iter().map(rescore).filter(|f| f.unknown_count > 0);

    let candidates = fresh_local
        .into_iter()
        .map(|mut f| {
            f.kind = FrontierKind::RealtimeLocal;
            f.born_at = step;
            f
        })
        .chain(reserved)
        .chain(fresh_global.into_iter().map(|mut f| {
            f.kind = FrontierKind::Global;
            f.born_at = step;
            f
        }))
        .chain(stale_global);

    let mut kept: Vec<Frontier> = Vec::new();
    for f in candidates {
        let duplicate = kept.iter().any(|k| {
            k.cell == f.cell || (k.born_at == step && k.cell.dist(f.cell) <= k.radius / res + 1e-9)
        });
        if !duplicate {
            kept.push(f);
        }
    }

    let mut out = FrontierLedger::default();
    for f in kept {
        match f.kind {
            FrontierKind::RealtimeLocal => out.v_current.push(f),
            FrontierKind::ReservedLocal => out.v_local.push(f),
            FrontierKind::Global => out.v_global.push(f),
        }
    }
    out
}
