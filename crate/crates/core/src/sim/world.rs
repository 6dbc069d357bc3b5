//! Ground-truth worlds: loading, procedural generation, reachability.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{binarize_closed, load_map, Cell, CellState, MapError, OccupancyGrid, Pose};
use crate::gvd::build_distance_map;

pub const DEFAULT_RESOLUTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub truth: OccupancyGrid,
    pub start: Pose,
    pub name: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WorldKind {
    Corridor,
    Rooms,
    Maze,
    Open,
}

impl WorldKind {
    pub const ALL: [WorldKind; 4] = [WorldKind::Corridor, WorldKind::Rooms, WorldKind::Maze, WorldKind::Open];

    pub fn as_str(self) -> &'static str {
        match self {
            WorldKind::Corridor => "corridor",
            WorldKind::Rooms => "rooms",
            WorldKind::Maze => "maze",
            WorldKind::Open => "open",
        }
    }

    /// The benchmark size of each kind as (width, height) in cells.
    pub fn default_size(self) -> (usize, usize) {
        match self {
            WorldKind::Corridor => (210, 44),
            _ => (100, 100),
        }
    }
}

impl fmt::Display for WorldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WorldKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corridor" => Ok(WorldKind::Corridor),
            "rooms" => Ok(WorldKind::Rooms),
            "maze" => Ok(WorldKind::Maze),
            "open" => Ok(WorldKind::Open),
            other => Err(format!("unknown world kind `{other}` (corridor, rooms, maze, open)")),
        }
    }
}

/// A world source as written on the command line or in a bench config:
/// a map path, or `gen:<kind>:<size>:<seed>` where size is `N` or `WxH`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorldSpec {
    File(String),
    Generated {
        kind: WorldKind,
        width: usize,
        height: usize,
        seed: u64,
    },
}

impl FromStr for WorldSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some(rest) = s.strip_prefix("gen:") else {
            return Ok(WorldSpec::File(s.to_string()));
        };
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected gen:<kind>:<size>:<seed>, got `{s}`"));
        }
        let kind: WorldKind = parts[0].parse()?;
        let (width, height) = match parts[1].split_once('x') {
            Some((w, h)) => (parse_usize(w)?, parse_usize(h)?),
            None => {
                let n = parse_usize(parts[1])?;
                (n, n)
            }
        };
        let seed = parts[2].parse().map_err(|_| format!("bad seed `{}`", parts[2]))?;
        Ok(WorldSpec::Generated {
            kind,
            width,
            height,
            seed,
        })
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("bad size `{s}`"))
}

impl WorldSpec {
    pub fn build(&self) -> Result<World, MapError> {
        match self {
            WorldSpec::File(path) => load_world(path),
            &WorldSpec::Generated {
                kind,
                width,
                height,
                seed,
            } => generate_world(kind, width, height, seed),
        }
    }
}

/// Loads a map as ground truth. Unknown cells are taken as obstacle and the
/// start is placed on the free cell of maximum clearance.
pub fn load_world(path: impl AsRef<Path>) -> Result<World, MapError> {
    let path = path.as_ref();
    let mut truth = load_map(path)?;
    for i in 0..truth.len() {
        let cell = truth.cell_at(i);
        if truth.get(cell) == CellState::Unknown {
            truth.set(cell, CellState::Occupied);
        }
    }
    let start = max_clearance_start(&truth).ok_or(MapError::Invalid("map has no free cell".into()))?;
    Ok(World {
        truth,
        start,
        name: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        seed: 0,
    })
}

/// Free cell of largest clearance (ties to the smallest cell), heading 0.
pub fn max_clearance_start(truth: &OccupancyGrid) -> Option<Pose> {
    let dmap = build_distance_map(&binarize_closed(truth)).ok()?;
    let mut best: Option<(f64, Cell)> = None;
    for i in 0..truth.len() {
        let cell = truth.cell_at(i);
        if truth.get(cell) != CellState::Free {
            continue;
        }
        let c = dmap.clearance(cell.col, cell.row);
        if best.is_none_or(|(bc, _)| c > bc) {
            best = Some((c, cell));
        }
    }
    best.map(|(_, cell)| {
        let p = truth.cell_center(cell);
        Pose::new(p.x, p.y, 0.0)
    })
}

/// Free cells 8-connected to `from` (through free cells only).
pub fn flood_fill(grid: &OccupancyGrid, from: Cell) -> Vec<bool> {
    let mut seen = vec![false; grid.len()];
    if !grid.contains(from) || grid.get(from) != CellState::Free {
        return seen;
    }
    let mut queue = VecDeque::from([from]);
    seen[grid.index(from)] = true;
    while let Some(c) = queue.pop_front() {
        for n in grid.neighbors8(c) {
            let i = grid.index(n);
            if !seen[i] && grid.get(n) == CellState::Free {
                seen[i] = true;
                queue.push_back(n);
            }
        }
    }
    seen
}

impl World {
    pub fn start_cell(&self) -> Cell {
        self.truth
            .world_to_cell(self.start.position())
            .expect("start lies inside the map")
    }

    /// Free cells reachable from the start.
    pub fn reachable_mask(&self) -> Vec<bool> {
        flood_fill(&self.truth, self.start_cell())
    }
}

fn rect(grid: &mut OccupancyGrid, col0: usize, row0: usize, col1: usize, row1: usize, state: CellState) {
    for r in row0..row1.min(grid.height()) {
        for c in col0..col1.min(grid.width()) {
            grid.set(Cell::new(c, r), state);
        }
    }
}

fn walled(width: usize, height: usize) -> OccupancyGrid {
    let mut g = OccupancyGrid::filled(width, height, DEFAULT_RESOLUTION, CellState::Free);
    rect(&mut g, 0, 0, width, 1, CellState::Occupied);
    rect(&mut g, 0, height - 1, width, height, CellState::Occupied);
    rect(&mut g, 0, 0, 1, height, CellState::Occupied);
    rect(&mut g, width - 1, 0, width, height, CellState::Occupied);
    g
}

/// Deterministic procedural world. Sizes below 20 cells are raised to 20.
pub fn generate_world(kind: WorldKind, width: usize, height: usize, seed: u64) -> Result<World, MapError> {
    let (width, height) = (width.max(20), height.max(20));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((kind as u64) << 56));
    let mut truth = match kind {
        WorldKind::Corridor => corridor(width, height, &mut rng),
        WorldKind::Rooms => rooms(width, height, &mut rng),
        WorldKind::Maze => maze(width, height, &mut rng),
        WorldKind::Open => open(width, height, &mut rng),
    };
    keep_largest_component(&mut truth);
    let start = max_clearance_start(&truth).ok_or(MapError::Invalid("generated world has no free cell".into()))?;
    Ok(World {
        truth,
        start,
        name: format!("{kind}-{width}x{height}-{seed}"),
        seed,
    })
}

/// Turns every free cell outside the largest 4-connected component into
/// obstacle.
fn keep_largest_component(g: &mut OccupancyGrid) {
    let mut label = vec![usize::MAX; g.len()];
    let mut sizes = Vec::new();
    for i in 0..g.len() {
        if label[i] != usize::MAX || g.cells()[i] != CellState::Free {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        let mut queue = VecDeque::from([i]);
        label[i] = id;
        while let Some(j) = queue.pop_front() {
            size += 1;
            let c = g.cell_at(j);
            let (col, row) = (c.col as i64, c.row as i64);
            for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                if g.get_signed(col + dc, row + dr) == Some(CellState::Free) {
                    let k = g.index(Cell::new((col + dc) as usize, (row + dr) as usize));
                    if label[k] == usize::MAX {
                        label[k] = id;
                        queue.push_back(k);
                    }
                }
            }
        }
        sizes.push(size);
    }
    let Some(keep) = (0..sizes.len()).max_by_key(|&i| (sizes[i], std::cmp::Reverse(i))) else {
        return;
    };
    for (i, &l) in label.iter().enumerate() {
        if l != usize::MAX && l != keep {
            g.set(g.cell_at(i), CellState::Occupied);
        }
    }
}

/// A single loop around a central block; each side has its own width.
fn corridor(w: usize, h: usize, rng: &mut ChaCha8Rng) -> OccupancyGrid {
    let mut g = walled(w, h);
    let max_side = ((w.min(h) - 2) / 3).max(3);
    let lo = 9.min(max_side);
    let mut side = || rng.gen_range(lo..=max_side.min(13).max(lo));
    let (top, bottom, left, right) = (side(), side(), side(), side());
    let (c0, c1) = (1 + left, w - 1 - right);
    let (r0, r1) = (1 + top, h - 1 - bottom);
    if c0 < c1 && r0 < r1 {
        rect(&mut g, c0, r0, c1, r1, CellState::Occupied);
    }
    g
}

/// Rooms on a jittered lattice with 2-cell walls; doors along a random
/// spanning tree plus a few extra loops.
fn rooms(w: usize, h: usize, rng: &mut ChaCha8Rng) -> OccupancyGrid {
    const TARGET: usize = 30;
    const WALL: usize = 2;
    let mut g = walled(w, h);
    let splits = |len: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        let n = ((len - 2) as f64 / TARGET as f64).round().max(1.0) as usize;
        let span = (len - 2) as f64 / n as f64;
        let jitter = (span / 6.0).floor() as i64;
        let mut cuts = vec![1];
        for k in 1..n {
            let base = 1 + (k as f64 * span).round() as i64;
            let j = if jitter > 0 { rng.gen_range(-jitter..=jitter) } else { 0 };
            cuts.push((base + j) as usize);
        }
        cuts.push(len - 1);
        cuts
    };
    let xs = splits(w, rng);
    let ys = splits(h, rng);
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    for &x in &xs[1..nx] {
        rect(&mut g, x - WALL / 2, 0, x + WALL / 2, h, CellState::Occupied);
    }
    for &y in &ys[1..ny] {
        rect(&mut g, 0, y - WALL / 2, w, y + WALL / 2, CellState::Occupied);
    }

    // walls between horizontally / vertically adjacent rooms
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let id = j * nx + i;
            if i + 1 < nx {
                edges.push((id, id + 1));
            }
            if j + 1 < ny {
                edges.push((id, id + nx));
            }
        }
    }
    edges.shuffle(rng);
    let mut parent: Vec<usize> = (0..nx * ny).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for &(a, b) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        let tree = ra != rb;
        if tree {
            parent[ra] = rb;
        }
        if !(tree || rng.gen_bool(0.3)) {
            continue;
        }
        let (ai, aj) = (a % nx, a / nx);
        if b == a + 1 {
            // vertical wall at xs[ai + 1], door spans rows of room row aj
            let (lo, hi) = (ys[aj] + WALL, ys[aj + 1] - WALL);
            let (s, e) = door(lo, hi, rng);
            let x = xs[ai + 1];
            rect(&mut g, x - WALL / 2, s, x + WALL / 2, e, CellState::Free);
        } else {
            let (lo, hi) = (xs[ai] + WALL, xs[ai + 1] - WALL);
            let (s, e) = door(lo, hi, rng);
            let y = ys[aj + 1];
            rect(&mut g, s, y - WALL / 2, e, y + WALL / 2, CellState::Free);
        }
    }
    g
}

/// A door of 8..=12 cells inside `[lo, hi)`, or the whole span if shorter.
fn door(lo: usize, hi: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let span = hi.saturating_sub(lo);
    if span <= 8 {
        return (lo, hi);
    }
    let width = rng.gen_range(8..=12.min(span));
    let s = rng.gen_range(lo..=hi - width);
    (s, s + width)
}

/// Perfect maze by randomized depth-first search; 10-cell passages,
/// 2-cell walls.
fn maze(w: usize, h: usize, rng: &mut ChaCha8Rng) -> OccupancyGrid {
    const PASSAGE: usize = 10;
    const WALL: usize = 2;
    const PITCH: usize = PASSAGE + WALL;
    let nx = ((w - WALL) / PITCH).max(1);
    let ny = ((h - WALL) / PITCH).max(1);
    let mut g = OccupancyGrid::filled(w, h, DEFAULT_RESOLUTION, CellState::Occupied);
    let origin = |i: usize| WALL + i * PITCH;
    for j in 0..ny {
        for i in 0..nx {
            rect(&mut g, origin(i), origin(j), origin(i) + PASSAGE, origin(j) + PASSAGE, CellState::Free);
        }
    }
    let mut visited = vec![false; nx * ny];
    let mut stack = vec![0usize];
    visited[0] = true;
    while let Some(&cur) = stack.last() {
        let (i, j) = (cur % nx, cur / nx);
        let mut options: Vec<usize> = Vec::with_capacity(4);
        if i > 0 && !visited[cur - 1] {
            options.push(cur - 1);
        }
        if i + 1 < nx && !visited[cur + 1] {
            options.push(cur + 1);
        }
        if j > 0 && !visited[cur - nx] {
            options.push(cur - nx);
        }
        if j + 1 < ny && !visited[cur + nx] {
            options.push(cur + nx);
        }
        let Some(&next) = options.choose(rng) else {
            stack.pop();
            continue;
        };
        visited[next] = true;
        let (a, b) = (cur.min(next), cur.max(next));
        let (ai, aj) = (a % nx, a / nx);
        if b == a + 1 {
            let x = origin(ai) + PASSAGE;
            rect(&mut g, x, origin(aj), x + WALL, origin(aj) + PASSAGE, CellState::Free);
        } else {
            let y = origin(aj) + PASSAGE;
            rect(&mut g, origin(ai), y, origin(ai) + PASSAGE, y + WALL, CellState::Free);
        }
        stack.push(next);
    }
    g
}

/// An open hall with scattered rectangular obstacles kept at least
/// `GAP` cells apart from each other and from the walls.
fn open(w: usize, h: usize, rng: &mut ChaCha8Rng) -> OccupancyGrid {
    const GAP: usize = 8;
    let mut g = walled(w, h);
    let wanted = (w * h / 1500).max(1);
    let mut placed: Vec<(usize, usize, usize, usize)> = Vec::new();
    for _ in 0..wanted * 40 {
        if placed.len() >= wanted {
            break;
        }
        let (ow, oh) = (rng.gen_range(4..=14usize), rng.gen_range(4..=14usize));
        if w < ow + 2 * GAP + 2 || h < oh + 2 * GAP + 2 {
            break;
        }
        let c0 = rng.gen_range(1 + GAP..=w - 1 - GAP - ow);
        let r0 = rng.gen_range(1 + GAP..=h - 1 - GAP - oh);
        let candidate = (c0, r0, c0 + ow, r0 + oh);
        let clear = placed.iter().all(|&(a0, b0, a1, b1)| {
            c0 >= a1 + GAP || a0 >= candidate.2 + GAP || r0 >= b1 + GAP || b0 >= candidate.3 + GAP
        });
        if clear {
            placed.push(candidate);
        }
    }
    for (c0, r0, c1, r1) in placed {
        rect(&mut g, c0, r0, c1, r1, CellState::Occupied);
    }
    g
}
