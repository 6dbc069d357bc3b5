//! Path costs on the GVD graph: attach arbitrary points to the skeleton,
//! run Dijkstra over it, and report connector + skeleton + connector length.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::grid::{Cell, CellState, OccupancyGrid, Point};
use crate::gvd::GvdGraph;

pub const DEFAULT_ATTACH_CAP: f64 = 3.0;

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("point is outside the map")]
    OutsideMap,
    #[error("point lies on an occupied cell")]
    NotFree,
    #[error("no collision-free connector to the GVD within the search cap")]
    Unattachable,
    #[error("endpoints lie in different GVD components")]
    Disconnected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attachment {
    pub source: Point,
    /// Index of the graph vertex the source connects to.
    pub vertex: usize,
    pub connector_cost: f64,
}

/// Cells visited by an integer Bresenham line from `a` to `b`, inclusive.
pub fn bresenham(a: Cell, b: Cell) -> Vec<Cell> {
    let (mut x, mut y) = (a.col as i64, a.row as i64);
    let (x1, y1) = (b.col as i64, b.row as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy + 1) as usize);
    loop {
        out.push(Cell::new(x as usize, y as usize));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

fn line_is_clear(grid: &OccupancyGrid, a: Cell, b: Cell) -> bool {
    bresenham(a, b).into_iter().all(|c| grid.get(c) != CellState::Occupied)
}

/// Nearest graph vertex (Euclidean, ties by cell order) whose straight
/// connector crosses no occupied cell. Unknown cells may be crossed.
pub fn attach_to_gvd(point: Point, graph: &GvdGraph, grid: &OccupancyGrid, cap: f64) -> Result<Attachment, PathError> {
    let start = grid.world_to_cell(point).ok_or(PathError::OutsideMap)?;
    if grid.get(start) == CellState::Occupied {
        return Err(PathError::NotFree);
    }
    let res = grid.resolution();
    let reach = (cap / res).ceil() as i64 + 1;
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let mut candidates: Vec<(f64, Cell, usize)> = Vec::new();
    for r in (start.row as i64 - reach).max(0)..=(start.row as i64 + reach).min(h - 1) {
        for c in (start.col as i64 - reach).max(0)..=(start.col as i64 + reach).min(w - 1) {
            let cell = Cell::new(c as usize, r as usize);
            if let Some(v) = graph.node_at(cell) {
                let d = point.dist(graph.position(v));
                if d <= cap {
                    candidates.push((d, cell, v));
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    candidates
        .into_iter()
        .find(|&(_, cell, _)| line_is_clear(grid, start, cell))
        .map(|(d, _, v)| Attachment {
            source: point,
            vertex: v,
            connector_cost: d,
        })
        .ok_or(PathError::Unattachable)
}

#[derive(Clone, Copy, PartialEq)]
struct QueueEntry {
    dist: f64,
    node: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths over the GVD graph.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    pred: Vec<usize>,
}

impl ShortestPaths {
    pub fn reachable(&self, v: usize) -> bool {
        self.dist[v].is_finite()
    }

    /// Vertex sequence from the source to `target`.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.reachable(target) {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while v != self.source {
            v = self.pred[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }
}

/// Dijkstra from `source`. Among equal-cost predecessors the one with the
/// smallest cell wins.
pub fn dijkstra(graph: &GvdGraph, source: usize) -> ShortestPaths {
    let n = graph.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(QueueEntry { dist: 0.0, node: source });
    while let Some(QueueEntry { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in graph.neighbors(u) {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(QueueEntry { dist: nd, node: v });
            } else if nd == dist[v] && u < pred[v] {
                pred[v] = u;
            }
        }
    }
    ShortestPaths { source, dist, pred }
}

/// Minimum-weight vertex path between two graph vertices.
pub fn gvd_shortest_path(graph: &GvdGraph, a: usize, b: usize) -> Result<(Vec<usize>, f64), PathError> {
    if graph.component(a) != graph.component(b) {
        return Err(PathError::Disconnected);
    }
    let sp = dijkstra(graph, a);
    let path = sp.path_to(b).ok_or(PathError::Disconnected)?;
    Ok((path, sp.dist[b]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GvdPath {
    /// Source point, skeleton vertices, goal point.
    pub waypoints: Vec<Point>,
    pub cost: f64,
}

impl GvdPath {
    pub fn polyline_length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// `x,y` per line with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.waypoints {
            let _ = writeln!(out, "{:.4},{:.4}", p.x, p.y);
        }
        out
    }
}

/// One-to-many path costs; `None` marks an unreachable target.
pub trait PathCoster {
    fn costs(&self, from: Point, targets: &[Point]) -> Vec<Option<f64>>;

    fn cost(&self, from: Point, to: Point) -> Option<f64> {
        self.costs(from, &[to])[0]
    }
}

/// Straight-line distance, ignoring obstacles.
#[derive(Debug, Clone, Copy, Default)]
pub struct EuclideanCoster;

impl PathCoster for EuclideanCoster {
    fn costs(&self, from: Point, targets: &[Point]) -> Vec<Option<f64>> {
        targets.iter().map(|t| Some(from.dist(*t))).collect()
    }
}

/// Planner over one built GVD graph; queries reuse the same graph.
#[derive(Debug, Clone, Copy)]
pub struct GvdPlanner<'a> {
    pub graph: &'a GvdGraph,
    pub grid: &'a OccupancyGrid,
    pub attach_cap: f64,
}

impl<'a> GvdPlanner<'a> {
    pub fn new(graph: &'a GvdGraph, grid: &'a OccupancyGrid) -> Self {
        GvdPlanner {
            graph,
            grid,
            attach_cap: DEFAULT_ATTACH_CAP,
        }
    }

    pub fn attach(&self, p: Point) -> Result<Attachment, PathError> {
        attach_to_gvd(p, self.graph, self.grid, self.attach_cap)
    }

    pub fn plan(&self, from: Point, to: Point) -> Result<GvdPath, PathError> {
        let a = self.attach(from)?;
        let b = self.attach(to)?;
        let (vertices, skeleton) = gvd_shortest_path(self.graph, a.vertex, b.vertex)?;
        let mut waypoints = vec![from];
        waypoints.extend(vertices.iter().map(|&v| self.graph.position(v)));
        waypoints.push(to);
        waypoints.dedup();
        Ok(GvdPath {
            waypoints,
            cost: a.connector_cost + skeleton + b.connector_cost,
        })
    }

    pub fn path_cost(&self, from: Point, to: Point) -> Result<f64, PathError> {
        let a = self.attach(from)?;
        let b = self.attach(to)?;
        if self.graph.component(a.vertex) != self.graph.component(b.vertex) {
            return Err(PathError::Disconnected);
        }
        let sp = dijkstra(self.graph, a.vertex);
        Ok(a.connector_cost + sp.dist[b.vertex] + b.connector_cost)
    }
}

impl PathCoster for GvdPlanner<'_> {
    fn costs(&self, from: Point, targets: &[Point]) -> Vec<Option<f64>> {
        let Ok(a) = self.attach(from) else {
            return vec![None; targets.len()];
        };
        let sp = dijkstra(self.graph, a.vertex);
        targets
            .iter()
            .map(|&t| {
                let b = self.attach(t).ok()?;
                sp.reachable(b.vertex)
                    .then(|| a.connector_cost + sp.dist[b.vertex] + b.connector_cost)
            })
            .collect()
    }
}

/// GVD path cost from the robot to a frontier position.
pub fn gvd_path_cost(robot: Point, frontier: Point, graph: &GvdGraph, grid: &OccupancyGrid) -> Result<f64, PathError> {
    GvdPlanner::new(graph, grid).path_cost(robot, frontier)
}
