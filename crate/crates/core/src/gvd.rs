//! GVD construction: an obstacle distance map built by iterated 3x3
//! offset max-pooling, ridge extraction with a Laplacian kernel, and the
//! ridge graph with per-node clearance radii.
//!
//! Distances are kept exactly as `axial + diagonal * sqrt(2)` so the pooled
//! field can be compared bit-for-bit against any other chamfer-(1, sqrt 2)
//! transform.

use std::cmp::Ordering;
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use thiserror::Error;

use crate::grid::{binarize, binarize_closed, BinaryImage, Cell, CellState, OccupancyGrid, Point, NEIGHBORS8};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GvdError {
    #[error("no obstacle reference: the image has no obstacle or unknown cell")]
    NoObstacle,
    #[error("empty image")]
    Empty,
    #[error("distance map is {dmap:?} but grid is {grid:?}")]
    SizeMismatch { dmap: (usize, usize), grid: (usize, usize) },
}

/// The three 3x3 kernels of the mapping model.
pub struct GvdKernels;

impl GvdKernels {
    /// Distance offset added to each window cell before max-pooling.
    pub const OFFSET: [[f64; 3]; 3] = [[-SQRT_2, -1.0, -SQRT_2], [-1.0, 0.0, -1.0], [-SQRT_2, -1.0, -SQRT_2]];
    pub const LAPLACIAN: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]];
    pub const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
}

/// An exact value `axial + diagonal * sqrt(2)`.
///
/// Ordering goes through the `f64` value; for the magnitudes reachable on a
/// grid (|terms| well below 2^20) distinct pairs never collide in `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Chamfer {
    pub axial: i32,
    pub diagonal: i32,
}

impl Chamfer {
    pub const ZERO: Chamfer = Chamfer { axial: 0, diagonal: 0 };
    pub const AXIAL_STEP: Chamfer = Chamfer { axial: 1, diagonal: 0 };
    pub const DIAGONAL_STEP: Chamfer = Chamfer { axial: 0, diagonal: 1 };

    pub fn new(axial: i32, diagonal: i32) -> Self {
        Chamfer { axial, diagonal }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.axial as f64 + self.diagonal as f64 * SQRT_2
    }

    #[inline]
    fn add(self, o: Chamfer) -> Chamfer {
        Chamfer::new(self.axial + o.axial, self.diagonal + o.diagonal)
    }

    #[inline]
    fn sub(self, o: Chamfer) -> Chamfer {
        Chamfer::new(self.axial - o.axial, self.diagonal - o.diagonal)
    }
}

impl PartialOrd for Chamfer {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Chamfer {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value()
            .total_cmp(&other.value())
            .then(self.axial.cmp(&other.axial))
    }
}

/// Offset of the window cell at `(dc, dr)` relative to the centre, as the
/// exact negation of the corresponding entry of [`GvdKernels::OFFSET`].
#[inline]
fn offset_of(dc: i64, dr: i64) -> Chamfer {
    match (dc != 0, dr != 0) {
        (false, false) => Chamfer::ZERO,
        (true, true) => Chamfer::new(0, -1),
        _ => Chamfer::new(-1, 0),
    }
}

/// Number of pooling layers: `ceil(L_max / 2)` with `L_max` in cells.
pub fn pooling_iterations(binary: &BinaryImage) -> usize {
    binary.width.max(binary.height).div_ceil(2).max(1)
}

/// The internal pooled field `D`; obstacle cells start at the sentinel `K`,
/// free cells at zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolField {
    pub width: usize,
    pub height: usize,
    pub sentinel: i32,
    pub values: Vec<Chamfer>,
}

impl PoolField {
    /// Sentinel `K = 2 * L_max` exceeds every in-map chamfer distance
    /// (at most `sqrt(2) * L_max`), so `K - d` always beats the free-cell seed.
    pub fn sentinel_for(binary: &BinaryImage) -> i32 {
        2 * binary.width.max(binary.height) as i32
    }

    pub fn init(binary: &BinaryImage) -> Self {
        Self::with_sentinel(binary, Self::sentinel_for(binary))
    }

    pub fn with_sentinel(binary: &BinaryImage, sentinel: i32) -> Self {
        PoolField {
            width: binary.width,
            height: binary.height,
            sentinel,
            values: binary
                .bits
                .iter()
                .map(|&b| if b { Chamfer::new(sentinel, 0) } else { Chamfer::ZERO })
                .collect(),
        }
    }

    pub fn get(&self, col: usize, row: usize) -> Chamfer {
        self.values[row * self.width + col]
    }

    #[inline]
    fn pooled_at(&self, col: usize, row: usize) -> Chamfer {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut best = self.values[row * self.width + col];
        for dr in -1..=1i64 {
            let r = row as i64 + dr;
            if r < 0 || r >= h {
                continue;
            }
            for dc in -1..=1i64 {
                let c = col as i64 + dc;
                if c < 0 || c >= w || (dc == 0 && dr == 0) {
                    continue;
                }
                let v = self.values[(r * w + c) as usize].add(offset_of(dc, dr));
                if v > best {
                    best = v;
                }
            }
        }
        best
    }
}

/// One 3x3 stride-1 pass: `D'(p) = max_q D(q) + B(q - p)`, out-of-bounds
/// window cells excluded.
pub fn distance_offset_pool(field: &PoolField) -> PoolField {
    let mut out = field.clone();
    for row in 0..field.height {
        for col in 0..field.width {
            out.values[row * field.width + col] = field.pooled_at(col, row);
        }
    }
    out
}

/// Per-cell clearance to the nearest obstacle-or-unknown cell, in chamfer
/// steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    pub width: usize,
    pub height: usize,
    pub sentinel: i32,
    exact: Vec<Chamfer>,
    clearance: Vec<f64>,
    /// Pooling passes that changed at least one value.
    pub passes: usize,
}

impl DistanceMap {
    #[inline]
    pub fn clearance(&self, col: usize, row: usize) -> f64 {
        self.clearance[row * self.width + col]
    }

    pub fn clearance_values(&self) -> &[f64] {
        &self.clearance
    }

    pub fn exact(&self, col: usize, row: usize) -> Chamfer {
        self.exact[row * self.width + col]
    }

    pub fn exact_values(&self) -> &[Chamfer] {
        &self.exact
    }

    pub fn max_clearance(&self) -> f64 {
        self.clearance.iter().copied().fold(0.0, f64::max)
    }
}

/// Clearance of a converged (or partially converged) pooled field.
pub fn clearance_from_field(field: &PoolField, binary: &BinaryImage, passes: usize) -> DistanceMap {
    let k = Chamfer::new(field.sentinel, 0);
    let exact: Vec<Chamfer> = field
        .values
        .iter()
        .zip(&binary.bits)
        .map(|(&d, &obstacle)| {
            let c = k.sub(d);
            if obstacle || c < Chamfer::ZERO {
                Chamfer::ZERO
            } else {
                c
            }
        })
        .collect();
    DistanceMap {
        width: field.width,
        height: field.height,
        sentinel: field.sentinel,
        clearance: exact.iter().map(|c| c.value()).collect(),
        exact,
        passes,
    }
}

/// Builds the distance map by pooling until a pass changes nothing.
///
/// Each pass is evaluated Jacobi-style exactly like [`distance_offset_pool`];
/// only cells whose window changed in the previous pass are recomputed. For
/// maps whose farthest cell lies within `pooling_iterations` chamfer steps of
/// an obstacle this stops within that bound; otherwise pooling continues to
/// the fixpoint so the result is always the exact chamfer transform.
pub fn build_distance_map(binary: &BinaryImage) -> Result<DistanceMap, GvdError> {
    if binary.width == 0 || binary.height == 0 {
        return Err(GvdError::Empty);
    }
    if !binary.bits.iter().any(|&b| b) {
        return Err(GvdError::NoObstacle);
    }
    let (w, h) = (binary.width, binary.height);
    let mut field = PoolField::init(binary);
    let mut stamp = vec![0u32; w * h];
    let mut candidates: Vec<usize> = (0..w * h).collect();
    let mut updates: Vec<(usize, Chamfer)> = Vec::new();
    let mut passes = 0usize;
    let mut epoch = 0u32;
    loop {
        updates.clear();
        for &i in &candidates {
            let v = field.pooled_at(i % w, i / w);
            if v != field.values[i] {
                updates.push((i, v));
            }
        }
        if updates.is_empty() {
            break;
        }
        passes += 1;
        epoch += 1;
        candidates.clear();
        for &(i, v) in &updates {
            field.values[i] = v;
            let (c, r) = ((i % w) as i64, (i / w) as i64);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nc, nr) = (c + dc, r + dr);
                    if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                        continue;
                    }
                    let j = nr as usize * w + nc as usize;
                    if stamp[j] != epoch {
                        stamp[j] = epoch;
                        candidates.push(j);
                    }
                }
            }
        }
        candidates.sort_unstable();
    }
    Ok(clearance_from_field(&field, binary, passes))
}

/// Laplacian response of the clearance field, zero-padded at the border;
/// obstacle cells (zero clearance) respond 0.
pub fn laplacian_response(dmap: &DistanceMap) -> Vec<f64> {
    let (w, h) = (dmap.width, dmap.height);
    let at = |c: i64, r: i64| -> f64 {
        if c < 0 || r < 0 || c >= w as i64 || r >= h as i64 {
            0.0
        } else {
            dmap.clearance[r as usize * w + c as usize]
        }
    };
    let mut out = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            let center = dmap.clearance[row * w + col];
            if center == 0.0 {
                continue;
            }
            let (c, r) = (col as i64, row as i64);
            let mut acc = 0.0;
            for (kr, krow) in GvdKernels::LAPLACIAN.iter().enumerate() {
                for (kc, &k) in krow.iter().enumerate() {
                    if k != 0.0 {
                        acc += k * at(c + kc as i64 - 1, r + kr as i64 - 1);
                    }
                }
            }
            out[row * w + col] = acc;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GvdNode {
    pub cell: Cell,
    /// Clearance in meters.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GvdParams {
    /// Cells with Laplacian response at or below this are ridge cells.
    pub ridge_threshold: f64,
    /// Minimum node clearance in meters.
    pub min_clearance: f64,
    /// Treat the map border as obstacle during binarization.
    pub closed_world: bool,
    /// Reconnect ridge pieces through free cells of at least
    /// `min_clearance` (see [`bridge_gaps`]).
    pub bridge_gaps: bool,
}

impl Default for GvdParams {
    fn default() -> Self {
        GvdParams {
            ridge_threshold: -1.0,
            min_clearance: 1.5 * 0.18,
            closed_world: true,
            bridge_gaps: true,
        }
    }
}

/// Undirected ridge graph over 8-adjacent node cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GvdGraph {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Point,
    nodes: Vec<GvdNode>,
    lookup: Vec<u32>,
    adjacency: Vec<Vec<(usize, f64)>>,
    components: Vec<usize>,
    component_count: usize,
}

const NO_NODE: u32 = u32::MAX;

impl GvdGraph {
    /// Builds the graph from a node list (any order; duplicates ignored).
    pub fn from_nodes(grid: &OccupancyGrid, mut nodes: Vec<GvdNode>) -> Self {
        nodes.sort_by_key(|n| n.cell);
        nodes.dedup_by(|a, b| a.cell == b.cell);
        let (w, h, res) = (grid.width(), grid.height(), grid.resolution());
        let mut lookup = vec![NO_NODE; w * h];
        for (i, n) in nodes.iter().enumerate() {
            lookup[n.cell.row * w + n.cell.col] = i as u32;
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            for nb in grid.neighbors8(n.cell) {
                let j = lookup[nb.row * w + nb.col];
                if j != NO_NODE {
                    let diagonal = nb.col != n.cell.col && nb.row != n.cell.row;
                    let weight = if diagonal { SQRT_2 * res } else { res };
                    adjacency[i].push((j as usize, weight));
                }
            }
        }
        let mut components = vec![usize::MAX; nodes.len()];
        let mut component_count = 0;
        let mut stack = Vec::new();
        for start in 0..nodes.len() {
            if components[start] != usize::MAX {
                continue;
            }
            components[start] = component_count;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in &adjacency[u] {
                    if components[v] == usize::MAX {
                        components[v] = component_count;
                        stack.push(v);
                    }
                }
            }
            component_count += 1;
        }
        GvdGraph {
            width: w,
            height: h,
            resolution: res,
            origin: grid.origin(),
            nodes,
            lookup,
            adjacency,
            components,
            component_count,
        }
    }

    pub fn nodes(&self) -> &[GvdNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &GvdNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn component(&self, i: usize) -> usize {
        self.components[i]
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn node_at(&self, cell: Cell) -> Option<usize> {
        if cell.col >= self.width || cell.row >= self.height {
            return None;
        }
        let j = self.lookup[cell.row * self.width + cell.col];
        (j != NO_NODE).then_some(j as usize)
    }

    pub fn position(&self, i: usize) -> Point {
        let c = self.nodes[i].cell;
        Point::new(
            self.origin.x + (c.col as f64 + 0.5) * self.resolution,
            self.origin.y + (c.row as f64 + 0.5) * self.resolution,
        )
    }

    /// Edges as `(a, b, weight)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, adj)| adj.iter().filter(move |(b, _)| a < *b).map(move |&(b, w)| (a, b, w)))
    }

    /// Edge list text: `(col,row,radius_m) -- (col,row,radius_m) weight_m`.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for (a, b, w) in self.edges() {
            let (na, nb) = (&self.nodes[a], &self.nodes[b]);
            let _ = writeln!(
                out,
                "({},{},{:.4}) -- ({},{},{:.4}) {:.4}",
                na.cell.col, na.cell.row, na.radius, nb.cell.col, nb.cell.row, nb.radius, w
            );
        }
        out
    }
}

/// Ridge cells of the clearance field, assembled into a graph.
pub fn extract_gvd(dmap: &DistanceMap, grid: &OccupancyGrid, params: &GvdParams) -> Result<GvdGraph, GvdError> {
    if (dmap.width, dmap.height) != (grid.width(), grid.height()) {
        return Err(GvdError::SizeMismatch {
            dmap: (dmap.width, dmap.height),
            grid: (grid.width(), grid.height()),
        });
    }
    let response = laplacian_response(dmap);
    let res = grid.resolution();
    let nodes = grid
        .cells()
        .iter()
        .enumerate()
        .filter_map(|(i, &state)| {
            let clearance = dmap.clearance[i];
            let radius = clearance * res;
            (state == CellState::Free
                && clearance > 0.0
                && response[i] <= params.ridge_threshold
                && radius >= params.min_clearance)
                .then(|| GvdNode {
                    cell: grid.cell_at(i),
                    radius,
                })
        })
        .collect();
    Ok(GvdGraph::from_nodes(grid, nodes))
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    index: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Largest detour, relative to a bridge through free space, that
/// [`bridge_gaps`] tolerates between two ridge cells.
pub const BRIDGE_STRETCH: f64 = 1.5;

/// Adds bridges where free space connects ridge cells much more directly
/// than the ridge graph does.
///
/// The ridge test misses stretches of the diagram where the two nearest
/// obstacles lie in almost the same direction (the response is then close
/// to zero), which splits the skeleton at doorways and bends. All nodes
/// grow together over free cells whose clearance is at least
/// `min_clearance`; where the growth regions of two nodes meet, the cheapest
/// meeting of that node pair is a bridge candidate of length `L`.
/// Candidates are taken shortest first and accepted when the graph, with
/// the bridges accepted so far, has no path between the two nodes of length
/// at most `stretch * L`. The cells of accepted bridges become nodes with
/// their own clearance as radius.
pub fn bridge_gaps(
    graph: &GvdGraph,
    dmap: &DistanceMap,
    grid: &OccupancyGrid,
    min_clearance: f64,
    stretch: f64,
) -> GvdGraph {
    if graph.is_empty() {
        return graph.clone();
    }
    let (w, h, res) = (grid.width(), grid.height(), grid.resolution());
    let passable =
        |i: usize| grid.cells()[i] == CellState::Free && dmap.clearance[i] > 0.0 && dmap.clearance[i] * res >= min_clearance;
    let n = w * h;
    let step = |idx: usize| {
        let (c, r) = ((idx % w) as i64, (idx / w) as i64);
        NEIGHBORS8.iter().filter_map(move |&(dc, dr)| {
            let (cc, rr) = (c + dc, r + dr);
            (cc >= 0 && rr >= 0 && (cc as usize) < w && (rr as usize) < h)
                .then(|| (rr as usize * w + cc as usize, if dc != 0 && dr != 0 { SQRT_2 } else { 1.0 }))
        })
    };

    // growth regions, distances in cell steps
    let mut dist = vec![f64::INFINITY; n];
    let mut source = vec![u32::MAX; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = std::collections::BinaryHeap::new();
    for node in graph.nodes() {
        let idx = node.cell.row * w + node.cell.col;
        dist[idx] = 0.0;
        source[idx] = idx as u32;
        heap.push(HeapEntry { dist: 0.0, index: idx });
    }
    while let Some(HeapEntry { dist: d, index: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for (v, wt) in step(u) {
            if !passable(v) {
                continue;
            }
            let nd = d + wt;
            if nd < dist[v] {
                dist[v] = nd;
                source[v] = source[u];
                pred[v] = u;
                heap.push(HeapEntry { dist: nd, index: v });
            }
        }
    }

    let mut best: std::collections::HashMap<(u32, u32), (f64, usize, usize)> = std::collections::HashMap::new();
    for u in 0..n {
        if source[u] == u32::MAX {
            continue;
        }
        for (v, wt) in step(u) {
            if v <= u || source[v] == u32::MAX || source[v] == source[u] {
                continue;
            }
            let len = dist[u] + wt + dist[v];
            let key = (source[u].min(source[v]), source[u].max(source[v]));
            let cand = (len, u, v);
            best.entry(key)
                .and_modify(|e| {
                    if (cand.0, cand.1, cand.2) < (e.0, e.1, e.2) {
                        *e = cand;
                    }
                })
                .or_insert(cand);
        }
    }
    let mut candidates: Vec<(f64, usize, usize)> = best.into_values().collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    // working graph over cell indices, step weights
    let mut is_node = vec![false; n];
    for node in graph.nodes() {
        is_node[node.cell.row * w + node.cell.col] = true;
    }
    let mut nodes = graph.nodes().to_vec();
    let mut gdist = vec![f64::INFINITY; n];
    let mut touched: Vec<usize> = Vec::new();
    for (len, u, v) in candidates {
        let (a, b) = (source[u] as usize, source[v] as usize);
        let limit = stretch * len;
        // bounded Dijkstra a -> b over the current graph
        let mut found = false;
        gdist[a] = 0.0;
        touched.push(a);
        heap.push(HeapEntry { dist: 0.0, index: a });
        while let Some(HeapEntry { dist: d, index: x }) = heap.pop() {
            if d > gdist[x] {
                continue;
            }
            if x == b {
                found = true;
                break;
            }
            for (y, wt) in step(x) {
                let nd = d + wt;
                if is_node[y] && nd <= limit && nd < gdist[y] {
                    if gdist[y].is_infinite() {
                        touched.push(y);
                    }
                    gdist[y] = nd;
                    heap.push(HeapEntry { dist: nd, index: y });
                }
            }
        }
        heap.clear();
        for &t in &touched {
            gdist[t] = f64::INFINITY;
        }
        touched.clear();
        if found {
            continue;
        }
        for mut cell in [u, v] {
            while !is_node[cell] {
                is_node[cell] = true;
                nodes.push(GvdNode {
                    cell: grid.cell_at(cell),
                    radius: dmap.clearance[cell] * res,
                });
                cell = pred[cell];
            }
        }
    }
    GvdGraph::from_nodes(grid, nodes)
}

/// A built GVD: distance map plus ridge graph.
#[derive(Debug, Clone)]
pub struct Gvd {
    pub binary: BinaryImage,
    pub distance: DistanceMap,
    pub graph: GvdGraph,
}

/// Full pipeline: binarize, pool, extract.
pub fn build_gvd(grid: &OccupancyGrid, params: &GvdParams) -> Result<Gvd, GvdError> {
    let binary = if params.closed_world {
        binarize_closed(grid)
    } else {
        binarize(grid)
    };
    let distance = build_distance_map(&binary)?;
    let mut graph = extract_gvd(&distance, grid, params)?;
    if params.bridge_gaps {
        graph = bridge_gaps(&graph, &distance, grid, params.min_clearance, BRIDGE_STRETCH);
    }
    Ok(Gvd {
        binary,
        distance,
        graph,
    })
}

/// Clearance as a binary PGM, linearly scaled so the maximum maps to 255.
pub fn clearance_pgm(dmap: &DistanceMap) -> Vec<u8> {
    let max = dmap.max_clearance();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let mut out = format!("P5\n{} {}\n255\n", dmap.width, dmap.height).into_bytes();
    out.extend(dmap.clearance.iter().map(|&c| (c * scale).round().clamp(0.0, 255.0) as u8));
    out
}

/// Ridge mask as a binary PGM: 255 on graph nodes, 0 elsewhere.
pub fn ridge_pgm(graph: &GvdGraph) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", graph.width, graph.height).into_bytes();
    out.extend(graph.lookup.iter().map(|&j| if j == NO_NODE { 0u8 } else { 255 }));
    out
}
