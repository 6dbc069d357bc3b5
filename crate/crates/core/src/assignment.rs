//! Three-tier frontier assignment: cost-based selection for the local
//! tiers, clustering plus an ant-colony TSP ordering for the global tier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::frontiers::{count_unknown_in_disc, Frontier, FrontierLedger};
use crate::grid::{OccupancyGrid, Point};
use crate::gvd_path::PathCoster;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AssignError {
    #[error("no reachable frontier in tier")]
    NoReachable,
    #[error("invalid TSP instance: {0}")]
    InvalidTsp(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// Path length below which information gain is ignored.
    pub lambda: f64,
    pub gamma: f64,
    pub gain_radius: f64,
}

impl CostParams {
    /// Shortest path wins; gain never counts.
    pub fn realtime(gain_radius: f64) -> Self {
        CostParams {
            lambda: f64::INFINITY,
            gamma: 2.0,
            gain_radius,
        }
    }

    /// Gain always counts, weighted by `gamma`.
    pub fn reserved(gamma: f64, gain_radius: f64) -> Self {
        CostParams {
            lambda: 0.0,
            gamma,
            gain_radius,
        }
    }
}

/// Unknown cells within `gain_radius` of the frontier.
pub fn info_gain(grid: &OccupancyGrid, f: &Frontier, gain_radius: f64) -> usize {
    count_unknown_in_disc(grid, f.cell, gain_radius)
}

/// `C = G - t * I` with `t = 0` below `lambda`, `gamma` otherwise.
pub fn frontier_cost(g: f64, i: usize, p: &CostParams) -> f64 {
    let t = if g < p.lambda { 0.0 } else { p.gamma };
    g - t * i as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub frontier: Frontier,
    pub path_cost: f64,
    pub cost: f64,
}

/// Argmin of the frontier cost; unreachable frontiers are skipped and equal
/// costs go to the smallest cell.
pub fn select_min_cost(
    set: &[Frontier],
    robot: Point,
    grid: &OccupancyGrid,
    p: &CostParams,
    coster: &dyn PathCoster,
) -> Result<Selection, AssignError> {
    let targets: Vec<Point> = set.iter().map(|f| f.position).collect();
    let paths = coster.costs(robot, &targets);
    let mut best: Option<Selection> = None;
    for (index, (f, g)) in set.iter().zip(paths).enumerate() {
        let Some(g) = g else { continue };
        let cost = frontier_cost(g, info_gain(grid, f, p.gain_radius), p);
        let better = match &best {
            None => true,
            Some(b) => cost < b.cost || (cost == b.cost && f.cell < b.frontier.cell),
        };
        if better {
            best = Some(Selection {
                index,
                frontier: f.clone(),
                path_cost: g,
                cost,
            });
        }
    }
    best.ok_or(AssignError::NoReachable)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Indices into the clustered set, ascending.
    pub members: Vec<usize>,
    pub representative: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Single-linkage clustering under path distance: two frontiers share a
/// cluster when a chain of hops, each at most `d_c`, connects them.
/// Clusters come out ordered by their smallest member.
pub fn cluster_global(set: &[Frontier], d_c: f64, coster: &dyn PathCoster) -> Vec<Cluster> {
    let n = set.len();
    let points: Vec<Point> = set.iter().map(|f| f.position).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let row = coster.costs(points[i], &points[i + 1..]);
        for (off, d) in row.into_iter().enumerate() {
            if matches!(d, Some(d) if d <= d_c) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, i + 1 + off));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = clusters.len();
            clusters.push(Cluster {
                members: Vec::new(),
                representative: i,
            });
        }
        clusters[slot[root]].members.push(i);
    }
    for c in &mut clusters {
        c.representative = *c
            .members
            .iter()
            .max_by(|&&a, &&b| {
                let (fa, fb) = (&set[a], &set[b]);
                fa.unknown_count
                    .cmp(&fb.unknown_count)
                    .then(fa.radius.total_cmp(&fb.radius))
                    .then(fb.cell.cmp(&fa.cell))
            })
            .expect("clusters are non-empty");
    }
    clusters
}

/// Open-tour TSP with a virtual start at index 0. Returning to the start is
/// free, so the optimal closed tour is the optimal open path.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    cost: Vec<Vec<f64>>,
}

impl TspInstance {
    pub fn new(cost: Vec<Vec<f64>>) -> Result<Self, AssignError> {
        let n = cost.len();
        if n < 2 {
            return Err(AssignError::InvalidTsp("need at least one site".into()));
        }
        for (i, row) in cost.iter().enumerate() {
            if row.len() != n {
                return Err(AssignError::InvalidTsp(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(AssignError::InvalidTsp(format!("non-zero diagonal at {i}")));
            }
            if row[0] != 0.0 {
                return Err(AssignError::InvalidTsp(format!("return cost from {i} is not zero")));
            }
            if row.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(AssignError::InvalidTsp(format!("row {i} has a negative or non-finite cost")));
            }
        }
        Ok(TspInstance { cost })
    }

    /// Builds the instance from start-to-site costs and a symmetric
    /// site-to-site matrix.
    pub fn from_parts(start: &[f64], between: &[Vec<f64>]) -> Result<Self, AssignError> {
        let k = start.len();
        let mut cost = vec![vec![0.0; k + 1]; k + 1];
        for i in 0..k {
            cost[0][i + 1] = start[i];
            for j in 0..k {
                cost[i + 1][j + 1] = between.get(i).and_then(|r| r.get(j)).copied().unwrap_or(f64::NAN);
            }
        }
        Self::new(cost)
    }

    /// Number of real sites (excluding the virtual start).
    pub fn sites(&self) -> usize {
        self.cost.len() - 1
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i][j]
    }

    pub fn tour_cost(&self, order: &[usize]) -> f64 {
        order.windows(2).map(|w| self.cost[w[0]][w[1]]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcoParams {
    pub ants: usize,
    pub iterations: usize,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub q: f64,
    pub seed: u64,
}

impl Default for AcoParams {
    fn default() -> Self {
        AcoParams {
            ants: 20,
            iterations: 100,
            alpha: 1.0,
            beta: 2.0,
            rho: 0.5,
            q: 100.0,
            seed: 7,
        }
    }
}

/// Heuristic used for zero-cost edges (coincident sites).
const ZERO_COST_HEURISTIC: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    /// Site indices starting with the virtual start 0.
    pub order: Vec<usize>,
    pub cost: f64,
}

/// Ant System search; returns the best tour any ant built.
pub fn aco_tsp(inst: &TspInstance, p: &AcoParams) -> Tour {
    aco_tsp_with_history(inst, p).0
}

/// As [`aco_tsp`], also returning the best tour cost of each iteration.
pub fn aco_tsp_with_history(inst: &TspInstance, p: &AcoParams) -> (Tour, Vec<f64>) {
    let n = inst.sites() + 1;
    if n == 2 {
        let order = vec![0, 1];
        let cost = inst.tour_cost(&order);
        return (Tour { order, cost }, vec![cost; p.iterations.max(1)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let eta: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = inst.cost(i, j);
                    let h = if c > 0.0 { 1.0 / c } else { ZERO_COST_HEURISTIC };
                    h.powf(p.beta)
                })
                .collect()
        })
        .collect();
    let mut tau = vec![vec![1.0f64; n]; n];
    let mut best: Option<Tour> = None;
    let mut history = Vec::with_capacity(p.iterations);
    let mut weights = vec![0.0f64; n];

    for _ in 0..p.iterations.max(1) {
        let mut tours: Vec<Tour> = Vec::with_capacity(p.ants);
        for _ in 0..p.ants.max(1) {
            let mut visited = vec![false; n];
            visited[0] = true;
            let mut order = Vec::with_capacity(n);
            order.push(0);
            let mut at = 0;
            for _ in 1..n {
                let mut total = 0.0f64;
                for j in 0..n {
                    weights[j] = if visited[j] {
                        0.0
                    } else {
                        tau[at][j].powf(p.alpha) * eta[at][j]
                    };
                    total += weights[j];
                }
                let next = if total > 0.0 && total.is_finite() {
                    let mut pick = rng.gen::<f64>() * total;
                    let mut chosen = None;
                    for (j, &w) in weights.iter().enumerate() {
                        if w > 0.0 {
                            chosen = Some(j);
                            if pick < w {
                                break;
                            }
                            pick -= w;
                        }
                    }
                    chosen
                } else {
                    None
                };
                let next = next.unwrap_or_else(|| (0..n).find(|&j| !visited[j]).expect("unvisited site"));
                visited[next] = true;
                order.push(next);
                at = next;
            }
            let cost = inst.tour_cost(&order);
            tours.push(Tour { order, cost });
        }

        for row in tau.iter_mut() {
            for t in row.iter_mut() {
                *t *= 1.0 - p.rho;
            }
        }
        for t in &tours {
            let deposit = p.q / t.cost.max(1e-9);
            for w in t.order.windows(2) {
                tau[w[0]][w[1]] += deposit;
            }
        }

        let iter_best = tours
            .into_iter()
            .min_by(|a, b| a.cost.total_cmp(&b.cost))
            .expect("at least one ant");
        history.push(iter_best.cost);
        if best.as_ref().is_none_or(|b| iter_best.cost < b.cost) {
            best = Some(iter_best);
        }
    }
    (best.expect("at least one iteration"), history)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    RealtimeLocal,
    ReservedLocal,
    Global,
    Done,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::RealtimeLocal => "realtime_local",
            Tier::ReservedLocal => "reserved_local",
            Tier::Global => "global",
            Tier::Done => "done",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub tier: Tier,
    pub target: Option<Frontier>,
    /// Cluster representatives in visiting order (global tier only).
    pub tour: Option<Vec<Frontier>>,
    pub cost: Option<f64>,
    /// Frontiers remained but none was reachable.
    pub warning: bool,
}

pub const DECISION_CSV_HEADER: &str = "step,tier,target_col,target_row,cost,tour_len";

impl Decision {
    fn done(warning: bool) -> Self {
        Decision {
            tier: Tier::Done,
            target: None,
            tour: None,
            cost: None,
            warning,
        }
    }

    /// `step,tier,target_col,target_row,cost,tour_len`; empty fields when absent.
    pub fn trace_line(&self, step: u64) -> String {
        let (col, row) = self
            .target
            .as_ref()
            .map(|f| (f.cell.col.to_string(), f.cell.row.to_string()))
            .unwrap_or_default();
        let cost = self.cost.map(|c| format!("{c:.4}")).unwrap_or_default();
        let tour = self.tour.as_ref().map(|t| t.len().to_string()).unwrap_or_default();
        format!("{step},{},{col},{row},{cost},{tour}", self.tier.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignParams {
    pub realtime: CostParams,
    pub reserved: CostParams,
    /// Clustering distance for global frontiers, meters.
    pub cluster_distance: f64,
    pub aco: AcoParams,
}

impl Default for AssignParams {
    fn default() -> Self {
        AssignParams {
            realtime: CostParams::realtime(5.0),
            reserved: CostParams::reserved(2.0, 5.0),
            cluster_distance: 4.0,
            aco: AcoParams::default(),
        }
    }
}

/// Penalty standing in for a missing site-to-site path inside a tour.
const UNLINKED_PAIR_COST: f64 = 1e6;

/// Picks the next target in strict tier order. Refreshes every frontier's
/// `gain` and prunes zero-count frontiers from the ledger along the way.
pub fn decide_next(
    ledger: &mut FrontierLedger,
    robot: Point,
    grid: &OccupancyGrid,
    coster: &dyn PathCoster,
    params: &AssignParams,
) -> Decision {
    if ledger.is_empty() {
        return Decision::done(false);
    }
    for set in [&mut ledger.v_current, &mut ledger.v_local, &mut ledger.v_global] {
        for f in set.iter_mut() {
            f.gain = info_gain(grid, f, params.reserved.gain_radius);
        }
    }

    if !ledger.v_current.is_empty() {
        if let Ok(s) = select_min_cost(&ledger.v_current, robot, grid, &params.realtime, coster) {
            return Decision {
                tier: Tier::RealtimeLocal,
                target: Some(s.frontier),
                tour: None,
                cost: Some(s.cost),
                warning: false,
            };
        }
    }

    ledger.prune_zero_gain(grid);
    if !ledger.v_local.is_empty() {
        if let Ok(s) = select_min_cost(&ledger.v_local, robot, grid, &params.reserved, coster) {
            return Decision {
                tier: Tier::ReservedLocal,
                target: Some(s.frontier),
                tour: None,
                cost: Some(s.cost),
                warning: false,
            };
        }
    }

    if !ledger.v_global.is_empty() {
        if let Some(d) = plan_global(&ledger.v_global, robot, coster, params) {
            return d;
        }
    }
    Decision::done(!ledger.is_empty())
}

fn plan_global(set: &[Frontier], robot: Point, coster: &dyn PathCoster, params: &AssignParams) -> Option<Decision> {
    let clusters = cluster_global(set, params.cluster_distance, coster);
    let reps: Vec<&Frontier> = clusters.iter().map(|c| &set[c.representative]).collect();
    let points: Vec<Point> = reps.iter().map(|f| f.position).collect();
    let from_robot = coster.costs(robot, &points);
    let reachable: Vec<usize> = (0..reps.len()).filter(|&i| from_robot[i].is_some()).collect();
    if reachable.is_empty() {
        return None;
    }
    let start: Vec<f64> = reachable.iter().map(|&i| from_robot[i].unwrap_or(0.0)).collect();
    let sites: Vec<Point> = reachable.iter().map(|&i| points[i]).collect();
    let k = sites.len();
    let mut between = vec![vec![0.0; k]; k];
    for i in 0..k {
        let row = coster.costs(sites[i], &sites[i + 1..]);
        for (off, d) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            let d = d.unwrap_or(UNLINKED_PAIR_COST);
            between[i][j] = d;
            between[j][i] = d;
        }
    }
    let inst = TspInstance::from_parts(&start, &between).ok()?;
    let tour = aco_tsp(&inst, &params.aco);
    let ordered: Vec<Frontier> = tour.order[1..].iter().map(|&s| reps[reachable[s - 1]].clone()).collect();
    Some(Decision {
        tier: Tier::Global,
        target: ordered.first().cloned(),
        cost: Some(tour.cost),
        tour: Some(ordered),
        warning: false,
    })
}
