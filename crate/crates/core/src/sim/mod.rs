//! Deterministic 2D exploration simulator: exact raycast lidar, a
//! rotate-then-translate robot, and the sense / extract / decide / move loop.

mod world;

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use crate::assignment::{decide_next, AssignParams, Tier, DECISION_CSV_HEADER};
use crate::frontiers::{count_unknown_in_disc, extract_scoped, ledger_update, Frontier, FrontierLedger, Scope};
use crate::grid::{map_entropy, normalize_angle, Cell, CellState, OccupancyGrid, Point, Pose};
use crate::gvd::{build_gvd, GvdParams};
use crate::gvd_path::{GvdPlanner, PathCoster, DEFAULT_ATTACH_CAP};
use crate::harness::{baseline_select, BaselineKind};

pub use world::{
    flood_fill, generate_world, load_world, max_clearance_start, World, WorldKind, WorldSpec, DEFAULT_RESOLUTION,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub range: f64,
    pub fov: f64,
    pub rays: usize,
}

impl Default for SensorModel {
    fn default() -> Self {
        SensorModel {
            range: 10.0,
            fov: 270f64.to_radians(),
            rays: 541,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotModel {
    pub v_max: f64,
    pub omega_max: f64,
    pub radius: f64,
    pub dt: f64,
}

impl Default for RobotModel {
    fn default() -> Self {
        RobotModel {
            v_max: 0.3,
            omega_max: 2.0,
            radius: 0.18,
            dt: 0.1,
        }
    }
}

fn reveal(known: &mut OccupancyGrid, cell: Cell, state: CellState) -> bool {
    if known.get(cell) == CellState::Unknown {
        known.set(cell, state);
        true
    } else {
        false
    }
}

/// Casts one ray through `truth` with a grid DDA. Traversed cells become
/// Free in `known`, the first obstacle hit becomes Occupied. Returns the
/// number of cells that changed.
pub fn cast_ray(truth: &OccupancyGrid, known: &mut OccupancyGrid, origin: Point, angle: f64, range: f64) -> usize {
    let (gx, gy) = truth.world_to_grid(origin);
    let reach = range / truth.resolution();
    let (dx, dy) = (angle.cos(), angle.sin());
    let (mut col, mut row) = (gx.floor() as i64, gy.floor() as i64);
    let step_c: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_r: i64 = if dy > 0.0 { 1 } else { -1 };
    let axis = |d: f64, pos: f64, cell: i64| -> (f64, f64) {
        if d > 0.0 {
            ((cell as f64 + 1.0 - pos) / d, 1.0 / d)
        } else if d < 0.0 {
            ((pos - cell as f64) / -d, -1.0 / d)
        } else {
            (f64::INFINITY, f64::INFINITY)
        }
    };
    let (mut t_c, delta_c) = axis(dx, gx, col);
    let (mut t_r, delta_r) = axis(dy, gy, row);
    let mut changed = 0;
    while let Some(state) = truth.get_signed(col, row) {
        let cell = Cell::new(col as usize, row as usize);
        if state == CellState::Occupied {
            changed += reveal(known, cell, CellState::Occupied) as usize;
            break;
        }
        changed += reveal(known, cell, CellState::Free) as usize;
        let t = if t_c < t_r {
            let t = t_c;
            t_c += delta_c;
            col += step_c;
            t
        } else {
            let t = t_r;
            t_r += delta_r;
            row += step_r;
            t
        };
        if t > reach {
            break;
        }
    }
    changed
}

/// One full scan from `pose`; returns the number of cells newly known.
pub fn sense(truth: &OccupancyGrid, known: &mut OccupancyGrid, pose: Pose, s: &SensorModel) -> usize {
    let full = s.fov >= 2.0 * PI - 1e-9;
    let n = s.rays.max(1);
    let step = if full {
        s.fov / n as f64
    } else if n > 1 {
        s.fov / (n - 1) as f64
    } else {
        0.0
    };
    let first = if full || n == 1 { pose.heading } else { pose.heading - s.fov / 2.0 };
    (0..n)
        .map(|i| cast_ray(truth, known, pose.position(), first + i as f64 * step, s.range))
        .sum()
}

/// Waypoint follower state for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFollower {
    pub waypoints: Vec<Point>,
    pub next: usize,
    /// Waypoints passed in the middle of a tick, oldest first.
    pub passed: Vec<Point>,
}

impl PathFollower {
    pub fn new(waypoints: Vec<Point>) -> Self {
        PathFollower {
            waypoints,
            next: 0,
            passed: Vec::new(),
        }
    }

    pub fn finished(&self) -> bool {
        self.next >= self.waypoints.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TickStatus {
    Moving,
    Arrived,
    /// The next waypoint, or the cell the robot would enter, is occupied.
    Replan,
    /// The robot would enter a cell that is still unknown; sense and retry.
    Blind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tick {
    pub status: TickStatus,
    pub distance: f64,
    pub elapsed: f64,
}

/// One control tick of rotate-then-translate motion along the path.
/// The robot turns toward the next waypoint at up to `omega_max`, and
/// translates at up to `v_max` only once its heading error is within
/// `align_tol`. Leftover travel carries over to following waypoints that
/// need no turn.
pub fn advance(pose: &mut Pose, path: &mut PathFollower, known: &OccupancyGrid, robot: &RobotModel, align_tol: f64) -> Tick {
    let mut travel = robot.v_max * robot.dt;
    let mut turn = robot.omega_max * robot.dt;
    let mut moved = 0.0;
    let tick = |status, distance| Tick {
        status,
        distance,
        elapsed: robot.dt,
    };
    while let Some(&wp) = path.waypoints.get(path.next) {
        if known.world_to_cell(wp).is_some_and(|c| known.get(c) == CellState::Occupied) {
            return tick(TickStatus::Replan, moved);
        }
        let here = pose.position();
        let d = here.dist(wp);
        if d < 1e-9 {
            path.next += 1;
            continue;
        }
        let err = normalize_angle((wp.y - here.y).atan2(wp.x - here.x) - pose.heading);
        if err.abs() > align_tol {
            if moved == 0.0 {
                let r = err.clamp(-turn, turn);
                *pose = Pose::new(pose.x, pose.y, pose.heading + r);
            }
            return tick(TickStatus::Moving, moved);
        }
        let r = err.clamp(-turn, turn);
        turn -= r.abs();
        let step = if d <= travel + 1e-9 { d } else { travel };
        let f = step / d;
        let target = Point::new(here.x + (wp.x - here.x) * f, here.y + (wp.y - here.y) * f);
        match known.world_to_cell(target).map(|c| known.get(c)) {
            Some(CellState::Free) => {}
            Some(CellState::Unknown) => return tick(TickStatus::Blind, moved),
            _ => return tick(TickStatus::Replan, moved),
        }
        *pose = Pose::new(target.x, target.y, pose.heading + r);
        moved += step;
        travel -= step;
        if step < d {
            break;
        }
        path.next += 1;
        if travel <= 1e-12 {
            break;
        }
        path.passed.push(target);
    }
    if path.finished() {
        tick(TickStatus::Arrived, moved)
    } else {
        tick(TickStatus::Moving, moved)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Gvd,
    Nearest,
    Greedy,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Gvd, Strategy::Nearest, Strategy::Greedy];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Gvd => "gvd",
            Strategy::Nearest => "nearest",
            Strategy::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gvd" => Ok(Strategy::Gvd),
            "nearest" => Ok(Strategy::Nearest),
            "greedy" => Ok(Strategy::Greedy),
            other => Err(format!("unknown strategy `{other}` (gvd, nearest, greedy)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploreConfig {
    pub gvd: GvdParams,
    /// Frontier threshold: a node is a frontier when its disc holds more
    /// than this many unknown cells.
    pub delta: usize,
    /// Side of the local extraction window, meters.
    pub local_window: f64,
    pub assign: AssignParams,
    pub sensor: SensorModel,
    pub robot: RobotModel,
    pub sense_every: u64,
    pub align_tol: f64,
    pub max_steps: u64,
    /// Stop once this fraction of reachable free cells is known.
    pub explored_target: f64,
    /// Fresh frontiers this close (cells) to a visited-but-unresolved target
    /// are ignored.
    pub exhausted_radius: f64,
    pub attach_cap: f64,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            gvd: GvdParams::default(),
            delta: 0,
            local_window: 20.0,
            assign: AssignParams::default(),
            sensor: SensorModel::default(),
            robot: RobotModel::default(),
            sense_every: 5,
            align_tol: 0.2,
            max_steps: 30_000,
            explored_target: 0.995,
            exhausted_radius: 2.0,
            attach_cap: DEFAULT_ATTACH_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// No frontier left.
    Done,
    /// The explored fraction reached the target.
    Explored,
    /// Step cap hit.
    Timeout,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Done => "done",
            Termination::Explored => "explored",
            Termination::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub step: u64,
    pub sim_time: f64,
    pub pose: Pose,
    pub entropy: f64,
    pub path: f64,
    pub tier: &'static str,
    pub counts: (usize, usize, usize),
}

pub const RUN_CSV_HEADER: &str = "step,sim_time_s,x,y,heading,entropy_bits,path_m,tier,n_current,n_local,n_global";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub total_time: f64,
    pub total_path: f64,
    pub explored_fraction: f64,
    pub termination: Termination,
    pub decisions: usize,
    /// Frontiers remained at the end but none was reachable.
    pub warning: bool,
}

/// How often each shared pipeline stage ran. Only `tiered_selections` and
/// `baseline_selections` depend on the strategy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub gvd_builds: usize,
    pub ledger_updates: usize,
    pub tiered_selections: usize,
    pub baseline_selections: usize,
    pub plans: usize,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub world: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub rows: Vec<StepRow>,
    /// `step,tier,target_col,target_row,cost,tour_len` per decision.
    pub decisions: Vec<String>,
    pub summary: RunSummary,
    pub known: OccupancyGrid,
    /// Robot positions at every tick plus waypoints passed mid-tick.
    pub trajectory: Vec<Point>,
    pub stages: StageCounts,
    /// Wall-clock planner time; kept out of every CSV so runs stay
    /// byte-identical.
    pub compute_seconds: f64,
}

impl RunRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 64);
        out.push_str(RUN_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.1},{:.4},{:.4},{:.4},{:.0},{:.4},{},{},{},{}",
                r.step,
                r.sim_time,
                r.pose.x,
                r.pose.y,
                r.pose.heading,
                r.entropy,
                r.path,
                r.tier,
                r.counts.0,
                r.counts.1,
                r.counts.2
            );
        }
        out
    }

    pub fn decisions_csv(&self) -> String {
        let mut out = String::from(DECISION_CSV_HEADER);
        out.push('\n');
        for line in &self.decisions {
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.trajectory {
            let _ = writeln!(out, "{:.4},{:.4}", p.x, p.y);
        }
        out
    }

    pub fn summary_line(&self) -> String {
        let s = &self.summary;
        format!(
            "{},{},{},{:.1},{:.4},{:.4},{},{}",
            self.world,
            self.strategy,
            self.seed,
            s.total_time,
            s.total_path,
            s.explored_fraction,
            s.termination.as_str(),
            s.decisions
        )
    }
}

struct Runner<'a> {
    world: &'a World,
    cfg: &'a ExploreConfig,
    known: OccupancyGrid,
    reachable: Vec<bool>,
    reachable_total: usize,
    pose: Pose,
    step: u64,
    path: f64,
    rows: Vec<StepRow>,
    tier: &'static str,
    counts: (usize, usize, usize),
    trajectory: Vec<Point>,
}

impl Runner<'_> {
    fn trace(&mut self, p: Point) {
        if self.trajectory.last() != Some(&p) {
            self.trajectory.push(p);
        }
    }

    fn sense(&mut self) {
        sense(&self.world.truth, &mut self.known, self.pose, &self.cfg.sensor);
    }

    fn explored_fraction(&self) -> f64 {
        if self.reachable_total == 0 {
            return 1.0;
        }
        let known = self
            .known
            .cells()
            .iter()
            .zip(&self.reachable)
            .filter(|(c, &r)| r && **c == CellState::Free)
            .count();
        known as f64 / self.reachable_total as f64
    }

    fn record(&mut self) {
        self.rows.push(StepRow {
            step: self.step,
            sim_time: self.step as f64 * self.cfg.robot.dt,
            pose: self.pose,
            entropy: map_entropy(&self.known),
            path: self.path,
            tier: self.tier,
            counts: self.counts,
        });
    }

    /// Advances the clock one tick, sensing on schedule.
    fn finish_tick(&mut self, distance: f64) -> bool {
        self.step += 1;
        self.path += distance;
        let sensed = self.step.is_multiple_of(self.cfg.sense_every.max(1));
        if sensed {
            self.sense();
        }
        self.record();
        sensed
    }

    /// Turns once in place, sensing on schedule, so the first decision sees
    /// all around the start.
    fn initial_spin(&mut self) {
        self.sense();
        self.record();
        let per_tick = self.cfg.robot.omega_max * self.cfg.robot.dt;
        let ticks = (2.0 * PI / per_tick).ceil() as u64;
        for _ in 0..ticks {
            if self.step >= self.cfg.max_steps {
                return;
            }
            self.pose = Pose::new(self.pose.x, self.pose.y, self.pose.heading + per_tick);
            self.finish_tick(0.0);
        }
        self.sense();
    }
}

fn near_exhausted(exhausted: &[Cell], cell: Cell, radius: f64) -> bool {
    exhausted.iter().any(|e| e.dist(cell) <= radius)
}

/// Runs one exploration to completion, timeout, or exhaustion of frontiers.
pub fn run_exploration(world: &World, strategy: Strategy, cfg: &ExploreConfig, seed: u64) -> RunRecord {
    let reachable = world.reachable_mask();
    let reachable_total = reachable.iter().filter(|&&r| r).count();
    let mut run = Runner {
        world,
        cfg,
        known: OccupancyGrid::new(
            world.truth.width(),
            world.truth.height(),
            world.truth.resolution(),
            world.truth.origin(),
            vec![CellState::Unknown; world.truth.len()],
        )
        .expect("same shape as the truth map"),
        reachable,
        reachable_total,
        pose: world.start,
        step: 0,
        path: 0.0,
        rows: Vec::new(),
        tier: "init",
        counts: (0, 0, 0),
        trajectory: vec![world.start.position()],
    };
    run.initial_spin();

    let mut ledger = FrontierLedger::default();
    let mut exhausted: Vec<Cell> = Vec::new();
    let mut decisions = Vec::new();
    let mut warning = false;
    let mut compute = 0.0;
    let mut stages = StageCounts::default();

    let termination = 'outer: loop {
        if run.explored_fraction() >= cfg.explored_target {
            break Termination::Explored;
        }
        if run.step >= cfg.max_steps {
            break Termination::Timeout;
        }

        let t0 = Instant::now();
        let Ok(gvd) = build_gvd(&run.known, &cfg.gvd) else {
            break Termination::Done;
        };
        stages.gvd_builds += 1;
        let keep = |f: &Frontier| !near_exhausted(&exhausted, f.cell, cfg.exhausted_radius);
        let scope = Scope::Local {
            center: run.pose,
            side: cfg.local_window,
        };
        let local: Vec<Frontier> = extract_scoped(&run.known, &gvd.graph, scope, cfg.delta, run.step)
            .unwrap_or_default()
            .into_iter()
            .filter(keep)
            .collect();
        let global: Vec<Frontier> = extract_scoped(&run.known, &gvd.graph, Scope::Global, cfg.delta, run.step)
            .unwrap_or_default()
            .into_iter()
            .filter(keep)
            .collect();
        ledger = ledger_update(ledger, local, global, &run.known, run.step);
        stages.ledger_updates += 1;

        let mut planner = GvdPlanner::new(&gvd.graph, &run.known);
        planner.attach_cap = cfg.attach_cap;
        let mut assign = cfg.assign;
        assign.aco.seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ run.step;
        let (tier, target, trace) = match strategy {
            Strategy::Gvd => {
                stages.tiered_selections += 1;
                let d = decide_next(&mut ledger, run.pose.position(), &run.known, &planner, &assign);
                warning = d.warning;
                let trace = d.trace_line(run.step);
                (d.tier, d.target, trace)
            }
            Strategy::Nearest | Strategy::Greedy => {
                stages.baseline_selections += 1;
                ledger.prune_zero_gain(&run.known);
                let kind = if strategy == Strategy::Nearest {
                    BaselineKind::Nearest
                } else {
                    BaselineKind::Greedy
                };
                // same reachability filter as the gvd tiers: only the rule differs
                let all: Vec<Frontier> = ledger.iter().cloned().collect();
                let points: Vec<Point> = all.iter().map(|f| f.position).collect();
                let reachable: Vec<Frontier> = all
                    .into_iter()
                    .zip(planner.costs(run.pose.position(), &points))
                    .filter_map(|(f, c)| c.map(|_| f))
                    .collect();
                let pick = baseline_select(&reachable, run.pose.position(), &run.known, kind, assign.reserved.gain_radius);
                let tier = if pick.is_some() { Tier::Global } else { Tier::Done };
                let trace = match &pick {
                    Some(f) => format!("{},{},{},{},,", run.step, strategy.as_str(), f.cell.col, f.cell.row),
                    None => format!("{},done,,,,", run.step),
                };
                (tier, pick, trace)
            }
        };
        decisions.push(trace);
        run.counts = ledger.counts();
        let Some(target) = target else {
            compute += t0.elapsed().as_secs_f64();
            break Termination::Done;
        };
        run.tier = match strategy {
            Strategy::Gvd => tier.as_str(),
            other => other.as_str(),
        };
        let locked = strategy == Strategy::Gvd && tier == Tier::Global;

        let plan = planner.plan(run.pose.position(), target.position);
        stages.plans += 1;
        compute += t0.elapsed().as_secs_f64();
        let Ok(plan) = plan else {
            exhausted.push(target.cell);
            ledger.remove_cell(target.cell);
            continue;
        };

        let mut follower = PathFollower::new(plan.waypoints);
        loop {
            if run.step >= cfg.max_steps {
                break 'outer Termination::Timeout;
            }
            let mut tick = advance(&mut run.pose, &mut follower, &run.known, &cfg.robot, cfg.align_tol);
            if tick.status == TickStatus::Blind {
                run.sense();
                let extra = advance(&mut run.pose, &mut follower, &run.known, &cfg.robot, cfg.align_tol);
                tick = Tick {
                    distance: tick.distance + extra.distance,
                    ..extra
                };
            }
            for p in std::mem::take(&mut follower.passed) {
                run.trace(p);
            }
            run.trace(run.pose.position());
            let sensed = run.finish_tick(tick.distance);
            match tick.status {
                TickStatus::Arrived => {
                    run.sense();
                    if count_unknown_in_disc(&run.known, target.cell, target.radius) > 0 {
                        exhausted.push(target.cell);
                    }
                    ledger.remove_cell(target.cell);
                    break;
                }
                TickStatus::Replan => break,
                TickStatus::Blind => {
                    // still blind after sensing: the cell is not observable from here
                    break;
                }
                TickStatus::Moving => {}
            }
            if sensed {
                if run.explored_fraction() >= cfg.explored_target {
                    break 'outer Termination::Explored;
                }
                if !locked && count_unknown_in_disc(&run.known, target.cell, target.radius) == 0 {
                    break;
                }
            }
        }
    };

    let explored_fraction = run.explored_fraction();
    let summary = RunSummary {
        steps: run.step,
        total_time: run.step as f64 * cfg.robot.dt,
        total_path: run.path,
        explored_fraction,
        termination,
        decisions: decisions.len(),
        warning: warning && termination == Termination::Done,
    };
    RunRecord {
        world: world.name.clone(),
        strategy,
        seed,
        rows: run.rows,
        decisions,
        summary,
        known: run.known,
        trajectory: run.trajectory,
        stages,
        compute_seconds: compute,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::parse_ascii;

    fn map(rows: &[&str]) -> OccupancyGrid {
        parse_ascii(&rows.join("\n")).unwrap().0
    }

    fn unknown_like(g: &OccupancyGrid) -> OccupancyGrid {
        OccupancyGrid::new(g.width(), g.height(), g.resolution(), g.origin(), vec![CellState::Unknown; g.len()]).unwrap()
    }

    fn full_circle() -> SensorModel {
        SensorModel {
            fov: 2.0 * PI,
            ..SensorModel::default()
        }
    }

    #[test]
    fn sealed_room_scan() {
        let truth = map(&["#######", "#######", "##...##", "##...##", "##...##", "#######", "#######"]);
        let mut known = unknown_like(&truth);
        let pose = Pose::new(truth.cell_center(Cell::new(3, 3)).x, truth.cell_center(Cell::new(3, 3)).y, 0.0);
        sense(&truth, &mut known, pose, &full_circle());
        for c in truth.neighbors8(Cell::new(3, 3)) {
            assert_eq!(known.get(c), CellState::Free);
        }
        // the wall ring is seen except its corners, which hide behind the
        // edge cells; the outer ring stays unknown
        assert_eq!(known.count(CellState::Free), 9);
        assert_eq!(known.count(CellState::Occupied), 12);
        assert_eq!(known.get(Cell::new(1, 1)), CellState::Unknown);
        assert_eq!(known.count(CellState::Unknown), 49 - 21);
        // a second scan changes nothing
        let before = known.clone();
        assert_eq!(sense(&truth, &mut known, pose, &full_circle()), 0);
        assert_eq!(known, before);
    }

    #[test]
    fn walls_occlude() {
        let truth = map(&["#########", "#...#...#", "#...#...#", "#...#...#", "#########"]);
        let mut known = unknown_like(&truth);
        let p = truth.cell_center(Cell::new(2, 2));
        sense(&truth, &mut known, Pose::new(p.x, p.y, 0.0), &full_circle());
        for r in 1..4 {
            for c in 5..8 {
                assert_eq!(known.get(Cell::new(c, r)), CellState::Unknown);
            }
        }
        // soundness: every known cell agrees with the truth
        for i in 0..known.len() {
            let c = known.cell_at(i);
            if known.get(c).is_known() {
                assert_eq!(known.get(c), truth.get(c));
            }
        }
    }

    #[test]
    fn range_limits_the_scan() {
        let truth = OccupancyGrid::filled(200, 3, 0.1, CellState::Free);
        let mut known = unknown_like(&truth);
        let p = truth.cell_center(Cell::new(0, 1));
        sense(
            &truth,
            &mut known,
            Pose::new(p.x, p.y, 0.0),
            &SensorModel {
                range: 10.0,
                fov: 0.0,
                rays: 1,
            },
        );
        assert_eq!(known.get(Cell::new(100, 1)), CellState::Free);
        assert_eq!(known.get(Cell::new(101, 1)), CellState::Unknown);
    }

    fn open_known(n: usize) -> OccupancyGrid {
        OccupancyGrid::filled(n, n, 0.1, CellState::Free)
    }

    #[test]
    fn aligned_waypoint_reached_in_one_tick() {
        let known = open_known(50);
        let robot = RobotModel {
            dt: 1.0,
            ..RobotModel::default()
        };
        let mut pose = Pose::new(1.0, 1.0, 0.0);
        let mut path = PathFollower::new(vec![Point::new(1.3, 1.0)]);
        let t = advance(&mut pose, &mut path, &known, &robot, 0.2);
        assert_eq!(t.status, TickStatus::Arrived);
        assert!((t.distance - 0.3).abs() < 1e-12);
        assert!((pose.x - 1.3).abs() < 1e-12);
    }

    #[test]
    fn waypoint_behind_rotates_only() {
        let known = open_known(50);
        let robot = RobotModel {
            dt: 1.0,
            ..RobotModel::default()
        };
        let mut pose = Pose::new(1.0, 1.0, 0.0);
        let mut path = PathFollower::new(vec![Point::new(0.5, 1.0)]);
        let t = advance(&mut pose, &mut path, &known, &robot, 0.2);
        assert_eq!(t.status, TickStatus::Moving);
        assert_eq!(t.distance, 0.0);
        assert!((pose.heading.abs() - 2.0).abs() < 1e-12);
        assert_eq!(pose.position(), Point::new(1.0, 1.0));
    }

    #[test]
    fn straight_path_distance_matches_polyline() {
        let known = open_known(60);
        let robot = RobotModel::default();
        let wps: Vec<Point> = (1..=10).map(|i| Point::new(0.5 + 0.37 * i as f64, 0.5)).collect();
        let length = wps[0].dist(Point::new(0.5, 0.5)) + wps.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>();
        let mut pose = Pose::new(0.5, 0.5, 0.0);
        let mut path = PathFollower::new(wps);
        let mut total = 0.0;
        let mut ticks = 0;
        while !path.finished() {
            let t = advance(&mut pose, &mut path, &known, &robot, 0.2);
            total += t.distance;
            ticks += 1;
            assert!(ticks < 10_000);
        }
        assert!((total - length).abs() <= robot.v_max * robot.dt + 1e-9);
        assert!((total - length).abs() < 1e-9);
    }

    #[test]
    fn blocked_waypoint_requests_replan() {
        let mut known = open_known(20);
        known.set(Cell::new(10, 5), CellState::Occupied);
        let mut pose = Pose::new(0.55, 0.55, 0.0);
        let mut path = PathFollower::new(vec![known.cell_center(Cell::new(10, 5))]);
        let t = advance(&mut pose, &mut path, &known, &RobotModel::default(), 0.2);
        assert_eq!(t.status, TickStatus::Replan);
    }

    fn sealed_room_world() -> World {
        let mut rows = vec!["#".repeat(30)];
        for _ in 0..28 {
            rows.push(format!("#{}#", ".".repeat(28)));
        }
        rows.push("#".repeat(30));
        let truth = parse_ascii(&rows.join("\n")).unwrap().0;
        let start = max_clearance_start(&truth).unwrap();
        World {
            truth,
            start,
            name: "room".into(),
            seed: 0,
        }
    }

    #[test]
    fn sealed_room_finishes_at_once() {
        let w = sealed_room_world();
        let rec = run_exploration(&w, Strategy::Gvd, &ExploreConfig::default(), 1);
        assert!(rec.summary.explored_fraction > 0.999);
        assert_ne!(rec.summary.termination, Termination::Timeout);
        assert!(rec.summary.decisions <= 1);
        assert_eq!(rec.summary.total_path, 0.0);
    }

    #[test]
    fn runs_are_reproducible_and_consistent() {
        let w = generate_world(WorldKind::Rooms, 60, 60, 5).unwrap();
        let cfg = ExploreConfig::default();
        for strategy in Strategy::ALL {
            let a = run_exploration(&w, strategy, &cfg, 3);
            let b = run_exploration(&w, strategy, &cfg, 3);
            assert_eq!(a.to_csv(), b.to_csv());
            assert_eq!(a.decisions_csv(), b.decisions_csv());
            for pair in a.rows.windows(2) {
                assert!(pair[1].entropy <= pair[0].entropy);
                assert!(pair[1].path >= pair[0].path);
                assert!(pair[1].sim_time >= pair[0].sim_time);
            }
            for r in &a.rows {
                let c = w.truth.world_to_cell(r.pose.position()).unwrap();
                assert_eq!(w.truth.get(c), CellState::Free);
            }
            let poly: f64 = a.trajectory.windows(2).map(|w| w[0].dist(w[1])).sum();
            assert!((poly - a.summary.total_path).abs() < 1e-6, "{poly} vs {}", a.summary.total_path);
            let last = a.rows.last().unwrap();
            assert!((last.path - a.summary.total_path).abs() < 1e-9);
            assert!((a.summary.total_time - a.summary.steps as f64 * cfg.robot.dt).abs() < 1e-9);
            assert!(a.summary.explored_fraction > 0.95, "{strategy}: {:?}", a.summary);

            let st = a.stages;
            assert_eq!(st.gvd_builds, st.ledger_updates);
            assert_eq!(st.gvd_builds, a.summary.decisions);
            assert_eq!(st.tiered_selections + st.baseline_selections, st.gvd_builds);
            match strategy {
                Strategy::Gvd => assert_eq!(st.baseline_selections, 0),
                _ => assert_eq!(st.tiered_selections, 0),
            }
            assert!(st.plans + 1 >= st.gvd_builds);
        }
    }
}
