//! Baseline selectors, benchmark orchestration, summaries and rendering.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::assignment::{info_gain, AcoParams, AssignParams, CostParams};
use crate::frontiers::Frontier;
use crate::grid::{save_pgm, CellState, MapError, OccupancyGrid, Point};
use crate::gvd::{GvdGraph, GvdParams};
use crate::gvd_path::GvdPath;
use crate::sim::{run_exploration, ExploreConfig, RobotModel, RunRecord, SensorModel, Strategy, Termination, WorldSpec};

/// Environment variable capping the benchmark worker pool.
pub const THREADS_ENV: &str = "GVDX_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Smallest straight-line distance.
    Nearest,
    /// Largest information gain.
    Greedy,
}

/// Baseline frontier choice; equal scores go to the smallest cell.
pub fn baseline_select(
    set: &[Frontier],
    robot: Point,
    grid: &OccupancyGrid,
    kind: BaselineKind,
    gain_radius: f64,
) -> Option<Frontier> {
    let score = |f: &Frontier| match kind {
        BaselineKind::Nearest => robot.dist(f.position),
        BaselineKind::Greedy => -(info_gain(grid, f, gain_radius) as f64),
    };
    set.iter()
        .map(|f| (score(f), f))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cell.cmp(&b.1.cell)))
        .map(|(_, f)| f.clone())
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Map(#[from] MapError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Algorithm and model parameters as they appear in a bench config. Every
/// field is optional and falls back to the library default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub delta: Option<usize>,
    pub local_window: Option<f64>,
    pub ridge_threshold: Option<f64>,
    pub min_clearance: Option<f64>,
    pub closed_world: Option<bool>,
    pub bridge_gaps: Option<bool>,
    pub gamma: Option<f64>,
    pub gain_radius: Option<f64>,
    pub cluster_distance: Option<f64>,
    pub aco_ants: Option<usize>,
    pub aco_iterations: Option<usize>,
    pub aco_alpha: Option<f64>,
    pub aco_beta: Option<f64>,
    pub aco_rho: Option<f64>,
    pub aco_q: Option<f64>,
    pub sensor_range: Option<f64>,
    pub sensor_fov_deg: Option<f64>,
    pub sensor_rays: Option<usize>,
    pub v_max: Option<f64>,
    pub omega_max: Option<f64>,
    pub robot_radius: Option<f64>,
    pub dt: Option<f64>,
    pub sense_every: Option<u64>,
    pub align_tol: Option<f64>,
    pub explored_target: Option<f64>,
    pub attach_cap: Option<f64>,
}

fn check(ok: bool, what: &str) -> Result<(), HarnessError> {
    if ok {
        Ok(())
    } else {
        Err(HarnessError::Config(what.to_string()))
    }
}

impl ParamOverrides {
    /// Applies the overrides to the defaults and validates the result.
    pub fn resolve(&self, max_steps: u64) -> Result<ExploreConfig, HarnessError> {
        let d = ExploreConfig::default();
        let gvd = GvdParams {
            ridge_threshold: self.ridge_threshold.unwrap_or(d.gvd.ridge_threshold),
            min_clearance: self.min_clearance.unwrap_or(d.gvd.min_clearance),
            closed_world: self.closed_world.unwrap_or(d.gvd.closed_world),
            bridge_gaps: self.bridge_gaps.unwrap_or(d.gvd.bridge_gaps),
        };
        let gain_radius = self.gain_radius.unwrap_or(d.assign.reserved.gain_radius);
        let gamma = self.gamma.unwrap_or(d.assign.reserved.gamma);
        let aco = AcoParams {
            ants: self.aco_ants.unwrap_or(d.assign.aco.ants),
            iterations: self.aco_iterations.unwrap_or(d.assign.aco.iterations),
            alpha: self.aco_alpha.unwrap_or(d.assign.aco.alpha),
            beta: self.aco_beta.unwrap_or(d.assign.aco.beta),
            rho: self.aco_rho.unwrap_or(d.assign.aco.rho),
            q: self.aco_q.unwrap_or(d.assign.aco.q),
            seed: d.assign.aco.seed,
        };
        let cfg = ExploreConfig {
            gvd,
            delta: self.delta.unwrap_or(d.delta),
            local_window: self.local_window.unwrap_or(d.local_window),
            assign: AssignParams {
                realtime: CostParams::realtime(gain_radius),
                reserved: CostParams::reserved(gamma, gain_radius),
                cluster_distance: self.cluster_distance.unwrap_or(d.assign.cluster_distance),
                aco,
            },
            sensor: SensorModel {
                range: self.sensor_range.unwrap_or(d.sensor.range),
                fov: self.sensor_fov_deg.map(f64::to_radians).unwrap_or(d.sensor.fov),
                rays: self.sensor_rays.unwrap_or(d.sensor.rays),
            },
            robot: RobotModel {
                v_max: self.v_max.unwrap_or(d.robot.v_max),
                omega_max: self.omega_max.unwrap_or(d.robot.omega_max),
                radius: self.robot_radius.unwrap_or(d.robot.radius),
                dt: self.dt.unwrap_or(d.robot.dt),
            },
            sense_every: self.sense_every.unwrap_or(d.sense_every),
            align_tol: self.align_tol.unwrap_or(d.align_tol),
            max_steps,
            explored_target: self.explored_target.unwrap_or(d.explored_target),
            exhausted_radius: d.exhausted_radius,
            attach_cap: self.attach_cap.unwrap_or(d.attach_cap),
        };
        validate(&cfg)?;
        Ok(cfg)
    }
}

/// Range checks for every tunable.
pub fn validate(cfg: &ExploreConfig) -> Result<(), HarnessError> {
    check(cfg.local_window > 0.0, "local_window must be > 0")?;
    check(cfg.gvd.min_clearance >= 0.0, "min_clearance must be >= 0")?;
    check(cfg.gvd.ridge_threshold.is_finite(), "ridge_threshold must be finite")?;
    check(cfg.assign.reserved.gamma > 1.0, "gamma must be > 1")?;
    check(cfg.assign.reserved.gain_radius > 0.0, "gain_radius must be > 0")?;
    check(cfg.assign.cluster_distance > 0.0, "cluster_distance must be > 0")?;
    let aco = &cfg.assign.aco;
    check(aco.ants >= 1 && aco.iterations >= 1, "aco_ants and aco_iterations must be >= 1")?;
    check(aco.rho > 0.0 && aco.rho < 1.0, "aco_rho must be in (0, 1)")?;
    check(aco.q > 0.0 && aco.alpha >= 0.0 && aco.beta >= 0.0, "aco_q must be > 0, aco_alpha and aco_beta >= 0")?;
    check(cfg.sensor.range > 0.0, "sensor_range must be > 0")?;
    check(
        cfg.sensor.fov > 0.0 && cfg.sensor.fov <= 2.0 * std::f64::consts::PI + 1e-9,
        "sensor_fov_deg must be in (0, 360]",
    )?;
    check(cfg.sensor.rays >= 1, "sensor_rays must be >= 1")?;
    check(
        cfg.robot.v_max > 0.0 && cfg.robot.omega_max > 0.0 && cfg.robot.dt > 0.0,
        "v_max, omega_max and dt must be > 0",
    )?;
    check(cfg.sense_every >= 1, "sense_every must be >= 1")?;
    check(cfg.align_tol > 0.0, "align_tol must be > 0")?;
    check(
        cfg.explored_target > 0.0 && cfg.explored_target <= 1.0,
        "explored_target must be in (0, 1]",
    )?;
    check(cfg.attach_cap > 0.0, "attach_cap must be > 0")?;
    check(cfg.max_steps >= 1, "max_steps must be >= 1")?;
    Ok(())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    worlds: Vec<String>,
    #[serde(default = "default_strategies")]
    strategies: Vec<String>,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
    #[serde(default = "default_trials")]
    trials: u32,
    #[serde(default = "default_max_steps")]
    max_steps: u64,
    #[serde(default)]
    params: ParamOverrides,
}

fn default_strategies() -> Vec<String> {
    Strategy::ALL.iter().map(|s| s.as_str().to_string()).collect()
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_trials() -> u32 {
    1
}

fn default_max_steps() -> u64 {
    ExploreConfig::default().max_steps
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub worlds: Vec<WorldSpec>,
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
    /// Repetitions per (world, strategy, seed); trial `t` runs with seed
    /// `seed + t * 1_000_003`.
    pub trials: u32,
    pub explore: ExploreConfig,
}

impl BenchmarkConfig {
    /// Parses the TOML bench config.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        check(!raw.worlds.is_empty(), "worlds must not be empty")?;
        check(!raw.strategies.is_empty(), "strategies must not be empty")?;
        check(!raw.seeds.is_empty(), "seeds must not be empty")?;
        check(raw.trials >= 1, "trials must be >= 1")?;
        let worlds = raw
            .worlds
            .iter()
            .map(|w| w.parse::<WorldSpec>().map_err(HarnessError::Config))
            .collect::<Result<Vec<_>, _>>()?;
        let strategies = raw
            .strategies
            .iter()
            .map(|s| s.parse::<Strategy>().map_err(HarnessError::Config))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BenchmarkConfig {
            worlds,
            strategies,
            seeds: raw.seeds,
            trials: raw.trials,
            explore: raw.params.resolve(raw.max_steps)?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }
}

/// Per-(world, strategy) statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub world: String,
    pub strategy: Strategy,
    pub runs: usize,
    pub failures: usize,
    pub time: Stats,
    pub path: Stats,
    /// `(this - gvd) / this * 100` on the means; `None` without a gvd row.
    pub time_pct_vs_gvd: Option<f64>,
    pub path_pct_vs_gvd: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Stats {
        if values.is_empty() {
            return Stats {
                mean: 0.0,
                min: 0.0,
                max: 0.0,
            };
        }
        Stats {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Percentage difference in the sign convention `(other - ours) / other`.
pub fn pct_vs(ours: f64, other: f64) -> f64 {
    if other == 0.0 {
        0.0
    } else {
        (other - ours) / other * 100.0
    }
}

pub const SUMMARY_CSV_HEADER: &str =
    "world,strategy,runs,failures,time_mean_s,time_min_s,time_max_s,path_mean_m,path_min_m,path_max_m,time_pct_vs_gvd,path_pct_vs_gvd";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

/// The per-run numbers a summary is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub world: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub time: f64,
    pub path: f64,
    pub explored: f64,
    pub termination: Termination,
}

impl From<&RunRecord> for RunOutcome {
    fn from(r: &RunRecord) -> Self {
        RunOutcome {
            world: r.world.clone(),
            strategy: r.strategy,
            seed: r.seed,
            time: r.summary.total_time,
            path: r.summary.total_path,
            explored: r.summary.explored_fraction,
            termination: r.summary.termination,
        }
    }
}

impl SummaryTable {
    /// Groups by (world, strategy) in first-seen world order and the fixed
    /// strategy order.
    pub fn from_outcomes(outcomes: &[RunOutcome]) -> Self {
        let mut worlds: Vec<&str> = Vec::new();
        for o in outcomes {
            if !worlds.contains(&o.world.as_str()) {
                worlds.push(&o.world);
            }
        }
        let mut rows = Vec::new();
        for world in worlds {
            let mut group: Vec<SummaryRow> = Vec::new();
            for strategy in Strategy::ALL {
                let runs: Vec<&RunOutcome> = outcomes
                    .iter()
                    .filter(|o| o.world == world && o.strategy == strategy)
                    .collect();
                if runs.is_empty() {
                    continue;
                }
                let times: Vec<f64> = runs.iter().map(|o| o.time).collect();
                let paths: Vec<f64> = runs.iter().map(|o| o.path).collect();
                group.push(SummaryRow {
                    world: world.to_string(),
                    strategy,
                    runs: runs.len(),
                    failures: runs.iter().filter(|o| o.termination == Termination::Timeout).count(),
                    time: Stats::of(&times),
                    path: Stats::of(&paths),
                    time_pct_vs_gvd: None,
                    path_pct_vs_gvd: None,
                });
            }
            if let Some(gvd) = group.iter().find(|r| r.strategy == Strategy::Gvd).cloned() {
                for r in &mut group {
                    r.time_pct_vs_gvd = Some(pct_vs(gvd.time.mean, r.time.mean));
                    r.path_pct_vs_gvd = Some(pct_vs(gvd.path.mean, r.path.mean));
                }
            }
            rows.extend(group);
        }
        SummaryTable { rows }
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUMMARY_CSV_HEADER);
        out.push('\n');
        let pct = |p: Option<f64>| p.map(|v| format!("{v:.2}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.1},{:.1},{:.1},{:.4},{:.4},{:.4},{},{}",
                r.world,
                r.strategy,
                r.runs,
                r.failures,
                r.time.mean,
                r.time.min,
                r.time.max,
                r.path.mean,
                r.path.min,
                r.path.max,
                pct(r.time_pct_vs_gvd),
                pct(r.path_pct_vs_gvd)
            );
        }
        out
    }
}

/// Stable per-run file stem.
pub fn run_stem(world: &str, strategy: Strategy, seed: u64) -> String {
    let safe: String = world
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{safe}_{strategy}_s{seed}")
}

/// Reads the final `sim_time_s` and `path_m` of a run CSV.
pub fn totals_from_run_csv(text: &str) -> Option<(f64, f64)> {
    let last = text.lines().rfind(|l| !l.is_empty())?;
    let fields: Vec<&str> = last.split(',').collect();
    if fields.len() < 7 {
        return None;
    }
    Some((fields[1].parse().ok()?, fields[6].parse().ok()?))
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub table: SummaryTable,
    pub runs: Vec<RunOutcome>,
}

/// Builds the worker pool, honouring `GVDX_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| HarnessError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        check(n >= 1, "GVDX_THREADS must be >= 1")?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))
}

/// Runs every (world, strategy, seed, trial) cell and writes
/// `runs/<stem>.csv`, `runs.csv` and `summary.csv` under `out`.
pub fn run_benchmark(cfg: &BenchmarkConfig, out: &Path) -> Result<BenchOutcome, HarnessError> {
    let runs_dir = out.join("runs");
    fs::create_dir_all(&runs_dir).map_err(io_err(&runs_dir))?;
    let worlds = cfg
        .worlds
        .iter()
        .map(|w| w.build())
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells = Vec::new();
    for (wi, _) in worlds.iter().enumerate() {
        for &strategy in &cfg.strategies {
            for &seed in &cfg.seeds {
                for t in 0..cfg.trials as u64 {
                    cells.push((wi, strategy, seed.wrapping_add(t * 1_000_003)));
                }
            }
        }
    }
    let pool = thread_pool()?;
    let results: Vec<Result<RunOutcome, HarnessError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(wi, strategy, seed)| {
                let world = &worlds[wi];
                let record = run_exploration(world, strategy, &cfg.explore, seed);
                let path = runs_dir.join(format!("{}.csv", run_stem(&world.name, strategy, seed)));
                fs::write(&path, record.to_csv()).map_err(io_err(&path))?;
                Ok(RunOutcome::from(&record))
            })
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut listing = String::from("world,strategy,seed,time_s,path_m,explored,termination\n");
    for r in &runs {
        let _ = writeln!(
            listing,
            "{},{},{},{:.1},{:.4},{:.4},{}",
            r.world,
            r.strategy,
            r.seed,
            r.time,
            r.path,
            r.explored,
            r.termination.as_str()
        );
    }
    let listing_path = out.join("runs.csv");
    fs::write(&listing_path, listing).map_err(io_err(&listing_path))?;
    let table = SummaryTable::from_outcomes(&runs);
    let summary_path = out.join("summary.csv");
    fs::write(&summary_path, table.to_csv()).map_err(io_err(&summary_path))?;
    Ok(BenchOutcome { table, runs })
}

const SVG_SCALE: f64 = 6.0;

fn svg_open(w: f64, h: f64) -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.1} {h:.1}\">\n")
}

/// Occupancy raster as run-length rectangles (occupied black, unknown grey).
fn map_layer(grid: &OccupancyGrid, scale: f64) -> String {
    let mut out = format!(
        "<rect x=\"0\" y=\"0\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#ffffff\"/>\n",
        grid.width() as f64 * scale,
        grid.height() as f64 * scale
    );
    for row in 0..grid.height() {
        let mut col = 0;
        while col < grid.width() {
            let state = grid.get(crate::grid::Cell::new(col, row));
            let start = col;
            while col < grid.width() && grid.get(crate::grid::Cell::new(col, row)) == state {
                col += 1;
            }
            let fill = match state {
                CellState::Free => continue,
                CellState::Occupied => "#000000",
                CellState::Unknown => "#c8c8c8",
            };
            let _ = writeln!(
                out,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{fill}\"/>",
                start as f64 * scale,
                row as f64 * scale,
                (col - start) as f64 * scale,
                scale
            );
        }
    }
    out
}

fn to_svg(grid: &OccupancyGrid, p: Point, scale: f64) -> (f64, f64) {
    let (gx, gy) = grid.world_to_grid(p);
    (gx * scale, gy * scale)
}

fn polyline(grid: &OccupancyGrid, pts: &[Point], scale: f64, color: &str) -> String {
    let coords: Vec<String> = pts
        .iter()
        .map(|&p| {
            let (x, y) = to_svg(grid, p, scale);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
        coords.join(" ")
    )
}

/// Length of a polyline in meters.
pub fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Trajectory drawn over a map, annotated with its length.
pub fn trajectory_svg(map: &OccupancyGrid, record: &RunRecord) -> String {
    let (w, h) = (map.width() as f64 * SVG_SCALE, map.height() as f64 * SVG_SCALE);
    let mut out = svg_open(w, h + 20.0);
    out.push_str(&map_layer(map, SVG_SCALE));
    if record.trajectory.len() > 1 {
        out.push_str(&polyline(map, &record.trajectory, SVG_SCALE, "#d62728"));
    }
    if let Some(&start) = record.trajectory.first() {
        let (x, y) = to_svg(map, start, SVG_SCALE);
        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"#2ca02c\"/>");
    }
    let _ = writeln!(
        out,
        "<text x=\"4\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\">{} {} path {:.2} m time {:.1} s</text>",
        h + 15.0,
        record.world,
        record.strategy,
        polyline_length(&record.trajectory),
        record.summary.total_time
    );
    out.push_str("</svg>\n");
    out
}

/// Entropy against simulated time, one polyline per labelled record.
pub fn entropy_svg(series: &[(&str, &RunRecord)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut out = svg_open(W, H);
    let _ = writeln!(
        out,
        "<line x1=\"{PAD}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#000\"/>\n<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{0}\" stroke=\"#000\"/>",
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.0}\" y=\"{:.0}\" font-size=\"12\">time (s)</text>\n<text x=\"4\" y=\"{:.0}\" font-size=\"12\">entropy (bits)</text>",
        W / 2.0,
        H - 15.0,
        PAD - 10.0
    );
    let t_max = series
        .iter()
        .filter_map(|(_, r)| r.rows.last().map(|row| row.sim_time))
        .fold(0.0, f64::max);
    let e_max = series
        .iter()
        .filter_map(|(_, r)| r.rows.first().map(|row| row.entropy))
        .fold(0.0, f64::max);
    for (i, (label, record)) in series.iter().enumerate() {
        if record.rows.is_empty() {
            continue;
        }
        let color = COLORS[i % COLORS.len()];
        let x = |t: f64| PAD + if t_max > 0.0 { t / t_max } else { 0.0 } * (W - 2.0 * PAD);
        let y = |e: f64| H - PAD - if e_max > 0.0 { e / e_max } else { 0.0 } * (H - 2.0 * PAD);
        let pts: Vec<String> = record
            .rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", x(r.sim_time), y(r.entropy)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.0}\" y=\"{:.0}\" fill=\"{color}\" font-size=\"12\">{label}</text>",
            W - PAD - 80.0,
            PAD + 15.0 * i as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

/// GVD nodes (blue) over a map, with an optional planned path (teal).
pub fn gvd_overlay_svg(map: &OccupancyGrid, graph: &GvdGraph, path: Option<&GvdPath>) -> String {
    let (w, h) = (map.width() as f64 * SVG_SCALE, map.height() as f64 * SVG_SCALE);
    let mut out = svg_open(w, h);
    out.push_str(&map_layer(map, SVG_SCALE));
    for n in graph.nodes() {
        let _ = writeln!(
            out,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{SVG_SCALE:.1}\" height=\"{SVG_SCALE:.1}\" fill=\"#1f77b4\"/>",
            n.cell.col as f64 * SVG_SCALE,
            n.cell.row as f64 * SVG_SCALE
        );
    }
    if let Some(p) = path {
        out.push_str(&polyline(map, &p.waypoints, SVG_SCALE, "#17becf"));
    }
    out.push_str("</svg>\n");
    out
}

/// Writes the per-run artefacts of one exploration under `out`.
pub fn render_outputs(record: &RunRecord, truth: &OccupancyGrid, out: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let write = |name: &str, body: String| -> Result<(), HarnessError> {
        let path = out.join(name);
        fs::write(&path, body).map_err(io_err(&path))
    };
    write("run.csv", record.to_csv())?;
    write("decisions.csv", record.decisions_csv())?;
    write("trajectory.csv", record.trajectory_csv())?;
    write("trajectory.svg", trajectory_svg(truth, record))?;
    write("entropy.svg", entropy_svg(&[(record.strategy.as_str(), record)]))?;
    let s = &record.summary;
    write(
        "summary.txt",
        format!(
            "world {}\nstrategy {}\nseed {}\nsteps {}\ntime_s {:.1}\npath_m {:.4}\nexplored {:.4}\ntermination {}\ndecisions {}\nplanner_compute_s {:.3}\n",
            record.world,
            record.strategy,
            record.seed,
            s.steps,
            s.total_time,
            s.total_path,
            s.explored_fraction,
            s.termination.as_str(),
            s.decisions,
            record.compute_seconds
        ),
    )?;
    save_pgm(&record.known, out.join("known.pgm"))?;
    if let Ok(gvd) = crate::gvd::build_gvd(&record.known, &GvdParams::default()) {
        write("gvd.svg", gvd_overlay_svg(&record.known, &gvd.graph, None))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontiers::FrontierKind;
    use crate::grid::Cell;
    use crate::sim::{generate_world, WorldKind};

    fn frontier(grid: &OccupancyGrid, col: usize, row: usize) -> Frontier {
        let cell = Cell::new(col, row);
        Frontier {
            cell,
            position: grid.cell_center(cell),
            radius: 0.3,
            unknown_count: 1,
            gain: 0,
            born_at: 0,
            kind: FrontierKind::Global,
        }
    }

    #[test]
    fn nearest_ignores_walls_and_greedy_takes_the_gain() {
        let mut g = OccupancyGrid::filled(400, 20, 0.1, CellState::Free);
        for r in 0..20 {
            g.set(Cell::new(30, r), CellState::Occupied);
        }
        let robot = g.cell_center(Cell::new(10, 10));
        let behind_wall = frontier(&g, 32, 10);
        let open = frontier(&g, 10, 15);
        let far = frontier(&g, 60, 10);
        let set = [far.clone(), behind_wall.clone()];
        assert_eq!(baseline_select(&set, robot, &g, BaselineKind::Nearest, 1.0).unwrap(), behind_wall);
        assert_eq!(baseline_select(std::slice::from_ref(&open), robot, &g, BaselineKind::Nearest, 1.0).unwrap(), open);
        assert_eq!(baseline_select(std::slice::from_ref(&open), robot, &g, BaselineKind::Greedy, 1.0).unwrap(), open);
        assert_eq!(baseline_select(&[], robot, &g, BaselineKind::Greedy, 1.0), None);

        // gains 3 (near) vs 40 (far)
        let near = frontier(&g, 11, 10);
        let far = frontier(&g, 310, 10);
        for c in [(11, 11), (12, 10), (11, 9)] {
            g.set(Cell::new(c.0, c.1), CellState::Unknown);
        }
        let mut added = 0;
        'fill: for r in 5..15 {
            for c in 305..316 {
                if Cell::new(c, r).dist(far.cell) <= 5.0 {
                    g.set(Cell::new(c, r), CellState::Unknown);
                    added += 1;
                    if added == 40 {
                        break 'fill;
                    }
                }
            }
        }
        assert_eq!(info_gain(&g, &near, 0.5), 3);
        assert_eq!(info_gain(&g, &far, 0.5), 40);
        assert_eq!(
            baseline_select(&[near.clone(), far.clone()], robot, &g, BaselineKind::Greedy, 0.5).unwrap(),
            far
        );
    }

    #[test]
    fn percentage_convention() {
        assert_eq!(pct_vs(10.0, 10.0), 0.0);
        assert!((pct_vs(58.35, 100.0) - 41.65).abs() < 1e-9);
        assert!(pct_vs(12.0, 10.0) < 0.0);
    }

    #[test]
    fn config_parsing_and_validation() {
        let cfg = BenchmarkConfig::parse(
            "worlds = [\"gen:rooms:40:1\"]\nstrategies = [\"gvd\", \"greedy\"]\nseeds = [3]\nmax_steps = 500\n[params]\ngamma = 3.0\nsensor_fov_deg = 180\n",
        )
        .unwrap();
        assert_eq!(cfg.strategies, vec![Strategy::Gvd, Strategy::Greedy]);
        assert_eq!(cfg.explore.assign.reserved.gamma, 3.0);
        assert_eq!(cfg.explore.max_steps, 500);
        assert!((cfg.explore.sensor.fov - std::f64::consts::PI).abs() < 1e-12);
        for bad in [
            "worlds = []",
            "worlds = [\"gen:rooms:40:1\"]\nstrategies = [\"random\"]",
            "worlds = [\"gen:rooms:40:1\"]\n[params]\ngamma = 0.5",
            "worlds = [\"gen:rooms:40:1\"]\n[params]\naco_rho = 1.5",
            "worlds = [\"gen:rooms:40:1\"]\n[params]\nwhat = 1",
            "worlds = [\"gen:rooms:40:1\"]\nseeds = []",
        ] {
            assert!(matches!(BenchmarkConfig::parse(bad), Err(HarnessError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn empty_record_renders_axes_only() {
        let w = generate_world(WorldKind::Open, 30, 30, 0).unwrap();
        let mut rec = run_exploration(&w, Strategy::Gvd, &ExploreConfig { max_steps: 1, ..Default::default() }, 0);
        rec.rows.clear();
        let svg = entropy_svg(&[("gvd", &rec)]);
        assert!(svg.contains("<line"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn trajectory_annotation_matches_summary() {
        let w = generate_world(WorldKind::Rooms, 50, 50, 2).unwrap();
        let rec = run_exploration(&w, Strategy::Gvd, &ExploreConfig::default(), 2);
        let svg = trajectory_svg(&w.truth, &rec);
        let text = format!("path {:.2} m", rec.summary.total_path);
        assert!(svg.contains(&text), "{text}");
        // entropy polyline follows the record and never rises
        let e = entropy_svg(&[("gvd", &rec)]);
        let line = e.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let ys: Vec<f64> = line
            .split('"')
            .nth(1)
            .unwrap()
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn benchmark_writes_runs_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = BenchmarkConfig::parse(
            "worlds = [\"gen:open:40:1\"]\nstrategies = [\"gvd\", \"nearest\"]\nseeds = [0]\n",
        )
        .unwrap();
        let out = run_benchmark(&cfg, dir.path()).unwrap();
        assert_eq!(out.runs.len(), 2);
        assert_eq!(out.table.rows.len(), 2);
        let files: Vec<_> = fs::read_dir(dir.path().join("runs")).unwrap().collect();
        assert_eq!(files.len(), 2);
        assert_eq!(out.table.rows[0].time_pct_vs_gvd, Some(0.0));
        // the summary recomputes from the per-run CSVs
        for row in &out.table.rows {
            let stem = run_stem(&row.world, row.strategy, 0);
            let text = fs::read_to_string(dir.path().join("runs").join(format!("{stem}.csv"))).unwrap();
            let (t, p) = totals_from_run_csv(&text).unwrap();
            assert_eq!(format!("{t:.1}"), format!("{:.1}", row.time.mean));
            assert_eq!(format!("{p:.4}"), format!("{:.4}", row.path.mean));
        }
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(summary.starts_with(SUMMARY_CSV_HEADER));
    }
}
