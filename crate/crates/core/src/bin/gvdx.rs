use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use gvdx::grid::{load_map_with_meta, OccupancyGrid, Point};
use gvdx::gvd::{build_gvd, clearance_pgm, ridge_pgm, GvdParams};
use gvdx::gvd_path::GvdPlanner;
use gvdx::harness::{gvd_overlay_svg, render_outputs, run_benchmark, BenchmarkConfig};
use gvdx::sim::{run_exploration, ExploreConfig, Strategy, Termination, WorldSpec};

#[derive(Parser)]
#[command(name = "gvdx", version, about = "GVD-based frontier exploration toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the GVD of a map and report its size.
    Gvd {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        dump_clearance: bool,
        #[arg(long)]
        dump_ridges: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Plan a path along the GVD between two world points.
    Plan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_point)]
        from: Point,
        #[arg(long, value_parser = parse_point)]
        to: Point,
        /// Also write path.csv and plan.svg here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one exploration.
    Explore {
        /// Map file or `gen:<corridor|rooms|maze|open>:<N|WxH>:<seed>`.
        #[arg(long)]
        world: String,
        #[arg(long, default_value = "gvd")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark described by a TOML config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Point::new(parse(x)?, parse(y)?))
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), Box<dyn std::error::Error>> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(())
}

/// Loads a map with the GVD parameters its sidecar asks for.
fn load(map: &Path) -> Result<(OccupancyGrid, GvdParams), Box<dyn std::error::Error>> {
    let (grid, sidecar) = load_map_with_meta(map)?;
    let params = GvdParams {
        closed_world: sidecar.closed_world,
        ..GvdParams::default()
    };
    Ok((grid, params))
}

fn cmd_gvd(map: &Path, dump_clearance: bool, dump_ridges: bool, out: &Path) -> CliResult {
    let (grid, params) = load(map)?;
    let t0 = Instant::now();
    let gvd = build_gvd(&grid, &params)?;
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "{}x{} cells, {} nodes, {} edges, {} components, {} pooling passes, built in {:.3} s",
        grid.width(),
        grid.height(),
        gvd.graph.len(),
        gvd.graph.edge_count(),
        gvd.graph.component_count(),
        gvd.distance.passes,
        elapsed
    );
    if dump_clearance {
        write(out, "clearance.pgm", clearance_pgm(&gvd.distance))?;
    }
    if dump_ridges {
        write(out, "ridges.pgm", ridge_pgm(&gvd.graph))?;
    }
    if dump_clearance || dump_ridges {
        write(out, "gvd.svg", gvd_overlay_svg(&grid, &gvd.graph, None))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_plan(map: &Path, from: Point, to: Point, out: Option<&Path>) -> CliResult {
    let (grid, params) = load(map)?;
    let gvd = build_gvd(&grid, &params)?;
    let planner = GvdPlanner::new(&gvd.graph, &grid);
    let path = planner.plan(from, to)?;
    println!("cost {:.4} m, {} waypoints", path.cost, path.waypoints.len());
    print!("{}", path.to_csv());
    if let Some(dir) = out {
        write(dir, "path.csv", path.to_csv())?;
        write(dir, "plan.svg", gvd_overlay_svg(&grid, &gvd.graph, Some(&path)))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_explore(world: &str, strategy: Strategy, seed: u64, max_steps: Option<u64>, out: &Path) -> CliResult {
    let spec: WorldSpec = world.parse()?;
    let world = spec.build()?;
    let mut cfg = ExploreConfig::default();
    if let Some(n) = max_steps {
        if n == 0 {
            return Err("--max-steps must be >= 1".into());
        }
        cfg.max_steps = n;
    }
    let record = run_exploration(&world, strategy, &cfg, seed);
    render_outputs(&record, &world.truth, out)?;
    println!("world,strategy,seed,time_s,path_m,explored,termination,decisions");
    println!("{}", record.summary_line());
    Ok(if record.summary.termination == Termination::Timeout {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_bench(config: &Path, out: &Path) -> CliResult {
    let cfg = BenchmarkConfig::load(config)?;
    let result = run_benchmark(&cfg, out)?;
    print!("{}", result.table.to_csv());
    let failures = result.table.failures();
    if failures > 0 {
        eprintln!("{failures} run(s) timed out");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Gvd {
            map,
            dump_clearance,
            dump_ridges,
            out,
        } => cmd_gvd(map, *dump_clearance, *dump_ridges, out),
        Command::Plan { map, from, to, out } => cmd_plan(map, *from, *to, out.as_deref()),
        Command::Explore {
            world,
            strategy,
            seed,
            max_steps,
            out,
        } => cmd_explore(world, *strategy, *seed, *max_steps, out),
        Command::Bench { config, out } => cmd_bench(config, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
