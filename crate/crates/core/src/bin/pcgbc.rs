use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pcgbc::bench::{run_plan, BenchPlan, Summary};
use pcgbc::config::{Resolved, RunConfig, Switch};
use pcgbc::distill::build_dataset;
use pcgbc::domain::{read_level, AnyDomain, DomainKind};
use pcgbc::evolution::{run_ga, GaRunResult};
use pcgbc::maze;
use pcgbc::platformer;
use pcgbc::plot::write_plots;
use pcgbc::policy::{generate_level, NeighbourIndex, PolicyArtifact};
use pcgbc::rng::derive_rng;
use pcgbc::{with_domain, Error, Result};

#[derive(Parser)]
#[command(name = "pcgbc", version, about = "Evolve tile levels, distil them into a policy, and benchmark both")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the genetic algorithm and save the run directory.
    Evolve {
        #[command(flatten)]
        flags: RunFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a GA run directory into a policy dataset plus policy.json.
    Distill {
        run_dir: PathBuf,
        /// Dataset file to write (default: <run_dir>/dataset.pcgdata).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Generate levels with a policy (policy.json or dataset file).
    Generate {
        policy: PathBuf,
        /// Number of levels (same as --levels).
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a benchmark plan and write CSVs, a JSON report and SVG plots.
    Bench {
        /// TOML plan file. Without one the default sweep for --domain runs.
        plan: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        domain: Option<DomainKind>,
        /// Use seeds 0..N instead of the plan's list.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        include_distill_cost: Option<Switch>,
        #[arg(long)]
        parallel: bool,
    },
    /// Print a level; --path overlays the maze shortest path.
    Render {
        level: PathBuf,
        #[arg(long)]
        path: bool,
    },
    /// Print fitness for each level; exit 1 if any is below the threshold.
    Validate {
        #[arg(required = true)]
        levels: Vec<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Render SVG charts from a summary.csv.
    Plot {
        summary: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Default)]
struct RunFlags {
    /// Flat TOML file with the same keys as these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    domain: Option<DomainKind>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    max_restarts: Option<usize>,
    #[arg(long)]
    include_distill_cost: Option<Switch>,
}

impl RunFlags {
    fn config(&self, out: Option<PathBuf>) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(RunConfig {
            domain: self.domain,
            size: self.size,
            fraction: self.fraction,
            seed: self.seed,
            p: self.p,
            threshold: self.threshold,
            levels: self.levels,
            max_steps: self.max_steps,
            max_restarts: self.max_restarts,
            include_distill_cost: self.include_distill_cost,
            out,
        }))
    }
}

/// Create `dir` if needed. Its parent must already exist.
fn prepare_out(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        return Ok(());
    }
    fs::create_dir(dir).map_err(|e| Error::io(dir, e))
}

fn require_out(r: &Resolved) -> Result<PathBuf> {
    r.out
        .clone()
        .ok_or_else(|| Error::Config("an output directory is required (--out or `out` in the config)".into()))
}

fn evolve(flags: RunFlags, out: Option<PathBuf>) -> Result<()> {
    let r = flags.config(out)?.resolve()?;
    let out = require_out(&r)?;
    prepare_out(&out)?;
    let domain = AnyDomain::new(r.domain, r.size)?;
    let cfg = r.ga_config();
    let run = with_domain!(&domain, d => run_ga(&cfg, d))?;
    run.save(&out)?;
    r.save_into(&out)?;
    println!(
        "generations {}, acceptable {} of {}, wall-clock {:.3}s",
        run.generations_used,
        run.final_levels.len(),
        cfg.child_list_size,
        run.wall_clock_seconds
    );
    Ok(())
}

fn distill(run_dir: PathBuf, out: Option<PathBuf>, flags: RunFlags) -> Result<()> {
    let run = GaRunResult::load(&run_dir)?;
    let kind: DomainKind = run.domain.parse()?;
    let mut cfg = flags.config(None)?;
    cfg.domain = Some(kind);
    cfg.size = run.initial_levels.first().map(|l| l.width());
    cfg.threshold = cfg.threshold.or(Some(run.config.fitness_threshold));
    let r = cfg.resolve()?;

    let dataset = build_dataset(&run)?;
    let out = out.unwrap_or_else(|| run_dir.join("dataset.pcgdata"));
    dataset.save(&out)?;
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = out.file_name().and_then(|n| n.to_str()).unwrap_or("dataset.pcgdata");
    PolicyArtifact::new(kind.name(), name, &r.policy_config()).save(&dir.join("policy.json"))?;
    println!("pairs {}, trajectories {}", dataset.len(), dataset.trajectories().len());
    Ok(())
}

fn generate(policy: PathBuf, count: Option<usize>, out: Option<PathBuf>, flags: RunFlags) -> Result<bool> {
    let (kind, dataset, base) = PolicyArtifact::open(&policy)?;
    let mut cfg = flags.config(out)?;
    cfg.domain = Some(kind);
    cfg.size = Some(dataset.width());
    cfg.p = cfg.p.or(Some(base.p));
    cfg.threshold = cfg.threshold.or(Some(base.fitness_threshold));
    cfg.max_steps = cfg.max_steps.or(Some(base.max_steps));
    cfg.max_restarts = cfg.max_restarts.or(Some(base.max_restarts));
    cfg.levels = count.or(cfg.levels);
    let r = cfg.resolve()?;
    let pcfg = pcgbc::PolicyConfig {
        extension: base.extension,
        metric: base.metric,
        backend: base.backend,
        ..r.policy_config()
    };
    if r.levels == 0 {
        return Ok(true);
    }
    let out = require_out(&r)?;
    prepare_out(&out)?;
    r.save_into(&out)?;

    let domain = AnyDomain::new(kind, dataset.width())?;
    let index = NeighbourIndex::build(&dataset, pcfg.metric, pcfg.backend)?;
    let mut all_ok = true;
    for j in 0..r.levels {
        let mut rng = derive_rng(r.seed, "generate", &[j as u64]);
        match with_domain!(&domain, d => generate_level(&index, d, &pcfg, &mut rng)) {
            Ok(g) => {
                let path = out.join(format!("{j:03}.lvl"));
                fs::write(&path, g.level.to_text()).map_err(|e| Error::io(&path, e))?;
                println!(
                    "level {j}: fitness {:.4}, attempts {}, queries {}, {:.4}s",
                    g.fitness, g.attempts, g.policy_queries, g.wall_clock_seconds
                );
            }
            Err(e @ Error::PolicyExhausted { .. }) => {
                all_ok = false;
                println!("level {j}: {e}");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(all_ok)
}

fn bench(
    plan: Option<PathBuf>,
    out: PathBuf,
    domain: Option<DomainKind>,
    seeds: Option<u64>,
    include: Option<Switch>,
    parallel: bool,
) -> Result<bool> {
    let mut plan = match plan {
        Some(path) => BenchPlan::load(&path)?,
        None => BenchPlan::for_domain(domain.unwrap_or(DomainKind::Maze)),
    };
    if let Some(d) = domain {
        if d != plan.domain {
            plan = BenchPlan { domain: d, ..plan };
            if d == DomainKind::Platformer {
                plan.levels_required = BenchPlan::for_domain(d).levels_required;
            }
        }
    }
    if let Some(n) = seeds {
        plan.seeds = (0..n).collect();
    }
    if let Some(s) = include {
        plan.include_distillation_cost = s.is_on();
    }
    plan.parallel |= parallel;
    plan.validate()?;
    prepare_out(&out)?;
    let path = out.join("plan.toml");
    fs::write(&path, plan.to_toml()).map_err(|e| Error::io(&path, e))?;

    let report = run_plan(&plan, Some(&out))?;
    write_plots(&report.summaries, &out)?;
    for s in &report.summaries {
        println!(
            "{:<6} size {:>3} fraction {:<4} N {:>4}: {:.4}s ± {:.4}s{}",
            s.method.name(),
            s.size,
            s.fraction,
            s.n_levels,
            s.mean_s,
            s.std_s,
            if s.degraded {
                format!("  DEGRADED (policy failure rate {:.0}%)", 100.0 * s.failure_rate)
            } else {
                String::new()
            }
        );
    }
    Ok(!report.degraded)
}

fn render(level: PathBuf, path: bool) -> Result<()> {
    let level = read_level(&level)?;
    if !path {
        print!("{}", level.to_text());
        return Ok(());
    }
    if DomainKind::from_glyphs(&level.alphabet().glyphs()) != Some(DomainKind::Maze) {
        return Err(Error::Config("--path only applies to mazes".into()));
    }
    let cells = maze::shortest_path_cells(&level);
    let w = level.width();
    let mut grid: Vec<u8> = level.grid_text().into_bytes();
    for &(x, y) in cells.iter().flatten() {
        grid[y * (w + 1) + x] = b'*';
    }
    println!("{} {}", level.width(), level.height());
    print!("{}", String::from_utf8(grid).expect("ascii grid"));
    if cells.is_none() {
        println!("unsolvable: no path from the top-left to the bottom-right corner");
    }
    Ok(())
}

fn validate(levels: Vec<PathBuf>, threshold: Option<f64>) -> Result<bool> {
    let mut all_ok = true;
    for path in levels {
        let level = read_level(&path)?;
        let kind = DomainKind::from_glyphs(&level.alphabet().glyphs()).expect("parsed levels have a domain");
        let threshold = threshold.unwrap_or(kind.ga_defaults().fitness_threshold);
        let detail = match kind {
            DomainKind::Maze => {
                let f = maze::maze_fitness(&level);
                format!(
                    "finishable {} ratio_x {:.4} ratio_y {:.4} path {}",
                    f.finishable, f.ratio_x, f.ratio_y, f.path_length
                )
            }
            DomainKind::Platformer => {
                let s = platformer::simulate_agent(&level);
                format!(
                    "{:?} completion {:.4} power-up {}",
                    s.win_state, s.completion, s.power_up_collected
                )
            }
        };
        let fitness = AnyDomain::for_level(&level)?.fitness(&level);
        let ok = fitness >= threshold;
        all_ok &= ok;
        println!(
            "{}: fitness {fitness:.6} ({detail}) {}",
            path.display(),
            if ok { "acceptable" } else { "NOT acceptable" }
        );
    }
    Ok(all_ok)
}

fn plot(summary: PathBuf, out: PathBuf) -> Result<()> {
    let rows = Summary::read_csv(&summary)?;
    prepare_out(&out)?;
    for p in write_plots(&rows, &out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Evolve { flags, out } => evolve(flags, out).map(|_| true),
        Cmd::Distill { run_dir, out, flags } => distill(run_dir, out, flags).map(|_| true),
        Cmd::Generate {
            policy,
            count,
            out,
            flags,
        } => generate(policy, count, out, flags),
        Cmd::Bench {
            plan,
            out,
            domain,
            seeds,
            include_distill_cost,
            parallel,
        } => bench(plan, out, domain, seeds, include_distill_cost, parallel),
        Cmd::Render { level, path } => render(level, path).map(|_| true),
        Cmd::Validate { levels, threshold } => validate(levels, threshold),
        Cmd::Plot { summary, out } => plot(summary, out).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_method_failure() { 1 } else { 2 })
        }
    }
}
