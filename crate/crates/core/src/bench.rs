//! Wall-clock comparison: re-running the GA for every batch of levels versus
//! distilling one GA run into a policy and querying it.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distill::build_dataset;
use crate::domain::{AnyDomain, DomainKind};
use crate::error::{Error, Result};
use crate::evolution::{run_ga, GaConfig, GaRunResult};
use crate::level::Level;
use crate::platformer;
use crate::policy::{generate_level, NeighbourIndex, PolicyConfig};
use crate::rng::{derive_rng, derive_seed, fnv1a};
use crate::with_domain;

/// Consecutive failed GA runs tolerated before a cell is abandoned.
pub const MAX_GA_RETRIES: usize = 10;

pub const CSV_HEADER: [&str; 10] = [
    "method", "domain", "size", "fraction", "n_levels", "seed", "elapsed_s", "ga_s", "distill_s", "generate_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ga,
    Policy,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ga => "ga",
            Method::Policy => "policy",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ga" => Ok(Method::Ga),
            "policy" => Ok(Method::Policy),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// A sweep over sizes, acceptable fractions and level counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchPlan {
    pub domain: DomainKind,
    /// Maze side lengths. Ignored for the platformer.
    pub maze_sizes: Vec<usize>,
    pub acceptable_fractions: Vec<f64>,
    pub levels_required: Vec<usize>,
    pub seeds: Vec<u64>,
    pub include_distillation_cost: bool,
    pub methods: Vec<Method>,
    /// Run cells concurrently. Timings are then marked contended.
    pub parallel: bool,
    pub p: Option<f64>,
    pub max_steps: Option<usize>,
    pub max_restarts: Option<usize>,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self::for_domain(DomainKind::Maze)
    }
}

impl BenchPlan {
    pub fn for_domain(domain: DomainKind) -> Self {
        let levels_required = match domain {
            DomainKind::Maze => vec![1, 10, 50, 100],
            DomainKind::Platformer => vec![5, 10, 20],
        };
        Self {
            domain,
            maze_sizes: vec![10, 20, 30, 40, 50],
            acceptable_fractions: vec![0.5, 1.0],
            levels_required,
            seeds: (0..10).collect(),
            include_distillation_cost: true,
            methods: vec![Method::Ga, Method::Policy],
            parallel: false,
            p: None,
            max_steps: None,
            max_restarts: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::Config(format!("bench plan has no {what}")));
        if self.domain == DomainKind::Maze && self.maze_sizes.is_empty() {
            return empty("maze sizes");
        }
        if self.acceptable_fractions.is_empty() {
            return empty("acceptable fractions");
        }
        if self.levels_required.is_empty() {
            return empty("level counts");
        }
        if self.seeds.is_empty() {
            return empty("seeds");
        }
        if self.methods.is_empty() {
            return empty("methods");
        }
        if self.levels_required.contains(&0) {
            return Err(Error::Config("levels_required entries must be at least 1".into()));
        }
        for cell in self.cells() {
            self.ga_config(&cell, 0)?.validate()?;
            self.policy_config(&cell).validate()?;
            AnyDomain::new(cell.domain, cell.size)?;
        }
        Ok(())
    }

    fn sizes(&self) -> Vec<usize> {
        match self.domain {
            DomainKind::Maze => self.maze_sizes.clone(),
            DomainKind::Platformer => vec![platformer::WIDTH],
        }
    }

    /// Every (size, fraction, N) combination, sizes outermost.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for size in self.sizes() {
            for &fraction in &self.acceptable_fractions {
                for &n_levels in &self.levels_required {
                    cells.push(Cell {
                        domain: self.domain,
                        size,
                        fraction,
                        n_levels,
                    });
                }
            }
        }
        cells
    }

    pub fn ga_config(&self, cell: &Cell, seed: u64) -> Result<GaConfig> {
        let mut cfg = cell.domain.ga_defaults();
        cfg.acceptable_fraction = cell.fraction;
        cfg.seed = seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn policy_config(&self, _cell: &Cell) -> PolicyConfig {
        let mut cfg = self.domain.policy_defaults();
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(s) = self.max_steps {
            cfg.max_steps = s;
        }
        if let Some(r) = self.max_restarts {
            cfg.max_restarts = r;
        }
        cfg
    }

    /// Data rows a full run produces.
    pub fn record_count(&self) -> usize {
        self.methods.len() * self.cells().len() * self.seeds.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub domain: DomainKind,
    pub size: usize,
    pub fraction: f64,
    pub n_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub method: Method,
    pub domain: DomainKind,
    pub size: usize,
    pub fraction: f64,
    pub n_levels: usize,
    pub seed: u64,
    pub elapsed_seconds: f64,
    pub ga_seconds: f64,
    pub distill_seconds: f64,
    pub generate_seconds: f64,
    /// GA executions, including failed ones.
    pub ga_runs: usize,
    pub ga_failures: usize,
    pub policy_successes: usize,
    pub policy_failures: usize,
    pub contended: bool,
    /// Stopwatch reading around the whole record, for the accounting check.
    pub measured_seconds: f64,
    #[serde(skip)]
    pub levels: Vec<Level>,
}

impl BenchRecord {
    fn new(method: Method, cell: &Cell, seed: u64) -> Self {
        Self {
            method,
            domain: cell.domain,
            size: cell.size,
            fraction: cell.fraction,
            n_levels: cell.n_levels,
            seed,
            elapsed_seconds: 0.0,
            ga_seconds: 0.0,
            distill_seconds: 0.0,
            generate_seconds: 0.0,
            ga_runs: 0,
            ga_failures: 0,
            policy_successes: 0,
            policy_failures: 0,
            contended: false,
            measured_seconds: 0.0,
            levels: Vec::new(),
        }
    }

    pub fn cell(&self) -> Cell {
        Cell {
            domain: self.domain,
            size: self.size,
            fraction: self.fraction,
            n_levels: self.n_levels,
        }
    }

    pub fn complete(&self) -> bool {
        self.levels.len() == self.n_levels
    }

    /// Hash over the text of every produced level, in order.
    pub fn digest(&self) -> String {
        let mut bytes = Vec::new();
        for level in &self.levels {
            bytes.extend_from_slice(level.to_text().as_bytes());
        }
        format!("{:016x}", fnv1a(&bytes))
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.method.to_string(),
            self.domain.to_string(),
            self.size.to_string(),
            self.fraction.to_string(),
            self.n_levels.to_string(),
            self.seed.to_string(),
            secs(self.elapsed_seconds),
            secs(self.ga_seconds),
            secs(self.distill_seconds),
            secs(self.generate_seconds),
        ]
    }
}

fn secs(s: f64) -> String {
    format!("{s:.6}")
}

/// Run the GA until it succeeds, trying derived seeds in turn.
fn ga_once(
    domain: &AnyDomain,
    base: &GaConfig,
    seed: u64,
    next_run: &mut u64,
    rec: &mut BenchRecord,
) -> Result<GaRunResult> {
    let mut failures = 0;
    loop {
        let cfg = GaConfig {
            seed: derive_seed(seed, "ga-run", &[*next_run]),
            ..base.clone()
        };
        *next_run += 1;
        rec.ga_runs += 1;
        match with_domain!(domain, d => run_ga(&cfg, d)) {
            Ok(run) => return Ok(run),
            Err(e @ Error::GaFailed { .. }) => {
                rec.ga_failures += 1;
                failures += 1;
                if failures > MAX_GA_RETRIES {
                    return Err(e);
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Collect `n_levels` acceptable levels by running the GA repeatedly.
pub fn bench_ga(plan: &BenchPlan, cell: &Cell, seed: u64) -> Result<BenchRecord> {
    let domain = AnyDomain::new(cell.domain, cell.size)?;
    let base = plan.ga_config(cell, seed)?;
    let mut rec = BenchRecord::new(Method::Ga, cell, seed);
    let mut next_run = 0;
    let started = Instant::now();
    while rec.levels.len() < cell.n_levels {
        let run = ga_once(&domain, &base, seed, &mut next_run, &mut rec)?;
        let missing = cell.n_levels - rec.levels.len();
        rec.levels.extend(run.final_levels.into_iter().take(missing));
    }
    rec.ga_seconds = started.elapsed().as_secs_f64();
    rec.elapsed_seconds = rec.ga_seconds;
    rec.measured_seconds = rec.ga_seconds;
    Ok(rec)
}

/// One GA run, one distillation, then policy queries until `n_levels`
/// successes or more than `n_levels` failures.
pub fn bench_policy(plan: &BenchPlan, cell: &Cell, seed: u64) -> Result<BenchRecord> {
    let domain = AnyDomain::new(cell.domain, cell.size)?;
    let base = plan.ga_config(cell, seed)?;
    let pcfg = plan.policy_config(cell);
    let mut rec = BenchRecord::new(Method::Policy, cell, seed);
    let mut next_run = 0;

    let outer = Instant::now();
    let t = Instant::now();
    let run = ga_once(&domain, &base, seed, &mut next_run, &mut rec)?;
    let ga_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let dataset = build_dataset(&run)?;
    let distill_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let index = NeighbourIndex::build(&dataset, pcfg.metric, pcfg.backend)?;
    let mut j = 0u64;
    while rec.levels.len() < cell.n_levels && rec.policy_failures <= cell.n_levels {
        let mut rng = derive_rng(seed, "generate", &[j]);
        j += 1;
        match with_domain!(&domain, d => generate_level(&index, d, &pcfg, &mut rng)) {
            Ok(g) => {
                rec.policy_successes += 1;
                rec.levels.push(g.level);
            }
            Err(Error::PolicyExhausted { .. }) => rec.policy_failures += 1,
            Err(e) => return Err(e),
        }
    }
    rec.generate_seconds = t.elapsed().as_secs_f64();
    let measured = outer.elapsed().as_secs_f64();

    if plan.include_distillation_cost {
        rec.ga_seconds = ga_seconds;
        rec.distill_seconds = distill_seconds;
        rec.measured_seconds = measured;
    } else {
        rec.measured_seconds = rec.generate_seconds;
    }
    rec.elapsed_seconds = rec.ga_seconds + rec.distill_seconds + rec.generate_seconds;
    Ok(rec)
}

pub fn bench_cell(plan: &BenchPlan, method: Method, cell: &Cell, seed: u64) -> Result<BenchRecord> {
    match method {
        Method::Ga => bench_ga(plan, cell, seed),
        Method::Policy => bench_policy(plan, cell, seed),
    }
}

/// Re-check every produced level against the domain threshold.
pub fn revalidate(rec: &BenchRecord) -> Result<()> {
    let domain = AnyDomain::new(rec.domain, rec.size)?;
    let threshold = rec.domain.ga_defaults().fitness_threshold;
    for (i, level) in rec.levels.iter().enumerate() {
        let f = domain.fitness(level);
        if f < threshold {
            return Err(Error::Invalid(format!(
                "{} level {i} (seed {}) has fitness {f} below {threshold}",
                rec.method, rec.seed
            )));
        }
    }
    Ok(())
}

/// Mean and spread over seeds for one (method, cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: Method,
    pub domain: DomainKind,
    pub size: usize,
    pub fraction: f64,
    pub n_levels: usize,
    pub runs: usize,
    pub mean_s: f64,
    /// Population standard deviation.
    pub std_s: f64,
    pub mean_ga_s: f64,
    pub mean_distill_s: f64,
    pub mean_generate_s: f64,
    pub failure_rate: f64,
    pub degraded: bool,
}

pub const SUMMARY_HEADER: [&str; 15] = [
    "method", "domain", "size", "fraction", "n_levels", "seed", "elapsed_s", "ga_s", "distill_s", "generate_s",
    "mean_s", "std_s", "runs", "failure_rate", "degraded",
];

impl Summary {
    pub fn of(records: &[&BenchRecord]) -> Self {
        let first = records[0];
        let n = records.len() as f64;
        let mean = |f: fn(&BenchRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / n;
        let mean_s = mean(|r| r.elapsed_seconds);
        let var = records.iter().map(|r| (r.elapsed_seconds - mean_s).powi(2)).sum::<f64>() / n;
        let successes: usize = records.iter().map(|r| r.policy_successes).sum();
        let failures: usize = records.iter().map(|r| r.policy_failures).sum();
        let failure_rate = if successes + failures == 0 {
            0.0
        } else {
            failures as f64 / (successes + failures) as f64
        };
        Self {
            method: first.method,
            domain: first.domain,
            size: first.size,
            fraction: first.fraction,
            n_levels: first.n_levels,
            runs: records.len(),
            mean_s,
            std_s: var.sqrt(),
            mean_ga_s: mean(|r| r.ga_seconds),
            mean_distill_s: mean(|r| r.distill_seconds),
            mean_generate_s: mean(|r| r.generate_seconds),
            failure_rate,
            degraded: failure_rate > 0.5 || records.iter().any(|r| !r.complete()),
        }
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.method.to_string(),
            self.domain.to_string(),
            self.size.to_string(),
            self.fraction.to_string(),
            self.n_levels.to_string(),
            "all".to_string(),
            secs(self.mean_s),
            secs(self.mean_ga_s),
            secs(self.mean_distill_s),
            secs(self.mean_generate_s),
            secs(self.mean_s),
            secs(self.std_s),
            self.runs.to_string(),
            format!("{:.4}", self.failure_rate),
            self.degraded.to_string(),
        ]
    }

    /// Parse a `summary.csv` written by [`run_plan`].
    pub fn read_csv(path: &Path) -> Result<Vec<Summary>> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
        let mut out = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let field = |i: usize| row.get(i).unwrap_or_default();
            let num = |i: usize| -> Result<f64> {
                field(i)
                    .parse()
                    .map_err(|_| Error::Config(format!("bad number {:?} in {}", field(i), path.display())))
            };
            out.push(Summary {
                method: field(0).parse()?,
                domain: field(1).parse()?,
                size: num(2)? as usize,
                fraction: num(3)?,
                n_levels: num(4)? as usize,
                runs: num(12)? as usize,
                mean_s: num(10)?,
                std_s: num(11)?,
                mean_ga_s: num(7)?,
                mean_distill_s: num(8)?,
                mean_generate_s: num(9)?,
                failure_rate: num(13)?,
                degraded: field(14) == "true",
            });
        }
        Ok(out)
    }
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Csv(e)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordReport {
    #[serde(flatten)]
    pub record: BenchRecord,
    pub levels_produced: usize,
    pub digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub plan: BenchPlan,
    pub records: Vec<RecordReport>,
    pub summaries: Vec<Summary>,
    pub degraded: bool,
    #[serde(skip)]
    pub levels: Vec<Vec<Level>>,
}

impl BenchReport {
    pub fn summary(&self, method: Method, size: usize, fraction: f64, n_levels: usize) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.method == method && s.size == size && s.fraction == fraction && s.n_levels == n_levels)
    }

    pub fn records(&self) -> impl Iterator<Item = &BenchRecord> {
        self.records.iter().map(|r| &r.record)
    }
}

struct Job {
    method: Method,
    cell: Cell,
    seed: u64,
}

fn jobs(plan: &BenchPlan) -> Vec<Job> {
    let mut out = Vec::new();
    for cell in plan.cells() {
        for &method in &plan.methods {
            for &seed in &plan.seeds {
                out.push(Job { method, cell, seed });
            }
        }
    }
    out
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Run every cell of `plan`. With `out_dir`, writes `records.csv` (flushed
/// row by row), `bench.csv` (data rows then summary rows), `summary.csv` and
/// `report.json`.
pub fn run_plan(plan: &BenchPlan, out_dir: Option<&Path>) -> Result<BenchReport> {
    plan.validate()?;
    let jobs = jobs(plan);

    let mut live = match out_dir {
        Some(dir) => {
            let path = dir.join("records.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| csv_io(&path, e))?;
            w.write_record(CSV_HEADER)?;
            w.flush().map_err(|e| Error::io(&path, e))?;
            Some((w, path))
        }
        None => None,
    };
    let mut emit = |rec: &BenchRecord| -> Result<()> {
        if let Some((w, path)) = live.as_mut() {
            w.write_record(rec.csv_row())?;
            w.flush().map_err(|e| Error::io(path.as_path(), e))?;
        }
        Ok(())
    };

    let mut records = Vec::with_capacity(jobs.len());
    if plan.parallel {
        let done: Vec<Result<BenchRecord>> = jobs
            .par_iter()
            .map(|j| bench_cell(plan, j.method, &j.cell, j.seed))
            .collect();
        for rec in done {
            let mut rec = rec?;
            rec.contended = true;
            emit(&rec)?;
            records.push(rec);
        }
    } else {
        for j in &jobs {
            let rec = bench_cell(plan, j.method, &j.cell, j.seed)?;
            emit(&rec)?;
            records.push(rec);
        }
    }

    for rec in &records {
        revalidate(rec)?;
    }

    let mut summaries = Vec::new();
    for chunk in records.chunks(plan.seeds.len()) {
        let refs: Vec<&BenchRecord> = chunk.iter().collect();
        summaries.push(Summary::of(&refs));
    }
    let degraded = summaries.iter().any(|s| s.degraded);
    let levels = records.iter().map(|r| r.levels.clone()).collect();
    let report = BenchReport {
        plan: plan.clone(),
        records: records
            .into_iter()
            .map(|record| RecordReport {
                levels_produced: record.levels.len(),
                digest: record.digest(),
                record,
            })
            .collect(),
        summaries,
        degraded,
        levels,
    };

    if let Some(dir) = out_dir {
        write_outputs(&report, dir)?;
    }
    Ok(report)
}

fn write_outputs(report: &BenchReport, dir: &Path) -> Result<()> {
    let mut bench_header: Vec<&str> = CSV_HEADER.to_vec();
    bench_header.extend(["mean_s", "std_s"]);
    let mut rows: Vec<Vec<String>> = report
        .records()
        .map(|r| {
            let mut row = r.csv_row();
            row.extend([String::new(), String::new()]);
            row
        })
        .collect();
    rows.extend(report.summaries.iter().map(|s| s.csv_row()[..12].to_vec()));
    write_rows(&dir.join("bench.csv"), &bench_header, &rows)?;

    let rows: Vec<Vec<String>> = report.summaries.iter().map(|s| s.csv_row()).collect();
    write_rows(&dir.join("summary.csv"), &SUMMARY_HEADER, &rows)?;

    let path = dir.join("report.json");
    let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer_pretty(&mut f, report)?;
    f.write_all(b"\n").map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(methods: Vec<Method>) -> BenchPlan {
        BenchPlan {
            maze_sizes: vec![6],
            acceptable_fractions: vec![1.0],
            levels_required: vec![3],
            seeds: vec![0, 1],
            methods,
            ..BenchPlan::default()
        }
    }

    #[test]
    fn ga_track_collects_exactly_n_levels() {
        let plan = tiny(vec![Method::Ga]);
        let cell = plan.cells()[0];
        let rec = bench_ga(&plan, &cell, 0).unwrap();
        assert_eq!(rec.levels.len(), 3);
        assert_eq!(rec.ga_runs, 1);
        revalidate(&rec).unwrap();
    }

    #[test]
    fn elapsed_is_sum_of_breakdown() {
        let plan = tiny(vec![Method::Policy]);
        let cell = plan.cells()[0];
        let rec = bench_policy(&plan, &cell, 0).unwrap();
        let sum = rec.ga_seconds + rec.distill_seconds + rec.generate_seconds;
        assert!((rec.elapsed_seconds - sum).abs() < 1e-3);
        assert!((rec.measured_seconds - sum).abs() < 1e-3);
    }

    #[test]
    fn plan_round_trips_through_toml() {
        let plan = tiny(vec![Method::Ga, Method::Policy]);
        assert_eq!(BenchPlan::from_toml(&plan.to_toml()).unwrap(), plan);
        assert!(BenchPlan::from_toml("seeds = []").is_err());
        assert!(BenchPlan::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn summary_uses_population_std() {
        let plan = tiny(vec![Method::Ga]);
        let cell = plan.cells()[0];
        let mut a = BenchRecord::new(Method::Ga, &cell, 0);
        let mut b = BenchRecord::new(Method::Ga, &cell, 1);
        a.elapsed_seconds = 1.0;
        b.elapsed_seconds = 3.0;
        a.levels = vec![Level::filled(crate::maze::alphabet(), 6, 6, 0).unwrap(); 3];
        b.levels = a.levels.clone();
        let s = Summary::of(&[&a, &b]);
        assert_eq!(s.mean_s, 2.0);
        assert_eq!(s.std_s, 1.0);
        assert!(!s.degraded);
    }
}
