//! Nearest-neighbour policy over a [`PolicyDataset`].
//!
//! A query finds the most similar recorded state (exact 1-NN, lowest index on
//! ties) and executes the recorded actions that follow it in its trajectory.
//! Generation repeats this from a random level until the domain fitness
//! clears the threshold, restarting from a fresh random level after
//! `max_steps` queries.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::distill::PolicyDataset;
use crate::domain::DomainKind;
use crate::error::{Error, Result};
use crate::evolution::DomainPlugin;
use crate::level::Level;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Number of cells whose tile ids differ.
    #[default]
    Hamming,
    /// Sum of squared tile-id differences.
    SquaredEuclidean,
}

impl Metric {
    #[inline]
    fn cell(self, a: u8, b: u8) -> i64 {
        match self {
            Metric::Hamming => i64::from(a != b),
            Metric::SquaredEuclidean => {
                let d = i64::from(a) - i64::from(b);
                d * d
            }
        }
    }
}

/// Search strategy. All three return the same neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Distance to a trajectory's first state, then updated per action: only
    /// one cell changes between consecutive states.
    #[default]
    Incremental,
    /// Full scan over materialised states, abandoning a state once it is
    /// worse than the best so far.
    Exhaustive,
    /// Tile ids split into bit planes; Hamming distance by popcount.
    Packed,
}

/// How many recorded actions one query executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionRule {
    /// `max(1, round(p * len))`: `p` is the share of the trajectory per query.
    #[default]
    Proportional,
    /// `max(1, round(len / p))`, clipped by the trajectory end.
    Divided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub p: f64,
    pub max_steps: usize,
    pub max_restarts: usize,
    pub fitness_threshold: f64,
    #[serde(default)]
    pub extension: ExtensionRule,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub backend: Backend,
}

impl PolicyConfig {
    pub fn maze_defaults() -> Self {
        Self {
            p: 0.06,
            max_steps: 50,
            max_restarts: 25,
            fitness_threshold: 1.0,
            extension: ExtensionRule::Proportional,
            metric: Metric::Hamming,
            backend: Backend::Incremental,
        }
    }

    pub fn platformer_defaults() -> Self {
        Self {
            p: 0.05,
            fitness_threshold: 3.0,
            ..Self::maze_defaults()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Config(format!("p = {} outside (0, 1]", self.p)));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if self.backend == Backend::Packed && self.metric != Metric::Hamming {
            return Err(Error::Config("the packed backend only supports hamming".into()));
        }
        Ok(())
    }

    /// Actions per query for a trajectory of `len` actions.
    pub fn extension_len(&self, len: usize) -> usize {
        let n = match self.extension {
            ExtensionRule::Proportional => (self.p * len as f64).round(),
            ExtensionRule::Divided => (len as f64 / self.p).round(),
        };
        (n as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    cell: u32,
    before: u8,
    after: u8,
}

#[derive(Debug, Clone)]
struct TrajectoryIndex {
    offset: usize,
    first: Vec<u8>,
    steps: Vec<Step>,
}

#[derive(Debug, Clone)]
enum Store {
    Incremental,
    Exhaustive { states: Vec<u8> },
    Packed { planes: usize, words: usize, bits: Vec<u64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbour {
    pub index: usize,
    pub distance: u64,
}

/// Immutable 1-NN index; safe to share between generation loops.
#[derive(Debug, Clone)]
pub struct NeighbourIndex {
    width: usize,
    height: usize,
    len: usize,
    metric: Metric,
    trajectories: Vec<TrajectoryIndex>,
    store: Store,
}

fn plane_count(alphabet_len: usize) -> usize {
    (usize::BITS - (alphabet_len.max(2) - 1).leading_zeros()) as usize
}

fn pack_into(out: &mut Vec<u64>, cells: &[u8], planes: usize, words: usize) {
    let base = out.len();
    out.resize(base + planes * words, 0);
    for (i, &c) in cells.iter().enumerate() {
        for p in 0..planes {
            if (c >> p) & 1 == 1 {
                out[base + p * words + i / 64] |= 1 << (i % 64);
            }
        }
    }
}

impl NeighbourIndex {
    pub fn build(dataset: &PolicyDataset, metric: Metric, backend: Backend) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::Empty("policy dataset has no pairs".into()));
        }
        if backend == Backend::Packed && metric != Metric::Hamming {
            return Err(Error::Config("the packed backend only supports hamming".into()));
        }
        let (width, height) = (dataset.width(), dataset.height());
        let cells = width * height;
        let planes = plane_count(dataset.alphabet().len());
        let words = cells.div_ceil(64);
        let mut store = match backend {
            Backend::Incremental => Store::Incremental,
            Backend::Exhaustive => Store::Exhaustive {
                states: Vec::with_capacity(dataset.len() * cells),
            },
            Backend::Packed => Store::Packed {
                planes,
                words,
                bits: Vec::with_capacity(dataset.len() * planes * words),
            },
        };

        let mut trajectories = Vec::new();
        for (t, traj) in dataset.trajectories().iter().enumerate() {
            let Some(first) = traj.first_state() else {
                continue;
            };
            let mut state = first.cells().to_vec();
            let mut steps = Vec::with_capacity(traj.len());
            for a in traj.actions() {
                match &mut store {
                    Store::Incremental => {}
                    Store::Exhaustive { states } => states.extend_from_slice(&state),
                    Store::Packed { bits, .. } => pack_into(bits, &state, planes, words),
                }
                let cell = a.y as usize * width + a.x as usize;
                steps.push(Step {
                    cell: cell as u32,
                    before: state[cell],
                    after: a.t,
                });
                state[cell] = a.t;
            }
            trajectories.push(TrajectoryIndex {
                offset: dataset.trajectory_bounds(t).start,
                first: first.cells().to_vec(),
                steps,
            });
        }
        Ok(Self {
            width,
            height,
            len: dataset.len(),
            metric,
            trajectories,
            store,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn locate(&self, k: usize) -> (&TrajectoryIndex, usize) {
        let t = self.trajectories.partition_point(|t| t.offset <= k) - 1;
        let traj = &self.trajectories[t];
        debug_assert!(k - traj.offset < traj.steps.len());
        (traj, k - traj.offset)
    }

    /// End (exclusive) of the trajectory holding pair `k`.
    pub fn trajectory_end(&self, k: usize) -> usize {
        let (traj, _) = self.locate(k);
        traj.offset + traj.steps.len()
    }

    pub fn trajectory_len(&self, k: usize) -> usize {
        self.locate(k).0.steps.len()
    }

    pub fn nearest(&self, state: &Level) -> Result<Neighbour> {
        if state.width() != self.width || state.height() != self.height {
            return Err(Error::ShapeMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: state.width(),
                right_height: state.height(),
            });
        }
        let q = state.cells();
        let best = match &self.store {
            Store::Incremental => self.scan_incremental(q),
            Store::Exhaustive { states } => self.scan_exhaustive(q, states),
            Store::Packed { planes, words, bits } => {
                let mut packed = Vec::with_capacity(planes * words);
                pack_into(&mut packed, q, *planes, *words);
                scan_packed(&packed, bits, *planes, *words)
            }
        };
        Ok(best)
    }

    fn scan_incremental(&self, q: &[u8]) -> Neighbour {
        let metric = self.metric;
        let mut best = Neighbour {
            index: 0,
            distance: u64::MAX,
        };
        for traj in &self.trajectories {
            let mut d: i64 = traj.first.iter().zip(q).map(|(&a, &b)| metric.cell(a, b)).sum();
            // `d` is the distance to the state before step `j`.
            for (j, step) in traj.steps.iter().enumerate() {
                if (d as u64) < best.distance {
                    best = Neighbour {
                        index: traj.offset + j,
                        distance: d as u64,
                    };
                    if d == 0 {
                        return best;
                    }
                }
                let qc = q[step.cell as usize];
                d += metric.cell(step.after, qc) - metric.cell(step.before, qc);
            }
        }
        best
    }

    fn scan_exhaustive(&self, q: &[u8], states: &[u8]) -> Neighbour {
        let metric = self.metric;
        let mut best = Neighbour {
            index: 0,
            distance: u64::MAX,
        };
        for (k, s) in states.chunks_exact(q.len()).enumerate() {
            let mut d = 0u64;
            for chunk in s.chunks(64).zip(q.chunks(64)) {
                d += chunk.0.iter().zip(chunk.1).map(|(&a, &b)| metric.cell(a, b) as u64).sum::<u64>();
                if d >= best.distance {
                    break;
                }
            }
            if d < best.distance {
                best = Neighbour { index: k, distance: d };
                if d == 0 {
                    break;
                }
            }
        }
        best
    }

    /// Apply recorded actions `start..start+n` (clipped to the trajectory end)
    /// to `level`. Returns (actions applied, cells that actually changed).
    fn apply_from(&self, level: &mut Level, start: usize, cfg: &PolicyConfig) -> (usize, usize) {
        let (traj, pos) = self.locate(start);
        let n = cfg.extension_len(traj.steps.len());
        let end = (pos + n).min(traj.steps.len());
        let mut changed = 0;
        for step in &traj.steps[pos..end] {
            let cell = step.cell as usize;
            let (x, y) = (cell % self.width, cell / self.width);
            if level.get(x, y) != step.after {
                level.set(x, y, step.after);
                changed += 1;
            }
        }
        (end - pos, changed)
    }
}

fn scan_packed(q: &[u64], bits: &[u64], planes: usize, words: usize) -> Neighbour {
    let stride = planes * words;
    let mut best = Neighbour {
        index: 0,
        distance: u64::MAX,
    };
    for (k, s) in bits.chunks_exact(stride).enumerate() {
        let mut d = 0u64;
        for w in 0..words {
            let mut diff = 0u64;
            for p in 0..planes {
                diff |= s[p * words + w] ^ q[p * words + w];
            }
            d += diff.count_ones() as u64;
        }
        if d < best.distance {
            best = Neighbour { index: k, distance: d };
            if d == 0 {
                break;
            }
        }
    }
    best
}

pub fn nearest(index: &NeighbourIndex, state: &Level) -> Result<Neighbour> {
    index.nearest(state)
}

/// Outcome of one extended action.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedRun {
    pub level: Level,
    pub neighbour: Neighbour,
    /// Dataset index of the first executed action.
    pub start: usize,
    pub actions_applied: usize,
}

/// Match `state`, then execute the matched action and the ones after it in
/// its trajectory.
pub fn extended_action_run(index: &NeighbourIndex, state: &Level, cfg: &PolicyConfig) -> Result<ExtendedRun> {
    let neighbour = index.nearest(state)?;
    let mut level = state.clone();
    let (applied, _) = index.apply_from(&mut level, neighbour.index, cfg);
    Ok(ExtendedRun {
        level,
        neighbour,
        start: neighbour.index,
        actions_applied: applied,
    })
}

/// One attempt's walk: repeated extended runs from a single starting level.
///
/// When a query matches the same dataset state as the previous query, the
/// walk resumes after the actions already executed instead of repeating them.
#[derive(Debug, Clone)]
pub struct Walker<'a> {
    index: &'a NeighbourIndex,
    level: Level,
    /// (matched index, next action to execute) from the previous step.
    cursor: Option<(usize, usize)>,
}

/// What one [`Walker::step`] did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkStep {
    pub neighbour: Neighbour,
    /// Dataset range of the executed actions.
    pub start: usize,
    pub end: usize,
    /// Cells whose tile actually changed.
    pub changed: usize,
    /// Neither the level nor the cursor moved, so every later step repeats this one.
    pub stalled: bool,
}

impl<'a> Walker<'a> {
    pub fn new(index: &'a NeighbourIndex, level: Level) -> Self {
        Self {
            index,
            level,
            cursor: None,
        }
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn into_level(self) -> Level {
        self.level
    }

    pub fn step(&mut self, cfg: &PolicyConfig) -> Result<WalkStep> {
        let neighbour = self.index.nearest(&self.level)?;
        let start = match self.cursor {
            Some((anchor, next)) if anchor == neighbour.index && next < self.index.trajectory_end(anchor) => next,
            _ => neighbour.index,
        };
        let (n, changed) = self.index.apply_from(&mut self.level, start, cfg);
        let next = Some((neighbour.index, start + n));
        let stalled = changed == 0 && next == self.cursor;
        self.cursor = next;
        Ok(WalkStep {
            neighbour,
            start,
            end: start + n,
            changed,
            stalled,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    pub level: Level,
    pub fitness: f64,
    pub attempts: usize,
    pub policy_queries: usize,
    pub actions_applied: usize,
    pub wall_clock_seconds: f64,
}

/// Run the policy from random levels until one is acceptable.
///
/// Each attempt walks for at most `max_steps` queries; a stalled walk ends
/// its attempt early since its remaining steps could not change the level.
/// Gives up after `max_restarts` restarts, i.e. `max_restarts + 1` attempts.
pub fn generate_level<P: DomainPlugin>(
    index: &NeighbourIndex,
    domain: &P,
    cfg: &PolicyConfig,
    rng: &mut Rng,
) -> Result<GenerationResult> {
    cfg.validate()?;
    let started = Instant::now();
    let mut best_fitness = f64::NEG_INFINITY;
    let mut queries = 0;
    let mut applied = 0;
    let done = |level: Level, fitness: f64, attempts: usize, queries: usize, applied: usize| GenerationResult {
        level,
        fitness,
        attempts,
        policy_queries: queries,
        actions_applied: applied,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };

    for attempt in 1..=cfg.max_restarts + 1 {
        let level = domain.random_level(rng);
        let fitness = domain.fitness(&level);
        best_fitness = best_fitness.max(fitness);
        if fitness >= cfg.fitness_threshold {
            return Ok(done(level, fitness, attempt, queries, applied));
        }
        let mut walker = Walker::new(index, level);
        for _ in 0..cfg.max_steps {
            let step = walker.step(cfg)?;
            queries += 1;
            applied += step.end - step.start;
            if step.stalled {
                break;
            }
            if step.changed == 0 {
                continue;
            }
            let fitness = domain.fitness(walker.level());
            best_fitness = best_fitness.max(fitness);
            if fitness >= cfg.fitness_threshold {
                return Ok(done(walker.into_level(), fitness, attempt, queries, applied));
            }
        }
    }
    Err(Error::PolicyExhausted {
        attempts: cfg.max_restarts + 1,
        best_fitness,
    })
}

/// `policy.json`: generation settings plus the dataset file they apply to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyArtifact {
    pub domain: String,
    /// Dataset path, relative to the directory holding `policy.json`.
    pub dataset: String,
    pub p: f64,
    pub max_steps: usize,
    pub max_restarts: usize,
    pub threshold: f64,
    #[serde(default)]
    pub extension: ExtensionRule,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub backend: Backend,
}

impl PolicyArtifact {
    pub fn new(domain: &str, dataset: &str, cfg: &PolicyConfig) -> Self {
        Self {
            domain: domain.to_string(),
            dataset: dataset.to_string(),
            p: cfg.p,
            max_steps: cfg.max_steps,
            max_restarts: cfg.max_restarts,
            threshold: cfg.fitness_threshold,
            extension: cfg.extension,
            metric: cfg.metric,
            backend: cfg.backend,
        }
    }

    pub fn config(&self) -> PolicyConfig {
        PolicyConfig {
            p: self.p,
            max_steps: self.max_steps,
            max_restarts: self.max_restarts,
            fitness_threshold: self.threshold,
            extension: self.extension,
            metric: self.metric,
            backend: self.backend,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let artifact: Self = serde_json::from_str(&text)?;
        artifact.config().validate()?;
        Ok(artifact)
    }

    /// Load a policy from either a `policy.json` or a bare dataset file.
    /// A bare dataset gets its domain's default settings.
    pub fn open(path: &Path) -> Result<(DomainKind, PolicyDataset, PolicyConfig)> {
        let mut head = [0u8; 7];
        let n = fs::File::open(path)
            .and_then(|mut f| std::io::Read::read(&mut f, &mut head))
            .map_err(|e| Error::io(path, e))?;
        if &head[..n] == b"PCGDATA" {
            let dataset = PolicyDataset::load(path)?;
            let kind = DomainKind::from_glyphs(&dataset.alphabet().glyphs())
                .ok_or_else(|| Error::CorruptDataset("alphabet matches no domain".into()))?;
            return Ok((kind, dataset, kind.policy_defaults()));
        }
        let artifact = Self::load(path)?;
        let kind: DomainKind = artifact.domain.parse()?;
        let base = path.parent().unwrap_or(Path::new("."));
        let dataset = PolicyDataset::load(&base.join(&artifact.dataset))?;
        if DomainKind::from_glyphs(&dataset.alphabet().glyphs()) != Some(kind) {
            return Err(Error::CorruptDataset(format!("dataset alphabet does not match domain {kind}")));
        }
        Ok((kind, dataset, artifact.config()))
    }
}
