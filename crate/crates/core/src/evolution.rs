//! Generic genetic algorithm over fixed-length genes.
//!
//! A generation is: keep the elites, fill the remaining slots by roulette
//! selection from the child list, k-point crossover, mutation, re-evaluation.
//! The run stops once a large enough share of the child list clears the
//! fitness threshold, or at `max_iterations`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::level::{Alphabet, Level};
use crate::rng::{derive_rng, Rng};

/// A level domain the GA, the policy, and the bench harness can drive.
pub trait DomainPlugin: Send + Sync {
    type Unit: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn name(&self) -> &'static str;
    fn alphabet(&self) -> &Arc<Alphabet>;
    fn random_level(&self, rng: &mut Rng) -> Level;
    /// Pure: the same level always scores the same.
    fn fitness(&self, level: &Level) -> f64;
    fn gene_encode(&self, level: &Level) -> Gene<Self::Unit>;
    fn gene_decode(&self, gene: &Gene<Self::Unit>) -> Level;
    /// Replace the unit at `position`.
    fn mutate_unit(&self, gene: &mut Gene<Self::Unit>, position: usize, rng: &mut Rng);
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gene<U> {
    units: Vec<U>,
}

impl<U> Gene<U> {
    pub fn new(units: Vec<U>) -> Self {
        Self { units }
    }

    pub fn units(&self) -> &[U] {
        &self.units
    }

    pub fn units_mut(&mut self) -> &mut [U] {
        &mut self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub child_list_size: usize,
    pub crossover_points: usize,
    pub mutation_rate: f64,
    pub max_iterations: usize,
    pub fitness_threshold: f64,
    pub acceptable_fraction: f64,
    pub elitism_count: usize,
    pub seed: u64,
    /// Evaluate a generation's fitness on the rayon pool.
    #[serde(default)]
    pub parallel: bool,
}

impl GaConfig {
    pub fn maze_defaults() -> Self {
        Self {
            population_size: 50,
            child_list_size: 20,
            crossover_points: 50,
            mutation_rate: 0.05,
            max_iterations: 1000,
            fitness_threshold: 1.0,
            acceptable_fraction: 1.0,
            elitism_count: 5,
            seed: 0,
            parallel: false,
        }
    }

    pub fn platformer_defaults() -> Self {
        Self {
            population_size: 100,
            child_list_size: 20,
            crossover_points: 101,
            mutation_rate: 0.05,
            max_iterations: 1000,
            fitness_threshold: 3.0,
            acceptable_fraction: 1.0,
            elitism_count: 10,
            seed: 0,
            parallel: false,
        }
    }

    /// 10% of the population, at least one.
    pub fn default_elitism(population_size: usize) -> usize {
        ((population_size as f64 * 0.1).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.population_size < 2 {
            return fail(format!("population_size {} < 2", self.population_size));
        }
        if self.child_list_size == 0 || self.child_list_size > self.population_size {
            return fail(format!(
                "child_list_size {} must be in 1..={}",
                self.child_list_size, self.population_size
            ));
        }
        if self.elitism_count >= self.population_size {
            return fail(format!(
                "elitism_count {} must be below population_size {}",
                self.elitism_count, self.population_size
            ));
        }
        if self.crossover_points == 0 {
            return fail("crossover_points must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return fail(format!("mutation_rate {} outside [0, 1]", self.mutation_rate));
        }
        if !(self.acceptable_fraction > 0.0 && self.acceptable_fraction <= 1.0) {
            return fail(format!(
                "acceptable_fraction {} outside (0, 1]",
                self.acceptable_fraction
            ));
        }
        if !self.fitness_threshold.is_finite() {
            return fail("fitness_threshold must be finite".into());
        }
        Ok(())
    }

    /// Acceptable child-list members needed to stop.
    pub fn required_acceptable(&self) -> usize {
        let need = (self.acceptable_fraction * self.child_list_size as f64 - 1e-9).ceil();
        (need.max(1.0) as usize).min(self.child_list_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member<U> {
    pub gene: Gene<U>,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population<U> {
    pub members: Vec<Member<U>>,
    pub generation: usize,
}

impl<U> Population<U> {
    /// Stable, so equal fitness keeps insertion order.
    pub fn sort(&mut self) {
        self.members
            .sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    }

    pub fn best_fitness(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.fitness)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn child_list(&self, size: usize) -> &[Member<U>] {
        &self.members[..size.min(self.members.len())]
    }
}

/// Swap alternating segments between the given sorted interior cut positions.
pub fn crossover_at<U: Clone>(a: &Gene<U>, b: &Gene<U>, cuts: &[usize]) -> Result<(Gene<U>, Gene<U>)> {
    if a.len() != b.len() {
        return Err(Error::Config(format!(
            "crossover of genes with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) || cuts.iter().any(|&c| c == 0 || c >= a.len()) {
        return Err(Error::Config(format!("invalid cut positions {cuts:?}")));
    }
    let mut first = Vec::with_capacity(a.len());
    let mut second = Vec::with_capacity(a.len());
    let mut swap = false;
    let mut cut = cuts.iter().peekable();
    for i in 0..a.len() {
        if cut.peek() == Some(&&i) {
            swap = !swap;
            cut.next();
        }
        let (x, y) = if swap { (&b.units[i], &a.units[i]) } else { (&a.units[i], &b.units[i]) };
        first.push(x.clone());
        second.push(y.clone());
    }
    Ok((Gene::new(first), Gene::new(second)))
}

/// k distinct cuts drawn uniformly from the interior boundaries `1..len`.
pub fn k_point_crossover<U: Clone>(
    a: &Gene<U>,
    b: &Gene<U>,
    k: usize,
    rng: &mut Rng,
) -> Result<(Gene<U>, Gene<U>)> {
    if a.len() != b.len() {
        return Err(Error::Config(format!(
            "crossover of genes with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if k == 0 || k >= a.len() {
        return Err(Error::Config(format!(
            "{k} crossover points for a gene of length {}",
            a.len()
        )));
    }
    let mut cuts: Vec<usize> = sample(rng, a.len() - 1, k).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    crossover_at(a, b, &cuts)
}

/// Units touched by one mutation: `ceil(rate * len)`.
pub fn mutation_count(rate: f64, len: usize) -> usize {
    ((rate * len as f64 - 1e-9).ceil().max(0.0) as usize).min(len)
}

pub fn mutate<P: DomainPlugin>(gene: &Gene<P::Unit>, rate: f64, plugin: &P, rng: &mut Rng) -> Gene<P::Unit> {
    let mut out = gene.clone();
    let count = mutation_count(rate, gene.len());
    if count == 0 {
        return out;
    }
    for pos in sample(rng, gene.len(), count).into_iter() {
        plugin.mutate_unit(&mut out, pos, rng);
    }
    out
}

fn roulette<U>(pool: &[Member<U>], exclude: Option<usize>, rng: &mut Rng) -> usize {
    let weight = |i: usize, m: &Member<U>| {
        if Some(i) == exclude {
            0.0
        } else {
            m.fitness.max(0.0)
        }
    };
    let total: f64 = pool.iter().enumerate().map(|(i, m)| weight(i, m)).sum();
    if total <= 0.0 || !total.is_finite() {
        let eligible: Vec<usize> = (0..pool.len()).filter(|&i| Some(i) != exclude).collect();
        return eligible[rng.random_range(0..eligible.len())];
    }
    let mut r = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, m) in pool.iter().enumerate() {
        let w = weight(i, m);
        if w <= 0.0 {
            continue;
        }
        last = i;
        if r < w {
            return i;
        }
        r -= w;
    }
    last
}

fn evaluate<P: DomainPlugin>(genes: Vec<Gene<P::Unit>>, plugin: &P, parallel: bool) -> Vec<Member<P::Unit>> {
    let score = |gene: Gene<P::Unit>| {
        let fitness = plugin.fitness(&plugin.gene_decode(&gene));
        Member { gene, fitness }
    };
    if parallel {
        genes.into_par_iter().map(score).collect()
    } else {
        genes.into_iter().map(score).collect()
    }
}

/// Breed the next generation from a sorted population.
///
/// Pair `j` of generation `g` draws from its own stream `(seed, g, j)`, so the
/// result is independent of evaluation order.
pub fn step_generation<P: DomainPlugin>(pop: &Population<P::Unit>, cfg: &GaConfig, plugin: &P) -> Population<P::Unit> {
    let size = pop.members.len();
    let elites = cfg.elitism_count.min(size);
    let slots = size - elites;
    let pool = pop.child_list(cfg.child_list_size);

    let mut genes = Vec::with_capacity(slots + 1);
    let mut pair = 0u64;
    while genes.len() < slots {
        let mut rng = derive_rng(cfg.seed, "breed", &[pop.generation as u64, pair]);
        pair += 1;
        let i = roulette(pool, None, &mut rng);
        let j = if pool.len() > 1 { roulette(pool, Some(i), &mut rng) } else { i };
        let (a, b) = (&pool[i].gene, &pool[j].gene);
        let k = cfg.crossover_points.min(a.len().saturating_sub(1));
        let (c1, c2) = if k == 0 {
            (a.clone(), b.clone())
        } else {
            k_point_crossover(a, b, k, &mut rng).expect("parents share one gene length")
        };
        genes.push(mutate(&c1, cfg.mutation_rate, plugin, &mut rng));
        genes.push(mutate(&c2, cfg.mutation_rate, plugin, &mut rng));
    }
    genes.truncate(slots);

    let mut members: Vec<Member<P::Unit>> = pop.members[..elites].to_vec();
    members.extend(evaluate(genes, plugin, cfg.parallel));
    let mut next = Population {
        members,
        generation: pop.generation + 1,
    };
    next.sort();
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    AcceptableFraction,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaRunResult {
    pub domain: String,
    pub config: GaConfig,
    pub initial_levels: Vec<Level>,
    pub final_levels: Vec<Level>,
    pub final_fitness: Vec<f64>,
    pub generations_used: usize,
    pub best_fitness_history: Vec<f64>,
    pub termination: Termination,
    pub wall_clock_seconds: f64,
    pub seed: u64,
}

fn initial_population<P: DomainPlugin>(cfg: &GaConfig, plugin: &P) -> (Vec<Level>, Population<P::Unit>) {
    let levels: Vec<Level> = (0..cfg.population_size)
        .map(|i| plugin.random_level(&mut derive_rng(cfg.seed, "initial", &[i as u64])))
        .collect();
    let genes = levels.iter().map(|l| plugin.gene_encode(l)).collect();
    let mut pop = Population {
        members: evaluate(genes, plugin, cfg.parallel),
        generation: 0,
    };
    pop.sort();
    (levels, pop)
}

fn acceptable_in_child_list<U>(pop: &Population<U>, cfg: &GaConfig) -> usize {
    pop.child_list(cfg.child_list_size)
        .iter()
        .filter(|m| m.fitness >= cfg.fitness_threshold)
        .count()
}

/// Evolve until the child list is acceptable enough or `max_iterations`.
///
/// The final levels are the acceptable members of the last child list. A run
/// that ends with none is an error.
pub fn run_ga<P: DomainPlugin>(cfg: &GaConfig, plugin: &P) -> Result<GaRunResult> {
    cfg.validate()?;
    let started = Instant::now();
    let need = cfg.required_acceptable();

    let (initial_levels, mut pop) = initial_population(cfg, plugin);
    let mut history = vec![pop.best_fitness()];
    let termination = loop {
        if acceptable_in_child_list(&pop, cfg) >= need {
            break Termination::AcceptableFraction;
        }
        if pop.generation >= cfg.max_iterations {
            break Termination::MaxIterations;
        }
        pop = step_generation(&pop, cfg, plugin);
        history.push(pop.best_fitness());
    };

    let (final_levels, final_fitness): (Vec<Level>, Vec<f64>) = pop
        .child_list(cfg.child_list_size)
        .iter()
        .filter(|m| m.fitness >= cfg.fitness_threshold)
        .map(|m| (plugin.gene_decode(&m.gene), m.fitness))
        .unzip();
    if final_levels.is_empty() {
        return Err(Error::GaFailed {
            generations: pop.generation,
            best_fitness: pop.best_fitness(),
        });
    }

    Ok(GaRunResult {
        domain: plugin.name().to_string(),
        config: cfg.clone(),
        initial_levels,
        final_levels,
        final_fitness,
        generations_used: pop.generation,
        best_fitness_history: history,
        termination,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        seed: cfg.seed,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    domain: String,
    alphabet: String,
    width: usize,
    height: usize,
    seed: u64,
    generations_used: usize,
    termination: Termination,
    wall_clock_seconds: f64,
    initial_count: usize,
    final_count: usize,
    final_fitness: Vec<f64>,
    best_fitness_history: Vec<f64>,
    config: GaConfig,
}

fn level_file(dir: &Path, i: usize) -> std::path::PathBuf {
    dir.join(format!("{i:03}.lvl"))
}

fn write_levels(dir: &Path, levels: &[Level]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, l) in levels.iter().enumerate() {
        let path = level_file(dir, i);
        fs::write(&path, l.to_text()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn read_levels(dir: &Path, count: usize, alphabet: &Arc<Alphabet>) -> Result<Vec<Level>> {
    (0..count)
        .map(|i| {
            let path = level_file(dir, i);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Level::parse(&text, alphabet.clone())
        })
        .collect()
}

impl GaRunResult {
    /// Write `initial/NNN.lvl`, `final/NNN.lvl` and `run.json` under `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let first = self
            .initial_levels
            .first()
            .or(self.final_levels.first())
            .ok_or_else(|| Error::Empty("run has no levels".into()))?;
        write_levels(&dir.join("initial"), &self.initial_levels)?;
        write_levels(&dir.join("final"), &self.final_levels)?;
        let manifest = RunManifest {
            domain: self.domain.clone(),
            alphabet: first.alphabet().glyphs(),
            width: first.width(),
            height: first.height(),
            seed: self.seed,
            generations_used: self.generations_used,
            termination: self.termination,
            wall_clock_seconds: self.wall_clock_seconds,
            initial_count: self.initial_levels.len(),
            final_count: self.final_levels.len(),
            final_fitness: self.final_fitness.clone(),
            best_fitness_history: self.best_fitness_history.clone(),
            config: self.config.clone(),
        };
        let path = dir.join("run.json");
        let json = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("run.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: RunManifest = serde_json::from_str(&text)?;
        let alphabet = Arc::new(Alphabet::new(&m.alphabet)?);
        let initial_levels = read_levels(&dir.join("initial"), m.initial_count, &alphabet)?;
        let final_levels = read_levels(&dir.join("final"), m.final_count, &alphabet)?;
        if let Some(bad) = initial_levels
            .iter()
            .chain(&final_levels)
            .find(|l| l.width() != m.width || l.height() != m.height)
        {
            return Err(Error::ShapeMismatch {
                left_width: m.width,
                left_height: m.height,
                right_width: bad.width(),
                right_height: bad.height(),
            });
        }
        Ok(Self {
            domain: m.domain,
            config: m.config,
            initial_levels,
            final_levels,
            final_fitness: m.final_fitness,
            generations_used: m.generations_used,
            best_fitness_history: m.best_fitness_history,
            termination: m.termination,
            wall_clock_seconds: m.wall_clock_seconds,
            seed: m.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    /// Bit-string domain: fitness is the number of ones.
    struct Bits {
        len: usize,
        alphabet: Arc<Alphabet>,
        constant: Option<f64>,
    }

    impl Bits {
        fn new(len: usize) -> Self {
            Self {
                len,
                alphabet: Arc::new(Alphabet::new("01").unwrap()),
                constant: None,
            }
        }
    }

    impl DomainPlugin for Bits {
        type Unit = u8;
        fn name(&self) -> &'static str {
            "bits"
        }
        fn alphabet(&self) -> &Arc<Alphabet> {
            &self.alphabet
        }
        fn random_level(&self, rng: &mut Rng) -> Level {
            let cells = (0..self.len).map(|_| rng.random_range(0..2u8)).collect();
            Level::new(self.alphabet.clone(), self.len, 1, cells).unwrap()
        }
        fn fitness(&self, level: &Level) -> f64 {
            self.constant
                .unwrap_or_else(|| level.cells().iter().map(|&c| c as f64).sum())
        }
        fn gene_encode(&self, level: &Level) -> Gene<u8> {
            Gene::new(level.cells().to_vec())
        }
        fn gene_decode(&self, gene: &Gene<u8>) -> Level {
            Level::new(self.alphabet.clone(), self.len, 1, gene.units().to_vec()).unwrap()
        }
        fn mutate_unit(&self, gene: &mut Gene<u8>, position: usize, _rng: &mut Rng) {
            gene.units_mut()[position] ^= 1;
        }
    }

    #[test]
    fn fixed_cut_crossover() {
        let a = Gene::new(vec![1, 1, 1, 1]);
        let b = Gene::new(vec![0, 0, 0, 0]);
        let (c1, c2) = crossover_at(&a, &b, &[1, 3]).unwrap();
        assert_eq!(c1.units(), &[1, 0, 0, 1]);
        assert_eq!(c2.units(), &[0, 1, 1, 0]);
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let a = Gene::new(vec![3, 1, 4, 1, 5, 9]);
        let (c1, c2) = k_point_crossover(&a, &a, 3, &mut seeded(1)).unwrap();
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }

    #[test]
    fn crossover_rejects_bad_arguments() {
        let a = Gene::new(vec![0u8; 4]);
        let b = Gene::new(vec![0u8; 5]);
        let mut rng = seeded(0);
        assert!(k_point_crossover(&a, &b, 1, &mut rng).is_err());
        assert!(k_point_crossover(&a, &a, 0, &mut rng).is_err());
        assert!(k_point_crossover(&a, &a, 4, &mut rng).is_err());
        assert!(k_point_crossover(&a, &a, 3, &mut rng).is_ok());
    }

    #[test]
    fn mutation_counts() {
        assert_eq!(mutation_count(0.0, 100), 0);
        assert_eq!(mutation_count(1.0, 100), 100);
        assert_eq!(mutation_count(0.05, 100), 5);
        assert_eq!(mutation_count(0.05, 15), 1);
        assert_eq!(mutation_count(0.05, 101), 6);
        assert_eq!(mutation_count(0.05, 20), 1);
    }

    #[test]
    fn mutate_touches_exact_count() {
        let plugin = Bits::new(100);
        let g = Gene::new(vec![0u8; 100]);
        let mut rng = seeded(3);
        assert_eq!(mutate(&g, 0.0, &plugin, &mut rng), g);
        let m = mutate(&g, 0.05, &plugin, &mut rng);
        assert_eq!(m.units().iter().filter(|&&u| u == 1).count(), 5);
        // Every position flipped exactly once.
        let all = mutate(&g, 1.0, &plugin, &mut rng);
        assert!(all.units().iter().all(|&u| u == 1));
    }

    #[test]
    fn config_guards() {
        let mut cfg = GaConfig::maze_defaults();
        assert!(cfg.validate().is_ok());
        cfg.elitism_count = cfg.population_size;
        assert!(cfg.validate().is_err());
        let mut cfg = GaConfig::maze_defaults();
        cfg.child_list_size = 51;
        assert!(cfg.validate().is_err());
        let mut cfg = GaConfig::maze_defaults();
        cfg.acceptable_fraction = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = GaConfig::maze_defaults();
        cfg.crossover_points = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn required_acceptable_rounds_up() {
        let mut cfg = GaConfig::maze_defaults();
        assert_eq!(cfg.required_acceptable(), 20);
        cfg.acceptable_fraction = 0.5;
        assert_eq!(cfg.required_acceptable(), 10);
        cfg.acceptable_fraction = 0.05;
        assert_eq!(cfg.required_acceptable(), 1);
        cfg.acceptable_fraction = 0.01;
        assert_eq!(cfg.required_acceptable(), 1);
    }

    #[test]
    fn constant_acceptable_fitness_stops_at_generation_zero() {
        let mut plugin = Bits::new(8);
        plugin.constant = Some(5.0);
        let cfg = GaConfig {
            population_size: 10,
            child_list_size: 4,
            crossover_points: 2,
            fitness_threshold: 1.0,
            elitism_count: 1,
            ..GaConfig::maze_defaults()
        };
        let run = run_ga(&cfg, &plugin).unwrap();
        assert_eq!(run.generations_used, 0);
        assert_eq!(run.initial_levels.len(), 10);
        assert_eq!(run.final_levels.len(), 4);
    }

    #[test]
    fn unreachable_threshold_fails_explicitly() {
        let plugin = Bits::new(8);
        let cfg = GaConfig {
            population_size: 10,
            child_list_size: 4,
            crossover_points: 2,
            fitness_threshold: 100.0,
            max_iterations: 5,
            elitism_count: 1,
            ..GaConfig::maze_defaults()
        };
        match run_ga(&cfg, &plugin) {
            Err(Error::GaFailed { generations, .. }) => assert_eq!(generations, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn onemax_converges_with_monotone_best() {
        let plugin = Bits::new(32);
        let cfg = GaConfig {
            population_size: 30,
            child_list_size: 10,
            crossover_points: 2,
            fitness_threshold: 30.0,
            acceptable_fraction: 0.5,
            elitism_count: 3,
            seed: 11,
            ..GaConfig::maze_defaults()
        };
        let run = run_ga(&cfg, &plugin).unwrap();
        assert_eq!(run.termination, Termination::AcceptableFraction);
        assert!(run.final_levels.len() >= 5);
        assert!(run.best_fitness_history.windows(2).all(|w| w[1] >= w[0]));
        let again = run_ga(&cfg, &plugin).unwrap();
        assert_eq!(run.final_levels, again.final_levels);
        assert_eq!(run.generations_used, again.generations_used);
    }

    #[test]
    fn converged_population_without_mutation_is_fixed_point() {
        let plugin = Bits::new(6);
        let gene = Gene::new(vec![1, 0, 1, 1, 0, 1]);
        let fitness = plugin.fitness(&plugin.gene_decode(&gene));
        let pop = Population {
            members: vec![Member { gene, fitness }; 8],
            generation: 3,
        };
        let cfg = GaConfig {
            population_size: 8,
            child_list_size: 4,
            crossover_points: 3,
            mutation_rate: 0.0,
            elitism_count: 1,
            ..GaConfig::maze_defaults()
        };
        let next = step_generation(&pop, &cfg, &plugin);
        assert_eq!(next.members, pop.members);
        assert_eq!(next.generation, 4);
    }

    #[test]
    fn parallel_evaluation_does_not_change_results() {
        let plugin = Bits::new(24);
        let cfg = GaConfig {
            population_size: 20,
            child_list_size: 6,
            crossover_points: 3,
            fitness_threshold: 22.0,
            elitism_count: 2,
            seed: 5,
            ..GaConfig::maze_defaults()
        };
        let a = run_ga(&cfg, &plugin).unwrap();
        let b = run_ga(&GaConfig { parallel: true, ..cfg }, &plugin).unwrap();
        assert_eq!(a.final_levels, b.final_levels);
        assert_eq!(a.generations_used, b.generations_used);
    }
}
