//! Side-scrolling platformer levels and a deterministic scripted runner.
//!
//! The runner stands on solid tiles and moves one column to the right per
//! tick. It can step up at most [`STEP_UP`] rows, drop any distance, and jump
//! over at most [`MAX_GAP`] consecutive columns that offer it no footing.
//! Enemies are static: landing with the body on an enemy tile is a loss.
//! Row 0 is the top of the level.

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{DomainPlugin, Gene};
use crate::level::{Alphabet, Level};
use crate::rng::Rng;

pub const AIR: u8 = 0;
pub const SOLID: u8 = 1;
pub const ENEMY: u8 = 2;
pub const COIN: u8 = 3;
pub const POWER_UP: u8 = 4;
pub const GLYPHS: &str = "-XEoP";

pub const WIDTH: usize = 101;
pub const HEIGHT: usize = 16;
pub const STEP_UP: usize = 4;
pub const MAX_GAP: usize = 3;
pub const TICKS_PER_COLUMN: usize = 10;

pub fn alphabet() -> Arc<Alphabet> {
    Arc::new(Alphabet::new(GLYPHS).expect("static platformer alphabet"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformerConfig {
    pub width: usize,
    pub height: usize,
    /// Probability that a random cell is air.
    pub air_bias: f64,
}

impl Default for PlatformerConfig {
    fn default() -> Self {
        Self {
            width: WIDTH,
            height: HEIGHT,
            air_bias: 0.80,
        }
    }
}

impl PlatformerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width != WIDTH || self.height != HEIGHT {
            return Err(Error::Config(format!(
                "platformer levels are {WIDTH}x{HEIGHT}, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.air_bias > 0.0 && self.air_bias <= 1.0) {
            return Err(Error::Config(format!("air_bias {} outside (0, 1]", self.air_bias)));
        }
        Ok(())
    }
}

fn random_tile(air_bias: f64, rng: &mut Rng) -> u8 {
    if rng.random::<f64>() < air_bias {
        AIR
    } else {
        rng.random_range(SOLID..=POWER_UP)
    }
}

fn random_column(cfg: &PlatformerConfig, x: usize, rng: &mut Rng) -> Vec<u8> {
    let mut col: Vec<u8> = (0..cfg.height).map(|_| random_tile(cfg.air_bias, rng)).collect();
    if x < 2 {
        col[cfg.height - 1] = SOLID;
    }
    col
}

/// Cells are air with probability `air_bias`, otherwise uniform over the other
/// four tiles; the bottom cells of columns 0 and 1 are forced solid as a spawn
/// platform. Cells are drawn column by column.
pub fn random_platformer_level(cfg: &PlatformerConfig, alphabet: &Arc<Alphabet>, rng: &mut Rng) -> Level {
    let columns: Vec<Vec<u8>> = (0..cfg.width).map(|x| random_column(cfg, x, rng)).collect();
    from_columns(&columns, cfg.height, alphabet)
}

fn from_columns(columns: &[Vec<u8>], height: usize, alphabet: &Arc<Alphabet>) -> Level {
    let width = columns.len();
    let mut cells = vec![AIR; width * height];
    for (x, col) in columns.iter().enumerate() {
        for (y, &t) in col.iter().enumerate() {
            cells[y * width + x] = t;
        }
    }
    Level::new(alphabet.clone(), width, height, cells).expect("valid platformer cells")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WinState {
    Timeout,
    Loss,
    Win,
}

impl WinState {
    pub fn value(self) -> f64 {
        match self {
            WinState::Timeout => 0.1,
            WinState::Loss => 0.4,
            WinState::Win => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub win_state: WinState,
    pub completion: f64,
    pub power_up_collected: u8,
    pub columns_traversed: usize,
}

struct Column<'a> {
    level: &'a Level,
    x: usize,
}

impl Column<'_> {
    fn tile(&self, y: usize) -> u8 {
        self.level.get(self.x, y)
    }

    fn is_top(&self, y: usize) -> bool {
        self.tile(y) == SOLID && (y == 0 || self.tile(y - 1) != SOLID)
    }

    /// Highest standable surface no more than `STEP_UP` rows above `surface`.
    fn landing(&self, surface: usize) -> Option<usize> {
        let from = surface.saturating_sub(STEP_UP);
        (from..self.level.height()).find(|&y| self.is_top(y))
    }

    /// A solid tile at body height that cannot be stepped onto.
    fn blocks(&self, surface: usize, landing: Option<usize>) -> bool {
        surface >= 1 && self.tile(surface - 1) == SOLID && landing.is_none_or(|s| s >= surface)
    }
}

enum Step {
    Land(usize),
    Gap,
    Blocked,
}

fn step_into(level: &Level, x: usize, surface: usize) -> Step {
    let col = Column { level, x };
    let landing = col.landing(surface);
    if col.blocks(surface, landing) {
        Step::Blocked
    } else {
        landing.map_or(Step::Gap, Step::Land)
    }
}

fn body_tile(level: &Level, x: usize, surface: usize, above: usize) -> Option<u8> {
    surface.checked_sub(1 + above).map(|y| level.get(x, y))
}

/// Run the scripted agent from the left edge. Pure function of the level.
pub fn simulate_agent(level: &Level) -> SimOutcome {
    let width = level.width();
    let outcome = |win_state, traversed: usize, power: bool| SimOutcome {
        win_state,
        completion: traversed as f64 / width as f64,
        power_up_collected: u8::from(power),
        columns_traversed: traversed,
    };

    let spawn = (0..level.height()).find(|&y| level.get(0, y) == SOLID);
    let Some(mut surface) = spawn else {
        return outcome(WinState::Loss, 0, false);
    };
    let mut power = false;
    let mut visit = |x: usize, s: usize| -> bool {
        power |= body_tile(level, x, s, 0) == Some(POWER_UP) || body_tile(level, x, s, 1) == Some(POWER_UP);
        body_tile(level, x, s, 0) != Some(ENEMY)
    };
    if !visit(0, surface) {
        return outcome(WinState::Loss, 0, power);
    }

    let budget = TICKS_PER_COLUMN * width;
    let mut ticks = 0;
    let mut x = 0;
    while x + 1 < width {
        if ticks >= budget {
            return outcome(WinState::Timeout, x + 1, power);
        }
        let mut landed = None;
        for reach in 1..=MAX_GAP + 1 {
            let nx = x + reach;
            if nx >= width {
                break;
            }
            match step_into(level, nx, surface) {
                Step::Land(s) => {
                    landed = Some((nx, s));
                    break;
                }
                Step::Gap => continue,
                Step::Blocked => break,
            }
        }
        let Some((nx, s)) = landed else {
            return outcome(WinState::Loss, x + 1, power);
        };
        ticks += nx - x;
        if !visit(nx, s) {
            return outcome(WinState::Loss, x + 1, power);
        }
        x = nx;
        surface = s;
    }
    outcome(WinState::Win, width, power)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformerFitnessBreakdown {
    pub win_value: f64,
    pub completion: f64,
    pub mario_state: u8,
    pub total: f64,
}

pub fn platformer_fitness(level: &Level) -> PlatformerFitnessBreakdown {
    let sim = simulate_agent(level);
    let win_value = sim.win_state.value();
    PlatformerFitnessBreakdown {
        win_value,
        completion: sim.completion,
        mario_state: sim.power_up_collected,
        total: win_value + 2.0 * sim.completion + 0.5 * sim.power_up_collected as f64,
    }
}

/// Largest score a level can reach without a win: loss one column short of
/// the end with a power-up.
pub fn max_non_win_fitness(width: usize) -> f64 {
    WinState::Loss.value() + 2.0 * (width - 1) as f64 / width as f64 + 0.5
}

#[derive(Debug, Clone)]
pub struct PlatformerDomain {
    cfg: PlatformerConfig,
    alphabet: Arc<Alphabet>,
}

impl PlatformerDomain {
    pub fn new(cfg: PlatformerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            alphabet: alphabet(),
        })
    }

    pub fn config(&self) -> &PlatformerConfig {
        &self.cfg
    }
}

impl Default for PlatformerDomain {
    fn default() -> Self {
        Self::new(PlatformerConfig::default()).expect("default platformer config")
    }
}

/// One column, top to bottom.
pub type ColumnUnit = Vec<u8>;

impl DomainPlugin for PlatformerDomain {
    type Unit = ColumnUnit;

    fn name(&self) -> &'static str {
        "platformer"
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn random_level(&self, rng: &mut Rng) -> Level {
        random_platformer_level(&self.cfg, &self.alphabet, rng)
    }

    fn fitness(&self, level: &Level) -> f64 {
        platformer_fitness(level).total
    }

    fn gene_encode(&self, level: &Level) -> Gene<ColumnUnit> {
        Gene::new(
            (0..level.width())
                .map(|x| (0..level.height()).map(|y| level.get(x, y)).collect())
                .collect(),
        )
    }

    fn gene_decode(&self, gene: &Gene<ColumnUnit>) -> Level {
        from_columns(gene.units(), self.cfg.height, &self.alphabet)
    }

    /// Redraw the whole column from the random-level distribution.
    fn mutate_unit(&self, gene: &mut Gene<ColumnUnit>, position: usize, rng: &mut Rng) {
        gene.units_mut()[position] = random_column(&self.cfg, position, rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn flat() -> Vec<Vec<u8>> {
        (0..WIDTH)
            .map(|_| {
                let mut c = vec![AIR; HEIGHT];
                c[HEIGHT - 1] = SOLID;
                c
            })
            .collect()
    }

    fn build(cols: &[Vec<u8>]) -> Level {
        from_columns(cols, HEIGHT, &alphabet())
    }

    #[test]
    fn flat_level_wins() {
        let out = simulate_agent(&build(&flat()));
        assert_eq!(out.win_state, WinState::Win);
        assert_eq!(out.completion, 1.0);
        assert_eq!(out.power_up_collected, 0);
        assert_eq!(platformer_fitness(&build(&flat())).total, 3.0);
    }

    #[test]
    fn power_up_on_path_scores_three_and_a_half() {
        let mut cols = flat();
        cols[30][HEIGHT - 2] = POWER_UP;
        let f = platformer_fitness(&build(&cols));
        assert_eq!(f.mario_state, 1);
        assert_eq!(f.total, 3.5);
        // Two rows above the body is out of reach.
        let mut cols = flat();
        cols[30][HEIGHT - 4] = POWER_UP;
        assert_eq!(platformer_fitness(&build(&cols)).mario_state, 0);
    }

    #[test]
    fn six_high_wall_stops_at_half() {
        let mut cols = flat();
        for y in HEIGHT - 6..HEIGHT {
            cols[50][y] = SOLID;
        }
        let out = simulate_agent(&build(&cols));
        assert_eq!(out.win_state, WinState::Loss);
        assert_eq!(out.columns_traversed, 50);
        let f = platformer_fitness(&build(&cols));
        assert!((f.total - (0.4 + 2.0 * 50.0 / 101.0)).abs() < 1e-12);
        assert!((f.total - 1.390).abs() < 1e-3);
        // Removing the wall only helps.
        assert!(platformer_fitness(&build(&flat())).total > f.total);
    }

    #[test]
    fn five_high_wall_is_climbed() {
        let mut cols = flat();
        for y in HEIGHT - 5..HEIGHT {
            cols[50][y] = SOLID;
        }
        assert_eq!(simulate_agent(&build(&cols)).win_state, WinState::Win);
    }

    #[test]
    fn gap_limit_is_three_columns() {
        let mut cols = flat();
        for c in &mut cols[50..53] {
            c[HEIGHT - 1] = AIR;
        }
        assert_eq!(simulate_agent(&build(&cols)).win_state, WinState::Win);
        cols[53][HEIGHT - 1] = AIR;
        let out = simulate_agent(&build(&cols));
        assert_eq!(out.win_state, WinState::Loss);
        assert_eq!(out.columns_traversed, 50);
    }

    #[test]
    fn enemy_at_body_height_kills() {
        let mut cols = flat();
        cols[10][HEIGHT - 2] = ENEMY;
        let out = simulate_agent(&build(&cols));
        assert_eq!(out.win_state, WinState::Loss);
        assert_eq!(out.columns_traversed, 10);
        // An enemy inside a gap that is jumped over is harmless.
        let mut cols = flat();
        cols[10][HEIGHT - 1] = AIR;
        cols[10][HEIGHT - 2] = ENEMY;
        assert_eq!(simulate_agent(&build(&cols)).win_state, WinState::Win);
    }

    #[test]
    fn no_spawn_ground_is_instant_loss() {
        let mut cols = flat();
        cols[0][HEIGHT - 1] = AIR;
        let out = simulate_agent(&build(&cols));
        assert_eq!((out.win_state, out.columns_traversed), (WinState::Loss, 0));
    }

    #[test]
    fn threshold_bound_below_three() {
        let bound = max_non_win_fitness(WIDTH);
        assert!((bound - (0.9 + 200.0 / 101.0)).abs() < 1e-12);
        assert!((bound - 2.8802).abs() < 1e-4);
        assert!(bound < 3.0);
    }

    #[test]
    fn random_levels_have_spawn_platform() {
        let cfg = PlatformerConfig {
            air_bias: 1.0,
            ..PlatformerConfig::default()
        };
        let l = random_platformer_level(&cfg, &alphabet(), &mut seeded(1));
        assert_eq!((l.width(), l.height()), (101, 16));
        let solid: Vec<usize> = l
            .cells()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != AIR)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(solid, vec![15 * 101, 15 * 101 + 1]);
    }

    #[test]
    fn non_air_count_matches_bias() {
        // 1614 free cells per level, non-air with p = 0.2.
        let cfg = PlatformerConfig::default();
        let a = alphabet();
        let (n, p) = (1614.0, 0.2);
        let (mean, sd) = (n * p, (n * p * (1.0f64 - p)).sqrt());
        for seed in 0..100 {
            let l = random_platformer_level(&cfg, &a, &mut seeded(seed));
            let free_non_air = l.cells().iter().filter(|&&c| c != AIR).count() as f64 - 2.0;
            assert!((free_non_air - mean).abs() <= 4.0 * sd, "seed {seed}: {free_non_air}");
        }
    }

    #[test]
    fn gene_round_trip_and_column_mutation() {
        let d = PlatformerDomain::default();
        let mut rng = seeded(9);
        let l = d.random_level(&mut rng);
        let mut g = d.gene_encode(&l);
        assert_eq!(g.len(), 101);
        assert_eq!(d.gene_decode(&g), l);
        d.mutate_unit(&mut g, 40, &mut rng);
        let m = d.gene_decode(&g);
        for x in (0..101).filter(|&x| x != 40) {
            for y in 0..16 {
                assert_eq!(m.get(x, y), l.get(x, y));
            }
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let d = PlatformerDomain::default();
        let l = d.random_level(&mut seeded(2));
        let first = simulate_agent(&l);
        assert!((0..100).all(|_| simulate_agent(&l) == first));
    }
}
