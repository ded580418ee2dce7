//! Square mazes: random wall placement, BFS solvability, and the maze fitness.
//!
//! Start is the top-left cell, goal the bottom-right. Glyphs: `.` empty,
//! `#` wall.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{DomainPlugin, Gene};
use crate::level::{Alphabet, Level};
use crate::rng::Rng;

pub const EMPTY: u8 = 0;
pub const WALL: u8 = 1;
pub const GLYPHS: &str = ".#";

pub fn alphabet() -> Arc<Alphabet> {
    Arc::new(Alphabet::new(GLYPHS).expect("static maze alphabet"))
}

/// How the two wall-spread terms are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    /// Share of walls in the left (top) half, used as-is.
    #[default]
    AsWritten,
    /// `1 - 2|ratio - 0.5|`, peaking at an even split.
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeConfig {
    pub size: usize,
    pub wall_count: usize,
    #[serde(default)]
    pub ratio_mode: RatioMode,
}

impl MazeConfig {
    /// `round(0.15 * size^2)` walls.
    pub fn new(size: usize) -> Result<Self> {
        let wall_count = (0.15 * (size * size) as f64).round() as usize;
        Self::with_walls(size, wall_count)
    }

    pub fn with_walls(size: usize, wall_count: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Config(format!("maze size {size} < 2")));
        }
        if wall_count > size * size - 2 {
            return Err(Error::Config(format!(
                "{wall_count} walls do not fit a {size}x{size} maze with free start and goal"
            )));
        }
        Ok(Self {
            size,
            wall_count,
            ratio_mode: RatioMode::AsWritten,
        })
    }
}

/// `wall_count` distinct walls, never on the start or goal cell.
pub fn random_maze(cfg: &MazeConfig, alphabet: &Arc<Alphabet>, rng: &mut Rng) -> Level {
    let d = cfg.size;
    let mut cells = vec![EMPTY; d * d];
    // Candidates are 1..d*d-1, skipping start (0) and goal (d*d-1).
    for i in sample(rng, d * d - 2, cfg.wall_count).into_iter() {
        cells[i + 1] = WALL;
    }
    Level::new(alphabet.clone(), d, d, cells).expect("valid maze cells")
}

fn bfs_parents(level: &Level) -> Option<Vec<usize>> {
    let (w, h) = (level.width(), level.height());
    let cells = level.cells();
    let goal = w * h - 1;
    if cells[0] == WALL || cells[goal] == WALL {
        return None;
    }
    const UNSEEN: usize = usize::MAX;
    let mut parent = vec![UNSEEN; w * h];
    parent[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if i == goal {
            return Some(parent);
        }
        let (x, y) = (i % w, i / w);
        let mut visit = |j: usize| {
            if parent[j] == UNSEEN && cells[j] != WALL {
                parent[j] = i;
                queue.push_back(j);
            }
        };
        if x + 1 < w {
            visit(i + 1);
        }
        if y + 1 < h {
            visit(i + w);
        }
        if x > 0 {
            visit(i - 1);
        }
        if y > 0 {
            visit(i - w);
        }
    }
    None
}

/// Cells on one shortest start-to-goal path, endpoints included.
pub fn shortest_path_cells(level: &Level) -> Option<Vec<(usize, usize)>> {
    let parent = bfs_parents(level)?;
    let w = level.width();
    let mut i = level.cells().len() - 1;
    let mut path = vec![(i % w, i / w)];
    while i != 0 {
        i = parent[i];
        path.push((i % w, i / w));
    }
    path.reverse();
    Some(path)
}

/// Length in cells (endpoints included) of a shortest 4-connected path from
/// the top-left to the bottom-right cell, or `None` when unreachable.
pub fn shortest_path(level: &Level) -> Option<usize> {
    shortest_path_cells(level).map(|p| p.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MazeFitnessBreakdown {
    pub finishable: u8,
    pub ratio_x: f64,
    pub ratio_y: f64,
    pub path_length: usize,
    pub total: f64,
}

pub fn maze_fitness(level: &Level) -> MazeFitnessBreakdown {
    maze_fitness_with(level, RatioMode::AsWritten)
}

pub fn maze_fitness_with(level: &Level, mode: RatioMode) -> MazeFitnessBreakdown {
    let (w, h) = (level.width(), level.height());
    let (half_x, half_y) = (w / 2, h / 2);
    let (mut walls, mut left, mut top) = (0usize, 0usize, 0usize);
    for (i, &c) in level.cells().iter().enumerate() {
        if c == WALL {
            walls += 1;
            left += usize::from(i % w < half_x);
            top += usize::from(i / w < half_y);
        }
    }
    let (mut ratio_x, mut ratio_y) = if walls == 0 {
        (0.5, 0.5)
    } else {
        (left as f64 / walls as f64, top as f64 / walls as f64)
    };
    if mode == RatioMode::Balanced {
        ratio_x = 1.0 - (ratio_x - 0.5).abs() * 2.0;
        ratio_y = 1.0 - (ratio_y - 0.5).abs() * 2.0;
    }
    let path_length = shortest_path(level).unwrap_or(0);
    let finishable = u8::from(path_length > 0);
    let total = 0.7 * finishable as f64 + 0.2 * ratio_x + 0.2 * ratio_y + 0.0001 * path_length as f64;
    MazeFitnessBreakdown {
        finishable,
        ratio_x,
        ratio_y,
        path_length,
        total,
    }
}

/// One wall slot. `None` is a slot with no wall, used to pad levels holding
/// fewer walls than the configured count.
pub type WallUnit = Option<(u16, u16)>;

#[derive(Debug, Clone)]
pub struct MazeDomain {
    cfg: MazeConfig,
    alphabet: Arc<Alphabet>,
}

impl MazeDomain {
    pub fn new(cfg: MazeConfig) -> Self {
        Self {
            cfg,
            alphabet: alphabet(),
        }
    }

    pub fn with_size(size: usize) -> Result<Self> {
        Ok(Self::new(MazeConfig::new(size)?))
    }

    pub fn config(&self) -> &MazeConfig {
        &self.cfg
    }

    fn is_endpoint(&self, x: usize, y: usize) -> bool {
        let d = self.cfg.size;
        (x == 0 && y == 0) || (x == d - 1 && y == d - 1)
    }
}

impl DomainPlugin for MazeDomain {
    type Unit = WallUnit;

    fn name(&self) -> &'static str {
        "maze"
    }

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn random_level(&self, rng: &mut Rng) -> Level {
        random_maze(&self.cfg, &self.alphabet, rng)
    }

    fn fitness(&self, level: &Level) -> f64 {
        maze_fitness_with(level, self.cfg.ratio_mode).total
    }

    /// Walls in row-major order, padded with empty slots to `wall_count`.
    fn gene_encode(&self, level: &Level) -> Gene<WallUnit> {
        let w = level.width();
        let mut units: Vec<WallUnit> = level
            .cells()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == WALL)
            .map(|(i, _)| Some(((i % w) as u16, (i / w) as u16)))
            .collect();
        if units.len() < self.cfg.wall_count {
            units.resize(self.cfg.wall_count, None);
        }
        Gene::new(units)
    }

    fn gene_decode(&self, gene: &Gene<WallUnit>) -> Level {
        let d = self.cfg.size;
        let mut cells = vec![EMPTY; d * d];
        for &(x, y) in gene.units().iter().flatten() {
            cells[y as usize * d + x as usize] = WALL;
        }
        Level::new(self.alphabet.clone(), d, d, cells).expect("valid maze cells")
    }

    /// Move the selected wall to a uniformly chosen empty non-endpoint cell.
    fn mutate_unit(&self, gene: &mut Gene<WallUnit>, position: usize, rng: &mut Rng) {
        let d = self.cfg.size;
        let mut occupied = vec![false; d * d];
        for &(x, y) in gene.units().iter().flatten() {
            occupied[y as usize * d + x as usize] = true;
        }
        let free: Vec<usize> = (0..d * d)
            .filter(|&i| !occupied[i] && !self.is_endpoint(i % d, i / d))
            .collect();
        if free.is_empty() {
            return;
        }
        let i = free[rng.random_range(0..free.len())];
        gene.units_mut()[position] = Some(((i % d) as u16, (i / d) as u16));
    }
}
