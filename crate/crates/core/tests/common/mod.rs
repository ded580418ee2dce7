//! Independent reference implementations used as test oracles. None of these
//! call into the library's algorithms; they work on raw cell vectors.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::index::sample;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha20Rng;

use pcgbc::{maze, Level};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Maze of side `d` with `walls` walls, none on the two corners.
pub fn maze_level(d: usize, walls: usize, r: &mut ChaCha20Rng) -> Level {
    let mut cells = vec![0u8; d * d];
    for i in sample(r, d * d - 2, walls) {
        cells[i + 1] = 1;
    }
    Level::new(maze::alphabet(), d, d, cells).unwrap()
}

/// Uniform random level over `tiles` tile ids.
pub fn uniform_cells(n: usize, tiles: u8, r: &mut ChaCha20Rng) -> Vec<u8> {
    (0..n).map(|_| r.random_range(0..tiles)).collect()
}

/// Dijkstra with unit edge weights; path length in cells, endpoints included.
pub fn dijkstra_len(cells: &[u8], d: usize) -> Option<usize> {
    let goal = d * d - 1;
    if cells[0] != 0 || cells[goal] != 0 {
        return None;
    }
    let mut dist = vec![usize::MAX; d * d];
    let mut heap = BinaryHeap::new();
    dist[0] = 1;
    heap.push(Reverse((1usize, 0usize)));
    while let Some(Reverse((du, u))) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        let (x, y) = ((u % d) as isize, (u / d) as isize);
        for (dx, dy) in [(0, -1), (-1, 0), (1, 0), (0, 1)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= d as isize || ny >= d as isize {
                continue;
            }
            let v = ny as usize * d + nx as usize;
            if cells[v] == 0 && du + 1 < dist[v] {
                dist[v] = du + 1;
                heap.push(Reverse((du + 1, v)));
            }
        }
    }
    (dist[goal] != usize::MAX).then_some(dist[goal])
}

/// Maze fitness computed from scratch: 0.7 F + 0.2 Rx + 0.2 Ry + 0.0001 L.
pub fn maze_fitness_oracle(cells: &[u8], d: usize) -> f64 {
    let half = d / 2;
    let mut total = 0usize;
    let mut left = 0usize;
    let mut top = 0usize;
    for y in 0..d {
        for x in 0..d {
            if cells[y * d + x] == 1 {
                total += 1;
                left += usize::from(x < half);
                top += usize::from(y < half);
            }
        }
    }
    let (rx, ry) = if total == 0 {
        (0.5, 0.5)
    } else {
        (left as f64 / total as f64, top as f64 / total as f64)
    };
    let path = dijkstra_len(cells, d);
    let finishable = if path.is_some() { 1.0 } else { 0.0 };
    0.7 * finishable + 0.2 * rx + 0.2 * ry + 0.0001 * path.unwrap_or(0) as f64
}

/// Linear scan: (first index with the smallest distance, distance).
pub fn brute_nearest(states: &[Vec<u8>], query: &[u8], squared: bool) -> (usize, u64) {
    let mut best = (0, u64::MAX);
    for (k, s) in states.iter().enumerate() {
        let d: u64 = s
            .iter()
            .zip(query)
            .map(|(&a, &b)| {
                let diff = (a as i64 - b as i64).unsigned_abs();
                if squared {
                    diff * diff
                } else {
                    u64::from(diff != 0)
                }
            })
            .sum();
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}
