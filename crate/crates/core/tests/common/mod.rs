//! Independent reference implementations for integration tests.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nearest-neighbor steps in `d <= 4` from 3-bit chunks; chunks `>= 2d`
/// are rejected.
pub struct Steps {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
    dirs: u64,
}

impl Steps {
    pub fn new(seed: u64, d: usize) -> Self {
        assert!(d <= 4);
        Steps { rng: ChaCha8Rng::seed_from_u64(seed), word: 0, left: 0, dirs: 2 * d as u64 }
    }

    pub fn step(&mut self, x: &mut [i32]) {
        loop {
            if self.left < 3 {
                self.word = self.rng.next_u64();
                self.left = 64;
            }
            let c = self.word & 7;
            self.word >>= 3;
            self.left -= 3;
            if c < self.dirs {
                x[(c / 2) as usize] += if c.is_multiple_of(2) { 1 } else { -1 };
                return;
            }
        }
    }
}

fn linf(x: &[i32]) -> i32 {
    x.iter().map(|v| v.abs()).max().unwrap_or(0)
}

/// Mean visits to the origin of a 3-d walk from the origin, killed on
/// leaving `B(0, kill)`, plus the far-field term `3/(2π|y|)` at the exit
/// point `y`. Returns the mean and its standard error.
pub fn green_origin_oracle(walks: usize, kill: i32, seed: u64) -> (f64, f64) {
    let mut s = Steps::new(seed, 3);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..walks {
        let mut x = [0i32; 3];
        let mut visits = 1.0;
        loop {
            s.step(&mut x);
            if linf(&x) > kill {
                break;
            }
            if x == [0, 0, 0] {
                visits += 1.0;
            }
        }
        let r = x.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
        let v = visits + 3.0 / (2.0 * std::f64::consts::PI * r);
        sum += v;
        sq += v * v;
    }
    let n = walks as f64;
    let mean = sum / n;
    (mean, ((sq / n - mean * mean) / (n - 1.0)).sqrt())
}

/// Frequency with which a 3-d walk from the origin leaves `B(0, kill)`
/// before returning to `{0,1}³`, with its standard error.
pub fn cube_escape_oracle(trials: usize, kill: i32, seed: u64) -> (f64, f64) {
    let mut s = Steps::new(seed, 3);
    let mut esc = 0usize;
    for _ in 0..trials {
        let mut x = [0i32; 3];
        loop {
            s.step(&mut x);
            if x.iter().all(|v| *v == 0 || *v == 1) {
                break;
            }
            if linf(&x) > kill {
                esc += 1;
                break;
            }
        }
    }
    let p = esc as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Components of the occupied points of `B(0, r)` by breadth-first flood
/// fill over coordinate tuples; `star` adds all `3^d - 1` neighbors.
/// Returns sizes in descending order.
pub fn flood_fill_sizes(points: &HashSet<Vec<i32>>, star: bool) -> Vec<usize> {
    let d = points.iter().next().map_or(0, |p| p.len());
    let offsets: Vec<Vec<i32>> = if star {
        let mut out = vec![vec![]];
        for _ in 0..d {
            out = out
                .into_iter()
                .flat_map(|o: Vec<i32>| {
                    (-1..=1).map(move |v| {
                        let mut o = o.clone();
                        o.push(v);
                        o
                    })
                })
                .collect();
        }
        out.retain(|o| o.iter().any(|v| *v != 0));
        out
    } else {
        (0..d)
            .flat_map(|k| {
                [1, -1].into_iter().map(move |s| {
                    let mut o = vec![0; d];
                    o[k] = s;
                    o
                })
            })
            .collect()
    };
    let mut seen: HashSet<Vec<i32>> = HashSet::new();
    let mut sizes = Vec::new();
    let mut sorted: Vec<&Vec<i32>> = points.iter().collect();
    sorted.sort();
    for p in sorted {
        if !seen.insert(p.clone()) {
            continue;
        }
        let mut q = VecDeque::from([p.clone()]);
        let mut n = 0;
        while let Some(x) = q.pop_front() {
            n += 1;
            for o in &offsets {
                let y: Vec<i32> = x.iter().zip(o).map(|(a, b)| a + b).collect();
                if points.contains(&y) && seen.insert(y.clone()) {
                    q.push_back(y);
                }
            }
        }
        sizes.push(n);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Cut times of `path` by the definition: `n` with `path[0..=n]` disjoint
/// from `path[n+1..]`, for `n < len - guard`.
pub fn cut_times_quadratic(path: &[Vec<i32>], guard: usize) -> Vec<usize> {
    let len = path.len();
    (0..len)
        .filter(|&n| n + guard < len)
        .filter(|&n| path[..=n].iter().all(|a| path[n + 1..].iter().all(|b| a != b)))
        .collect()
}
