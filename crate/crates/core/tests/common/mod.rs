#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbpm_audit::data::{discretize, generate_gauss, Column, Dataset, GaussSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(n: usize, seed: u64) -> Dataset {
    generate_gauss(&GaussSpec::new(n.max(2), seed).unwrap()).unwrap()
}

/// Random 2d points; on coarse grids when `grid` so exact distance ties are
/// common, with a few rows duplicated.
pub fn points(rng: &mut ChaCha8Rng, n: usize, grid: bool) -> Dataset {
    let mut pts: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            if grid {
                [
                    rng.random_range(-3..=3) as f64,
                    rng.random_range(-3..=3) as f64,
                ]
            } else {
                [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]
            }
        })
        .collect();
    for _ in 0..n / 10 {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        pts[j] = pts[i];
    }
    Dataset::from_points(&pts).unwrap()
}

/// Random discrete codes in `arity` columns with `levels` values each.
pub fn codes(rng: &mut ChaCha8Rng, n: usize, arity: usize, levels: u32) -> Dataset {
    let columns = (0..arity)
        .map(|k| Column::discrete(format!("c{k}"), None))
        .collect();
    let values = (0..n * arity)
        .map(|_| f64::from(rng.random_range(0..levels)))
        .collect();
    Dataset::from_flat(columns, values).unwrap()
}

pub fn shuffled(d: &Dataset, rng: &mut ChaCha8Rng) -> Dataset {
    let mut idx: Vec<usize> = (0..d.n_rows()).collect();
    idx.shuffle(rng);
    d.select(&idx)
}

pub fn binned(d: &Dataset, bins: u32) -> Dataset {
    discretize(d, bins).unwrap()
}
