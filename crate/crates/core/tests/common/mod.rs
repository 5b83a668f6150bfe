#![allow(dead_code, clippy::needless_range_loop)]

use gramlin::DenseMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random non-zero values spread over many magnitudes and both signs.
pub fn value_pool(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut pool: Vec<f64> = Vec::with_capacity(k);
    while pool.len() < k {
        let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
        let v = if rng.gen_bool(0.3) { -mag } else { mag };
        if !pool.iter().any(|p| p.to_bits() == v.to_bits()) {
            pool.push(v);
        }
    }
    pool
}

/// A random matrix of the shape used by the corpus: some rows repeat earlier
/// ones so that the grammar has something to find.
pub fn random_matrix(rng: &mut impl Rng, max_rows: usize, max_cols: usize) -> DenseMatrix {
    let n = rng.gen_range(1..=max_rows);
    let m = rng.gen_range(1..=max_cols);
    let k = rng.gen_range(1..=16);
    let density = rng.gen_range(0.05..=1.0);
    let repeat = rng.gen_range(0.0..0.6);
    let pool = value_pool(rng, k);
    let mut entries: Vec<f64> = Vec::with_capacity(n * m);
    for r in 0..n {
        if r > 0 && rng.gen_bool(repeat) {
            let src = rng.gen_range(0..r);
            let row: Vec<f64> = entries[src * m..(src + 1) * m].to_vec();
            entries.extend(row);
            continue;
        }
        for _ in 0..m {
            entries.push(if rng.gen_bool(density) {
                pool[rng.gen_range(0..k)]
            } else {
                0.0
            });
        }
    }
    DenseMatrix::new(n, m, entries).unwrap()
}

pub fn corpus(count: usize, seed: u64) -> Vec<DenseMatrix> {
    let mut r = rng(seed);
    (0..count).map(|_| random_matrix(&mut r, 100, 50)).collect()
}

/// Correlated categorical data: 64 columns in 16 groups of 4 correlated columns. Each
/// group is active in a row with probability `p_active` and then takes one of
/// 8 value patterns drawn from 45 distinct integers.
pub fn correlated_synthetic(n_rows: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng(seed);
    let pool: Vec<f64> = (1..=45).map(f64::from).collect();
    let (groups, width, patterns) = (16usize, 4usize, 8usize);
    let mut next = 0usize;
    let table: Vec<Vec<Vec<f64>>> = (0..groups)
        .map(|_| {
            (0..patterns)
                .map(|_| {
                    (0..width)
                        .map(|_| {
                            // Cycle through the pool first so all 45 values occur.
                            let v = if next < pool.len() {
                                pool[next]
                            } else {
                                pool[rng.gen_range(0..pool.len())]
                            };
                            next += 1;
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut entries = Vec::with_capacity(n_rows * groups * width);
    for _ in 0..n_rows {
        for g in &table {
            if rng.gen_bool(0.43) {
                // Skewed pattern choice, as categorical data tends to be.
                let p = (rng.gen_range(0.0f64..1.0).powi(2) * patterns as f64) as usize;
                entries.extend_from_slice(&g[p.min(patterns - 1)]);
            } else {
                entries.extend(std::iter::repeat_n(0.0, width));
            }
        }
    }
    DenseMatrix::new(n_rows, groups * width, entries).unwrap()
}

pub fn shuffled_columns(m: &DenseMatrix, seed: u64) -> DenseMatrix {
    let mut order: Vec<usize> = (0..m.n_cols()).collect();
    order.shuffle(&mut rng(seed));
    m.permute_columns(&order).unwrap()
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Dense `y = M x` with the magnitude `sum |M_ij x_j|` of each component.
pub fn oracle_right(m: &DenseMatrix, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut y = vec![0.0; m.n_rows()];
    let mut scale = vec![0.0; m.n_rows()];
    for i in 0..m.n_rows() {
        for j in 0..m.n_cols() {
            y[i] += m.get(i, j) * x[j];
            scale[i] += (m.get(i, j) * x[j]).abs();
        }
    }
    (y, scale)
}

/// Dense `x^t = y^t M` with per-component magnitudes.
pub fn oracle_left(m: &DenseMatrix, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m.n_cols()];
    let mut scale = vec![0.0; m.n_cols()];
    for i in 0..m.n_rows() {
        for j in 0..m.n_cols() {
            x[j] += y[i] * m.get(i, j);
            scale[j] += (y[i] * m.get(i, j)).abs();
        }
    }
    (x, scale)
}

/// Largest componentwise error relative to the magnitude of the terms summed.
pub fn max_rel_err(got: &[f64], want: &[f64], scale: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    got.iter()
        .zip(want)
        .zip(scale)
        .map(|((g, w), s)| {
            let d = (g - w).abs();
            if d == 0.0 {
                0.0
            } else {
                d / s.max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn bits(m: &DenseMatrix) -> Vec<u64> {
    m.entries().iter().map(|v| v.to_bits()).collect()
}
