//! Power-method style benchmark: alternating right and left products.
//!
//! Each iteration computes `y = M x`, `z^t = y^t M` and `x = z / ||z||_inf`.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocked::{with_workers, BlockedMatrix, Scratch};
use crate::encoding::{CompressedMatrix, Variant};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub iterations: usize,
    pub variant: Variant,
    pub blocks: usize,
    pub workers: usize,
    /// `None` starts from all-ones; otherwise `x0` is uniform in `[-1, 1)`.
    pub seed: Option<u64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            variant: Variant::ReIv,
            blocks: 1,
            workers: 1,
            seed: None,
        }
    }
}

impl BenchConfig {
    pub fn initial_vector(&self, n_cols: usize) -> Vec<f64> {
        match self.seed {
            None => vec![1.0; n_cols],
            Some(s) => {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                (0..n_cols).map(|_| rng.gen_range(-1.0..1.0)).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub variant: Variant,
    pub blocks: usize,
    pub workers: usize,
    pub iterations: usize,
    /// Iterations completed before any early exit.
    pub iterations_run: usize,
    /// Set when `||z||_inf` became zero; `x` keeps its last value.
    pub early_exit: Option<String>,
    pub compress_seconds: f64,
    pub total_seconds: f64,
    pub seconds_per_iteration: f64,
    pub compressed_bytes: usize,
    /// Best effort: the process high-water mark, when the platform exposes it.
    pub peak_rss_kib: Option<u64>,
    pub final_x: Vec<f64>,
}

impl BenchReport {
    /// One `key=value` line per metric.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variant={}", self.variant);
        let _ = writeln!(s, "blocks={}", self.blocks);
        let _ = writeln!(s, "workers={}", self.workers);
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "iterations_run={}", self.iterations_run);
        if let Some(e) = &self.early_exit {
            let _ = writeln!(s, "early_exit={e}");
        }
        let _ = writeln!(s, "compress_seconds={:.6}", self.compress_seconds);
        let _ = writeln!(s, "total_seconds={:.6}", self.total_seconds);
        let _ = writeln!(s, "seconds_per_iteration={:.9}", self.seconds_per_iteration);
        let _ = writeln!(s, "compressed_bytes={}", self.compressed_bytes);
        match self.peak_rss_kib {
            Some(k) => {
                let _ = writeln!(s, "peak_rss_kib={k}");
            }
            None => {
                let _ = writeln!(s, "peak_rss_kib=unavailable");
            }
        }
        let xs: Vec<String> = self.final_x.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "final_x={}", xs.join(","));
        s
    }
}

/// `x / ||x||_inf`, or `None` when every component is zero.
pub fn normalize_inf(z: &[f64]) -> Option<Vec<f64>> {
    let norm = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (norm > 0.0).then(|| z.iter().map(|v| v / norm).collect())
}

/// Times `cfg.iterations` iterations on an already compressed matrix.
pub fn bench_iterate(m: &CompressedMatrix, cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidArgument(
            "iterations must be at least 1".into(),
        ));
    }
    let run = || -> Result<BenchReport> {
        let mut scratch = Scratch::new();
        let mut x = cfg.initial_vector(m.n_cols());
        let mut y = vec![0.0; m.n_rows()];
        let mut z = vec![0.0; m.n_cols()];
        let mut early_exit = None;
        let mut done = 0;
        let start = Instant::now();
        for it in 1..=cfg.iterations {
            m.right_mult_into(&x, &mut y, &mut scratch)?;
            m.left_mult_into(&y, &mut z, &mut scratch)?;
            match normalize_inf(&z) {
                Some(next) => x = next,
                None => {
                    early_exit = Some(format!("zero infinity norm at iteration {it}"));
                    break;
                }
            }
            done = it;
        }
        let total = start.elapsed().as_secs_f64();
        Ok(BenchReport {
            variant: m.variant(),
            blocks: m.block_count(),
            workers: cfg.workers,
            iterations: cfg.iterations,
            iterations_run: done,
            early_exit,
            compress_seconds: 0.0,
            total_seconds: total,
            seconds_per_iteration: total / done.max(1) as f64,
            compressed_bytes: m.to_bytes().len(),
            peak_rss_kib: peak_rss_kib(),
            final_x: x,
        })
    };
    with_workers(cfg.workers, run)?
}

/// Compresses `dense` per `cfg` (timed separately), then runs [`bench_iterate`].
pub fn bench_dense(dense: &DenseMatrix, cfg: &BenchConfig) -> Result<BenchReport> {
    let start = Instant::now();
    let cm = with_workers(cfg.workers, || {
        let bm = BlockedMatrix::build(dense, cfg.blocks)?;
        CompressedMatrix::encode(&bm, cfg.variant)
    })??;
    let compress_seconds = start.elapsed().as_secs_f64();
    let mut report = bench_iterate(&cm, cfg)?;
    report.compress_seconds = compress_seconds;
    Ok(report)
}

/// Peak resident set size from `/proc/self/status`, where available.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}
