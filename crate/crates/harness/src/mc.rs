//! Seeded Monte Carlo over independent trials.
//!
//! Trial `t` draws from ChaCha8 seeded with the master seed and switched to
//! stream `t`, so every trial's randomness is fixed by `(master_seed, t)`
//! alone. Trials run in chunks of [`CHUNK`] over a scoped worker pool and the
//! per-chunk statistics are merged in chunk order, which makes the result
//! independent of the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const CHUNK: u64 = 4096;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// A seed for an independent sub-experiment labelled `label`.
pub fn derive_seed(master_seed: u64, label: u64) -> u64 {
    stream_rng(master_seed, u64::MAX - label).gen()
}

/// Count, sum, sum of squares and range; merging is associative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for Stats {
    fn default() -> Self {
        Self {
            count: 0,
            sum: 0.0,
            sum_sq: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Stats {
    /// NaN marks a trial where the metric is undefined and is skipped.
    pub fn push(&mut self, x: f64) {
        if x.is_nan() {
            return;
        }
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &Stats) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Self::default();
        values.into_iter().for_each(|x| s.push(x));
        s
    }

    pub fn estimate(&self) -> Estimate {
        if self.count == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
                ci_lo: f64::NAN,
                ci_hi: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                count: 0,
            };
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let stderr = (var / n).sqrt();
        Estimate {
            mean,
            stderr,
            ci_lo: mean - Z95 * stderr,
            ci_hi: mean + Z95 * stderr,
            min: self.min,
            max: self.max,
            count: self.count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub min: f64,
    pub max: f64,
    pub count: u64,
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs `trial` for `t in 0..trials`, each on its own stream, and returns one
/// estimate per metric. `trial` must return `metrics` values.
pub fn monte_carlo<F>(trials: u64, master_seed: u64, metrics: usize, trial: F) -> Result<Vec<Estimate>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<f64>> + Sync,
{
    anyhow::ensure!(trials >= 1, "need at least one trial");
    let chunks = trials.div_ceil(CHUNK) as usize;
    let slots: Vec<Mutex<Option<Result<Vec<Stats>>>>> = (0..chunks).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let run_chunk = |c: usize| -> Result<Vec<Stats>> {
        let mut stats = vec![Stats::default(); metrics];
        let start = c as u64 * CHUNK;
        for t in start..(start + CHUNK).min(trials) {
            let mut rng = stream_rng(master_seed, t);
            let values = trial(&mut rng)?;
            anyhow::ensure!(values.len() == metrics, "trial returned {} metrics, expected {metrics}", values.len());
            for (s, v) in stats.iter_mut().zip(values) {
                s.push(v);
            }
        }
        Ok(stats)
    };
    std::thread::scope(|scope| {
        for _ in 0..workers().min(chunks) {
            scope.spawn(|| loop {
                let c = next.fetch_add(1, Ordering::Relaxed);
                if c >= chunks {
                    break;
                }
                let result = run_chunk(c);
                *slots[c].lock().expect("chunk slot poisoned") = Some(result);
            });
        }
    });
    let mut total = vec![Stats::default(); metrics];
    for slot in slots {
        let chunk = slot.into_inner().expect("chunk slot poisoned").expect("every chunk runs")?;
        for (t, s) in total.iter_mut().zip(&chunk) {
            t.merge(s);
        }
    }
    Ok(total.iter().map(Stats::estimate).collect())
}
