//! Losses and the lattice descent trainers.
//!
//! Losses are exact rationals so that ties between candidates are well
//! defined. Candidate losses are computed in parallel and reduced in
//! canonical neighbor order, which makes every report independent of the
//! number of worker threads.

mod loss;

pub use loss::{loss_absolute, loss_iou, mean_loss, pair_loss, Loss};

use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{compile, sample_neighbor_indices, ArchError, ArchitectureSpec, ParamVector};
use crate::mcg::evaluate;
use crate::morphology::BinaryImage;

/// RNG stream for batch partitions.
pub const STREAM_BATCH: u64 = 1;
/// RNG stream for neighbor sampling.
pub const STREAM_SAMPLE: u64 = 2;
/// RNG stream for tie-breaking among minimizers.
pub const STREAM_TIE: u64 = 3;
/// RNG stream for parameter initialization.
pub const STREAM_INIT: u64 = 4;

/// A ChaCha8 generator for one named stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrainError {
    #[error("frames differ: {0}×{1} against {2}×{3}")]
    FrameMismatch(usize, usize, usize, usize),
    #[error("sample is empty")]
    EmptySample,
    #[error("invalid training config: {0}")]
    Config(String),
    #[error(transparent)]
    Arch(#[from] ArchError),
}

/// An input image and its target, on the same frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePair {
    pub input: BinaryImage,
    pub target: BinaryImage,
}

impl SamplePair {
    pub fn new(input: BinaryImage, target: BinaryImage) -> Result<Self, TrainError> {
        if !input.same_frame(&target) {
            return Err(TrainError::FrameMismatch(
                input.width(),
                input.height(),
                target.width(),
                target.height(),
            ));
        }
        Ok(SamplePair { input, target })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lda,
    Slda,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub epochs: usize,
    /// Ignored by LDA, which always uses the whole sample.
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    /// Ignored by LDA, which always visits the whole neighborhood.
    #[serde(default = "default_neighbors")]
    pub neighbors: usize,
    #[serde(default)]
    pub loss: Loss,
    #[serde(default)]
    pub seed: u64,
}

fn default_batch() -> usize {
    1
}

fn default_neighbors() -> usize {
    16
}

impl TrainConfig {
    pub fn lda(epochs: usize, loss: Loss, seed: u64) -> Self {
        TrainConfig {
            algorithm: Algorithm::Lda,
            epochs,
            batch_size: default_batch(),
            neighbors: default_neighbors(),
            loss,
            seed,
        }
    }

    pub fn slda(epochs: usize, batch_size: usize, neighbors: usize, loss: Loss, seed: u64) -> Self {
        TrainConfig {
            algorithm: Algorithm::Slda,
            epochs,
            batch_size,
            neighbors,
            loss,
            seed,
        }
    }

    /// Check the config against a sample of `n` pairs.
    pub fn check(&self, n: usize) -> Result<(), TrainError> {
        if n == 0 {
            return Err(TrainError::EmptySample);
        }
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if self.algorithm == Algorithm::Slda {
            if self.batch_size == 0 || self.batch_size > n {
                return Err(TrainError::Config(format!(
                    "batch_size must be between 1 and the sample size {n}, got {}",
                    self.batch_size
                )));
            }
            if self.neighbors == 0 {
                return Err(TrainError::Config("neighbors must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// One row of the per-epoch log.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    /// 1-based; the initial point is epoch 0 and is not logged.
    pub epoch: usize,
    /// Full-sample loss of the current point at the end of the epoch.
    pub current_loss: BigRational,
    pub best_loss: BigRational,
    pub time_ms: u128,
    pub params: ParamVector,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub initial_loss: BigRational,
    pub best_params: ParamVector,
    pub best_loss: BigRational,
    /// 0 when no epoch improved on the initial point.
    pub epoch_of_best: usize,
    pub log: Vec<EpochLog>,
    /// Number of moves made.
    pub moves: usize,
    /// Moves that returned to the point two moves back.
    pub period_two: usize,
}

/// Metrics CSV header.
pub const CSV_HEADER: &str = "epoch,current_loss,best_loss,time_ms";

impl EpochLog {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.epoch,
            ratio_f64(&self.current_loss),
            ratio_f64(&self.best_loss),
            self.time_ms
        )
    }
}

/// The nearest `f64` to an exact loss.
pub fn ratio_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Dispatch on `cfg.algorithm`.
pub fn train(
    arch: &ArchitectureSpec,
    init: ParamVector,
    sample: &[SamplePair],
    cfg: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochLog),
) -> Result<TrainReport, TrainError> {
    match cfg.algorithm {
        Algorithm::Lda => run(arch, init, sample, cfg, false, on_epoch),
        Algorithm::Slda => run(arch, init, sample, cfg, true, on_epoch),
    }
}

/// Greedy descent over the full neighborhood and the full sample.
pub fn lda_train(
    arch: &ArchitectureSpec,
    init: ParamVector,
    sample: &[SamplePair],
    cfg: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    run(arch, init, sample, cfg, false, &mut |_| {})
}

/// Stochastic descent over sampled neighbors and mini-batches.
pub fn slda_train(
    arch: &ArchitectureSpec,
    init: ParamVector,
    sample: &[SamplePair],
    cfg: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    run(arch, init, sample, cfg, true, &mut |_| {})
}

fn run(
    arch: &ArchitectureSpec,
    init: ParamVector,
    sample: &[SamplePair],
    cfg: &TrainConfig,
    stochastic: bool,
    on_epoch: &mut dyn FnMut(&EpochLog),
) -> Result<TrainReport, TrainError> {
    cfg.check(sample.len())?;
    arch.check()?;
    init.check_shape(arch)?;

    let mut batch_rng = stream_rng(cfg.seed, STREAM_BATCH);
    let mut sample_rng = stream_rng(cfg.seed, STREAM_SAMPLE);
    let mut tie_rng = stream_rng(cfg.seed, STREAM_TIE);

    let start = Instant::now();
    let all: Vec<&SamplePair> = sample.iter().collect();
    let initial_loss = batch_loss(arch, std::slice::from_ref(&init), &all, cfg.loss)?
        .pop()
        .expect("one candidate");

    let mut current = init;
    let mut previous: Option<ParamVector> = None;
    let mut best_params = current.clone();
    let mut best_loss = initial_loss.clone();
    let mut epoch_of_best = 0;
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut moves = 0;
    let mut period_two = 0;

    let mut order: Vec<usize> = (0..sample.len()).collect();
    for epoch in 1..=cfg.epochs {
        let batches: Vec<Vec<&SamplePair>> = if stochastic {
            order.shuffle(&mut batch_rng);
            order
                .chunks(cfg.batch_size)
                .map(|c| c.iter().map(|&i| &sample[i]).collect())
                .collect()
        } else {
            vec![all.clone()]
        };
        let mut last_batch_loss = None;
        for batch in &batches {
            let idx: Vec<usize> = if stochastic {
                sample_neighbor_indices(&current, cfg.neighbors, &mut sample_rng)
            } else {
                (0..current.neighbor_count()).collect()
            };
            if idx.is_empty() {
                // No parameters: the point has no neighbors and cannot move.
                continue;
            }
            let candidates: Vec<ParamVector> = idx.iter().map(|&k| current.nth_neighbor(k)).collect();
            let losses = batch_loss(arch, &candidates, batch, cfg.loss)?;
            let min = losses.iter().min().expect("non-empty").clone();
            let minimizers: Vec<usize> = (0..losses.len()).filter(|&i| losses[i] == min).collect();
            let pick = if minimizers.len() == 1 {
                minimizers[0]
            } else {
                minimizers[tie_rng.random_range(0..minimizers.len())]
            };
            let next = candidates.into_iter().nth(pick).expect("index in range");
            if previous.as_ref() == Some(&next) {
                period_two += 1;
            }
            previous = Some(std::mem::replace(&mut current, next));
            moves += 1;
            last_batch_loss = Some(min);
        }
        let current_loss = match last_batch_loss {
            Some(l) if !stochastic => l,
            _ => batch_loss(arch, std::slice::from_ref(&current), &all, cfg.loss)?
                .pop()
                .expect("one candidate"),
        };
        if current_loss < best_loss {
            best_loss = current_loss.clone();
            best_params = current.clone();
            epoch_of_best = epoch;
        }
        let row = EpochLog {
            epoch,
            current_loss,
            best_loss: best_loss.clone(),
            time_ms: start.elapsed().as_millis(),
            params: current.clone(),
        };
        on_epoch(&row);
        log.push(row);
    }

    Ok(TrainReport {
        initial_loss,
        best_params,
        best_loss,
        epoch_of_best,
        log,
        moves,
        period_two,
    })
}

/// Mean loss of each candidate over `batch`, in candidate order.
fn batch_loss(
    arch: &ArchitectureSpec,
    candidates: &[ParamVector],
    batch: &[&SamplePair],
    loss: Loss,
) -> Result<Vec<BigRational>, TrainError> {
    let graphs = candidates
        .par_iter()
        .map(|c| compile(arch, c).map(|c| c.graph))
        .collect::<Result<Vec<_>, _>>()?;
    let per_pair: Vec<BigRational> = (0..candidates.len() * batch.len())
        .into_par_iter()
        .map(|k| {
            let (c, j) = (k / batch.len(), k % batch.len());
            let out = evaluate(&graphs[c], &batch[j].input);
            pair_loss(&out, &batch[j].target, loss)
        })
        .collect();
    let n = BigRational::from_integer(batch.len().into());
    Ok(per_pair
        .chunks(batch.len())
        .map(|ls| ls.iter().fold(BigRational::zero(), |acc, l| acc + l) / &n)
        .collect())
}
