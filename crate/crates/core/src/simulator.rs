//! Round-by-round simulation of a Bell test driven by a source strategy.
//!
//! Rounds are generated in chunks of [`CHUNK_ROUNDS`]; chunk `c` draws from
//! a ChaCha8 stream seeded with `seed + c` (wrapping). Chunks run in
//! parallel and their counts are summed, so the summary depends only on
//! (strategy, rounds, seed).

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{Behavior, BellFunctional, ScenarioShape};
use crate::sources::{SettingDistribution, SourceStrategy};

pub const CHUNK_ROUNDS: u64 = 65_536;
pub const RNG_ALGORITHM: &str = "chacha8";
/// Largest run for which records may be retained in memory.
pub const MAX_KEPT_RECORDS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub round: u64,
    /// Index into the strategy's λ alphabet.
    pub lambda: usize,
    pub settings: Vec<usize>,
    pub outcomes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSummary<T> {
    pub shape: ScenarioShape,
    pub rounds: u64,
    pub seed: u64,
    pub rng: &'static str,
    /// Rounds per joint setting.
    pub setting_counts: Vec<u64>,
    /// Rounds per (setting, outcome), laid out like a behavior table.
    pub outcome_counts: Vec<u64>,
    pub empirical_p_obs: SettingDistribution<f64>,
    /// Binomial standard error of each empirical_p_obs entry.
    pub p_obs_standard_errors: Vec<f64>,
    /// Σ_z Σ_o c(o,z)·count(o,z)/count(z) over observed used settings;
    /// `None` when some used setting never occurred.
    pub bell_value: Option<T>,
    pub bell_standard_error: Option<f64>,
    /// Used settings with zero count, excluded from the estimate.
    pub undefined_settings: Vec<usize>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> ExperimentSummary<T> {
    /// count(o,z)/count(z); `None` for unvisited settings.
    pub fn conditional_frequencies(&self, setting: usize) -> Option<Vec<f64>> {
        let n = self.setting_counts[setting];
        if n == 0 {
            return None;
        }
        let width = self.shape.num_outcomes();
        Some(
            self.outcome_counts[setting * width..(setting + 1) * width]
                .iter()
                .map(|&c| c as f64 / n as f64)
                .collect(),
        )
    }

    /// Bell estimate including the settings it had to skip, as f64.
    pub fn bell_value_f64(&self) -> Option<f64> {
        self.bell_value.as_ref().map(Scalar::to_f64)
    }
}

struct Sampler {
    lambda: WeightedIndex<f64>,
    settings: Vec<WeightedIndex<f64>>,
    responses: Vec<Vec<usize>>,
}

impl Sampler {
    fn new<T: Scalar>(s: &SourceStrategy<T>) -> Result<Self> {
        let outputs = s
            .outputs()
            .ok_or_else(|| Error::MissingMetadata("strategy has no per-λ outputs".into()))?;
        let weights = |w: &[T]| {
            WeightedIndex::new(w.iter().map(Scalar::to_f64))
                .map_err(|e| Error::InvalidDistribution(format!("cannot sample: {e}")))
        };
        Ok(Self {
            lambda: weights(s.prior())?,
            settings: s.conditionals().iter().map(|c| weights(c)).collect::<Result<_>>()?,
            responses: outputs.iter().map(|d| d.response_table()).collect(),
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
        let lambda = self.lambda.sample(rng);
        let z = self.settings[lambda].sample(rng);
        (lambda, z, self.responses[lambda][z])
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(chunk))
}

fn chunk_len(rounds: u64, chunk: u64) -> u64 {
    CHUNK_ROUNDS.min(rounds - chunk * CHUNK_ROUNDS)
}

fn count_chunk(sampler: &Sampler, shape: &ScenarioShape, rounds: u64, seed: u64, chunk: u64) -> Vec<u64> {
    let mut rng = chunk_rng(seed, chunk);
    let mut counts = vec![0u64; shape.table_len()];
    for _ in 0..chunk_len(rounds, chunk) {
        let (_, z, o) = sampler.draw(&mut rng);
        counts[shape.entry(z, o)] += 1;
    }
    counts
}

/// Simulates `rounds` i.i.d. rounds and summarizes them.
pub fn simulate<T: Scalar>(
    s: &SourceStrategy<T>,
    f: &BellFunctional<T>,
    rounds: u64,
    seed: u64,
) -> Result<ExperimentSummary<T>> {
    let (sampler, shape) = prepare(s, f, rounds)?;
    let chunks = rounds.div_ceil(CHUNK_ROUNDS);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| count_chunk(&sampler, &shape, rounds, seed, c))
        .reduce(
            || vec![0u64; shape.table_len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    summarize(f, shape, rounds, seed, counts)
}

/// Same rounds as [`simulate`], generated sequentially, with every record
/// passed to `sink` in round order.
pub fn simulate_streaming<T: Scalar>(
    s: &SourceStrategy<T>,
    f: &BellFunctional<T>,
    rounds: u64,
    seed: u64,
    mut sink: impl FnMut(&RunRecord) -> Result<()>,
) -> Result<ExperimentSummary<T>> {
    let (sampler, shape) = prepare(s, f, rounds)?;
    let mut counts = vec![0u64; shape.table_len()];
    let mut round = 0u64;
    for chunk in 0..rounds.div_ceil(CHUNK_ROUNDS) {
        let mut rng = chunk_rng(seed, chunk);
        for _ in 0..chunk_len(rounds, chunk) {
            let (lambda, z, o) = sampler.draw(&mut rng);
            counts[shape.entry(z, o)] += 1;
            sink(&RunRecord {
                round,
                lambda,
                settings: shape.setting_tuple(z),
                outcomes: shape.outcome_tuple(o),
            })?;
            round += 1;
        }
    }
    summarize(f, shape, rounds, seed, counts)
}

/// [`simulate_streaming`] collecting the records; limited to
/// [`MAX_KEPT_RECORDS`] rounds.
pub fn simulate_with_records<T: Scalar>(
    s: &SourceStrategy<T>,
    f: &BellFunctional<T>,
    rounds: u64,
    seed: u64,
) -> Result<(ExperimentSummary<T>, Vec<RunRecord>)> {
    if rounds > MAX_KEPT_RECORDS {
        return Err(Error::ResourceCap {
            what: "kept records",
            count: u128::from(rounds),
            cap: u128::from(MAX_KEPT_RECORDS),
        });
    }
    let mut records = Vec::with_capacity(rounds as usize);
    let summary = simulate_streaming(s, f, rounds, seed, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok((summary, records))
}

fn prepare<T: Scalar>(s: &SourceStrategy<T>, f: &BellFunctional<T>, rounds: u64) -> Result<(Sampler, ScenarioShape)> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("at least one round is required".into()));
    }
    s.shape().ensure_same(f.shape())?;
    Ok((Sampler::new(s)?, s.shape().clone()))
}

fn summarize<T: Scalar>(
    f: &BellFunctional<T>,
    shape: ScenarioShape,
    rounds: u64,
    seed: u64,
    outcome_counts: Vec<u64>,
) -> Result<ExperimentSummary<T>> {
    let width = shape.num_outcomes();
    let setting_counts: Vec<u64> = outcome_counts.chunks(width).map(|row| row.iter().sum()).collect();
    let n = rounds as f64;
    let p_obs: Vec<f64> = setting_counts.iter().map(|&c| c as f64 / n).collect();
    let p_obs_standard_errors = p_obs.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();

    let mut undefined_settings = Vec::new();
    let mut value = T::zero();
    let mut variance = 0.0;
    for z in f.used_settings() {
        let nz = setting_counts[z];
        if nz == 0 {
            undefined_settings.push(z);
            continue;
        }
        let (mut mean, mut second) = (0.0, 0.0);
        for o in 0..width {
            let c = outcome_counts[z * width + o];
            if c == 0 {
                continue;
            }
            let coeff = f.coefficient(z, o);
            value = value + coeff.clone() * T::from_ratio(c as i64, nz as i64);
            let (cf, freq) = (coeff.to_f64(), c as f64 / nz as f64);
            mean += cf * freq;
            second += cf * cf * freq;
        }
        variance += (second - mean * mean).max(0.0) / nz as f64;
    }
    let warnings = undefined_settings
        .iter()
        .map(|&z| format!("used setting {:?} never occurred; Bell value undefined", shape.setting_tuple(z)))
        .collect();
    let defined = undefined_settings.is_empty();
    Ok(ExperimentSummary {
        empirical_p_obs: SettingDistribution::new(shape.clone(), p_obs)?,
        shape,
        rounds,
        seed,
        rng: RNG_ALGORITHM,
        setting_counts,
        outcome_counts,
        p_obs_standard_errors,
        bell_value: defined.then_some(value),
        bell_standard_error: defined.then(|| variance.sqrt()),
        undefined_settings,
        warnings,
    })
}

/// Conditional frequency table count(o,z)/count(z) as a behavior.
pub fn reconstruct_behavior<T: Scalar>(summary: &ExperimentSummary<T>) -> Result<Behavior<f64>> {
    let missing: Vec<usize> = (0..summary.shape.num_settings())
        .filter(|&z| summary.setting_counts[z] == 0)
        .collect();
    if !missing.is_empty() {
        return Err(Error::ZeroCount(missing));
    }
    let width = summary.shape.num_outcomes();
    Behavior::from_fn(summary.shape.clone(), |z, o| {
        summary.outcome_counts[z * width + o] as f64 / summary.setting_counts[z] as f64
    })
}
