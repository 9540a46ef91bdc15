//! Randomized approximation-ratio experiments: weighted-coverage instances
//! under partition-matroid constraints, greedy versus the exhaustive optimum
//! over many seeded trials, with summary statistics and histogram data.
//!
//! Everything is deterministic given the master seed. Per-trial generators
//! are seeded through a splittable counter scheme so trials can run in any
//! order (or in parallel) without changing a single output byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matroid::{QuotaConstraint, QuotaTree};
use crate::selection::{
    approximation_ratio, brute_force_optimal, greedy_select, BRUTE_FORCE_LIMIT,
};
use crate::utility::WeightedCoverage;

/// Ratio histograms span the guarantee floor to the optimum.
pub const RATIO_RANGE: (f64, f64) = (0.5, 1.0);

/// Default number of histogram bins.
pub const DEFAULT_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub num_macro: usize,
    pub universe_size: usize,
    pub num_groups: usize,
    pub cover_probability: f64,
    /// Uniform weight range; the lower bound must stay positive.
    pub weight_range: (f64, f64),
    /// Per-group quota range; the upper bound is capped at the group size
    /// (None means "up to the group size").
    pub quota_min: u64,
    pub quota_max: Option<u64>,
    /// Overall budget range, inclusive.
    pub budget_range: (u64, u64),
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: 5000,
            num_macro: 14,
            universe_size: 120,
            num_groups: 4,
            cover_probability: 0.15,
            weight_range: (0.1, 1.0),
            quota_min: 1,
            quota_max: None,
            budget_range: (3, 8),
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return fail("trials must be positive".into());
        }
        if self.num_macro == 0 || self.universe_size == 0 {
            return fail("num_macro and universe_size must be positive".into());
        }
        if self.num_groups == 0 || self.num_groups > self.num_macro {
            return fail(format!(
                "num_groups must be in 1..={}, got {}",
                self.num_macro, self.num_groups
            ));
        }
        if !(self.cover_probability > 0.0 && self.cover_probability < 1.0) {
            return fail(format!(
                "cover_probability must be in (0,1), got {}",
                self.cover_probability
            ));
        }
        let (lo, hi) = self.weight_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return fail(format!(
                "weight_range ({lo}, {hi}) must satisfy 0 < lo <= hi"
            ));
        }
        if let Some(qmax) = self.quota_max {
            if qmax < self.quota_min {
                return fail(format!("quota range ({}, {qmax}) is empty", self.quota_min));
            }
        }
        if self.budget_range.0 > self.budget_range.1 {
            return fail(format!(
                "budget_range ({}, {}) is empty",
                self.budget_range.0, self.budget_range.1
            ));
        }
        if self.num_macro > BRUTE_FORCE_LIMIT {
            return fail(format!(
                "num_macro {} exceeds the brute-force ceiling {BRUTE_FORCE_LIMIT}",
                self.num_macro
            ));
        }
        Ok(())
    }

    /// Macro-facet ids, zero-padded so lexicographic order equals index order.
    pub fn macro_ids(&self) -> Vec<String> {
        let width = if self.num_macro <= 1 {
            1
        } else {
            (self.num_macro - 1).to_string().len()
        };
        (0..self.num_macro)
            .map(|i| format!("m{i:0width$}"))
            .collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-trial seed derived from the master seed and trial index.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

fn shuffle<T>(items: &mut [T], rng: &mut impl Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Random weighted-coverage utility: each id covers each universe element
/// independently with `cover_probability`, weights drawn uniformly.
pub fn random_coverage(
    rng: &mut impl Rng,
    ids: &[String],
    universe_size: usize,
    cover_probability: f64,
    weight_range: (f64, f64),
) -> Result<WeightedCoverage> {
    let (lo, hi) = weight_range;
    let weights: Vec<f64> = (0..universe_size)
        .map(|_| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..hi)
            }
        })
        .collect();
    let covers: Vec<(String, Vec<usize>)> = ids
        .iter()
        .map(|id| {
            let covered = (0..universe_size)
                .filter(|_| rng.random_bool(cover_probability))
                .collect();
            (id.clone(), covered)
        })
        .collect();
    WeightedCoverage::new(universe_size, weights, covers)
}

/// Random laminar constraint family over `universe`, for randomized
/// verification of the matroid machinery and the greedy guarantee. Produces
/// nested and disjoint blocks up to a few levels deep; quotas occasionally
/// hit zero.
pub fn random_laminar_constraints(rng: &mut impl Rng, universe: &[String]) -> Vec<QuotaConstraint> {
    fn recurse(
        rng: &mut impl Rng,
        universe: &[String],
        block: Vec<usize>,
        depth: usize,
        out: &mut Vec<QuotaConstraint>,
    ) {
        if block.is_empty() {
            return;
        }
        let emit = depth == 0 || rng.random_bool(0.7);
        if emit {
            let quota = if rng.random_bool(0.08) {
                0
            } else {
                rng.random_range(1..=block.len() as u64)
            };
            out.push(QuotaConstraint::new(
                block.iter().map(|&i| universe[i].clone()),
                quota,
            ));
        }
        if block.len() <= 1 || depth >= 3 {
            return;
        }
        let parts = rng.random_range(2..=3usize.min(block.len()));
        let mut shuffled = block;
        shuffle(&mut shuffled, rng);
        let chunk = shuffled.len().div_ceil(parts);
        for part in shuffled.chunks(chunk) {
            if rng.random_bool(0.8) {
                recurse(rng, universe, part.to_vec(), depth + 1, out);
            }
        }
    }

    let mut out = Vec::new();
    recurse(rng, universe, (0..universe.len()).collect(), 0, &mut out);
    out
}

/// Deterministically generate the coverage utility and partition-matroid tree
/// for one trial.
pub fn generate_instance(
    config: &ExperimentConfig,
    trial: usize,
) -> Result<(WeightedCoverage, QuotaTree)> {
    let seed = trial_seed(config.seed, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = config.macro_ids();

    let utility = random_coverage(
        &mut rng,
        &ids,
        config.universe_size,
        config.cover_probability,
        config.weight_range,
    )?;

    // balanced random partition: sizes differ by at most one
    let mut order: Vec<usize> = (0..config.num_macro).collect();
    shuffle(&mut order, &mut rng);
    let base = config.num_macro / config.num_groups;
    let extra = config.num_macro % config.num_groups;
    let mut groups = Vec::with_capacity(config.num_groups);
    let mut cursor = 0;
    for g in 0..config.num_groups {
        let size = base + usize::from(g < extra);
        let members: Vec<String> = order[cursor..cursor + size]
            .iter()
            .map(|&i| ids[i].clone())
            .collect();
        cursor += size;
        let hi = config
            .quota_max
            .unwrap_or(size as u64)
            .min(size as u64)
            .max(config.quota_min);
        let quota = rng.random_range(config.quota_min..=hi);
        groups.push(QuotaConstraint::named(&format!("g{g}"), members, quota));
    }
    let budget = rng.random_range(config.budget_range.0..=config.budget_range.1);
    let tree = QuotaTree::partition(&ids, &groups, Some(budget))?;
    Ok((utility, tree))
}

/// One trial's outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub greedy: f64,
    pub optimal: f64,
    pub ratio: f64,
    pub seed: u64,
}

/// Fixed-width ratio histogram over [`RATIO_RANGE`]; the right-most bin is
/// closed, and out-of-range values are clamped into the edge bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

pub fn histogram(ratios: &[f64], bins: usize) -> Result<Histogram> {
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("histogram of no ratios".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument(
            "histogram needs at least one bin".into(),
        ));
    }
    let (lo, hi) = RATIO_RANGE;
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for &r in ratios {
        let idx = (((r - lo) / width).floor() as i64).clamp(0, bins as i64 - 1) as usize;
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Summary statistics; the 95% CI uses a normal approximation and the 5th
/// percentile uses the nearest-rank definition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std_dev: f64,
    pub ci95: (f64, f64),
    pub min: f64,
    pub percentile_5: f64,
}

pub fn summarize(ratios: &[f64]) -> Result<Summary> {
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("summary of no ratios".into()));
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let std_dev = if ratios.len() < 2 {
        0.0
    } else {
        let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
        var.sqrt()
    };
    let half = 1.96 * std_dev / n.sqrt();
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let rank = ((0.05 * n).ceil() as usize).max(1);
    Ok(Summary {
        mean,
        std_dev,
        ci95: (mean - half, mean + half),
        min: sorted[0],
        percentile_5: sorted[rank - 1],
    })
}

/// Full experiment output. The wall clock is measured but kept out of the
/// serialized report so same-seed runs emit identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub trials: usize,
    pub mean_ratio: f64,
    pub std_dev: f64,
    pub ci95: (f64, f64),
    pub min_ratio: f64,
    pub percentile_5: f64,
    pub histogram: Histogram,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialRecord> {
    let wrap = |e: Error| {
        if e.is_internal() {
            e
        } else {
            Error::SimulationTrial {
                trial,
                message: e.to_string(),
            }
        }
    };
    let (utility, tree) = generate_instance(config, trial).map_err(wrap)?;
    let greedy = greedy_select(&utility, &tree).map_err(wrap)?;
    let optimal = brute_force_optimal(&utility, &tree, BRUTE_FORCE_LIMIT).map_err(wrap)?;
    let ratio = approximation_ratio(&greedy, &optimal)?;
    if ratio < 0.5 - 1e-9 {
        return Err(Error::GuaranteeViolated { trial, ratio });
    }
    Ok(TrialRecord {
        trial,
        greedy: greedy.value,
        optimal: optimal.value,
        ratio,
        seed: trial_seed(config.seed, trial as u64),
    })
}

/// Run all trials and assemble the report. Trials execute in parallel when
/// the `parallel` feature is enabled; outputs are ordered by trial index
/// either way.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<TrialRecord>)> {
    config.validate()?;
    let start = std::time::Instant::now();

    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<TrialRecord>> = {
        use rayon::prelude::*;
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, t))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<TrialRecord>> =
        (0..config.trials).map(|t| run_trial(config, t)).collect();

    let mut records = Vec::with_capacity(config.trials);
    for outcome in outcomes {
        records.push(outcome?);
    }

    let ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    let summary = summarize(&ratios)?;
    let histogram = histogram(&ratios, DEFAULT_BINS)?;
    let report = ExperimentReport {
        config: config.clone(),
        trials: records.len(),
        mean_ratio: summary.mean,
        std_dev: summary.std_dev,
        ci95: summary.ci95,
        min_ratio: summary.min,
        percentile_5: summary.percentile_5,
        histogram,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, records))
}

/// `trials.csv` content: one row per trial, ordered by index.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("trial,greedy,optimal,ratio,seed\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.trial, r.greedy, r.optimal, r.ratio, r.seed
        ));
    }
    out
}

/// `histogram.csv` content: `bin_start,bin_end,count` per bin.
pub fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_start,bin_end,count\n");
    for (i, &count) in h.counts.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", h.edges[i], h.edges[i + 1], count));
    }
    out
}
