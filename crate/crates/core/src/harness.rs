//! Seeded Monte Carlo experiments whose results do not depend on how many
//! threads run them.
//!
//! Replication `i` of an experiment with master seed `s` draws its cloud
//! from `ChaCha8Rng::seed_from_u64(derive_rep_seed(s, i))`. Replications run
//! on the current rayon pool in chunks; results are always folded into the
//! statistics in replication order, so the floating-point reduction is the
//! same for every pool size.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::chains::{self, ChainRunResult, PointCloud};
use crate::error::{Error, Result};

/// Default fraction of the lower bound the mean ratio has to exceed.
pub const DEFAULT_LOWER_FRACTION: f64 = 0.8;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep_index`:
/// `mix64(master_seed ^ rep_index.wrapping_mul(0x9E3779B97F4A7C15))`, where
/// `mix64` is the SplitMix64 finalizer (shifts 30, 27, 31; multipliers
/// `0xBF58476D1CE4E5B9`, `0x94D049BB133111EB`). For a fixed index the map is
/// a bijection of the master seed, and for a fixed master distinct indices
/// below 2^64 give distinct seeds.
pub fn derive_rep_seed(master_seed: u64, rep_index: u64) -> u64 {
    mix64(master_seed ^ rep_index.wrapping_mul(GOLDEN_GAMMA))
}

/// Random stream for a derived seed.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Welford accumulator for mean, variance and extremes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance; zero with fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std_dev() / (self.count as f64).sqrt()
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Fastest exact route for the dimension.
    #[default]
    Auto,
    Quadratic,
    /// Patience sorting, `t = 2` only.
    Patience,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::Quadratic => "quadratic",
            Algorithm::Patience => "patience",
        }
    }

    pub fn run(self, cloud: &PointCloud) -> Result<ChainRunResult> {
        match self {
            Algorithm::Auto => chains::longest_chain(cloud),
            Algorithm::Quadratic => chains::longest_chain_quadratic(cloud),
            Algorithm::Patience => chains::longest_chain_patience(cloud),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Algorithm::Auto),
            "quadratic" => Ok(Algorithm::Quadratic),
            "patience" => Ok(Algorithm::Patience),
            other => Err(Error::Argument(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub t: usize,
    pub n: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub algorithm: Algorithm,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 || self.n == 0 || self.t == 0 {
            return Err(Error::Argument(format!(
                "need reps, n and t all >= 1 (reps = {}, n = {}, t = {})",
                self.reps, self.n, self.t
            )));
        }
        if self.algorithm == Algorithm::Patience && self.t != 2 {
            return Err(Error::Argument(format!(
                "patience sorting needs t = 2, got t = {}",
                self.t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub mean_ratio: f64,
    pub std_dev: f64,
    /// Half-width of the normal-approximation 95% interval, `1.96 σ / √reps`.
    pub ci95: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub per_rep: Vec<ChainRunResult>,
}

/// One replication, independent of every other.
pub fn run_replication(spec: &ExperimentSpec, rep_index: usize) -> Result<ChainRunResult> {
    let mut rng = stream(derive_rep_seed(spec.master_seed, rep_index as u64));
    let cloud = chains::sample_cloud(spec.n, spec.t, &mut rng);
    spec.algorithm.run(&cloud)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    run_experiment_with(spec, |_, _| {})
}

/// Runs `spec` on the current rayon pool, calling `on_rep` for every
/// replication in index order as soon as its chunk completes.
pub fn run_experiment_with<F>(spec: &ExperimentSpec, mut on_rep: F) -> Result<ExperimentResult>
where
    F: FnMut(usize, &ChainRunResult),
{
    spec.validate()?;
    let chunk = 2 * rayon::current_num_threads().max(1);
    let mut per_rep = Vec::with_capacity(spec.reps);
    let mut stats = RunningStats::new();
    let mut start = 0;
    while start < spec.reps {
        let end = (start + chunk).min(spec.reps);
        let batch = (start..end)
            .into_par_iter()
            .map(|i| run_replication(spec, i))
            .collect::<Result<Vec<_>>>()?;
        for (offset, r) in batch.into_iter().enumerate() {
            stats.push(r.ratio);
            on_rep(start + offset, &r);
            per_rep.push(r);
        }
        start = end;
    }
    let std_dev = stats.std_dev();
    Ok(ExperimentResult {
        spec: *spec,
        mean_ratio: stats.mean(),
        std_dev,
        ci95: 1.96 * std_dev / (spec.reps as f64).sqrt(),
        min_ratio: stats.min(),
        max_ratio: stats.max(),
        per_rep,
    })
}

/// Comparison of simulated ratios with the bound band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandVerdict {
    /// `max_ratio < bar_x`.
    pub upper_ok: bool,
    /// `bar_x - max_ratio`.
    pub upper_margin: f64,
    /// `mean_ratio > lower_fraction · bw_lower`.
    pub lower_ok: bool,
    /// `mean_ratio - lower_fraction · bw_lower`.
    pub lower_margin: f64,
    pub lower_fraction: f64,
}

impl BandVerdict {
    pub fn passed(&self) -> bool {
        self.upper_ok && self.lower_ok
    }
}

pub fn bound_band_check(result: &ExperimentResult, report: &BoundReport) -> Result<BandVerdict> {
    bound_band_check_with(result, report, DEFAULT_LOWER_FRACTION)
}

pub fn bound_band_check_with(
    result: &ExperimentResult,
    report: &BoundReport,
    lower_fraction: f64,
) -> Result<BandVerdict> {
    if result.spec.t != report.t as usize {
        return Err(Error::Argument(format!(
            "experiment has t = {} but bound report has t = {}",
            result.spec.t, report.t
        )));
    }
    let upper_margin = report.bar_x - result.max_ratio;
    let lower_margin = result.mean_ratio - lower_fraction * report.bw_lower;
    Ok(BandVerdict {
        upper_ok: upper_margin > 0.0,
        upper_margin,
        lower_ok: lower_margin > 0.0,
        lower_margin,
        lower_fraction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifySpec {
    pub t: usize,
    pub n: usize,
    pub ell: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Counting and integral estimates of the expected number of maximal chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub count_estimate: f64,
    pub count_se: f64,
    pub integral_estimate: f64,
    pub integral_se: f64,
    /// `|count - integral| / sqrt(count_se² + integral_se²)`; zero when both
    /// estimates coincide.
    pub z_score: f64,
}

/// Estimates `E[C_ℓ]` twice: by averaging exact maximal-chain counts over
/// sampled clouds, and by the integral estimator.
///
/// The counting side uses master seed `derive_rep_seed(seed, 0)` with one
/// derived stream per cloud; the integral side draws from a single stream
/// seeded with `derive_rep_seed(seed, 1)`.
pub fn verify_expected_count(spec: &VerifySpec) -> Result<VerifyResult> {
    if spec.t == 0 || spec.reps == 0 {
        return Err(Error::Argument("need t >= 1 and reps >= 1".into()));
    }
    if spec.n > chains::MAX_COUNT_POINTS {
        return Err(Error::SizeGuard(format!(
            "counting is limited to {} points, got {}",
            chains::MAX_COUNT_POINTS,
            spec.n
        )));
    }
    if spec.ell == 0 || spec.ell > spec.n {
        return Err(Error::Argument(format!(
            "need 1 <= ell <= n = {}, got ell = {}",
            spec.n, spec.ell
        )));
    }
    let count_master = derive_rep_seed(spec.seed, 0);
    let counts = (0..spec.reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(derive_rep_seed(count_master, i as u64));
            let cloud = chains::sample_cloud(spec.n, spec.t, &mut rng);
            chains::count_maximal_chains(&cloud, spec.ell).map(|c| c.count)
        })
        .collect::<Result<Vec<u64>>>()?;
    let mut stats = RunningStats::new();
    for c in counts {
        stats.push(c as f64);
    }

    let mut rng = stream(derive_rep_seed(spec.seed, 1));
    let integral =
        chains::expected_count_integral_mc(spec.n, spec.t, spec.ell, spec.reps, &mut rng)?;

    let diff = (stats.mean() - integral.estimate).abs();
    let se = stats.std_error().hypot(integral.std_error);
    let z_score = if diff == 0.0 { 0.0 } else { diff / se };
    Ok(VerifyResult {
        count_estimate: stats.mean(),
        count_se: stats.std_error(),
        integral_estimate: integral.estimate,
        integral_se: integral.std_error,
        z_score,
    })
}
