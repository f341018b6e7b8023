//! Monte-Carlo experiment engine: popularity synthesis, random placement,
//! request sampling, and rate averaging.
//!
//! Randomness follows a counter-splitting discipline: one master seed plus a
//! trial index derive independent ChaCha streams for request sampling and
//! for every `(user, file)` cache realization. Trials therefore parallelize
//! freely and a configuration reproduces bit-identical statistics on every
//! run. Because the cache stream for a `(user, file)` pair never depends on
//! which other files were realized, an experiment only realizes the files
//! that are actually requested in a trial; the shortcut is distributionally
//! exact, not an approximation, and [`trial_demand_bits`] is tested to match
//! the full realization bit for bit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::allocation::{
    group_files, solve_exact_allocation, solve_group_allocation, solve_sqrt_allocation,
    uniform_allocation, Grouping,
};
use crate::delivery::{
    deliver_bgd, deliver_grouped, deliver_od, deliver_semi_sgd, deliver_sgd, deliver_uncoded,
};
use crate::model::{
    BitRecord, CacheAllocation, PlacementRealization, Popularity, RequestVector, SystemParams,
    TransmissionLog, UserSet,
};
use crate::Error;

// ---- Schemes ----

/// How the caching fractions `q_i` are chosen before any request is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementScheme {
    /// `q_i = M/N` for every file.
    Uniform,
    /// Exact convex-program optimizer.
    ExactKkt,
    /// Closed-form square-root approximation.
    Sqrt,
    /// Popularity bands with a per-band memory split.
    Grouped,
}

impl PlacementScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            PlacementScheme::Uniform => "UNIFORM",
            PlacementScheme::ExactKkt => "EXACT_KKT",
            PlacementScheme::Sqrt => "SQRT",
            PlacementScheme::Grouped => "GROUPED",
        }
    }
}

impl std::str::FromStr for PlacementScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "UNIFORM" => Ok(PlacementScheme::Uniform),
            "EXACT_KKT" | "EXACT" => Ok(PlacementScheme::ExactKkt),
            "SQRT" => Ok(PlacementScheme::Sqrt),
            "GROUPED" => Ok(PlacementScheme::Grouped),
            other => Err(Error::Config(format!(
                "unknown placement scheme '{}' (expected UNIFORM, EXACT_KKT, SQRT, or GROUPED)",
                other
            ))),
        }
    }
}

/// Which scheduler turns demand bits into slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryScheme {
    Od,
    Sgd,
    SemiSgd,
    Bgd,
    GroupedOd,
    Uncoded,
}

impl DeliveryScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            DeliveryScheme::Od => "OD",
            DeliveryScheme::Sgd => "SGD",
            DeliveryScheme::SemiSgd => "SEMI_SGD",
            DeliveryScheme::Bgd => "BGD",
            DeliveryScheme::GroupedOd => "GROUPED_OD",
            DeliveryScheme::Uncoded => "UNCODED",
        }
    }

    pub const ALL: [DeliveryScheme; 6] = [
        DeliveryScheme::Od,
        DeliveryScheme::Sgd,
        DeliveryScheme::SemiSgd,
        DeliveryScheme::Bgd,
        DeliveryScheme::GroupedOd,
        DeliveryScheme::Uncoded,
    ];
}

impl std::str::FromStr for DeliveryScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "OD" => Ok(DeliveryScheme::Od),
            "SGD" => Ok(DeliveryScheme::Sgd),
            "SEMI_SGD" | "SEMISGD" => Ok(DeliveryScheme::SemiSgd),
            "BGD" => Ok(DeliveryScheme::Bgd),
            "GROUPED_OD" | "GROUPEDOD" => Ok(DeliveryScheme::GroupedOd),
            "UNCODED" => Ok(DeliveryScheme::Uncoded),
            other => Err(Error::Config(format!(
                "unknown delivery scheme '{}' (expected OD, SGD, SEMI_SGD, BGD, GROUPED_OD, or UNCODED)",
                other
            ))),
        }
    }
}

// ---- Configuration and statistics ----

/// One rate-memory experiment: a system shape, a placement/delivery pair,
/// a memory grid, and the Monte-Carlo budget.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_files: usize,
    pub n_users: usize,
    pub file_size_bits: usize,
    pub zipf_alpha: f64,
    pub placement: PlacementScheme,
    pub delivery: DeliveryScheme,
    pub memory_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !self.zipf_alpha.is_finite() || self.zipf_alpha < 0.0 {
            return Err(Error::Config("zipf_alpha must be finite and >= 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.memory_grid.is_empty() {
            return Err(Error::Config("memory_grid must be nonempty".into()));
        }
        for &m in &self.memory_grid {
            if !m.is_finite() || m < 0.0 || m > self.n_files as f64 {
                return Err(Error::Config(format!(
                    "memory {} outside [0, {}]",
                    m, self.n_files
                )));
            }
        }
        let grouped_placement = self.placement == PlacementScheme::Grouped;
        let grouped_delivery = self.delivery == DeliveryScheme::GroupedOd;
        if grouped_placement != grouped_delivery {
            return Err(Error::Config(
                "GROUPED placement and GROUPED_OD delivery must be used together".into(),
            ));
        }
        // Shape errors (user count, file count, file size) surface here
        // rather than mid-experiment.
        SystemParams::new(
            self.n_files,
            self.n_users,
            self.file_size_bits,
            self.memory_grid[0],
        )?;
        Ok(())
    }
}

/// Sample mean and standard error of the per-trial rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateStatistics {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl RateStatistics {
    pub fn from_rates(rates: &[f64]) -> Self {
        let n = rates.len();
        assert!(n >= 1, "statistics need at least one trial");
        let mean = rates.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
                / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            trials: n,
        }
    }
}

// ---- Popularity ----

/// Zipf popularity: `p_i` proportional to `i^(-alpha)` over 1-based ranks,
/// so the vector is descending by construction. `alpha = 0` is uniform.
pub fn zipf_popularity(n_files: usize, alpha: f64) -> Result<Popularity, Error> {
    if n_files == 0 {
        return Err(Error::InvalidParameter("n_files must be positive".into()));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidParameter(
            "zipf alpha must be finite and >= 0".into(),
        ));
    }
    let weights: Vec<f64> = (1..=n_files)
        .map(|rank| (rank as f64).powf(-alpha))
        .collect();
    let total: f64 = weights.iter().sum();
    Popularity::new(weights.into_iter().map(|w| w / total).collect())
}

// ---- Seeded streams ----

/// The 64-bit finalizer used to chain stream tags into ChaCha keys.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn chain(state: u64, tag: u64) -> u64 {
    mix(state.wrapping_add(GOLDEN).wrapping_add(tag))
}

fn rng_for(state: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let mut s = state;
    for chunk in key.chunks_exact_mut(8) {
        s = s.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&mix(s).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Independent random streams for one trial, split by purpose so that the
/// cache stream of a `(user, file)` pair is the same whether or not any
/// other pair is realized.
#[derive(Debug, Clone, Copy)]
pub struct TrialStreams {
    base: u64,
}

impl TrialStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self {
            base: chain(mix(seed), trial),
        }
    }

    /// Stream driving the K request draws.
    pub fn requests(&self) -> ChaCha12Rng {
        rng_for(chain(self.base, 1))
    }

    /// Stream driving one user's cache selection for one file.
    pub fn cache(&self, user: usize, file: usize) -> ChaCha12Rng {
        rng_for(chain(chain(chain(self.base, 2), user as u64), file as u64))
    }
}

// ---- Sampling ----

/// Draws `n_users` i.i.d. requests by inverse CDF over the popularity.
pub fn sample_requests(
    popularity: &Popularity,
    n_users: usize,
    rng: &mut ChaCha12Rng,
) -> RequestVector {
    let probs = popularity.probs();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let requests: Vec<usize> = (0..n_users)
        .map(|_| {
            let u: f64 = rng.gen();
            cumulative
                .partition_point(|&c| c <= u)
                .min(probs.len() - 1)
        })
        .collect();
    RequestVector::new(requests, probs.len()).expect("sampled indices are in range")
}

/// Uniformly random `round(q * F)`-subset of `0..F`, sorted ascending.
fn sample_cached_bits(rng: &mut ChaCha12Rng, fraction: f64, file_size_bits: usize) -> Vec<u32> {
    let count = ((fraction * file_size_bits as f64).round() as usize).min(file_size_bits);
    if count == 0 {
        return Vec::new();
    }
    let mut indices: Vec<u32> = (0..file_size_bits as u32).collect();
    for i in 0..count {
        let j = rng.gen_range(i..file_size_bits);
        indices.swap(i, j);
    }
    let mut chosen = indices;
    chosen.truncate(count);
    chosen.sort_unstable();
    chosen
}

/// Realizes the random placement: every user independently caches a uniform
/// `round(q_i * F)`-subset of each file's bits.
pub fn realize_placement(
    allocation: &CacheAllocation,
    params: &SystemParams,
    streams: &TrialStreams,
) -> Result<PlacementRealization, Error> {
    if allocation.len() != params.n_files {
        return Err(Error::DimensionMismatch(format!(
            "allocation has {} fractions for {} files",
            allocation.len(),
            params.n_files
        )));
    }
    let cached: Vec<Vec<Vec<u32>>> = (0..params.n_users)
        .map(|user| {
            (0..params.n_files)
                .map(|file| {
                    let mut rng = streams.cache(user, file);
                    sample_cached_bits(&mut rng, allocation.fractions()[file], params.file_size_bits)
                })
                .collect()
        })
        .collect();
    PlacementRealization::new(params, cached)
}

/// Samples one trial's requests and demand bits, realizing only the files
/// that were actually requested.
///
/// Produces exactly the bits of
/// `compute_demand_bits(realize_placement(..), sample_requests(..))`
/// because every `(user, file)` cache stream is independent of the set of
/// files realized.
pub fn trial_demand_bits(
    allocation: &CacheAllocation,
    params: &SystemParams,
    popularity: &Popularity,
    streams: &TrialStreams,
) -> Result<(RequestVector, Vec<BitRecord>), Error> {
    if allocation.len() != params.n_files || popularity.len() != params.n_files {
        return Err(Error::DimensionMismatch(
            "allocation, popularity, and params disagree on the file count".into(),
        ));
    }
    let requests = sample_requests(popularity, params.n_users, &mut streams.requests());

    let mut wanted: Vec<usize> = requests.files().to_vec();
    wanted.sort_unstable();
    wanted.dedup();

    // Per requested file, the per-bit mask of users caching that bit.
    let mut masks: Vec<(usize, Vec<u64>)> = Vec::with_capacity(wanted.len());
    for &file in &wanted {
        let mut file_masks = vec![0u64; params.file_size_bits];
        for user in 0..params.n_users {
            let mut rng = streams.cache(user, file);
            for b in sample_cached_bits(&mut rng, allocation.fractions()[file], params.file_size_bits)
            {
                file_masks[b as usize] |= 1 << user;
            }
        }
        masks.push((file, file_masks));
    }

    let mut bits = Vec::new();
    for user in 0..params.n_users {
        let file = requests.file_for(user);
        let slot = masks
            .binary_search_by_key(&file, |(f, _)| *f)
            .expect("requested files were realized");
        let own = 1u64 << user;
        for (bit_index, &mask) in masks[slot].1.iter().enumerate() {
            if mask & own == 0 {
                bits.push(BitRecord {
                    file,
                    bit_index,
                    intended_user: user,
                    cover_set: UserSet::from_mask(mask),
                });
            }
        }
    }
    Ok((requests, bits))
}

// ---- Experiment driver ----

/// Computes the allocation a placement scheme assigns, plus the grouping
/// when the scheme has one.
pub fn placement_allocation(
    scheme: PlacementScheme,
    popularity: &Popularity,
    params: &SystemParams,
) -> Result<(CacheAllocation, Option<Grouping>), Error> {
    match scheme {
        PlacementScheme::Uniform => Ok((uniform_allocation(params), None)),
        PlacementScheme::ExactKkt => {
            Ok((solve_exact_allocation(popularity, params)?.allocation, None))
        }
        PlacementScheme::Sqrt => Ok((solve_sqrt_allocation(popularity, params)?, None)),
        PlacementScheme::Grouped => {
            let solved = solve_group_allocation(&group_files(popularity), params)?;
            let fractions = solved.file_fractions()?;
            Ok((fractions, Some(solved)))
        }
    }
}

fn run_delivery(
    scheme: DeliveryScheme,
    bits: &[BitRecord],
    grouping: Option<&Grouping>,
    requests: &RequestVector,
    params: &SystemParams,
) -> Result<TransmissionLog, Error> {
    let k = params.n_users;
    let f = params.file_size_bits;
    match scheme {
        DeliveryScheme::Od => deliver_od(bits, k, f),
        DeliveryScheme::Sgd => deliver_sgd(bits, k, f),
        DeliveryScheme::SemiSgd => deliver_semi_sgd(bits, k, f),
        DeliveryScheme::Bgd => deliver_bgd(bits, k, f),
        DeliveryScheme::GroupedOd => {
            let grouping = grouping.ok_or_else(|| {
                Error::Config("GROUPED_OD delivery needs a grouped placement".into())
            })?;
            deliver_grouped(bits, grouping, requests, k, f)
        }
        DeliveryScheme::Uncoded => deliver_uncoded(bits, k, f),
    }
}

/// Runs the Monte-Carlo experiment: for each memory value, the allocation
/// is solved once, then every trial realizes a placement, samples requests,
/// schedules the demand bits, and records `slots / F`.
///
/// Trials run in parallel; aggregation is in trial order, so results are a
/// pure function of the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<(f64, RateStatistics)>, Error> {
    config.validate()?;
    let popularity = zipf_popularity(config.n_files, config.zipf_alpha)?;
    let mut rows = Vec::with_capacity(config.memory_grid.len());
    for &memory in &config.memory_grid {
        let params = SystemParams::new(
            config.n_files,
            config.n_users,
            config.file_size_bits,
            memory,
        )?;
        let (allocation, grouping) =
            placement_allocation(config.placement, &popularity, &params)?;
        let rates: Vec<f64> = (0..config.trials)
            .into_par_iter()
            .map(|trial| -> Result<f64, Error> {
                let streams = TrialStreams::new(config.seed, trial as u64);
                let (requests, bits) =
                    trial_demand_bits(&allocation, &params, &popularity, &streams)?;
                let log = run_delivery(
                    config.delivery,
                    &bits,
                    grouping.as_ref(),
                    &requests,
                    &params,
                )?;
                Ok(log.rate())
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        rows.push((memory, RateStatistics::from_rates(&rates)));
    }
    Ok(rows)
}
