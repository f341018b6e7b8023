//! Closed-form rate expressions for random caching with XOR delivery.
//!
//! The central quantity is the per-file rate factor
//!
//! ```text
//! f(q) = (1 - q) / q * (1 - (1 - q)^K),   f(0) = K,  f(1) = 0
//! ```
//!
//! the expected number of broadcast slots (per file-size unit) needed to
//! deliver one file that every user cached a `q` fraction of, assuming bits
//! always ride in the largest multicast their cover set allows. Averaging
//! `f(q_i)` over the popularity yields a lower bound on the delivery rate of
//! any scheduler operating on a random placement, and evaluating it at the
//! uniform fraction `M/N` gives the classic worst-case rate.

use crate::model::{CacheAllocation, Popularity};
use crate::Error;

/// Arguments below this threshold take the analytic limit branch.
pub(crate) const LIMIT_EPS: f64 = 1e-12;

/// `1 - (1 - x)^k`, computed without cancellation for tiny `x`.
pub(crate) fn one_minus_pow(x: f64, k: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    -((k as f64) * (-x).ln_1p()).exp_m1()
}

/// The per-file rate factor `f(q)` described in the module docs.
pub(crate) fn per_file_rate(q: f64, n_users: usize) -> f64 {
    let k = n_users as f64;
    if q < LIMIT_EPS {
        return k;
    }
    if q >= 1.0 {
        return 0.0;
    }
    (1.0 - q) / q * one_minus_pow(q, n_users)
}

fn check_users(n_users: usize) -> Result<(), Error> {
    if n_users == 0 {
        return Err(Error::InvalidParameter("n_users must be positive".into()));
    }
    Ok(())
}

/// Worst-case delivery rate of uniform random caching: `f(M/N)` with the
/// limit value `K` at `M = 0`.
pub fn worst_case_rate(memory: f64, n_files: usize, n_users: usize) -> Result<f64, Error> {
    check_users(n_users)?;
    if n_files == 0 {
        return Err(Error::InvalidParameter("n_files must be positive".into()));
    }
    if !memory.is_finite() || memory < 0.0 || memory > n_files as f64 {
        return Err(Error::InvalidParameter(format!(
            "memory {} outside [0, {}]",
            memory, n_files
        )));
    }
    Ok(per_file_rate(memory / n_files as f64, n_users))
}

/// Expected-rate lower bound for an arbitrary allocation: the popularity
/// average of `f(q_i)`. Every scheduler operating on this placement has an
/// expected rate at least this large.
pub fn lower_bound_rate(
    allocation: &CacheAllocation,
    popularity: &Popularity,
    n_users: usize,
) -> Result<f64, Error> {
    check_users(n_users)?;
    if allocation.len() != popularity.len() {
        return Err(Error::DimensionMismatch(format!(
            "allocation has {} files, popularity {}",
            allocation.len(),
            popularity.len()
        )));
    }
    Ok(allocation
        .fractions()
        .iter()
        .zip(popularity.probs())
        .map(|(&q, &p)| p * per_file_rate(q, n_users))
        .sum())
}

/// Rate of plain unicast delivery: every user fetches the uncached
/// `1 - M/N` remainder of its file separately.
pub fn uncoded_rate(memory: f64, n_files: usize, n_users: usize) -> Result<f64, Error> {
    check_users(n_users)?;
    if n_files == 0 {
        return Err(Error::InvalidParameter("n_files must be positive".into()));
    }
    if !memory.is_finite() || memory < 0.0 || memory > n_files as f64 {
        return Err(Error::InvalidParameter(format!(
            "memory {} outside [0, {}]",
            memory, n_files
        )));
    }
    Ok(n_users as f64 * (1.0 - memory / n_files as f64))
}

/// Expected delivery rate of one file group that received memory `m_l` over
/// `n_l` files and attracts a user with probability `p_l`:
///
/// ```text
/// (1 - m) / m * (1 - (1 - m * p_l)^K),   m = m_l / n_l
/// ```
///
/// with the limit value `K * p_l` at `m = 0`. The group is served by its own
/// multicast rounds, so users outside it contribute nothing.
pub fn grouped_expected_rate(
    group_memory: f64,
    group_files: usize,
    group_prob: f64,
    n_users: usize,
) -> Result<f64, Error> {
    check_users(n_users)?;
    if group_files == 0 {
        return Err(Error::InvalidParameter("group has no files".into()));
    }
    if !group_memory.is_finite() || group_memory < 0.0 || group_memory > group_files as f64 {
        return Err(Error::InvalidParameter(format!(
            "group memory {} outside [0, {}]",
            group_memory, group_files
        )));
    }
    if !(0.0..=1.0 + 1e-12).contains(&group_prob) {
        return Err(Error::InvalidParameter(format!(
            "group probability {} outside [0, 1]",
            group_prob
        )));
    }
    let k = n_users as f64;
    let m = group_memory / group_files as f64;
    if m < LIMIT_EPS {
        return Ok(k * group_prob);
    }
    Ok((1.0 - m) / m * one_minus_pow((m * group_prob).min(1.0), n_users))
}

/// One point of a rate-versus-memory curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCurvePoint {
    pub memory: f64,
    pub rate: f64,
}

/// Samples [`worst_case_rate`] over a memory grid.
pub fn worst_case_curve(
    memory_grid: &[f64],
    n_files: usize,
    n_users: usize,
) -> Result<Vec<RateCurvePoint>, Error> {
    memory_grid
        .iter()
        .map(|&memory| {
            Ok(RateCurvePoint {
                memory,
                rate: worst_case_rate(memory, n_files, n_users)?,
            })
        })
        .collect()
}
