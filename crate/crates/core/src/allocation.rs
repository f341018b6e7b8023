//! Optimizers for the per-file caching fractions `q_i`.
//!
//! Minimizing the expected-rate lower bound `sum_i p_i * f(q_i)` subject to
//! the memory budget `sum_i q_i = M` is a convex program. Its stationarity
//! condition couples popularity to fraction through
//!
//! ```text
//! h(x) = x^2 / (1 - (1-x)^K * (1 + K*x))
//! ```
//!
//! which rises from `2 / (K*(K+1))` at `x = 0+` to `1` at `x = 1`: a file
//! sits at the interior fraction `q_i = h^{-1}(p_i / nu)` for the dual value
//! `nu` that exhausts the budget, is fully cached once `p_i >= nu`, and is
//! skipped once `p_i <= 2*nu / (K*(K+1))`. [`solve_exact_allocation`] finds
//! `nu` by bisection; [`solve_sqrt_allocation`] uses the closed-form
//! `q_i = min(sqrt(p_i / nu), 1)` approximation; [`solve_group_allocation`]
//! solves the analogous program over popularity bands so every file in a
//! band shares one fraction.

use crate::bounds::LIMIT_EPS;
use crate::model::{CacheAllocation, Popularity, SystemParams};
use crate::Error;

/// Which side of the water-filling solution a file landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Fully cached: `q_i = 1`.
    Saturated,
    /// Strictly between the thresholds: `q_i = h^{-1}(p_i / nu)`.
    Interior,
    /// Not cached at all: `q_i = 0`.
    Zero,
}

/// Output of [`solve_exact_allocation`]: the fractions, the dual value `nu`
/// of the budget constraint, and the per-file regime.
#[derive(Debug, Clone)]
pub struct KktSolution {
    pub allocation: CacheAllocation,
    pub dual: f64,
    pub regimes: Vec<Regime>,
}

/// Tolerance used when classifying a file's regime at the final dual value.
const REGIME_TOL: f64 = 1e-9;

// ---- The stationarity map h ----

fn check_h_args(x: f64, n_users: usize) -> Result<(), Error> {
    if n_users == 0 {
        return Err(Error::InvalidParameter("n_users must be positive".into()));
    }
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "h argument {} outside [0, 1]",
            x
        )));
    }
    Ok(())
}

/// `(1-x)^k` without cancellation near `x = 1`.
fn pow_one_minus(x: f64, k: usize) -> f64 {
    if x >= 1.0 {
        return 0.0;
    }
    ((k as f64) * (-x).ln_1p()).exp()
}

fn h_raw(x: f64, n_users: usize) -> f64 {
    let k = n_users as f64;
    // The denominator 1 - (1-x)^K (1+Kx) collapses to K(K+1)/2 x^2 as x
    // shrinks. The log-space form below cancels two terms of size Kx down
    // to K^2 x^2, so its relative noise grows like eps/(Kx); the series
    // takes over before that passes ~1e-12.
    if k * x < 1e-4 {
        let lin = 2.0 * (k - 1.0) / 3.0;
        let quad = (k - 1.0) * (7.0 * k + 2.0) / 36.0;
        return 2.0 / (k * (k + 1.0)) * (1.0 + lin * x + quad * x * x);
    }
    let exponent = k * (-x).ln_1p() + (k * x).ln_1p();
    let denom = -exponent.exp_m1();
    x * x / denom
}

/// Evaluates `h(x)`, taking the limit value `2 / (K*(K+1))` at `x = 0`.
pub fn h_eval(x: f64, n_users: usize) -> Result<f64, Error> {
    check_h_args(x, n_users)?;
    Ok(h_raw(x, n_users))
}

/// Inverts `h` by bisection: returns the `x` in `[0, 1]` with `h(x) = y`.
///
/// `y` must lie in `[2 / (K*(K+1)), 1]` (within `1e-9`); values at the lower
/// endpoint map to `0`. Requires at least two users, since `h` degenerates
/// to the constant `1` for one user.
pub fn h_inverse(y: f64, n_users: usize) -> Result<f64, Error> {
    if n_users < 2 {
        return Err(Error::InvalidParameter(
            "h is constant for one user and cannot be inverted".into(),
        ));
    }
    let k = n_users as f64;
    let floor = 2.0 / (k * (k + 1.0));
    if !y.is_finite() || y < floor - REGIME_TOL || y > 1.0 + REGIME_TOL {
        return Err(Error::InvalidParameter(format!(
            "h image point {} outside [{}, 1]",
            y, floor
        )));
    }
    let y = y.clamp(floor, 1.0);
    if y <= floor {
        return Ok(0.0);
    }
    if y >= 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h_raw(mid, n_users) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---- Simple allocations ----

/// Every file gets the same fraction `M/N`.
pub fn uniform_allocation(params: &SystemParams) -> CacheAllocation {
    let q = params.memory / params.n_files as f64;
    CacheAllocation::new(vec![q; params.n_files], params.memory)
        .expect("uniform fractions always satisfy the budget")
}

fn check_popularity(popularity: &Popularity, params: &SystemParams) -> Result<(), Error> {
    if popularity.len() != params.n_files {
        return Err(Error::DimensionMismatch(format!(
            "popularity has {} entries for {} files",
            popularity.len(),
            params.n_files
        )));
    }
    Ok(())
}

/// Distributes whatever budget remains after saturating every file with
/// positive popularity. Only reachable when `M` exceeds that file count;
/// zero-popularity files then absorb the remainder evenly so the budget
/// invariant still holds.
fn fill_zero_popularity(fractions: &mut [f64], probs: &[f64], memory: f64) {
    let spare: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] == 0.0).collect();
    if spare.is_empty() {
        return;
    }
    let used: f64 = fractions.iter().sum();
    let leftover = ((memory - used) / spare.len() as f64).clamp(0.0, 1.0);
    for i in spare {
        fractions[i] = leftover;
    }
}

// ---- Exact water filling ----

fn exact_fraction(p: f64, nu: f64, n_users: usize) -> (f64, Regime) {
    let k = n_users as f64;
    if p >= nu {
        return (1.0, Regime::Saturated);
    }
    if p <= 2.0 * nu / (k * (k + 1.0)) {
        return (0.0, Regime::Zero);
    }
    let x = h_inverse(p / nu, n_users).expect("interior ratio lies in the image of h");
    (x, Regime::Interior)
}

/// One-user budgets have a linear objective; fill the most popular files
/// first and give the marginal file the fractional remainder.
fn greedy_by_weight(weights: &[f64], capacities: &[f64], budget: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    let mut out = vec![0.0; weights.len()];
    let mut remaining = budget;
    for i in order {
        if remaining <= 0.0 {
            break;
        }
        let take = remaining.min(capacities[i]);
        out[i] = take;
        remaining -= take;
    }
    out
}

/// Solves the exact convex program for the caching fractions.
///
/// Returns the optimizer of `sum_i p_i f(q_i)` under `sum_i q_i = M`,
/// `0 <= q_i <= 1`, together with the dual value and per-file regimes. The
/// budget is met within `1e-8`; `M = 0` and `M = N` short-circuit to all
/// zeros and all ones.
pub fn solve_exact_allocation(
    popularity: &Popularity,
    params: &SystemParams,
) -> Result<KktSolution, Error> {
    check_popularity(popularity, params)?;
    let probs = popularity.probs();
    let n = params.n_files;
    let k = params.n_users;
    let memory = params.memory;

    let max_p = probs.iter().cloned().fold(0.0f64, f64::max);
    if memory <= 0.0 {
        let allocation = CacheAllocation::new(vec![0.0; n], 0.0)?;
        let dual = max_p * k as f64 * (k as f64 + 1.0) / 2.0;
        return Ok(KktSolution {
            allocation,
            dual,
            regimes: vec![Regime::Zero; n],
        });
    }
    if memory >= n as f64 {
        let allocation = CacheAllocation::new(vec![1.0; n], n as f64)?;
        return Ok(KktSolution {
            allocation,
            dual: 0.0,
            regimes: vec![Regime::Saturated; n],
        });
    }

    let positive = probs.iter().filter(|&&p| p > 0.0).count();
    if memory >= positive as f64 {
        // Saturate every requested file; park the excess on dead files.
        let mut fractions: Vec<f64> =
            probs.iter().map(|&p| if p > 0.0 { 1.0 } else { 0.0 }).collect();
        fill_zero_popularity(&mut fractions, probs, memory);
        let regimes = fractions
            .iter()
            .zip(probs)
            .map(|(&q, &p)| {
                if p > 0.0 || q >= 1.0 {
                    Regime::Saturated
                } else if q <= 0.0 {
                    Regime::Zero
                } else {
                    Regime::Interior
                }
            })
            .collect();
        let allocation = CacheAllocation::new(fractions, memory)?;
        return Ok(KktSolution {
            allocation,
            dual: 0.0,
            regimes,
        });
    }

    if k == 1 {
        let fractions = greedy_by_weight(probs, &vec![1.0; n], memory);
        let dual = fractions
            .iter()
            .zip(probs)
            .filter(|(&q, _)| q < 1.0)
            .map(|(_, &p)| p)
            .fold(0.0f64, f64::max);
        let regimes = fractions
            .iter()
            .map(|&q| {
                if q >= 1.0 {
                    Regime::Saturated
                } else if q <= 0.0 {
                    Regime::Zero
                } else {
                    Regime::Interior
                }
            })
            .collect();
        let allocation = CacheAllocation::new(fractions, memory)?;
        return Ok(KktSolution {
            allocation,
            dual,
            regimes,
        });
    }

    // The budget is non-increasing in nu: every file saturates as nu -> 0,
    // and every file drops to zero once nu >= max_p * K(K+1)/2.
    let kf = k as f64;
    let budget_at = |nu: f64| -> f64 {
        probs
            .iter()
            .map(|&p| exact_fraction(p, nu, k).0)
            .sum::<f64>()
    };
    let mut lo = 0.0f64;
    let mut hi = max_p * kf * (kf + 1.0) / 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if budget_at(mid) > memory {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * hi.max(1.0) {
            break;
        }
    }
    let dual = 0.5 * (lo + hi);

    let mut fractions = Vec::with_capacity(n);
    let mut regimes = Vec::with_capacity(n);
    for &p in probs {
        let (q, regime) = exact_fraction(p, dual, k);
        fractions.push(q);
        regimes.push(regime);
    }
    let total: f64 = fractions.iter().sum();
    if (total - memory).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "water filling converged to budget {} instead of {}",
            total, memory
        )));
    }
    let allocation = CacheAllocation::new(fractions, memory)?;
    Ok(KktSolution {
        allocation,
        dual,
        regimes,
    })
}

/// Solves the square-root approximation `q_i = min(sqrt(p_i / nu), 1)`.
///
/// The scale is found by bisection so the budget is met within `1e-8`.
/// Files with zero popularity stay uncached unless the budget exceeds the
/// number of requested files.
pub fn solve_sqrt_allocation(
    popularity: &Popularity,
    params: &SystemParams,
) -> Result<CacheAllocation, Error> {
    check_popularity(popularity, params)?;
    let probs = popularity.probs();
    let n = params.n_files;
    let memory = params.memory;

    if memory <= 0.0 {
        return CacheAllocation::new(vec![0.0; n], 0.0);
    }
    if memory >= n as f64 {
        return CacheAllocation::new(vec![1.0; n], n as f64);
    }
    let roots: Vec<f64> = probs.iter().map(|&p| p.sqrt()).collect();
    let positive = probs.iter().filter(|&&p| p > 0.0).count();
    if memory >= positive as f64 {
        let mut fractions: Vec<f64> =
            probs.iter().map(|&p| if p > 0.0 { 1.0 } else { 0.0 }).collect();
        fill_zero_popularity(&mut fractions, probs, memory);
        return CacheAllocation::new(fractions, memory);
    }

    // Parameterize by s = 1/sqrt(nu); the budget is non-decreasing in s and
    // reaches the positive-file count once s covers the smallest popularity.
    let min_positive = probs
        .iter()
        .cloned()
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    let mut lo = 0.0f64;
    let mut hi = 1.0 / min_positive.sqrt();
    let budget_at = |s: f64| -> f64 { roots.iter().map(|&r| (r * s).min(1.0)).sum() };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if budget_at(mid) < memory {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * hi.max(1.0) {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let fractions: Vec<f64> = roots.iter().map(|&r| (r * s).min(1.0)).collect();
    let total: f64 = fractions.iter().sum();
    if (total - memory).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "sqrt allocation converged to budget {} instead of {}",
            total, memory
        )));
    }
    CacheAllocation::new(fractions, memory)
}

// ---- Grouped allocation ----

/// A partition of the files into popularity bands, with each band's total
/// request probability and assigned memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    n_files: usize,
    blocks: Vec<Vec<usize>>,
    group_probs: Vec<f64>,
    group_memories: Vec<f64>,
}

impl Grouping {
    pub fn new(
        n_files: usize,
        blocks: Vec<Vec<usize>>,
        group_probs: Vec<f64>,
        group_memories: Vec<f64>,
    ) -> Result<Self, Error> {
        if blocks.len() != group_probs.len() || blocks.len() != group_memories.len() {
            return Err(Error::DimensionMismatch(
                "blocks, probabilities, and memories must align".into(),
            ));
        }
        let mut seen = vec![false; n_files];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidParameter("empty group block".into()));
            }
            for &i in block {
                if i >= n_files || seen[i] {
                    return Err(Error::InvalidParameter(
                        "blocks must partition the file range".into(),
                    ));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidParameter(
                "blocks must cover every file".into(),
            ));
        }
        for (block, &m) in blocks.iter().zip(&group_memories) {
            if !(0.0..=block.len() as f64 + 1e-9).contains(&m) {
                return Err(Error::InvalidParameter(
                    "group memory outside [0, group size]".into(),
                ));
            }
        }
        Ok(Self {
            n_files,
            blocks,
            group_probs,
            group_memories,
        })
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn group_probs(&self) -> &[f64] {
        &self.group_probs
    }

    pub fn group_memories(&self) -> &[f64] {
        &self.group_memories
    }

    /// Map from file index to its group index.
    pub fn group_of_file(&self) -> Vec<usize> {
        let mut map = vec![0usize; self.n_files];
        for (g, block) in self.blocks.iter().enumerate() {
            for &i in block {
                map[i] = g;
            }
        }
        map
    }

    /// Per-file fractions `M_l / N_l`, uniform inside each group.
    pub fn file_fractions(&self) -> Result<CacheAllocation, Error> {
        let mut fractions = vec![0.0; self.n_files];
        for (block, &m) in self.blocks.iter().zip(&self.group_memories) {
            let q = (m / block.len() as f64).clamp(0.0, 1.0);
            for &i in block {
                fractions[i] = q;
            }
        }
        let memory = self.group_memories.iter().sum();
        CacheAllocation::new(fractions, memory)
    }
}

/// Splits files into popularity bands where the most and least popular file
/// differ by at most a factor of two.
///
/// Files are taken in descending popularity (ties keep file order); a new
/// band opens whenever the current band's top popularity exceeds twice the
/// next file's. Zero-popularity files end up in a band of their own. The
/// returned grouping has all memories zero; feed it through
/// [`solve_group_allocation`] to fill them.
pub fn group_files(popularity: &Popularity) -> Grouping {
    let probs = popularity.probs();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap().then(a.cmp(&b)));

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_top = 0.0f64;
    for i in order {
        let p = probs[i];
        // Written multiplicatively so the zero-popularity tail forms one band.
        let fits = match blocks.last() {
            Some(_) => 2.0 * p >= block_top,
            None => false,
        };
        if fits {
            blocks.last_mut().unwrap().push(i);
        } else {
            blocks.push(vec![i]);
            block_top = p;
        }
    }
    let group_probs: Vec<f64> = blocks
        .iter()
        .map(|block| block.iter().map(|&i| probs[i]).sum())
        .collect();
    let group_memories = vec![0.0; blocks.len()];
    Grouping::new(probs.len(), blocks, group_probs, group_memories)
        .expect("bands partition the file range by construction")
}

/// Derivative of the group rate `f(x) = (P - x)/x * (1 - (1-x)^K)` in the
/// substituted variable `x = (M_l/N_l) * P_l`, with the limit value
/// `-P*K*(K-1)/2 - K` at `x = 0+`.
pub fn grouped_rate_slope(x: f64, group_prob: f64, n_users: usize) -> Result<f64, Error> {
    if n_users == 0 {
        return Err(Error::InvalidParameter("n_users must be positive".into()));
    }
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "slope argument {} outside [0, 1]",
            x
        )));
    }
    let k = n_users as f64;
    if n_users == 1 {
        return Ok(-1.0);
    }
    if x < LIMIT_EPS {
        return Ok(-group_prob * k * (k - 1.0) / 2.0 - k);
    }
    Ok(-group_prob / h_raw(x, n_users - 1) - k * pow_one_minus(x, n_users - 1))
}

/// Stationarity expression whose root locates a group's interior fraction:
/// `g(x) = h_{K-1}(x) * (nu*N_l/P_l - K*(1-x)^(K-1))`, increasing wherever
/// the bracketed factor is positive.
fn group_g(x: f64, c: f64, n_users: usize) -> f64 {
    h_raw(x, n_users - 1) * (c - n_users as f64 * pow_one_minus(x, n_users - 1))
}

/// Interior solve of `g(x) = target` over the rising branch up to `x_max`.
fn group_g_inverse(target: f64, c: f64, n_users: usize, x_max: f64) -> f64 {
    let k = n_users as f64;
    // Below x_star the bracketed factor is negative and g is useless; the
    // root lives on (x_star, x_max).
    let mut lo = if c >= k {
        0.0
    } else {
        1.0 - (c / k).powf(1.0 / (k - 1.0))
    };
    let mut hi = x_max;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if group_g(mid, c, n_users) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn group_fraction(nu: f64, group_prob: f64, group_files: f64, n_users: usize) -> f64 {
    if group_prob <= 0.0 {
        return 0.0;
    }
    let k = n_users as f64;
    let c = nu * group_files / group_prob;
    let a = 2.0 * (c - k) / (k * (k - 1.0));
    let b = group_g(group_prob, c, n_users);
    if group_prob >= b {
        group_prob
    } else if group_prob <= a.max(0.0) {
        0.0
    } else {
        group_g_inverse(group_prob, c, n_users, group_prob)
    }
}

pub(crate) fn solve_group_allocation_with_dual(
    grouping: &Grouping,
    params: &SystemParams,
) -> Result<(Grouping, f64), Error> {
    let total_files: usize = grouping.blocks.iter().map(Vec::len).sum();
    if total_files != params.n_files {
        return Err(Error::DimensionMismatch(format!(
            "grouping covers {} files, params declare {}",
            total_files, params.n_files
        )));
    }
    let prob_sum: f64 = grouping.group_probs.iter().sum();
    if (prob_sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "group probabilities sum to {}",
            prob_sum
        )));
    }
    let sizes: Vec<f64> = grouping.blocks.iter().map(|b| b.len() as f64).collect();
    let probs = &grouping.group_probs;
    let memory = params.memory;
    let k = params.n_users;
    let kf = k as f64;

    let finish = |memories: Vec<f64>, dual: f64| -> Result<(Grouping, f64), Error> {
        let solved = Grouping::new(
            grouping.n_files,
            grouping.blocks.clone(),
            grouping.group_probs.clone(),
            memories,
        )?;
        Ok((solved, dual))
    };

    if memory <= 0.0 {
        return finish(vec![0.0; sizes.len()], kf * (kf + 1.0) / 2.0);
    }
    let live_capacity: f64 = sizes
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&n, _)| n)
        .sum();
    if memory >= live_capacity {
        // Saturate every band that attracts requests; spread the remainder
        // over dead bands pro rata so the budget is intact.
        let dead_capacity: f64 = sizes
            .iter()
            .zip(probs)
            .filter(|(_, &p)| p == 0.0)
            .map(|(&n, _)| n)
            .sum();
        let leftover = (memory - live_capacity).max(0.0);
        let memories: Vec<f64> = sizes
            .iter()
            .zip(probs)
            .map(|(&n, &p)| {
                if p > 0.0 {
                    n
                } else if dead_capacity > 0.0 {
                    n * leftover / dead_capacity
                } else {
                    0.0
                }
            })
            .collect();
        return finish(memories, 0.0);
    }

    if k == 1 {
        // Linear objective: each memory unit in band l saves P_l/N_l slots,
        // so fill bands in that order.
        let weights: Vec<f64> = probs.iter().zip(&sizes).map(|(&p, &n)| p / n).collect();
        let memories = greedy_by_weight(&weights, &sizes, memory);
        let dual = weights
            .iter()
            .zip(&memories)
            .zip(&sizes)
            .filter(|((_, &m), &n)| m < n)
            .map(|((&w, _), _)| w)
            .fold(0.0f64, f64::max);
        return finish(memories, dual);
    }

    // Budget in the substituted variables: sum_l (N_l/P_l) x_l(nu) = M,
    // non-increasing in nu. Every band saturates at nu = 0 and empties by
    // nu = K(K+1)/2 because P_l/N_l <= 1.
    let budget_at = |nu: f64| -> f64 {
        sizes
            .iter()
            .zip(probs)
            .map(|(&n, &p)| {
                if p > 0.0 {
                    n / p * group_fraction(nu, p, n, k)
                } else {
                    0.0
                }
            })
            .sum()
    };
    let mut lo = 0.0f64;
    let mut hi = kf * (kf + 1.0) / 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if budget_at(mid) > memory {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * hi.max(1.0) {
            break;
        }
    }
    let dual = 0.5 * (lo + hi);
    let memories: Vec<f64> = sizes
        .iter()
        .zip(probs)
        .map(|(&n, &p)| {
            if p > 0.0 {
                (n / p * group_fraction(dual, p, n, k)).clamp(0.0, n)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = memories.iter().sum();
    if (total - memory).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "group water filling converged to budget {} instead of {}",
            total, memory
        )));
    }
    finish(memories, dual)
}

/// Splits the memory budget across popularity bands to minimize the summed
/// group rates, returning the grouping with `group_memories` filled in.
///
/// Bands with zero request probability receive no memory (unless the budget
/// exceeds the live bands' capacity). The budget is met within `1e-8`.
pub fn solve_group_allocation(
    grouping: &Grouping,
    params: &SystemParams,
) -> Result<Grouping, Error> {
    solve_group_allocation_with_dual(grouping, params).map(|(g, _)| g)
}
