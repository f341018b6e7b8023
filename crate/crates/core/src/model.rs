//! System model types shared by every other module.
//!
//! The caching system has `n_files` files of `file_size_bits` bits each and
//! `n_users` users, every user owning a cache of `memory` file-sized units.
//! Placement stores, for each user and file `i`, a uniformly random subset of
//! `round(q_i * F)` bits, where the fractions `q_i` come from `allocation`.
//! After users reveal their requests, the bits a user wants but does not hold
//! become [`BitRecord`]s; a delivery scheduler turns those into a
//! [`TransmissionLog`] of XOR multicasts which [`verify_decodability`] can
//! audit end to end.

use std::collections::HashMap;
use std::fmt;

use crate::Error;

/// Upper limit on the number of users so user sets fit in a `u64` mask.
pub const MAX_USERS: usize = 64;

/// Absolute tolerance on popularity vectors summing to one.
pub const POPULARITY_SUM_TOL: f64 = 1e-9;

/// Absolute tolerance on cache allocations summing to the memory budget.
pub const ALLOCATION_SUM_TOL: f64 = 1e-6;

// ---- Parameters and probability vectors ----

/// Global system parameters.
///
/// Internally files are indexed `0..n_files` and users `0..n_users`; all
/// serialized artifacts (fixtures, logs, CSV) use 1-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_files: usize,
    pub n_users: usize,
    pub file_size_bits: usize,
    /// Cache size per user, in units of one file. Fractional values are fine.
    pub memory: f64,
}

impl SystemParams {
    pub fn new(
        n_files: usize,
        n_users: usize,
        file_size_bits: usize,
        memory: f64,
    ) -> Result<Self, Error> {
        if n_files == 0 || n_users == 0 || file_size_bits == 0 {
            return Err(Error::InvalidParameter(
                "n_files, n_users, and file_size_bits must be positive".into(),
            ));
        }
        if n_users > MAX_USERS {
            return Err(Error::InvalidParameter(format!(
                "n_users {} exceeds the supported maximum {}",
                n_users, MAX_USERS
            )));
        }
        if n_files < n_users {
            return Err(Error::InvalidParameter(format!(
                "n_files {} must be at least n_users {}",
                n_files, n_users
            )));
        }
        if !memory.is_finite() || memory < 0.0 || memory > n_files as f64 {
            return Err(Error::InvalidParameter(format!(
                "memory {} outside [0, n_files]",
                memory
            )));
        }
        Ok(Self {
            n_files,
            n_users,
            file_size_bits,
            memory,
        })
    }
}

/// A file popularity distribution: non-negative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Popularity(Vec<f64>);

impl Popularity {
    pub fn new(probs: Vec<f64>) -> Result<Self, Error> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("popularity vector is empty".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter(
                "popularity entries must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > POPULARITY_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "popularity sums to {} instead of 1",
                sum
            )));
        }
        Ok(Self(probs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

/// Per-file caching fractions `q_i` with their memory budget.
///
/// Every fraction lies in `[0, 1]` and the fractions sum to `memory` within
/// [`ALLOCATION_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct CacheAllocation {
    fractions: Vec<f64>,
    memory: f64,
}

impl CacheAllocation {
    pub fn new(fractions: Vec<f64>, memory: f64) -> Result<Self, Error> {
        if fractions.is_empty() {
            return Err(Error::InvalidParameter("allocation is empty".into()));
        }
        if fractions
            .iter()
            .any(|q| !q.is_finite() || *q < 0.0 || *q > 1.0)
        {
            return Err(Error::InvalidParameter(
                "allocation fractions must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - memory).abs() > ALLOCATION_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "allocation sums to {} but the memory budget is {}",
                sum, memory
            )));
        }
        Ok(Self { fractions, memory })
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn memory(&self) -> f64 {
        self.memory
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }
}

// ---- User sets ----

/// A set of users stored as a bitmask (user `k` occupies bit `k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct UserSet(u64);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    pub fn from_mask(mask: u64) -> Self {
        UserSet(mask)
    }

    /// The full set `{0, .., n_users-1}`.
    pub fn all(n_users: usize) -> Self {
        debug_assert!(n_users <= MAX_USERS);
        if n_users == MAX_USERS {
            UserSet(u64::MAX)
        } else {
            UserSet((1u64 << n_users) - 1)
        }
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, user: usize) -> bool {
        user < MAX_USERS && self.0 & (1 << user) != 0
    }

    #[must_use]
    pub fn with(self, user: usize) -> Self {
        debug_assert!(user < MAX_USERS);
        UserSet(self.0 | (1 << user))
    }

    #[must_use]
    pub fn without(self, user: usize) -> Self {
        debug_assert!(user < MAX_USERS);
        UserSet(self.0 & !(1 << user))
    }

    pub fn union(self, other: UserSet) -> Self {
        UserSet(self.0 | other.0)
    }

    pub fn intersect(self, other: UserSet) -> Self {
        UserSet(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: UserSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Users in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let user = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(user)
            }
        })
    }
}

impl fmt::Display for UserSet {
    /// Prints 1-based members, e.g. `{1,3,5}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, user) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", user + 1)?;
        }
        write!(f, "}}")
    }
}

// ---- Placement and demand ----

/// One realized placement: the exact bit subsets every user cached.
#[derive(Debug, Clone)]
pub struct PlacementRealization {
    n_files: usize,
    n_users: usize,
    file_size_bits: usize,
    /// `cached[user][file]` holds sorted bit indices.
    cached: Vec<Vec<Vec<u32>>>,
}

impl PlacementRealization {
    pub fn new(
        params: &SystemParams,
        cached: Vec<Vec<Vec<u32>>>,
    ) -> Result<Self, Error> {
        if cached.len() != params.n_users
            || cached.iter().any(|per_file| per_file.len() != params.n_files)
        {
            return Err(Error::DimensionMismatch(
                "placement is not n_users x n_files".into(),
            ));
        }
        for per_file in &cached {
            for bits in per_file {
                if bits.iter().any(|&b| b as usize >= params.file_size_bits) {
                    return Err(Error::InvalidParameter(
                        "cached bit index outside the file".into(),
                    ));
                }
                if bits.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidParameter(
                        "cached bit indices must be sorted and distinct".into(),
                    ));
                }
            }
        }
        Ok(Self {
            n_files: params.n_files,
            n_users: params.n_users,
            file_size_bits: params.file_size_bits,
            cached,
        })
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn file_size_bits(&self) -> usize {
        self.file_size_bits
    }

    /// Sorted bit indices of `file` held by `user`.
    pub fn cached_bits(&self, user: usize, file: usize) -> &[u32] {
        &self.cached[user][file]
    }

    /// Mask of users caching each bit of `file`.
    pub fn cover_masks(&self, file: usize) -> Vec<u64> {
        let mut masks = vec![0u64; self.file_size_bits];
        for user in 0..self.n_users {
            for &b in &self.cached[user][file] {
                masks[b as usize] |= 1 << user;
            }
        }
        masks
    }
}

/// The file requested by each user, indexed by user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestVector(Vec<usize>);

impl RequestVector {
    pub fn new(requests: Vec<usize>, n_files: usize) -> Result<Self, Error> {
        if requests.iter().any(|&d| d >= n_files) {
            return Err(Error::InvalidParameter(
                "request outside the file range".into(),
            ));
        }
        Ok(Self(requests))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn file_for(&self, user: usize) -> usize {
        self.0[user]
    }

    pub fn files(&self) -> &[usize] {
        &self.0
    }
}

/// One requested-but-uncached bit together with its cover set.
///
/// `cover_set` holds every user that cached the bit; the intended user never
/// belongs to it. Users in `cover_set` can cancel this bit out of an XOR,
/// so the bit may share a slot with one bit per cover-set member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitRecord {
    pub file: usize,
    pub bit_index: usize,
    pub intended_user: usize,
    pub cover_set: UserSet,
}

impl BitRecord {
    /// The cover set plus the intended user: everyone able to take part in a
    /// multicast built around this bit.
    pub fn cooperative_set(&self) -> UserSet {
        self.cover_set.with(self.intended_user)
    }
}

/// One broadcast slot: an XOR of bits intended for distinct users, plus the
/// number of all-zero phantom bits padded in by the scheduler.
///
/// Phantom bits behave as if cached by every user, so they never affect
/// decodability and carry no payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub payload: Vec<BitRecord>,
    pub padded_zero_count: usize,
}

/// An ordered list of transmissions produced by one delivery run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionLog {
    pub transmissions: Vec<Transmission>,
    pub file_size_bits: usize,
}

impl TransmissionLog {
    pub fn slot_count(&self) -> usize {
        self.transmissions.len()
    }

    /// Delivery rate: broadcast slots per file-size unit.
    pub fn rate(&self) -> f64 {
        self.transmissions.len() as f64 / self.file_size_bits as f64
    }
}

// ---- Demand bits ----

/// Lists every requested-but-uncached bit with its cover set.
///
/// Records are grouped per user in ascending user order and, within a user,
/// ascending bit index. The output length for user `k` is always
/// `F - |cached(k, d_k)|`.
pub fn compute_demand_bits(
    placement: &PlacementRealization,
    requests: &RequestVector,
) -> Result<Vec<BitRecord>, Error> {
    if requests.len() != placement.n_users {
        return Err(Error::DimensionMismatch(format!(
            "{} requests for {} users",
            requests.len(),
            placement.n_users
        )));
    }
    let mut mask_cache: HashMap<usize, Vec<u64>> = HashMap::new();
    let mut records = Vec::new();
    for user in 0..placement.n_users {
        let file = requests.file_for(user);
        let masks = mask_cache
            .entry(file)
            .or_insert_with(|| placement.cover_masks(file));
        let own = 1u64 << user;
        for (bit_index, &mask) in masks.iter().enumerate() {
            if mask & own == 0 {
                records.push(BitRecord {
                    file,
                    bit_index,
                    intended_user: user,
                    cover_set: UserSet::from_mask(mask),
                });
            }
        }
    }
    Ok(records)
}

// ---- Decodability verification ----

/// Why a transmission log failed verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A payload bit is not among the demand bits (or its cover set differs).
    UnknownBit { transmission: usize },
    /// A demand bit appears in more than one transmission.
    DuplicateBit { transmission: usize },
    /// Two payload bits in one slot are intended for the same user.
    DuplicateIntendedUser { transmission: usize, user: usize },
    /// Some payload bit is not cached by another payload bit's intended user.
    NotMutuallyCovered { transmission: usize },
    /// Demand bits never transmitted.
    Undelivered { missing: Vec<BitRecord> },
    /// The simulated decoder left a user short of its requested file.
    IncompleteDecode { user: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownBit { transmission } => {
                write!(f, "transmission {}: payload bit is not a demand bit", transmission + 1)
            }
            Violation::DuplicateBit { transmission } => {
                write!(f, "transmission {}: demand bit already delivered", transmission + 1)
            }
            Violation::DuplicateIntendedUser { transmission, user } => write!(
                f,
                "transmission {}: two payload bits intended for user {}",
                transmission + 1,
                user + 1
            ),
            Violation::NotMutuallyCovered { transmission } => write!(
                f,
                "transmission {}: an intended user cannot cancel a companion bit",
                transmission + 1
            ),
            Violation::Undelivered { missing } => {
                write!(f, "{} demand bits never delivered", missing.len())
            }
            Violation::IncompleteDecode { user } => {
                write!(f, "user {} cannot recover its full file", user + 1)
            }
        }
    }
}

/// Outcome of [`verify_decodability`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyReport {
    Pass,
    Fail(Violation),
}

impl VerifyReport {
    pub fn is_pass(&self) -> bool {
        matches!(self, VerifyReport::Pass)
    }
}

/// Audits a transmission log against the demand bits it should deliver.
///
/// Passes iff every demand bit appears in exactly one transmission, every
/// slot XORs bits of pairwise-distinct users that all cover one another, and
/// a simulated per-user decoder (cancel cached bits, keep your own) recovers
/// every requested file completely. On failure reports the first violating
/// transmission in log order; bookkeeping violations without a slot
/// (undelivered bits) are reported after the sweep.
pub fn verify_decodability(log: &TransmissionLog, demand_bits: &[BitRecord]) -> VerifyReport {
    // Identity of a demand bit is (file, bit, user); the cover set must match
    // the placement-derived record exactly.
    let mut expected: HashMap<(usize, usize, usize), (UserSet, bool)> = HashMap::new();
    for bit in demand_bits {
        expected.insert(
            (bit.file, bit.bit_index, bit.intended_user),
            (bit.cover_set, false),
        );
    }

    for (t_index, t) in log.transmissions.iter().enumerate() {
        let mut users_seen = UserSet::EMPTY;
        for bit in &t.payload {
            match expected.get_mut(&(bit.file, bit.bit_index, bit.intended_user)) {
                None => return VerifyReport::Fail(Violation::UnknownBit { transmission: t_index }),
                Some((cover, delivered)) => {
                    if *cover != bit.cover_set {
                        return VerifyReport::Fail(Violation::UnknownBit { transmission: t_index });
                    }
                    if *delivered {
                        return VerifyReport::Fail(Violation::DuplicateBit {
                            transmission: t_index,
                        });
                    }
                    *delivered = true;
                }
            }
            if users_seen.contains(bit.intended_user) {
                return VerifyReport::Fail(Violation::DuplicateIntendedUser {
                    transmission: t_index,
                    user: bit.intended_user,
                });
            }
            users_seen = users_seen.with(bit.intended_user);
        }
        for bit in &t.payload {
            for other in &t.payload {
                if bit.intended_user != other.intended_user
                    && !other.cover_set.contains(bit.intended_user)
                {
                    return VerifyReport::Fail(Violation::NotMutuallyCovered {
                        transmission: t_index,
                    });
                }
            }
        }
    }

    let missing: Vec<BitRecord> = demand_bits
        .iter()
        .filter(|bit| {
            !expected[&(bit.file, bit.bit_index, bit.intended_user)].1
        })
        .copied()
        .collect();
    if !missing.is_empty() {
        return VerifyReport::Fail(Violation::Undelivered { missing });
    }

    // Simulated decode: a user recovers its bit from a slot iff it caches
    // every companion bit. Padded zeros are known to everyone.
    let mut wanted: HashMap<usize, usize> = HashMap::new();
    for bit in demand_bits {
        *wanted.entry(bit.intended_user).or_insert(0) += 1;
    }
    let mut recovered: HashMap<usize, usize> = HashMap::new();
    for t in &log.transmissions {
        for bit in &t.payload {
            let ok = t
                .payload
                .iter()
                .filter(|other| other.intended_user != bit.intended_user)
                .all(|other| other.cover_set.contains(bit.intended_user));
            if ok {
                *recovered.entry(bit.intended_user).or_insert(0) += 1;
            }
        }
    }
    for (user, want) in &wanted {
        if recovered.get(user).copied().unwrap_or(0) != *want {
            return VerifyReport::Fail(Violation::IncompleteDecode { user: *user });
        }
    }
    VerifyReport::Pass
}
