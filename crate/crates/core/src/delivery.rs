//! XOR multicast schedulers that turn demand bits into transmission slots.
//!
//! Every scheduler consumes the demand-bit list and emits a
//! [`TransmissionLog`] whose slots each XOR one bit per cooperating user.
//! Four coded variants are provided:
//!
//! * [`deliver_od`] partitions bits by their exact cooperative set and pads
//!   unequal per-user loads with phantom zero bits.
//! * [`deliver_sgd`] walks every user subset from largest to smallest and
//!   transmits only when all members have an eligible bit, so no slot ever
//!   carries padding.
//! * [`deliver_semi_sgd`] runs the same walk but splits the difference
//!   between the shortest and longest per-user queue, padding the short
//!   ones.
//! * [`deliver_bgd`] grows one [`MergedBit`] at a time, greedily absorbing
//!   the mergeable bit that keeps the shared cover largest.
//!
//! [`deliver_grouped`] applies [`deliver_od`] independently per popularity
//! band, and [`deliver_uncoded`] is the one-bit-per-slot baseline.
//!
//! Determinism is part of the contract: the subset walk visits sets in
//! decreasing size and ascending lexicographic order within a size, per-user
//! queues are consumed in ascending `(bit_index, file)` order, and the
//! greedy merge scans candidates in list order. Identical inputs always
//! produce identical logs.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::allocation::Grouping;
use crate::model::{
    BitRecord, RequestVector, Transmission, TransmissionLog, UserSet, MAX_USERS,
};
use crate::Error;

/// The subset walk touches all `2^K` user sets; refuse sizes where that can
/// never finish.
const SUBSET_WALK_LIMIT: usize = 26;

/// Up to this many users the walk keeps dense per-user tables counting
/// eligible bits for every subset; beyond it, counts fall back to queue
/// scans.
const DENSE_TABLE_LIMIT: usize = 18;

// ---- Shared plumbing ----

fn check_bits(bits: &[BitRecord], n_users: usize, file_size_bits: usize) -> Result<(), Error> {
    if n_users == 0 || n_users > MAX_USERS {
        return Err(Error::InvalidParameter(format!(
            "n_users must be in 1..={}",
            MAX_USERS
        )));
    }
    if file_size_bits == 0 {
        return Err(Error::InvalidParameter(
            "file_size_bits must be positive".into(),
        ));
    }
    let everyone = UserSet::all(n_users);
    for bit in bits {
        if bit.intended_user >= n_users {
            return Err(Error::InvalidParameter(format!(
                "bit intended for user {} with only {} users",
                bit.intended_user + 1,
                n_users
            )));
        }
        if bit.bit_index >= file_size_bits {
            return Err(Error::InvalidParameter(format!(
                "bit index {} outside file of {} bits",
                bit.bit_index + 1,
                file_size_bits
            )));
        }
        if !bit.cover_set.is_subset_of(everyone) {
            return Err(Error::InvalidParameter(
                "cover set references unknown users".into(),
            ));
        }
        if bit.cover_set.contains(bit.intended_user) {
            return Err(Error::InvalidParameter(format!(
                "user {} covers its own demand bit",
                bit.intended_user + 1
            )));
        }
    }
    Ok(())
}

/// Orders user sets by size descending, then lexicographically ascending
/// over the sorted member lists.
fn set_order(a: u64, b: u64) -> Ordering {
    b.count_ones().cmp(&a.count_ones()).then_with(|| {
        if a == b {
            return Ordering::Equal;
        }
        // With equal sizes, the set holding the lowest differing user has
        // the smaller member at the first point of difference.
        let diff = a ^ b;
        let lowest = diff & diff.wrapping_neg();
        if a & lowest != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    })
}

fn queue_order(a: &BitRecord, b: &BitRecord) -> Ordering {
    a.bit_index.cmp(&b.bit_index).then(a.file.cmp(&b.file))
}

/// Visits all size-`size` subsets of `0..n` in ascending lexicographic
/// order; the callback returns `false` to stop early.
fn walk_combinations(n: usize, size: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if size == 0 || size > n {
        return;
    }
    let mut members: Vec<usize> = (0..size).collect();
    loop {
        if !visit(&members) {
            return;
        }
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if members[i] < n - size + i {
                members[i] += 1;
                for j in i + 1..size {
                    members[j] = members[j - 1] + 1;
                }
                break;
            }
        }
    }
}

// ---- Exact-set delivery ----

/// Exact-cooperative-set delivery.
///
/// Bits are grouped by their cooperative set; the sets are served in
/// decreasing size (lexicographic within a size), and each set emits as many
/// slots as its busiest member needs, padding everyone else with phantom
/// zero bits.
pub fn deliver_od(
    bits: &[BitRecord],
    n_users: usize,
    file_size_bits: usize,
) -> Result<TransmissionLog, Error> {
    check_bits(bits, n_users, file_size_bits)?;
    let mut groups: HashMap<u64, Vec<BitRecord>> = HashMap::new();
    for bit in bits {
        groups
            .entry(bit.cooperative_set().mask())
            .or_default()
            .push(*bit);
    }
    let mut masks: Vec<u64> = groups.keys().copied().collect();
    masks.sort_unstable_by(|&a, &b| set_order(a, b));

    let mut transmissions = Vec::new();
    for mask in masks {
        let members: Vec<usize> = UserSet::from_mask(mask).iter().collect();
        let mut queues: Vec<Vec<BitRecord>> = vec![Vec::new(); members.len()];
        for bit in &groups[&mask] {
            let slot = members
                .binary_search(&bit.intended_user)
                .expect("intended user belongs to the cooperative set");
            queues[slot].push(*bit);
        }
        for queue in &mut queues {
            queue.sort_by(queue_order);
        }
        let rounds = queues.iter().map(Vec::len).max().unwrap_or(0);
        for j in 0..rounds {
            let payload: Vec<BitRecord> =
                queues.iter().filter_map(|q| q.get(j).copied()).collect();
            let padded_zero_count = members.len() - payload.len();
            transmissions.push(Transmission {
                payload,
                padded_zero_count,
            });
        }
    }
    Ok(TransmissionLog {
        transmissions,
        file_size_bits,
    })
}

// ---- Subset-walk delivery ----

/// How many slots a visited subset claims from its per-user queues.
#[derive(Clone, Copy)]
enum SlotWidth {
    /// The shortest queue: every slot is fully loaded.
    Min,
    /// Halfway between the shortest and longest queue, padding the short
    /// ones.
    Mid,
}

/// Per-user pool of untransmitted bits, consumed in `(bit_index, file)`
/// order.
struct UserPool {
    entries: Vec<(u64, BitRecord)>,
    alive: Vec<bool>,
    first_alive: usize,
}

impl UserPool {
    fn new(mut bits: Vec<BitRecord>) -> Self {
        bits.sort_by(queue_order);
        let alive = vec![true; bits.len()];
        let entries = bits
            .into_iter()
            .map(|bit| (bit.cover_set.mask(), bit))
            .collect();
        Self {
            entries,
            alive,
            first_alive: 0,
        }
    }

    fn scan_count(&self, want: u64) -> usize {
        self.entries
            .iter()
            .zip(&self.alive)
            .skip(self.first_alive)
            .filter(|((cover, _), &alive)| alive && cover & want == want)
            .count()
    }
}

/// Per-user tables giving, for every user subset `W`, how many
/// untransmitted bits have a cover set containing `W`.
struct SupersetCounts {
    width: usize,
    tables: Vec<u32>,
}

impl SupersetCounts {
    fn new(n_users: usize) -> Self {
        Self {
            width: 1 << n_users,
            tables: vec![0; n_users << n_users],
        }
    }

    fn bump(&mut self, user: usize, cover: u64, delta: i32) {
        // A bit with cover T contributes to exactly the entries W ⊆ T.
        let base = user * self.width;
        let mut w = cover;
        loop {
            let slot = &mut self.tables[base + w as usize];
            *slot = slot.wrapping_add(delta as u32);
            if w == 0 {
                break;
            }
            w = (w - 1) & cover;
        }
    }

    fn count(&self, user: usize, want: u64) -> usize {
        self.tables[user * self.width + want as usize] as usize
    }
}

fn subset_walk(
    bits: &[BitRecord],
    n_users: usize,
    file_size_bits: usize,
    width: SlotWidth,
    dense: bool,
) -> Result<TransmissionLog, Error> {
    check_bits(bits, n_users, file_size_bits)?;
    if n_users > SUBSET_WALK_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "subset walk over {} users would visit 2^{} sets; limit is {}",
            n_users, n_users, SUBSET_WALK_LIMIT
        )));
    }

    let mut pools: Vec<Vec<BitRecord>> = vec![Vec::new(); n_users];
    for bit in bits {
        pools[bit.intended_user].push(*bit);
    }
    let mut pools: Vec<UserPool> = pools.into_iter().map(UserPool::new).collect();

    let mut counts = if dense {
        let mut table = SupersetCounts::new(n_users);
        for pool in &pools {
            for &(cover, bit) in &pool.entries {
                table.bump(bit.intended_user, cover, 1);
            }
        }
        Some(table)
    } else {
        None
    };

    let mut remaining = bits.len();
    let mut transmissions = Vec::new();
    let mut taken: Vec<Vec<BitRecord>> = Vec::new();

    for size in (1..=n_users).rev() {
        if remaining == 0 {
            break;
        }
        walk_combinations(n_users, size, |members| {
            if remaining == 0 {
                return false;
            }
            let s_mask = members.iter().fold(0u64, |m, &u| m | 1 << u);
            let mut min_count = usize::MAX;
            let mut max_count = 0usize;
            for &k in members {
                let want = s_mask & !(1 << k);
                let c = match &counts {
                    Some(table) => table.count(k, want),
                    None => pools[k].scan_count(want),
                };
                min_count = min_count.min(c);
                max_count = max_count.max(c);
            }
            let slots = match width {
                SlotWidth::Min => min_count,
                SlotWidth::Mid => (min_count + max_count) / 2,
            };
            if slots == 0 {
                return true;
            }

            taken.clear();
            for &k in members {
                let want = s_mask & !(1 << k);
                let pool = &mut pools[k];
                let mut grabbed = Vec::new();
                for idx in pool.first_alive..pool.entries.len() {
                    if grabbed.len() == slots {
                        break;
                    }
                    if !pool.alive[idx] {
                        continue;
                    }
                    let (cover, bit) = pool.entries[idx];
                    if cover & want == want {
                        pool.alive[idx] = false;
                        if let Some(table) = &mut counts {
                            table.bump(k, cover, -1);
                        }
                        grabbed.push(bit);
                    }
                }
                while pool.first_alive < pool.alive.len() && !pool.alive[pool.first_alive] {
                    pool.first_alive += 1;
                }
                remaining -= grabbed.len();
                taken.push(grabbed);
            }
            for j in 0..slots {
                let payload: Vec<BitRecord> =
                    taken.iter().filter_map(|t| t.get(j).copied()).collect();
                let padded_zero_count = members.len() - payload.len();
                transmissions.push(Transmission {
                    payload,
                    padded_zero_count,
                });
            }
            true
        });
    }
    debug_assert_eq!(remaining, 0, "singleton sets accept every leftover bit");
    Ok(TransmissionLog {
        transmissions,
        file_size_bits,
    })
}

/// Superset-eligibility delivery with fully loaded slots.
///
/// Walks every nonempty user subset `S` from largest to smallest
/// (lexicographic within a size). For each `S` it counts, per member `k`,
/// the untransmitted bits whose cover set contains `S \ {k}`; the minimum
/// count sets the slot budget, so every emitted slot carries one real bit
/// from each member and padding never occurs.
pub fn deliver_sgd(
    bits: &[BitRecord],
    n_users: usize,
    file_size_bits: usize,
) -> Result<TransmissionLog, Error> {
    subset_walk(
        bits,
        n_users,
        file_size_bits,
        SlotWidth::Min,
        n_users <= DENSE_TABLE_LIMIT,
    )
}

/// The subset walk of [`deliver_sgd`] with slot budget
/// `floor((min + max) / 2)` over the members' queue lengths; members that
/// run out early are padded with phantom zero bits.
pub fn deliver_semi_sgd(
    bits: &[BitRecord],
    n_users: usize,
    file_size_bits: usize,
) -> Result<TransmissionLog, Error> {
    subset_walk(
        bits,
        n_users,
        file_size_bits,
        SlotWidth::Mid,
        n_users <= DENSE_TABLE_LIMIT,
    )
}

// ---- Greedy bit merging ----

/// A set of pairwise-mergeable bits: every constituent's intended user lies
/// in every other constituent's cover set, so one XOR slot serves them all.
#[derive(Debug, Clone)]
pub struct MergedBit {
    bits: Vec<BitRecord>,
    intended_users: UserSet,
    cover_set: UserSet,
}

impl MergedBit {
    /// Starts a merged bit from a single constituent.
    pub fn new(bit: BitRecord) -> Self {
        Self {
            bits: vec![bit],
            intended_users: UserSet::EMPTY.with(bit.intended_user),
            cover_set: bit.cover_set,
        }
    }

    /// Whether `bit` can join: its intended user must be covered by every
    /// current constituent, and every current intended user must be covered
    /// by `bit`.
    pub fn can_absorb(&self, bit: &BitRecord) -> bool {
        self.cover_set.contains(bit.intended_user)
            && self.intended_users.is_subset_of(bit.cover_set)
    }

    /// How much shared cover would survive absorbing `bit`.
    pub fn fit(&self, bit: &BitRecord) -> usize {
        bit.cover_set.intersect(self.cover_set).len()
    }

    /// Adds `bit`, shrinking the shared cover to the intersection.
    pub fn absorb(&mut self, bit: BitRecord) -> Result<(), Error> {
        if !self.can_absorb(&bit) {
            return Err(Error::InvalidParameter(
                "bits are not pairwise mergeable".into(),
            ));
        }
        self.intended_users = self.intended_users.with(bit.intended_user);
        self.cover_set = self.cover_set.intersect(bit.cover_set);
        self.bits.push(bit);
        Ok(())
    }

    pub fn bits(&self) -> &[BitRecord] {
        &self.bits
    }

    pub fn intended_users(&self) -> UserSet {
        self.intended_users
    }

    /// Users caching every constituent bit. Disjoint from
    /// [`intended_users`](Self::intended_users) because each absorbed bit
    /// removes its own user from the intersection.
    pub fn cover_set(&self) -> UserSet {
        self.cover_set
    }
}

/// Greedy bit-merging delivery.
///
/// Bits are sorted by cooperative-set size descending, lexicographic
/// ascending within a size, then by `(intended_user, bit_index)`. Each
/// untransmitted bit in turn seeds a [`MergedBit`] that repeatedly absorbs,
/// among the untransmitted candidates it can still merge with, the latest
/// one in list order whose cover set overlaps the shared cover the most;
/// the slot is emitted once the shared cover empties or no candidate is
/// left. Payloads list constituents in sorted-list order.
pub fn deliver_bgd(
    bits: &[BitRecord],
    n_users: usize,
    file_size_bits: usize,
) -> Result<TransmissionLog, Error> {
    check_bits(bits, n_users, file_size_bits)?;
    let mut records: Vec<BitRecord> = bits.to_vec();
    records.sort_by(|a, b| {
        set_order(a.cooperative_set().mask(), b.cooperative_set().mask())
            .then(a.intended_user.cmp(&b.intended_user))
            .then(a.bit_index.cmp(&b.bit_index))
            .then(a.file.cmp(&b.file))
    });

    let mut alive = vec![true; records.len()];
    // Candidates must be intended for a user in the shared cover, so scans
    // only touch those users' lists instead of the whole record list.
    let mut by_user: Vec<Vec<u32>> = vec![Vec::new(); n_users];
    for (idx, record) in records.iter().enumerate() {
        by_user[record.intended_user].push(idx as u32);
    }

    let mut transmissions = Vec::new();
    let mut head = 0;
    while head < records.len() {
        if !alive[head] {
            head += 1;
            continue;
        }
        alive[head] = false;
        let mut merged = MergedBit::new(records[head]);
        let mut chosen = vec![head];
        while !merged.cover_set().is_empty() {
            // The latest maximal-fit candidate in list order is exactly the
            // (fit, index) maximum, which scanning per user preserves.
            let mut best: Option<(usize, usize)> = None;
            for user in merged.cover_set().iter() {
                let list = &mut by_user[user];
                let mut dead = 0usize;
                for &idx32 in list.iter() {
                    let idx = idx32 as usize;
                    if !alive[idx] {
                        dead += 1;
                        continue;
                    }
                    if !merged.intended_users().is_subset_of(records[idx].cover_set) {
                        continue;
                    }
                    let fit = merged.fit(&records[idx]);
                    if best.is_none_or(|(f, i)| (fit, idx) > (f, i)) {
                        best = Some((fit, idx));
                    }
                }
                if dead * 2 > list.len() {
                    list.retain(|&i| alive[i as usize]);
                }
            }
            let Some((_, idx)) = best else { break };
            alive[idx] = false;
            merged
                .absorb(records[idx])
                .expect("candidate passed the merge test");
            chosen.push(idx);
        }
        chosen.sort_unstable();
        transmissions.push(Transmission {
            payload: chosen.iter().map(|&i| records[i]).collect(),
            padded_zero_count: 0,
        });
        head += 1;
    }
    Ok(TransmissionLog {
        transmissions,
        file_size_bits,
    })
}

// ---- Baselines ----

/// Runs [`deliver_od`] separately on each popularity band's users and
/// concatenates the logs in band order.
///
/// A user belongs to the band holding its requested file, so cooperation
/// only happens between users whose requests share a band.
pub fn deliver_grouped(
    bits: &[BitRecord],
    grouping: &Grouping,
    requests: &RequestVector,
    n_users: usize,
    file_size_bits: usize,
) -> Result<TransmissionLog, Error> {
    check_bits(bits, n_users, file_size_bits)?;
    if requests.len() != n_users {
        return Err(Error::DimensionMismatch(format!(
            "{} requests for {} users",
            requests.len(),
            n_users
        )));
    }
    let group_of_file = grouping.group_of_file();
    for &file in requests.files() {
        if file >= grouping.n_files() {
            return Err(Error::DimensionMismatch(format!(
                "request for file {} outside grouping of {} files",
                file + 1,
                grouping.n_files()
            )));
        }
    }

    let mut partitions: Vec<Vec<BitRecord>> = vec![Vec::new(); grouping.len()];
    for bit in bits {
        let group = group_of_file[requests.file_for(bit.intended_user)];
        partitions[group].push(*bit);
    }
    let mut transmissions = Vec::new();
    for part in partitions {
        if part.is_empty() {
            continue;
        }
        let log = deliver_od(&part, n_users, file_size_bits)?;
        transmissions.extend(log.transmissions);
    }
    Ok(TransmissionLog {
        transmissions,
        file_size_bits,
    })
}

/// Sends every demand bit in its own slot, in input order.
pub fn deliver_uncoded(
    bits: &[BitRecord],
    n_users: usize,
    file_size_bits: usize,
) -> Result<TransmissionLog, Error> {
    check_bits(bits, n_users, file_size_bits)?;
    let transmissions = bits
        .iter()
        .map(|&bit| Transmission {
            payload: vec![bit],
            padded_zero_count: 0,
        })
        .collect();
    Ok(TransmissionLog {
        transmissions,
        file_size_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::format_log;
    use crate::model::{compute_demand_bits, verify_decodability, PlacementRealization, SystemParams};

    fn bit(file: usize, bit_index: usize, user: usize, cover: &[usize]) -> BitRecord {
        let cover_set = cover
            .iter()
            .fold(UserSet::EMPTY, |set, &u| set.with(u - 1));
        BitRecord {
            file,
            bit_index,
            intended_user: user - 1,
            cover_set,
        }
    }

    /// The ten requested-but-uncached bits of the five-user walkthrough.
    fn walkthrough_bits() -> Vec<BitRecord> {
        vec![
            bit(0, 0, 1, &[2, 4]),
            bit(0, 1, 1, &[3, 5]),
            bit(1, 0, 2, &[1, 3, 5]),
            bit(1, 1, 2, &[1, 4]),
            bit(2, 0, 3, &[2, 4]),
            bit(2, 1, 3, &[1, 5]),
            bit(3, 0, 4, &[1, 5]),
            bit(3, 1, 4, &[1, 2, 5]),
            bit(4, 0, 5, &[1, 3]),
            bit(4, 1, 5, &[2, 4]),
        ]
    }

    /// Same instance with d_1's cover set changed to {1,3}.
    fn walkthrough_bits_variant() -> Vec<BitRecord> {
        let mut bits = walkthrough_bits();
        bits[6] = bit(3, 0, 4, &[1, 3]);
        bits
    }

    #[test]
    fn exact_set_delivery_matches_the_walkthrough() {
        let log = deliver_od(&walkthrough_bits(), 5, 2).unwrap();
        let expected = "1: b_1+0+0+0\n\
                        2: d_2+0+0+0\n\
                        3: a_1+b_2+0\n\
                        4: a_2+c_2+e_1\n\
                        5: d_1+0+0\n\
                        6: c_1+0+0\n\
                        7: e_2+0+0\n\
                        total slots: 7\n";
        assert_eq!(format_log(&log), expected);
    }

    #[test]
    fn min_walk_delivery_matches_the_walkthrough() {
        let log = deliver_sgd(&walkthrough_bits(), 5, 2).unwrap();
        let expected = "1: a_1+b_2+d_2\n\
                        2: a_2+c_2+e_1\n\
                        3: b_1+c_1\n\
                        4: d_1+e_2\n\
                        total slots: 4\n";
        assert_eq!(format_log(&log), expected);
        assert!(log.transmissions.iter().all(|t| t.padded_zero_count == 0));
    }

    #[test]
    fn mid_walk_delivery_lands_between_the_extremes() {
        let log = deliver_semi_sgd(&walkthrough_bits(), 5, 2).unwrap();
        assert!(log.slot_count() >= 4 && log.slot_count() <= 7);
        let expected = "1: a_1+b_2+d_2\n\
                        2: a_2+c_2+e_1\n\
                        3: b_1+c_1\n\
                        4: d_1+e_2\n\
                        total slots: 4\n";
        assert_eq!(format_log(&log), expected);
    }

    #[test]
    fn greedy_merge_delivery_matches_the_walkthrough() {
        let log = deliver_bgd(&walkthrough_bits(), 5, 2).unwrap();
        let expected = "1: b_1+e_2\n\
                        2: d_2+a_1+b_2\n\
                        3: a_2+c_2+e_1\n\
                        4: d_1\n\
                        5: c_1\n\
                        total slots: 5\n";
        assert_eq!(format_log(&log), expected);
    }

    #[test]
    fn cover_variant_flips_the_greedy_ranking() {
        let bits = walkthrough_bits_variant();
        let sgd = deliver_sgd(&bits, 5, 2).unwrap();
        let expected_sgd = "1: a_1+b_2+d_2\n\
                            2: a_2+c_2+e_1\n\
                            3: b_1+c_1\n\
                            4: d_1\n\
                            5: e_2\n\
                            total slots: 5\n";
        assert_eq!(format_log(&sgd), expected_sgd);

        let bgd = deliver_bgd(&bits, 5, 2).unwrap();
        let expected_bgd = "1: b_1+e_2\n\
                            2: d_2+a_1+b_2\n\
                            3: d_1+c_1\n\
                            4: a_2+c_2+e_1\n\
                            total slots: 4\n";
        assert_eq!(format_log(&bgd), expected_bgd);
        assert!(bgd.slot_count() < sgd.slot_count());
    }

    #[test]
    fn empty_input_yields_empty_logs() {
        for log in [
            deliver_od(&[], 3, 4).unwrap(),
            deliver_sgd(&[], 3, 4).unwrap(),
            deliver_semi_sgd(&[], 3, 4).unwrap(),
            deliver_bgd(&[], 3, 4).unwrap(),
            deliver_uncoded(&[], 3, 4).unwrap(),
        ] {
            assert_eq!(log.slot_count(), 0);
            assert_eq!(log.rate(), 0.0);
        }
    }

    #[test]
    fn empty_covers_force_singleton_slots() {
        let bits = vec![bit(0, 0, 1, &[]), bit(1, 0, 2, &[]), bit(2, 1, 3, &[])];
        for log in [
            deliver_od(&bits, 3, 2).unwrap(),
            deliver_sgd(&bits, 3, 2).unwrap(),
            deliver_bgd(&bits, 3, 2).unwrap(),
        ] {
            assert_eq!(log.slot_count(), 3);
            assert!(log.transmissions.iter().all(|t| t.payload.len() == 1));
        }
    }

    #[test]
    fn single_user_sends_each_bit_alone() {
        let bits = vec![bit(0, 0, 1, &[]), bit(0, 1, 1, &[])];
        let log = deliver_sgd(&bits, 1, 2).unwrap();
        assert_eq!(log.slot_count(), 2);
    }

    #[test]
    fn min_walk_reduces_to_exact_sets_on_balanced_load() {
        // Two bits per user, all sharing one exact cooperative set.
        let bits = vec![
            bit(0, 0, 1, &[2, 3]),
            bit(0, 1, 1, &[2, 3]),
            bit(1, 0, 2, &[1, 3]),
            bit(1, 1, 2, &[1, 3]),
            bit(2, 0, 3, &[1, 2]),
            bit(2, 1, 3, &[1, 2]),
        ];
        let od = deliver_od(&bits, 3, 2).unwrap();
        let sgd = deliver_sgd(&bits, 3, 2).unwrap();
        let semi = deliver_semi_sgd(&bits, 3, 2).unwrap();
        assert_eq!(format_log(&od), format_log(&sgd));
        assert_eq!(format_log(&od), format_log(&semi));
    }

    #[test]
    fn dense_and_scan_counting_agree() {
        let bits = walkthrough_bits();
        for width in [SlotWidth::Min, SlotWidth::Mid] {
            let dense = subset_walk(&bits, 5, 2, width, true).unwrap();
            let scan = subset_walk(&bits, 5, 2, width, false).unwrap();
            assert_eq!(format_log(&dense), format_log(&scan));
        }
    }

    #[test]
    fn merged_bit_enforces_pairwise_mergeability() {
        let seed = bit(0, 0, 1, &[2, 4]);
        let mut merged = MergedBit::new(seed);
        assert_eq!(merged.cover_set().mask(), seed.cover_set.mask());

        let partner = bit(1, 1, 2, &[1, 4]);
        assert!(merged.can_absorb(&partner));
        assert_eq!(merged.fit(&partner), 1);
        merged.absorb(partner).unwrap();
        assert_eq!(merged.intended_users().iter().collect::<Vec<_>>(), [0, 1]);
        assert_eq!(merged.cover_set().iter().collect::<Vec<_>>(), [3]);
        assert!(merged
            .intended_users()
            .intersect(merged.cover_set())
            .is_empty());

        // User 3 is not covered by the current constituents.
        let stranger = bit(2, 0, 3, &[1, 2]);
        assert!(!merged.can_absorb(&stranger));
        assert!(merged.absorb(stranger).is_err());
    }

    #[test]
    fn greedy_merge_never_exceeds_one_slot_per_bit() {
        let bits = walkthrough_bits();
        let log = deliver_bgd(&bits, 5, 2).unwrap();
        assert!(log.slot_count() <= bits.len());
        let delivered: usize = log.transmissions.iter().map(|t| t.payload.len()).sum();
        assert_eq!(delivered, bits.len());
    }

    #[test]
    fn uncoded_delivery_counts_every_bit() {
        let log = deliver_uncoded(&walkthrough_bits(), 5, 4).unwrap();
        assert_eq!(log.slot_count(), 10);
        assert!((log.rate() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn grouped_delivery_with_one_band_is_exact_set_delivery() {
        let bits = walkthrough_bits();
        let grouping = Grouping::new(
            5,
            vec![vec![0, 1, 2, 3, 4]],
            vec![1.0],
            vec![0.0],
        )
        .unwrap();
        let requests = RequestVector::new(vec![0, 1, 2, 3, 4], 5).unwrap();
        let grouped = deliver_grouped(&bits, &grouping, &requests, 5, 2).unwrap();
        let od = deliver_od(&bits, 5, 2).unwrap();
        assert_eq!(format_log(&grouped), format_log(&od));
    }

    #[test]
    fn grouped_delivery_concatenates_per_band_logs() {
        let bits = walkthrough_bits();
        // Files 1-3 in the first band, files 4-5 in the second.
        let grouping = Grouping::new(
            5,
            vec![vec![0, 1, 2], vec![3, 4]],
            vec![0.7, 0.3],
            vec![0.0, 0.0],
        )
        .unwrap();
        let requests = RequestVector::new(vec![0, 1, 2, 3, 4], 5).unwrap();
        let grouped = deliver_grouped(&bits, &grouping, &requests, 5, 2).unwrap();

        let first: Vec<BitRecord> = bits
            .iter()
            .copied()
            .filter(|b| b.intended_user < 3)
            .collect();
        let second: Vec<BitRecord> = bits
            .iter()
            .copied()
            .filter(|b| b.intended_user >= 3)
            .collect();
        let expected_slots = deliver_od(&first, 5, 2).unwrap().slot_count()
            + deliver_od(&second, 5, 2).unwrap().slot_count();
        assert_eq!(grouped.slot_count(), expected_slots);
    }

    #[test]
    fn grouped_delivery_with_isolated_users_is_uncoded_sized() {
        // Each user's file sits in its own band: no partners anywhere.
        let bits = vec![
            bit(0, 0, 1, &[2]),
            bit(1, 0, 2, &[3]),
            bit(2, 0, 3, &[1]),
        ];
        let grouping = Grouping::new(
            3,
            vec![vec![0], vec![1], vec![2]],
            vec![0.5, 0.3, 0.2],
            vec![0.0, 0.0, 0.0],
        )
        .unwrap();
        let requests = RequestVector::new(vec![0, 1, 2], 3).unwrap();
        let log = deliver_grouped(&bits, &grouping, &requests, 3, 1).unwrap();
        assert_eq!(log.slot_count(), bits.len());
    }

    #[test]
    fn schedulers_reject_malformed_bits() {
        let foreign = vec![bit(0, 0, 4, &[1])];
        assert!(deliver_od(&foreign, 3, 2).is_err());
        let out_of_file = vec![bit(0, 5, 1, &[2])];
        assert!(deliver_sgd(&out_of_file, 3, 2).is_err());
        let self_cover = vec![BitRecord {
            file: 0,
            bit_index: 0,
            intended_user: 0,
            cover_set: UserSet::EMPTY.with(0),
        }];
        assert!(deliver_bgd(&self_cover, 3, 2).is_err());
        assert!(deliver_uncoded(&[], 0, 2).is_err());
    }

    #[test]
    fn full_caches_leave_nothing_to_deliver() {
        let params = SystemParams::new(2, 2, 3, 2.0).unwrap();
        let cached = vec![vec![vec![0, 1, 2]; 2]; 2];
        let placement = PlacementRealization::new(&params, cached).unwrap();
        let requests = RequestVector::new(vec![0, 1], 2).unwrap();
        let bits = compute_demand_bits(&placement, &requests).unwrap();
        assert!(bits.is_empty());
        assert_eq!(deliver_od(&bits, 2, 3).unwrap().slot_count(), 0);
    }

    #[test]
    fn every_scheduler_log_decodes_on_the_walkthrough() {
        let bits = walkthrough_bits();
        let logs = [
            deliver_od(&bits, 5, 2).unwrap(),
            deliver_sgd(&bits, 5, 2).unwrap(),
            deliver_semi_sgd(&bits, 5, 2).unwrap(),
            deliver_bgd(&bits, 5, 2).unwrap(),
            deliver_uncoded(&bits, 5, 2).unwrap(),
        ];
        for log in &logs {
            let report = verify_decodability(log, &bits);
            assert!(report.is_pass(), "{:?}", report);
        }
    }

    #[test]
    fn subset_order_ranks_size_then_members() {
        // {1,2,3,5} before {1,2,4,5}; size 4 before size 3.
        let a = 0b10111u64;
        let b = 0b11011u64;
        let c = 0b00111u64;
        assert_eq!(set_order(a, b), Ordering::Less);
        assert_eq!(set_order(b, a), Ordering::Greater);
        assert_eq!(set_order(a, c), Ordering::Less);
        assert_eq!(set_order(c, c), Ordering::Equal);
    }

    #[test]
    fn combination_walk_is_lexicographic() {
        let mut seen = Vec::new();
        walk_combinations(4, 2, |members| {
            seen.push(members.to_vec());
            true
        });
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }
}
