//! Workload builders shared by the criterion benchmarks.

use ccsim_core::model::{BitRecord, SystemParams};
use ccsim_core::sim::{
    placement_allocation, trial_demand_bits, zipf_popularity, PlacementScheme, TrialStreams,
};

/// One trial's demanded bits for a given system shape, produced with the
/// same reproducible streams the simulator uses.
pub fn demand_workload(
    n_files: usize,
    n_users: usize,
    file_size_bits: usize,
    memory: f64,
    alpha: f64,
) -> (Vec<BitRecord>, SystemParams) {
    let params = SystemParams::new(n_files, n_users, file_size_bits, memory).unwrap();
    let popularity = zipf_popularity(n_files, alpha).unwrap();
    let (allocation, _) =
        placement_allocation(PlacementScheme::Uniform, &popularity, &params).unwrap();
    let streams = TrialStreams::new(0xBE9C4, 0);
    let (_, bits) = trial_demand_bits(&allocation, &params, &popularity, &streams).unwrap();
    (bits, params)
}
