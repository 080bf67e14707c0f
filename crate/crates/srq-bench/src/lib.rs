//! Shared fixtures for the benchmark targets.

use srq_core::states::{haar_random, PureState};
use srq_core::symmetry::ChargePartition;

pub fn fixture_state(n: usize, d: usize) -> PureState {
    haar_random(n, d, 0xBE7C).expect("fixture state")
}

/// Partition with at least two sectors for any `d >= 2`.
pub fn fixture_partition(d: usize) -> ChargePartition {
    let dims = if d == 2 {
        vec![1, 1]
    } else {
        let mut dims = vec![1; d % 2];
        dims.extend(std::iter::repeat_n(2, d / 2));
        dims
    };
    ChargePartition::from_dims(d, &dims).expect("fixture partition")
}
