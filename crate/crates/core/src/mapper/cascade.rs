use std::ops::Range;

use super::MapperError;

/// Split of one communication distance over cascaded elevators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadePlan {
    /// Positive per-stage distances, largest first.
    pub segment_deltas: Vec<usize>,
    pub total: usize,
}

impl CascadePlan {
    pub fn len(&self) -> usize {
        self.segment_deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segment_deltas.is_empty()
    }

    /// Signed per-stage retag amounts for a delta of the given sign.
    pub fn signed(&self, negative: bool) -> Vec<i64> {
        let sign = if negative { -1 } else { 1 };
        self.segment_deltas.iter().map(|&s| sign * s as i64).collect()
    }
}

/// Greedy max-first segmentation: full buffers of `b`, then the remainder.
pub fn cascade_plan(linear_delta: i64, b: usize) -> CascadePlan {
    assert!(linear_delta != 0 && b >= 1, "cascade_plan needs a nonzero delta and b >= 1");
    let total = linear_delta.unsigned_abs() as usize;
    let mut segment_deltas = vec![b; total / b];
    if total % b != 0 {
        segment_deltas.push(total % b);
    }
    CascadePlan { segment_deltas, total }
}

/// Consecutive thread groups of size `win`; the last may be shorter.
pub fn partition_windows(block_size: usize, win: usize) -> Result<Vec<Range<usize>>, MapperError> {
    if win == 0 {
        return Err(MapperError::Parameter("window must be at least 1".into()));
    }
    if win > block_size {
        return Err(MapperError::Parameter(format!("window {win} exceeds block size {block_size}")));
    }
    Ok((0..block_size).step_by(win).map(|lo| lo..(lo + win).min(block_size)).collect())
}
