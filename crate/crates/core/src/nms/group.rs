use crate::geometry::OverlapMatrix;
use crate::linalg::SquareMatrix;

use super::config::NmsConfig;

/// Disjoint groups over score-sorted positions.
///
/// Each group lists positions in ascending (i.e. descending-score) order, so
/// the first entry is the group's top box. Positions dropped by the group-size
/// cap are kept in `capped`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupPartition {
    pub groups: Vec<Vec<usize>>,
    pub capped: Vec<usize>,
}

impl GroupPartition {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// For each sorted position, `Some(top position)` of its group, `None` if capped out.
    pub fn top_of(&self, n: usize) -> Vec<Option<usize>> {
        let mut tops = vec![None; n];
        for g in &self.groups {
            for &i in g {
                tops[i] = Some(g[0]);
            }
        }
        tops
    }
}

/// Greedy grouping on a score-sorted overlap matrix.
///
/// The remaining top box collects every remaining box whose overlap with it
/// exceeds `nt`; the group is truncated to `max_group_size`, and the boxes with
/// overlap at most `nt` carry over to the next round. The comparison is the
/// hard threshold regardless of the configured pruning function.
pub fn group_boxes(sorted: &OverlapMatrix, cfg: &NmsConfig) -> GroupPartition {
    let cap = cfg.max_group_size.unwrap_or(usize::MAX).max(1);
    let mut partition = GroupPartition::default();
    let mut remaining: Vec<usize> = (0..sorted.len()).collect();
    while let Some((&top, rest)) = remaining.split_first() {
        let mut members = vec![top];
        let mut next = Vec::with_capacity(rest.len());
        for &i in rest {
            if sorted.get(i, top) > cfg.nt {
                members.push(i);
            } else {
                next.push(i);
            }
        }
        if members.len() > cap {
            partition.capped.extend(members.drain(cap..));
        }
        partition.groups.push(members);
        remaining = next;
    }
    partition
}

/// `m x m` mask whose first column is ones and every other entry zero.
pub fn build_mask(m: usize) -> SquareMatrix {
    assert!(m >= 1, "mask needs at least one member");
    SquareMatrix::from_fn(m, |_, j| if j == 0 { 1.0 } else { 0.0 })
}
