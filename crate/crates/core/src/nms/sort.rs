use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::OverlapMatrix;

/// Scores and overlaps reordered by descending score.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedProblem {
    pub scores: Vec<f64>,
    pub overlaps: OverlapMatrix,
    /// `order[k]` is the original index of the box at sorted position `k`.
    pub order: Vec<usize>,
}

impl SortedProblem {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scatters per-position values back to original box order.
    pub fn unsort(&self, sorted_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sorted_values.len()];
        for (k, &orig) in self.order.iter().enumerate() {
            out[orig] = sorted_values[k];
        }
        out
    }
}

/// Descending stable sort of `scores`; ties keep the lower original index first.
pub fn sort_by_score(scores: &[f64], overlaps: &OverlapMatrix) -> Result<SortedProblem> {
    if overlaps.len() != scores.len() {
        return Err(Error::LengthMismatch {
            what: "overlap matrix",
            got: overlaps.len(),
            expected: scores.len(),
        });
    }
    if let Some((index, &value)) = scores.iter().enumerate().find(|(_, s)| !s.is_finite()) {
        return Err(Error::ScoreOutOfRange { index, value });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    Ok(SortedProblem {
        scores: order.iter().map(|&i| scores[i]).collect(),
        overlaps: overlaps.permuted(&order),
        order,
    })
}
