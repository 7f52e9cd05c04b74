//! Matrix-form rescoring.
//!
//! All rescorers share one contract: scores in `[0, 1]` and a symmetric
//! overlap matrix in, rescores in original box order out. Internally boxes are
//! sorted by descending score and the prune matrix `P = p(O_lower)` is formed
//! on the sorted overlaps.

use crate::error::{Error, Result};
use crate::geometry::OverlapMatrix;
use crate::linalg::{solve_unit_lower, SquareMatrix};

use super::config::{clip01, NmsConfig};
use super::group::{group_boxes, GroupPartition};
use super::sort::{sort_by_score, SortedProblem};

/// Output of a rescorer, in original box order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RescoreResult {
    pub rescores: Vec<f64>,
    /// Values before clipping (equal to `rescores` for greedy variants).
    pub preclip: Vec<f64>,
    /// Original indices with `rescore >= valid_threshold`, listed in
    /// descending input-score order.
    pub kept: Vec<usize>,
}

impl RescoreResult {
    fn from_sorted(sorted: &SortedProblem, preclip: Vec<f64>, rescores: Vec<f64>, cfg: &NmsConfig) -> Self {
        let kept = sorted
            .order
            .iter()
            .zip(&rescores)
            .filter(|(_, &r)| r >= cfg.valid_threshold)
            .map(|(&i, _)| i)
            .collect();
        Self {
            rescores: sorted.unsort(&rescores),
            preclip: sorted.unsort(&preclip),
            kept,
        }
    }

    pub fn is_kept(&self, index: usize) -> bool {
        self.kept.contains(&index)
    }
}

/// Strictly lower-triangular `p(o_ij)` over a score-sorted overlap matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneMatrix(SquareMatrix);

impl PruneMatrix {
    pub fn new(sorted: &OverlapMatrix, cfg: &NmsConfig) -> Self {
        let n = sorted.len();
        Self(SquareMatrix::from_fn(n, |i, j| if i > j { cfg.prune(sorted.get(i, j)) } else { 0.0 }))
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Restriction to a group of ascending sorted positions; stays strictly lower.
    pub fn restrict(&self, group: &[usize]) -> SquareMatrix {
        self.0.select(group)
    }
}

pub(crate) fn validate_inputs(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<()> {
    cfg.validate()?;
    if overlaps.len() != scores.len() {
        return Err(Error::LengthMismatch {
            what: "overlap matrix",
            got: overlaps.len(),
            expected: scores.len(),
        });
    }
    if let Some((index, &value)) = scores.iter().enumerate().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
        return Err(Error::ScoreOutOfRange { index, value });
    }
    if overlaps.as_slice().iter().any(|o| !(0.0..=1.0).contains(o)) {
        return Err(Error::InvalidConfig("overlaps must lie in [0, 1]".into()));
    }
    Ok(())
}

fn prepare(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<SortedProblem> {
    validate_inputs(scores, overlaps, cfg)?;
    sort_by_score(scores, overlaps)
}

/// Everything the masked group rescorer computes, kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct GroomedForward {
    pub sorted: SortedProblem,
    pub partition: GroupPartition,
    /// Sorted position of each box's group top, `None` when capped out.
    pub top: Vec<Option<usize>>,
    pub preclip: Vec<f64>,
    pub rescores: Vec<f64>,
}

/// Forward pass on an already sorted problem without input validation.
pub(crate) fn groomed_forward(sorted: SortedProblem, cfg: &NmsConfig) -> GroomedForward {
    let n = sorted.len();
    let partition = group_boxes(&sorted.overlaps, cfg);
    let top = partition.top_of(n);
    let mut preclip = vec![0.0; n];
    for group in &partition.groups {
        let t = group[0];
        let s_top = sorted.scores[t];
        preclip[t] = s_top;
        for &i in &group[1..] {
            preclip[i] = sorted.scores[i] - cfg.prune(sorted.overlaps.get(i, t)) * s_top;
        }
    }
    let rescores = preclip.iter().map(|&c| clip01(c)).collect();
    GroomedForward {
        sorted,
        partition,
        top,
        preclip,
        rescores,
    }
}

/// Grouped and masked rescoring: per group `clip((I - M∘P) s)`, where the mask
/// keeps only the column of the group's top box. Boxes removed by the group
/// size cap get rescore 0.
pub fn groomed_rescore(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<RescoreResult> {
    let sorted = prepare(scores, overlaps, cfg)?;
    let fwd = groomed_forward(sorted, cfg);
    Ok(RescoreResult::from_sorted(&fwd.sorted, fwd.preclip, fwd.rescores, cfg))
}

/// `clip((I + P)^-1 s)` over all boxes, solved by forward substitution.
pub fn rescore_full_inverse(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<RescoreResult> {
    let sorted = prepare(scores, overlaps, cfg)?;
    let p = PruneMatrix::new(&sorted.overlaps, cfg);
    let x = solve_unit_lower(p.matrix(), &sorted.scores);
    let r = x.iter().map(|&v| clip01(v)).collect();
    Ok(RescoreResult::from_sorted(&sorted, x, r, cfg))
}

/// Per group `clip((I_k + P_k)^-1 s_k)`; capped-out boxes get 0.
pub fn rescore_grouped_inverse(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<RescoreResult> {
    let sorted = prepare(scores, overlaps, cfg)?;
    let n = sorted.len();
    let p = PruneMatrix::new(&sorted.overlaps, cfg);
    let partition = group_boxes(&sorted.overlaps, cfg);
    let mut x = vec![0.0; n];
    for group in &partition.groups {
        let sk: Vec<f64> = group.iter().map(|&i| sorted.scores[i]).collect();
        let xk = solve_unit_lower(&p.restrict(group), &sk);
        for (&i, v) in group.iter().zip(xk) {
            x[i] = v;
        }
    }
    let r = x.iter().map(|&v| clip01(v)).collect();
    Ok(RescoreResult::from_sorted(&sorted, x, r, cfg))
}

/// Exact solution of `r_i = max(s_i - sum_{j<i} P_ij r_j, 0)`.
///
/// The summation order matches [`rescore_full_inverse`], so whenever no
/// intermediate value goes negative both give bitwise-identical results.
pub fn rescore_recursive_oracle(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<RescoreResult> {
    let sorted = prepare(scores, overlaps, cfg)?;
    let n = sorted.len();
    let p = PruneMatrix::new(&sorted.overlaps, cfg);
    let mut pre = Vec::with_capacity(n);
    let mut r: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = sorted.scores[i];
        for j in 0..i {
            acc -= p.get(i, j) * r[j];
        }
        pre.push(acc);
        r.push(acc.max(0.0));
    }
    Ok(RescoreResult::from_sorted(&sorted, pre, r, cfg))
}

/// Sequential product form `r_i = s_i * prod_{j<i} (1 - P_ij r_j)`.
pub fn rescore_product_oracle(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<RescoreResult> {
    let sorted = prepare(scores, overlaps, cfg)?;
    let n = sorted.len();
    let p = PruneMatrix::new(&sorted.overlaps, cfg);
    let mut r: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let factor: f64 = (0..i).map(|j| 1.0 - p.get(i, j) * r[j]).product();
        r.push(sorted.scores[i] * factor);
    }
    Ok(RescoreResult::from_sorted(&sorted, r.clone(), r, cfg))
}
