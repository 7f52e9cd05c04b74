//! Backward pass of the grouped, masked rescorer and a finite-difference
//! checker for it.
//!
//! Sorting and grouping are treated as fixed discrete structure. Within a
//! group with top `t`, the forward map is `r_t = clip(s_t)` and
//! `r_i = clip(s_i - p(o_it) s_t)`, so the only overlap entries with a
//! nonzero derivative are the `(member, top)` pairs. The clip gate is 1 on the
//! closed interval `[0, 1]` and 0 outside it.

use crate::error::{Error, Result};
use crate::geometry::OverlapMatrix;
use crate::nms::{groomed_forward, prune_derivative, sort_by_score, validate_inputs, GroomedForward, NmsConfig};

/// Derivative of the loss with respect to one overlap entry `O[row][col]`,
/// where `row` is a group member and `col` its group top (original indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapGradient {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NmsGradients {
    /// `dL/ds` in original box order.
    pub ds: Vec<f64>,
    /// `dL/dO` for every (member, top) entry the forward pass reads.
    pub d_overlaps: Vec<OverlapGradient>,
}

#[inline]
fn gate(c: f64) -> f64 {
    if (0.0..=1.0).contains(&c) {
        1.0
    } else {
        0.0
    }
}

fn check_differentiable(cfg: &NmsConfig) -> Result<()> {
    if cfg.pruning.is_differentiable() {
        Ok(())
    } else {
        Err(Error::NonDifferentiablePruning)
    }
}

/// Chains `upstream = dL/dr` through the grouped, masked rescorer.
pub fn groomed_backward(
    scores: &[f64],
    overlaps: &OverlapMatrix,
    cfg: &NmsConfig,
    upstream: &[f64],
) -> Result<NmsGradients> {
    check_differentiable(cfg)?;
    validate_inputs(scores, overlaps, cfg)?;
    if upstream.len() != scores.len() {
        return Err(Error::LengthMismatch {
            what: "upstream gradient",
            got: upstream.len(),
            expected: scores.len(),
        });
    }
    let fwd = groomed_forward(sort_by_score(scores, overlaps)?, cfg);
    backward_from(&fwd, cfg, upstream)
}

fn backward_from(fwd: &GroomedForward, cfg: &NmsConfig, upstream: &[f64]) -> Result<NmsGradients> {
    let sorted = &fwd.sorted;
    let order = &sorted.order;
    let mut ds = vec![0.0; sorted.len()];
    let mut d_overlaps = Vec::new();
    for group in &fwd.partition.groups {
        let t = group[0];
        let s_top = sorted.scores[t];
        ds[order[t]] += gate(fwd.preclip[t]) * upstream[order[t]];
        for &i in &group[1..] {
            let g = gate(fwd.preclip[i]) * upstream[order[i]];
            let o = sorted.overlaps.get(i, t);
            ds[order[i]] += g;
            ds[order[t]] -= g * cfg.prune(o);
            d_overlaps.push(OverlapGradient {
                row: order[i],
                col: order[t],
                value: -g * prune_derivative(o, cfg)? * s_top,
            });
        }
    }
    Ok(NmsGradients { ds, d_overlaps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    /// Central-difference half step.
    pub eps: f64,
    /// Largest accepted relative error.
    pub tolerance: f64,
    /// Coordinates whose perturbation could cross a clip kink, a sort tie or
    /// the grouping threshold within this distance are skipped.
    pub kink_margin: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            tolerance: 1e-4,
            kink_margin: 1e-3,
        }
    }
}

/// An input coordinate of the rescorer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Score(usize),
    Overlap { row: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(1, |analytic|, |numeric|)`.
    pub max_rel_error: f64,
    /// Input coordinate and output index of the largest error.
    pub worst: Option<(Coordinate, usize)>,
    pub checked: usize,
    pub skipped: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl GradCheckReport {
    /// Folds several reports into one; passes only if all pass.
    pub fn merge(reports: impl IntoIterator<Item = GradCheckReport>) -> Option<GradCheckReport> {
        reports.into_iter().reduce(|a, b| {
            let (max_rel_error, worst) = if b.max_rel_error > a.max_rel_error {
                (b.max_rel_error, b.worst)
            } else {
                (a.max_rel_error, a.worst)
            };
            GradCheckReport {
                max_rel_error,
                worst,
                checked: a.checked + b.checked,
                skipped: a.skipped + b.skipped,
                tolerance: a.tolerance.min(b.tolerance),
                passed: a.passed && b.passed,
            }
        })
    }
}

fn forward_rescores(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<Vec<f64>> {
    let fwd = groomed_forward(sort_by_score(scores, overlaps)?, cfg);
    Ok(fwd.sorted.unsort(&fwd.rescores))
}

/// Compares the analytic Jacobian of the grouped, masked rescorer against
/// central differences, column by column.
pub fn finite_difference_check(
    scores: &[f64],
    overlaps: &OverlapMatrix,
    cfg: &NmsConfig,
    check: &GradCheckConfig,
) -> Result<GradCheckReport> {
    check_differentiable(cfg)?;
    validate_inputs(scores, overlaps, cfg)?;
    if !(check.eps > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive".into()));
    }
    let n = scores.len();
    let fwd = groomed_forward(sort_by_score(scores, overlaps)?, cfg);
    let order = &fwd.sorted.order;
    let mut pos = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        pos[i] = k;
    }

    // analytic Jacobian, row k = d r_k / d inputs
    let mut jac_s = vec![vec![0.0; n]; n];
    let mut jac_o: Vec<Vec<OverlapGradient>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let g = backward_from(&fwd, cfg, &e)?;
        jac_s[k] = g.ds;
        jac_o.push(g.d_overlaps);
    }

    let margin = check.kink_margin;
    let near_kink = |orig: usize| {
        let c = fwd.preclip[pos[orig]];
        fwd.top[pos[orig]].is_some() && (c.abs() < margin || (c - 1.0).abs() < margin)
    };
    let members_of = |orig: usize| -> Vec<usize> {
        fwd.partition
            .groups
            .iter()
            .find(|g| order[g[0]] == orig)
            .map(|g| g.iter().map(|&p| order[p]).collect())
            .unwrap_or_else(|| vec![orig])
    };

    let mut coords: Vec<Coordinate> = (0..n).map(Coordinate::Score).collect();
    for group in &fwd.partition.groups {
        for &i in &group[1..] {
            coords.push(Coordinate::Overlap {
                row: order[i],
                col: order[group[0]],
            });
        }
    }

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
        skipped: 0,
        tolerance: check.tolerance,
        passed: true,
    };

    for coord in coords {
        let skip = match coord {
            Coordinate::Score(j) => {
                let tie = (0..n).any(|k| k != j && (scores[k] - scores[j]).abs() < margin);
                tie || members_of(j).into_iter().any(near_kink)
            }
            Coordinate::Overlap { row, col } => (overlaps.get(row, col) - cfg.nt).abs() < margin || near_kink(row),
        };
        if skip {
            report.skipped += 1;
            continue;
        }
        let (plus, minus, step) = match coord {
            Coordinate::Score(j) => {
                let (mut sp, mut sm) = (scores.to_vec(), scores.to_vec());
                sp[j] += check.eps;
                sm[j] -= check.eps;
                let step = sp[j] - sm[j];
                (
                    forward_rescores(&sp, overlaps, cfg)?,
                    forward_rescores(&sm, overlaps, cfg)?,
                    step,
                )
            }
            Coordinate::Overlap { row, col } => {
                let (mut op, mut om) = (overlaps.clone(), overlaps.clone());
                let o = overlaps.get(row, col);
                op.set(row, col, o + check.eps);
                om.set(row, col, o - check.eps);
                let step = op.get(row, col) - om.get(row, col);
                (
                    forward_rescores(scores, &op, cfg)?,
                    forward_rescores(scores, &om, cfg)?,
                    step,
                )
            }
        };
        for k in 0..n {
            let numeric = (plus[k] - minus[k]) / step;
            let analytic = match coord {
                Coordinate::Score(j) => jac_s[k][j],
                Coordinate::Overlap { row, col } => jac_o[k]
                    .iter()
                    .find(|g| g.row == row && g.col == col)
                    .map_or(0.0, |g| g.value),
            };
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0);
            if report.worst.is_none() || err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = Some((coord, k));
            }
        }
        report.checked += 1;
    }
    report.passed = report.max_rel_error <= check.tolerance;
    Ok(report)
}
