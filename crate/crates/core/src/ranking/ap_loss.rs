//! Per-image average precision, the imagewise AP loss and its pairwise
//! error-driven gradient.
//!
//! The gradient is a substitute for the published AP-loss update: for every
//! (positive, negative) pair ranked wrongly within `margin`, the positive is
//! pushed up and the negative down by `1 / #violations`. It is zero exactly
//! when the ranking is perfect with the margin, and every step of descent can
//! only raise positives and lower negatives.

use std::cmp::Ordering;

/// Weight of the after-NMS loss term and the margin of the gradient scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApLossConfig {
    pub lambda: f64,
    pub margin: f64,
}

impl Default for ApLossConfig {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            margin: 0.0,
        }
    }
}

impl ApLossConfig {
    /// `lambda * loss`, the contribution to a combined objective.
    pub fn weighted(&self, loss: &ApLoss) -> f64 {
        self.lambda * loss.value
    }
}

fn ranking_order(rescores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rescores.len()).collect();
    order.sort_by(|&a, &b| rescores[b].partial_cmp(&rescores[a]).unwrap_or(Ordering::Equal));
    order
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `sum_k (k / ranks[k-1]) / ranks.len()` as a reduced fraction, converted
/// with a single rounding. `None` if the fraction outgrows exact f64 range.
fn exact_mean_precision(ranks: &[usize]) -> Option<f64> {
    const EXACT: u128 = 1 << 53;
    let (mut num, mut den) = (0u128, 1u128);
    for (k, &rank) in ranks.iter().enumerate() {
        let (k, rank) = ((k + 1) as u128, rank as u128);
        num = num.checked_mul(rank)?.checked_add(k.checked_mul(den)?)?;
        den = den.checked_mul(rank)?;
        let g = gcd(num, den);
        (num, den) = (num / g, den / g);
    }
    den = den.checked_mul(ranks.len() as u128)?;
    let g = gcd(num, den);
    (num, den) = (num / g, den / g);
    (num <= EXACT && den <= EXACT).then(|| num as f64 / den as f64)
}

/// Mean precision at the rank of each positive, ranking by descending
/// rescore with ties broken by index. `None` when there are no positives.
///
/// The result is the correctly rounded rational value whenever its reduced
/// numerator and denominator fit in 53 bits.
pub fn average_precision(rescores: &[f64], targets: &[bool]) -> Option<f64> {
    assert_eq!(rescores.len(), targets.len(), "rescores and targets differ in length");
    let ranks: Vec<usize> = ranking_order(rescores)
        .into_iter()
        .enumerate()
        .filter(|&(_, i)| targets[i])
        .map(|(rank, _)| rank + 1)
        .collect();
    if ranks.is_empty() {
        return None;
    }
    exact_mean_precision(&ranks).or_else(|| {
        let sum: f64 = ranks.iter().enumerate().map(|(k, &r)| (k + 1) as f64 / r as f64).sum();
        Some(sum / ranks.len() as f64)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApLoss {
    /// Mean of `1 - AP` over images that have a positive.
    pub value: f64,
    pub images_used: usize,
    /// Set when no image had a positive; `value` is then 0.
    pub no_positives: bool,
}

/// `mean(1 - AP)` over the images of a batch that contain a positive.
pub fn imagewise_ap_loss(batch: &[(&[f64], &[bool])]) -> ApLoss {
    let aps: Vec<f64> = batch
        .iter()
        .filter_map(|(r, t)| average_precision(r, t))
        .collect();
    if aps.is_empty() {
        return ApLoss {
            value: 0.0,
            images_used: 0,
            no_positives: true,
        };
    }
    ApLoss {
        value: aps.iter().map(|ap| 1.0 - ap).sum::<f64>() / aps.len() as f64,
        images_used: aps.len(),
        no_positives: false,
    }
}

fn pairwise_gradient(rescores: &[f64], targets: &[bool], margin: f64) -> Vec<f64> {
    let mut grad = vec![0.0; rescores.len()];
    let pos: Vec<usize> = (0..rescores.len()).filter(|&i| targets[i]).collect();
    let neg: Vec<usize> = (0..rescores.len()).filter(|&i| !targets[i]).collect();
    let violating: Vec<(usize, usize)> = pos
        .iter()
        .flat_map(|&i| neg.iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| rescores[j] + margin >= rescores[i])
        .collect();
    if violating.is_empty() {
        return grad;
    }
    let w = 1.0 / violating.len() as f64;
    for (i, j) in violating {
        grad[i] -= w;
        grad[j] += w;
    }
    grad
}

/// `d loss / d rescores` for one image. Zero when the image lacks positives
/// or negatives, or when every positive beats every negative by more than
/// `margin`.
pub fn ap_loss_gradient(rescores: &[f64], targets: &[bool], margin: f64) -> Vec<f64> {
    assert_eq!(rescores.len(), targets.len(), "rescores and targets differ in length");
    pairwise_gradient(rescores, targets, margin)
}

/// Per-image gradients: each image is ranked on its own, so a perfectly
/// ranked image receives no gradient regardless of the others.
pub fn imagewise_ap_loss_gradient(batch: &[(&[f64], &[bool])], margin: f64) -> Vec<Vec<f64>> {
    batch
        .iter()
        .map(|(r, t)| ap_loss_gradient(r, t, margin))
        .collect()
}

/// Gradients when all boxes of the batch are ranked together, split back per
/// image. Kept for comparison with the imagewise variant.
pub fn pooled_ap_loss_gradient(batch: &[(&[f64], &[bool])], margin: f64) -> Vec<Vec<f64>> {
    let r: Vec<f64> = batch.iter().flat_map(|(r, _)| r.iter().copied()).collect();
    let t: Vec<bool> = batch.iter().flat_map(|(_, t)| t.iter().copied()).collect();
    let flat = pairwise_gradient(&r, &t, margin);
    let mut out = Vec::with_capacity(batch.len());
    let mut offset = 0;
    for (r, _) in batch {
        out.push(flat[offset..offset + r.len()].to_vec());
        offset += r.len();
    }
    out
}
