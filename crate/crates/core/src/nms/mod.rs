//! Non-maximal suppression: the greedy classical/Soft variant, score sorting,
//! grouping, and the matrix-form rescorers.

mod classical;
mod config;
mod group;
mod rescore;
mod sort;

pub use classical::classical_soft_nms;
pub use config::{clip01, prune, prune_derivative, NmsConfig, Pruning};
pub use group::{build_mask, group_boxes, GroupPartition};
pub use rescore::{
    groomed_rescore, rescore_full_inverse, rescore_grouped_inverse, rescore_product_oracle,
    rescore_recursive_oracle, PruneMatrix, RescoreResult,
};
pub use sort::{sort_by_score, SortedProblem};

pub(crate) use rescore::{groomed_forward, validate_inputs, GroomedForward};

use crate::error::Result;
use crate::geometry::OverlapMatrix;

/// Named NMS variants, as selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NmsVariant {
    /// Greedy NMS with the hard threshold, whatever pruning is configured.
    Classical,
    /// Greedy NMS with the configured pruning.
    Soft,
    Groomed,
    FullInverse,
    GroupedInverse,
}

impl NmsVariant {
    pub const ALL: [NmsVariant; 5] = [
        NmsVariant::Classical,
        NmsVariant::Soft,
        NmsVariant::Groomed,
        NmsVariant::FullInverse,
        NmsVariant::GroupedInverse,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NmsVariant::Classical => "classical",
            NmsVariant::Soft => "soft",
            NmsVariant::Groomed => "groomed",
            NmsVariant::FullInverse => "full-inverse",
            NmsVariant::GroupedInverse => "grouped-inverse",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    pub fn run(&self, scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<RescoreResult> {
        match self {
            NmsVariant::Classical => {
                classical_soft_nms(scores, overlaps, &cfg.with_pruning(Pruning::HardThreshold))
            }
            NmsVariant::Soft => classical_soft_nms(scores, overlaps, cfg),
            NmsVariant::Groomed => groomed_rescore(scores, overlaps, cfg),
            NmsVariant::FullInverse => rescore_full_inverse(scores, overlaps, cfg),
            NmsVariant::GroupedInverse => rescore_grouped_inverse(scores, overlaps, cfg),
        }
    }
}

impl std::fmt::Display for NmsVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
