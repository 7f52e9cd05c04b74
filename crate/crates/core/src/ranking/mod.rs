//! Best-box targets, the imagewise AP loss and the AP|R40 evaluator.

mod ap_loss;
mod eval;
mod targets;

pub use ap_loss::{
    ap_loss_gradient, average_precision, imagewise_ap_loss, imagewise_ap_loss_gradient, pooled_ap_loss_gradient,
    ApLoss, ApLossConfig,
};
pub use eval::{eval_ap_r40, eval_table, Difficulty, EvalConfig, EvalImage, RECALL_POINTS};
pub use targets::{assign_targets, q_match, TargetAssignment, DEFAULT_BETA};
