//! Analytic versus central-difference gradients of the grouped rescorer for
//! each differentiable pruning function.

use diffnms::autodiff::GradCheckConfig;
use diffnms::harness::gradcheck_random;
use diffnms::nms::{NmsConfig, Pruning};

fn main() -> diffnms::Result<()> {
    let check = GradCheckConfig::default();
    for pruning in [
        Pruning::Linear,
        Pruning::Exponential { tau: 0.5 },
        Pruning::Sigmoidal { tau: 0.1 },
    ] {
        let cfg = NmsConfig::default().with_pruning(pruning);
        let Some(r) = gradcheck_random(&cfg, &check, 3, 50, 25)? else {
            continue;
        };
        println!(
            "{:<32} {}  max rel error {:.2e}  checked {}  skipped {}",
            format!("{pruning:?}"),
            if r.passed { "PASS" } else { "FAIL" },
            r.max_rel_error,
            r.checked,
            r.skipped
        );
    }
    Ok(())
}
