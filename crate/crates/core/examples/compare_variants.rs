//! All NMS variants on one synthetic dataset: kept boxes, AP|R40 and the
//! Jaccard overlap of their kept sets.

use diffnms::harness::{compare_variants, synthesize, NmsSetup, SyntheticConfig};
use diffnms::nms::NmsVariant;
use diffnms::ranking::EvalConfig;

fn main() -> diffnms::Result<()> {
    let scenes = synthesize(&SyntheticConfig { seed: 11, scenes: 40, ..SyntheticConfig::default() })?;
    let report = compare_variants(&scenes, &NmsVariant::ALL, &NmsSetup::default(), &EvalConfig::default(), true)?;
    print!("{}", report.to_table());
    Ok(())
}
