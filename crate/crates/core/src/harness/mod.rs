//! Dataset I/O, synthetic scenes, oracles and the command implementations
//! behind the `diffnms` binary.

pub mod cli;
pub mod compare;
pub mod correlation;
pub mod kitti;
pub mod oracle;
pub mod pipeline;
pub mod random;
pub mod scene;
pub mod scores;
pub mod synth;

pub use compare::{compare_variants, ComparisonReport, VariantSummary};
pub use correlation::{pearson, score_iou_correlation, CorrelationPoint, CorrelationReport};
pub use kitti::{parse_kitti_file, parse_kitti_label, KittiObject, KittiRecord};
pub use oracle::{oracle_scores, with_oracle_scores, OracleOverlap};
pub use pipeline::{run_scenes, suppress, suppressed_scene, NmsSetup};
pub use random::{gradcheck_random, random_instance, random_rects};
pub use scene::{read_jsonl, read_kitti, read_scenes, write_jsonl, write_kitti, write_scenes, DataFormat, Scene};
pub use scores::{combine_scores, nms_score, ScoreMode};
pub use synth::{synthesize, Camera, SyntheticConfig};
