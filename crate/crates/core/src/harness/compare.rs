//! Side-by-side runs of several NMS variants on one dataset.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use super::pipeline::{par_map, suppress, suppressed_scene, NmsSetup};
use super::scene::Scene;
use crate::error::Result;
use crate::nms::NmsVariant;
use crate::ranking::{eval_table, EvalConfig, EvalImage};

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub variant: NmsVariant,
    pub kept: usize,
    /// AP|R40 per configured difficulty.
    pub ap: Vec<(String, Option<f64>)>,
    /// Mean wall-clock milliseconds per scene, when timing was requested.
    pub ms_per_scene: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub variants: Vec<VariantSummary>,
    /// `jaccard[a][b]`: overlap of the kept sets of variants `a` and `b`,
    /// as `(scene, box)` pairs. Two empty sets agree fully.
    pub jaccard: Vec<Vec<f64>>,
}

fn jaccard(a: &HashSet<(usize, usize)>, b: &HashSet<(usize, usize)>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

/// Runs each variant with the shared settings of `base` and evaluates the
/// kept boxes against the scenes' ground truths.
pub fn compare_variants(
    scenes: &[Scene],
    variants: &[NmsVariant],
    base: &NmsSetup,
    eval: &EvalConfig,
    timing: bool,
) -> Result<ComparisonReport> {
    let mut summaries = Vec::with_capacity(variants.len());
    let mut kept_sets = Vec::with_capacity(variants.len());
    for &variant in variants {
        let setup = NmsSetup { variant, ..*base };
        let start = Instant::now();
        let results = par_map(scenes, |s| suppress(s, &setup))?;
        let elapsed = start.elapsed();
        let reduced: Vec<Scene> = scenes.iter().zip(&results).map(|(s, r)| suppressed_scene(s, r)).collect();
        let images: Vec<EvalImage<'_>> = reduced
            .iter()
            .map(|s| EvalImage { detections: &s.boxes, gts: &s.gts })
            .collect();
        let set: HashSet<(usize, usize)> = results
            .iter()
            .enumerate()
            .flat_map(|(k, r)| r.kept.iter().map(move |&i| (k, i)))
            .collect();
        summaries.push(VariantSummary {
            variant,
            kept: set.len(),
            ap: eval_table(&images, eval),
            ms_per_scene: timing.then(|| elapsed.as_secs_f64() * 1e3 / scenes.len().max(1) as f64),
        });
        kept_sets.push(set);
    }
    let jaccard = kept_sets
        .iter()
        .map(|a| kept_sets.iter().map(|b| jaccard(a, b)).collect())
        .collect();
    Ok(ComparisonReport { variants: summaries, jaccard })
}

fn fmt_ap(ap: Option<f64>) -> String {
    ap.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
}

impl ComparisonReport {
    /// Columns: `variant,kept,ap_<difficulty>...,jaccard_<variant>...` and
    /// `ms_per_scene` when timed. Missing APs are empty cells.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let timed = self.variants.iter().any(|v| v.ms_per_scene.is_some());
        let mut header = vec!["variant".to_string(), "kept".to_string()];
        if let Some(first) = self.variants.first() {
            header.extend(first.ap.iter().map(|(d, _)| format!("ap_{}", d.to_lowercase())));
        }
        header.extend(self.variants.iter().map(|v| format!("jaccard_{}", v.variant)));
        if timed {
            header.push("ms_per_scene".into());
        }
        w.write_record(&header)?;
        for (k, v) in self.variants.iter().enumerate() {
            let mut row = vec![v.variant.to_string(), v.kept.to_string()];
            row.extend(v.ap.iter().map(|(_, ap)| ap.map(|x| x.to_string()).unwrap_or_default()));
            row.extend(self.jaccard[k].iter().map(|j| j.to_string()));
            if timed {
                row.push(v.ms_per_scene.map(|t| t.to_string()).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<16} {:>7}", "variant", "kept");
        if let Some(first) = self.variants.first() {
            for (d, _) in &first.ap {
                let _ = write!(out, " {:>9}", d);
            }
        }
        if self.variants.iter().any(|v| v.ms_per_scene.is_some()) {
            let _ = write!(out, " {:>10}", "ms/scene");
        }
        out.push('\n');
        for v in &self.variants {
            let _ = write!(out, "{:<16} {:>7}", v.variant.name(), v.kept);
            for (_, ap) in &v.ap {
                let _ = write!(out, " {:>9}", fmt_ap(*ap));
            }
            if let Some(t) = v.ms_per_scene {
                let _ = write!(out, " {t:>10.3}");
            }
            out.push('\n');
        }
        out
    }
}
