//! Evaluation reports comparing adaptive schemes with fixed grids.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::FORMAT_VERSION;
use crate::metrics::{evaluate, fixed_grid_video, mean_std, DistributionReport, SchemeEvaluation, VolumeReport};
use crate::par::Execution;
use crate::projection::FovSize;
use crate::scheme::{RegionClass, VideoScheme};
use crate::trace::TraceSet;

/// Seeded shuffle of `ids` into `build` users and the remaining holdout,
/// each returned sorted.
pub fn split_users(ids: &[u32], build: usize, seed: u64) -> (Vec<u32>, Vec<u32>) {
    let mut shuffled = ids.to_vec();
    shuffled.sort_unstable();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = build.min(shuffled.len());
    let mut b = shuffled[..k].to_vec();
    let mut h = shuffled[k..].to_vec();
    b.sort_unstable();
    h.sort_unstable();
    (b, h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyframeCoverage {
    pub t: f64,
    /// Mean share of holdout viewport pixels under FoVf + FoV tiles.
    pub fov_coverage_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSummary {
    pub label: String,
    /// `adaptive` or `fixed`.
    pub kind: String,
    pub gamma: Option<f64>,
    pub grid: Option<String>,
    pub mean_redundancy_pct: f64,
    pub std_redundancy_pct: f64,
    pub volume: VolumeReport,
    pub distribution: DistributionReport,
    /// Adaptive only: `100 * (fixed - adaptive) / fixed` mean transmitted
    /// pixels, per fixed grid.
    pub relative_pixel_saving_pct: BTreeMap<String, f64>,
    /// Adaptive only.
    pub coverage: Vec<KeyframeCoverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub format_version: u32,
    pub video_id: String,
    pub holdout_users: Vec<u32>,
    pub keyframes: usize,
    pub schemes: Vec<SchemeSummary>,
}

fn grid_label(rows: usize, cols: usize) -> String {
    format!("{rows}x{cols}")
}

impl EvalReport {
    /// Scores every adaptive scheme and every fixed grid on the holdout users.
    pub fn build(
        adaptive: &[VideoScheme],
        holdout: &TraceSet,
        fixed_grids: &[(usize, usize)],
        fov: FovSize,
        exec: Execution,
    ) -> Result<EvalReport> {
        let first = adaptive
            .first()
            .ok_or(Error::EmptyInput("no adaptive schemes to evaluate"))?;
        if holdout.users.is_empty() {
            return Err(Error::EmptyInput("no holdout users"));
        }
        let times: Vec<f64> = first.keyframes.iter().map(|k| k.keyframe_time).collect();
        let fixed: Vec<VideoScheme> = fixed_grids
            .iter()
            .map(|&(r, c)| fixed_grid_video(r, c, &first.geometry, &times, &first.video_id))
            .collect::<Result<_>>()?;
        let all: Vec<&VideoScheme> = adaptive.iter().chain(fixed.iter()).collect();
        let evals = evaluate(&all, holdout, fov, exec)?;

        let summarize = |scheme: &VideoScheme, eval: &SchemeEvaluation| {
            let red: Vec<f64> = eval.records.iter().map(|r| r.redundancy_pct).collect();
            let (mean, std) = mean_std(&red);
            (mean, std, eval.volume(), eval.distribution(scheme))
        };
        let fixed_volume: Vec<(String, f64)> = fixed_grids
            .iter()
            .zip(&evals[adaptive.len()..])
            .map(|(&(r, c), e)| (grid_label(r, c), e.volume().mean_px))
            .collect();

        let mut schemes = Vec::new();
        for (scheme, eval) in adaptive.iter().zip(&evals) {
            let (mean, std, volume, distribution) = summarize(scheme, eval);
            let saving = fixed_volume
                .iter()
                .map(|(label, px)| (label.clone(), 100.0 * (px - volume.mean_px) / px))
                .collect();
            let fov_idx = [0usize, 1];
            debug_assert_eq!(RegionClass::ALL[0], RegionClass::FoVf);
            let coverage = times
                .iter()
                .map(|&t| {
                    let v: Vec<f64> = eval
                        .records
                        .iter()
                        .filter(|r| r.t == t)
                        .map(|r| {
                            100.0 * fov_idx.iter().map(|&i| r.region_overlap_px[i]).sum::<usize>() as f64
                                / r.n_fov as f64
                        })
                        .collect();
                    KeyframeCoverage {
                        t,
                        fov_coverage_pct: mean_std(&v).0,
                    }
                })
                .collect();
            schemes.push(SchemeSummary {
                label: format!("adaptive-g{}", scheme.gamma),
                kind: "adaptive".into(),
                gamma: Some(scheme.gamma),
                grid: None,
                mean_redundancy_pct: mean,
                std_redundancy_pct: std,
                volume,
                distribution,
                relative_pixel_saving_pct: saving,
                coverage,
            });
        }
        for ((&(r, c), scheme), eval) in fixed_grids.iter().zip(&fixed).zip(&evals[adaptive.len()..]) {
            let (mean, std, volume, distribution) = summarize(scheme, eval);
            schemes.push(SchemeSummary {
                label: format!("fixed-{}", grid_label(r, c)),
                kind: "fixed".into(),
                gamma: None,
                grid: Some(grid_label(r, c)),
                mean_redundancy_pct: mean,
                std_redundancy_pct: std,
                volume,
                distribution,
                relative_pixel_saving_pct: BTreeMap::new(),
                coverage: Vec::new(),
            });
        }
        Ok(EvalReport {
            format_version: FORMAT_VERSION,
            video_id: first.video_id.clone(),
            holdout_users: holdout.user_ids(),
            keyframes: times.len(),
            schemes,
        })
    }

    pub fn scheme(&self, label: &str) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per scheme.
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "video_id".to_string(),
            "label".into(),
            "kind".into(),
            "gamma".into(),
            "grid".into(),
            "mean_redundancy_pct".into(),
            "std_redundancy_pct".into(),
            "mean_px".into(),
            "max_px".into(),
            "mean_tiles".into(),
        ];
        for r in RegionClass::ALL {
            header.push(format!("{r}_count"));
            header.push(format!("{r}_size_bt"));
            header.push(format!("{r}_vp_overlap_pct"));
        }
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        wtr.write_record(&header).map_err(csv_err)?;
        for s in &self.schemes {
            let mut row = vec![
                self.video_id.clone(),
                s.label.clone(),
                s.kind.clone(),
                s.gamma.map(|g| g.to_string()).unwrap_or_default(),
                s.grid.clone().unwrap_or_default(),
                format!("{:.4}", s.mean_redundancy_pct),
                format!("{:.4}", s.std_redundancy_pct),
                format!("{:.1}", s.volume.mean_px),
                s.volume.max_px.to_string(),
                format!("{:.3}", s.distribution.mean_tiles),
            ];
            for r in &s.distribution.regions {
                row.push(format!("{:.3}", r.mean_count));
                row.push(format!("{:.3}", r.mean_size_bt));
                row.push(format!("{:.3}", r.vp_overlap_pct));
            }
            wtr.write_record(&row).map_err(csv_err)?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
