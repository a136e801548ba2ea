//! Hierarchical thresholding of the attention map into the four regions:
//! finer FoV cores, the FoV area around them, the buffer, and out-of-view.

use serde::{Deserialize, Serialize};

use crate::attention::{equalize, level_passes, NormMap};
use crate::error::{Error, Result};
use crate::geometry::{Cell, CellGrid, FrameGeometry, PixelMask, Rect};

pub const DEFAULT_TH_CANDIDATES: [f64; 4] = [0.4, 0.5, 0.6, 0.7];
pub const DEFAULT_TH_BUF_CANDIDATES: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const DEFAULT_TH_FINER: f64 = 0.9;
pub const DEFAULT_COVERAGE_TARGET: f64 = 80.0;
pub const DEFAULT_BLOB_KEEP: f64 = 95.0;

/// How [`determine_threshold`] treats a user whose mask is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmptyMaskPolicy {
    /// Coverage is undefined: fail naming the user.
    Reject,
    /// Nothing left to cover: the user counts as fully covered.
    CountAsCovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearchResult {
    pub chosen: f64,
    /// `(candidate, mean coverage percent)` for every candidate, ascending.
    pub coverage_by_candidate: Vec<(f64, f64)>,
    /// Per-user coverage percent at `chosen`.
    pub per_user_coverage: Vec<f64>,
    /// False when no candidate met the target and the smallest was taken.
    pub passed: bool,
}

impl ThresholdSearchResult {
    pub fn mean_coverage(&self) -> f64 {
        self.coverage_by_candidate
            .iter()
            .find(|(c, _)| *c == self.chosen)
            .map_or(0.0, |&(_, s)| s)
    }
}

/// Picks the highest candidate whose mean user coverage still meets `target`.
///
/// Candidates are tried in ascending order; the first one whose mean
/// coverage falls below `target` stops the search and the previous one is
/// returned. If the smallest already fails it is returned anyway with
/// `passed = false`.
pub fn determine_threshold(
    norm: &NormMap,
    users: &[&PixelMask],
    candidates: &[f64],
    target: f64,
    policy: EmptyMaskPolicy,
) -> Result<ThresholdSearchResult> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("no threshold candidates"));
    }
    if users.is_empty() {
        return Err(Error::EmptyInput("no user masks"));
    }
    if candidates.windows(2).any(|w| w[0] >= w[1]) || candidates.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::Domain(format!(
            "threshold candidates must be ascending in [0, 1]: {candidates:?}"
        )));
    }
    let mut histograms = Vec::with_capacity(users.len());
    for (i, mask) in users.iter().enumerate() {
        if mask.width() != norm.width() || mask.height() != norm.height() {
            return Err(Error::Shape(format!("user {i} mask does not match the attention map")));
        }
        let mut hist = [0u64; 256];
        for (&b, &l) in mask.bits().iter().zip(norm.levels()) {
            hist[l as usize] += b as u64;
        }
        let total: u64 = hist.iter().sum();
        if total == 0 && policy == EmptyMaskPolicy::Reject {
            return Err(Error::EmptyUserMask { user: i });
        }
        histograms.push((hist, total));
    }

    let per_user = |candidate: f64| -> Vec<f64> {
        let pass = level_passes(candidate);
        histograms
            .iter()
            .map(|(hist, total)| {
                if *total == 0 {
                    return 100.0;
                }
                let hit: u64 = (0..256).filter(|&l| pass[l]).map(|l| hist[l]).sum();
                100.0 * hit as f64 / *total as f64
            })
            .collect()
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    let coverage: Vec<(f64, Vec<f64>)> = candidates.iter().map(|&c| (c, per_user(c))).collect();
    let coverage_by_candidate: Vec<(f64, f64)> = coverage.iter().map(|(c, s)| (*c, mean(s))).collect();

    let first_fail = coverage_by_candidate.iter().position(|&(_, s)| s < target);
    let (idx, passed) = match first_fail {
        None => (candidates.len() - 1, true),
        Some(0) => (0, false),
        Some(k) => (k - 1, true),
    };
    Ok(ThresholdSearchResult {
        chosen: candidates[idx],
        coverage_by_candidate,
        per_user_coverage: coverage[idx].1.clone(),
        passed,
    })
}

/// A 4-connected group of grid cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blob {
    /// Row-major sorted.
    pub cells: Vec<Cell>,
}

impl Blob {
    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlobSelection {
    /// Accepted blobs, largest first.
    pub blobs: Vec<Blob>,
    pub union: CellGrid,
    pub total_area: usize,
}

/// Keeps the largest connected components until they hold at least `keep`
/// percent of the active area.
///
/// Ties in size go to the blob whose first cell comes first in row-major
/// order.
pub fn select_blobs(grid: &CellGrid, keep: f64) -> Result<BlobSelection> {
    let total = grid.count();
    if total == 0 {
        return Err(Error::EmptyInput("blob selection on an empty grid"));
    }
    let mut blobs: Vec<Blob> = grid.components().into_iter().map(|cells| Blob { cells }).collect();
    blobs.sort_by(|a, b| b.size().cmp(&a.size()).then_with(|| a.cells[0].cmp(&b.cells[0])));

    let mut union = CellGrid::new(grid.rows(), grid.cols());
    let mut selected = Vec::new();
    let mut acc = 0usize;
    for blob in blobs {
        acc += blob.size();
        for &(r, c) in &blob.cells {
            union.set(r, c, true);
        }
        selected.push(blob);
        if 100.0 * acc as f64 >= keep * total as f64 {
            break;
        }
    }
    Ok(BlobSelection {
        blobs: selected,
        union,
        total_area: total,
    })
}

/// A grid cell is active iff it contains at least one set pixel.
pub fn rasterize_to_grid(mask: &PixelMask, geom: &FrameGeometry) -> CellGrid {
    debug_assert!(mask.matches(geom));
    let (bh, bw) = (geom.bt_height(), geom.bt_width());
    let mut grid = CellGrid::for_geometry(geom);
    for m in 0..mask.height() {
        let r = m / bh;
        let row = &mask.bits()[m * mask.width()..(m + 1) * mask.width()];
        for (c, chunk) in row.chunks(bw).enumerate() {
            if !grid.get(r, c) && chunk.iter().any(|&b| b) {
                grid.set(r, c, true);
            }
        }
    }
    grid
}

/// A grid cell is active iff at least half of its pixels are set.
///
/// Used for the finer FoV cores, where the superset rule of
/// [`rasterize_to_grid`] would let a few high pixels on a blob's rim claim
/// the whole rim.
pub fn rasterize_core(mask: &PixelMask, geom: &FrameGeometry) -> CellGrid {
    let half = geom.bt_pixels().div_ceil(2) as u32;
    let counts = mask.cell_counts(geom);
    CellGrid::from_cells(
        geom.grid_rows,
        geom.grid_cols,
        (0..geom.cell_count())
            .filter(|&i| counts[i] >= half)
            .map(|i| (i / geom.grid_cols, i % geom.grid_cols)),
    )
}

/// Pixels inside the cells of `blob_cells` whose normalized value is at
/// least `th_f`.
pub fn finer_threshold(norm: &NormMap, blob_cells: &CellGrid, geom: &FrameGeometry, th_f: f64) -> PixelMask {
    let pass = level_passes(th_f);
    let (bh, bw) = (geom.bt_height(), geom.bt_width());
    let mut out = PixelMask::for_geometry(geom);
    for (r, c) in blob_cells.active() {
        for m in r * bh..(r + 1) * bh {
            for n in c * bw..(c + 1) * bw {
                if pass[norm.levels()[m * geom.width + n] as usize] {
                    out.set(m, n, true);
                }
            }
        }
    }
    out
}

/// Attention map and user masks with everything under `prior_tiles` removed.
#[derive(Debug, Clone)]
pub struct BufferInputs {
    pub vm_raw: Vec<f64>,
    pub user_masks: Vec<PixelMask>,
}

impl BufferInputs {
    pub fn is_empty(&self) -> bool {
        self.vm_raw.iter().all(|&v| v == 0.0)
    }

    /// Re-equalized buffer map.
    pub fn normalized(&self, geom: &FrameGeometry) -> NormMap {
        NormMap::from_levels(geom.width, geom.height, equalize(&self.vm_raw)).expect("same raster")
    }
}

/// Zeroes every pixel under `prior_tiles` in the raw map and in each user mask.
pub fn extract_buffer_inputs(
    vm_raw: &[f64],
    user_masks: &[&PixelMask],
    prior_tiles: &[Rect],
    geom: &FrameGeometry,
) -> Result<BufferInputs> {
    if vm_raw.len() != geom.pixel_count() {
        return Err(Error::Shape(format!("raw map of {} pixels for {geom}", vm_raw.len())));
    }
    let mut covered = PixelMask::full(geom.width, geom.height);
    covered.clear_rects(prior_tiles, geom);
    let keep = covered.bits();
    let vm = vm_raw
        .iter()
        .zip(keep)
        .map(|(&v, &k)| if k { v } else { 0.0 })
        .collect();
    let mut users = Vec::with_capacity(user_masks.len());
    for m in user_masks {
        if !m.matches(geom) {
            return Err(Error::Shape("user mask does not match geometry".into()));
        }
        let mut m = (*m).clone();
        m.clear_rects(prior_tiles, geom);
        users.push(m);
    }
    Ok(BufferInputs {
        vm_raw: vm,
        user_masks: users,
    })
}

/// Grid cells not under any of `prior_tiles`.
pub fn extract_oov(prior_tiles: &[Rect], geom: &FrameGeometry) -> CellGrid {
    let mut grid = CellGrid::full(geom.grid_rows, geom.grid_cols);
    for rect in prior_tiles {
        grid.fill_rect(rect, false);
    }
    grid
}

/// Thresholds chosen for one keyframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub alpha: f64,
    /// `None` when nothing was left for the buffer stage.
    pub beta: Option<f64>,
    pub finer: f64,
}

/// The four region grids of one keyframe.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMasks {
    pub fov_combined: CellGrid,
    pub fov_finer: CellGrid,
    pub buffer: CellGrid,
    pub oov: CellGrid,
    pub thresholds: Thresholds,
}
