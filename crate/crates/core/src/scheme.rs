//! Per-keyframe tile derivation.
//!
//! The stages run in data-dependency order: attention map and FoV regions,
//! FoV_f rectangle expansion, MNC partition of the FoV remainder, buffer
//! region, out-of-view remainder, overlap removal. The result is a
//! γ-independent [`KeyframeTiling`]; [`apply_gamma`] then splits tiles that
//! exceed the latitude-dependent size limits and produces a [`TileScheme`].

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::attention::{build_viewport_map, normalize};
use crate::error::{Error, Result};
use crate::geometry::{check_exact_cover, Cell, CellGrid, FrameGeometry, PixelMask, Rect};
use crate::mnc::{partition, partition_grid, RectilinearRegion};
use crate::par::{self, Execution};
use crate::projection::{split_limits, FovMask, FovSize, Orientation, Projector, SplitLimits};
use crate::regions::{
    determine_threshold, extract_buffer_inputs, extract_oov, finer_threshold, rasterize_core, rasterize_to_grid,
    select_blobs, EmptyMaskPolicy, RegionMasks, ThresholdSearchResult, Thresholds, DEFAULT_BLOB_KEEP,
    DEFAULT_COVERAGE_TARGET, DEFAULT_TH_BUF_CANDIDATES, DEFAULT_TH_CANDIDATES, DEFAULT_TH_FINER,
};
use crate::trace::{sample_keyframes, Keyframe, TraceSet, DEFAULT_KEYFRAME_GAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionClass {
    FoVf,
    FoV,
    Buf,
    OoV,
}

impl RegionClass {
    pub const ALL: [RegionClass; 4] = [RegionClass::FoVf, RegionClass::FoV, RegionClass::Buf, RegionClass::OoV];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionClass::FoVf => "FoVf",
            RegionClass::FoV => "FoV",
            RegionClass::Buf => "Buf",
            RegionClass::OoV => "OoV",
        }
    }

    pub fn parse(s: &str) -> Option<RegionClass> {
        RegionClass::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl std::fmt::Display for RegionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A tile rectangle with its region label, before intensities are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledRect {
    pub rect: Rect,
    pub region: RegionClass,
}

impl LabeledRect {
    pub fn new(rect: Rect, region: RegionClass) -> Self {
        LabeledRect { rect, region }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedTile {
    pub rect: Rect,
    pub region: RegionClass,
    /// Mean normalized attention over the tile's pixels, in `[0, 1]`.
    pub mean_intensity: f64,
    pub pixel_area: usize,
}

/// The tiling of one keyframe at one γ.
#[derive(Debug, Clone, PartialEq)]
pub struct TileScheme {
    pub keyframe_time: f64,
    /// Sorted by top-left cell.
    pub tiles: Vec<DerivedTile>,
    pub gamma: f64,
    pub thresholds: Thresholds,
}

impl TileScheme {
    pub fn rects(&self) -> Vec<Rect> {
        self.tiles.iter().map(|t| t.rect).collect()
    }

    pub fn count(&self, region: RegionClass) -> usize {
        self.tiles.iter().filter(|t| t.region == region).count()
    }

    /// Checks the exact cover of the frame and the per-tile size limits.
    pub fn validate(&self, geom: &FrameGeometry, limits: Option<&SplitLimits>) -> Result<()> {
        check_exact_cover(&self.rects(), &CellGrid::full(geom.grid_rows, geom.grid_cols)).map_err(|msg| {
            Error::Invariant {
                stage: "exact-cover",
                msg: format!("keyframe {}: {msg}", self.keyframe_time),
            }
        })?;
        if let Some(limits) = limits {
            for t in &self.tiles {
                let (vmax, hmax) = limits.scaled(center_row(&t.rect, geom.grid_rows), self.gamma);
                if t.rect.h > vmax || t.rect.w > hmax {
                    return Err(Error::Invariant {
                        stage: "split-limits",
                        msg: format!(
                            "keyframe {}: tile {} exceeds {vmax}x{hmax} at gamma {}",
                            self.keyframe_time, t.rect, self.gamma
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Knobs of the per-keyframe pipeline. `Default` gives the paper's values.
#[derive(Debug, Clone, PartialEq)]
pub struct TilingParams {
    pub fov: FovSize,
    pub th_candidates: Vec<f64>,
    pub th_buf_candidates: Vec<f64>,
    pub th_finer: f64,
    /// Percent.
    pub coverage_target: f64,
    /// Percent.
    pub blob_keep: f64,
    pub keyframe_gap: f64,
}

impl Default for TilingParams {
    fn default() -> Self {
        TilingParams {
            fov: FovSize::default(),
            th_candidates: DEFAULT_TH_CANDIDATES.to_vec(),
            th_buf_candidates: DEFAULT_TH_BUF_CANDIDATES.to_vec(),
            th_finer: DEFAULT_TH_FINER,
            coverage_target: DEFAULT_COVERAGE_TARGET,
            blob_keep: DEFAULT_BLOB_KEEP,
            keyframe_gap: DEFAULT_KEYFRAME_GAP,
        }
    }
}

/// Wall-clock time of one region group's stages.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GroupTiming {
    pub pre_processing: Duration,
    pub partitioning: Duration,
    pub post_processing: Duration,
}

impl GroupTiming {
    pub fn total(&self) -> Duration {
        self.pre_processing + self.partitioning + self.post_processing
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    /// Viewport rasterization and the attention map.
    pub viewport_maps: Duration,
    pub fov: GroupTiming,
    pub buffer: GroupTiming,
    pub oov: GroupTiming,
    /// Final overlap removal across all regions.
    pub overlap_removal: Duration,
    pub end_to_end: Duration,
}

impl StageTimings {
    pub fn stage_sum(&self) -> Duration {
        self.viewport_maps + self.fov.total() + self.buffer.total() + self.oov.total() + self.overlap_removal
    }
}

/// Everything derived for one keyframe before γ-splitting.
#[derive(Debug, Clone)]
pub struct KeyframeTiling {
    pub t: f64,
    pub geometry: FrameGeometry,
    /// Pairwise disjoint, exact cover of the grid, sorted.
    pub tiles: Vec<LabeledRect>,
    pub regions: RegionMasks,
    pub alpha_search: ThresholdSearchResult,
    pub beta_search: Option<ThresholdSearchResult>,
    /// Number of FoV blobs kept by blob selection.
    pub blob_count: usize,
    /// Per-cell sum of normalized attention, row-major.
    pub cell_sums: Vec<f64>,
    pub timings: StageTimings,
}

/// One video's γ-independent tilings.
#[derive(Debug, Clone)]
pub struct VideoTiling {
    pub video_id: String,
    pub geometry: FrameGeometry,
    pub params: TilingParams,
    pub keyframes: Vec<KeyframeTiling>,
}

/// One video's schemes at a single γ.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoScheme {
    pub video_id: String,
    pub geometry: FrameGeometry,
    pub gamma: f64,
    pub keyframes: Vec<TileScheme>,
}

impl VideoScheme {
    pub fn keyframe_at(&self, t: f64) -> Option<&TileScheme> {
        self.keyframes.iter().find(|k| (k.keyframe_time - t).abs() < 1e-9)
    }
}

/// Grid row holding a tile's center, used to look up its size limits.
pub fn center_row(rect: &Rect, grid_rows: usize) -> usize {
    (rect.row0 + rect.h / 2).min(grid_rows - 1)
}

/// Replaces finer regions by rectangles inside the FoV blob.
///
/// Seeds are processed by descending size (ties: first cell). Each seed's
/// rectangle starts from its largest MNC piece and grows one grid line at a
/// time, alternating left, right, up, down, while the new line stays inside
/// the seed's bounding box, inside the blob, and off cells already claimed.
/// When the bounding box fits this yields the bounding box itself. Seed
/// cells the rectangle could not reach are queued again as new seeds.
pub fn expand_fovf(seeds: &[Vec<Cell>], blob: &CellGrid) -> Result<Vec<Rect>> {
    let mut claimed = CellGrid::new(blob.rows(), blob.cols());
    let mut queue: BTreeSet<(std::cmp::Reverse<usize>, Cell, Vec<Cell>)> = BTreeSet::new();
    let push = |queue: &mut BTreeSet<_>, mut cells: Vec<Cell>| {
        cells.sort_unstable();
        queue.insert((std::cmp::Reverse(cells.len()), cells[0], cells));
    };
    for seed in seeds.iter().filter(|s| !s.is_empty()) {
        if let Some(&(r, c)) = seed.iter().find(|&&(r, c)| !blob.get(r, c)) {
            return Err(Error::Invariant {
                stage: "fovf-expansion",
                msg: format!("finer cell ({r}, {c}) lies outside its FoV blob"),
            });
        }
        push(&mut queue, seed.clone());
    }

    let mut out = Vec::new();
    while let Some((_, _, seed)) = queue.pop_first() {
        let free: Vec<Cell> = seed.into_iter().filter(|&(r, c)| !claimed.get(r, c)).collect();
        if free.is_empty() {
            continue;
        }
        let free_grid = CellGrid::from_cells(blob.rows(), blob.cols(), free.iter().copied());
        let components = free_grid.components();
        if components.len() > 1 {
            for comp in components {
                push(&mut queue, comp);
            }
            continue;
        }
        let bound = Rect::bounding(free.iter().copied()).expect("non-empty seed");
        let start = partition(&RectilinearRegion::new(free.iter().copied())?)?
            .into_iter()
            .max_by(|a, b| a.area().cmp(&b.area()).then_with(|| b.cmp(a)))
            .expect("partition of a non-empty region");
        let allowed = |r: usize, c: usize| bound.contains((r, c)) && blob.get(r, c) && !claimed.get(r, c);
        let rect = grow(start, allowed);
        claimed.fill_rect(&rect, true);
        out.push(rect);

        let rest: Vec<Cell> = free.into_iter().filter(|&cell| !rect.contains(cell)).collect();
        if !rest.is_empty() {
            let rest_grid = CellGrid::from_cells(blob.rows(), blob.cols(), rest);
            for comp in rest_grid.components() {
                push(&mut queue, comp);
            }
        }
    }
    Ok(out)
}

/// Grows `rect` one line per side in the order left, right, up, down until
/// no side can move.
fn grow(mut rect: Rect, allowed: impl Fn(usize, usize) -> bool) -> Rect {
    let mut active = [true; 4];
    while active.iter().any(|&a| a) {
        for (side, on) in active.iter_mut().enumerate() {
            if !*on {
                continue;
            }
            let ok = match side {
                0 => rect.col0 > 0 && (rect.row0..rect.row_end()).all(|r| allowed(r, rect.col0 - 1)),
                1 => (rect.row0..rect.row_end()).all(|r| allowed(r, rect.col_end())),
                2 => rect.row0 > 0 && (rect.col0..rect.col_end()).all(|c| allowed(rect.row0 - 1, c)),
                _ => (rect.col0..rect.col_end()).all(|c| allowed(rect.row_end(), c)),
            };
            if !ok {
                *on = false;
                continue;
            }
            match side {
                0 => {
                    rect.col0 -= 1;
                    rect.w += 1;
                }
                1 => rect.w += 1,
                2 => {
                    rect.row0 -= 1;
                    rect.h += 1;
                }
                _ => rect.h += 1,
            }
        }
    }
    rect
}

/// FoVf tiles for `fovf_rects` and MNC-partitioned FoV tiles for the rest
/// of the blob (which may now have holes).
pub fn partition_fov_with_holes(blob: &CellGrid, fovf_rects: &[Rect]) -> Result<Vec<LabeledRect>> {
    let mut rest = blob.clone();
    let mut tiles = Vec::new();
    for rect in fovf_rects {
        rest.fill_rect(rect, false);
        tiles.push(LabeledRect::new(*rect, RegionClass::FoVf));
    }
    tiles.extend(
        partition_grid(&rest)?
            .into_iter()
            .map(|r| LabeledRect::new(r, RegionClass::FoV)),
    );
    Ok(tiles)
}

/// Makes tiles pairwise disjoint.
///
/// Tiles claim cells in order of descending area (ties: top-left cell), so
/// an overlap is always removed from the smaller tile. A clipped tile that is
/// no longer a rectangle is re-partitioned with MNC; a tile with nothing left
/// is dropped.
pub fn remove_overlaps(tiles: &[LabeledRect], rows: usize, cols: usize) -> Result<Vec<LabeledRect>> {
    let mut order: Vec<&LabeledRect> = tiles.iter().collect();
    order.sort_by(|a, b| b.rect.area().cmp(&a.rect.area()).then_with(|| a.rect.cmp(&b.rect)));
    let mut claimed = CellGrid::new(rows, cols);
    let mut out = Vec::with_capacity(tiles.len());
    for tile in order {
        if claimed.disjoint_from_rect(&tile.rect) {
            claimed.fill_rect(&tile.rect, true);
            out.push(*tile);
            continue;
        }
        let rest: Vec<Cell> = tile.rect.cells().filter(|&(r, c)| !claimed.get(r, c)).collect();
        if rest.is_empty() {
            log::debug!("dropping {} tile {} covered by larger tiles", tile.region, tile.rect);
            continue;
        }
        let rest = CellGrid::from_cells(rows, cols, rest);
        for rect in partition_grid(&rest)? {
            out.push(LabeledRect::new(rect, tile.region));
        }
        claimed.union_with(&rest);
    }
    out.sort();
    Ok(out)
}

/// Splits `[start, start + len)` into pieces of at most `max`.
///
/// A span crossing `center` is cut there first and each half is chunked
/// outward from it, leaving remainders at the outer edges. Otherwise
/// chunking starts at the edge nearest `center`.
pub fn chunk_outward(start: usize, len: usize, max: usize, center: usize) -> Vec<(usize, usize)> {
    let max = max.max(1);
    if len <= max {
        return vec![(start, len)];
    }
    let end = start + len;
    let mut pieces = Vec::new();
    let leftward = |from: usize, to: usize, pieces: &mut Vec<(usize, usize)>| {
        // chunks ending at `to`, moving toward `from`
        let mut hi = to;
        while hi > from {
            let lo = hi.saturating_sub(max).max(from);
            pieces.push((lo, hi - lo));
            hi = lo;
        }
    };
    let rightward = |from: usize, to: usize, pieces: &mut Vec<(usize, usize)>| {
        let mut lo = from;
        while lo < to {
            let hi = (lo + max).min(to);
            pieces.push((lo, hi - lo));
            lo = hi;
        }
    };
    if start < center && center < end {
        leftward(start, center, &mut pieces);
        rightward(center, end, &mut pieces);
    } else if end <= center {
        leftward(start, end, &mut pieces);
    } else {
        rightward(start, end, &mut pieces);
    }
    pieces.sort_unstable();
    pieces
}

/// Splits every tile larger than its γ-scaled limits, re-checking pieces
/// against the limits of their own center row until none is too large.
/// Heights are cut before widths.
pub fn split_large(
    tiles: &[LabeledRect],
    limits: &SplitLimits,
    gamma: f64,
    rows: usize,
    cols: usize,
) -> Vec<LabeledRect> {
    let mut out = Vec::with_capacity(tiles.len());
    let mut stack: Vec<LabeledRect> = tiles.iter().rev().copied().collect();
    while let Some(tile) = stack.pop() {
        let r = tile.rect;
        let (vmax, hmax) = limits.scaled(center_row(&r, rows), gamma);
        let pieces: Vec<Rect> = if r.h > vmax {
            chunk_outward(r.row0, r.h, vmax, rows / 2)
                .into_iter()
                .map(|(row0, h)| Rect::new(row0, r.col0, h, r.w))
                .collect()
        } else if r.w > hmax {
            chunk_outward(r.col0, r.w, hmax, cols / 2)
                .into_iter()
                .map(|(col0, w)| Rect::new(r.row0, col0, r.h, w))
                .collect()
        } else {
            out.push(tile);
            continue;
        };
        stack.extend(pieces.into_iter().rev().map(|p| LabeledRect::new(p, tile.region)));
    }
    out.sort();
    out
}

/// Runs every γ-independent stage for one keyframe from its user masks.
pub fn derive_keyframe(
    t: f64,
    masks: &[FovMask],
    geom: &FrameGeometry,
    params: &TilingParams,
) -> Result<KeyframeTiling> {
    let t0 = Instant::now();
    let mut timings = StageTimings::default();
    let (rows, cols) = (geom.grid_rows, geom.grid_cols);

    let vm = normalize(build_viewport_map(masks, geom)?);
    let norm = vm.norm();
    let user_masks: Vec<&PixelMask> = masks.iter().map(|m| &m.bits).collect();
    timings.viewport_maps = t0.elapsed();

    // FoV_f and FoV
    let stage = Instant::now();
    let alpha_search = determine_threshold(
        norm,
        &user_masks,
        &params.th_candidates,
        params.coverage_target,
        EmptyMaskPolicy::Reject,
    )?;
    let fov_grid = rasterize_to_grid(&norm.threshold(alpha_search.chosen), geom);
    let blobs = select_blobs(&fov_grid, params.blob_keep)?;
    let finer = rasterize_core(&finer_threshold(norm, &blobs.union, geom, params.th_finer), geom);
    timings.fov.pre_processing = stage.elapsed();

    let stage = Instant::now();
    let mut fov_tiles = Vec::new();
    for blob in &blobs.blobs {
        let blob_grid = CellGrid::from_cells(rows, cols, blob.cells.iter().copied());
        let mut seeds_grid = finer.clone();
        seeds_grid.subtract(&complement(&blob_grid));
        let rects = expand_fovf(&seeds_grid.components(), &blob_grid)?;
        fov_tiles.extend(partition_fov_with_holes(&blob_grid, &rects)?);
    }
    timings.fov.partitioning = stage.elapsed();
    let stage = Instant::now();
    let fov_tiles = remove_overlaps(&fov_tiles, rows, cols)?;
    let prior: Vec<Rect> = fov_tiles.iter().map(|t| t.rect).collect();
    timings.fov.post_processing = stage.elapsed();

    // buffer
    let stage = Instant::now();
    let buf_inputs = extract_buffer_inputs(&vm.raw, &user_masks, &prior, geom)?;
    let mut buffer = CellGrid::new(rows, cols);
    let mut beta_search = None;
    if !buf_inputs.is_empty() {
        let buf_norm = buf_inputs.normalized(geom);
        let buf_users: Vec<&PixelMask> = buf_inputs.user_masks.iter().collect();
        let search = determine_threshold(
            &buf_norm,
            &buf_users,
            &params.th_buf_candidates,
            params.coverage_target,
            EmptyMaskPolicy::CountAsCovered,
        )?;
        let mut grid = rasterize_to_grid(&buf_norm.threshold(search.chosen), geom);
        for rect in &prior {
            grid.fill_rect(rect, false);
        }
        if !grid.is_empty() {
            buffer = select_blobs(&grid, params.blob_keep)?.union;
        }
        beta_search = Some(search);
    }
    timings.buffer.pre_processing = stage.elapsed();
    let stage = Instant::now();
    let buf_tiles: Vec<LabeledRect> = partition_grid(&buffer)?
        .into_iter()
        .map(|r| LabeledRect::new(r, RegionClass::Buf))
        .collect();
    timings.buffer.partitioning = stage.elapsed();

    // out of view
    let stage = Instant::now();
    let mut prior_all = prior.clone();
    prior_all.extend(buf_tiles.iter().map(|t| t.rect));
    let oov = extract_oov(&prior_all, geom);
    timings.oov.pre_processing = stage.elapsed();
    let stage = Instant::now();
    let oov_tiles: Vec<LabeledRect> = partition_grid(&oov)?
        .into_iter()
        .map(|r| LabeledRect::new(r, RegionClass::OoV))
        .collect();
    timings.oov.partitioning = stage.elapsed();

    let stage = Instant::now();
    let mut all = fov_tiles;
    all.extend(buf_tiles);
    all.extend(oov_tiles);
    let tiles = remove_overlaps(&all, rows, cols)?;
    let rects: Vec<Rect> = tiles.iter().map(|t| t.rect).collect();
    check_exact_cover(&rects, &CellGrid::full(rows, cols)).map_err(|msg| Error::Invariant {
        stage: "overlap-removal",
        msg: format!("keyframe {t}: {msg}"),
    })?;
    timings.overlap_removal = stage.elapsed();

    let mut fov_finer = CellGrid::new(rows, cols);
    for tile in tiles.iter().filter(|t| t.region == RegionClass::FoVf) {
        fov_finer.fill_rect(&tile.rect, true);
    }
    let regions = RegionMasks {
        fov_combined: blobs.union,
        fov_finer,
        buffer,
        oov,
        thresholds: Thresholds {
            alpha: alpha_search.chosen,
            beta: beta_search.as_ref().map(|s| s.chosen),
            finer: params.th_finer,
        },
    };
    let cell_sums = norm.cell_sums(geom);
    timings.end_to_end = t0.elapsed();
    Ok(KeyframeTiling {
        t,
        geometry: *geom,
        tiles,
        regions,
        alpha_search,
        beta_search,
        blob_count: blobs.blobs.len(),
        cell_sums,
        timings,
    })
}

fn complement(grid: &CellGrid) -> CellGrid {
    let mut out = CellGrid::full(grid.rows(), grid.cols());
    out.subtract(grid);
    out
}

/// Splits a keyframe's tiles to the γ-scaled limits and attaches intensities.
pub fn apply_gamma(kf: &KeyframeTiling, limits: &SplitLimits, gamma: f64) -> Result<TileScheme> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("gamma must be in (0, 1], got {gamma}")));
    }
    let geom = kf.geometry;
    let split = split_large(&kf.tiles, limits, gamma, geom.grid_rows, geom.grid_cols);
    let tiles = split
        .into_iter()
        .map(|lr| {
            let pixel_area = geom.rect_pixels(&lr.rect);
            let sum: f64 = lr.rect.cells().map(|(r, c)| kf.cell_sums[r * geom.grid_cols + c]).sum();
            DerivedTile {
                rect: lr.rect,
                region: lr.region,
                mean_intensity: (sum / pixel_area as f64).clamp(0.0, 1.0),
                pixel_area,
            }
        })
        .collect();
    let scheme = TileScheme {
        keyframe_time: kf.t,
        tiles,
        gamma,
        thresholds: kf.regions.thresholds,
    };
    scheme.validate(&geom, Some(limits))?;
    Ok(scheme)
}

/// Derives and splits one keyframe in a single call.
pub fn build_scheme(
    t: f64,
    masks: &[FovMask],
    geom: &FrameGeometry,
    params: &TilingParams,
    gamma: f64,
) -> Result<TileScheme> {
    let kf = derive_keyframe(t, masks, geom, params)?;
    apply_gamma(&kf, &split_limits(geom, params.fov), gamma)
}

/// Rasterizes every user's viewport at one keyframe.
pub fn keyframe_masks(projector: &Projector, keyframe: &Keyframe, fov: FovSize, exec: Execution) -> Vec<FovMask> {
    par::map(exec, &keyframe.samples, |s| {
        projector.fov_mask(Orientation::new(s.yaw, s.pitch), fov)
    })
}

/// Derives every keyframe of a video. Keyframes are processed independently.
pub fn build_video(
    traces: &TraceSet,
    geom: &FrameGeometry,
    params: &TilingParams,
    exec: Execution,
) -> Result<VideoTiling> {
    geom.validate()?;
    let keyframes = sample_keyframes(traces, params.keyframe_gap)?;
    let projector = Projector::new(*geom);
    let tilings = par::try_map(exec, &keyframes, |kf| {
        let start = Instant::now();
        let masks = keyframe_masks(&projector, kf, params.fov, Execution::Sequential);
        let mask_time = start.elapsed();
        let mut tiling = derive_keyframe(kf.t, &masks, geom, params)?;
        tiling.timings.viewport_maps += mask_time;
        tiling.timings.end_to_end += mask_time;
        Ok::<_, Error>(tiling)
    })?;
    Ok(VideoTiling {
        video_id: traces.video_id.clone(),
        geometry: *geom,
        params: params.clone(),
        keyframes: tilings,
    })
}

impl VideoTiling {
    pub fn scheme(&self, gamma: f64) -> Result<VideoScheme> {
        let limits = split_limits(&self.geometry, self.params.fov);
        let keyframes = self
            .keyframes
            .iter()
            .map(|kf| apply_gamma(kf, &limits, gamma))
            .collect::<Result<Vec<_>>>()?;
        Ok(VideoScheme {
            video_id: self.video_id.clone(),
            geometry: self.geometry,
            gamma,
            keyframes,
        })
    }
}
