//! Averaged viewport maps and their histogram-equalized form.

use crate::error::{Error, Result};
use crate::geometry::{FrameGeometry, PixelMask};
use crate::projection::FovMask;

/// Histogram-equalized map stored as 8-bit levels; the value of a pixel is
/// `level / 255`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormMap {
    width: usize,
    height: usize,
    levels: Vec<u8>,
}

impl NormMap {
    pub fn from_levels(width: usize, height: usize, levels: Vec<u8>) -> Result<Self> {
        if levels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} levels for a {width}x{height} raster",
                levels.len()
            )));
        }
        Ok(NormMap { width, height, levels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    pub fn value(&self, m: usize, n: usize) -> f64 {
        self.levels[m * self.width + n] as f64 / 255.0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|&l| l as f64 / 255.0)
    }

    /// Binary map of pixels whose value is at least `threshold`.
    pub fn threshold(&self, threshold: f64) -> PixelMask {
        let pass = level_passes(threshold);
        let bits = self.levels.iter().map(|&l| pass[l as usize]).collect();
        PixelMask::from_bits(self.width, self.height, bits).expect("same raster")
    }

    /// Sum of values inside each grid cell, row-major.
    pub fn cell_sums(&self, geom: &FrameGeometry) -> Vec<f64> {
        let (bh, bw) = (geom.bt_height(), geom.bt_width());
        let mut per_level = vec![[0u32; 256]; geom.cell_count()];
        for m in 0..self.height {
            let r = m / bh;
            for (n, &l) in self.levels[m * self.width..(m + 1) * self.width].iter().enumerate() {
                per_level[r * geom.grid_cols + n / bw][l as usize] += 1;
            }
        }
        per_level
            .iter()
            .map(|hist| hist.iter().enumerate().map(|(l, &k)| k as f64 * l as f64 / 255.0).sum())
            .collect()
    }
}

/// For each 8-bit level, whether `level / 255 >= threshold`.
pub(crate) fn level_passes(threshold: f64) -> [bool; 256] {
    let mut pass = [false; 256];
    for (l, p) in pass.iter_mut().enumerate() {
        *p = l as f64 / 255.0 >= threshold;
    }
    pass
}

/// Mean of the user viewport masks (`raw`) and, once normalized, its
/// equalized form (`norm`).
#[derive(Debug, Clone)]
pub struct AttentionMap {
    pub geometry: FrameGeometry,
    pub raw: Vec<f64>,
    pub norm: Option<NormMap>,
    pub user_count: usize,
}

impl AttentionMap {
    /// The equalized map; panics if [`normalize`] has not been applied.
    pub fn norm(&self) -> &NormMap {
        self.norm.as_ref().expect("attention map is not normalized")
    }
}

/// Per-pixel mean of the user masks.
pub fn build_viewport_map(masks: &[FovMask], geom: &FrameGeometry) -> Result<AttentionMap> {
    if masks.is_empty() {
        return Err(Error::EmptyInput("no viewport masks"));
    }
    if let Some(bad) = masks.iter().find(|m| !m.bits.matches(geom)) {
        return Err(Error::Shape(format!(
            "mask of {}x{} does not match {geom}",
            bad.bits.width(),
            bad.bits.height()
        )));
    }
    let mut counts = vec![0u32; geom.pixel_count()];
    for mask in masks {
        for (c, &b) in counts.iter_mut().zip(mask.bits.bits()) {
            *c += b as u32;
        }
    }
    let users = masks.len() as f64;
    Ok(AttentionMap {
        geometry: *geom,
        raw: counts.into_iter().map(|c| c as f64 / users).collect(),
        norm: None,
        user_count: masks.len(),
    })
}

/// Fills `norm` by equalizing `raw`.
pub fn normalize(mut map: AttentionMap) -> AttentionMap {
    let levels = equalize(&map.raw);
    map.norm = Some(NormMap::from_levels(map.geometry.width, map.geometry.height, levels).expect("same raster"));
    map
}

/// Histogram equalization over the nonzero support.
///
/// Values in `[0, 1]` are quantized to `round(255 * v)` (nonzero values never
/// below level 1), the cumulative histogram of the nonzero levels is
/// stretched to `[0, 255]` and zero pixels stay at zero. When only one
/// nonzero level exists it maps to 255.
pub fn equalize(raw: &[f64]) -> Vec<u8> {
    let quantize = |v: f64| -> u8 {
        if v <= 0.0 {
            0
        } else {
            ((v.min(1.0) * 255.0).round() as u8).max(1)
        }
    };
    let quantized: Vec<u8> = raw.iter().map(|&v| quantize(v)).collect();
    let mut hist = [0u64; 256];
    for &q in &quantized {
        hist[q as usize] += 1;
    }
    let total: u64 = hist[1..].iter().sum();
    if total == 0 {
        return quantized;
    }
    let cdf_min = hist[1..].iter().copied().find(|&h| h > 0).unwrap_or(0);
    let mut lut = [0u8; 256];
    let mut cdf = 0u64;
    for k in 1..256 {
        cdf += hist[k];
        lut[k] = if total == cdf_min {
            255
        } else {
            let scaled = (cdf.saturating_sub(cdf_min)) as f64 * 255.0 / (total - cdf_min) as f64;
            scaled.round() as u8
        };
    }
    quantized.into_iter().map(|q| lut[q as usize]).collect()
}
