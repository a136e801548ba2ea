//! Viewport rasterization on the equirectangular frame.
//!
//! A viewport is modelled as a rectilinear camera frustum: a pixel belongs to
//! the field of view when its direction, expressed in the camera frame
//! (forward = viewport center, up inside the meridian plane), lies in front
//! of the camera and within half the horizontal and vertical FoV angles on
//! each axis. Rasterizing that frustum onto ERP spreads the mask out towards
//! the poles.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CellGrid, FrameGeometry, PixelMask};
use crate::regions::rasterize_to_grid;

/// Maps any angle in degrees into `[-180, 180)`.
pub fn normalize_yaw(yaw: f64) -> f64 {
    let y = (yaw + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if y >= 180.0 {
        y - 360.0
    } else {
        y
    }
}

/// Viewport center in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub yaw: f64,
    pub pitch: f64,
}

impl Orientation {
    pub fn new(yaw: f64, pitch: f64) -> Self {
        Orientation { yaw, pitch }
    }
}

/// Horizontal and vertical field-of-view extents in degrees, each in `(0, 180)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovSize {
    h_deg: f64,
    v_deg: f64,
}

impl Default for FovSize {
    fn default() -> Self {
        FovSize {
            h_deg: 100.0,
            v_deg: 100.0,
        }
    }
}

impl FovSize {
    pub fn new(h_deg: f64, v_deg: f64) -> Result<Self> {
        let ok = |d: f64| d > 0.0 && d < 180.0;
        if !(ok(h_deg) && ok(v_deg)) {
            return Err(Error::Domain(format!(
                "field of view {h_deg}x{v_deg} must lie in (0, 180) on both axes"
            )));
        }
        Ok(FovSize { h_deg, v_deg })
    }

    pub fn h_deg(&self) -> f64 {
        self.h_deg
    }

    pub fn v_deg(&self) -> f64 {
        self.v_deg
    }
}

/// Binary ERP raster of one viewport.
#[derive(Debug, Clone, PartialEq)]
pub struct FovMask {
    pub geometry: FrameGeometry,
    pub bits: PixelMask,
    pub center: Orientation,
}

impl FovMask {
    pub fn count(&self) -> usize {
        self.bits.count()
    }

    pub fn cells(&self) -> CellGrid {
        rasterize_to_grid(&self.bits, &self.geometry)
    }
}

/// Precomputed unit direction of every pixel center for one geometry.
///
/// x points east at longitude 0, y to the north pole, z to longitude 0 on
/// the equator.
#[derive(Debug, Clone)]
pub struct Projector {
    geometry: FrameGeometry,
    dirs: Vec<[f64; 3]>,
    /// Per row: sin and cos of latitude.
    rows: Vec<(f64, f64)>,
}

impl Projector {
    pub fn new(geometry: FrameGeometry) -> Self {
        let rows: Vec<(f64, f64)> = (0..geometry.height)
            .map(|m| geometry.latitude(m).to_radians().sin_cos())
            .collect();
        let cols: Vec<(f64, f64)> = (0..geometry.width)
            .map(|n| geometry.longitude(n).to_radians().sin_cos())
            .collect();
        let mut dirs = Vec::with_capacity(geometry.pixel_count());
        for &(sin_lat, cos_lat) in &rows {
            for &(sin_lon, cos_lon) in &cols {
                dirs.push([cos_lat * sin_lon, sin_lat, cos_lat * cos_lon]);
            }
        }
        Projector { geometry, dirs, rows }
    }

    pub fn geometry(&self) -> &FrameGeometry {
        &self.geometry
    }

    pub fn fov_mask(&self, center: Orientation, fov: FovSize) -> FovMask {
        let yaw = normalize_yaw(center.yaw).to_radians();
        let pitch = center.pitch.clamp(-90.0, 90.0).to_radians();
        let (sy, cy) = yaw.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let fwd = [cp * sy, sp, cp * cy];
        let right = [cy, 0.0, -sy];
        let up = [-sp * sy, cp, -sp * cy];
        let tan_h = (fov.h_deg / 2.0).to_radians().tan();
        let tan_v = (fov.v_deg / 2.0).to_radians().tan();
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];

        let (w, h) = (self.geometry.width, self.geometry.height);
        let mut bits = vec![false; w * h];
        for (m, &(sin_lat, cos_lat)) in self.rows.iter().enumerate() {
            // the angle between the pixel and the forward axis is at least
            // the latitude difference; rows beyond 90 degrees are behind us
            if sin_lat * sp + cos_lat * cp <= 0.0 {
                continue;
            }
            let row_dirs = &self.dirs[m * w..(m + 1) * w];
            let row_bits = &mut bits[m * w..(m + 1) * w];
            for (bit, d) in row_bits.iter_mut().zip(row_dirs) {
                let z = dot(d, &fwd);
                if z <= 0.0 {
                    continue;
                }
                *bit = dot(d, &right).abs() <= z * tan_h && dot(d, &up).abs() <= z * tan_v;
            }
        }
        FovMask {
            geometry: self.geometry,
            bits: PixelMask::from_bits(w, h, bits).expect("raster size matches geometry"),
            center,
        }
    }
}

/// Rasterizes one viewport. Prefer [`Projector`] when generating many masks.
pub fn fov_mask(center: Orientation, fov: FovSize, geom: &FrameGeometry) -> FovMask {
    Projector::new(*geom).fov_mask(center, fov)
}

/// Latitude-dependent maximum tile extents, in basic tiles, per grid row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitLimits {
    pub vt_max: Vec<usize>,
    pub ht_max: Vec<usize>,
}

impl SplitLimits {
    /// `max(1, ceil(gamma * limit))` for the given grid row, as `(rows, cols)`.
    pub fn scaled(&self, row: usize, gamma: f64) -> (usize, usize) {
        let scale = |limit: usize| ((gamma * limit as f64 - 1e-9).ceil() as usize).max(1);
        (scale(self.vt_max[row]), scale(self.ht_max[row]))
    }
}

type LimitsKey = (FrameGeometry, u64, u64);

static LIMITS_CACHE: OnceLock<Mutex<HashMap<LimitsKey, Arc<SplitLimits>>>> = OnceLock::new();

/// For each grid row, the bounding box in basic tiles of a viewport centered
/// on that row's latitude at yaw 0. Memoized per geometry and FoV.
pub fn split_limits(geom: &FrameGeometry, fov: FovSize) -> Arc<SplitLimits> {
    let key = (*geom, fov.h_deg.to_bits(), fov.v_deg.to_bits());
    let cache = LIMITS_CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Arc::clone(hit);
    }
    let limits = Arc::new(compute_split_limits(geom, fov));
    cache
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| Arc::clone(&limits))
        .clone()
}

fn compute_split_limits(geom: &FrameGeometry, fov: FovSize) -> SplitLimits {
    let projector = Projector::new(*geom);
    let (vt_max, ht_max) = (0..geom.grid_rows)
        .map(|r| {
            let center = Orientation::new(0.0, geom.grid_row_latitude(r));
            let bbox = projector
                .fov_mask(center, fov)
                .cells()
                .bounding_box()
                .expect("a viewport always covers some cell");
            (bbox.h, bbox.w)
        })
        .unzip();
    SplitLimits { vt_max, ht_max }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> FrameGeometry {
        FrameGeometry::default()
    }

    #[test]
    fn yaw_normalization() {
        assert_eq!(normalize_yaw(185.0), -175.0);
        assert_eq!(normalize_yaw(180.0), -180.0);
        assert_eq!(normalize_yaw(-180.0), -180.0);
        assert_eq!(normalize_yaw(539.0), 179.0);
        assert_eq!(normalize_yaw(-1e-300), normalize_yaw(-1e-300));
        assert!(normalize_yaw(-1e-17) < 180.0);
    }

    #[test]
    fn fov_size_bounds() {
        assert!(FovSize::new(0.0, 100.0).is_err());
        assert!(FovSize::new(100.0, 180.0).is_err());
        assert!(FovSize::new(179.0, 1.0).is_ok());
    }

    #[test]
    fn centered_mask_is_mirror_symmetric() {
        let g = geom();
        let mask = fov_mask(Orientation::new(0.0, 0.0), FovSize::default(), &g).bits;
        for m in 0..g.height {
            for n in 0..g.width {
                let v = mask.get(m, n);
                assert_eq!(v, mask.get(m, g.width - 1 - n), "h-flip at ({m},{n})");
                assert_eq!(v, mask.get(g.height - 1 - m, n), "v-flip at ({m},{n})");
            }
        }
    }

    #[test]
    fn mask_wraps_horizontally() {
        let g = geom();
        let mask = fov_mask(Orientation::new(179.0, 0.0), FovSize::default(), &g).bits;
        let row = g.height / 2;
        assert!(mask.get(row, 0));
        assert!(mask.get(row, g.width - 1));
    }

    #[test]
    fn polar_center_covers_top_grid_row() {
        let g = geom();
        let mask = fov_mask(Orientation::new(0.0, 90.0), FovSize::default(), &g).bits;
        for m in 0..g.bt_height() {
            for n in 0..g.width {
                assert!(mask.get(m, n), "pixel ({m},{n}) not covered");
            }
        }
    }

    #[test]
    fn yaw_plus_full_turn_is_identical() {
        let p = Projector::new(geom());
        for &(yaw, pitch) in &[(0.0, 0.0), (37.5, -20.0), (179.0, 80.0), (-180.0, 45.0)] {
            let a = p.fov_mask(Orientation::new(yaw, pitch), FovSize::default());
            let b = p.fov_mask(Orientation::new(yaw + 360.0, pitch), FovSize::default());
            assert_eq!(a.bits, b.bits);
        }
    }

    #[test]
    fn area_is_smallest_at_the_equator() {
        let p = Projector::new(geom());
        let area = |pitch: f64| p.fov_mask(Orientation::new(0.0, pitch), FovSize::default()).count();
        let base = area(0.0);
        let mut pitch = -90.0;
        while pitch <= 90.0 {
            if pitch != 0.0 {
                assert!(area(pitch) > base, "pitch {pitch}");
            }
            pitch += 5.0;
        }
        assert!(area(60.0) > area(0.0));
    }

    #[test]
    fn limits_are_symmetric_and_bounded() {
        let g = geom();
        let l = split_limits(&g, FovSize::default());
        let r = g.grid_rows;
        for row in 0..r {
            assert_eq!(l.vt_max[row], l.vt_max[r - 1 - row]);
            assert_eq!(l.ht_max[row], l.ht_max[r - 1 - row]);
            assert!((1..=r).contains(&l.vt_max[row]));
            assert!((1..=g.grid_cols).contains(&l.ht_max[row]));
        }
        for row in 0..r / 2 - 1 {
            assert!(l.ht_max[row] >= l.ht_max[row + 1], "ht_max not monotone at {row}");
        }
        assert_eq!(l.ht_max[0], g.grid_cols);
    }

    #[test]
    fn default_limits_match_independent_raster() {
        // values from a separate numpy rasterization of the same frustum test
        let l = split_limits(&FrameGeometry::default(), FovSize::default());
        assert_eq!(l.vt_max, vec![4, 5, 6, 7, 7, 7, 7, 6, 5, 4]);
        assert_eq!(l.ht_max, vec![20, 20, 20, 10, 8, 8, 10, 20, 20, 20]);
    }

    #[test]
    fn limits_ignore_pixel_resolution() {
        let small = FrameGeometry::new(960, 480, 10, 20).unwrap();
        let big = FrameGeometry::new(1920, 960, 10, 20).unwrap();
        let fov = FovSize::default();
        assert_eq!(*split_limits(&small, fov), *split_limits(&big, fov));
    }

    #[test]
    fn scaled_limits_floor_at_one() {
        let l = SplitLimits {
            vt_max: vec![2],
            ht_max: vec![6],
        };
        assert_eq!(l.scaled(0, 1.0), (2, 6));
        assert_eq!(l.scaled(0, 0.5), (1, 3));
        assert_eq!(l.scaled(0, 0.25), (1, 2));
        assert_eq!(l.scaled(0, 0.01), (1, 1));
    }
}
