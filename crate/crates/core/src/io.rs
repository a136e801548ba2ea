//! On-disk artifacts: scheme JSON, atomic writes and PGM/PPM renders.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_exact_cover, CellGrid, FrameGeometry, Rect};
use crate::projection::FovMask;
use crate::regions::Thresholds;
use crate::scheme::{DerivedTile, RegionClass, TileScheme, VideoScheme};

/// Version stamped into every JSON document this crate writes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TileRecord {
    r0: usize,
    c0: usize,
    h: usize,
    w: usize,
    region: String,
    mean_intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct KeyframeRecord {
    t: f64,
    alpha: f64,
    beta: Option<f64>,
    th_finer: f64,
    tiles: Vec<TileRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SchemeDocument {
    format_version: u32,
    video_id: String,
    geometry: FrameGeometry,
    gamma: f64,
    keyframes: Vec<KeyframeRecord>,
}

/// Pretty-printed scheme JSON with a trailing newline.
pub fn scheme_to_json(scheme: &VideoScheme) -> Result<String> {
    let doc = SchemeDocument {
        format_version: FORMAT_VERSION,
        video_id: scheme.video_id.clone(),
        geometry: scheme.geometry,
        gamma: scheme.gamma,
        keyframes: scheme
            .keyframes
            .iter()
            .map(|kf| KeyframeRecord {
                t: kf.keyframe_time,
                alpha: kf.thresholds.alpha,
                beta: kf.thresholds.beta,
                th_finer: kf.thresholds.finer,
                tiles: kf
                    .tiles
                    .iter()
                    .map(|t| TileRecord {
                        r0: t.rect.row0,
                        c0: t.rect.col0,
                        h: t.rect.h,
                        w: t.rect.w,
                        region: t.region.as_str().to_string(),
                        mean_intensity: t.mean_intensity,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Parses and validates a scheme document: version, region labels and the
/// exact cover of every keyframe.
pub fn scheme_from_json(text: &str) -> Result<VideoScheme> {
    let doc: SchemeDocument = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::Domain(format!(
            "unsupported scheme format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let geom = doc.geometry;
    geom.validate()?;
    let full = CellGrid::full(geom.grid_rows, geom.grid_cols);
    let mut keyframes = Vec::with_capacity(doc.keyframes.len());
    for kf in doc.keyframes {
        let mut tiles = Vec::with_capacity(kf.tiles.len());
        for t in kf.tiles {
            let region = RegionClass::parse(&t.region)
                .ok_or_else(|| Error::Domain(format!("unknown region `{}` at t={}", t.region, kf.t)))?;
            if t.h == 0 || t.w == 0 {
                return Err(Error::Domain(format!(
                    "empty tile at ({}, {}) at t={}",
                    t.r0, t.c0, kf.t
                )));
            }
            let rect = Rect::new(t.r0, t.c0, t.h, t.w);
            tiles.push(DerivedTile {
                rect,
                region,
                mean_intensity: t.mean_intensity,
                pixel_area: geom.rect_pixels(&rect),
            });
        }
        let rects: Vec<Rect> = tiles.iter().map(|t| t.rect).collect();
        check_exact_cover(&rects, &full).map_err(|msg| Error::Invariant {
            stage: "scheme-load",
            msg: format!("keyframe {}: {msg}", kf.t),
        })?;
        keyframes.push(TileScheme {
            keyframe_time: kf.t,
            tiles,
            gamma: doc.gamma,
            thresholds: Thresholds {
                alpha: kf.alpha,
                beta: kf.beta,
                finer: kf.th_finer,
            },
        });
    }
    Ok(VideoScheme {
        video_id: doc.video_id,
        geometry: geom,
        gamma: doc.gamma,
        keyframes,
    })
}

pub fn load_scheme(path: &Path) -> Result<VideoScheme> {
    scheme_from_json(&fs::read_to_string(path)?)
}

pub fn save_scheme(path: &Path, scheme: &VideoScheme) -> Result<()> {
    write_atomic(path, scheme_to_json(scheme)?.as_bytes())
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Domain(format!("no file name in {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Gray level of each region in renders.
pub fn region_gray(region: RegionClass) -> u8 {
    match region {
        RegionClass::FoVf => 255,
        RegionClass::FoV => 190,
        RegionClass::Buf => 120,
        RegionClass::OoV => 50,
    }
}

/// Tile borders in renders.
pub const BORDER_GRAY: u8 = 0;
/// Viewport outline color in overlay renders.
pub const OUTLINE_RGB: [u8; 3] = [255, 0, 0];

/// An 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Image {
    /// Binary PGM (P5) or PPM (P6), maxval 255.
    pub fn to_netpbm(&self) -> Vec<u8> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn extension(&self) -> &'static str {
        if self.channels == 1 {
            "pgm"
        } else {
            "ppm"
        }
    }
}

/// Region-coded tile map; tile edges inside the frame are drawn dark. With
/// an overlay the image is RGB and the viewport outline is drawn in red.
pub fn render(scheme: &TileScheme, geom: &FrameGeometry, overlay: Option<&FovMask>) -> Result<Image> {
    let (w, h) = (geom.width, geom.height);
    let (bh, bw) = (geom.bt_height(), geom.bt_width());
    let mut gray = vec![0u8; w * h];
    for t in &scheme.tiles {
        let level = region_gray(t.region);
        let (m0, n0) = (t.rect.row0 * bh, t.rect.col0 * bw);
        let (m1, n1) = (t.rect.row_end() * bh, t.rect.col_end() * bw);
        if m1 > h || n1 > w {
            return Err(Error::Geometry(format!("tile {} outside {geom}", t.rect)));
        }
        for m in m0..m1 {
            for n in n0..n1 {
                let border = (m == m0 && m0 > 0) || (n == n0 && n0 > 0);
                gray[m * w + n] = if border { BORDER_GRAY } else { level };
            }
        }
    }
    let Some(fov) = overlay else {
        return Ok(Image {
            width: w,
            height: h,
            channels: 1,
            data: gray,
        });
    };
    if !fov.bits.matches(geom) {
        return Err(Error::Shape("overlay mask does not match the scheme raster".into()));
    }
    let mut rgb: Vec<u8> = gray.iter().flat_map(|&g| [g, g, g]).collect();
    for m in 0..h {
        for n in 0..w {
            if !fov.bits.get(m, n) {
                continue;
            }
            // the mask wraps horizontally, so only rows end the outline
            let edge = m == 0
                || m + 1 == h
                || !fov.bits.get(m - 1, n)
                || !fov.bits.get(m + 1, n)
                || !fov.bits.get(m, (n + w - 1) % w)
                || !fov.bits.get(m, (n + 1) % w);
            if edge {
                rgb[(m * w + n) * 3..(m * w + n) * 3 + 3].copy_from_slice(&OUTLINE_RGB);
            }
        }
    }
    Ok(Image {
        width: w,
        height: h,
        channels: 3,
        data: rgb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::fixed_grid_scheme;
    use crate::projection::{FovSize, Orientation, Projector};

    fn small_scheme() -> VideoScheme {
        let geom = FrameGeometry::new(40, 20, 2, 4).unwrap();
        let (_, mut s) = fixed_grid_scheme(2, 4, &geom).unwrap();
        s.tiles[0].region = RegionClass::FoVf;
        s.tiles[1].region = RegionClass::FoV;
        s.tiles[2].region = RegionClass::Buf;
        s.tiles[3].mean_intensity = 0.25;
        s.thresholds.beta = Some(0.2);
        s.gamma = 0.5;
        VideoScheme {
            video_id: "v".into(),
            geometry: geom,
            gamma: 0.5,
            keyframes: vec![s],
        }
    }

    #[test]
    fn json_round_trip() {
        let s = small_scheme();
        let text = scheme_to_json(&s).unwrap();
        assert!(text.starts_with("{\n  \"format_version\": 1,"));
        let back = scheme_from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(scheme_to_json(&back).unwrap(), text);
    }

    #[test]
    fn json_rejects_bad_documents() {
        let text = scheme_to_json(&small_scheme()).unwrap();
        assert!(scheme_from_json(&text.replace("\"format_version\": 1", "\"format_version\": 9")).is_err());
        assert!(scheme_from_json(&text.replacen("\"FoVf\"", "\"Nope\"", 1)).is_err());
        // a gap in the cover
        assert!(scheme_from_json(&text.replacen("\"w\": 1", "\"w\": 0", 1)).is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn single_tile_render_is_uniform() {
        let geom = FrameGeometry::new(40, 20, 2, 4).unwrap();
        let (g1, s) = fixed_grid_scheme(1, 1, &geom).unwrap();
        let img = render(&s, &g1, None).unwrap();
        assert!(img.data.iter().all(|&p| p == region_gray(RegionClass::OoV)));
        let pgm = img.to_netpbm();
        assert!(pgm.starts_with(b"P5\n40 20\n255\n"));
        assert_eq!(pgm.len(), 13 + 800);
    }

    #[test]
    fn render_uses_one_level_per_region() {
        let s = small_scheme();
        let img = render(&s.keyframes[0], &s.geometry, None).unwrap();
        let mut levels: Vec<u8> = img.data.clone();
        levels.sort_unstable();
        levels.dedup();
        assert_eq!(levels, vec![BORDER_GRAY, 50, 120, 190, 255]);
    }

    #[test]
    fn overlay_is_rgb_with_outline() {
        let geom = FrameGeometry::default();
        let (g, s) = fixed_grid_scheme(10, 20, &geom).unwrap();
        let m = Projector::new(geom).fov_mask(Orientation::new(0.0, 0.0), FovSize::default());
        let img = render(&s, &g, Some(&m)).unwrap();
        assert_eq!(img.channels, 3);
        assert!(img.data.chunks(3).any(|p| p == OUTLINE_RGB));
        assert!(img.to_netpbm().starts_with(b"P6\n"));
    }
}
