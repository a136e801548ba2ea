//! Viewport-aware adaptive tiling for equirectangular 360° video frames.
//!
//! Head-orientation traces are turned into per-keyframe attention maps,
//! thresholded into four attention regions, and partitioned into a minimal
//! set of variable-size rectangular tiles over a basic-tile grid. The
//! [`metrics`] module evaluates the resulting schemes against fixed grids.

pub mod attention;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod mnc;
pub mod par;
pub mod projection;
pub mod regions;
pub mod report;
pub mod scheme;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use geometry::{Cell, CellGrid, FrameGeometry, PixelMask, Rect};
