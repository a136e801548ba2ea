//! Frame geometry, pixel masks and the basic-tile grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A basic-tile cell as `(row, col)` on the grid.
pub type Cell = (usize, usize);

/// Pixel raster size plus the basic-tile grid overlaid on it.
///
/// Pixel `(m, n)` has its center at latitude `90 - (m + 0.5) * 180 / H` and
/// longitude `-180 + (n + 0.5) * 360 / W` degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameGeometry {
    pub width: usize,
    pub height: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
}

impl Default for FrameGeometry {
    fn default() -> Self {
        FrameGeometry {
            width: 960,
            height: 480,
            grid_rows: 10,
            grid_cols: 20,
        }
    }
}

impl FrameGeometry {
    pub fn new(width: usize, height: usize, grid_rows: usize, grid_cols: usize) -> Result<Self> {
        let geom = FrameGeometry {
            width,
            height,
            grid_rows,
            grid_cols,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::Geometry(format!("zero dimension in {self}")));
        }
        if !self.height.is_multiple_of(self.grid_rows) || !self.width.is_multiple_of(self.grid_cols) {
            return Err(Error::Geometry(format!(
                "{}x{} frame is not divisible by a {}x{} grid",
                self.width, self.height, self.grid_rows, self.grid_cols
            )));
        }
        Ok(())
    }

    /// Same pixel raster with a different tile grid.
    pub fn with_grid(&self, grid_rows: usize, grid_cols: usize) -> Result<Self> {
        FrameGeometry::new(self.width, self.height, grid_rows, grid_cols)
    }

    pub fn same_raster(&self, other: &FrameGeometry) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn cell_count(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    /// Basic-tile height in pixels.
    pub fn bt_height(&self) -> usize {
        self.height / self.grid_rows
    }

    /// Basic-tile width in pixels.
    pub fn bt_width(&self) -> usize {
        self.width / self.grid_cols
    }

    pub fn bt_pixels(&self) -> usize {
        self.bt_height() * self.bt_width()
    }

    /// Latitude in degrees of the center of pixel row `m`.
    ///
    /// Computed from an integer numerator so rows mirrored about the equator
    /// get exactly negated latitudes.
    pub fn latitude(&self, m: usize) -> f64 {
        let num = self.height as i64 - 2 * m as i64 - 1;
        num as f64 * 90.0 / self.height as f64
    }

    /// Longitude in degrees of the center of pixel column `n`.
    pub fn longitude(&self, n: usize) -> f64 {
        let num = 2 * n as i64 + 1 - self.width as i64;
        num as f64 * 180.0 / self.width as f64
    }

    /// Latitude in degrees of the center of grid row `r`.
    pub fn grid_row_latitude(&self, r: usize) -> f64 {
        let num = self.grid_rows as i64 - 2 * r as i64 - 1;
        num as f64 * 90.0 / self.grid_rows as f64
    }

    pub fn cell_of_pixel(&self, m: usize, n: usize) -> Cell {
        (m / self.bt_height(), n / self.bt_width())
    }

    /// Number of pixels covered by `rect` (given in grid units).
    pub fn rect_pixels(&self, rect: &Rect) -> usize {
        rect.area() * self.bt_pixels()
    }
}

impl std::fmt::Display for FrameGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{} px / {}x{} grid",
            self.width, self.height, self.grid_rows, self.grid_cols
        )
    }
}

/// Row-major binary raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: usize, height: usize) -> Self {
        PixelMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        PixelMask {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Shape(format!(
                "{} bits for a {width}x{height} raster",
                bits.len()
            )));
        }
        Ok(PixelMask { width, height, bits })
    }

    pub fn for_geometry(geom: &FrameGeometry) -> Self {
        PixelMask::new(geom.width, geom.height)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, m: usize, n: usize) -> bool {
        self.bits[m * self.width + n]
    }

    pub fn set(&mut self, m: usize, n: usize, value: bool) {
        self.bits[m * self.width + n] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn matches(&self, geom: &FrameGeometry) -> bool {
        self.width == geom.width && self.height == geom.height
    }

    pub fn intersection_count(&self, other: &PixelMask) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| **a && **b).count()
    }

    /// Clears every pixel lying under one of `rects` (grid units of `geom`).
    pub fn clear_rects(&mut self, rects: &[Rect], geom: &FrameGeometry) {
        let (bh, bw) = (geom.bt_height(), geom.bt_width());
        for rect in rects {
            for m in rect.row0 * bh..(rect.row0 + rect.h) * bh {
                let row = &mut self.bits[m * self.width..(m + 1) * self.width];
                row[rect.col0 * bw..(rect.col0 + rect.w) * bw].fill(false);
            }
        }
    }

    /// Number of set pixels inside each grid cell, row-major.
    pub fn cell_counts(&self, geom: &FrameGeometry) -> Vec<u32> {
        debug_assert!(self.matches(geom));
        let (bh, bw) = (geom.bt_height(), geom.bt_width());
        let mut counts = vec![0u32; geom.cell_count()];
        for m in 0..self.height {
            let r = m / bh;
            let row = &self.bits[m * self.width..(m + 1) * self.width];
            for (n, &b) in row.iter().enumerate() {
                if b {
                    counts[r * geom.grid_cols + n / bw] += 1;
                }
            }
        }
        counts
    }
}

/// Occupancy of basic tiles on the grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellGrid {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl CellGrid {
    pub fn new(rows: usize, cols: usize) -> Self {
        CellGrid {
            rows,
            cols,
            cells: vec![false; rows * cols],
        }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        CellGrid {
            rows,
            cols,
            cells: vec![true; rows * cols],
        }
    }

    pub fn for_geometry(geom: &FrameGeometry) -> Self {
        CellGrid::new(geom.grid_rows, geom.grid_cols)
    }

    pub fn from_cells(rows: usize, cols: usize, cells: impl IntoIterator<Item = Cell>) -> Self {
        let mut grid = CellGrid::new(rows, cols);
        for (r, c) in cells {
            grid.set(r, c, true);
        }
        grid
    }

    /// Parses an ASCII picture, `#` for active cells. Rows must share a length.
    pub fn from_ascii(picture: &str) -> Self {
        let lines: Vec<&str> = picture.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let rows = lines.len();
        let cols = lines.first().map_or(0, |l| l.len());
        let mut grid = CellGrid::new(rows, cols);
        for (r, line) in lines.iter().enumerate() {
            assert_eq!(line.len(), cols, "ragged ascii grid");
            for (c, ch) in line.chars().enumerate() {
                if ch == '#' {
                    grid.set(r, c, true);
                }
            }
        }
        grid
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.cells[r * self.cols + c]
    }

    /// Like [`get`](Self::get) but `false` outside the grid.
    pub fn get_signed(&self, r: i64, c: i64) -> bool {
        r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols && self.get(r as usize, c as usize)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.cells[r * self.cols + c] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&b| b)
    }

    pub fn active(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / self.cols, i % self.cols))
    }

    pub fn fill_rect(&mut self, rect: &Rect, value: bool) {
        for (r, c) in rect.cells() {
            self.set(r, c, value);
        }
    }

    /// True when every cell of `rect` is inside the grid and active.
    pub fn contains_rect(&self, rect: &Rect) -> bool {
        rect.row0 + rect.h <= self.rows && rect.col0 + rect.w <= self.cols && rect.cells().all(|(r, c)| self.get(r, c))
    }

    /// True when no cell of `rect` is active.
    pub fn disjoint_from_rect(&self, rect: &Rect) -> bool {
        rect.cells().all(|(r, c)| !self.get(r, c))
    }

    pub fn union_with(&mut self, other: &CellGrid) {
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a |= *b;
        }
    }

    pub fn subtract(&mut self, other: &CellGrid) {
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a &= !*b;
        }
    }

    pub fn is_subset_of(&self, other: &CellGrid) -> bool {
        self.cells.iter().zip(&other.cells).all(|(a, b)| !*a || *b)
    }

    pub fn intersects(&self, other: &CellGrid) -> bool {
        self.cells.iter().zip(&other.cells).any(|(a, b)| *a && *b)
    }

    /// 4-connected components without horizontal wraparound.
    ///
    /// Components come out in order of their first cell in row-major order;
    /// cells within a component are sorted row-major.
    pub fn components(&self) -> Vec<Vec<Cell>> {
        let mut label = vec![usize::MAX; self.cells.len()];
        let mut out: Vec<Vec<Cell>> = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.cells.len() {
            if !self.cells[start] || label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = Vec::new();
            label[start] = id;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (r, c) = (i / self.cols, i % self.cols);
                comp.push((r, c));
                let mut visit = |j: usize| {
                    if self.cells[j] && label[j] == usize::MAX {
                        label[j] = id;
                        stack.push(j);
                    }
                };
                if r > 0 {
                    visit(i - self.cols);
                }
                if r + 1 < self.rows {
                    visit(i + self.cols);
                }
                if c > 0 {
                    visit(i - 1);
                }
                if c + 1 < self.cols {
                    visit(i + 1);
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Tight bounding box of the active cells.
    pub fn bounding_box(&self) -> Option<Rect> {
        Rect::bounding(self.active())
    }
}

/// Axis-aligned rectangle of basic tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub row0: usize,
    pub col0: usize,
    pub h: usize,
    pub w: usize,
}

impl Rect {
    pub fn new(row0: usize, col0: usize, h: usize, w: usize) -> Self {
        debug_assert!(h >= 1 && w >= 1);
        Rect { row0, col0, h, w }
    }

    pub fn area(&self) -> usize {
        self.h * self.w
    }

    /// One past the last row.
    pub fn row_end(&self) -> usize {
        self.row0 + self.h
    }

    /// One past the last column.
    pub fn col_end(&self) -> usize {
        self.col0 + self.w
    }

    pub fn contains(&self, (r, c): Cell) -> bool {
        r >= self.row0 && r < self.row_end() && c >= self.col0 && c < self.col_end()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        let (r0, c0, h, w) = (self.row0, self.col0, self.h, self.w);
        (r0..r0 + h).flat_map(move |r| (c0..c0 + w).map(move |c| (r, c)))
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r0 = self.row0.max(other.row0);
        let r1 = self.row_end().min(other.row_end());
        let c0 = self.col0.max(other.col0);
        let c1 = self.col_end().min(other.col_end());
        (r0 < r1 && c0 < c1).then(|| Rect::new(r0, c0, r1 - r0, c1 - c0))
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.intersection(other).is_some()
    }

    /// Smallest rectangle containing all `cells`.
    pub fn bounding(cells: impl IntoIterator<Item = Cell>) -> Option<Rect> {
        let mut it = cells.into_iter();
        let (r, c) = it.next()?;
        let (mut r0, mut r1, mut c0, mut c1) = (r, r, c, c);
        for (r, c) in it {
            r0 = r0.min(r);
            r1 = r1.max(r);
            c0 = c0.min(c);
            c1 = c1.max(c);
        }
        Some(Rect::new(r0, c0, r1 - r0 + 1, c1 - c0 + 1))
    }
}

impl std::fmt::Display for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{} {}x{}]", self.row0, self.col0, self.h, self.w)
    }
}

/// Checks that `rects` are pairwise disjoint and exactly cover `target`.
pub fn check_exact_cover(rects: &[Rect], target: &CellGrid) -> std::result::Result<(), String> {
    let mut seen = CellGrid::new(target.rows(), target.cols());
    for rect in rects {
        if rect.h == 0 || rect.w == 0 {
            return Err(format!("degenerate rect {rect}"));
        }
        if rect.row_end() > target.rows() || rect.col_end() > target.cols() {
            return Err(format!("rect {rect} leaves the grid"));
        }
        for (r, c) in rect.cells() {
            if seen.get(r, c) {
                return Err(format!("cell ({r},{c}) covered twice"));
            }
            if !target.get(r, c) {
                return Err(format!("rect {rect} covers ({r},{c}) outside the target"));
            }
            seen.set(r, c, true);
        }
    }
    if seen != *target {
        let missing = target.count() - seen.count();
        return Err(format!("{missing} target cells left uncovered"));
    }
    Ok(())
}
