use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Cell, CellGrid, Rect};

/// A grid vertex `(row, col)`; vertex `(r, c)` is the top-left corner of cell `(r, c)`.
pub type Point = (usize, usize);

/// A 4-connected set of cells, possibly with holes.
///
/// Occupancy is stored over the bounding box padded by one cell on each
/// side, so neighbourhood queries never go out of bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectilinearRegion {
    cells: Vec<Cell>,
    bbox: Rect,
    occ: Vec<bool>,
}

impl RectilinearRegion {
    pub fn new(cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let mut cells: Vec<Cell> = cells.into_iter().collect();
        cells.sort_unstable();
        cells.dedup();
        let bbox =
            Rect::bounding(cells.iter().copied()).ok_or_else(|| Error::InvalidRegion("region has no cells".into()))?;
        let (pr, pc) = (bbox.h + 2, bbox.w + 2);
        let mut occ = vec![false; pr * pc];
        for &(r, c) in &cells {
            occ[(r - bbox.row0 + 1) * pc + (c - bbox.col0 + 1)] = true;
        }
        let region = RectilinearRegion { cells, bbox, occ };
        let mut grid = CellGrid::new(bbox.h, bbox.w);
        for &(r, c) in &region.cells {
            grid.set(r - bbox.row0, c - bbox.col0, true);
        }
        let parts = grid.components().len();
        if parts != 1 {
            return Err(Error::InvalidRegion(format!(
                "region is not 4-connected ({parts} components)"
            )));
        }
        Ok(region)
    }

    pub fn from_grid(grid: &CellGrid) -> Result<Self> {
        RectilinearRegion::new(grid.active())
    }

    /// Row-major sorted cells.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn area(&self) -> usize {
        self.cells.len()
    }

    pub fn bounding_box(&self) -> Rect {
        self.bbox
    }

    /// Membership for signed coordinates.
    pub fn contains(&self, r: i64, c: i64) -> bool {
        let lr = r - self.bbox.row0 as i64 + 1;
        let lc = c - self.bbox.col0 as i64 + 1;
        let pc = self.bbox.w as i64 + 2;
        if lr < 0 || lc < 0 || lr >= self.bbox.h as i64 + 2 || lc >= pc {
            return false;
        }
        self.occ[(lr * pc + lc) as usize]
    }

    /// Inside flags of the four cells around a vertex: `[NW, NE, SW, SE]`.
    pub(crate) fn around(&self, (r, c): Point) -> [bool; 4] {
        let (r, c) = (r as i64, c as i64);
        [
            self.contains(r - 1, c - 1),
            self.contains(r - 1, c),
            self.contains(r, c - 1),
            self.contains(r, c),
        ]
    }

    /// A vertex is concave when exactly three of its four cells are inside.
    pub fn is_concave(&self, p: Point) -> bool {
        self.around(p).iter().filter(|&&b| b).count() == 3
    }

    /// True if any of the four cells around `p` is outside.
    pub(crate) fn on_boundary(&self, p: Point) -> bool {
        self.around(p).iter().any(|&b| !b)
    }

    /// Horizontal unit edge from `(r, c)` to `(r, c + 1)` with region on both sides.
    pub(crate) fn h_edge_interior(&self, (r, c): Point) -> bool {
        let (r, c) = (r as i64, c as i64);
        self.contains(r - 1, c) && self.contains(r, c)
    }

    /// Vertical unit edge from `(r, c)` to `(r + 1, c)` with region on both sides.
    pub(crate) fn v_edge_interior(&self, (r, c): Point) -> bool {
        let (r, c) = (r as i64, c as i64);
        self.contains(r, c - 1) && self.contains(r, c)
    }

    /// Grid vertices that can touch the region, in row-major order.
    pub(crate) fn vertex_candidates(&self) -> impl Iterator<Item = Point> + '_ {
        let b = self.bbox;
        (b.row0..=b.row_end()).flat_map(move |r| (b.col0..=b.col_end()).map(move |c| (r, c)))
    }

    /// Boundary rings as corner-vertex sequences: the outer ring first, then
    /// one ring per hole.
    ///
    /// Boundary edges are walked clockwise around the interior; at a vertex
    /// where two rings touch diagonally the walk turns right, so cells that
    /// only meet at a corner stay separated.
    pub fn rings(&self) -> Vec<Vec<Point>> {
        // directed boundary edges keyed by start vertex; direction index:
        // 0 east, 1 south, 2 west, 3 north
        let mut out: HashMap<Point, Vec<u8>> = HashMap::new();
        let mut edges = Vec::new();
        for &(r, c) in &self.cells {
            let (ri, ci) = (r as i64, c as i64);
            if !self.contains(ri - 1, ci) {
                edges.push(((r, c), 0u8));
            }
            if !self.contains(ri, ci + 1) {
                edges.push(((r, c + 1), 1));
            }
            if !self.contains(ri + 1, ci) {
                edges.push(((r + 1, c + 1), 2));
            }
            if !self.contains(ri, ci - 1) {
                edges.push(((r + 1, c), 3));
            }
        }
        for &(p, d) in &edges {
            out.entry(p).or_default().push(d);
        }
        let step = |(r, c): Point, d: u8| -> Point {
            match d {
                0 => (r, c + 1),
                1 => (r + 1, c),
                2 => (r, c - 1),
                _ => (r - 1, c),
            }
        };

        let mut used: HashMap<(Point, u8), bool> = edges.iter().map(|&e| (e, false)).collect();
        let mut rings = Vec::new();
        // the first edge is the top edge of the first cell, which lies on the
        // outer ring
        for &(start, d0) in &edges {
            if used[&(start, d0)] {
                continue;
            }
            let mut ring = Vec::new();
            let (mut p, mut d) = (start, d0);
            loop {
                used.insert((p, d), true);
                let q = step(p, d);
                let options = &out[&q];
                // right turn, straight, left turn
                let next = [(d + 1) % 4, d, (d + 3) % 4]
                    .into_iter()
                    .find(|nd| options.contains(nd) && !used[&(q, *nd)])
                    .or_else(|| {
                        [(d + 1) % 4, d, (d + 3) % 4]
                            .into_iter()
                            .find(|nd| options.contains(nd))
                    })
                    .expect("boundary edges form closed loops");
                if next != d {
                    ring.push(q);
                }
                if (q, next) == (start, d0) {
                    break;
                }
                p = q;
                d = next;
            }
            // rotate so the ring starts at its smallest vertex
            if let Some(min_pos) = ring.iter().enumerate().min_by_key(|(_, v)| **v).map(|(i, _)| i) {
                ring.rotate_left(min_pos);
            }
            rings.push(ring);
        }
        rings
    }

    pub fn hole_count(&self) -> usize {
        self.rings().len().saturating_sub(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(picture: &str) -> RectilinearRegion {
        RectilinearRegion::from_grid(&CellGrid::from_ascii(picture)).unwrap()
    }

    #[test]
    fn rejects_empty_and_disconnected() {
        assert!(RectilinearRegion::new([]).is_err());
        assert!(RectilinearRegion::new([(0, 0), (0, 2)]).is_err());
        assert!(RectilinearRegion::new([(0, 0), (1, 1)]).is_err());
    }

    #[test]
    fn rings_of_a_rectangle() {
        let r = region("###\n###");
        let rings = r.rings();
        assert_eq!(rings, vec![vec![(0, 0), (0, 3), (2, 3), (2, 0)]]);
        assert_eq!(r.hole_count(), 0);
    }

    #[test]
    fn ring_with_a_hole() {
        let r = region("###\n#.#\n###");
        let rings = r.rings();
        assert_eq!(rings.len(), 2);
        assert_eq!(rings[0].len(), 4);
        assert_eq!(rings[1], vec![(1, 1), (2, 1), (2, 2), (1, 2)]);
        assert_eq!(r.hole_count(), 1);
    }

    #[test]
    fn diagonal_contacts_merge_rings() {
        // two hole cells meeting at a corner form a single hole
        let r = region(
            "####
             #.##
             ##.#
             ####",
        );
        assert_eq!(r.hole_count(), 1);
        // a hole touching the outside at a corner is not a hole
        let r = region(
            "##.
             #.#
             ###",
        );
        assert_eq!(r.hole_count(), 0);
    }

    #[test]
    fn concave_vertex_rule() {
        let l = region("##\n##\n#.");
        let concave: Vec<Point> = l.vertex_candidates().filter(|&p| l.is_concave(p)).collect();
        assert_eq!(concave, vec![(2, 1)]);
    }
}
