//! Minimum partition of rectilinear cell regions into rectangles.
//!
//! The classical construction: concave vertices that see each other along
//! an axis are joined by chords; a maximum set of pairwise non-intersecting
//! chords is drawn, then every concave vertex not yet resolved gets a cut
//! into the interior that stops at the first drawn segment or boundary
//! vertex. The faces left over are rectangles. For hole-free regions the
//! count is `concave - independent_chords + 1`, which is optimal. Hole
//! corners take part in chord search like any other concave vertex; the
//! result is then near-optimal.

mod chords;
mod region;

pub use chords::{build_chords, concave_vertices, max_independent_chords, Chord, Orientation};
pub use region::{Point, RectilinearRegion};

use crate::error::{Error, Result};
use crate::geometry::{check_exact_cover, Cell, CellGrid, Rect};

/// Drawn unit edges over the region's bounding box.
struct Drawn {
    row0: usize,
    col0: usize,
    /// Horizontal edge `(r, c)-(r, c+1)` for `r in 0..=h`, `c in 0..w`.
    horiz: Vec<bool>,
    /// Vertical edge `(r, c)-(r+1, c)` for `r in 0..h`, `c in 0..=w`.
    vert: Vec<bool>,
    w: usize,
}

impl Drawn {
    fn new(bbox: Rect) -> Self {
        Drawn {
            row0: bbox.row0,
            col0: bbox.col0,
            horiz: vec![false; (bbox.h + 1) * bbox.w],
            vert: vec![false; bbox.h * (bbox.w + 1)],
            w: bbox.w,
        }
    }

    fn h_idx(&self, (r, c): Point) -> usize {
        (r - self.row0) * self.w + (c - self.col0)
    }

    fn v_idx(&self, (r, c): Point) -> usize {
        (r - self.row0) * (self.w + 1) + (c - self.col0)
    }

    fn h(&self, p: Point) -> bool {
        self.horiz[self.h_idx(p)]
    }

    fn v(&self, p: Point) -> bool {
        self.vert[self.v_idx(p)]
    }

    fn set_h(&mut self, p: Point) {
        let i = self.h_idx(p);
        self.horiz[i] = true;
    }

    fn set_v(&mut self, p: Point) {
        let i = self.v_idx(p);
        self.vert[i] = true;
    }

    /// Any drawn edge touching vertex `p`. Edges outside the box are never drawn.
    fn touches(&self, region: &RectilinearRegion, p: Point) -> bool {
        let (r, c) = p;
        (region.h_edge_interior(p) && self.h(p))
            || (c > 0 && region.h_edge_interior((r, c - 1)) && self.h((r, c - 1)))
            || (region.v_edge_interior(p) && self.v(p))
            || (r > 0 && region.v_edge_interior((r - 1, c)) && self.v((r - 1, c)))
    }

    fn draw_chord(&mut self, chord: &Chord) {
        match chord.orientation {
            Orientation::Horizontal => {
                for c in chord.a.1..chord.b.1 {
                    self.set_h((chord.a.0, c));
                }
            }
            Orientation::Vertical => {
                for r in chord.a.0..chord.b.0 {
                    self.set_v((r, chord.a.1));
                }
            }
        }
    }
}

/// Everything the partitioner derived on the way, for inspection and tests.
#[derive(Debug, Clone)]
pub struct Partition {
    pub rects: Vec<Rect>,
    pub concave: Vec<Point>,
    pub chords: Vec<Chord>,
    pub independent: Vec<Chord>,
}

/// Partitions `region` into non-overlapping rectangles, sorted by top-left cell.
pub fn partition(region: &RectilinearRegion) -> Result<Vec<Rect>> {
    partition_detailed(region).map(|p| p.rects)
}

/// Partitions every 4-connected component of `grid`.
pub fn partition_grid(grid: &CellGrid) -> Result<Vec<Rect>> {
    let mut rects = Vec::new();
    for comp in grid.components() {
        rects.extend(partition(&RectilinearRegion::new(comp)?)?);
    }
    rects.sort();
    Ok(rects)
}

pub fn partition_detailed(region: &RectilinearRegion) -> Result<Partition> {
    let concave = concave_vertices(region);
    let chords = build_chords(region, &concave);
    let independent = max_independent_chords(&chords);

    let mut drawn = Drawn::new(region.bounding_box());
    for chord in &independent {
        drawn.draw_chord(chord);
    }

    for &v in &concave {
        if drawn.touches(region, v) {
            continue;
        }
        // Every concave vertex has exactly one interior vertical edge, so the
        // vertical cut always has positive length.
        let south = region.v_edge_interior(v);
        let mut p = v;
        loop {
            if south {
                drawn.set_v(p);
                p = (p.0 + 1, p.1);
            } else {
                drawn.set_v((p.0 - 1, p.1));
                p = (p.0 - 1, p.1);
            }
            if region.on_boundary(p) || touches_except(&drawn, region, p, south) {
                break;
            }
        }
    }

    let rects = faces(region, &drawn)?;
    let mut target = CellGrid::new(region.bounding_box().row_end(), region.bounding_box().col_end());
    for &(r, c) in region.cells() {
        target.set(r, c, true);
    }
    check_exact_cover(&rects, &target).map_err(|msg| Error::Invariant { stage: "mnc", msg })?;
    Ok(Partition {
        rects,
        concave,
        chords,
        independent,
    })
}

/// Like [`Drawn::touches`] but ignoring the edge the cut just arrived on.
fn touches_except(drawn: &Drawn, region: &RectilinearRegion, p: Point, arrived_south: bool) -> bool {
    let (r, c) = p;
    let west = c > 0 && region.h_edge_interior((r, c - 1)) && drawn.h((r, c - 1));
    let east = region.h_edge_interior(p) && drawn.h(p);
    let ahead = if arrived_south {
        region.v_edge_interior(p) && drawn.v(p)
    } else {
        r > 0 && region.v_edge_interior((r - 1, c)) && drawn.v((r - 1, c))
    };
    west || east || ahead
}

/// Flood-fills cells across undrawn interior edges; every face must be a rectangle.
fn faces(region: &RectilinearRegion, drawn: &Drawn) -> Result<Vec<Rect>> {
    let bbox = region.bounding_box();
    let idx = |(r, c): Cell| (r - bbox.row0) * bbox.w + (c - bbox.col0);
    let mut seen = vec![false; bbox.h * bbox.w];
    let mut rects = Vec::new();
    let mut stack = Vec::new();
    for &start in region.cells() {
        if seen[idx(start)] {
            continue;
        }
        seen[idx(start)] = true;
        stack.push(start);
        let mut face = Vec::new();
        while let Some((r, c)) = stack.pop() {
            face.push((r, c));
            let (ri, ci) = (r as i64, c as i64);
            let mut go = |cell: Cell, blocked: bool| {
                if !blocked && region.contains(cell.0 as i64, cell.1 as i64) && !seen[idx(cell)] {
                    seen[idx(cell)] = true;
                    stack.push(cell);
                }
            };
            if region.contains(ri, ci + 1) {
                go((r, c + 1), drawn.v((r, c + 1)));
            }
            if c > 0 && region.contains(ri, ci - 1) {
                go((r, c - 1), drawn.v((r, c)));
            }
            if region.contains(ri + 1, ci) {
                go((r + 1, c), drawn.h((r + 1, c)));
            }
            if r > 0 && region.contains(ri - 1, ci) {
                go((r - 1, c), drawn.h((r, c)));
            }
        }
        let rect = Rect::bounding(face.iter().copied()).expect("face has cells");
        if rect.area() != face.len() {
            return Err(Error::Invariant {
                stage: "mnc",
                msg: format!("face with {} cells is not a rectangle (bbox {rect})", face.len()),
            });
        }
        rects.push(rect);
    }
    rects.sort();
    Ok(rects)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(picture: &str) -> RectilinearRegion {
        RectilinearRegion::from_grid(&CellGrid::from_ascii(picture)).unwrap()
    }

    #[test]
    fn solid_rectangle_is_one_tile() {
        assert_eq!(
            partition(&region("####\n####\n####")).unwrap(),
            vec![Rect::new(0, 0, 3, 4)]
        );
    }

    #[test]
    fn l_shape_is_two_tiles() {
        let rects = partition(&region("##\n##\n#.")).unwrap();
        assert_eq!(rects.len(), 2);
    }

    #[test]
    fn plus_pentomino_is_three_tiles() {
        let p = partition_detailed(&region(".#.\n###\n.#.")).unwrap();
        assert_eq!(p.rects.len(), 3);
        assert_eq!(p.rects.len(), p.concave.len() - p.independent.len() + 1);
    }

    #[test]
    fn square_ring_is_four_tiles() {
        assert_eq!(partition(&region("###\n#.#\n###")).unwrap().len(), 4);
    }

    #[test]
    fn ring_around_a_centered_block() {
        let ring = region(
            "######
             ######
             ##..##
             ##..##
             ######",
        );
        assert_eq!(partition(&ring).unwrap().len(), 4);
    }

    #[test]
    fn staircase_uses_formula() {
        let stairs = region(
            "#...
             ##..
             ###.
             ####",
        );
        let p = partition_detailed(&stairs).unwrap();
        assert_eq!(p.concave.len(), 3);
        assert_eq!(p.rects.len(), 4);
    }

    #[test]
    fn offset_region_keeps_absolute_coordinates() {
        let rects = partition(&RectilinearRegion::new([(5, 7), (5, 8), (6, 7)]).unwrap()).unwrap();
        assert_eq!(rects.iter().map(Rect::area).sum::<usize>(), 3);
        assert!(rects.iter().all(|r| r.row0 >= 5 && r.col0 >= 7));
    }

    #[test]
    fn partition_is_deterministic() {
        let r = region(".##.\n####\n#..#\n####");
        assert_eq!(partition(&r).unwrap(), partition(&r).unwrap());
    }

    #[test]
    fn grid_partition_covers_each_component() {
        let g = CellGrid::from_ascii("##..#\n#...#\n....#");
        let rects = partition_grid(&g).unwrap();
        assert!(check_exact_cover(&rects, &g).is_ok());
        assert_eq!(rects.len(), 3);
    }
}
