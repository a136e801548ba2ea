//! Independent oracles for the acceptance and property suites.
//!
//! Nothing here calls into the partitioner; regions are plain `u64` bit
//! masks over a `BOX x BOX` window, bit `r * BOX + c`.

#![allow(dead_code)]

use adaptile::geometry::{Cell, FrameGeometry};
use adaptile::projection::FovMask;

pub const BOX: usize = 6;

pub fn bit(r: usize, c: usize) -> u64 {
    1u64 << (r * BOX + c)
}

pub fn has(mask: u64, r: i64, c: i64) -> bool {
    r >= 0 && c >= 0 && (r as usize) < BOX && (c as usize) < BOX && mask & bit(r as usize, c as usize) != 0
}

pub fn cells(mask: u64) -> Vec<Cell> {
    (0..BOX * BOX)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| (i / BOX, i % BOX))
        .collect()
}

/// Every fixed polyomino (translation class) of `1..=max_cells` cells whose
/// bounding box fits in `BOX x BOX`, normalized to touch row 0 and column 0.
///
/// Redelmeier's algorithm: each polyomino is produced exactly once, so no
/// deduplication is needed. Cells grow from the origin into the half plane
/// `y > 0 || (y == 0 && x >= 0)`.
pub fn polyominoes(max_cells: usize) -> Vec<u64> {
    const W: i64 = 2 * BOX as i64 - 1;
    struct State {
        max_cells: usize,
        seen: Vec<bool>,
        poly: Vec<(i64, i64)>,
        out: Vec<u64>,
    }
    fn idx(y: i64, x: i64) -> usize {
        (y * W + x + BOX as i64 - 1) as usize
    }
    fn valid(y: i64, x: i64) -> bool {
        (0..BOX as i64).contains(&y) && x.abs() < BOX as i64 && (y > 0 || x >= 0)
    }
    fn fits(poly: &[(i64, i64)]) -> bool {
        let (lo, hi) = poly
            .iter()
            .fold((i64::MAX, i64::MIN), |(lo, hi), &(_, x)| (lo.min(x), hi.max(x)));
        let ymax = poly.iter().map(|p| p.0).max().unwrap_or(0);
        hi - lo < BOX as i64 && ymax < BOX as i64
    }
    fn emit(s: &mut State) {
        let xmin = s.poly.iter().map(|p| p.1).min().unwrap();
        let m = s
            .poly
            .iter()
            .fold(0u64, |m, &(y, x)| m | bit(y as usize, (x - xmin) as usize));
        s.out.push(m);
    }
    fn grow(s: &mut State, mut untried: Vec<(i64, i64)>) {
        while let Some(cell) = untried.pop() {
            s.poly.push(cell);
            if fits(&s.poly) {
                emit(s);
                if s.poly.len() < s.max_cells {
                    let mut next = untried.clone();
                    let mut added = Vec::new();
                    for (dy, dx) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
                        let (y, x) = (cell.0 + dy, cell.1 + dx);
                        if valid(y, x) && !s.seen[idx(y, x)] {
                            s.seen[idx(y, x)] = true;
                            added.push((y, x));
                            next.push((y, x));
                        }
                    }
                    grow(s, next);
                    for (y, x) in added {
                        s.seen[idx(y, x)] = false;
                    }
                }
            }
            s.poly.pop();
        }
    }
    let mut s = State {
        max_cells,
        seen: vec![false; BOX * W as usize],
        poly: Vec::new(),
        out: Vec::new(),
    };
    s.seen[idx(0, 0)] = true;
    grow(&mut s, vec![(0, 0)]);
    s.out
}

/// Empty regions not 4-connected to the outside of the window.
pub fn hole_count(mask: u64) -> usize {
    // padded window so the outside is one connected component
    const P: usize = BOX + 2;
    let mut open = [false; P * P];
    for r in 0..P {
        for c in 0..P {
            let inside = (1..=BOX).contains(&r) && (1..=BOX).contains(&c);
            open[r * P + c] = !(inside && mask & bit(r - 1, c - 1) != 0);
        }
    }
    let mut label = [usize::MAX; P * P];
    let mut components = 0;
    for start in 0..P * P {
        if !open[start] || label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = components;
        while let Some(i) = stack.pop() {
            let (r, c) = (i / P, i % P);
            let mut push = |j: usize| {
                if open[j] && label[j] == usize::MAX {
                    label[j] = components;
                    stack.push(j);
                }
            };
            if r > 0 {
                push(i - P);
            }
            if r + 1 < P {
                push(i + P);
            }
            if c > 0 {
                push(i - 1);
            }
            if c + 1 < P {
                push(i + 1);
            }
        }
        components += 1;
    }
    components - 1
}

/// Exact minimum number of rectangles partitioning `mask`.
///
/// Branch and bound: the first uncovered cell in row-major order must be the
/// top-left corner of its rectangle, so every rectangle anchored there is
/// tried, largest first.
pub fn min_rect_partition(mask: u64) -> usize {
    fn rects_at(rest: u64, r0: usize, c0: usize) -> Vec<u64> {
        let mut out = Vec::new();
        let mut max_w = BOX - c0;
        for r in r0..BOX {
            let w = (0..max_w).take_while(|&k| rest & bit(r, c0 + k) != 0).count();
            if w == 0 {
                break;
            }
            max_w = w;
            for k in 1..=w {
                let row = ((1u64 << k) - 1) << c0;
                out.push((r0..=r).fold(0u64, |m, rr| m | row << (rr * BOX)));
            }
        }
        out.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        out
    }
    fn go(rest: u64, used: usize, best: &mut usize) {
        if rest == 0 {
            *best = (*best).min(used);
            return;
        }
        if used + 1 >= *best {
            return;
        }
        let first = rest.trailing_zeros() as usize;
        for rect in rects_at(rest, first / BOX, first % BOX) {
            go(rest & !rect, used + 1, best);
        }
    }
    let mut best = mask.count_ones() as usize;
    go(mask, 0, &mut best);
    best
}

/// Concave grid vertices: exactly three of the four surrounding cells set.
/// Vertex `(r, c)` is the top-left corner of cell `(r, c)`.
pub fn concave_vertices(mask: u64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for r in 0..=BOX as i64 {
        for c in 0..=BOX as i64 {
            let n = [(r - 1, c - 1), (r - 1, c), (r, c - 1), (r, c)]
                .iter()
                .filter(|&&(a, b)| has(mask, a, b))
                .count();
            if n == 3 {
                out.push((r, c));
            }
        }
    }
    out
}

/// Segment between two concave vertices with region on both sides of every
/// unit edge. `horizontal` chords run along a row line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleChord {
    pub horizontal: bool,
    pub a: (i64, i64),
    pub b: (i64, i64),
}

impl OracleChord {
    fn points(&self) -> Vec<(i64, i64)> {
        if self.horizontal {
            (self.a.1..=self.b.1).map(|c| (self.a.0, c)).collect()
        } else {
            (self.a.0..=self.b.0).map(|r| (r, self.a.1)).collect()
        }
    }

    pub fn meets(&self, other: &OracleChord) -> bool {
        let p = self.points();
        other.points().iter().any(|q| p.contains(q))
    }
}

pub fn chords(mask: u64) -> Vec<OracleChord> {
    let concave = concave_vertices(mask);
    let mut out = Vec::new();
    for (i, &a) in concave.iter().enumerate() {
        for &b in &concave[i + 1..] {
            if a.0 == b.0 {
                let interior = (a.1..b.1).all(|c| has(mask, a.0 - 1, c) && has(mask, a.0, c));
                if interior {
                    out.push(OracleChord { horizontal: true, a, b });
                }
            }
            if a.1 == b.1 {
                let interior = (a.0..b.0).all(|r| has(mask, r, a.1 - 1) && has(mask, r, a.1));
                if interior {
                    out.push(OracleChord {
                        horizontal: false,
                        a,
                        b,
                    });
                }
            }
        }
    }
    out
}

/// Size of a maximum set of pairwise disjoint chords, by exhaustive search.
pub fn max_independent(chords: &[OracleChord]) -> usize {
    let n = chords.len();
    assert!(n <= 24, "too many chords for exhaustive search: {n}");
    let conflicts: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && chords[i].meets(&chords[j]))
                .fold(0u32, |m, j| m | 1 << j)
        })
        .collect();
    fn go(i: usize, allowed: u32, size: usize, conflicts: &[u32], best: &mut usize) {
        if size + (allowed >> i).count_ones() as usize <= *best {
            return;
        }
        if i == conflicts.len() {
            *best = size;
            return;
        }
        if allowed >> i & 1 == 1 {
            go(i + 1, allowed & !conflicts[i], size + 1, conflicts, best);
        }
        go(i + 1, allowed & !(1 << i), size, conflicts, best);
    }
    let mut best = 0;
    go(
        0,
        if n == 0 { 0 } else { u32::MAX >> (32 - n) },
        0,
        &conflicts,
        &mut best,
    );
    best
}

/// Pixel redundancy of a uniform grid by direct per-pixel scan: a basic
/// tile is transmitted iff any of its pixels is in the viewport.
pub fn grid_redundancy_brute(geom: &FrameGeometry, fov: &FovMask) -> f64 {
    let (bh, bw) = (geom.height / geom.grid_rows, geom.width / geom.grid_cols);
    let mut n_t = 0usize;
    for r in 0..geom.grid_rows {
        for c in 0..geom.grid_cols {
            let hit = (r * bh..(r + 1) * bh).any(|m| (c * bw..(c + 1) * bw).any(|n| fov.bits.get(m, n)));
            if hit {
                n_t += bh * bw;
            }
        }
    }
    let n_fov = fov.bits.bits().iter().filter(|&&b| b).count();
    100.0 * (n_t as f64 - n_fov as f64) / n_fov as f64
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn oracle_counts_small_polyominoes() {
        // fixed polyomino counts: 1, 2, 6, 19, 63, 216
        let all = polyominoes(6);
        let by_size: Vec<usize> = (1..=6)
            .map(|n| all.iter().filter(|m| m.count_ones() == n).count())
            .collect();
        assert_eq!(by_size, vec![1, 2, 6, 19, 63, 216]);
    }
}
