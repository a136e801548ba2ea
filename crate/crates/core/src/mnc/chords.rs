use super::region::{Point, RectilinearRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Axis-aligned segment between two concave vertices whose interior runs
/// strictly through the region. `a` precedes `b` along the axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chord {
    pub orientation: Orientation,
    pub a: Point,
    pub b: Point,
}

impl Chord {
    /// Closed-segment intersection; a shared endpoint counts.
    pub fn intersects(&self, other: &Chord) -> bool {
        let (lo_r, hi_r) = (self.a.0.min(self.b.0), self.a.0.max(self.b.0));
        let (lo_c, hi_c) = (self.a.1.min(self.b.1), self.a.1.max(self.b.1));
        let (olo_r, ohi_r) = (other.a.0.min(other.b.0), other.a.0.max(other.b.0));
        let (olo_c, ohi_c) = (other.a.1.min(other.b.1), other.a.1.max(other.b.1));
        lo_r <= ohi_r && olo_r <= hi_r && lo_c <= ohi_c && olo_c <= hi_c
    }

    /// Number of unit edges spanned.
    pub fn len(&self) -> usize {
        (self.b.0 - self.a.0) + (self.b.1 - self.a.1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Concave vertices in row-major order.
///
/// Hole corners are included: a hole corner has three region cells around
/// it, the same test as a reflex corner of the outer ring.
pub fn concave_vertices(region: &RectilinearRegion) -> Vec<Point> {
    region.vertex_candidates().filter(|&p| region.is_concave(p)).collect()
}

/// Walks from `p` east or south while the edge ahead has region on both
/// sides; returns where it stops.
fn ray(region: &RectilinearRegion, p: Point, orientation: Orientation) -> Point {
    let mut q = p;
    loop {
        match orientation {
            Orientation::Horizontal if region.h_edge_interior(q) => q.1 += 1,
            Orientation::Vertical if region.v_edge_interior(q) => q.0 += 1,
            _ => return q,
        }
    }
}

/// Which way along `orientation` a concave vertex opens into the region:
/// `true` for east/south.
pub(crate) fn interior_direction(region: &RectilinearRegion, p: Point, orientation: Orientation) -> bool {
    match orientation {
        Orientation::Horizontal => region.h_edge_interior(p),
        Orientation::Vertical => region.v_edge_interior(p),
    }
}

/// Every chord joining two co-linear concave vertices that see each other
/// through the interior. Sorted horizontal first, then by endpoints.
pub fn build_chords(region: &RectilinearRegion, vertices: &[Point]) -> Vec<Chord> {
    let mut chords = Vec::new();
    for &v in vertices {
        for orientation in [Orientation::Horizontal, Orientation::Vertical] {
            let forward = interior_direction(region, v, orientation);
            // only cast from the lower endpoint so each pair appears once
            if !forward {
                continue;
            }
            let q = ray(region, v, orientation);
            if q != v && region.is_concave(q) {
                chords.push(Chord {
                    orientation,
                    a: v,
                    b: q,
                });
            }
        }
    }
    chords.sort();
    chords
}

/// Maximum set of pairwise non-intersecting chords.
///
/// Horizontal and vertical chords form the two sides of a bipartite
/// intersection graph (parallel chords never meet). A maximum matching gives
/// a minimum vertex cover via König's construction; its complement is the
/// answer. Returned in input order.
pub fn max_independent_chords(chords: &[Chord]) -> Vec<Chord> {
    let left: Vec<usize> = (0..chords.len())
        .filter(|&i| chords[i].orientation == Orientation::Horizontal)
        .collect();
    let right: Vec<usize> = (0..chords.len())
        .filter(|&i| chords[i].orientation == Orientation::Vertical)
        .collect();
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|&h| {
            (0..right.len())
                .filter(|&j| chords[h].intersects(&chords[right[j]]))
                .collect()
        })
        .collect();

    let matching = maximum_matching(&adj, right.len());
    let (in_left_z, in_right_z) = konig_reachable(&adj, &matching, right.len());

    // independent set = (L ∩ Z) ∪ (R \ Z)
    let mut keep = vec![false; chords.len()];
    for (i, &h) in left.iter().enumerate() {
        keep[h] = in_left_z[i];
    }
    for (j, &v) in right.iter().enumerate() {
        keep[v] = !in_right_z[j];
    }
    chords.iter().zip(keep).filter_map(|(c, k)| k.then_some(*c)).collect()
}

/// Kuhn's augmenting-path matching; `match_of_left[i]` is the matched right
/// vertex. Deterministic in adjacency order.
pub(crate) struct Matching {
    pub match_of_left: Vec<Option<usize>>,
    pub match_of_right: Vec<Option<usize>>,
}

impl Matching {
    #[cfg(test)]
    pub fn size(&self) -> usize {
        self.match_of_left.iter().flatten().count()
    }
}

pub(crate) fn maximum_matching(adj: &[Vec<usize>], n_right: usize) -> Matching {
    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        ml: &mut [Option<usize>],
        mr: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if mr[v].is_none_or(|w| augment(w, adj, seen, ml, mr)) {
                ml[u] = Some(v);
                mr[v] = Some(u);
                return true;
            }
        }
        false
    }

    let mut ml = vec![None; adj.len()];
    let mut mr = vec![None; n_right];
    for u in 0..adj.len() {
        let mut seen = vec![false; n_right];
        augment(u, adj, &mut seen, &mut ml, &mut mr);
    }
    Matching {
        match_of_left: ml,
        match_of_right: mr,
    }
}

/// Vertices reachable from unmatched left vertices by alternating paths
/// (free edges left to right, matched edges right to left).
fn konig_reachable(adj: &[Vec<usize>], m: &Matching, n_right: usize) -> (Vec<bool>, Vec<bool>) {
    let mut zl = vec![false; adj.len()];
    let mut zr = vec![false; n_right];
    let mut stack: Vec<usize> = (0..adj.len()).filter(|&u| m.match_of_left[u].is_none()).collect();
    for &u in &stack {
        zl[u] = true;
    }
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if zr[v] || m.match_of_left[u] == Some(v) {
                continue;
            }
            zr[v] = true;
            if let Some(w) = m.match_of_right[v] {
                if !zl[w] {
                    zl[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    (zl, zr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellGrid;

    fn region(picture: &str) -> RectilinearRegion {
        RectilinearRegion::from_grid(&CellGrid::from_ascii(picture)).unwrap()
    }

    fn h(a: Point, b: Point) -> Chord {
        Chord {
            orientation: Orientation::Horizontal,
            a,
            b,
        }
    }

    fn v(a: Point, b: Point) -> Chord {
        Chord {
            orientation: Orientation::Vertical,
            a,
            b,
        }
    }

    const PLUS: &str = ".#.\n###\n.#.";

    #[test]
    fn convex_shapes_have_no_concave_vertices() {
        assert!(concave_vertices(&region("###\n###")).is_empty());
        assert_eq!(concave_vertices(&region("##\n##\n#.")).len(), 1);
    }

    #[test]
    fn hole_corners_are_concave() {
        let ring = region("###\n#.#\n###");
        assert_eq!(concave_vertices(&ring), vec![(1, 1), (1, 2), (2, 1), (2, 2)]);
    }

    #[test]
    fn plus_pentomino_chords() {
        let plus = region(PLUS);
        let vs = concave_vertices(&plus);
        assert_eq!(vs, vec![(1, 1), (1, 2), (2, 1), (2, 2)]);
        let chords = build_chords(&plus, &vs);
        assert_eq!(
            chords,
            vec![
                h((1, 1), (1, 2)),
                h((2, 1), (2, 2)),
                v((1, 1), (2, 1)),
                v((1, 2), (2, 2))
            ]
        );
        let mis = max_independent_chords(&chords);
        assert_eq!(mis.len(), 2);
        assert!(mis.iter().all(|c| c.orientation == mis[0].orientation));
    }

    #[test]
    fn l_shape_has_no_chords() {
        let l = region("##\n##\n#.");
        assert!(build_chords(&l, &concave_vertices(&l)).is_empty());
    }

    #[test]
    fn ring_chords_avoid_the_hole() {
        let ring = region("###\n#.#\n###");
        let chords = build_chords(&ring, &concave_vertices(&ring));
        for o in [Orientation::Horizontal, Orientation::Vertical] {
            assert!(chords.iter().filter(|c| c.orientation == o).count() <= 2);
        }
        for c in &chords {
            // no chord may run along the hole cell (1,1)
            assert!(!(c.a.0 <= 1 && c.b.0 >= 2 && c.a.1 == 1 && c.b.1 == 1));
        }
    }

    #[test]
    fn chords_need_interior_on_both_sides() {
        // a notch bottom is boundary, so its two concave corners get no chord
        let notch = region("#..#\n####\n####");
        let vs = concave_vertices(&notch);
        assert_eq!(vs, vec![(1, 1), (1, 3)]);
        assert!(build_chords(&notch, &vs).is_empty());

        // an I-beam: the waist's corners see each other across the flanges
        let beam = region("###\n.#.\n###");
        let vs = concave_vertices(&beam);
        assert_eq!(build_chords(&beam, &vs), vec![h((1, 1), (1, 2)), h((2, 1), (2, 2))]);
    }

    #[test]
    fn independence_edge_cases() {
        assert!(max_independent_chords(&[]).is_empty());
        let cross = [h((1, 0), (1, 2)), v((0, 1), (2, 1))];
        assert_eq!(max_independent_chords(&cross).len(), 1);
        let touching = [h((1, 0), (1, 2)), v((1, 2), (3, 2))];
        assert_eq!(max_independent_chords(&touching).len(), 1);
        let apart = [h((1, 0), (1, 2)), v((2, 3), (4, 3))];
        assert_eq!(max_independent_chords(&apart).len(), 2);
    }

    #[test]
    fn matching_matches_brute_force_on_small_graphs() {
        // all bipartite graphs on 3 + 3 vertices
        for bits in 0u32..(1 << 9) {
            let adj: Vec<Vec<usize>> = (0..3)
                .map(|i| (0..3).filter(|&j| bits >> (i * 3 + j) & 1 == 1).collect())
                .collect();
            let m = maximum_matching(&adj, 3);
            let mut best = 0;
            for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let size = (0..3).filter(|&i| adj[i].contains(&perm[i])).count();
                best = best.max(size);
            }
            assert_eq!(m.size(), best, "graph {bits:09b}");
        }
    }
}
