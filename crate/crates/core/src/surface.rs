//! Surface-atom detection and inner/outer side classification.

use std::fmt;
use std::str::FromStr;

use crate::delaunay::Delaunay;
use crate::error::{Error, Result};
use crate::model::{add, cross, dist, dot, norm, scale, sub, Structure, Vec3};
use crate::neighbors::NeighborList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurfaceAlgorithm {
    #[default]
    AlphaShape,
    ConvexHull,
    NumNeigh,
}

impl FromStr for SurfaceAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alphaShape" => Ok(SurfaceAlgorithm::AlphaShape),
            "convexHull" => Ok(SurfaceAlgorithm::ConvexHull),
            "numNeigh" => Ok(SurfaceAlgorithm::NumNeigh),
            other => Err(Error::param(format!(
                "surface algorithm must be one of alphaShape, convexHull, numNeigh; got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for SurfaceAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurfaceAlgorithm::AlphaShape => "alphaShape",
            SurfaceAlgorithm::ConvexHull => "convexHull",
            SurfaceAlgorithm::NumNeigh => "numNeigh",
        })
    }
}

pub const DEFAULT_ALPHA_MULT: f64 = 2.0;
pub const DEFAULT_NUM_NEIGH_THRESHOLD: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFlags {
    pub flags: Vec<bool>,
    pub algorithm: SurfaceAlgorithm,
    pub alpha_mult: f64,
    pub num_neigh_threshold: usize,
}

impl SurfaceFlags {
    /// Every atom flagged; used when inner-surface removal is disabled.
    pub fn all(n: usize) -> Self {
        SurfaceFlags {
            flags: vec![true; n],
            algorithm: SurfaceAlgorithm::default(),
            alpha_mult: DEFAULT_ALPHA_MULT,
            num_neigh_threshold: DEFAULT_NUM_NEIGH_THRESHOLD,
        }
    }

    pub fn is_surface(&self, i: usize) -> bool {
        self.flags[i]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.flags.len()).filter(|&i| self.flags[i]).collect()
    }
}

/// Flag surface atoms with the chosen detector.
///
/// `alphaShape` keeps Delaunay tetrahedra whose circumradius is below
/// `alpha_mult * R_min`. `convexHull` flags every centre on the hull boundary.
/// `numNeigh` flags atoms with fewer than `num_neigh_threshold` neighbours.
pub fn find_surface_atoms(
    structure: &Structure,
    neighbors: &NeighborList,
    algorithm: SurfaceAlgorithm,
    alpha_mult: f64,
    num_neigh_threshold: usize,
) -> Result<SurfaceFlags> {
    if structure.is_empty() {
        return Err(Error::Empty("surface detection on zero atoms"));
    }
    let points = structure.positions();
    let flags = match algorithm {
        SurfaceAlgorithm::AlphaShape => {
            if !(alpha_mult > 0.0 && alpha_mult.is_finite()) {
                return Err(Error::param(format!("alphaMult must be positive, got {alpha_mult}")));
            }
            let alpha = alpha_mult * structure.min_radius();
            Delaunay::new(&points)?.alpha_boundary_flags(alpha)
        }
        SurfaceAlgorithm::ConvexHull => match Delaunay::new(&points) {
            Ok(dt) => dt.hull_flags(),
            // Flat or tiny inputs: every centre lies on the (degenerate) hull.
            Err(Error::Degenerate(_)) => vec![true; points.len()],
            Err(e) => return Err(e),
        },
        SurfaceAlgorithm::NumNeigh => neighbors
            .coordination()
            .into_iter()
            .map(|c| c < num_neigh_threshold)
            .collect(),
    };
    Ok(SurfaceFlags {
        flags,
        algorithm,
        alpha_mult,
        num_neigh_threshold,
    })
}

#[derive(Debug, Clone)]
struct SideData {
    /// Mean position of non-surface neighbours.
    inner_mean: Option<Vec3>,
    surface_neighbors: Vec<usize>,
    /// Pairs of surface neighbours that are themselves neighbours, ascending.
    mutual_pairs: Vec<(usize, usize)>,
}

/// Precomputed neighbourhood data for repeated inner-side queries.
#[derive(Debug, Clone)]
pub struct InnerSide<'a> {
    structure: &'a Structure,
    data: Vec<Option<SideData>>,
}

impl<'a> InnerSide<'a> {
    /// Prepare queries for every flagged atom.
    pub fn new(structure: &'a Structure, neighbors: &NeighborList, flags: &SurfaceFlags) -> Self {
        let data = (0..structure.len())
            .map(|i| flags.is_surface(i).then(|| side_data(structure, neighbors, flags, i)))
            .collect();
        InnerSide { structure, data }
    }

    /// Whether `p` lies on the inner side of the surface near atom `atom`.
    pub fn is_inner(&self, atom: usize, p: Vec3) -> bool {
        match &self.data[atom] {
            Some(d) => classify(self.structure, atom, d, p),
            None => false,
        }
    }
}

fn side_data(structure: &Structure, neighbors: &NeighborList, flags: &SurfaceFlags, i: usize) -> SideData {
    let atoms = structure.atoms();
    let mut inner_sum = [0.0; 3];
    let mut inner_count = 0usize;
    let mut surface_neighbors = Vec::new();
    for &j in neighbors.neighbors(i) {
        if flags.is_surface(j) {
            surface_neighbors.push(j);
        } else {
            inner_sum = add(inner_sum, atoms[j].position);
            inner_count += 1;
        }
    }
    let inner_mean = (inner_count > 0).then(|| scale(inner_sum, 1.0 / inner_count as f64));
    let mut mutual_pairs = Vec::new();
    for (a, &j) in surface_neighbors.iter().enumerate() {
        for &k in &surface_neighbors[a + 1..] {
            if neighbors.are_neighbors(j, k) {
                mutual_pairs.push((j, k));
            }
        }
    }
    SideData {
        inner_mean,
        surface_neighbors,
        mutual_pairs,
    }
}

fn classify(structure: &Structure, atom: usize, d: &SideData, p: Vec3) -> bool {
    let Some(q_inner) = d.inner_mean else {
        return false;
    };
    let atoms = structure.atoms();
    let pos = |j: usize| atoms[j].position;

    let pair = if d.mutual_pairs.is_empty() {
        if d.surface_neighbors.len() < 2 {
            return false;
        }
        // Two closest surface neighbours; ties go to the lower index.
        let mut best = [(f64::INFINITY, usize::MAX); 2];
        for &j in &d.surface_neighbors {
            let dj = dist(p, pos(j));
            if dj < best[0].0 {
                best[1] = best[0];
                best[0] = (dj, j);
            } else if dj < best[1].0 {
                best[1] = (dj, j);
            }
        }
        (best[0].1, best[1].1)
    } else {
        let mut best = (f64::INFINITY, d.mutual_pairs[0]);
        for &(j, k) in &d.mutual_pairs {
            let s = dist(p, pos(j)) + dist(p, pos(k));
            if s < best.0 {
                best = (s, (j, k));
            }
        }
        best.1
    };

    let q = pos(atom);
    let a = sub(pos(pair.0), q);
    let b = sub(pos(pair.1), q);
    let n = cross(a, b);
    if norm(n) <= 1e-12 * norm(a) * norm(b) {
        return false;
    }
    let v1 = sub(q_inner, q);
    let v2 = sub(p, q);
    !(dot(n, v1) * dot(n, v2) < 0.0)
}

/// Single-query form of [`InnerSide::is_inner`].
pub fn is_inner_side(
    p: Vec3,
    atom: usize,
    structure: &Structure,
    neighbors: &NeighborList,
    flags: &SurfaceFlags,
) -> bool {
    let d = side_data(structure, neighbors, flags, atom);
    classify(structure, atom, &d, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Atom;
    use crate::neighbors::build_neighbor_list;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn structure(points: &[Vec3], r: f64) -> Structure {
        Structure::new(points.iter().map(|&p| Atom::new("X", p, r).unwrap()).collect()).unwrap()
    }

    /// Atom 0 at the origin, surface neighbours 1 and 2, inner neighbour 3.
    fn example() -> (Structure, NeighborList, SurfaceFlags) {
        let s = structure(
            &[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -2.0]],
            1.0,
        );
        let nl = build_neighbor_list(&s, 1.5).unwrap();
        assert!(nl.are_neighbors(1, 2));
        let mut flags = SurfaceFlags::all(4);
        flags.flags[3] = false;
        (s, nl, flags)
    }

    #[test]
    fn inner_side_hand_example() {
        let (s, nl, flags) = example();
        assert!(!is_inner_side([0.0, 0.0, 1.0], 0, &s, &nl, &flags));
        assert!(is_inner_side([0.0, 0.0, -1.0], 0, &s, &nl, &flags));
        let ctx = InnerSide::new(&s, &nl, &flags);
        assert!(!ctx.is_inner(0, [0.0, 0.0, 1.0]));
        assert!(ctx.is_inner(0, [0.0, 0.0, -1.0]));
    }

    #[test]
    fn no_inner_neighbors_is_outer() {
        let (s, nl, _) = example();
        let flags = SurfaceFlags::all(4);
        assert!(!is_inner_side([0.0, 0.0, -1.0], 0, &s, &nl, &flags));
    }

    #[test]
    fn collinear_pair_is_outer() {
        let s = structure(
            &[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [-2.0, 0.0, 0.0], [0.0, 0.0, -2.0]],
            1.0,
        );
        let nl = build_neighbor_list(&s, 1.1).unwrap();
        let mut flags = SurfaceFlags::all(4);
        flags.flags[3] = false;
        assert!(!is_inner_side([0.0, 0.0, -1.0], 0, &s, &nl, &flags));
    }

    #[test]
    fn regular_tetrahedron_hull() {
        let s = structure(
            &[[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]],
            1.0,
        );
        let nl = build_neighbor_list(&s, 1.2).unwrap();
        let f = find_surface_atoms(&s, &nl, SurfaceAlgorithm::ConvexHull, 2.0, 12).unwrap();
        assert_eq!(f.flags, vec![true; 4]);
    }

    #[test]
    fn alpha_shape_rejects_degenerate() {
        let s = structure(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 1.0);
        let nl = build_neighbor_list(&s, 1.2).unwrap();
        let err = find_surface_atoms(&s, &nl, SurfaceAlgorithm::AlphaShape, 2.0, 12).unwrap_err();
        assert!(err.to_string().contains("convexHull"));
    }

    #[test]
    fn num_neigh_threshold_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec3> = (0..150)
            .map(|_| [rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)])
            .collect();
        let s = structure(&pts, 1.0);
        let nl = build_neighbor_list(&s, 1.2).unwrap();
        let mut prev = vec![false; pts.len()];
        for t in 0..20 {
            let f = find_surface_atoms(&s, &nl, SurfaceAlgorithm::NumNeigh, 2.0, t).unwrap();
            for i in 0..pts.len() {
                assert!(!prev[i] || f.flags[i]);
            }
            prev = f.flags;
        }
    }

    #[test]
    fn swapping_pair_order_does_not_matter() {
        // The sign product is invariant under n -> -n.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut v = || [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let (a, b, v1, v2) = (v(), v(), v(), v());
            let n = cross(a, b);
            let m = cross(b, a);
            assert_eq!(dot(n, v1) * dot(n, v2) < 0.0, dot(m, v1) * dot(m, v2) < 0.0);
        }
    }
}
