//! Incremental 3D Delaunay triangulation.
//!
//! Bowyer-Watson insertion over Shewchuk's adaptive-precision `orient3d` and
//! `insphere` predicates. The convex hull is closed with ghost cells that
//! share a single vertex at infinity, so points outside the current hull are
//! inserted without a bounding super-tetrahedron.
//!
//! Conflict rules:
//! - finite cell: the new point lies strictly inside its circumsphere;
//! - ghost cell: the new point lies strictly beyond its hull facet, or on the
//!   facet plane while strictly inside the circumsphere of the finite cell
//!   behind it.
//!
//! With exact predicates these rules never create a zero-volume cell, even on
//! cospherical lattice input.

use std::collections::HashMap;

use robust::Coord3D;

use crate::error::{Error, Result};
use crate::model::{cross, dot, norm, sub, Vec3};

pub(crate) const INF: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

/// Face opposite vertex `k`, ordered so the remaining vertex is on its positive side.
const FACE: [[usize; 3]; 4] = [[1, 3, 2], [0, 2, 3], [0, 3, 1], [0, 1, 2]];

#[derive(Debug, Clone, Copy)]
struct Cell {
    v: [u32; 4],
    /// `n[k]` is the cell across the face opposite `v[k]`.
    n: [u32; 4],
}

impl Cell {
    fn is_ghost(&self) -> bool {
        self.v.contains(&INF)
    }
}

#[inline]
fn c3(p: Vec3) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

#[inline]
fn orient(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    robust::orient3d(c3(a), c3(b), c3(c), c3(d))
}

#[inline]
fn insphere(a: Vec3, b: Vec3, c: Vec3, d: Vec3, e: Vec3) -> f64 {
    robust::insphere(c3(a), c3(b), c3(c), c3(d), c3(e))
}

fn collinear(a: Vec3, b: Vec3, c: Vec3) -> bool {
    let o = |i: usize, j: usize| {
        robust::orient2d(
            robust::Coord { x: a[i], y: a[j] },
            robust::Coord { x: b[i], y: b[j] },
            robust::Coord { x: c[i], y: c[j] },
        )
    };
    o(0, 1) == 0.0 && o(1, 2) == 0.0 && o(0, 2) == 0.0
}

/// Interleave the top 21 bits of three quantised coordinates.
fn morton_key(p: Vec3, lo: Vec3, inv: f64) -> u64 {
    fn spread(mut x: u64) -> u64 {
        x &= 0x1f_ffff;
        x = (x | x << 32) & 0x1f00000000ffff;
        x = (x | x << 16) & 0x1f0000ff0000ff;
        x = (x | x << 8) & 0x100f00f00f00f00f;
        x = (x | x << 4) & 0x10c30c30c30c30c3;
        x = (x | x << 2) & 0x1249249249249249;
        x
    }
    let q = |k: usize| (((p[k] - lo[k]) * inv).clamp(0.0, 1.0) * 2_097_151.0) as u64;
    spread(q(0)) | spread(q(1)) << 1 | spread(q(2)) << 2
}

#[derive(Debug, Clone)]
pub struct Delaunay {
    points: Vec<Vec3>,
    cells: Vec<Cell>,
    alive: Vec<bool>,
    free: Vec<u32>,
    /// For exact duplicates, the index of the first occurrence.
    representative: Vec<usize>,
    last: u32,
    // scratch for conflict search
    stamp: Vec<u32>,
    state: Vec<bool>,
    epoch: u32,
    walk_rng: u64,
}

impl Delaunay {
    /// Triangulate `points`. Fails when fewer than four distinct points exist or
    /// when all of them are coplanar.
    pub fn new(points: &[Vec3]) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::Degenerate(format!(
                "a 3D triangulation needs at least 4 points, got {}; use the convexHull or numNeigh surface algorithm",
                points.len()
            )));
        }
        let mut representative: Vec<usize> = (0..points.len()).collect();
        let mut seen: HashMap<[u64; 3], usize> = HashMap::new();
        let mut distinct = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
            match seen.get(&key) {
                Some(&first) => representative[i] = first,
                None => {
                    seen.insert(key, i);
                    distinct.push(i);
                }
            }
        }

        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        let inv = if span > 0.0 { 1.0 / span } else { 1.0 };
        distinct.sort_by_key(|&i| (morton_key(points[i], lo, inv), i));

        let seed = Self::initial_simplex(points, &distinct)?;

        let mut dt = Delaunay {
            points: points.to_vec(),
            cells: Vec::new(),
            alive: Vec::new(),
            free: Vec::new(),
            representative,
            last: 0,
            stamp: Vec::new(),
            state: Vec::new(),
            epoch: 0,
            walk_rng: 0x9e37_79b9_7f4a_7c15,
        };
        dt.build_seed(seed);
        for &i in &distinct {
            if seed.contains(&i) {
                continue;
            }
            dt.insert(i)?;
        }
        Ok(dt)
    }

    fn initial_simplex(points: &[Vec3], order: &[usize]) -> Result<[usize; 4]> {
        let degenerate = || {
            Error::Degenerate(
                "all points are coplanar; use the convexHull or numNeigh surface algorithm".into(),
            )
        };
        let a = *order.first().ok_or_else(degenerate)?;
        let b = *order.get(1).ok_or_else(degenerate)?;
        let c = *order
            .iter()
            .find(|&&c| !collinear(points[a], points[b], points[c]))
            .ok_or_else(degenerate)?;
        let d = *order
            .iter()
            .find(|&&d| orient(points[a], points[b], points[c], points[d]) != 0.0)
            .ok_or_else(degenerate)?;
        Ok([a, b, c, d])
    }

    fn alloc(&mut self, cell: Cell) -> u32 {
        if let Some(id) = self.free.pop() {
            self.cells[id as usize] = cell;
            self.alive[id as usize] = true;
            id
        } else {
            self.cells.push(cell);
            self.alive.push(true);
            self.stamp.push(0);
            self.state.push(false);
            (self.cells.len() - 1) as u32
        }
    }

    fn build_seed(&mut self, seed: [usize; 4]) {
        let [a, b, c, d] = seed.map(|i| i as u32);
        let mut v = [a, b, c, d];
        if orient(self.pt(a), self.pt(b), self.pt(c), self.pt(d)) < 0.0 {
            v.swap(0, 1);
        }
        let t = self.alloc(Cell { v, n: [NONE; 4] });
        // Ghost across face k: the face reversed, plus infinity.
        let mut ghosts = [0u32; 4];
        for k in 0..4 {
            let f = FACE[k];
            let g = Cell {
                v: [v[f[0]], v[f[2]], v[f[1]], INF],
                n: [NONE; 4],
            };
            ghosts[k] = self.alloc(g);
        }
        for k in 0..4 {
            self.cells[t as usize].n[k] = ghosts[k];
            self.cells[ghosts[k] as usize].n[3] = t;
        }
        // Ghost-to-ghost adjacency through faces that contain infinity.
        self.link_by_faces(&ghosts);
        self.last = t;
    }

    /// Pair up faces among `ids` that are still unlinked, keyed by vertex set.
    fn link_by_faces(&mut self, ids: &[u32]) {
        let mut open: HashMap<[u32; 3], (u32, usize)> = HashMap::new();
        for &id in ids {
            for k in 0..4 {
                if self.cells[id as usize].n[k] != NONE {
                    continue;
                }
                let mut key = [0u32; 3];
                let mut m = 0;
                for (j, &vj) in self.cells[id as usize].v.iter().enumerate() {
                    if j != k {
                        key[m] = vj;
                        m += 1;
                    }
                }
                key.sort_unstable();
                if let Some((other, ok)) = open.remove(&key) {
                    self.cells[id as usize].n[k] = other;
                    self.cells[other as usize].n[ok] = id;
                } else {
                    open.insert(key, (id, k));
                }
            }
        }
        debug_assert!(open.is_empty(), "unmatched faces in cavity");
    }

    #[inline]
    fn pt(&self, v: u32) -> Vec3 {
        self.points[v as usize]
    }

    fn in_conflict(&self, t: u32, p: Vec3) -> bool {
        let cell = &self.cells[t as usize];
        match cell.v.iter().position(|&v| v == INF) {
            None => {
                let [a, b, c, d] = cell.v.map(|v| self.pt(v));
                insphere(a, b, c, d, p) > 0.0
            }
            Some(k) => {
                let mut q = [p; 4];
                for (j, &v) in cell.v.iter().enumerate() {
                    if j != k {
                        q[j] = self.pt(v);
                    }
                }
                let o = orient(q[0], q[1], q[2], q[3]);
                if o > 0.0 {
                    true
                } else if o < 0.0 {
                    false
                } else {
                    let behind = &self.cells[cell.n[k] as usize];
                    let [a, b, c, d] = behind.v.map(|v| self.pt(v));
                    insphere(a, b, c, d, p) > 0.0
                }
            }
        }
    }

    fn next_rand(&mut self) -> usize {
        let mut x = self.walk_rng;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.walk_rng = x;
        x as usize
    }

    /// Visibility walk towards `p`; returns a finite cell containing `p` or a
    /// ghost cell whose facet sees `p`.
    fn locate(&mut self, p: Vec3) -> Option<u32> {
        let mut t = self.last;
        if !self.alive[t as usize] {
            t = self.alive.iter().position(|&a| a)? as u32;
        }
        let max_steps = 4 * self.cells.len() + 64;
        'walk: for _ in 0..max_steps {
            let cell = self.cells[t as usize];
            if cell.is_ghost() {
                return Some(t);
            }
            let start = self.next_rand() % 4;
            for r in 0..4 {
                let k = (start + r) % 4;
                let f = FACE[k];
                let o = orient(
                    self.pt(cell.v[f[0]]),
                    self.pt(cell.v[f[1]]),
                    self.pt(cell.v[f[2]]),
                    p,
                );
                if o < 0.0 {
                    t = cell.n[k];
                    continue 'walk;
                }
            }
            return Some(t);
        }
        None
    }

    fn insert(&mut self, pi: usize) -> Result<()> {
        let p = self.points[pi];
        let start = match self.locate(p) {
            Some(t) if self.in_conflict(t, p) => t,
            _ => (0..self.cells.len() as u32)
                .find(|&t| self.alive[t as usize] && self.in_conflict(t, p))
                .ok_or_else(|| Error::Numeric(format!("no conflict cell for point {pi}")))?,
        };

        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.stamp[start as usize] = epoch;
        self.state[start as usize] = true;

        let mut conflict = vec![start];
        let mut boundary: Vec<(u32, usize)> = Vec::new();
        let mut head = 0;
        while head < conflict.len() {
            let t = conflict[head];
            head += 1;
            for k in 0..4 {
                let nb = self.cells[t as usize].n[k];
                let nbu = nb as usize;
                if self.stamp[nbu] != epoch {
                    self.stamp[nbu] = epoch;
                    self.state[nbu] = self.in_conflict(nb, p);
                    if self.state[nbu] {
                        conflict.push(nb);
                    }
                }
                if !self.state[nbu] {
                    boundary.push((t, k));
                }
            }
        }

        // Outside neighbours and their back-pointer slots, captured before reuse.
        let links: Vec<(Cell, usize, u32, usize)> = boundary
            .iter()
            .map(|&(t, k)| {
                let cell = self.cells[t as usize];
                let outside = cell.n[k];
                let back = self.cells[outside as usize]
                    .n
                    .iter()
                    .position(|&x| x == t)
                    .expect("adjacency is symmetric");
                (cell, k, outside, back)
            })
            .collect();

        for &t in &conflict {
            self.alive[t as usize] = false;
            self.free.push(t);
        }

        let mut created = Vec::with_capacity(links.len());
        for (cell, k, outside, back) in links {
            let mut v = cell.v;
            v[k] = pi as u32;
            let mut n = [NONE; 4];
            n[k] = outside;
            let id = self.alloc(Cell { v, n });
            self.cells[outside as usize].n[back] = id;
            created.push(id);
        }
        self.link_by_faces(&created);
        self.last = *created
            .iter()
            .find(|&&id| !self.cells[id as usize].is_ghost())
            .unwrap_or(&created[0]);
        Ok(())
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Index of the first input point with exactly the same coordinates.
    pub fn representative(&self, i: usize) -> usize {
        self.representative[i]
    }

    fn live(&self) -> impl Iterator<Item = (u32, &Cell)> {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(i, _)| self.alive[*i])
            .map(|(i, c)| (i as u32, c))
    }

    /// Finite tetrahedra as vertex index quadruples (positively oriented).
    pub fn tetrahedra(&self) -> Vec<[usize; 4]> {
        self.live()
            .filter(|(_, c)| !c.is_ghost())
            .map(|(_, c)| c.v.map(|v| v as usize))
            .collect()
    }

    /// Triangles of the convex hull.
    pub fn hull_facets(&self) -> Vec<[usize; 3]> {
        self.live()
            .filter(|(_, c)| c.is_ghost())
            .map(|(_, c)| {
                let mut f = [0usize; 3];
                let mut m = 0;
                for &v in &c.v {
                    if v != INF {
                        f[m] = v as usize;
                        m += 1;
                    }
                }
                f
            })
            .collect()
    }

    /// Flags for every input point lying on the convex hull boundary,
    /// including points interior to flat hull facets.
    pub fn hull_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.points.len()];
        for f in self.hull_facets() {
            for v in f {
                flags[v] = true;
            }
        }
        self.propagate_to_duplicates(&mut flags);
        flags
    }

    fn propagate_to_duplicates(&self, flags: &mut [bool]) {
        for i in 0..flags.len() {
            let r = self.representative[i];
            if r != i {
                flags[i] = flags[r];
            }
        }
    }

    /// Flags for points on the boundary of the alpha complex: tetrahedra with
    /// circumradius strictly below `alpha` are kept, and every vertex of a kept
    /// tetrahedron's face that borders the exterior or a discarded tetrahedron
    /// is flagged. Vertices belonging to no kept tetrahedron are exposed and are
    /// flagged as well.
    pub fn alpha_boundary_flags(&self, alpha: f64) -> Vec<bool> {
        let kept: Vec<bool> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                self.alive[i] && !c.is_ghost() && self.circumradius(c.v.map(|v| v as usize)) < alpha
            })
            .collect();
        let mut flags = vec![false; self.points.len()];
        let mut covered = vec![false; self.points.len()];
        for (i, c) in self.cells.iter().enumerate() {
            if !kept[i] {
                continue;
            }
            for &v in &c.v {
                covered[v as usize] = true;
            }
            for k in 0..4 {
                if !kept[c.n[k] as usize] {
                    for &j in &FACE[k] {
                        flags[c.v[j] as usize] = true;
                    }
                }
            }
        }
        for i in 0..flags.len() {
            if self.representative[i] == i && !covered[i] {
                flags[i] = true;
            }
        }
        self.propagate_to_duplicates(&mut flags);
        flags
    }

    pub fn circumradius(&self, t: [usize; 4]) -> f64 {
        circumradius(
            self.points[t[0]],
            self.points[t[1]],
            self.points[t[2]],
            self.points[t[3]],
        )
    }

    /// Check structural and Delaunay invariants. Intended for tests.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (id, c) in self.live() {
            for k in 0..4 {
                let nb = c.n[k];
                if nb == NONE || !self.alive[nb as usize] {
                    return Err(format!("cell {id} has dangling neighbour {k}"));
                }
                if !self.cells[nb as usize].n.contains(&id) {
                    return Err(format!("adjacency {id}->{nb} not symmetric"));
                }
            }
            if !c.is_ghost() {
                let [a, b, cc, d] = c.v.map(|v| self.pt(v));
                if orient(a, b, cc, d) <= 0.0 {
                    return Err(format!("cell {id} not positively oriented"));
                }
            }
        }
        Ok(())
    }

    /// Brute-force empty-sphere check over all inserted points.
    pub fn check_empty_spheres(&self) -> std::result::Result<(), String> {
        for t in self.tetrahedra() {
            let [a, b, c, d] = t.map(|i| self.points[i]);
            for (i, &p) in self.points.iter().enumerate() {
                if self.representative[i] != i || t.contains(&i) {
                    continue;
                }
                if insphere(a, b, c, d, p) > 0.0 {
                    return Err(format!("point {i} inside circumsphere of {t:?}"));
                }
            }
        }
        Ok(())
    }
}

/// Circumradius of a tetrahedron; infinite for a flat one.
pub fn circumradius(p0: Vec3, p1: Vec3, p2: Vec3, p3: Vec3) -> f64 {
    let a = sub(p1, p0);
    let b = sub(p2, p0);
    let c = sub(p3, p0);
    let det = dot(a, cross(b, c));
    if det == 0.0 {
        return f64::INFINITY;
    }
    let bc = cross(b, c);
    let ca = cross(c, a);
    let ab = cross(a, b);
    let (aa, bb, cc) = (dot(a, a), dot(b, b), dot(c, c));
    let num = [
        aa * bc[0] + bb * ca[0] + cc * ab[0],
        aa * bc[1] + bb * ca[1] + cc * ab[1],
        aa * bc[2] + bb * ca[2] + cc * ab[2],
    ];
    norm(num) / (2.0 * det.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(seed: u64, n: usize) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect()
    }

    /// Volume of the convex hull via the divergence theorem over hull facets.
    fn hull_volume(dt: &Delaunay) -> f64 {
        dt.tetrahedra()
            .iter()
            .map(|t| {
                let [a, b, c, d] = t.map(|i| dt.points()[i]);
                dot(sub(b, a), cross(sub(c, a), sub(d, a))).abs() / 6.0
            })
            .sum()
    }

    #[test]
    fn regular_tetrahedron() {
        let pts = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        let dt = Delaunay::new(&pts).unwrap();
        assert_eq!(dt.tetrahedra().len(), 1);
        assert_eq!(dt.hull_facets().len(), 4);
        assert!((dt.circumradius(dt.tetrahedra()[0]) - 3f64.sqrt()).abs() < 1e-12);
        dt.validate().unwrap();
    }

    #[test]
    fn random_clouds_are_delaunay() {
        for seed in 0..5 {
            let pts = random_cloud(seed, 150);
            let dt = Delaunay::new(&pts).unwrap();
            dt.validate().unwrap();
            dt.check_empty_spheres().unwrap();
        }
    }

    #[test]
    fn cube_lattice_is_valid_and_fills_volume() {
        // Cospherical and coplanar everywhere.
        let mut pts = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    pts.push([i as f64, j as f64, k as f64]);
                }
            }
        }
        let dt = Delaunay::new(&pts).unwrap();
        dt.validate().unwrap();
        dt.check_empty_spheres().unwrap();
        assert!((hull_volume(&dt) - 27.0).abs() < 1e-9);
        assert!(dt.hull_flags().iter().filter(|&&f| f).count() == 64 - 8);
    }

    #[test]
    fn duplicates_share_flags() {
        let mut pts = random_cloud(3, 30);
        pts.push(pts[0]);
        pts.push(pts[5]);
        let dt = Delaunay::new(&pts).unwrap();
        dt.validate().unwrap();
        let hull = dt.hull_flags();
        assert_eq!(hull[30], hull[0]);
        assert_eq!(hull[31], hull[5]);
    }

    #[test]
    fn coplanar_and_small_inputs_rejected() {
        assert!(matches!(
            Delaunay::new(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
            Err(Error::Degenerate(_))
        ));
        let flat: Vec<Vec3> = (0..20).map(|i| [i as f64, (i * i % 7) as f64, 0.0]).collect();
        assert!(matches!(Delaunay::new(&flat), Err(Error::Degenerate(_))));
        let line: Vec<Vec3> = (0..6).map(|i| [i as f64, 2.0 * i as f64, 0.5 * i as f64]).collect();
        assert!(matches!(Delaunay::new(&line), Err(Error::Degenerate(_))));
    }

    #[test]
    fn circumradius_of_flat_is_infinite() {
        assert!(circumradius([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]).is_infinite());
    }
}
