//! Point-cloud approximation of the sphere-union surface and its voxelisation.

use rayon::prelude::*;

use crate::bitgrid::BinaryGrid;
use crate::dimension::BoxCountSeries;
use crate::error::{Error, Result};
use crate::model::{add, dist2, scale, Structure, Vec3};
use crate::neighbors::NeighborList;
use crate::surface::{InnerSide, SurfaceFlags};

/// `n` near-uniform unit vectors on a golden-angle spiral.
pub fn fibonacci_sphere(n: usize) -> Result<Vec<Vec3>> {
    if n == 0 {
        return Err(Error::param("numPoints must be at least 1"));
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    Ok((0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub owner: Vec<usize>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sample each surface atom's sphere and keep exposed outer points.
///
/// A sample survives when it lies in no neighbour's open ball and, with
/// `rm_in_surf`, is not on the inner side of the surface.
pub fn gen_surface_points(
    structure: &Structure,
    neighbors: &NeighborList,
    flags: &SurfaceFlags,
    num_points: usize,
    rm_in_surf: bool,
) -> Result<PointCloud> {
    let dirs = fibonacci_sphere(num_points)?;
    let atoms = structure.atoms();
    let inner = rm_in_surf.then(|| InnerSide::new(structure, neighbors, flags));
    let per_atom: Vec<Vec<Vec3>> = (0..atoms.len())
        .into_par_iter()
        .map(|i| {
            if !flags.is_surface(i) {
                return Vec::new();
            }
            let a = &atoms[i];
            dirs.iter()
                .map(|&d| add(a.position, scale(d, a.radius)))
                .filter(|&p| {
                    neighbors.neighbors(i).iter().all(|&j| {
                        let b = &atoms[j];
                        dist2(p, b.position) >= b.radius * b.radius
                    })
                })
                .filter(|&p| inner.as_ref().map_or(true, |s| !s.is_inner(i, p)))
                .collect()
        })
        .collect();
    let mut cloud = PointCloud::default();
    for (i, pts) in per_atom.into_iter().enumerate() {
        cloud.owner.extend(std::iter::repeat(i).take(pts.len()));
        cloud.points.extend(pts);
    }
    Ok(cloud)
}

/// Placement of a cubic voxel grid in space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridFrame {
    pub origin: Vec3,
    /// Physical edge of the whole cube, Å.
    pub edge: f64,
    pub grid_num: usize,
}

impl GridFrame {
    /// Cube anchored at the low corner of the spheres' extent, with edge equal
    /// to the largest axis extent of the spheres.
    pub fn for_structure(structure: &Structure, grid_num: usize) -> Result<Self> {
        if grid_num < 2 {
            return Err(Error::param(format!("gridNum must be at least 2, got {grid_num}")));
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for a in structure.atoms() {
            for k in 0..3 {
                lo[k] = lo[k].min(a.position[k] - a.radius);
                hi[k] = hi[k].max(a.position[k] + a.radius);
            }
        }
        let edge = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        Ok(GridFrame {
            origin: lo,
            edge,
            grid_num,
        })
    }

    pub fn voxel_size(&self) -> f64 {
        self.edge / self.grid_num as f64
    }

    #[inline]
    pub fn index(&self, p: Vec3) -> [usize; 3] {
        let n = self.grid_num;
        let f = n as f64 / self.edge;
        [0, 1, 2].map(|k| {
            let v = ((p[k] - self.origin[k]) * f).floor();
            if v <= 0.0 {
                0
            } else {
                (v as usize).min(n - 1)
            }
        })
    }

    pub fn voxel_center(&self, idx: [usize; 3]) -> Vec3 {
        let h = self.voxel_size();
        [0, 1, 2].map(|k| self.origin[k] + (idx[k] as f64 + 0.5) * h)
    }
}

/// Mark every voxel that receives at least one point.
pub fn voxelise(cloud: &PointCloud, frame: &GridFrame) -> Result<BinaryGrid> {
    if frame.grid_num < 2 {
        return Err(Error::param(format!("gridNum must be at least 2, got {}", frame.grid_num)));
    }
    let mut grid = BinaryGrid::new(frame.grid_num)?;
    let mut idx: Vec<[usize; 3]> = cloud.points.par_iter().map(|&p| frame.index(p)).collect();
    idx.par_sort_unstable();
    idx.dedup();
    for [x, y, z] in idx {
        grid.set(x, y, z);
    }
    Ok(grid)
}

/// Powers of two from `grid_num / 2` down to 1 that divide `grid_num`.
pub fn default_scales(grid_num: usize) -> Vec<usize> {
    let mut s = Vec::new();
    let mut k = 1;
    while k <= grid_num / 2 && grid_num % k == 0 {
        s.push(k);
        k *= 2;
    }
    s.reverse();
    s
}

/// Box counts of a voxel grid with lengths in Å (`ε = s × voxel size`).
pub fn count_series(grid: &BinaryGrid, frame: &GridFrame, scales: &[usize]) -> Result<BoxCountSeries> {
    let counts = grid.count_boxes(scales)?;
    let lengths = scales.iter().map(|&s| s as f64 * frame.voxel_size()).collect();
    BoxCountSeries::new(lengths, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{norm, Atom};
    use crate::neighbors::build_neighbor_list;

    #[test]
    fn fibonacci_basic() {
        assert!(fibonacci_sphere(0).is_err());
        let one = fibonacci_sphere(1).unwrap();
        assert!((norm(one[0]) - 1.0).abs() < 1e-12);
        let pts = fibonacci_sphere(300).unwrap();
        for p in &pts {
            assert!((norm(*p) - 1.0).abs() < 1e-12);
        }
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                assert!(dist2(pts[i], pts[j]) > 0.0);
            }
        }
    }

    #[test]
    fn fibonacci_spacing() {
        let n = 10_000;
        let pts = fibonacci_sphere(n).unwrap();
        let ideal = (4.0 * std::f64::consts::PI / n as f64).sqrt();
        let min_angle = pts
            .par_iter()
            .enumerate()
            .map(|(i, a)| {
                pts[i + 1..]
                    .iter()
                    .map(|b| (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0).acos())
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
        assert!(min_angle > 0.5 * ideal, "{min_angle} vs {ideal}");
    }

    fn pair(d: f64, r: f64) -> Structure {
        Structure::new(vec![
            Atom::new("X", [0.0; 3], r).unwrap(),
            Atom::new("X", [d, 0.0, 0.0], r).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn single_atom_keeps_all_points() {
        let s = Structure::new(vec![Atom::new("Pd", [1.0, 2.0, 3.0], 1.37).unwrap()]).unwrap();
        let nl = build_neighbor_list(&s, 1.2).unwrap();
        let c = gen_surface_points(&s, &nl, &SurfaceFlags::all(1), 500, false).unwrap();
        assert_eq!(c.len(), 500);
    }

    #[test]
    fn overlapping_pair_cap_fraction() {
        let r = 1.5;
        let s = pair(r, r);
        let nl = build_neighbor_list(&s, 1.2).unwrap();
        let c = gen_surface_points(&s, &nl, &SurfaceFlags::all(2), 10_000, false).unwrap();
        for owner in 0..2 {
            let kept = c.owner.iter().filter(|&&o| o == owner).count() as f64;
            assert!((kept / 10_000.0 - 0.75).abs() < 0.02, "{kept}");
        }
        for (p, &o) in c.points.iter().zip(&c.owner) {
            let a = &s.atoms()[o];
            assert!((dist2(*p, a.position).sqrt() - a.radius).abs() <= 1e-9 * a.radius);
            for b in s.atoms() {
                assert!(dist2(*p, b.position) >= b.radius * b.radius * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn voxel_corner_mapping() {
        let frame = GridFrame {
            origin: [0.0; 3],
            edge: 4.0,
            grid_num: 8,
        };
        let lo = PointCloud {
            points: vec![[0.0; 3]],
            owner: vec![0],
        };
        let g = voxelise(&lo, &frame).unwrap();
        assert!(g.get(0, 0, 0));
        assert_eq!(g.count_ones(), 1);
        let hi = PointCloud {
            points: vec![[4.0; 3]],
            owner: vec![0],
        };
        let g = voxelise(&hi, &frame).unwrap();
        assert!(g.get(7, 7, 7));
    }

    #[test]
    fn scales_schedule() {
        assert_eq!(default_scales(1024).len(), 10);
        assert_eq!(default_scales(16), vec![8, 4, 2, 1]);
        assert_eq!(default_scales(12), vec![4, 2, 1]);
        assert_eq!(default_scales(81), vec![1]);
    }
}
