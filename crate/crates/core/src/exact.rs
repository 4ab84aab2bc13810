//! Box counting on the exact sphere-union surface.
//!
//! A box of edge `l` is a surface box for atom `i` when its nearest point lies
//! strictly inside the sphere and its farthest point strictly outside. A box
//! lying wholly inside any processed sphere is a bulk box. The count is the
//! number of surface boxes that are not bulk boxes.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::dimension::BoxCountSeries;
use crate::error::{Error, Result};
use crate::model::{Structure, Vec3};
use crate::neighbors::NeighborList;
use crate::surface::{InnerSide, SurfaceFlags};

pub type BoxIndex = [i64; 3];

/// Per-axis nearest and farthest coordinate of `[b_min, b_max]` from `o`.
#[inline]
pub fn near_far_coord(o: f64, b_min: f64, b_max: f64, l: f64) -> (f64, f64) {
    if o < b_min {
        (b_min, b_max)
    } else if o > b_max {
        (b_max, b_min)
    } else if b_max - o < l / 2.0 {
        (o, b_min)
    } else {
        (o, b_max)
    }
}

/// Distances from `c` to the nearest and farthest points of box `j`.
#[inline]
pub fn near_far_dist(c: Vec3, origin: Vec3, l: f64, j: BoxIndex) -> (f64, f64) {
    let mut dn = 0.0;
    let mut df = 0.0;
    for k in 0..3 {
        let b_min = origin[k] + j[k] as f64 * l;
        let (n, f) = near_far_coord(c[k], b_min, b_min + l, l);
        dn += (n - c[k]) * (n - c[k]);
        df += (f - c[k]) * (f - c[k]);
    }
    (dn.sqrt(), df.sqrt())
}

#[inline]
pub fn box_center(origin: Vec3, l: f64, j: BoxIndex) -> Vec3 {
    [0, 1, 2].map(|k| origin[k] + (j[k] as f64 + 0.5) * l)
}

/// Index of the box containing `p`.
#[inline]
pub fn containing_box(origin: Vec3, l: f64, p: Vec3) -> BoxIndex {
    [0, 1, 2].map(|k| ((p[k] - origin[k]) / l).floor() as i64)
}

/// Half-width, in boxes, of the scan window around an atom's box.
#[inline]
pub fn n_scan(radius: f64, l: f64) -> i64 {
    ((radius + l) / l).ceil() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxClassification {
    pub origin: Vec3,
    pub box_len: f64,
    /// Counted boxes, sorted.
    pub surface: Vec<BoxIndex>,
    /// Surface candidates discarded because they are bulk boxes of some atom.
    pub rejected: Vec<BoxIndex>,
}

impl BoxClassification {
    pub fn count(&self) -> u64 {
        self.surface.len() as u64
    }
}

/// Classify boxes of edge `box_len` on a grid anchored at the structure's
/// minimum corner. With `rm_in_surf == false` every atom is processed and the
/// inner-side test is skipped; otherwise only flagged atoms are processed and
/// boxes whose centre is on the inner side of the surface are ignored.
pub fn exact_box_count(
    structure: &Structure,
    neighbors: &NeighborList,
    flags: &SurfaceFlags,
    box_len: f64,
    rm_in_surf: bool,
) -> Result<BoxClassification> {
    let origin = structure.min_xyz();
    exact_box_count_at(structure, neighbors, flags, box_len, rm_in_surf, origin)
}

/// [`exact_box_count`] with an explicit grid origin.
pub fn exact_box_count_at(
    structure: &Structure,
    neighbors: &NeighborList,
    flags: &SurfaceFlags,
    box_len: f64,
    rm_in_surf: bool,
    origin: Vec3,
) -> Result<BoxClassification> {
    if !(box_len > 0.0 && box_len.is_finite()) {
        return Err(Error::param(format!("box length must be positive, got {box_len}")));
    }
    let l = box_len;
    let atoms = structure.atoms();
    let processed: Vec<usize> = (0..atoms.len())
        .filter(|&i| !rm_in_surf || flags.is_surface(i))
        .collect();
    let inner = rm_in_surf.then(|| InnerSide::new(structure, neighbors, flags));
    let outer = |i: usize, p: Vec3| inner.as_ref().map_or(true, |s| !s.is_inner(i, p));

    let mut candidates: Vec<BoxIndex> = processed
        .par_iter()
        .flat_map_iter(|&i| {
            let c = atoms[i].position;
            let r = atoms[i].radius;
            let r2 = r * r;
            let home = containing_box(origin, l, c);
            let n = n_scan(r, l);
            let mut found = Vec::new();
            for jx in home[0] - n..=home[0] + n {
                let bx = origin[0] + jx as f64 * l;
                let (nx, _) = near_far_coord(c[0], bx, bx + l, l);
                let dx = (nx - c[0]) * (nx - c[0]);
                if dx >= r2 {
                    continue;
                }
                for jy in home[1] - n..=home[1] + n {
                    let by = origin[1] + jy as f64 * l;
                    let (ny, _) = near_far_coord(c[1], by, by + l, l);
                    if dx + (ny - c[1]) * (ny - c[1]) >= r2 {
                        continue;
                    }
                    for jz in home[2] - n..=home[2] + n {
                        let j = [jx, jy, jz];
                        let (dn, df) = near_far_dist(c, origin, l, j);
                        if dn < r && r < df && outer(i, box_center(origin, l, j)) {
                            found.push(j);
                        }
                    }
                }
            }
            found
        })
        .collect();
    candidates.par_sort_unstable();
    candidates.dedup();

    // Bulk test: a box is bulk for atom k only if its centre is within R_k.
    let cell = structure.max_radius();
    let mut cells: HashMap<BoxIndex, Vec<usize>> = HashMap::new();
    for &k in &processed {
        cells
            .entry(containing_box(origin, cell, atoms[k].position))
            .or_default()
            .push(k);
    }
    let is_bulk: Vec<bool> = candidates
        .par_iter()
        .map(|&j| {
            let center = box_center(origin, l, j);
            let home = containing_box(origin, cell, center);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(list) = cells.get(&[home[0] + dx, home[1] + dy, home[2] + dz]) else {
                            continue;
                        };
                        for &k in list {
                            let (_, df) = near_far_dist(atoms[k].position, origin, l, j);
                            if df < atoms[k].radius && outer(k, center) {
                                return true;
                            }
                        }
                    }
                }
            }
            false
        })
        .collect();

    let mut surface = Vec::with_capacity(candidates.len());
    let mut rejected = Vec::new();
    for (j, bulk) in candidates.into_iter().zip(is_bulk) {
        if bulk {
            rejected.push(j);
        } else {
            surface.push(j);
        }
    }
    Ok(BoxClassification {
        origin,
        box_len: l,
        surface,
        rejected,
    })
}

/// Geometric box lengths from `max_len_mult × R_max` down to
/// `min_len_mult × R_min`, descending.
pub fn length_schedule(structure: &Structure, min_len_mult: f64, max_len_mult: f64, num_box_len: usize) -> Result<Vec<f64>> {
    if !(min_len_mult > 0.0) {
        return Err(Error::param(format!("minLenMult must be positive, got {min_len_mult}")));
    }
    if num_box_len < 2 {
        return Err(Error::param(format!("numBoxLen must be at least 2, got {num_box_len}")));
    }
    let hi = max_len_mult * structure.max_radius();
    let lo = min_len_mult * structure.min_radius();
    if !(lo < hi) || !hi.is_finite() {
        return Err(Error::param(format!(
            "smallest box length {lo} must be below largest {hi}"
        )));
    }
    let ratio = (lo / hi).ln();
    let last = num_box_len - 1;
    Ok((0..num_box_len)
        .map(|k| {
            if k == 0 {
                hi
            } else if k == last {
                lo
            } else {
                hi * (ratio * k as f64 / last as f64).exp()
            }
        })
        .collect())
}

/// Exact box counts at each length.
pub fn count_series(
    structure: &Structure,
    neighbors: &NeighborList,
    flags: &SurfaceFlags,
    lengths: &[f64],
    rm_in_surf: bool,
) -> Result<(BoxCountSeries, Vec<BoxClassification>)> {
    let classes = lengths
        .iter()
        .map(|&l| exact_box_count(structure, neighbors, flags, l, rm_in_surf))
        .collect::<Result<Vec<_>>>()?;
    let counts = classes.iter().map(BoxClassification::count).collect();
    Ok((BoxCountSeries::new(lengths.to_vec(), counts)?, classes))
}
