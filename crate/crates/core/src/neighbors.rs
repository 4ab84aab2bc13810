//! Neighbour lists under a radius-scaled cutoff, built with a cell list.
//!
//! Atoms `i` and `j` are neighbours when `|r_i - r_j| <= (R_i + R_j) * rad_mult`.
//! The cell edge is the largest possible cutoff, so every candidate pair sits
//! in the same or an adjacent cell.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{dist, Structure, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    neighbors: Vec<Vec<usize>>,
    bond_lengths: Vec<Vec<f64>>,
    rad_mult: f64,
}

impl NeighborList {
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Centre distances matching `neighbors(i)` element for element.
    pub fn bond_lengths(&self, i: usize) -> &[f64] {
        &self.bond_lengths[i]
    }

    pub fn are_neighbors(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn rad_mult(&self) -> f64 {
        self.rad_mult
    }

    pub fn coordination(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn as_slices(&self) -> &[Vec<usize>] {
        &self.neighbors
    }
}

type CellKey = (i64, i64, i64);

fn cell_of(p: Vec3, origin: Vec3, inv_edge: f64) -> CellKey {
    (
        ((p[0] - origin[0]) * inv_edge).floor() as i64,
        ((p[1] - origin[1]) * inv_edge).floor() as i64,
        ((p[2] - origin[2]) * inv_edge).floor() as i64,
    )
}

/// Build the neighbour list; ordering within each list is ascending by index.
pub fn build_neighbor_list(structure: &Structure, rad_mult: f64) -> Result<NeighborList> {
    if !(rad_mult > 0.0 && rad_mult.is_finite()) {
        return Err(Error::param(format!("radMult must be positive, got {rad_mult}")));
    }
    let atoms = structure.atoms();
    let edge = 2.0 * structure.max_radius() * rad_mult;
    let origin = structure.min_xyz();
    let inv_edge = 1.0 / edge;

    let mut cells: HashMap<CellKey, Vec<usize>> = HashMap::new();
    for (i, a) in atoms.iter().enumerate() {
        cells.entry(cell_of(a.position, origin, inv_edge)).or_default().push(i);
    }

    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..atoms.len())
        .into_par_iter()
        .map(|i| {
            let ai = &atoms[i];
            let (cx, cy, cz) = cell_of(ai.position, origin, inv_edge);
            let mut found: Vec<(usize, f64)> = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = cells.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &j in bucket {
                            if j == i {
                                continue;
                            }
                            let aj = &atoms[j];
                            let d = dist(ai.position, aj.position);
                            if d <= (ai.radius + aj.radius) * rad_mult {
                                found.push((j, d));
                            }
                        }
                    }
                }
            }
            found.sort_by_key(|&(j, _)| j);
            found.into_iter().unzip()
        })
        .collect();

    let (neighbors, bond_lengths) = rows.into_iter().unzip();
    Ok(NeighborList {
        neighbors,
        bond_lengths,
        rad_mult,
    })
}
