//! Deterministic validation structures: FCC nanoparticles and Menger sponges.

use std::fmt;
use std::str::FromStr;

use crate::bitgrid::BinaryGrid;
use crate::error::{Error, Result};
use crate::model::{Atom, Structure};
use crate::radii::{RadiiTable, RadiusType};

pub const PD_LATTICE_CONSTANT: f64 = 3.89;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    SingleAtom,
    FccOctahedron,
    FccCube,
    FccTetrahedron,
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" | "singleAtom" => Ok(ShapeKind::SingleAtom),
            "octahedron" | "fccOctahedron" => Ok(ShapeKind::FccOctahedron),
            "cube" | "fccCube" => Ok(ShapeKind::FccCube),
            "tetrahedron" | "fccTetrahedron" => Ok(ShapeKind::FccTetrahedron),
            other => Err(Error::param(format!(
                "shape must be single, octahedron, cube or tetrahedron; got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeKind::SingleAtom => "single",
            ShapeKind::FccOctahedron => "octahedron",
            ShapeKind::FccCube => "cube",
            ShapeKind::FccTetrahedron => "tetrahedron",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub element: String,
    pub lattice_constant: f64,
    /// Octahedron: atoms along an edge. Cube: conventional cells per edge.
    /// Tetrahedron: atoms along an edge.
    pub order: usize,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, element: &str, order: usize) -> Self {
        ShapeSpec {
            kind,
            element: element.to_string(),
            lattice_constant: PD_LATTICE_CONSTANT,
            order,
        }
    }

    pub fn pd(kind: ShapeKind, order: usize) -> Self {
        Self::new(kind, "Pd", order)
    }
}

/// FCC sites in units of half the lattice constant, lexicographically ordered.
pub fn lattice_sites(kind: ShapeKind, order: usize) -> Result<Vec<[i64; 3]>> {
    if order == 0 {
        return Err(Error::param("shape order must be at least 1"));
    }
    let n = order as i64;
    let mut out = Vec::new();
    match kind {
        ShapeKind::SingleAtom => out.push([0, 0, 0]),
        ShapeKind::FccOctahedron => {
            let m = n - 1;
            for i in -m..=m {
                for j in -m..=m {
                    for k in -m..=m {
                        if i.abs() + j.abs() + k.abs() <= m && (i + j + k - m).rem_euclid(2) == 0 {
                            out.push([i, j, k]);
                        }
                    }
                }
            }
        }
        ShapeKind::FccCube => {
            for i in 0..=2 * n {
                for j in 0..=2 * n {
                    for k in 0..=2 * n {
                        if (i + j + k) % 2 == 0 {
                            out.push([i - n, j - n, k - n]);
                        }
                    }
                }
            }
        }
        ShapeKind::FccTetrahedron => {
            let l = n - 1;
            for i in 0..=l {
                for j in 0..=l {
                    for k in 0..=l {
                        let inside = i + j + k <= 2 * l && -i + j + k >= 0 && i - j + k >= 0 && i + j - k >= 0;
                        if inside && (i + j + k) % 2 == 0 {
                            out.push([i, j, k]);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Carve the requested particle from an FCC lattice.
pub fn generate_structure(spec: &ShapeSpec, rad_type: RadiusType) -> Result<Structure> {
    if !(spec.lattice_constant > 0.0 && spec.lattice_constant.is_finite()) {
        return Err(Error::param("lattice constant must be positive"));
    }
    let radius = RadiiTable.radius(&spec.element, rad_type)?;
    let half = spec.lattice_constant / 2.0;
    let atoms = lattice_sites(spec.kind, spec.order)?
        .into_iter()
        .map(|s| Atom::new(spec.element.clone(), s.map(|c| c as f64 * half), radius))
        .collect::<Result<Vec<_>>>()?;
    Structure::new(atoms)
}

#[inline]
fn in_menger(mut x: usize, mut y: usize, mut z: usize) -> bool {
    while x > 0 || y > 0 || z > 0 {
        let ones = (x % 3 == 1) as u8 + (y % 3 == 1) as u8 + (z % 3 == 1) as u8;
        if ones >= 2 {
            return false;
        }
        x /= 3;
        y /= 3;
        z /= 3;
    }
    true
}

/// Menger sponge of the given level on a `3^level` grid.
pub fn menger_sponge_grid(level: u32) -> Result<BinaryGrid> {
    if level > 5 {
        return Err(Error::param(format!("Menger level must be in 0..=5, got {level}")));
    }
    let n = 3usize.pow(level);
    let mut g = BinaryGrid::new(n)?;
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                if in_menger(x, y, z) {
                    g.set(x, y, z);
                }
            }
        }
    }
    Ok(g)
}
