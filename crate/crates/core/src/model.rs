//! Atoms, structures and their bounding boxes.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist2(a: Vec3, b: Vec3) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

#[inline]
pub fn dist(a: Vec3, b: Vec3) -> f64 {
    dist2(a, b).sqrt()
}

/// A sphere with a chemical identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: String,
    pub position: Vec3,
    pub radius: f64,
    pub is_surface: bool,
}

impl Atom {
    pub fn new(element: impl Into<String>, position: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("atom radius must be positive, got {radius}")));
        }
        if position.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("atom position must be finite"));
        }
        Ok(Atom {
            element: element.into(),
            position,
            radius,
            is_surface: false,
        })
    }
}

/// Axis-aligned extent of the atom centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Vec3,
    pub max: Vec3,
    /// Largest axis extent; one atomic diameter when the box is degenerate.
    pub max_range: f64,
}

/// Componentwise extrema of the atom centres.
///
/// When every centre coincides the extent would be zero, so `max_range`
/// falls back to the largest atomic diameter.
pub fn bounding_box(atoms: &[Atom]) -> Result<BoundingBox> {
    let first = atoms.first().ok_or(Error::Empty("bounding box of zero atoms"))?;
    let mut min = first.position;
    let mut max = first.position;
    let mut max_radius = first.radius;
    for a in &atoms[1..] {
        for k in 0..3 {
            min[k] = min[k].min(a.position[k]);
            max[k] = max[k].max(a.position[k]);
        }
        max_radius = max_radius.max(a.radius);
    }
    let extent = (0..3).map(|k| max[k] - min[k]).fold(0.0, f64::max);
    let max_range = if extent > 0.0 { extent } else { 2.0 * max_radius };
    Ok(BoundingBox { min, max, max_range })
}

/// An ordered collection of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    atoms: Vec<Atom>,
    bbox: BoundingBox,
}

impl Structure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let bbox = bounding_box(&atoms)?;
        Ok(Structure { atoms, bbox })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.atoms.iter().map(|a| a.position).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.radius).collect()
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn min_xyz(&self) -> Vec3 {
        self.bbox.min
    }

    pub fn max_xyz(&self) -> Vec3 {
        self.bbox.max
    }

    pub fn max_range(&self) -> f64 {
        self.bbox.max_range
    }

    pub fn min_radius(&self) -> f64 {
        self.atoms.iter().map(|a| a.radius).fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.atoms.iter().map(|a| a.radius).fold(0.0, f64::max)
    }

    /// Copy surface flags onto the atoms.
    pub fn set_surface_flags(&mut self, flags: &[bool]) {
        for (a, &f) in self.atoms.iter_mut().zip(flags) {
            a.is_surface = f;
        }
    }

    /// Rigidly shift every atom.
    pub fn translated(&self, offset: Vec3) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                position: add(a.position, offset),
                ..a.clone()
            })
            .collect();
        Structure::new(atoms).expect("non-empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn atom(p: Vec3) -> Atom {
        Atom::new("Pd", p, 1.37).unwrap()
    }

    #[test]
    fn single_atom_box_is_degenerate() {
        let b = bounding_box(&[atom([1.0, 2.0, 3.0])]).unwrap();
        assert_eq!(b.min, [1.0, 2.0, 3.0]);
        assert_eq!(b.max, [1.0, 2.0, 3.0]);
        assert_eq!(b.max_range, 2.0 * 1.37);
    }

    #[test]
    fn two_atom_extrema() {
        let b = bounding_box(&[atom([0.0, 0.0, 0.0]), atom([2.0, 1.0, 0.0])]).unwrap();
        assert_eq!(b.min, [0.0, 0.0, 0.0]);
        assert_eq!(b.max, [2.0, 1.0, 0.0]);
        assert_eq!(b.max_range, 2.0);
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(bounding_box(&[]), Err(Error::Empty(_))));
        assert!(Structure::new(vec![]).is_err());
    }

    #[test]
    fn random_box_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let atoms: Vec<Atom> = (0..100)
            .map(|_| atom([rng.gen_range(-5.0..5.0), rng.gen_range(-3.0..8.0), rng.gen_range(0.0..1.0)]))
            .collect();
        let b = bounding_box(&atoms).unwrap();
        for k in 0..3 {
            let lo = atoms.iter().map(|a| a.position[k]).fold(f64::INFINITY, f64::min);
            let hi = atoms.iter().map(|a| a.position[k]).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(b.min[k], lo);
            assert_eq!(b.max[k], hi);
        }
        let extent = (0..3).map(|k| b.max[k] - b.min[k]).fold(0.0, f64::max);
        assert_eq!(b.max_range, extent);
    }

    #[test]
    fn invalid_atoms_rejected() {
        assert!(Atom::new("Pd", [0.0; 3], 0.0).is_err());
        assert!(Atom::new("Pd", [f64::NAN, 0.0, 0.0], 1.0).is_err());
    }
}
