//! XYZ-style dumps of intermediate geometry for visual inspection.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::exact::{box_center, BoxClassification};
use crate::model::Structure;
use crate::pipeline::Artifacts;
use crate::xyz::format_points;

fn write(path: PathBuf, text: String) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Surface-flagged atoms only.
pub fn surface_atoms_xyz(structure: &Structure, flags: &[bool]) -> String {
    format_points(
        "surface atoms",
        structure
            .atoms()
            .iter()
            .zip(flags)
            .filter(|(_, &f)| f)
            .map(|(a, _)| (a.element.as_str(), a.position)),
    )
}

/// Exact-surface boxes as centres tagged `kept` or `rejected`.
pub fn boxes_xyz(c: &BoxClassification) -> String {
    let kept = c.surface.iter().map(|&j| ("kept", box_center(c.origin, c.box_len, j)));
    let rejected = c.rejected.iter().map(|&j| ("rejected", box_center(c.origin, c.box_len, j)));
    format_points(&format!("box length {}", c.box_len), kept.chain(rejected))
}

/// Write every available dump into `dir`.
pub fn write_dumps(
    dir: &Path,
    structure: &Structure,
    art: &Artifacts,
    surface: bool,
    points: bool,
    voxels: bool,
    boxes: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    if surface {
        if let Some(f) = &art.flags {
            out.push(write(dir.join("surface_atoms.xyz"), surface_atoms_xyz(structure, &f.flags))?);
        }
    }
    if points {
        if let Some(c) = &art.cloud {
            let atoms = structure.atoms();
            let text = format_points(
                "surface points",
                c.points.iter().zip(&c.owner).map(|(&p, &o)| (atoms[o].element.as_str(), p)),
            );
            out.push(write(dir.join("surface_points.xyz"), text)?);
        }
    }
    if voxels {
        if let Some((grid, frame)) = &art.grid {
            let text = format_points(
                &format!("occupied voxels, edge {}", frame.voxel_size()),
                grid.occupied().into_iter().map(|i| ("V", frame.voxel_center(i))),
            );
            out.push(write(dir.join("voxels.xyz"), text)?);
        }
    }
    if boxes {
        for (k, c) in art.boxes.iter().enumerate() {
            out.push(write(dir.join(format!("boxes_{k:02}.xyz")), boxes_xyz(c))?);
        }
    }
    Ok(out)
}
