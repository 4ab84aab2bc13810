//! Reading and writing single-frame XYZ coordinate files.
//!
//! ```text
//! <number of atoms>
//! <comment>
//! <element> <x> <y> <z> [ignored columns...]
//! ```
//!
//! Lengths are in Å.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Atom, Structure};
use crate::radii::{RadiiTable, RadiusType};

/// One parsed coordinate record, before radii are assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct XyzRecord {
    pub element: String,
    pub position: [f64; 3],
}

/// Parse XYZ text into raw records.
pub fn parse_records(content: &str) -> Result<Vec<XyzRecord>> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing atom-count header".into(),
    })?;
    let declared: usize = header.trim().parse().map_err(|_| Error::Parse {
        line: 1,
        message: format!("expected atom count, got '{}'", header.trim()),
    })?;
    if lines.next().is_none() {
        return Err(Error::Parse {
            line: 2,
            message: "missing comment line".into(),
        });
    }

    let mut records = Vec::with_capacity(declared);
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if records.len() == declared {
            return Err(Error::Parse {
                line: lineno,
                message: format!("header declares {declared} atoms but more coordinate lines follow"),
            });
        }
        let mut cols = line.split_whitespace();
        let element = cols.next().unwrap_or_default().to_string();
        let mut position = [0.0; 3];
        for (k, name) in ["x", "y", "z"].iter().enumerate() {
            let tok = cols.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected 'element x y z', got '{line}'"),
            })?;
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid {name} coordinate '{tok}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite {name} coordinate"),
                });
            }
            position[k] = v;
        }
        records.push(XyzRecord { element, position });
    }

    if records.len() != declared {
        return Err(Error::Parse {
            line: 1,
            message: format!("header declares {declared} atoms but found {}", records.len()),
        });
    }
    Ok(records)
}

/// Parse XYZ text and assign radii.
pub fn parse_xyz(content: &str, rad_type: RadiusType) -> Result<Structure> {
    let table = RadiiTable;
    let atoms = parse_records(content)?
        .into_iter()
        .map(|r| {
            let radius = table.radius(&r.element, rad_type)?;
            Atom::new(r.element, r.position, radius)
        })
        .collect::<Result<Vec<_>>>()?;
    if atoms.is_empty() {
        return Err(Error::Empty("XYZ file contains no atoms"));
    }
    Structure::new(atoms)
}

/// Load a structure from an XYZ file.
pub fn load_xyz(path: impl AsRef<Path>, rad_type: RadiusType) -> Result<Structure> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_xyz(&content, rad_type)
}

/// Format labelled points as XYZ text.
pub fn format_points<'a, I>(comment: &str, points: I) -> String
where
    I: IntoIterator<Item = (&'a str, [f64; 3])>,
{
    let body: Vec<(&str, [f64; 3])> = points.into_iter().collect();
    let mut out = String::with_capacity(32 * (body.len() + 2));
    let _ = writeln!(out, "{}", body.len());
    let _ = writeln!(out, "{}", comment.replace('\n', " "));
    for (label, p) in body {
        let _ = writeln!(out, "{label} {:.10} {:.10} {:.10}", p[0], p[1], p[2]);
    }
    out
}

/// Format a structure as XYZ text.
pub fn format_xyz(structure: &Structure, comment: &str) -> String {
    format_points(
        comment,
        structure.atoms().iter().map(|a| (a.element.as_str(), a.position)),
    )
}

pub fn write_xyz(path: impl AsRef<Path>, structure: &Structure, comment: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_xyz(structure, comment)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_pd_metallic() {
        let s = parse_xyz("1\n\nPd 0.0 0.0 0.0\n", RadiusType::Metallic).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.atoms()[0].position, [0.0; 3]);
        assert_eq!(s.atoms()[0].radius, 1.37);
        assert!(!s.atoms()[0].is_surface);
    }

    #[test]
    fn coincident_atoms_accepted() {
        let s = parse_xyz("2\nc\nPd 0 0 0\nPd 0 0 0\n", RadiusType::Atomic).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn count_mismatch_is_error() {
        let err = parse_xyz("3\n\nPd 0 0 0\nPd 1 0 0\n", RadiusType::Atomic).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_xyz("1\n\nPd 0 0 0\nPd 1 0 0\n", RadiusType::Atomic).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = parse_xyz("2\n\nPd 0 0 0\nPd 1 x 0\n", RadiusType::Atomic).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse_xyz("2\n\nPd 0 0 0\nPd 1 0\n", RadiusType::Atomic).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse_xyz("two\n\n", RadiusType::Atomic).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn unknown_element_named() {
        let err = parse_xyz("1\n\nQq 0 0 0\n", RadiusType::Atomic).unwrap_err();
        match err {
            Error::UnknownElement { symbol } => assert_eq!(symbol, "Qq"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn extra_columns_ignored_and_order_kept() {
        let s = parse_xyz(
            "3\nframe\nC 0 0 0 0.1 foo\nH 1 0 0\nO 0 2 0 9\n",
            RadiusType::Atomic,
        )
        .unwrap();
        let els: Vec<&str> = s.atoms().iter().map(|a| a.element.as_str()).collect();
        assert_eq!(els, ["C", "H", "O"]);
        assert_eq!(s.atoms()[2].position, [0.0, 2.0, 0.0]);
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(
            coords in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3), 1..40),
            elems in prop::collection::vec(prop::sample::select(vec!["H", "C", "N", "O", "P", "Pd", "Au"]), 40),
        ) {
            let atoms: Vec<Atom> = coords
                .iter()
                .zip(&elems)
                .map(|(&(x, y, z), e)| Atom::new(*e, [x, y, z], 1.0).unwrap())
                .collect();
            let s = Structure::new(atoms).unwrap();
            let back = parse_xyz(&format_xyz(&s, "round trip"), RadiusType::Atomic).unwrap();
            prop_assert_eq!(back.len(), s.len());
            for (a, b) in s.atoms().iter().zip(back.atoms()) {
                prop_assert_eq!(&a.element, &b.element);
                for k in 0..3 {
                    prop_assert!((a.position[k] - b.position[k]).abs() <= 1e-9);
                }
            }
        }
    }
}
