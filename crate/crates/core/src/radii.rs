//! Compiled-in atomic and metallic radii (Å).
//!
//! Atomic radii are the calculated radii of Clementi, Raimondi and Reinhardt.
//! Metallic radii are the 12-coordinate values tabulated by Greenwood and
//! Earnshaw; elements without a metallic phase have no metallic entry.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which radius column to read from the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusType {
    #[default]
    Atomic,
    Metallic,
}

impl FromStr for RadiusType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atomic" => Ok(RadiusType::Atomic),
            "metallic" => Ok(RadiusType::Metallic),
            other => Err(Error::param(format!(
                "radius type must be 'atomic' or 'metallic', got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for RadiusType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RadiusType::Atomic => "atomic",
            RadiusType::Metallic => "metallic",
        })
    }
}

/// One row of the radii table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementRadii {
    pub symbol: &'static str,
    pub atomic: f64,
    pub metallic: Option<f64>,
}

const fn row(symbol: &'static str, atomic: f64, metallic: Option<f64>) -> ElementRadii {
    ElementRadii {
        symbol,
        atomic,
        metallic,
    }
}

#[rustfmt::skip]
static TABLE: &[ElementRadii] = &[
    row("H", 0.53, None),       row("He", 0.31, None),
    row("Li", 1.67, Some(1.52)), row("Be", 1.12, Some(1.12)),
    row("B", 0.87, None),       row("C", 0.67, None),
    row("N", 0.56, None),       row("O", 0.48, None),
    row("F", 0.42, None),       row("Ne", 0.38, None),
    row("Na", 1.90, Some(1.86)), row("Mg", 1.45, Some(1.60)),
    row("Al", 1.18, Some(1.43)), row("Si", 1.11, None),
    row("P", 0.98, None),       row("S", 0.88, None),
    row("Cl", 0.79, None),      row("Ar", 0.71, None),
    row("K", 2.43, Some(2.27)),  row("Ca", 1.94, Some(1.97)),
    row("Sc", 1.84, Some(1.62)), row("Ti", 1.76, Some(1.47)),
    row("V", 1.71, Some(1.34)),  row("Cr", 1.66, Some(1.28)),
    row("Mn", 1.61, Some(1.27)), row("Fe", 1.56, Some(1.26)),
    row("Co", 1.52, Some(1.25)), row("Ni", 1.49, Some(1.24)),
    row("Cu", 1.45, Some(1.28)), row("Zn", 1.42, Some(1.37)),
    row("Ga", 1.36, Some(1.35)), row("Ge", 1.25, None),
    row("As", 1.14, None),      row("Se", 1.03, None),
    row("Br", 0.94, None),      row("Kr", 0.88, None),
    row("Rb", 2.65, Some(2.48)), row("Sr", 2.19, Some(2.15)),
    row("Y", 2.12, Some(1.80)),  row("Zr", 2.06, Some(1.60)),
    row("Nb", 1.98, Some(1.46)), row("Mo", 1.90, Some(1.39)),
    row("Tc", 1.83, Some(1.36)), row("Ru", 1.78, Some(1.34)),
    row("Rh", 1.73, Some(1.345)), row("Pd", 1.69, Some(1.37)),
    row("Ag", 1.65, Some(1.44)), row("Cd", 1.61, Some(1.51)),
    row("In", 1.56, Some(1.67)), row("Sn", 1.45, Some(1.58)),
    row("Sb", 1.33, None),      row("Te", 1.23, None),
    row("I", 1.15, None),       row("Xe", 1.08, None),
    row("Cs", 2.98, Some(2.65)), row("Ba", 2.53, Some(2.22)),
    row("Hf", 2.08, Some(1.59)), row("Ta", 2.00, Some(1.46)),
    row("W", 1.93, Some(1.39)),  row("Re", 1.88, Some(1.37)),
    row("Os", 1.85, Some(1.35)), row("Ir", 1.80, Some(1.355)),
    row("Pt", 1.77, Some(1.385)), row("Au", 1.74, Some(1.44)),
    row("Hg", 1.71, Some(1.51)), row("Tl", 1.56, Some(1.70)),
    row("Pb", 1.54, Some(1.75)), row("Bi", 1.43, None),
    row("Po", 1.35, None),      row("At", 1.27, None),
    row("Rn", 1.20, None),
];

/// Read-only view over the embedded radii.
#[derive(Debug, Clone, Copy, Default)]
pub struct RadiiTable;

impl RadiiTable {
    pub fn get(&self, symbol: &str) -> Option<&'static ElementRadii> {
        TABLE.iter().find(|r| r.symbol == symbol)
    }

    pub fn radius(&self, symbol: &str, kind: RadiusType) -> Result<f64> {
        let entry = self.get(symbol).ok_or_else(|| Error::UnknownElement {
            symbol: symbol.to_string(),
        })?;
        match kind {
            RadiusType::Atomic => Ok(entry.atomic),
            RadiusType::Metallic => entry.metallic.ok_or_else(|| Error::MissingRadius {
                symbol: symbol.to_string(),
                kind: "metallic",
            }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &'static ElementRadii> {
        TABLE.iter()
    }
}
