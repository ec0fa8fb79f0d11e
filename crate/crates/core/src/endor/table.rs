use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::{fmt_f64, parse_table, render_table, Metadata};
use crate::{Error, Result};

/// One superhyperfine coupling. Frequencies in Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub label: String,
    /// Isotropic part (Hz, non-negative).
    pub a_iso: f64,
    /// Anisotropic part (Hz).
    pub t: f64,
    /// Angle between field and donor–site axis (rad).
    pub theta: f64,
    pub anisotropic: bool,
    /// Set when the extraction could not single out this value.
    pub low_confidence: bool,
}

impl CouplingEntry {
    pub fn isotropic(label: &str, a_iso: f64) -> Self {
        CouplingEntry { label: label.into(), a_iso, t: 0.0, theta: 0.0, anisotropic: false, low_confidence: false }
    }

    pub fn anisotropic(label: &str, a_iso: f64, t: f64, theta: f64) -> Self {
        CouplingEntry { label: label.into(), a_iso, t, theta, anisotropic: true, low_confidence: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CouplingTable {
    pub entries: Vec<CouplingEntry>,
}

const COLUMNS: [&str; 6] = ["label", "a_iso_Hz", "T_Hz", "theta_rad", "anisotropic", "low_confidence"];

impl CouplingTable {
    pub fn new(entries: Vec<CouplingEntry>) -> Result<Self> {
        let t = CouplingTable { entries };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !(e.a_iso >= 0.0 && e.a_iso.is_finite() && e.t.is_finite()) {
                return Err(Error::invalid(format!("coupling '{}' must have finite a_iso >= 0", e.label)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csv(&self, meta: &Metadata) -> String {
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.label.clone(),
                    fmt_f64(e.a_iso),
                    fmt_f64(e.t),
                    fmt_f64(e.theta),
                    e.anisotropic.to_string(),
                    e.low_confidence.to_string(),
                ]
            })
            .collect();
        render_table(meta, &COLUMNS, &rows)
    }

    /// Parse a coupling CSV. Couplings are read from `a_iso_Hz`/`T_Hz` (as
    /// written) or `a_iso_MHz`/`T_MHz` (hand-made tables); only the isotropic
    /// column is required. `label` defaults to the row number and the
    /// remaining columns to isotropic values.
    pub fn from_csv(text: &str, source: &str) -> Result<(Self, Metadata)> {
        let t = parse_table(text, source)?;
        let opt = |name: &str| t.columns.iter().position(|c| c == name);
        let unit = if opt("a_iso_Hz").is_some() { ("Hz", 1.0) } else { ("MHz", 1e6) };
        let a_col = t.column(&format!("a_iso_{}", unit.0))?;
        let (label_col, t_col, theta_col) = (opt("label"), opt(&format!("T_{}", unit.0)), opt("theta_rad"));
        let (aniso_col, low_col) = (opt("anisotropic"), opt("low_confidence"));
        let flag = |row: usize, col: Option<usize>| -> Result<Option<bool>> {
            match col {
                None => Ok(None),
                Some(c) => match t.str_at(row, c)? {
                    "true" | "1" => Ok(Some(true)),
                    "false" | "0" => Ok(Some(false)),
                    other => Err(t.parse_err(row, format!("'{other}' is not a boolean"))),
                },
            }
        };
        let mut entries = Vec::with_capacity(t.rows.len());
        for row in 0..t.rows.len() {
            let a_iso = t.f64_at(row, a_col)? * unit.1;
            if a_iso < 0.0 {
                return Err(t.parse_err(row, "a_iso must be non-negative"));
            }
            let tt = match t_col {
                Some(c) => t.f64_at(row, c)? * unit.1,
                None => 0.0,
            };
            let theta = match theta_col {
                Some(c) => t.f64_at(row, c)?,
                None => 0.0,
            };
            if !(0.0..=std::f64::consts::PI).contains(&theta) {
                return Err(t.parse_err(row, "theta outside [0, π]"));
            }
            entries.push(CouplingEntry {
                label: match label_col {
                    Some(c) => t.str_at(row, c)?.to_string(),
                    None => format!("c{}", row + 1),
                },
                a_iso,
                t: tt,
                theta,
                anisotropic: flag(row, aniso_col)?.unwrap_or(tt != 0.0),
                low_confidence: flag(row, low_col)?.unwrap_or(false),
            });
        }
        Ok((CouplingTable { entries }, t.meta))
    }

    pub fn write_csv(&self, path: &Path, meta: &Metadata) -> Result<()> {
        crate::io::write_text(path, self.to_csv(meta))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<(Self, Metadata)> {
        let text = crate::io::read_text(path)?;
        Self::from_csv(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = CouplingTable::new(vec![
            CouplingEntry::isotropic("A", 1.234567e6),
            CouplingEntry::anisotropic("X1", 2.8e6, 2.4e6, 0.3),
        ])
        .unwrap();
        let text = t.to_csv(&Metadata::new());
        let (back, _) = CouplingTable::from_csv(&text, "mem").unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn minimal_columns_and_errors() {
        let (t, _) = CouplingTable::from_csv("a_iso_MHz\n2.5\n0.4\n", "m").unwrap();
        assert_eq!(t.entries[1].label, "c2");
        assert!(!t.entries[0].anisotropic);
        assert_eq!(t.entries[0].a_iso, 2.5e6);
        match CouplingTable::from_csv("a_iso_MHz\n2.5\n-1\n", "m") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(CouplingTable::new(vec![CouplingEntry::isotropic("x", -1.0)]).is_err());
    }
}
