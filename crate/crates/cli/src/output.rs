//! File writers. Every write goes through here so I/O errors carry the path.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use longrange::units::hartree_to_cm1;
use serde::Serialize;

use crate::CliError;

pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Io { path: root.to_path_buf(), source })?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable report");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Shortest round-trip representation; `nan` for NaN.
pub fn num(x: f64) -> String {
    if x.is_nan() { "nan".into() } else { format!("{x:e}") }
}

/// Table of energies in both units: `R_au, E1_cm1 … En_cm1, E1_hartree … En_hartree`.
pub fn energy_csv(prefix: &str, radii: &[f64], rows: &[Vec<f64>]) -> String {
    let n = rows.first().map_or(0, Vec::len);
    let mut s = String::from("R_au");
    for unit in ["cm1", "hartree"] {
        for c in 1..=n {
            let _ = write!(s, ",{prefix}{c}_{unit}");
        }
    }
    s.push('\n');
    for (r, row) in radii.iter().zip(rows) {
        s.push_str(&num(*r));
        for e in row {
            s.push(',');
            s.push_str(&num(hartree_to_cm1(*e)));
        }
        for e in row {
            s.push(',');
            s.push_str(&num(*e));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use longrange::units::CM1_PER_HARTREE;

    #[test]
    fn both_units_are_emitted_and_consistent() {
        let csv = energy_csv("E", &[50.0, 40.0], &[vec![-1e-8, 2e-7], vec![-3e-8, 1.9e-7]]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "R_au,E1_cm1,E2_cm1,E1_hartree,E2_hartree");
        for line in &lines[1..] {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            for c in 0..2 {
                let (cm, h) = (v[1 + c], v[3 + c]);
                assert!((cm - h * CM1_PER_HARTREE).abs() <= 1e-12 * cm.abs());
            }
        }
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
