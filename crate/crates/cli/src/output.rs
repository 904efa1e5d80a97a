//! CSV and JSON writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ccnode::analysis::SweepTable;
use ccnode::propagator::Trajectory;
use serde_json::Value;

use crate::error::CliError;

/// Twelve significant digits.
pub fn number(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from("time");
    for label in &tr.basis {
        out.push(',');
        out.push_str(&label.to_string());
    }
    out.push_str(",norm\n");
    for ((t, s), n) in tr.times.iter().zip(&tr.states).zip(&tr.norms) {
        out.push_str(&number(*t));
        for p in s.populations() {
            out.push(',');
            out.push_str(&number(p));
        }
        let _ = writeln!(out, ",{}", number(*n));
    }
    out
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out =
        String::from("nu,abs_a,abs_b,phase_a,phase_b,leak,unitarity_defect,peak_intermediate,peak_excited,flagged,error\n");
    for r in &table.rows {
        let cols = [r.nu, r.abs_a, r.abs_b, r.phase_a, r.phase_b, r.leak, r.defect, r.peak_intermediate, r.peak_excited];
        let nums: Vec<String> = cols.iter().map(|&x| number(x)).collect();
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(out, "{},{},{}", nums.join(","), u8::from(r.flagged()), error);
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    write(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ccnode::dynamics::{photon_in_left, NodeModel};
    use ccnode::model::{full_basis, Sector};

    #[test]
    fn numbers_carry_twelve_significant_digits() {
        assert_eq!(number(1.0), "1.00000000000e0");
        assert_eq!(number(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(number(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn single_sample_trajectory_has_header_and_one_row() {
        let tr = Trajectory::constant(full_basis(Sector::SINGLE), photon_in_left(NodeModel::Full), 0.0);
        let csv = trajectory_csv(&tr);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "time,F_l,F_r,F_m,e_l,e_r,norm");
        assert!(csv.ends_with('\n'));
    }
}
