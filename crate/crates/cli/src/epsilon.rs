//! `epsilon`: leakage sweeps over coin parameters.

use std::io::Write;

use privcount_core::mechanisms::{
    rr_epsilon, xyz_epsilon_binary, xyz_epsilon_multi, RrParams, XyzBinaryParams, XyzMultiParams,
};
use privcount_core::Error;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMechanism {
    /// a = pi1, b = pi2
    Rr,
    /// a = pi_s, b = pi_yes
    XyzBinary,
    /// a = pi_s, b = pi_v
    XyzMulti,
}

impl EpsilonMechanism {
    pub const ALL: [EpsilonMechanism; 3] =
        [EpsilonMechanism::Rr, EpsilonMechanism::XyzBinary, EpsilonMechanism::XyzMulti];

    pub fn name(self) -> &'static str {
        match self {
            EpsilonMechanism::Rr => "rr",
            EpsilonMechanism::XyzBinary => "xyz_binary",
            EpsilonMechanism::XyzMulti => "xyz_multi",
        }
    }

    pub fn param_names(self) -> (&'static str, &'static str) {
        match self {
            EpsilonMechanism::Rr => ("pi1", "pi2"),
            EpsilonMechanism::XyzBinary => ("pi_s", "pi_yes"),
            EpsilonMechanism::XyzMulti => ("pi_s", "pi_v"),
        }
    }
}

/// Leakage at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Leakage {
    Finite(f64),
    Infinite,
    Undefined,
}

impl std::fmt::Display for Leakage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Leakage::Finite(e) => write!(f, "{e:.6}"),
            Leakage::Infinite => f.write_str("inf"),
            Leakage::Undefined => f.write_str("undefined"),
        }
    }
}

pub fn leakage(mech: EpsilonMechanism, a: f64, b: f64) -> Leakage {
    let result = match mech {
        EpsilonMechanism::Rr => RrParams::new(a, b).and_then(|p| rr_epsilon(&p)),
        EpsilonMechanism::XyzBinary => XyzBinaryParams::from_sampling(a, b).and_then(|p| xyz_epsilon_binary(&p)),
        EpsilonMechanism::XyzMulti => {
            XyzMultiParams::new(a, b, 2).and_then(|p| xyz_epsilon_multi(&p)).map(|l| l.epsilon)
        }
    };
    match result {
        Ok(e) => Leakage::Finite(e),
        Err(Error::InfiniteLeakage(_)) => Leakage::Infinite,
        Err(_) => Leakage::Undefined,
    }
}

/// `0.05, 0.10, .., 0.95`.
pub fn default_grid() -> Vec<f64> {
    (1..=19).map(|i| f64::from(i) * 0.05).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonRow {
    pub mechanism: EpsilonMechanism,
    pub a: f64,
    pub b: f64,
    pub epsilon: Leakage,
}

pub fn sweep(mechs: &[EpsilonMechanism], a_values: &[f64], b_values: &[f64]) -> Vec<EpsilonRow> {
    let mut rows = Vec::new();
    for &mechanism in mechs {
        for &a in a_values {
            for &b in b_values {
                rows.push(EpsilonRow { mechanism, a, b, epsilon: leakage(mechanism, a, b) });
            }
        }
    }
    rows
}

/// Columns `mechanism,a_name,a,b_name,b,epsilon`.
pub fn write_csv<W: Write>(rows: &[EpsilonRow], out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mechanism", "a_name", "a", "b_name", "b", "epsilon"]).map_err(CliError::abort)?;
    for r in rows {
        let (an, bn) = r.mechanism.param_names();
        w.write_record([
            r.mechanism.name().to_string(),
            an.to_string(),
            format!("{:.4}", r.a),
            bn.to_string(),
            format!("{:.4}", r.b),
            r.epsilon.to_string(),
        ])
        .map_err(CliError::abort)?;
    }
    w.flush().map_err(CliError::abort)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(l: Leakage) -> f64 {
        match l {
            Leakage::Finite(e) => e,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reference_points() {
        assert!((finite(leakage(EpsilonMechanism::Rr, 0.8, 0.2)) - 21f64.ln()).abs() < 1e-12);
        assert!((finite(leakage(EpsilonMechanism::XyzBinary, 0.45, 0.2)) - 3.25f64.ln()).abs() < 1e-12);
        assert_eq!(leakage(EpsilonMechanism::XyzMulti, 0.3, 0.3), Leakage::Undefined);
        assert_eq!(leakage(EpsilonMechanism::XyzMulti, 0.5, 0.2), Leakage::Undefined);
        assert_eq!(leakage(EpsilonMechanism::Rr, 0.8, 0.0), Leakage::Infinite);
        assert_eq!(leakage(EpsilonMechanism::XyzBinary, 0.9, 0.2), Leakage::Undefined);
    }

    #[test]
    fn csv_shape() {
        let rows = sweep(&EpsilonMechanism::ALL, &[0.45], &[0.2, 0.3]);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "mechanism,a_name,a,b_name,b,epsilon");
        assert_eq!(lines[3], "xyz_binary,pi_s,0.4500,pi_yes,0.2000,1.178655");
        assert_eq!(lines[5], "xyz_multi,pi_s,0.4500,pi_v,0.2000,undefined");
    }
}
