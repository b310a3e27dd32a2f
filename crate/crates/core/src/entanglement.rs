//! Coincidence experiments and the CHSH form of Bell's inequality.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Allowed deviation of a table's total from 1. Printed tables are rounded
/// to three decimals.
pub const NORMALIZATION_SLACK: f64 = 0.002;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntanglementError {
    #[error("table {label}: probability {value} is outside [0, 1]")]
    OutOfRange { label: String, value: f64 },
    #[error("table {label}: probabilities sum to {sum}, deficit {deficit} exceeds the normalization slack")]
    NotNormalized { label: String, sum: f64, deficit: f64 },
    #[error("table {label}: counts sum to zero")]
    EmptyCounts { label: String },
}

/// Joint outcome probabilities in the order (1,1), (1,2), (2,1), (2,2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceTable {
    pub label: String,
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
    pub outcome_names: [String; 4],
}

fn default_names() -> [String; 4] {
    ["11", "12", "21", "22"].map(String::from)
}

impl CoincidenceTable {
    pub fn new(label: impl Into<String>, p: [f64; 4]) -> Result<Self, EntanglementError> {
        let table = Self {
            label: label.into(),
            p11: p[0],
            p12: p[1],
            p21: p[2],
            p22: p[3],
            outcome_names: default_names(),
        };
        table.validate()?;
        Ok(table)
    }

    /// Probabilities are the exact count ratios.
    pub fn from_counts(label: impl Into<String>, counts: [u64; 4]) -> Result<Self, EntanglementError> {
        let label = label.into();
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(EntanglementError::EmptyCounts { label });
        }
        let t = total as f64;
        Self::new(label, counts.map(|c| c as f64 / t))
    }

    pub fn with_outcome_names(mut self, names: [String; 4]) -> Self {
        self.outcome_names = names;
        self
    }

    pub fn probabilities(&self) -> [f64; 4] {
        [self.p11, self.p12, self.p21, self.p22]
    }

    pub fn total(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    pub fn validate(&self) -> Result<(), EntanglementError> {
        for value in self.probabilities() {
            if !(0.0..=1.0).contains(&value) {
                return Err(EntanglementError::OutOfRange {
                    label: self.label.clone(),
                    value,
                });
            }
        }
        let sum = self.total();
        let deficit = 1.0 - sum;
        if deficit.abs() > NORMALIZATION_SLACK {
            return Err(EntanglementError::NotNormalized {
                label: self.label.clone(),
                sum,
                deficit,
            });
        }
        Ok(())
    }

    /// Relabels outcomes 1 ↔ 2 on both sides.
    pub fn flipped(&self) -> Self {
        Self {
            label: self.label.clone(),
            p11: self.p22,
            p12: self.p21,
            p21: self.p12,
            p22: self.p11,
            outcome_names: [
                self.outcome_names[3].clone(),
                self.outcome_names[2].clone(),
                self.outcome_names[1].clone(),
                self.outcome_names[0].clone(),
            ],
        }
    }
}

/// `E = p11 + p22 − p21 − p12`.
pub fn expectation_value(t: &CoincidenceTable) -> Result<f64, EntanglementError> {
    t.validate()?;
    Ok(t.p11 + t.p22 - t.p21 - t.p12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChshClass {
    Classical,
    QuantumViolation,
    BeyondQuantum,
}

impl ChshClass {
    pub fn of(s: f64) -> Self {
        let a = s.abs();
        if a <= 2.0 {
            Self::Classical
        } else if a <= tsirelson_bound() {
            Self::QuantumViolation
        } else {
            Self::BeyondQuantum
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub e_ab: f64,
    pub e_apb: f64,
    pub e_abp: f64,
    pub e_apbp: f64,
    pub s: f64,
    pub classification: ChshClass,
}

/// `s = E(A′,B′) + E(A′,B) + E(A,B′) − E(A,B)`.
pub fn chsh_statistic(
    ab: &CoincidenceTable,
    apb: &CoincidenceTable,
    abp: &CoincidenceTable,
    apbp: &CoincidenceTable,
) -> Result<ChshResult, EntanglementError> {
    let e_ab = expectation_value(ab)?;
    let e_apb = expectation_value(apb)?;
    let e_abp = expectation_value(abp)?;
    let e_apbp = expectation_value(apbp)?;
    let s = chsh_combination(e_ab, e_apb, e_abp, e_apbp);
    Ok(ChshResult {
        e_ab,
        e_apb,
        e_abp,
        e_apbp,
        s,
        classification: ChshClass::of(s),
    })
}

pub fn chsh_combination(e_ab: f64, e_apb: f64, e_abp: f64, e_apbp: f64) -> f64 {
    e_apbp + e_apb + e_abp - e_ab
}

/// The CHSH value of each of the 16 deterministic local strategies
/// `(A, A′, B, B′) ∈ {−1, +1}⁴`.
pub fn local_deterministic_values() -> [f64; 16] {
    let mut out = [0.0; 16];
    for (bits, slot) in out.iter_mut().enumerate() {
        let v = |i: usize| if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
        let (a, ap, b, bp) = (v(0), v(1), v(2), v(3));
        *slot = chsh_combination(a * b, ap * b, a * bp, ap * bp);
    }
    out
}

pub fn local_deterministic_bound() -> f64 {
    local_deterministic_values().into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn local_deterministic_minimum() -> f64 {
    local_deterministic_values().into_iter().fold(f64::INFINITY, f64::min)
}

pub fn tsirelson_bound() -> f64 {
    2.0 * std::f64::consts::SQRT_2
}
