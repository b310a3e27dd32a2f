//! Classical-representability diagnostics for membership weights of a
//! conjunction or disjunction of two concepts.
//!
//! Conjunction (`A and B`) is classically representable iff
//! `Δ_c = µ(A and B) − min(µ(A), µ(B)) ≤ 0` and
//! `k_c = 1 − µ(A) − µ(B) + µ(A and B) ≥ 0`. Disjunction (`A or B`) iff
//! `Δ_d = max(µ(A), µ(B)) − µ(A or B) ≤ 0` and
//! `k_d = µ(A) + µ(B) − µ(A or B) ≥ 0`.
//!
//! The interference-need quantities `f_c`, `f_d` are non-negative exactly when
//! the combined weight lies inside the interval a two-sector Fock model can
//! reach without any interference term.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack for comparisons against zero, so boundary values such as `f_c = 0`
/// classify as classical.
pub const ZERO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    And,
    Or,
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "and",
            Connective::Or => "or",
        })
    }
}

impl FromStr for Connective {
    type Err = ClassicalityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "and" => Ok(Connective::And),
            "or" => Ok(Connective::Or),
            other => Err(ClassicalityError::UnknownConnective(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalityError {
    #[error("membership weight {field} = {value} is outside [0, 1]")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("expected connective {expected}, got {actual}")]
    WrongConnective { expected: Connective, actual: Connective },
    #[error("unknown connective {0:?} (expected \"and\" or \"or\")")]
    UnknownConnective(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipTriple {
    pub exemplar: String,
    pub concept_a: String,
    pub concept_b: String,
    pub mu_a: f64,
    pub mu_b: f64,
    /// `µ(A and B)` or `µ(A or B)` depending on `connective`.
    pub mu_joint: f64,
    pub connective: Connective,
}

impl MembershipTriple {
    pub fn new(mu_a: f64, mu_b: f64, mu_joint: f64, connective: Connective) -> Self {
        Self {
            exemplar: String::new(),
            concept_a: String::new(),
            concept_b: String::new(),
            mu_a,
            mu_b,
            mu_joint,
            connective,
        }
    }

    pub fn validate(&self) -> Result<(), ClassicalityError> {
        for (field, value) in [("muA", self.mu_a), ("muB", self.mu_b), ("muJoint", self.mu_joint)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ClassicalityError::OutOfRange { field, value });
            }
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        Self {
            concept_a: self.concept_b.clone(),
            concept_b: self.concept_a.clone(),
            mu_a: self.mu_b,
            mu_b: self.mu_a,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExtensionClass {
    None,
    Overextended,
    DoubleOverextended,
    Underextended,
    DoubleUnderextended,
}

impl ExtensionClass {
    pub const ALL: [ExtensionClass; 5] = [
        ExtensionClass::None,
        ExtensionClass::Overextended,
        ExtensionClass::DoubleOverextended,
        ExtensionClass::Underextended,
        ExtensionClass::DoubleUnderextended,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExtensionClass::None => "none",
            ExtensionClass::Overextended => "overextended",
            ExtensionClass::DoubleOverextended => "double_overextended",
            ExtensionClass::Underextended => "underextended",
            ExtensionClass::DoubleUnderextended => "double_underextended",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalityReport {
    /// `Δ_c` or `Δ_d`.
    pub delta: f64,
    /// `k_c` or `k_d`.
    pub kolmogorov_factor: f64,
    /// `f_c` or `f_d`.
    pub interference_need: f64,
    pub classical_representable: bool,
    pub extension_class: ExtensionClass,
}

fn representable(delta: f64, k: f64) -> bool {
    delta <= ZERO_SLACK && k >= -ZERO_SLACK
}

pub fn conjunction_diagnostics(t: &MembershipTriple) -> Result<ClassicalityReport, ClassicalityError> {
    if t.connective != Connective::And {
        return Err(ClassicalityError::WrongConnective {
            expected: Connective::And,
            actual: t.connective,
        });
    }
    t.validate()?;
    let (a, b, ab) = (t.mu_a, t.mu_b, t.mu_joint);
    let delta = ab - a.min(b);
    let k = 1.0 - a - b + ab;
    let f = ((a + b) / 2.0 - ab).min(ab - a * b);
    let extension_class = if ab - a.max(b) > ZERO_SLACK {
        ExtensionClass::DoubleOverextended
    } else if delta > ZERO_SLACK {
        ExtensionClass::Overextended
    } else {
        ExtensionClass::None
    };
    Ok(ClassicalityReport {
        delta,
        kolmogorov_factor: k,
        interference_need: f,
        classical_representable: representable(delta, k),
        extension_class,
    })
}

pub fn disjunction_diagnostics(t: &MembershipTriple) -> Result<ClassicalityReport, ClassicalityError> {
    if t.connective != Connective::Or {
        return Err(ClassicalityError::WrongConnective {
            expected: Connective::Or,
            actual: t.connective,
        });
    }
    t.validate()?;
    let (a, b, ab) = (t.mu_a, t.mu_b, t.mu_joint);
    let delta = a.max(b) - ab;
    let k = a + b - ab;
    let f = (ab - (a + b) / 2.0).min(a + b - a * b - ab);
    let extension_class = if a.min(b) - ab > ZERO_SLACK {
        ExtensionClass::DoubleUnderextended
    } else if delta > ZERO_SLACK {
        ExtensionClass::Underextended
    } else {
        ExtensionClass::None
    };
    Ok(ClassicalityReport {
        delta,
        kolmogorov_factor: k,
        interference_need: f,
        classical_representable: representable(delta, k),
        extension_class,
    })
}

/// Dispatches on the triple's connective.
pub fn diagnose(t: &MembershipTriple) -> Result<ClassicalityReport, ClassicalityError> {
    match t.connective {
        Connective::And => conjunction_diagnostics(t),
        Connective::Or => disjunction_diagnostics(t),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    /// One entry per input row, in input order.
    pub rows: Vec<Result<ClassicalityReport, ClassicalityError>>,
    pub counts: BTreeMap<ExtensionClass, usize>,
    pub classical: usize,
    pub non_classical: usize,
    pub errors: usize,
}

impl Serialize for ClassicalityError {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

pub fn batch_diagnose(rows: &[MembershipTriple]) -> BatchReport {
    let reports: Vec<_> = rows.iter().map(diagnose).collect();
    let mut counts: BTreeMap<ExtensionClass, usize> = ExtensionClass::ALL.iter().map(|&c| (c, 0)).collect();
    let (mut classical, mut non_classical, mut errors) = (0, 0, 0);
    for r in &reports {
        match r {
            Ok(report) => {
                *counts.entry(report.extension_class).or_default() += 1;
                if report.classical_representable {
                    classical += 1;
                } else {
                    non_classical += 1;
                }
            }
            Err(_) => errors += 1,
        }
    }
    BatchReport {
        rows: reports,
        counts,
        classical,
        non_classical,
        errors,
    }
}
