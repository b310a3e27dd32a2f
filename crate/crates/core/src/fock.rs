//! Two-sector Fock-space model of concept combination.
//!
//! Conjunction:
//! `µ(A and B) = m²·µ(A)µ(B) + n²·((µ(A)+µ(B))/2 + √((1−µ(A))(1−µ(B)))·cos β)`.
//!
//! Disjunction is the de Morgan dual of the conjunction model applied to the
//! complemented concepts, `µ(A or B) = 1 − µ(¬A and ¬B)`:
//! `µ(A or B) = m²·(µ(A)+µ(B)−µ(A)µ(B)) + n²·((µ(A)+µ(B))/2 − √(µ(A)µ(B))·cos β)`,
//! so the disjunction angle of `(a, b, t)` is the conjunction angle of
//! `(1−a, 1−b, 1−t)`.
//!
//! Sector 2 (weight `m²`) carries the quantum-logical combination; sector 1
//! (weight `n²`) carries the emergent concept whose interference term is
//! parametrized by the angle `β`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::hilbert::{born_probability, Projector, StateVector};

/// `|arg| ≤ 1 + ARCCOS_CLAMP` is clamped onto `[−1, 1]`, beyond that it is an error.
pub const ARCCOS_CLAMP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("Fock weights must satisfy m² + n² = 1 with both in [0, 1] (m² = {m_sq}, n² = {n_sq})")]
    InvalidWeights { m_sq: f64, n_sq: f64 },
    #[error("membership weight {field} = {value} is outside [0, 1]")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("the emergent-sector weight n² is zero, the interference angle is undetermined")]
    NoEmergentSector,
    #[error("interference amplitude vanishes ({0}), the interference angle is undetermined")]
    DegenerateAmplitude(&'static str),
    #[error("no interference solution at these weights: arccos argument {argument} is outside [-1, 1]")]
    NoInterferenceSolution { argument: f64 },
    #[error("C³ construction inapplicable: {0}")]
    C3Inapplicable(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockWeights {
    /// Sector-2 ("logical") weight.
    pub m_sq: f64,
    /// Sector-1 ("emergent") weight.
    pub n_sq: f64,
}

impl FockWeights {
    pub fn new(m_sq: f64, n_sq: f64) -> Result<Self, FockError> {
        let ok = (0.0..=1.0).contains(&m_sq) && (0.0..=1.0).contains(&n_sq) && (m_sq + n_sq - 1.0).abs() <= 1e-12;
        if !ok {
            return Err(FockError::InvalidWeights { m_sq, n_sq });
        }
        Ok(Self { m_sq, n_sq })
    }

    /// Weights with the given sector-2 share, `n² = 1 − m²`.
    pub fn from_m_sq(m_sq: f64) -> Result<Self, FockError> {
        Self::new(m_sq, 1.0 - m_sq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockPrediction {
    pub value: f64,
    /// Set when the value falls outside `[0, 1]`; the value is still returned.
    pub out_of_range: bool,
}

impl FockPrediction {
    fn new(value: f64) -> Self {
        Self {
            value,
            out_of_range: !(0.0..=1.0).contains(&value),
        }
    }
}

fn check_unit(field: &'static str, value: f64) -> Result<(), FockError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(FockError::OutOfRange { field, value });
    }
    Ok(())
}

pub fn fock_conjunction(mu_a: f64, mu_b: f64, beta: f64, w: FockWeights) -> Result<FockPrediction, FockError> {
    check_unit("muA", mu_a)?;
    check_unit("muB", mu_b)?;
    let interference = ((1.0 - mu_a) * (1.0 - mu_b)).sqrt() * beta.cos();
    let value = w.m_sq * mu_a * mu_b + w.n_sq * ((mu_a + mu_b) / 2.0 + interference);
    Ok(FockPrediction::new(value))
}

pub fn fock_disjunction(mu_a: f64, mu_b: f64, beta: f64, w: FockWeights) -> Result<FockPrediction, FockError> {
    check_unit("muA", mu_a)?;
    check_unit("muB", mu_b)?;
    let interference = -(mu_a * mu_b).sqrt() * beta.cos();
    let value = w.m_sq * (mu_a + mu_b - mu_a * mu_b) + w.n_sq * ((mu_a + mu_b) / 2.0 + interference);
    Ok(FockPrediction::new(value))
}

/// Argument of the arccos that inverts the conjunction equation, before clamping.
pub fn conjunction_cosine(mu_a: f64, mu_b: f64, mu_ab: f64, w: FockWeights) -> Result<f64, FockError> {
    check_unit("muA", mu_a)?;
    check_unit("muB", mu_b)?;
    check_unit("muJoint", mu_ab)?;
    if w.n_sq <= 0.0 {
        return Err(FockError::NoEmergentSector);
    }
    let amplitude = ((1.0 - mu_a) * (1.0 - mu_b)).sqrt();
    if amplitude == 0.0 {
        return Err(FockError::DegenerateAmplitude("µ(A) = 1 or µ(B) = 1"));
    }
    Ok(((2.0 / w.n_sq) * (mu_ab - w.m_sq * mu_a * mu_b) - mu_a - mu_b) / (2.0 * amplitude))
}

/// Argument of the arccos that inverts the disjunction equation, before clamping.
pub fn disjunction_cosine(mu_a: f64, mu_b: f64, mu_ab: f64, w: FockWeights) -> Result<f64, FockError> {
    check_unit("muA", mu_a)?;
    check_unit("muB", mu_b)?;
    check_unit("muJoint", mu_ab)?;
    if w.n_sq <= 0.0 {
        return Err(FockError::NoEmergentSector);
    }
    let amplitude = (mu_a * mu_b).sqrt();
    if amplitude == 0.0 {
        return Err(FockError::DegenerateAmplitude("µ(A) = 0 or µ(B) = 0"));
    }
    let logical = mu_a + mu_b - mu_a * mu_b;
    Ok((mu_a + mu_b - (2.0 / w.n_sq) * (mu_ab - w.m_sq * logical)) / (2.0 * amplitude))
}

fn clamped_arccos(argument: f64) -> Result<f64, FockError> {
    if !argument.is_finite() || argument.abs() > 1.0 + ARCCOS_CLAMP {
        return Err(FockError::NoInterferenceSolution { argument });
    }
    Ok(argument.clamp(-1.0, 1.0).acos())
}

/// Interference angle `β ∈ [0, π]` reproducing `µ(A and B)` at weights `w`.
pub fn interference_angle_conjunction(mu_a: f64, mu_b: f64, mu_ab: f64, w: FockWeights) -> Result<f64, FockError> {
    clamped_arccos(conjunction_cosine(mu_a, mu_b, mu_ab, w)?)
}

/// Interference angle `β ∈ [0, π]` reproducing `µ(A or B)` at weights `w`.
pub fn interference_angle_disjunction(mu_a: f64, mu_b: f64, mu_ab: f64, w: FockWeights) -> Result<f64, FockError> {
    clamped_arccos(disjunction_cosine(mu_a, mu_b, mu_ab, w)?)
}

/// The explicit `C³` realization of the conjunction interference term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceSolution {
    pub beta: f64,
    /// Present when the angle was extracted from data at these weights.
    pub weights: Option<FockWeights>,
    pub vector_a: StateVector,
    pub vector_b: StateVector,
    pub projector: Projector,
}

impl InterferenceSolution {
    /// `⟨A|M|B⟩`.
    pub fn interference_element(&self) -> Complex64 {
        self.projector
            .matrix_element(&self.vector_a, &self.vector_b)
            .expect("C³ vectors and projector share dimension 3")
    }

    pub fn membership_a(&self) -> f64 {
        born_probability(&self.vector_a, &self.projector).expect("dimension 3")
    }

    pub fn membership_b(&self) -> f64 {
        born_probability(&self.vector_b, &self.projector).expect("dimension 3")
    }
}

/// `|A⟩ = (√a, 0, √(1−a))`,
/// `|B⟩ = e^{iβ}(√((1−a)(1−b)/a), √((a+b−1)/a), −√(1−b))`, `M` = projector on
/// the first two coordinates. Requires `a > 0` and `a + b ≥ 1`.
pub fn build_c3_vectors(mu_a: f64, mu_b: f64, beta: f64) -> Result<InterferenceSolution, FockError> {
    check_unit("muA", mu_a)?;
    check_unit("muB", mu_b)?;
    if mu_a <= 0.0 {
        return Err(FockError::C3Inapplicable("µ(A) must be positive"));
    }
    if mu_a + mu_b < 1.0 {
        return Err(FockError::C3Inapplicable("µ(A) + µ(B) must be at least 1"));
    }
    let real = |x: f64| Complex64::new(x, 0.0);
    let vector_a = StateVector::new(vec![real(mu_a.sqrt()), real(0.0), real((1.0 - mu_a).sqrt())])
        .expect("three components");
    let phase = Complex64::from_polar(1.0, beta);
    let vector_b = StateVector::new(vec![
        phase * ((1.0 - mu_a) * (1.0 - mu_b) / mu_a).sqrt(),
        phase * ((mu_a + mu_b - 1.0) / mu_a).sqrt(),
        phase * -(1.0 - mu_b).sqrt(),
    ])
    .expect("three components");
    let projector = Projector::diagonal(3, [0, 1]).expect("indices below 3");
    Ok(InterferenceSolution {
        beta,
        weights: None,
        vector_a,
        vector_b,
        projector,
    })
}

/// Extracts the conjunction angle and realizes it in `C³`.
pub fn solve_conjunction(mu_a: f64, mu_b: f64, mu_ab: f64, w: FockWeights) -> Result<InterferenceSolution, FockError> {
    let beta = interference_angle_conjunction(mu_a, mu_b, mu_ab, w)?;
    let mut solution = build_c3_vectors(mu_a, mu_b, beta)?;
    solution.weights = Some(w);
    Ok(solution)
}

/// `|a e^{iα} + b e^{iβ}|² = a² + b² + 2ab·cos(β − α)`.
pub fn complex_sum_interference(a: f64, alpha: f64, b: f64, beta: f64) -> f64 {
    (Complex64::from_polar(a, alpha) + Complex64::from_polar(b, beta)).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::deg;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn w(m_sq: f64) -> FockWeights {
        FockWeights::from_m_sq(m_sq).unwrap()
    }

    #[test]
    fn weights_must_be_convex() {
        assert!(FockWeights::new(0.3, 0.7).is_ok());
        assert!(FockWeights::new(0.3, 0.6).is_err());
        assert!(FockWeights::new(-0.1, 1.1).is_err());
    }

    #[test]
    fn right_angle_removes_interference() {
        for m_sq in [0.0, 0.3, 1.0] {
            let c = fock_conjunction(0.4, 0.7, FRAC_PI_2, w(m_sq)).unwrap().value;
            assert_abs_diff_eq!(c, m_sq * 0.28 + (1.0 - m_sq) * 0.55, epsilon = 1e-15);
            let d = fock_disjunction(0.4, 0.7, FRAC_PI_2, w(m_sq)).unwrap().value;
            assert_abs_diff_eq!(d, m_sq * (1.1 - 0.28) + (1.0 - m_sq) * 0.55, epsilon = 1e-15);
        }
    }

    #[test]
    fn certain_members_and_non_members() {
        for beta in [0.0, 1.0, 3.0] {
            assert_eq!(fock_conjunction(1.0, 1.0, beta, w(0.4)).unwrap().value, 1.0);
            assert_eq!(fock_disjunction(0.0, 0.0, beta, w(0.4)).unwrap().value, 0.0);
        }
    }

    #[test]
    fn out_of_range_prediction_is_flagged() {
        let p = fock_conjunction(0.0, 0.0, 0.0, w(0.0)).unwrap();
        assert_eq!(p.value, 1.0);
        assert!(!p.out_of_range);
        // (a+b)/2 + √((1−a)(1−b)) ≤ 1 always, but destructive interference
        // can push the value below 0.
        let p = fock_conjunction(0.1, 0.1, std::f64::consts::PI, w(0.0)).unwrap();
        assert_abs_diff_eq!(p.value, -0.8, epsilon = 1e-15);
        assert!(p.out_of_range);
    }

    #[test]
    fn mint_angle_regression() {
        // Direct evaluation of the inversion formula at m² = 0.3.
        let beta = interference_angle_conjunction(0.87, 0.81, 0.90, w(0.3)).unwrap();
        assert_abs_diff_eq!(beta.to_degrees(), 23.887658, epsilon = 1e-5);
        let arg = conjunction_cosine(0.87, 0.81, 0.90, w(0.3)).unwrap();
        assert_abs_diff_eq!(arg, 0.914341204, epsilon = 1e-8);
        let back = fock_conjunction(0.87, 0.81, beta, w(0.3)).unwrap().value;
        assert_abs_diff_eq!(back, 0.90, epsilon = 1e-12);
    }

    #[test]
    fn zero_interference_angles() {
        let (a, b) = (0.35, 0.62);
        let target = 0.3 * a * b + 0.7 * (a + b) / 2.0;
        let beta = interference_angle_conjunction(a, b, target, w(0.3)).unwrap();
        assert_abs_diff_eq!(beta, FRAC_PI_2, epsilon = 1e-12);
        let target = 0.3 * (a + b - a * b) + 0.7 * (a + b) / 2.0;
        let beta = interference_angle_disjunction(a, b, target, w(0.3)).unwrap();
        assert_abs_diff_eq!(beta, FRAC_PI_2, epsilon = 1e-12);
        // (2·0.5 − 1) / (2·0.5) = 0
        let beta = interference_angle_conjunction(0.5, 0.5, 0.5, w(0.0)).unwrap();
        assert_abs_diff_eq!(beta, FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn disjunction_round_trips_on_table_rows() {
        // Tomato and Pumpkin (Fruits or Vegetables).
        for (a, b, t) in [(0.7, 0.7, 1.0), (0.7, 0.8, 0.93)] {
            let beta = interference_angle_disjunction(a, b, t, w(0.3)).unwrap();
            assert_abs_diff_eq!(fock_disjunction(a, b, beta, w(0.3)).unwrap().value, t, epsilon = 1e-9);
        }
    }

    #[test]
    fn mushroom_has_no_disjunction_angle() {
        // µ(Fruits) = 0 leaves no interference amplitude.
        assert!(matches!(
            interference_angle_disjunction(0.0, 0.5, 0.9, w(0.3)),
            Err(FockError::DegenerateAmplitude(_))
        ));
    }

    #[test]
    fn inversion_errors() {
        assert_eq!(
            interference_angle_conjunction(0.5, 0.5, 0.5, w(1.0)),
            Err(FockError::NoEmergentSector)
        );
        assert!(matches!(
            interference_angle_conjunction(1.0, 0.5, 0.5, w(0.3)),
            Err(FockError::DegenerateAmplitude(_))
        ));
        match interference_angle_conjunction(0.1, 0.1, 0.95, w(0.3)) {
            Err(FockError::NoInterferenceSolution { argument }) => assert!(argument > 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arccos_argument_is_clamped_within_slack() {
        // At a = b = 0.5, m² = 0.3 the largest reachable value is 0.775 and
        // the argument grows by (2/0.7) per unit of target.
        assert_eq!(interference_angle_conjunction(0.5, 0.5, 0.775 + 1e-7, w(0.3)).unwrap(), 0.0);
        match interference_angle_conjunction(0.5, 0.5, 0.775 + 1e-5, w(0.3)) {
            Err(FockError::NoInterferenceSolution { argument }) => assert!(argument > 1.0 + ARCCOS_CLAMP),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn c3_vectors_for_mint() {
        let s = build_c3_vectors(0.87, 0.81, deg(23.887658)).unwrap();
        assert_abs_diff_eq!(s.vector_a.norm_sqr(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.vector_b.norm_sqr(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.membership_a(), 0.87, epsilon = 1e-12);
        assert_abs_diff_eq!(s.membership_b(), 0.81, epsilon = 1e-12);
    }

    #[test]
    fn c3_near_certain_weights() {
        let s = build_c3_vectors(0.99, 0.99, 0.0).unwrap();
        assert_abs_diff_eq!(s.vector_b.norm_sqr(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.membership_b(), 0.99, epsilon = 1e-12);
        assert_abs_diff_eq!(s.interference_element().re, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn c3_precondition() {
        assert!(matches!(build_c3_vectors(0.3, 0.2, 0.0), Err(FockError::C3Inapplicable(_))));
        assert!(matches!(build_c3_vectors(0.0, 1.0, 0.0), Err(FockError::C3Inapplicable(_))));
    }

    #[test]
    fn cardano_sum() {
        let a = 40f64.sqrt();
        let alpha = deg(37.76);
        let p = complex_sum_interference(a, alpha, a, -alpha);
        // |√40 e^{iα} + √40 e^{−iα}| = 2√40 cos α
        assert_abs_diff_eq!(p.sqrt(), 10.0, epsilon = 0.01);
        assert_abs_diff_eq!(complex_sum_interference(0.3, 0.4, 0.5, 0.4 + FRAC_PI_2), 0.34, epsilon = 1e-15);
        assert_abs_diff_eq!(complex_sum_interference(0.6, 0.4, 0.6, 0.4 + std::f64::consts::PI), 0.0, epsilon = 1e-15);
    }
}
