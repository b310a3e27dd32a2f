//! Explicit complex Hilbert-space model of a concept pair under disjunction
//! over a choose-one experiment with `n` exemplars.
//!
//! Exemplar `k` owns coordinate `k` of an `(n+1)`-dimensional space; the last
//! coordinate absorbs any normalization deficit. `|A⟩_k = √µ(A)_k`,
//! `|B⟩_k = √µ(B)_k e^{iφ_k}` and
//! `µ(A or B)_k = ½(µ(A)_k + µ(B)_k) + √(µ(A)_k µ(B)_k) cos φ_k`.

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::hilbert::{born_probability, inner_product, Projector, SpectralFamily, StateVector};

/// Column sums of a choose-one experiment may exceed 1 by this much.
pub const CHOOSE_ONE_SLACK: f64 = 0.002;
/// `|cos φ| ≤ 1 + PHASE_CLAMP` is clamped, beyond that there is no phase.
pub const PHASE_CLAMP: f64 = 1e-6;
/// Imaginary contributions below this are treated as zero by the sign search.
const SIGN_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisjunctionError {
    #[error("row {index}: weight {field} = {value} is outside [0, 1]")]
    OutOfRange { index: usize, field: &'static str, value: f64 },
    #[error("row {index}: phase undefined because a membership weight is zero")]
    PhaseUndefined { index: usize },
    #[error("row {index}: no phase solution at c = {c} (cosine {cosine})")]
    NoPhaseSolution { index: usize, c: f64, cosine: f64 },
    #[error("scaling factor c must be positive, got {0}")]
    InvalidScale(f64),
    #[error("row {index}: |phi| = {phi_deg}° exceeds 180°")]
    PhaseOutOfRange { index: usize, phi_deg: f64 },
    #[error("column {column} sums to {sum}, not a choose-one experiment")]
    ColumnSum { column: &'static str, sum: f64 },
    #[error("model has no rows")]
    Empty,
    #[error("exemplar index {k} is outside 1..={len}")]
    IndexOutOfRange { k: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarRow {
    /// 1-based position in the table.
    pub index: usize,
    pub name: String,
    pub mu_a: f64,
    pub mu_b: f64,
    pub mu_a_or_b: f64,
    /// Signed interference angle in radians, if known.
    pub phi: Option<f64>,
}

impl ExemplarRow {
    pub fn new(index: usize, name: impl Into<String>, mu_a: f64, mu_b: f64, mu_a_or_b: f64, phi: Option<f64>) -> Self {
        Self {
            index,
            name: name.into(),
            mu_a,
            mu_b,
            mu_a_or_b,
            phi,
        }
    }

    pub fn validate(&self) -> Result<(), DisjunctionError> {
        for (field, value) in [("muA", self.mu_a), ("muB", self.mu_b), ("muAorB", self.mu_a_or_b)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(DisjunctionError::OutOfRange {
                    index: self.index,
                    field,
                    value,
                });
            }
        }
        if let Some(phi) = self.phi {
            if phi.is_nan() || phi.abs() > std::f64::consts::PI {
                return Err(DisjunctionError::PhaseOutOfRange {
                    index: self.index,
                    phi_deg: phi.to_degrees(),
                });
            }
        }
        Ok(())
    }

    /// `√(µ(A)_k µ(B)_k)`, the magnitude of the interference amplitude.
    pub fn weight(&self) -> f64 {
        (self.mu_a * self.mu_b).sqrt()
    }
}

impl Serialize for ExemplarRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row<'a> {
            index: usize,
            name: &'a str,
            #[serde(rename = "muA")]
            mu_a: f64,
            #[serde(rename = "muB")]
            mu_b: f64,
            #[serde(rename = "muAorB")]
            mu_a_or_b: f64,
            phi_deg: Option<f64>,
        }
        Row {
            index: self.index,
            name: &self.name,
            mu_a: self.mu_a,
            mu_b: self.mu_b,
            mu_a_or_b: self.mu_a_or_b,
            phi_deg: self.phi.map(crate::angle::to_degrees_4dp),
        }
        .serialize(serializer)
    }
}

/// `(2µ(A or B) − µ(A) − µ(B)) / (2c√(µ(A)µ(B)))`, unclamped.
pub fn phase_cosine(row: &ExemplarRow, c: f64) -> Result<f64, DisjunctionError> {
    row.validate()?;
    if c.is_nan() || c <= 0.0 {
        return Err(DisjunctionError::InvalidScale(c));
    }
    let w = row.weight();
    if w == 0.0 {
        return Err(DisjunctionError::PhaseUndefined { index: row.index });
    }
    Ok((2.0 * row.mu_a_or_b - row.mu_a - row.mu_b) / (2.0 * c * w))
}

/// Phase magnitude in `[0, π]`.
pub fn phase_magnitude(row: &ExemplarRow, c: f64) -> Result<f64, DisjunctionError> {
    let cosine = phase_cosine(row, c)?;
    if !cosine.is_finite() || cosine.abs() > 1.0 + PHASE_CLAMP {
        return Err(DisjunctionError::NoPhaseSolution {
            index: row.index,
            c,
            cosine,
        });
    }
    Ok(cosine.clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignAssignment {
    pub signs: Vec<i8>,
    /// `|Σ_k w_k sin(s_k φ_k)|` after the search.
    pub imaginary_residual: f64,
}

/// Chooses `s_k ∈ {−1, +1}` to make `Σ_k w_k sin(s_k φ_k)` small.
///
/// Heuristic: a greedy pass in order of descending `w_k` picks each sign to
/// shrink the running sum, then single flips are applied while they strictly
/// improve it. Entries of `fixed` that are `Some` are kept as given. Rows
/// with no imaginary contribution get `+1`.
pub fn assign_phase_signs_with(weights: &[f64], magnitudes: &[f64], fixed: &[Option<i8>]) -> SignAssignment {
    assert_eq!(weights.len(), magnitudes.len());
    assert_eq!(weights.len(), fixed.len());
    let x: Vec<f64> = weights.iter().zip(magnitudes).map(|(w, m)| w * m.sin()).collect();
    let mut signs = vec![1i8; x.len()];
    let mut sum = 0.0;
    for (k, f) in fixed.iter().enumerate() {
        if let Some(s) = f {
            signs[k] = *s;
            sum += f64::from(*s) * x[k];
        }
    }
    let mut free: Vec<usize> = (0..x.len()).filter(|&k| fixed[k].is_none() && x[k].abs() > SIGN_EPS).collect();
    free.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]).then(i.cmp(&j)));
    for &k in &free {
        let s = if (sum - x[k]).abs() < (sum + x[k]).abs() { -1 } else { 1 };
        signs[k] = s;
        sum += f64::from(s) * x[k];
    }
    loop {
        let mut best: Option<(usize, f64)> = None;
        for &k in &free {
            let flipped = sum - 2.0 * f64::from(signs[k]) * x[k];
            if flipped.abs() < best.map_or(sum.abs(), |(_, b)| b.abs()) {
                best = Some((k, flipped));
            }
        }
        match best {
            Some((k, flipped)) => {
                signs[k] = -signs[k];
                sum = flipped;
            }
            None => break,
        }
    }
    SignAssignment {
        signs,
        imaginary_residual: sum.abs(),
    }
}

pub fn assign_phase_signs(weights: &[f64], magnitudes: &[f64]) -> SignAssignment {
    assign_phase_signs_with(weights, magnitudes, &vec![None; weights.len()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisjunctionModel {
    pub rows: Vec<ExemplarRow>,
    pub vector_a: StateVector,
    pub vector_b: StateVector,
    pub family: SpectralFamily,
    pub c: Vec<f64>,
    /// Signed phases in radians, one per row.
    pub phases: Vec<f64>,
    /// Whether the sign search ran, as opposed to signs taken from the rows.
    pub signs_searched: bool,
}

/// Builds the model with `c_k = 1`. Phase magnitudes come from the weights,
/// signs from the rows' `phi` when every row has one, otherwise from
/// [`assign_phase_signs_with`] with the supplied signs held fixed.
pub fn build_model(rows: &[ExemplarRow]) -> Result<DisjunctionModel, DisjunctionError> {
    if rows.is_empty() {
        return Err(DisjunctionError::Empty);
    }
    for row in rows {
        row.validate()?;
    }
    let sum_a: f64 = rows.iter().map(|r| r.mu_a).sum();
    let sum_b: f64 = rows.iter().map(|r| r.mu_b).sum();
    for (column, sum) in [("muA", sum_a), ("muB", sum_b)] {
        if sum > 1.0 + CHOOSE_ONE_SLACK {
            return Err(DisjunctionError::ColumnSum { column, sum });
        }
    }
    let c = vec![1.0; rows.len()];
    // A row with a zero weight has no interference amplitude, so its phase
    // is unobservable: keep the supplied one or use a right angle.
    let magnitudes = rows
        .iter()
        .zip(&c)
        .map(|(r, &ck)| {
            if r.weight() == 0.0 {
                Ok(r.phi.map_or(std::f64::consts::FRAC_PI_2, f64::abs))
            } else {
                phase_magnitude(r, ck)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fixed: Vec<Option<i8>> = rows
        .iter()
        .map(|r| r.phi.map(|p| if p < 0.0 { -1 } else { 1 }))
        .collect();
    let signs_searched = fixed.iter().any(Option::is_none);
    let signs = if signs_searched {
        let weights: Vec<f64> = rows.iter().map(ExemplarRow::weight).collect();
        assign_phase_signs_with(&weights, &magnitudes, &fixed).signs
    } else {
        fixed.iter().map(|s| s.unwrap_or(1)).collect()
    };
    let phases: Vec<f64> = magnitudes.iter().zip(&signs).map(|(m, &s)| f64::from(s) * m).collect();

    let mut a: Vec<Complex64> = rows.iter().map(|r| Complex64::new(r.mu_a.sqrt(), 0.0)).collect();
    a.push(Complex64::new((1.0 - sum_a).max(0.0).sqrt(), 0.0));
    let mut b: Vec<Complex64> = rows
        .iter()
        .zip(&phases)
        .map(|(r, &phi)| Complex64::from_polar(r.mu_b.sqrt(), phi))
        .collect();
    b.push(Complex64::new((1.0 - sum_b).max(0.0).sqrt(), 0.0));

    let vector_a = StateVector::new(a).expect("non-empty");
    let vector_b = StateVector::new(b).expect("non-empty");
    let family = SpectralFamily::canonical(rows.len() + 1).expect("positive dimension");
    Ok(DisjunctionModel {
        rows: rows.to_vec(),
        vector_a,
        vector_b,
        family,
        c,
        phases,
        signs_searched,
    })
}

impl DisjunctionModel {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vector_a.dim()
    }

    /// `(|A⟩ + |B⟩)/√2`, not renormalized.
    pub fn superposition(&self) -> StateVector {
        self.vector_a
            .add(&self.vector_b)
            .expect("equal dimensions")
            .scale(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
    }

    pub fn projector(&self, k: usize) -> Result<&Projector, DisjunctionError> {
        if k == 0 || k > self.len() {
            return Err(DisjunctionError::IndexOutOfRange { k, len: self.len() });
        }
        Ok(&self.family.projectors()[k - 1])
    }

    pub fn predictions(&self) -> Vec<f64> {
        let s = self.superposition();
        self.family.projectors()[..self.len()]
            .iter()
            .map(|m| born_probability(&s, m).expect("equal dimensions"))
            .collect()
    }
}

/// `‖M_k (|A⟩ + |B⟩)/√2‖²` for the 1-based exemplar index `k`.
pub fn predict_disjunction(model: &DisjunctionModel, k: usize) -> Result<f64, DisjunctionError> {
    let m = model.projector(k)?;
    Ok(born_probability(&model.superposition(), m).expect("equal dimensions"))
}

/// `|⟨A|B⟩|`.
pub fn orthogonality_residual(model: &DisjunctionModel) -> f64 {
    inner_product(&model.vector_a, &model.vector_b)
        .expect("equal dimensions")
        .norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::deg;
    use approx::assert_abs_diff_eq;

    fn row(k: usize, a: f64, b: f64, o: f64) -> ExemplarRow {
        ExemplarRow::new(k, format!("r{k}"), a, b, o, None)
    }

    #[test]
    fn almond_and_mushroom_magnitudes() {
        let almond = row(1, 0.0359, 0.0133, 0.0269);
        assert_abs_diff_eq!(phase_magnitude(&almond, 1.0).unwrap().to_degrees(), 83.8854, epsilon = 0.5);
        let mushroom = row(14, 0.0140, 0.0545, 0.0604);
        assert_abs_diff_eq!(phase_magnitude(&mushroom, 1.0).unwrap().to_degrees(), 18.6744, epsilon = 0.5);
    }

    #[test]
    fn midpoint_gives_right_angle() {
        let r = row(1, 0.03, 0.05, 0.04);
        assert_abs_diff_eq!(phase_magnitude(&r, 1.0).unwrap(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn phase_errors() {
        assert_eq!(
            phase_magnitude(&row(3, 0.0, 0.05, 0.04), 1.0),
            Err(DisjunctionError::PhaseUndefined { index: 3 })
        );
        assert!(matches!(
            phase_magnitude(&row(1, 0.01, 0.01, 0.5), 1.0),
            Err(DisjunctionError::NoPhaseSolution { .. })
        ));
        assert_eq!(phase_magnitude(&row(1, 0.1, 0.1, 0.1), 0.0), Err(DisjunctionError::InvalidScale(0.0)));
        // A larger c admits the same row.
        assert!(phase_magnitude(&row(1, 0.01, 0.01, 0.021), 1.0).is_err());
        assert!(phase_magnitude(&row(1, 0.01, 0.01, 0.021), 2.0).is_ok());
    }

    #[test]
    fn signs_for_real_phases_are_positive() {
        let s = assign_phase_signs(&[0.1, 0.2, 0.3], &[0.0, 0.0, std::f64::consts::PI]);
        assert_eq!(s.signs, vec![1, 1, 1]);
        assert!(s.imaginary_residual < 1e-15);
    }

    #[test]
    fn symmetric_rows_get_opposite_signs() {
        let s = assign_phase_signs(&[0.2, 0.2], &[deg(40.0), deg(40.0)]);
        assert_eq!(s.signs, vec![1, -1]);
        assert_eq!(s.imaginary_residual, 0.0);
    }

    #[test]
    fn uniform_right_angles_alternate() {
        let s = assign_phase_signs(&[0.1; 4], &[deg(90.0); 4]);
        assert_eq!(s.signs, vec![1, -1, 1, -1]);
        assert_eq!(s.imaginary_residual, 0.0);
    }

    #[test]
    fn sign_search_is_bounded_by_smallest_weight() {
        // Greedy: +3 −2 −2 = −1; no single flip improves on 1.
        let s = assign_phase_signs(&[3.0, 2.0, 2.0], &[deg(90.0); 3]);
        assert_abs_diff_eq!(s.imaginary_residual, 1.0, epsilon = 1e-12);
        // Greedy: +5 −4 −3 +3 −3 = −2.
        let s = assign_phase_signs(&[5.0, 4.0, 3.0, 3.0, 3.0], &[deg(90.0); 5]);
        assert_abs_diff_eq!(s.imaginary_residual, 2.0, epsilon = 1e-12);
        // Two fixed +1 rows leave the free row to cancel one of them.
        let s = assign_phase_signs_with(&[1.0, 1.0, 1.0], &[deg(90.0); 3], &[Some(1), Some(1), None]);
        assert_eq!(s.signs, vec![1, 1, -1]);
        assert_abs_diff_eq!(s.imaginary_residual, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fixed_signs_are_kept() {
        let s = assign_phase_signs_with(&[0.2, 0.2], &[deg(40.0), deg(40.0)], &[Some(-1), None]);
        assert_eq!(s.signs, vec![-1, 1]);
    }

    #[test]
    fn uniform_model() {
        let n = 24;
        let p = 1.0 / n as f64;
        let rows: Vec<_> = (1..=n).map(|k| row(k, p, p, p)).collect();
        let model = build_model(&rows).unwrap();
        assert_eq!(model.dim(), 25);
        assert!(model.signs_searched);
        for (k, phi) in model.phases.iter().enumerate() {
            assert_abs_diff_eq!(phi.abs(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
            assert_abs_diff_eq!(predict_disjunction(&model, k + 1).unwrap(), p, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(model.vector_a.norm_sqr(), 1.0, epsilon = 1e-12);
        assert!(orthogonality_residual(&model) < 1e-12);
        assert!(crate::hilbert::validate_spectral_family(&model.family).valid);
    }

    #[test]
    fn parallel_vectors_have_full_overlap() {
        let rows: Vec<_> = (1..=4).map(|k| row(k, 0.25, 0.25, 0.5)).collect();
        let model = build_model(&rows).unwrap();
        assert!(model.phases.iter().all(|&p| p == 0.0));
        assert_abs_diff_eq!(orthogonality_residual(&model), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_supports() {
        let rows = vec![row(1, 1.0, 0.0, 0.5), row(2, 0.0, 1.0, 0.5)];
        let model = build_model(&rows).unwrap();
        assert_eq!(orthogonality_residual(&model), 0.0);
        assert_abs_diff_eq!(predict_disjunction(&model, 1).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn deficit_goes_to_last_coordinate() {
        let rows = vec![row(1, 0.3, 0.2, 0.25), row(2, 0.3, 0.2, 0.25)];
        let model = build_model(&rows).unwrap();
        assert_abs_diff_eq!(model.vector_a.components()[2].re, 0.4f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(model.vector_b.components()[2].re, 0.6f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(model.vector_b.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn column_sum_violation() {
        let rows = vec![row(1, 0.6, 0.2, 0.4), row(2, 0.6, 0.2, 0.4)];
        assert!(matches!(build_model(&rows), Err(DisjunctionError::ColumnSum { column: "muA", .. })));
    }

    #[test]
    fn prediction_index_checks() {
        let rows = vec![row(1, 0.3, 0.2, 0.25)];
        let model = build_model(&rows).unwrap();
        assert!(predict_disjunction(&model, 0).is_err());
        assert!(predict_disjunction(&model, 2).is_err());
        assert_abs_diff_eq!(predict_disjunction(&model, 1).unwrap(), 0.25, epsilon = 1e-12);
    }
}
