use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use qconcept::classicality::{conjunction_diagnostics, diagnose, disjunction_diagnostics, Connective, MembershipTriple};
use qconcept::disjunction::{build_model, ExemplarRow};
use qconcept::entanglement::{chsh_statistic, expectation_value, local_deterministic_values, CoincidenceTable};
use qconcept::fock::{
    build_c3_vectors, complex_sum_interference, conjunction_cosine, disjunction_cosine, fock_conjunction, fock_disjunction,
    interference_angle_conjunction, interference_angle_disjunction, FockWeights,
};
use qconcept::hilbert::{
    born_probability, collapse, inner_product, schmidt_rank, tensor_product, validate_spectral_family, Projector, SpectralFamily,
    StateVector,
};
use qconcept::wavefield::{evaluate_patterns, sample_point, GaussianPair, GridSpec, PhasePolynomial, PhaseTerm, WaveFieldConfig};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(complex(), dim)
        .prop_filter("non-zero", |c| c.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|c| StateVector::new(c).unwrap().unit().unwrap())
}

fn any_state() -> impl Strategy<Value = StateVector> {
    (2usize..=5).prop_flat_map(state)
}

/// A state together with a random diagonal projector of the same dimension.
fn state_and_projector() -> impl Strategy<Value = (StateVector, Projector)> {
    (2usize..=5).prop_flat_map(|d| {
        (state(d), prop::collection::vec(any::<bool>(), d)).prop_map(move |(s, mask)| {
            let idx = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i);
            (s, Projector::diagonal(d, idx).unwrap())
        })
    })
}

/// An orthonormal basis from the QR factorization of a random matrix.
fn unitary(dim: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec(complex(), dim * dim)
        .prop_map(move |c| DMatrix::from_vec(dim, dim, c))
        .prop_filter("full rank", |m| m.determinant().norm() > 1e-3)
        .prop_map(|m| m.qr().q())
}

fn rank_one_family(u: &DMatrix<Complex64>) -> SpectralFamily {
    let projectors = (0..u.ncols())
        .map(|j| Projector::rank_one(&StateVector::new(u.column(j).iter().copied().collect()).unwrap()).unwrap())
        .collect();
    SpectralFamily::new(projectors).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn absolute_value_identity(z in complex()) {
        prop_assert!((z.norm() - (z * z.conj()).re.sqrt()).abs() < 1e-15);
        prop_assert!((z.norm() - (z.re * z.re + z.im * z.im).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn born_rule_complements((s, m) in state_and_projector()) {
        let p = born_probability(&s, &m).unwrap();
        let q = born_probability(&s, &m.complement()).unwrap();
        prop_assert!((p + q - 1.0).abs() < 1e-9);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&p));
    }

    #[test]
    fn dense_projector_complements((d, s, u) in (2usize..=5).prop_flat_map(|d| (Just(d), state(d), unitary(d)))) {
        let v = StateVector::new(u.column(0).iter().copied().collect()).unwrap();
        let m = Projector::rank_one(&v).unwrap();
        prop_assert_eq!(m.dim(), d);
        let p = born_probability(&s, &m).unwrap();
        let q = born_probability(&s, &m.complement()).unwrap();
        prop_assert!((p + q - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric((u, v) in (2usize..=5).prop_flat_map(|d| (state(d), state(d)))) {
        let uv = inner_product(&u, &v).unwrap();
        let vu = inner_product(&v, &u).unwrap();
        prop_assert!((uv - vu.conj()).norm() < 1e-12);
    }

    #[test]
    fn products_have_schmidt_rank_one(u in any_state(), v in any_state()) {
        let joint = tensor_product(&u, &v);
        prop_assert_eq!(joint.dim(), u.dim() * v.dim());
        prop_assert!((joint.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert_eq!(schmidt_rank(&joint, u.dim(), v.dim()).unwrap(), 1);
    }

    #[test]
    fn collapse_is_idempotent((s, m) in state_and_projector()) {
        prop_assume!(born_probability(&s, &m).unwrap() > 1e-6);
        let once = collapse(&s, &m).unwrap();
        let twice = collapse(&once, &m).unwrap();
        prop_assert!((once.norm_sqr() - 1.0).abs() < 1e-9);
        for (a, b) in once.components().iter().zip(twice.components()) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn fock_round_trip(a in 0.0..0.999f64, b in 0.0..0.999f64, beta in 0.0..PI, m_sq in 0.0..0.95f64) {
        let w = FockWeights::from_m_sq(m_sq).unwrap();
        let target = fock_conjunction(a, b, beta, w).unwrap().value;
        prop_assume!((0.0..=1.0).contains(&target));
        let back = interference_angle_conjunction(a, b, target, w).unwrap();
        prop_assert!((fock_conjunction(a, b, back, w).unwrap().value - target).abs() < 1e-9);
    }

    #[test]
    fn fock_disjunction_round_trip(a in 0.001..1.0f64, b in 0.001..1.0f64, beta in 0.0..PI, m_sq in 0.0..0.95f64) {
        let w = FockWeights::from_m_sq(m_sq).unwrap();
        let target = fock_disjunction(a, b, beta, w).unwrap().value;
        prop_assume!((0.0..=1.0).contains(&target));
        let back = interference_angle_disjunction(a, b, target, w).unwrap();
        prop_assert!((fock_disjunction(a, b, back, w).unwrap().value - target).abs() < 1e-9);
    }

    #[test]
    fn de_morgan_angles(a in 0.001..0.999f64, b in 0.001..0.999f64, t in 0.0..1.0f64, m_sq in 0.0..0.95f64) {
        let w = FockWeights::from_m_sq(m_sq).unwrap();
        let or = disjunction_cosine(a, b, t, w).unwrap();
        let and = conjunction_cosine(1.0 - a, 1.0 - b, 1.0 - t, w).unwrap();
        prop_assert!((or - and).abs() <= 1e-9 * or.abs().max(1.0));
        if or.abs() <= 1.0 {
            let x = interference_angle_disjunction(a, b, t, w).unwrap();
            let y = interference_angle_conjunction(1.0 - a, 1.0 - b, 1.0 - t, w).unwrap();
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn fock_decreases_with_angle(a in 0.0..0.99f64, b in 0.0..0.99f64, m_sq in 0.0..0.99f64, b1 in 0.01..3.13f64, gap in 1e-3..1.0f64) {
        let w = FockWeights::from_m_sq(m_sq).unwrap();
        let b2 = (b1 + gap).min(PI - 1e-3);
        prop_assume!(b2 > b1);
        prop_assert!(fock_conjunction(a, b, b2, w).unwrap().value < fock_conjunction(a, b, b1, w).unwrap().value);
    }

    #[test]
    fn right_angle_gives_interval_endpoints(a in 0.0..=1.0f64, b in 0.0..=1.0f64, m_sq in 0.0..=1.0f64) {
        let w = FockWeights::from_m_sq(m_sq).unwrap();
        let c = fock_conjunction(a, b, FRAC_PI_2, w).unwrap().value;
        prop_assert!((c - (m_sq * a * b + (1.0 - m_sq) * (a + b) / 2.0)).abs() < 1e-12);
        let d = fock_disjunction(a, b, FRAC_PI_2, w).unwrap().value;
        prop_assert!((d - (m_sq * (a + b - a * b) + (1.0 - m_sq) * (a + b) / 2.0)).abs() < 1e-12);
        // Both lie inside the no-interference intervals.
        prop_assert!(a * b - 1e-12 <= c && c <= (a + b) / 2.0 + 1e-12);
        prop_assert!((a + b) / 2.0 - 1e-12 <= d && d <= a + b - a * b + 1e-12);
    }

    #[test]
    fn complex_sum_global_phase(a in 0.0..5.0f64, b in 0.0..5.0f64, al in -PI..PI, be in -PI..PI, shift in -PI..PI) {
        let p = complex_sum_interference(a, al, b, be);
        prop_assert!((p - complex_sum_interference(a, al + shift, b, be + shift)).abs() < 1e-10);
        prop_assert!((p - (a * a + b * b + 2.0 * a * b * (be - al).cos())).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn c3_postconditions(a in 0.01..=1.0f64, frac in 0.0..=1.0f64, beta in 0.0..(2.0 * PI)) {
        // µ(B) ranges over [1 − µ(A), 1].
        let b = (1.0 - a) + frac * a;
        let s = build_c3_vectors(a, b, beta).unwrap();
        prop_assert!((s.vector_a.norm_sqr() - 1.0).abs() < 1e-9);
        prop_assert!((s.vector_b.norm_sqr() - 1.0).abs() < 1e-9);
        prop_assert!((s.membership_a() - a).abs() < 1e-9);
        prop_assert!((s.membership_b() - b).abs() < 1e-9);
        prop_assert!((s.interference_element().re - ((1.0 - a) * (1.0 - b)).sqrt() * beta.cos()).abs() < 1e-9);
    }

    #[test]
    fn spectral_family_sums_to_one((u, s) in (2usize..=5).prop_flat_map(|d| (unitary(d), state(d)))) {
        let family = rank_one_family(&u);
        prop_assert!(validate_spectral_family(&family).valid);
        let total: f64 = family.projectors().iter().map(|m| born_probability(&s, m).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalized_superposition_sums_to_one(rows in model_rows()) {
        let model = build_model(&rows).unwrap();
        let s = model.superposition();
        prop_assume!(s.norm_sqr() > 1e-6);
        let s = s.unit().unwrap();
        let total: f64 = model.family.projectors().iter().map(|m| born_probability(&s, m).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        // Summed interference bookkeeping: Σ(µor − ½(µA+µB)) = Σ √(µAµB) cos φ.
        let lhs: f64 = rows.iter().map(|r| r.mu_a_or_b - 0.5 * (r.mu_a + r.mu_b)).sum();
        let rhs: f64 = rows.iter().zip(&model.phases).map(|(r, p)| r.weight() * p.cos()).sum();
        prop_assert!((lhs - rhs).abs() < 1e-9);
        for (k, r) in rows.iter().enumerate() {
            prop_assert!((qconcept::disjunction::predict_disjunction(&model, k + 1).unwrap() - r.mu_a_or_b).abs() < 1e-9);
        }
    }
}

/// Choose-one rows with an admissible µ(A or B) for each exemplar.
fn model_rows() -> impl Strategy<Value = Vec<ExemplarRow>> {
    (2usize..=24).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01..1.0f64, n),
            prop::collection::vec(0.01..1.0f64, n),
            prop::collection::vec(-1.0..=1.0f64, n),
        )
            .prop_map(|(wa, wb, cos)| {
                let (sa, sb) = (wa.iter().sum::<f64>(), wb.iter().sum::<f64>());
                wa.iter()
                    .zip(&wb)
                    .zip(&cos)
                    .enumerate()
                    .map(|(k, ((x, y), c))| {
                        let (a, b) = (x / sa, y / sb);
                        let or = (0.5 * (a + b) + (a * b).sqrt() * c).clamp(0.0, 1.0);
                        ExemplarRow::new(k + 1, format!("e{}", k + 1), a, b, or, None)
                    })
                    .collect()
            })
    })
}

fn classical_joint() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0..1.0f64)
        .prop_filter("non-zero", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.map(|x| x / s)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn classical_joints_satisfy_conjunction_and_disjunction([ab, anb, nab, _nanb] in classical_joint()) {
        let (a, b) = ((ab + anb).min(1.0), (ab + nab).min(1.0));
        let and = conjunction_diagnostics(&MembershipTriple::new(a, b, ab, Connective::And)).unwrap();
        prop_assert!(and.classical_representable);
        let or = (ab + anb + nab).min(1.0);
        let or = disjunction_diagnostics(&MembershipTriple::new(a, b, or, Connective::Or)).unwrap();
        prop_assert!(or.classical_representable);
    }

    #[test]
    fn product_tables_respect_bell(q in prop::array::uniform2(0.0..=1.0f64), r in prop::array::uniform2(0.0..=1.0f64)) {
        // Settings order: AB, A'B, AB', A'B'.
        let t: Vec<CoincidenceTable> = [(0, 0), (1, 0), (0, 1), (1, 1)]
            .into_iter()
            .map(|(i, j)| {
                let (x, y) = (q[i], r[j]);
                CoincidenceTable::new("p", [x * y, x * (1.0 - y), (1.0 - x) * y, (1.0 - x) * (1.0 - y)]).unwrap()
            })
            .collect();
        let s = chsh_statistic(&t[0], &t[1], &t[2], &t[3]).unwrap();
        prop_assert!(s.s.abs() <= 2.0 + 1e-9);
    }

    #[test]
    fn local_mixtures_respect_bell(w in prop::array::uniform16(0.0..1.0f64)) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-9);
        let s: f64 = w.iter().zip(local_deterministic_values()).map(|(x, v)| x / total * v).sum();
        prop_assert!(s.abs() <= 2.0 + 1e-9);
    }
}

proptest! {
    #[test]
    fn interval_criteria(a in 0.0..=1.0f64, b in 0.0..=1.0f64, j in 0.0..=1.0f64) {
        let c = conjunction_diagnostics(&MembershipTriple::new(a, b, j, Connective::And)).unwrap();
        if c.interference_need >= 0.0 {
            prop_assert!(a * b <= j && j <= (a + b) / 2.0);
        }
        let d = disjunction_diagnostics(&MembershipTriple::new(a, b, j, Connective::Or)).unwrap();
        if d.interference_need >= 0.0 {
            prop_assert!((a + b) / 2.0 <= j && j <= a + b - a * b);
        }
    }

    #[test]
    fn diagnostics_are_symmetric(a in 0.0..=1.0f64, b in 0.0..=1.0f64, j in 0.0..=1.0f64, or in any::<bool>()) {
        let t = MembershipTriple::new(a, b, j, if or { Connective::Or } else { Connective::And });
        let (x, y) = (diagnose(&t).unwrap(), diagnose(&t.swapped()).unwrap());
        prop_assert!((x.delta - y.delta).abs() < 1e-15);
        prop_assert!((x.kolmogorov_factor - y.kolmogorov_factor).abs() < 1e-15);
        prop_assert!((x.interference_need - y.interference_need).abs() < 1e-15);
        prop_assert_eq!(x.extension_class, y.extension_class);
    }

    #[test]
    fn expectations_are_bounded(p in classical_joint()) {
        let t = CoincidenceTable::new("t", p).unwrap();
        let e = expectation_value(&t).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&e));
    }

    #[test]
    fn double_relabeling_preserves_chsh(t in prop::array::uniform4(classical_joint())) {
        let t = t.map(|p| CoincidenceTable::new("t", p).unwrap());
        let s = chsh_statistic(&t[0], &t[1], &t[2], &t[3]).unwrap();
        let f = t.each_ref().map(CoincidenceTable::flipped);
        let sf = chsh_statistic(&f[0], &f[1], &f[2], &f[3]).unwrap();
        prop_assert!((s.s - sf.s).abs() < 1e-12);
    }

    #[test]
    fn wavefield_scaling_covariance(x in -15.0..25.0f64, y in -15.0..20.0f64, s in 0.1..10.0f64, c in prop::collection::vec(-1.0..1.0f64, 6)) {
        let g = GaussianPair {
            amplitude_a: 0.12,
            amplitude_b: 0.13,
            sigma_ax: 5.0,
            sigma_ay: 6.0,
            sigma_bx: 4.0,
            sigma_by: 2.5,
            center_b: [10.0, 4.0],
        };
        let phase = PhasePolynomial {
            terms: qconcept::wavefield::monomial_basis(6)
                .into_iter()
                .zip(c)
                .map(|((m, n), coefficient)| PhaseTerm { exponent_x: m, exponent_y: n, coefficient })
                .collect(),
            length_scale: 15.0,
        };
        let p = sample_point(&g, &phase, x, y);
        let q = sample_point(&g.scaled(s), &phase.scaled(s), x * s, y * s);
        prop_assert!((p.superposed - q.superposed).abs() < 1e-12);
        prop_assert!((p.classical - q.classical).abs() < 1e-12);
        prop_assert!((p.phase - q.phase).abs() < 1e-9);
        // Pointwise ordering against the classical average.
        let cos = qconcept::wavefield::interference_cosine(p.phase);
        if cos > 0.0 { prop_assert!(p.superposed >= p.classical); }
        if cos < 0.0 { prop_assert!(p.superposed <= p.classical); }
        prop_assert!(p.superposed >= -1e-15);
    }
}

#[test]
fn parallel_raster_matches_sequential() {
    let g = GaussianPair {
        amplitude_a: 0.12,
        amplitude_b: 0.13,
        sigma_ax: 5.0,
        sigma_ay: 5.0,
        sigma_bx: 6.0,
        sigma_by: 3.0,
        center_b: [10.0, 4.0],
    };
    let phase = PhasePolynomial {
        terms: vec![
            PhaseTerm { exponent_x: 0, exponent_y: 0, coefficient: 0.3 },
            PhaseTerm { exponent_x: 1, exponent_y: 1, coefficient: 2.0 },
        ],
        length_scale: 10.0,
    };
    let cfg = WaveFieldConfig { gaussians: g, positions: vec![] };
    let grid = GridSpec { nx: 64, ny: 48, ..GridSpec::default() };
    let set = evaluate_patterns(&cfg, &phase, &grid).unwrap();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let s = sample_point(&g, &phase, grid.x(i), grid.y(j));
            assert_eq!(set.intensity_a.at(i, j), s.intensity_a);
            assert_eq!(set.superposed.at(i, j), s.superposed.max(0.0));
            assert_eq!(set.classical_average.at(i, j), s.classical);
        }
    }
    assert!(set.constructive > 0 && set.destructive > 0);
}
