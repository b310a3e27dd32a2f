//! Double-slit style synthesis of a disjunction model in the plane.
//!
//! Concept `A` is a Gaussian centred at the origin, concept `B` one centred at
//! `center_b`; each exemplar is placed where both intensities equal its
//! membership weights, and a polynomial phase field interpolates the
//! interference angles so that `½|ψ_A + ψ_B|²` reproduces `µ(A or B)` there.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disjunction::{DisjunctionModel, ExemplarRow};

pub type Point = [f64; 2];

/// Phases within this many radians of ±90° contribute exactly no interference.
pub const RIGHT_ANGLE_SNAP: f64 = 1e-12;
/// Largest accepted interpolation error of the phase field, radians.
pub const PHASE_RESIDUAL_LIMIT: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum WavefieldError {
    #[error("no rows")]
    Empty,
    #[error("row {index}: zero membership weight cannot be placed under a Gaussian")]
    ZeroWeight { index: usize },
    #[error("peak amplitude {amplitude} is below the largest weight {max_weight}")]
    AmplitudeTooSmall { amplitude: f64, max_weight: f64 },
    #[error("anchor rows coincide or do not pin the widths")]
    DegenerateAnchors,
    #[error("row {index}: the two level curves are disjoint, the widths must be enlarged")]
    CirclesDisjoint { index: usize },
    #[error("no aspect ratio pair within ±{max_step} steps places every exemplar")]
    NoFeasibleWidths { max_step: i32 },
    #[error("{positions} positions but {phases} phases")]
    LengthMismatch { positions: usize, phases: usize },
    #[error("positions {i} and {j} coincide")]
    PositionsNotDistinct { i: usize, j: usize },
    #[error("phase field interpolation residual {residual} exceeds the limit")]
    PhaseFitFailed { residual: f64 },
    #[error("raster does not cover exemplar {index} at ({x}, {y})")]
    RasterDoesNotCover { index: usize, x: f64, y: f64 },
    #[error("invalid raster: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Two axis-aligned Gaussian intensity profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPair {
    pub amplitude_a: f64,
    pub amplitude_b: f64,
    pub sigma_ax: f64,
    pub sigma_ay: f64,
    pub sigma_bx: f64,
    pub sigma_by: f64,
    pub center_b: Point,
}

impl GaussianPair {
    /// `|ψ_A(x, y)|²`.
    pub fn intensity_a(&self, x: f64, y: f64) -> f64 {
        self.amplitude_a * (-(x * x / (2.0 * self.sigma_ax * self.sigma_ax) + y * y / (2.0 * self.sigma_ay * self.sigma_ay))).exp()
    }

    /// `|ψ_B(x, y)|²`.
    pub fn intensity_b(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.center_b[0], y - self.center_b[1]);
        self.amplitude_b * (-(dx * dx / (2.0 * self.sigma_bx * self.sigma_bx) + dy * dy / (2.0 * self.sigma_by * self.sigma_by))).exp()
    }

    pub fn is_circular(&self) -> bool {
        self.sigma_ax == self.sigma_ay && self.sigma_bx == self.sigma_by
    }

    fn center_distance(&self) -> f64 {
        self.center_b[0].hypot(self.center_b[1])
    }

    /// Scales every length by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            sigma_ax: self.sigma_ax * s,
            sigma_ay: self.sigma_ay * s,
            sigma_bx: self.sigma_bx * s,
            sigma_by: self.sigma_by * s,
            center_b: [self.center_b[0] * s, self.center_b[1] * s],
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFieldConfig {
    #[serde(flatten)]
    pub gaussians: GaussianPair,
    pub positions: Vec<Point>,
}

/// Which rows sit at the two centres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Anchors {
    /// Row position (0-based) placed at the origin.
    pub a: usize,
    /// Row position (0-based) placed at `center_b`.
    pub b: usize,
}

impl Anchors {
    /// The rows with the largest `µ(A)` and `µ(B)`, first on ties.
    pub fn from_peaks(rows: &[ExemplarRow]) -> Result<Self, WavefieldError> {
        let argmax = |f: fn(&ExemplarRow) -> f64| {
            rows.iter()
                .enumerate()
                .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
                    Some((_, v)) if v >= f(r) => best,
                    _ => Some((i, f(r))),
                })
                .map(|(i, _)| i)
                .ok_or(WavefieldError::Empty)
        };
        let anchors = Self {
            a: argmax(|r| r.mu_a)?,
            b: argmax(|r| r.mu_b)?,
        };
        if anchors.a == anchors.b {
            return Err(WavefieldError::DegenerateAnchors);
        }
        Ok(anchors)
    }
}

/// `2 ln(D/µ)`: the squared normalized radius of the level curve through `µ`.
fn level(amplitude: f64, mu: f64, index: usize) -> Result<f64, WavefieldError> {
    if mu <= 0.0 {
        return Err(WavefieldError::ZeroWeight { index });
    }
    Ok((2.0 * (amplitude / mu).ln()).max(0.0))
}

fn check_amplitudes(rows: &[ExemplarRow], g: &GaussianPair) -> Result<(), WavefieldError> {
    for (amplitude, max_weight) in [
        (g.amplitude_a, rows.iter().map(|r| r.mu_a).fold(0.0, f64::max)),
        (g.amplitude_b, rows.iter().map(|r| r.mu_b).fold(0.0, f64::max)),
    ] {
        if amplitude < max_weight {
            return Err(WavefieldError::AmplitudeTooSmall { amplitude, max_weight });
        }
    }
    Ok(())
}

fn cross(u: Point, p: Point) -> f64 {
    u[0] * p[1] - u[1] * p[0]
}

fn circle_intersections(g: &GaussianPair, ca: f64, cb: f64) -> Option<[Point; 2]> {
    let d = g.center_distance();
    let (ra, rb) = (g.sigma_ax * ca.sqrt(), g.sigma_bx * cb.sqrt());
    let t = (d * d + ra * ra - rb * rb) / (2.0 * d);
    let h_sq = ra * ra - t * t;
    if h_sq < -1e-12 * (ra * ra).max(1.0) {
        return None;
    }
    let h = h_sq.max(0.0).sqrt();
    let u = [g.center_b[0] / d, g.center_b[1] / d];
    let n = [-u[1], u[0]];
    Some([
        [t * u[0] + h * n[0], t * u[1] + h * n[1]],
        [t * u[0] - h * n[0], t * u[1] - h * n[1]],
    ])
}

/// Points of the `A` level ellipse `ca` that lie on the `B` level ellipse
/// `cb`, found by sampling the parametrized `A` ellipse and bisecting.
fn ellipse_intersections(g: &GaussianPair, ca: f64, cb: f64, samples: usize) -> Vec<Point> {
    let (ax, ay) = (g.sigma_ax * ca.sqrt(), g.sigma_ay * ca.sqrt());
    let point = |t: f64| [ax * t.cos(), ay * t.sin()];
    let f = |t: f64| {
        let [x, y] = point(t);
        ((x - g.center_b[0]) / g.sigma_bx).powi(2) + ((y - g.center_b[1]) / g.sigma_by).powi(2) - cb
    };
    let step = 2.0 * PI / samples as f64;
    let mut roots = Vec::new();
    for i in 0..samples {
        let (mut lo, mut hi) = (i as f64 * step, (i + 1) as f64 * step);
        let (mut f_lo, f_hi) = (f(lo), f(hi));
        if f_lo == 0.0 {
            roots.push(point(lo));
            continue;
        }
        if f_lo.signum() == f_hi.signum() || f_hi == 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = f(mid);
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        roots.push(point(0.5 * (lo + hi)));
    }
    roots
}

/// Sampling density for the elliptic level-curve search.
pub const ELLIPSE_SAMPLES: usize = 720;

fn candidates(g: &GaussianPair, ca: f64, cb: f64) -> Vec<Point> {
    if ca == 0.0 {
        return vec![[0.0, 0.0]];
    }
    if cb == 0.0 {
        return vec![g.center_b];
    }
    if g.is_circular() {
        circle_intersections(g, ca, cb).map(Vec::from).unwrap_or_default()
    } else {
        ellipse_intersections(g, ca, cb, ELLIPSE_SAMPLES)
    }
}

/// Places each exemplar where `|ψ_A|² = µ(A)_k` and `|ψ_B|² = µ(B)_k`.
///
/// Of the two mirror solutions about the line joining the centres, odd
/// indices take the positive side and even indices the negative side.
pub fn place_exemplars(rows: &[ExemplarRow], anchors: Anchors, g: &GaussianPair) -> Result<Vec<Point>, WavefieldError> {
    if rows.is_empty() {
        return Err(WavefieldError::Empty);
    }
    check_amplitudes(rows, g)?;
    let u = g.center_b;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            if i == anchors.a {
                return Ok([0.0, 0.0]);
            }
            if i == anchors.b {
                return Ok(g.center_b);
            }
            let ca = level(g.amplitude_a, r.mu_a, r.index)?;
            let cb = level(g.amplitude_b, r.mu_b, r.index)?;
            let found = candidates(g, ca, cb);
            let side = |p: &Point| cross(u, *p);
            let pick = if r.index % 2 == 1 {
                found.into_iter().max_by(|p, q| side(p).total_cmp(&side(q)))
            } else {
                found.into_iter().min_by(|p, q| side(p).total_cmp(&side(q)))
            };
            pick.ok_or(WavefieldError::CirclesDisjoint { index: r.index })
        })
        .collect()
}

/// Widths pinned by the anchors, with aspect ratios `σ_y/σ_x = 2^(j/8)`.
fn pinned_widths(rows: &[ExemplarRow], anchors: Anchors, amplitudes: (f64, f64), center_b: Point, steps: (i32, i32)) -> Result<GaussianPair, WavefieldError> {
    let (rho_a, rho_b) = (2f64.powf(f64::from(steps.0) / 8.0), 2f64.powf(f64::from(steps.1) / 8.0));
    let (a, b) = (center_b[0], center_b[1]);
    let la = level(amplitudes.0, rows[anchors.b].mu_a, rows[anchors.b].index)?;
    let lb = level(amplitudes.1, rows[anchors.a].mu_b, rows[anchors.a].index)?;
    if la == 0.0 || lb == 0.0 || (a == 0.0 && b == 0.0) {
        return Err(WavefieldError::DegenerateAnchors);
    }
    let sigma_ax = ((a * a + b * b / (rho_a * rho_a)) / la).sqrt();
    let sigma_bx = ((a * a + b * b / (rho_b * rho_b)) / lb).sqrt();
    Ok(GaussianPair {
        amplitude_a: amplitudes.0,
        amplitude_b: amplitudes.1,
        sigma_ax,
        sigma_ay: if steps.0 == 0 { sigma_ax } else { rho_a * sigma_ax },
        sigma_bx,
        sigma_by: if steps.1 == 0 { sigma_bx } else { rho_b * sigma_bx },
        center_b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavefieldOptions {
    pub center_b: Point,
    /// Largest `|j|` in the aspect-ratio search.
    pub max_aspect_step: i32,
}

impl Default for WavefieldOptions {
    fn default() -> Self {
        Self {
            center_b: [10.0, 4.0],
            max_aspect_step: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedConfig {
    pub config: WaveFieldConfig,
    pub anchors: Anchors,
    /// Aspect-ratio exponents `(j_A, j_B)`; `(0, 0)` is circular.
    pub aspect_steps: (i32, i32),
}

/// Peak amplitudes at the largest weights, widths pinned by the anchor rows,
/// circular when that places every exemplar and otherwise the first
/// feasible aspect pair ordered by `|j_A| + |j_B|`, then `j_A`, then `j_B`.
pub fn fit_config(rows: &[ExemplarRow], opts: &WavefieldOptions) -> Result<FittedConfig, WavefieldError> {
    let anchors = Anchors::from_peaks(rows)?;
    let amplitudes = (rows[anchors.a].mu_a, rows[anchors.b].mu_b);
    let m = opts.max_aspect_step;
    let mut steps: Vec<(i32, i32, i32)> = (-m..=m)
        .flat_map(|ja| (-m..=m).map(move |jb| (ja.abs() + jb.abs(), ja, jb)))
        .collect();
    steps.sort_unstable();
    for (_, ja, jb) in steps {
        let g = pinned_widths(rows, anchors, amplitudes, opts.center_b, (ja, jb))?;
        match place_exemplars(rows, anchors, &g) {
            Ok(positions) => {
                return Ok(FittedConfig {
                    config: WaveFieldConfig { gaussians: g, positions },
                    anchors,
                    aspect_steps: (ja, jb),
                })
            }
            Err(WavefieldError::CirclesDisjoint { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(WavefieldError::NoFeasibleWidths { max_step: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTerm {
    pub exponent_x: u32,
    pub exponent_y: u32,
    pub coefficient: f64,
}

/// `φ(x, y) = Σ c·(x/L)^m (y/L)^n` in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePolynomial {
    pub terms: Vec<PhaseTerm>,
    pub length_scale: f64,
}

impl PhasePolynomial {
    pub fn constant(phi: f64) -> Self {
        Self {
            terms: vec![PhaseTerm {
                exponent_x: 0,
                exponent_y: 0,
                coefficient: phi,
            }],
            length_scale: 1.0,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (u, v) = (x / self.length_scale, y / self.length_scale);
        self.terms
            .iter()
            .map(|t| t.coefficient * monomial(u, v, t.exponent_x, t.exponent_y))
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            terms: self.terms.clone(),
            length_scale: self.length_scale * s,
        }
    }
}

fn monomial(u: f64, v: f64, m: u32, n: u32) -> f64 {
    u.powi(m as i32) * v.powi(n as i32)
}

/// The first `count` exponent pairs by total degree, then ascending x-exponent.
pub fn monomial_basis(count: usize) -> Vec<(u32, u32)> {
    (0u32..)
        .flat_map(|d| (0..=d).map(move |m| (m, d - m)))
        .take(count)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseFit {
    pub polynomial: PhasePolynomial,
    /// Set when the square system was singular and the minimum-norm
    /// least-squares solution over a larger basis was used.
    pub fallback: bool,
    pub max_residual: f64,
}

/// Extra monomials used by the least-squares fallback.
pub const FALLBACK_EXTRA_TERMS: usize = 6;

/// Interpolates the phases with as many monomials as points.
pub fn fit_phase_field(positions: &[Point], phases: &[f64]) -> Result<PhaseFit, WavefieldError> {
    fit_phase_field_with(positions, phases, positions.len())
}

pub fn fit_phase_field_with(positions: &[Point], phases: &[f64], terms: usize) -> Result<PhaseFit, WavefieldError> {
    if positions.len() != phases.len() {
        return Err(WavefieldError::LengthMismatch {
            positions: positions.len(),
            phases: phases.len(),
        });
    }
    if positions.is_empty() {
        return Err(WavefieldError::Empty);
    }
    for i in 0..positions.len() {
        for j in 0..i {
            if positions[i] == positions[j] {
                return Err(WavefieldError::PositionsNotDistinct { i: j, j: i });
            }
        }
    }
    let scale = positions.iter().flat_map(|p| [p[0].abs(), p[1].abs()]).fold(0.0, f64::max);
    let length_scale = if scale > 0.0 { scale } else { 1.0 };
    // Fitting the deviations from the mean makes a constant input come out
    // as an exactly constant polynomial.
    let mean = phases.iter().sum::<f64>() / phases.len() as f64;
    let rhs = DVector::from_iterator(phases.len(), phases.iter().map(|p| p - mean));

    let solve = |count: usize, least_squares: bool| -> Option<PhasePolynomial> {
        let basis = monomial_basis(count);
        let v = DMatrix::from_fn(positions.len(), count, |i, j| {
            let (m, n) = basis[j];
            monomial(positions[i][0] / length_scale, positions[i][1] / length_scale, m, n)
        });
        let coeffs = if least_squares {
            v.svd(true, true).solve(&rhs, 1e-12).ok()?
        } else {
            v.lu().solve(&rhs)?
        };
        let terms = basis
            .iter()
            .zip(coeffs.iter())
            .map(|(&(m, n), &c)| PhaseTerm {
                exponent_x: m,
                exponent_y: n,
                coefficient: if m == 0 && n == 0 { mean + c } else { c },
            })
            .collect();
        Some(PhasePolynomial { terms, length_scale })
    };
    let residual = |p: &PhasePolynomial| {
        positions
            .iter()
            .zip(phases)
            .map(|(q, phi)| (p.eval(q[0], q[1]) - phi).abs())
            .fold(0.0, f64::max)
    };

    let square = (terms == positions.len()).then(|| solve(terms, false)).flatten();
    if let Some(polynomial) = square {
        let max_residual = residual(&polynomial);
        if max_residual <= PHASE_RESIDUAL_LIMIT {
            return Ok(PhaseFit {
                polynomial,
                fallback: false,
                max_residual,
            });
        }
    }
    let count = if terms == positions.len() { terms + FALLBACK_EXTRA_TERMS } else { terms };
    let polynomial = solve(count, true).ok_or(WavefieldError::PhaseFitFailed { residual: f64::INFINITY })?;
    let max_residual = residual(&polynomial);
    if max_residual > PHASE_RESIDUAL_LIMIT {
        return Err(WavefieldError::PhaseFitFailed { residual: max_residual });
    }
    Ok(PhaseFit {
        polynomial,
        fallback: true,
        max_residual,
    })
}

/// `cos φ`, exactly zero near a right angle.
pub fn interference_cosine(phi: f64) -> f64 {
    if (phi.abs() - FRAC_PI_2).abs() <= RIGHT_ANGLE_SNAP {
        0.0
    } else {
        phi.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointSample {
    pub intensity_a: f64,
    pub intensity_b: f64,
    pub phase: f64,
    /// Before clamping at zero.
    pub superposed: f64,
    pub classical: f64,
}

pub fn sample_point(g: &GaussianPair, phase: &PhasePolynomial, x: f64, y: f64) -> PointSample {
    let ia = g.intensity_a(x, y);
    let ib = g.intensity_b(x, y);
    let phi = phase.eval(x, y);
    let classical = 0.5 * (ia + ib);
    PointSample {
        intensity_a: ia,
        intensity_b: ib,
        phase: phi,
        superposed: classical + (ia * ib).sqrt() * interference_cosine(phi),
        classical,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: 512,
            ny: 512,
            x_min: -15.0,
            x_max: 25.0,
            y_min: -15.0,
            y_max: 20.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), WavefieldError> {
        if self.nx == 0 || self.ny == 0 {
            return Err(WavefieldError::InvalidGrid("raster dimensions must be positive".into()));
        }
        if !(self.x_min <= self.x_max && self.y_min <= self.y_max) {
            return Err(WavefieldError::InvalidGrid("extent bounds are reversed".into()));
        }
        Ok(())
    }

    /// Sample coordinates include both ends of each axis.
    pub fn x(&self, i: usize) -> f64 {
        axis(self.x_min, self.x_max, self.nx, i)
    }

    pub fn y(&self, j: usize) -> f64 {
        axis(self.y_min, self.y_max, self.ny, j)
    }

    pub fn covers(&self, p: Point) -> bool {
        (self.x_min..=self.x_max).contains(&p[0]) && (self.y_min..=self.y_max).contains(&p[1])
    }

    pub fn extent(&self) -> [f64; 4] {
        [self.x_min, self.x_max, self.y_min, self.y_max]
    }
}

fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternKind {
    IntensityA,
    IntensityB,
    Superposed,
    ClassicalAverage,
}

impl PatternKind {
    pub const ALL: [PatternKind; 4] = [Self::IntensityA, Self::IntensityB, Self::Superposed, Self::ClassicalAverage];

    pub fn file_stem(self) -> &'static str {
        match self {
            Self::IntensityA => "intensity_a",
            Self::IntensityB => "intensity_b",
            Self::Superposed => "superposed",
            Self::ClassicalAverage => "classical_average",
        }
    }
}

/// Row-major raster: `values[j * nx + i]` is the sample at `(x(i), y(j))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPattern {
    pub nx: usize,
    pub ny: usize,
    pub extent: [f64; 4],
    pub values: Vec<f64>,
    pub kind: PatternKind,
}

impl GridPattern {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn spec(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            x_min: self.extent[0],
            x_max: self.extent[1],
            y_min: self.extent[2],
            y_max: self.extent[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    pub intensity_a: GridPattern,
    pub intensity_b: GridPattern,
    pub superposed: GridPattern,
    pub classical_average: GridPattern,
    /// Superposed samples that came out negative and were set to zero.
    pub clamp_count: usize,
    /// Samples where `cos φ > 0` and where `cos φ < 0`.
    pub constructive: usize,
    pub destructive: usize,
}

impl PatternSet {
    pub fn get(&self, kind: PatternKind) -> &GridPattern {
        match kind {
            PatternKind::IntensityA => &self.intensity_a,
            PatternKind::IntensityB => &self.intensity_b,
            PatternKind::Superposed => &self.superposed,
            PatternKind::ClassicalAverage => &self.classical_average,
        }
    }
}

/// Rasterizes the four patterns, rows in parallel. Every sample is a pure
/// function of its coordinates, so the result matches a sequential pass.
pub fn evaluate_patterns(config: &WaveFieldConfig, phase: &PhasePolynomial, grid: &GridSpec) -> Result<PatternSet, WavefieldError> {
    grid.validate()?;
    for (index, p) in config.positions.iter().enumerate() {
        if !grid.covers(*p) {
            return Err(WavefieldError::RasterDoesNotCover {
                index: index + 1,
                x: p[0],
                y: p[1],
            });
        }
    }
    let g = &config.gaussians;
    let rows: Vec<_> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let y = grid.y(j);
            let mut out = [Vec::with_capacity(grid.nx), Vec::with_capacity(grid.nx), Vec::with_capacity(grid.nx), Vec::with_capacity(grid.nx)];
            let (mut clamped, mut constructive, mut destructive) = (0, 0, 0);
            for i in 0..grid.nx {
                let s = sample_point(g, phase, grid.x(i), y);
                let c = interference_cosine(s.phase);
                constructive += usize::from(c > 0.0);
                destructive += usize::from(c < 0.0);
                let superposed = if s.superposed < 0.0 {
                    clamped += 1;
                    0.0
                } else {
                    s.superposed
                };
                out[0].push(s.intensity_a);
                out[1].push(s.intensity_b);
                out[2].push(superposed);
                out[3].push(s.classical);
            }
            (out, clamped, constructive, destructive)
        })
        .collect();
    let mut values: [Vec<f64>; 4] = Default::default();
    let (mut clamp_count, mut constructive, mut destructive) = (0, 0, 0);
    for (out, c, pos, neg) in rows {
        for (dst, src) in values.iter_mut().zip(out) {
            dst.extend(src);
        }
        clamp_count += c;
        constructive += pos;
        destructive += neg;
    }
    let [a, b, s, c] = values;
    let pattern = |values, kind| GridPattern {
        nx: grid.nx,
        ny: grid.ny,
        extent: grid.extent(),
        values,
        kind,
    };
    Ok(PatternSet {
        intensity_a: pattern(a, PatternKind::IntensityA),
        intensity_b: pattern(b, PatternKind::IntensityB),
        superposed: pattern(s, PatternKind::Superposed),
        classical_average: pattern(c, PatternKind::ClassicalAverage),
        clamp_count,
        constructive,
        destructive,
    })
}

/// Everything needed to render a disjunction model in the plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wavefield {
    pub fitted: FittedConfig,
    pub phase: PhaseFit,
}

/// Places the model's exemplars and fits the phase field to its phases.
pub fn synthesize(model: &DisjunctionModel, opts: &WavefieldOptions) -> Result<Wavefield, WavefieldError> {
    let fitted = fit_config(&model.rows, opts)?;
    let phase = fit_phase_field(&fitted.config.positions, &model.phases)?;
    Ok(Wavefield { fitted, phase })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Pgm,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "pgm" => Ok(Self::Pgm),
            other => Err(format!("unknown format {other:?}, expected csv or pgm")),
        }
    }
}

/// `x,y,value` rows in raster order, 9 significant digits.
pub fn write_csv<W: Write>(p: &GridPattern, mut out: W) -> io::Result<()> {
    let spec = p.spec();
    writeln!(out, "x,y,value")?;
    for j in 0..p.ny {
        for i in 0..p.nx {
            writeln!(out, "{:.8e},{:.8e},{:.8e}", spec.x(i), spec.y(j), p.at(i, j))?;
        }
    }
    Ok(())
}

/// Parses the output of [`write_csv`] back into `(x, y, value)` triples.
pub fn read_csv(text: &str) -> Result<Vec<[f64; 3]>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "x,y,value")) => {}
        _ => return Err("missing header x,y,value".into()),
    }
    lines
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(format!("line {}: expected 3 fields", n + 1));
            }
            let mut out = [0.0; 3];
            for (slot, f) in out.iter_mut().zip(fields) {
                *slot = f.parse().map_err(|e| format!("line {}: {e}", n + 1))?;
            }
            Ok(out)
        })
        .collect()
}

pub const PGM_MAXVAL: u16 = u16::MAX;

/// Metadata written next to a PGM raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgmSidecar {
    pub kind: PatternKind,
    pub nx: usize,
    pub ny: usize,
    pub extent: [f64; 4],
    /// Value mapped to 0.
    pub min: f64,
    /// Value mapped to `maxval`; equal to `min` for a flat raster, which is all zeros.
    pub max: f64,
    pub maxval: u16,
    pub top_row: String,
}

/// Binary 16-bit graymap, min-max normalized, top row at `y_max`.
pub fn write_pgm<W: Write>(p: &GridPattern, mut out: W) -> io::Result<PgmSidecar> {
    let min = p.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    write!(out, "P5\n{} {}\n{}\n", p.nx, p.ny, PGM_MAXVAL)?;
    let mut bytes = Vec::with_capacity(2 * p.values.len());
    for j in (0..p.ny).rev() {
        for i in 0..p.nx {
            let level = if span > 0.0 {
                ((p.at(i, j) - min) / span * f64::from(PGM_MAXVAL)).round() as u16
            } else {
                0
            };
            bytes.extend_from_slice(&level.to_be_bytes());
        }
    }
    out.write_all(&bytes)?;
    Ok(PgmSidecar {
        kind: p.kind,
        nx: p.nx,
        ny: p.ny,
        extent: p.extent,
        min,
        max,
        maxval: PGM_MAXVAL,
        top_row: "y_max".into(),
    })
}
