//! Bipartite pure states, Schmidt decomposition, entanglement measures,
//! majorization and group-shifted families.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::FiniteGroup;
use crate::linalg::{svd, ComplexMatrix, LinalgError};

pub const NORM_TOL: f64 = 1e-10;
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;
pub const MAJORIZATION_TOL: f64 = 1e-10;
const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("probability vector sums to {0}, not 1")]
    NotProbability(f64),
    #[error("entropy base must exceed 1, got {0}")]
    InvalidBase(f64),
    #[error("operation needs a square amplitude matrix, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("invalid shifted-set specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Pure state `Σ c_ij |i⟩|j⟩` held as its amplitude matrix `[c_ij]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BipartitePureState {
    dual: ComplexMatrix,
}

impl BipartitePureState {
    pub fn new(dual: ComplexMatrix) -> Result<Self, StateError> {
        let norm = dual.frobenius_norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self { dual })
    }

    /// Rescales a nonzero amplitude matrix to unit norm.
    pub fn normalized(dual: ComplexMatrix) -> Result<Self, StateError> {
        let norm = dual.frobenius_norm();
        if norm == 0.0 {
            return Err(StateError::NotNormalized(0.0));
        }
        Self::new(dual.scale_real(1.0 / norm))
    }

    pub fn from_ket(ket: &[C64], d_a: usize, d_b: usize) -> Result<Self, StateError> {
        Self::new(dual_of_ket(ket, d_a, d_b)?)
    }

    /// `Σ_i |i⟩|i⟩ / √d`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self { dual: ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt()) }
    }

    /// `Σ_i √γ_i |i⟩|i⟩`; `gamma` must sum to one.
    pub fn from_schmidt_weights(gamma: &[f64]) -> Result<Self, StateError> {
        if gamma.iter().any(|&g| g < 0.0 || !g.is_finite()) {
            return Err(StateError::InvalidSpec("Schmidt weights must be nonnegative".into()));
        }
        let root: Vec<f64> = gamma.iter().map(|g| g.sqrt()).collect();
        Self::new(ComplexMatrix::diag_real(&root))
    }

    pub fn product(i: usize, j: usize, d_a: usize, d_b: usize) -> Self {
        let mut dual = ComplexMatrix::zeros(d_a, d_b);
        dual[(i, j)] = C64::new(1.0, 0.0);
        Self { dual }
    }

    pub fn dual(&self) -> &ComplexMatrix {
        &self.dual
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dual.shape()
    }

    pub fn ket(&self) -> Vec<C64> {
        ket_of_dual(&self.dual)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64, StateError> {
        Ok(self.dual.inner(&other.dual)?)
    }

    /// `(U ⊗ V)|ψ⟩`, i.e. `U · dual · Vᵀ`.
    pub fn apply_local(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<Self, StateError> {
        let dual = u.matmul(&self.dual)?.matmul(&v.transpose())?;
        Self::normalized(dual)
    }
}

impl<'de> Deserialize<'de> for BipartitePureState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let dual = ComplexMatrix::deserialize(d)?;
        Self::new(dual).map_err(serde::de::Error::custom)
    }
}

/// Reshapes a ket with index `i·d_b + j` into its `d_a×d_b` amplitude matrix.
pub fn dual_of_ket(ket: &[C64], d_a: usize, d_b: usize) -> Result<ComplexMatrix, StateError> {
    if ket.len() != d_a * d_b {
        return Err(StateError::DimensionMismatch(format!("ket of length {} for {d_a}x{d_b}", ket.len())));
    }
    Ok(ComplexMatrix::from_vec(d_a, d_b, ket.to_vec())?)
}

pub fn ket_of_dual(dual: &ComplexMatrix) -> Vec<C64> {
    dual.as_slice().to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtDecomposition {
    /// Nonincreasing `λ_r`.
    pub coefficients: Vec<f64>,
    /// Columns `u_r`.
    pub left_basis: ComplexMatrix,
    /// Columns `v_r`.
    pub right_basis: ComplexMatrix,
}

impl SchmidtDecomposition {
    /// Amplitude matrix of `Σ_r √λ_r |u_r⟩|v_r⟩`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let root: Vec<f64> = self.coefficients.iter().map(|l| l.sqrt()).collect();
        &(&self.left_basis * &ComplexMatrix::diag_real(&root)) * &self.right_basis.transpose()
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > tol).count()
    }
}

/// Schmidt form from the SVD of the amplitude matrix. Each `u_r` is fixed
/// so that its largest-modulus entry is real and positive.
pub fn schmidt_decompose(state: &BipartitePureState) -> Result<SchmidtDecomposition, StateError> {
    let dec = svd(state.dual())?;
    let mut left = dec.u;
    let mut right = dec.v.conj();
    for r in 0..dec.sigma.len() {
        let col = left.column(r);
        let pivot = col.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
        if pivot.norm() > 0.0 {
            let phase = pivot / pivot.norm();
            let u: Vec<C64> = col.iter().map(|z| z * phase.conj()).collect();
            let v: Vec<C64> = right.column(r).iter().map(|z| z * phase).collect();
            left.set_column(r, &u);
            right.set_column(r, &v);
        }
    }
    let coefficients = dec.sigma.iter().map(|s| s * s).collect();
    Ok(SchmidtDecomposition { coefficients, left_basis: left, right_basis: right })
}

pub fn schmidt_coefficients(state: &BipartitePureState) -> Result<Vec<f64>, StateError> {
    Ok(svd(state.dual())?.sigma.iter().map(|s| s * s).collect())
}

/// Shannon entropy `−Σ p log_base p`, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64], base: f64) -> Result<f64, StateError> {
    if base <= 1.0 || !base.is_finite() {
        return Err(StateError::InvalidBase(base));
    }
    let ln_base = base.ln();
    Ok(-p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln() / ln_base).sum::<f64>())
}

/// Entropy of entanglement in the given base; `None` uses the paper
/// normalization `base = min(D_A, D_B)`.
pub fn entropy_of_entanglement(state: &BipartitePureState, base: Option<f64>) -> Result<f64, StateError> {
    let (da, db) = state.dims();
    let base = base.unwrap_or(da.min(db) as f64);
    shannon_entropy(&schmidt_coefficients(state)?, base)
}

/// `D · |det ψ|^{2/D}`.
pub fn g_concurrence(state: &BipartitePureState) -> Result<f64, StateError> {
    let (da, db) = state.dims();
    if da != db {
        return Err(StateError::NotSquare(da, db));
    }
    let det = state.dual().det()?.norm();
    Ok(da as f64 * det.powf(2.0 / da as f64))
}

/// `D · (Π λ_r)^{1/D}` from Schmidt coefficients.
pub fn g_concurrence_of_coefficients(lambda: &[f64]) -> f64 {
    let d = lambda.len() as f64;
    if lambda.iter().any(|&l| l <= 0.0) {
        return 0.0;
    }
    d * (lambda.iter().map(|l| l.ln()).sum::<f64>() / d).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Majorization {
    XMajorizedByY,
    YMajorizedByX,
    Equal,
    Incomparable,
}

/// Compares two probability vectors under majorization (`x ≺ y` when every
/// sorted prefix sum of `x` is at most that of `y`). Shorter inputs are
/// zero-padded.
pub fn majorization_compare(x: &[f64], y: &[f64]) -> Result<Majorization, StateError> {
    majorization_compare_tol(x, y, MAJORIZATION_TOL)
}

pub fn majorization_compare_tol(x: &[f64], y: &[f64], tol: f64) -> Result<Majorization, StateError> {
    for v in [x, y] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > PROBABILITY_SUM_TOL || v.iter().any(|p| !p.is_finite()) {
            return Err(StateError::NotProbability(s));
        }
    }
    let n = x.len().max(y.len());
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.resize(n, 0.0);
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (xs, ys) = (sorted(x), sorted(y));
    if xs.iter().zip(&ys).all(|(a, b)| (a - b).abs() <= tol) {
        return Ok(Majorization::Equal);
    }
    let (mut px, mut py) = (0.0, 0.0);
    let (mut x_below, mut y_below) = (true, true);
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if px > py + tol {
            x_below = false;
        }
        if py > px + tol {
            y_below = false;
        }
    }
    Ok(match (x_below, y_below) {
        (true, true) => Majorization::Equal,
        (true, false) => Majorization::XMajorizedByY,
        (false, true) => Majorization::YMajorizedByX,
        (false, false) => Majorization::Incomparable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftSide {
    A,
    B,
}

/// A group-shifted family. Weights and phase columns use the flattened
/// index `g·n_t + n` for element `g` and copy `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ShiftedSetSpec {
    group: FiniteGroup,
    copies: usize,
    weights: Vec<f64>,
    phases: Vec<Vec<f64>>,
    shift_side: ShiftSide,
}

#[derive(Deserialize)]
struct RawSpec {
    group: FiniteGroup,
    #[serde(default = "one")]
    copies: usize,
    weights: Vec<f64>,
    #[serde(default)]
    phases: Option<Vec<Vec<f64>>>,
    #[serde(default = "side_b")]
    shift_side: ShiftSide,
}

fn one() -> usize {
    1
}

fn side_b() -> ShiftSide {
    ShiftSide::B
}

impl TryFrom<RawSpec> for ShiftedSetSpec {
    type Error = StateError;

    fn try_from(r: RawSpec) -> Result<Self, StateError> {
        Self::new(r.group, r.copies, r.weights, r.phases, r.shift_side)
    }
}

impl ShiftedSetSpec {
    pub fn new(
        group: FiniteGroup,
        copies: usize,
        weights: Vec<f64>,
        phases: Option<Vec<Vec<f64>>>,
        shift_side: ShiftSide,
    ) -> Result<Self, StateError> {
        if copies == 0 {
            return Err(StateError::InvalidSpec("copies must be positive".into()));
        }
        let d = group.order() * copies;
        if weights.len() != d {
            return Err(StateError::InvalidSpec(format!("expected {d} weights, got {}", weights.len())));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(StateError::InvalidSpec("weights must be finite and strictly positive".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(StateError::InvalidSpec(format!("weights sum to {sum}, not 1")));
        }
        let phases = phases.unwrap_or_else(|| vec![vec![0.0; d]; group.order()]);
        if phases.len() != group.order() || phases.iter().any(|row| row.len() != d) {
            return Err(StateError::InvalidSpec(format!("phases must be a {}x{d} matrix", group.order())));
        }
        if phases.iter().flatten().any(|p| !p.is_finite()) {
            return Err(StateError::InvalidSpec("phases must be finite".into()));
        }
        Ok(Self { group, copies, weights, phases, shift_side })
    }

    /// Zero phases, shift on B, one copy.
    pub fn simple(group: FiniteGroup, weights: Vec<f64>) -> Result<Self, StateError> {
        Self::new(group, 1, weights, None, ShiftSide::B)
    }

    pub fn uniform(group: FiniteGroup, copies: usize) -> Self {
        let d = group.order() * copies;
        Self::new(group, copies, vec![1.0 / d as f64; d], None, ShiftSide::B).expect("uniform weights are valid")
    }

    pub fn with_shift_side(mut self, side: ShiftSide) -> Self {
        self.shift_side = side;
        self
    }

    pub fn with_phases(self, phases: Vec<Vec<f64>>) -> Result<Self, StateError> {
        Self::new(self.group, self.copies, self.weights, Some(phases), self.shift_side)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn dimension(&self) -> usize {
        self.group.order() * self.copies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, g: usize, n: usize) -> f64 {
        self.weights[self.index(g, n)]
    }

    pub fn index(&self, g: usize, n: usize) -> usize {
        g * self.copies + n
    }

    pub fn phases(&self) -> &[Vec<f64>] {
        &self.phases
    }

    pub fn shift_side(&self) -> ShiftSide {
        self.shift_side
    }

    pub fn has_phases(&self) -> bool {
        self.phases.iter().flatten().any(|&p| p != 0.0)
    }

    /// Per-copy block weights `w_m = Σ_k λ_{k,m}`.
    pub fn block_weights(&self) -> Vec<f64> {
        (0..self.copies).map(|m| self.group.elements().map(|k| self.weight(k, m)).sum()).collect()
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let u = 1.0 / self.dimension() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= tol)
    }
}

/// `|ψ_f⟩ = Σ_{g,n} √λ_{g,n} e^{iθ_{f,(g,n)}} |g,n⟩|fg,n⟩` (shift on B), or
/// with the two factors swapped (shift on A), for every `f` in order.
pub fn build_group_shifted(spec: &ShiftedSetSpec) -> Vec<BipartitePureState> {
    let g = spec.group();
    let d = spec.dimension();
    g.elements()
        .map(|f| {
            let mut dual = ComplexMatrix::zeros(d, d);
            for h in g.elements() {
                for n in 0..spec.copies() {
                    let k = spec.index(h, n);
                    let amp = C64::from_polar(spec.weights[k].sqrt(), spec.phases[f][k]);
                    let shifted = spec.index(g.mul(f, h), n);
                    match spec.shift_side() {
                        ShiftSide::B => dual[(k, shifted)] = amp,
                        ShiftSide::A => dual[(shifted, k)] = amp,
                    }
                }
            }
            BipartitePureState { dual }
        })
        .collect()
}
