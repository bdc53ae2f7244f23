//! State-vector simulation of the local cloning protocol for group-shifted
//! states with a shared blank.
//!
//! The four registers are ordered `A ⊗ B ⊗ a ⊗ b`, each of dimension `D`,
//! and amplitude `(A, B, a, b)` sits at `((A·D + B)·D + a)·D + b`. A register
//! label `l` encodes element `l / n_t` and copy `l % n_t`.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::groups::FiniteGroup;
use crate::linalg::ComplexMatrix;
use crate::states::{build_group_shifted, schmidt_coefficients, BipartitePureState, ShiftSide, ShiftedSetSpec, StateError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("group element {0} out of range")]
    UnknownElement(usize),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolOptions {
    /// Party that measures: `B` measures on `a`, `A` measures on `b`.
    /// `None` follows the shift side of the spec.
    pub variant: Option<ShiftSide>,
    /// Stop after the controlled-group step (no measurement, no correction).
    pub skip_measurement: bool,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self { variant: None, skip_measurement: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloningOutcome {
    pub outcome: usize,
    pub probability: f64,
    pub fidelity: f64,
    #[serde(skip)]
    pub output_state: Vec<C64>,
}

/// `Σ_{g,n} |g,n⟩⟨g,n| ⊗ P_g` on control ⊗ target, index `control·D + target`.
pub fn controlled_group_unitary(group: &FiniteGroup, copies: usize) -> ComplexMatrix {
    let d = group.order() * copies;
    let mut images = vec![0; d * d];
    for c in 0..d {
        for t in 0..d {
            images[c * d + t] = c * d + shift_label(group, copies, c / copies, t);
        }
    }
    ComplexMatrix::permutation(&images)
}

/// Diagonal `M_r` with entries `(Σ_k λ_{k,m})^{-1/2} √λ_{hr,m}` at label `(h, m)`.
pub fn measurement_family(spec: &ShiftedSetSpec) -> Vec<ComplexMatrix> {
    let g = spec.group();
    g.elements().map(|r| ComplexMatrix::diag_real(&measurement_diagonal(spec, r))).collect()
}

/// Permutation `Q_r |h, m⟩ = |hr, m⟩`.
pub fn correction_unitary(group: &FiniteGroup, r: usize, copies: usize) -> Result<ComplexMatrix, ProtocolError> {
    if r >= group.order() {
        return Err(ProtocolError::UnknownElement(r));
    }
    let d = group.order() * copies;
    let images: Vec<usize> = (0..d).map(|l| right_label(group, copies, l, r)).collect();
    Ok(ComplexMatrix::permutation(&images))
}

/// Blank `Σ_{h,m} |h,m⟩|h,m⟩ / √D`.
pub fn default_blank(spec: &ShiftedSetSpec) -> BipartitePureState {
    BipartitePureState::maximally_entangled(spec.dimension())
}

pub fn run_protocol(
    spec: &ShiftedSetSpec,
    input: usize,
    blank: Option<&BipartitePureState>,
) -> Result<Vec<CloningOutcome>, ProtocolError> {
    run_protocol_with(spec, input, blank, ProtocolOptions::default())
}

/// Mirror protocol for shift-on-A families: the measurement acts on `b`.
pub fn run_protocol_shift_a(
    spec: &ShiftedSetSpec,
    input: usize,
    blank: Option<&BipartitePureState>,
) -> Result<Vec<CloningOutcome>, ProtocolError> {
    run_protocol_with(spec, input, blank, ProtocolOptions { variant: Some(ShiftSide::A), skip_measurement: false })
}

/// Runs the protocol on input `|ψ_input⟩` and returns one outcome per
/// measurement result with nonzero probability (a single outcome labelled
/// with the identity when the measurement is skipped).
pub fn run_protocol_with(
    spec: &ShiftedSetSpec,
    input: usize,
    blank: Option<&BipartitePureState>,
    options: ProtocolOptions,
) -> Result<Vec<CloningOutcome>, ProtocolError> {
    let group = spec.group();
    if input >= group.order() {
        return Err(ProtocolError::UnknownElement(input));
    }
    let d = spec.dimension();
    let default = default_blank(spec);
    let blank = blank.unwrap_or(&default);
    if blank.dims() != (d, d) {
        return Err(ProtocolError::DimensionMismatch(format!("blank is {:?}, expected {d}x{d}", blank.dims())));
    }
    let psi = build_group_shifted(spec).swap_remove(input);
    let register = Register { d };

    let mut state = vec![C64::new(0.0, 0.0); d * d * d * d];
    for (ab, &x) in psi.dual().as_slice().iter().enumerate() {
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        for (ab2, &y) in blank.dual().as_slice().iter().enumerate() {
            state[ab * d * d + ab2] = x * y;
        }
    }
    let target: Vec<C64> = {
        let p = psi.dual().as_slice();
        let mut t = vec![C64::new(0.0, 0.0); d * d * d * d];
        for (i, x) in p.iter().enumerate() {
            for (j, y) in p.iter().enumerate() {
                t[i * d * d + j] = x * y;
            }
        }
        t
    };

    let copies = spec.copies();
    state = register.controlled(&state, 0, 2, |c, t| shift_label(group, copies, c / copies, t));
    state = register.controlled(&state, 1, 3, |c, t| shift_label(group, copies, c / copies, t));

    if options.skip_measurement {
        let fidelity = overlap(&target, &state).norm_sqr() / norm_sqr(&state);
        return Ok(vec![CloningOutcome {
            outcome: group.identity(),
            probability: norm_sqr(&state),
            fidelity,
            output_state: state,
        }]);
    }

    let measured_axis = match options.variant.unwrap_or(spec.shift_side()) {
        ShiftSide::B => 2,
        ShiftSide::A => 3,
    };
    let mut outcomes = Vec::with_capacity(group.order());
    for r in group.elements() {
        let diag = measurement_diagonal(spec, r);
        let mut branch = register.diagonal(&state, measured_axis, &diag);
        let probability = norm_sqr(&branch);
        if probability == 0.0 {
            continue;
        }
        branch = register.permute(&branch, 2, |l| right_label(group, copies, l, r));
        branch = register.permute(&branch, 3, |l| right_label(group, copies, l, r));
        let fidelity = overlap(&target, &branch).norm_sqr() / probability;
        outcomes.push(CloningOutcome { outcome: r, probability, fidelity, output_state: branch });
    }
    Ok(outcomes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRecord {
    pub input: usize,
    pub r: usize,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub per_branch: Vec<BranchRecord>,
    pub min_fidelity: f64,
    /// Largest spread over inputs of the probability of a fixed outcome.
    pub input_independence_gap: f64,
    /// Largest deviation from one of the total branch probability.
    pub probability_sum_deviation: f64,
    pub blank_schmidt: Vec<f64>,
    pub phases_present: bool,
    pub measurement_skipped: bool,
}

/// Runs every input of the family in `(input, r)` order and summarizes.
pub fn simulate_family(
    spec: &ShiftedSetSpec,
    blank: Option<&BipartitePureState>,
    options: ProtocolOptions,
) -> Result<ProtocolReport, ProtocolError> {
    let group = spec.group();
    let mut per_branch = Vec::new();
    let mut probs = vec![vec![0.0; group.order()]; group.order()];
    let mut probability_sum_deviation = 0.0f64;
    for f in group.elements() {
        let outcomes = run_protocol_with(spec, f, blank, options)?;
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        probability_sum_deviation = probability_sum_deviation.max((total - 1.0).abs());
        for o in outcomes {
            probs[f][o.outcome] = o.probability;
            per_branch.push(BranchRecord { input: f, r: o.outcome, probability: o.probability, fidelity: o.fidelity });
        }
    }
    let min_fidelity = per_branch.iter().map(|b| b.fidelity).fold(f64::INFINITY, f64::min);
    let input_independence_gap = group
        .elements()
        .map(|r| {
            let col = probs.iter().map(|row| row[r]);
            col.clone().fold(f64::NEG_INFINITY, f64::max) - col.fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let default = default_blank(spec);
    let blank_schmidt = schmidt_coefficients(blank.unwrap_or(&default))?;
    Ok(ProtocolReport {
        per_branch,
        min_fidelity,
        input_independence_gap,
        probability_sum_deviation,
        blank_schmidt,
        phases_present: spec.has_phases(),
        measurement_skipped: options.skip_measurement,
    })
}

fn measurement_diagonal(spec: &ShiftedSetSpec, r: usize) -> Vec<f64> {
    let g = spec.group();
    let blocks = spec.block_weights();
    (0..spec.dimension())
        .map(|l| {
            let (h, m) = (l / spec.copies(), l % spec.copies());
            (spec.weight(g.mul(h, r), m) / blocks[m]).sqrt()
        })
        .collect()
}

/// Label of `P_g |h, m⟩ = |gh, m⟩`.
fn shift_label(group: &FiniteGroup, copies: usize, g: usize, label: usize) -> usize {
    group.mul(g, label / copies) * copies + label % copies
}

/// Label of `|hr, m⟩` for `label = (h, m)`.
fn right_label(group: &FiniteGroup, copies: usize, label: usize, r: usize) -> usize {
    group.mul(label / copies, r) * copies + label % copies
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(C64::norm_sqr).sum()
}

fn overlap(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Index arithmetic for four registers of equal dimension.
struct Register {
    d: usize,
}

impl Register {
    fn split(&self, idx: usize) -> [usize; 4] {
        let d = self.d;
        [idx / (d * d * d), (idx / (d * d)) % d, (idx / d) % d, idx % d]
    }

    fn join(&self, x: [usize; 4]) -> usize {
        ((x[0] * self.d + x[1]) * self.d + x[2]) * self.d + x[3]
    }

    /// Applies `|c⟩|t⟩ ↦ |c⟩|map(c, t)⟩` on the control and target axes.
    fn controlled(&self, state: &[C64], control: usize, target: usize, map: impl Fn(usize, usize) -> usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        for (idx, &z) in state.iter().enumerate() {
            let mut x = self.split(idx);
            x[target] = map(x[control], x[target]);
            out[self.join(x)] = z;
        }
        out
    }

    fn permute(&self, state: &[C64], axis: usize, map: impl Fn(usize) -> usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        for (idx, &z) in state.iter().enumerate() {
            let mut x = self.split(idx);
            x[axis] = map(x[axis]);
            out[self.join(x)] = z;
        }
        out
    }

    fn diagonal(&self, state: &[C64], axis: usize, diag: &[f64]) -> Vec<C64> {
        state.iter().enumerate().map(|(idx, &z)| z * diag[self.split(idx)[axis]]).collect()
    }
}
