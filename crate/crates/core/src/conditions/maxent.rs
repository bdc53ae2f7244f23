use num_complex::Complex64 as C64;
use serde::Serialize;

use super::closure::{extend_to_group, ClosureFailure};
use super::ConditionError;
use crate::groups::{regular_representation, FiniteGroup};
use crate::linalg::{find_intertwiner, phase_invariant_distance, tensor_product, unitarize_similarity, ComplexMatrix};
use crate::protocol::{simulate_family, ProtocolOptions};
use crate::states::{schmidt_coefficients, BipartitePureState, ShiftSide, ShiftedSetSpec};

pub const UNIFORM_TOL: f64 = 1e-8;
pub const RECONSTRUCTION_TOL: f64 = 1e-7;
const LIFT_TOL: f64 = 1e-7;

/// Group-shifted certificate for a set of maximally entangled states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntCertificate {
    pub group: FiniteGroup,
    pub copies: usize,
    /// Unitary with `c_f T_f = W (L(f) ⊗ I) W†` for `T_f = ψ_f ψ_e⁻¹`.
    pub w: ComplexMatrix,
    /// Unitary `X = √D W†ψ_e`, so that `W†ψ_f X† ∝ (L(f) ⊗ I)/√D`.
    pub x: ComplexMatrix,
    /// Phases `c_f` making `f ↦ c_f T_f` a representation.
    pub phases: Vec<C64>,
    /// Input state `i` is group element `labeling[i]`.
    pub labeling: Vec<usize>,
    pub extended_size: usize,
    pub reconstruction_residual: f64,
    pub canonical_residual: f64,
    /// Smallest fidelity of the cloning protocol run on the canonical form.
    pub protocol_min_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MaxEntClassification {
    Certified(MaxEntCertificate),
    Rejected { reason: String, closure_witness: Option<ClosureFailure> },
}

impl MaxEntClassification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Self::Certified(_))
    }
}

/// Decides whether a set of maximally entangled states is group-shifted and,
/// if so, recovers the group, the unitary `W` and the canonical form.
pub fn classify_maximally_entangled_set(states: &[BipartitePureState]) -> Result<MaxEntClassification, ConditionError> {
    let d = super::battery::square_dim(states)?;
    for (i, s) in states.iter().enumerate() {
        let c = schmidt_coefficients(s)?;
        if c.iter().any(|x| (x - 1.0 / d as f64).abs() > UNIFORM_TOL) {
            return Err(ConditionError::NotMaximallyEntangled(i));
        }
    }
    let ext = match extend_to_group(states, None) {
        Ok(e) => e,
        Err(w) => {
            return Ok(MaxEntClassification::Rejected {
                reason: "set does not close into a group".into(),
                closure_witness: Some(w),
            })
        }
    };
    let group = ext.group.clone();
    let n = group.order();
    if d % n != 0 {
        return Ok(rejected(format!("group order {n} does not divide {d}")));
    }
    let copies = d / n;
    let psi_e = ext.members[0].dual();
    let psi_e_inv = psi_e.inverse().map_err(|_| ConditionError::Singular(0))?;
    let raw: Vec<ComplexMatrix> = ext.members.iter().map(|m| m.dual() * &psi_e_inv).collect();
    let Some(phases) = lift_phases(&group, &raw) else {
        return Ok(rejected("operators form only a projective representation".into()));
    };
    let t: Vec<ComplexMatrix> = raw.iter().zip(&phases).map(|(m, &c)| m.scale(c)).collect();
    let id = ComplexMatrix::identity(copies);
    let l: Vec<ComplexMatrix> = regular_representation(&group)
        .iter()
        .map(|p| tensor_product(&ComplexMatrix::permutation(&p.0), &id))
        .collect::<Result<_, _>>()?;
    let Some(s) = find_intertwiner(&t, &l)? else {
        return Ok(rejected("no invertible intertwiner with the regular representation".into()));
    };
    let w = match unitarize_similarity(&t, &l, &s) {
        Ok(w) => w,
        Err(e) => return Ok(rejected(format!("unitarization failed: {e}"))),
    };

    let wd = w.adjoint();
    let x = (&wd * psi_e).scale_real((d as f64).sqrt());
    let xd = x.adjoint();
    let scale = 1.0 / (d as f64).sqrt();
    let mut reconstruction_residual = 0.0f64;
    let mut canonical_residual = 0.0f64;
    for (f, m) in ext.members.iter().enumerate() {
        let predicted = &(&(&w * &l[f]) * &wd) * psi_e;
        reconstruction_residual = reconstruction_residual.max(phase_invariant_distance(m.dual(), &predicted)?);
        let canon = &(&wd * m.dual()) * &xd;
        canonical_residual = canonical_residual.max(phase_invariant_distance(&canon, &l[f].scale_real(scale))?);
    }
    if reconstruction_residual > RECONSTRUCTION_TOL || canonical_residual > RECONSTRUCTION_TOL {
        return Ok(rejected(format!(
            "reconstruction residual {reconstruction_residual:e}, canonical residual {canonical_residual:e}"
        )));
    }

    let canonical = ShiftedSetSpec::uniform(group.clone(), copies).with_shift_side(ShiftSide::A);
    let options = ProtocolOptions { variant: Some(ShiftSide::A), skip_measurement: true };
    let protocol_min_fidelity = simulate_family(&canonical, None, options)?.min_fidelity;

    Ok(MaxEntClassification::Certified(MaxEntCertificate {
        group,
        copies,
        w,
        x,
        phases,
        labeling: (0..states.len()).collect(),
        extended_size: ext.members.len(),
        reconstruction_residual,
        canonical_residual,
        protocol_min_fidelity,
    }))
}

fn rejected(reason: String) -> MaxEntClassification {
    MaxEntClassification::Rejected { reason, closure_witness: None }
}

/// Phases `c_f` (with `c_e = 1`) such that `c_f T_f c_g T_g = c_{fg} T_{fg}`,
/// found by backtracking over the roots allowed by each element order.
fn lift_phases(group: &FiniteGroup, t: &[ComplexMatrix]) -> Option<Vec<C64>> {
    let n = group.order();
    let d = t[0].rows();
    let mut candidates = Vec::with_capacity(n);
    for f in group.elements() {
        let k = group.element_order(f);
        let mut power = ComplexMatrix::identity(d);
        for _ in 0..k {
            power = &power * &t[f];
        }
        let alpha = power.trace() / d as f64;
        if power.distance(&ComplexMatrix::identity(d).scale(alpha)) > LIFT_TOL * d as f64 || alpha.norm() == 0.0 {
            return None;
        }
        let base = alpha.powf(-1.0 / k as f64);
        candidates.push(
            (0..k)
                .map(|j| base * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
                .collect::<Vec<_>>(),
        );
    }
    let mut phases = vec![C64::new(0.0, 0.0); n];
    if backtrack(group, t, &candidates, &mut phases, 0) {
        Some(phases)
    } else {
        None
    }
}

fn backtrack(group: &FiniteGroup, t: &[ComplexMatrix], cand: &[Vec<C64>], phases: &mut [C64], f: usize) -> bool {
    if f == group.order() {
        return true;
    }
    for &c in &cand[f] {
        phases[f] = c;
        if consistent(group, t, phases, f) && backtrack(group, t, cand, phases, f + 1) {
            return true;
        }
    }
    false
}

/// Checks every product relation among elements `0..=last` that involves `last`.
fn consistent(group: &FiniteGroup, t: &[ComplexMatrix], phases: &[C64], last: usize) -> bool {
    for a in 0..=last {
        for b in 0..=last {
            let p = group.mul(a, b);
            if p > last || (a != last && b != last && p != last) {
                continue;
            }
            let lhs = (&t[a] * &t[b]).scale(phases[a] * phases[b]);
            let rhs = t[p].scale(phases[p]);
            if lhs.distance(&rhs) > LIFT_TOL * t[0].rows() as f64 {
                return false;
            }
        }
    }
    true
}
