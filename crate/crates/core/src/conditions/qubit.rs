use serde::Serialize;

use super::maxent::{classify_maximally_entangled_set, MaxEntClassification};
use super::ConditionError;
use crate::states::{schmidt_decompose, BipartitePureState};

pub const QUBIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitBranch {
    /// `ψ_g = √λ|01⟩ + √(1−λ)|10⟩` in the Schmidt basis of `ψ_e`.
    SwapLargeFirst,
    /// `ψ_g = √λ|10⟩ + √(1−λ)|01⟩`.
    SwapSmallFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum QubitVerdict {
    Accepted {
        lambda: f64,
        branch: QubitBranch,
        /// Relative phase `arg(a10 / a01)` in `(−π, π]`.
        theta: f64,
    },
    Rejected {
        lambda: f64,
        /// `ψ_g` written in the Schmidt basis of `ψ_e`, as `[[a00, a01], [a10, a11]]` moduli.
        moduli: [[f64; 2]; 2],
    },
    /// Both states maximally entangled; handled by the general classifier.
    MaximallyEntangled(MaxEntClassification),
}

impl QubitVerdict {
    pub fn is_accepted(&self) -> bool {
        match self {
            Self::Accepted { .. } => true,
            Self::Rejected { .. } => false,
            Self::MaximallyEntangled(c) => c.is_certified(),
        }
    }
}

/// Classifies an orthogonal pair of entangled two-qubit states: a clonable
/// pair must be, in the Schmidt basis of `ψ_e`, an off-diagonal swap with
/// the same Schmidt coefficients.
pub fn qubit_clonability(psi_e: &BipartitePureState, psi_g: &BipartitePureState) -> Result<QubitVerdict, ConditionError> {
    for (i, s) in [psi_e, psi_g].into_iter().enumerate() {
        if s.dims() != (2, 2) {
            return Err(ConditionError::DimensionMismatch(format!("state {i} is {:?}, expected 2x2", s.dims())));
        }
    }
    let overlap = psi_e.inner(psi_g)?.norm();
    if overlap > QUBIT_TOL {
        return Err(ConditionError::NotOrthogonal(overlap));
    }
    let sch = schmidt_decompose(psi_e)?;
    if sch.coefficients[1] <= QUBIT_TOL {
        return Err(ConditionError::ProductState(0));
    }
    if schmidt_decompose(psi_g)?.coefficients[1] <= QUBIT_TOL {
        return Err(ConditionError::ProductState(1));
    }
    let lambda = sch.coefficients[0];
    if (lambda - 0.5).abs() <= QUBIT_TOL {
        let both_maximal = crate::states::schmidt_coefficients(psi_g)?.iter().all(|c| (c - 0.5).abs() <= QUBIT_TOL);
        if both_maximal {
            let c = classify_maximally_entangled_set(&[psi_e.clone(), psi_g.clone()])?;
            return Ok(QubitVerdict::MaximallyEntangled(c));
        }
    }
    // ψ_g = U a Vᵀ in the Schmidt bases of ψ_e
    let a = &(&sch.left_basis.adjoint() * psi_g.dual()) * &sch.right_basis.conj();
    let moduli = [[a[(0, 0)].norm(), a[(0, 1)].norm()], [a[(1, 0)].norm(), a[(1, 1)].norm()]];
    let (p01, p10) = (moduli[0][1].powi(2), moduli[1][0].powi(2));
    let diagonal_vanishes = moduli[0][0] <= QUBIT_TOL && moduli[1][1] <= QUBIT_TOL;
    let branch = if (p01 - lambda).abs() <= QUBIT_TOL && (p10 - (1.0 - lambda)).abs() <= QUBIT_TOL {
        Some(QubitBranch::SwapLargeFirst)
    } else if (p10 - lambda).abs() <= QUBIT_TOL && (p01 - (1.0 - lambda)).abs() <= QUBIT_TOL {
        Some(QubitBranch::SwapSmallFirst)
    } else {
        None
    };
    match (diagonal_vanishes, branch) {
        (true, Some(branch)) => Ok(QubitVerdict::Accepted { lambda, branch, theta: (a[(1, 0)] / a[(0, 1)]).arg() }),
        _ => Ok(QubitVerdict::Rejected { lambda, moduli }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_unitary;
    use crate::linalg::ComplexMatrix;
    use num_complex::Complex64 as C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn pair(l: f64, large_first: bool) -> (BipartitePureState, BipartitePureState) {
        let (a, b) = (l.sqrt(), (1.0 - l).sqrt());
        let e = ComplexMatrix::from_real(2, 2, &[a, 0.0, 0.0, b]);
        let g = if large_first {
            ComplexMatrix::from_real(2, 2, &[0.0, a, b, 0.0])
        } else {
            ComplexMatrix::from_real(2, 2, &[0.0, b, a, 0.0])
        };
        (BipartitePureState::new(e).unwrap(), BipartitePureState::new(g).unwrap())
    }

    #[test]
    fn accepts_swap_forms() {
        let (e, g) = pair(0.7, true);
        match qubit_clonability(&e, &g).unwrap() {
            QubitVerdict::Accepted { lambda, branch, theta } => {
                assert!((lambda - 0.7).abs() < 1e-12);
                assert_eq!(branch, QubitBranch::SwapLargeFirst);
                assert!(theta.abs() < 1e-12);
            }
            v => panic!("{v:?}"),
        }
        let (e, g) = pair(0.8, false);
        assert!(matches!(
            qubit_clonability(&e, &g).unwrap(),
            QubitVerdict::Accepted { branch: QubitBranch::SwapSmallFirst, .. }
        ));
    }

    #[test]
    fn recovers_injected_phase() {
        let (e, g) = pair(0.7, true);
        let th = PI / 5.0;
        let ua = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, th / 2.0)]);
        let ub = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, -th / 2.0)]);
        let (e2, g2) = (e.apply_local(&ua, &ub).unwrap(), g.apply_local(&ua, &ub).unwrap());
        match qubit_clonability(&e2, &g2).unwrap() {
            QubitVerdict::Accepted { theta, .. } => assert!((theta - th).abs() < 1e-10),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn invariant_under_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let (e, g) = pair(0.65, true);
            let (u, v) = (random_unitary(&mut rng, 2), random_unitary(&mut rng, 2));
            let v2 = qubit_clonability(&e.apply_local(&u, &v).unwrap(), &g.apply_local(&u, &v).unwrap()).unwrap();
            match v2 {
                QubitVerdict::Accepted { lambda, .. } => assert!((lambda - 0.65).abs() < 1e-8),
                v => panic!("{v:?}"),
            }
        }
    }

    #[test]
    fn rejects_diagonal_family() {
        let l: f64 = 0.7;
        let e = BipartitePureState::from_schmidt_weights(&[l, 1.0 - l]).unwrap();
        let g = BipartitePureState::new(ComplexMatrix::diag_real(&[(1.0 - l).sqrt(), -l.sqrt()])).unwrap();
        assert!(matches!(qubit_clonability(&e, &g).unwrap(), QubitVerdict::Rejected { .. }));
    }

    #[test]
    fn maximally_entangled_pair_is_delegated() {
        let (e, g) = pair(0.5, true);
        match qubit_clonability(&e, &g).unwrap() {
            QubitVerdict::MaximallyEntangled(c) => assert!(c.is_certified()),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn errors() {
        let p = BipartitePureState::product(0, 0, 2, 2);
        let q = BipartitePureState::product(1, 1, 2, 2);
        assert!(matches!(qubit_clonability(&p, &q), Err(ConditionError::ProductState(0))));
        let (e, _) = pair(0.7, true);
        assert!(matches!(qubit_clonability(&e, &e), Err(ConditionError::NotOrthogonal(_))));
    }
}
