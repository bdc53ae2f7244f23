use serde::Serialize;

use crate::groups::{FiniteGroup, GroupError, Violation};
use crate::linalg::{phase_invariant_distance, ComplexMatrix};
use crate::states::BipartitePureState;

pub const MEMBER_TOL: f64 = 1e-7;
pub const ORTHONORMAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosureFailure {
    EmptySet,
    DimensionMismatch { index: usize },
    NotOrthonormal { i: usize, j: usize, overlap: f64 },
    Singular { index: usize },
    /// `ψ_i ψ_j⁻¹ ψ_k` is neither a member up to phase nor orthogonal to all members.
    Ambiguous { i: usize, j: usize, k: usize, max_overlap: f64 },
    CapExceeded { cap: usize },
    InvalidTable { violations: Vec<Violation> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupExtension {
    /// Member `i` of the extended family is group element `i`; member 0 is the identity.
    pub group: FiniteGroup,
    pub members: Vec<BipartitePureState>,
    pub input_count: usize,
    /// Largest `|‖ψ_i ψ_j⁻¹ ψ_k‖ − 1|` seen before normalization.
    pub max_norm_deviation: f64,
}

enum Placement {
    Existing(usize),
    New,
    Ambiguous(f64),
}

/// Closes a set of states under `(i, j, k) ↦ ψ_i ψ_j⁻¹ ψ_k` and reads off the
/// group structure with the first state as identity. `cap` bounds the size of
/// the extended family and defaults to the local dimension.
pub fn extend_to_group(states: &[BipartitePureState], cap: Option<usize>) -> Result<GroupExtension, ClosureFailure> {
    let first = states.first().ok_or(ClosureFailure::EmptySet)?;
    let (d, db) = first.dims();
    for (index, s) in states.iter().enumerate() {
        if s.dims() != (d, d) || db != d {
            return Err(ClosureFailure::DimensionMismatch { index });
        }
    }
    let cap = cap.unwrap_or(d).max(states.len());
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let overlap = states[i].dual().inner(states[j].dual()).map(|z| z.norm()).unwrap_or(f64::INFINITY);
            if overlap > ORTHONORMAL_TOL {
                return Err(ClosureFailure::NotOrthonormal { i, j, overlap });
            }
        }
    }

    let mut members: Vec<ComplexMatrix> = states.iter().map(|s| s.dual().clone()).collect();
    let mut inverses = Vec::with_capacity(members.len());
    for (index, m) in members.iter().enumerate() {
        inverses.push(m.inverse().map_err(|_| ClosureFailure::Singular { index })?);
    }
    let mut max_norm_deviation = 0.0f64;
    let mut done = 0;
    while done < members.len() {
        let n = members.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i.max(j).max(k) < done || i == j || j == k {
                        continue;
                    }
                    let (x, dev) = triple(&members[i], &inverses[j], &members[k]);
                    max_norm_deviation = max_norm_deviation.max(dev);
                    match place(&x, &members) {
                        Placement::Existing(_) => {}
                        Placement::New => {
                            if members.len() >= cap {
                                return Err(ClosureFailure::CapExceeded { cap });
                            }
                            let index = members.len();
                            inverses.push(x.inverse().map_err(|_| ClosureFailure::Singular { index })?);
                            members.push(x);
                        }
                        Placement::Ambiguous(max_overlap) => {
                            return Err(ClosureFailure::Ambiguous { i, j, k, max_overlap });
                        }
                    }
                }
            }
        }
        done = n;
    }

    let n = members.len();
    let mut table = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (x, _) = triple(&members[i], &inverses[0], &members[j]);
            table[i][j] = match place(&x, &members) {
                Placement::Existing(l) => l,
                Placement::New => return Err(ClosureFailure::CapExceeded { cap }),
                Placement::Ambiguous(max_overlap) => {
                    return Err(ClosureFailure::Ambiguous { i, j: 0, k: j, max_overlap })
                }
            };
        }
    }
    let group = FiniteGroup::from_table(format!("inferred({n})"), table).map_err(|e| match e {
        GroupError::Invalid(violations) => ClosureFailure::InvalidTable { violations },
        _ => ClosureFailure::InvalidTable { violations: Vec::new() },
    })?;
    let members = members
        .into_iter()
        .map(|m| BipartitePureState::normalized(m).expect("closure members are nonzero"))
        .collect();
    Ok(GroupExtension { group, members, input_count: states.len(), max_norm_deviation })
}

fn triple(a: &ComplexMatrix, b_inv: &ComplexMatrix, c: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let x = &(a * b_inv) * c;
    let norm = x.frobenius_norm();
    (x.scale_real(1.0 / norm), (norm - 1.0).abs())
}

fn place(x: &ComplexMatrix, members: &[ComplexMatrix]) -> Placement {
    let mut max_overlap = 0.0f64;
    for (l, m) in members.iter().enumerate() {
        if phase_invariant_distance(x, m).is_ok_and(|dist| dist <= MEMBER_TOL) {
            return Placement::Existing(l);
        }
        max_overlap = max_overlap.max(x.inner(m).map(|z| z.norm()).unwrap_or(f64::INFINITY));
    }
    if max_overlap <= MEMBER_TOL {
        Placement::New
    } else {
        Placement::Ambiguous(max_overlap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::parse_group;
    use crate::states::{build_group_shifted, ShiftedSetSpec};
    use num_complex::Complex64 as C64;

    #[test]
    fn bell_pair_closes_to_z2() {
        let spec = ShiftedSetSpec::uniform(parse_group("Z2").unwrap(), 1);
        let ext = extend_to_group(&build_group_shifted(&spec), None).unwrap();
        assert_eq!(ext.group.order(), 2);
        assert_eq!(ext.members.len(), 2);
    }

    #[test]
    fn klein_pair_closes_to_two_elements() {
        let spec = ShiftedSetSpec::simple(parse_group("Z2xZ2").unwrap(), vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let fam = build_group_shifted(&spec);
        let ext = extend_to_group(&fam[..2], None).unwrap();
        assert_eq!(ext.group.order(), 2);
        let full = extend_to_group(&fam, None).unwrap();
        assert_eq!(full.group.order(), 4);
        assert!(full.group.elements().all(|f| full.group.mul(f, f) == 0));
    }

    #[test]
    fn z4_generator_pair_extends_to_all() {
        let spec = ShiftedSetSpec::simple(parse_group("Z4").unwrap(), vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let fam = build_group_shifted(&spec);
        let ext = extend_to_group(&[fam[0].clone(), fam[1].clone()], None).unwrap();
        assert_eq!(ext.group.order(), 4);
        assert!(ext.group.validate().is_empty());
        assert!(ext.max_norm_deviation < 1e-12);
        assert!(matches!(extend_to_group(&fam[..2], Some(3)), Err(ClosureFailure::CapExceeded { cap: 3 })));
    }

    #[test]
    fn rejected_qubit_family_gives_witness() {
        let l: f64 = 0.7;
        let a = BipartitePureState::new(ComplexMatrix::diag_real(&[l.sqrt(), (1.0 - l).sqrt()])).unwrap();
        let b = BipartitePureState::new(ComplexMatrix::diag_real(&[(1.0 - l).sqrt(), -l.sqrt()])).unwrap();
        assert!(matches!(extend_to_group(&[a, b], None), Err(ClosureFailure::Ambiguous { .. })));
    }

    #[test]
    fn non_orthogonal_input() {
        let a = BipartitePureState::maximally_entangled(2);
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = C64::new(0.1, 0.0);
        let b = BipartitePureState::normalized(m).unwrap();
        assert!(matches!(extend_to_group(&[a, b], None), Err(ClosureFailure::NotOrthonormal { .. })));
        assert!(matches!(extend_to_group(&[], None), Err(ClosureFailure::EmptySet)));
    }
}
