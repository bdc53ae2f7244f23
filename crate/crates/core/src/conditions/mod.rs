//! Necessary conditions on locally clonable sets of bipartite states.

pub mod battery;
pub mod closure;
pub mod maxent;
pub mod qubit;

use serde::Serialize;
use thiserror::Error;

use crate::groups::FiniteGroup;
use crate::linalg::LinalgError;
use crate::protocol::ProtocolError;
use crate::states::{schmidt_coefficients, BipartitePureState, StateError};

pub use battery::{
    character_verdict, check_divisibility_and_character, check_equal_gconcurrence, check_full_rank,
    check_majorization_compat, check_spectrum_all_pairs, check_spectrum_condition, CharacterCheck,
    DivisibilityCheck, EqualDetCheck, FullRankCheck, GConcurrenceCheck, MajorizationCheck, SpectrumCheck,
    SpectrumSummary,
};
pub use closure::{extend_to_group, ClosureFailure, GroupExtension};
pub use maxent::{classify_maximally_entangled_set, MaxEntCertificate, MaxEntClassification};
pub use qubit::{qubit_clonability, QubitBranch, QubitVerdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error("state index {0} out of range")]
    Index(usize),
    #[error("state {0} is singular")]
    Singular(usize),
    #[error("operator has zero determinant")]
    SingularOperator,
    #[error("empty state set")]
    EmptySet,
    #[error("state dual is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state {0} is not maximally entangled")]
    NotMaximallyEntangled(usize),
    #[error("state {0} is a product state")]
    ProductState(usize),
    #[error("states are not orthogonal (overlap {0:.3e})")]
    NotOrthogonal(f64),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClosureOutcome {
    Closed { group: FiniteGroup, extended_size: usize, input_count: usize },
    Failed { witness: ClosureFailure },
}

/// Result of the full condition battery. Checks that need full rank (or a
/// closed group) are `None` when their prerequisite fails, and count as
/// failures in `overall`. The qubit and maximally-entangled classifiers are
/// `None` when they do not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub dimension: usize,
    pub state_count: usize,
    pub full_rank: FullRankCheck,
    pub equal_det: EqualDetCheck,
    pub equal_gconcurrence: GConcurrenceCheck,
    pub majorization_compat: MajorizationCheck,
    pub spectrum_condition: Option<SpectrumSummary>,
    pub group_closure: Option<ClosureOutcome>,
    pub divisibility: Option<DivisibilityCheck>,
    pub character_check: Option<CharacterCheck>,
    pub qubit_form: Option<QubitVerdict>,
    pub maximally_entangled: Option<MaxEntClassification>,
    pub overall: bool,
}

impl ConditionReport {
    /// Individual verdicts in report order; `None` marks a check that could not run.
    pub fn verdicts(&self) -> Vec<(&'static str, Option<bool>)> {
        let mut v = vec![
            ("full_rank", Some(self.full_rank.pass)),
            ("equal_det", Some(self.equal_det.pass)),
            ("equal_gconcurrence", Some(self.equal_gconcurrence.pass)),
            ("majorization_compat", Some(self.majorization_compat.pass)),
            ("spectrum_condition", self.spectrum_condition.as_ref().map(|s| s.pass)),
            ("group_closure", self.group_closure.as_ref().map(|c| matches!(c, ClosureOutcome::Closed { .. }))),
            ("divisibility", self.divisibility.as_ref().map(|d| d.pass)),
            ("character_check", self.character_check.as_ref().map(|c| c.pass)),
        ];
        if let Some(q) = &self.qubit_form {
            v.push(("qubit_form", Some(q.is_accepted())));
        }
        if let Some(m) = &self.maximally_entangled {
            v.push(("maximally_entangled", Some(m.is_certified())));
        }
        v
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.verdicts().into_iter().filter(|(_, v)| *v != Some(true)).map(|(n, _)| n).collect()
    }
}

/// Runs every applicable necessary condition on a set of square bipartite states.
pub fn run_battery(
    states: &[BipartitePureState],
    blank: Option<&BipartitePureState>,
) -> Result<ConditionReport, ConditionError> {
    let dimension = battery::square_dim(states)?;
    let full_rank = check_full_rank(states, blank)?;
    let equal_gconcurrence = check_equal_gconcurrence(states)?;
    let equal_det = equal_gconcurrence.determinant.clone();
    let majorization_compat = check_majorization_compat(states)?;
    let states_full_rank = full_rank.failing_states.is_empty();

    let spectrum_condition = if states_full_rank { Some(check_spectrum_all_pairs(states)?) } else { None };
    let mut group_closure = None;
    let mut divisibility = None;
    let mut character_check = None;
    if states_full_rank {
        match extend_to_group(states, None) {
            Ok(ext) => {
                let (div, chr) = check_divisibility_and_character(&ext)?;
                divisibility = Some(div);
                character_check = Some(chr);
                group_closure = Some(ClosureOutcome::Closed {
                    group: ext.group,
                    extended_size: ext.members.len(),
                    input_count: ext.input_count,
                });
            }
            Err(witness) => group_closure = Some(ClosureOutcome::Failed { witness }),
        }
    }

    let qubit_form = if dimension == 2 && states.len() == 2 && states_full_rank {
        qubit_clonability(&states[0], &states[1]).ok()
    } else {
        None
    };
    let uniform = |s: &BipartitePureState| {
        schmidt_coefficients(s)
            .map(|c| c.iter().all(|x| (x - 1.0 / dimension as f64).abs() <= maxent::UNIFORM_TOL))
            .unwrap_or(false)
    };
    let maximally_entangled = if qubit_form.is_none() && states.iter().all(uniform) {
        Some(classify_maximally_entangled_set(states)?)
    } else {
        None
    };

    let mut report = ConditionReport {
        dimension,
        state_count: states.len(),
        full_rank,
        equal_det,
        equal_gconcurrence,
        majorization_compat,
        spectrum_condition,
        group_closure,
        divisibility,
        character_check,
        qubit_form,
        maximally_entangled,
        overall: false,
    };
    report.overall = report.verdicts().iter().all(|(_, v)| *v == Some(true));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::parse_group;
    use crate::linalg::ComplexMatrix;
    use crate::states::{build_group_shifted, ShiftedSetSpec};

    #[test]
    fn group_shifted_family_passes() {
        for (g, w) in [("Z3", vec![0.5, 0.3, 0.2]), ("Z2xZ2", vec![0.4, 0.3, 0.2, 0.1])] {
            let spec = ShiftedSetSpec::simple(parse_group(g).unwrap(), w).unwrap();
            let r = run_battery(&build_group_shifted(&spec), None).unwrap();
            assert!(r.overall, "{g}: {:?}", r.failed_checks());
            assert_eq!(r.divisibility.as_ref().unwrap().copies, Some(1));
        }
    }

    #[test]
    fn overall_is_conjunction() {
        let l: f64 = 0.7;
        let a = BipartitePureState::from_schmidt_weights(&[l, 1.0 - l]).unwrap();
        let b = BipartitePureState::new(ComplexMatrix::diag_real(&[(1.0 - l).sqrt(), -l.sqrt()])).unwrap();
        let r = run_battery(&[a, b], None).unwrap();
        assert!(!r.overall);
        assert!(matches!(r.group_closure, Some(ClosureOutcome::Failed { .. })));
        assert!(matches!(r.qubit_form, Some(QubitVerdict::Rejected { .. })));
        assert_eq!(r.overall, r.verdicts().iter().all(|(_, v)| *v == Some(true)));
    }

    #[test]
    fn product_state_fails_rank() {
        let a = BipartitePureState::maximally_entangled(2);
        let p = BipartitePureState::product(0, 1, 2, 2);
        let r = run_battery(&[a, p], None).unwrap();
        assert!(!r.overall);
        assert_eq!(r.full_rank.failing_states, vec![1]);
        assert!(r.spectrum_condition.is_none());
        assert!(r.failed_checks().contains(&"spectrum_condition"));
    }

    #[test]
    fn rank_deficient_blank_fails() {
        let spec = ShiftedSetSpec::uniform(parse_group("Z2").unwrap(), 1);
        let blank = BipartitePureState::product(0, 0, 2, 2);
        let r = run_battery(&build_group_shifted(&spec), Some(&blank)).unwrap();
        assert!(r.full_rank.blank_fails);
        assert!(!r.overall);
    }
}
