use num_complex::Complex64 as C64;
use serde::Serialize;

use super::closure::GroupExtension;
use super::ConditionError;
use crate::linalg::{eigenvalues_diagonalizable, multiset_distance, svd, ComplexMatrix};
use crate::states::{
    g_concurrence_of_coefficients, majorization_compare_tol, schmidt_coefficients, BipartitePureState, Majorization,
};

pub const RANK_TOL: f64 = 1e-9;
pub const GCONCURRENCE_TOL: f64 = 1e-8;
pub const SCHMIDT_EQUAL_TOL: f64 = 1e-9;
pub const SPECTRUM_TOL: f64 = 1e-7;
pub const TRACE_TOL: f64 = 1e-7;
pub const IDENTITY_TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullRankCheck {
    pub pass: bool,
    pub min_singular_values: Vec<f64>,
    pub blank_min_singular_value: Option<f64>,
    pub failing_states: Vec<usize>,
    pub blank_fails: bool,
}

/// Every state (and the blank, if given) must have `σ_min > 1e-9`.
pub fn check_full_rank(
    states: &[BipartitePureState],
    blank: Option<&BipartitePureState>,
) -> Result<FullRankCheck, ConditionError> {
    let mut min_singular_values = Vec::with_capacity(states.len());
    for s in states {
        min_singular_values.push(svd(s.dual())?.sigma_min());
    }
    let failing_states: Vec<usize> =
        min_singular_values.iter().enumerate().filter(|(_, &s)| s <= RANK_TOL).map(|(i, _)| i).collect();
    let blank_min_singular_value = blank.map(|b| svd(b.dual()).map(|d| d.sigma_min())).transpose()?;
    let blank_fails = blank_min_singular_value.is_some_and(|s| s <= RANK_TOL);
    Ok(FullRankCheck {
        pass: failing_states.is_empty() && !blank_fails,
        min_singular_values,
        blank_min_singular_value,
        failing_states,
        blank_fails,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualDetCheck {
    pub pass: bool,
    pub abs_dets: Vec<f64>,
    /// `D·|det ψ|^{2/D}` per state.
    pub g_concurrence_via_det: Vec<f64>,
    pub max_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GConcurrenceCheck {
    pub pass: bool,
    /// From the product of Schmidt coefficients.
    pub values: Vec<f64>,
    pub max_difference: f64,
    pub determinant: EqualDetCheck,
    pub routes_agree: bool,
}

/// Equal G-concurrence, evaluated both from Schmidt coefficients and from
/// LU determinants. The two verdicts must coincide.
pub fn check_equal_gconcurrence(states: &[BipartitePureState]) -> Result<GConcurrenceCheck, ConditionError> {
    let d = square_dim(states)?;
    let mut values = Vec::with_capacity(states.len());
    let mut abs_dets = Vec::with_capacity(states.len());
    for s in states {
        values.push(g_concurrence_of_coefficients(&schmidt_coefficients(s)?));
        abs_dets.push(s.dual().det()?.norm());
    }
    let via_det: Vec<f64> = abs_dets.iter().map(|a| d as f64 * a.powf(2.0 / d as f64)).collect();
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let max_difference = spread(&values);
    let det_difference = spread(&via_det);
    let determinant = EqualDetCheck {
        pass: det_difference <= GCONCURRENCE_TOL,
        abs_dets,
        g_concurrence_via_det: via_det,
        max_difference: det_difference,
    };
    let pass = max_difference <= GCONCURRENCE_TOL;
    Ok(GConcurrenceCheck { pass, values, max_difference, routes_agree: pass == determinant.pass, determinant })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationCheck {
    pub pass: bool,
    pub matrix: Vec<Vec<Majorization>>,
    pub failing_pairs: Vec<(usize, usize)>,
}

/// Every pair must share its Schmidt coefficients or be incomparable.
pub fn check_majorization_compat(states: &[BipartitePureState]) -> Result<MajorizationCheck, ConditionError> {
    let coeffs: Vec<Vec<f64>> = states.iter().map(schmidt_coefficients).collect::<Result<_, _>>()?;
    let n = states.len();
    let mut matrix = vec![vec![Majorization::Equal; n]; n];
    let mut failing_pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                matrix[i][j] = majorization_compare_tol(&coeffs[i], &coeffs[j], SCHMIDT_EQUAL_TOL)?;
                if i < j && !matches!(matrix[i][j], Majorization::Equal | Majorization::Incomparable) {
                    failing_pairs.push((i, j));
                }
            }
        }
    }
    Ok(MajorizationCheck { pass: failing_pairs.is_empty(), matrix, failing_pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCheck {
    pub i: usize,
    pub j: usize,
    pub pass: bool,
    /// Phase `c` applied to `ψ_i ψ_j⁻¹` for the best match.
    pub phase: C64,
    /// Greedy matching distance between the two spectra at that phase.
    pub mismatch: f64,
}

/// `Spec(cT ⊗ I) = Spec(c²T ⊗ T)` for `T = ψ_i ψ_j⁻¹`, searching the finite
/// set of phases `c` with `det(cT)^D = 1`.
pub fn check_spectrum_condition(
    states: &[BipartitePureState],
    i: usize,
    j: usize,
) -> Result<SpectrumCheck, ConditionError> {
    let d = square_dim(states)?;
    let (si, sj) = (states.get(i).ok_or(ConditionError::Index(i))?, states.get(j).ok_or(ConditionError::Index(j))?);
    let inv = sj.dual().inverse().map_err(|_| ConditionError::Singular(j))?;
    let t = si.dual() * &inv;
    let det = t.det()?;
    // spectra of Kronecker products are the pairwise products of the factors' spectra
    let mu = eigenvalues_diagonalizable(&t)?;
    let lin: Vec<C64> = mu.iter().flat_map(|&x| std::iter::repeat_n(x, d)).collect();
    let quad: Vec<C64> = mu.iter().flat_map(|&x| mu.iter().map(move |&y| x * y)).collect();
    let base = det.powf(-1.0 / d as f64);
    let roots = d * d;
    let mut best = (f64::INFINITY, C64::new(1.0, 0.0));
    for k in 0..roots {
        let c = base * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / roots as f64);
        let a: Vec<C64> = lin.iter().map(|z| z * c).collect();
        let b: Vec<C64> = quad.iter().map(|z| z * c * c).collect();
        let dist = multiset_distance(&a, &b).unwrap_or(f64::INFINITY);
        if dist < best.0 {
            best = (dist, c);
        }
    }
    Ok(SpectrumCheck { i, j, pass: best.0 <= SPECTRUM_TOL, phase: best.1, mismatch: best.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub pass: bool,
    pub pairs: Vec<SpectrumCheck>,
}

/// Runs the spectrum condition on every pair `i < j` (`T_ji` is `T_ij⁻¹`).
pub fn check_spectrum_all_pairs(states: &[BipartitePureState]) -> Result<SpectrumSummary, ConditionError> {
    let mut pairs = Vec::new();
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            pairs.push(check_spectrum_condition(states, i, j)?);
        }
    }
    Ok(SpectrumSummary { pass: pairs.iter().all(|p| p.pass), pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibilityCheck {
    pub pass: bool,
    pub group_order: usize,
    pub dimension: usize,
    /// `D / |G|` when it is an integer.
    pub copies: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterCheck {
    pub pass: bool,
    /// `trace(T_f)` per group element, identity first.
    pub traces: Vec<C64>,
}

/// Divisibility `|G| | D` plus the regular-character test on given traces.
pub fn character_verdict(group_order: usize, dimension: usize, traces: &[C64]) -> (DivisibilityCheck, CharacterCheck) {
    let divides = group_order > 0 && dimension % group_order == 0;
    let div = DivisibilityCheck {
        pass: divides,
        group_order,
        dimension,
        copies: divides.then(|| dimension / group_order),
    };
    let pass = traces.len() == group_order
        && traces.first().is_some_and(|t| (t - C64::new(dimension as f64, 0.0)).norm() <= IDENTITY_TRACE_TOL)
        && traces.iter().skip(1).all(|t| t.norm() <= TRACE_TOL);
    (div, CharacterCheck { pass, traces: traces.to_vec() })
}

/// Traces of the det-normalized `T_f = ψ_f ψ_e⁻¹` over an extended family.
pub fn check_divisibility_and_character(
    ext: &GroupExtension,
) -> Result<(DivisibilityCheck, CharacterCheck), ConditionError> {
    let base = &ext.members[0];
    let d = base.dims().0;
    let inv = base.dual().inverse().map_err(|_| ConditionError::Singular(0))?;
    let mut traces = Vec::with_capacity(ext.members.len());
    for m in &ext.members {
        traces.push(det_normalized(&(m.dual() * &inv))?.trace());
    }
    Ok(character_verdict(ext.group.order(), d, &traces))
}

/// `T / det(T)^{1/D}` on the principal branch, so `det` becomes 1.
pub fn det_normalized(t: &ComplexMatrix) -> Result<ComplexMatrix, ConditionError> {
    let d = t.rows() as f64;
    let det = t.det()?;
    if det.norm() == 0.0 {
        return Err(ConditionError::SingularOperator);
    }
    Ok(t.scale(det.powf(-1.0 / d)))
}

pub(crate) fn square_dim(states: &[BipartitePureState]) -> Result<usize, ConditionError> {
    let first = states.first().ok_or(ConditionError::EmptySet)?;
    let (d, db) = first.dims();
    if d != db {
        return Err(ConditionError::NotSquare(d, db));
    }
    if let Some(i) = states.iter().position(|s| s.dims() != (d, d)) {
        return Err(ConditionError::DimensionMismatch(format!("state {i} is {:?}, expected {d}x{d}", states[i].dims())));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::closure::extend_to_group;
    use crate::groups::parse_group;
    use crate::linalg::random::random_unit_vector;
    use crate::states::{build_group_shifted, ShiftedSetSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn family(name: &str, w: &[f64]) -> Vec<BipartitePureState> {
        build_group_shifted(&ShiftedSetSpec::simple(parse_group(name).unwrap(), w.to_vec()).unwrap())
    }

    fn diag(l: &[f64]) -> BipartitePureState {
        BipartitePureState::from_schmidt_weights(l).unwrap()
    }

    #[test]
    fn full_rank_examples() {
        assert!(check_full_rank(&family("Z3", &[0.5, 0.3, 0.2]), None).unwrap().pass);
        let set = [diag(&[0.7, 0.3]), BipartitePureState::product(0, 0, 2, 2)];
        let r = check_full_rank(&set, None).unwrap();
        assert!(!r.pass && r.failing_states == vec![1]);
        let blank = diag(&[1.0, 0.0]);
        let r = check_full_rank(&family("Z2", &[0.7, 0.3]), Some(&blank)).unwrap();
        assert!(!r.pass && r.blank_fails && r.failing_states.is_empty());
    }

    #[test]
    fn gconcurrence_examples() {
        let r = check_equal_gconcurrence(&family("S3", &[0.3, 0.2, 0.1, 0.15, 0.15, 0.1])).unwrap();
        assert!(r.pass && r.routes_agree);
        let r = check_equal_gconcurrence(&[diag(&[0.7, 0.3]), diag(&[0.6, 0.4])]).unwrap();
        assert!(!r.pass && r.routes_agree);
        assert!((r.values[0] - 0.916_515_14).abs() < 1e-8 && (r.values[1] - 0.979_795_9).abs() < 1e-7);
        let r = check_equal_gconcurrence(&build_group_shifted(&ShiftedSetSpec::uniform(parse_group("Z4").unwrap(), 1)))
            .unwrap();
        assert!(r.pass && r.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn gconcurrence_routes_agree_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 2..5 {
            let set: Vec<BipartitePureState> = (0..3)
                .map(|_| BipartitePureState::from_ket(&random_unit_vector(&mut rng, d * d), d, d).unwrap())
                .collect();
            assert!(check_equal_gconcurrence(&set).unwrap().routes_agree);
        }
    }

    #[test]
    fn majorization_examples() {
        assert!(check_majorization_compat(&family("Z4", &[0.4, 0.3, 0.2, 0.1])).unwrap().pass);
        let r = check_majorization_compat(&[diag(&[0.7, 0.3]), diag(&[0.6, 0.4])]).unwrap();
        assert!(!r.pass && r.failing_pairs == vec![(0, 1)]);
        let r = check_majorization_compat(&[diag(&[0.6, 0.25, 0.15]), diag(&[0.55, 0.40, 0.05])]).unwrap();
        assert!(r.pass && r.matrix[0][1] == Majorization::Incomparable);
    }

    #[test]
    fn spectrum_examples() {
        for name in ["Z2", "Z3", "S3", "Z2xZ2"] {
            let g = parse_group(name).unwrap();
            let w: Vec<f64> = (1..=g.order()).map(|k| k as f64).collect();
            let s: f64 = w.iter().sum();
            let fam = family(name, &w.iter().map(|x| x / s).collect::<Vec<_>>());
            assert!(check_spectrum_all_pairs(&fam).unwrap().pass, "{name}");
        }
        let fam = family("Z3", &[0.5, 0.3, 0.2]);
        assert!(check_spectrum_condition(&fam, 1, 1).unwrap().pass);
    }

    #[test]
    fn spectrum_fails_for_random_orthogonal_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = 3;
        let a = random_unit_vector(&mut rng, d * d);
        let mut b = random_unit_vector(&mut rng, d * d);
        let ov: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        for (bi, ai) in b.iter_mut().zip(&a) {
            *bi -= ov * ai;
        }
        let a = BipartitePureState::from_ket(&a, d, d).unwrap();
        let b = BipartitePureState::normalized(crate::states::dual_of_ket(&b, d, d).unwrap()).unwrap();
        assert!(a.inner(&b).unwrap().norm() < 1e-12);
        let r = check_spectrum_condition(&[a, b], 0, 1).unwrap();
        assert!(!r.pass && r.mismatch > 1e-3);
    }

    #[test]
    fn divisibility_examples() {
        let fam = family("Z4", &[0.4, 0.3, 0.2, 0.1]);
        let ext = extend_to_group(&[fam[0].clone(), fam[2].clone()], None).unwrap();
        let (div, ch) = check_divisibility_and_character(&ext).unwrap();
        assert!(div.pass && div.copies == Some(2) && ch.pass);
        let (div, _) = character_verdict(2, 3, &[C64::new(3.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(!div.pass);
        let full = extend_to_group(&fam, None).unwrap();
        let (_, ch) = check_divisibility_and_character(&full).unwrap();
        assert!(ch.traces[1..].iter().all(|t| t.norm() < 1e-12));
        assert!((ch.traces[0] - C64::new(4.0, 0.0)).norm() < 1e-12);
    }
}
