//! Intertwiners between matrix families and their unitarization.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::random::random_complex;
use super::{svd, ComplexMatrix, LinalgError};

/// Relative gap below which two singular values share a block.
pub const DEFAULT_CLUSTER_GAP: f64 = 1e-6;

const UNITARY_TOL: f64 = 1e-8;
const SIMILARITY_TOL: f64 = 1e-8;
const OUTPUT_UNITARY_TOL: f64 = 1e-10;
const CONJUGATION_TOL: f64 = 1e-7;

const NULLSPACE_REL_TOL: f64 = 1e-8;
const INTERTWINER_RESIDUAL_TOL: f64 = 1e-8;
const INTERTWINER_SIGMA_MIN: f64 = 1e-6;
const INTERTWINER_TRIALS: usize = 8;
const INTERTWINER_SEED: u64 = 0x1a7e_4731;

#[derive(Debug, Clone)]
pub struct Unitarization {
    pub w: ComplexMatrix,
    /// Sizes of the groups of (numerically) equal singular values of `S`.
    pub cluster_sizes: Vec<usize>,
    /// Largest modulus of `U†T_fU` outside the singular-value blocks.
    pub off_block_residual: f64,
    pub unitarity_residual: f64,
    pub conjugation_residual: f64,
}

/// Unitary `W` with `T_f = W L(f) W†`, built from an invertible `S` with
/// `T_f = S L(f) S⁻¹`. Writing `S = U Σ V†`, the polar factor `W = U V†`
/// does the job because each `U†T_fU` commutes with `Σ`.
pub fn unitarize_similarity(
    t: &[ComplexMatrix],
    l: &[ComplexMatrix],
    s: &ComplexMatrix,
) -> Result<ComplexMatrix, LinalgError> {
    unitarize_similarity_detailed(t, l, s, DEFAULT_CLUSTER_GAP).map(|u| u.w)
}

pub fn unitarize_similarity_detailed(
    t: &[ComplexMatrix],
    l: &[ComplexMatrix],
    s: &ComplexMatrix,
    cluster_gap: f64,
) -> Result<Unitarization, LinalgError> {
    let n = check_families(t, l)?;
    if s.shape() != (n, n) {
        return Err(LinalgError::DimensionMismatch(format!("S is {:?}, families are {n}x{n}", s.shape())));
    }
    for (name, fam) in [("T", t), ("L", l)] {
        for (f, m) in fam.iter().enumerate() {
            let r = m.unitarity_residual();
            if r > UNITARY_TOL {
                return Err(LinalgError::PreconditionViolated(format!("{name}[{f}] is not unitary (residual {r:e})")));
            }
        }
    }
    let dec = svd(s)?;
    if dec.sigma_min() <= 1e-12 * dec.sigma_max() || dec.sigma_max() == 0.0 {
        return Err(LinalgError::Singular);
    }
    let s_norm = s.frobenius_norm();
    for (f, (tf, lf)) in t.iter().zip(l).enumerate() {
        let r = (&(tf * s) - &(s * lf)).frobenius_norm() / s_norm;
        if r > SIMILARITY_TOL {
            return Err(LinalgError::PreconditionViolated(format!(
                "T[{f}] S != S L[{f}] (relative residual {r:e})"
            )));
        }
    }

    let mut cluster_of = vec![0usize; n];
    let mut cluster_sizes = vec![1usize];
    for k in 1..n {
        let (prev, cur) = (dec.sigma[k - 1], dec.sigma[k]);
        if prev - cur > cluster_gap * prev {
            cluster_sizes.push(0);
        }
        *cluster_sizes.last_mut().unwrap() += 1;
        cluster_of[k] = cluster_sizes.len() - 1;
    }
    let ud = dec.u.adjoint();
    let mut off_block_residual = 0.0f64;
    for tf in t {
        let a = &(&ud * tf) * &dec.u;
        for i in 0..n {
            for j in 0..n {
                if cluster_of[i] != cluster_of[j] {
                    off_block_residual = off_block_residual.max(a[(i, j)].norm());
                }
            }
        }
    }

    let w = &dec.u * &dec.v.adjoint();
    let unitarity_residual = w.unitarity_residual();
    let wd = w.adjoint();
    let conjugation_residual = t
        .iter()
        .zip(l)
        .map(|(tf, lf)| tf.distance(&(&(&w * lf) * &wd)))
        .fold(0.0, f64::max);
    if unitarity_residual > OUTPUT_UNITARY_TOL || conjugation_residual > CONJUGATION_TOL {
        return Err(LinalgError::PreconditionViolated(format!(
            "unitarization failed: unitarity {unitarity_residual:e}, conjugation {conjugation_residual:e}"
        )));
    }
    Ok(Unitarization { w, cluster_sizes, off_block_residual, unitarity_residual, conjugation_residual })
}

/// Invertible `S` with `T_f S = S L(f)` for every `f`, or `None` when no
/// sampled element of the solution space is invertible.
pub fn find_intertwiner(t: &[ComplexMatrix], l: &[ComplexMatrix]) -> Result<Option<ComplexMatrix>, LinalgError> {
    find_intertwiner_seeded(t, l, INTERTWINER_SEED)
}

pub fn find_intertwiner_seeded(
    t: &[ComplexMatrix],
    l: &[ComplexMatrix],
    seed: u64,
) -> Result<Option<ComplexMatrix>, LinalgError> {
    let n = check_families(t, l)?;
    let nn = n * n;
    // row-major vec: vec(T S) = (T ⊗ I) vec S, vec(S L) = (I ⊗ Lᵀ) vec S
    let mut c = ComplexMatrix::zeros(t.len() * nn, nn);
    for (f, (tf, lf)) in t.iter().zip(l).enumerate() {
        let base = f * nn;
        for i in 0..n {
            for j in 0..n {
                let row = base + i * n + j;
                for k in 0..n {
                    c[(row, k * n + j)] += tf[(i, k)];
                    c[(row, i * n + k)] -= lf[(k, j)];
                }
            }
        }
    }
    let dec = svd(&c)?;
    let cut = NULLSPACE_REL_TOL * dec.sigma_max().max(1.0);
    let basis: Vec<Vec<C64>> = (0..nn).filter(|&k| dec.sigma[k] <= cut).map(|k| dec.v.column(k)).collect();
    if basis.is_empty() {
        return Ok(None);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, ComplexMatrix)> = None;
    for _ in 0..INTERTWINER_TRIALS {
        let mut v = vec![C64::new(0.0, 0.0); nn];
        for b in &basis {
            let coeff = random_complex(&mut rng);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += coeff * bi;
            }
        }
        let s = ComplexMatrix::from_vec(n, n, v)?;
        let norm = s.frobenius_norm();
        if norm == 0.0 {
            continue;
        }
        let s = s.scale_real((n as f64).sqrt() / norm);
        let residual = t
            .iter()
            .zip(l)
            .map(|(tf, lf)| (&(tf * &s) - &(&s * lf)).frobenius_norm())
            .fold(0.0, f64::max);
        let smin = svd(&s)?.sigma_min();
        if residual <= INTERTWINER_RESIDUAL_TOL
            && smin >= INTERTWINER_SIGMA_MIN
            && best.as_ref().is_none_or(|(b, _)| smin > *b)
        {
            best = Some((smin, s));
        }
    }
    Ok(best.map(|(_, s)| s))
}

fn check_families(t: &[ComplexMatrix], l: &[ComplexMatrix]) -> Result<usize, LinalgError> {
    if t.len() != l.len() || t.is_empty() {
        return Err(LinalgError::DimensionMismatch(format!("families of sizes {} and {}", t.len(), l.len())));
    }
    let n = t[0].rows();
    for m in t.iter().chain(l) {
        if m.shape() != (n, n) {
            return Err(LinalgError::DimensionMismatch(format!("expected {n}x{n} members, found {:?}", m.shape())));
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_group, regular_representation, right_regular_representation, FiniteGroup};
    use crate::linalg::random::random_unitary;

    fn rep(g: &FiniteGroup) -> Vec<ComplexMatrix> {
        regular_representation(g).iter().map(|p| ComplexMatrix::permutation(&p.0)).collect()
    }

    fn conj(w: &ComplexMatrix, fam: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
        let wd = w.adjoint();
        fam.iter().map(|m| &(w * m) * &wd).collect()
    }

    fn conjugation_holds(t: &[ComplexMatrix], l: &[ComplexMatrix], w: &ComplexMatrix) -> bool {
        w.unitarity_residual() <= 1e-10 && conj(w, l).iter().zip(t).all(|(a, b)| a.distance(b) <= 1e-7)
    }

    #[test]
    fn unitary_s_returns_conjugating_w() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = rep(&parse_group("S3").unwrap());
        let s = random_unitary(&mut rng, 6);
        let t = conj(&s, &l);
        let w = unitarize_similarity(&t, &l, &s).unwrap();
        assert!(conjugation_holds(&t, &l, &w));
    }

    #[test]
    fn group_algebra_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for name in ["Z3", "S3", "Z2xZ2", "Q8"] {
            let g = parse_group(name).unwrap();
            let l = rep(&g);
            let n = g.order();
            let w0 = random_unitary(&mut rng, n);
            // right translations commute with the left regular action
            let r: Vec<ComplexMatrix> =
                right_regular_representation(&g).iter().map(|p| ComplexMatrix::permutation(&p.0)).collect();
            let mut a = ComplexMatrix::zeros(n, n);
            for rg in &r {
                a = &a + &rg.scale(random_complex(&mut rng));
            }
            let s = &w0 * &a;
            let t = conj(&w0, &l);
            let det = unitarize_similarity_detailed(&t, &l, &s, DEFAULT_CLUSTER_GAP).unwrap();
            assert!(conjugation_holds(&t, &l, &det.w), "{name}");
            assert!(det.off_block_residual < 1e-8);
            assert_eq!(det.cluster_sizes.iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn non_intertwining_s_rejected() {
        let l = rep(&parse_group("Z2").unwrap());
        let s = ComplexMatrix::diag_real(&[2.0, 1.0]);
        assert!(matches!(unitarize_similarity(&l, &l, &s), Err(LinalgError::PreconditionViolated(_))));
    }

    #[test]
    fn intertwiner_for_same_family() {
        let l = rep(&parse_group("D4").unwrap());
        let s = find_intertwiner(&l, &l).unwrap().expect("identity intertwines");
        for lf in &l {
            assert!((&(lf * &s) - &(&s * lf)).frobenius_norm() <= 1e-8);
        }
        assert!(svd(&s).unwrap().sigma_min() >= 1e-6);
    }

    #[test]
    fn intertwiner_for_conjugated_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l = rep(&parse_group("Z4").unwrap());
        let w0 = random_unitary(&mut rng, 4);
        let t = conj(&w0, &l);
        let s = find_intertwiner(&t, &l).unwrap().unwrap();
        let w = unitarize_similarity(&t, &l, &s).unwrap();
        assert!(conjugation_holds(&t, &l, &w));
    }

    #[test]
    fn non_isomorphic_groups_have_no_intertwiner() {
        let t = rep(&parse_group("Z4").unwrap());
        let l = rep(&parse_group("Z2xZ2").unwrap());
        assert!(find_intertwiner(&t, &l).unwrap().is_none());
    }

    #[test]
    fn family_size_mismatch() {
        let l = rep(&parse_group("Z2").unwrap());
        assert!(find_intertwiner(&l, &l[..1]).is_err());
    }
}
