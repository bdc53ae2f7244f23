//! Eigenvalues of complex matrices via Hessenberg reduction and shifted QR.
//!
//! Intended for matrices similar to unitaries (every T-operator of a clonable
//! set is). Defective matrices converge too, but with the usual loss of
//! accuracy, and are out of scope.

use num_complex::Complex64 as C64;

use super::{ComplexMatrix, LinalgError};

const MAX_ITER_PER_EIGENVALUE: usize = 120;

pub fn eigenvalues_diagonalizable(m: &ComplexMatrix) -> Result<Vec<C64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare(m.shape()));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows();
    let mut h: Vec<Vec<C64>> = m.to_rows();
    hessenberg(&mut h);
    let mut eig = vec![C64::new(0.0, 0.0); n];
    let norm = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;

    let mut hi = n;
    let mut iter = 0usize;
    while hi > 0 {
        if hi == 1 {
            eig[0] = h[0][0];
            break;
        }
        // locate the start of the trailing unreduced block
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[lo][lo - 1].norm();
            let mut diag = h[lo - 1][lo - 1].norm() + h[lo][lo].norm();
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= eps * diag {
                h[lo][lo - 1] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        let size = hi - lo;
        if size == 1 {
            eig[hi - 1] = h[hi - 1][hi - 1];
            hi -= 1;
            iter = 0;
            continue;
        }
        if size == 2 {
            let (l1, l2) = eig2(h[lo][lo], h[lo][lo + 1], h[lo + 1][lo], h[lo + 1][lo + 1]);
            eig[lo] = l1;
            eig[lo + 1] = l2;
            hi -= 2;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(LinalgError::NoConvergence("shifted QR eigenvalue iteration"));
        }
        let k = hi - 1;
        let shift = if iter % 11 == 0 {
            // exceptional shift to break cycles on symmetric-spectrum inputs
            h[k][k] + C64::new(0.75 * h[k][k - 1].norm(), 0.31 * h[k][k - 1].norm())
        } else {
            let (l1, l2) = eig2(h[k - 1][k - 1], h[k - 1][k], h[k][k - 1], h[k][k]);
            if (l1 - h[k][k]).norm() <= (l2 - h[k][k]).norm() { l1 } else { l2 }
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(eig)
}

/// Eigenvalues of `[[a, b], [c, d]]`.
fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    (half_tr + disc, half_tr - disc)
}

fn hessenberg(h: &mut [Vec<C64>]) {
    let n = h.len();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[i][k]).collect();
        let xnorm = x.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);
        // H <- (I - 2vv†) H
        for j in 0..n {
            let dot: C64 = (0..v.len()).map(|i| v[i].conj() * h[k + 1 + i][j]).sum();
            for i in 0..v.len() {
                h[k + 1 + i][j] -= v[i] * dot * 2.0;
            }
        }
        // H <- H (I - 2vv†)
        for row in h.iter_mut() {
            let dot: C64 = (0..v.len()).map(|i| row[k + 1 + i] * v[i]).sum();
            for i in 0..v.len() {
                row[k + 1 + i] -= dot * v[i].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[i][k] = C64::new(0.0, 0.0);
        }
    }
}

/// One explicit shifted QR step on the active block `lo..hi` using Givens rotations.
fn qr_step(h: &mut [Vec<C64>], lo: usize, hi: usize, shift: C64) {
    for i in lo..hi {
        h[i][i] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo - 1);
    for k in lo..hi - 1 {
        let (a, b) = (h[k][k], h[k + 1][k]);
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (1.0, C64::new(0.0, 0.0))
        } else if a.norm() == 0.0 {
            (0.0, C64::new(1.0, 0.0))
        } else {
            (a.norm() / r, (a / a.norm()) * b.conj() / r)
        };
        for j in k..hi {
            let (x, y) = (h[k][j], h[k + 1][j]);
            h[k][j] = x * c + s * y;
            h[k + 1][j] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        for row in h.iter_mut().take(hi.min(k + 2)).skip(lo) {
            let (x, y) = (row[k], row[k + 1]);
            row[k] = x * c + y * s.conj();
            row[k + 1] = -x * s + y * c;
        }
    }
    for i in lo..hi {
        h[i][i] += shift;
    }
}

/// Greedy multiset matching: returns the largest distance between matched
/// elements (each element of `a` takes its nearest unused partner in `b`).
/// `None` if the lengths differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))?;
        used[best] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_group, regular_representation};
    use crate::linalg::svd::svd;
    use crate::linalg::random::{random_matrix, random_unitary};
    use crate::linalg::tensor_product;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn perm_matrix(p: &crate::groups::Permutation) -> ComplexMatrix {
        ComplexMatrix::permutation(&p.0)
    }

    /// Oracle: each eigenvalue makes `m − λI` singular, and power sums match traces.
    fn assert_spectrum(m: &ComplexMatrix, eig: &[C64], tol: f64) {
        let n = m.rows();
        for &l in eig {
            let shifted = m - &ComplexMatrix::identity(n).scale(l);
            assert!(svd(&shifted).unwrap().sigma_min() <= tol * m.frobenius_norm().max(1.0), "λ={l}");
        }
        let mut power = ComplexMatrix::identity(n);
        for k in 1..=n.min(6) {
            power = &power * m;
            let s: C64 = eig.iter().map(|l| l.powu(k as u32)).sum();
            assert!((s - power.trace()).norm() <= tol * 10.0 * (n as f64), "power sum {k}");
        }
    }

    #[test]
    fn z2_swap_spectrum() {
        let l = regular_representation(&parse_group("Z2").unwrap());
        let e = eigenvalues_diagonalizable(&perm_matrix(&l[1])).unwrap();
        let want = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        assert!(multiset_distance(&e, &want).unwrap() < 1e-12);
    }

    #[test]
    fn z3_cube_roots() {
        let l = regular_representation(&parse_group("Z3").unwrap());
        let e = eigenvalues_diagonalizable(&perm_matrix(&l[1])).unwrap();
        let want: Vec<C64> = (0..3).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)).collect();
        assert!(multiset_distance(&e, &want).unwrap() < 1e-12);
    }

    #[test]
    fn swap_tensor_swap() {
        let l = regular_representation(&parse_group("Z2").unwrap());
        let t = perm_matrix(&l[1]);
        let e = eigenvalues_diagonalizable(&tensor_product(&t, &t).unwrap()).unwrap();
        let want = [1.0, 1.0, -1.0, -1.0].map(|x| C64::new(x, 0.0));
        assert!(multiset_distance(&e, &want).unwrap() < 1e-12);
    }

    #[test]
    fn regular_rep_eigenvalues_on_unit_circle() {
        for name in ["Z4", "Z5", "Z2xZ2", "S3", "Z7", "Z8", "D4", "Q8", "Z6"] {
            let g = parse_group(name).unwrap();
            for p in regular_representation(&g) {
                let m = perm_matrix(&p);
                let e = eigenvalues_diagonalizable(&m).unwrap();
                assert!(e.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-9), "{name}");
                assert_spectrum(&m, &e, 1e-8);
            }
        }
    }

    #[test]
    fn similar_to_unitary_and_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 5, 8, 12] {
            let u = random_unitary(&mut rng, n);
            let s = random_matrix(&mut rng, n, n);
            let m = &(&s * &u) * &s.inverse().unwrap();
            let e = eigenvalues_diagonalizable(&m).unwrap();
            assert_spectrum(&m, &e, 1e-8);
            let eu = eigenvalues_diagonalizable(&u).unwrap();
            assert!(multiset_distance(&e, &eu).unwrap() < 1e-8);
            let r = random_matrix(&mut rng, n, n);
            assert_spectrum(&r, &eigenvalues_diagonalizable(&r).unwrap(), 1e-8);
        }
    }

    #[test]
    fn degenerate_kron_with_identity() {
        let g = parse_group("Z4").unwrap();
        let t = perm_matrix(&regular_representation(&g)[1]);
        let big = tensor_product(&t, &ComplexMatrix::identity(4)).unwrap();
        let e = eigenvalues_diagonalizable(&big).unwrap();
        assert_eq!(e.len(), 16);
        assert_spectrum(&big, &e, 1e-8);
    }

    #[test]
    fn non_square_rejected() {
        assert!(eigenvalues_diagonalizable(&ComplexMatrix::zeros(2, 3)).is_err());
    }
}
