//! One-sided (Hestenes) Jacobi SVD for complex matrices.

use num_complex::Complex64 as C64;

use super::{ComplexMatrix, LinalgError};

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `m = U · diag(σ) · V†`.
///
/// For an `r×c` input with `k = min(r, c)`, `u` is `r×k` and `v` is `c×k`,
/// both with orthonormal columns; for square inputs they are unitary.
/// When `r ≥ c` the full right factor is returned even for rank-deficient
/// inputs, which is what nullspace extraction relies on.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s = ComplexMatrix::diag_real(&self.sigma);
        &(&self.u * &s) * &self.v.adjoint()
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Numerical rank at relative threshold `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.sigma_max();
        self.sigma.iter().filter(|&&s| s > cut).count()
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.adjoint())?;
        Ok(Svd { u: t.v, sigma: t.sigma, v: t.u })
    }
}

fn jacobi_tall(m: &ComplexMatrix) -> Result<Svd, LinalgError> {
    let (rows, n) = m.shape();
    // columns stored contiguously
    let mut a: Vec<Vec<C64>> = (0..n).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect())
        .collect();
    let eps = f64::EPSILON;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(C64::norm_sqr).sum();
                let beta: f64 = a[q].iter().map(C64::norm_sqr).sum();
                let gamma: C64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ph_conj = phase.conj();
                rotate(&mut a, p, q, c, s, ph_conj);
                rotate(&mut v, p, q, c, s, ph_conj);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence("one-sided Jacobi SVD"));
    }

    let mut sigma: Vec<f64> = a.iter().map(|col| col.iter().map(C64::norm_sqr).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let smax = order.first().map_or(0.0, |&i| sigma[i]);
    let tiny = smax * (rows.max(n) as f64) * eps;

    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if sigma[j] > tiny && sigma[j] > 0.0 {
            let inv = 1.0 / sigma[j];
            u_cols.push(a[j].iter().map(|z| z * inv).collect());
        } else {
            u_cols.push(vec![C64::new(0.0, 0.0); rows]);
            missing.push(k);
        }
    }
    complete_orthonormal(&mut u_cols, &missing, rows);

    let sorted_sigma: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();
    sigma = sorted_sigma;
    let mut u = ComplexMatrix::zeros(rows, n);
    let mut vm = ComplexMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        u.set_column(k, &u_cols[k]);
        vm.set_column(k, &v[j]);
    }
    Ok(Svd { u, sigma, v: vm })
}

#[inline]
fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, ph_conj: C64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * ph_conj;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Fills the columns listed in `missing` with vectors orthonormal to all
/// others, via Gram–Schmidt against the standard basis.
fn complete_orthonormal(cols: &mut [Vec<C64>], missing: &[usize], dim: usize) {
    let mut candidate = 0;
    for &k in missing {
        while candidate < dim {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[candidate] = C64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for (j, col) in cols.iter().enumerate() {
                    if j == k || (missing.contains(&j) && col.iter().all(|z| z.norm() == 0.0)) {
                        continue;
                    }
                    let proj: C64 = col.iter().zip(&e).map(|(a, b)| a.conj() * b).sum();
                    for (ei, ci) in e.iter_mut().zip(col) {
                        *ei -= proj * ci;
                    }
                }
            }
            let norm = e.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
            if norm > 1e-6 {
                cols[k] = e.into_iter().map(|z| z / norm).collect();
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(m: &ComplexMatrix) {
        let s = svd(m).unwrap();
        let scale = m.frobenius_norm().max(1e-300);
        assert!(s.reconstruct().distance(m) <= 1e-10 * scale, "reconstruction");
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.sigma.iter().all(|&x| x >= 0.0));
        assert!(s.u.unitarity_residual() <= 1e-10);
        assert!(s.v.unitarity_residual() <= 1e-10);
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let s = svd(&ComplexMatrix::identity(4)).unwrap();
        assert!(s.sigma.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn diagonal_sqrt_weights() {
        let m = ComplexMatrix::diag_real(&[0.7f64.sqrt(), 0.3f64.sqrt()]);
        let s = svd(&m).unwrap();
        assert!((s.sigma[0] - 0.836_660_026_534_075_5).abs() < 1e-15);
        assert!((s.sigma[1] - 0.547_722_557_505_166_1).abs() < 1e-15);
    }

    #[test]
    fn random_square_and_rectangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (r, c) in [(5, 5), (2, 2), (16, 16), (9, 4), (4, 9), (1, 3), (3, 1)] {
            check(&random_matrix(&mut rng, r, c));
        }
    }

    #[test]
    fn rank_deficient_keeps_unitary_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 6, 2);
        let b = random_matrix(&mut rng, 2, 6);
        let m = &a * &b;
        check(&m);
        let s = svd(&m).unwrap();
        assert_eq!(s.rank(1e-12), 2);
        check(&ComplexMatrix::zeros(3, 3));
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(svd(&m), Err(LinalgError::NonFinite)));
    }
}
