//! Affine-invariant geometry on symmetric positive-definite matrices.
//!
//! Matrix functions go through a symmetric eigendecomposition. Inputs are
//! symmetrized before decomposition and eigenvalues are clamped below at
//! [`EIG_FLOOR`] before logarithms and roots.

use nalgebra::DMatrix;

pub(crate) const EIG_FLOOR: f64 = 1e-300;

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Applies a scalar function to the eigenvalues of a symmetric matrix.
pub(crate) fn sym_apply(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = symmetrize(a).symmetric_eigen();
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let fl = f(lambda);
        scaled.column_mut(j).scale_mut(fl);
    }
    symmetrize(&(scaled * q.transpose()))
}

pub(crate) fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    symmetrize(a).symmetric_eigen().eigenvalues.iter().copied().collect()
}

pub(crate) fn sqrtm(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(a, |l| l.max(EIG_FLOOR).sqrt())
}

pub(crate) fn inv_sqrtm(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(a, |l| 1.0 / l.max(EIG_FLOOR).sqrt())
}

pub(crate) fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(a, f64::exp)
}

pub(crate) fn logm(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(a, |l| l.max(EIG_FLOOR).ln())
}

/// Square root and inverse square root from one decomposition.
fn sqrt_pair(p: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let eig = symmetrize(p).symmetric_eigen();
    let q = &eig.eigenvectors;
    let mut s = q.clone();
    let mut is = q.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let r = lambda.max(EIG_FLOOR).sqrt();
        s.column_mut(j).scale_mut(r);
        is.column_mut(j).scale_mut(1.0 / r);
    }
    (
        symmetrize(&(s * q.transpose())),
        symmetrize(&(is * q.transpose())),
    )
}

pub(crate) fn exp(p: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
    let (s, is) = sqrt_pair(p);
    let inner = &is * symmetrize(u) * &is;
    symmetrize(&(&s * expm(&inner) * &s))
}

pub(crate) fn log(p: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let (s, is) = sqrt_pair(p);
    let inner = &is * q * &is;
    symmetrize(&(&s * logm(&inner) * &s))
}

pub(crate) fn dist(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let is = inv_sqrtm(p);
    let inner = &is * q * &is;
    sym_eigenvalues(&inner)
        .iter()
        .map(|l| l.max(EIG_FLOOR).ln().powi(2))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn inner(p: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    // tr(p⁻¹ U p⁻¹ V) = tr((p^{-1/2} U p^{-1/2}) (p^{-1/2} V p^{-1/2}))
    let is = inv_sqrtm(p);
    let a = &is * u * &is;
    let b = &is * v * &is;
    a.dot(&b.transpose())
}

/// Congruence by `E = (q p⁻¹)^{1/2} = p^{1/2} (p^{-1/2} q p^{-1/2})^{1/2} p^{-1/2}`.
pub(crate) fn transport(p: &DMatrix<f64>, q: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
    let (s, is) = sqrt_pair(p);
    let mid = sqrtm(&(&is * q * &is));
    let e = &s * mid * &is;
    symmetrize(&(&e * u * e.transpose()))
}

// Diagonal SPD matrices: every operation acts entrywise on the diagonal.

pub(crate) fn diag_exp(p: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
    diag_map2(p, u, |pi, ui| pi * (ui / pi).exp())
}

pub(crate) fn diag_log(p: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    diag_map2(p, q, |pi, qi| pi * (qi / pi).ln())
}

pub(crate) fn diag_dist(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    (0..p.nrows())
        .map(|i| (q[(i, i)] / p[(i, i)]).ln().powi(2))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn diag_inner(p: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    (0..p.nrows())
        .map(|i| u[(i, i)] * v[(i, i)] / (p[(i, i)] * p[(i, i)]))
        .sum()
}

pub(crate) fn diag_transport(p: &DMatrix<f64>, q: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            u[(i, i)] * q[(i, i)] / p[(i, i)]
        } else {
            0.0
        }
    })
}

fn diag_map2(a: &DMatrix<f64>, b: &DMatrix<f64>, f: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| if i == j { f(a[(i, i)], b[(i, i)]) } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_logm_invert() {
        let a = DMatrix::from_row_slice(3, 3, &[0.3, 0.1, -0.2, 0.1, -0.5, 0.05, -0.2, 0.05, 0.7]);
        let back = logm(&expm(&a));
        assert!((back - a).norm() < 1e-12);
    }

    #[test]
    fn sqrtm_squares_back() {
        let p = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = sqrtm(&p);
        assert!((&s * &s - &p).norm() < 1e-12);
        let is = inv_sqrtm(&p);
        assert!((&s * &is - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
