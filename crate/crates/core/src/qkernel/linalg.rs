//! Dense Hermitian linear algebra on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Maximum elementwise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Indices whose row or column has a nonzero entry.
fn support(m: &CMatrix) -> Vec<usize> {
    let zero = Complex64::new(0.0, 0.0);
    (0..m.nrows())
        .filter(|&i| m.row(i).iter().any(|z| *z != zero) || m.column(i).iter().any(|z| *z != zero))
        .collect()
}

/// Eigendecomposition of a Hermitian matrix. Some inputs make the QR
/// iteration return non-finite values; those are retried on a shifted copy.
fn symmetric_eigen(h: CMatrix) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let e = SymmetricEigen::new(h.clone());
    if e.eigenvalues.iter().all(|v| v.is_finite()) {
        return e;
    }
    let n = h.nrows();
    let shift = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut e = SymmetricEigen::new(h + CMatrix::identity(n, n) * Complex64::new(shift, 0.0));
    e.eigenvalues.iter_mut().for_each(|v| *v -= shift);
    e
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    // Zero rows and columns only contribute zero eigenvalues.
    let keep = support(m);
    let mut vals = vec![0.0; m.nrows() - keep.len()];
    if !keep.is_empty() {
        let sub = m.select_rows(&keep).select_columns(&keep);
        vals.extend(
            symmetric_eigen(hermitian_part(&sub))
                .eigenvalues
                .iter()
                .copied(),
        );
    }
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Eigenpairs of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let keep = support(m);
    if keep.len() == n {
        let e = symmetric_eigen(hermitian_part(m));
        return (e.eigenvalues.iter().copied().collect(), e.eigenvectors);
    }
    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMatrix::zeros(n, n);
    if !keep.is_empty() {
        let sub = m.select_rows(&keep).select_columns(&keep);
        let e = symmetric_eigen(hermitian_part(&sub));
        for (k, &v) in e.eigenvalues.iter().enumerate() {
            for (a, &i) in keep.iter().enumerate() {
                vecs[(i, vals.len())] = e.eigenvectors[(a, k)];
            }
            vals.push(v);
        }
    }
    for i in (0..n).filter(|i| !keep.contains(i)) {
        vecs[(i, vals.len())] = Complex64::new(1.0, 0.0);
        vals.push(0.0);
    }
    (vals, vecs)
}

/// Clips eigenvalues in `[-tol, 0)` to zero; more negative values are an error.
pub(crate) fn clip_spectrum(vals: &mut [f64], tol: f64) -> Result<()> {
    for v in vals.iter_mut() {
        if *v < -tol {
            return Err(Error::NotPsd(*v));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Square root of a PSD Hermitian matrix.
pub fn psd_sqrt(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let (mut vals, vecs) = hermitian_eigen(m);
    clip_spectrum(&mut vals, tol)?;
    let n = m.nrows();
    let mut scaled = vecs.clone();
    for (j, v) in vals.iter().enumerate() {
        let s = Complex64::new(v.sqrt(), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Ok(&scaled * vecs.adjoint())
}

/// Singular values of an arbitrary complex matrix.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

/// Max elementwise deviation of `u† u` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Compensated summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `-sum p log2 p` over positive entries.
pub fn entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    neumaier_sum(
        probs
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_rows_are_deflated() {
        // A 2x2 block embedded at indices 1 and 3 of a 4x4 matrix.
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 1)] = c(0.5);
        m[(3, 3)] = c(0.5);
        m[(1, 3)] = Complex64::new(0.0, 0.5);
        m[(3, 1)] = Complex64::new(0.0, -0.5);
        let vals = hermitian_eigenvalues(&m);
        let expect = [0.0, 0.0, 0.0, 1.0];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12, "{vals:?}");
        }
        let (vals, vecs) = hermitian_eigen(&m);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            4,
            vals.iter().map(|&v| c(v)),
        ));
        let back = &vecs * d * vecs.adjoint();
        assert!((back - &m).norm() < 1e-12);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(4.0), c(9.0)]));
        let s = psd_sqrt(&m, 1e-12).unwrap();
        assert!((s[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((s[(1, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn clipping_rejects_large_negatives() {
        let mut v = vec![-1e-12, 0.5];
        clip_spectrum(&mut v, 1e-9).unwrap();
        assert_eq!(v[0], 0.0);
        let mut w = vec![-1e-3];
        assert!(clip_spectrum(&mut w, 1e-9).is_err());
    }

    #[test]
    fn compensated_sum_is_exact_on_uniform_terms() {
        let n = 1 << 20;
        let p = 1.0 / n as f64;
        let h = entropy_bits(std::iter::repeat_n(p, n));
        assert!((h - 20.0).abs() < 1e-12);
    }
}
