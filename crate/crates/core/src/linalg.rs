//! Dense complex matrix helpers for unitary groups: exponentials and
//! logarithms through Hermitian eigendecompositions, polar re-unitarization,
//! and an su(n) basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, the working representation for group elements and
/// algebra values.
pub type CMat = DMatrix<Complex64>;

pub(crate) fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Frobenius norm.
pub(crate) fn frob(m: &CMat) -> f64 {
    m.norm()
}

pub(crate) fn unitarity_defect(u: &CMat) -> f64 {
    frob(&(u.adjoint() * u - eye(u.nrows())))
}

pub(crate) fn det_defect(u: &CMat) -> f64 {
    (u.determinant() - Complex64::new(1.0, 0.0)).norm()
}

/// Nearest unitary via Newton iteration on the polar factor, then a phase
/// correction putting the determinant back at 1.
pub(crate) fn polar_unitarize(u: &CMat) -> Result<CMat> {
    let n = u.nrows();
    let mut y = u.clone();
    for _ in 0..8 {
        let inv_adj = y
            .adjoint()
            .try_inverse()
            .ok_or_else(|| Error::NotUnitary(unitarity_defect(u)))?;
        y = (&y + inv_adj) * Complex64::new(0.5, 0.0);
        if unitarity_defect(&y) < 1e-14 {
            break;
        }
    }
    let phase = y.determinant().arg();
    let fix = Complex64::from_polar(1.0, -phase / n as f64);
    Ok(y * fix)
}

/// exp of an anti-Hermitian matrix through the eigendecomposition of the
/// Hermitian matrix -iX.
pub(crate) fn exp_anti_hermitian(x: &CMat) -> CMat {
    let n = x.nrows();
    let h = x * Complex64::new(0.0, -1.0);
    let se = h.symmetric_eigen();
    let phases = DVector::from_iterator(
        n,
        se.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)),
    );
    let v = se.eigenvectors;
    &v * CMat::from_diagonal(&phases) * v.adjoint()
}

/// Eigendecomposition of a unitary matrix: orthonormal eigenvectors V and
/// principal eigenvalue angles in (-pi, pi].
///
/// U is normal, so its Hermitian and anti-Hermitian parts commute and a
/// generic real combination of them has the same eigenvectors; degenerate
/// combinations are detected and retried with a different mixing constant.
pub(crate) fn eig_unitary(u: &CMat) -> Result<(CMat, Vec<f64>)> {
    let n = u.nrows();
    let a = (u + u.adjoint()) * Complex64::new(0.5, 0.0);
    let b = (u - u.adjoint()) * Complex64::new(0.0, -0.5);
    let mut best: Option<(CMat, f64)> = None;
    for &c in &[0.618_033_988_7, 0.414_213_562_4, 0.302_775_637_7, 1.732_050_808] {
        let m = &a + &b * Complex64::new(c, 0.0);
        let se = m.symmetric_eigen();
        let v = se.eigenvectors;
        let off = off_diagonal_norm(&(v.adjoint() * u * &v));
        if best.as_ref().map_or(true, |(_, o)| off < *o) {
            best = Some((v, off));
        }
        if off < 1e-13 {
            break;
        }
    }
    let (mut v, mut off) = best.unwrap();
    if off >= 1e-13 {
        // a mixture eigenvalue collision mixed eigenvectors within a
        // cluster; clean it up with pairwise rotations
        off = jacobi_refine(u, &mut v);
    }
    if off >= 1e-9 {
        return Err(Error::Precondition(
            "could not diagonalize unitary matrix (not normal within tolerance?)".into(),
        ));
    }
    let w = v.adjoint() * u * &v;
    let thetas: Vec<f64> = (0..n).map(|i| w[(i, i)].arg()).collect();
    Ok((v, thetas))
}

fn off_diagonal_norm(w: &CMat) -> f64 {
    let n = w.nrows();
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off += w[(i, j)].norm_sqr();
            }
        }
    }
    off.sqrt()
}

/// Drive V* U V to diagonal form by 2x2 unitary rotations. Each significant
/// off-diagonal pair spans a normal 2x2 block; the rotation diagonalizing
/// its best-separated Hermitian mixture diagonalizes the block itself.
fn jacobi_refine(u: &CMat, v: &mut CMat) -> f64 {
    let n = u.nrows();
    let mut off = f64::INFINITY;
    for _sweep in 0..12 {
        let w = v.adjoint() * u * &*v;
        off = off_diagonal_norm(&w);
        if off < 1e-14 {
            break;
        }
        for i in 0..n {
            for j in i + 1..n {
                if w[(i, j)].norm() + w[(j, i)].norm() < 1e-15 {
                    continue;
                }
                let (m11, m12, m21, m22) = (w[(i, i)], w[(i, j)], w[(j, i)], w[(j, j)]);
                // Hermitian mixtures (M + M*)/2 + c (M - M*)/(2i); pick the
                // one with the widest eigenvalue gap
                let mut rot: Option<(f64, Complex64, f64)> = None;
                for &c in &[0.0, 0.618_033_988_7, 1.732_050_808, -0.414_213_562_4] {
                    let alpha = m11.re + c * m11.im;
                    let gamma = m22.re + c * m22.im;
                    let beta = (m12 + m21.conj()) * Complex64::new(0.5, 0.0)
                        + (m12 - m21.conj()) * Complex64::new(0.0, -0.5 * c);
                    let gap = ((alpha - gamma).powi(2) + 4.0 * beta.norm_sqr()).sqrt();
                    if rot.as_ref().map_or(true, |(g, _, _)| gap > *g) {
                        rot = Some((gap, beta, alpha - gamma));
                    }
                }
                let (gap, beta, diag_diff) = rot.unwrap();
                if gap < 1e-15 || beta.norm() < 1e-17 {
                    continue;
                }
                // rotation angle for the 2x2 Hermitian eigenproblem
                let theta = 0.5 * (2.0 * beta.norm()).atan2(diag_diff);
                let (cs, sn) = (theta.cos(), theta.sin());
                let phase = beta / Complex64::new(beta.norm(), 0.0);
                for r in 0..n {
                    let vi = v[(r, i)];
                    let vj = v[(r, j)];
                    v[(r, i)] = vi * Complex64::new(cs, 0.0) + vj * phase.conj() * Complex64::new(sn, 0.0);
                    v[(r, j)] = vj * Complex64::new(cs, 0.0) - vi * phase * Complex64::new(sn, 0.0);
                }
            }
        }
    }
    off
}

/// Assemble V diag(i * angles) V*.
pub(crate) fn assemble_log(v: &CMat, angles: &[f64]) -> CMat {
    let n = v.nrows();
    let diag = DVector::from_iterator(n, angles.iter().map(|&t| Complex64::new(0.0, t)));
    v * CMat::from_diagonal(&diag) * v.adjoint()
}

/// Basis of su(n): anti-Hermitian traceless matrices.
pub(crate) fn su_basis(n: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            let mut m = CMat::zeros(n, n);
            m[(j, k)] = Complex64::new(1.0, 0.0);
            m[(k, j)] = Complex64::new(-1.0, 0.0);
            basis.push(m);
            let mut m = CMat::zeros(n, n);
            m[(j, k)] = Complex64::new(0.0, 1.0);
            m[(k, j)] = Complex64::new(0.0, 1.0);
            basis.push(m);
        }
    }
    for j in 0..n - 1 {
        let mut m = CMat::zeros(n, n);
        for l in 0..=j {
            m[(l, l)] = Complex64::new(0.0, 1.0);
        }
        m[(j + 1, j + 1)] = Complex64::new(0.0, -(j as f64 + 1.0));
        basis.push(m);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2_x() -> CMat {
        // i * sigma_x
        CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        )
    }

    #[test]
    fn exp_log_round_trip() {
        let x = su2_x() * Complex64::new(0.7, 0.0);
        let u = exp_anti_hermitian(&x);
        assert!(unitarity_defect(&u) < 1e-12);
        assert!(det_defect(&u) < 1e-12);
        let (v, thetas) = eig_unitary(&u).unwrap();
        let x2 = assemble_log(&v, &thetas);
        assert!(frob(&(&x2 - &x)) < 1e-10, "{}", frob(&(&x2 - &x)));
    }

    #[test]
    fn exp_rotation_angle() {
        // exp(0.7 i sigma_x) has eigenvalues e^{+-0.7 i}
        let u = exp_anti_hermitian(&(su2_x() * Complex64::new(0.7, 0.0)));
        let (_, mut thetas) = eig_unitary(&u).unwrap();
        thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((thetas[0] + 0.7).abs() < 1e-12);
        assert!((thetas[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn polar_repairs_drift() {
        let u = exp_anti_hermitian(&(su2_x() * Complex64::new(0.3, 0.0)));
        let drifted = &u * Complex64::new(1.0 + 1e-8, 0.0);
        let fixed = polar_unitarize(&drifted).unwrap();
        assert!(unitarity_defect(&fixed) < 1e-13);
        assert!(det_defect(&fixed) < 1e-13);
        assert!(frob(&(&fixed - &u)) < 1e-7);
    }

    #[test]
    fn su_basis_properties() {
        for n in 2..=4 {
            let basis = su_basis(n);
            assert_eq!(basis.len(), n * n - 1);
            for m in &basis {
                assert!(frob(&(m.adjoint() + m)) < 1e-14, "anti-Hermitian");
                assert!(m.trace().norm() < 1e-14, "traceless");
            }
        }
    }

    #[test]
    fn degenerate_spectrum_still_diagonalizes() {
        // -1 in SU(2): both eigenvalues -1, any basis works
        let u = eye(2) * Complex64::new(-1.0, 0.0);
        let (_, thetas) = eig_unitary(&u).unwrap();
        for t in thetas {
            assert!((t.abs() - std::f64::consts::PI).abs() < 1e-12);
        }
    }
}
