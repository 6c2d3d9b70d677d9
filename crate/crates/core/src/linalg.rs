//! Thin dense linear-algebra layer over `faer`.
//!
//! Everything here works on `Mat<c64>` / `Mat<f64>` and returns crate errors
//! instead of panicking on solver failure.

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

pub const I: c64 = c64 { re: 0.0, im: 1.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector().iter().copied().collect();
    Ok((vals, evd.U().to_owned()))
}

/// `exp(-i H t)` through a full eigendecomposition of `H`.
pub fn expm_hermitian(h: MatRef<'_, c64>, t: f64) -> Result<Mat<c64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::Argument("expm_hermitian: matrix not square".into()));
    }
    if t == 0.0 {
        return Ok(Mat::identity(h.nrows(), h.ncols()));
    }
    let (vals, vecs) = hermitian_eigen(h)?;
    let n = vals.len();
    let scaled = Mat::from_fn(n, n, |i, k| vecs[(i, k)] * c64::cis(-vals[k] * t));
    Ok(&scaled * vecs.adjoint())
}

/// Eigenvalues and orthonormal eigenvectors of a unitary (or any normal) matrix.
///
/// The general complex solver does not guarantee orthogonality inside
/// (near-)degenerate eigenvalue clusters, so those columns are re-orthonormalized
/// with modified Gram-Schmidt.
pub fn unitary_eigen(u: MatRef<'_, c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let evd = u
        .eigen()
        .map_err(|e| Error::Numerical(format!("complex eigensolver: {e:?}")))?;
    let vals: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let mut vecs = evd.U().to_owned();
    let n = vals.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].arg().total_cmp(&vals[b].arg()));
    let mut visited = vec![false; n];
    for (pos, &k) in order.iter().enumerate() {
        if visited[k] {
            continue;
        }
        let mut cluster = vec![k];
        for &m in &order[pos + 1..] {
            if (vals[m] - vals[k]).norm() < 1e-7 {
                cluster.push(m);
            }
        }
        // wrap-around neighbours near arg = +-pi
        for &m in order.iter().rev() {
            if !cluster.contains(&m) && (vals[m] - vals[k]).norm() < 1e-7 {
                cluster.push(m);
            }
        }
        for &m in &cluster {
            visited[m] = true;
        }
        gram_schmidt(&mut vecs, &cluster)?;
    }
    Ok((vals, vecs))
}

/// Eigenvalues only of a general complex matrix.
pub fn complex_eigenvalues(u: MatRef<'_, c64>) -> Result<Vec<c64>> {
    u.eigenvalues()
        .map_err(|e| Error::Numerical(format!("complex eigensolver: {e:?}")))
}

fn gram_schmidt(vecs: &mut Mat<c64>, cols: &[usize]) -> Result<()> {
    let n = vecs.nrows();
    for (a, &j) in cols.iter().enumerate() {
        for &p in &cols[..a] {
            let mut dot = ZERO;
            for i in 0..n {
                dot += vecs[(i, p)].conj() * vecs[(i, j)];
            }
            for i in 0..n {
                let v = vecs[(i, p)];
                vecs[(i, j)] -= dot * v;
            }
        }
        let norm = (0..n).map(|i| vecs[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Numerical(
                "eigenvectors of a degenerate cluster are linearly dependent".into(),
            ));
        }
        for i in 0..n {
            vecs[(i, j)] /= norm;
        }
    }
    Ok(())
}

pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// Largest entry of `A - A^dagger`.
pub fn hermiticity_defect(a: MatRef<'_, c64>) -> f64 {
    max_abs_diff(a, a.adjoint().to_owned().as_ref())
}

/// Largest entry of `U^dagger U - I`.
pub fn unitarity_defect(u: MatRef<'_, c64>) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(prod.as_ref(), Mat::<c64>::identity(u.ncols(), u.ncols()).as_ref())
}

/// Largest entry of `[A, B]`.
pub fn commutator_norm(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    let ab = a * b;
    let ba = b * a;
    max_abs_diff(ab.as_ref(), ba.as_ref())
}

pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn to_complex(a: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0))
}

pub fn trace(a: MatRef<'_, c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

pub fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[c64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn matvec(a: MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    assert_eq!(a.ncols(), x.len());
    let mut out = vec![ZERO; a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += a[(i, j)] * xj;
        }
    }
    out
}
