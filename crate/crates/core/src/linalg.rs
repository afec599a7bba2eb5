//! Complex dense linear-algebra helpers shared by all modules.
//!
//! Everything here works on small dynamically sized matrices
//! (`N` up to a few tens) and favours determinism over speed: singular
//! vectors and eigenvectors come back sorted with a fixed phase
//! convention so that identical inputs always produce bit-identical
//! outputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance used to decide numerical rank.
pub const RANK_TOL: f64 = 1e-12;

#[inline]
pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a complex matrix from row-major real parts.
pub fn from_real_rows(nrows: usize, ncols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(nrows, ncols, data.iter().map(|&x| real(x)))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Squared Frobenius norm.
pub fn frob2(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Rotates `v` so that its first non-negligible entry is real and positive.
/// Returns the unit-modulus factor that was applied.
pub fn normalize_phase(mut v: nalgebra::DVectorViewMut<'_, Complex64>) -> Complex64 {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return real(1.0);
    }
    let pivot = v
        .iter()
        .find(|z| z.norm() > 1e-9 * scale)
        .copied()
        .unwrap_or(real(1.0));
    let factor = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= factor;
    }
    factor
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
///
/// Eigenvectors follow the phase convention of [`normalize_phase`].
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(a.is_square(), "hermitian_eigen needs a square matrix");
    let n = a.nrows();
    // Symmetrize to remove rounding asymmetry before the decomposition.
    let sym = (a + a.adjoint()) * real(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
        normalize_phase(vectors.column_mut(dst));
    }
    (values, vectors)
}

/// Hermitian PSD square root via eigendecomposition, clamping eigenvalues
/// below `1e-12 * max` to zero.
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(a);
    let top = vals.first().copied().unwrap_or(0.0).abs();
    if let Some(&low) = vals.last() {
        if low < -1e-9 * top.max(1.0) {
            return Err(Error::Domain(format!(
                "matrix is not positive semi-definite (eigenvalue {low:.3e})"
            )));
        }
    }
    let roots: Vec<f64> = vals
        .iter()
        .map(|&l| if l <= RANK_TOL * top { 0.0 } else { l.sqrt() })
        .collect();
    Ok(scale_columns(&vecs, &roots) * vecs.adjoint())
}

/// Returns `a * diag(s)`.
pub fn scale_columns(a: &CMatrix, s: &[f64]) -> CMatrix {
    let mut out = a.clone();
    for (j, &f) in s.iter().enumerate() {
        out.column_mut(j).scale_mut(f);
    }
    out
}

/// Thin singular value decomposition `a = u * diag(s) * v_h`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors, `rows x r` with `r = min(rows, cols)`.
    pub u: CMatrix,
    /// Singular values in descending order.
    pub s: Vec<f64>,
    /// Conjugate-transposed right singular vectors, `r x cols`.
    pub v_h: CMatrix,
}

impl Svd {
    /// Number of singular values above `RANK_TOL * s_max`.
    pub fn rank(&self) -> usize {
        let top = self.s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&x| x > RANK_TOL * top).count()
    }

    /// Right singular vectors as columns (`cols x r`).
    pub fn v(&self) -> CMatrix {
        self.v_h.adjoint()
    }
}

/// Thin SVD with descending singular values; each left singular vector has
/// its first significant component real-positive (the right singular
/// vectors absorb the compensating phase).
pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(Svd {
            u: CMatrix::zeros(m, 0),
            s: Vec::new(),
            v_h: CMatrix::zeros(0, n),
        });
    }
    let dec = a.clone().try_svd(true, true, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Numerical("singular value decomposition did not converge".into())
    })?;
    let mut u = dec.u.expect("u requested");
    let mut v_h = dec.v_t.expect("v_t requested");
    let s_raw = dec.singular_values;
    if s_raw.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite singular value".into()));
    }
    let r = s_raw.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| {
        s_raw[j]
            .partial_cmp(&s_raw[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    if order.iter().enumerate().any(|(a, &b)| a != b) {
        let u0 = u.clone();
        let v0 = v_h.clone();
        for (dst, &src) in order.iter().enumerate() {
            u.set_column(dst, &u0.column(src));
            v_h.set_row(dst, &v0.row(src));
        }
    }
    let s: Vec<f64> = order.iter().map(|&i| s_raw[i]).collect();
    for j in 0..r {
        let f = normalize_phase(u.column_mut(j));
        // a = sum_j s_j u_j v_j^H; rotating u_j by f needs v_j^H scaled by conj(f).
        let g = f.conj();
        for z in v_h.row_mut(j).iter_mut() {
            *z *= g;
        }
    }
    Ok(Svd { u, s, v_h })
}

/// Orthonormal basis (as columns, `cols x rank`) of the row space of `a`,
/// i.e. of the column space of `a^H`.
pub fn row_space_basis(a: &CMatrix) -> Result<CMatrix> {
    let dec = svd(a)?;
    let r = dec.rank();
    Ok(dec.v_h.rows(0, r).adjoint())
}

/// Orthonormal basis (columns) of the orthogonal complement of the span of
/// the orthonormal columns `q` in `C^n`.
pub fn orthogonal_complement(q: &CMatrix, n: usize) -> CMatrix {
    let r = q.ncols();
    if r == 0 {
        return identity(n);
    }
    if r >= n {
        return CMatrix::zeros(n, 0);
    }
    let projector = identity(n) - q * q.adjoint();
    let (vals, vecs) = hermitian_eigen(&projector);
    let keep = vals.iter().filter(|&&l| l > 0.5).count();
    vecs.columns(0, keep).into_owned()
}

/// Gram matrix `a * a^H`.
pub fn gram(a: &CMatrix) -> CMatrix {
    a * a.adjoint()
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn inv_hpd(a: &CMatrix) -> Result<CMatrix> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    Ok(chol.inverse())
}

/// Natural log-determinant of a Hermitian positive-definite matrix.
pub fn ln_det_hpd(a: &CMatrix) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    Ok((0..a.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Solves `a x = b` for Hermitian positive-definite `a`.
pub fn solve_hpd(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    Ok(chol.solve(b))
}

/// Vertically stacks row blocks.
pub fn stack_rows<'a>(blocks: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let blocks: Vec<&CMatrix> = blocks.into_iter().collect();
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "row blocks must share the column count");
        out.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Largest absolute entry of `a^H a - I`.
pub fn semi_unitary_defect(a: &CMatrix) -> f64 {
    let g = a.adjoint() * a - identity(a.ncols());
    g.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    svd(a).map(|d| d.s[0]).unwrap_or(f64::NAN)
}
