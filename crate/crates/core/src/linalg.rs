//! Dense complex linear algebra helpers shared by every module.
//!
//! Everything here works on `DMatrix<Complex64>`. Hermitian problems go
//! through nalgebra's symmetric eigensolver; the general (non-normal)
//! eigenproblem is delegated to faer.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{KreinError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a complex matrix from real row-major rows.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let cols = if r == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn real_diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(KreinError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_dim(m: &CMat, dim: usize) -> Result<()> {
    let n = ensure_square(m)?;
    if n != dim {
        return Err(KreinError::DimensionMismatch {
            expected: dim,
            found: n,
        });
    }
    Ok(())
}

/// Thin singular value decomposition `m = U diag(s) V*`, values descending.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

/// Goes through faer: nalgebra's complex SVD loses digits on some
/// rank-deficient inputs.
pub fn svd(m: &CMat) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: CMat::zeros(rows, 0),
            s: Vec::new(),
            v: CMat::zeros(cols, 0),
        };
    }
    let fm = Mat::<Complex64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let dec = fm.thin_svd().expect("SVD did not converge");
    let values = dec.S().column_vector();
    let (fu, fv) = (dec.U(), dec.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re));
    Svd {
        u: CMat::from_fn(rows, k, |i, j| fu[(i, order[j])]),
        s: order.iter().map(|&j| values[j].re).collect(),
        v: CMat::from_fn(cols, k, |i, j| fv[(i, order[j])]),
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    svd(m).s
}

/// Spectral norm (largest singular value); zero for empty matrices.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.norm()
}

/// 2-norm condition number; infinite for singular input.
pub fn cond(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `‖M − M*‖`.
pub fn hermitian_residual(m: &CMat) -> f64 {
    op_norm(&(m - m.adjoint()))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
/// Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Applies a real function to a Hermitian matrix through its eigendecomposition.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = hermitian_eigen(m);
    from_eigen(&values.iter().map(|&x| f(x)).collect::<Vec<_>>(), &vectors)
}

/// `V diag(values) V*`.
pub fn from_eigen(values: &[f64], vectors: &CMat) -> CMat {
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    &scaled * vectors.adjoint()
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    ensure_square(m)?;
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    m.clone().try_inverse().ok_or(KreinError::Singular)
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if ensure_square(a)? == 0 {
        return Ok(CMat::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b).ok_or(KreinError::Singular)
}

/// Orthonormal basis of the column space, keeping directions whose singular
/// value exceeds `rel_tol` times the largest one.
pub fn orthonormal_range(m: &CMat, rel_tol: f64) -> CMat {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return CMat::zeros(rows, 0);
    }
    let (u, s) = left_singular(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return CMat::zeros(rows, 0);
    }
    let rank = s.iter().take_while(|&&x| x > rel_tol * top).count();
    u.columns(0, rank).into_owned()
}

/// The leading `rank` left singular vectors.
pub fn orthonormal_range_of_rank(m: &CMat, rank: usize) -> CMat {
    if rank == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let (u, _) = left_singular(m);
    u.columns(0, rank.min(u.ncols())).into_owned()
}

fn left_singular(m: &CMat) -> (CMat, Vec<f64>) {
    let Svd { u, s, .. } = svd(m);
    (u, s)
}

/// Orthonormal basis of the Hilbert-orthogonal complement of the span of an
/// orthonormal set.
pub fn orthogonal_complement(onb: &CMat) -> CMat {
    let n = onb.nrows();
    let k = onb.ncols();
    if k == 0 {
        return identity(n);
    }
    if k >= n {
        return CMat::zeros(n, 0);
    }
    let residual = identity(n) - onb * onb.adjoint();
    let (_, vectors) = hermitian_eigen(&residual);
    vectors.columns(k, n - k).into_owned()
}

/// Orthonormal basis of `{x : A x = 0}`.
pub fn null_space(a: &CMat, rel_tol: f64) -> CMat {
    let row_space = orthonormal_range(&a.adjoint(), rel_tol);
    orthogonal_complement(&row_space)
}

/// Orthogonal projector onto the span of an orthonormal set.
pub fn projector(onb: &CMat) -> CMat {
    onb * onb.adjoint()
}

/// Eigenpairs of a general complex matrix. Eigenvectors come back with unit
/// Hilbert norm.
pub fn general_eigen(m: &CMat) -> Result<(Vec<Complex64>, CMat)> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let fm = Mat::<Complex64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = fm
        .eigen()
        .map_err(|e| KreinError::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
    let mut vectors = CMat::from_fn(n, n, |i, j| u[(i, j)]);
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    Ok((values, vectors))
}

pub fn general_eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let fm = Mat::<Complex64>::from_fn(n, n, |i, j| m[(i, j)]);
    fm.eigenvalues()
        .map_err(|e| KreinError::Numerical(format!("eigenvalue computation failed: {e:?}")))
}

/// Smallest singular value over largest; zero for rank-deficient input.
pub fn column_rank_ratio(basis: &CMat) -> f64 {
    let s = singular_values(basis);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        (Some(_), _) => 0.0,
        _ => 1.0,
    }
}

/// Basis of the column span in reduced column-echelon form. The result
/// depends only on the span, not on the basis that was supplied.
pub fn column_echelon(basis: &CMat, tol: f64) -> CMat {
    let mut rows = basis.transpose();
    let (k, n) = rows.shape();
    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row == k {
            break;
        }
        let (best, mag) = (pivot_row..k)
            .map(|r| (r, rows[(r, col)].norm()))
            .fold((pivot_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= tol {
            continue;
        }
        rows.swap_rows(pivot_row, best);
        let p = rows[(pivot_row, col)];
        for j in 0..n {
            rows[(pivot_row, j)] /= p;
        }
        for r in 0..k {
            if r != pivot_row {
                let factor = rows[(r, col)];
                if factor != c(0.0, 0.0) {
                    for j in 0..n {
                        let v = rows[(pivot_row, j)];
                        rows[(r, j)] -= factor * v;
                    }
                }
            }
        }
        pivot_row += 1;
    }
    rows.rows(0, pivot_row).transpose()
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(scale * re, scale * im)
    })
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    let m = random_gaussian(rng, n, 1);
    m.column(0).into_owned()
}

/// Haar-ish random unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let g = random_gaussian(rng, n, n);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm > 0.0 {
            let phase = d / norm;
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}
