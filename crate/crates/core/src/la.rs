//! Small dense linear-algebra helpers on top of ndarray-linalg.
//!
//! Everything here is desk-scale (n ≤ a few hundred) and complex; real
//! matrices are promoted where convenient. Matrix functions are computed by
//! diagonalization with an explicit residual/conditioning check rather than
//! by trusting the method, so callers get certificates, not promises.

use crate::error::{Error, Result};
use ndarray::prelude::*;
use ndarray_linalg::{Eig, Eigh, Factorize, Norm, Solve, SVD, UPLO};
use num_complex::Complex64 as c64;

pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// OpenBLAS worker threads overflow their stacks in constrained sandboxes,
/// and the crate parallelizes at the operation level anyway, so BLAS runs
/// single-threaded unless OPENBLAS_NUM_THREADS is set explicitly.
pub(crate) fn ensure_serial_blas() {
    use std::sync::Once;
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
            extern "C" {
                fn openblas_set_num_threads(num: i32);
            }
            unsafe { openblas_set_num_threads(1) };
        }
    });
}

/// Hermitian eigendecomposition with A = V diag(λ) V*. The backend returns
/// conjugated eigenvectors for row-major complex input; this wrapper fixes
/// the convention so callers can rely on the reconstruction identity.
pub fn eigh_herm(a: &Array2<c64>) -> Result<(Array1<f64>, Array2<c64>)> {
    ensure_serial_blas();
    let std_a = if a.is_standard_layout() {
        a.clone()
    } else {
        a.as_standard_layout().to_owned()
    };
    let (ev, v) = std_a.eigh(UPLO::Lower)?;
    Ok((ev, v.mapv(|z| z.conj())))
}

pub fn eye(n: usize) -> Array2<c64> {
    Array2::eye(n)
}

/// Conjugate transpose.
pub fn adj(a: &Array2<c64>) -> Array2<c64> {
    a.t().mapv(|z| z.conj())
}

pub fn frob(a: &Array2<c64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm via singular values.
pub fn norm2(a: &Array2<c64>) -> f64 {
    ensure_serial_blas();
    match a.svd(false, false) {
        Ok((_, s, _)) => s.iter().cloned().fold(0.0, f64::max),
        Err(_) => frob(a),
    }
}

pub fn to_complex(a: &Array2<f64>) -> Array2<c64> {
    a.mapv(|x| c64::new(x, 0.0))
}

/// Solve A X = B for matrix right-hand side with one LU factorization.
pub fn solve_mat(a: &Array2<c64>, b: &Array2<c64>) -> Result<Array2<c64>> {
    ensure_serial_blas();
    let f = a.factorize()?;
    let mut x = Array2::<c64>::zeros(b.raw_dim());
    for (j, col) in b.columns().into_iter().enumerate() {
        let xj = f.solve(&col.to_owned())?;
        x.column_mut(j).assign(&xj);
    }
    Ok(x)
}

/// Solve X A = B, i.e. X = B A^{-1}.
pub fn solve_mat_right(a: &Array2<c64>, b: &Array2<c64>) -> Result<Array2<c64>> {
    let xt = solve_mat(&a.t().to_owned(), &b.t().to_owned())?;
    Ok(xt.t().to_owned())
}

pub fn inv(a: &Array2<c64>) -> Result<Array2<c64>> {
    solve_mat(a, &eye(a.nrows()))
}

/// Eigenvalues of a general complex matrix.
pub fn eigvals(a: &Array2<c64>) -> Result<Array1<c64>> {
    ensure_serial_blas();
    let (ev, _) = a.eig()?;
    Ok(ev)
}

/// Eigenvalues of a general real matrix.
pub fn eigvals_real(a: &Array2<f64>) -> Result<Array1<c64>> {
    ensure_serial_blas();
    let (ev, _) = a.eig()?;
    Ok(ev)
}

/// Hermitian part (A + A*)/2.
pub fn hermitianize(a: &Array2<c64>) -> Array2<c64> {
    (a + &adj(a)).mapv(|z| 0.5 * z)
}

/// Factor a Hermitian PSD block as F F* = H via eigendecomposition.
///
/// Eigenvalues in [−tol, 0) are clamped to zero; anything below −tol is a
/// data-infeasibility error, not noise (tol = 1e-12·‖H‖ by the clamping
/// policy used throughout the weights module).
pub fn psd_factor(h: &Array2<c64>, context: &str) -> Result<Array2<c64>> {
    let hh = hermitianize(h);
    let (ev, vecs) = eigh_herm(&hh)?;
    let scale = ev.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-300);
    let tol = 1e-12 * scale;
    let mut sq = Array1::<c64>::zeros(ev.len());
    for (i, &lam) in ev.iter().enumerate() {
        if lam < -tol {
            return Err(Error::Infeasible {
                variant: context.to_string(),
                detail: format!("block eigenvalue {lam:.3e} below -{tol:.3e}"),
            });
        }
        sq[i] = c64::new(lam.max(0.0).sqrt(), 0.0);
    }
    // F = U diag(sqrt(λ)) U*, the Hermitian PSD square root.
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|z| z * sq[j]);
    }
    Ok(scaled.dot(&adj(&vecs)))
}

/// Principal square root of a general (small) complex matrix.
///
/// Diagonalization when the eigenvector basis is well conditioned, with a
/// Denman–Beavers iteration as fallback; the result carries a residual
/// check ‖X²−A‖ ≤ 1e-8·max(1,‖A‖).
pub fn principal_sqrt(a: &Array2<c64>) -> Result<Array2<c64>> {
    let n = a.nrows();
    if n == 1 {
        return Ok(array![[a[[0, 0]].sqrt()]]);
    }
    ensure_serial_blas();
    let try_eig = (|| -> Result<Array2<c64>> {
        let (ev, vecs) = a.eig()?;
        let vinv = inv(&vecs)?;
        let cond = norm2(&vecs) * norm2(&vinv);
        if cond > 1e8 {
            return Err(Error::Solver("ill-conditioned eigenbasis".into()));
        }
        let mut scaled = vecs.clone();
        for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * ev[j].sqrt());
        }
        Ok(scaled.dot(&vinv))
    })();
    let x = match try_eig {
        Ok(x) if sqrt_residual(&x, a) <= 1e-8 => return Ok(x),
        _ => denman_beavers(a)?,
    };
    if sqrt_residual(&x, a) <= 1e-8 {
        Ok(x)
    } else {
        Err(Error::Solver(format!(
            "matrix square root residual {:.3e} too large",
            sqrt_residual(&x, a)
        )))
    }
}

fn sqrt_residual(x: &Array2<c64>, a: &Array2<c64>) -> f64 {
    frob(&(x.dot(x) - a)) / frob(a).max(1.0)
}

fn denman_beavers(a: &Array2<c64>) -> Result<Array2<c64>> {
    let mut y = a.clone();
    let mut z = eye(a.nrows());
    for _ in 0..60 {
        let yi = inv(&y)?;
        let zi = inv(&z)?;
        let y_next = (&y + &zi).mapv(|v| 0.5 * v);
        let z_next = (&z + &yi).mapv(|v| 0.5 * v);
        let delta = frob(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if delta <= 1e-14 * frob(&y).max(1.0) {
            break;
        }
    }
    Ok(y)
}

/// Columns of `b` scaled by the entries of `d` (b · diag(d)).
pub fn scale_cols(b: &Array2<c64>, d: &[c64]) -> Array2<c64> {
    let mut out = b.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|z| z * d[j]);
    }
    out
}

/// Rows of `b` scaled by the entries of `d` (diag(d) · b).
pub fn scale_rows(b: &Array2<c64>, d: &[c64]) -> Array2<c64> {
    let mut out = b.clone();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|z| z * d[i]);
    }
    out
}

/// Relative Frobenius distance, with a guard for zero reference.
pub fn rel_err(x: &Array2<c64>, reference: &Array2<c64>) -> f64 {
    let denom = frob(reference);
    if denom == 0.0 {
        frob(x)
    } else {
        frob(&(x - reference)) / denom
    }
}

/// ‖·‖₂ condition proxy used in diagnostics (σ_max / σ_min).
pub fn cond2(a: &Array2<c64>) -> Result<f64> {
    ensure_serial_blas();
    let (_, s, _) = a.svd(false, false)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

pub fn l2(v: &Array1<c64>) -> f64 {
    v.norm_l2()
}
