//! Dense matrix functions: scaling-and-squaring exponential and
//! diagonalization-based analytic functions, both certificate-checked by
//! their callers through functional identities rather than method internals.

use crate::error::{Error, Result};
use crate::la;
use ndarray::prelude::*;
use ndarray_linalg::{Eig, OperationNorm};
use num_complex::Complex64 as c64;

/// Matrix exponential by Padé-13 with scaling and squaring.
pub fn expm(a: &Array2<c64>) -> Result<Array2<c64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension("expm: matrix must be square".into()));
    }
    // theta_13 from the standard backward-error analysis of the [13/13] approximant
    const THETA_13: f64 = 5.371920351148152;
    la::ensure_serial_blas();
    let norm1 = a.opnorm_one().unwrap_or_else(|_| la::frob(a));
    let s = if norm1 > THETA_13 {
        ((norm1 / THETA_13).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let scaled = a.mapv(|z| z / c64::new(2f64.powi(s), 0.0));
    let mut x = pade13(&scaled)?;
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

fn pade13(a: &Array2<c64>) -> Result<Array2<c64>> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let ident = la::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = {
        let mut t = a6.mapv(|z| z * B[13]);
        t = t + &a4.mapv(|z| z * B[11]);
        t = t + &a2.mapv(|z| z * B[9]);
        let mut rest = a6.mapv(|z| z * B[7]);
        rest = rest + &a4.mapv(|z| z * B[5]);
        rest = rest + &a2.mapv(|z| z * B[3]);
        rest = rest + &ident.mapv(|z| z * B[1]);
        a6.dot(&t) + rest
    };
    let u = a.dot(&u_inner);
    let v = {
        let mut t = a6.mapv(|z| z * B[12]);
        t = t + &a4.mapv(|z| z * B[10]);
        t = t + &a2.mapv(|z| z * B[8]);
        let mut rest = a6.mapv(|z| z * B[6]);
        rest = rest + &a4.mapv(|z| z * B[4]);
        rest = rest + &a2.mapv(|z| z * B[2]);
        rest = rest + &ident.mapv(|z| z * B[0]);
        a6.dot(&t) + rest
    };
    // (V - U)^{-1} (V + U)
    la::solve_mat(&(&v - &u), &(&v + &u))
}

/// f(A) by diagonalization A = VΛV^{-1}: V f(Λ) V^{-1}. Errors when the
/// eigenbasis is too ill-conditioned to certify the reconstruction.
pub fn funm_eig<F>(a: &Array2<c64>, f: F) -> Result<Array2<c64>>
where
    F: Fn(c64) -> c64,
{
    crate::la::ensure_serial_blas();
    let (ev, vecs) = a.eig()?;
    let vinv = la::inv(&vecs)?;
    // reconstruction check certifies the basis
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|z| z * ev[j]);
    }
    let recon = scaled.dot(&vinv);
    let rel = la::rel_err(&recon, a);
    if rel > 1e-9 {
        return Err(Error::Solver(format!(
            "funm: eigendecomposition reconstruction error {rel:.3e}"
        )));
    }
    let mut fscaled = vecs.clone();
    for (j, mut col) in fscaled.columns_mut().into_iter().enumerate() {
        let fj = f(ev[j]);
        col.mapv_inplace(|z| z * fj);
    }
    Ok(fscaled.dot(&vinv))
}
