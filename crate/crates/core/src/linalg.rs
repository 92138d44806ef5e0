//! Small dense helpers on top of faer.

use faer::Mat;
use num_complex::Complex64;

use crate::{CMat, Error, Result};

/// Thin SVD `m = U diag(s) Vᴴ`, singular values in descending order.
pub struct ThinSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn thin_svd(m: &CMat) -> Result<ThinSvd> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(ThinSvd {
            u: Mat::zeros(m.nrows(), 0),
            s: Vec::new(),
            v: Mat::zeros(m.ncols(), 0),
        });
    }
    if !is_finite(m) {
        return Err(Error::Numerical("SVD input has non-finite entries".into()));
    }
    let svd = m
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok(ThinSvd {
        u: svd.U().to_owned(),
        s,
        v: svd.V().to_owned(),
    })
}

pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    if !is_finite(m) {
        return Err(Error::Numerical("SVD input has non-finite entries".into()));
    }
    m.singular_values()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))
}

pub fn is_finite(m: &CMat) -> bool {
    (0..m.ncols())
        .all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc
}

pub fn frobenius(m: &CMat) -> f64 {
    frobenius_sq(m).sqrt()
}

pub fn frobenius_dist(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Largest absolute real or imaginary part over all entries.
pub fn max_component(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            best = best.max(z.re.abs()).max(z.im.abs());
        }
    }
    best
}

pub fn real_part(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        Complex64::new(m[(i, j)].re, 0.0)
    })
}

pub fn imag_part(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        Complex64::new(m[(i, j)].im, 0.0)
    })
}

pub fn from_real(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> CMat {
    Mat::from_fn(rows, cols, |i, j| Complex64::new(f(i, j), 0.0))
}
