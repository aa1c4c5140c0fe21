//! Minorizers of the rate and SINR terms, and the quadratic-to-linear
//! majorization used on the unit circle.

use crate::numerics::{hermitian_eig, hermitize, inverse_hpd, log_det_hpd};
use crate::{CMat, CVec, Error, Result, C64};

/// `g(x,y) = −a(y+|x|²) + 2Re(b*·x) + c0`, a global minorizer of
/// `log(1+|x|²/y)` over `y > 0` that is tight at its anchor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarMinorizer {
    pub a: f64,
    pub b: C64,
    pub c0: f64,
}

impl ScalarMinorizer {
    pub fn eval(&self, x: C64, y: f64) -> f64 {
        -self.a * (y + x.norm_sqr()) + 2.0 * (self.b.conj() * x).re + self.c0
    }
}

pub fn scalar_rate_minorizer(x: C64, y: f64) -> Result<ScalarMinorizer> {
    if !(y > 0.0) {
        return Err(Error::InvalidArgument(format!("anchor y must be > 0, got {y}")));
    }
    let p = x.norm_sqr();
    let snr = p / y;
    Ok(ScalarMinorizer { a: p / (y * (y + p)), b: x / y, c0: snr.ln_1p() - snr })
}

/// `|z1|²/z2 ≥ 2Re(b*·z1) − a·z2`, tight at the anchor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinrMinorizer {
    pub a: f64,
    pub b: C64,
}

impl SinrMinorizer {
    pub fn eval(&self, z1: C64, z2: f64) -> f64 {
        2.0 * (self.b.conj() * z1).re - self.a * z2
    }
}

pub fn sinr_minorizer(z1: C64, z2: f64) -> Result<SinrMinorizer> {
    if !(z2 > 0.0) {
        return Err(Error::InvalidArgument(format!("anchor z2 must be > 0, got {z2}")));
    }
    Ok(SinrMinorizer { a: z1.norm_sqr() / (z2 * z2), b: z1 / z2 })
}

/// `g(θ) = −2Re(θ^H b) + c0` on the unit-modulus set.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedForm {
    pub b: CVec,
    pub c0: f64,
}

impl LinearizedForm {
    pub fn eval(&self, theta: &CVec) -> f64 {
        -2.0 * theta.dotc(&self.b).re + self.c0
    }
}

/// Majorize `x^H L x` by `λ̂‖x‖² + 2Re(x^H(L−λ̂I)x̲) + x̲^H(λ̂I−L)x̲` and return the
/// resulting minorizer of `−x^H L x` restricted to `‖x‖² = dim`.
pub fn quadratic_to_linear(l: &CMat, shift: f64, anchor: &CVec) -> Result<LinearizedForm> {
    let eig = hermitian_eig(l)?;
    let top = eig.lambda.first().copied().unwrap_or(0.0);
    if shift < top - 1e-8 * l.norm().max(1.0) {
        return Err(Error::InvalidShift { shift, lambda_max: top });
    }
    Ok(linearize_unchecked(l, shift, anchor))
}

pub(crate) fn linearize_unchecked(l: &CMat, shift: f64, anchor: &CVec) -> LinearizedForm {
    let b = l * anchor - anchor * C64::from(shift);
    let n = anchor.len() as f64;
    // −λ̂N − x̲^H(λ̂I−L)x̲ = −λ̂N + x̲^H b
    let c0 = -shift * n + anchor.dotc(&b).re;
    LinearizedForm { b, c0 }
}

/// `−tr(A(Y+XX^H)) + 2Re tr(B X) + c0 ≤ log det(I + X^H Y^{-1} X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMinorizer {
    pub a: CMat,
    pub b: CMat,
    pub c0: f64,
}

impl MatrixMinorizer {
    pub fn eval(&self, x: &CMat, y: &CMat) -> f64 {
        let s = y + x * x.adjoint();
        let tr_as: f64 = (&self.a * s).trace().re;
        -tr_as + 2.0 * (&self.b * x).trace().re + self.c0
    }
}

pub fn matrix_rate_minorizer(x: &CMat, y: &CMat) -> Result<MatrixMinorizer> {
    if y.nrows() != y.ncols() || x.nrows() != y.nrows() {
        return Err(Error::Shape(format!("X is {}x{}, Y is {}x{}", x.nrows(), x.ncols(), y.nrows(), y.ncols())));
    }
    let jitter = 0.0;
    let y_inv = inverse_hpd(y, jitter).map_err(|_| Error::Singular("Y is not positive definite".into()))?;
    let d = x.ncols();
    let e = hermitize(&(CMat::identity(d, d) + x.adjoint() * &y_inv * x));
    let s = y + x * x.adjoint();
    let s_inv = inverse_hpd(&s, jitter)?;
    let b = &e * x.adjoint() * &s_inv;
    let a = hermitize(&(&s_inv * x * &b));
    let logdet_e = log_det_hpd(&e, jitter)?;
    let tr_e: f64 = e.trace().re;
    Ok(MatrixMinorizer { a, b, c0: logdet_e - tr_e + d as f64 })
}

/// `log det(I + X^H Y^{-1} X)` via `log det(Y+XX^H) − log det Y`.
pub fn log_det_rate(x: &CMat, y: &CMat) -> Result<f64> {
    let s = y + x * x.adjoint();
    Ok(log_det_hpd(&s, 0.0)? - log_det_hpd(y, 0.0)?)
}
