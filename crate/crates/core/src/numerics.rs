//! Dense Hermitian linear algebra shared by all solvers.

use crate::{CMat, CVec, Error, Result, C64};
use nalgebra::{Cholesky, Dyn};

const HERMITIAN_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const POWER_ITER_CAP: usize = 500;

/// `A = V·diag(Λ)·V^H` with Λ in descending order.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub v: CMat,
    pub lambda: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn reconstruct(&self) -> CMat {
        let mut scaled = self.v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::from(self.lambda[j]);
        }
        &scaled * self.v.adjoint()
    }
}

/// Result of [`largest_eigenvalue`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LargestEigenvalue {
    pub value: f64,
    /// False when the power iteration hit its cap and `value` is the trace bound.
    pub converged: bool,
}

pub fn frob(a: &CMat) -> f64 {
    a.norm()
}

/// `(A + A^H)/2`.
pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::from(0.5)
}

fn check_square(a: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!("expected square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(())
}

pub fn hermitian_defect(a: &CMat) -> f64 {
    (a - a.adjoint()).norm() / a.norm().max(1.0)
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues keep their sign.
pub fn hermitian_eig(a: &CMat) -> Result<EigenDecomposition> {
    check_square(a)?;
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition { v: CMat::zeros(0, 0), lambda: vec![] });
    }
    let eig = hermitize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut v = CMat::zeros(n, n);
    let mut lambda = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &eig.eigenvectors.column(src));
        lambda.push(eig.eigenvalues[src]);
    }
    Ok(EigenDecomposition { v, lambda })
}

/// Eigendecomposition of a PSD matrix: roundoff negatives are clamped to zero,
/// anything below `-1e-10·max(1,‖A‖_F)` is rejected.
pub fn psd_eig(a: &CMat) -> Result<EigenDecomposition> {
    let mut eig = hermitian_eig(a)?;
    let floor = -PSD_TOL * a.norm().max(1.0);
    for l in eig.lambda.iter_mut() {
        if *l < floor {
            return Err(Error::NotPsd(*l));
        }
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    Ok(eig)
}

/// Power-iteration estimate of `λ_max` for a Hermitian PSD matrix.
///
/// The returned value is the Rayleigh quotient plus the residual norm, which
/// sits at or just above `λ_max` once the iteration has locked on. If the
/// iteration does not settle within the cap the trace is returned instead.
pub fn largest_eigenvalue(a: &CMat, tol: f64) -> Result<LargestEigenvalue> {
    check_square(a)?;
    let n = a.nrows();
    let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum::<f64>().max(0.0);
    if n == 0 || trace == 0.0 {
        return Ok(LargestEigenvalue { value: 0.0, converged: true });
    }
    // deterministic start with no special alignment to any axis
    let mut x = CVec::from_fn(n, |i, _| C64::from_polar(1.0, 0.618_033_988_75 * (i as f64 + 1.0) * (i as f64 + 1.0)));
    x /= C64::from(x.norm());
    let mut rho_prev = f64::NAN;
    for _ in 0..POWER_ITER_CAP {
        let y = a * &x;
        let rho = x.dotc(&y).re;
        let resid = (&y - &x * C64::from(rho)).norm();
        let scale = rho.abs().max(1.0);
        if resid <= tol * scale && (rho - rho_prev).abs() <= tol * scale {
            return Ok(LargestEigenvalue { value: (rho + resid).min(trace), converged: true });
        }
        rho_prev = rho;
        let ny = y.norm();
        if ny == 0.0 {
            break;
        }
        x = y / C64::from(ny);
    }
    Ok(LargestEigenvalue { value: trace, converged: false })
}

/// `Σ_n c_n/(Λ_n+γ)²`; infinite when a zero mode carries energy at γ = 0.
pub fn secular(lambda: &[f64], c: &[f64], gamma: f64) -> f64 {
    lambda
        .iter()
        .zip(c)
        .map(|(&l, &cn)| {
            if cn == 0.0 {
                0.0
            } else {
                let d = l + gamma;
                if d <= 0.0 {
                    f64::INFINITY
                } else {
                    cn / (d * d)
                }
            }
        })
        .sum()
}

fn secular_with_slope(lambda: &[f64], c: &[f64], gamma: f64) -> (f64, f64) {
    let mut f = 0.0;
    let mut df = 0.0;
    for (&l, &cn) in lambda.iter().zip(c) {
        if cn == 0.0 {
            continue;
        }
        let d = l + gamma;
        if d <= 0.0 {
            return (f64::INFINITY, f64::NEG_INFINITY);
        }
        let t = cn / (d * d);
        f += t;
        df -= 2.0 * t / d;
    }
    (f, df)
}

/// Root of `secular(γ) = p` on `[0, sqrt(Σc)/sqrt(p)]`.
///
/// Newton steps on `secular^{-1/2}`, which is close to linear in γ, kept
/// inside a bisection bracket. The caller guarantees `secular(0) > p`. The
/// result never induces more power than `p` beyond roundoff.
pub(crate) fn secular_root(lambda: &[f64], c: &[f64], p: f64) -> f64 {
    let total: f64 = c.iter().sum();
    let mut lo = 0.0_f64;
    let mut hi = (total / p).sqrt();
    debug_assert!(secular(lambda, c, hi) <= p * (1.0 + 1e-12));
    let target = p.sqrt().recip();
    let mut gamma = hi;
    for _ in 0..200 {
        let (f, df) = secular_with_slope(lambda, c, gamma);
        if (f - p).abs() <= 1e-13 * p {
            return gamma;
        }
        if f > p {
            lo = lo.max(gamma);
        } else {
            hi = hi.min(gamma);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let g = f.sqrt().recip();
        let dg = -0.5 * df / (f * f.sqrt());
        let next = gamma - (g - target) / dg;
        gamma = if next.is_finite() && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    hi
}

/// Energy of `V^H Q` per eigen-direction.
pub(crate) fn modal_energy(v: &CMat, q: &CMat) -> Vec<f64> {
    let vq = v.adjoint() * q;
    vq.row_iter().map(|r| r.norm_squared()).collect()
}

/// Multiplier γ ≥ 0 with `‖(R+γI)^{-1}Q‖_F² = P` for `R = V·diag(Λ)·V^H`.
pub fn solve_power_multiplier(eig: &EigenDecomposition, q: &CMat, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("power must be positive, got {p}")));
    }
    if q.nrows() != eig.dim() {
        return Err(Error::Shape(format!("Q has {} rows, R is {}x{}", q.nrows(), eig.dim(), eig.dim())));
    }
    let c = modal_energy(&eig.v, q);
    if c.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let lambda: Vec<f64> = eig.lambda.iter().map(|&l| l.max(0.0)).collect();
    if secular(&lambda, &c, 0.0) <= p {
        return Ok(0.0);
    }
    Ok(secular_root(&lambda, &c, p))
}

/// Cholesky factor of a Hermitian positive definite matrix, retrying once with
/// a small diagonal jitter.
pub fn cholesky(a: &CMat, jitter: f64) -> Result<Cholesky<C64, Dyn>> {
    let h = hermitize(a);
    if let Some(c) = Cholesky::new(h.clone()) {
        return Ok(c);
    }
    let n = h.nrows();
    let bumped = h + CMat::identity(n, n) * C64::from(jitter);
    Cholesky::new(bumped).ok_or_else(|| Error::Singular("Cholesky factorisation failed".into()))
}

/// `log det A` for Hermitian positive definite `A`.
pub fn log_det_hpd(a: &CMat, jitter: f64) -> Result<f64> {
    let c = cholesky(a, jitter)?;
    let l = c.l_dirty();
    Ok((0..a.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inverse_hpd(a: &CMat, jitter: f64) -> Result<CMat> {
    Ok(hermitize(&cholesky(a, jitter)?.inverse()))
}

/// Moore-Penrose style solve `R^+ Q` from an eigendecomposition, treating
/// eigenvalues below `rel·Λ_max` as zero. Returns the solution and the energy of
/// `Q` lying in the discarded null space.
pub(crate) fn pinv_solve(eig: &EigenDecomposition, q: &CMat, rel: f64) -> (CMat, f64) {
    let vq = eig.v.adjoint() * q;
    let top = eig.lambda.first().copied().unwrap_or(0.0).max(0.0);
    let cut = rel * top;
    let mut scaled = vq.clone();
    let mut null_energy = 0.0;
    for (n, mut row) in scaled.row_iter_mut().enumerate() {
        let l = eig.lambda[n];
        if l > cut && l > 0.0 {
            row /= C64::from(l);
        } else {
            null_energy += row.norm_squared();
            row.fill(C64::from(0.0));
        }
    }
    (&eig.v * scaled, null_energy)
}

/// `(R+γI)^{-1}Q` through an eigendecomposition of `R`.
pub(crate) fn shifted_solve(eig: &EigenDecomposition, q: &CMat, gamma: f64) -> CMat {
    let mut vq = eig.v.adjoint() * q;
    for (n, mut row) in vq.row_iter_mut().enumerate() {
        let d = eig.lambda[n].max(0.0) + gamma;
        if d > 0.0 {
            row /= C64::from(d);
        } else {
            row.fill(C64::from(0.0));
        }
    }
    &eig.v * vq
}

/// `Re tr(A^H B)`.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Real part of the Hermitian quadratic `x^H A x`.
pub fn quad_form(a: &CMat, x: &CVec) -> f64 {
    x.dotc(&(a * x)).re
}

/// `e^{j·arg(z)}`, with 1 returned for `z = 0`.
pub fn unit_phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::from(1.0)
    } else {
        z / r
    }
}
