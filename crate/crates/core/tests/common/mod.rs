#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_bmm::{CMat, CVec, C64};
use std::f64::consts::TAU;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x7e57_0000_0000)
}

pub fn gauss<R: Rng>(rng: &mut R) -> C64 {
    // Box-Muller, unit variance per complex entry
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    let r = (-u1.ln()).sqrt();
    C64::from_polar(r, TAU * u2)
}

pub fn cmat<R: Rng>(rng: &mut R, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| gauss(rng))
}

pub fn cvec<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| gauss(rng))
}

pub fn phases<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C64::from_polar(1.0, TAU * rng.random::<f64>()))
}

pub fn hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let b = cmat(rng, n, n);
    (&b + b.adjoint()) * C64::from(0.5)
}

/// `B B^H + shift·I`.
pub fn hpd<R: Rng>(rng: &mut R, n: usize, shift: f64) -> CMat {
    let b = cmat(rng, n, n);
    &b * b.adjoint() + CMat::identity(n, n) * C64::from(shift)
}

/// Eigenvalues by cyclic Jacobi on the real 2n×2n embedding of a Hermitian
/// matrix; each eigenvalue appears twice there, the duplicates are dropped.
pub fn jacobi_eigenvalues(a: &CMat) -> Vec<f64> {
    let n = a.nrows();
    let m = 2 * n;
    let mut s = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            s[i][j] = z.re;
            s[i + n][j + n] = z.re;
            s[i][j + n] = -z.im;
            s[i + n][j] = z.im;
        }
    }
    for _ in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| s[i][j].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if s[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let skp = s[k][p];
                    let skq = s[k][q];
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for k in 0..m {
                    let spk = s[p][k];
                    let sqk = s[q][k];
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| s[i][i]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.into_iter().step_by(2).collect()
}

/// `log det` of a Hermitian positive definite matrix by LU determinant.
pub fn logdet_lu(a: &CMat) -> f64 {
    a.clone().determinant().re.ln()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Minimise `tr(W^H R W) − 2Re tr(W^H Q)` over a convex set by projected
/// gradient with Nesterov momentum, stopping when an iterate moves less than
/// `tol`. `project` maps onto the set.
pub fn projected_gradient(r: &CMat, q: &CMat, project: impl Fn(&CMat) -> CMat, tol: f64) -> CMat {
    let ev = jacobi_eigenvalues(r);
    let lip = 2.0 * ev[0].max(1e-12);
    let step = 1.0 / lip;
    let mut x = project(&CMat::zeros(q.nrows(), q.ncols()));
    let mut y = x.clone();
    let mut t = 1.0_f64;
    for _ in 0..2_000_000 {
        let grad = (r * &y - q) * C64::from(2.0);
        let next = project(&(&y - grad * C64::from(step)));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved = (&next - &x).norm();
        y = &next + (&next - &x) * C64::from((t - 1.0) / t_next);
        // restart momentum when the objective goes up
        if quad_value(r, q, &next) > quad_value(r, q, &x) {
            t = 1.0;
            y = next.clone();
        } else {
            t = t_next;
        }
        x = next;
        if moved < tol {
            break;
        }
    }
    x
}

pub fn quad_value(r: &CMat, q: &CMat, w: &CMat) -> f64 {
    (w.adjoint() * r * w).trace().re - 2.0 * (w.adjoint() * q).trace().re
}

pub fn ball(p: f64) -> impl Fn(&CMat) -> CMat {
    move |w: &CMat| {
        let n2 = w.norm_squared();
        if n2 <= p {
            w.clone()
        } else {
            w * C64::from((p / n2).sqrt())
        }
    }
}

/// Row-wise ball projection: row j of W onto `‖w_j‖² ≤ p_j`.
pub fn row_balls(p: Vec<f64>) -> impl Fn(&CMat) -> CMat {
    move |w: &CMat| {
        let mut out = w.clone();
        for (j, &pj) in p.iter().enumerate() {
            let n2 = out.row(j).norm_squared();
            if n2 > pj {
                let s = C64::from((pj / n2).sqrt());
                for c in 0..out.ncols() {
                    out[(j, c)] *= s;
                }
            }
        }
        out
    }
}
