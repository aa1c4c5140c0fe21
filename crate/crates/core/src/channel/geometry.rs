use super::config::Point3;
use crate::{CVec, Error, Result, C64};
use std::f64::consts::PI;

/// Gain at the 1 m reference distance (−30 dB).
pub const T0: f64 = 1e-3;
/// Reference distance in metres.
pub const D0: f64 = 1.0;

/// `T0·(d/d0)^{−ρ}`.
pub fn path_loss(d: f64, rho: f64) -> Result<f64> {
    if !(d >= D0) {
        return Err(Error::BelowReferenceDistance(d));
    }
    Ok(T0 * (d / D0).powf(-rho))
}

/// Entry m is `exp(j·2π·spacing·m·sinθ)`.
pub fn steering_ula(n: usize, spacing: f64, sin_theta: f64) -> CVec {
    CVec::from_fn(n, |m, _| C64::from_polar(1.0, 2.0 * PI * spacing * m as f64 * sin_theta))
}

/// Planar array in the y–z plane: `ula(nx, cos(el)·sin(az)) ⊗ ula(ny, sin(el))`.
pub fn steering_upa(nx: usize, ny: usize, spacing: f64, az: f64, el: f64) -> CVec {
    let a = steering_ula(nx, spacing, el.cos() * az.sin());
    let b = steering_ula(ny, spacing, el.sin());
    a.kronecker(&b)
}

/// Grid used for an `n`-element RIS: square when possible, otherwise
/// `⌈√n⌉` rows with the trailing entries dropped.
pub fn upa_grid(n: usize) -> (usize, usize) {
    let r = (n as f64).sqrt().round() as usize;
    if r * r == n {
        return (r, r);
    }
    let nx = (n as f64).sqrt().ceil() as usize;
    (nx, n.div_ceil(nx))
}

pub fn ris_response(n: usize, spacing: f64, az: f64, el: f64) -> CVec {
    let (nx, ny) = upa_grid(n);
    let full = steering_upa(nx, ny, spacing, az, el);
    full.rows(0, n).into_owned()
}

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// (azimuth, elevation) of `to` seen from `from`.
pub fn angles(from: &Point3, to: &Point3) -> (f64, f64) {
    let d = distance(from, to);
    let u = [(to[0] - from[0]) / d, (to[1] - from[1]) / d, (to[2] - from[2]) / d];
    (u[1].atan2(u[0]), u[2].clamp(-1.0, 1.0).asin())
}

/// Linear array along the y axis pointed at `to`.
pub fn ula_towards(n: usize, spacing: f64, from: &Point3, to: &Point3) -> CVec {
    let (az, el) = angles(from, to);
    steering_ula(n, spacing, el.cos() * az.sin())
}

pub fn upa_towards(n: usize, spacing: f64, from: &Point3, to: &Point3) -> CVec {
    let (az, el) = angles(from, to);
    ris_response(n, spacing, az, el)
}
