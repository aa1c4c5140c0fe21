//! Transmit power constraints on a beamformer.

use crate::numerics::re_inner;
use crate::{CMat, C64};

/// `tr(Ω W W^H) ≤ budget` with `Ω` Hermitian PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerConstraint {
    pub omega: CMat,
    pub budget: f64,
}

impl PowerConstraint {
    pub fn value(&self, w: &CMat) -> f64 {
        re_inner(w, &(&self.omega * w))
    }
}

/// Constraint set seen by a beamformer subproblem.
#[derive(Clone, Debug, PartialEq)]
pub enum PowerBudget {
    Total(f64),
    General(Vec<PowerConstraint>),
}

/// One constraint per antenna, each with `total / m`.
pub fn per_antenna(m: usize, total: f64) -> Vec<PowerConstraint> {
    (0..m)
        .map(|i| {
            let mut omega = CMat::zeros(m, m);
            omega[(i, i)] = C64::from(1.0);
            PowerConstraint { omega, budget: total / m as f64 }
        })
        .collect()
}

impl PowerBudget {
    /// Largest `value/budget` over constraints.
    pub fn load(&self, w: &CMat) -> f64 {
        match self {
            PowerBudget::Total(p) => w.norm_squared() / p,
            PowerBudget::General(cs) => cs.iter().map(|c| c.value(w) / c.budget).fold(0.0, f64::max),
        }
    }

    pub fn is_feasible(&self, w: &CMat, rel_tol: f64) -> bool {
        self.load(w) <= 1.0 + rel_tol
    }

    /// Scale `w` down onto the feasible set if it lies outside.
    pub fn project(&self, w: &CMat) -> CMat {
        let load = self.load(w);
        if load > 1.0 {
            w * C64::from(1.0 / load.sqrt())
        } else {
            w.clone()
        }
    }

    /// Equivalent single-budget view, when one exists.
    pub fn as_total(&self) -> Option<f64> {
        match self {
            PowerBudget::Total(p) => Some(*p),
            PowerBudget::General(_) => None,
        }
    }

    pub fn constraints(&self, m: usize) -> Vec<PowerConstraint> {
        match self {
            PowerBudget::Total(p) => vec![PowerConstraint { omega: CMat::identity(m, m), budget: *p }],
            PowerBudget::General(cs) => cs.clone(),
        }
    }
}
