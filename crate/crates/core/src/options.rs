//! Solver switches shared by the three problem families.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaUpdate {
    Parallel,
    Serial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WUpdate {
    LineSearch,
    ClosedForm,
}

/// `General` uses the config's constraint list, or splits a total budget
/// evenly over the antennas when the config only gives a total.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerMode {
    Total,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    Rate,
    Sinr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Acceleration {
    Off,
    Squarem,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_outer_iters: usize,
    pub rel_tol: f64,
    pub theta_update: ThetaUpdate,
    pub w_update: WUpdate,
    pub power_model: PowerMode,
    pub objective_kind: ObjectiveKind,
    pub acceleration: Acceleration,
    /// MAA caps for the W and Θ blocks of the max-min solver.
    pub inner_w_cap: usize,
    pub inner_theta_cap: usize,
    /// Relative change of the MAA dual value that ends an inner loop.
    pub inner_tol: f64,
    /// MAA stepsize constant r (γ_t = r/√t).
    pub step_r: f64,
    /// Simplex mass c.
    pub simplex_c: f64,
    /// Start every MAA run from the previous simplex point instead of uniform.
    pub warm_start: bool,
    /// When false only the beamformer block is updated.
    pub update_theta: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_outer_iters: 1000,
            rel_tol: 1e-6,
            theta_update: ThetaUpdate::Parallel,
            w_update: WUpdate::LineSearch,
            power_model: PowerMode::Total,
            objective_kind: ObjectiveKind::Rate,
            acceleration: Acceleration::Off,
            inner_w_cap: 200,
            inner_theta_cap: 200,
            inner_tol: 1e-5,
            step_r: 1.0,
            simplex_c: 1.0,
            warm_start: false,
            update_theta: true,
        }
    }
}

/// `|f_t − f_{t−1}| / max(1, |f_{t−1}|) < tol`.
pub fn converged(prev: f64, cur: f64, tol: f64) -> bool {
    (cur - prev).abs() / prev.abs().max(1.0) < tol
}
