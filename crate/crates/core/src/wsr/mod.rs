//! Weighted sum-rate maximization for RIS-aided multi-user MISO, including the
//! closed-form W step, general power constraints, serial and discrete phase
//! updates, general reflection topologies and the sum-SINR objective.

mod beamformer;
mod objective;
mod solver;
mod theta;

pub use beamformer::{build_w_quadratic, solve_w_closed_form, solve_w_general_power, solve_w_total_power, WQuadratic};
pub use objective::{compute_wsr_coeffs, sum_sinr_objective, surrogate_value, weighted_value, wsr_objective, UserStats, WsrCoeffs};
pub use solver::{default_init, run_wsr_bmm, WsrMap};
pub use theta::{
    build_theta_linear, nearest_phase, serial_sweep, solve_theta_discrete, solve_theta_unimodulus, theta_model, update_theta_serial,
    update_theta_serial_model, ThetaModel,
};

pub(crate) use beamformer::solve_quadratic;
pub(crate) use theta::{accumulate_user, solve_phase, user_pieces};
