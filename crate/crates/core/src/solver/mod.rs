//! Mild-formulation Picard solver for the nonlinear Fokker-Planck equation
//! `∂_t v = ½Δv − div(F̃(v) b)` on the torus, together with the analytic
//! bounds used to check it.

mod gronwall;
mod mild;
mod mittag_leffler;
mod nonlinearity;
mod params;
mod picard;
mod stability;
mod weak;

pub use gronwall::{gronwall_oracle, singular_weights, solve_volterra, GronwallVerdict, QUADRATURE_TOLERANCE};
pub use mild::{flux, heat_flow, mild_map_i, mild_map_j, mild_map_kernel_sum, Trajectory};
pub use mittag_leffler::{mittag_leffler, MAX_ARGUMENT};
pub use nonlinearity::{Nonlinearity, NonlinearityBounds};
pub use params::{
    apriori_bound, check_regularity, pick_contraction_params, ContractionParams, SolverParams, WorkingConstant,
};
pub use picard::{solve_picard, solve_picard_from, weighted_distance, SolverResult};
pub use stability::{stability_in_b, StabilityReport};
pub use weak::{first_test_modes, weak_residual, TestMode, WeakResidualRow};
