//! Steady states, stability certificates, the linearization at the origin,
//! Lyapunov functions and the droop identities.

mod certificate;
mod droop;
mod lyapunov;
mod origin;
mod steady;

pub use certificate::{
    alpha_star_per_node, check_assumption1, compute_alpha_star, compute_condition1, d1_block, d2_block,
    projected_xi1, Assumption1, StabilityReport, DEFAULT_TAU_STAR,
};
pub use droop::{droop_quantities, verify_droop_identity, DroopResiduals, DroopSample, NodeResiduals};
pub use lyapunov::{dist_to_su, lyapunov_values, LyapunovValues};
pub use origin::{directional_linearization, jacobian_at_origin, OriginLinearization};
pub use steady::solve_steady_state;
