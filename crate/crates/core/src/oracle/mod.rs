//! Brute-force repeated-interaction simulation on a truncated Fock space.
//!
//! Nothing here uses the coarse-grained rate formulas: each collision is the
//! exact dwell propagator acting on `ρ_cav ⊗ ρ_pair`, the bath acts between
//! collisions, and the steady photon number is read off a long run.

mod bath;
mod collision;
mod fock;
mod run;

pub use bath::{bath_step, BathGenerator, BathStep};
pub use collision::{
    build_pair_state, collide, CollideDiagnostics, CollisionChannel, CollisionUnitary, DwellParams, PairState,
    LEAKAGE_LIMIT, PAIR_BASIS,
};
pub use fock::{FockDist, NEGATIVE_CLIP, TAIL_LIMIT};
pub use run::{
    analytic_reference, default_n_max, run_to_steady, stationary_distribution, Arrival, OracleConfig, OracleOutcome,
    RunDiagnostics, TrajectoryPoint,
};
