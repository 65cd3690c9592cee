//! Post-impact trajectory restoration for a single-track Ackermann vehicle.
//!
//! A lateral collision is represented by its aftermath: the vehicle starts at
//! t = 0 with a lateral velocity and/or yaw rate. Open-loop steering and
//! tractive-force pulses ([`control`]) then try to bring it back onto the
//! straight path `Y = 0`. [`sim`] integrates either plant in [`dynamics`]
//! and [`scenario`] scores the outcome. [`tuner`] searches for pulse
//! parameters that restore the trajectory.

pub mod control;
pub mod dynamics;
pub mod error;
pub mod scenario;
pub mod sim;
pub mod tuner;

pub use control::{
    cruise_force, steering, tractive_force, window, Controls, ForceParams, SteeringParams,
};
pub use dynamics::{
    lateral_subsystem_matrix, rhs_generalized, rhs_reference, ControlInput, Model, StateDerivative,
    VehicleParams, VehicleState, VX_FLOOR,
};
pub use error::{Error, Result};
pub use scenario::{
    case1, case2, compute_metrics, CaseId, RecoveryMetrics, ScenarioSpec, Thresholds,
};
pub use sim::{simulate, step_rk4, Sample, SimConfig, SimFailure, Trace};
pub use tuner::{
    evaluate, objective, tune, ControlParam, ErrorNorm, Evaluation, FreeParam, TuneResult,
    TuneSpec, Weights,
};
