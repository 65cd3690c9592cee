//! Planar single-track vehicle dynamics.
//!
//! Two right-hand sides share one state layout: the generalized Ackermann
//! model, which keeps the steering-coupled rolling-friction terms, and a
//! classical linear-tire single-track model used as the reference plant.
//! Both propagate the global pose from the body-frame velocities.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{ensure, Error, Result};

/// Lowest longitudinal speed at which the `vy/vx` and `wz/vx` terms are evaluated.
pub const VX_FLOOR: f64 = 0.5;

/// Physical constants of the plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// kg m^2
    pub yaw_inertia: f64,
    /// C.G. to front axle, m
    pub dist_front: f64,
    /// C.G. to rear axle, m
    pub dist_rear: f64,
    /// Front cornering stiffness per tire, N/rad
    pub cornering_front: f64,
    /// Rear cornering stiffness per tire, N/rad
    pub cornering_rear: f64,
    /// Rolling-friction constant
    pub mu0: f64,
    /// Speed-dependent friction coefficient, s^2/m^2
    pub mu1: f64,
    /// m/s^2
    pub gravity: f64,
    /// Lumped aerodynamic drag `rho * Cd * A / 2`, N s^2/m^2
    pub drag_lumped: f64,
}

impl VehicleParams {
    /// Default C.G. to front axle distance, m. Configs must still state it.
    pub const DEFAULT_DIST_FRONT: f64 = 1.2;
    /// Default C.G. to rear axle distance, m.
    pub const DEFAULT_DIST_REAR: f64 = 1.6;

    /// Mid-size passenger car used in both collision cases.
    pub fn passenger_car() -> Self {
        Self {
            mass: 1750.0,
            yaw_inertia: 2350.0,
            dist_front: Self::DEFAULT_DIST_FRONT,
            dist_rear: Self::DEFAULT_DIST_REAR,
            cornering_front: 12.0e4,
            cornering_rear: 12.0e4,
            mu0: 0.015,
            mu1: 7.0e-6,
            gravity: 9.8,
            drag_lumped: 0.98,
        }
    }

    pub fn validate(&self) -> Result<()> {
        const W: &str = "vehicle parameters";
        ensure(self.mass > 0.0, W, "mass > 0")?;
        ensure(self.yaw_inertia > 0.0, W, "yaw_inertia > 0")?;
        ensure(self.dist_front > 0.0, W, "dist_front > 0")?;
        ensure(self.dist_rear > 0.0, W, "dist_rear > 0")?;
        ensure(self.cornering_front > 0.0, W, "cornering_front > 0")?;
        ensure(self.cornering_rear > 0.0, W, "cornering_rear > 0")?;
        ensure(self.drag_lumped >= 0.0, W, "drag_lumped >= 0")?;
        ensure(self.mu0 >= 0.0, W, "mu0 >= 0")?;
        ensure(self.mu1 >= 0.0, W, "mu1 >= 0")?;
        ensure(self.gravity > 0.0, W, "gravity > 0")?;
        Ok(())
    }

    /// Rolling-friction factor `mu0 + mu1 vx^2`.
    #[inline]
    fn friction(&self, vx: f64) -> f64 {
        self.mu0 + self.mu1 * vx * vx
    }
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::passenger_car()
    }
}

/// Body-frame velocities and global pose.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl VehicleState {
    pub fn to_array(self) -> [f64; 6] {
        [self.vx, self.vy, self.wz, self.x, self.y, self.psi]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            vx: a[0],
            vy: a[1],
            wz: a[2],
            x: a[3],
            y: a[4],
            psi: a[5],
        }
    }

    /// Reflection about the desired path (the global x axis).
    pub fn mirrored(self) -> Self {
        Self {
            vy: -self.vy,
            wz: -self.wz,
            y: -self.y,
            psi: -self.psi,
            ..self
        }
    }

    /// Body sideslip angle `atan(vy / vx)`.
    pub fn sideslip(&self) -> f64 {
        (self.vy / self.vx).atan()
    }
}

/// Time derivative of a [`VehicleState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub dvx: f64,
    pub dvy: f64,
    pub dwz: f64,
    pub dx: f64,
    pub dy: f64,
    pub dpsi: f64,
}

impl StateDerivative {
    pub fn to_array(self) -> [f64; 6] {
        [self.dvx, self.dvy, self.dwz, self.dx, self.dy, self.dpsi]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            dvx: a[0],
            dvy: a[1],
            dwz: a[2],
            dx: a[3],
            dy: a[4],
            dpsi: a[5],
        }
    }
}

/// Actuator commands applied to the plant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    /// Front-wheel steering angle, rad.
    pub steer: f64,
    /// Commanded tractive force, N.
    pub tractive_force: f64,
}

impl ControlInput {
    pub fn new(steer: f64, tractive_force: f64) -> Self {
        Self {
            steer,
            tractive_force,
        }
    }

    pub fn mirrored(self) -> Self {
        Self {
            steer: -self.steer,
            ..self
        }
    }
}

/// Plant selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Model {
    /// Generalized Ackermann single-track model with steering-coupled friction.
    #[default]
    Generalized,
    /// Linear-tire 3DOF single-track model.
    Reference,
}

impl Model {
    pub const ALL: [Model; 2] = [Model::Generalized, Model::Reference];

    pub fn name(self) -> &'static str {
        match self {
            Model::Generalized => "generalized",
            Model::Reference => "reference",
        }
    }

    /// Short column suffix used when two models are written side by side.
    pub fn suffix(self) -> &'static str {
        match self {
            Model::Generalized => "g",
            Model::Reference => "m",
        }
    }

    pub fn rhs(
        self,
        state: &VehicleState,
        input: &ControlInput,
        params: &VehicleParams,
    ) -> Result<StateDerivative> {
        match self {
            Model::Generalized => rhs_generalized(state, input, params),
            Model::Reference => rhs_reference(state, input, params),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "generalized" => Ok(Model::Generalized),
            "reference" => Ok(Model::Reference),
            other => Err(format!(
                "unknown model `{other}` (expected `generalized` or `reference`)"
            )),
        }
    }
}

fn check_speed(vx: f64) -> Result<()> {
    // `!(vx >= floor)` also rejects NaN
    if vx.is_nan() || vx < VX_FLOOR {
        return Err(Error::BelowSpeedFloor {
            vx,
            floor: VX_FLOOR,
        });
    }
    Ok(())
}

fn check_preconditions(state: &VehicleState, input: &ControlInput) -> Result<()> {
    check_speed(state.vx)?;
    if input.steer.is_nan() || input.steer.abs() >= FRAC_PI_2 {
        return Err(Error::SteerOutOfRange { steer: input.steer });
    }
    Ok(())
}

#[inline]
fn pose_rates(state: &VehicleState) -> (f64, f64, f64) {
    let (sin_psi, cos_psi) = state.psi.sin_cos();
    (
        state.vx * cos_psi - state.vy * sin_psi,
        state.vx * sin_psi + state.vy * cos_psi,
        state.wz,
    )
}

/// Generalized Ackermann single-track model.
///
/// No term is simplified away: the rolling-friction contribution is
/// proportional to `cos(delta) - 1` (so it vanishes when driving straight),
/// and both axles receive the tractive force through the `cos(delta) + 1` factor.
pub fn rhs_generalized(
    state: &VehicleState,
    input: &ControlInput,
    params: &VehicleParams,
) -> Result<StateDerivative> {
    check_preconditions(state, input)?;
    let VehicleParams {
        mass: m,
        yaw_inertia: iz,
        dist_front: lf,
        dist_rear: lr,
        cornering_front,
        cornering_rear,
        gravity: g,
        drag_lumped,
        ..
    } = *params;
    let VehicleState { vx, vy, wz, .. } = *state;
    let delta = input.steer;
    let force = input.tractive_force;

    let cf2 = 2.0 * cornering_front;
    let cr2 = 2.0 * cornering_rear;
    let (sin_d, cos_d) = delta.sin_cos();
    let friction = params.friction(vx);
    let vy_vx = vy / vx;
    let wz_vx = wz / vx;

    let dvx = force / m * (cos_d + 1.0) - cf2 / m * delta * sin_d
        + cf2 / m * vy_vx * sin_d
        + cf2 / m * lf * wz_vx * sin_d
        - friction * g * (cos_d - 1.0)
        - drag_lumped * vx * vx / m
        + wz * vy;

    let dvy = force / m * sin_d + cf2 / m * delta * cos_d
        - cf2 * cos_d * vy_vx / m
        - cr2 * vy_vx / m
        - cf2 * lf * cos_d * wz_vx / m
        + cr2 * lr * wz_vx / m
        - friction * g * sin_d
        - wz * vx;

    let dwz = lf / iz * cf2 * delta * cos_d
        - (cf2 * lf * cos_d - cr2 * lr) * vy_vx / iz
        - (cf2 * lf * lf * cos_d + cr2 * lr * lr) * wz_vx / iz
        + lf / iz * force * sin_d
        - friction * m * g * lf / iz * sin_d;

    let (dx, dy, dpsi) = pose_rates(state);
    Ok(StateDerivative {
        dvx,
        dvy,
        dwz,
        dx,
        dy,
        dpsi,
    })
}

/// Linear-tire 3DOF single-track reference model.
///
/// Axle lateral forces are linear in slip angle; there is no rolling
/// friction. The tractive force enters both axles as in the generalized
/// model so control amplitudes are comparable between plants.
pub fn rhs_reference(
    state: &VehicleState,
    input: &ControlInput,
    params: &VehicleParams,
) -> Result<StateDerivative> {
    check_preconditions(state, input)?;
    let VehicleParams {
        mass: m,
        yaw_inertia: iz,
        dist_front: lf,
        dist_rear: lr,
        ..
    } = *params;
    let VehicleState { vx, vy, wz, .. } = *state;
    let delta = input.steer;
    let force = input.tractive_force;
    let (sin_d, cos_d) = delta.sin_cos();

    let front_slip = delta - (vy + lf * wz) / vx;
    let rear_slip = -(vy - lr * wz) / vx;
    let lateral_front = 2.0 * params.cornering_front * front_slip;
    let lateral_rear = 2.0 * params.cornering_rear * rear_slip;

    let longitudinal = force * (1.0 + cos_d) - lateral_front * sin_d - params.drag_lumped * vx * vx;
    let dvx = longitudinal / m + wz * vy;
    let dvy = (lateral_front * cos_d + lateral_rear + force * sin_d) / m - wz * vx;
    let dwz = (lf * (lateral_front * cos_d + force * sin_d) - lr * lateral_rear) / iz;

    let (dx, dy, dpsi) = pose_rates(state);
    Ok(StateDerivative {
        dvx,
        dvy,
        dwz,
        dx,
        dy,
        dpsi,
    })
}

/// Frozen-speed lateral/yaw matrix `A` with `(dvy, dwz) = A (vy, wz)` at zero steer.
///
/// At zero steering every friction and tractive term drops out of the
/// lateral and yaw equations, so this holds for both models.
pub fn lateral_subsystem_matrix(vx: f64, params: &VehicleParams) -> Result<[[f64; 2]; 2]> {
    check_speed(vx)?;
    let m = params.mass;
    let iz = params.yaw_inertia;
    let lf = params.dist_front;
    let lr = params.dist_rear;
    let cf2 = 2.0 * params.cornering_front;
    let cr2 = 2.0 * params.cornering_rear;
    Ok([
        [
            -(cf2 + cr2) / (m * vx),
            -(cf2 * lf - cr2 * lr) / (m * vx) - vx,
        ],
        [
            -(cf2 * lf - cr2 * lr) / (iz * vx),
            -(cf2 * lf * lf + cr2 * lr * lr) / (iz * vx),
        ],
    ])
}

/// Eigenvalues of a real 2x2 matrix as `(re, im)` pairs.
pub fn eigenvalues_2x2(a: &[[f64; 2]; 2]) -> [(f64, f64); 2] {
    let half_trace = 0.5 * (a[0][0] + a[1][1]);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = half_trace * half_trace - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(half_trace + r, 0.0), (half_trace - r, 0.0)]
    } else {
        let i = (-disc).sqrt();
        [(half_trace, i), (half_trace, -i)]
    }
}
