//! Open-loop recovery commands built from windowed half-sine pulses.
//!
//! Steering is two pulses scaled by a direction gain: the first pulls the
//! vehicle back toward the path, the second realigns the heading. The
//! tractive force is a cruise force plus one pulse.

use std::f64::consts::PI;

use crate::dynamics::{ControlInput, Model, VehicleParams, VX_FLOOR};
use crate::error::{ensure, Error, Result};

/// Indicator of the closed-open interval `[a, b)`.
///
/// Equals `u(t - a) - u(t - b)` for the unit step `u(s) = 1` when `s >= 0`.
#[inline]
pub fn window(t: f64, a: f64, b: f64) -> f64 {
    if t >= a && t < b {
        1.0
    } else {
        0.0
    }
}

/// `amplitude * sin(pi (t - a) / (b - a))` on `[a, b)`, zero elsewhere.
#[inline]
pub fn half_sine_pulse(t: f64, amplitude: f64, a: f64, b: f64) -> f64 {
    if window(t, a, b) == 0.0 {
        return 0.0;
    }
    amplitude * (PI * (t - a) / (b - a)).sin()
}

/// Parameters of the two-pulse steering law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringParams {
    /// First (recovery) pulse amplitude, rad.
    pub a1: f64,
    /// Second (alignment) pulse amplitude, rad. May be negative.
    pub a2: f64,
    /// Direction gain applied to both pulses.
    pub k_dir: f64,
    pub tau0: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

impl SteeringParams {
    /// No steering at all. The windows are placeholders that satisfy the ordering invariant.
    pub fn zero() -> Self {
        Self {
            a1: 0.0,
            a2: 0.0,
            k_dir: 0.0,
            tau0: 0.0,
            tau1: 1.0,
            tau2: 1.0,
            tau3: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        const W: &str = "steering parameters";
        for (name, v) in [
            ("a1", self.a1),
            ("a2", self.a2),
            ("k_dir", self.k_dir),
            ("tau0", self.tau0),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("tau3", self.tau3),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(W, format!("{name} is finite")));
            }
        }
        ensure(
            self.tau0 < self.tau1 && self.tau1 <= self.tau2 && self.tau2 < self.tau3,
            W,
            "tau0 < tau1 <= tau2 < tau3",
        )?;
        ensure(self.a1 >= 0.0, W, "a1 >= 0")?;
        Ok(())
    }

    /// Steering angle at time `t`, rad.
    pub fn steering(&self, t: f64) -> f64 {
        steering(t, self)
    }

    /// Upper bound on `|steering(t)|` over all `t`.
    pub fn amplitude_bound(&self) -> f64 {
        self.k_dir.abs() * (self.a1.abs() + self.a2.abs())
    }
}

/// Parameters of the tractive force law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceParams {
    /// Pre-impact cruise force, N.
    pub f_initial: f64,
    /// Control pulse amplitude, N. Either sign.
    pub a_c: f64,
    pub tau_c1: f64,
    pub tau_c2: f64,
}

impl ForceParams {
    /// Cruise force only.
    pub fn constant(f_initial: f64) -> Self {
        Self {
            f_initial,
            a_c: 0.0,
            tau_c1: 0.0,
            tau_c2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        const W: &str = "force parameters";
        for (name, v) in [
            ("f_initial", self.f_initial),
            ("a_c", self.a_c),
            ("tau_c1", self.tau_c1),
            ("tau_c2", self.tau_c2),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(W, format!("{name} is finite")));
            }
        }
        ensure(self.tau_c1 < self.tau_c2, W, "tau_c1 < tau_c2")
    }

    /// Tractive force at time `t`, N.
    pub fn tractive_force(&self, t: f64) -> f64 {
        tractive_force(t, self)
    }
}

pub fn steering(t: f64, p: &SteeringParams) -> f64 {
    p.k_dir * (half_sine_pulse(t, p.a1, p.tau0, p.tau1) + half_sine_pulse(t, p.a2, p.tau2, p.tau3))
}

pub fn tractive_force(t: f64, p: &ForceParams) -> f64 {
    p.f_initial + half_sine_pulse(t, p.a_c, p.tau_c1, p.tau_c2)
}

/// Straight-line force holding `vx0` constant in the given model.
///
/// Both plants reduce to `2 F = drag_lumped * vx0^2` at zero steer and zero
/// lateral motion, since the rolling-friction term carries `cos(delta) - 1`.
pub fn cruise_force(vx0: f64, params: &VehicleParams, model: Model) -> Result<f64> {
    if vx0.is_nan() || vx0 < VX_FLOOR {
        return Err(Error::BelowSpeedFloor {
            vx: vx0,
            floor: VX_FLOOR,
        });
    }
    let drag = params.drag_lumped * vx0 * vx0;
    Ok(match model {
        // F (cos 0 + 1) / m = K_d vx^2 / m
        Model::Generalized => drag / 2.0,
        // F (1 + cos 0) = K_d vx^2
        Model::Reference => drag / (1.0 + 1.0),
    })
}

/// Steering plus force law, evaluated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub steering: SteeringParams,
    pub force: ForceParams,
}

impl Controls {
    pub fn new(steering: SteeringParams, force: ForceParams) -> Self {
        Self { steering, force }
    }

    /// Zero steering and a constant cruise force.
    pub fn uncontrolled(f_initial: f64) -> Self {
        Self {
            steering: SteeringParams::zero(),
            force: ForceParams::constant(f_initial),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.steering.validate()?;
        self.force.validate()
    }

    #[inline]
    pub fn input_at(&self, t: f64) -> ControlInput {
        ControlInput {
            steer: self.steering.steering(t),
            tractive_force: self.force.tractive_force(t),
        }
    }

    /// Same controls with the steering direction reversed.
    pub fn mirrored(&self) -> Self {
        let mut m = *self;
        m.steering.k_dir = -m.steering.k_dir;
        m
    }
}

/// Stock control parameters for one collision case and plant. They are the
/// starting point for tuning and do not recover the vehicle on their own.
///
/// `f_initial` must be filled in from [`cruise_force`].
pub fn stock_controls(case: crate::scenario::CaseId, model: Model, f_initial: f64) -> Controls {
    use crate::scenario::CaseId;
    let (a2, a_c, k_dir, tau1) = match (case, model) {
        (CaseId::Case1, Model::Generalized) => (-1.91, 900.0, -0.2, 3.0),
        (CaseId::Case1, Model::Reference) => (-1.818, 1500.0, -0.2, 3.0),
        (CaseId::Case2, Model::Generalized) => (-1.4665, 900.0, -0.5, 5.195),
        (CaseId::Case2, Model::Reference) => (-1.353, 1550.0, -0.5, 5.195),
    };
    Controls {
        steering: SteeringParams {
            a1: 0.175,
            a2,
            k_dir,
            tau0: 1.0,
            tau1,
            tau2: 10.0,
            tau3: 11.0,
        },
        force: ForceParams {
            f_initial,
            a_c,
            tau_c1: 5.443,
            tau_c2: 10.0,
        },
    }
}
