//! Fixed-step RK4 integration of the vehicle under the open-loop controls.

use std::fmt;

use crate::control::Controls;
use crate::dynamics::{ControlInput, Model, VehicleParams, VehicleState};
use crate::error::{ensure, Error, Result};
use crate::scenario::ScenarioSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Integration step, s.
    pub dt: f64,
    /// Final time, s.
    pub horizon: f64,
    pub model: Model,
    /// Record every n-th step.
    pub record_stride: usize,
}

impl SimConfig {
    pub const DEFAULT_DT: f64 = 1.0e-3;
    pub const DEFAULT_HORIZON: f64 = 20.0;
    pub const DEFAULT_RECORD_STRIDE: usize = 10;

    pub fn new(model: Model) -> Self {
        Self {
            dt: Self::DEFAULT_DT,
            horizon: Self::DEFAULT_HORIZON,
            model,
            record_stride: Self::DEFAULT_RECORD_STRIDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        const W: &str = "simulation settings";
        ensure(self.dt > 0.0 && self.dt.is_finite(), W, "dt > 0")?;
        ensure(
            self.horizon >= self.dt && self.horizon.is_finite(),
            W,
            "horizon >= dt",
        )?;
        ensure(self.record_stride >= 1, W, "record_stride >= 1")
    }

    /// Number of integration steps; the horizon is rounded to the step grid.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Time of integration step `k`, computed by multiplication so it never drifts.
    #[inline]
    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::new(Model::Generalized)
    }
}

/// Why a simulation stopped before the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SimFailure {
    /// Stage time at which the right-hand side refused to evaluate.
    pub t: f64,
    pub cause: Error,
}

impl fmt::Display for SimFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at t = {} s: {}", self.t, self.cause)
    }
}

impl std::error::Error for SimFailure {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: VehicleState,
    pub input: ControlInput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub samples: Vec<Sample>,
    pub config: SimConfig,
    pub params: VehicleParams,
    pub controls: Controls,
    /// Set when integration stopped early; `samples` then holds the partial run.
    pub failure: Option<SimFailure>,
}

impl Trace {
    /// Builds a trace directly from samples, e.g. for synthetic metric checks.
    pub fn from_samples(samples: Vec<Sample>, config: SimConfig) -> Self {
        Self {
            samples,
            config,
            params: VehicleParams::passenger_car(),
            controls: Controls::uncontrolled(0.0),
            failure: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Reflection of every sample about the desired path.
    pub fn mirrored(&self) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| Sample {
                    t: s.t,
                    state: s.state.mirrored(),
                    input: s.input.mirrored(),
                })
                .collect(),
            controls: self.controls.mirrored(),
            ..self.clone()
        }
    }
}

#[inline]
fn axpy(base: &[f64; 6], h: f64, k: &[f64; 6]) -> [f64; 6] {
    std::array::from_fn(|i| base[i] + h * k[i])
}

/// One classical RK4 step of a time-dependent 6-state ODE.
pub fn rk4_step<F>(y: [f64; 6], t: f64, dt: f64, mut f: F) -> Result<[f64; 6], SimFailure>
where
    F: FnMut(f64, &[f64; 6]) -> Result<[f64; 6], SimFailure>,
{
    let half = 0.5 * dt;
    let k1 = f(t, &y)?;
    let k2 = f(t + half, &axpy(&y, half, &k1))?;
    let k3 = f(t + half, &axpy(&y, half, &k2))?;
    let k4 = f(t + dt, &axpy(&y, dt, &k3))?;
    Ok(std::array::from_fn(|i| {
        y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Advances the vehicle by one step, re-evaluating the controls at every stage time.
pub fn step_rk4(
    state: &VehicleState,
    t: f64,
    dt: f64,
    model: Model,
    controls: &Controls,
    params: &VehicleParams,
) -> Result<VehicleState, SimFailure> {
    let rhs = |ts: f64, y: &[f64; 6]| {
        let s = VehicleState::from_array(*y);
        model
            .rhs(&s, &controls.input_at(ts), params)
            .map(|d| d.to_array())
            .map_err(|cause| SimFailure { t: ts, cause })
    };
    rk4_step(state.to_array(), t, dt, rhs).map(VehicleState::from_array)
}

/// Integrates a scenario from its post-impact state to the horizon.
///
/// A speed-floor violation stops the run; the returned trace then carries the
/// samples recorded so far and the diagnosis.
pub fn simulate(
    scenario: &ScenarioSpec,
    sim: &SimConfig,
    controls: &Controls,
    params: &VehicleParams,
) -> Trace {
    let steps = sim.steps();
    let mut samples = Vec::with_capacity(steps / sim.record_stride + 1);
    let mut state = scenario.initial_state();
    let mut failure = None;

    samples.push(Sample {
        t: 0.0,
        state,
        input: controls.input_at(0.0),
    });
    for k in 0..steps {
        let t = sim.time_at(k);
        match step_rk4(&state, t, sim.dt, sim.model, controls, params) {
            Ok(next) => state = next,
            Err(f) => {
                failure = Some(f);
                break;
            }
        }
        if (k + 1) % sim.record_stride == 0 {
            let t_next = sim.time_at(k + 1);
            samples.push(Sample {
                t: t_next,
                state,
                input: controls.input_at(t_next),
            });
        }
    }

    Trace {
        samples,
        config: *sim,
        params: *params,
        controls: *controls,
        failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{cruise_force, stock_controls};
    use crate::scenario::{self, CaseId};

    fn equilibrium(vx: f64) -> VehicleState {
        VehicleState {
            vx,
            ..Default::default()
        }
    }

    #[test]
    fn equilibrium_step_moves_only_x() {
        let p = VehicleParams::passenger_car();
        for model in Model::ALL {
            let c = Controls::uncontrolled(cruise_force(30.0, &p, model).unwrap());
            let s = step_rk4(&equilibrium(30.0), 0.0, 1e-3, model, &c, &p).unwrap();
            assert!((s.vx - 30.0).abs() < 1e-13);
            assert_eq!((s.vy, s.wz, s.y, s.psi), (0.0, 0.0, 0.0, 0.0));
            assert!((s.x - 0.03).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_yaw_rate_advances_heading_exactly() {
        let c = 0.7;
        let dt = 0.01;
        let y = [30.0, 0.0, c, 0.0, 0.0, 0.1];
        let next = rk4_step(y, 0.0, dt, |_, s| {
            Ok([0.0, 0.0, 0.0, s[0] * s[5].cos(), s[0] * s[5].sin(), s[2]])
        })
        .unwrap();
        assert!((next[5] - (0.1 + c * dt)).abs() < 1e-15);
    }

    #[test]
    fn stage_times_are_used_for_controls() {
        // y' = t^3 is integrated exactly by RK4.
        let next = rk4_step([0.0; 6], 1.0, 0.5, |t, _| {
            Ok([t * t * t, 0.0, 0.0, 0.0, 0.0, 0.0])
        })
        .unwrap();
        let exact = (1.5f64.powi(4) - 1.0) / 4.0;
        assert!((next[0] - exact).abs() < 1e-14);
    }

    #[test]
    fn timestamps_are_multiples_of_the_record_interval() {
        let p = VehicleParams::passenger_car();
        let mut sim = SimConfig::new(Model::Generalized);
        sim.horizon = 2.0;
        sim.record_stride = 7;
        sim.dt = 1.0e-3;
        let c = Controls::uncontrolled(441.0);
        let trace = simulate(&scenario::case1(), &sim, &c, &p);
        assert_eq!(trace.samples[0].t, 0.0);
        assert_eq!(trace.samples[0].state, scenario::case1().initial_state());
        for (j, s) in trace.samples.iter().enumerate() {
            assert_eq!(s.t, (j * sim.record_stride) as f64 * sim.dt);
        }
        assert_eq!(trace.len(), 2000 / 7 + 1);
    }

    #[test]
    fn speed_floor_failure_is_in_band() {
        let p = VehicleParams::passenger_car();
        let mut sim = SimConfig::new(Model::Generalized);
        sim.horizon = 10.0;
        sim.record_stride = 1;
        // Strong braking drives vx through the floor.
        let c = Controls::uncontrolled(-20_000.0);
        let trace = simulate(&scenario::case1(), &sim, &c, &p);
        let failure = trace.failure.clone().expect("should fail");
        assert!(matches!(failure.cause, Error::BelowSpeedFloor { .. }));
        assert!(failure.t > 0.0 && failure.t < 10.0);
        assert!(trace.last().unwrap().t <= failure.t);
        assert!(trace.len() > 1);
    }

    #[test]
    fn deterministic() {
        let p = VehicleParams::passenger_car();
        let c = stock_controls(CaseId::Case2, Model::Reference, 441.0);
        let sim = SimConfig::new(Model::Reference);
        let a = simulate(&scenario::case2(), &sim, &c, &p);
        let b = simulate(&scenario::case2(), &sim, &c, &p);
        assert_eq!(a, b);
    }
}
