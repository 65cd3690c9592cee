//! Post-impact initial conditions and recovery scoring.

use std::fmt;
use std::str::FromStr;

use crate::dynamics::{VehicleState, VX_FLOOR};
use crate::error::{ensure, Error, Result};
use crate::sim::Trace;

/// The two published collision cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// Lateral hit at the C.G.: lateral velocity only.
    Case1,
    /// Lateral hit away from the C.G.: lateral velocity and yaw rate.
    Case2,
}

impl CaseId {
    pub const ALL: [CaseId; 2] = [CaseId::Case1, CaseId::Case2];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
        }
    }

    pub fn spec(self) -> ScenarioSpec {
        match self {
            CaseId::Case1 => case1(),
            CaseId::Case2 => case2(),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "case1" => Ok(CaseId::Case1),
            "case2" => Ok(CaseId::Case2),
            other => Err(format!(
                "unknown case `{other}` (expected `case1` or `case2`)"
            )),
        }
    }
}

/// State of the vehicle right after the impact, at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub vx0: f64,
    pub vy0: f64,
    pub wz0: f64,
    pub x0: f64,
    pub y0: f64,
    pub psi0: f64,
    pub label: String,
}

impl ScenarioSpec {
    /// Straight driving at `vx0` with no disturbance.
    pub fn straight(vx0: f64) -> Self {
        Self {
            vx0,
            vy0: 0.0,
            wz0: 0.0,
            x0: 0.0,
            y0: 0.0,
            psi0: 0.0,
            label: "straight".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.vx0 >= VX_FLOOR,
            "scenario",
            &format!("vx0 >= vx_floor ({VX_FLOOR} m/s)"),
        )?;
        for (name, v) in [
            ("vy0", self.vy0),
            ("wz0", self.wz0),
            ("x0", self.x0),
            ("y0", self.y0),
            ("psi0", self.psi0),
        ] {
            ensure(v.is_finite(), "scenario", &format!("{name} is finite"))?;
        }
        Ok(())
    }

    pub fn initial_state(&self) -> VehicleState {
        VehicleState {
            vx: self.vx0,
            vy: self.vy0,
            wz: self.wz0,
            x: self.x0,
            y: self.y0,
            psi: self.psi0,
        }
    }

    /// The same impact from the other side.
    pub fn mirrored(&self) -> Self {
        Self {
            vy0: -self.vy0,
            wz0: -self.wz0,
            y0: -self.y0,
            psi0: -self.psi0,
            label: format!("{}-mirrored", self.label),
            ..self.clone()
        }
    }
}

pub fn case1() -> ScenarioSpec {
    ScenarioSpec {
        vx0: 30.0,
        vy0: 20.0,
        wz0: 0.0,
        x0: 0.0,
        y0: 0.0,
        psi0: 0.0,
        label: "case1".to_string(),
    }
}

pub fn case2() -> ScenarioSpec {
    ScenarioSpec {
        vx0: 30.0,
        vy0: 10.0,
        wz0: 0.35,
        x0: 0.0,
        y0: 0.0,
        psi0: 0.0,
        label: "case2".to_string(),
    }
}

/// Tolerances defining a successful restoration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Lateral offset from the path, m.
    pub y_tol: f64,
    /// Heading error, rad.
    pub psi_tol: f64,
    /// How long both must hold, s.
    pub hold: f64,
}

impl Thresholds {
    pub const DEFAULT: Thresholds = Thresholds {
        y_tol: 0.2,
        psi_tol: 0.02,
        hold: 2.0,
    };

    pub fn validate(&self) -> Result<()> {
        const W: &str = "thresholds";
        ensure(self.y_tol >= 0.0, W, "y_tol >= 0")?;
        ensure(self.psi_tol >= 0.0, W, "psi_tol >= 0")?;
        ensure(self.hold >= 0.0 && self.hold.is_finite(), W, "hold >= 0")
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryMetrics {
    /// Earliest time after which the vehicle stays within tolerance for the hold time.
    pub time_to_recovery: Option<f64>,
    /// max |y|, m
    pub peak_lateral_deviation: f64,
    /// max |wz|, rad/s
    pub peak_yaw_rate: f64,
    /// max |atan(vy / vx)|, rad
    pub peak_sideslip: f64,
    /// |y| at the last sample, m
    pub final_lateral_error: f64,
    /// |psi| at the last sample, rad
    pub final_heading_error: f64,
    pub recovered: bool,
}

/// Absolute slack used when comparing sample times against the hold interval.
const TIME_SLACK: f64 = 1e-9;

/// Scores a trace against the recovery thresholds.
///
/// Only recorded samples are inspected. The recovery time is the start of the
/// first run of in-tolerance samples that spans at least `hold` seconds; it
/// must fit inside the trace.
pub fn compute_metrics(trace: &Trace, thresholds: &Thresholds) -> Result<RecoveryMetrics> {
    let last = trace.samples.last().ok_or(Error::EmptyTrace)?;

    let mut peak_lateral_deviation = 0.0_f64;
    let mut peak_yaw_rate = 0.0_f64;
    let mut peak_sideslip = 0.0_f64;
    let mut run_start: Option<f64> = None;
    let mut time_to_recovery = None;

    for s in &trace.samples {
        let st = &s.state;
        peak_lateral_deviation = peak_lateral_deviation.max(st.y.abs());
        peak_yaw_rate = peak_yaw_rate.max(st.wz.abs());
        peak_sideslip = peak_sideslip.max(st.sideslip().abs());

        if time_to_recovery.is_some() {
            continue;
        }
        let within = st.y.abs() <= thresholds.y_tol && st.psi.abs() <= thresholds.psi_tol;
        if !within {
            run_start = None;
            continue;
        }
        let start = *run_start.get_or_insert(s.t);
        if s.t - start >= thresholds.hold - TIME_SLACK {
            time_to_recovery = Some(start);
        }
    }

    Ok(RecoveryMetrics {
        time_to_recovery,
        peak_lateral_deviation,
        peak_yaw_rate,
        peak_sideslip,
        final_lateral_error: last.state.y.abs(),
        final_heading_error: last.state.psi.abs(),
        recovered: time_to_recovery.is_some(),
    })
}
