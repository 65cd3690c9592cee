//! TOML run configuration with defaults and round-trip rendering.
//!
//! Every section is flat. Omitted keys take the defaults documented in the
//! README; `dist_front` and `dist_rear` have no default and must be given.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use trackback_core::{
    cruise_force, CaseId, ControlParam, Controls, ErrorNorm, ForceParams, FreeParam, Model,
    ScenarioSpec, SimConfig, SteeringParams, Thresholds, TuneSpec, VehicleParams, Weights,
};

/// Version tag written into every output file. Configs declaring another version are rejected.
pub const FORMAT_VERSION: u32 = 1;

/// Default tuning budget, in simulations.
pub const DEFAULT_BUDGET: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct ForceSettings {
    /// `None` means the straight-line cruise force at `vx0` for the configured model.
    pub f_initial: Option<f64>,
    pub a_c: f64,
    pub tau_c1: f64,
    pub tau_c2: f64,
}

impl Default for ForceSettings {
    fn default() -> Self {
        let c = ForceParams::constant(0.0);
        Self {
            f_initial: None,
            a_c: c.a_c,
            tau_c1: c.tau_c1,
            tau_c2: c.tau_c2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneSettings {
    pub free: Vec<FreeParam>,
    pub budget: usize,
    pub weights: Weights,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub vehicle: VehicleParams,
    pub scenario: ScenarioSpec,
    pub sim: SimConfig,
    pub steering: SteeringParams,
    pub force: ForceSettings,
    pub thresholds: Thresholds,
    pub tune: Option<TuneSettings>,
    pub output: OutputSettings,
}

impl RunConfig {
    /// Cruise force actually used, resolving the default.
    pub fn f_initial(&self) -> Result<f64> {
        match self.force.f_initial {
            Some(f) => Ok(f),
            None => cruise_force(self.scenario.vx0, &self.vehicle, self.sim.model)
                .context("computing the default f_initial"),
        }
    }

    pub fn controls(&self) -> Result<Controls> {
        let force = ForceParams {
            f_initial: self.f_initial()?,
            a_c: self.force.a_c,
            tau_c1: self.force.tau_c1,
            tau_c2: self.force.tau_c2,
        };
        Ok(Controls::new(self.steering, force))
    }

    pub fn tune_spec(&self) -> Result<Option<TuneSpec>> {
        let Some(t) = &self.tune else {
            return Ok(None);
        };
        Ok(Some(TuneSpec {
            free: t.free.clone(),
            weights: t.weights,
            budget: t.budget,
            seed: self.controls()?,
            thresholds: self.thresholds,
        }))
    }

    /// Replaces the control-law parameters, e.g. with a tuning result.
    pub fn with_controls(&self, c: &Controls) -> Self {
        let mut out = self.clone();
        out.steering = c.steering;
        let keep_default =
            self.force.f_initial.is_none() && self.f_initial().ok() == Some(c.force.f_initial);
        out.force = ForceSettings {
            f_initial: if keep_default {
                None
            } else {
                Some(c.force.f_initial)
            },
            a_c: c.force.a_c,
            tau_c1: c.force.tau_c1,
            tau_c2: c.force.tau_c2,
        };
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.scenario.validate()?;
        self.sim.validate()?;
        self.thresholds.validate()?;
        self.controls()?.validate()?;
        if let Some(spec) = self.tune_spec()? {
            spec.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
    vehicle: RawVehicle,
    scenario: RawScenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sim: Option<RawSim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    steering: Option<RawSteering>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    force: Option<RawForce>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thresholds: Option<RawThresholds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tune: Option<RawTune>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVehicle {
    mass: Option<f64>,
    yaw_inertia: Option<f64>,
    dist_front: f64,
    dist_rear: f64,
    cornering_front: Option<f64>,
    cornering_rear: Option<f64>,
    mu0: Option<f64>,
    mu1: Option<f64>,
    gravity: Option<f64>,
    drag_lumped: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    case: Option<String>,
    vx0: Option<f64>,
    vy0: Option<f64>,
    wz0: Option<f64>,
    x0: Option<f64>,
    y0: Option<f64>,
    psi0: Option<f64>,
    label: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    model: Option<String>,
    dt: Option<f64>,
    horizon: Option<f64>,
    record_stride: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSteering {
    a1: Option<f64>,
    a2: Option<f64>,
    k_dir: Option<f64>,
    tau0: Option<f64>,
    tau1: Option<f64>,
    tau2: Option<f64>,
    tau3: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForce {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_initial: Option<f64>,
    a_c: Option<f64>,
    tau_c1: Option<f64>,
    tau_c2: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    y_tol: Option<f64>,
    psi_tol: Option<f64>,
    hold: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTune {
    free: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    budget: Option<usize>,
    w_y: Option<f64>,
    w_psi: Option<f64>,
    w_time: Option<f64>,
    norm: Option<String>,
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| anyhow!("config parse error: {e}"))?;
    let cfg = resolve(raw)?;
    cfg.validate()?;
    Ok(cfg)
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let output = raw.output.unwrap_or_default();
    if let Some(v) = output.format {
        if v != FORMAT_VERSION {
            bail!("[output] format = {v} is not supported (expected {FORMAT_VERSION})");
        }
    }

    let d = VehicleParams::passenger_car();
    let v = raw.vehicle;
    let vehicle = VehicleParams {
        mass: v.mass.unwrap_or(d.mass),
        yaw_inertia: v.yaw_inertia.unwrap_or(d.yaw_inertia),
        dist_front: v.dist_front,
        dist_rear: v.dist_rear,
        cornering_front: v.cornering_front.unwrap_or(d.cornering_front),
        cornering_rear: v.cornering_rear.unwrap_or(d.cornering_rear),
        mu0: v.mu0.unwrap_or(d.mu0),
        mu1: v.mu1.unwrap_or(d.mu1),
        gravity: v.gravity.unwrap_or(d.gravity),
        drag_lumped: v.drag_lumped.unwrap_or(d.drag_lumped),
    };

    let s = raw.scenario;
    let base = match &s.case {
        Some(name) => name
            .parse::<CaseId>()
            .map_err(|e| anyhow!("[scenario] case: {e}"))?
            .spec(),
        None => {
            let vx0 = s
                .vx0
                .context("[scenario] needs either `case` or at least `vx0`")?;
            ScenarioSpec {
                label: "custom".to_string(),
                ..ScenarioSpec::straight(vx0)
            }
        }
    };
    let scenario = ScenarioSpec {
        vx0: s.vx0.unwrap_or(base.vx0),
        vy0: s.vy0.unwrap_or(base.vy0),
        wz0: s.wz0.unwrap_or(base.wz0),
        x0: s.x0.unwrap_or(base.x0),
        y0: s.y0.unwrap_or(base.y0),
        psi0: s.psi0.unwrap_or(base.psi0),
        label: s.label.unwrap_or(base.label),
    };

    let sm = raw.sim.unwrap_or_default();
    let model = match sm.model {
        Some(m) => m
            .parse::<Model>()
            .map_err(|e| anyhow!("[sim] model: {e}"))?,
        None => Model::Generalized,
    };
    let ds = SimConfig::new(model);
    let sim = SimConfig {
        dt: sm.dt.unwrap_or(ds.dt),
        horizon: sm.horizon.unwrap_or(ds.horizon),
        model,
        record_stride: sm.record_stride.unwrap_or(ds.record_stride),
    };

    let st = raw.steering.unwrap_or_default();
    let z = SteeringParams::zero();
    let steering = SteeringParams {
        a1: st.a1.unwrap_or(z.a1),
        a2: st.a2.unwrap_or(z.a2),
        k_dir: st.k_dir.unwrap_or(z.k_dir),
        tau0: st.tau0.unwrap_or(z.tau0),
        tau1: st.tau1.unwrap_or(z.tau1),
        tau2: st.tau2.unwrap_or(z.tau2),
        tau3: st.tau3.unwrap_or(z.tau3),
    };

    let fo = raw.force.unwrap_or_default();
    let df = ForceSettings::default();
    let force = ForceSettings {
        f_initial: fo.f_initial,
        a_c: fo.a_c.unwrap_or(df.a_c),
        tau_c1: fo.tau_c1.unwrap_or(df.tau_c1),
        tau_c2: fo.tau_c2.unwrap_or(df.tau_c2),
    };

    let th = raw.thresholds.unwrap_or_default();
    let dt = Thresholds::DEFAULT;
    let thresholds = Thresholds {
        y_tol: th.y_tol.unwrap_or(dt.y_tol),
        psi_tol: th.psi_tol.unwrap_or(dt.psi_tol),
        hold: th.hold.unwrap_or(dt.hold),
    };

    let tune = raw.tune.map(resolve_tune).transpose()?;

    Ok(RunConfig {
        vehicle,
        scenario,
        sim,
        steering,
        force,
        thresholds,
        tune,
        output: OutputSettings { dir: output.dir },
    })
}

fn resolve_tune(t: RawTune) -> Result<TuneSettings> {
    if t.lower.len() != t.free.len() || t.upper.len() != t.free.len() {
        bail!(
            "[tune] free, lower and upper must have the same length (got {}, {}, {})",
            t.free.len(),
            t.lower.len(),
            t.upper.len()
        );
    }
    let free = t
        .free
        .iter()
        .zip(t.lower.iter().zip(&t.upper))
        .map(|(name, (&lo, &hi))| {
            name.parse::<ControlParam>()
                .map(|p| FreeParam::new(p, lo, hi))
                .map_err(|e| anyhow!("[tune] free: {e}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let w = Weights::DEFAULT;
    let norm = match t.norm {
        Some(n) => n
            .parse::<ErrorNorm>()
            .map_err(|e| anyhow!("[tune] norm: {e}"))?,
        None => w.norm,
    };
    Ok(TuneSettings {
        free,
        budget: t.budget.unwrap_or(DEFAULT_BUDGET),
        weights: Weights {
            w_y: t.w_y.unwrap_or(w.w_y),
            w_psi: t.w_psi.unwrap_or(w.w_psi),
            w_time: t.w_time.unwrap_or(w.w_time),
            norm,
        },
    })
}

/// Writes a config back out with every default spelled out.
pub fn render(cfg: &RunConfig) -> String {
    let v = &cfg.vehicle;
    let s = &cfg.scenario;
    let st = &cfg.steering;
    let raw = RawConfig {
        output: Some(RawOutput {
            format: Some(FORMAT_VERSION),
            dir: cfg.output.dir.clone(),
        }),
        vehicle: RawVehicle {
            mass: Some(v.mass),
            yaw_inertia: Some(v.yaw_inertia),
            dist_front: v.dist_front,
            dist_rear: v.dist_rear,
            cornering_front: Some(v.cornering_front),
            cornering_rear: Some(v.cornering_rear),
            mu0: Some(v.mu0),
            mu1: Some(v.mu1),
            gravity: Some(v.gravity),
            drag_lumped: Some(v.drag_lumped),
        },
        scenario: RawScenario {
            case: None,
            vx0: Some(s.vx0),
            vy0: Some(s.vy0),
            wz0: Some(s.wz0),
            x0: Some(s.x0),
            y0: Some(s.y0),
            psi0: Some(s.psi0),
            label: Some(s.label.clone()),
        },
        sim: Some(RawSim {
            model: Some(cfg.sim.model.name().to_string()),
            dt: Some(cfg.sim.dt),
            horizon: Some(cfg.sim.horizon),
            record_stride: Some(cfg.sim.record_stride),
        }),
        steering: Some(RawSteering {
            a1: Some(st.a1),
            a2: Some(st.a2),
            k_dir: Some(st.k_dir),
            tau0: Some(st.tau0),
            tau1: Some(st.tau1),
            tau2: Some(st.tau2),
            tau3: Some(st.tau3),
        }),
        force: Some(RawForce {
            f_initial: cfg.force.f_initial,
            a_c: Some(cfg.force.a_c),
            tau_c1: Some(cfg.force.tau_c1),
            tau_c2: Some(cfg.force.tau_c2),
        }),
        thresholds: Some(RawThresholds {
            y_tol: Some(cfg.thresholds.y_tol),
            psi_tol: Some(cfg.thresholds.psi_tol),
            hold: Some(cfg.thresholds.hold),
        }),
        tune: cfg.tune.as_ref().map(|t| RawTune {
            free: t.free.iter().map(|f| f.param.name().to_string()).collect(),
            lower: t.free.iter().map(|f| f.lower).collect(),
            upper: t.free.iter().map(|f| f.upper).collect(),
            budget: Some(t.budget),
            w_y: Some(t.weights.w_y),
            w_psi: Some(t.weights.w_psi),
            w_time: Some(t.weights.w_time),
            norm: Some(t.weights.norm.name().to_string()),
        }),
    };
    toml::to_string(&raw).expect("config tables always serialize")
}

/// Configs compiled into the binary, addressable by name on the command line.
pub const BUNDLED: [(&str, &str); 4] = [
    (
        "case1_generalized",
        include_str!("../configs/case1_generalized.toml"),
    ),
    (
        "case1_reference",
        include_str!("../configs/case1_reference.toml"),
    ),
    (
        "case2_generalized",
        include_str!("../configs/case2_generalized.toml"),
    ),
    (
        "case2_reference",
        include_str!("../configs/case2_reference.toml"),
    ),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Loads a config from a file path or, failing that, a bundled config name.
/// Returns the config together with a short name used for default output paths.
pub fn load(arg: &str) -> Result<(String, RunConfig)> {
    let path = Path::new(arg);
    let (name, text) = if path.is_file() {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let stem = path
            .file_stem()
            .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
        (stem, text)
    } else if let Some(text) = bundled(arg) {
        (arg.to_string(), text.to_string())
    } else {
        let names: Vec<_> = BUNDLED.iter().map(|(n, _)| *n).collect();
        bail!(
            "`{arg}` is neither a config file nor a bundled config ({})",
            names.join(", ")
        );
    };
    let cfg = parse_config(&text).with_context(|| format!("in config `{arg}`"))?;
    Ok((name, cfg))
}
