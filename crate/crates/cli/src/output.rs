//! Plain-text writers for run outputs.
//!
//! Floats are written with `{:?}`, which is the shortest representation
//! that parses back to the same `f64`.

use std::fmt::Write as _;

use trackback_core::{Controls, RecoveryMetrics, Trace, TuneResult, TuneSpec};

use crate::config::{RunConfig, FORMAT_VERSION};

pub const TRACE_COLUMNS: [&str; 9] = ["t", "vx", "vy", "wz", "x", "y", "psi", "delta_s", "f_xt"];

fn sample_row(trace: &Trace, i: usize) -> [f64; 9] {
    let s = &trace.samples[i];
    [
        s.t,
        s.state.vx,
        s.state.vy,
        s.state.wz,
        s.state.x,
        s.state.y,
        s.state.psi,
        s.input.steer,
        s.input.tractive_force,
    ]
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        write!(out, "{v:?}").unwrap();
    }
    out.push('\n');
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut out = TRACE_COLUMNS.join(",");
    out.push('\n');
    for i in 0..trace.len() {
        push_row(&mut out, sample_row(trace, i));
    }
    out
}

/// Two traces side by side on a shared time column. Columns after `t` carry
/// the given suffixes. A trace that stopped early leaves its cells empty.
pub fn merged_trace_csv(a: &Trace, b: &Trace, suffix_a: &str, suffix_b: &str) -> String {
    let mut header = vec!["t".to_string()];
    for suffix in [suffix_a, suffix_b] {
        header.extend(TRACE_COLUMNS[1..].iter().map(|c| format!("{c}_{suffix}")));
    }
    let mut out = header.join(",");
    out.push('\n');
    let longer = if a.len() >= b.len() { a } else { b };
    for i in 0..longer.len() {
        write!(out, "{:?}", longer.samples[i].t).unwrap();
        for trace in [a, b] {
            if i < trace.len() {
                for v in &sample_row(trace, i)[1..] {
                    write!(out, ",{v:?}").unwrap();
                }
            } else {
                out.push_str(&",".repeat(TRACE_COLUMNS.len() - 1));
            }
        }
        out.push('\n');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:?}"))
}

/// Every parameter that shaped the run, defaults included.
pub fn echo(cfg: &RunConfig, controls: &Controls, controlled: bool) -> Vec<(String, String)> {
    let v = &cfg.vehicle;
    let s = &cfg.scenario;
    let st = &controls.steering;
    let fo = &controls.force;
    let th = &cfg.thresholds;
    let f = |x: f64| format!("{x:?}");
    let mut kv: Vec<(&str, String)> = vec![
        ("format", FORMAT_VERSION.to_string()),
        ("control", if controlled { "on" } else { "off" }.to_string()),
        ("vehicle.mass", f(v.mass)),
        ("vehicle.yaw_inertia", f(v.yaw_inertia)),
        ("vehicle.dist_front", f(v.dist_front)),
        ("vehicle.dist_rear", f(v.dist_rear)),
        ("vehicle.cornering_front", f(v.cornering_front)),
        ("vehicle.cornering_rear", f(v.cornering_rear)),
        ("vehicle.mu0", f(v.mu0)),
        ("vehicle.mu1", f(v.mu1)),
        ("vehicle.gravity", f(v.gravity)),
        ("vehicle.drag_lumped", f(v.drag_lumped)),
        ("scenario.label", s.label.clone()),
        ("scenario.vx0", f(s.vx0)),
        ("scenario.vy0", f(s.vy0)),
        ("scenario.wz0", f(s.wz0)),
        ("scenario.x0", f(s.x0)),
        ("scenario.y0", f(s.y0)),
        ("scenario.psi0", f(s.psi0)),
        ("sim.model", cfg.sim.model.name().to_string()),
        ("sim.dt", f(cfg.sim.dt)),
        ("sim.horizon", f(cfg.sim.horizon)),
        ("sim.record_stride", cfg.sim.record_stride.to_string()),
        ("steering.a1", f(st.a1)),
        ("steering.a2", f(st.a2)),
        ("steering.k_dir", f(st.k_dir)),
        ("steering.tau0", f(st.tau0)),
        ("steering.tau1", f(st.tau1)),
        ("steering.tau2", f(st.tau2)),
        ("steering.tau3", f(st.tau3)),
        ("force.f_initial", f(fo.f_initial)),
        (
            "force.f_initial_source",
            if cfg.force.f_initial.is_some() {
                "config"
            } else {
                "cruise"
            }
            .to_string(),
        ),
        ("force.a_c", f(fo.a_c)),
        ("force.tau_c1", f(fo.tau_c1)),
        ("force.tau_c2", f(fo.tau_c2)),
        ("thresholds.y_tol", f(th.y_tol)),
        ("thresholds.psi_tol", f(th.psi_tol)),
        ("thresholds.hold", f(th.hold)),
    ];
    if let Some(t) = &cfg.tune {
        let names: Vec<_> = t.free.iter().map(|p| p.param.name()).collect();
        let lower: Vec<_> = t.free.iter().map(|p| f(p.lower)).collect();
        let upper: Vec<_> = t.free.iter().map(|p| f(p.upper)).collect();
        kv.extend([
            ("tune.free", names.join(" ")),
            ("tune.lower", lower.join(" ")),
            ("tune.upper", upper.join(" ")),
            ("tune.budget", t.budget.to_string()),
            ("tune.w_y", f(t.weights.w_y)),
            ("tune.w_psi", f(t.weights.w_psi)),
            ("tune.w_time", f(t.weights.w_time)),
            ("tune.norm", t.weights.norm.name().to_string()),
        ]);
    }
    kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn metric_pairs(trace: &Trace, m: &RecoveryMetrics) -> Vec<(String, String)> {
    let f = |x: f64| format!("{x:?}");
    let (failure, failure_t) = match &trace.failure {
        Some(fl) => (fl.cause.to_string(), f(fl.t)),
        None => ("none".to_string(), "none".to_string()),
    };
    [
        ("recovered", m.recovered.to_string()),
        ("time_to_recovery", opt(m.time_to_recovery)),
        ("peak_lateral_deviation", f(m.peak_lateral_deviation)),
        ("peak_yaw_rate", f(m.peak_yaw_rate)),
        ("peak_sideslip", f(m.peak_sideslip)),
        ("final_lateral_error", f(m.final_lateral_error)),
        ("final_heading_error", f(m.final_heading_error)),
        ("final_time", f(trace.last().map_or(0.0, |s| s.t))),
        ("failure", failure),
        ("failure_time", failure_t),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn kv_text(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

pub fn metrics_text(
    cfg: &RunConfig,
    controls: &Controls,
    controlled: bool,
    trace: &Trace,
    m: &RecoveryMetrics,
) -> String {
    let mut pairs = metric_pairs(trace, m);
    pairs.extend(echo(cfg, controls, controlled));
    kv_text(&pairs)
}

/// Side-by-side metrics of two runs, one row per key. Rows that differ end in `*`.
pub fn comparison_text(
    labels: [&str; 2],
    runs: [(&RunConfig, &Controls, &Trace, &RecoveryMetrics); 2],
) -> String {
    let cols: Vec<Vec<(String, String)>> = runs
        .iter()
        .map(|(cfg, c, t, m)| {
            let mut p = metric_pairs(t, m);
            p.extend(echo(cfg, c, true));
            p
        })
        .collect();
    let mut keys: Vec<&str> = cols[0].iter().map(|(k, _)| k.as_str()).collect();
    for (k, _) in &cols[1] {
        if !keys.contains(&k.as_str()) {
            keys.push(k);
        }
    }
    let lookup = |col: &[(String, String)], key: &str| {
        col.iter()
            .find(|(k, _)| k == key)
            .map_or_else(|| "-".to_string(), |(_, v)| v.clone())
    };
    let rows: Vec<(&str, String, String)> = keys
        .iter()
        .map(|&k| (k, lookup(&cols[0], k), lookup(&cols[1], k)))
        .collect();
    let kw = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(6);
    let vw = rows
        .iter()
        .map(|r| r.1.len())
        .chain([labels[0].len()])
        .max()
        .unwrap_or(0);
    let mut out = format!("{:kw$}  {:vw$}  {}\n", "metric", labels[0], labels[1]);
    for (k, a, b) in rows {
        let mark = if a == b { "" } else { "  *" };
        writeln!(out, "{k:kw$}  {a:vw$}  {b}{mark}").unwrap();
    }
    out
}

pub fn history_csv(spec: &TuneSpec, result: &TuneResult) -> String {
    let mut out = String::from("iter,objective");
    for fp in &spec.free {
        write!(out, ",{}", fp.param.name()).unwrap();
    }
    out.push('\n');
    for e in &result.history {
        write!(out, "{},{:?}", e.iter, e.objective).unwrap();
        for v in &e.values {
            write!(out, ",{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}
