//! Execution of a validated [`RunConfig`].

use crate::config::*;
use crate::output::{write_atomic, WriteError};
use dqsd::annular::{annular_profile, solve_annular};
use dqsd::bridge::{bridge_sweep, lift_circle, log_log_slope, BridgeRow};
use dqsd::curve::ClosedCurve;
use dqsd::dimple::{dimple_profile, solve_dimple_from_center, solve_dimple_from_mean, solve_dimple_from_radius};
use dqsd::dqop_flow::{diagnostics, dqop_evolve, stretched_annular};
use dqsd::minmove::{minmove_evolve, radial_curve};
use dqsd::sd_flow::{sd_evolve, SdOptions};
use dqsd::specfun::{nicholson_modulus_sq, Order, PolarEval};
use dqsd::trace::{csv_table, SdSample};
use dqsd::{DiskDomain, RadialProfile};
use serde_json::{json, Map, Value};
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Numerical(#[from] dqsd::Error),
    #[error(transparent)]
    Write(#[from] WriteError),
}

/// One-line summary and the artifacts written.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub line: String,
    pub artifacts: Vec<PathBuf>,
}

struct Out<'a> {
    dir: &'a std::path::Path,
    written: Vec<PathBuf>,
}

impl Out<'_> {
    fn put(&mut self, name: &str, contents: &str) -> Result<(), WriteError> {
        self.written.push(write_atomic(self.dir, name, contents)?);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), WriteError> {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        self.put(name, &text)
    }
}

fn line(command: &str, pairs: &[(&str, String)]) -> String {
    let mut s = command.to_string();
    for (k, v) in pairs {
        s.push_str(&format!(" {k}={v}"));
    }
    s
}

/// Shortest round-trip form, with an exponent outside `[1e-3, 1e6)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn profile_csv(p: &RadialProfile) -> String {
    csv_table("r,u", p.grid.iter().zip(&p.values).map(|(&r, &u)| vec![r, u]))
}

fn domain_json(d: &DiskDomain) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("epsilon".into(), json!(d.epsilon));
    m.insert("R0".into(), json!(d.radius));
    m.insert("delta".into(), json!(d.delta));
    m
}

fn merged(base: impl serde::Serialize, extra: Map<String, Value>) -> Value {
    let mut v = serde_json::to_value(base).expect("records serialize");
    if let Value::Object(m) = &mut v {
        m.extend(extra);
    }
    v
}

fn steady_annular(c: &AnnularConfig, out: &mut Out) -> Result<String, RunError> {
    let sol = solve_annular(c.q0, c.domain)?;
    let profile = annular_profile(&sol, &c.domain.uniform_grid(c.grid_n))?;
    let energy = sol.energy();
    let mut extra = domain_json(&c.domain);
    extra.insert("r_minus".into(), json!(sol.r_minus()));
    extra.insert("r_plus".into(), json!(sol.r_plus()));
    extra.insert("energy".into(), json!(energy));
    extra.insert("u_bar".into(), json!(sol.mean_mass()));
    out.put("annular_profile.csv", &profile_csv(&profile))?;
    out.json("annular.json", &merged(sol, extra))?;
    Ok(line(
        "steady-annular",
        &[
            ("q0", num(sol.q0)),
            ("lambda", num(sol.lambda)),
            ("qm", num(sol.qm)),
            ("qp", num(sol.qp)),
            ("E", num(energy)),
        ],
    ))
}

fn steady_dimple(c: &DimpleConfig, out: &mut Out) -> Result<String, RunError> {
    let sol = match c.target {
        DimpleTarget::Center(u) => solve_dimple_from_center(u, c.domain)?,
        DimpleTarget::Mean(m) => solve_dimple_from_mean(m, c.domain)?,
        DimpleTarget::Radius(r) => solve_dimple_from_radius(r, c.domain)?,
    };
    let profile = dimple_profile(&sol, &c.domain.uniform_grid(c.grid_n))?;
    let energy = sol.energy();
    let mut extra = domain_json(&c.domain);
    extra.insert("energy".into(), json!(energy));
    out.put("dimple_profile.csv", &profile_csv(&profile))?;
    out.json("dimple.json", &merged(sol, extra))?;
    Ok(line(
        "steady-dimple",
        &[
            ("u_center", num(sol.u_center)),
            ("lambda", num(sol.lambda)),
            ("r_plus", num(sol.r_plus)),
            ("r0", num(sol.r0)),
            ("E", num(energy)),
        ],
    ))
}

/// `true` when no sample exceeds its predecessor by more than `slack`.
fn non_increasing(values: impl Iterator<Item = f64>, slack: f64) -> bool {
    let v: Vec<f64> = values.collect();
    v.windows(2).all(|w| w[1] <= w[0] + slack)
}

fn evolve_sd(c: &SdConfig, out: &mut Out) -> Result<String, RunError> {
    let (mode, amp, radius) = (c.mode as f64, c.amp, c.radius);
    let rho = |t: f64| if c.mode == 0 { radius } else { radius * (1.0 + amp * (mode * t).cos()) };
    let opts = SdOptions { dt: c.dt, cadence: c.cadence };
    let (curve, trace, report, scheme) = match c.scheme {
        SdScheme::SemiImplicit => {
            let c0 = ClosedCurve::from_radial(rho, c.markers)?;
            let (curve, trace, report) = sd_evolve(&c0, c.horizon, opts, c.domain.as_ref())?;
            (curve, trace, report, "semi_implicit")
        }
        SdScheme::MinMove => {
            let rho0: Vec<f64> = (0..c.markers).map(|j| rho(2.0 * PI * j as f64 / c.markers as f64)).collect();
            let (rho, trace, report) = minmove_evolve(&rho0, c.horizon, opts, c.domain.as_ref())?;
            (radial_curve(&rho)?, trace, report, "minmove")
        }
    };
    let s: &[SdSample] = &trace.samples;
    let (first, last) = (s[0], s[s.len() - 1]);
    let area_drift = s.iter().map(|x| ((x.area - first.area) / first.area).abs()).fold(0.0, f64::max);
    let length_monotone = non_increasing(s.iter().map(|x| x.length), 1e-12 * first.length);
    let k_osc_monotone = non_increasing(s.iter().map(|x| x.k_osc), 1e-12);
    let expected_radius = (first.area / PI).sqrt();
    out.put("sd_trace.csv", &trace.to_csv())?;
    out.put("sd_curve.csv", &csv_table("x,y", curve.markers.iter().map(|p| vec![p[0], p[1]])))?;
    out.json(
        "sd.json",
        &json!({
            "scheme": scheme,
            "N": c.markers,
            "dt": c.dt,
            "T": c.horizon,
            "steps": report.steps,
            "converged_at": report.converged_at,
            "decay_rate": report.decay_rate,
            "limit_radius": report.limit_radius,
            "expected_radius": expected_radius,
            "area_drift": area_drift,
            "length_monotone": length_monotone,
            "k_osc_monotone": k_osc_monotone,
            "k_osc_final": last.k_osc,
            "domain_exit": report.domain_exit,
        }),
    )?;
    Ok(line(
        "evolve-sd",
        &[
            ("scheme", scheme.to_string()),
            ("steps", report.steps.to_string()),
            ("limit_radius", num(report.limit_radius)),
            ("expected_radius", num(expected_radius)),
            ("area_drift", num(area_drift)),
            ("length_monotone", length_monotone.to_string()),
            ("k_osc_monotone", k_osc_monotone.to_string()),
            ("k_osc_final", num(last.k_osc)),
            ("domain_exit", report.domain_exit.to_string()),
        ],
    ))
}

fn initial_profile(c: &DqopConfig) -> Result<(RadialProfile, &'static str), RunError> {
    let grid = c.domain.uniform_grid(c.grid_n);
    Ok(match c.init {
        DqopInit::Lift { r0 } => (lift_circle(r0, c.domain, c.grid_n)?.profile, "lift"),
        DqopInit::Stretched { r0, factor } => {
            let sol = solve_annular(r0 / c.domain.epsilon, c.domain)?;
            (stretched_annular(&sol, &grid, factor)?, "stretched")
        }
        DqopInit::Dimple { u_center } => {
            let sol = solve_dimple_from_center(u_center, c.domain)?;
            (dimple_profile(&sol, &grid)?, "dimple")
        }
        DqopInit::Constant { u_bar } => (RadialProfile::constant(u_bar, c.grid_n, c.domain), "constant"),
    })
}

fn evolve_dqop(c: &DqopConfig, out: &mut Out) -> Result<String, RunError> {
    let (u0, init) = initial_profile(c)?;
    let (state, trace, report) = dqop_evolve(&u0, c.horizon, c.tau, c.cadence, &c.options)?;
    let (first, last) = (trace.samples[0], trace.samples[trace.samples.len() - 1]);
    let inclusion = state.inclusion_residual();
    let d = diagnostics(&state);
    let p = &state.profile;
    let rows = (0..p.len()).map(|i| vec![p.grid[i], p.values[i], state.w[i]]);
    out.put("dqop_trace.csv", &trace.to_csv())?;
    out.put("dqop_profile.csv", &csv_table("r,u,w", rows))?;
    let mut meta = domain_json(&c.domain);
    for (k, v) in [
        ("init", json!(init)),
        ("grid_n", json!(c.grid_n)),
        ("tau", json!(c.tau)),
        ("T", json!(c.horizon)),
        ("steps", json!(report.steps)),
        ("halvings", json!(report.halvings)),
        ("mass_drift", json!(report.mass_drift)),
        ("max_energy_change", json!(report.max_energy_change)),
        ("energy_initial", json!(first.energy)),
        ("energy_final", json!(d.energy)),
        ("entropy_final", json!(d.entropy)),
        ("u_bar", json!(first.u_bar)),
        ("steady_residual", json!(inclusion)),
    ] {
        meta.insert(k.into(), v);
    }
    out.json("dqop.json", &Value::Object(meta))?;
    Ok(line(
        "evolve-dqop",
        &[
            ("init", init.to_string()),
            ("steps", report.steps.to_string()),
            ("halvings", report.halvings.to_string()),
            ("E0", num(first.energy)),
            ("E", num(last.energy)),
            ("u_bar", num(first.u_bar)),
            ("mass_drift", num(report.mass_drift)),
            ("max_energy_change", num(report.max_energy_change)),
            ("steady_residual", num(inclusion)),
        ],
    ))
}

fn bridge(c: &BridgeConfig, out: &mut Out) -> Result<String, RunError> {
    let rows = bridge_sweep(&c.epsilons, c.r0, c.radius, c.delta, c.grid_n)?;
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.abs_err).collect();
    let order = log_log_slope(&eps, &err).ok();
    let max_err = err.iter().cloned().fold(0.0, f64::max);
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let monotone = sorted.windows(2).all(|w| w[1].abs_err < w[0].abs_err);
    out.put("bridge.csv", &csv_table(BridgeRow::CSV_HEADER, rows.iter().map(|r| r.values().to_vec())))?;
    out.json(
        "bridge.json",
        &json!({
            "r0": c.r0,
            "R0": c.radius,
            "delta": c.delta,
            "grid_n": c.grid_n,
            "order": order,
            "max_abs_err": max_err,
            "abs_err_monotone": monotone,
        }),
    )?;
    let order_text = order.map_or("none".to_string(), num);
    Ok(line(
        "bridge-sweep",
        &[
            ("r0", num(c.r0)),
            ("points", rows.len().to_string()),
            ("order", order_text),
            ("max_abs_err", num(max_err)),
            ("abs_err_monotone", monotone.to_string()),
        ],
    ))
}

fn specfun_check(c: &SpecfunConfig, out: &mut Out) -> Result<String, RunError> {
    let ratio = (c.x_max / c.x_min).ln() / (c.points - 1) as f64;
    let xs: Vec<f64> = (0..c.points).map(|i| c.x_min * (ratio * i as f64).exp()).collect();
    let mut base = Vec::with_capacity(xs.len());
    for &x in &xs {
        let p = PolarEval::at(x)?;
        let target = 2.0 / (PI * x);
        let cross = ((p.m0 * p.m1 * (p.theta0 - p.theta1).sin() - target) / target).abs();
        let (m0sq, m1sq) = (p.m0 * p.m0, p.m1 * p.m1);
        let n0 = ((nicholson_modulus_sq(Order::Zero, x)? - m0sq) / m0sq).abs();
        let n1 = ((nicholson_modulus_sq(Order::One, x)? - m1sq) / m1sq).abs();
        base.push([x, cross, n0, n1, m0sq, m1sq]);
    }
    let slope = |i: usize, k: usize| {
        let (a, b) = if i + 1 < base.len() { (i, i + 1) } else { (i - 1, i) };
        (base[b][k] - base[a][k]) / (base[b][0] - base[a][0])
    };
    let rows: Vec<Vec<f64>> = (0..base.len())
        .map(|i| {
            let mut r = base[i].to_vec();
            r.push(slope(i, 4));
            r.push(slope(i, 5));
            r
        })
        .collect();
    let max_of = |k: usize| rows.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max);
    out.put(
        "specfun_check.csv",
        &csv_table("x,cross_rel,nicholson0_rel,nicholson1_rel,m0sq,m1sq,dm0sq_dx,dm1sq_dx", rows.clone()),
    )?;
    Ok(line(
        "specfun-check",
        &[
            ("points", rows.len().to_string()),
            ("max_cross_rel", num(max_of(1))),
            ("max_nicholson_rel", num(max_of(2).max(max_of(3)))),
            ("max_dm0sq_dx", num(max_of(6))),
            ("max_dm1sq_dx", num(max_of(7))),
        ],
    ))
}

/// Runs the configured command, writing its artifacts into the output
/// directory.
pub fn run(config: &RunConfig) -> Result<Summary, RunError> {
    let mut out = Out { dir: &config.output_dir, written: Vec::new() };
    let line = match &config.command {
        Command::SteadyAnnular(c) => steady_annular(c, &mut out)?,
        Command::SteadyDimple(c) => steady_dimple(c, &mut out)?,
        Command::EvolveSd(c) => evolve_sd(c, &mut out)?,
        Command::EvolveDqop(c) => evolve_dqop(c, &mut out)?,
        Command::BridgeSweep(c) => bridge(c, &mut out)?,
        Command::SpecfunCheck(c) => specfun_check(c, &mut out)?,
    };
    Ok(Summary { line, artifacts: out.written })
}
