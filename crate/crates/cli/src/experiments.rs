//! One function per experiment; each turns settings into a data table plus
//! derived quantities for the summary.

use serde_json::{json, Map, Value};

use jjsim_core::analysis::{
    detect_attractor, dominant_frequency, harmonic_balance, power_spectrum, basin_threshold_with,
    shapiro_staircase_with, AttractorCriteria, BasinOptions, Field, ShapiroOptions, Window,
};
use jjsim_core::characteristic::{critical_current, extrema, i_of_v, squid_effective_alpha, FixedPoint};
use jjsim_core::integrate::{
    integrate_reduced, integrate_window, locate_jumps, ramp_sweep_from, resting_state, IntegrationStats,
    IntegratorConfig, Method, RampSpec,
};
use jjsim_core::model::rhs_with_current;
use jjsim_core::radiation::{efficiency_cavity, efficiency_from_rate, efficiency_open_space, purcell_factor, RadiationParams};
use jjsim_core::stability::eigenvalues;
use jjsim_core::{Complex64, DimensionlessParams, PhysicalConstants, PhysicalParams, State3};

use crate::config::{Experiment, Settings};
use crate::error::CliError;
use crate::output::{col, col_si, Table};

const K: PhysicalConstants = PhysicalConstants::CODATA_2018;

pub struct Report {
    pub table: Table,
    pub derived: Map<String, Value>,
    pub integrator: Option<(IntegratorConfig, IntegrationStats)>,
}

impl Report {
    fn new(table: Table) -> Self {
        Report {
            table,
            derived: Map::new(),
            integrator: None,
        }
    }

    fn put(&mut self, key: &str, value: Value) {
        self.derived.insert(key.to_string(), value);
    }
}

pub fn run(s: &mut Settings) -> Result<Report, CliError> {
    let mut report = match s.experiment {
        Experiment::Characteristic => characteristic(s)?,
        Experiment::Stability => stability(s)?,
        Experiment::Sweep => sweep(s)?,
        Experiment::Shapiro => shapiro(s)?,
        Experiment::Attractor => attractor(s)?,
        Experiment::Basin => basin(s)?,
        Experiment::Spectrum => spectrum(s)?,
        Experiment::HarmonicBalance => harmonic(s)?,
        Experiment::Squid => squid(s)?,
        Experiment::Radiation => radiation(s)?,
        Experiment::Simulate => simulate(s)?,
    };
    common_derived(s, &mut report)?;
    report.table.sort();
    Ok(report)
}

/// Extrema of the characteristic and the spectrum of the starting equilibrium.
fn common_derived(s: &mut Settings, r: &mut Report) -> Result<(), CliError> {
    let Some(alpha) = s.number("alpha") else {
        return Ok(());
    };
    let e = extrema(alpha)?;
    r.put("i_c", json!(e.i_c));
    r.put("i_r", json!(e.i_r));
    r.put("v_minus", json!(e.v_minus));
    r.put("v_plus", json!(e.v_plus));
    r.put("hysteretic", json!(e.is_hysteretic()));
    if let Some(v0) = s.number("v0") {
        let st = eigenvalues(alpha, v0);
        let eig: Vec<[f64; 2]> = st.eigenvalues().iter().map(|z| [z.re, z.im]).collect();
        r.put("eigenvalues", json!(eig));
        r.put("unstable", json!(st.unstable));
    }
    Ok(())
}

fn integrator(s: &mut Settings, dt_out_default: f64) -> IntegratorConfig {
    let dt_out = s.number_or("dt_out", dt_out_default);
    let rtol = s.number_or("rtol", 1e-9);
    let atol = s.number_or("atol", 1e-9);
    let cfg = IntegratorConfig::default().with_tolerances(rtol, atol).with_dt_out(dt_out);
    if s.text_or("method", "adaptive") == "rk4" {
        let dt = s.number_or("dt", dt_out.min(1e-3));
        cfg.with_rk4(dt)
    } else {
        cfg
    }
}

pub fn method_name(cfg: &IntegratorConfig) -> &'static str {
    match cfg.method {
        Method::DormandPrince => "adaptive",
        Method::Rk4 { .. } => "rk4",
    }
}

fn linspace(s: &mut Settings, lo_key: &str, lo: f64, hi_key: &str, hi: f64, n_key: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let a = s.number_or(lo_key, lo);
    let b = s.number_or(hi_key, hi);
    let n = s.count_or(n_key, n);
    if n < 2 {
        return Err(CliError::invalid(n_key, format!("{n_key} must be >= 2")));
    }
    if !(b > a) {
        return Err(CliError::invalid(hi_key, format!("{hi_key} must exceed {lo_key}")));
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Starting point: the equilibrium at `v0` if given, else the resting state
/// at `i_tot`, shifted by `delta_is`.
fn start_state(s: &mut Settings, alpha: f64, delta_default: f64) -> Result<(f64, State3), CliError> {
    let delta = State3::new(0.0, 0.0, s.number_or("delta_is", delta_default));
    if let Some(v0) = s.number("v0") {
        let i_tot = s.number("i_tot").unwrap_or_else(|| i_of_v(alpha, v0));
        Ok((i_tot, FixedPoint::at_voltage(alpha, v0).state() + delta))
    } else {
        let i_tot = s.require("i_tot")?;
        Ok((i_tot, resting_state(alpha, i_tot) + delta))
    }
}

fn characteristic(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let grid = linspace(s, "v_min", 0.0, "v_max", 10.0, "points", 1000)?;
    let mut t = Table::new(vec![col("v"), col("i_tot")]);
    for v in grid {
        t.push(vec![v, i_of_v(alpha, v)]);
    }
    Ok(Report::new(t))
}

fn stability(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let grid = linspace(s, "v_min", 0.0, "v_max", 10.0, "points", 1000)?;
    let mut t = Table::new(vec![
        col("v0"),
        col("i_tot"),
        col("lambda0"),
        col("kappa"),
        col("eta"),
        col("slope"),
        col("unstable"),
    ]);
    let (mut unstable, mut max_kappa) = (0usize, f64::NEG_INFINITY);
    for v0 in grid {
        let r = eigenvalues(alpha, v0);
        unstable += r.unstable as usize;
        max_kappa = max_kappa.max(r.kappa);
        t.push(vec![v0, i_of_v(alpha, v0), r.lambda0, r.kappa, r.eta, r.slope, r.unstable as u8 as f64]);
    }
    let mut r = Report::new(t);
    r.put("unstable_points", json!(unstable));
    r.put("max_kappa", json!(max_kappa));
    Ok(r)
}

fn sweep(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let ramp = RampSpec {
        i_start: s.number_or("i_start", 0.0),
        i_peak: s.number_or("i_peak", 15.0),
        i_end: s.number_or("i_end", 0.0),
        rate: s.number_or("rate", 0.01),
    };
    let cfg = integrator(s, 0.1);
    let (samples, stats) = ramp_sweep_from(alpha, &ramp, &cfg, resting_state(alpha, ramp.i_start))?;
    let mut t = Table::new(vec![col("tau"), col("i_tot"), col("v"), col("i_j"), col("i_res"), col("i_cap")]);
    for x in &samples {
        t.push(vec![x.tau, x.i_tot, x.v, x.i_j, x.i_res, x.i_cap]);
    }
    let mut r = Report::new(t);
    if let (Some(lo), Some(hi)) = {
        let e = extrema(alpha)?;
        (e.v_minus, e.v_plus)
    } {
        let jumps = locate_jumps(&samples, lo, hi);
        r.put("jump_up", json!(jumps.up));
        r.put("jump_down", json!(jumps.down));
    }
    r.integrator = Some((cfg, stats));
    Ok(r)
}

fn shapiro(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let omega_f = s.number_or("omega_f", 20.0);
    let v_f = s.number_or("v_f", 300.0);
    let lo = s.number_or("i_min", 0.0);
    let hi = s.number_or("i_max", 110.0);
    let step = s.number_or("i_step", 0.2);
    if !(hi >= lo) {
        return Err(CliError::invalid("i_max", "i_max must be >= i_min"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|k| lo + k as f64 * step).collect();
    let opts = ShapiroOptions {
        tolerance: s.number_or("plateau_tol", 0.01),
        continuation: s.flag_or("continuation", true),
        ..ShapiroOptions::default()
    };
    let cfg = integrator(s, 0.1);
    let st = shapiro_staircase_with(alpha, omega_f, v_f, &grid, &cfg, &opts)?;
    let mut t = Table::new(vec![col("i_tot"), col("v_mean"), col("v_over_omega_f")]);
    for p in &st.points {
        t.push(vec![p.i_tot, p.v_mean, p.v_mean / omega_f]);
    }
    let mut r = Report::new(t);
    r.put("plateau_count", json!(st.plateaus.len()));
    r.put("plateaus", serde_json::to_value(&st.plateaus).expect("plateaus serialize"));
    r.integrator = Some((cfg, st.stats));
    Ok(r)
}

fn attractor(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let v0 = s.require("v0")?;
    let delta = State3::new(0.0, 0.0, s.number_or("delta_is", -0.1));
    let horizon = s.number_or("tau_max", 5000.0);
    let cfg = integrator(s, 0.01);
    let verdict = detect_attractor(alpha, v0, delta, horizon, &cfg)?;

    // the verdict keeps only summary numbers; rerun to export the final window
    let window = AttractorCriteria::default().window;
    let i_tot = i_of_v(alpha, v0);
    let s0 = FixedPoint::at_voltage(alpha, v0).state() + delta;
    let traj = integrate_window(
        |_, y: &[f64; 3]| rhs_with_current(alpha, i_tot, &State3::from(*y)).to_array(),
        s0.to_array(),
        (0.0, horizon),
        &cfg,
        (horizon - window, horizon),
    )?;
    let mut stats = verdict.stats;
    stats.merge(&traj.stats);

    let mut r = Report::new(trajectory_table(&traj.t, &traj.states));
    r.put("persistent", json!(verdict.persistent));
    r.put("omega_fund", json!(verdict.omega_fund));
    r.put("amplitude", json!(verdict.amplitude));
    r.put("decay_ratio", json!(verdict.decay_ratio));
    r.put("i_tot", json!(i_tot));
    r.put("end_state", json!(verdict.end_state.to_array()));
    r.integrator = Some((cfg, stats));
    Ok(r)
}

fn basin(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let v0 = s.require("v0")?;
    let direction = State3::new(
        s.number_or("dir_v", 0.0),
        s.number_or("dir_ij", 0.0),
        s.number_or("dir_is", -1.0),
    );
    let opts = BasinOptions {
        horizon: s.number_or("tau_max", 5000.0),
        floor: s.number_or("floor", 1e-8),
        ceiling: s.number_or("ceiling", 1.0),
        resolution_decades: s.number_or("resolution", 1.0),
        criteria: AttractorCriteria::default(),
    };
    let cfg = integrator(s, 0.01);
    let b = basin_threshold_with(alpha, v0, direction, &cfg, &opts)?;
    let mut t = Table::new(vec![col("lower"), col("upper"), col("probes")]);
    t.push(vec![b.lower, b.upper, b.probes as f64]);
    let mut r = Report::new(t);
    r.put("lower", json!(b.lower));
    r.put("upper", json!(b.upper));
    Ok(r)
}

fn spectrum(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let (i_tot, s0) = start_state(s, alpha, -0.1)?;
    let horizon = s.number_or("tau_max", 500.0);
    let field = match s.text_or("field", "i_j").as_str() {
        "v" => Field::V,
        "i_j" => Field::IJ,
        "i_s" => Field::IS,
        other => return Err(CliError::invalid("field", format!("field must be v, i_j or i_s, got {other:?}"))),
    };
    let cfg = integrator(s, 0.01);
    let p = DimensionlessParams::new(alpha, i_tot)?;
    let full = integrate_reduced(&p, s0, (0.0, horizon), &cfg)?;
    // analyse the second half, past the transient
    let start = full.t.partition_point(|&t| t < 0.5 * horizon);
    let traj = jjsim_core::integrate::Trajectory {
        t: full.t[start..].to_vec(),
        states: full.states[start..].to_vec(),
        ..full
    };
    let spec = power_spectrum(&traj, field, Window::Hann)?;
    let omega = dominant_frequency(&spec)?;
    let mut t = Table::new(vec![col("omega"), col("power")]);
    for (w, pw) in spec.omega.iter().zip(&spec.power) {
        t.push(vec![*w, *pw]);
    }
    let mut r = Report::new(t);
    r.put("omega_fund", json!(omega));
    r.put("total_power", json!(spec.total_power()));
    r.put("i_tot", json!(i_tot));
    r.integrator = Some((cfg, traj.stats));
    Ok(r)
}

fn harmonic(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let i_tot = s.require("i_tot")?;
    let hb = harmonic_balance(alpha, i_tot);
    let mut t = Table::new(vec![
        col("i_tot"),
        col("v0"),
        col("omega_est"),
        col("zeta0_re"),
        col("zeta0_im"),
        col("coupling"),
        col("in_regime"),
        col("v1_consistency"),
    ]);
    t.push(vec![
        i_tot,
        hb.v0,
        hb.omega_est,
        hb.zeta0.re,
        hb.zeta0.im,
        hb.coupling,
        hb.in_regime as u8 as f64,
        hb.v1_consistency as u8 as f64,
    ]);
    let mut r = Report::new(t);
    r.put("omega_fund", json!(hb.omega_est));
    r.put("in_regime", json!(hb.in_regime));
    r.put("v1_consistency", json!(hb.v1_consistency));
    Ok(r)
}

fn squid(s: &mut Settings) -> Result<Report, CliError> {
    let k_a = s.number_or("k_a", 2.0);
    let k_b = s.number_or("k_b", 1.5);
    let n = s.count_or("flux_points", 201);
    let periods = s.number_or("periods", 2.0);
    if n < 2 {
        return Err(CliError::invalid("flux_points", "flux_points must be >= 2"));
    }
    if !(periods > 0.0) {
        return Err(CliError::invalid("periods", "periods must be > 0"));
    }
    let period = K.flux_period();
    let mut t = Table::new(vec![col_si("phi_si", "Wb"), col("alpha_eff"), col("i_c")]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..n {
        let phi = periods * period * k as f64 / (n - 1) as f64;
        let a = squid_effective_alpha(k_a, k_b, phi, 1.0, &K)?;
        let ic = critical_current(a)?;
        lo = lo.min(ic);
        hi = hi.max(ic);
        t.push(vec![phi, a, ic]);
    }
    let mut r = Report::new(t);
    r.put("flux_period_si", json!(period));
    r.put("i_c_max", json!(hi));
    r.put("i_c_min", json!(lo));
    Ok(r)
}

fn radiation(s: &mut Settings) -> Result<Report, CliError> {
    let voltage = s.number_or("voltage_si", 1e-3);
    let ell = s.number_or("ell_si", 1e-9);
    let capacitance = s.number_or("capacitance_si", 3e-13);
    let resistance = s.number_or("resistance_si", 50.0);
    let current = s.number_or("current_si", 1e-3);
    let i_c = s.number_or("i_c_si", 1e-3);
    let p = PhysicalParams::new(resistance, capacitance, Complex64::new(0.0, 0.0), current)?;
    let mut rp = RadiationParams::from_voltage(voltage, ell, &K)?;
    let eta = efficiency_open_space(&p, &K, voltage, ell, i_c)?;
    let eta_rate = efficiency_from_rate(rp.gamma_e, capacitance, i_c, current, &K)?;

    let mut cols = vec![
        col_si("voltage_si", "V"),
        col_si("omega_a_si", "rad/s"),
        col_si("gamma_e_si", "1/s"),
        col("eta_open"),
    ];
    let mut row = vec![voltage, rp.omega_a, rp.gamma_e, eta];
    let mut r_derived = vec![
        ("gamma_e_si", json!(rp.gamma_e)),
        ("omega_a_si", json!(rp.omega_a)),
        ("lambda_a_si", json!(rp.lambda_a)),
        ("eta_open", json!(eta)),
        ("eta_from_rate", json!(eta_rate)),
    ];
    if let Some(q) = s.number("q") {
        let l = s.require("cavity_l_si")?;
        rp = rp.with_cavity(q, l)?;
        let eta_c = efficiency_cavity(eta, q)?;
        cols.push(col("eta_cavity"));
        row.push(eta_c);
        r_derived.push(("eta_cavity", json!(eta_c)));
        r_derived.push(("purcell_factor", json!(purcell_factor(q, rp.lambda_a, l))));
        r_derived.push(("gamma_eff_si", json!(rp.effective_rate()?)));
    }
    let mut t = Table::new(cols);
    t.push(row);
    let mut r = Report::new(t);
    for (k, v) in r_derived {
        r.put(k, v);
    }
    Ok(r)
}

fn simulate(s: &mut Settings) -> Result<Report, CliError> {
    let alpha = s.require("alpha")?;
    let (i_tot, s0) = start_state(s, alpha, 0.0)?;
    let horizon = s.number_or("tau_max", 100.0);
    let mut p = DimensionlessParams::new(alpha, i_tot)?;
    if let Some(v_f) = s.number("v_f") {
        p = p.with_drive(v_f, s.number_or("omega_f", 20.0))?;
    }
    let cfg = integrator(s, 0.1);
    let traj = integrate_reduced(&p, s0, (0.0, horizon), &cfg)?;
    let mut r = Report::new(trajectory_table(&traj.t, &traj.states));
    r.put("i_tot", json!(i_tot));
    r.put("end_state", json!(traj.end_state));
    r.integrator = Some((cfg, traj.stats));
    Ok(r)
}

fn trajectory_table(t: &[f64], states: &[[f64; 3]]) -> Table {
    let mut table = Table::new(vec![col("tau"), col("v"), col("i_j"), col("i_s")]);
    for (tk, y) in t.iter().zip(states) {
        table.push(vec![*tk, y[0], y[1], y[2]]);
    }
    table
}
