//! Time integration with two independent methods and uniform dense output.
//!
//! * [`Method::DormandPrince`]: embedded Runge-Kutta 5(4) with error control and
//!   PI step-size control; output samples come from cubic Hermite interpolation
//!   on accepted steps.
//! * [`Method::Rk4`]: classical fixed-step RK4 whose step divides `dt_out`, so
//!   output samples are integration nodes.
//!
//! Right-hand sides are plain closures `FnMut(t, &[f64; N]) -> [f64; N]`.

mod dopri;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs_autonomous, rhs_driven, DimensionlessParams, State3};

pub use sweep::{
    continuation_sweep, continuation_sweep_from, locate_jumps, ramp_sweep, ramp_sweep_from, resting_state, JumpReport,
    RampPhase, RampSample, RampSpec, SettleCriteria, SettledPoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    /// Adaptive embedded Runge-Kutta 5(4).
    DormandPrince,
    /// Fixed-step classical Runge-Kutta; `dt` is an upper bound on the step.
    Rk4 { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when absent.
    pub dt_init: Option<f64>,
    pub dt_max: Option<f64>,
    /// Steps below this abort the run.
    pub dt_min: f64,
    /// Output sampling interval.
    pub dt_out: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::DormandPrince,
            rtol: 1e-9,
            atol: 1e-9,
            dt_init: None,
            dt_max: None,
            dt_min: 1e-14,
            dt_out: 0.1,
            max_steps: 200_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Sampling suited to spectra of oscillations up to a few times `v0 <= 40`.
    pub fn spectral() -> Self {
        IntegratorConfig {
            dt_out: 1e-3,
            ..Self::default()
        }
    }

    pub fn sweep() -> Self {
        Self::default()
    }

    pub fn with_rk4(mut self, dt: f64) -> Self {
        self.method = Method::Rk4 { dt };
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_dt_out(mut self, dt_out: f64) -> Self {
        self.dt_out = dt_out;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::invalid("rtol/atol", "tolerances must be > 0"));
        }
        if !(self.dt_out > 0.0 && self.dt_out.is_finite()) {
            return Err(Error::invalid("dt_out", "must be > 0"));
        }
        if !(self.dt_min >= 0.0) {
            return Err(Error::invalid("dt_min", "must be >= 0"));
        }
        if let Some(h) = self.dt_init {
            if !(h > 0.0) {
                return Err(Error::invalid("dt_init", "must be > 0"));
            }
        }
        if let Some(h) = self.dt_max {
            if !(h > 0.0) {
                return Err(Error::invalid("dt_max", "must be > 0"));
            }
        }
        if let Method::Rk4 { dt } = self.method {
            if !(dt > 0.0 && dt <= self.dt_out) {
                return Err(Error::invalid("dt", format!("fixed step must satisfy 0 < dt <= dt_out, got {dt}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl IntegrationStats {
    pub fn merge(&mut self, o: &IntegrationStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

/// Final state of a run plus counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<const N: usize> {
    pub end_time: f64,
    pub end_state: [f64; N],
    pub stats: IntegrationStats,
}

/// Uniformly sampled solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub end_time: f64,
    pub end_state: [f64; N],
    pub stats: IntegrationStats,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// Sample spacing, if the trajectory is uniform.
    pub fn spacing(&self) -> Result<f64> {
        if self.t.len() < 2 {
            return Err(Error::TooFewSamples { got: self.t.len(), min: 2 });
        }
        let n = self.t.len();
        let dt = (self.t[n - 1] - self.t[0]) / (n - 1) as f64;
        let tol = 1e-9 * dt + 64.0 * f64::EPSILON * self.t[n - 1].abs().max(self.t[0].abs());
        for k in 1..n {
            if ((self.t[k] - self.t[k - 1]) - dt).abs() > tol {
                return Err(Error::NonUniform { index: k });
            }
        }
        Ok(dt)
    }
}

impl Trajectory<3> {
    pub fn state3(&self, k: usize) -> State3 {
        State3::from(self.states[k])
    }
}

/// Number of output samples `t0 + k dt_out <= t1` (with rounding slack).
pub(crate) fn output_count(t0: f64, t1: f64, dt_out: f64) -> usize {
    ((t1 - t0) / dt_out * (1.0 + 1e-12) + 1e-9).floor() as usize + 1
}

/// Integrates `rhs` over `span`, handing every output sample to `observe`.
pub fn integrate_observed<const N: usize, F, O>(
    rhs: F,
    y0: [f64; N],
    span: (f64, f64),
    cfg: &IntegratorConfig,
    observe: O,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]),
{
    cfg.validate()?;
    let (t0, t1) = span;
    if !(t1 > t0) {
        return Err(Error::invalid("tau_span", format!("end {t1} must exceed start {t0}")));
    }
    if y0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { t: t0 });
    }
    match cfg.method {
        Method::DormandPrince => dopri::run(rhs, y0, t0, t1, cfg, observe),
        Method::Rk4 { dt } => rk4_run(rhs, y0, t0, t1, dt, cfg, observe),
    }
}

/// Integrates and collects the full uniform trajectory.
pub fn integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    integrate_window(rhs, y0, span, cfg, span)
}

/// Integrates over `span` but keeps only samples with `window.0 <= t <= window.1`.
pub fn integrate_window<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    span: (f64, f64),
    cfg: &IntegratorConfig,
    window: (f64, f64),
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let slack = 1e-9 * cfg.dt_out;
    let mut t = Vec::new();
    let mut states = Vec::new();
    let out = integrate_observed(rhs, y0, span, cfg, |tk, y| {
        if tk >= window.0 - slack && tk <= window.1 + slack {
            t.push(tk);
            states.push(*y);
        }
    })?;
    Ok(Trajectory {
        t,
        states,
        end_time: out.end_time,
        end_state: out.end_state,
        stats: out.stats,
    })
}

/// Integrates the reduced system; uses the driven right-hand side when `p` carries a drive.
pub fn integrate_reduced(
    p: &DimensionlessParams,
    s0: State3,
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory<3>> {
    let p = *p;
    if p.drive.is_some() {
        integrate(move |t, y| rhs_driven(&p, &State3::from(*y), t).to_array(), s0.to_array(), span, cfg)
    } else {
        integrate(move |_, y| rhs_autonomous(&p, &State3::from(*y)).to_array(), s0.to_array(), span, cfg)
    }
}

#[inline]
pub(crate) fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

pub(crate) fn check_finite<const N: usize>(t: f64, y: &[f64; N]) -> Result<()> {
    if y.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

fn rk4_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(t + h, &axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn rk4_run<const N: usize, F, O>(
    mut rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    dt: f64,
    cfg: &IntegratorConfig,
    mut observe: O,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]),
{
    let sub = (cfg.dt_out / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = cfg.dt_out / sub as f64;
    let n_out = output_count(t0, t1, cfg.dt_out);
    let mut stats = IntegrationStats::default();
    let mut y = y0;
    observe(t0, &y);
    let mut t = t0;
    for k in 1..n_out {
        let start = t0 + (k - 1) as f64 * cfg.dt_out;
        for j in 0..sub {
            let tj = start + j as f64 * h;
            y = rk4_step(&mut rhs, tj, &y, h);
            stats.accepted += 1;
            stats.evaluations += 4;
        }
        t = t0 + k as f64 * cfg.dt_out;
        check_finite(t, &y)?;
        observe(t, &y);
        if stats.accepted > cfg.max_steps {
            return Err(Error::MaxSteps(cfg.max_steps));
        }
    }
    // tail shorter than dt_out
    let mut rest = t1 - t;
    while rest > 1e-12 * cfg.dt_out {
        let step = rest.min(h);
        y = rk4_step(&mut rhs, t, &y, step);
        stats.accepted += 1;
        stats.evaluations += 4;
        t += step;
        rest = t1 - t;
    }
    check_finite(t1, &y)?;
    Ok(Outcome {
        end_time: t1,
        end_state: y,
        stats,
    })
}
