//! Bias-current sweeps: linear ramps and quasi-static continuation.

use serde::{Deserialize, Serialize};

use super::{integrate_observed, IntegrationStats, IntegratorConfig};
use crate::characteristic::{fixed_point, FixedPoint};
use crate::error::{Error, Result};
use crate::model::{rhs_with_current, State3};
use crate::stability::is_unstable;

/// Piecewise-linear bias ramp `i_start -> i_peak -> i_end` at constant |di/dtau|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    pub i_start: f64,
    pub i_peak: f64,
    pub i_end: f64,
    pub rate: f64,
}

impl RampSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::invalid("rate", "ramp rate must be > 0"));
        }
        if ![self.i_start, self.i_peak, self.i_end].iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("ramp", "currents must be finite"));
        }
        Ok(())
    }

    pub fn rise_duration(&self) -> f64 {
        (self.i_peak - self.i_start).abs() / self.rate
    }

    pub fn fall_duration(&self) -> f64 {
        (self.i_end - self.i_peak).abs() / self.rate
    }

    /// Bias current at reduced time `tau`.
    pub fn current_at(&self, tau: f64) -> f64 {
        let t1 = self.rise_duration();
        if tau <= t1 {
            self.i_start + (self.i_peak - self.i_start).signum() * self.rate * tau
        } else {
            let t = (tau - t1).min(self.fall_duration());
            self.i_peak + (self.i_end - self.i_peak).signum() * self.rate * t
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RampPhase {
    Rising,
    Falling,
}

/// One output sample of a ramp, with the current split into its three parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSample {
    pub tau: f64,
    pub phase: RampPhase,
    pub i_tot: f64,
    pub v: f64,
    pub i_j: f64,
    pub i_s: f64,
    /// Resistive current `v`.
    pub i_res: f64,
    /// Capacitive current `dv/dtau`.
    pub i_cap: f64,
}

/// Lowest-|v| linearly stable equilibrium at bias `i_tot`.
pub fn resting_state(alpha: f64, i_tot: f64) -> State3 {
    let fps = fixed_point(alpha, i_tot);
    fps.iter()
        .filter(|fp| !is_unstable(alpha, fp.v0))
        .min_by(|a, b| a.v0.abs().total_cmp(&b.v0.abs()))
        .or_else(|| fps.first())
        .map(FixedPoint::state)
        .unwrap_or_default()
}

/// Integrates the autonomous system under a linear bias ramp starting from the
/// resting state at `ramp.i_start`.
pub fn ramp_sweep(alpha: f64, ramp: &RampSpec, cfg: &IntegratorConfig) -> Result<Vec<RampSample>> {
    ramp_sweep_from(alpha, ramp, cfg, resting_state(alpha, ramp.i_start)).map(|(s, _)| s)
}

/// [`ramp_sweep`] from an explicit initial state; also returns integrator counters.
pub fn ramp_sweep_from(
    alpha: f64,
    ramp: &RampSpec,
    cfg: &IntegratorConfig,
    s0: State3,
) -> Result<(Vec<RampSample>, IntegrationStats)> {
    ramp.validate()?;
    cfg.validate()?;
    let t_rise = ramp.rise_duration();
    let t_fall = ramp.fall_duration();
    let mut samples = Vec::new();
    let mut stats = IntegrationStats::default();
    let mut state = s0.to_array();
    let mut t_start = 0.0;

    for (phase, duration) in [(RampPhase::Rising, t_rise), (RampPhase::Falling, t_fall)] {
        if duration <= 0.0 {
            continue;
        }
        let span = (t_start, t_start + duration);
        let skip_first = !samples.is_empty();
        let r = *ramp;
        let mut first = true;
        let out = integrate_observed(
            |tau, y: &[f64; 3]| rhs_with_current(alpha, r.current_at(tau), &State3::from(*y)).to_array(),
            state,
            span,
            cfg,
            |tau, y| {
                if first && skip_first {
                    first = false;
                    return;
                }
                first = false;
                let s = State3::from(*y);
                let i_tot = r.current_at(tau);
                let d = rhs_with_current(alpha, i_tot, &s);
                samples.push(RampSample {
                    tau,
                    phase,
                    i_tot,
                    v: s.v,
                    i_j: s.i_j,
                    i_s: s.i_s,
                    i_res: s.v,
                    i_cap: d.v,
                });
            },
        )?;
        stats.merge(&out.stats);
        state = out.end_state;
        t_start = span.1;
    }
    Ok((samples, stats))
}

/// Bias currents at which the voltage leaves a stable branch during a ramp.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpReport {
    /// Rising-phase current at which `v` first exceeds the fold voltage `v_-`.
    pub up: Option<f64>,
    /// Falling-phase current at which `v` first drops below the fold voltage `v_+`.
    pub down: Option<f64>,
}

/// Locates the switching currents of a ramp by the crossing of the fold
/// voltages of the characteristic; the current is linearly interpolated
/// between the bracketing samples.
pub fn locate_jumps(samples: &[RampSample], v_minus: f64, v_plus: f64) -> JumpReport {
    let crossing = |phase: RampPhase, above: bool, level: f64| {
        let mut prev: Option<&RampSample> = None;
        for s in samples.iter().filter(|s| s.phase == phase) {
            if let Some(p) = prev {
                let hit = if above {
                    p.v <= level && s.v > level
                } else {
                    p.v >= level && s.v < level
                };
                if hit {
                    let w = (level - p.v) / (s.v - p.v);
                    return Some(p.i_tot + w * (s.i_tot - p.i_tot));
                }
            }
            prev = Some(s);
        }
        None
    };
    JumpReport {
        up: crossing(RampPhase::Rising, true, v_minus),
        down: crossing(RampPhase::Falling, false, v_plus),
    }
}

/// Settling test used by [`continuation_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettleCriteria {
    /// Length of each observation window in reduced time.
    pub window: f64,
    /// Peak-to-peak bound on `v` within a window.
    pub amplitude: f64,
    /// Consecutive quiet windows required.
    pub consecutive: usize,
    /// Give up after this many windows.
    pub max_windows: usize,
}

impl Default for SettleCriteria {
    fn default() -> Self {
        SettleCriteria {
            window: 20.0,
            amplitude: 1e-7,
            consecutive: 2,
            max_windows: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettledPoint {
    pub i_tot: f64,
    pub v: f64,
    pub i_j: f64,
    pub i_s: f64,
    pub settled: bool,
    /// Peak-to-peak of `v` in the last observed window.
    pub amplitude: f64,
    pub tau_used: f64,
}

/// Quasi-static sweep: each bias is integrated to rest starting from the
/// previous endpoint (the first from the resting state at `i_values[0]`).
pub fn continuation_sweep(alpha: f64, i_values: &[f64], cfg: &IntegratorConfig) -> Result<Vec<SettledPoint>> {
    let Some(&first) = i_values.first() else {
        return Ok(Vec::new());
    };
    continuation_sweep_from(alpha, i_values, cfg, &SettleCriteria::default(), resting_state(alpha, first))
}

pub fn continuation_sweep_from(
    alpha: f64,
    i_values: &[f64],
    cfg: &IntegratorConfig,
    criteria: &SettleCriteria,
    s0: State3,
) -> Result<Vec<SettledPoint>> {
    cfg.validate()?;
    if !(criteria.window > 0.0 && criteria.amplitude > 0.0 && criteria.consecutive > 0) {
        return Err(Error::invalid("settle", "window, amplitude and consecutive must be positive"));
    }
    let mut state = s0.to_array();
    let mut out = Vec::with_capacity(i_values.len());
    for &i_tot in i_values {
        let rhs = |_: f64, y: &[f64; 3]| rhs_with_current(alpha, i_tot, &State3::from(*y)).to_array();
        let mut quiet = 0usize;
        let mut amplitude = f64::INFINITY;
        let mut windows = 0usize;
        let mut tau = 0.0;
        while quiet < criteria.consecutive && windows < criteria.max_windows {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let r = integrate_observed(rhs, state, (tau, tau + criteria.window), cfg, |_, y| {
                lo = lo.min(y[0]);
                hi = hi.max(y[0]);
            })?;
            state = r.end_state;
            tau += criteria.window;
            windows += 1;
            amplitude = hi - lo;
            if amplitude < criteria.amplitude {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        let s = State3::from(state);
        out.push(SettledPoint {
            i_tot,
            v: s.v,
            i_j: s.i_j,
            i_s: s.i_s,
            settled: quiet >= criteria.consecutive,
            amplitude,
            tau_used: tau,
        });
    }
    Ok(out)
}
