//! Measurements on trajectories: spectra, attractor detection, basin probing,
//! harmonic balance and Shapiro staircases.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::characteristic::{fixed_point, i_of_v, zeta0, FixedPoint};
use crate::error::{Error, Result};
use crate::integrate::{integrate_observed, IntegrationStats, IntegratorConfig, Trajectory};
use crate::model::{rhs_driven, rhs_with_current, DimensionlessParams, State3};
use crate::stability::is_unstable;

/// Minimum number of samples accepted by [`power_spectrum`].
pub const MIN_SPECTRUM_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    V,
    IJ,
    IS,
}

impl Field {
    pub fn index(self) -> usize {
        match self {
            Field::V => 0,
            Field::IJ => 1,
            Field::IS => 2,
        }
    }
}

/// One-sided power spectrum.
///
/// Normalized so that `power.iter().sum()` equals the mean square of the
/// windowed, mean-subtracted signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Angular frequency of each bin, spacing `2 pi / (n dt)`.
    pub omega: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.omega.get(1).copied().unwrap_or(0.0)
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

pub fn window_weights(window: Window, n: usize) -> Vec<f64> {
    match window {
        Window::Rectangular => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1).max(1) as f64).cos())
            .collect(),
    }
}

/// Spectrum of one field of a uniformly sampled trajectory.
pub fn power_spectrum(traj: &Trajectory<3>, field: Field, window: Window) -> Result<Spectrum> {
    if traj.len() < MIN_SPECTRUM_SAMPLES {
        return Err(Error::TooFewSamples {
            got: traj.len(),
            min: MIN_SPECTRUM_SAMPLES,
        });
    }
    let dt = traj.spacing()?;
    power_spectrum_samples(&traj.component(field.index()), dt, window)
}

/// Spectrum of samples taken every `dt`.
pub fn power_spectrum_samples(x: &[f64], dt: f64, window: Window) -> Result<Spectrum> {
    let n = x.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n,
            min: MIN_SPECTRUM_SAMPLES,
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "sample spacing must be > 0"));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let w = window_weights(window, n);
    let mut buf: Vec<Complex64> = x
        .iter()
        .zip(&w)
        .map(|(xi, wi)| Complex64::new((xi - mean) * wi, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let norm = 1.0 / (n as f64 * n as f64);
    let d_omega = 2.0 * PI / (n as f64 * dt);
    let mut omega = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    for (k, c) in buf.iter().enumerate().take(half + 1) {
        let both_sides = k != 0 && !(n.is_multiple_of(2) && k == half);
        let p = c.norm_sqr() * norm * if both_sides { 2.0 } else { 1.0 };
        omega.push(k as f64 * d_omega);
        power.push(p);
    }
    Ok(Spectrum { omega, power })
}

/// Frequency of the strongest non-zero bin, refined by a parabola through
/// the peak and its two neighbours.
pub fn dominant_frequency(spec: &Spectrum) -> Result<f64> {
    let p = &spec.power;
    let (k, &pk) = p
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::DegenerateSpectrum)?;
    let scale = p.iter().fold(0.0f64, |m, x| m.max(*x));
    if !(pk > 0.0) || pk <= 1e-300 || pk < 1e-14 * scale {
        return Err(Error::DegenerateSpectrum);
    }
    let dw = spec.bin_width();
    if k + 1 >= p.len() {
        return Ok(spec.omega[k]);
    }
    let (a, b, c) = (p[k - 1], pk, p[k + 1]);
    let den = a - 2.0 * b + c;
    let shift = if den.abs() > 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
    Ok(spec.omega[k] + shift * dw)
}

/// Least-squares line `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("fit", "need at least two paired samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit", "abscissae are all equal"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Thresholds of the persistence test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorCriteria {
    /// Length of each of the two trailing comparison windows.
    pub window: f64,
    /// Minimum peak-to-peak of `i_J` in the final window.
    pub amplitude: f64,
    /// Minimum ratio final/previous window amplitude.
    pub decay_ratio: f64,
}

impl Default for AttractorCriteria {
    fn default() -> Self {
        AttractorCriteria {
            window: 150.0,
            amplitude: 1e-3,
            decay_ratio: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorVerdict {
    pub persistent: bool,
    /// Peak-to-peak of `i_J` in the final window.
    pub amplitude: f64,
    /// Dominant angular frequency of `i_J` in the final window, if it carries any power.
    pub omega_fund: Option<f64>,
    pub decay_ratio: f64,
    pub end_state: State3,
    pub stats: IntegrationStats,
}

/// Perturbs the equilibrium at voltage `v0` by `delta` and decides whether the
/// orbit is still oscillating at `horizon`.
pub fn detect_attractor(
    alpha: f64,
    v0: f64,
    delta: State3,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<AttractorVerdict> {
    detect_attractor_with(alpha, v0, delta, horizon, cfg, &AttractorCriteria::default())
}

pub fn detect_attractor_with(
    alpha: f64,
    v0: f64,
    delta: State3,
    horizon: f64,
    cfg: &IntegratorConfig,
    criteria: &AttractorCriteria,
) -> Result<AttractorVerdict> {
    if !(alpha >= 0.0 && alpha.is_finite() && v0.is_finite()) {
        return Err(Error::invalid("alpha", "alpha must be >= 0 and v0 finite"));
    }
    if is_unstable(alpha, v0) {
        return Err(Error::UnstableFixedPoint { v0 });
    }
    if !(criteria.window > 0.0 && horizon >= 2.0 * criteria.window) {
        return Err(Error::invalid("horizon", "must cover two comparison windows"));
    }
    let i_tot = i_of_v(alpha, v0);
    let s0 = FixedPoint::at_voltage(alpha, v0).state() + delta;
    let w0 = horizon - 2.0 * criteria.window;
    let w1 = horizon - criteria.window;
    let slack = 1e-9 * cfg.dt_out;

    let (mut lo0, mut hi0) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut last = Vec::new();
    let out = integrate_observed(
        |_, y: &[f64; 3]| rhs_with_current(alpha, i_tot, &State3::from(*y)).to_array(),
        s0.to_array(),
        (0.0, horizon),
        cfg,
        |t, y| {
            if t >= w1 - slack {
                last.push(y[1]);
            } else if t >= w0 - slack {
                lo0 = lo0.min(y[1]);
                hi0 = hi0.max(y[1]);
            }
        },
    )?;
    let ptp = |v: &[f64]| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
        hi - lo
    };
    let amplitude = ptp(&last);
    let previous = hi0 - lo0;
    let decay_ratio = if previous > 0.0 {
        amplitude / previous
    } else if amplitude > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let omega_fund = power_spectrum_samples(&last, cfg.dt_out, Window::Hann)
        .and_then(|s| dominant_frequency(&s))
        .ok()
        .filter(|_| amplitude > 0.0);
    Ok(AttractorVerdict {
        persistent: amplitude > criteria.amplitude && decay_ratio >= criteria.decay_ratio,
        amplitude,
        omega_fund,
        decay_ratio,
        end_state: State3::from(out.end_state),
        stats: out.stats,
    })
}

/// Decade bracket `[lower, upper]` with decay at `lower` and persistence at `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinBracket {
    pub lower: f64,
    pub upper: f64,
    /// Number of probes evaluated.
    pub probes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinOptions {
    pub horizon: f64,
    /// Smallest probed magnitude.
    pub floor: f64,
    /// Largest probed magnitude.
    pub ceiling: f64,
    /// Target bracket width in decades.
    pub resolution_decades: f64,
    pub criteria: AttractorCriteria,
}

impl Default for BasinOptions {
    fn default() -> Self {
        BasinOptions {
            horizon: 5000.0,
            floor: 1e-8,
            ceiling: 1.0,
            resolution_decades: 1.0,
            criteria: AttractorCriteria::default(),
        }
    }
}

/// Bisection in `log10` magnitude between a decaying and a persisting probe.
///
/// `persists(m)` reports whether a perturbation of magnitude `m` leads to a
/// persistent orbit. Fails with [`Error::NoAttractor`] when `ceiling` decays
/// and [`Error::PersistsAtFloor`] when `floor` already persists.
pub fn log_bisect<P>(mut persists: P, floor: f64, ceiling: f64, resolution_decades: f64) -> Result<BasinBracket>
where
    P: FnMut(f64) -> Result<bool>,
{
    if !(floor > 0.0 && ceiling > floor && resolution_decades > 0.0) {
        return Err(Error::invalid("basin", "need 0 < floor < ceiling and a positive resolution"));
    }
    if !persists(ceiling)? {
        return Err(Error::NoAttractor { max_magnitude: ceiling });
    }
    if persists(floor)? {
        return Err(Error::PersistsAtFloor { min_magnitude: floor });
    }
    let (mut lo, mut hi) = (floor.log10(), ceiling.log10());
    let mut probes = 2;
    while hi - lo > resolution_decades * (1.0 + 1e-12) {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        if persists(10f64.powf(mid))? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BasinBracket {
        lower: 10f64.powf(lo),
        upper: 10f64.powf(hi),
        probes,
    })
}

/// Size of the smallest perturbation along `direction` that reaches a
/// persistent orbit, to within one decade.
pub fn basin_threshold(alpha: f64, v0: f64, direction: State3, cfg: &IntegratorConfig) -> Result<BasinBracket> {
    basin_threshold_with(alpha, v0, direction, cfg, &BasinOptions::default())
}

pub fn basin_threshold_with(
    alpha: f64,
    v0: f64,
    direction: State3,
    cfg: &IntegratorConfig,
    opts: &BasinOptions,
) -> Result<BasinBracket> {
    let norm = direction.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::invalid("direction", "perturbation direction must be non-zero"));
    }
    if is_unstable(alpha, v0) {
        return Err(Error::UnstableFixedPoint { v0 });
    }
    let unit = State3::new(direction.v / norm, direction.i_j / norm, direction.i_s / norm);
    log_bisect(
        |m| {
            let delta = State3::new(unit.v * m, unit.i_j * m, unit.i_s * m);
            detect_attractor_with(alpha, v0, delta, opts.horizon, cfg, &opts.criteria).map(|v| v.persistent)
        },
        opts.floor,
        opts.ceiling,
        opts.resolution_decades,
    )
}

/// First-harmonic truncation of the large-bias oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBalance {
    pub v0: f64,
    /// Estimated fundamental frequency, equal to `v0`.
    pub omega_est: f64,
    pub zeta0: Complex64,
    /// `|v0| > 1`, where the truncation is meaningful.
    pub in_regime: bool,
    /// Coupling `|4 alpha - zeta0|` between the first harmonics of `v` and `zeta`.
    pub coupling: f64,
    /// Whether the first-harmonic balance admits a non-trivial `(v1, zeta1)` at `omega = v0`.
    pub v1_consistency: bool,
}

/// Harmonic-balance estimate on the branch with the largest `|v0|`.
pub fn harmonic_balance(alpha: f64, i_tot: f64) -> HarmonicBalance {
    let v0 = fixed_point(alpha, i_tot)
        .into_iter()
        .map(|fp| fp.v0)
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    let z0 = zeta0(alpha, v0);
    let coupling = (Complex64::new(4.0 * alpha, 0.0) - z0).norm();
    let in_regime = v0.abs() > 1.0;
    HarmonicBalance {
        v0,
        omega_est: v0,
        zeta0: z0,
        in_regime,
        coupling,
        v1_consistency: in_regime && coupling > 0.0 && 4.0 * alpha > 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroOptions {
    /// Discarded transient (reduced time), rounded up to whole drive periods.
    pub transient: f64,
    /// Number of drive periods averaged.
    pub periods: usize,
    /// Relative distance to `n omega_f` accepted on a step.
    pub tolerance: f64,
    /// Minimum consecutive grid points forming a plateau.
    pub min_points: usize,
    /// Start each bias from the end state of the previous one (in grid
    /// order) instead of from `(i_tot, 0, 0)`.
    pub continuation: bool,
}

impl Default for ShapiroOptions {
    fn default() -> Self {
        ShapiroOptions {
            transient: 200.0,
            periods: 100,
            tolerance: 0.01,
            min_points: 3,
            continuation: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroPoint {
    pub i_tot: f64,
    pub v_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    /// Step index: `v_mean ~ n omega_f`.
    pub n: u32,
    pub i_start: f64,
    pub i_end: f64,
    pub points: usize,
    pub v_mean: f64,
    /// Largest `|v_mean - n omega_f| / (n omega_f)` on the plateau.
    pub max_rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Staircase {
    pub points: Vec<ShapiroPoint>,
    pub plateaus: Vec<Plateau>,
    pub stats: IntegrationStats,
}

/// Time-averaged voltage of the driven junction on each bias of `i_grid`.
///
/// With the default continuation the grid is swept in the given order, each
/// bias starting where the previous one ended; otherwise every bias starts
/// from `(i_tot, 0, 0)` and points run in parallel. Points are returned
/// sorted by `i_tot`.
pub fn shapiro_staircase(
    alpha: f64,
    omega_f: f64,
    v_f: f64,
    i_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Staircase> {
    shapiro_staircase_with(alpha, omega_f, v_f, i_grid, cfg, &ShapiroOptions::default())
}

pub fn shapiro_staircase_with(
    alpha: f64,
    omega_f: f64,
    v_f: f64,
    i_grid: &[f64],
    cfg: &IntegratorConfig,
    opts: &ShapiroOptions,
) -> Result<Staircase> {
    if !(v_f >= 0.0 && v_f.is_finite()) {
        return Err(Error::invalid("v_f", "field amplitude must be >= 0"));
    }
    if !(opts.transient >= 0.0 && opts.periods > 0 && opts.tolerance > 0.0) {
        return Err(Error::invalid("shapiro", "transient >= 0, periods > 0 and tolerance > 0 required"));
    }
    let base = DimensionlessParams::new(alpha, 0.0)?.with_drive(v_f, omega_f)?;
    let period = 2.0 * PI / omega_f;
    let t_tr = (opts.transient / period).ceil().max(1.0) * period;
    let t_avg = opts.periods as f64 * period;
    let mut c = *cfg;
    c.dt_out = c.dt_out.max(t_tr.max(t_avg));

    // fourth component accumulates the integral of v over the averaging window
    let run = |i_tot: f64, s0: State3| -> Result<(ShapiroPoint, State3, IntegrationStats)> {
        let p = DimensionlessParams { i_tot, ..base };
        let rhs = |t: f64, y: &[f64; 4]| {
            let d = rhs_driven(&p, &State3::new(y[0], y[1], y[2]), t);
            [d.v, d.i_j, d.i_s, y[0]]
        };
        let y0 = [s0.v, s0.i_j, s0.i_s, 0.0];
        let mid = integrate_observed(rhs, y0, (0.0, t_tr), &c, |_, _| {})?;
        let mut y = mid.end_state;
        y[3] = 0.0;
        let end = integrate_observed(rhs, y, (t_tr, t_tr + t_avg), &c, |_, _| {})?;
        let mut stats = mid.stats;
        stats.merge(&end.stats);
        let e = end.end_state;
        Ok((ShapiroPoint { i_tot, v_mean: e[3] / t_avg }, State3::new(e[0], e[1], e[2]), stats))
    };

    let mut points = Vec::with_capacity(i_grid.len());
    let mut stats = IntegrationStats::default();
    if opts.continuation {
        let mut state = None;
        for &i_tot in i_grid {
            let (pt, end, st) = run(i_tot, state.unwrap_or(State3::new(i_tot, 0.0, 0.0)))?;
            state = Some(end);
            points.push(pt);
            stats.merge(&st);
        }
    } else {
        let results: Vec<_> = i_grid.par_iter().map(|&i| run(i, State3::new(i, 0.0, 0.0))).collect();
        for r in results {
            let (pt, _, st) = r?;
            points.push(pt);
            stats.merge(&st);
        }
    }
    points.sort_by(|a, b| a.i_tot.total_cmp(&b.i_tot));
    let plateaus = detect_plateaus(&points, omega_f, opts.tolerance, opts.min_points);
    Ok(Staircase { points, plateaus, stats })
}

/// Maximal runs of consecutive points within `tolerance` of a common `n omega_f`, `n >= 1`.
pub fn detect_plateaus(points: &[ShapiroPoint], omega_f: f64, tolerance: f64, min_points: usize) -> Vec<Plateau> {
    let step_of = |v: f64| -> Option<(u32, f64)> {
        let n = (v / omega_f).round();
        if n < 1.0 {
            return None;
        }
        let target = n * omega_f;
        let dev = (v - target).abs() / target;
        (dev <= tolerance).then_some((n as u32, dev))
    };
    let mut out = Vec::new();
    let mut k = 0;
    while k < points.len() {
        let Some((n, _)) = step_of(points[k].v_mean) else {
            k += 1;
            continue;
        };
        let mut j = k;
        let mut max_dev = 0.0f64;
        let mut sum = 0.0;
        while j < points.len() {
            match step_of(points[j].v_mean) {
                Some((m, dev)) if m == n => {
                    max_dev = max_dev.max(dev);
                    sum += points[j].v_mean;
                    j += 1;
                }
                _ => break,
            }
        }
        let count = j - k;
        if count >= min_points.max(1) {
            out.push(Plateau {
                n,
                i_start: points[k].i_tot,
                i_end: points[j - 1].i_tot,
                points: count,
                v_mean: sum / count as f64,
                max_rel_dev: max_dev,
            });
        }
        k = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(omega: &[(f64, f64)], dt: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                omega.iter().map(|(w, a)| a * (w * t).sin()).sum()
            })
            .collect()
    }

    #[test]
    fn single_tone_peak() {
        let x = tone(&[(5.0, 1.0)], 0.01, 10_000);
        let s = power_spectrum_samples(&x, 0.01, Window::Hann).unwrap();
        let w = dominant_frequency(&s).unwrap();
        assert!((w - 5.0).abs() < 0.5 * s.bin_width(), "{w}");
        assert!((s.bin_width() - 2.0 * PI / 100.0).abs() < 1e-12);
    }

    #[test]
    fn stronger_of_two_tones() {
        // powers 1.0 and 0.5
        let x = tone(&[(3.0, 1.0), (11.0, 0.5f64.sqrt())], 0.01, 20_000);
        let s = power_spectrum_samples(&x, 0.01, Window::Hann).unwrap();
        assert!((dominant_frequency(&s).unwrap() - 3.0).abs() < s.bin_width());
        let x = tone(&[(3.0, 0.5f64.sqrt()), (11.0, 1.0)], 0.01, 20_000);
        let s = power_spectrum_samples(&x, 0.01, Window::Hann).unwrap();
        assert!((dominant_frequency(&s).unwrap() - 11.0).abs() < s.bin_width());
    }

    #[test]
    fn constant_signal_is_degenerate() {
        let s = power_spectrum_samples(&[2.5; 256], 0.1, Window::Rectangular).unwrap();
        assert!(s.power.iter().all(|p| *p < 1e-28));
        assert_eq!(dominant_frequency(&s), Err(Error::DegenerateSpectrum));
    }

    #[test]
    fn parseval_both_windows() {
        let x: Vec<f64> = (0..1001).map(|k| ((k as f64) * 0.37).sin() + 0.2 * ((k * k % 17) as f64)).collect();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        for win in [Window::Rectangular, Window::Hann] {
            let w = window_weights(win, x.len());
            let var: f64 = x.iter().zip(&w).map(|(a, b)| ((a - mean) * b).powi(2)).sum::<f64>() / x.len() as f64;
            let s = power_spectrum_samples(&x, 0.1, win).unwrap();
            assert!((s.total_power() - var).abs() < 1e-9 * var);
        }
    }

    #[test]
    fn spectrum_rejects_short_and_nonuniform() {
        assert!(matches!(
            power_spectrum_samples(&[1.0; 10], 0.1, Window::Hann),
            Err(Error::TooFewSamples { .. })
        ));
        let mut t: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
        t[50] += 0.03;
        let traj = Trajectory {
            states: t.iter().map(|x| [x.sin(), 0.0, 0.0]).collect(),
            t,
            end_time: 9.9,
            end_state: [0.0; 3],
            stats: IntegrationStats::default(),
        };
        assert!(matches!(power_spectrum(&traj, Field::V, Window::Hann), Err(Error::NonUniform { .. })));
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|a| 2.5 * a - 1.0).collect();
        let (m, b) = linear_fit(&x, &y).unwrap();
        assert!((m - 2.5).abs() < 1e-14 && (b + 1.0).abs() < 1e-14);
    }

    #[test]
    fn overdamped_probe_decays() {
        let cfg = IntegratorConfig::default().with_dt_out(0.01);
        let v = detect_attractor(0.8, 5.0, State3::new(0.0, 0.0, -0.1), 400.0, &cfg).unwrap();
        assert!(!v.persistent);
        assert!(v.amplitude < 1e-6);
    }

    #[test]
    fn unstable_fixed_point_rejected() {
        let cfg = IntegratorConfig::default();
        assert_eq!(
            detect_attractor(6.0, 2.0, State3::default(), 400.0, &cfg).unwrap_err(),
            Error::UnstableFixedPoint { v0: 2.0 }
        );
    }

    /// Subcritical Hopf normal form `r' = r(-mu + r^2 - r^4)`: stable origin,
    /// unstable cycle at `r_u`, stable cycle at `r_s`.
    fn hopf_persists(m: f64) -> Result<bool> {
        let mu = 0.1;
        let rhs = |_: f64, y: &[f64; 2]| {
            let r2 = y[0] * y[0] + y[1] * y[1];
            let g = -mu + r2 - r2 * r2;
            [g * y[0] - 5.0 * y[1], g * y[1] + 5.0 * y[0]]
        };
        let cfg = IntegratorConfig::default().with_dt_out(0.05);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        integrate_observed(rhs, [m, 0.0], (0.0, 300.0), &cfg, |t, y| {
            if t > 250.0 {
                lo = lo.min(y[0]);
                hi = hi.max(y[0]);
            }
        })?;
        Ok(hi - lo > 1e-3)
    }

    #[test]
    fn log_bisection_brackets_hidden_cycle() {
        let r_u = ((1.0 - (1.0f64 - 0.4).sqrt()) / 2.0).sqrt();
        let b = log_bisect(hopf_persists, 1e-6, 1.0, 1.0).unwrap();
        assert!(b.lower < r_u && r_u <= b.upper, "{b:?} {r_u}");
        assert!(b.upper / b.lower <= 10.0 * (1.0 + 1e-9));
        let fine = log_bisect(hopf_persists, 1e-6, 1.0, 0.01).unwrap();
        assert!(fine.lower < r_u && r_u <= fine.upper);
    }

    #[test]
    fn log_bisection_errors() {
        assert_eq!(
            log_bisect(|_| Ok(false), 1e-6, 1.0, 1.0).unwrap_err(),
            Error::NoAttractor { max_magnitude: 1.0 }
        );
        assert_eq!(
            log_bisect(|_| Ok(true), 1e-6, 1.0, 1.0).unwrap_err(),
            Error::PersistsAtFloor { min_magnitude: 1e-6 }
        );
    }

    #[test]
    fn basin_rejects_zero_direction() {
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            basin_threshold(2.2, 30.0, State3::default(), &cfg),
            Err(Error::InvalidParameter { name: "direction", .. })
        ));
    }

    #[test]
    fn harmonic_balance_examples() {
        let h = harmonic_balance(2.2, 30.293);
        assert!((h.omega_est - 30.0).abs() < 0.3);
        assert!((h.zeta0 - Complex64::new(8.8, 0.0)).norm() < 8.8 / h.v0);
        assert!(h.in_regime && h.v1_consistency);
        let h = harmonic_balance(2.2, 0.0);
        assert_eq!(h.v0, 0.0);
        assert!(!h.in_regime && !h.v1_consistency);
    }

    #[test]
    fn plateau_runs() {
        let pts: Vec<ShapiroPoint> = [5.0, 19.9, 20.0, 20.1, 27.0, 40.0, 40.2, 39.8, 40.1, 60.0, 61.0]
            .iter()
            .enumerate()
            .map(|(k, v)| ShapiroPoint { i_tot: k as f64, v_mean: *v })
            .collect();
        let p = detect_plateaus(&pts, 20.0, 0.01, 3);
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].n, p[0].points, p[0].i_start, p[0].i_end), (1, 3, 1.0, 3.0));
        assert_eq!((p[1].n, p[1].points), (2, 4));
        assert!(p[1].max_rel_dev <= 0.005 + 1e-12);
        assert!(detect_plateaus(&pts, 20.0, 0.01, 5).is_empty());
    }

    #[test]
    fn undriven_staircase_follows_characteristic() {
        let grid = [0.5, 1.0, 2.0, 3.0];
        let cfg = IntegratorConfig::default();
        let opts = ShapiroOptions { transient: 100.0, periods: 20, ..Default::default() };
        let s = shapiro_staircase_with(0.8, 20.0, 0.0, &grid, &cfg, &opts).unwrap();
        assert!(s.plateaus.is_empty());
        for p in &s.points {
            assert!((i_of_v(0.8, p.v_mean) - p.i_tot).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn tiny_perturbation_decays() {
        let v = detect_attractor(2.2, 30.0, State3::new(0.0, 0.0, -1e-6), 5000.0, &IntegratorConfig::spectral())
            .unwrap();
        assert!(!v.persistent);
        assert!(v.amplitude < 1e-3);
    }

    #[test]
    fn overdamped_basin_has_no_attractor() {
        let cfg = IntegratorConfig::default();
        assert_eq!(
            basin_threshold(0.8, 5.0, State3::new(0.0, 0.0, -1.0), &cfg).unwrap_err(),
            Error::NoAttractor { max_magnitude: 1.0 }
        );
    }

    #[test]
    fn trajectory_spectrum_finds_ring_down_frequency() {
        let p = DimensionlessParams::new(2.2, i_of_v(2.2, 30.0)).unwrap();
        let s0 = FixedPoint::at_voltage(2.2, 30.0).state() + State3::new(0.0, 0.0, -0.1);
        let tr = crate::integrate::integrate_reduced(&p, s0, (0.0, 6.0), &IntegratorConfig::spectral()).unwrap();
        let s = power_spectrum(&tr, Field::IJ, Window::Hann).unwrap();
        let w = dominant_frequency(&s).unwrap();
        assert!((w - 30.0).abs() < s.bin_width(), "{w}");
    }

    #[test]
    fn step_voltages_scale_with_drive_frequency() {
        let cfg = IntegratorConfig::default();
        let steps = |omega_f: f64, from: f64, to: f64| {
            let grid: Vec<f64> = (0..=((to - from) / 0.2).round() as usize).map(|k| from + 0.2 * k as f64).collect();
            shapiro_staircase(3.0, omega_f, 300.0, &grid, &cfg).unwrap().plateaus
        };
        for (omega_f, from, to) in [(20.0, 24.0, 42.0), (25.0, 20.0, 56.0)] {
            let p = steps(omega_f, from, to);
            let n: Vec<u32> = p.iter().map(|x| x.n).collect();
            assert_eq!(n, vec![1, 2], "omega_f = {omega_f}: {p:?}");
            for x in &p {
                assert!((x.v_mean / (x.n as f64 * omega_f) - 1.0).abs() < 0.01);
            }
        }
    }
}
