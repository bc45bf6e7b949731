//! Dormand-Prince 5(4) with PI step control and cubic Hermite output.

use super::{axpy, check_finite, output_count, IntegrationStats, IntegratorConfig, Outcome};
use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth- minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

fn error_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sk = cfg.atol + cfg.rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sk;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    h_max: f64,
    cfg: &IntegratorConfig,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let sk: [f64; N] = std::array::from_fn(|i| cfg.atol + cfg.rtol * y0[i].abs());
    let dnf: f64 = (0..N).map(|i| (f0[i] / sk[i]).powi(2)).sum();
    let dny: f64 = (0..N).map(|i| (y0[i] / sk[i]).powi(2)).sum();
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);
    let y1 = axpy(y0, h, f0);
    let f1 = rhs(t0 + h, &y1);
    let der2 = (0..N)
        .map(|i| ((f1[i] - f0[i]) / sk[i]).powi(2))
        .sum::<f64>()
        .sqrt()
        / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(h_max)
}

#[inline]
fn hermite<const N: usize>(
    theta: f64,
    h: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    y1: &[f64; N],
    f1: &[f64; N],
) -> [f64; N] {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

pub(super) fn run<const N: usize, F, O>(
    mut rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    mut observe: O,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]),
{
    let h_max = cfg.dt_max.unwrap_or(t1 - t0).min(t1 - t0);
    let n_out = output_count(t0, t1, cfg.dt_out);
    let mut stats = IntegrationStats::default();

    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y);
    stats.evaluations += 1;
    check_finite(t, &f)?;

    let mut h = match cfg.dt_init {
        Some(h) => h.min(h_max),
        None => {
            stats.evaluations += 1;
            initial_step(&mut rhs, t0, &y, &f, h_max, cfg)
        }
    };

    observe(t0, &y);
    let mut next_out = 1usize;

    let expo = 0.2 - BETA * 0.75;
    let mut fac_old = 1e-4f64;
    let mut last_rejected = false;

    while t < t1 {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::MaxSteps(cfg.max_steps));
        }
        let mut last = false;
        if t + 1.01 * h >= t1 {
            h = t1 - t;
            last = true;
        }
        if h < cfg.dt_min || h <= 16.0 * f64::EPSILON * t.abs() {
            return Err(Error::StepUnderflow { t, dt: h });
        }

        let k1 = f;
        let k2 = rhs(t + C2 * h, &axpy(&y, h * A21, &k1));
        let y3: [f64; N] = std::array::from_fn(|i| y[i] + h * (A31 * k1[i] + A32 * k2[i]));
        let k3 = rhs(t + C3 * h, &y3);
        let y4: [f64; N] = std::array::from_fn(|i| y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]));
        let k4 = rhs(t + C4 * h, &y4);
        let y5: [f64; N] =
            std::array::from_fn(|i| y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]));
        let k5 = rhs(t + C5 * h, &y5);
        let y6: [f64; N] = std::array::from_fn(|i| {
            y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        });
        let k6 = rhs(t + h, &y6);
        let y_new: [f64; N] = std::array::from_fn(|i| {
            y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
        });
        let k7 = rhs(t + h, &y_new);
        stats.evaluations += 6;

        let err: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let en = error_norm(&y, &y_new, &err, cfg);

        if !en.is_finite() {
            // non-finite stage: shrink hard and retry
            stats.rejected += 1;
            last_rejected = true;
            h *= FAC_MIN;
            continue;
        }

        let fac11 = en.powf(expo);
        if en <= 1.0 {
            check_finite(t + h, &y_new)?;
            let t_new = if last { t1 } else { t + h };
            while next_out < n_out {
                let tk = t0 + next_out as f64 * cfg.dt_out;
                if !last && tk > t_new {
                    break;
                }
                let theta = ((tk - t) / h).clamp(0.0, 1.0);
                let yk = hermite(theta, h, &y, &k1, &y_new, &k7);
                observe(tk, &yk);
                next_out += 1;
            }
            stats.accepted += 1;
            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = en.max(1e-4);
            let mut h_new = (h / fac).min(h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            t = t_new;
            y = y_new;
            f = k7;
            h = h_new;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }

    Ok(Outcome {
        end_time: t1,
        end_state: y,
        stats,
    })
}
