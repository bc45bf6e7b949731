//! Closed-form roots of monic real cubics `x^3 + a x^2 + b x + c`.

use num_complex::Complex64;

/// Relative width of the discriminant band treated as a repeated root.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubicRoots {
    /// One real root and a complex-conjugate pair `re ± i im` with `im > 0`.
    OneReal { real: f64, pair_re: f64, pair_im: f64 },
    /// Three real roots in ascending order (repeated roots appear twice).
    ThreeReal([f64; 3]),
}

impl CubicRoots {
    pub fn real_roots(&self) -> Vec<f64> {
        match *self {
            CubicRoots::OneReal { real, .. } => vec![real],
            CubicRoots::ThreeReal(r) => r.to_vec(),
        }
    }

    pub fn all(&self) -> [Complex64; 3] {
        match *self {
            CubicRoots::OneReal { real, pair_re, pair_im } => [
                Complex64::new(real, 0.0),
                Complex64::new(pair_re, pair_im),
                Complex64::new(pair_re, -pair_im),
            ],
            CubicRoots::ThreeReal(r) => r.map(|x| Complex64::new(x, 0.0)),
        }
    }
}

#[inline]
fn eval(a: f64, b: f64, c: f64, x: f64) -> (f64, f64) {
    let f = ((x + a) * x + b) * x + c;
    let df = (3.0 * x + 2.0 * a) * x + b;
    (f, df)
}

/// Up to three Newton steps; keeps the iterate only while the residual shrinks.
fn polish(a: f64, b: f64, c: f64, mut x: f64) -> f64 {
    let (mut f, mut df) = eval(a, b, c, x);
    for _ in 0..3 {
        if f == 0.0 || df == 0.0 {
            break;
        }
        let next = x - f / df;
        let (fn_, dfn) = eval(a, b, c, next);
        if fn_.abs() >= f.abs() {
            break;
        }
        x = next;
        f = fn_;
        df = dfn;
    }
    x
}

/// Roots of `x^3 + a x^2 + b x + c`.
///
/// Three distinct real roots use the trigonometric form, a single real root
/// uses Cardano's formula; each real root gets a short Newton polish. When the
/// discriminant lies within [`DEGENERACY_TOL`] (relative) of zero the result is
/// reported as a double (or triple) root rather than perturbed either way.
pub fn solve_cubic(a: f64, b: f64, c: f64) -> CubicRoots {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let p3 = p / 3.0;
    let hq = q / 2.0;
    let disc = hq * hq + p3 * p3 * p3;
    let scale = hq * hq + p3.abs().powi(3);

    if scale == 0.0 || disc.abs() <= DEGENERACY_TOL * scale {
        // repeated root
        if p3.abs().powi(3) <= DEGENERACY_TOL * (scale + f64::MIN_POSITIVE) || p == 0.0 {
            let r = -shift;
            return CubicRoots::ThreeReal([r, r, r]);
        }
        let single = 3.0 * q / p - shift;
        let double = -1.5 * q / p - shift;
        let single = polish(a, b, c, single);
        let mut r = [single, double, double];
        r.sort_by(f64::total_cmp);
        return CubicRoots::ThreeReal(r);
    }

    if disc > 0.0 {
        let sq = disc.sqrt();
        // choose the sign that avoids cancellation
        let w = if hq >= 0.0 { -hq - sq } else { -hq + sq };
        let u = w.cbrt();
        let t = if u != 0.0 { u - p3 / u } else { 0.0 };
        let real = polish(a, b, c, t - shift);
        // deflate: x^2 + (a + r) x + (b + r (a + r))
        let b1 = a + real;
        let c1 = if real.abs() > 1.0 { -c / real } else { b + real * b1 };
        let pair_re = -b1 / 2.0;
        let rad = c1 - pair_re * pair_re;
        if rad > 0.0 {
            CubicRoots::OneReal {
                real,
                pair_re,
                pair_im: rad.sqrt(),
            }
        } else {
            // rounding pushed a near-double pair onto the real axis
            let mut r = [real, pair_re, pair_re];
            r.sort_by(f64::total_cmp);
            CubicRoots::ThreeReal(r)
        }
    } else {
        let m = 2.0 * (-p3).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        let mut r = [0, 1, 2].map(|k| polish(a, b, c, m * (theta - tau * k as f64).cos() - shift));
        r.sort_by(f64::total_cmp);
        CubicRoots::ThreeReal(r)
    }
}
