//! Linear stability of the equilibria of the autonomous system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristic::di_dv;
use crate::cubic::{solve_cubic, CubicRoots};

/// Jacobian of the reduced flow at the equilibrium with voltage `v0`.
pub fn jacobian(alpha: f64, v0: f64) -> [[f64; 3]; 3] {
    let w = 1.0 + v0 * v0;
    [
        [-1.0, -1.0, 0.0],
        [4.0 * alpha / w, -1.0, -v0],
        [4.0 * alpha * v0 / w, v0, -1.0],
    ]
}

/// Coefficients `(c2, c1, c0)` of `det(lambda I - J) = lambda^3 + c2 lambda^2 + c1 lambda + c0`.
pub fn char_poly_coeffs(alpha: f64, v0: f64) -> (f64, f64, f64) {
    let v2 = v0 * v0;
    let w = 1.0 + v2;
    (3.0, v2 + 4.0 * alpha / w + 3.0, v2 + 4.0 * alpha * (1.0 - v2) / w + 1.0)
}

/// Routh-Hurwitz verdict: unstable iff the constant coefficient is negative.
///
/// `c0 = (1 + v0^2) i'(v0)`, so this is exactly the negative-resistance
/// region. `c0 = 0` counts as not unstable.
pub fn is_unstable(alpha: f64, v0: f64) -> bool {
    char_poly_coeffs(alpha, v0).2 < 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub v0: f64,
    /// The real eigenvalue; the largest one when all three are real.
    pub lambda0: f64,
    /// Real part of the remaining pair (the larger one when both are real).
    pub kappa: f64,
    /// Imaginary part of the remaining pair, `>= 0` (zero when both are real).
    pub eta: f64,
    /// The remaining two eigenvalues, `kappa + i eta` first.
    pub pair: [Complex64; 2],
    pub unstable: bool,
    /// Slope `i'(v0)` of the characteristic.
    pub slope: f64,
}

impl StabilityReport {
    pub fn eigenvalues(&self) -> [Complex64; 3] {
        [Complex64::new(self.lambda0, 0.0), self.pair[0], self.pair[1]]
    }
}

/// Eigenvalues of the Jacobian from the closed-form cubic.
pub fn eigenvalues(alpha: f64, v0: f64) -> StabilityReport {
    let (c2, c1, c0) = char_poly_coeffs(alpha, v0);
    let (lambda0, pair) = match solve_cubic(c2, c1, c0) {
        CubicRoots::OneReal { real, pair_re, pair_im } => (
            real,
            [Complex64::new(pair_re, pair_im), Complex64::new(pair_re, -pair_im)],
        ),
        CubicRoots::ThreeReal([a, b, c]) => {
            (c, [Complex64::new(b, 0.0), Complex64::new(a, 0.0)])
        }
    };
    StabilityReport {
        v0,
        lambda0,
        kappa: pair[0].re,
        eta: pair[0].im.abs(),
        pair,
        unstable: c0 < 0.0,
        slope: di_dv(alpha, v0),
    }
}
