//! Stationary current-voltage characteristic and everything read off it.
//!
//! In reduced units the characteristic is `i(v) = v (1 + 4 alpha / (1 + v^2))`.
//! For `alpha > 2` it has a local maximum (critical current) at `v_-` and a
//! local minimum (retrapping current) at `v_+`; between them the slope is
//! negative.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cubic::{solve_cubic, CubicRoots};
use crate::error::{Error, Result};
use crate::model::{nondimensionalize, PhysicalConstants, PhysicalParams, Scales, State3};

/// Reduced current at reduced voltage `v`.
#[inline]
pub fn i_of_v(alpha: f64, v: f64) -> f64 {
    v * (1.0 + 4.0 * alpha / (1.0 + v * v))
}

/// Slope `di/dv` of the characteristic.
#[inline]
pub fn di_dv(alpha: f64, v: f64) -> f64 {
    let w = 1.0 + v * v;
    1.0 + 4.0 * alpha * (1.0 - v * v) / (w * w)
}

/// Dimensional characteristic `I(V)` in amperes.
pub fn characteristic_dimensional(p: &PhysicalParams, k: &PhysicalConstants, voltage: f64) -> f64 {
    let omega = 2.0 * k.e * voltage / k.hbar;
    let rc_inv = 1.0 / (p.resistance * p.capacitance);
    let lorentz = 4.0 * p.tunneling.norm_sqr() / (omega * omega + rc_inv * rc_inv);
    voltage * (1.0 + lorentz) / p.resistance
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicExtrema {
    pub v_minus: Option<f64>,
    pub v_plus: Option<f64>,
    pub i_c: f64,
    pub i_r: Option<f64>,
}

impl CharacteristicExtrema {
    pub fn is_hysteretic(&self) -> bool {
        matches!(self.i_r, Some(ir) if ir < self.i_c)
    }
}

/// Critical and retrapping currents.
///
/// For `alpha >= 2` the extrema come from the closed forms (degenerate at
/// `alpha = 2`, where `v_- = v_+ = sqrt 3`). Below that the critical current is
/// the characteristic at its inflection point `v = sqrt 3`, i.e.
/// `sqrt(3) (1 + alpha)`, and there is no retrapping current.
pub fn extrema(alpha: f64) -> Result<CharacteristicExtrema> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("alpha must be >= 0, got {alpha}")));
    }
    if alpha >= 2.0 {
        let root = (alpha * (alpha - 2.0)).sqrt();
        let v_minus = (2.0 * alpha - 1.0 - 2.0 * root).sqrt();
        let v_plus = (2.0 * alpha - 1.0 + 2.0 * root).sqrt();
        Ok(CharacteristicExtrema {
            v_minus: Some(v_minus),
            v_plus: Some(v_plus),
            i_c: i_of_v(alpha, v_minus),
            i_r: Some(i_of_v(alpha, v_plus)),
        })
    } else {
        Ok(CharacteristicExtrema {
            v_minus: None,
            v_plus: None,
            i_c: 3f64.sqrt() * (1.0 + alpha),
            i_r: None,
        })
    }
}

/// Critical current as a function of alpha (piecewise closed form).
pub fn critical_current(alpha: f64) -> Result<f64> {
    extrema(alpha).map(|e| e.i_c)
}

/// Stewart-McCumber parameter `beta_c = 2 e R^2 C I_c / hbar`.
///
/// Evaluated through the dimensional critical current; equal to the reduced `i_c`.
pub fn stewart_mccumber(p: &PhysicalParams, k: &PhysicalConstants) -> Result<f64> {
    let (d, scales) = nondimensionalize(p, k)?;
    let ic_amps = critical_current(d.alpha)? * scales.i_tilde;
    Ok(2.0 * k.e * p.resistance * p.resistance * p.capacitance * ic_amps / k.hbar)
}

/// Dimensional critical current `I_c = i_c I_tilde` (A).
pub fn critical_current_si(p: &PhysicalParams, k: &PhysicalConstants) -> Result<f64> {
    let (d, scales) = nondimensionalize(p, k)?;
    Ok(critical_current(d.alpha)? * scales.i_tilde)
}

/// `|K|^2` for two tunneling channels threaded by flux `phi` (Wb).
pub fn squid_tunneling_sq(k_a: f64, k_b: f64, phi: f64, k: &PhysicalConstants) -> f64 {
    k_a * k_a + k_b * k_b + 2.0 * k_a * k_b * (2.0 * k.e * phi / k.hbar).cos()
}

/// Effective `alpha = |K|^2 / gamma^2` of a two-channel interferometer.
pub fn squid_effective_alpha(
    k_a: f64,
    k_b: f64,
    phi: f64,
    gamma: f64,
    k: &PhysicalConstants,
) -> Result<f64> {
    if !(k_a >= 0.0 && k_b >= 0.0) {
        return Err(Error::invalid("k_a/k_b", "tunneling rates must be >= 0"));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be > 0"));
    }
    // rounding can leave a tiny negative at full cancellation
    Ok(squid_tunneling_sq(k_a, k_b, phi, k).max(0.0) / (gamma * gamma))
}

/// Equilibrium of the autonomous system at bias voltage `v0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub v0: f64,
    pub zeta0: Complex64,
    pub i_j0: f64,
    pub i_s0: f64,
}

impl FixedPoint {
    pub fn at_voltage(alpha: f64, v0: f64) -> Self {
        let w = 1.0 + v0 * v0;
        let i_j0 = 4.0 * alpha * v0 / w;
        let i_s0 = 4.0 * alpha * v0 * v0 / w;
        FixedPoint {
            v0,
            zeta0: zeta0(alpha, v0),
            i_j0,
            i_s0,
        }
    }

    pub fn state(&self) -> State3 {
        State3::new(self.v0, self.i_j0, self.i_s0)
    }
}

/// Equilibrium coherence `4 alpha / (1 - i / v0)`, continued to 0 at `v0 = 0`.
pub fn zeta0(alpha: f64, v0: f64) -> Complex64 {
    if v0 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(4.0 * alpha, 0.0) / Complex64::new(1.0, -1.0 / v0)
}

/// All equilibria at bias `i_tot`, ascending in `v0`.
///
/// Roots of `v^3 - i v^2 + (1 + 4 alpha) v - i = 0`. A double root at a fold of
/// the characteristic is reported once.
pub fn fixed_point(alpha: f64, i_tot: f64) -> Vec<FixedPoint> {
    let roots = solve_cubic(-i_tot, 1.0 + 4.0 * alpha, -i_tot);
    let mut v: Vec<f64> = match roots {
        CubicRoots::OneReal { real, .. } => vec![real],
        CubicRoots::ThreeReal(r) => r.to_vec(),
    };
    v.dedup();
    v.into_iter().map(|v0| FixedPoint::at_voltage(alpha, v0)).collect()
}

/// Converts a dimensional voltage to the reduced characteristic and back; used
/// by the consistency check between the two forms.
pub fn reduced_current_at(p: &PhysicalParams, k: &PhysicalConstants, voltage: f64) -> Result<f64> {
    let (d, s): (_, Scales) = nondimensionalize(p, k)?;
    Ok(i_of_v(d.alpha, voltage / s.v_tilde))
}
