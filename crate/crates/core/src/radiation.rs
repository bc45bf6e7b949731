//! Superradiant emission: Dicke mean-field dynamics, the emission-corrected
//! junction equations, spontaneous and cavity-enhanced rates, and efficiencies.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig, Trajectory};
use crate::model::{PhysicalConstants, PhysicalParams};

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

/// Emitter and cavity parameters (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiationParams {
    /// Single-emitter spontaneous rate (1/s).
    pub gamma_e: f64,
    /// Emission angular frequency (rad/s).
    pub omega_a: f64,
    /// Electrode separation (m).
    pub ell: f64,
    /// Dipole moment `2 e ell` (C m).
    pub dipole: f64,
    /// Emission wavelength `2 pi c / omega_a` (m).
    pub lambda_a: f64,
    /// Cavity quality factor and linear size (m), when a cavity is present.
    pub cavity: Option<(f64, f64)>,
}

impl RadiationParams {
    /// Junction at DC voltage `voltage` with electrode separation `ell`.
    pub fn from_voltage(voltage: f64, ell: f64, k: &PhysicalConstants) -> Result<Self> {
        positive("voltage", voltage)?;
        positive("ell", ell)?;
        let omega_a = josephson_frequency(voltage, k);
        let dipole = dipole_moment(ell, k);
        Ok(RadiationParams {
            gamma_e: spontaneous_rate(dipole, omega_a, k)?,
            omega_a,
            ell,
            dipole,
            lambda_a: 2.0 * PI * k.c / omega_a,
            cavity: None,
        })
    }

    pub fn with_cavity(mut self, q: f64, l: f64) -> Result<Self> {
        positive("Q", q)?;
        positive("L", l)?;
        self.cavity = Some((q, l));
        Ok(self)
    }

    /// Spontaneous rate, Purcell-enhanced when a cavity is present.
    pub fn effective_rate(&self) -> Result<f64> {
        match self.cavity {
            Some((q, l)) => purcell_rate(self.gamma_e, q, self.lambda_a, l),
            None => Ok(self.gamma_e),
        }
    }
}

/// `2 e V / hbar` (rad/s).
pub fn josephson_frequency(voltage: f64, k: &PhysicalConstants) -> f64 {
    2.0 * k.e * voltage / k.hbar
}

/// Dipole moment of one Cooper pair across the barrier, `2 e ell`.
pub fn dipole_moment(ell: f64, k: &PhysicalConstants) -> f64 {
    2.0 * k.e * ell
}

/// `gamma_e = 4 pi mu0 d^2 omega_A^3 / (3 hbar c)`.
pub fn spontaneous_rate(dipole: f64, omega_a: f64, k: &PhysicalConstants) -> Result<f64> {
    if !(dipole >= 0.0 && omega_a >= 0.0 && dipole.is_finite() && omega_a.is_finite()) {
        return Err(Error::invalid("spontaneous_rate", "dipole and frequency must be >= 0"));
    }
    Ok(4.0 * PI * k.mu0 * dipole * dipole * omega_a.powi(3) / (3.0 * k.hbar * k.c))
}

/// Cavity rate `gamma_e (3 Q / 4 pi^2) (lambda_A / L)^3`.
pub fn purcell_rate(gamma_e: f64, q: f64, lambda_a: f64, l: f64) -> Result<f64> {
    positive("gamma_e", gamma_e)?;
    positive("Q", q)?;
    positive("lambda_A", lambda_a)?;
    positive("L", l)?;
    Ok(gamma_e * purcell_factor(q, lambda_a, l))
}

pub fn purcell_factor(q: f64, lambda_a: f64, l: f64) -> f64 {
    3.0 * q / (4.0 * PI * PI) * (lambda_a / l).powi(3)
}

/// Open-space efficiency `(I_c/I) (32 pi mu0 e^3 / (3 hbar^3 c)) C V^3 ell^2`,
/// with `I` and `C` taken from `p`.
pub fn efficiency_open_space(
    p: &PhysicalParams,
    k: &PhysicalConstants,
    voltage: f64,
    ell: f64,
    i_c: f64,
) -> Result<f64> {
    positive("voltage", voltage)?;
    positive("ell", ell)?;
    positive("I_c", i_c)?;
    positive("current", p.current)?;
    positive("capacitance", p.capacitance)?;
    let pref = 32.0 * PI * k.mu0 * k.e.powi(3) / (3.0 * k.hbar.powi(3) * k.c);
    Ok(i_c / p.current * pref * p.capacitance * voltage.powi(3) * ell * ell)
}

/// Stationary efficiency `gamma_e hbar C I_c / (4 e^2 I)` in terms of the emission rate.
pub fn efficiency_from_rate(gamma_e: f64, capacitance: f64, i_c: f64, current: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("current", current)?;
    Ok(gamma_e * k.hbar * capacitance / (4.0 * k.e * k.e) * i_c / current)
}

/// Radiated over supplied power, `2 e gamma_e |z0|^2 / I`.
pub fn efficiency_from_coherence(gamma_e: f64, z0_sq: f64, current: f64, k: &PhysicalConstants) -> Result<f64> {
    positive("current", current)?;
    Ok(2.0 * k.e * gamma_e * z0_sq / current)
}

/// Cavity efficiency `0.1 eta_rad Q`.
pub fn efficiency_cavity(eta_rad: f64, q: f64) -> Result<f64> {
    positive("eta_rad", eta_rad)?;
    positive("Q", q)?;
    Ok(0.1 * eta_rad * q)
}

/// Weak-damping stationary coherence `|K|^2 / omega_c^2`.
pub fn coherence_weak_damping(k_abs: f64, omega_c: f64) -> Result<f64> {
    positive("omega_c", omega_c)?;
    Ok(k_abs * k_abs / (omega_c * omega_c))
}

/// The same coherence expressed through the critical current, `hbar C I_c / (8 e^3)`.
pub fn coherence_from_critical_current(capacitance: f64, i_c: f64, k: &PhysicalConstants) -> f64 {
    k.hbar * capacitance * i_c / (8.0 * k.e.powi(3))
}

/// Mean-field Dicke state: inversion `n = n1 - n2`, coherence `z`, total `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeState {
    pub n: f64,
    pub z: Complex64,
    pub total: f64,
}

impl DickeState {
    /// Pure state with upper population `n1`: `|z|^2 = n1 n2`, `z` real.
    pub fn pure(total: f64, n1: f64) -> Result<Self> {
        positive("N", total)?;
        if !(0.0..=total).contains(&n1) {
            return Err(Error::invalid("n1", format!("must lie in [0, {total}], got {n1}")));
        }
        let n2 = total - n1;
        Ok(DickeState {
            n: n1 - n2,
            z: Complex64::new((n1 * n2).sqrt(), 0.0),
            total,
        })
    }

    /// Nearly fully inverted pure state, `n1 = N - 0.01 N`.
    pub fn tipped(total: f64) -> Result<Self> {
        Self::pure(total, total - 1e-2 * total)
    }

    pub fn n1(&self) -> f64 {
        0.5 * (self.total + self.n)
    }

    pub fn n2(&self) -> f64 {
        0.5 * (self.total - self.n)
    }

    /// `|z|^2 - n1 n2`; zero for pure states.
    pub fn purity_defect(&self) -> f64 {
        self.z.norm_sqr() - self.n1() * self.n2()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.n, self.z.re, self.z.im]
    }

    pub fn from_array(a: [f64; 3], total: f64) -> Self {
        DickeState {
            n: a[0],
            z: Complex64::new(a[1], a[2]),
            total,
        }
    }
}

/// `n' = -2 gamma_e |z|^2`, `z' = -i omega_A z + gamma_e n z / 2`.
///
/// The growth sign of the coherence is the one that conserves purity and
/// yields the logistic decay `n1' = -gamma_e (N - n1) n1`.
pub fn rhs_dicke(omega_a: f64, gamma_e: f64, s: &DickeState) -> DickeState {
    let i = Complex64::i();
    DickeState {
        n: -2.0 * gamma_e * s.z.norm_sqr(),
        z: -i * omega_a * s.z + 0.5 * gamma_e * s.n * s.z,
        total: 0.0,
    }
}

/// Radiated power `hbar gamma_e omega_A |z|^2` (W).
pub fn dicke_power(omega_a: f64, gamma_e: f64, s: &DickeState, k: &PhysicalConstants) -> f64 {
    k.hbar * gamma_e * omega_a * s.z.norm_sqr()
}

/// Logistic law for the upper population of a pure state, `n1' = -gamma_e (N - n1) n1`.
pub fn logistic_rate(gamma_e: f64, total: f64, n1: f64) -> f64 {
    -gamma_e * (total - n1) * n1
}

/// Closed-form logistic solution from `n1(0) = n10`.
pub fn logistic_n1(gamma_e: f64, total: f64, n10: f64, t: f64) -> f64 {
    let e = (gamma_e * total * t).exp();
    total * n10 / (n10 + (total - n10) * e)
}

/// Integrates the Dicke system; states are `[n, Re z, Im z]`.
pub fn dicke_trajectory(
    omega_a: f64,
    gamma_e: f64,
    s0: &DickeState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<3>> {
    if !(gamma_e >= 0.0 && omega_a.is_finite()) {
        return Err(Error::invalid("gamma_e", "must be >= 0"));
    }
    let total = s0.total;
    integrate(
        |_, y: &[f64; 3]| rhs_dicke(omega_a, gamma_e, &DickeState::from_array(*y, total)).to_array(),
        s0.to_array(),
        (0.0, t_end),
        cfg,
    )
}

/// Junction voltage `V` (volts) and coherence `z` of the emission-corrected equations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SuperradiantState {
    pub voltage: f64,
    pub z: Complex64,
}

impl SuperradiantState {
    pub fn to_array(self) -> [f64; 3] {
        [self.voltage, self.z.re, self.z.im]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        SuperradiantState {
            voltage: a[0],
            z: Complex64::new(a[1], a[2]),
        }
    }
}

/// Emission-corrected junction dynamics:
///
/// ```text
/// V' = -gamma V + i (2e/C)(K* z - K z*) + (I - 2 e gamma_e |z|^2) / C
/// z' = -(gamma + gamma_e C V / (2e)) z - i (2eV/hbar) z + i (K C / 2e) V
/// ```
///
/// For real `K` the tunneling term is `i (2Ke/C)(z - z*)`.
pub fn rhs_superradiant_jj(
    p: &PhysicalParams,
    k: &PhysicalConstants,
    gamma_e: f64,
    s: &SuperradiantState,
) -> SuperradiantState {
    let i = Complex64::i();
    let kk = p.tunneling;
    let c = p.capacitance;
    let e = k.e;
    let v = s.voltage;
    let tunneling = (i * (2.0 * e / c) * (kk.conj() * s.z - kk * s.z.conj())).re;
    let dv = -p.gamma * v + tunneling + (p.current - 2.0 * e * gamma_e * s.z.norm_sqr()) / c;
    let dz = -(p.gamma + 0.5 * gamma_e * c * v / e) * s.z - i * (2.0 * e * v / k.hbar) * s.z
        + i * kk * (c / (2.0 * e)) * v;
    SuperradiantState { voltage: dv, z: dz }
}

/// Power removed from the circuit by the emission term, `2 e gamma_e |z|^2 V`.
pub fn superradiant_power(gamma_e: f64, s: &SuperradiantState, k: &PhysicalConstants) -> f64 {
    2.0 * k.e * gamma_e * s.z.norm_sqr() * s.voltage
}

#[cfg(test)]
mod tests {
    use super::*;
    const K: PhysicalConstants = PhysicalConstants::CODATA_2018;

    #[test]
    fn rate_examples() {
        assert_eq!(spontaneous_rate(1e-28, 0.0, &K).unwrap(), 0.0);
        let g1 = spontaneous_rate(1e-28, 1e12, &K).unwrap();
        let g2 = spontaneous_rate(2e-28, 1e12, &K).unwrap();
        assert!((g2 / g1 - 4.0).abs() < 1e-12);
        let r = RadiationParams::from_voltage(1e-3, 1e-9, &K).unwrap();
        assert!((r.gamma_e - 480.0).abs() < 10.0, "{}", r.gamma_e);
        assert!((r.dipole - 2.0 * K.e * 1e-9).abs() < 1e-40);
    }

    #[test]
    fn purcell_examples() {
        let q = 4.0 * PI * PI / 3.0;
        assert!((purcell_rate(7.0, q, 1e-3, 1e-3).unwrap() - 7.0).abs() < 1e-12);
        let a = purcell_rate(1.0, 10.0, 2e-3, 1e-3).unwrap();
        let b = purcell_rate(1.0, 30.0, 2e-3, 1e-3).unwrap();
        assert!((b / a - 3.0).abs() < 1e-12);
        assert!((purcell_factor(1.0, 1.0, 1.0) - 0.0760).abs() < 1e-4);
        assert!(purcell_rate(1.0, 0.0, 1.0, 1.0).is_err());
        let r = RadiationParams::from_voltage(1e-3, 1e-9, &K).unwrap();
        let rc = r.with_cavity(100.0, r.lambda_a).unwrap();
        assert!((rc.effective_rate().unwrap() / r.gamma_e - 300.0 / (4.0 * PI * PI)).abs() < 1e-9);
    }

    #[test]
    fn cavity_efficiency() {
        assert!((efficiency_cavity(3e-8, 10.0).unwrap() - 3e-8).abs() < 1e-22);
        assert!((efficiency_cavity(5e-8, 1e4).unwrap() - 5e-5).abs() < 1e-18);
        assert!(efficiency_cavity(5e-8, 0.0).is_err());
    }

    #[test]
    fn dicke_equilibrium_and_purity_rate() {
        let s = DickeState { n: 10.0, z: Complex64::new(0.0, 0.0), total: 10.0 };
        let d = rhs_dicke(3.0, 1.0, &s);
        assert_eq!((d.n, d.z), (0.0, Complex64::new(0.0, 0.0)));
        let s = DickeState::pure(10.0, 7.0).unwrap();
        assert!(s.purity_defect().abs() < 1e-12);
        let d = rhs_dicke(3.0, 0.5, &s);
        // d|z|^2/dt == d(n1 n2)/dt on pure states
        let dz2 = 2.0 * (s.z.conj() * d.z).re;
        let dn1n2 = 0.5 * d.n * s.n2() - 0.5 * d.n * s.n1();
        assert!((dz2 - dn1n2).abs() < 1e-12);
        assert!((0.5 * d.n - logistic_rate(0.5, 10.0, 7.0)).abs() < 1e-12);
    }

    #[test]
    fn logistic_closed_form() {
        let (g, n, n10) = (1.0, 2.0, 1.99);
        let h = 1e-6;
        for t in [0.0, 0.5, 2.0, 5.0] {
            let n1 = logistic_n1(g, n, n10, t);
            let d = (logistic_n1(g, n, n10, t + h) - logistic_n1(g, n, n10, t - h)) / (2.0 * h);
            assert!((d - logistic_rate(g, n, n1)).abs() < 1e-7);
        }
        assert!((logistic_n1(g, n, n10, 0.0) - n10).abs() < 1e-15);
    }

    #[test]
    fn superradiant_ohmic_rest() {
        let p = PhysicalParams::new(10.0, 1e-12, Complex64::new(1e9, 0.0), 1e-4).unwrap();
        let s = SuperradiantState { voltage: p.resistance * p.current, z: Complex64::new(0.0, 0.0) };
        let d = rhs_superradiant_jj(&p, &K, 500.0, &s);
        assert!(d.voltage.abs() < 1e-9 * p.current / p.capacitance);
    }

    #[test]
    fn emission_term_matches_dicke_power() {
        let p = PhysicalParams::new(10.0, 1e-12, Complex64::new(1e9, 0.0), 1e-4).unwrap();
        let s = SuperradiantState { voltage: 1e-3, z: Complex64::new(3e3, -4e3) };
        let g = 480.0;
        let w = josephson_frequency(s.voltage, &K);
        let ds = DickeState { n: 0.0, z: s.z, total: 1e4 };
        let a = superradiant_power(g, &s, &K);
        let b = dicke_power(w, g, &ds, &K);
        assert!((a - b).abs() < 1e-12 * b);
        // the emission term itself: removing it changes V' by 2 e gamma_e |z|^2 / C
        let d1 = rhs_superradiant_jj(&p, &K, g, &s);
        let d0 = rhs_superradiant_jj(&p, &K, 0.0, &s);
        let expect = 2.0 * K.e * g * s.z.norm_sqr() / p.capacitance;
        assert!(((d0.voltage - d1.voltage) - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn efficiency_routes_agree() {
        let p = PhysicalParams::new(1.0, 3e-13, Complex64::new(1e9, 0.0), 1e-3).unwrap();
        let eta = efficiency_open_space(&p, &K, 1e-3, 1e-9, 1e-3).unwrap();
        let r = RadiationParams::from_voltage(1e-3, 1e-9, &K).unwrap();
        let eta2 = efficiency_from_rate(r.gamma_e, 3e-13, 1e-3, 1e-3, &K).unwrap();
        assert!((eta - eta2).abs() < 1e-10 * eta);
        let z0 = coherence_from_critical_current(3e-13, 1e-3, &K);
        let eta3 = efficiency_from_coherence(r.gamma_e, z0, 1e-3, &K).unwrap();
        assert!((eta - eta3).abs() < 1e-10 * eta);
        assert!((coherence_weak_damping(2.0, 4.0).unwrap() - 0.25).abs() < 1e-15);
    }
}
