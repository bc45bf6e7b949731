//! State and parameter types plus the right-hand sides of the junction
//! equations of motion.
//!
//! The dimensionless system evolves `(v, i_J, i_S)` in the reduced time
//! `tau = gamma * t`:
//!
//! ```text
//! dv/dtau   = i_tot - v - i_J
//! di_J/dtau = -i_J - i_S * v + 4 alpha v
//! di_S/dtau = -i_S + i_J * v
//! ```
//!
//! The coherence is carried as two reals; `zeta = i_S + i i_J`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fundamental constants (SI, CODATA 2018 exact/recommended values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Elementary charge (C).
    pub e: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Vacuum permeability (H/m).
    pub mu0: f64,
    /// Speed of light (m/s).
    pub c: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        e: 1.602_176_634e-19,
        hbar: 1.054_571_817e-34,
        mu0: 1.256_637_062_12e-6,
        c: 299_792_458.0,
    };

    /// Flux period `pi hbar / e` of the two-channel interference term.
    pub fn flux_period(&self) -> f64 {
        std::f64::consts::PI * self.hbar / self.e
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// Junction parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// R (ohm).
    pub resistance: f64,
    /// C (F).
    pub capacitance: f64,
    /// Tunneling rate K (1/s); complex in general, only |K| enters alpha.
    pub tunneling: Complex64,
    /// Relaxation rate gamma = 1/(RC) (1/s).
    pub gamma: f64,
    /// External current I (A).
    pub current: f64,
    /// Optional per-electrode pumping rates (gamma_up_1, gamma_up_2) (1/s).
    pub pumping: Option<(f64, f64)>,
}

const GAMMA_RC_REL_TOL: f64 = 1e-9;

impl PhysicalParams {
    /// Builds parameters with `gamma = 1/(RC)`.
    pub fn new(resistance: f64, capacitance: f64, tunneling: Complex64, current: f64) -> Result<Self> {
        let p = PhysicalParams {
            resistance,
            capacitance,
            tunneling,
            gamma: 1.0 / (resistance * capacitance),
            current,
            pumping: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters with an explicit relaxation rate, which must agree with `1/(RC)`.
    pub fn with_gamma(
        resistance: f64,
        capacitance: f64,
        gamma: f64,
        tunneling: Complex64,
        current: f64,
    ) -> Result<Self> {
        let p = PhysicalParams {
            resistance,
            capacitance,
            tunneling,
            gamma,
            current,
            pumping: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters whose external current follows from the pumping rates,
    /// `I = -e (gamma_up_1 - gamma_up_2)`.
    pub fn from_pumping(
        resistance: f64,
        capacitance: f64,
        tunneling: Complex64,
        gamma_up_1: f64,
        gamma_up_2: f64,
        k: &PhysicalConstants,
    ) -> Result<Self> {
        if !(gamma_up_1 >= 0.0 && gamma_up_2 >= 0.0) {
            return Err(Error::invalid("gamma_up", "pumping rates must be non-negative"));
        }
        let mut p = Self::new(
            resistance,
            capacitance,
            tunneling,
            external_current_from_rates(gamma_up_1, gamma_up_2, k),
        )?;
        p.pumping = Some((gamma_up_1, gamma_up_2));
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("resistance", self.resistance)?;
        positive("capacitance", self.capacitance)?;
        positive("gamma", self.gamma)?;
        if !self.tunneling.re.is_finite() || !self.tunneling.im.is_finite() {
            return Err(Error::invalid("tunneling", "must be finite"));
        }
        if !self.current.is_finite() {
            return Err(Error::invalid("current", "must be finite"));
        }
        let rc_rate = 1.0 / (self.resistance * self.capacitance);
        if ((self.gamma - rc_rate) / rc_rate).abs() > GAMMA_RC_REL_TOL {
            return Err(Error::invalid(
                "gamma",
                format!("gamma = {} differs from 1/(RC) = {}", self.gamma, rc_rate),
            ));
        }
        if let Some((a, b)) = self.pumping {
            if !(a >= 0.0 && b >= 0.0) {
                return Err(Error::invalid("gamma_up", "pumping rates must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn tunneling_abs(&self) -> f64 {
        self.tunneling.norm()
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

/// AC field drive of the junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    /// Dimensionless field amplitude `v_f`.
    pub v_f: f64,
    /// Dimensionless field frequency `omega_f`.
    pub omega_f: f64,
}

/// The reduced model knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub alpha: f64,
    pub i_tot: f64,
    pub drive: Option<Drive>,
}

impl DimensionlessParams {
    pub fn new(alpha: f64, i_tot: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("alpha must be >= 0, got {alpha}")));
        }
        if !i_tot.is_finite() {
            return Err(Error::invalid("i_tot", "must be finite"));
        }
        Ok(DimensionlessParams {
            alpha,
            i_tot,
            drive: None,
        })
    }

    pub fn with_drive(mut self, v_f: f64, omega_f: f64) -> Result<Self> {
        if !(omega_f > 0.0 && omega_f.is_finite()) {
            return Err(Error::invalid("omega_f", format!("must be > 0, got {omega_f}")));
        }
        if !v_f.is_finite() {
            return Err(Error::invalid("v_f", "must be finite"));
        }
        self.drive = Some(Drive { v_f, omega_f });
        Ok(self)
    }
}

/// Characteristic units of the dimensionless system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    /// Voltage unit hbar/(2eRC) (V).
    pub v_tilde: f64,
    /// Current unit V_tilde/R (A).
    pub i_tilde: f64,
    /// Time unit 1/gamma (s).
    pub t_scale: f64,
}

impl Scales {
    pub fn new(p: &PhysicalParams, k: &PhysicalConstants) -> Self {
        let v_tilde = k.hbar / (2.0 * k.e * p.resistance * p.capacitance);
        Scales {
            v_tilde,
            i_tilde: v_tilde / p.resistance,
            t_scale: 1.0 / p.gamma,
        }
    }

    /// Maps a density-matrix state onto the dimensionless `(v, i_J, i_S)`.
    ///
    /// `v = -e n / (C V_tilde)` and `zeta = 4 e conj(K) z / I_tilde`.
    pub fn map_mdm(&self, m: &MdmState, p: &PhysicalParams, k: &PhysicalConstants) -> State3 {
        let v = -k.e * m.n() / (p.capacitance * self.v_tilde);
        let zeta = m.z * p.tunneling.conj() * (4.0 * k.e / self.i_tilde);
        State3 {
            v,
            i_j: zeta.im,
            i_s: zeta.re,
        }
    }
}

/// Dynamical state `(v, i_J, i_S)` of the dimensionless system.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State3 {
    pub v: f64,
    pub i_j: f64,
    pub i_s: f64,
}

impl State3 {
    pub const fn new(v: f64, i_j: f64, i_s: f64) -> Self {
        State3 { v, i_j, i_s }
    }

    /// Complex coherence `zeta = i_S + i i_J`.
    pub fn zeta(&self) -> Complex64 {
        Complex64::new(self.i_s, self.i_j)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v, self.i_j, self.i_s]
    }

    pub fn norm(&self) -> f64 {
        (self.v * self.v + self.i_j * self.i_j + self.i_s * self.i_s).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.i_j.is_finite() && self.i_s.is_finite()
    }
}

impl From<[f64; 3]> for State3 {
    fn from(a: [f64; 3]) -> Self {
        State3::new(a[0], a[1], a[2])
    }
}

impl From<State3> for [f64; 3] {
    fn from(s: State3) -> Self {
        s.to_array()
    }
}

impl std::ops::Add for State3 {
    type Output = State3;
    fn add(self, o: State3) -> State3 {
        State3::new(self.v + o.v, self.i_j + o.i_j, self.i_s + o.i_s)
    }
}

impl std::ops::Sub for State3 {
    type Output = State3;
    fn sub(self, o: State3) -> State3 {
        State3::new(self.v - o.v, self.i_j - o.i_j, self.i_s - o.i_s)
    }
}

/// Macroscopic density matrix in the `(n1, n2, z)` parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdmState {
    pub n1: f64,
    pub n2: f64,
    pub z: Complex64,
}

impl MdmState {
    pub fn new(n1: f64, n2: f64, z: Complex64) -> Result<Self> {
        let m = MdmState { n1, n2, z };
        m.check_populations()?;
        if z.norm_sqr() > n1 * n2 * (1.0 + 1e-12) {
            return Err(Error::invalid("z", "|z|^2 must not exceed n1 n2"));
        }
        Ok(m)
    }

    fn check_populations(&self) -> Result<()> {
        if self.n1 >= 0.0 && self.n2 >= 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(
                "populations",
                format!("n1 = {}, n2 = {} must be non-negative", self.n1, self.n2),
            ))
        }
    }

    /// Population difference `n = n1 - n2`.
    pub fn n(&self) -> f64 {
        self.n1 - self.n2
    }

    /// Total pair number `N = n1 + n2`.
    pub fn total(&self) -> f64 {
        self.n1 + self.n2
    }

    /// Josephson phase `phi = arg z`.
    pub fn phase(&self) -> f64 {
        self.z.arg()
    }

    /// Energy difference `U = 2 e^2 n / C` between the electrodes (J).
    pub fn energy_difference(&self, capacitance: f64, k: &PhysicalConstants) -> f64 {
        2.0 * k.e * k.e * self.n() / capacitance
    }

    /// Junction voltage `V = -e n / C` (V).
    pub fn voltage(&self, capacitance: f64, k: &PhysicalConstants) -> f64 {
        -k.e * self.n() / capacitance
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.n1, self.n2, self.z.re, self.z.im]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        MdmState {
            n1: a[0],
            n2: a[1],
            z: Complex64::new(a[2], a[3]),
        }
    }
}

/// Reduced parameters and time unit for a physical junction.
pub fn nondimensionalize(
    p: &PhysicalParams,
    k: &PhysicalConstants,
) -> Result<(DimensionlessParams, Scales)> {
    p.validate()?;
    let scales = Scales::new(p, k);
    let alpha = p.tunneling.norm_sqr() / (p.gamma * p.gamma);
    let d = DimensionlessParams::new(alpha, p.current / scales.i_tilde)?;
    Ok((d, scales))
}

#[inline]
fn flow(alpha: f64, i_tot: f64, s: &State3, v_coupling: f64) -> State3 {
    State3 {
        v: i_tot - s.v - s.i_j,
        i_j: -s.i_j - s.i_s * v_coupling + 4.0 * alpha * s.v,
        i_s: -s.i_s + s.i_j * v_coupling,
    }
}

/// Autonomous right-hand side; any drive in `p` is ignored.
#[inline]
pub fn rhs_autonomous(p: &DimensionlessParams, s: &State3) -> State3 {
    flow(p.alpha, p.i_tot, s, s.v)
}

/// Autonomous right-hand side with an explicitly supplied bias current.
#[inline]
pub fn rhs_with_current(alpha: f64, i_tot: f64, s: &State3) -> State3 {
    flow(alpha, i_tot, s, s.v)
}

/// AC-field driven right-hand side.
///
/// The field shifts the voltage seen by the coherence rotation,
/// `v -> v + v_f cos(omega_f tau)`, in the `i_S v` and `i_J v` terms. The
/// voltage equation and the `4 alpha v` source keep the bare `v`.
#[inline]
pub fn rhs_driven(p: &DimensionlessParams, s: &State3, tau: f64) -> State3 {
    let shift = match p.drive {
        Some(d) => d.v_f * (d.omega_f * tau).cos(),
        None => 0.0,
    };
    flow(p.alpha, p.i_tot, s, s.v + shift)
}

/// Full dimensional density-matrix equations for equal electrode relaxation rates.
///
/// `nbar1`, `nbar2` are the stationary populations of the two electrodes.
/// The drive current is implicit: `I = -e gamma (nbar1 - nbar2)`.
pub fn rhs_mdm_full(
    p: &PhysicalParams,
    k: &PhysicalConstants,
    m: &MdmState,
    nbar1: f64,
    nbar2: f64,
) -> Result<MdmState> {
    m.check_populations()?;
    Ok(mdm_derivative(p, k, m, nbar1, nbar2))
}

/// Unchecked form of [`rhs_mdm_full`] for use inside integrators.
#[inline]
pub fn mdm_derivative(
    p: &PhysicalParams,
    k: &PhysicalConstants,
    m: &MdmState,
    nbar1: f64,
    nbar2: f64,
) -> MdmState {
    let g = p.gamma;
    let kk = p.tunneling;
    let i = Complex64::i();
    // -i K* z + i K z*  ==  2 Im(K* z)
    let transfer = (-i * kk.conj() * m.z + i * kk * m.z.conj()).re;
    let u_over_hbar = m.energy_difference(p.capacitance, k) / k.hbar;
    let dz = (i * u_over_hbar - g) * m.z - i * kk * m.n();
    MdmState {
        n1: -g * (m.n1 - nbar1) + transfer,
        n2: -g * (m.n2 - nbar2) - transfer,
        z: dz,
    }
}

/// External current `I = -e (gamma_up_1 - gamma_up_2)` (A).
pub fn external_current_from_rates(gamma_up_1: f64, gamma_up_2: f64, k: &PhysicalConstants) -> f64 {
    -k.e * (gamma_up_1 - gamma_up_2)
}

/// Closed-form relaxation of the total pair number, `N(t) = Nbar + (N0 - Nbar) e^{-gamma t}`.
pub fn total_number_relaxation(n0: f64, nbar: f64, gamma: f64, t: f64) -> f64 {
    nbar + (n0 - nbar) * (-gamma * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::fixed_point;

    fn k() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn unit_junction_scales() {
        let p = PhysicalParams::new(1.0, 1.0, Complex64::new(0.0, 0.0), 0.0).unwrap();
        let (d, s) = nondimensionalize(&p, &k()).unwrap();
        assert_eq!(s.v_tilde, k().hbar / (2.0 * k().e));
        assert_eq!(d.alpha, 0.0);
        assert_eq!(d.i_tot, 0.0);
    }

    #[test]
    fn alpha_from_tunneling_rate() {
        let p = PhysicalParams::new(1.0, 1.0, Complex64::new(2f64.sqrt(), 0.0), 0.0).unwrap();
        let (d, _) = nondimensionalize(&p, &k()).unwrap();
        assert!((d.alpha - 2.0).abs() < 1e-15);
        // phase of K does not matter
        let p = PhysicalParams::new(1.0, 1.0, Complex64::from_polar(2f64.sqrt(), 0.7), 0.0).unwrap();
        let (d, _) = nondimensionalize(&p, &k()).unwrap();
        assert!((d.alpha - 2.0).abs() < 1e-14);
    }

    #[test]
    fn realistic_junction_scales() {
        let (r, c) = (50.0, 3e-13);
        let gamma = 1.0 / (r * c);
        let v_tilde = k().hbar / (2.0 * k().e * r * c);
        let i_tilde = v_tilde / r;
        let p = PhysicalParams::with_gamma(r, c, gamma, Complex64::new(3.0 * gamma, 0.0), 30.0 * i_tilde)
            .unwrap();
        let (d, s) = nondimensionalize(&p, &k()).unwrap();
        assert!((d.alpha - 9.0).abs() < 1e-12);
        assert!((d.i_tot - 30.0).abs() < 1e-12);
        assert!((s.v_tilde / v_tilde - 1.0).abs() < 1e-15);
        assert!((s.i_tilde / i_tilde - 1.0).abs() < 1e-15);
        assert!((s.t_scale * gamma - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let z = Complex64::new(0.0, 0.0);
        assert!(PhysicalParams::new(0.0, 1.0, z, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, z, 0.0).is_err());
        assert!(PhysicalParams::with_gamma(1.0, 1.0, 0.0, z, 0.0).is_err());
        assert!(PhysicalParams::with_gamma(1.0, 1.0, 2.0, z, 0.0).is_err());
        assert!(DimensionlessParams::new(-1.0, 0.0).is_err());
        assert!(DimensionlessParams::new(1.0, 0.0).unwrap().with_drive(1.0, 0.0).is_err());
    }

    #[test]
    fn autonomous_rhs_examples() {
        let p = DimensionlessParams::new(1.3, 2.5).unwrap();
        assert_eq!(rhs_autonomous(&p, &State3::default()), State3::new(2.5, 0.0, 0.0));
        let p = DimensionlessParams::new(0.0, 0.0).unwrap();
        assert_eq!(rhs_autonomous(&p, &State3::new(1.0, 1.0, 1.0)), State3::new(-2.0, -2.0, 0.0));
    }

    #[test]
    fn fixed_point_is_stationary() {
        let p = DimensionlessParams::new(2.2, 30.293).unwrap();
        for fp in fixed_point(p.alpha, p.i_tot) {
            let r = rhs_autonomous(&p, &fp.state());
            assert!(r.norm() < 1e-12, "residual {r:?}");
        }
    }

    #[test]
    fn driven_rhs_examples() {
        let p = DimensionlessParams::new(3.0, 7.0).unwrap().with_drive(300.0, 20.0).unwrap();
        assert_eq!(rhs_driven(&p, &State3::default(), 0.0), State3::new(7.0, 0.0, 0.0));

        let s = State3::new(0.3, -1.2, 4.0);
        let tau = std::f64::consts::FRAC_PI_2 / 20.0 * 3.0;
        let node = rhs_driven(&p, &s, tau);
        let bare = rhs_autonomous(&p, &s);
        assert!((node - bare).norm() < 1e-10);

        let zero = DimensionlessParams::new(3.0, 7.0).unwrap().with_drive(0.0, 20.0).unwrap();
        for tau in [0.0, 0.1, 1.7, 123.4] {
            assert_eq!(rhs_driven(&zero, &s, tau), rhs_autonomous(&zero, &s));
        }
    }

    #[test]
    fn mdm_stationary_point() {
        let p = PhysicalParams::new(50.0, 3e-13, Complex64::new(1e11, 0.0), 0.0).unwrap();
        let m = MdmState::new(1200.0, 800.0, Complex64::new(0.0, 0.0)).unwrap();
        let d = rhs_mdm_full(&p, &k(), &m, 1200.0, 800.0).unwrap();
        assert_eq!(d.n1, 0.0);
        assert_eq!(d.n2, 0.0);
        // z = 0 but n != 0 still sources the coherence through K n
        let p0 = PhysicalParams::new(50.0, 3e-13, Complex64::new(0.0, 0.0), 0.0).unwrap();
        let d0 = rhs_mdm_full(&p0, &k(), &m, 1200.0, 800.0).unwrap();
        assert_eq!(d0.z, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mdm_decoupled_without_tunneling() {
        let p = PhysicalParams::new(50.0, 3e-13, Complex64::new(0.0, 0.0), 0.0).unwrap();
        let m = MdmState { n1: 10.0, n2: 4.0, z: Complex64::new(1.0, 2.0) };
        let d = rhs_mdm_full(&p, &k(), &m, 7.0, 7.0).unwrap();
        assert!((d.n1 + p.gamma * 3.0).abs() < 1e-6 * p.gamma);
        assert!((d.n2 - p.gamma * 3.0).abs() < 1e-6 * p.gamma);
        // |z| decays at rate gamma: d|z|^2/dt = 2 Re(z* dz) = -2 gamma |z|^2
        let dmod = 2.0 * (m.z.conj() * d.z).re;
        assert!((dmod + 2.0 * p.gamma * m.z.norm_sqr()).abs() < 1e-9 * p.gamma);
    }

    #[test]
    fn mdm_rejects_negative_population() {
        let p = PhysicalParams::new(1.0, 1.0, Complex64::new(1.0, 0.0), 0.0).unwrap();
        let m = MdmState { n1: -1.0, n2: 4.0, z: Complex64::new(0.0, 0.0) };
        assert!(rhs_mdm_full(&p, &k(), &m, 1.0, 1.0).is_err());
        assert!(MdmState::new(1.0, 1.0, Complex64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn external_current_signs() {
        let kk = k();
        assert_eq!(external_current_from_rates(3.0, 3.0, &kk), 0.0);
        assert!((external_current_from_rates(0.0, 5.0, &kk) - kk.e * 5.0).abs() < 1e-30);
        assert!((external_current_from_rates(10.0, 5.0, &kk) + kk.e * 5.0).abs() < 1e-30);
    }

    #[test]
    fn pumping_sets_current() {
        let kk = k();
        let p = PhysicalParams::from_pumping(1.0, 1.0, Complex64::new(0.0, 0.0), 0.0, 2.0, &kk).unwrap();
        assert!((p.current - 2.0 * kk.e).abs() < 1e-30);
        assert!(PhysicalParams::from_pumping(1.0, 1.0, Complex64::new(0.0, 0.0), -1.0, 2.0, &kk).is_err());
    }

    #[test]
    fn total_number_closed_form() {
        assert_eq!(total_number_relaxation(5.0, 5.0, 2.0, 3.0), 5.0);
        assert!((total_number_relaxation(9.0, 5.0, 2.0, 1e3) - 5.0).abs() < 1e-12);
        let t = std::f64::consts::LN_2 / 0.5;
        assert!((total_number_relaxation(7.0, 5.0, 0.5, t) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn mdm_accessors() {
        let kk = k();
        let m = MdmState::new(3.0, 1.0, Complex64::from_polar(1.0, 0.4)).unwrap();
        assert_eq!(m.n(), 2.0);
        assert_eq!(m.total(), 4.0);
        assert!((m.phase() - 0.4).abs() < 1e-15);
        let c = 2e-15;
        assert!((m.energy_difference(c, &kk) + 2.0 * kk.e * m.voltage(c, &kk)).abs() < 1e-30);
    }
}
