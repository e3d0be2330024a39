//! Box-trapped condensate: phonon spectrum, thermal Williamson data,
//! initial thermal two-mode squeezed states and regime checks.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::gaussian::{apply_symplectic, two_mode_squeezer, CovarianceMatrix};

/// Dial settings of the trap, SI units throughout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysicalParams {
    pub trap_length: f64,
    pub sound_speed: f64,
    pub atom_mass: f64,
    /// Chemical potential divided by k_B, in kelvin.
    pub chemical_potential: f64,
    pub temperature: f64,
}

impl PhysicalParams {
    /// Validates positivity (temperature may be zero) and `c_s < 10⁻³ c`.
    pub fn new(
        trap_length: f64,
        sound_speed: f64,
        atom_mass: f64,
        chemical_potential: f64,
        temperature: f64,
    ) -> Result<Self> {
        let positive = [
            ("trap_length", trap_length),
            ("sound_speed", sound_speed),
            ("atom_mass", atom_mass),
            ("chemical_potential", chemical_potential),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be non-negative, got {temperature}"
            )));
        }
        if sound_speed >= 1e-3 * SPEED_OF_LIGHT {
            return Err(Error::InvalidArgument(format!(
                "sound speed {sound_speed} m/s is not small against the speed of light"
            )));
        }
        Ok(Self { trap_length, sound_speed, atom_mass, chemical_potential, temperature })
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.trap_length, self.sound_speed, self.atom_mass, self.chemical_potential, temperature)
    }

    /// Same sound speed, trap length rescaled so the fundamental is `omega1`.
    pub fn with_fundamental(&self, omega1: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega1 > 0.0) {
            return Err(Error::InvalidArgument(format!("fundamental frequency must be positive, got {omega1}")));
        }
        Self::new(PI * self.sound_speed / omega1, self.sound_speed, self.atom_mass, self.chemical_potential, self.temperature)
    }

    /// Fundamental angular frequency `π c_s / L`.
    pub fn omega1(&self) -> f64 {
        PI * self.sound_speed / self.trap_length
    }
}

/// Two phonon modes `n < m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModePair {
    pub n: u32,
    pub m: u32,
}

impl ModePair {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n == 0 || n >= m {
            return Err(Error::InvalidArgument(format!("mode pair needs 1 <= n < m, got ({n}, {m})")));
        }
        Ok(Self { n, m })
    }
}

/// Angular frequency `n π c_s / L` of box mode `n`.
pub fn mode_frequency(params: &PhysicalParams, n: u32) -> f64 {
    f64::from(n) * PI * params.sound_speed / params.trap_length
}

/// `ħω / (k_B T)`; infinite at zero temperature.
pub fn inverse_temperature(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        f64::INFINITY
    } else {
        HBAR * omega / (BOLTZMANN * temperature)
    }
}

/// `coth(ħω / 2k_B T)`, exactly 1 at zero temperature.
pub fn thermal_nu(omega: f64, temperature: f64) -> f64 {
    let beta = inverse_temperature(omega, temperature);
    1.0 + nu_excess(beta)
}

/// `coth(β/2) − 1 = 2/(e^β − 1)`.
fn nu_excess(beta: f64) -> f64 {
    if beta.is_infinite() {
        0.0
    } else {
        2.0 / beta.exp_m1()
    }
}

/// Temperature at which mode frequency `omega` has Boltzmann factor `x`.
pub fn temperature_for_occupation(omega: f64, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!("Boltzmann factor must lie in (0, 1), got {x}")));
    }
    Ok(HBAR * omega / (BOLTZMANN * -x.ln()))
}

/// How deep a mode sits in the quantum regime `β ≫ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuantumRegime {
    /// β ≥ 3
    Comfortable,
    /// 1 ≤ β < 3
    Marginal,
    /// β < 1
    Flagged,
}

impl QuantumRegime {
    fn of(beta: f64) -> Self {
        if beta >= 3.0 {
            Self::Comfortable
        } else if beta >= 1.0 {
            Self::Marginal
        } else {
            Self::Flagged
        }
    }
}

/// Thermal data of one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeThermal {
    pub omega: f64,
    pub beta: f64,
    pub nu: f64,
    /// `ν − 1`, kept separately because `ν` rounds to 1 deep in the quantum regime.
    pub nu_excess: f64,
    /// Boltzmann factor `e^{−β}`.
    pub x: f64,
}

impl ModeThermal {
    pub fn new(omega: f64, temperature: f64) -> Self {
        let beta = inverse_temperature(omega, temperature);
        let excess = nu_excess(beta);
        Self { omega, beta, nu: 1.0 + excess, nu_excess: excess, x: (-beta).exp() }
    }

    /// The truncated expansion `1 + 2e^{−β}`.
    pub fn nu_first_order(&self) -> f64 {
        1.0 + 2.0 * self.x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermalSpec {
    pub n: ModeThermal,
    pub m: ModeThermal,
    /// Classification of the lower (hotter) mode.
    pub regime: QuantumRegime,
}

impl ThermalSpec {
    pub fn nus(&self) -> [f64; 2] {
        [self.n.nu, self.m.nu]
    }

    pub fn nu_excess(&self) -> [f64; 2] {
        [self.n.nu_excess, self.m.nu_excess]
    }
}

/// Thermal symplectic eigenvalues of both modes. Fails when `β_n < 0.1`.
pub fn thermal_spec(params: &PhysicalParams, modes: ModePair) -> Result<ThermalSpec> {
    let n = ModeThermal::new(mode_frequency(params, modes.n), params.temperature);
    let m = ModeThermal::new(mode_frequency(params, modes.m), params.temperature);
    if n.beta < 0.1 {
        return Err(Error::RegimeViolation(format!(
            "ħω_n/k_BT = {:.4} is far outside the quantum regime",
            n.beta
        )));
    }
    Ok(ThermalSpec { n, m, regime: QuantumRegime::of(n.beta) })
}

/// `S(r,θ)ᵀ · diag(ν_n, ν_n, ν_m, ν_m) · S(r,θ)` with exact thermal eigenvalues.
pub fn initial_state(params: &PhysicalParams, modes: ModePair, r: f64, theta: f64) -> Result<CovarianceMatrix> {
    let thermal = thermal_spec(params, modes)?;
    let seed = two_mode_squeezer(r, theta)?;
    let diag = CovarianceMatrix::williamson_diagonal(&thermal.nus())?;
    apply_symplectic(&seed, &diag)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Grade {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grade::Pass => "pass",
            Grade::Warn => "warn",
            Grade::Fail => "fail",
        })
    }
}

// Relative slack so that ratios sitting exactly on a decade boundary grade cleanly.
const BOUNDARY_SLACK: f64 = 1e-12;

fn grade_small(ratio: f64) -> Grade {
    if ratio <= 0.1 * (1.0 + BOUNDARY_SLACK) {
        Grade::Pass
    } else if ratio <= 1.0 * (1.0 + BOUNDARY_SLACK) {
        Grade::Warn
    } else {
        Grade::Fail
    }
}

fn grade_large(ratio: f64) -> Grade {
    if ratio >= 10.0 * (1.0 - BOUNDARY_SLACK) {
        Grade::Pass
    } else if ratio >= 1.0 * (1.0 - BOUNDARY_SLACK) {
        Grade::Warn
    } else {
        Grade::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub name: &'static str,
    pub ratio: f64,
    pub grade: Grade,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub checks: Vec<RegimeCheck>,
}

impl ValidityReport {
    pub fn worst(&self) -> Grade {
        self.checks.iter().map(|c| c.grade).max_by_key(|g| *g as u8).unwrap_or(Grade::Pass)
    }

    pub fn get(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `name=grade` pairs joined by `;`.
    pub fn flags(&self) -> String {
        self.checks.iter().map(|c| format!("{}={}", c.name, c.grade)).collect::<Vec<_>>().join(";")
    }
}

/// Grades the four approximations the model leans on:
/// linear dispersion `ħk_m ≪ m₀c_s`, quantum regime `k_BT ≪ ħω_n`,
/// cold cloud `k_BT ≪ μ`, and long interrogation `ω₁t ≫ 1`.
pub fn validate_regime(params: &PhysicalParams, modes: ModePair, t: f64) -> ValidityReport {
    let k_m = f64::from(modes.m) * PI / params.trap_length;
    let dispersion = HBAR * k_m / (params.atom_mass * params.sound_speed);
    let quantum = BOLTZMANN * params.temperature / (HBAR * mode_frequency(params, modes.n));
    let cold = params.temperature / params.chemical_potential;
    let duration = params.omega1() * t;
    ValidityReport {
        checks: vec![
            RegimeCheck { name: "dispersion", ratio: dispersion, grade: grade_small(dispersion) },
            RegimeCheck { name: "quantum", ratio: quantum, grade: grade_small(quantum) },
            RegimeCheck { name: "chemical", ratio: cold, grade: grade_small(cold) },
            RegimeCheck { name: "duration", ratio: duration, grade: grade_large(duration) },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
    use crate::gaussian::{purity, symplectic_eigenvalues};
    use approx::assert_relative_eq;

    fn rb(temperature_nk: f64) -> PhysicalParams {
        PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, temperature_nk * NANOKELVIN).unwrap()
    }

    #[test]
    fn fundamental_of_reference_trap() {
        let p = rb(0.0);
        assert_relative_eq!(mode_frequency(&p, 1), 2.0 * PI * 5e3, max_relative = 1e-15);
        assert_eq!(mode_frequency(&p, 2), 2.0 * mode_frequency(&p, 1));
        assert_eq!(mode_frequency(&p, 6), 6.0 * mode_frequency(&p, 1));
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(-1.0, 0.01, RB87_MASS, 1e-7, 0.0).is_err());
        assert!(PhysicalParams::new(1e-6, 0.01, RB87_MASS, 1e-7, -1.0).is_err());
        assert!(PhysicalParams::new(1e-6, 1e6, RB87_MASS, 1e-7, 0.0).is_err());
        assert!(ModePair::new(2, 1).is_err());
        assert!(ModePair::new(0, 1).is_err());
        assert!(ModePair::new(1, 1).is_err());
    }

    #[test]
    fn thermal_nu_values() {
        assert_eq!(thermal_nu(1e4, 0.0), 1.0);
        let omega = 2.0 * PI * 5e3;
        let t = 150.0 * NANOKELVIN;
        let beta = inverse_temperature(omega, t);
        // Reference values from a 50-digit evaluation of coth.
        assert_relative_eq!(beta, 1.599_747_690_1, max_relative = 1e-9);
        assert_relative_eq!(thermal_nu(omega, t), 1.506_100_678_9, max_relative = 1e-9);
    }

    #[test]
    fn expansion_error_is_second_order() {
        for beta in [3.0, 4.0, 6.0, 10.0] {
            let omega = 1e4;
            let t = HBAR * omega / (BOLTZMANN * beta);
            let th = ModeThermal::new(omega, t);
            let err = th.nu - th.nu_first_order();
            let x2 = (-2.0 * beta).exp();
            assert!(err > 0.0 && err <= 2.5 * x2, "beta={beta} err={err} x2={x2}");
        }
    }

    #[test]
    fn thermal_spec_structure() {
        let p = rb(0.0);
        let pair = ModePair::new(1, 2).unwrap();
        let s = thermal_spec(&p, pair).unwrap();
        assert_eq!((s.n.nu, s.m.nu, s.n.x, s.m.x), (1.0, 1.0, 0.0, 0.0));
        let s = thermal_spec(&rb(150.0), pair).unwrap();
        assert_relative_eq!(s.m.beta, 2.0 * s.n.beta, max_relative = 1e-15);
        assert_relative_eq!(s.n.beta.exp(), 4.951_782_9, max_relative = 1e-7);
        assert!(s.m.x < 0.25 * s.n.x);
        assert_eq!(s.regime, QuantumRegime::Marginal);
        assert_relative_eq!(s.n.nu, 1.0 / (0.5 * s.n.beta).tanh(), max_relative = 1e-12);
        let hot = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 1e-7, 1e-3).unwrap();
        assert!(matches!(thermal_spec(&hot, pair), Err(Error::RegimeViolation(_))));
    }

    #[test]
    fn initial_state_cases() {
        let pair = ModePair::new(1, 2).unwrap();
        let vac = initial_state(&rb(0.0), pair, 0.0, 0.0).unwrap();
        assert_eq!(vac, CovarianceMatrix::vacuum(2));
        let pure = initial_state(&rb(0.0), pair, 1.5, 0.3).unwrap();
        assert_relative_eq!(purity(&pure).unwrap(), 1.0, max_relative = 1e-10);
        let warm = initial_state(&rb(150.0), pair, 2.0, 0.0).unwrap();
        let spec = thermal_spec(&rb(150.0), pair).unwrap();
        let nus = symplectic_eigenvalues(&warm).unwrap();
        assert_relative_eq!(nus[0], spec.n.nu, max_relative = 1e-10);
        assert_relative_eq!(nus[1], spec.m.nu, max_relative = 1e-10);
    }

    #[test]
    fn regime_report() {
        let pair = ModePair::new(1, 2).unwrap();
        let p = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 10.0 * NANOKELVIN).unwrap();
        let report = validate_regime(&p, pair, 10.0 / p.omega1());
        let disp = report.get("dispersion").unwrap();
        assert_relative_eq!(disp.ratio, 0.459_135_9, max_relative = 1e-6);
        assert_eq!(disp.grade, Grade::Warn);
        let chem = report.get("chemical").unwrap();
        assert_relative_eq!(chem.ratio, 0.1, max_relative = 1e-12);
        assert_eq!(chem.grade, Grade::Pass);
        let dur = report.get("duration").unwrap();
        assert_relative_eq!(dur.ratio, 10.0, max_relative = 1e-12);
        assert_eq!(dur.grade, Grade::Pass);
        assert_eq!(report.worst(), Grade::Warn);
        assert_eq!(report.flags(), "dispersion=warn;quantum=pass;chemical=pass;duration=pass");
        let short = validate_regime(&p, pair, 0.5 / p.omega1());
        assert_eq!(short.get("duration").unwrap().grade, Grade::Fail);
    }

    #[test]
    fn occupation_round_trip() {
        let omega = 2.0 * PI * 5e3;
        let t = temperature_for_occupation(omega, 0.01).unwrap();
        assert_relative_eq!(ModeThermal::new(omega, t).x, 0.01, max_relative = 1e-12);
    }
}
