//! The two-mode squeezing channel a resonant strain wave imprints on the
//! phonon pair, and the Bogoliubov ↔ phase-space dictionary.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{apply_symplectic, squeeze_quadrature_block, two_mode_squeezer, CovarianceMatrix, SymplecticMatrix};
use crate::model::{mode_frequency, ModePair, PhysicalParams};

/// Default upper bound on the strain amplitude.
pub const DEFAULT_STRAIN_CAP: f64 = 1e-2;

/// A sinusoidal plus-polarized wave `h(t) = ε sin Ωt` acting for `duration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WaveParams {
    pub strain: f64,
    pub angular_frequency: f64,
    pub duration: f64,
}

impl WaveParams {
    pub fn new(strain: f64, angular_frequency: f64, duration: f64) -> Result<Self> {
        Self::with_cap(strain, angular_frequency, duration, DEFAULT_STRAIN_CAP)
    }

    pub fn with_cap(strain: f64, angular_frequency: f64, duration: f64, cap: f64) -> Result<Self> {
        if !(strain.is_finite() && (0.0..=cap).contains(&strain)) {
            return Err(Error::InvalidArgument(format!("strain {strain} outside [0, {cap}]")));
        }
        if !(angular_frequency.is_finite() && angular_frequency > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wave frequency must be positive, got {angular_frequency}"
            )));
        }
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::InvalidArgument(format!("duration must be non-negative, got {duration}")));
        }
        Ok(Self { strain, angular_frequency, duration })
    }

    /// Wave tuned to `ω_n + ω_m`.
    pub fn resonant(params: &PhysicalParams, modes: ModePair, strain: f64, duration: f64) -> Result<Self> {
        Self::new(strain, resonant_frequency(params, modes), duration)
    }
}

/// `h(t) = ε sin Ωt`.
pub fn gw_strain(wave: &WaveParams, time: f64) -> f64 {
    wave.strain * (wave.angular_frequency * time).sin()
}

/// `ω_n + ω_m`.
pub fn resonant_frequency(params: &PhysicalParams, modes: ModePair) -> f64 {
    mode_frequency(params, modes.n) + mode_frequency(params, modes.m)
}

/// Linear growth rate of `|β_nm|` per unit strain, plus the squeezing
/// quadrature of the channel relative to the seed squeezer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelModel {
    /// 1/s per unit strain.
    pub rate_per_strain: f64,
    pub phase: f64,
    /// Where `rate_per_strain` came from.
    pub provenance: String,
}

impl ChannelModel {
    pub fn new(rate_per_strain: f64, phase: f64, provenance: impl Into<String>) -> Result<Self> {
        if !(rate_per_strain.is_finite() && rate_per_strain > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "channel rate must be positive, got {rate_per_strain}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidArgument("channel phase must be finite".into()));
        }
        Ok(Self { rate_per_strain, phase, provenance: provenance.into() })
    }

    /// `d s / d ε = R t` for an interrogation of length `t`.
    pub fn squeezing_per_strain(&self, t: f64) -> f64 {
        self.rate_per_strain * t
    }
}

/// How the channel matrix is built from the squeezing parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChannelForm {
    /// The two-mode squeezer `S(s, φ)`; exactly symplectic.
    Exact,
    /// `I + s G(φ)`, with `G` the squeezer generator; symplectic only to first order.
    FirstOrder,
}

/// `s = ε R t`.
pub fn channel_squeezing(wave: &WaveParams, model: &ChannelModel) -> f64 {
    wave.strain * model.rate_per_strain * wave.duration
}

pub fn channel_symplectic(wave: &WaveParams, model: &ChannelModel) -> Result<SymplecticMatrix> {
    two_mode_squeezer(channel_squeezing(wave, model), model.phase)
}

/// Generator `d S(s, φ) / ds` at `s = 0`.
pub fn squeezer_generator(phase: f64) -> Matrix4<f64> {
    let block = squeeze_quadrature_block(phase);
    let mut g = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            g[(i, j + 2)] = block[(i, j)];
            g[(i + 2, j)] = block[(i, j)];
        }
    }
    g
}

/// The truncated channel `I + s G(φ)`.
pub fn first_order_channel(s: f64, phase: f64) -> Matrix4<f64> {
    Matrix4::identity() + squeezer_generator(phase) * s
}

/// `Sᵀ σ₀ S` for the exact channel.
pub fn evolved_state(sigma0: &CovarianceMatrix, wave: &WaveParams, model: &ChannelModel) -> Result<CovarianceMatrix> {
    apply_symplectic(&channel_symplectic(wave, model)?, sigma0)
}

/// Field-operator map `a_k → Σ_j α_kj a_j + β_kj a_j†`.
#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovSet {
    pub alpha: DMatrix<Complex64>,
    pub beta: DMatrix<Complex64>,
}

/// Max-norm residuals of the two canonical identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `αα† − ββ† − I`
    pub unitarity: f64,
    /// `αβᵀ − βαᵀ`
    pub symmetry: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.unitarity.max(self.symmetry)
    }
}

fn complex_max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

impl BogoliubovSet {
    pub fn new(alpha: DMatrix<Complex64>, beta: DMatrix<Complex64>) -> Result<Self> {
        if !alpha.is_square() || alpha.shape() != beta.shape() || alpha.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "α {:?} and β {:?} must be equal square shapes",
                alpha.shape(),
                beta.shape()
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            alpha: DMatrix::identity(n_modes, n_modes),
            beta: DMatrix::zeros(n_modes, n_modes),
        }
    }

    /// Coefficients of `two_mode_squeezer(s, θ)`: `α = cosh s · I`,
    /// `β_12 = β_21 = −sinh s · e^{−iθ}`.
    pub fn two_mode_squeezer(s: f64, theta: f64) -> Self {
        let mut alpha = DMatrix::zeros(2, 2);
        alpha[(0, 0)] = Complex64::from(s.cosh());
        alpha[(1, 1)] = Complex64::from(s.cosh());
        let b = -Complex64::from_polar(s.sinh(), -theta);
        let mut beta = DMatrix::zeros(2, 2);
        beta[(0, 1)] = b;
        beta[(1, 0)] = b;
        Self { alpha, beta }
    }

    pub fn n_modes(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn identity_residuals(&self) -> IdentityResiduals {
        let n = self.n_modes();
        let a = &self.alpha;
        let b = &self.beta;
        let unit = a * a.adjoint() - b * b.adjoint() - DMatrix::<Complex64>::identity(n, n);
        let sym = a * b.transpose() - b * a.transpose();
        IdentityResiduals { unitarity: complex_max_abs(&unit), symmetry: complex_max_abs(&sym) }
    }
}

/// Assembles the real `2N × 2N` matrix from 2×2 blocks
/// `[[Re(α−β), Im(α+β)], [−Im(α−β), Re(α+β)]]`.
///
/// Fails when either canonical identity is violated beyond `tol`.
pub fn bogoliubov_to_symplectic(bg: &BogoliubovSet, tol: f64) -> Result<SymplecticMatrix> {
    let res = bg.identity_residuals();
    if !(res.max() <= tol) {
        return Err(Error::InvalidArgument(format!(
            "Bogoliubov identities violated: unitarity residual {:.3e}, symmetry residual {:.3e}, tolerance {tol:.1e}",
            res.unitarity, res.symmetry
        )));
    }
    let n = bg.n_modes();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for j in 0..n {
            let a = bg.alpha[(k, j)];
            let b = bg.beta[(k, j)];
            let diff = a - b;
            let sum = a + b;
            s[(2 * k, 2 * j)] = diff.re;
            s[(2 * k, 2 * j + 1)] = sum.im;
            s[(2 * k + 1, 2 * j)] = -diff.im;
            s[(2 * k + 1, 2 * j + 1)] = sum.re;
        }
    }
    Ok(SymplecticMatrix::from_matrix_unchecked(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
    use crate::gaussian::{is_symplectic, purity, symplectic_eigenvalues};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn trap() -> PhysicalParams {
        PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 0.0).unwrap()
    }

    #[test]
    fn strain_profile() {
        let w = WaveParams::new(1e-3, 2.0, 1.0).unwrap();
        assert_eq!(gw_strain(&w, 0.0), 0.0);
        assert_relative_eq!(gw_strain(&w, FRAC_PI_2 / 2.0), 1e-3, max_relative = 1e-15);
        let flat = WaveParams::new(0.0, 2.0, 1.0).unwrap();
        assert_eq!(gw_strain(&flat, 0.37), 0.0);
        assert!(WaveParams::new(0.5, 1.0, 1.0).is_err());
        assert!(WaveParams::new(1e-3, 0.0, 1.0).is_err());
    }

    #[test]
    fn resonance() {
        let p = trap();
        let omega1 = mode_frequency(&p, 1);
        assert_relative_eq!(resonant_frequency(&p, ModePair::new(1, 2).unwrap()), 3.0 * omega1, max_relative = 1e-15);
        assert_relative_eq!(resonant_frequency(&p, ModePair::new(1, 6).unwrap()), 7.0 * omega1, max_relative = 1e-15);
        let long = PhysicalParams::new(2.0 * MICROMETER, 0.01, RB87_MASS, 1e-7, 0.0).unwrap();
        assert_relative_eq!(
            resonant_frequency(&long, ModePair::new(1, 2).unwrap()),
            0.5 * resonant_frequency(&p, ModePair::new(1, 2).unwrap()),
            max_relative = 1e-15
        );
    }

    #[test]
    fn squeezing_is_linear() {
        let model = ChannelModel::new(1.1e4, FRAC_PI_2, "test").unwrap();
        let w = WaveParams::new(0.0, 1.0, 2.0).unwrap();
        assert_eq!(channel_squeezing(&w, &model), 0.0);
        let a = channel_squeezing(&WaveParams::new(1e-5, 1.0, 2.0).unwrap(), &model);
        let b = channel_squeezing(&WaveParams::new(1e-5, 1.0, 4.0).unwrap(), &model);
        assert_eq!(b, 2.0 * a);
        assert!(ChannelModel::new(0.0, 0.0, "").is_err());
    }

    #[test]
    fn channel_matrix() {
        let model = ChannelModel::new(1e4, 0.3, "test").unwrap();
        let none = WaveParams::new(0.0, 1.0, 5.0).unwrap();
        assert_eq!(channel_symplectic(&none, &model).unwrap().into_matrix(), DMatrix::identity(4, 4));
        let w = WaveParams::new(1e-3, 1.0, 0.05).unwrap();
        assert!(is_symplectic(channel_symplectic(&w, &model).unwrap().matrix(), 1e-12).unwrap());
    }

    #[test]
    fn first_order_agrees_to_second_order() {
        for s in [1e-2, 1e-3, 1e-4] {
            let exact = two_mode_squeezer(s, 0.8).unwrap();
            let approx = first_order_channel(s, 0.8);
            let diff = (DMatrix::from_column_slice(4, 4, approx.as_slice()) - exact.matrix()).amax();
            assert!(diff <= 0.6 * s * s, "s={s} diff={diff}");
        }
    }

    #[test]
    fn bogoliubov_assembly() {
        let id = bogoliubov_to_symplectic(&BogoliubovSet::identity(3), 1e-12).unwrap();
        assert_eq!(id.into_matrix(), DMatrix::identity(6, 6));
        for (s, theta) in [(0.7, FRAC_PI_2), (0.3, 0.0), (1.1, 2.0)] {
            let bg = BogoliubovSet::two_mode_squeezer(s, theta);
            assert!(bg.identity_residuals().max() <= 1e-14);
            let from_bg = bogoliubov_to_symplectic(&bg, 1e-12).unwrap();
            let direct = two_mode_squeezer(s, theta).unwrap();
            assert!((from_bg.matrix() - direct.matrix()).amax() < 1e-14, "s={s} θ={theta}");
        }
        // The i·sinh s pattern is the θ = π/2 squeezer.
        let s: f64 = 0.4;
        let mut alpha = DMatrix::zeros(2, 2);
        alpha[(0, 0)] = Complex64::from(s.cosh());
        alpha[(1, 1)] = Complex64::from(s.cosh());
        let mut beta = DMatrix::zeros(2, 2);
        beta[(0, 1)] = Complex64::new(0.0, s.sinh());
        beta[(1, 0)] = Complex64::new(0.0, s.sinh());
        let m = bogoliubov_to_symplectic(&BogoliubovSet::new(alpha, beta).unwrap(), 1e-12).unwrap();
        assert!((m.matrix() - two_mode_squeezer(s, FRAC_PI_2).unwrap().matrix()).amax() < 1e-15);
    }

    #[test]
    fn bogoliubov_violation_reports_residual() {
        let mut bg = BogoliubovSet::identity(2);
        bg.beta[(0, 1)] = Complex64::new(0.1, 0.0);
        let err = bogoliubov_to_symplectic(&bg, 1e-6).unwrap_err();
        assert!(err.to_string().contains("residual"));
    }

    #[test]
    fn evolved_state_properties() {
        let model = ChannelModel::new(1e4, FRAC_PI_2, "test").unwrap();
        let vac = CovarianceMatrix::vacuum(2);
        let still = WaveParams::new(0.0, 3.0, 1.0).unwrap();
        assert_eq!(evolved_state(&vac, &still, &model).unwrap(), vac);
        let w = WaveParams::new(1e-4, 3.0, 0.5).unwrap();
        let s = channel_squeezing(&w, &model);
        let out = evolved_state(&vac, &w, &model).unwrap();
        let tmsv = apply_symplectic(&two_mode_squeezer(s, FRAC_PI_2).unwrap(), &vac).unwrap();
        assert!((out.matrix() - tmsv.matrix()).amax() < 1e-14);
        let warm = CovarianceMatrix::williamson_diagonal(&[1.3, 1.05]).unwrap();
        let moved = evolved_state(&warm, &w, &model).unwrap();
        let nus = symplectic_eigenvalues(&moved).unwrap();
        assert_relative_eq!(nus[0], 1.3, max_relative = 1e-12);
        assert_relative_eq!(nus[1], 1.05, max_relative = 1e-12);
        assert_relative_eq!(purity(&moved).unwrap(), 1.0 / (1.3 * 1.05), max_relative = 1e-12);
    }
}
