//! Numerical Bogoliubov coefficients of a box whose effective length is
//! modulated by the wave, and the calibration of the channel rate from them.
//!
//! The field is expanded on instantaneous box modes `√(2/L) sin(kπx/L)`.
//! With `λ = L̇/L` and antisymmetric coupling
//! `μ_kj = (−1)^{k+j} 2kj / (j² − k²)` the mode amplitudes obey
//!
//! ```text
//! q̇_k = p_k + λ Σ_j μ_kj q_j
//! ṗ_k = −ω_k(t)² q_k + λ Σ_j μ_kj p_j
//! ```
//!
//! which is the Hamiltonian flow of `½Σ(p² + ω²q²) + λ Σ μ_kj p_k q_j`.
//! Everything runs in units `c_s = L = 1`; SI conversion happens at the edges.
//! See `docs/mode_oracle.md` for the derivation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{resonant_frequency, BogoliubovSet, ChannelModel, IdentityResiduals, WaveParams};
use crate::error::{Error, Result};
use crate::model::{ModePair, PhysicalParams};
use crate::ode::{Dop853, StepStats};

/// How the strain enters the effective trap length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LengthConvention {
    /// `L(t) = L[1 + (ε/2) sin Ωt]`, the proper length under `g_xx = 1 + h`.
    ProperLength,
    /// `L(t) = L[1 + ε sin Ωt]`; doubles the rate.
    FullStrain,
}

impl LengthConvention {
    fn factor(self) -> f64 {
        match self {
            LengthConvention::ProperLength => 0.5,
            LengthConvention::FullStrain => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Number of box modes kept in the expansion.
    pub n_modes: usize,
    pub rtol: f64,
    pub atol: f64,
    pub convention: LengthConvention,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n_modes: 6, rtol: 1e-10, atol: 1e-12, convention: LengthConvention::ProperLength }
    }
}

impl OracleConfig {
    pub fn validate(&self, modes: ModePair) -> Result<()> {
        let needed = modes.m as usize + 4;
        if self.n_modes < needed.max(2) {
            return Err(Error::InvalidArgument(format!(
                "truncation {} too small for modes ({}, {}): need at least {needed}",
                self.n_modes, modes.n, modes.m
            )));
        }
        if !(self.rtol > 0.0 && self.rtol <= 1e-8 && self.atol > 0.0 && self.atol <= 1e-8) {
            return Err(Error::InvalidArgument(format!(
                "integrator tolerances must lie in (0, 1e-8], got rtol={} atol={}",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }

    /// Identity residual allowed after `omega1_t` radians of the fundamental:
    /// three times the tolerance per cycle of the fastest retained mode, since
    /// the integrator error drifts linearly in the number of cycles.
    pub fn residual_bound(&self, omega1_t: f64) -> f64 {
        let cycles = self.n_modes as f64 * omega1_t / (2.0 * PI);
        3.0 * self.rtol.max(self.atol) * cycles.max(1.0)
    }
}

/// Truncated mode system in scaled units.
#[derive(Clone, Debug)]
pub struct ModeSystem {
    n_modes: usize,
    coupling: DMatrix<f64>,
    /// `κε` with κ from the length convention.
    drive: f64,
    /// Wave frequency in units of `c_s / L`.
    frequency: f64,
}

impl ModeSystem {
    pub fn new(n_modes: usize, strain: f64, frequency: f64, convention: LengthConvention) -> Self {
        let coupling = DMatrix::from_fn(n_modes, n_modes, |k, j| {
            if k == j {
                0.0
            } else {
                let (kf, jf) = ((k + 1) as f64, (j + 1) as f64);
                let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
                sign * 2.0 * kf * jf / (jf * jf - kf * kf)
            }
        });
        Self { n_modes, coupling, drive: convention.factor() * strain, frequency }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Effective length in units of the rest length.
    pub fn length(&self, t: f64) -> f64 {
        1.0 + self.drive * (self.frequency * t).sin()
    }

    /// `L̇ / L`.
    pub fn rate(&self, t: f64) -> f64 {
        self.drive * self.frequency * (self.frequency * t).cos() / self.length(t)
    }

    /// Instantaneous frequency of mode `k` (0-based).
    pub fn omega(&self, k: usize, t: f64) -> f64 {
        (k + 1) as f64 * PI / self.length(t)
    }

    /// Right-hand side for one phase-space vector `(q_1..q_K, p_1..p_K)`.
    fn field(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let k = self.n_modes;
        let lambda = self.rate(t);
        let len = self.length(t);
        for a in 0..k {
            let mut cq = 0.0;
            let mut cp = 0.0;
            for b in 0..k {
                let mu = self.coupling[(a, b)];
                cq += mu * y[b];
                cp += mu * y[k + b];
            }
            let w = (a + 1) as f64 * PI / len;
            dy[a] = y[k + a] + lambda * cq;
            dy[k + a] = -w * w * y[a] + lambda * cp;
        }
    }

    /// Mode energy `Σ_k ω_k |a_k|²` of a classical phase-space vector.
    pub fn energy(&self, y: &[f64], t: f64) -> f64 {
        let k = self.n_modes;
        (0..k)
            .map(|a| {
                let w = self.omega(a, t);
                0.5 * (w * w * y[a] * y[a] + y[k + a] * y[k + a])
            })
            .sum()
    }

    /// Fundamental matrix (columns evolve unit initial vectors) at each of `times`.
    pub fn evolve(&self, times: &[f64], rtol: f64, atol: f64) -> Result<(Vec<DMatrix<f64>>, StepStats)> {
        let dim = 2 * self.n_modes;
        let mut y = vec![0.0; dim * dim];
        for c in 0..dim {
            y[c * dim + c] = 1.0;
        }
        let mut solver = Dop853::new(rtol, atol);
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            solver.advance(
                |t, y, dy| {
                    for c in 0..dim {
                        self.field(t, &y[c * dim..(c + 1) * dim], &mut dy[c * dim..(c + 1) * dim]);
                    }
                },
                &mut t,
                &mut y,
                target,
            )?;
            out.push(DMatrix::from_column_slice(dim, dim, &y));
        }
        Ok((out, solver.stats))
    }

    /// Reads α and β off a fundamental matrix at time `t`.
    pub fn bogoliubov(&self, fundamental: &DMatrix<f64>, t: f64) -> BogoliubovSet {
        let k = self.n_modes;
        let mut alpha = DMatrix::zeros(k, k);
        let mut beta = DMatrix::zeros(k, k);
        let i = Complex64::i();
        for j in 0..k {
            let w0 = self.omega(j, 0.0);
            let cq = 1.0 / (2.0 * w0).sqrt();
            let cp = (0.5 * w0).sqrt();
            for a in 0..k {
                let q_from_q = fundamental[(a, j)];
                let q_from_p = fundamental[(a, k + j)];
                let p_from_q = fundamental[(k + a, j)];
                let p_from_p = fundamental[(k + a, k + j)];
                // Evolved (q, p) of the a_j and a_j† initial data.
                let q_a = cq * q_from_q - i * cp * q_from_p;
                let p_a = cq * p_from_q - i * cp * p_from_p;
                let q_ad = cq * q_from_q + i * cp * q_from_p;
                let p_ad = cq * p_from_q + i * cp * p_from_p;
                let w = self.omega(a, t);
                let norm = 1.0 / (2.0 * w).sqrt();
                alpha[(a, j)] = (q_a * w + i * p_a) * norm;
                beta[(a, j)] = (q_ad * w + i * p_ad) * norm;
            }
        }
        BogoliubovSet { alpha, beta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BogoliubovSample {
    /// Seconds.
    pub t: f64,
    pub abs_beta_nm: f64,
    pub arg_beta_nm: f64,
    pub identity_residual: f64,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub modes: ModePair,
    pub bogoliubov: BogoliubovSet,
    pub residuals: IdentityResiduals,
    pub series: Vec<BogoliubovSample>,
    pub stats: StepStats,
}

impl OracleResult {
    pub fn beta_nm(&self) -> Complex64 {
        self.bogoliubov.beta[(self.modes.n as usize - 1, self.modes.m as usize - 1)]
    }
}

/// Sample times (seconds) at every full period of the fundamental up to `duration`,
/// plus `duration` itself.
pub fn period_samples(params: &PhysicalParams, duration: f64) -> Vec<f64> {
    let period = 2.0 * PI / params.omega1();
    let mut times: Vec<f64> = (1..).map(|k| k as f64 * period).take_while(|&t| t < duration * (1.0 - 1e-12)).collect();
    times.push(duration);
    times
}

/// Integrates the mode system and samples `β_nm` at `sample_times` (seconds, increasing).
pub fn simulate_with_samples(
    params: &PhysicalParams,
    modes: ModePair,
    wave: &WaveParams,
    cfg: &OracleConfig,
    sample_times: &[f64],
) -> Result<OracleResult> {
    cfg.validate(modes)?;
    if wave.strain > 1e-2 {
        return Err(Error::InvalidArgument(format!("oracle strain {} exceeds 1e-2", wave.strain)));
    }
    if sample_times.is_empty() || sample_times.windows(2).any(|w| w[1] <= w[0]) || sample_times[0] < 0.0 {
        return Err(Error::InvalidArgument("sample times must be non-negative and strictly increasing".into()));
    }
    let time_unit = params.trap_length / params.sound_speed;
    let system = ModeSystem::new(cfg.n_modes, wave.strain, wave.angular_frequency * time_unit, cfg.convention);
    let scaled: Vec<f64> = sample_times.iter().map(|t| t / time_unit).collect();
    let (fundamentals, stats) = system.evolve(&scaled, cfg.rtol, cfg.atol)?;
    let (n, m) = (modes.n as usize - 1, modes.m as usize - 1);
    let mut series = Vec::with_capacity(scaled.len());
    let mut last = None;
    for ((phi, &ts), &t) in fundamentals.iter().zip(&scaled).zip(sample_times) {
        let bg = system.bogoliubov(phi, ts);
        let res = bg.identity_residuals();
        let b = bg.beta[(n, m)];
        series.push(BogoliubovSample { t, abs_beta_nm: b.norm(), arg_beta_nm: b.arg(), identity_residual: res.max() });
        last = Some((bg, res));
    }
    let (bogoliubov, residuals) = last.expect("at least one sample");
    let bound = cfg.residual_bound(params.omega1() * sample_times[sample_times.len() - 1]);
    if residuals.max() > bound {
        return Err(Error::ConvergenceFailure(format!(
            "Bogoliubov identity residual {:.3e} exceeds {:.1e}",
            residuals.max(),
            bound
        )));
    }
    Ok(OracleResult { modes, bogoliubov, residuals, series, stats })
}

/// Runs for `wave.duration`, sampling at full periods of the fundamental.
pub fn simulate_moving_boundary(
    params: &PhysicalParams,
    modes: ModePair,
    wave: &WaveParams,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    if wave.duration <= 0.0 {
        return Err(Error::InvalidArgument("oracle run needs a positive duration".into()));
    }
    simulate_with_samples(params, modes, wave, cfg, &period_samples(params, wave.duration))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub residuals: IdentityResiduals,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

pub fn check_bogoliubov_identities(bg: &BogoliubovSet, tol: f64) -> IdentityReport {
    let residuals = bg.identity_residuals();
    IdentityReport { residuals, tolerance: tol, within_tolerance: residuals.max() <= tol }
}

/// One calibration point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub strain: f64,
    pub t: f64,
    pub abs_beta_nm: f64,
    pub arg_beta_nm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub model: ChannelModel,
    /// 1/s per unit strain.
    pub rate: f64,
    /// `rate / ω₁`.
    pub rate_over_omega1: f64,
    /// RMS relative deviation from `|β| = εRt`.
    pub residual: f64,
    /// Largest excursion of `arg β_nm` from its first sampled value, radians.
    pub phase_drift: f64,
    pub points: Vec<RatePoint>,
}

/// Maximum relative RMS residual accepted by [`extract_rate`].
pub const MAX_FIT_RESIDUAL: f64 = 0.02;

/// Full fundamental periods inside `ω₁t ∈ [20, 200]`, `count` of them spread evenly.
pub fn calibration_times(params: &PhysicalParams, count: usize) -> Vec<f64> {
    let first = (20.0 / (2.0 * PI)).ceil() as usize;
    let last = (200.0 / (2.0 * PI)).floor() as usize;
    let count = count.clamp(1, last - first + 1);
    let period = 2.0 * PI / params.omega1();
    let mut ks: Vec<usize> = (0..count)
        .map(|i| first + ((last - first) as f64 * i as f64 / (count.max(2) - 1) as f64).round() as usize)
        .collect();
    ks.dedup();
    ks.into_iter().map(|k| k as f64 * period).collect()
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Least-squares fit of `|β_nm| = ε R t` over resonant runs.
///
/// `phase` is the channel quadrature recorded in the returned model.
pub fn extract_rate(
    params: &PhysicalParams,
    modes: ModePair,
    strains: &[f64],
    times: &[f64],
    cfg: &OracleConfig,
    phase: f64,
) -> Result<RateFit> {
    if strains.len() * times.len() < 4 {
        return Err(Error::InvalidArgument("rate calibration needs at least 4 (strain, time) points".into()));
    }
    let omega1 = params.omega1();
    if let Some(t) = times.iter().find(|&&t| !(19.999..=200.001).contains(&(omega1 * t))) {
        return Err(Error::InvalidArgument(format!(
            "calibration time ω₁t = {:.3} outside [20, 200]",
            omega1 * t
        )));
    }
    if let Some(e) = strains.iter().find(|&&e| !(1e-6..=1e-3).contains(&e)) {
        return Err(Error::InvalidArgument(format!("calibration strain {e} outside [1e-6, 1e-3]")));
    }
    let omega = resonant_frequency(params, modes);
    let duration = times.iter().cloned().fold(0.0, f64::max);
    let runs: Vec<Result<Vec<RatePoint>>> = strains
        .par_iter()
        .map(|&strain| {
            let wave = WaveParams::new(strain, omega, duration)?;
            let res = simulate_with_samples(params, modes, &wave, cfg, times)?;
            Ok(res
                .series
                .iter()
                .map(|s| RatePoint { strain, t: s.t, abs_beta_nm: s.abs_beta_nm, arg_beta_nm: s.arg_beta_nm })
                .collect())
        })
        .collect();
    let mut points = Vec::new();
    for run in runs {
        points.extend(run?);
    }
    let (num, den) = points
        .iter()
        .fold((0.0, 0.0), |(n, d), p| (n + p.strain * p.t * p.abs_beta_nm, d + (p.strain * p.t).powi(2)));
    let rate = num / den;
    let residual = (points
        .iter()
        .map(|p| {
            let model = p.strain * rate * p.t;
            ((p.abs_beta_nm - model) / model).powi(2)
        })
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    let phase_drift = points
        .iter()
        .map(|p| wrap_angle(p.arg_beta_nm - points[0].arg_beta_nm).abs())
        .fold(0.0, f64::max);
    if !(residual <= MAX_FIT_RESIDUAL) {
        return Err(Error::CalibrationFailure(format!(
            "linear fit residual {:.3}% exceeds {:.0}%",
            100.0 * residual,
            100.0 * MAX_FIT_RESIDUAL
        )));
    }
    let provenance = format!(
        "mode-oracle fit: modes ({}, {}), {} points, truncation {}, rtol {:.0e}, {:?}, residual {:.2e}",
        modes.n,
        modes.m,
        points.len(),
        cfg.n_modes,
        cfg.rtol,
        cfg.convention,
        residual
    );
    let model = ChannelModel::new(rate, phase, provenance)?;
    Ok(RateFit { model, rate, rate_over_omega1: rate / omega1, residual, phase_drift, points })
}

/// Relative changes of `|β_nm(t_final)|` under refinement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub abs_beta_nm: f64,
    /// Change when four more modes are kept.
    pub truncation_delta: f64,
    /// Change when both tolerances are halved.
    pub tolerance_delta: f64,
}

pub fn convergence_study(
    params: &PhysicalParams,
    modes: ModePair,
    wave: &WaveParams,
    cfg: &OracleConfig,
) -> Result<ConvergenceReport> {
    let wider = OracleConfig { n_modes: cfg.n_modes + 4, ..*cfg };
    let tighter = OracleConfig { rtol: 0.5 * cfg.rtol, atol: 0.5 * cfg.atol, ..*cfg };
    let runs: Vec<Result<f64>> = [*cfg, wider, tighter]
        .par_iter()
        .map(|c| Ok(simulate_with_samples(params, modes, wave, c, &[wave.duration])?.beta_nm().norm()))
        .collect();
    let mut vals = Vec::with_capacity(3);
    for r in runs {
        vals.push(r?);
    }
    Ok(ConvergenceReport {
        abs_beta_nm: vals[0],
        truncation_delta: ((vals[1] - vals[0]) / vals[0]).abs(),
        tolerance_delta: ((vals[2] - vals[0]) / vals[0]).abs(),
    })
}
