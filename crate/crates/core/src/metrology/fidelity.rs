//! Uhlmann fidelity of two-mode Gaussian states from the determinant
//! invariants
//!
//! ```text
//! Γ = det(iΩσ_A iΩσ_B + I)/16,  Λ = det(iΩσ_A + I) det(iΩσ_B + I)/16,
//! Δ = det(σ_A + σ_B)/16,        F = 1/(√Λ + √Γ − √((√Λ+√Γ)² − Δ)).
//! ```
//!
//! The QFI divides `1 − √F` by a squared step, so every quantity that is close
//! to its value at `σ_A = σ_B` is carried as a small offset. Both states are
//! written as `N + P` around a common diagonal reference `N = diag(ν₁,ν₁,ν₂,ν₂)`.
//! Since `−ΩNΩ = N`,
//!
//! ```text
//! 16Γ = det(I + N² + Z),  Z = N P_B + Q_A N + Q_A P_B,  Q_A = −Ω P_A Ω
//! 16Δ = det(2N + P_A + P_B)
//! ```
//!
//! and `det(D + X) = det D · (1 + det1m(D⁻¹X))` with `det1m` the sum of all
//! principal minors. `Λ` comes from the symplectic spectra,
//! `det(I + iΩσ) = Π(1 − ν_k²)`.

use nalgebra::Matrix4;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{is_physical_state, symplectic_eigenvalues, CovarianceMatrix, PHYSICALITY_TOL};

/// Allowed negative excursion of the quantity under the inner root.
pub const UNDER_ROOT_FLOOR: f64 = -1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityBreakdown {
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    /// `Γ − Δ`, formed from offsets rather than by subtraction.
    pub gamma_minus_delta: f64,
    /// `(√Λ + √Γ)² − Δ`.
    pub under_root: f64,
    pub fidelity: f64,
    pub one_minus_sqrt_fidelity: f64,
}

/// Two states expressed around a shared Williamson-diagonal reference.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPair {
    nu: [f64; 2],
    excess: [f64; 2],
    offset_a: Matrix4<f64>,
    offset_b: Matrix4<f64>,
    spectrum_a: [f64; 2],
    spectrum_b: [f64; 2],
    /// Spectra known exactly rather than computed.
    exact_spectra: bool,
}

fn omega4() -> Matrix4<f64> {
    let mut o = Matrix4::zeros();
    o[(0, 1)] = 1.0;
    o[(1, 0)] = -1.0;
    o[(2, 3)] = 1.0;
    o[(3, 2)] = -1.0;
    o
}

/// `Kᵀ N K − N` for `K = I + e`.
fn congruence_offset(nu: &Matrix4<f64>, e: &Matrix4<f64>) -> Matrix4<f64> {
    let ne = nu * e;
    let out = e.transpose() * nu + ne + e.transpose() * ne;
    (out + out.transpose()) * 0.5
}

/// `ν_k − 1` from the eigensolver. Physical inputs are clamped at `ν = 1`;
/// maps that do not preserve phase-space volume may push `ν` below one.
fn computed_excess(sigma: &Matrix4<f64>, physical: bool) -> Result<[f64; 2]> {
    let cov = CovarianceMatrix::new(nalgebra::DMatrix::from_column_slice(4, 4, sigma.as_slice()))?;
    let nus = symplectic_eigenvalues(&cov)?;
    let floor = if physical { 0.0 } else { f64::NEG_INFINITY };
    Ok([(nus[0] - 1.0).max(floor), (nus[1] - 1.0).max(floor)])
}

impl LocalPair {
    /// Reference `I`, offsets `σ − I`, spectra from the eigensolver.
    pub fn generic(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<Self> {
        let (ma, mb) = (a.to_matrix4()?, b.to_matrix4()?);
        let id = Matrix4::identity();
        Ok(Self {
            nu: [1.0; 2],
            excess: [0.0; 2],
            offset_a: ma - id,
            offset_b: mb - id,
            spectrum_a: computed_excess(&ma, true)?,
            spectrum_b: computed_excess(&mb, true)?,
            exact_spectra: false,
        })
    }

    /// States `K_aᵀ N K_a` and `K_bᵀ N K_b` with `K = I + e`.
    ///
    /// `excess[k] = ν_k − 1` should be supplied to full precision. When the
    /// frames are symplectic the spectra of both states are `ν` exactly;
    /// otherwise they are computed and may fall below one.
    pub fn williamson(
        excess: [f64; 2],
        e_a: &Matrix4<f64>,
        e_b: &Matrix4<f64>,
        symplectic_frames: bool,
    ) -> Result<Self> {
        if excess.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidArgument(format!("symplectic eigenvalues must be ≥ 1, excess {excess:?}")));
        }
        let nu = [1.0 + excess[0], 1.0 + excess[1]];
        let n = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu[0], nu[0], nu[1], nu[1]));
        let offset_a = congruence_offset(&n, e_a);
        let offset_b = congruence_offset(&n, e_b);
        let (spectrum_a, spectrum_b) = if symplectic_frames {
            (excess, excess)
        } else {
            (computed_excess(&(n + offset_a), false)?, computed_excess(&(n + offset_b), false)?)
        };
        Ok(Self { nu, excess, offset_a, offset_b, spectrum_a, spectrum_b, exact_spectra: symplectic_frames })
    }

    pub fn state_a(&self) -> Matrix4<f64> {
        self.reference() + self.offset_a
    }

    pub fn state_b(&self) -> Matrix4<f64> {
        self.reference() + self.offset_b
    }

    fn reference(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(self.nu[0], self.nu[0], self.nu[1], self.nu[1]))
    }
}

fn det_rows_cols(m: &[[f64; 4]; 4], rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => m[rows[0]][cols[0]],
        _ => {
            let mut total = 0.0;
            for (c, &col) in cols.iter().enumerate() {
                let rest: Vec<usize> = cols.iter().copied().filter(|&k| k != col).collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * m[rows[0]][col] * det_rows_cols(m, &rows[1..], &rest);
            }
            total
        }
    }
}

/// `det(I + X) − 1` as the sum of the fifteen principal minors of `X`.
pub fn det1m(x: &Matrix4<f64>) -> f64 {
    let m: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| x[(i, j)]));
    let mut by_order = [0.0; 4];
    for mask in 1u8..16 {
        let idx: Vec<usize> = (0..4).filter(|k| mask & (1 << k) != 0).collect();
        by_order[idx.len() - 1] += det_rows_cols(&m, &idx, &idx);
    }
    // Small orders first: they dominate when X is small.
    by_order.iter().sum()
}

/// `Π_k (1 − ν_k²)` of one state, from the excesses `ν − 1`.
fn spectral_factor(excess: &[f64; 2]) -> f64 {
    excess.iter().map(|d| d * (2.0 + d)).product()
}

pub fn fidelity_from_pair(pair: &LocalPair) -> Result<FidelityBreakdown> {
    let omega = omega4();
    let nu = pair.reference();
    let q_a = -(omega * pair.offset_a * omega);
    let z = nu * pair.offset_b + q_a * nu + q_a * pair.offset_b;
    let mut scaled_gamma = z;
    let mut scaled_delta = pair.offset_a + pair.offset_b;
    for i in 0..4 {
        let v = nu[(i, i)];
        for j in 0..4 {
            scaled_gamma[(i, j)] /= 1.0 + v * v;
            scaled_delta[(i, j)] /= 2.0 * v;
        }
    }
    let g = det1m(&scaled_gamma);
    let d = det1m(&scaled_delta);

    let c_delta: f64 = pair.nu.iter().map(|v| v * v).product();
    // log(c_Γ/c_Δ) = 2 Σ log(1 + δ²/(2ν)).
    let log_ratio: f64 = pair.excess.iter().zip(&pair.nu).map(|(dl, v)| 2.0 * (dl * dl / (2.0 * v)).ln_1p()).sum();
    let gap = c_delta * log_ratio.exp_m1();
    let c_gamma = c_delta + gap;
    // c_Γ − 1 = Π((1 + ν²)/2)² − 1.
    let c_gamma_m1 = pair.excess.iter().map(|dl| 2.0 * (0.5 * dl * (dl + 2.0)).ln_1p()).sum::<f64>().exp_m1();

    let gamma = c_gamma * (1.0 + g);
    let delta = c_delta * (1.0 + d);
    let gamma_m1 = c_gamma_m1 + c_gamma * g;

    let pure = pair.exact_spectra && pair.excess.iter().all(|&dl| dl == 0.0);
    let (lambda, gamma_minus_delta) = if pure {
        (0.0, 0.0)
    } else {
        let lambda = spectral_factor(&pair.spectrum_a) * spectral_factor(&pair.spectrum_b) / 16.0;
        (lambda, gap + c_delta * (g - d) + gap * g)
    };

    let under_root = lambda + 2.0 * (lambda * gamma).sqrt() + gamma_minus_delta;
    if !under_root.is_finite() || under_root < UNDER_ROOT_FLOOR {
        return Err(Error::NumericFailure(format!("fidelity root argument {under_root:.3e} is negative")));
    }
    let w = under_root.max(0.0).sqrt();
    let q_m1 = lambda.sqrt() + gamma_m1 / (gamma.sqrt() + 1.0) - w;
    let q = 1.0 + q_m1;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::NumericFailure(format!("fidelity denominator {q:.3e} is not positive")));
    }
    let sq = q.sqrt();
    Ok(FidelityBreakdown {
        gamma,
        lambda,
        delta,
        gamma_minus_delta,
        under_root,
        fidelity: 1.0 / q,
        one_minus_sqrt_fidelity: q_m1 / (sq * (sq + 1.0)),
    })
}

/// Fidelity of two physical two-mode states.
pub fn uhlmann_fidelity(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<FidelityBreakdown> {
    for (label, s) in [("first", a), ("second", b)] {
        if s.n_modes() != 2 {
            return Err(Error::InvalidArgument(format!("{label} state has {} modes, expected 2", s.n_modes())));
        }
        if !is_physical_state(s.matrix(), PHYSICALITY_TOL)? {
            return Err(Error::InvalidArgument(format!("{label} state violates the uncertainty principle")));
        }
    }
    fidelity_from_pair(&LocalPair::generic(a, b)?)
}
