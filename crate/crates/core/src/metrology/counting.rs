//! Phonon-counting statistics of the two-mode squeezed thermal state and the
//! classical Fisher information of counting.
//!
//! With seed and channel phases aligned the total squeezing is `u = r + β_nm`
//! and the outcome is the common phonon number `j`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ThermalSpec;

/// Largest tail mass accepted before asking for a bigger `j_max`.
pub const MAX_TAIL_MASS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CountVariant {
    /// `(1 − x_n − x_m) tanh^j(u) / cosh(u)`, evaluated as written. Does not sum to 1.
    Geometric,
    /// Equal-number statistics of the thermal state squeezed by `S(u)`,
    /// conditioned on the equal-number sector and normalized.
    Exact,
}

impl CountVariant {
    pub fn label(self) -> &'static str {
        match self {
            CountVariant::Geometric => "geometric",
            CountVariant::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountDistribution {
    pub variant: CountVariant,
    pub squeezing: f64,
    /// `P(j)` for `j = 0..=j_max`.
    pub probabilities: Vec<f64>,
    /// `∂P(j)/∂u`.
    pub derivatives: Vec<f64>,
    /// Probability beyond `j_max`: relative to the normalized sector for
    /// `Exact`, absolute for `Geometric`.
    pub tail_mass: f64,
    /// Total of the untruncated distribution (`1` for `Exact`).
    pub normalization: f64,
}

/// `ln k!` for `k = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `⟨j, j| S(u) |l, l⟩` for the aligned two-mode squeezer.
fn equal_number_amplitude(j: usize, l: usize, u: f64, lf: &[f64]) -> f64 {
    if u == 0.0 {
        return if j == l { 1.0 } else { 0.0 };
    }
    let ln_t = u.tanh().ln();
    let ln_ch = u.cosh().ln();
    let mut total = 0.0;
    for q in 0..=j.min(l) {
        let (p, pp) = (l - q, j - q);
        let ln_binom = lf[l] - lf[q] - lf[p] + lf[j] - lf[q] - lf[pp];
        let term = (ln_binom + (p + pp) as f64 * ln_t - (2 * q + 1) as f64 * ln_ch).exp();
        total += if pp % 2 == 0 { term } else { -term };
    }
    total
}

fn geometric(u: f64, thermal: &ThermalSpec, j_max: usize) -> CountDistribution {
    let c = 1.0 - thermal.n.x - thermal.m.x;
    let (t, ch) = (u.tanh(), u.cosh());
    let mut probabilities = Vec::with_capacity(j_max + 1);
    let mut derivatives = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let tj = t.powi(j as i32);
        probabilities.push(c * tj / ch);
        let lead = if j == 0 { 0.0 } else { j as f64 * t.powi(j as i32 - 1) * (1.0 - t * t) };
        derivatives.push(c / ch * (lead - tj * t));
    }
    let tail_mass = c * t.powi(j_max as i32 + 1) / ((1.0 - t) * ch);
    CountDistribution {
        variant: CountVariant::Geometric,
        squeezing: u,
        probabilities,
        derivatives,
        tail_mass,
        normalization: c * u.exp(),
    }
}

fn exact(u: f64, thermal: &ThermalSpec, j_max: usize) -> CountDistribution {
    let (xn, xm) = (thermal.n.x, thermal.m.x);
    let pair = xn * xm;
    // Initial populations (1 − x_n) x_n^l (1 − x_m) x_m^l of |l, l⟩.
    let mut l_max = 0;
    if pair > 0.0 {
        while l_max < j_max && pair.powi(l_max as i32 + 1) > 1e-18 {
            l_max += 1;
        }
    }
    let weights: Vec<f64> = (0..=l_max).map(|l| (1.0 - xn) * (1.0 - xm) * pair.powi(l as i32)).collect();
    let sector = (1.0 - xn) * (1.0 - xm) / (1.0 - pair);
    let lf = log_factorials(2 * (j_max + l_max) + 2);

    let mut raw = vec![0.0; j_max + 1];
    let mut raw_d = vec![0.0; j_max + 1];
    for (l, w) in weights.iter().enumerate() {
        let amps: Vec<f64> = (0..=j_max + 1).map(|j| equal_number_amplitude(j, l, u, &lf)).collect();
        for j in 0..=j_max {
            let lower = if j == 0 { 0.0 } else { j as f64 * amps[j - 1] };
            let d = (j + 1) as f64 * amps[j + 1] - lower;
            raw[j] += w * amps[j] * amps[j];
            raw_d[j] += 2.0 * w * amps[j] * d;
        }
    }
    let total: f64 = raw.iter().sum();
    let total_d: f64 = raw_d.iter().sum();
    let probabilities: Vec<f64> = raw.iter().map(|p| p / total).collect();
    let derivatives = raw_d.iter().zip(&raw).map(|(d, p)| d / total - p * total_d / (total * total)).collect();
    CountDistribution {
        variant: CountVariant::Exact,
        squeezing: u,
        probabilities,
        derivatives,
        tail_mass: (1.0 - total / sector).max(0.0),
        normalization: 1.0,
    }
}

/// Counting distribution at total squeezing `u = r + β_nm ≥ 0`.
pub fn phonon_distribution(
    u: f64,
    thermal: &ThermalSpec,
    j_max: usize,
    variant: CountVariant,
) -> Result<CountDistribution> {
    if j_max < 20 {
        return Err(Error::InvalidArgument(format!("j_max must be at least 20, got {j_max}")));
    }
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::InvalidArgument(format!("total squeezing must be non-negative, got {u}")));
    }
    let dist = match variant {
        CountVariant::Geometric => geometric(u, thermal, j_max),
        CountVariant::Exact => exact(u, thermal, j_max),
    };
    if dist.tail_mass > MAX_TAIL_MASS {
        return Err(Error::TruncationTooSmall { tail_mass: dist.tail_mass, j_max });
    }
    Ok(dist)
}

/// Smallest `j_max` (at least 20) whose tail mass is below [`MAX_TAIL_MASS`].
pub fn required_j_max(u: f64, thermal: &ThermalSpec, variant: CountVariant) -> Result<usize> {
    let mut j_max = 20;
    loop {
        match phonon_distribution(u, thermal, j_max, variant) {
            Ok(_) => return Ok(j_max),
            Err(Error::TruncationTooSmall { .. }) if j_max < 1 << 16 => j_max = j_max * 3 / 2,
            Err(e) => return Err(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CfiResult {
    pub fisher: f64,
    pub tail_mass: f64,
    /// Outcomes with `P = 0` left out of the sum.
    pub excluded_outcomes: usize,
}

/// `Σ_j (∂_ε P)²/P` with `∂_ε = (dβ/dε) ∂_u`.
pub fn classical_fisher(dist: &CountDistribution, dbeta_deps: f64) -> CfiResult {
    let mut fisher = 0.0;
    let mut excluded = 0;
    for (p, d) in dist.probabilities.iter().zip(&dist.derivatives) {
        if *p > 0.0 {
            fisher += d * d / p;
        } else {
            excluded += 1;
        }
    }
    CfiResult { fisher: fisher * dbeta_deps * dbeta_deps, tail_mass: dist.tail_mass, excluded_outcomes: excluded }
}
