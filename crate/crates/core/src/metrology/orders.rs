//! Diagnostics of how the fidelity invariants and the QFI depend on the
//! thermal occupations `x_k = e^{−β_k}` and on the channel squeezing.

use serde::Serialize;

use super::fidelity::fidelity_from_pair;
use super::qfi::{qfi, ChannelFamily, DifferencingPolicy, StateFamily};
use crate::channel::ChannelForm;
use crate::error::{Error, Result};
use crate::model::{thermal_spec, ModePair, PhysicalParams};

/// Least-squares slope of `ln|y|` against `ln x`. `None` when fewer than two
/// points or any value is zero.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() || xs.iter().chain(ys).any(|v| *v == 0.0 || !v.is_finite()) {
        return None;
    }
    if xs.iter().any(|&x| x < 0.0) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    linear_fit(&lx, &ly).map(|f| f.slope)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation from the line over the range of `y`.
    pub residual_fraction: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let dev = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    let range = ys.iter().cloned().fold(f64::MIN, f64::max) - ys.iter().cloned().fold(f64::MAX, f64::min);
    let residual_fraction = if range > 0.0 { dev / range } else { 0.0 };
    Some(LinearFit { slope, intercept, residual_fraction })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TermOrderRow {
    pub temperature: f64,
    pub x_n: f64,
    pub x_m: f64,
    /// Squeezing `e` at the first state; the second sits at `2e`.
    pub step: f64,
    /// `(Γ − Δ)` of the pair minus its value for the unsqueezed pair.
    pub gamma_minus_delta: f64,
    /// `Λ` of the pair minus its value for the unsqueezed pair.
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exponents {
    /// Against `x_n + x_m`; undefined when a zero temperature is on the grid.
    pub x: Option<f64>,
    /// Against `ε + dε`.
    pub eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermOrderReport {
    pub form: ChannelForm,
    /// Temperature sweep at the largest step.
    pub x_rows: Vec<TermOrderRow>,
    /// Step sweep at the lowest temperature.
    pub eps_rows: Vec<TermOrderRow>,
    pub gamma_minus_delta: Exponents,
    pub lambda: Exponents,
}

fn term_row(
    params: &PhysicalParams,
    modes: ModePair,
    r: f64,
    phase: f64,
    form: ChannelForm,
    temperature: f64,
    e: f64,
) -> Result<TermOrderRow> {
    let thermal = thermal_spec(&params.with_temperature(temperature)?, modes)?;
    let family = ChannelFamily::new(&thermal, r, 0.0, phase, form);
    let base = fidelity_from_pair(&family.local_pair(0.0, 0.0)?)?;
    let pair = fidelity_from_pair(&family.local_pair(e, e)?)?;
    Ok(TermOrderRow {
        temperature,
        x_n: thermal.n.x,
        x_m: thermal.m.x,
        step: e,
        gamma_minus_delta: pair.gamma_minus_delta - base.gamma_minus_delta,
        lambda: pair.lambda - base.lambda,
    })
}

/// Fits the scaling of `Γ − Δ` and `Λ` with the thermal occupations and the
/// squeezing, comparing the states at `e` and `2e`.
pub fn qfi_term_orders(
    params: &PhysicalParams,
    modes: ModePair,
    r: f64,
    phase: f64,
    form: ChannelForm,
    temperatures: &[f64],
    steps: &[f64],
) -> Result<TermOrderReport> {
    if temperatures.len() < 2 || steps.len() < 2 {
        return Err(Error::InvalidArgument("term-order fits need at least two temperatures and two steps".into()));
    }
    let e_max = steps.iter().cloned().fold(f64::MIN, f64::max);
    let t_min = temperatures.iter().cloned().fold(f64::MAX, f64::min);
    let x_rows = temperatures
        .iter()
        .map(|&t| term_row(params, modes, r, phase, form, t, e_max))
        .collect::<Result<Vec<_>>>()?;
    let eps_rows =
        steps.iter().map(|&e| term_row(params, modes, r, phase, form, t_min, e)).collect::<Result<Vec<_>>>()?;

    let xs: Vec<f64> = x_rows.iter().map(|r| r.x_n + r.x_m).collect();
    let es: Vec<f64> = eps_rows.iter().map(|r| 2.0 * r.step).collect();
    let fit = |rows: &[TermOrderRow], axis: &[f64], pick: fn(&TermOrderRow) -> f64| {
        let ys: Vec<f64> = rows.iter().map(pick).collect();
        loglog_slope(axis, &ys)
    };
    Ok(TermOrderReport {
        form,
        gamma_minus_delta: Exponents {
            x: fit(&x_rows, &xs, |r| r.gamma_minus_delta),
            eps: fit(&eps_rows, &es, |r| r.gamma_minus_delta),
        },
        lambda: Exponents { x: fit(&x_rows, &xs, |r| r.lambda), eps: fit(&eps_rows, &es, |r| r.lambda) },
        x_rows,
        eps_rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TemperatureRow {
    pub temperature: f64,
    pub x_n: f64,
    pub x_m: f64,
    /// QFI with respect to the channel squeezing.
    pub h: f64,
    /// `(H(T) − H(0)) / H(0)`.
    pub relative_correction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemperatureScan {
    pub h_zero: f64,
    pub rows: Vec<TemperatureRow>,
    /// Linear fit of the relative correction in `x_n`.
    pub fit: Option<LinearFit>,
}

/// QFI of the exact channel at `s = 0` across `temperatures`, relative to `T = 0`.
pub fn temperature_correction_scan(
    params: &PhysicalParams,
    modes: ModePair,
    r: f64,
    phase: f64,
    temperatures: &[f64],
) -> Result<TemperatureScan> {
    let policy = DifferencingPolicy::default();
    let h_at = |t: f64| -> Result<(f64, f64, f64)> {
        let thermal = thermal_spec(&params.with_temperature(t)?, modes)?;
        let family = ChannelFamily::new(&thermal, r, 0.0, phase, ChannelForm::Exact);
        Ok((qfi(&family, 0.0, &policy)?.h, thermal.n.x, thermal.m.x))
    };
    let (h_zero, _, _) = h_at(0.0)?;
    let rows = temperatures
        .iter()
        .map(|&t| {
            let (h, x_n, x_m) = h_at(t)?;
            Ok(TemperatureRow { temperature: t, x_n, x_m, h, relative_correction: (h - h_zero) / h_zero })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.x_n).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.relative_correction).collect();
    Ok(TemperatureScan { h_zero, fit: linear_fit(&xs, &ys), rows })
}
