//! Phase picked up by the condensate bulk under the wave, for comparison with
//! the phonon channel.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::WaveParams;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::model::PhysicalParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum BulkWavenumber {
    /// `k = π/L`, the box ground mode.
    #[default]
    GroundMode,
    /// `k = 2π/L`.
    FullWave,
}

impl BulkWavenumber {
    pub fn value(self, params: &PhysicalParams) -> f64 {
        match self {
            BulkWavenumber::GroundMode => PI / params.trap_length,
            BulkWavenumber::FullWave => 2.0 * PI / params.trap_length,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BulkState {
    pub wavenumber: f64,
    /// `Ψ(t) = −ħk²/(2m)(t − ε cos Ωt / Ω)`.
    pub phase: f64,
    /// `∂Ψ/∂ε`.
    pub phase_derivative: f64,
}

fn recoil_over_omega(params: &PhysicalParams, wave: &WaveParams, k: f64) -> Result<f64> {
    if !(wave.angular_frequency > 0.0) {
        return Err(Error::InvalidArgument("bulk phase needs a positive wave frequency".into()));
    }
    Ok(HBAR * k * k / (2.0 * params.atom_mass * wave.angular_frequency))
}

pub fn bulk_phase(params: &PhysicalParams, wave: &WaveParams, t: f64, k: BulkWavenumber) -> Result<BulkState> {
    let wavenumber = k.value(params);
    let a = recoil_over_omega(params, wave, wavenumber)?;
    let omega = wave.angular_frequency;
    let cos = (omega * t).cos();
    Ok(BulkState {
        wavenumber,
        phase: -a * (omega * t - wave.strain * cos),
        phase_derivative: a * cos,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BulkQfi {
    /// `|∂Ψ/∂ε|²` at the requested time.
    pub h: f64,
    /// Its maximum over time, `(ħk²/(2mΩ))²`.
    pub h_max: f64,
}

pub fn bulk_qfi(params: &PhysicalParams, wave: &WaveParams, t: f64, k: BulkWavenumber) -> Result<BulkQfi> {
    let state = bulk_phase(params, wave, t, k)?;
    let a = recoil_over_omega(params, wave, state.wavenumber)?;
    Ok(BulkQfi { h: state.phase_derivative.powi(2), h_max: a * a })
}

/// Time at which `H_s (R t)²` overtakes the bulk maximum.
pub fn bulk_crossover_time(bulk_h_max: f64, h_per_squeezing: f64, rate: f64) -> f64 {
    (bulk_h_max / h_per_squeezing).sqrt() / rate
}
