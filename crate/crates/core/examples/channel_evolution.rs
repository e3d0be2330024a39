//! A resonant wave squeezes the seed state further: the exact channel against
//! its first-order truncation.

use phonon_gw::channel::{
    channel_squeezing, channel_symplectic, evolved_state, first_order_channel, ChannelModel, WaveParams,
};
use phonon_gw::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use phonon_gw::gaussian::{symplectic_eigenvalues, symplectic_residual};
use phonon_gw::model::{initial_state, ModePair, PhysicalParams};
use std::f64::consts::FRAC_PI_2;

fn main() -> phonon_gw::Result<()> {
    let params = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 0.0)?;
    let modes = ModePair::new(1, 2)?;
    let model = ChannelModel::new(0.35355 * params.omega1(), FRAC_PI_2, "oracle rate for modes (1, 2)")?;

    let wave = WaveParams::resonant(&params, modes, 1e-3, 100.0 / params.omega1())?;
    let s = channel_squeezing(&wave, &model);
    println!("ε = {:.0e}, ω₁t = 100: channel squeezing s = {s:.6e}", wave.strain);

    let exact = channel_symplectic(&wave, &model)?;
    let linear = first_order_channel(s, model.phase);
    println!("exact residual       {:.2e}", symplectic_residual(exact.matrix())?);
    println!("first-order residual {:.2e}", symplectic_residual(&nalgebra::DMatrix::from_column_slice(4, 4, linear.as_slice()))?);

    let sigma0 = initial_state(&params, modes, 2.0, 0.0)?;
    let sigma = evolved_state(&sigma0, &wave, &model)?;
    println!("spectrum preserved: {:?}", symplectic_eigenvalues(&sigma)?);
    println!("⟨x₁²⟩: {:.6} → {:.6}", sigma0.matrix()[(0, 0)], sigma.matrix()[(0, 0)]);
    Ok(())
}
