//! Moving-boundary simulation of the resonantly driven cavity and the channel
//! rate fitted from it.

use phonon_gw::channel::WaveParams;
use phonon_gw::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use phonon_gw::model::{ModePair, PhysicalParams};
use phonon_gw::oracle::{calibration_times, convergence_study, extract_rate, simulate_moving_boundary, OracleConfig};

fn main() -> phonon_gw::Result<()> {
    let params = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 0.0)?;
    let modes = ModePair::new(1, 2)?;
    let cfg = OracleConfig::default();

    let wave = WaveParams::resonant(&params, modes, 1e-4, 200.0 / params.omega1())?;
    let run = simulate_moving_boundary(&params, modes, &wave, &cfg)?;
    for s in run.series.iter().step_by(8) {
        println!(
            "ω₁t = {:>7.2}: |β₁₂| = {:.6e}, arg = {:+.1e}, identity residual {:.1e}",
            s.t * params.omega1(),
            s.abs_beta_nm,
            s.arg_beta_nm,
            s.identity_residual
        );
    }
    println!("{} accepted steps", run.stats.accepted);

    let fit = extract_rate(&params, modes, &[1e-5, 1e-4], &calibration_times(&params, 5), &cfg, 0.0)?;
    println!("R/ω₁ = {:.6} (√2/4 = {:.6}), fit residual {:.1e}", fit.rate_over_omega1, 2f64.sqrt() / 4.0, fit.residual);

    let conv = convergence_study(&params, modes, &wave, &cfg)?;
    println!("truncation +4 modes: {:.1e}, halved tolerances: {:.1e}", conv.truncation_delta, conv.tolerance_delta);
    Ok(())
}
