//! Phonon spectrum of the box trap, thermal occupations, and the squeezed
//! thermal seed state.

use phonon_gw::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use phonon_gw::gaussian::{purity, symplectic_eigenvalues};
use phonon_gw::model::{initial_state, mode_frequency, thermal_spec, validate_regime, ModePair, PhysicalParams};

fn main() -> phonon_gw::Result<()> {
    let params = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 50.0 * NANOKELVIN)?;
    let modes = ModePair::new(1, 2)?;
    println!("ω₁ = {:.6e} rad/s = 2π × {:.1} Hz", params.omega1(), params.omega1() / std::f64::consts::TAU);

    let thermal = thermal_spec(&params, modes)?;
    for (k, mode) in [(modes.n, thermal.n), (modes.m, thermal.m)] {
        println!(
            "mode {k}: ω = {:.4e} rad/s, β = {:.3}, x = e^-β = {:.3e}, ν = {:.6}",
            mode_frequency(&params, k),
            mode.beta,
            mode.x,
            mode.nu
        );
    }
    println!("quantum regime: {:?}", thermal.regime);

    let sigma = initial_state(&params, modes, 2.0, 0.0)?;
    println!("σ₀ symplectic spectrum {:?}, purity {:.6}", symplectic_eigenvalues(&sigma)?, purity(&sigma)?);

    let report = validate_regime(&params, modes, 100.0 / params.omega1());
    for c in &report.checks {
        println!("  {:<10} {:.3e} {}", c.name, c.ratio, c.grade);
    }
    Ok(())
}
