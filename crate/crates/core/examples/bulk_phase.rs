//! Phase of the condensate bulk under the wave: bounded information, unlike
//! the phonon channel.

use phonon_gw::channel::{resonant_frequency, WaveParams};
use phonon_gw::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use phonon_gw::metrology::{bulk_crossover_time, bulk_qfi, BulkWavenumber};
use phonon_gw::model::{ModePair, PhysicalParams};
use phonon_gw::sweep::{cramer_rao_bound, sensitivity_density};

fn main() -> phonon_gw::Result<()> {
    let params = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 0.0)?;
    let modes = ModePair::new(1, 2)?;
    let omega = resonant_frequency(&params, modes);
    for k in [BulkWavenumber::GroundMode, BulkWavenumber::FullWave] {
        let t = 1.0;
        let b = bulk_qfi(&params, &WaveParams::new(0.0, omega, t)?, t, k)?;
        let bound = cramer_rao_bound(b.h_max, 1)?;
        println!(
            "{k:?}: max H = {:.3e}, Δε ≥ {bound:.3e}, density at 1 s = {:.3e} Hz^-1/2",
            b.h_max,
            sensitivity_density(bound, t)?
        );
        let h_s = 4.0 * 20f64.cosh().powi(2);
        let cross = bulk_crossover_time(b.h_max, h_s, 0.35355 * params.omega1());
        println!("  phonons (r = 10) overtake it after {cross:.3e} s");
    }
    for t in [0.0, 1e-5, 2e-5, 3e-5] {
        let b = bulk_qfi(&params, &WaveParams::new(0.0, omega, 1.0)?, t, BulkWavenumber::FullWave)?;
        println!("t = {t:.0e} s: H = {:.3e}", b.h);
    }
    Ok(())
}
