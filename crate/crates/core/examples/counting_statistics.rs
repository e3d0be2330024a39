//! Phonon-number counting: classical Fisher information against the QFI.

use phonon_gw::channel::ChannelForm;
use phonon_gw::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use phonon_gw::metrology::{
    classical_fisher, phonon_distribution, qfi, required_j_max, ChannelFamily, CountVariant, DifferencingPolicy,
};
use phonon_gw::model::{thermal_spec, ModePair, PhysicalParams};

fn main() -> phonon_gw::Result<()> {
    let params = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 50.0 * NANOKELVIN)?;
    let thermal = thermal_spec(&params, ModePair::new(1, 2)?)?;
    let r = 2.0;
    let h = qfi(&ChannelFamily::new(&thermal, r, 0.0, 0.0, ChannelForm::Exact), 0.0, &DifferencingPolicy::default())?.h;
    println!("x_n = {:.4e}, QFI per unit squeezing H_s = {h:.6}", thermal.n.x);

    for variant in [CountVariant::Exact, CountVariant::Geometric] {
        let j_max = required_j_max(r, &thermal, variant)?;
        let dist = phonon_distribution(r, &thermal, j_max, variant)?;
        let cfi = classical_fisher(&dist, 1.0);
        println!(
            "{:<9} j_max = {j_max:>4}, tail {:.1e}, F_s = {:.6}, F_s/H_s = {:.4}",
            variant.label(),
            cfi.tail_mass,
            cfi.fisher,
            cfi.fisher / h
        );
    }
    Ok(())
}
