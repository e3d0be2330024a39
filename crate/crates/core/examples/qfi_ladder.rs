//! Quantum Fisher information of the channel squeezing from fidelities on a
//! Richardson ladder.

use std::f64::consts::FRAC_PI_2;

use phonon_gw::channel::ChannelForm;
use phonon_gw::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use phonon_gw::metrology::{qfi, ChannelFamily, DifferencingPolicy};
use phonon_gw::model::{thermal_spec, ModePair, PhysicalParams};

fn main() -> phonon_gw::Result<()> {
    let params = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 0.0)?;
    let thermal = thermal_spec(&params, ModePair::new(1, 2)?)?;
    let policy = DifferencingPolicy::default();

    for (label, phase) in [("aligned", 0.0), ("quadrature", FRAC_PI_2)] {
        for r in [0.0, 2.0, 5.0, 10.0] {
            let family = ChannelFamily::new(&thermal, r, 0.0, phase, ChannelForm::Exact);
            let res = qfi(&family, 0.0, &policy)?;
            println!(
                "{label:<10} r = {r:>4}: H_s = {:.8e} (4cosh²2r = {:.8e}), step {:.2e}, spread {:.1e}",
                res.h,
                4.0 * (2.0 * r).cosh().powi(2),
                res.step,
                res.spread
            );
        }
    }

    let family = ChannelFamily::new(&thermal, 2.0, 0.0, FRAC_PI_2, ChannelForm::Exact);
    for (step, estimate) in qfi(&family, 0.0, &policy)?.ladder {
        println!("  ladder rung dε = {step:.3e}: {estimate:.10e}");
    }
    Ok(())
}
