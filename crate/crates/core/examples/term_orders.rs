//! Scaling of the fidelity invariants with temperature and squeezing, and
//! the thermal correction to the zero-temperature QFI.

use std::f64::consts::FRAC_PI_2;

use phonon_gw::channel::ChannelForm;
use phonon_gw::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use phonon_gw::metrology::{qfi_term_orders, temperature_correction_scan};
use phonon_gw::model::{mode_frequency, temperature_for_occupation, ModePair, PhysicalParams};

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn main() -> phonon_gw::Result<()> {
    let params = PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, 0.0)?;
    let modes = ModePair::new(1, 2)?;
    let omega1 = mode_frequency(&params, 1);
    let temperatures = log_grid(3e-6, 3e-5, 5)
        .into_iter()
        .map(|x| temperature_for_occupation(omega1, x))
        .collect::<phonon_gw::Result<Vec<_>>>()?;
    let steps = log_grid(3e-5, 3e-4, 5);

    for form in [ChannelForm::FirstOrder, ChannelForm::Exact] {
        let report = qfi_term_orders(&params, modes, 1.0, FRAC_PI_2, form, &temperatures, &steps)?;
        println!("{form:?}: Γ−Δ exponents {:?}, Λ exponents {:?}", report.gamma_minus_delta, report.lambda);
    }

    let temperatures = log_grid(1e-3, 0.1, 9)
        .into_iter()
        .map(|x| temperature_for_occupation(omega1, x))
        .collect::<phonon_gw::Result<Vec<_>>>()?;
    let scan = temperature_correction_scan(&params, modes, 10.0, FRAC_PI_2, &temperatures)?;
    println!("H(T = 0) = {:.6e}", scan.h_zero);
    for row in &scan.rows {
        println!("  x_n = {:.3e}: (H − H₀)/H₀ = {:+.4e}", row.x_n, row.relative_correction);
    }
    if let Some(fit) = scan.fit {
        println!("linear in x_n: slope {:.4}, residual {:.2}%", fit.slope, 100.0 * fit.residual_fraction);
    }
    Ok(())
}
