//! Uhlmann fidelity between two-mode Gaussian states, checked against closed
//! forms.

use phonon_gw::gaussian::{apply_symplectic, two_mode_squeezer, CovarianceMatrix};
use phonon_gw::metrology::uhlmann_fidelity;

fn main() -> phonon_gw::Result<()> {
    let vacuum = CovarianceMatrix::vacuum(2);
    println!("{:>6} {:>22} {:>22}", "s", "F(vac, TMSV)", "1/cosh²s");
    for s in [0.05, 0.1, 0.2, 0.5, 1.0] {
        let tmsv = apply_symplectic(&two_mode_squeezer(s, 0.0)?, &vacuum)?;
        let f = uhlmann_fidelity(&vacuum, &tmsv)?;
        println!("{s:>6} {:>22.16} {:>22.16}", f.fidelity, 1.0 / s.cosh().powi(2));
    }

    let (a, b) = (1.3, 2.1);
    let thermal_a = CovarianceMatrix::williamson_diagonal(&[a, a])?;
    let thermal_b = CovarianceMatrix::williamson_diagonal(&[b, b])?;
    let single = 2.0 / (a * b + 1.0 - ((a * a - 1.0) * (b * b - 1.0)).sqrt());
    let f = uhlmann_fidelity(&thermal_a, &thermal_b)?;
    println!("thermal pair: {:.16} vs product of single-mode fidelities {:.16}", f.fidelity, single * single);
    println!("invariants: Γ = {:.6}, Δ = {:.6}, Λ = {:.6}", f.gamma, f.delta, f.lambda);
    Ok(())
}
