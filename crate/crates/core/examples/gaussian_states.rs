//! Two-mode squeezing in phase space: symplectic checks, Williamson spectra,
//! purity.

use phonon_gw::gaussian::{
    apply_symplectic, beam_splitter, phase_rotation, purity, symplectic_eigenvalues, symplectic_residual,
    two_mode_squeezer, CovarianceMatrix,
};

fn main() -> phonon_gw::Result<()> {
    let s = two_mode_squeezer(1.2, 0.3)?;
    println!("S(1.2, 0.3) symplectic residual: {:.2e}", symplectic_residual(s.matrix())?);

    let composite = s.compose(&beam_splitter(0.4))?.compose(&phase_rotation(0.1, -0.7))?;
    println!("composite residual:             {:.2e}", symplectic_residual(composite.matrix())?);

    let thermal = CovarianceMatrix::williamson_diagonal(&[1.5, 2.0])?;
    let squeezed = apply_symplectic(&composite, &thermal)?;
    println!("spectrum before: {:?}", symplectic_eigenvalues(&thermal)?);
    println!("spectrum after:  {:?}", symplectic_eigenvalues(&squeezed)?);
    println!("purity: {:.6} (1/(ν₁ν₂) = {:.6})", purity(&squeezed)?, 1.0 / 3.0);

    let tmsv = apply_symplectic(&two_mode_squeezer(0.5, 0.0)?, &CovarianceMatrix::vacuum(2))?;
    println!("two-mode squeezed vacuum, r = 0.5:\n{}", tmsv.matrix());
    Ok(())
}
