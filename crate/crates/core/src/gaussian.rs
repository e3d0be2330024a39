//! Symplectic linear algebra on the real phase space of N bosonic modes.
//!
//! Quadratures are ordered `(x_1, p_1, x_2, p_2, ...)` and scaled so the
//! vacuum covariance matrix is the identity.

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::error::{Error, Result};

/// Default tolerance for structural checks (symmetry, symplecticity).
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Default tolerance on symplectic eigenvalues for the uncertainty bound.
pub const PHYSICALITY_TOL: f64 = 1e-8;

/// Block-diagonal symplectic form with `[[0, 1], [-1, 0]]` blocks.
pub fn symplectic_form(n_modes: usize) -> Result<DMatrix<f64>> {
    if n_modes == 0 {
        return Err(Error::InvalidArgument("symplectic form needs at least one mode".into()));
    }
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(omega)
}

fn check_even_square(m: &DMatrix<f64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "{what} must be square with even dimension, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Max-norm of `SᵀΩS − Ω`.
pub fn symplectic_residual(s: &DMatrix<f64>) -> Result<f64> {
    let n = check_even_square(s, "symplectic matrix")?;
    let omega = symplectic_form(n)?;
    Ok(max_abs(&(s.transpose() * &omega * s - omega)))
}

/// True when `SᵀΩS` matches `Ω` entrywise within `tol`.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(s)? <= tol)
}

/// A linear phase-space map preserving the symplectic form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    /// Wraps `m` after checking `SᵀΩS = Ω` to absolute tolerance `tol`.
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let residual = symplectic_residual(&m)?;
        if !(residual <= tol) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not symplectic: residual {residual:.3e} > {tol:.1e}"
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn identity(n_modes: usize) -> Self {
        Self(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.0.nrows() != other.0.nrows() {
            return Err(Error::InvalidArgument(format!(
                "cannot compose {}-mode and {}-mode maps",
                self.n_modes(),
                other.n_modes()
            )));
        }
        Ok(Self(&self.0 * &other.0))
    }

    /// Exact inverse `−Ω Sᵀ Ω`.
    pub fn inverse(&self) -> SymplecticMatrix {
        let omega = symplectic_form(self.n_modes()).expect("n_modes >= 1");
        Self(-(&omega * self.0.transpose() * &omega))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.0.clone().singular_values().max()
    }
}

/// Second moments of a zero-mean Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Accepts a symmetric even-dimensional matrix and symmetrizes away
    /// rounding-level asymmetry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_even_square(&m, "covariance matrix")?;
        let scale = max_abs(&m).max(1.0);
        let asym = max_abs(&(&m - m.transpose()));
        if !(asym <= STRUCTURE_TOL * scale) {
            return Err(Error::InvalidArgument(format!(
                "covariance matrix is not symmetric: max asymmetry {asym:.3e}"
            )));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self(sym))
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    /// Product of single-mode thermal states, `diag(ν_1, ν_1, ν_2, ν_2, ...)`.
    pub fn williamson_diagonal(nus: &[f64]) -> Result<Self> {
        if nus.is_empty() {
            return Err(Error::InvalidArgument("need at least one symplectic eigenvalue".into()));
        }
        if let Some(bad) = nus.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidArgument(format!("symplectic eigenvalue {bad} is not positive")));
        }
        let diag: Vec<f64> = nus.iter().flat_map(|&v| [v, v]).collect();
        Ok(Self(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))))
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Fixed-size copy for two-mode states.
    pub fn to_matrix4(&self) -> Result<Matrix4<f64>> {
        if self.0.nrows() != 4 {
            return Err(Error::InvalidArgument(format!(
                "expected a two-mode state, got {} modes",
                self.n_modes()
            )));
        }
        Ok(Matrix4::from_fn(|i, j| self.0[(i, j)]))
    }
}

/// `exp[r(e^{−iθ} a b − e^{iθ} a† b†)]` on modes `(a, b)`: diagonal blocks
/// `cosh r · I`, off-diagonal blocks `sinh r · R(θ)Z`.
pub fn two_mode_squeezer(r: f64, theta: f64) -> Result<SymplecticMatrix> {
    if !(r.is_finite() && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite squeezer parameters r={r}, θ={theta}")));
    }
    let d = squeezer_increment(r, theta);
    let m = Matrix4::identity() + d;
    Ok(SymplecticMatrix(DMatrix::from_column_slice(4, 4, m.as_slice())))
}

/// `R(θ)Z = [[cos θ, sin θ], [sin θ, −cos θ]]`.
pub(crate) fn squeeze_quadrature_block(theta: f64) -> Matrix2<f64> {
    let (sin, cos) = theta.sin_cos();
    Matrix2::new(cos, sin, sin, -cos)
}

/// `two_mode_squeezer(r, θ) − I`, with `cosh r − 1` formed without cancellation.
pub fn squeezer_increment(r: f64, theta: f64) -> Matrix4<f64> {
    let half = (0.5 * r).sinh();
    let cosh_m1 = 2.0 * half * half;
    let off = squeeze_quadrature_block(theta) * r.sinh();
    let mut d = Matrix4::zeros();
    for i in 0..2 {
        d[(i, i)] = cosh_m1;
        d[(i + 2, i + 2)] = cosh_m1;
        for j in 0..2 {
            d[(i, j + 2)] = off[(i, j)];
            d[(i + 2, j)] = off[(i, j)];
        }
    }
    d
}

/// Local phase rotations by `a` and `b` on a pair of modes.
pub fn phase_rotation(a: f64, b: f64) -> SymplecticMatrix {
    let mut m = DMatrix::zeros(4, 4);
    for (k, angle) in [a, b].into_iter().enumerate() {
        let (s, c) = angle.sin_cos();
        m[(2 * k, 2 * k)] = c;
        m[(2 * k, 2 * k + 1)] = -s;
        m[(2 * k + 1, 2 * k)] = s;
        m[(2 * k + 1, 2 * k + 1)] = c;
    }
    SymplecticMatrix(m)
}

/// Passive two-mode mixer with transmissivity `cos² angle`.
pub fn beam_splitter(angle: f64) -> SymplecticMatrix {
    let (s, c) = angle.sin_cos();
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        m[(i, i)] = c;
        m[(i + 2, i + 2)] = c;
        m[(i, i + 2)] = s;
        m[(i + 2, i)] = -s;
    }
    SymplecticMatrix(m)
}

/// The congruence `SᵀσS`.
pub fn apply_symplectic(s: &SymplecticMatrix, sigma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if s.0.nrows() != sigma.0.nrows() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {}-mode map on {}-mode state",
            s.n_modes(),
            sigma.n_modes()
        )));
    }
    let out = s.0.transpose() * &sigma.0 * &s.0;
    Ok(CovarianceMatrix((&out + out.transpose()) * 0.5))
}

/// Symplectic eigenvalues in descending order: the moduli of the `±iν`
/// eigenvalue pairs of `Ωσ`.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = sigma.n_modes();
    if sigma.0.clone().cholesky().is_none() {
        let min_eig = sigma.0.clone().symmetric_eigenvalues().min();
        return Err(Error::NumericFailure(format!(
            "covariance matrix is not positive definite (smallest eigenvalue {min_eig:.3e})"
        )));
    }
    let omega = symplectic_form(n)?;
    let product = omega * &sigma.0;
    let mut moduli: Vec<f64> = product.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    if moduli.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure("eigensolver returned non-finite values".into()));
    }
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(moduli.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}

/// True when every symplectic eigenvalue is at least `1 − tol`.
pub fn is_physical_state(sigma: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let sigma = CovarianceMatrix::new(sigma.clone())?;
    match symplectic_eigenvalues(&sigma) {
        Ok(nus) => Ok(nus.iter().all(|&v| v >= 1.0 - tol)),
        Err(Error::NumericFailure(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// `1/√det σ`, from the Cholesky factor.
pub fn purity(sigma: &CovarianceMatrix) -> Result<f64> {
    let chol = sigma
        .0
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericFailure("purity of a non-positive-definite matrix".into()))?;
    let l = chol.l();
    Ok(l.diagonal().iter().map(|d| d.recip()).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn form_for_one_and_two_modes() {
        assert_eq!(symplectic_form(1).unwrap(), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let omega = symplectic_form(2).unwrap();
        assert_eq!(omega[(2, 3)], 1.0);
        assert_eq!(omega[(3, 2)], -1.0);
        assert_eq!(omega[(0, 2)], 0.0);
        for n in 1..5 {
            let o = symplectic_form(n).unwrap();
            assert_eq!(&o * &o, -DMatrix::<f64>::identity(2 * n, 2 * n));
        }
        assert!(matches!(symplectic_form(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn symplectic_checks() {
        assert!(is_symplectic(&DMatrix::identity(4, 4), 1e-10).unwrap());
        let s = two_mode_squeezer(1.3, 0.7).unwrap();
        assert!(is_symplectic(s.matrix(), 1e-10).unwrap());
        let mut bumped = DMatrix::<f64>::identity(4, 4);
        bumped[(1, 1)] += 10.0 * 1e-10;
        assert!(!is_symplectic(&bumped, 1e-10).unwrap());
        assert!(matches!(is_symplectic(&DMatrix::identity(3, 3), 1e-10), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn squeezer_identity_and_inverse() {
        assert_eq!(two_mode_squeezer(0.0, 0.3).unwrap().into_matrix(), DMatrix::identity(4, 4));
        let s = two_mode_squeezer(2.1, -0.4).unwrap();
        let back = two_mode_squeezer(-2.1, -0.4).unwrap();
        let prod = s.matrix() * back.matrix();
        assert!((prod - DMatrix::<f64>::identity(4, 4)).amax() < 1e-10);
        let inv = s.inverse();
        assert!((s.matrix() * inv.matrix() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-10);
        assert!(two_mode_squeezer(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn squeezed_vacuum_from_matrix_product() {
        // Entries of SᵀS written out by hand for θ = 0.
        let s = two_mode_squeezer(1.0, 0.0).unwrap();
        let sigma = apply_symplectic(&s, &CovarianceMatrix::vacuum(2)).unwrap();
        let (c, sh) = (1.0_f64.cosh(), 1.0_f64.sinh());
        let diag = c * c + sh * sh;
        let off = 2.0 * c * sh;
        assert_relative_eq!(diag, 2.0_f64.cosh(), max_relative = 1e-14);
        assert_relative_eq!(off, 2.0_f64.sinh(), max_relative = 1e-14);
        let m = sigma.matrix();
        for i in 0..4 {
            assert_relative_eq!(m[(i, i)], diag, max_relative = 1e-14);
        }
        assert_relative_eq!(m[(0, 2)], off, max_relative = 1e-14);
        assert_relative_eq!(m[(1, 3)], -off, max_relative = 1e-14);
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(m[(0, 3)], 0.0);
    }

    #[test]
    fn apply_rejects_mismatch() {
        let s = SymplecticMatrix::identity(1);
        assert!(apply_symplectic(&s, &CovarianceMatrix::vacuum(2)).is_err());
    }

    #[test]
    fn eigenvalues_of_diagonal_states() {
        let vac = symplectic_eigenvalues(&CovarianceMatrix::vacuum(2)).unwrap();
        assert_relative_eq!(vac[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(vac[1], 1.0, max_relative = 1e-14);
        let th = CovarianceMatrix::williamson_diagonal(&[1.2, 3.4]).unwrap();
        let nus = symplectic_eigenvalues(&th).unwrap();
        assert_relative_eq!(nus[0], 3.4, max_relative = 1e-14);
        assert_relative_eq!(nus[1], 1.2, max_relative = 1e-14);
    }

    #[test]
    fn non_positive_definite_is_numeric_failure() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, 1.0, 1.0]));
        let sigma = CovarianceMatrix::new(m.clone()).unwrap();
        assert!(matches!(symplectic_eigenvalues(&sigma), Err(Error::NumericFailure(_))));
        assert!(!is_physical_state(&m, PHYSICALITY_TOL).unwrap());
    }

    #[test]
    fn physicality() {
        assert!(is_physical_state(&DMatrix::identity(4, 4), PHYSICALITY_TOL).unwrap());
        assert!(!is_physical_state(&(DMatrix::identity(4, 4) * 0.5), PHYSICALITY_TOL).unwrap());
        let th = CovarianceMatrix::williamson_diagonal(&[1.506, 1.506]).unwrap();
        assert!(is_physical_state(th.matrix(), PHYSICALITY_TOL).unwrap());
        let mut asym = DMatrix::<f64>::identity(4, 4);
        asym[(0, 1)] = 0.3;
        assert!(matches!(is_physical_state(&asym, PHYSICALITY_TOL), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn purity_values() {
        assert_relative_eq!(purity(&CovarianceMatrix::vacuum(2)).unwrap(), 1.0, max_relative = 1e-15);
        let th = CovarianceMatrix::williamson_diagonal(&[1.5, 2.5]).unwrap();
        assert_relative_eq!(purity(&th).unwrap(), 1.0 / (1.5 * 2.5), max_relative = 1e-14);
        let s = two_mode_squeezer(0.8, 0.2).unwrap();
        let moved = apply_symplectic(&s, &th).unwrap();
        assert_relative_eq!(purity(&moved).unwrap(), 1.0 / (1.5 * 2.5), max_relative = 1e-12);
    }

    #[test]
    fn increment_matches_difference_for_small_squeezing() {
        let r = 1e-9;
        let d = squeezer_increment(r, 0.4);
        let c_m1 = d[(0, 0)];
        assert_relative_eq!(c_m1, 0.5 * r * r, max_relative = 1e-12);
    }
}
