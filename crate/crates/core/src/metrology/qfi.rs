//! Quantum Fisher information from the fidelity between neighbouring states,
//! `H = 8(1 − √F(σ_p, σ_{p+dp}))/dp²`, on a Richardson ladder of steps.

use nalgebra::Matrix4;
use serde::Serialize;

use super::fidelity::{fidelity_from_pair, FidelityBreakdown, LocalPair};
use crate::channel::{squeezer_generator, ChannelForm};
use crate::error::{Error, Result};
use crate::gaussian::{squeezer_increment, two_mode_squeezer, CovarianceMatrix, SymplecticMatrix};
use crate::model::ThermalSpec;

/// A one-parameter family of two-mode states.
pub trait StateFamily {
    fn state(&self, p: f64) -> Result<CovarianceMatrix>;

    /// The states at `p` and `p + dp`. Override when the pair can be formed
    /// more accurately than by evaluating both states.
    fn local_pair(&self, p: f64, dp: f64) -> Result<LocalPair> {
        LocalPair::generic(&self.state(p)?, &self.state(p + dp)?)
    }
}

impl<F> StateFamily for F
where
    F: Fn(f64) -> Result<CovarianceMatrix>,
{
    fn state(&self, p: f64) -> Result<CovarianceMatrix> {
        self(p)
    }
}

/// Thermal two-mode state seeded by `S(r, θ)` and sent through the channel
/// `S(s, φ)` (or its linearization), parametrized by `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelFamily {
    /// `ν − 1` of both modes.
    pub excess: [f64; 2],
    pub r: f64,
    pub theta: f64,
    pub phase: f64,
    pub form: ChannelForm,
}

impl ChannelFamily {
    pub fn new(thermal: &ThermalSpec, r: f64, theta: f64, phase: f64, form: ChannelForm) -> Self {
        Self { excess: thermal.nu_excess(), r, theta, phase, form }
    }

    fn seed(&self) -> Result<SymplecticMatrix> {
        two_mode_squeezer(self.r, self.theta)
    }

    fn channel(&self, s: f64) -> Matrix4<f64> {
        match self.form {
            ChannelForm::Exact => Matrix4::identity() + squeezer_increment(s, self.phase),
            ChannelForm::FirstOrder => Matrix4::identity() + squeezer_generator(self.phase) * s,
        }
    }
}

fn to_matrix4(s: &SymplecticMatrix) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| s.matrix()[(i, j)])
}

impl StateFamily for ChannelFamily {
    fn state(&self, s: f64) -> Result<CovarianceMatrix> {
        let w = to_matrix4(&self.seed()?) * self.channel(s);
        let nu = [1.0 + self.excess[0], 1.0 + self.excess[1]];
        let n = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu[0], nu[0], nu[1], nu[1]));
        let sigma = w.transpose() * n * w;
        CovarianceMatrix::new(nalgebra::DMatrix::from_column_slice(4, 4, sigma.as_slice()))
    }

    /// Both states are pulled back by the inverse of the frame at `s`, which
    /// leaves the fidelity unchanged and keeps the increment explicit. The
    /// channel commutes with its own generator, so with `G' = S₀ G S₀⁻¹` and
    /// `G'² = I` the pulled-back exact increment is `(cosh ds − 1) I + sinh ds · G'`.
    fn local_pair(&self, s: f64, ds: f64) -> Result<LocalPair> {
        let seed = self.seed()?;
        let g = to_matrix4(&seed) * squeezer_generator(self.phase) * to_matrix4(&seed.inverse());
        match self.form {
            ChannelForm::Exact => {
                let half = (0.5 * ds).sinh();
                let e_b = Matrix4::identity() * (2.0 * half * half) + g * ds.sinh();
                LocalPair::williamson(self.excess, &Matrix4::zeros(), &e_b, true)
            }
            ChannelForm::FirstOrder => {
                // Not symplectic: only the seed is removed.
                LocalPair::williamson(self.excess, &(g * s), &(g * (s + ds)), false)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DifferencingPolicy {
    /// First step before the deficit pilot, in units of `scale`.
    pub initial_step: f64,
    /// Parameter scale: steps are `initial_step · scale`.
    pub scale: f64,
    /// Desired `1 − √F` at the largest ladder step.
    pub target_deficit: f64,
    pub pilot_iterations: usize,
    pub rungs: usize,
    /// Ratio of consecutive steps.
    pub ratio: f64,
    /// Largest accepted relative spread of the raw ladder estimates.
    pub rel_tol: f64,
}

impl Default for DifferencingPolicy {
    fn default() -> Self {
        Self {
            initial_step: 1e-3,
            scale: 1.0,
            target_deficit: 1e-6,
            pilot_iterations: 3,
            rungs: 3,
            ratio: 0.5,
            rel_tol: 1e-3,
        }
    }
}

impl DifferencingPolicy {
    /// The fixed ladder `{1, ½, ¼} · initial_step · scale`, no pilot.
    pub fn fixed(scale: f64) -> Self {
        Self { scale, pilot_iterations: 0, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QfiResult {
    /// Extrapolated QFI with respect to the family parameter.
    pub h: f64,
    /// Largest ladder step.
    pub step: f64,
    /// `(step, raw estimate)` per rung.
    pub ladder: Vec<(f64, f64)>,
    /// `(max − min)/|h|` over the raw estimates.
    pub spread: f64,
    /// Invariants at the largest step.
    pub breakdown: FidelityBreakdown,
}

impl QfiResult {
    /// The same information per unit of a parameter `ε` with `p = k ε`.
    pub fn rescaled(&self, k: f64) -> QfiResult {
        QfiResult {
            h: self.h * k * k,
            step: self.step / k.abs(),
            ladder: self.ladder.iter().map(|&(d, e)| (d / k.abs(), e * k * k)).collect(),
            ..self.clone()
        }
    }
}

fn estimate<F: StateFamily + ?Sized>(family: &F, p0: f64, h: f64) -> Result<(f64, FidelityBreakdown)> {
    let f = fidelity_from_pair(&family.local_pair(p0, h)?)?;
    Ok((8.0 * f.one_minus_sqrt_fidelity / (h * h), f))
}

/// Step reductions by 10² allowed before the pilot gives up.
const MAX_BACKOFFS: usize = 20;

/// QFI of `family` at `p0`.
pub fn qfi<F: StateFamily + ?Sized>(family: &F, p0: f64, policy: &DifferencingPolicy) -> Result<QfiResult> {
    if !(policy.initial_step > 0.0 && policy.scale > 0.0 && policy.ratio > 0.0 && policy.ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("invalid differencing policy {policy:?}")));
    }
    if policy.rungs != 3 {
        return Err(Error::InvalidArgument("the Richardson ladder uses exactly three rungs".into()));
    }
    let mut h = policy.initial_step * policy.scale;
    // Back off while the step is so large that the states are far apart.
    let mut backoffs = 0;
    let mut iterations = 0;
    while iterations < policy.pilot_iterations {
        let f = match estimate(family, p0, h) {
            Ok((_, f)) => f,
            Err(Error::NumericFailure(_)) if backoffs < MAX_BACKOFFS => {
                backoffs += 1;
                h *= 1e-2;
                continue;
            }
            Err(e) => return Err(e),
        };
        let deficit = f.one_minus_sqrt_fidelity;
        if deficit > 0.1 && backoffs < MAX_BACKOFFS {
            backoffs += 1;
            h *= 1e-2;
            continue;
        }
        iterations += 1;
        if deficit <= 0.0 {
            if deficit == 0.0 {
                return Ok(QfiResult { h: 0.0, step: h, ladder: vec![(h, 0.0)], spread: 0.0, breakdown: f });
            }
            break;
        }
        let factor = (policy.target_deficit / deficit).sqrt();
        if (0.5..=2.0).contains(&factor) {
            break;
        }
        h *= factor;
    }
    let steps: Vec<f64> = (0..policy.rungs).map(|k| h * policy.ratio.powi(k as i32)).collect();
    let mut ladder = Vec::with_capacity(steps.len());
    let mut top = None;
    for &dh in &steps {
        let (e, f) = estimate(family, p0, dh)?;
        top.get_or_insert(f);
        ladder.push((dh, e));
    }
    let raw: Vec<f64> = ladder.iter().map(|&(_, e)| e).collect();
    // Estimates carry O(h) and O(h²) errors.
    let c1 = 1.0 / policy.ratio;
    let r1a = (c1 * raw[1] - raw[0]) / (c1 - 1.0);
    let r1b = (c1 * raw[2] - raw[1]) / (c1 - 1.0);
    let c2 = c1 * c1;
    let value = (c2 * r1b - r1a) / (c2 - 1.0);
    let hi = raw.iter().cloned().fold(f64::MIN, f64::max);
    let lo = raw.iter().cloned().fold(f64::MAX, f64::min);
    let spread = if value == 0.0 { if hi == lo { 0.0 } else { f64::INFINITY } } else { (hi - lo) / value.abs() };
    if !value.is_finite() || !(spread <= policy.rel_tol) {
        return Err(Error::LadderNotConverged { spread, tolerance: policy.rel_tol, ladder });
    }
    Ok(QfiResult { h: value.max(0.0), step: steps[0], ladder, spread, breakdown: top.expect("non-empty ladder") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::apply_symplectic;
    use approx::assert_relative_eq;

    fn pure_family(r: f64, phase: f64) -> ChannelFamily {
        ChannelFamily { excess: [0.0, 0.0], r, theta: 0.0, phase, form: ChannelForm::Exact }
    }

    #[test]
    fn pure_seedless_squeezing_gives_four() {
        let q = qfi(&pure_family(0.0, 0.0), 0.0, &DifferencingPolicy::default()).unwrap();
        assert_relative_eq!(q.h, 4.0, max_relative = 1e-6);
        assert!(q.spread <= 1e-3);
    }

    #[test]
    fn seeded_pure_state_depends_on_phase() {
        // Aligned phases add: H = 4. Quadrature phases: H = 4 cosh²(2r).
        for r in [0.5, 2.0, 5.0, 10.0] {
            let aligned = qfi(&pure_family(r, 0.0), 0.0, &DifferencingPolicy::default()).unwrap();
            assert_relative_eq!(aligned.h, 4.0, max_relative = 1e-5);
            let quad = qfi(&pure_family(r, std::f64::consts::FRAC_PI_2), 0.0, &DifferencingPolicy::default()).unwrap();
            let c = (2.0 * r).cosh();
            assert_relative_eq!(quad.h, 4.0 * c * c, max_relative = 1e-5);
        }
    }

    #[test]
    fn closure_family_matches_structured_family() {
        let fam = ChannelFamily { excess: [0.3, 0.05], r: 0.8, theta: 0.2, phase: 1.0, form: ChannelForm::Exact };
        let closure = |s: f64| fam.state(s);
        let structured = qfi(&fam, 0.1, &DifferencingPolicy::default()).unwrap();
        let generic = qfi(&closure, 0.1, &DifferencingPolicy::default()).unwrap();
        assert_relative_eq!(structured.h, generic.h, max_relative = 1e-4);
    }

    #[test]
    fn exact_family_states_agree_with_congruence() {
        let fam = ChannelFamily { excess: [0.2, 0.01], r: 1.1, theta: 0.4, phase: 0.3, form: ChannelForm::Exact };
        let seed = two_mode_squeezer(1.1, 0.4).unwrap();
        let ch = two_mode_squeezer(0.25, 0.3).unwrap();
        let base = CovarianceMatrix::williamson_diagonal(&[1.2, 1.01]).unwrap();
        let expected = apply_symplectic(&ch, &apply_symplectic(&seed, &base).unwrap()).unwrap();
        let got = fam.state(0.25).unwrap();
        assert!((got.matrix() - expected.matrix()).amax() < 1e-12);
        let pair = fam.local_pair(0.25, 0.01).unwrap();
        let f = fidelity_from_pair(&pair).unwrap();
        let direct = super::super::fidelity::uhlmann_fidelity(&fam.state(0.25).unwrap(), &fam.state(0.26).unwrap()).unwrap();
        assert_relative_eq!(f.fidelity, direct.fidelity, max_relative = 1e-10);
    }

    #[test]
    fn rescaling_is_chain_rule() {
        let q = qfi(&pure_family(0.0, 0.0), 0.0, &DifferencingPolicy::default()).unwrap();
        let e = q.rescaled(3.0);
        assert_relative_eq!(e.h, 9.0 * q.h, max_relative = 1e-15);
    }
}
