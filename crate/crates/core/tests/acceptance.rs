//! Acceptance suite: one verdict line per criterion.
//!
//! Runs as a plain binary so the verdicts always reach the test log. The
//! process fails on any red criterion not listed in [`KNOWN_RED`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use phonon_gw::channel::{resonant_frequency, ChannelForm, WaveParams};
use phonon_gw::config::RunConfig;
use phonon_gw::constants::{MICROMETER, NANOKELVIN, RB87_MASS};
use phonon_gw::gaussian::{
    apply_symplectic, beam_splitter, phase_rotation, symplectic_eigenvalues, symplectic_residual, two_mode_squeezer,
    CovarianceMatrix, SymplecticMatrix,
};
use phonon_gw::metrology::orders::loglog_slope;
use phonon_gw::metrology::{
    bulk_qfi, qfi, qfi_term_orders, temperature_correction_scan, uhlmann_fidelity, BulkWavenumber, ChannelFamily,
    DifferencingPolicy,
};
use phonon_gw::model::{mode_frequency, temperature_for_occupation, thermal_spec, ModePair, PhysicalParams};
use phonon_gw::oracle::{
    calibration_times, convergence_study, extract_rate, simulate_with_samples, OracleConfig,
};
use phonon_gw::sweep::{cramer_rao_bound, scan, sensitivity_density, SweepTable};
use phonon_gw::Result;

/// Criteria expected to stay red, with the reason recorded next to them.
const KNOWN_RED: &[(u32, &str)] = &[(
    9,
    "bulk density of 1e-8 Hz^-1/2 needs H ~ 1e16 at t = 1 s; one probe with H <= 3e-2 gives O(1)",
)];

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn reference_params(temperature_nk: f64) -> PhysicalParams {
    PhysicalParams::new(MICROMETER, 0.01, RB87_MASS, 100.0 * NANOKELVIN, temperature_nk * NANOKELVIN)
        .expect("reference trap")
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn sweep_config(temperature_nk: f64, m: u32, r: f64, phase: f64, sweep: &str) -> String {
    format!(
        r#"
[trap]
length_um = 1.0
sound_speed_mm_per_s = 10.0
chemical_potential_nK = 100.0
temperature_nK = {temperature_nk:?}

[modes]
n = 1
m = {m}

[seed]
r = {r:?}

[channel]
phase_rad = {phase:?}
rate_per_strain_over_omega1 = 0.35354150700730885
provenance = "mode-oracle fit, modes (1, 2)"

[sweep]
{sweep}
"#
    )
}

fn run_scan(text: &str) -> Result<SweepTable> {
    scan(&RunConfig::parse(text)?, &[], None)
}

fn random_symplectic(rng: &mut StdRng, composite: bool) -> Result<SymplecticMatrix> {
    if !composite {
        return two_mode_squeezer(rng.random_range(0.0..=5.0), rng.random_range(0.0..TAU));
    }
    // Total squeezing stays within r <= 5.
    let r1 = rng.random_range(0.0..=5.0);
    let r2 = rng.random_range(0.0..=(5.0 - r1));
    two_mode_squeezer(r1, rng.random_range(0.0..TAU))?
        .compose(&beam_splitter(rng.random_range(0.0..TAU)))?
        .compose(&phase_rotation(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)))?
        .compose(&two_mode_squeezer(r2, rng.random_range(0.0..TAU))?)
}

fn symplectic_suite() -> Result<Verdict> {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut residual, mut spectrum_abs, mut spectrum_normwise) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..1000 {
        let s = random_symplectic(&mut rng, case % 2 == 1)?;
        residual = residual.max(symplectic_residual(s.matrix())?);
        let mut nus = [rng.random_range(1.0..3.0), rng.random_range(1.0..3.0)];
        let out = apply_symplectic(&s, &CovarianceMatrix::williamson_diagonal(&nus)?)?;
        nus.sort_by(|a, b| b.total_cmp(a));
        let err = symplectic_eigenvalues(&out)?.iter().zip(nus).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        spectrum_abs = spectrum_abs.max(err);
        spectrum_normwise = spectrum_normwise.max(err / out.matrix().norm());
    }
    let elapsed = start.elapsed();
    Ok(Verdict {
        id: 1,
        name: "symplectic suite",
        pass: residual <= 1e-10 && spectrum_normwise <= 1e-10 && elapsed < Duration::from_secs(10),
        detail: format!(
            "1000 cases: max |S^T Ω S - Ω| = {residual:.1e}, spectrum error {spectrum_normwise:.1e} of |σ| \
             ({spectrum_abs:.1e} absolute), {elapsed:.2?}"
        ),
    })
}

fn spectrum_check() -> Result<Verdict> {
    let omega1 = mode_frequency(&reference_params(0.0), 1);
    let rel = (omega1 - 2.0 * PI * 5e3).abs() / (2.0 * PI * 5e3);
    Ok(Verdict {
        id: 2,
        name: "spectrum check",
        pass: rel <= f64::EPSILON,
        detail: format!("ω₁ = {omega1:.10e} rad/s, relative offset {rel:.1e}"),
    })
}

/// `⟨00| exp[s(ab − a†b†)] |00⟩` in a truncated Fock space.
fn fock_vacuum_amplitude(s: f64, levels: usize) -> f64 {
    let a = DMatrix::from_fn(levels, levels, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
    let id = DMatrix::<f64>::identity(levels, levels);
    let a1 = a.kronecker(&id);
    let a2 = id.kronecker(&a);
    let k = (&a1 * &a2 - a1.transpose() * a2.transpose()) * s;
    k.exp()[(0, 0)]
}

fn fidelity_oracle() -> Result<Verdict> {
    let start = Instant::now();
    let vacuum = CovarianceMatrix::vacuum(2);
    let mut worst = 0.0f64;
    for s in [0.05, 0.1, 0.2, 0.5] {
        let tmsv = apply_symplectic(&two_mode_squeezer(s, 0.0)?, &vacuum)?;
        let f = uhlmann_fidelity(&vacuum, &tmsv)?.fidelity;
        let overlap = fock_vacuum_amplitude(s, 24).powi(2);
        worst = worst.max((f - overlap).abs());
    }
    let elapsed = start.elapsed();
    Ok(Verdict {
        id: 3,
        name: "fidelity oracle equivalence",
        pass: worst <= 1e-8 && elapsed < Duration::from_secs(5),
        detail: format!("max |F - |<00|U|00>|^2| = {worst:.1e} against a 24-level Fock oracle, {elapsed:.2?}"),
    })
}

fn qfi_baseline() -> Result<Verdict> {
    let thermal = thermal_spec(&reference_params(0.0), ModePair::new(1, 2)?)?;
    let family = ChannelFamily::new(&thermal, 0.0, 0.0, 0.0, ChannelForm::Exact);
    let res = qfi(&family, 0.0, &DifferencingPolicy::default())?;
    let rel = (res.h - 4.0).abs() / 4.0;
    Ok(Verdict {
        id: 4,
        name: "QFI baseline",
        pass: rel <= 1e-3,
        detail: format!("H_s = {:.10} (relative error {rel:.1e}), ladder spread {:.1e}", res.h, res.spread),
    })
}

fn quadratic_growth() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [2.0, 10.0] {
        let text = sweep_config(0.0, 2, r, FRAC_PI_2, "axis = \"omega1_t\"\nfrom = 100.0\nto = 1000.0\npoints = 9");
        let table = run_scan(&text)?;
        let t = table.column(|row| row.time_s);
        let h_slope = loglog_slope(&t, &table.column(|row| row.h_eps)).unwrap_or(f64::NAN);
        let bound_slope = loglog_slope(&t, &table.column(|row| row.delta_eps_bound)).unwrap_or(f64::NAN);
        pass &= (h_slope - 2.0).abs() <= 0.04 && (bound_slope + 1.0).abs() <= 0.02;
        parts.push(format!("r = {r}: H slope {h_slope:.6}, bound slope {bound_slope:.6}"));
    }
    Ok(Verdict { id: 5, name: "quadratic time growth", pass, detail: parts.join("; ") })
}

fn perturbative_orders() -> Result<Verdict> {
    let params = reference_params(0.0);
    let modes = ModePair::new(1, 2)?;
    let omega1 = mode_frequency(&params, 1);
    let temperatures =
        log_grid(3e-6, 3e-5, 5).into_iter().map(|x| temperature_for_occupation(omega1, x)).collect::<Result<Vec<_>>>()?;
    let steps = log_grid(3e-5, 3e-4, 5);
    let report = qfi_term_orders(&params, modes, 1.0, FRAC_PI_2, ChannelForm::FirstOrder, &temperatures, &steps)?;
    let close = |v: Option<f64>, want: f64| v.is_some_and(|v| (v - want).abs() <= 0.1);
    let g = report.gamma_minus_delta;
    let l = report.lambda;
    let pass = close(g.eps, 2.0) && close(g.x, 1.0) && close(l.eps, 4.0) && close(l.x, 2.0);
    let show = |v: Option<f64>| v.map_or("none".to_string(), |v| format!("{v:.4}"));
    Ok(Verdict {
        id: 6,
        name: "perturbative orders",
        pass,
        detail: format!(
            "first-order channel: Γ-Δ ε^{} x^{}, Λ ε^{} x^{}",
            show(g.eps),
            show(g.x),
            show(l.eps),
            show(l.x)
        ),
    })
}

fn temperature_robustness() -> Result<Verdict> {
    let params = reference_params(0.0);
    let modes = ModePair::new(1, 2)?;
    let omega1 = mode_frequency(&params, 1);
    let cold = temperature_correction_scan(&params, modes, 10.0, FRAC_PI_2, &[NANOKELVIN])?;
    let one_nk = cold.rows[0].relative_correction.abs();
    let temperatures =
        log_grid(1e-3, 0.1, 9).into_iter().map(|x| temperature_for_occupation(omega1, x)).collect::<Result<Vec<_>>>()?;
    let warm = temperature_correction_scan(&params, modes, 10.0, FRAC_PI_2, &temperatures)?;
    let fit = warm.fit.expect("nine points fit a line");
    Ok(Verdict {
        id: 7,
        name: "temperature robustness",
        pass: one_nk < 1e-3 && fit.residual_fraction < 0.05,
        detail: format!(
            "|ΔH/H|(1 nK) = {one_nk:.1e}; correction vs x_n: slope {:.4}, residual {:.2}%",
            fit.slope,
            100.0 * fit.residual_fraction
        ),
    })
}

fn counting_vs_qfi() -> Result<Verdict> {
    let text = sweep_config(50.0, 2, 2.0, 0.0, "axis = \"time_s\"\nfrom = 1e-3\nto = 1.0\npoints = 31\ncfi = true");
    let table = run_scan(&text)?;
    let mut bounded = true;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for row in &table.rows {
        let cfi = row.cfi.unwrap_or(f64::NAN);
        bounded &= cfi <= row.h_eps;
        let ratio = cfi / row.h_eps;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok(Verdict {
        id: 8,
        name: "CFI vs QFI",
        pass: bounded && lo >= 0.5 && table.flagged_rows() == 0,
        detail: format!("{} points, F/H in [{lo:.4}, {hi:.4}], F <= H everywhere: {bounded}", table.rows.len()),
    })
}

fn bulk_comparison() -> Result<Verdict> {
    let params = reference_params(0.0);
    let modes = ModePair::new(1, 2)?;
    let omega = resonant_frequency(&params, modes);
    let times = log_grid(1e-3, 1.0, 31);
    let wave = WaveParams::new(0.0, omega, 1.0)?;
    let full = bulk_qfi(&params, &wave, 0.0, BulkWavenumber::FullWave)?.h_max;
    let ground = bulk_qfi(&params, &wave, 0.0, BulkWavenumber::GroundMode)?.h_max;
    let full_ok = (1e-2 / 3.0..=3e-2).contains(&full);
    let ground_ok = (1e-3 / 3.0..=3e-3).contains(&ground);

    let mut bulk_peak = 0.0f64;
    for &t in &times {
        bulk_peak = bulk_peak.max(bulk_qfi(&params, &wave, t, BulkWavenumber::FullWave)?.h);
    }
    let table = run_scan(&sweep_config(0.0, 2, 10.0, FRAC_PI_2, "axis = \"time_s\"\nvalues = [1e-3, 1e-2, 1e-1, 1.0]"))?;
    let grows = table.rows.windows(2).all(|w| w[1].h_eps > w[0].h_eps);
    let bounded = bulk_peak <= full * (1.0 + 1e-12);

    let bound = cramer_rao_bound(full, 1)?;
    let densities =
        times.iter().map(|&t| sensitivity_density(bound, t)).collect::<Result<Vec<_>>>()?;
    let (dmin, dmax) = densities.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
    let density_ok = dmin >= 1e-9 && dmax <= 1e-7;

    Ok(Verdict {
        id: 9,
        name: "bulk comparison",
        pass: full_ok && ground_ok && grows && bounded && density_ok,
        detail: format!(
            "max H 2π/L = {full:.3e} [{}], π/L = {ground:.3e} [{}]; bulk <= max over t: {bounded}, phonon H grows: {grows}; \
             bulk density over t in [1 ms, 1 s] = {dmin:.2e}..{dmax:.2e} Hz^-1/2 [{}]",
            if full_ok { "ok" } else { "off" },
            if ground_ok { "ok" } else { "off" },
            if density_ok { "ok" } else { "off" },
        ),
    })
}

fn oracle_calibration() -> Result<Verdict> {
    let start = Instant::now();
    let params = reference_params(0.0);
    let modes = ModePair::new(1, 2)?;
    let cfg = OracleConfig::default();
    let times = calibration_times(&params, 10);
    let fit = extract_rate(&params, modes, &[1e-5, 1e-4], &times, &cfg, FRAC_PI_2)?;
    let small = extract_rate(&params, modes, &[1e-5], &times, &cfg, FRAC_PI_2)?;
    let large = extract_rate(&params, modes, &[1e-4], &times, &cfg, FRAC_PI_2)?;
    let linearity = (small.rate - large.rate).abs() / large.rate;

    let duration = times[times.len() - 1];
    let wave = WaveParams::resonant(&params, modes, 1e-4, duration)?;
    let run = simulate_with_samples(&params, modes, &wave, &cfg, &times)?;
    let identity = run.series.iter().map(|s| s.identity_residual).fold(0.0, f64::max);
    let conv = convergence_study(&params, modes, &wave, &cfg)?;
    let elapsed = start.elapsed();
    Ok(Verdict {
        id: 10,
        name: "oracle calibration",
        pass: fit.residual < 0.02
            && linearity < 0.01
            && identity <= 1e-6
            && conv.truncation_delta < 5e-3
            && elapsed < Duration::from_secs(120),
        detail: format!(
            "R/ω₁ = {:.6}, t-fit residual {:.1e}, ε-linearity {linearity:.1e}, identity residual {identity:.1e}, \
             +4 modes {:.1e}, {elapsed:.2?}",
            fit.rate_over_omega1, fit.residual, conv.truncation_delta
        ),
    })
}

fn determinism() -> Result<Verdict> {
    let text = sweep_config(50.0, 2, 2.0, 0.0, "axis = \"time_s\"\nfrom = 1e-3\nto = 1.0\npoints = 24\ncfi = true");
    let cfg = RunConfig::parse(&text)?;
    let reference = scan(&cfg, &[], Some(1))?.to_csv()?;
    let mut identical = true;
    for workers in [2, 3, 8] {
        identical &= scan(&RunConfig::parse(&text)?, &[], Some(workers))?.to_csv()? == reference;
    }
    Ok(Verdict {
        id: 11,
        name: "determinism",
        pass: identical,
        detail: format!("{} bytes, identical across 1, 2, 3 and 8 workers: {identical}", reference.len()),
    })
}

type Criterion = fn() -> Result<Verdict>;

fn main() {
    let criteria: [(u32, Criterion); 11] = [
        (1, symplectic_suite),
        (2, spectrum_check),
        (3, fidelity_oracle),
        (4, qfi_baseline),
        (5, quadratic_growth),
        (6, perturbative_orders),
        (7, temperature_robustness),
        (8, counting_vs_qfi),
        (9, bulk_comparison),
        (10, oracle_calibration),
        (11, determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        let verdict = check().unwrap_or_else(|e| Verdict {
            id,
            name: "error",
            pass: false,
            detail: e.to_string(),
        });
        let known = KNOWN_RED.iter().find(|(k, _)| *k == verdict.id);
        let status = match (verdict.pass, known) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (known)",
            (false, None) => "FAIL",
        };
        println!("criterion {:>2} {:<28} {status}: {}", verdict.id, verdict.name, verdict.detail);
        if let (false, Some((_, why))) = (verdict.pass, known) {
            println!("             analysis: {why}");
        }
        if !verdict.pass && known.is_none() {
            unexpected.push(verdict.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected red criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
