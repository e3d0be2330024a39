use std::path::PathBuf;

use phonon_gw::config::RunConfig;
use phonon_gw::sweep::{scan, SweepTable};

fn config(temperature_nk: f64, m: u32, rate: f64, r: f64, sweep: &str) -> String {
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
rate_per_strain_over_omega1 = {rate:?}

[sweep]
{sweep}
"#
    )
}

fn table(text: &str) -> SweepTable {
    scan(&RunConfig::parse(text).unwrap(), &[], None).unwrap()
}

const TIME_SWEEP: &str = "axis = \"omega1_t\"\nfrom = 100.0\nto = 1000.0\npoints = 10";

#[test]
fn one_nanokelvin_is_indistinguishable_from_zero() {
    let cold = table(&config(0.0, 2, 0.3535, 10.0, TIME_SWEEP));
    let warm = table(&config(1.0, 2, 0.3535, 10.0, TIME_SWEEP));
    for (a, b) in cold.rows.iter().zip(&warm.rows) {
        assert!((a.delta_eps_bound - b.delta_eps_bound).abs() <= 1e-3 * a.delta_eps_bound);
    }
}

#[test]
fn frequency_sweeps_improve_with_frequency() {
    let sweep = "axis = \"frequency_hz\"\nfrom = 500.0\nto = 1e4\npoints = 12";
    let seconds = table(&config(0.0, 2, 0.3535, 5.0, &format!("{sweep}\ntime_s = 10.0")));
    assert!(seconds.rows.windows(2).all(|w| w[1].delta_eps_bound < w[0].delta_eps_bound));

    // At fixed ω₁t the squeezing lever R t is constant, so only the density improves.
    let scaled = table(&config(0.0, 2, 0.3535, 5.0, &format!("{sweep}\nomega1_t = 10.0")));
    assert!(scaled.rows.windows(2).all(|w| w[1].sensitivity_density < w[0].sensitivity_density));
    let first = scaled.rows[0].delta_eps_bound;
    assert!(scaled.rows.iter().all(|r| (r.delta_eps_bound - first).abs() <= 1e-3 * first));
}

#[test]
fn mode_pairs_give_distinct_curves() {
    let low = table(&config(0.0, 2, 0.35354, 10.0, TIME_SWEEP));
    let high = table(&config(0.0, 6, 0.61237, 10.0, TIME_SWEEP));
    for (a, b) in low.rows.iter().zip(&high.rows) {
        assert!(b.delta_eps_bound < 0.9 * a.delta_eps_bound);
        assert_ne!(a.regime_flags, b.regime_flags);
    }
}

#[test]
fn every_row_carries_flags() {
    let t = table(&config(150.0, 6, 0.61237, 10.0, "axis = \"temperature_nK\"\nvalues = [0.0, 50.0, 150.0]\nomega1_t = 100.0"));
    assert!(t.rows.iter().all(|r| r.regime_flags.split(';').count() == 4));
    assert!(t.rows[2].regime_flags.contains("chemical=fail"));
}

#[test]
fn phase_axis_reports_quadrature_sensitivity() {
    let t = table(&config(0.0, 2, 0.3535, 3.0, "axis = \"phase_rad\"\nvalues = [0.0, 0.7853981633974483, 1.5707963267948966]\nomega1_t = 100.0"));
    let h: Vec<f64> = t.column(|r| r.h_s);
    assert!((h[0] - 4.0).abs() < 1e-2);
    assert!((h[2] - 4.0 * 6f64.cosh().powi(2)).abs() < 1e-3 * h[2]);
    assert!(h[0] < h[1] && h[1] < h[2]);
}

fn shipped_configs() -> Vec<PathBuf> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "toml") {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn shipped_figure_configs_scan_cleanly() {
    let configs = shipped_configs();
    assert!(configs.len() >= 38, "{}", configs.len());
    for path in configs {
        let text = std::fs::read_to_string(&path).unwrap();
        if text.contains("rate_from_oracle") {
            continue;
        }
        let cfg = RunConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if cfg.sweep.is_none() {
            continue;
        }
        let t = scan(&cfg, &[], None).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(t.flagged_rows(), 0, "{}", path.display());
    }
}
