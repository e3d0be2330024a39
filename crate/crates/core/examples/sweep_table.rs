//! A time sweep driven by an inline configuration, written as CSV.

use phonon_gw::config::RunConfig;
use phonon_gw::sweep::scan;

const CONFIG: &str = r#"
[trap]
length_um = 1.0
sound_speed_mm_per_s = 10.0
chemical_potential_nK = 100.0
temperature_nK = 1.0

[modes]
n = 1
m = 2

[seed]
r = 10.0

[channel]
rate_per_strain_over_omega1 = 0.35354150700730885
provenance = "mode-oracle fit, modes (1, 2)"

[sweep]
axis = "omega1_t"
from = 100.0
to = 1000.0
points = 5
probes = 100
"#;

fn main() -> phonon_gw::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let table = scan(&cfg, &[], None)?;
    for row in &table.rows {
        println!(
            "ω₁t = {:>7.1}: H_ε = {:.4e}, Δε ≥ {:.4e}, Δε√t = {:.4e} Hz^-1/2 [{}]",
            row.axis_value, row.h_eps, row.delta_eps_bound, row.sensitivity_density, row.regime_flags
        );
    }
    print!("{}", table.to_csv()?);
    Ok(())
}
