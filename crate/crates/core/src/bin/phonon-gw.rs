use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use phonon_gw::channel::{channel_symplectic, resonant_frequency, WaveParams};
use phonon_gw::config::{FixedTime, RunConfig};
use phonon_gw::gaussian::{apply_symplectic, purity, symplectic_eigenvalues};
use phonon_gw::metrology::{
    bulk_crossover_time, bulk_qfi, classical_fisher, phonon_distribution, qfi, required_j_max, ChannelFamily,
};
use phonon_gw::model::{initial_state, mode_frequency, thermal_spec, validate_regime, Grade};
use phonon_gw::oracle::{calibration_times, extract_rate, period_samples, simulate_with_samples};
use phonon_gw::overlay::overlay_ingest;
use phonon_gw::sweep::{cramer_rao_bound, scan, sensitivity_density, workers_from_env};
use phonon_gw::{Error, Result};

/// Phonon two-mode squeezing in a box-trapped condensate as a strain probe.
#[derive(Parser)]
#[command(name = "phonon-gw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Args)]
struct Time {
    /// Interrogation time in units of 1/ω₁.
    #[arg(long, conflicts_with = "time_s", default_value_t = 100.0)]
    omega1_t: f64,
    /// Interrogation time in seconds.
    #[arg(long)]
    time_s: Option<f64>,
}

impl Time {
    fn fixed(&self) -> FixedTime {
        match self.time_s {
            Some(t) => FixedTime::Seconds(t),
            None => FixedTime::Omega1T(self.omega1_t),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Initial covariance matrix and its diagnostics.
    State(Common),
    /// Channel symplectic matrix and the evolved state.
    Channel {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: Time,
        /// Strain; defaults to `wave.strain`.
        #[arg(long)]
        strain: Option<f64>,
    },
    /// Quantum Fisher information and the Cramér–Rao bound.
    Qfi {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: Time,
        #[arg(long, default_value_t = 1)]
        probes: u64,
    },
    /// Classical Fisher information of phonon counting.
    Cfi {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: Time,
    },
    /// Bulk phase information for comparison.
    Bulk {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: Time,
    },
    /// Run the configured sweep and write the table.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Output CSV; overrides `sweep.output`. `-` writes to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Detector curve CSV to attach, repeatable.
        #[arg(long)]
        overlay: Vec<PathBuf>,
    },
    /// Calibrate the channel rate against the moving-boundary simulation.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Time series CSV of the reference run.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Strain of the reference run.
        #[arg(long, default_value_t = 1e-4)]
        strain: f64,
        /// Length of the reference run in units of 1/ω₁.
        #[arg(long, default_value_t = 200.0)]
        omega1_t: f64,
    },
    /// Grade the regime approximations; exits 4 on a failed check.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: Time,
    },
}

fn print_matrix(name: &str, m: &DMatrix<f64>) {
    println!("{name} =");
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>24.16e}")).collect();
        println!("  {}", cells.join(" "));
    }
}

fn state(cfg: &RunConfig) -> Result<()> {
    let p = &cfg.params;
    println!("omega1_rad_per_s = {:.16e}", p.omega1());
    println!("trap_length_m = {:.16e}", p.trap_length);
    let thermal = thermal_spec(p, cfg.modes)?;
    for (k, t) in [(cfg.modes.n, &thermal.n), (cfg.modes.m, &thermal.m)] {
        println!(
            "mode {k}: omega = {:.6e} rad/s, beta = {:.6e}, x = {:.6e}, nu = {:.16e}",
            mode_frequency(p, k),
            t.beta,
            t.x,
            t.nu
        );
    }
    println!("quantum_regime = {:?}", thermal.regime);
    let sigma = initial_state(p, cfg.modes, cfg.r, cfg.theta)?;
    print_matrix("sigma0", sigma.matrix());
    let nus = symplectic_eigenvalues(&sigma)?;
    println!("symplectic_eigenvalues = {nus:?}");
    println!("purity = {:.16e}", purity(&sigma)?);
    Ok(())
}

fn channel(cfg: &RunConfig, time: &Time, strain: Option<f64>) -> Result<()> {
    let p = &cfg.params;
    let t = time.fixed().seconds(p);
    let strain = strain.unwrap_or(cfg.strain);
    let wave = WaveParams::with_cap(strain, resonant_frequency(p, cfg.modes), t, cfg.strain_cap)?;
    let model = cfg.channel.model(p)?;
    let s = channel_symplectic(&wave, &model)?;
    println!("time_s = {t:.16e}");
    println!("squeezing = {:.16e}", strain * model.rate_per_strain * t);
    println!("provenance = {}", model.provenance);
    print_matrix("S", s.matrix());
    let sigma = apply_symplectic(&s, &initial_state(p, cfg.modes, cfg.r, cfg.theta)?)?;
    print_matrix("sigma", sigma.matrix());
    Ok(())
}

fn fisher_setup(cfg: &RunConfig, time: &Time) -> Result<(f64, f64, f64)> {
    let t = time.fixed().seconds(&cfg.params);
    let lever = cfg.channel.rate.rate(&cfg.params) * t;
    Ok((t, lever, cfg.strain * lever))
}

fn qfi_command(cfg: &RunConfig, time: &Time, probes: u64) -> Result<()> {
    let (t, lever, s) = fisher_setup(cfg, time)?;
    let thermal = thermal_spec(&cfg.params, cfg.modes)?;
    let family = ChannelFamily::new(&thermal, cfg.r, cfg.theta, cfg.channel.phase, cfg.channel.form);
    let res = qfi(&family, s, &cfg.metrology.policy)?;
    let h_eps = res.h * lever * lever;
    let bound = cramer_rao_bound(h_eps, probes)?;
    println!("time_s = {t:.16e}");
    println!("h_s = {:.16e}", res.h);
    println!("h_eps = {h_eps:.16e}");
    println!("ladder = {:?}", res.ladder);
    println!("ladder_spread = {:.3e}", res.spread);
    println!("delta_eps_bound = {bound:.16e}");
    println!("sensitivity_density = {:.16e}", sensitivity_density(bound, t)?);
    Ok(())
}

fn cfi_command(cfg: &RunConfig, time: &Time) -> Result<()> {
    if cfg.channel.phase != 0.0 || cfg.theta != 0.0 {
        return Err(Error::Config("counting statistics need channel.phase_rad = 0 and seed.theta_rad = 0".into()));
    }
    let (t, lever, s) = fisher_setup(cfg, time)?;
    let thermal = thermal_spec(&cfg.params, cfg.modes)?;
    let variant = cfg.metrology.cfi_variant;
    let u = cfg.r + s;
    let j_max = match cfg.metrology.j_max {
        Some(j) => j,
        None => required_j_max(u, &thermal, variant)?,
    };
    let cfi = classical_fisher(&phonon_distribution(u, &thermal, j_max, variant)?, lever);
    let family = ChannelFamily::new(&thermal, cfg.r, 0.0, 0.0, cfg.channel.form);
    let h_eps = qfi(&family, s, &cfg.metrology.policy)?.h * lever * lever;
    println!("time_s = {t:.16e}");
    println!("variant = {}", variant.label());
    println!("j_max = {j_max}");
    println!("tail_mass = {:.3e}", cfi.tail_mass);
    println!("cfi = {:.16e}", cfi.fisher);
    println!("h_eps = {h_eps:.16e}");
    println!("cfi_over_qfi = {:.6}", cfi.fisher / h_eps);
    Ok(())
}

fn bulk_command(cfg: &RunConfig, time: &Time) -> Result<()> {
    let p = &cfg.params;
    let (t, lever, s) = fisher_setup(cfg, time)?;
    let wave = WaveParams::with_cap(cfg.strain, resonant_frequency(p, cfg.modes), t, cfg.strain_cap)?;
    let b = bulk_qfi(p, &wave, t, cfg.metrology.bulk_wavenumber)?;
    let bound = cramer_rao_bound(b.h_max, 1)?;
    println!("time_s = {t:.16e}");
    println!("wavenumber = {:?}", cfg.metrology.bulk_wavenumber);
    println!("bulk_qfi = {:.16e}", b.h);
    println!("bulk_qfi_max = {:.16e}", b.h_max);
    println!("bulk_delta_eps_bound = {bound:.16e}");
    println!("bulk_sensitivity_density = {:.16e}", sensitivity_density(bound, t)?);
    let thermal = thermal_spec(p, cfg.modes)?;
    let family = ChannelFamily::new(&thermal, cfg.r, cfg.theta, cfg.channel.phase, cfg.channel.form);
    let h_s = qfi(&family, s, &cfg.metrology.policy)?.h;
    println!("phonon_h_eps = {:.16e}", h_s * lever * lever);
    let cross = bulk_crossover_time(b.h_max, h_s, cfg.channel.rate.rate(p));
    println!("crossover_time_s = {cross:.16e}");
    Ok(())
}

fn scan_command(cfg: &RunConfig, output: Option<PathBuf>, overlay_paths: Vec<PathBuf>) -> Result<()> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
    let mut paths: Vec<PathBuf> = spec.overlay.iter().map(PathBuf::from).collect();
    paths.extend(overlay_paths);
    let mut curves = Vec::new();
    for path in &paths {
        let ingest = overlay_ingest(path)?;
        for w in &ingest.warnings {
            eprintln!("warning: {w}");
        }
        curves.push(ingest.curve);
    }
    let table = scan(cfg, &curves, workers_from_env()?)?;
    for row in table.rows.iter().filter(|r| r.flagged()) {
        eprintln!("warning: point {} flagged: {}", row.axis_value, row.failure.as_deref().unwrap_or(""));
    }
    let csv = table.to_csv()?;
    match output.or_else(|| spec.output.as_ref().map(PathBuf::from)) {
        Some(path) if path != Path::new("-") => {
            std::fs::write(&path, csv)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        _ => print!("{csv}"),
    }
    Ok(())
}

fn oracle_command(cfg: &RunConfig, output: Option<PathBuf>, strain: f64, omega1_t: f64) -> Result<()> {
    let p = &cfg.params;
    let cal = &cfg.calibration;
    let fit = extract_rate(p, cfg.modes, &cal.strains, &calibration_times(p, cal.samples), &cal.oracle, cfg.channel.phase)?;
    println!("[channel]");
    println!("rate_per_strain_over_omega1 = {:.16e}", fit.rate_over_omega1);
    println!("phase_rad = {:.16e}", cfg.channel.phase);
    println!("provenance = \"{}\"", fit.model.provenance.replace('"', "'"));
    println!("# rate_per_strain_hz = {:.16e}", fit.rate);
    println!("# fit_residual = {:.3e}, phase_drift = {:.3e}", fit.residual, fit.phase_drift);

    let duration = omega1_t / p.omega1();
    let wave = WaveParams::new(strain, resonant_frequency(p, cfg.modes), duration)?;
    let run = simulate_with_samples(p, cfg.modes, &wave, &cal.oracle, &period_samples(p, duration))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["t", "abs_beta_nm", "arg_beta_nm", "identity_residual"]).map_err(io)?;
    for s in &run.series {
        w.write_record([
            format!("{:.16e}", s.t),
            format!("{:.16e}", s.abs_beta_nm),
            format!("{:.16e}", s.arg_beta_nm),
            format!("{:.16e}", s.identity_residual),
        ])
        .map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    match output {
        Some(path) => {
            std::fs::write(&path, body)?;
            eprintln!("wrote {} samples to {}", run.series.len(), path.display());
        }
        None => print!("{}", String::from_utf8_lossy(&body)),
    }
    Ok(())
}

fn validate_command(cfg: &RunConfig, time: &Time) -> Result<()> {
    let t = time.fixed().seconds(&cfg.params);
    let report = validate_regime(&cfg.params, cfg.modes, t);
    for c in &report.checks {
        println!("{:<10} ratio = {:.3e}  {}", c.name, c.ratio, c.grade);
    }
    let thermal = thermal_spec(&cfg.params, cfg.modes)?;
    println!("quantum_regime = {:?}", thermal.regime);
    if report.worst() == Grade::Fail {
        return Err(Error::RegimeViolation(report.flags()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let load = |c: &Common| RunConfig::load(&c.config);
    match cli.command {
        Command::State(c) => state(&load(&c)?),
        Command::Channel { common, time, strain } => channel(&load(&common)?, &time, strain),
        Command::Qfi { common, time, probes } => qfi_command(&load(&common)?, &time, probes),
        Command::Cfi { common, time } => cfi_command(&load(&common)?, &time),
        Command::Bulk { common, time } => bulk_command(&load(&common)?, &time),
        Command::Scan { common, output, overlay } => scan_command(&load(&common)?, output, overlay),
        Command::Oracle { common, output, strain, omega1_t } => oracle_command(&load(&common)?, output, strain, omega1_t),
        Command::Validate { common, time } => validate_command(&load(&common)?, &time),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
