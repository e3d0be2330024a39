//! Parameter sweeps: Cramér–Rao bounds along one axis, written as CSV.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{resonant_frequency, WaveParams};
use crate::config::{Axis, RunConfig, SweepSpec};
use crate::constants::NANOKELVIN;
use crate::error::{Error, Result};
use crate::metrology::{bulk_qfi, classical_fisher, phonon_distribution, qfi, required_j_max, ChannelFamily};
use crate::model::{thermal_spec, validate_regime, PhysicalParams};
use crate::overlay::OverlayCurve;

/// Environment variable holding the number of sweep workers.
pub const WORKERS_ENV: &str = "PHONON_GW_WORKERS";

/// Largest fraction of flagged rows a sweep may contain.
pub const MAX_FLAGGED_FRACTION: f64 = 0.2;

/// `1/√(M H)`.
pub fn cramer_rao_bound(h_eps: f64, probes: u64) -> Result<f64> {
    if !(h_eps > 0.0) || !h_eps.is_finite() {
        return Err(Error::UndefinedBound(format!("Fisher information {h_eps} is not positive")));
    }
    if probes == 0 {
        return Err(Error::InvalidArgument("number of probes must be at least 1".into()));
    }
    Ok(1.0 / (probes as f64 * h_eps).sqrt())
}

/// `Δε √t`, in Hz^{-1/2}.
pub fn sensitivity_density(delta_eps: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("integration time must be positive, got {t}")));
    }
    Ok(delta_eps * t.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub time_s: f64,
    pub omega1: f64,
    pub temperature_nk: f64,
    pub r: f64,
    pub phase: f64,
    /// Channel squeezing `εRt` at the evaluation strain.
    pub s: f64,
    /// QFI per unit channel squeezing.
    pub h_s: f64,
    pub h_eps: f64,
    pub delta_eps_bound: f64,
    pub sensitivity_density: f64,
    pub cfi: Option<f64>,
    pub bulk_qfi: Option<f64>,
    pub bulk_qfi_max: Option<f64>,
    pub regime_flags: String,
    /// Error that stopped this row, if any.
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn flagged(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub axis: Axis,
    /// `(key, value)` pairs written as `# key = value`.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<SweepRow>,
}

const NUMERIC_COLUMNS: [&str; 14] = [
    "time_s",
    "omega1_rad_per_s",
    "temperature_nK",
    "r",
    "phase_rad",
    "s",
    "h_s",
    "h_eps",
    "delta_eps_bound",
    "sensitivity_density",
    "cfi",
    "bulk_qfi",
    "bulk_qfi_max",
    "flagged",
];

fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "nan".to_string()
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

impl SweepTable {
    pub fn header(&self) -> Vec<&'static str> {
        let mut h = vec![self.axis.column()];
        h.extend(NUMERIC_COLUMNS);
        h.extend(["regime_flags", "failure"]);
        h
    }

    pub fn flagged_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged()).count()
    }

    pub fn column(&self, pick: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(pick).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {}", v.replace('\n', " "));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(self.header()).map_err(io)?;
        for row in &self.rows {
            let record = [
                number(row.axis_value),
                number(row.time_s),
                number(row.omega1),
                number(row.temperature_nk),
                number(row.r),
                number(row.phase),
                number(row.s),
                number(row.h_s),
                number(row.h_eps),
                number(row.delta_eps_bound),
                number(row.sensitivity_density),
                optional(row.cfi),
                optional(row.bulk_qfi),
                optional(row.bulk_qfi_max),
                u8::from(row.flagged()).to_string(),
                row.regime_flags.clone(),
                row.failure.clone().unwrap_or_default(),
            ];
            w.write_record(&record).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

struct Point {
    params: PhysicalParams,
    t: f64,
    r: f64,
    phase: f64,
}

fn locate(cfg: &RunConfig, spec: &SweepSpec, v: f64) -> Result<Point> {
    let mut p = Point { params: cfg.params, t: 0.0, r: cfg.r, phase: cfg.channel.phase };
    match spec.axis {
        Axis::Omega1T => p.t = v / p.params.omega1(),
        Axis::TimeS => p.t = v,
        Axis::Omega1RadPerS => p.params = p.params.with_fundamental(v)?,
        Axis::FrequencyHz => p.params = p.params.with_fundamental(2.0 * std::f64::consts::PI * v)?,
        Axis::TemperatureNk => p.params = p.params.with_temperature(v * NANOKELVIN)?,
        Axis::SqueezingR => {
            if !(v >= 0.0) {
                return Err(Error::InvalidArgument(format!("seed squeezing must be non-negative, got {v}")));
            }
            p.r = v;
        }
        Axis::PhaseRad => p.phase = v,
    }
    if let Some(fixed) = spec.fixed_time {
        p.t = fixed.seconds(&p.params);
    }
    if !(p.t > 0.0) {
        return Err(Error::InvalidArgument(format!("integration time must be positive, got {}", p.t)));
    }
    Ok(p)
}

fn evaluate(cfg: &RunConfig, spec: &SweepSpec, p: &Point, row: &mut SweepRow) -> Result<()> {
    let thermal = thermal_spec(&p.params, cfg.modes)?;
    let rate = cfg.channel.rate.rate(&p.params);
    let lever = rate * p.t;
    row.s = cfg.strain * lever;
    let family = ChannelFamily::new(&thermal, p.r, cfg.theta, p.phase, cfg.channel.form);
    let h_s = qfi(&family, row.s, &cfg.metrology.policy)?.h;
    row.h_s = h_s;
    row.h_eps = h_s * lever * lever;
    row.delta_eps_bound = cramer_rao_bound(row.h_eps, spec.probes)?;
    row.sensitivity_density = sensitivity_density(row.delta_eps_bound, p.t)?;
    if spec.bulk {
        let omega = resonant_frequency(&p.params, cfg.modes);
        let wave = WaveParams::with_cap(cfg.strain, omega, p.t, cfg.strain_cap)?;
        let b = bulk_qfi(&p.params, &wave, p.t, cfg.metrology.bulk_wavenumber)?;
        row.bulk_qfi = Some(b.h);
        row.bulk_qfi_max = Some(b.h_max);
    }
    if spec.cfi {
        let u = p.r + row.s;
        let variant = cfg.metrology.cfi_variant;
        let j_max = match cfg.metrology.j_max {
            Some(j) => j,
            None => required_j_max(u, &thermal, variant)?,
        };
        let dist = phonon_distribution(u, &thermal, j_max, variant)?;
        row.cfi = Some(classical_fisher(&dist, lever).fisher);
    }
    Ok(())
}

fn sweep_point(cfg: &RunConfig, spec: &SweepSpec, v: f64) -> SweepRow {
    let mut row = SweepRow {
        axis_value: v,
        time_s: f64::NAN,
        omega1: f64::NAN,
        temperature_nk: f64::NAN,
        r: f64::NAN,
        phase: f64::NAN,
        s: f64::NAN,
        h_s: f64::NAN,
        h_eps: f64::NAN,
        delta_eps_bound: f64::NAN,
        sensitivity_density: f64::NAN,
        cfi: None,
        bulk_qfi: None,
        bulk_qfi_max: None,
        regime_flags: String::new(),
        failure: None,
    };
    let point = match locate(cfg, spec, v) {
        Ok(p) => p,
        Err(e) => {
            row.failure = Some(e.to_string());
            return row;
        }
    };
    row.time_s = point.t;
    row.omega1 = point.params.omega1();
    row.temperature_nk = point.params.temperature / NANOKELVIN;
    row.r = point.r;
    row.phase = point.phase;
    row.regime_flags = validate_regime(&point.params, cfg.modes, point.t).flags();
    if let Err(e) = evaluate(cfg, spec, &point, &mut row) {
        row.failure = Some(e.to_string());
    }
    row
}

/// Worker count from [`WORKERS_ENV`]; `None` leaves rayon's default.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn metadata(cfg: &RunConfig, spec: &SweepSpec, overlays: &[OverlayCurve]) -> Vec<(String, String)> {
    let mut m: Vec<(String, String)> = vec![
        ("tool".into(), format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))),
        ("table_format".into(), "1".into()),
        ("config_sha256".into(), cfg.hash.clone()),
        ("axis".into(), spec.axis.column().into()),
        ("modes".into(), format!("{},{}", cfg.modes.n, cfg.modes.m)),
        ("probes".into(), spec.probes.to_string()),
        ("strain".into(), number(cfg.strain)),
        ("seed_theta_rad".into(), number(cfg.theta)),
        ("channel_rate".into(), format!("{:?}", cfg.channel.rate)),
        ("channel_phase_rad".into(), number(cfg.channel.phase)),
        ("channel_form".into(), format!("{:?}", cfg.channel.form)),
        ("channel_provenance".into(), cfg.channel.provenance.clone()),
        ("qfi_rel_tol".into(), number(cfg.metrology.policy.rel_tol)),
    ];
    if let Some(fixed) = spec.fixed_time {
        m.push(("fixed_time".into(), fixed.label()));
    }
    if spec.bulk {
        m.push(("bulk_wavenumber".into(), format!("{:?}", cfg.metrology.bulk_wavenumber)));
    }
    if spec.cfi {
        m.push(("cfi_variant".into(), cfg.metrology.cfi_variant.label().into()));
    }
    for curve in overlays {
        m.push(("overlay".into(), format!("{} ({} points)", curve.label, curve.points.len())));
        for (f, h) in &curve.points {
            m.push(("overlay_point".into(), format!("{},{},{}", curve.label, number(*f), number(*h))));
        }
    }
    m
}

/// Evaluates every grid point of the configured sweep.
///
/// Rows come back in grid order whatever the worker count. A point that
/// fails is kept as a flagged row; more than [`MAX_FLAGGED_FRACTION`] of
/// them fails the run.
pub fn scan(cfg: &RunConfig, overlays: &[OverlayCurve], workers: Option<usize>) -> Result<SweepTable> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
    let run = || spec.grid.par_iter().map(|&v| sweep_point(cfg, spec, v)).collect::<Vec<_>>();
    let rows = match workers {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(run),
    };
    let table = SweepTable { axis: spec.axis, metadata: metadata(cfg, spec, overlays), rows };
    let flagged = table.flagged_rows();
    if flagged as f64 > MAX_FLAGGED_FRACTION * table.rows.len() as f64 {
        let first = table.rows.iter().find_map(|r| r.failure.clone()).unwrap_or_default();
        return Err(Error::NumericFailure(format!(
            "{flagged} of {} sweep points failed, first: {first}",
            table.rows.len()
        )));
    }
    Ok(table)
}
