//! Scenario resolution and execution.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rydberg_core::correlation::{correlation_scan, log_grid};
use rydberg_core::expansion::{gamma_constant, i4_averaged, i4_montecarlo, McOptions};
use rydberg_core::oracle::{expansion_residual, propagate, OracleOptions};
use rydberg_core::saturation::{p0_truncated, SaturationModel};
use rydberg_core::{Angular, Error, Geometry, InteractionKernel, PulseSpec, Shape};
use serde_json::{json, Value};

use crate::config::{Config, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GammaTable,
    Pexc,
    Correlation,
    Saturation,
    DensitySweep,
    Oracle,
    McValidate,
}

pub const COMMANDS: &[(&str, Command)] = &[
    ("gamma-table", Command::GammaTable),
    ("pexc", Command::Pexc),
    ("correlation", Command::Correlation),
    ("saturation", Command::Saturation),
    ("density-sweep", Command::DensitySweep),
    ("oracle", Command::Oracle),
    ("mc-validate", Command::McValidate),
];

impl Command {
    pub fn name(self) -> &'static str {
        COMMANDS.iter().find(|(_, c)| *c == self).expect("listed").0
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        COMMANDS
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, c)| *c)
            .ok_or_else(|| {
                let names: Vec<&str> = COMMANDS.iter().map(|(n, _)| *n).collect();
                format!("unknown command `{s}`; expected one of {}", names.join(", "))
            })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn core_to_config(e: Error) -> ConfigError {
    match e {
        Error::InvalidParameter { name, reason } => ConfigError::field(name, reason),
        other => ConfigError {
            origin: None,
            field: None,
            message: other.to_string(),
        },
    }
}

pub fn build_pulse(cfg: &Config) -> Result<PulseSpec, ConfigError> {
    let shape: Shape = cfg.value("pulse.shape")?;
    let duration: Option<f64> = cfg.get("pulse.duration")?;
    let bandwidth: Option<f64> = cfg.get("pulse.bandwidth")?;
    let mut p = match (duration, bandwidth) {
        (Some(_), Some(_)) => {
            return Err(cfg.invalid(
                "pulse.bandwidth",
                "set either pulse.duration or pulse.bandwidth, not both",
            ))
        }
        (Some(t), None) => PulseSpec::new(shape, cfg.positive("pulse.duration", t)?),
        (None, Some(b)) => {
            let b = cfg.positive("pulse.bandwidth", b)?;
            PulseSpec::duration_from_bandwidth(shape, b, 0.0).map_err(core_to_config)?
        }
        (None, None) => {
            return Err(ConfigError::field(
                "pulse.duration",
                "required (or give pulse.bandwidth)",
            ))
        }
    };
    let tau0: Option<f64> = cfg.get("pulse.tau0")?;
    let tau_end: Option<f64> = cfg.get("pulse.tau_end")?;
    if tau0.is_some() || tau_end.is_some() {
        p = p.with_window(tau0.unwrap_or(p.tau0), tau_end.unwrap_or(p.tau_end));
    }
    p = match cfg.get::<f64>("pulse.detuning_hz")? {
        Some(hz) => p.with_detuning_hz(cfg.finite("pulse.detuning_hz", hz)?),
        None => p.with_detuning(cfg.value("pulse.detuning")?),
    };
    let chirp: f64 = cfg.value("pulse.chirp")?;
    p = match cfg.get::<f64>("pulse.chirped_bandwidth")? {
        Some(b) => {
            if chirp != 0.0 {
                return Err(cfg.invalid(
                    "pulse.chirp",
                    "conflicts with pulse.chirped_bandwidth; set only one",
                ));
            }
            let sign: f64 = cfg.value("pulse.chirp_sign")?;
            p.chirped_to_bandwidth(cfg.positive("pulse.chirped_bandwidth", b)?, sign)
                .map_err(core_to_config)?
        }
        None => p.with_chirp(chirp),
    };
    p.validate().map_err(core_to_config)?;
    Ok(p)
}

pub fn build_kernel(cfg: &Config) -> Result<InteractionKernel, ConfigError> {
    let s: u32 = cfg.value("kernel.s")?;
    let c: f64 = cfg.require("kernel.c_au", "for interacting scenarios")?;
    let angular: Angular = cfg.value("kernel.angular")?;
    if s != 3 && s != 6 {
        return Err(cfg.invalid("kernel.s", format!("only 3 and 6 are supported, got {s}")));
    }
    InteractionKernel::new(s, cfg.finite("kernel.c_au", c)?, angular).map_err(core_to_config)
}

fn density(cfg: &Config) -> Result<f64, ConfigError> {
    let rho: f64 = cfg.require("rho", "(atom density in cm^-3)")?;
    cfg.positive("rho", rho)
}

fn count(cfg: &Config, key: &str, min: usize) -> Result<usize, ConfigError> {
    let n: usize = cfg.value(key)?;
    if n < min {
        return Err(cfg.invalid(key, format!("must be at least {min}")));
    }
    Ok(n)
}

fn resonant(cfg: &Config, p: &PulseSpec) -> Result<(), ConfigError> {
    if !p.is_real() {
        return Err(cfg.invalid(
            "pulse.detuning",
            "the saturation model needs a resonant, unchirped pulse",
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Variant {
    pub bandwidth: f64,
    pub pulse: PulseSpec,
}

#[derive(Debug, Clone)]
pub enum Scenario {
    GammaTable,
    Pexc {
        pulse: PulseSpec,
        kernel: InteractionKernel,
        rho: f64,
        i_max: f64,
        points: usize,
    },
    Correlation {
        kernel: InteractionKernel,
        variants: Vec<Variant>,
        r_grid: Vec<f64>,
    },
    Saturation {
        pulse: PulseSpec,
        kernel: InteractionKernel,
        rho: f64,
    },
    DensitySweep {
        pulse: PulseSpec,
        kernel: InteractionKernel,
        rho: f64,
        points: usize,
    },
    Oracle {
        pulse: PulseSpec,
        couplings: Vec<Vec<f64>>,
        omega: f64,
        points: usize,
        residual: bool,
        max_atoms: usize,
    },
    McValidate {
        pulse: PulseSpec,
        kernel: InteractionKernel,
        rho: f64,
        samples: usize,
        atoms: usize,
        geometry: Geometry,
        seed: u64,
    },
}

fn variants(cfg: &Config, base: &PulseSpec) -> Result<Vec<Variant>, ConfigError> {
    let bandwidths = cfg.list("correlation.bandwidths")?;
    let detunings = cfg.list("correlation.detunings_hz")?;
    let signs = cfg.list("correlation.chirp_signs")?;
    let bw = |p: &PulseSpec| p.bandwidth().unwrap_or(f64::NAN);
    match (bandwidths, detunings) {
        (Some(_), Some(_)) => Err(cfg.invalid(
            "correlation.detunings_hz",
            "set either correlation.bandwidths or correlation.detunings_hz",
        )),
        (Some(b), None) => {
            let signs = signs.unwrap_or_else(|| vec![1.0; b.len()]);
            if signs.len() != b.len() {
                return Err(cfg.invalid(
                    "correlation.chirp_signs",
                    format!("has {} entries for {} bandwidths", signs.len(), b.len()),
                ));
            }
            b.iter()
                .zip(&signs)
                .map(|(&g, &s)| {
                    let g = cfg.positive("correlation.bandwidths", g)?;
                    let pulse = base.chirped_to_bandwidth(g, s).map_err(core_to_config)?;
                    Ok(Variant { bandwidth: g, pulse })
                })
                .collect()
        }
        (None, Some(d)) => {
            if signs.is_some() {
                return Err(cfg.invalid(
                    "correlation.chirp_signs",
                    "only applies with correlation.bandwidths",
                ));
            }
            d.iter()
                .map(|&hz| {
                    let pulse = base.with_detuning_hz(cfg.finite("correlation.detunings_hz", hz)?);
                    Ok(Variant {
                        bandwidth: bw(&pulse),
                        pulse,
                    })
                })
                .collect()
        }
        (None, None) => Ok(vec![Variant {
            bandwidth: bw(base),
            pulse: *base,
        }]),
    }
}

fn oracle_couplings(cfg: &Config) -> Result<Vec<Vec<f64>>, ConfigError> {
    let n = count(cfg, "oracle.atoms", 1)?;
    let max: usize = cfg.value("oracle.max_atoms")?;
    if n > max {
        return Err(cfg.invalid("oracle.atoms", format!("{n} atoms exceed oracle.max_atoms = {max}")));
    }
    let mode: String = cfg.value("oracle.couplings")?;
    let mut k = vec![vec![0.0; n]; n];
    match mode.as_str() {
        "uniform" => {
            let v: f64 = cfg.value("oracle.k")?;
            let v = cfg.finite("oracle.k", v)?;
            for (i, row) in k.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    if i != j {
                        *x = v;
                    }
                }
            }
        }
        "random" => {
            let lo = cfg.positive("oracle.k_min", cfg.value("oracle.k_min")?)?;
            let hi = cfg.positive("oracle.k_max", cfg.value("oracle.k_max")?)?;
            if hi < lo {
                return Err(cfg.invalid("oracle.k_max", "must be at least oracle.k_min"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.value("seed")?);
            for i in 0..n {
                for j in i + 1..n {
                    let v = if hi == lo {
                        lo
                    } else {
                        (lo.ln() + (hi.ln() - lo.ln()) * rng.gen::<f64>()).exp()
                    };
                    k[i][j] = v;
                    k[j][i] = v;
                }
            }
        }
        other => {
            return Err(cfg.invalid(
                "oracle.couplings",
                format!("expected uniform or random, got `{other}`"),
            ))
        }
    }
    Ok(k)
}

/// Builds a runnable scenario; performs no numerical work beyond pulse
/// setup.
pub fn resolve(cfg: &Config, command: Command) -> Result<Scenario, ConfigError> {
    cfg.value::<u64>("seed")?;
    cfg.value::<usize>("workers")?;
    Ok(match command {
        Command::GammaTable => Scenario::GammaTable,
        Command::Pexc => {
            let pulse = build_pulse(cfg)?;
            resonant(cfg, &pulse)?;
            let i_max: f64 = cfg.value("sweep.i_max")?;
            Scenario::Pexc {
                pulse,
                kernel: build_kernel(cfg)?,
                rho: density(cfg)?,
                i_max: cfg.positive("sweep.i_max", i_max)?,
                points: count(cfg, "sweep.i_points", 2)?,
            }
        }
        Command::Saturation => {
            let pulse = build_pulse(cfg)?;
            resonant(cfg, &pulse)?;
            Scenario::Saturation {
                pulse,
                kernel: build_kernel(cfg)?,
                rho: density(cfg)?,
            }
        }
        Command::DensitySweep => {
            let pulse = build_pulse(cfg)?;
            resonant(cfg, &pulse)?;
            Scenario::DensitySweep {
                pulse,
                kernel: build_kernel(cfg)?,
                rho: density(cfg)?,
                points: count(cfg, "sweep.rho_points", 2)?,
            }
        }
        Command::Correlation => {
            let base = build_pulse(cfg)?;
            let lo = cfg.positive("sweep.r_min_um", cfg.value("sweep.r_min_um")?)?;
            let hi = cfg.positive("sweep.r_max_um", cfg.value("sweep.r_max_um")?)?;
            if hi <= lo {
                return Err(cfg.invalid("sweep.r_max_um", "must exceed sweep.r_min_um"));
            }
            Scenario::Correlation {
                kernel: build_kernel(cfg)?,
                variants: variants(cfg, &base)?,
                r_grid: log_grid(lo, hi, count(cfg, "sweep.r_points", 2)?),
            }
        }
        Command::Oracle => {
            let omega: f64 = cfg.value("oracle.omega")?;
            Scenario::Oracle {
                pulse: build_pulse(cfg)?,
                couplings: oracle_couplings(cfg)?,
                omega: cfg.finite("oracle.omega", omega)?,
                points: count(cfg, "oracle.points", 1)?,
                residual: cfg.value("oracle.residual")?,
                max_atoms: cfg.value("oracle.max_atoms")?,
            }
        }
        Command::McValidate => Scenario::McValidate {
            pulse: build_pulse(cfg)?,
            kernel: build_kernel(cfg)?,
            rho: density(cfg)?,
            samples: count(cfg, "mc.samples", 2)?,
            atoms: count(cfg, "mc.atoms", 1)?,
            geometry: cfg.value("mc.geometry")?,
            seed: cfg.value("seed")?,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.11e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Tabular result plus scalar summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub summary: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    fn new(command: Command, columns: &[&str]) -> Self {
        Self {
            command,
            summary: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn note(&mut self, key: impl Into<String>, v: Cell) {
        self.summary.push((key.into(), v));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Num(v) => *v,
                    Cell::Int(v) => *v as f64,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).and_then(|(_, v)| match v {
            Cell::Num(x) => Some(*x),
            Cell::Int(x) => Some(*x as f64),
            Cell::Text(_) => None,
        })
    }

    pub fn to_csv(&self, cfg: &Config) -> String {
        let mut out = format!("# rydberg {}\n# command = {}\n", crate::VERSION, self.command);
        for line in cfg.resolved_lines() {
            out.push_str("# config ");
            out.push_str(&line);
            out.push('\n');
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# result {k} = {}\n", v.csv()));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, cfg: &Config) -> String {
        let summary: serde_json::Map<String, Value> =
            self.summary.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({
            "tool": "rydberg",
            "version": crate::VERSION,
            "command": self.command.name(),
            "config": cfg.to_json(),
            "summary": Value::Object(summary),
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}

fn gamma_table() -> Result<Report, Error> {
    let mut r = Report::new(
        Command::GammaTable,
        &["shape", "C3_isotropic", "C3_aligned_dipole", "C6"],
    );
    let kernels = [
        InteractionKernel::dipole(1.0, Angular::Isotropic),
        InteractionKernel::dipole(1.0, Angular::AlignedDipole),
        InteractionKernel::van_der_waals(1.0),
    ];
    for pulse in [PulseSpec::square(1e-8), PulseSpec::gaussian(1e-8)] {
        let mut row = vec![Cell::Text(pulse.shape.name().to_string())];
        for k in &kernels {
            row.push(Cell::Num(gamma_constant(&pulse, k)?));
        }
        r.rows.push(row);
    }
    Ok(r)
}

fn saturation_notes(r: &mut Report, m: &SaturationModel) {
    r.note("gamma", Cell::Num(m.gamma));
    r.note("N_d", Cell::Num(m.n_d));
    r.note("P0", Cell::Num(m.p0));
    r.note("I0_over_Isat", Cell::Num(m.i0_over_isat));
}

pub fn run(s: &Scenario) -> Result<Report, Error> {
    match s {
        Scenario::GammaTable => gamma_table(),
        Scenario::Pexc {
            pulse,
            kernel,
            rho,
            i_max,
            points,
        } => {
            let gamma = gamma_constant(pulse, kernel)?;
            let m = SaturationModel::new(gamma, *rho, kernel, pulse.duration)?;
            let mut r = Report::new(
                Command::Pexc,
                &["I_over_Isat", "P", "P_noninteracting", "P_series"],
            );
            r.note("duration_s", Cell::Num(pulse.duration));
            saturation_notes(&mut r, &m);
            for i in 0..*points {
                let x = i_max * i as f64 / (*points - 1) as f64;
                let series = PI * PI / 4.0 * x - PI.powi(4) / 48.0 * m.n_d * x * x;
                r.rows.push(vec![
                    Cell::Num(x),
                    Cell::Num(m.probability(x)?),
                    Cell::Num((0.5 * PI * x.sqrt()).sin().powi(2)),
                    Cell::Num(series),
                ]);
            }
            Ok(r)
        }
        Scenario::Saturation { pulse, kernel, rho } => {
            let gamma = gamma_constant(pulse, kernel)?;
            let m = SaturationModel::new(gamma, *rho, kernel, pulse.duration)?;
            let mut r = Report::new(
                Command::Saturation,
                &["gamma", "N_d", "P0", "P0_truncated", "I0_over_Isat", "duration_s", "rho"],
            );
            r.rows.push(vec![
                Cell::Num(gamma),
                Cell::Num(m.n_d),
                Cell::Num(m.p0),
                Cell::Num(p0_truncated(gamma, *rho, kernel, pulse.duration)?),
                Cell::Num(m.i0_over_isat),
                Cell::Num(pulse.duration),
                Cell::Num(*rho),
            ]);
            Ok(r)
        }
        Scenario::DensitySweep {
            pulse,
            kernel,
            rho,
            points,
        } => {
            let gamma = gamma_constant(pulse, kernel)?;
            let grid: Vec<f64> = (0..*points)
                .map(|i| rho * i as f64 / (*points - 1) as f64)
                .collect();
            let c = rydberg_core::saturation::density_sweep(gamma, kernel, pulse.duration, &grid)?;
            let mut r = Report::new(Command::DensitySweep, &["rho", "P0"]);
            r.note("gamma", Cell::Num(gamma));
            r.note("duration_s", Cell::Num(pulse.duration));
            for (x, p) in c.rho.iter().zip(&c.p0) {
                r.rows.push(vec![Cell::Num(*x), Cell::Num(*p)]);
            }
            Ok(r)
        }
        Scenario::Correlation {
            kernel,
            variants,
            r_grid,
        } => {
            let curves: Vec<Result<_, Error>> = variants
                .par_iter()
                .map(|v| {
                    let c = correlation_scan(&v.pulse, kernel, r_grid, v.pulse.tau_end)?;
                    let peak = c.refined_max(v.pulse.tau_end)?;
                    Ok((c, peak))
                })
                .collect();
            let mut r = Report::new(
                Command::Correlation,
                &["variant", "bandwidth_hz", "detuning_hz", "chirp", "R_um", "k", "P"],
            );
            for (i, (v, res)) in variants.iter().zip(curves).enumerate() {
                let (c, (r_peak, p_peak)) = res?;
                let hz = v.pulse.detuning / (2.0 * PI * v.pulse.duration);
                r.note(format!("variant{i}.duration_s"), Cell::Num(v.pulse.duration));
                r.note(format!("variant{i}.max_P"), Cell::Num(p_peak));
                r.note(format!("variant{i}.max_R_um"), Cell::Num(r_peak));
                for j in 0..c.r_um.len() {
                    r.rows.push(vec![
                        Cell::Int(i as u64),
                        Cell::Num(v.bandwidth),
                        Cell::Num(hz),
                        Cell::Num(v.pulse.chirp),
                        Cell::Num(c.r_um[j]),
                        Cell::Num(c.k[j]),
                        Cell::Num(c.p[j]),
                    ]);
                }
            }
            Ok(r)
        }
        Scenario::Oracle {
            pulse,
            couplings,
            omega,
            points,
            residual,
            max_atoms,
        } => {
            let opts = OracleOptions {
                max_atoms: *max_atoms,
                ..OracleOptions::default()
            };
            let n = couplings.len();
            let times: Vec<f64> = if *points == 1 {
                vec![pulse.tau_end]
            } else {
                (0..*points)
                    .map(|i| {
                        pulse.tau0 + (pulse.tau_end - pulse.tau0) * i as f64 / (*points - 1) as f64
                    })
                    .collect()
            };
            let traj = propagate(couplings, pulse, *omega, &times, &opts)?;
            let mut cols = vec!["tau".to_string()];
            cols.extend((1..=n).map(|i| format!("P_{i}")));
            cols.extend((2..=n).map(|j| format!("pair_1_{j}")));
            let mut r = Report {
                command: Command::Oracle,
                summary: Vec::new(),
                columns: cols,
                rows: Vec::new(),
            };
            r.note("max_norm_drift", Cell::Num(traj.max_norm_drift));
            r.note("steps", Cell::Int(traj.steps as u64));
            r.note("rejected", Cell::Int(traj.rejected as u64));
            if *residual {
                let fit = expansion_residual(couplings, pulse, None, &opts)?;
                r.note("residual_order", Cell::Num(fit.order));
                r.note("residual_amplitude", Cell::Num(fit.amplitude));
                r.note("residual_passes", Cell::Text(fit.passes().to_string()));
            }
            for s in &traj.states {
                let o = s.observables();
                let mut row = vec![Cell::Num(s.tau)];
                row.extend(o.excitation.iter().map(|&v| Cell::Num(v)));
                row.extend((1..n).map(|j| Cell::Num(o.pair[0][j])));
                r.rows.push(row);
            }
            Ok(r)
        }
        Scenario::McValidate {
            pulse,
            kernel,
            rho,
            samples,
            atoms,
            geometry,
            seed,
        } => {
            let opts = McOptions::with_atoms(*geometry, *atoms, *rho);
            let mc = i4_montecarlo(pulse, kernel, *rho, &opts, *samples, *seed)?;
            let analytic = match i4_averaged(pulse, kernel, *rho, pulse.tau_end) {
                Ok(v) => v,
                Err(Error::ConditionallyConvergent) => f64::NAN,
                Err(e) => return Err(e),
            };
            let mut r = Report::new(
                Command::McValidate,
                &["samples", "atoms", "extent_cm", "mc_mean", "mc_stderr", "analytic", "z_score"],
            );
            r.rows.push(vec![
                Cell::Int(mc.samples as u64),
                Cell::Int(mc.atoms as u64),
                Cell::Num(opts.extent),
                Cell::Num(mc.mean),
                Cell::Num(mc.stderr),
                Cell::Num(analytic),
                Cell::Num((mc.mean - analytic) / mc.stderr),
            ]);
            Ok(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn every_preset_resolves() {
        for name in presets::names() {
            let cfg = presets::config(name).unwrap();
            let cmd: Command = cfg.value::<String>("command").unwrap().parse().unwrap();
            resolve(&cfg, cmd).unwrap();
        }
    }

    #[test]
    fn missing_density_names_field() {
        let mut cfg = presets::config("fig2").unwrap();
        cfg.set("rho", "", crate::config::Origin::Flag).unwrap();
        let e = resolve(&cfg, Command::DensitySweep).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("rho"));
    }

    #[test]
    fn unsupported_exponent_rejected() {
        let mut cfg = presets::config("fig1").unwrap();
        cfg.merge_flag("kernel.s=4").unwrap();
        let e = resolve(&cfg, Command::Pexc).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("kernel.s"));
    }

    #[test]
    fn fig3a_variants_chirp_signs() {
        let cfg = presets::config("fig3a").unwrap();
        let Scenario::Correlation { variants, .. } = resolve(&cfg, Command::Correlation).unwrap() else {
            panic!("wrong scenario");
        };
        assert_eq!(variants.len(), 5);
        assert_eq!(variants[0].pulse.chirp, 0.0);
        assert!(variants[3].pulse.chirp > 0.0 && variants[4].pulse.chirp < 0.0);
        assert_eq!(variants[3].pulse.chirp, -variants[4].pulse.chirp);
    }

    #[test]
    fn csv_header_echoes_config() {
        let cfg = presets::config("singer-params").unwrap();
        let r = run(&resolve(&cfg, Command::Saturation).unwrap()).unwrap();
        let csv = r.to_csv(&cfg);
        assert!(csv.contains("# config rho = 2e9"));
        assert!(csv.contains("# config pulse.bandwidth = (unset)"));
        assert!(csv.lines().any(|l| l.starts_with("gamma,N_d,P0")));
    }
}
