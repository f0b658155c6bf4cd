//! Command implementations behind the `qmetro` binary.
//!
//! Every command renders its output to strings first, then writes them, so runs are
//! byte-for-byte reproducible for a given configuration and seed.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use qmetro::channels::{amplitude_damping, depolarizing, general_pauli, KrausChannel, NoiseKind, PhaseChannelFamily};
use qmetro::circuits::{conjugation_residual, flagged_variance, variance_consistency_check, verify_flagged_output};
use qmetro::estimation::{error_curve, quoted_information, ErrorRow, Scheme, DEFAULT_REPETITIONS};
use qmetro::format::{csv_table, fmt6};
use qmetro::optics::{
    ad_angle, build_ad_network, build_pauli_network, extract_channel, pauli_angle_residuals, solve_pauli_angles, OpticalNetwork,
};
use qmetro::qfi::{channel_qfi_minimax, closed_form_qfi};
use qmetro::tomography::{
    chi_theory, exact_probabilities, fidelity_value, poisson_uncertainty, reconstruct_chi, reconstruct_from_frequencies,
    simulate_qpt, ChiJson,
};
use qmetro::{Error, Executor};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

/// Poisson re-draws behind the fidelity error bar.
pub const QPT_RESAMPLES: usize = 50;
const OPTICS_FIDELITY_FLOOR: f64 = 1.0 - 1e-6;
const SUPPLEMENT_RESIDUAL_CEILING: f64 = 1e-10;
const FLAG_PHASES: [f64; 3] = [0.0, 0.3, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    QfiCurve,
    ErrorCurve,
    Qpt,
    OpticsVerify,
    SupplementVerify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Ad,
    Depol,
    Pauli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Inclusive grid `start:stop:step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| round12(self.start + i as f64 * self.step)).collect()
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}' in grid '{s}'")))
            .collect::<Result<_, _>>()?;
        let g = match nums.as_slice() {
            [x] => Grid { start: *x, stop: *x, step: 1.0 },
            [a, b, c] => Grid { start: *a, stop: *b, step: *c },
            _ => return Err(format!("grid '{s}' must be start:stop:step or a single value")),
        };
        if !(g.step > 0.0) || !g.step.is_finite() {
            return Err(format!("grid step must be positive, got {}", g.step));
        }
        if !(g.stop >= g.start) {
            return Err(format!("grid stop {} is below start {}", g.stop, g.start));
        }
        Ok(g)
    }
}

/// Parsed command line.
#[derive(Clone, Debug, Parser)]
#[command(name = "qmetro", version, about = "Noisy-channel phase estimation toolkit")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long, value_enum)]
    pub channel: Option<ChannelArg>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub p3: Option<f64>,
    /// Single noise value; overrides --grid.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Noise grid start:stop:step (inclusive).
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Probes per shot for error curves (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub probes: usize,
    /// Events per acquisition, or shots per setting for tomography.
    #[arg(long)]
    pub events: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    pub reps: usize,
    #[arg(long)]
    pub visibility: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Use exact outcome probabilities instead of sampled counts.
    #[arg(long)]
    pub exact: bool,
    /// Add optimizer columns to the QFI curve.
    #[arg(long)]
    pub minimax: bool,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfRange(_) | Error::InvalidProbabilities(_) | Error::Dimension(_) => CliError::Config(e.to_string()),
            Error::ZeroContrast(_) => CliError::Config(format!("zero contrast: {e}")),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("write failed: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(format!("serialization failed: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Rendered output: the main file, optional sidecar files (path suffix, content) and the
/// reason a verification threshold was missed, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub main: String,
    pub sidecars: Vec<(String, String)>,
    pub failure: Option<String>,
}

impl Rendered {
    fn single(main: String) -> Self {
        Self { main, sidecars: vec![], failure: None }
    }

    fn checked(main: String, failure: Option<String>) -> Self {
        Self { main, sidecars: vec![], failure }
    }
}

impl RunConfig {
    pub fn with_command(command: Command) -> Self {
        RunConfig::parse_from(["qmetro", command.to_possible_value().expect("visible variant").get_name()])
    }

    fn noise_values(&self, default: Grid) -> CliResult<Vec<f64>> {
        let values = match (self.eta, self.grid) {
            (Some(x), _) => vec![x],
            (None, Some(g)) => g.values(),
            (None, None) => default.values(),
        };
        if values.is_empty() {
            return Err(CliError::Config("empty grid".into()));
        }
        if let Some(x) = values.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(CliError::Config(format!("noise value {x} outside [0, 1]")));
        }
        Ok(values)
    }

    fn pauli_vector(&self) -> CliResult<[f64; 4]> {
        match (self.p0, self.p1, self.p2, self.p3) {
            (None, None, None, None) => Ok([0.5, 0.0, 0.5, 0.0]),
            (a, b, c, d) => {
                let p = [a.unwrap_or(0.0), b.unwrap_or(0.0), c.unwrap_or(0.0), d.unwrap_or(0.0)];
                qmetro::channels::validate_probabilities(&p)?;
                Ok(p)
            }
        }
    }

    fn noise_kind(&self) -> CliResult<NoiseKind> {
        match self.channel.unwrap_or(ChannelArg::Ad) {
            ChannelArg::Ad => Ok(NoiseKind::AmplitudeDamping),
            ChannelArg::Depol => Ok(NoiseKind::Depolarizing),
            ChannelArg::Pauli => Err(CliError::Config("this command needs --channel ad or depol".into())),
        }
    }

    fn check_common(&self) -> CliResult<()> {
        if self.events == Some(0) {
            return Err(CliError::Config("--events must be at least 1".into()));
        }
        if let Some(v) = self.visibility {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::Config(format!("visibility {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

const DEFAULT_GRID: Grid = Grid { start: 0.0, stop: 0.9, step: 0.1 };

/// Runs the configured command and returns the rendered output without writing it.
pub fn render(cfg: &RunConfig) -> CliResult<Rendered> {
    cfg.check_common()?;
    match cfg.command {
        Command::QfiCurve => cmd_qfi_curve(cfg).map(Rendered::single),
        Command::ErrorCurve => cmd_error_curve(cfg).map(Rendered::single),
        Command::Qpt => cmd_qpt(cfg),
        Command::OpticsVerify => cmd_optics_verify(cfg),
        Command::SupplementVerify => cmd_supplement_verify(cfg),
    }
}

/// Runs the command and writes the output to `--out` (stdout when absent). Reports from
/// failed verifications are written before the failure is returned.
pub fn run(cfg: &RunConfig) -> CliResult<Rendered> {
    let out = render(cfg)?;
    write_rendered(cfg.out.as_deref(), &out)?;
    match &out.failure {
        Some(why) => Err(CliError::Failure(format!("verification threshold not met: {why}"))),
        None => Ok(out),
    }
}

fn write_rendered(out: Option<&Path>, r: &Rendered) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, &r.main)?;
            for (suffix, content) in &r.sidecars {
                std::fs::write(sidecar_path(path, suffix), content)?;
            }
        }
        None => {
            print!("{}", r.main);
            for (suffix, content) in &r.sidecars {
                println!("# {suffix}");
                print!("{content}");
            }
        }
    }
    Ok(())
}

/// `dir/name.csv` + `_chi.json` → `dir/name_chi.json`.
pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct QfiRow {
    noise: f64,
    qfi_assisted_closed: f64,
    qfi_bare_closed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    qfi_assisted_minimax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    qfi_bare_minimax: Option<f64>,
}

pub fn cmd_qfi_curve(cfg: &RunConfig) -> CliResult<String> {
    let kind = cfg.noise_kind()?;
    let grid = cfg.noise_values(DEFAULT_GRID)?;
    let rows = grid
        .iter()
        .map(|&x| {
            let mut row = QfiRow {
                noise: x,
                qfi_assisted_closed: closed_form_qfi(kind, x, true)?,
                qfi_bare_closed: closed_form_qfi(kind, x, false)?,
                qfi_assisted_minimax: None,
                qfi_bare_minimax: None,
            };
            if cfg.minimax {
                let fam = PhaseChannelFamily::single(kind.channel(x)?)?;
                let optimizer = |extended| {
                    channel_qfi_minimax(&fam, extended, 0.0).map(|r| r.value).map_err(|e| CliError::Failure(format!("optimizer failed at {x}: {e}")))
                };
                row.qfi_assisted_minimax = Some(optimizer(true)?);
                row.qfi_bare_minimax = Some(optimizer(false)?);
            }
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;
    match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut header = vec!["noise", "qfi_assisted_closed", "qfi_bare_closed"];
            if cfg.minimax {
                header.extend(["qfi_assisted_minimax", "qfi_bare_minimax"]);
            }
            let table: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![r.noise, r.qfi_assisted_closed, r.qfi_bare_closed];
                    v.extend(r.qfi_assisted_minimax.into_iter().chain(r.qfi_bare_minimax));
                    v
                })
                .collect();
            Ok(csv_table(&header, &table))
        }
    }
}

/// Assisted scheme selected by --channel and --probes.
pub fn assisted_scheme(cfg: &RunConfig) -> CliResult<Scheme> {
    match (cfg.noise_kind()?, cfg.probes) {
        (NoiseKind::AmplitudeDamping, 1) => Ok(Scheme::AdSingleAssisted),
        (NoiseKind::Depolarizing, 1) => Ok(Scheme::DepolSingleAssisted),
        (NoiseKind::AmplitudeDamping, 2) => Ok(Scheme::AdTwoProbeAssisted),
        (NoiseKind::Depolarizing, 2) => Err(CliError::Config("two-probe runs are available for amplitude damping only".into())),
        (_, n) => Err(CliError::Config(format!("--probes must be 1 or 2, got {n}"))),
    }
}

#[derive(Serialize)]
struct ErrorCurveRow {
    noise: f64,
    sqrt_nu_dphi: f64,
    bootstrap_std: f64,
    cr_bound: f64,
    shot_noise: f64,
    bare_sqrt_nu_dphi: f64,
    bare_bootstrap_std: f64,
    bare_cr_bound: f64,
}

pub const ERROR_CURVE_COLUMNS: [&str; 8] = [
    "noise",
    "sqrt_nu_dphi",
    "bootstrap_std",
    "cr_bound",
    "shot_noise",
    "bare_sqrt_nu_dphi",
    "bare_bootstrap_std",
    "bare_cr_bound",
];

pub fn cmd_error_curve(cfg: &RunConfig) -> CliResult<String> {
    let scheme = assisted_scheme(cfg)?;
    let grid = cfg.noise_values(DEFAULT_GRID)?;
    let v = cfg.visibility.unwrap_or(scheme.default_visibility());
    let events = cfg.events.unwrap_or(scheme.default_events());
    if cfg.reps < 2 {
        return Err(CliError::Config("--reps must be at least 2".into()));
    }
    let exec = Executor::default();
    let assisted: Vec<ErrorRow> = error_curve(scheme, &grid, v, events, cfg.reps, cfg.seed, exec)?;
    let bare: Vec<ErrorRow> = error_curve(scheme.partner(), &grid, v, events, cfg.reps, cfg.seed ^ 0xBA5E, exec)?;
    let rows: Vec<ErrorCurveRow> = assisted
        .iter()
        .zip(&bare)
        .map(|(a, b)| ErrorCurveRow {
            noise: a.noise,
            sqrt_nu_dphi: a.sqrt_nu_dphi,
            bootstrap_std: a.bootstrap_std,
            cr_bound: a.cr_bound,
            shot_noise: a.shot_noise,
            bare_sqrt_nu_dphi: b.sqrt_nu_dphi,
            bare_bootstrap_std: b.bootstrap_std,
            bare_cr_bound: b.cr_bound,
        })
        .collect();
    debug_assert!(rows.iter().all(|r| {
        let j = quoted_information(scheme, r.noise, v).unwrap_or(0.0);
        j == 0.0 || (r.cr_bound - 1.0 / j.sqrt()).abs() < 1e-9
    }));
    match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let table: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.noise,
                        r.sqrt_nu_dphi,
                        r.bootstrap_std,
                        r.cr_bound,
                        r.shot_noise,
                        r.bare_sqrt_nu_dphi,
                        r.bare_bootstrap_std,
                        r.bare_cr_bound,
                    ]
                })
                .collect();
            Ok(csv_table(&ERROR_CURVE_COLUMNS, &table))
        }
    }
}

#[derive(Serialize)]
struct QptPoint {
    noise: f64,
    fidelity: f64,
    fidelity_std: f64,
    chi_exp: ChiJson,
    chi_th: ChiJson,
}

fn qpt_channel(cfg: &RunConfig, x: f64) -> CliResult<KrausChannel> {
    Ok(match cfg.channel.unwrap_or(ChannelArg::Ad) {
        ChannelArg::Ad => amplitude_damping(x)?,
        ChannelArg::Depol => depolarizing(x)?,
        ChannelArg::Pauli => general_pauli(cfg.pauli_vector()?)?,
    })
}

pub fn cmd_qpt(cfg: &RunConfig) -> CliResult<Rendered> {
    let points = match cfg.channel.unwrap_or(ChannelArg::Ad) {
        ChannelArg::Pauli => vec![0.0],
        ChannelArg::Ad => cfg.noise_values(Grid { start: 0.5, stop: 0.5, step: 1.0 })?,
        ChannelArg::Depol => cfg.noise_values(Grid { start: 0.4, stop: 0.4, step: 1.0 })?,
    };
    let shots = cfg.events.unwrap_or(20_000);
    let reconstruction = |e: Error| CliError::Failure(format!("reconstruction failed: {e}"));
    let results = points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let ch = qpt_channel(cfg, x)?;
            let th = chi_theory(&ch.extend_with_ancilla())?;
            let seed = qmetro::exec::derive_seed(cfg.seed, i as u64);
            let (chi, std) = if cfg.exact {
                let (n, p) = exact_probabilities(&ch, true)?;
                (reconstruct_from_frequencies(n, &p).map_err(reconstruction)?, 0.0)
            } else {
                let data = simulate_qpt(&ch, true, shots, seed)?;
                let chi = reconstruct_chi(&data).map_err(reconstruction)?;
                (chi, poisson_uncertainty(&data, &th, QPT_RESAMPLES, seed).map_err(reconstruction)?)
            };
            Ok(QptPoint {
                noise: x,
                fidelity: fidelity_value(&chi, &th).map_err(reconstruction)?,
                fidelity_std: std,
                chi_exp: chi.to_json(),
                chi_th: th.to_json(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    match cfg.format {
        Format::Json => Ok(Rendered::single(json(&results)?)),
        Format::Csv => {
            let table: Vec<Vec<f64>> = results.iter().map(|r| vec![r.noise, r.fidelity, r.fidelity_std]).collect();
            Ok(Rendered {
                main: csv_table(&["noise", "fidelity", "fidelity_std"], &table),
                sidecars: vec![("_chi.json".into(), json(&results)?)],
                failure: None,
            })
        }
    }
}

#[derive(Serialize)]
struct OpticsReport {
    channel: &'static str,
    parameters: Vec<f64>,
    angles_rad: Vec<f64>,
    residuals: Vec<f64>,
    fidelity: f64,
    success_probability: f64,
    beam_displacers: usize,
    network: OpticalNetwork,
}

pub fn cmd_optics_verify(cfg: &RunConfig) -> CliResult<Rendered> {
    let (report, target) = match cfg.channel.unwrap_or(ChannelArg::Ad) {
        ChannelArg::Ad => {
            let eta = cfg.eta.unwrap_or(0.5);
            let net = build_ad_network(eta)?;
            let theta = ad_angle(eta);
            let residual = ((2.0 * theta).cos() + (1.0 - eta).sqrt()).abs();
            (("amplitude-damping", vec![eta], vec![theta], vec![residual], net), amplitude_damping(eta)?)
        }
        ChannelArg::Depol | ChannelArg::Pauli => {
            let p = if cfg.channel == Some(ChannelArg::Depol) {
                let x = cfg.eta.unwrap_or(0.4);
                if !(0.0..=1.0).contains(&x) {
                    return Err(CliError::Config(format!("p = {x} outside [0, 1]")));
                }
                [1.0 - 0.75 * x, x / 4.0, x / 4.0, x / 4.0]
            } else {
                cfg.pauli_vector()?
            };
            let angles = solve_pauli_angles(p)?;
            let residuals = pauli_angle_residuals(&angles, p).to_vec();
            (("general-pauli", p.to_vec(), angles.0.to_vec(), residuals, build_pauli_network(p)?), general_pauli(p)?)
        }
    };
    let (name, parameters, angles_rad, residuals, network) = report;
    let (ch, success) = extract_channel(&network)?;
    let fidelity = fidelity_value(&chi_theory(&ch)?, &chi_theory(&target)?)?;
    for (k, a) in angles_rad.iter().enumerate() {
        eprintln!("angle {}: {:.6} deg", k + 1, a.to_degrees());
    }
    let report = OpticsReport {
        channel: name,
        parameters,
        beam_displacers: network.n_beam_displacers(),
        angles_rad,
        residuals,
        fidelity,
        success_probability: success,
        network,
    };
    let text = match cfg.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut header = vec!["fidelity".to_string(), "success_probability".into(), "max_residual".into()];
            header.extend((1..=report.angles_rad.len()).map(|k| format!("theta{k}")));
            let mut row = vec![report.fidelity, report.success_probability, report.residuals.iter().copied().fold(0.0, f64::max)];
            row.extend(&report.angles_rad);
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_table(&h, &[row])
        }
    };
    let failure = (!(fidelity >= OPTICS_FIDELITY_FLOOR))
        .then(|| format!("process fidelity {} below {}", fmt6(fidelity), fmt6(OPTICS_FIDELITY_FLOOR)));
    Ok(Rendered::checked(text, failure))
}

#[derive(Serialize)]
struct SupplementRow {
    p: f64,
    conjugation_residual: f64,
    weight0: f64,
    weight1: f64,
    block_residual: f64,
    variance_assisted: f64,
    variance_bare: f64,
    consistency_residual: f64,
}

pub fn cmd_supplement_verify(cfg: &RunConfig) -> CliResult<Rendered> {
    let grid = cfg.noise_values(DEFAULT_GRID)?;
    if grid.iter().any(|&p| p >= 1.0) {
        return Err(CliError::Config("variances are undefined at p = 1".into()));
    }
    let rows = grid
        .iter()
        .map(|&p| {
            let mut block_residual: f64 = 0.0;
            let mut weights = (0.0, 0.0);
            for phi in FLAG_PHASES {
                let r = verify_flagged_output(p, phi)?;
                block_residual = block_residual.max(r.residual0).max(r.residual1).max(r.conditional_residual);
                weights = r.weights;
            }
            let (va, vb) = flagged_variance(p)?;
            Ok(SupplementRow {
                p,
                conjugation_residual: conjugation_residual(p)?,
                weight0: weights.0,
                weight1: weights.1,
                block_residual,
                variance_assisted: va,
                variance_bare: vb,
                consistency_residual: variance_consistency_check(p)?.max_residual,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let text = match cfg.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let table: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.p,
                        r.conjugation_residual,
                        r.weight0,
                        r.weight1,
                        r.block_residual,
                        r.variance_assisted,
                        r.variance_bare,
                        r.consistency_residual,
                    ]
                })
                .collect();
            csv_table(
                &[
                    "p",
                    "conjugation_residual",
                    "weight0",
                    "weight1",
                    "block_residual",
                    "variance_assisted",
                    "variance_bare",
                    "consistency_residual",
                ],
                &table,
            )
        }
    };
    let worst = rows
        .iter()
        .map(|r| r.conjugation_residual.max(r.block_residual).max(r.consistency_residual))
        .fold(0.0, f64::max);
    let failure = (worst > SUPPLEMENT_RESIDUAL_CEILING).then(|| format!("largest residual {worst:.3e}"));
    Ok(Rendered::checked(text, failure))
}
