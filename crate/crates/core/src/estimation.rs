//! Monte-Carlo phase estimation: outcome models with visibility, sampling, moment-inversion
//! estimators, classical Fisher information and √ν·δφ curves with bootstrap errors.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{amplitude_damping, depolarizing, phase_unitary, KrausChannel};
use crate::error::{check_unit, Error, Result};
use crate::exec::{derive_seed, substream, Executor};
use crate::format::csv_table;
use crate::linalg::{CMat, I, ONE, ZERO};
use crate::tomography::{multinomial, sample_std};

pub const BOOTSTRAP_RESAMPLES: usize = 200;
pub const DEFAULT_REPETITIONS: usize = 100;
const PROB_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    AdSingleAssisted,
    DepolSingleAssisted,
    AdTwoProbeAssisted,
    AdSingleBare,
    DepolSingleBare,
    AdTwoProbeBare,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::AdSingleAssisted,
        Scheme::DepolSingleAssisted,
        Scheme::AdTwoProbeAssisted,
        Scheme::AdSingleBare,
        Scheme::DepolSingleBare,
        Scheme::AdTwoProbeBare,
    ];

    pub fn is_assisted(self) -> bool {
        matches!(self, Scheme::AdSingleAssisted | Scheme::DepolSingleAssisted | Scheme::AdTwoProbeAssisted)
    }

    pub fn n_probes(self) -> usize {
        match self {
            Scheme::AdTwoProbeAssisted | Scheme::AdTwoProbeBare => 2,
            _ => 1,
        }
    }

    /// Assisted scheme ↔ the bare scheme with the same probes and noise.
    pub fn partner(self) -> Scheme {
        match self {
            Scheme::AdSingleAssisted => Scheme::AdSingleBare,
            Scheme::DepolSingleAssisted => Scheme::DepolSingleBare,
            Scheme::AdTwoProbeAssisted => Scheme::AdTwoProbeBare,
            Scheme::AdSingleBare => Scheme::AdSingleAssisted,
            Scheme::DepolSingleBare => Scheme::DepolSingleAssisted,
            Scheme::AdTwoProbeBare => Scheme::AdTwoProbeAssisted,
        }
    }

    pub fn default_visibility(self) -> f64 {
        match self {
            Scheme::AdSingleAssisted | Scheme::AdSingleBare => 0.9969,
            Scheme::DepolSingleAssisted | Scheme::DepolSingleBare => 0.9928,
            Scheme::AdTwoProbeAssisted | Scheme::AdTwoProbeBare => 0.9699,
        }
    }

    pub fn default_events(self) -> u64 {
        if self.n_probes() == 2 { 2_000 } else { 20_000 }
    }

    /// Standard quantum limit 1/√N in the √ν·δφ normalization.
    pub fn shot_noise(self) -> f64 {
        1.0 / (self.n_probes() as f64).sqrt()
    }

    /// Phase multiplier of the signal: sin(mφ).
    pub fn harmonic(self) -> usize {
        self.n_probes()
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::AdSingleAssisted => "ad-single-assisted",
            Scheme::DepolSingleAssisted => "depol-single-assisted",
            Scheme::AdTwoProbeAssisted => "ad-two-probe-assisted",
            Scheme::AdSingleBare => "ad-single-bare",
            Scheme::DepolSingleBare => "depol-single-bare",
            Scheme::AdTwoProbeBare => "ad-two-probe-bare",
        }
    }

    pub fn outcome_labels(self) -> &'static [&'static str] {
        match self {
            Scheme::AdSingleAssisted | Scheme::DepolSingleAssisted => &["HU+iVD", "HU-iVD", "HD", "VU"],
            Scheme::AdTwoProbeAssisted => &["+", "-", "HHDD", "HVDU", "VHUD"],
            Scheme::AdSingleBare | Scheme::DepolSingleBare => &["H+iV", "H-iV"],
            Scheme::AdTwoProbeBare => &["HH+iVV", "HH-iVV", "HV", "VH"],
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown scheme '{s}'")))
    }
}

/// Pₖ(φ) = aₖ + bₖ sin(mφ) + cₖ cos(mφ) for every outcome k.
#[derive(Clone, Debug, PartialEq)]
struct Harmonics {
    m: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementModel {
    scheme: Scheme,
    noise: f64,
    visibility: f64,
    h: Harmonics,
}

impl MeasurementModel {
    pub fn new(scheme: Scheme, noise: f64, visibility: f64) -> Result<Self> {
        check_unit("noise parameter", noise)?;
        check_unit("visibility", visibility)?;
        let h = match scheme {
            Scheme::AdSingleAssisted => {
                let s = visibility * (1.0 - noise).sqrt() / 2.0;
                let base = (2.0 - noise) / 4.0;
                Harmonics { m: 1.0, a: vec![base, base, noise / 2.0, 0.0], b: vec![s, -s, 0.0, 0.0], c: vec![0.0; 4] }
            }
            Scheme::DepolSingleAssisted => {
                let s = visibility * (1.0 - noise) / 2.0;
                let base = (2.0 - noise) / 4.0;
                let q = noise / 4.0;
                Harmonics { m: 1.0, a: vec![base, base, q, q], b: vec![s, -s, 0.0, 0.0], c: vec![0.0; 4] }
            }
            Scheme::AdTwoProbeAssisted => {
                let e = noise;
                let s = visibility * (1.0 - e) / 2.0;
                let base = (2.0 - 2.0 * e + e * e) / 4.0;
                let mixed = e * (1.0 - e) / 2.0;
                Harmonics {
                    m: 2.0,
                    a: vec![base, base, e * e / 2.0, mixed, mixed],
                    b: vec![-s, s, 0.0, 0.0, 0.0],
                    c: vec![0.0; 5],
                }
            }
            Scheme::AdSingleBare | Scheme::DepolSingleBare | Scheme::AdTwoProbeBare => {
                bare_harmonics(scheme, noise, visibility)?
            }
        };
        let model = Self { scheme, noise, visibility, h };
        for phi in [0.0, 0.3, FRAC_PI_2, -FRAC_PI_2, 1.1] {
            model.probabilities(phi)?;
        }
        Ok(model)
    }

    /// Model with the scheme's default visibility.
    pub fn with_default_visibility(scheme: Scheme, noise: f64) -> Result<Self> {
        Self::new(scheme, noise, scheme.default_visibility())
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn outcome_labels(&self) -> &'static [&'static str] {
        self.scheme.outcome_labels()
    }

    pub fn n_outcomes(&self) -> usize {
        self.h.a.len()
    }

    pub fn probabilities(&self, phi: f64) -> Result<Vec<f64>> {
        let (s, c) = (self.h.m * phi).sin_cos();
        let mut out = Vec::with_capacity(self.n_outcomes());
        for k in 0..self.n_outcomes() {
            let p = self.h.a[k] + self.h.b[k] * s + self.h.c[k] * c;
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
                return Err(Error::InvalidProbabilities(format!(
                    "{} outcome {k} has probability {p} at φ = {phi}",
                    self.scheme
                )));
            }
            out.push(p.clamp(0.0, 1.0));
        }
        Ok(out)
    }

    pub fn derivatives(&self, phi: f64) -> Vec<f64> {
        let m = self.h.m;
        let (s, c) = (m * phi).sin_cos();
        (0..self.n_outcomes()).map(|k| m * (self.h.b[k] * c - self.h.c[k] * s)).collect()
    }

    /// Signed contrast P₊ − P₋ at the signal maximum, the inversion denominator.
    pub fn contrast(&self) -> f64 {
        self.h.b[0] - self.h.b[1]
    }

    /// Classical Fisher information at φ = 0, the information the scheme's error bar is
    /// compared against.
    pub fn reference_information(&self) -> f64 {
        classical_fisher(self, 0.0)
    }

    /// 1/√J at φ = 0; infinite when the scheme carries no information.
    pub fn cr_bound(&self) -> f64 {
        let j = self.reference_information();
        if j > 0.0 { 1.0 / j.sqrt() } else { f64::INFINITY }
    }
}

/// Closed-form information at φ = 0 for each scheme, including visibility.
pub fn quoted_information(scheme: Scheme, noise: f64, v: f64) -> Result<f64> {
    check_unit("noise parameter", noise)?;
    check_unit("visibility", v)?;
    let x = 1.0 - noise;
    let v2 = v * v;
    Ok(match scheme {
        Scheme::AdSingleAssisted => 2.0 * v2 * x / (2.0 - noise),
        Scheme::DepolSingleAssisted => 2.0 * v2 * x * x / (2.0 - noise),
        Scheme::AdTwoProbeAssisted => 8.0 * v2 * x * x / (1.0 + x * x),
        Scheme::AdSingleBare => v2 * x,
        Scheme::DepolSingleBare => v2 * x * x,
        Scheme::AdTwoProbeBare => 4.0 * v2 * x * x / (1.0 - noise + noise * noise),
    })
}

/// Input, channel and measurement basis of a bare scheme.
fn bare_setup(scheme: Scheme, noise: f64) -> Result<(Vec<CMat>, KrausChannel, Vec<Vec<num_complex::Complex64>>)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| num_complex::Complex64::new(x, 0.0);
    match scheme {
        Scheme::AdSingleBare | Scheme::DepolSingleBare => {
            let ch = if scheme == Scheme::AdSingleBare { amplitude_damping(noise)? } else { depolarizing(noise)? };
            let plus = CMat::outer(&[r(s), r(s)]);
            let basis = vec![vec![r(s), I * s], vec![r(s), -I * s]];
            Ok((vec![plus], ch, basis))
        }
        Scheme::AdTwoProbeBare => {
            let ch = amplitude_damping(noise)?.collective(2);
            let noon = CMat::outer(&[r(s), ZERO, ZERO, r(s)]);
            let basis = vec![
                vec![r(s), ZERO, ZERO, I * s],
                vec![r(s), ZERO, ZERO, -I * s],
                vec![ZERO, ONE, ZERO, ZERO],
                vec![ZERO, ZERO, ONE, ZERO],
            ];
            Ok((vec![noon], ch, basis))
        }
        _ => Err(Error::OutOfRange(format!("{scheme} is not a bare scheme"))),
    }
}

/// Bare-scheme outcome probabilities from the simulated channel output.
pub fn bare_probabilities_from_channel(scheme: Scheme, noise: f64, v: f64, phi: f64) -> Result<Vec<f64>> {
    let (inputs, ch, basis) = bare_setup(scheme, noise)?;
    let u1 = phase_unitary(phi);
    let u = if scheme.n_probes() == 2 { u1.tensor(&u1) } else { u1 };
    let out = ch.apply_mat(&u.sandwich(&inputs[0]))?;
    let n = out.rows();
    let out = CMat::from_fn(n, n, |i, j| if i == j { out[(i, j)] } else { out[(i, j)] * v });
    Ok(basis
        .iter()
        .map(|ket| {
            let proj = out.apply(ket);
            ket.iter().zip(&proj).map(|(a, b)| a.conj() * b).sum::<num_complex::Complex64>().re
        })
        .collect())
}

/// Fits the exact first harmonic in mφ from three channel evaluations.
fn bare_harmonics(scheme: Scheme, noise: f64, v: f64) -> Result<Harmonics> {
    let m = scheme.harmonic() as f64;
    let p0 = bare_probabilities_from_channel(scheme, noise, v, 0.0)?;
    let pq = bare_probabilities_from_channel(scheme, noise, v, FRAC_PI_2 / m)?;
    let ph = bare_probabilities_from_channel(scheme, noise, v, 2.0 * FRAC_PI_2 / m)?;
    let a: Vec<f64> = p0.iter().zip(&ph).map(|(x, y)| 0.5 * (x + y)).collect();
    let c: Vec<f64> = p0.iter().zip(&ph).map(|(x, y)| 0.5 * (x - y)).collect();
    let b: Vec<f64> = pq.iter().zip(&a).map(|(x, y)| x - y).collect();
    Ok(Harmonics { m, a, b, c })
}

/// Σₖ (∂Pₖ)²/Pₖ over outcomes with Pₖ > 1e−12.
pub fn classical_fisher(model: &MeasurementModel, phi: f64) -> f64 {
    let Ok(p) = model.probabilities(phi) else { return 0.0 };
    let d = model.derivatives(phi);
    p.iter().zip(&d).filter(|(p, _)| **p > 1e-12).map(|(p, d)| d * d / p).sum()
}

pub fn sample_counts(model: &MeasurementModel, phi: f64, events: u64, seed: u64) -> Result<Vec<u64>> {
    sample_counts_with(model, phi, events, &mut substream(seed, 0))
}

pub fn sample_counts_with<R: Rng>(model: &MeasurementModel, phi: f64, events: u64, rng: &mut R) -> Result<Vec<u64>> {
    if events == 0 {
        return Err(Error::OutOfRange("events must be at least 1".into()));
    }
    Ok(multinomial(rng, events, &model.probabilities(phi)?))
}

/// Moment inversion φ̂ = arcsin[(n₊ − n₋)/(N·D)]/m with D the model contrast.
pub fn estimate_phase(model: &MeasurementModel, counts: &[u64]) -> Result<f64> {
    if counts.len() != model.n_outcomes() {
        return Err(Error::Dimension(format!("expected {} counts, got {}", model.n_outcomes(), counts.len())));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::OutOfRange("no events recorded".into()));
    }
    let d = model.contrast();
    if d.abs() <= 1e-12 {
        return Err(Error::ZeroContrast(format!(
            "{} with noise {} and visibility {} has no phase contrast",
            model.scheme, model.noise, model.visibility
        )));
    }
    let diff = counts[0] as f64 - counts[1] as f64;
    Ok((diff / (total as f64 * d)).clamp(-1.0, 1.0).asin() / model.h.m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialEnsemble {
    pub counts: Vec<Vec<u64>>,
    pub estimates: Vec<f64>,
    pub nu: f64,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub sqrt_nu_dphi: f64,
    pub bootstrap_std: f64,
    pub cr_bound: f64,
    pub shot_noise: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub ensemble: TrialEnsemble,
    pub report: ErrorReport,
}

pub fn run_experiment(model: &MeasurementModel, phi_true: f64, events: u64, repetitions: usize, seed: u64) -> Result<Experiment> {
    run_experiment_with(model, phi_true, events, repetitions, seed, Executor::default())
}

pub fn run_experiment_with(
    model: &MeasurementModel,
    phi_true: f64,
    events: u64,
    repetitions: usize,
    seed: u64,
    exec: Executor,
) -> Result<Experiment> {
    if repetitions < 2 {
        return Err(Error::OutOfRange("need at least two repetitions".into()));
    }
    let probs = model.probabilities(phi_true)?;
    if events == 0 {
        return Err(Error::OutOfRange("events must be at least 1".into()));
    }
    let trials = exec.try_map(repetitions, |r| {
        let counts = multinomial(&mut substream(seed, r as u64), events, &probs);
        let est = estimate_phase(model, &counts)?;
        Ok::<_, Error>((counts, est))
    })?;
    let (counts, estimates): (Vec<_>, Vec<_>) = trials.into_iter().unzip();
    let nu = events as f64;
    let scale = nu.sqrt();
    let sqrt_nu_dphi = sample_std(&estimates) * scale;
    let boot_seed = derive_seed(seed, 0xB007);
    let boot = exec.map(BOOTSTRAP_RESAMPLES, |b| {
        let mut rng = substream(boot_seed, b as u64);
        let sample: Vec<f64> = (0..repetitions).map(|_| estimates[rng.random_range(0..repetitions)]).collect();
        sample_std(&sample) * scale
    });
    Ok(Experiment {
        report: ErrorReport {
            sqrt_nu_dphi,
            bootstrap_std: sample_std(&boot),
            cr_bound: model.cr_bound(),
            shot_noise: model.scheme.shot_noise(),
        },
        ensemble: TrialEnsemble { counts, estimates, nu, repetitions, seed },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub noise: f64,
    pub sqrt_nu_dphi: f64,
    pub bootstrap_std: f64,
    pub cr_bound: f64,
    pub shot_noise: f64,
}

pub const ERROR_CURVE_HEADER: [&str; 5] = ["noise", "sqrt_nu_dphi", "bootstrap_std", "cr_bound", "shot_noise"];

/// One experiment per grid point at φ = 0; grid point i uses seed derive_seed(seed, i).
pub fn error_curve(
    scheme: Scheme,
    grid: &[f64],
    visibility: f64,
    events: u64,
    repetitions: usize,
    seed: u64,
    exec: Executor,
) -> Result<Vec<ErrorRow>> {
    if grid.is_empty() {
        return Err(Error::OutOfRange("empty noise grid".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(i, &noise)| {
            let model = MeasurementModel::new(scheme, noise, visibility)?;
            let r = run_experiment_with(&model, 0.0, events, repetitions, derive_seed(seed, i as u64), exec)?.report;
            Ok(ErrorRow {
                noise,
                sqrt_nu_dphi: r.sqrt_nu_dphi,
                bootstrap_std: r.bootstrap_std,
                cr_bound: r.cr_bound,
                shot_noise: r.shot_noise,
            })
        })
        .collect()
}

pub fn error_curve_csv(rows: &[ErrorRow]) -> String {
    let table: Vec<Vec<f64>> =
        rows.iter().map(|r| vec![r.noise, r.sqrt_nu_dphi, r.bootstrap_std, r.cr_bound, r.shot_noise]).collect();
    csv_table(&ERROR_CURVE_HEADER, &table)
}
