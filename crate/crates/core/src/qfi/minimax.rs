//! Channel QFI as an optimization over equivalent Kraus representations.
//!
//! With K̃̇ᵢ = K̇ᵢ − i Σⱼ hᵢⱼ Kⱼ and α(h) = Σᵢ K̃̇ᵢ† K̃̇ᵢ, the map h ↦ 4 Tr(ρ α(h)) is a
//! convex quadratic in the m² real parameters of h. Its minimum is the QFI of the output
//! produced from any purification of ρ.

use rand::Rng;

use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::{QfiMethod, QfiResult};
use crate::channels::{rotate_kraus, GeneratorH, PhaseChannelFamily};
use crate::error::{Error, Result};
use crate::exec::{substream, Executor};
use crate::linalg::{eigh, spectral_max, CMat, DensityMatrix, I};

#[derive(Clone, Debug)]
pub struct MinimaxOptions {
    /// Polar samples (inclusive of both poles) and azimuthal samples of the Bloch grid.
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub nm: NelderMeadOptions,
    /// Random restarts of the simplex inner solver, in addition to h = 0.
    pub restarts: usize,
    pub seed: u64,
    pub executor: Executor,
}

impl Default for MinimaxOptions {
    fn default() -> Self {
        Self {
            grid_theta: 64,
            grid_phi: 64,
            nm: NelderMeadOptions::default(),
            restarts: 8,
            seed: 0x5EED,
            executor: Executor::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct InnerMinimum {
    /// min_h 4 Tr(ρ α(h))
    pub value: f64,
    pub h: GeneratorH,
}

/// Operator coefficients of Tr(ρ α(h)) = c + 2bᵀx + xᵀQx, independent of ρ.
struct QuadraticForm {
    m: usize,
    c: CMat,
    b: Vec<CMat>,
    q: Vec<Vec<CMat>>,
}

impl QuadraticForm {
    fn new(fam: &PhaseChannelFamily, phi0: f64) -> Self {
        let fam = fam.probe_only();
        let m = fam.num_kraus();
        let n = m * m;
        let ks = fam.kraus_at(phi0);
        let dks = fam.dkraus_at(phi0);
        let d = fam.dim();

        // Mᵢ^a = −i Σⱼ (E_a)ᵢⱼ Kⱼ for each basis generator E_a.
        let basis: Vec<GeneratorH> = (0..n)
            .map(|a| {
                let mut e = vec![0.0; n];
                e[a] = 1.0;
                GeneratorH::from_params(m, &e).expect("unit parameter vector")
            })
            .collect();
        let ms: Vec<Vec<CMat>> = basis
            .iter()
            .map(|ea| {
                (0..m)
                    .map(|i| {
                        let mut acc = CMat::zeros(d, d);
                        for (j, kj) in ks.iter().enumerate() {
                            let e = ea.mat()[(i, j)];
                            if e.norm() > 0.0 {
                                acc = &acc + &kj.scale(-I * e);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();

        let mut c = CMat::zeros(d, d);
        for dk in &dks {
            c = &c + &(&dk.dagger() * dk);
        }
        let b = ms
            .iter()
            .map(|ma| {
                let mut acc = CMat::zeros(d, d);
                for (dk, mi) in dks.iter().zip(ma) {
                    acc = &acc + &(&dk.dagger() * mi);
                }
                acc
            })
            .collect();
        let q = ms
            .iter()
            .map(|ma| {
                ms.iter()
                    .map(|mb| {
                        let mut acc = CMat::zeros(d, d);
                        for (x, y) in ma.iter().zip(mb) {
                            acc = &acc + &(&x.dagger() * y);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { m, c, b, q }
    }

    fn expectations(&self, rho: &CMat) -> (f64, Vec<f64>, CMat) {
        let tr = |op: &CMat| rho.hs_inner(op).re;
        let c = tr(&self.c);
        let b: Vec<f64> = self.b.iter().map(tr).collect();
        let n = b.len();
        let mut q = CMat::zeros(n, n);
        for a in 0..n {
            for bb in a..n {
                let v = tr(&self.q[a][bb]);
                q[(a, bb)] = v.into();
                q[(bb, a)] = v.into();
            }
        }
        (c, b, q)
    }

    fn minimize(&self, rho: &CMat) -> Result<InnerMinimum> {
        let (c, b, q) = self.expectations(rho);
        let es = eigh(&q)?;
        let top = es.values.last().copied().unwrap_or(0.0).max(0.0);
        let n = b.len();
        let mut x = vec![0.0; n];
        for k in 0..n {
            let lam = es.values[k];
            if lam <= 1e-12 * top.max(1e-300) {
                continue;
            }
            let vk: Vec<f64> = (0..n).map(|r| es.vectors[(r, k)].re).collect();
            let proj: f64 = vk.iter().zip(&b).map(|(v, bi)| v * bi).sum();
            for r in 0..n {
                x[r] -= proj / lam * vk[r];
            }
        }
        let lin: f64 = b.iter().zip(&x).map(|(bi, xi)| bi * xi).sum();
        let value = 4.0 * (c + lin).max(0.0);
        Ok(InnerMinimum { value, h: GeneratorH::from_params(self.m, &x)? })
    }
}

fn check_probe_state(fam: &PhaseChannelFamily, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != fam.probe_dim() {
        return Err(Error::Dimension(format!(
            "probe state has dimension {}, channel acts on {}",
            rho.dim(),
            fam.probe_dim()
        )));
    }
    Ok(())
}

/// 4 Tr(ρ α(h)) evaluated directly from the rotated derivatives.
pub fn minimax_objective(fam: &PhaseChannelFamily, h: &GeneratorH, rho: &DensityMatrix, phi0: f64) -> Result<f64> {
    let fam = fam.probe_only();
    check_probe_state(&fam, rho)?;
    let alpha = alpha(&fam, h, phi0)?;
    Ok(4.0 * rho.mat().hs_inner(&alpha).re)
}

/// 4 λ_max(α(h))
pub fn spectral_objective(fam: &PhaseChannelFamily, h: &GeneratorH, phi0: f64) -> Result<f64> {
    let alpha = alpha(&fam.probe_only(), h, phi0)?;
    Ok(4.0 * spectral_max(&alpha)?)
}

fn alpha(fam: &PhaseChannelFamily, h: &GeneratorH, phi0: f64) -> Result<CMat> {
    let rot = rotate_kraus(fam, h, phi0)?;
    let d = fam.dim();
    let mut a = CMat::zeros(d, d);
    for k in &rot {
        a = &a + &(&k.dagger() * k);
    }
    Ok(a.hermitian_part())
}

/// Exact min over h of 4 Tr(ρ α(h)) via the normal equations of the quadratic.
pub fn inner_minimum(fam: &PhaseChannelFamily, rho: &DensityMatrix, phi0: f64) -> Result<InnerMinimum> {
    check_probe_state(fam, rho)?;
    QuadraticForm::new(fam, phi0).minimize(rho.mat())
}

/// The same minimum found by multi-start simplex descent on the parameters of h.
pub fn inner_minimum_simplex(
    fam: &PhaseChannelFamily,
    rho: &DensityMatrix,
    phi0: f64,
    opts: &MinimaxOptions,
) -> Result<InnerMinimum> {
    check_probe_state(fam, rho)?;
    let m = fam.num_kraus();
    let n = m * m;
    let f = |x: &[f64]| {
        let h = GeneratorH::from_params(m, x).expect("parameter count matches");
        minimax_objective(fam, &h, rho, phi0).unwrap_or(f64::INFINITY)
    };
    let runs = opts.executor.map(opts.restarts + 1, |k| {
        let x0: Vec<f64> = if k == 0 {
            vec![0.0; n]
        } else {
            let mut rng = substream(opts.seed, k as u64);
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        nelder_mead(f, &x0, &opts.nm)
    });
    let best = runs
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    if !best.converged {
        return Err(Error::NonConvergence(format!(
            "simplex over h stopped after {} evaluations at {:.3e}",
            best.evals, best.value
        )));
    }
    Ok(InnerMinimum { value: best.value, h: GeneratorH::from_params(m, &best.x)? })
}

fn bloch_of(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn lex_less(a: &[f64; 3], b: &[f64; 3]) -> bool {
    let key = |v: f64| (v * 1e12).round();
    for k in 0..3 {
        match key(a[k]).total_cmp(&key(b[k])) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Channel QFI from the minimax over Kraus representations.
///
/// `extended = true`: probe and ancilla start maximally entangled, so the probe marginal is
/// 𝟙/d and the value is min_h 4 Tr(α(h))/d. `extended = false`: maximum over pure qubit
/// inputs of the inner minimum, on a Bloch grid followed by simplex refinement.
pub fn channel_qfi_minimax(fam: &PhaseChannelFamily, extended: bool, phi0: f64) -> Result<QfiResult> {
    channel_qfi_minimax_with(fam, extended, phi0, &MinimaxOptions::default())
}

pub fn channel_qfi_minimax_with(
    fam: &PhaseChannelFamily,
    extended: bool,
    phi0: f64,
    opts: &MinimaxOptions,
) -> Result<QfiResult> {
    let form = QuadraticForm::new(fam, phi0);
    let d = fam.probe_dim();
    if extended {
        let inner = form.minimize(DensityMatrix::maximally_mixed(d).mat())?;
        return Ok(QfiResult {
            value: inner.value,
            method: QfiMethod::Minimax,
            optimal_input: Some(DensityMatrix::maximally_entangled(d)),
            optimal_h: Some(inner.h),
        });
    }
    if d != 2 {
        return Err(Error::Dimension(format!("pure-input search needs a qubit probe, got dimension {d}")));
    }

    let eval = |theta: f64, phi: f64| -> Result<InnerMinimum> {
        let rho = DensityMatrix::from_trusted(bloch_matrix(bloch_of(theta, phi)));
        form.minimize(rho.mat())
    };

    let nt = opts.grid_theta.max(2);
    let np = opts.grid_phi.max(1);
    let rows = opts.executor.try_map(nt + 1, |i| {
        let theta = std::f64::consts::PI * i as f64 / nt as f64;
        (0..np)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / np as f64;
                eval(theta, phi).map(|r| (theta, phi, r.value))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let grid: Vec<(f64, f64, f64)> = rows.into_iter().flatten().collect();
    let top = grid.iter().map(|g| g.2).fold(f64::NEG_INFINITY, f64::max);
    let mut best = grid[0];
    let mut best_bloch = [f64::INFINITY; 3];
    for &g in &grid {
        if g.2 >= top - 1e-9 {
            let b = bloch_of(g.0, g.1);
            if lex_less(&b, &best_bloch) {
                best = g;
                best_bloch = b;
            }
        }
    }

    let nm_opts = NelderMeadOptions { step: std::f64::consts::PI / nt as f64, ..opts.nm };
    let refined = nelder_mead(
        |x: &[f64]| eval(x[0], x[1]).map(|r| -r.value).unwrap_or(f64::INFINITY),
        &[best.0, best.1],
        &nm_opts,
    );
    if !refined.converged {
        return Err(Error::NonConvergence(format!(
            "input refinement stopped after {} evaluations",
            refined.evals
        )));
    }
    let (theta, phi) = if -refined.value > best.2 + 1e-12 { (refined.x[0], refined.x[1]) } else { (best.0, best.1) };
    let inner = eval(theta, phi)?;
    let ket = [
        num_complex::Complex64::new((theta / 2.0).cos(), 0.0),
        num_complex::Complex64::from_polar((theta / 2.0).sin(), phi),
    ];
    Ok(QfiResult {
        value: inner.value,
        method: QfiMethod::Minimax,
        optimal_input: Some(DensityMatrix::pure(&ket)?),
        optimal_h: Some(inner.h),
    })
}

fn bloch_matrix(r: [f64; 3]) -> CMat {
    use num_complex::Complex64 as C;
    let [x, y, z] = r;
    CMat::from_rows(
        2,
        2,
        &[C::new((1.0 + z) / 2.0, 0.0), C::new(x / 2.0, -y / 2.0), C::new(x / 2.0, y / 2.0), C::new((1.0 - z) / 2.0, 0.0)],
    )
}

/// Extended-channel QFI with unrestricted input: max over mixed probe marginals ρ_A of
/// min_h 4 Tr(ρ_A α(h)), which equals min_h 4 λ_max(α(h)). Qubit probes only.
pub fn extended_channel_qfi_bound(fam: &PhaseChannelFamily, phi0: f64, opts: &MinimaxOptions) -> Result<QfiResult> {
    if fam.probe_dim() != 2 {
        return Err(Error::Dimension("extended bound search needs a qubit probe".into()));
    }
    let form = QuadraticForm::new(fam, phi0);
    let to_ball = |x: &[f64]| -> [f64; 3] {
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let s = if n > 1.0 { 1.0 / n } else { 1.0 };
        [x[0] * s, x[1] * s, x[2] * s]
    };
    let g = |r: [f64; 3]| form.minimize(&bloch_matrix(r)).map(|v| v.value).unwrap_or(f64::NEG_INFINITY);

    let mut starts = vec![[0.0; 3]];
    for &rad in &[0.5, 1.0] {
        for i in 1..8 {
            for j in 0..16 {
                let b = bloch_of(std::f64::consts::PI * i as f64 / 8.0, 2.0 * std::f64::consts::PI * j as f64 / 16.0);
                starts.push([rad * b[0], rad * b[1], rad * b[2]]);
            }
        }
        starts.push([0.0, 0.0, rad]);
        starts.push([0.0, 0.0, -rad]);
    }
    let vals = opts.executor.map_slice(&starts, |&r| g(r));
    let (k, _) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty start set");
    let nm_opts = NelderMeadOptions { step: 0.1, ..opts.nm };
    let refined = nelder_mead(|x: &[f64]| -g(to_ball(x)), &starts[k], &nm_opts);
    if !refined.converged {
        return Err(Error::NonConvergence(format!("marginal search stopped after {} evaluations", refined.evals)));
    }
    let r = if -refined.value > vals[k] { to_ball(&refined.x) } else { starts[k] };
    let inner = form.minimize(&bloch_matrix(r))?;
    Ok(QfiResult {
        value: inner.value,
        method: QfiMethod::Minimax,
        optimal_input: Some(DensityMatrix::from_trusted(bloch_matrix(r))),
        optimal_h: Some(inner.h),
    })
}
