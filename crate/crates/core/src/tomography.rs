//! Simulated quantum process tomography in the Pauli product basis.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::exec::{derive_seed, substream, Executor};
use crate::linalg::{eigh, paulis, tensor, CMat, DensityMatrix, I, ONE, ZERO};

/// Process matrix χ with E(ρ) = Σ_ab χ_ab E_a ρ E_b†, where E_a runs over Pauli products
/// (index n·4 + m for Ξₙ⊗Ξₘ).
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    pub dim_basis: usize,
    pub mat: CMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiJson {
    pub dim_basis: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Pauli product operators for `n_qubits` qubits.
pub fn pauli_basis(n_qubits: usize) -> Vec<CMat> {
    let single = paulis();
    let mut basis = vec![CMat::identity(1)];
    for _ in 0..n_qubits {
        basis = basis.iter().flat_map(|b| single.iter().map(move |s| tensor(b, s))).collect();
    }
    basis
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    match dim {
        2 => Ok(1),
        4 => Ok(2),
        _ => Err(Error::Dimension(format!("process tomography supports dimension 2 or 4, got {dim}"))),
    }
}

impl ChiMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() || !matches!(mat.rows(), 4 | 16) {
            return Err(Error::Dimension(format!("χ must be 4x4 or 16x16, got {}x{}", mat.rows(), mat.cols())));
        }
        Ok(Self { dim_basis: mat.rows(), mat })
    }

    pub fn n_qubits(&self) -> usize {
        if self.dim_basis == 4 { 1 } else { 2 }
    }

    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// max |Σ_ab χ_ab E_b†E_a − 𝟙|
    pub fn tp_residual(&self) -> f64 {
        let basis = pauli_basis(self.n_qubits());
        let d = self.hilbert_dim();
        let mut sum = CMat::zeros(d, d);
        for (a, ea) in basis.iter().enumerate() {
            for (b, eb) in basis.iter().enumerate() {
                let c = self.mat[(a, b)];
                if c != ZERO {
                    sum = &sum + &(&eb.dagger() * ea).scale(c);
                }
            }
        }
        sum.max_abs_diff(&CMat::identity(d))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.mat)?.values[0])
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        let d = self.hilbert_dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::Dimension(format!("χ acts on dimension {d}, got {}x{}", rho.rows(), rho.cols())));
        }
        let basis = pauli_basis(self.n_qubits());
        let mut out = CMat::zeros(d, d);
        for (a, ea) in basis.iter().enumerate() {
            let left = ea * rho;
            for (b, eb) in basis.iter().enumerate() {
                let c = self.mat[(a, b)];
                if c != ZERO {
                    out = &out + &(&left * &eb.dagger()).scale(c);
                }
            }
        }
        Ok(out)
    }

    /// Kraus form from the eigendecomposition of χ; negative eigenvalues are dropped.
    pub fn to_channel(&self) -> Result<KrausChannel> {
        let basis = pauli_basis(self.n_qubits());
        let es = eigh(&self.mat)?;
        let d = self.hilbert_dim();
        let kraus: Vec<CMat> = (0..self.dim_basis)
            .filter(|&k| es.values[k] > 1e-14)
            .map(|k| {
                let s = es.values[k].sqrt();
                let mut acc = CMat::zeros(d, d);
                for (a, ea) in basis.iter().enumerate() {
                    acc = &acc + &ea.scale(es.vectors[(a, k)] * s);
                }
                acc
            })
            .collect();
        if kraus.is_empty() {
            return Err(Error::ZeroNorm);
        }
        KrausChannel::new_unchecked("chi", kraus)
    }

    pub fn to_json(&self) -> ChiJson {
        ChiJson {
            dim_basis: self.dim_basis,
            re: self.mat.as_slice().iter().map(|z| z.re).collect(),
            im: self.mat.as_slice().iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_json(js: &ChiJson) -> Result<Self> {
        if js.re.len() != js.im.len() {
            return Err(Error::Dimension("re and im parts differ in length".into()));
        }
        let data = js.re.iter().zip(&js.im).map(|(&r, &i)| C64::new(r, i)).collect();
        Self::new(CMat::from_vec(js.dim_basis, js.dim_basis, data)?)
    }
}

/// χ_ab = Σᵢ cᵢₐ c̄ᵢᵦ with Kᵢ = Σₐ cᵢₐ Eₐ.
pub fn chi_theory(ch: &KrausChannel) -> Result<ChiMatrix> {
    let n = qubits_for_dim(ch.dim())?;
    let basis = pauli_basis(n);
    let d = ch.dim() as f64;
    let nb = basis.len();
    let mut chi = CMat::zeros(nb, nb);
    for k in ch.kraus() {
        let c: Vec<C64> = basis.iter().map(|e| e.hs_inner(k) / d).collect();
        for a in 0..nb {
            for b in 0..nb {
                chi[(a, b)] += c[a] * c[b].conj();
            }
        }
    }
    ChiMatrix::new(chi)
}

/// Single-qubit preparation states |0⟩, |1⟩, (|0⟩−i|1⟩)/√2, (|0⟩+|1⟩)/√2.
fn qubit_states() -> [[C64; 2]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [ONE, ZERO],
        [ZERO, ONE],
        [C64::new(s, 0.0), -I * s],
        [C64::new(s, 0.0), C64::new(s, 0.0)],
    ]
}

/// Single-qubit projector pairs: (|a⟩, |a⊥⟩) for the four measured directions.
fn qubit_bases() -> [[[C64; 2]; 2]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = C64::new(s, 0.0);
    [
        [[ONE, ZERO], [ZERO, ONE]],
        [[ZERO, ONE], [ONE, ZERO]],
        [[h, -I * s], [h, I * s]],
        [[h, h], [h, -h]],
    ]
}

fn product_ket(parts: &[[C64; 2]]) -> Vec<C64> {
    let mut ket = vec![ONE];
    for p in parts {
        ket = ket.iter().flat_map(|&a| p.iter().map(move |&b| a * b)).collect();
    }
    ket
}

/// Input product state `index` (most significant qubit first).
pub fn input_state(n_qubits: usize, index: usize) -> Vec<C64> {
    let st = qubit_states();
    let parts: Vec<[C64; 2]> = (0..n_qubits).rev().map(|q| st[(index >> (2 * q)) & 3]).collect();
    product_ket(&parts)
}

/// Projector vector for `outcome` (one bit per qubit, most significant first) of setting `basis`.
pub fn measurement_vector(n_qubits: usize, basis: usize, outcome: usize) -> Vec<C64> {
    let b = qubit_bases();
    let parts: Vec<[C64; 2]> = (0..n_qubits)
        .rev()
        .map(|q| b[(basis >> (2 * q)) & 3][(outcome >> q) & 1])
        .collect();
    product_ket(&parts)
}

/// Counts from one tomography run.
#[derive(Clone, Debug, PartialEq)]
pub struct QptDataset {
    pub n_qubits: usize,
    pub shots_per_setting: u64,
    /// `counts[input * n_settings + basis][outcome]`
    pub counts: Vec<Vec<u64>>,
}

impl QptDataset {
    pub fn n_inputs(&self) -> usize {
        1 << (2 * self.n_qubits)
    }

    pub fn n_settings(&self) -> usize {
        1 << (2 * self.n_qubits)
    }

    pub fn n_outcomes(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn input_states(&self) -> Result<Vec<DensityMatrix>> {
        (0..self.n_inputs()).map(|l| DensityMatrix::pure(&input_state(self.n_qubits, l))).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .flat_map(|row| {
                let total: u64 = row.iter().sum();
                let t = if total == 0 { 1.0 } else { total as f64 };
                row.iter().map(move |&c| c as f64 / t)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("input_index,basis_index,outcome_index,count\n");
        let ns = self.n_settings();
        for (k, row) in self.counts.iter().enumerate() {
            for (o, c) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", k / ns, k % ns, o, c));
            }
        }
        out
    }

    pub fn from_csv(text: &str, shots_per_setting: u64) -> Result<Self> {
        let mut rows: Vec<(usize, usize, usize, u64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| -> Result<u64> {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Verification(format!("line {}: bad integer {s:?}", lineno + 1)))
            };
            if f.len() != 4 {
                return Err(Error::Verification(format!("line {}: expected 4 fields", lineno + 1)));
            }
            rows.push((parse(f[0])? as usize, parse(f[1])? as usize, parse(f[2])? as usize, parse(f[3])?));
        }
        let n_outcomes = rows.iter().map(|r| r.2).max().map_or(0, |m| m + 1);
        let n_qubits = qubits_for_dim(n_outcomes)?;
        let ns = 1 << (2 * n_qubits);
        let mut counts = vec![vec![0u64; n_outcomes]; ns * ns];
        for (l, s, o, c) in rows {
            if l >= ns || s >= ns {
                return Err(Error::Dimension(format!("index ({l}, {s}) out of range")));
            }
            counts[l * ns + s][o] = c;
        }
        Ok(Self { n_qubits, shots_per_setting, counts })
    }
}

fn target_channel(ch: &KrausChannel, extended: bool) -> Result<KrausChannel> {
    let target = if extended { ch.extend_with_ancilla() } else { ch.clone() };
    qubits_for_dim(target.dim())?;
    Ok(target)
}

/// Born probabilities for every (input, setting, outcome), flattened in dataset order.
pub fn exact_probabilities(ch: &KrausChannel, extended: bool) -> Result<(usize, Vec<f64>)> {
    let target = target_channel(ch, extended)?;
    let n = qubits_for_dim(target.dim())?;
    let ns = 1usize << (2 * n);
    let no = 1usize << n;
    let mut out = Vec::with_capacity(ns * ns * no);
    for l in 0..ns {
        let rho = target.apply_mat(&CMat::outer(&input_state(n, l)))?;
        for s in 0..ns {
            for o in 0..no {
                let v = measurement_vector(n, s, o);
                let rv = rho.apply(&v);
                let p: C64 = v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum();
                out.push(p.re.max(0.0));
            }
        }
    }
    Ok((n, out))
}

/// Multinomial draw by chained binomials.
pub fn multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == probs.len() {
            out[k] = left;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if q <= 0.0 {
            0
        } else if q >= 1.0 {
            left
        } else {
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        out[k] = draw;
        left -= draw;
        mass -= p;
    }
    out
}

pub fn simulate_qpt(ch: &KrausChannel, extended: bool, shots: u64, seed: u64) -> Result<QptDataset> {
    simulate_qpt_with(ch, extended, shots, seed, Executor::default())
}

/// Each (input, setting) pair samples from its own substream, so the table does not depend
/// on the executor.
pub fn simulate_qpt_with(
    ch: &KrausChannel,
    extended: bool,
    shots: u64,
    seed: u64,
    exec: Executor,
) -> Result<QptDataset> {
    if shots == 0 {
        return Err(Error::OutOfRange("shots must be at least 1".into()));
    }
    let (n, probs) = exact_probabilities(ch, extended)?;
    let no = 1usize << n;
    let nset = probs.len() / no;
    let counts = exec.map(nset, |k| {
        let mut rng = substream(seed, k as u64);
        multinomial(&mut rng, shots, &probs[k * no..(k + 1) * no])
    });
    Ok(QptDataset { n_qubits: n, shots_per_setting: shots, counts })
}

/// Least-squares design for a given qubit count, with the Cholesky factor of AᵀA.
struct Design {
    a: Vec<Vec<f64>>,
    chol: Vec<Vec<f64>>,
    herm_basis: Vec<(usize, usize, u8)>,
    nb: usize,
}

fn hermitian_basis(nb: usize) -> Vec<(usize, usize, u8)> {
    let mut out = Vec::with_capacity(nb * nb);
    for a in 0..nb {
        out.push((a, a, 0));
    }
    for a in 0..nb {
        for b in (a + 1)..nb {
            out.push((a, b, 1));
            out.push((a, b, 2));
        }
    }
    out
}

fn build_design(n: usize) -> Result<Design> {
    let basis = pauli_basis(n);
    let nb = basis.len();
    let ns = 1usize << (2 * n);
    let no = 1usize << n;
    let herm = hermitian_basis(nb);
    let mut a = Vec::with_capacity(ns * ns * no);
    for l in 0..ns {
        let psi = input_state(n, l);
        let e_psi: Vec<Vec<C64>> = basis.iter().map(|e| e.apply(&psi)).collect();
        for s in 0..ns {
            for o in 0..no {
                let v = measurement_vector(n, s, o);
                // u_a = ⟨π|E_a|ψ⟩, so Tr(Π E_a ρ E_b†) = u_a ū_b
                let u: Vec<C64> = e_psi.iter().map(|ep| v.iter().zip(ep).map(|(x, y)| x.conj() * y).sum()).collect();
                let row: Vec<f64> = herm
                    .iter()
                    .map(|&(p, q, kind)| {
                        let t = u[p] * u[q].conj();
                        match kind {
                            0 => t.re,
                            1 => 2.0 * t.re,
                            _ => -2.0 * t.im,
                        }
                    })
                    .collect();
                a.push(row);
            }
        }
    }
    let k = herm.len();
    let mut ata = vec![vec![0.0; k]; k];
    for row in &a {
        for i in 0..k {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..k {
                ata[i][j] += ri * row[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            ata[i][j] = ata[j][i];
        }
    }
    let chol = cholesky(&ata)?;
    Ok(Design { a, chol, herm_basis: herm, nb })
}

fn cholesky(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    let scale = (0..n).map(|i| m[i][i]).fold(0.0, f64::max);
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 1e-12 * scale {
                    return Err(Error::Singular(format!("pivot {i} is {s:.3e}")));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

fn design(n: usize) -> Result<&'static Design> {
    static ONE_QUBIT: OnceLock<std::result::Result<Design, String>> = OnceLock::new();
    static TWO_QUBIT: OnceLock<std::result::Result<Design, String>> = OnceLock::new();
    let cell = match n {
        1 => &ONE_QUBIT,
        2 => &TWO_QUBIT,
        _ => return Err(Error::Dimension(format!("{n}-qubit tomography is not supported"))),
    };
    cell.get_or_init(|| build_design(n).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::Singular(e.clone()))
}

/// Unconstrained linear least-squares χ from flattened outcome frequencies.
pub fn linear_inversion(n_qubits: usize, freqs: &[f64]) -> Result<ChiMatrix> {
    let d = design(n_qubits)?;
    if freqs.len() != d.a.len() {
        return Err(Error::Dimension(format!("expected {} frequencies, got {}", d.a.len(), freqs.len())));
    }
    let k = d.herm_basis.len();
    let mut atb = vec![0.0; k];
    for (row, &f) in d.a.iter().zip(freqs) {
        if f == 0.0 {
            continue;
        }
        for (acc, &r) in atb.iter_mut().zip(row) {
            *acc += r * f;
        }
    }
    let x = cholesky_solve(&d.chol, &atb);
    let mut chi = CMat::zeros(d.nb, d.nb);
    for (&(a, b, kind), &v) in d.herm_basis.iter().zip(&x) {
        match kind {
            0 => chi[(a, a)] = v.into(),
            1 => {
                chi[(a, b)] += v;
                chi[(b, a)] += v;
            }
            _ => {
                chi[(a, b)] += I * v;
                chi[(b, a)] -= I * v;
            }
        }
    }
    ChiMatrix::new(chi)
}

/// Clips negative eigenvalues at zero and rescales to unit trace.
pub fn project_cp(chi: &ChiMatrix) -> Result<ChiMatrix> {
    let es = eigh(&chi.mat)?;
    let clipped: Vec<f64> = es.values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let n = chi.dim_basis;
    let mat = CMat::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| es.vectors[(r, k)] * (clipped[k] / total) * es.vectors[(c, k)].conj())
            .sum()
    });
    ChiMatrix::new(mat.hermitian_part())
}

pub fn reconstruct_from_frequencies(n_qubits: usize, freqs: &[f64]) -> Result<ChiMatrix> {
    project_cp(&linear_inversion(n_qubits, freqs)?)
}

/// Linear inversion followed by the CP projection.
pub fn reconstruct_chi(data: &QptDataset) -> Result<ChiMatrix> {
    reconstruct_from_frequencies(data.n_qubits, &data.frequencies())
}

#[derive(Clone, Debug)]
pub struct FidelityReport {
    pub value: f64,
    pub chi_exp: ChiMatrix,
    pub chi_th: ChiMatrix,
}

/// Re Tr(χ_th† χ_exp) / √(Tr(χ_exp†χ_exp) Tr(χ_th†χ_th))
pub fn process_fidelity(exp: &ChiMatrix, th: &ChiMatrix) -> Result<FidelityReport> {
    Ok(FidelityReport { value: fidelity_value(exp, th)?, chi_exp: exp.clone(), chi_th: th.clone() })
}

pub fn fidelity_value(exp: &ChiMatrix, th: &ChiMatrix) -> Result<f64> {
    if exp.dim_basis != th.dim_basis {
        return Err(Error::Dimension(format!("χ sizes {} and {} differ", exp.dim_basis, th.dim_basis)));
    }
    let overlap = th.mat.hs_inner(&exp.mat);
    let ne = exp.mat.hs_inner(&exp.mat).re;
    let nt = th.mat.hs_inner(&th.mat).re;
    if ne <= 0.0 || nt <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let scale = (ne * nt).sqrt();
    if overlap.im.abs() > 1e-8 * scale.max(1.0) {
        return Err(Error::Verification(format!("fidelity overlap has imaginary part {:.3e}", overlap.im)));
    }
    Ok(overlap.re / scale)
}

fn poisson_draw<R: Rng>(rng: &mut R, mean: u64) -> u64 {
    if mean == 0 {
        return 0;
    }
    Poisson::new(mean as f64).expect("positive mean").sample(rng) as u64
}

/// Sample standard deviation of the fidelity against `reference` over Poisson re-draws of
/// every count.
pub fn poisson_uncertainty(data: &QptDataset, reference: &ChiMatrix, resamples: usize, seed: u64) -> Result<f64> {
    poisson_uncertainty_with(data, reference, resamples, seed, Executor::default())
}

pub fn poisson_uncertainty_with(
    data: &QptDataset,
    reference: &ChiMatrix,
    resamples: usize,
    seed: u64,
    exec: Executor,
) -> Result<f64> {
    if resamples < 2 {
        return Err(Error::OutOfRange("need at least two resamples".into()));
    }
    let base = derive_seed(seed, 0x9015_5011);
    let fids = exec.try_map(resamples, |r| {
        let mut rng = substream(base, r as u64);
        let counts = data
            .counts
            .iter()
            .map(|row| row.iter().map(|&c| poisson_draw(&mut rng, c)).collect())
            .collect();
        let ds = QptDataset { counts, ..data.clone() };
        fidelity_value(&reconstruct_chi(&ds)?, reference)
    })?;
    Ok(sample_std(&fids))
}

/// Sample standard deviation with the n − 1 denominator.
pub fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
