//! Kraus channels and the φ-parameterized families Λ_φ = E∘U_φ.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::linalg::{eigh, paulis, tensor, CMat, DensityMatrix, I, ONE, ZERO};

pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Operator-sum representation Σᵢ Kᵢ ρ Kᵢ†.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    label: String,
    dim: usize,
    kraus: Vec<CMat>,
}

impl KrausChannel {
    /// Checks squareness, common dimension and Σ K†K = 𝟙.
    pub fn new(label: impl Into<String>, kraus: Vec<CMat>) -> Result<Self> {
        let ch = Self::new_unchecked(label, kraus)?;
        let resid = ch.completeness_residual();
        if resid > COMPLETENESS_TOL {
            return Err(Error::Verification(format!(
                "Kraus completeness residual {resid:.3e} for {}",
                ch.label
            )));
        }
        Ok(ch)
    }

    /// Shape checks only; for trace-decreasing pieces such as postselected branches.
    pub fn new_unchecked(label: impl Into<String>, kraus: Vec<CMat>) -> Result<Self> {
        let label = label.into();
        let first = kraus
            .first()
            .ok_or_else(|| Error::Dimension(format!("channel {label} has no Kraus operators")))?;
        let dim = first.rows();
        if kraus.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::Dimension(format!("Kraus operators of {label} must all be {dim}x{dim}")));
        }
        Ok(Self { label, dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self { label: "identity".into(), dim, kraus: vec![CMat::identity(dim)] }
    }

    /// Conjugation by a single unitary.
    pub fn unitary(label: impl Into<String>, u: CMat) -> Result<Self> {
        Self::new(label, vec![u])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// max |Σ K†K − 𝟙|
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum = &sum + &(&k.dagger() * k);
        }
        sum.max_abs_diff(&CMat::identity(self.dim))
    }

    /// Linear action on an arbitrary operator.
    pub fn apply_mat(&self, m: &CMat) -> Result<CMat> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::Dimension(format!(
                "channel {} acts on dimension {}, got {}x{}",
                self.label,
                self.dim,
                m.rows(),
                m.cols()
            )));
        }
        let mut out = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &k.sandwich(m);
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(self.apply_mat(rho.mat())?))
    }

    /// Kᵢ ⊗ 𝟙 on a same-size ancilla.
    pub fn extend_with_ancilla(&self) -> Self {
        self.extend_with(self.dim)
    }

    pub fn extend_with(&self, ancilla_dim: usize) -> Self {
        let id = CMat::identity(ancilla_dim);
        Self {
            label: format!("{}⊗𝟙", self.label),
            dim: self.dim * ancilla_dim,
            kraus: self.kraus.iter().map(|k| tensor(k, &id)).collect(),
        }
    }

    /// All n-fold tensor products of the Kraus operators.
    pub fn collective(&self, n: usize) -> Self {
        assert!(n >= 1, "collective needs n ≥ 1");
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        out.label = format!("{}^⊗{n}", self.label);
        out
    }

    /// Parallel composition self ⊗ other.
    pub fn tensor(&self, other: &Self) -> Self {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| tensor(a, b)))
            .collect();
        Self {
            label: format!("{}⊗{}", self.label, other.label),
            dim: self.dim * other.dim,
            kraus,
        }
    }

    /// Sequential composition: `self` after `first`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.dim != first.dim {
            return Err(Error::Dimension(format!("cannot compose dimensions {} and {}", self.dim, first.dim)));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a * b))
            .collect();
        Ok(Self { label: format!("{}∘{}", self.label, first.label), dim: self.dim, kraus })
    }

    /// Choi matrix Σ_{ab} |a⟩⟨b| ⊗ E(|a⟩⟨b|), input factor first.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        let mut out = CMat::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(a, b)] = ONE;
                let img = self.apply_mat(&e).expect("basis operator matches channel dimension");
                for r in 0..d {
                    for c in 0..d {
                        out[(a * d + r, b * d + c)] = img[(r, c)];
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            label: self.label.clone(),
            dim: self.dim,
            kraus: self
                .kraus
                .iter()
                .map(|k| k.as_slice().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_json(js: &ChannelJson) -> Result<Self> {
        let kraus = js
            .kraus
            .iter()
            .map(|entries| {
                let data = entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
                CMat::from_vec(js.dim, js.dim, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(js.label.clone(), kraus)
    }
}

/// Interchange form: each Kraus operator is a row-major list of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub label: String,
    pub dim: usize,
    pub kraus: Vec<Vec<[f64; 2]>>,
}

/// diag(1, e^{iφ})
pub fn phase_unitary(phi: f64) -> CMat {
    CMat::diag(&[ONE, C64::from_polar(1.0, phi)])
}

/// diag(e^{i nₖ φ}) for a diagonal generator n.
pub fn diagonal_phase_unitary(generator: &[f64], phi: f64) -> CMat {
    CMat::diag(&generator.iter().map(|&n| C64::from_polar(1.0, n * phi)).collect::<Vec<_>>())
}

pub fn amplitude_damping(eta: f64) -> Result<KrausChannel> {
    check_unit("eta", eta)?;
    let a0 = CMat::diag_real(&[1.0, (1.0 - eta).sqrt()]);
    let a1 = CMat::from_real(2, 2, &[0.0, eta.sqrt(), 0.0, 0.0]);
    KrausChannel::new(format!("AD({eta})"), vec![a0, a1])
}

/// The two noise models with closed-form results throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    AmplitudeDamping,
    Depolarizing,
}

impl NoiseKind {
    pub fn channel(self, param: f64) -> Result<KrausChannel> {
        match self {
            NoiseKind::AmplitudeDamping => amplitude_damping(param),
            NoiseKind::Depolarizing => depolarizing(param),
        }
    }
}

const PROB_SUM_TOL: f64 = 1e-12;

pub fn validate_probabilities(p: &[f64; 4]) -> Result<()> {
    if p.iter().any(|&x| !x.is_finite() || !(0.0..=1.0).contains(&x)) {
        return Err(Error::InvalidProbabilities(format!("{p:?} has entries outside [0, 1]")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidProbabilities(format!("{p:?} sums to {sum}")));
    }
    Ok(())
}

/// Kraus operators √pᵢ Ξᵢ with Ξ = (𝟙, X, Y, Z).
pub fn general_pauli(p: [f64; 4]) -> Result<KrausChannel> {
    validate_probabilities(&p)?;
    let kraus = paulis().iter().zip(p).map(|(s, pi)| s.scale_real(pi.sqrt())).collect();
    KrausChannel::new(format!("Pauli({},{},{},{})", p[0], p[1], p[2], p[3]), kraus)
}

pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    check_unit("p", p)?;
    let q = p / 4.0;
    let mut ch = general_pauli([1.0 - 3.0 * q, q, q, q])?;
    ch.label = format!("DEPOL({p})");
    Ok(ch)
}

/// Hermitian m×m matrix h with a bijective m²-real parameterization:
/// m diagonal entries, then (re, im) of each upper off-diagonal entry in row order.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorH {
    h: CMat,
    params: Vec<f64>,
}

impl GeneratorH {
    pub fn zero(m: usize) -> Self {
        Self { h: CMat::zeros(m, m), params: vec![0.0; m * m] }
    }

    pub fn from_params(m: usize, params: &[f64]) -> Result<Self> {
        if params.len() != m * m {
            return Err(Error::Dimension(format!("GeneratorH of size {m} needs {} params, got {}", m * m, params.len())));
        }
        let mut h = CMat::zeros(m, m);
        for i in 0..m {
            h[(i, i)] = C64::new(params[i], 0.0);
        }
        let mut k = m;
        for i in 0..m {
            for j in (i + 1)..m {
                let z = C64::new(params[k], params[k + 1]);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
                k += 2;
            }
        }
        Ok(Self { h, params: params.to_vec() })
    }

    pub fn from_matrix(h: CMat) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::Dimension("GeneratorH must be square".into()));
        }
        let resid = h.hermiticity_residual();
        if resid > 1e-12 {
            return Err(Error::NotHermitian(resid));
        }
        let m = h.rows();
        let mut params = Vec::with_capacity(m * m);
        for i in 0..m {
            params.push(h[(i, i)].re);
        }
        for i in 0..m {
            for j in (i + 1)..m {
                params.push(h[(i, j)].re);
                params.push(h[(i, j)].im);
            }
        }
        Self::from_params(m, &params)
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn mat(&self) -> &CMat {
        &self.h
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// e^{−i h t}
    pub fn unitary(&self, t: f64) -> CMat {
        let es = eigh(&self.h).expect("GeneratorH is Hermitian by construction");
        let m = self.dim();
        CMat::from_fn(m, m, |r, c| {
            (0..m)
                .map(|k| es.vectors[(r, k)] * C64::from_polar(1.0, -es.values[k] * t) * es.vectors[(c, k)].conj())
                .sum()
        })
    }
}

/// Λ_φ = E∘U_φ with U_φ generated by a diagonal operator, optionally followed by an
/// untouched ancilla factor.
#[derive(Clone, Debug)]
pub struct PhaseChannelFamily {
    noise: KrausChannel,
    generator: Vec<f64>,
    ancilla_dim: usize,
    pub phase_point: f64,
}

impl PhaseChannelFamily {
    /// Single qubit probe with U_φ = diag(1, e^{iφ}).
    pub fn single(noise: KrausChannel) -> Result<Self> {
        Self::with_generator(noise, vec![0.0, 1.0])
    }

    /// n probes each picking up U_φ, with the noise acting on every probe.
    pub fn collective(noise: &KrausChannel, n: usize) -> Result<Self> {
        if noise.dim() != 2 {
            return Err(Error::Dimension("collective family needs a qubit channel".into()));
        }
        let generator = (0..1usize << n).map(|k| k.count_ones() as f64).collect();
        Self::with_generator(noise.collective(n), generator)
    }

    pub fn with_generator(noise: KrausChannel, generator: Vec<f64>) -> Result<Self> {
        if generator.len() != noise.dim() {
            return Err(Error::Dimension(format!(
                "generator length {} differs from channel dimension {}",
                generator.len(),
                noise.dim()
            )));
        }
        Ok(Self { noise, generator, ancilla_dim: 1, phase_point: 0.0 })
    }

    /// Same family acting as Λ_φ ⊗ 𝟙 on a probe-sized ancilla.
    pub fn extended(&self) -> Self {
        Self { ancilla_dim: self.noise.dim(), ..self.clone() }
    }

    /// Same family with the ancilla factor removed.
    pub fn probe_only(&self) -> Self {
        Self { ancilla_dim: 1, ..self.clone() }
    }

    pub fn at(mut self, phi: f64) -> Self {
        self.phase_point = phi;
        self
    }

    pub fn noise(&self) -> &KrausChannel {
        &self.noise
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    pub fn probe_dim(&self) -> usize {
        self.noise.dim()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn is_extended(&self) -> bool {
        self.ancilla_dim > 1
    }

    pub fn dim(&self) -> usize {
        self.noise.dim() * self.ancilla_dim
    }

    pub fn num_kraus(&self) -> usize {
        self.noise.len()
    }

    fn lift(&self, k: CMat) -> CMat {
        if self.ancilla_dim == 1 {
            k
        } else {
            tensor(&k, &CMat::identity(self.ancilla_dim))
        }
    }

    /// Kᵢ(φ) = Kᵢ·U_φ (⊗ 𝟙).
    pub fn kraus_at(&self, phi: f64) -> Vec<CMat> {
        let u = diagonal_phase_unitary(&self.generator, phi);
        self.noise.kraus().iter().map(|k| self.lift(k * &u)).collect()
    }

    /// K̇ᵢ(φ) = Kᵢ·(dU_φ/dφ) (⊗ 𝟙).
    pub fn dkraus_at(&self, phi: f64) -> Vec<CMat> {
        let du = CMat::diag(
            &self.generator.iter().map(|&n| I * n * C64::from_polar(1.0, n * phi)).collect::<Vec<_>>(),
        );
        self.noise.kraus().iter().map(|k| self.lift(k * &du)).collect()
    }

    pub fn channel_at(&self, phi: f64) -> KrausChannel {
        KrausChannel {
            label: format!("{}∘U({phi})", self.noise.label()),
            dim: self.dim(),
            kraus: self.kraus_at(phi),
        }
    }

    /// Kraus set Σⱼ uᵢⱼ(φ) Kⱼ(φ) with u(φ) = e^{−ih(φ−φ₀)}.
    pub fn rotated_kraus_at(&self, h: &GeneratorH, phi: f64, phi0: f64) -> Result<Vec<CMat>> {
        let m = self.num_kraus();
        if h.dim() != m {
            return Err(Error::Dimension(format!("h is {}x{}, family has {m} Kraus operators", h.dim(), h.dim())));
        }
        let u = h.unitary(phi - phi0);
        let ks = self.kraus_at(phi);
        Ok((0..m)
            .map(|i| {
                let mut acc = CMat::zeros(self.dim(), self.dim());
                for (j, kj) in ks.iter().enumerate() {
                    if u[(i, j)] != ZERO {
                        acc = &acc + &kj.scale(u[(i, j)]);
                    }
                }
                acc
            })
            .collect())
    }
}

/// K̃̇ᵢ(φ₀) = K̇ᵢ(φ₀) − i Σⱼ hᵢⱼ Kⱼ(φ₀).
pub fn rotate_kraus(fam: &PhaseChannelFamily, h: &GeneratorH, phi0: f64) -> Result<Vec<CMat>> {
    let m = fam.num_kraus();
    if h.dim() != m {
        return Err(Error::Dimension(format!("h is {}x{}, family has {m} Kraus operators", h.dim(), h.dim())));
    }
    let ks = fam.kraus_at(phi0);
    let dks = fam.dkraus_at(phi0);
    Ok(dks
        .into_iter()
        .enumerate()
        .map(|(i, dk)| {
            let mut acc = dk;
            for (j, kj) in ks.iter().enumerate() {
                let hij = h.mat()[(i, j)];
                if hij != ZERO {
                    acc = &acc - &kj.scale(I * hij);
                }
            }
            acc
        })
        .collect())
}
