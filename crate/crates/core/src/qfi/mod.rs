//! Quantum Fisher information: SLD formula on explicit states, minimax over Kraus
//! representations, closed forms and matrix-element formulas.

mod minimax;
mod nelder_mead;

pub use minimax::{
    channel_qfi_minimax, channel_qfi_minimax_with, extended_channel_qfi_bound, inner_minimum, inner_minimum_simplex, minimax_objective,
    spectral_objective, InnerMinimum, MinimaxOptions,
};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::channels::{amplitude_damping, GeneratorH, NoiseKind, PhaseChannelFamily};
use crate::error::{check_unit, Error, Result};
use crate::linalg::{eigh, CMat, DensityMatrix, ONE, ZERO};

/// λᵢ + λⱼ at or below this is treated as outside the support of ρ.
pub const SLD_SUPPORT_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QfiMethod {
    Sld,
    Minimax,
    ClosedForm,
    MatrixElement,
}

#[derive(Clone, Debug)]
pub struct QfiResult {
    pub value: f64,
    pub method: QfiMethod,
    pub optimal_input: Option<DensityMatrix>,
    pub optimal_h: Option<GeneratorH>,
}

impl QfiResult {
    pub fn new(value: f64, method: QfiMethod) -> Self {
        Self { value, method, optimal_input: None, optimal_h: None }
    }
}

/// Symmetric logarithmic derivative A with ∂ρ = (Aρ + ρA)/2 on the support of ρ.
#[derive(Clone, Debug)]
pub struct SldOperator {
    pub mat: CMat,
    pub support_cutoff: f64,
}

impl SldOperator {
    /// Frobenius norm of ∂ρ − (Aρ+ρA)/2 restricted to eigenpairs inside the support.
    pub fn residual(&self, rho: &DensityMatrix, drho: &CMat) -> Result<f64> {
        let es = eigh(rho.mat())?;
        let v = &es.vectors;
        let lhs = &(&v.dagger() * drho) * v;
        let a = &(&v.dagger() * &self.mat) * v;
        let n = es.values.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s = es.values[i] + es.values[j];
                if s > self.support_cutoff {
                    sum += (lhs[(i, j)] - a[(i, j)] * (s / 2.0)).norm_sqr();
                }
            }
        }
        Ok(sum.sqrt())
    }
}

fn check_input_dim(fam: &PhaseChannelFamily, rho_in: &DensityMatrix, extended: bool) -> Result<PhaseChannelFamily> {
    let fam = if extended { fam.extended() } else { fam.clone() };
    if rho_in.dim() != fam.dim() {
        return Err(Error::Dimension(format!(
            "input state has dimension {}, channel{} acts on {}",
            rho_in.dim(),
            if extended { " with ancilla" } else { "" },
            fam.dim()
        )));
    }
    Ok(fam)
}

/// ρ(φ) = Σᵢ Kᵢ(φ) ρ Kᵢ(φ)†
pub fn output_state(fam: &PhaseChannelFamily, rho_in: &DensityMatrix, phi: f64, extended: bool) -> Result<DensityMatrix> {
    let fam = check_input_dim(fam, rho_in, extended)?;
    fam.channel_at(phi).apply(rho_in)
}

/// ∂ρ/∂φ = Σᵢ (K̇ᵢ ρ Kᵢ† + Kᵢ ρ K̇ᵢ†)
pub fn state_derivative(fam: &PhaseChannelFamily, rho_in: &DensityMatrix, phi: f64, extended: bool) -> Result<CMat> {
    let fam = check_input_dim(fam, rho_in, extended)?;
    let ks = fam.kraus_at(phi);
    let dks = fam.dkraus_at(phi);
    let rho = rho_in.mat();
    let n = fam.dim();
    let mut out = CMat::zeros(n, n);
    for (k, dk) in ks.iter().zip(&dks) {
        let term = &(dk * rho) * &k.dagger();
        out = &out + &term;
        out = &out + &term.dagger();
    }
    Ok(out)
}

/// J = Σ_{λᵢ+λⱼ > cutoff} 2|⟨ψᵢ|∂ρ|ψⱼ⟩|²/(λᵢ+λⱼ), together with the SLD operator.
pub fn sld_qfi(rho: &DensityMatrix, drho: &CMat, cutoff: f64) -> Result<(QfiResult, SldOperator)> {
    if drho.rows() != rho.dim() || drho.cols() != rho.dim() {
        return Err(Error::Dimension(format!("drho is {}x{}, rho has dimension {}", drho.rows(), drho.cols(), rho.dim())));
    }
    let resid = drho.hermiticity_residual();
    if resid > 1e-10 * drho.max_abs().max(1.0) {
        return Err(Error::NotHermitian(resid));
    }
    if cutoff <= 0.0 {
        return Err(Error::OutOfRange(format!("support cutoff {cutoff} must be positive")));
    }
    let es = eigh(rho.mat())?;
    let v = &es.vectors;
    let d = &(&v.dagger() * drho) * v;
    let n = es.values.len();
    let mut a_eig = CMat::zeros(n, n);
    let mut value = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = es.values[i] + es.values[j];
            if s > cutoff {
                value += 2.0 * d[(i, j)].norm_sqr() / s;
                a_eig[(i, j)] = d[(i, j)] * (2.0 / s);
            }
        }
    }
    let sld = SldOperator { mat: (&(v * &a_eig) * &v.dagger()).hermitian_part(), support_cutoff: cutoff };
    Ok((QfiResult::new(value, QfiMethod::Sld), sld))
}

/// SLD QFI of the output of a phase family at φ.
pub fn family_sld_qfi(fam: &PhaseChannelFamily, rho_in: &DensityMatrix, phi: f64, extended: bool) -> Result<f64> {
    let rho = output_state(fam, rho_in, phi, extended)?;
    let drho = state_derivative(fam, rho_in, phi, extended)?;
    Ok(sld_qfi(&rho, &drho, SLD_SUPPORT_CUTOFF)?.0.value)
}

/// The closed forms for |+⟩ (bare) and maximally entangled (assisted) inputs:
/// AD 1−η and 2(1−η)/(2−η), depolarizing (1−p)² and 2(1−p)²/(2−p).
pub fn closed_form_qfi(kind: NoiseKind, param: f64, assisted: bool) -> Result<f64> {
    check_unit("noise parameter", param)?;
    let x = 1.0 - param;
    Ok(match (kind, assisted) {
        (NoiseKind::AmplitudeDamping, false) => x,
        (NoiseKind::AmplitudeDamping, true) => 2.0 * x / (2.0 - param),
        (NoiseKind::Depolarizing, false) => x * x,
        (NoiseKind::Depolarizing, true) => 2.0 * x * x / (2.0 - param),
    })
}

/// Printed four-qubit collective-damping QFI, evaluated literally including its φ dependence.
pub fn two_probe_collective_ad_qfi(eta: f64, phi: f64) -> f64 {
    let e = eta;
    let d = (e - 2.0) * e + 2.0;
    8.0 * (e - 1.0).powi(2) * (2.0 * (e - 1.0).powi(2) * (8.0 * phi).cos() + (e - 2.0) * e * d + 2.0) / d.powi(3)
}

/// Two probes and two ancillas, input (|0000⟩+|1111⟩)/√2, channel ((AD∘U_φ)⊗(AD∘U_φ))⊗𝟙.
pub fn two_probe_assisted_family(eta: f64) -> Result<(PhaseChannelFamily, DensityMatrix)> {
    let fam = PhaseChannelFamily::collective(&amplitude_damping(eta)?, 2)?.extended();
    let mut ket = vec![ZERO; 16];
    ket[0] = ONE;
    ket[15] = ONE;
    Ok((fam, DensityMatrix::pure(&ket)?))
}

/// Two probes in (|00⟩+|11⟩)/√2 under (AD∘U_φ)^⊗2.
pub fn two_probe_bare_family(eta: f64) -> Result<(PhaseChannelFamily, DensityMatrix)> {
    let fam = PhaseChannelFamily::collective(&amplitude_damping(eta)?, 2)?;
    let mut ket = vec![ZERO; 4];
    ket[0] = ONE;
    ket[3] = ONE;
    Ok((fam, DensityMatrix::pure(&ket)?))
}

/// SLD QFI of the 16-dimensional two-probe, two-ancilla output state.
pub fn two_probe_assisted_sld(eta: f64, phi: f64) -> Result<f64> {
    let (fam, rho) = two_probe_assisted_family(eta)?;
    family_sld_qfi(&fam, &rho, phi, false)
}

/// SLD QFI of the two-probe N00N output without ancillas.
pub fn two_probe_bare_sld(eta: f64, phi: f64) -> Result<f64> {
    let (fam, rho) = two_probe_bare_family(eta)?;
    family_sld_qfi(&fam, &rho, phi, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixElementKind {
    AdAssisted,
    AdSingle,
    DepolSingle,
    DepolAssisted,
}

/// Matrix-element QFI formulas, with 1-based indices ρ¹² = ρ[(0,1)] and so on:
/// single [2ρ¹²]²/(ρ¹¹+ρ²²); AD assisted [2ρ¹⁴]²/(ρ¹¹+ρ⁴⁴); depolarizing assisted adds
/// [2ρ²³]²/(ρ²²+ρ³³). Squares of complex entries are read as squared moduli and terms with a
/// vanishing denominator contribute nothing.
pub fn qfi_from_matrix_elements(rho: &DensityMatrix, kind: MatrixElementKind) -> Result<f64> {
    let want = match kind {
        MatrixElementKind::AdSingle | MatrixElementKind::DepolSingle => 2,
        MatrixElementKind::AdAssisted | MatrixElementKind::DepolAssisted => 4,
    };
    if rho.dim() != want {
        return Err(Error::Dimension(format!("{kind:?} needs a {want}-dimensional state, got {}", rho.dim())));
    }
    let m = rho.mat();
    let term = |i: usize, j: usize| {
        let den = (m[(i, i)] + m[(j, j)]).re;
        if den <= SLD_SUPPORT_CUTOFF {
            0.0
        } else {
            4.0 * m[(i, j)].norm_sqr() / den
        }
    };
    Ok(match kind {
        MatrixElementKind::AdSingle | MatrixElementKind::DepolSingle => term(0, 1),
        MatrixElementKind::AdAssisted => term(0, 3),
        MatrixElementKind::DepolAssisted => term(0, 3) + term(1, 2),
    })
}

/// Quantum Cramér-Rao bound 1/√(νJ).
pub fn cramer_rao(j: f64, nu: u64) -> Result<f64> {
    if !(j > 0.0) {
        return Err(Error::OutOfRange(format!("Fisher information {j} must be positive")));
    }
    if nu == 0 {
        return Err(Error::OutOfRange("need at least one repetition".into()));
    }
    Ok(1.0 / (nu as f64 * j).sqrt())
}

/// |+⟩⟨+|
pub fn plus_state() -> DensityMatrix {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DensityMatrix::pure(&[s, s]).expect("normalized")
}
