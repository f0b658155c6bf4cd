//! Ancilla-flagged depolarizing circuit: CNOT conjugation of E ⊗ 𝟙 into a two-qubit
//! operation F, the flagged output blocks, and the resulting estimator variances.
//!
//! Two-qubit operators are ordered probe ⊗ ancilla; every CNOT is probe-controlled.

use serde::{Deserialize, Serialize};

use crate::channels::{depolarizing, phase_unitary, KrausChannel, NoiseKind};
use crate::error::{check_unit, Error, Result};
use crate::linalg::{pauli_i, pauli_x, pauli_y, pauli_z, tensor, CMat, ONE};
use crate::qfi::closed_form_qfi;

#[derive(Clone, Debug)]
pub struct TwoQubitOperation {
    channel: KrausChannel,
}

impl TwoQubitOperation {
    pub fn new(label: impl Into<String>, kraus: Vec<CMat>) -> Result<Self> {
        let channel = KrausChannel::new(label, kraus)?;
        if channel.dim() != 4 {
            return Err(Error::Dimension(format!("two-qubit operation needs 4x4 Kraus operators, got {}", channel.dim())));
        }
        Ok(Self { channel })
    }

    pub fn label(&self) -> &str {
        self.channel.label()
    }

    pub fn kraus(&self) -> &[CMat] {
        self.channel.kraus()
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }
}

/// |0⟩⟨0| ⊗ 𝟙 + |1⟩⟨1| ⊗ X
pub fn cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// (1−3p/4)𝟙⊗𝟙, (p/4)(Z⊗𝟙, X⊗X, Y⊗X) as Kraus weights.
pub fn build_f(p: f64) -> Result<TwoQubitOperation> {
    check_unit("p", p)?;
    let w0 = (1.0 - 0.75 * p).sqrt();
    let w = (p / 4.0).sqrt();
    TwoQubitOperation::new(
        format!("F({p})"),
        vec![
            tensor(&pauli_i(), &pauli_i()).scale_real(w0),
            tensor(&pauli_z(), &pauli_i()).scale_real(w),
            tensor(&pauli_x(), &pauli_x()).scale_real(w),
            tensor(&pauli_y(), &pauli_x()).scale_real(w),
        ],
    )
}

/// CNOT ∘ (E ⊗ 𝟙) ∘ CNOT as a Kraus channel.
pub fn conjugated_depolarizing(p: f64) -> Result<KrausChannel> {
    let c = KrausChannel::unitary("CNOT", cnot())?;
    let inner = depolarizing(p)?.extend_with_ancilla().compose(&c)?;
    c.compose(&inner)
}

/// Max entrywise Choi difference between F and the CNOT-conjugated depolarizing channel.
pub fn conjugation_residual(p: f64) -> Result<f64> {
    let f = build_f(p)?;
    Ok(f.channel().choi().max_abs_diff(&conjugated_depolarizing(p)?.choi()))
}

#[derive(Clone, Debug)]
pub struct FlaggedReport {
    pub p: f64,
    pub phi: f64,
    /// Probe state with the ancilla in |0⟩ (unnormalized).
    pub block0: CMat,
    pub block1: CMat,
    pub weights: (f64, f64),
    pub residual0: f64,
    pub residual1: f64,
    /// (p/2)/(1 − p/2); zero at p = 0.
    pub q: f64,
    /// Distance of the normalized |0⟩ block from (1−q)U|+⟩⟨+|U† + (q/2)𝟙.
    pub conditional_residual: f64,
    pub off_diagonal: f64,
}

/// F ∘ (U_φ ⊗ 𝟙) on |+⟩|0⟩, split into ancilla blocks and checked against the closed forms.
pub fn verify_flagged_output(p: f64, phi: f64) -> Result<FlaggedReport> {
    let f = build_f(p)?;
    let plus = CMat::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
    let anc0 = CMat::diag_real(&[1.0, 0.0]);
    let u = phase_unitary(phi);
    let input = tensor(&u.sandwich(&plus), &anc0);
    let out = f.channel().apply_mat(&input)?;
    let block = |a: usize| CMat::from_fn(2, 2, |r, c| out[(2 * r + a, 2 * c + a)]);
    let block0 = block(0);
    let block1 = block(1);
    let off_diagonal = (0..2)
        .flat_map(|r| (0..2).map(move |c| (r, c)))
        .map(|(r, c)| out[(2 * r, 2 * c + 1)].norm().max(out[(2 * r + 1, 2 * c)].norm()))
        .fold(0.0, f64::max);

    let rotated = u.sandwich(&plus);
    let want0 = &rotated.scale_real(1.0 - p) + &CMat::identity(2).scale_real(p / 4.0);
    let want1 = CMat::identity(2).scale_real(p / 4.0);
    let w0 = block0.trace().re;
    let w1 = block1.trace().re;
    let q = if p > 0.0 { (p / 2.0) / (1.0 - p / 2.0) } else { 0.0 };
    let conditional = &rotated.scale_real(1.0 - q) + &CMat::identity(2).scale_real(q / 2.0);
    Ok(FlaggedReport {
        p,
        phi,
        residual0: block0.max_abs_diff(&want0),
        residual1: block1.max_abs_diff(&want1),
        conditional_residual: block0.scale_real(1.0 / w0).max_abs_diff(&conditional),
        block0,
        block1,
        weights: (w0, w1),
        q,
        off_diagonal,
    })
}

/// (assisted, bare) estimator variances ((1−p/2)/(1−p)², 1/(1−p)²).
pub fn flagged_variance(p: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("p = {p} must lie in [0, 1)")));
    }
    let x = (1.0 - p) * (1.0 - p);
    Ok(((1.0 - p / 2.0) / x, 1.0 / x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub p: f64,
    pub inverse_assisted_variance: f64,
    /// (1−p)²/(1−p/2)
    pub flagged_form: f64,
    /// 2(1−p)²/(2−p)
    pub qfi_form: f64,
    /// Variance from 1/(1−p/2) · 1/(1−q)².
    pub q_form_variance: f64,
    pub max_residual: f64,
}

/// Cross-checks the inverse flagged variance against the assisted depolarizing QFI.
pub fn variance_consistency_check(p: f64) -> Result<ConsistencyReport> {
    let (assisted, _) = flagged_variance(p)?;
    let inv = 1.0 / assisted;
    let flagged_form = (1.0 - p).powi(2) / (1.0 - p / 2.0);
    let qfi_form = closed_form_qfi(NoiseKind::Depolarizing, p, true)?;
    let q = (p / 2.0) / (1.0 - p / 2.0);
    let q_form_variance = 1.0 / (1.0 - p / 2.0) / (1.0 - q).powi(2);
    let max_residual = [(inv - flagged_form).abs(), (inv - qfi_form).abs(), (q_form_variance - assisted).abs() / assisted.max(1.0)]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(ConsistencyReport { p, inverse_assisted_variance: inv, flagged_form, qfi_form, q_form_variance, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn f_limits() {
        let f = build_f(0.0).unwrap();
        assert!(f.channel().choi().max_abs_diff(&KrausChannel::identity(4).choi()) < 1e-15);
        assert!(build_f(0.6).unwrap().channel().completeness_residual() < 1e-14);
        assert!(build_f(1.1).is_err());
        assert_eq!(build_f(0.3).unwrap().kraus().len(), 4);
    }

    #[test]
    fn cnot_conjugation_identity() {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            assert!(conjugation_residual(p).unwrap() <= 1e-12, "p = {p}");
        }
    }

    #[test]
    fn conjugation_is_not_trivially_equal() {
        // the plain extension differs from F, so the identity is non-trivial
        let plain = depolarizing(0.3).unwrap().extend_with_ancilla();
        assert!(plain.choi().max_abs_diff(&build_f(0.3).unwrap().channel().choi()) > 1e-3);
    }

    #[test]
    fn flagged_blocks() {
        let r = verify_flagged_output(0.0, 0.7).unwrap();
        assert!(r.block1.max_abs() < 1e-15);
        assert!(r.residual0 < 1e-15);
        assert_abs_diff_eq!(r.block0.trace().re, 1.0, epsilon = 1e-15);

        let r = verify_flagged_output(0.4, 0.3).unwrap();
        assert_abs_diff_eq!(r.weights.0, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(r.weights.1, 0.2, epsilon = 1e-12);
        assert!(r.residual0 <= 1e-12 && r.residual1 <= 1e-12);
        assert!(r.conditional_residual <= 1e-12);
        assert_abs_diff_eq!(r.q, 0.25, epsilon = 1e-15);
        assert!(r.off_diagonal <= 1e-15);

        for k in 0..8 {
            let r = verify_flagged_output(0.7, -1.0 + 0.3 * k as f64).unwrap();
            assert_abs_diff_eq!(r.weights.1, 0.35, epsilon = 1e-12);
        }
    }

    #[test]
    fn variances() {
        assert_eq!(flagged_variance(0.0).unwrap(), (1.0, 1.0));
        let (a, b) = flagged_variance(0.5).unwrap();
        assert_abs_diff_eq!(a, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 4.0, epsilon = 1e-15);
        for k in 1..100 {
            let (a, b) = flagged_variance(k as f64 / 100.0).unwrap();
            assert!(a < b);
        }
        assert!(flagged_variance(1.0).is_err());
    }

    #[test]
    fn consistency_with_assisted_qfi() {
        let r = variance_consistency_check(0.4).unwrap();
        assert_abs_diff_eq!(r.inverse_assisted_variance, 0.45, epsilon = 1e-12);
        assert_abs_diff_eq!(variance_consistency_check(0.0).unwrap().qfi_form, 1.0, epsilon = 1e-15);
        for k in 1..=9 {
            assert!(variance_consistency_check(k as f64 / 10.0).unwrap().max_residual <= 1e-12);
        }
    }
}
