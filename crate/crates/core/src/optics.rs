//! Jones-calculus simulation of linear-optical networks on polarization ⊗ lateral ⊗
//! longitudinal modes.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::channels::{validate_probabilities, KrausChannel};
use crate::error::{check_unit, Error, Result};
use crate::linalg::{eigh, CMat, DensityMatrix, I, ONE, ZERO};

/// Basis index = (lateral · 2 + pol) · n_longitudinal + longitudinal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSpace {
    pub n_lateral: usize,
    pub n_longitudinal: usize,
}

impl ModeSpace {
    pub const N_POL: usize = 2;

    pub fn new(n_lateral: usize, n_longitudinal: usize) -> Result<Self> {
        let s = Self { n_lateral, n_longitudinal };
        if !(1..=4).contains(&n_lateral) || !(1..=2).contains(&n_longitudinal) || s.dim() > 16 {
            return Err(Error::Dimension(format!(
                "mode space {n_lateral} lateral x {n_longitudinal} longitudinal is outside the supported range"
            )));
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.n_lateral * Self::N_POL * self.n_longitudinal
    }

    /// Dimension of the polarization ⊗ longitudinal factor carried by each lateral mode.
    pub fn local_dim(&self) -> usize {
        Self::N_POL * self.n_longitudinal
    }

    pub fn index(&self, lateral: usize, pol: usize, longitudinal: usize) -> usize {
        (lateral * Self::N_POL + pol) * self.n_longitudinal + longitudinal
    }

    pub fn lateral_of(&self, index: usize) -> usize {
        index / self.local_dim()
    }

    fn split(&self, index: usize) -> (usize, usize, usize) {
        let l = self.n_longitudinal;
        (index / (Self::N_POL * l), (index / l) % Self::N_POL, index % l)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpticalElement {
    /// Half-wave plate at `angle` radians on the listed lateral modes.
    Hwp { angle: f64, modes: Vec<usize> },
    Qwp { angle: f64, modes: Vec<usize> },
    /// Beam displacer: V passes, H moves `shift` lateral modes (cyclically).
    Bd { shift: isize },
    /// 50:50 splitter between two lateral modes.
    Nbs { modes: [usize; 2] },
    /// Erases coherence between different blocks of lateral modes.
    Dephase { blocks: Vec<Vec<usize>> },
    /// diag(1, e^{iφ}) on polarization in the listed lateral modes.
    Phase { angle: f64, modes: Vec<usize> },
    /// Keeps only the listed lateral modes.
    Postselect { modes: Vec<usize> },
}

impl OpticalElement {
    pub fn is_unitary(&self) -> bool {
        !matches!(self, OpticalElement::Dephase { .. } | OpticalElement::Postselect { .. })
    }

    fn check_modes(&self, space: &ModeSpace) -> Result<()> {
        let modes: Vec<usize> = match self {
            OpticalElement::Hwp { modes, .. } | OpticalElement::Qwp { modes, .. } | OpticalElement::Phase { modes, .. } => {
                modes.clone()
            }
            OpticalElement::Postselect { modes } => modes.clone(),
            OpticalElement::Nbs { modes } => {
                if modes[0] == modes[1] {
                    return Err(Error::Dimension("beam splitter needs two distinct modes".into()));
                }
                modes.to_vec()
            }
            OpticalElement::Dephase { blocks } => blocks.iter().flatten().copied().collect(),
            OpticalElement::Bd { .. } => vec![],
        };
        if let Some(m) = modes.iter().find(|&&m| m >= space.n_lateral) {
            return Err(Error::Dimension(format!("lateral mode {m} outside 0..{}", space.n_lateral)));
        }
        Ok(())
    }

    /// Full-space matrix of a unitary element.
    fn unitary(&self, space: &ModeSpace) -> Option<CMat> {
        let n = space.dim();
        let nl = space.n_longitudinal;
        let pol_block = |jones: &CMat, modes: &[usize]| {
            let mut u = CMat::identity(n);
            for &m in modes {
                for l in 0..nl {
                    for a in 0..2 {
                        for b in 0..2 {
                            u[(space.index(m, a, l), space.index(m, b, l))] = jones[(a, b)];
                        }
                    }
                }
            }
            u
        };
        match self {
            OpticalElement::Hwp { angle, modes } => Some(pol_block(&jones_hwp(*angle), modes)),
            OpticalElement::Qwp { angle, modes } => Some(pol_block(&jones_qwp(*angle), modes)),
            OpticalElement::Phase { angle, modes } => {
                Some(pol_block(&CMat::diag(&[ONE, C64::from_polar(1.0, *angle)]), modes))
            }
            OpticalElement::Bd { shift } => {
                let mut u = CMat::zeros(n, n);
                let nlat = space.n_lateral as isize;
                for i in 0..n {
                    let (lat, pol, l) = space.split(i);
                    let dest = if pol == 0 { ((lat as isize + shift).rem_euclid(nlat)) as usize } else { lat };
                    u[(space.index(dest, pol, l), i)] = ONE;
                }
                Some(u)
            }
            OpticalElement::Nbs { modes: [a, b] } => {
                let mut u = CMat::identity(n);
                let s = C64::new(FRAC_1_SQRT_2, 0.0);
                for pol in 0..2 {
                    for l in 0..nl {
                        let ia = space.index(*a, pol, l);
                        let ib = space.index(*b, pol, l);
                        u[(ia, ia)] = s;
                        u[(ia, ib)] = s;
                        u[(ib, ia)] = s;
                        u[(ib, ib)] = -s;
                    }
                }
                Some(u)
            }
            OpticalElement::Dephase { .. } | OpticalElement::Postselect { .. } => None,
        }
    }

    /// Linear action on a full-space operator.
    fn act(&self, space: &ModeSpace, rho: &CMat) -> CMat {
        if let Some(u) = self.unitary(space) {
            return u.sandwich(rho);
        }
        let n = space.dim();
        match self {
            OpticalElement::Dephase { blocks } => {
                let block_of = |lat: usize| blocks.iter().position(|b| b.contains(&lat)).map_or(usize::MAX - lat, |k| k);
                CMat::from_fn(n, n, |r, c| {
                    if block_of(space.lateral_of(r)) == block_of(space.lateral_of(c)) {
                        rho[(r, c)]
                    } else {
                        ZERO
                    }
                })
            }
            OpticalElement::Postselect { modes } => CMat::from_fn(n, n, |r, c| {
                if modes.contains(&space.lateral_of(r)) && modes.contains(&space.lateral_of(c)) {
                    rho[(r, c)]
                } else {
                    ZERO
                }
            }),
            _ => unreachable!("unitary elements handled above"),
        }
    }
}

/// [[cos2θ, sin2θ], [sin2θ, −cos2θ]]
pub fn jones_hwp(theta: f64) -> CMat {
    let (s, c) = (2.0 * theta).sin_cos();
    CMat::from_real(2, 2, &[c, s, s, -c])
}

/// R(θ)·diag(1, i)·R(−θ)
pub fn jones_qwp(theta: f64) -> CMat {
    let (s, c) = theta.sin_cos();
    let r = CMat::from_real(2, 2, &[c, -s, s, c]);
    &(&r * &CMat::diag(&[ONE, I])) * &r.transpose()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalNetwork {
    pub space: ModeSpace,
    pub elements: Vec<OpticalElement>,
}

#[derive(Clone, Debug)]
pub struct NetworkOutput {
    pub state: DensityMatrix,
    pub success_probability: f64,
}

impl OpticalNetwork {
    pub fn new(space: ModeSpace, elements: Vec<OpticalElement>) -> Result<Self> {
        for e in &elements {
            e.check_modes(&space)?;
        }
        Ok(Self { space, elements })
    }

    pub fn empty(space: ModeSpace) -> Self {
        Self { space, elements: vec![] }
    }

    pub fn without_dephasing(&self) -> Self {
        Self {
            space: self.space,
            elements: self.elements.iter().filter(|e| !matches!(e, OpticalElement::Dephase { .. })).cloned().collect(),
        }
    }

    /// Product of the unitary elements preceding the first DEPHASE or POSTSELECT.
    pub fn unitary_part(&self) -> CMat {
        let mut u = CMat::identity(self.space.dim());
        for e in &self.elements {
            match e.unitary(&self.space) {
                Some(m) => u = &m * &u,
                None => break,
            }
        }
        u
    }

    /// Full unitary when every element is unitary.
    pub fn as_unitary(&self) -> Result<CMat> {
        if self.elements.iter().any(|e| !e.is_unitary()) {
            return Err(Error::Verification("network contains non-unitary elements".into()));
        }
        Ok(self.unitary_part())
    }

    pub fn n_beam_displacers(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, OpticalElement::Bd { .. })).count()
    }

    /// Linear, unnormalized propagation of a full-space operator.
    pub fn propagate(&self, rho: &CMat) -> CMat {
        self.elements.iter().fold(rho.clone(), |acc, e| e.act(&self.space, &acc))
    }

    /// Places a pol ⊗ longitudinal operator in lateral mode 0.
    pub fn embed(&self, local: &CMat) -> Result<CMat> {
        let k = self.space.local_dim();
        if local.rows() != k || local.cols() != k {
            return Err(Error::Dimension(format!("input must be {k}x{k}, got {}x{}", local.rows(), local.cols())));
        }
        let mut full = CMat::zeros(self.space.dim(), self.space.dim());
        for r in 0..k {
            for c in 0..k {
                full[(r, c)] = local[(r, c)];
            }
        }
        Ok(full)
    }

    /// Trace over lateral modes.
    pub fn reduce(&self, full: &CMat) -> CMat {
        let k = self.space.local_dim();
        let mut out = CMat::zeros(k, k);
        for lat in 0..self.space.n_lateral {
            for r in 0..k {
                for c in 0..k {
                    out[(r, c)] += full[(lat * k + r, lat * k + c)];
                }
            }
        }
        out
    }

    /// Linear map from input operators to unnormalized reduced outputs.
    pub fn apply_linear(&self, local: &CMat) -> Result<CMat> {
        Ok(self.reduce(&self.propagate(&self.embed(local)?)))
    }
}

/// Runs the network on a pol ⊗ longitudinal state and renormalizes after postselection.
pub fn apply_network(net: &OpticalNetwork, rho_in: &DensityMatrix) -> Result<NetworkOutput> {
    let out = net.apply_linear(rho_in.mat())?;
    let p = out.trace().re;
    if p <= 1e-14 {
        return Err(Error::ZeroPostselection);
    }
    Ok(NetworkOutput { state: DensityMatrix::from_trusted(out.scale_real(1.0 / p)), success_probability: p })
}

/// Choi matrix of the network followed by eigen-decomposition into Kraus operators.
/// Returns the channel normalized by the success probability, and that probability.
pub fn extract_channel(net: &OpticalNetwork) -> Result<(KrausChannel, f64)> {
    let d = net.space.local_dim();
    let mut choi = CMat::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            let mut e = CMat::zeros(d, d);
            e[(a, b)] = ONE;
            let img = net.apply_linear(&e)?;
            for r in 0..d {
                for c in 0..d {
                    choi[(a * d + r, b * d + c)] = img[(r, c)];
                }
            }
        }
    }
    let success = (choi.trace().re / d as f64).max(0.0);
    if success <= 1e-14 {
        return Err(Error::ZeroPostselection);
    }
    let choi = choi.scale_real(1.0 / success).hermitian_part();
    let es = eigh(&choi)?;
    let scale = es.values.last().copied().unwrap_or(1.0).max(1.0);
    if es.values[0] < -1e-9 * scale {
        return Err(Error::NotCompletelyPositive(es.values[0]));
    }
    let kraus: Vec<CMat> = (0..d * d)
        .rev()
        .filter(|&k| es.values[k] > 1e-12 * scale)
        .map(|k| {
            let s = es.values[k].sqrt();
            CMat::from_fn(d, d, |r, a| es.vectors[(a * d + r, k)] * s)
        })
        .collect();
    let ch = KrausChannel::new_unchecked("network", kraus)?;
    let resid = ch.completeness_residual();
    if resid > 1e-8 {
        return Err(Error::Verification(format!(
            "extracted channel is not trace preserving after normalization (residual {resid:.3e})"
        )));
    }
    Ok((ch, success))
}

/// Angle with cos2θ_A = −√(1−η), sin2θ_A = √η.
pub fn ad_angle(eta: f64) -> f64 {
    0.5 * eta.sqrt().atan2(-(1.0 - eta).sqrt())
}

/// Amplitude-damping network: split by a beam displacer, route the V part through H_A,
/// recombine, dephase the two branches and merge them on a 50:50 splitter with
/// postselection on one output port.
pub fn build_ad_network(eta: f64) -> Result<OpticalNetwork> {
    check_unit("eta", eta)?;
    use OpticalElement::*;
    OpticalNetwork::new(
        ModeSpace::new(4, 1)?,
        vec![
            Bd { shift: 1 },
            Hwp { angle: FRAC_PI_4, modes: vec![1] },
            Hwp { angle: ad_angle(eta), modes: vec![0] },
            Hwp { angle: FRAC_PI_4, modes: vec![0] },
            Bd { shift: 1 },
            Hwp { angle: FRAC_PI_4, modes: vec![0, 1] },
            Dephase { blocks: vec![vec![0], vec![1], vec![2], vec![3]] },
            Nbs { modes: [0, 1] },
            Postselect { modes: vec![0] },
        ],
    )
}

/// θ₁ … θ₆ of the general-Pauli network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliAngles(pub [f64; 6]);

fn neg(x: f64) -> f64 {
    if x > 0.0 { -x } else { 0.0 }
}

/// Closed-form solution of the signed angle relations, successive inversion on principal
/// atan2 branches. Angles lie in (−π/2, π/2].
pub fn solve_pauli_angles(p: [f64; 4]) -> Result<PauliAngles> {
    validate_probabilities(&p)?;
    let s = |x: f64| x.max(0.0).sqrt();
    let [p0, p1, p2, p3] = p;
    let angles = [
        0.5 * s(p1).atan2(s(1.0 - p1)),
        0.5 * s(p2).atan2(s(1.0 - p2)),
        0.5 * s(p0).atan2(s(p2 + p3)),
        0.5 * neg(s(p3)).atan2(s(p0 + p1)),
        0.5 * s(p3).atan2(s(p2)),
        0.5 * s(p0).atan2(neg(s(p1))),
    ];
    let sol = PauliAngles(angles);
    let worst = pauli_angle_residuals(&sol, p).into_iter().fold(0.0, f64::max);
    if worst > 1e-10 {
        return Err(Error::Verification(format!("angle relations violated by {worst:.3e}")));
    }
    Ok(sol)
}

/// Residuals of the eight signed relations, in the order
/// √p₀ = c₁s₃, √p₀ = c₂c₄s₆, √p₁ = s₁, √p₁ = −c₂c₄c₆, √p₂ = c₁c₃c₅, √p₂ = s₂,
/// √p₃ = c₁c₃s₅, √p₃ = −c₂s₄ (cₖ = cos2θₖ, sₖ = sin2θₖ).
pub fn pauli_angle_residuals(a: &PauliAngles, p: [f64; 4]) -> [f64; 8] {
    let c = |k: usize| (2.0 * a.0[k - 1]).cos();
    let sn = |k: usize| (2.0 * a.0[k - 1]).sin();
    let r = |x: f64| x.max(0.0).sqrt();
    [
        (r(p[0]) - c(1) * sn(3)).abs(),
        (r(p[0]) - c(2) * c(4) * sn(6)).abs(),
        (r(p[1]) - sn(1)).abs(),
        (r(p[1]) + c(2) * c(4) * c(6)).abs(),
        (r(p[2]) - c(1) * c(3) * c(5)).abs(),
        (r(p[2]) - sn(2)).abs(),
        (r(p[3]) - c(1) * c(3) * sn(5)).abs(),
        (r(p[3]) + c(2) * sn(4)).abs(),
    ]
}

/// Space-multiplexed general-Pauli network with five beam displacers. The four lateral
/// branches carry X, Y, 𝟙 and Z, are dephased, merged pairwise on 50:50 splitters and
/// postselected on one port of each.
pub fn build_pauli_network(p: [f64; 4]) -> Result<OpticalNetwork> {
    let PauliAngles([t1, t2, t3, t4, t5, t6]) = solve_pauli_angles(p)?;
    use OpticalElement::*;
    OpticalNetwork::new(
        ModeSpace::new(4, 1)?,
        vec![
            Bd { shift: 1 },
            Hwp { angle: t1, modes: vec![1] },
            Hwp { angle: t2, modes: vec![0] },
            Bd { shift: 1 },
            Hwp { angle: t3, modes: vec![2] },
            Hwp { angle: t4, modes: vec![0] },
            Hwp { angle: FRAC_PI_4, modes: vec![1] },
            Bd { shift: 1 },
            Hwp { angle: t5, modes: vec![3] },
            Hwp { angle: t6, modes: vec![0] },
            Bd { shift: 1 },
            Bd { shift: 1 },
            Hwp { angle: FRAC_PI_4, modes: vec![0, 1, 2, 3] },
            Hwp { angle: 0.0, modes: vec![1, 3] },
            Dephase { blocks: vec![vec![0], vec![1], vec![2], vec![3]] },
            Nbs { modes: [0, 1] },
            Nbs { modes: [2, 3] },
            Postselect { modes: vec![0, 2] },
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, depolarizing, general_pauli};
    use crate::linalg::pauli_x;
    use crate::tomography::{chi_theory, fidelity_value};
    use approx::assert_abs_diff_eq;

    fn fidelity(a: &KrausChannel, b: &KrausChannel) -> f64 {
        fidelity_value(&chi_theory(a).unwrap(), &chi_theory(b).unwrap()).unwrap()
    }

    #[test]
    fn hwp_examples() {
        assert!(jones_hwp(0.0).max_abs_diff(&CMat::diag_real(&[1.0, -1.0])) < 1e-15);
        assert!(jones_hwp(FRAC_PI_4).max_abs_diff(&pauli_x()) < 1e-15);
        let s = 0.5f64.sqrt();
        let want = CMat::from_real(2, 2, &[-s, s, s, s]);
        assert!(jones_hwp(ad_angle(0.5)).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn qwp_anchors() {
        let q = jones_qwp(0.0);
        let q2 = &q * &q;
        // equal to HWP(0) up to a global phase of 1
        assert!(q2.max_abs_diff(&jones_hwp(0.0)) < 1e-15);
        let s = FRAC_1_SQRT_2;
        let map = &jones_hwp(std::f64::consts::PI / 8.0) * &q;
        let out = map.apply(&[C64::new(s, 0.0), -I * s]);
        assert_abs_diff_eq!(out[0].norm(), 1.0, epsilon = 1e-15);
        let out = map.apply(&[C64::new(s, 0.0), I * s]);
        assert_abs_diff_eq!(out[1].norm(), 1.0, epsilon = 1e-15);
        for k in 0..16 {
            let u = jones_qwp(k as f64 * 0.4);
            assert!((&u.dagger() * &u).max_abs_diff(&CMat::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn empty_network_is_identity() {
        let net = OpticalNetwork::empty(ModeSpace::new(2, 1).unwrap());
        let rho = DensityMatrix::from_bloch([0.1, 0.2, 0.3]).unwrap();
        let out = apply_network(&net, &rho).unwrap();
        assert!(out.state.mat().max_abs_diff(rho.mat()) < 1e-15);
        assert_eq!(out.success_probability, 1.0);
    }

    #[test]
    fn dephasing_two_branches() {
        use OpticalElement::*;
        let net = OpticalNetwork::new(
            ModeSpace::new(2, 1).unwrap(),
            vec![Hwp { angle: std::f64::consts::PI / 8.0, modes: vec![0] }, Bd { shift: 1 }, Dephase { blocks: vec![vec![0], vec![1]] }],
        )
        .unwrap();
        let h = DensityMatrix::pure(&[ONE, ZERO]).unwrap();
        let full = net.propagate(&net.embed(h.mat()).unwrap());
        // 50/50 over the two lateral modes with no coherence left between them
        let k = net.space.local_dim();
        let w0: f64 = (0..k).map(|i| full[(i, i)].re).sum();
        assert_abs_diff_eq!(w0, 0.5, epsilon = 1e-15);
        for r in 0..k {
            for c in k..2 * k {
                assert_eq!(full[(r, c)], ZERO);
            }
        }
    }

    #[test]
    fn ad_network_limits() {
        let (ch, s) = extract_channel(&build_ad_network(0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-14);
        assert!(fidelity(&ch, &KrausChannel::identity(2)) > 1.0 - 1e-12);

        let one = DensityMatrix::pure(&[ZERO, ONE]).unwrap();
        let out = apply_network(&build_ad_network(1.0).unwrap(), &one).unwrap();
        assert!(out.state.mat().max_abs_diff(&CMat::diag_real(&[1.0, 0.0])) < 1e-14);

        let (ch, _) = extract_channel(&build_ad_network(0.3).unwrap()).unwrap();
        assert!(fidelity(&ch, &amplitude_damping(0.3).unwrap()) > 1.0 - 1e-12);
    }

    #[test]
    fn ad_network_is_unitary_before_dephasing() {
        let net = build_ad_network(0.4).unwrap();
        let u = net.unitary_part();
        assert!((&u.dagger() * &u).max_abs_diff(&CMat::identity(net.space.dim())) < 1e-12);
        assert!(net.as_unitary().is_err());
    }

    #[test]
    fn angle_examples() {
        let a = solve_pauli_angles([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(a.0[0], 0.0);
        assert_abs_diff_eq!(a.0[2], FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!((2.0 * a.0[5]).sin(), 1.0, epsilon = 1e-15);

        let a = solve_pauli_angles([0.25; 4]).unwrap();
        assert_abs_diff_eq!(a.0[0], std::f64::consts::PI / 12.0, epsilon = 1e-15);
        assert!(pauli_angle_residuals(&a, [0.25; 4]).iter().all(|&r| r <= 1e-10));
        assert!(solve_pauli_angles([0.5, 0.6, 0.0, 0.0]).is_err());
    }

    #[test]
    fn pauli_network_channels() {
        let p = 0.4;
        let (ch, s) = extract_channel(&build_pauli_network([1.0 - 3.0 * p / 4.0, 0.1, 0.1, 0.1]).unwrap()).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-14);
        assert!(fidelity(&ch, &depolarizing(p).unwrap()) > 1.0 - 1e-12);

        for probs in [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.5, 0.0, 0.5, 0.0], [0.4, 0.2, 0.2, 0.2], [0.0, 0.0, 0.0, 1.0]] {
            let net = build_pauli_network(probs).unwrap();
            assert_eq!(net.n_beam_displacers(), 5);
            let (ch, _) = extract_channel(&net).unwrap();
            assert!(fidelity(&ch, &general_pauli(probs).unwrap()) > 1.0 - 1e-12, "{probs:?}");
        }
    }

    #[test]
    fn bd_is_permutation() {
        let space = ModeSpace::new(4, 2).unwrap();
        let u = OpticalElement::Bd { shift: 1 }.unitary(&space).unwrap();
        for r in 0..space.dim() {
            let ones = (0..space.dim()).filter(|&c| u[(r, c)] == ONE).count();
            assert_eq!(ones, 1);
        }
        assert!(u.max_abs_diff(&CMat::identity(space.dim())) > 0.5);
        assert!((&u * &u).max_abs_diff(&CMat::identity(space.dim())) > 0.5);
    }

    #[test]
    fn json_round_trip() {
        let net = build_pauli_network([0.4, 0.3, 0.2, 0.1]).unwrap();
        let s = serde_json::to_string(&net).unwrap();
        assert!(s.contains("\"kind\":\"HWP\""));
        assert_eq!(serde_json::from_str::<OpticalNetwork>(&s).unwrap(), net);
    }

    #[test]
    fn mode_checks() {
        let bad = OpticalNetwork::new(ModeSpace::new(2, 1).unwrap(), vec![OpticalElement::Postselect { modes: vec![3] }]);
        assert!(bad.is_err());
        assert!(ModeSpace::new(5, 1).is_err());
    }
}
