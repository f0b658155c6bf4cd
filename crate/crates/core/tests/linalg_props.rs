use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qmetro::linalg::{eigh, partial_trace, tensor, CMat, DensityMatrix};
use qmetro::Complex64;

fn cmat(n: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| CMat::from_vec(n, n, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn hermitian(n: usize) -> impl Strategy<Value = CMat> {
    cmat(n).prop_map(|m| m.hermitian_part())
}

fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    cmat(n).prop_map(move |a| {
        let g = &a * &a.dagger();
        let t = g.trace().re.max(1e-12);
        DensityMatrix::with_tolerance(g.scale_real(1.0 / t).hermitian_part(), 1e-12, 1e-12, -1e-10).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_reconstructs(m in (1usize..=8).prop_flat_map(hermitian)) {
        let es = eigh(&m).unwrap();
        prop_assert!(es.reconstruct().max_abs_diff(&m) <= 1e-10);
        let v = &es.vectors;
        prop_assert!((&v.dagger() * v).max_abs_diff(&CMat::identity(m.rows())) <= 1e-10);
        prop_assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn partial_trace_of_product(a in density(2), b in density(3)) {
        let ab = tensor(a.mat(), b.mat());
        prop_assert!(partial_trace(&ab, &[2, 3], &[0]).unwrap().max_abs_diff(a.mat()) <= 1e-12);
        prop_assert!(partial_trace(&ab, &[2, 3], &[1]).unwrap().max_abs_diff(b.mat()) <= 1e-12);
    }

    #[test]
    fn tensor_associative(a in cmat(2), b in cmat(2), c in cmat(3)) {
        let left = tensor(&tensor(&a, &b), &c);
        let right = tensor(&a, &tensor(&b, &c));
        prop_assert!(left.max_abs_diff(&right) <= 1e-14);
    }

    #[test]
    fn mixed_product(a in cmat(2), b in cmat(2), c in cmat(2), d in cmat(2)) {
        let lhs = &tensor(&a, &b) * &tensor(&c, &d);
        let rhs = tensor(&(&a * &c), &(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn density_validation_accepts_generated_states(rho in density(4)) {
        assert_abs_diff_eq!(rho.mat().trace().re, 1.0, epsilon = 1e-12);
        prop_assert!(rho.purity() <= 1.0 + 1e-12);
    }
}

#[test]
fn rejects_invalid_states() {
    assert!(DensityMatrix::new(CMat::diag_real(&[0.7, 0.7])).is_err());
    assert!(DensityMatrix::new(CMat::diag_real(&[1.2, -0.2])).is_err());
    let mut m = CMat::diag_real(&[0.5, 0.5]);
    m[(0, 1)] = Complex64::new(0.1, 0.0);
    assert!(DensityMatrix::new(m).is_err());
}
