use approx::assert_abs_diff_eq;
use qmetro::channels::{depolarizing, PhaseChannelFamily};
use qmetro::circuits::{conjugation_residual, flagged_variance, verify_flagged_output};
use qmetro::qfi::channel_qfi_minimax;

#[test]
fn inverse_flagged_variance_is_extended_channel_qfi() {
    for k in 0..10 {
        let p = k as f64 / 10.0;
        let fam = PhaseChannelFamily::single(depolarizing(p).unwrap()).unwrap();
        let j = channel_qfi_minimax(&fam, true, 0.0).unwrap().value;
        assert_abs_diff_eq!(1.0 / flagged_variance(p).unwrap().0, j, epsilon = 1e-4);
    }
}

#[test]
fn flag_weight_is_phase_independent() {
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        for phi in [-2.0, -0.3, 0.0, 0.9, 3.0] {
            let r = verify_flagged_output(p, phi).unwrap();
            assert_abs_diff_eq!(r.weights.1, p / 2.0, epsilon = 1e-12);
            assert!(r.residual0 <= 1e-12 && r.residual1 <= 1e-12);
        }
        assert!(conjugation_residual(p).unwrap() <= 1e-12);
    }
}
