use approx::assert_abs_diff_eq;
use qmetro::channels::{amplitude_damping, general_pauli, NoiseKind, PhaseChannelFamily};
use qmetro::linalg::DensityMatrix;
use qmetro::qfi::{
    channel_qfi_minimax, closed_form_qfi, cramer_rao, extended_channel_qfi_bound, family_sld_qfi, output_state, plus_state,
    qfi_from_matrix_elements, two_probe_assisted_sld, two_probe_bare_sld, two_probe_collective_ad_qfi, MatrixElementKind,
    MinimaxOptions,
};

fn family(kind: NoiseKind, x: f64) -> PhaseChannelFamily {
    PhaseChannelFamily::single(kind.channel(x).unwrap()).unwrap()
}

#[test]
fn sld_and_matrix_elements_match_closed_forms_on_grid() {
    let bell = DensityMatrix::maximally_entangled(2);
    for k in 0..20 {
        let x = 0.05 * k as f64;
        for (kind, single_kind, assisted_kind) in [
            (NoiseKind::AmplitudeDamping, MatrixElementKind::AdSingle, MatrixElementKind::AdAssisted),
            (NoiseKind::Depolarizing, MatrixElementKind::DepolSingle, MatrixElementKind::DepolAssisted),
        ] {
            let fam = family(kind, x);
            let bare = closed_form_qfi(kind, x, false).unwrap();
            let assisted = closed_form_qfi(kind, x, true).unwrap();
            assert_abs_diff_eq!(family_sld_qfi(&fam, &plus_state(), 0.0, false).unwrap(), bare, epsilon = 1e-9);
            assert_abs_diff_eq!(family_sld_qfi(&fam, &bell, 0.0, true).unwrap(), assisted, epsilon = 1e-9);
            let out = output_state(&fam, &plus_state(), 0.0, false).unwrap();
            assert_abs_diff_eq!(qfi_from_matrix_elements(&out, single_kind).unwrap(), bare, epsilon = 1e-12);
            let out = output_state(&fam, &bell, 0.0, true).unwrap();
            assert_abs_diff_eq!(qfi_from_matrix_elements(&out, assisted_kind).unwrap(), assisted, epsilon = 1e-12);
        }
    }
}

#[test]
fn minimax_matches_closed_forms_on_coarse_grid() {
    for x in [0.0, 0.3, 0.6, 0.9] {
        for kind in [NoiseKind::AmplitudeDamping, NoiseKind::Depolarizing] {
            let fam = family(kind, x);
            for assisted in [false, true] {
                let got = channel_qfi_minimax(&fam, assisted, 0.0).unwrap().value;
                assert_abs_diff_eq!(got, closed_form_qfi(kind, x, assisted).unwrap(), epsilon = 1e-4);
            }
        }
    }
}

#[test]
fn orthogonal_pauli_noise() {
    let fam = PhaseChannelFamily::single(general_pauli([0.5, 0.0, 0.5, 0.0]).unwrap()).unwrap();
    assert_abs_diff_eq!(channel_qfi_minimax(&fam, true, 0.0).unwrap().value, 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(extended_channel_qfi_bound(&fam, 0.0, &MinimaxOptions::default()).unwrap().value, 1.0, epsilon = 1e-4);
    // the plus-state output has no first-row coherence, so the matrix-element reading is zero
    let out = output_state(&fam, &plus_state(), 0.0, false).unwrap();
    assert_abs_diff_eq!(qfi_from_matrix_elements(&out, MatrixElementKind::DepolSingle).unwrap(), 0.0, epsilon = 1e-15);
}

#[test]
fn two_probe_values() {
    assert_eq!(two_probe_collective_ad_qfi(0.0, 0.0), 4.0);
    for k in 0..10 {
        let eta = 0.1 * k as f64;
        let u = (1.0 - eta).powi(2);
        assert_abs_diff_eq!(two_probe_assisted_sld(eta, 0.0).unwrap(), 8.0 * u / (1.0 + u), epsilon = 1e-9);
        assert_abs_diff_eq!(two_probe_collective_ad_qfi(eta, 0.0), 8.0 * u / (1.0 + u), epsilon = 1e-12);
        assert!(two_probe_bare_sld(eta, 0.0).unwrap() <= two_probe_assisted_sld(eta, 0.0).unwrap() + 1e-9);
    }
    // the oracle is phase independent while the printed expression is not
    assert_abs_diff_eq!(two_probe_assisted_sld(0.3, 0.2).unwrap(), two_probe_assisted_sld(0.3, 0.0).unwrap(), epsilon = 1e-9);
    assert!((two_probe_collective_ad_qfi(0.3, 0.2) - two_probe_collective_ad_qfi(0.3, 0.0)).abs() > 1e-3);
}

#[test]
fn cramer_rao_bound() {
    assert_abs_diff_eq!(cramer_rao(1.5, 1).unwrap(), 1.0 / 1.5f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(cramer_rao(1.0, 100).unwrap(), 0.1, epsilon = 1e-15);
    assert!(cramer_rao(0.0, 1).is_err());
    assert!(cramer_rao(1.0, 0).is_err());
}

#[test]
fn bare_optimum_reports_input_state() {
    let fam = PhaseChannelFamily::single(amplitude_damping(0.5).unwrap()).unwrap();
    let r = channel_qfi_minimax(&fam, false, 0.0).unwrap();
    let b = r.optimal_input.unwrap().bloch().unwrap();
    assert!(b[2].abs() < 1e-3 && (b[0].hypot(b[1]) - 1.0).abs() < 1e-6);
}
