import numpy as np
import pytest

from anyonspectra.bound_states import (
    bound_state_energies,
    convergence_certificate,
    defect_amplitude,
    delta_matrix,
    gap,
    ky_line_energies,
    tail_ratio,
    transfer_matrix,
)
from anyonspectra.sector_spectra import RelativeWindow, outlier_energies

W3 = np.exp(2j * np.pi / 3)


def test_defect_amplitude_table():
    r = 0.8
    assert defect_amplitude(-3, W3, r) == pytest.approx(W3)
    assert defect_amplitude(-1, W3, r) == pytest.approx(W3 * (1 + r))
    assert defect_amplitude(1, W3, r) == pytest.approx(1 + r)
    assert defect_amplitude(3, W3, r) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        defect_amplitude(0, W3, r)


def test_delta_matrix_free_case():
    vals = np.linalg.eigvalsh(delta_matrix(3, 1.0, 0.0, 60))
    assert vals[0] > -2.0 and vals[-1] < 2.0


def test_delta_matrix_defect_modulus():
    assert abs(defect_amplitude(-1, W3, 1.0)) == pytest.approx(2.0)


def test_delta_matrix_bound_eigenvalue():
    vals = np.linalg.eigvalsh(delta_matrix(1, 1.0, 1.0, 200))
    assert abs(vals[-1] - 2.5) < 1e-10
    assert abs(vals[0] + 2.5) < 1e-10


def test_delta_matrix_rejects_small():
    with pytest.raises(ValueError):
        delta_matrix(1, 1.0, 0.0, 3)


def test_transfer_matrix_values():
    tm = transfer_matrix(2.0)
    tp, tm_ = tm.multipliers
    assert tp == pytest.approx(1.0) and tm_ == pytest.approx(1.0)
    tp, tm_ = transfer_matrix(2.5).multipliers
    assert tp == pytest.approx(2.0) and tm_ == pytest.approx(0.5)
    tp, tm_ = transfer_matrix(1.3).multipliers
    assert abs(abs(tp) - 1.0) < 1e-14 and abs(tp * tm_ - 1.0) < 1e-14
    v_p, v_m = transfer_matrix(2.5).eigenvectors
    T = transfer_matrix(2.5).matrix
    assert np.allclose(T @ v_p, 2.0 * v_p)


def test_bound_state_energies_kx_line():
    res = bound_state_energies(1.0, 1.0, 0.0, W3)
    assert res.energies == pytest.approx([-5.0, -5.0, 5.0, 5.0])
    assert res.B == pytest.approx(2.0)
    assert res.localization_rate == pytest.approx(0.5)


def test_bound_state_empty_cases():
    assert not bound_state_energies(1.0, 0.0, 0.0, W3).exists
    assert not bound_state_energies(1.0, -1.0, 0.0, W3).exists
    with pytest.raises(ValueError):
        bound_state_energies(0.0, 1.0, 0.0, W3)
    with pytest.raises(ValueError):
        bound_state_energies(1.0, 1.0, np.pi / 4, W3)


def test_bound_state_invariances():
    base = bound_state_energies(1.0, 1.0, 0.1, W3).energies
    conj = bound_state_energies(1.0, 1.0, 0.1, np.conj(W3)).energies
    assert base == pytest.approx(conj)
    # rho/lam -> -2 - rho/lam keeps B
    mirrored = bound_state_energies(1.0, -3.0, 0.1, W3).energies
    assert base == pytest.approx(mirrored)


def test_gap_values():
    assert gap(1.0, 1.0, 0.0) == pytest.approx(1.0)
    assert gap(1.0, 1.0, np.pi / 4) == pytest.approx(0.0, abs=1e-15)
    assert gap(2.0, 2.0, 0.1) == pytest.approx(2 * gap(1.0, 1.0, 0.1))
    with pytest.raises(ValueError):
        gap(1.0, 0.0, 0.0)


def test_ky_line_energies():
    res = ky_line_energies(1.0, 1.0, 0.0)
    assert res.energies == pytest.approx([-5.0, 5.0])
    assert not ky_line_energies(1.0, 0.0, 0.0).exists
    assert ky_line_energies(1.0, 1.0, np.pi / 4).energies \
        == pytest.approx([0.0, 0.0], abs=1e-15)
    with pytest.raises(ValueError):
        ky_line_energies(0.0, 1.0, 0.0)


def test_full_fiber_outlier_counts_on_both_lines():
    # four outliers with multiplicity on each analytic line: the kx line
    # binds in the transverse channels j = +-1, the ky line in d_x = +-1
    window = RelativeWindow(16)
    vals_kx, _ = outlier_energies(W3, (0.0, np.pi / 4), 1.0, 1.0, window)
    assert len(vals_kx) == 4
    vals_ky, _ = outlier_energies(W3, (np.pi / 4, 0.0), 1.0, 1.0, window)
    assert len(vals_ky) == 4
    reduced = ky_line_energies(1.0, 1.0, 0.0).energies
    expected = np.sort(np.concatenate([reduced, reduced]))
    assert np.max(np.abs(vals_ky - expected)) < 1e-8


def test_no_outliers_when_criterion_fails():
    window = RelativeWindow(12)
    vals, _ = outlier_energies(W3, (0.0, np.pi / 4), 1.0, 0.0, window)
    assert len(vals) == 0


def test_tail_ratio_matches_localization_rate():
    window = RelativeWindow(16)
    vals, vecs = outlier_energies(W3, (0.0, np.pi / 4), 1.0, 1.0, window)
    ratio = tail_ratio(vecs[:, -1], window, axis=0)
    assert abs(ratio - 0.5) < 1e-3


def test_convergence_certificate_doubling():
    report = convergence_certificate(1.0, 1.0, 0.0, W3, L=8, tol=1e-8)
    assert report["converged"]
    assert report["B"] == pytest.approx(2.0)
    small = np.max(np.abs(np.array(report["numeric_L8"])
                          - np.array(report["analytic"])))
    assert report["max_error"] <= small + 1e-12
