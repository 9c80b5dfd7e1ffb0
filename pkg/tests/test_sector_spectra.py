import numpy as np
import pytest

from anyonspectra.sector_spectra import (
    PAIR_BASIS,
    RelativeWindow,
    bloch_composite,
    dispersion_composite,
    dispersion_massive,
    essential_band,
    fiber_matrix,
    fiber_operator,
    full_spectrum,
    max_ipr,
    no_bound_state_check,
    one_particle_dispersion,
    outlier_energies,
)

W3 = np.exp(2j * np.pi / 3)
PHASES = [1.0, -1.0, 1j, W3]


def test_bloch_vanishes_at_dirac_point():
    assert np.max(np.abs(bloch_composite(W3, (np.pi / 4, np.pi / 4)))) < 1e-15


def test_bloch_trivial_phase_bands():
    k = (0.3, 1.1)
    vals = np.linalg.eigvalsh(bloch_composite(1.0, k))
    cx, cy = 2 * np.cos(2 * k[0]), 2 * np.cos(2 * k[1])
    expected = np.sort([cx + cy, cx - cy, -cx + cy, -cx - cy])
    assert np.max(np.abs(vals - expected)) < 1e-12


def test_bloch_k0_third_root_eigenvalues():
    vals = np.linalg.eigvalsh(bloch_composite(W3, (0.0, 0.0)))
    expected = np.array([-2 * np.sqrt(3), -2.0, 2.0, 2 * np.sqrt(3)])
    assert np.max(np.abs(vals - expected)) < 1e-12


def test_bloch_rejects_nonunimodular_phase():
    with pytest.raises(ValueError):
        bloch_composite(1.2, (0.0, 0.0))


@pytest.mark.parametrize("phase", PHASES)
def test_dispersion_matches_diagonalization(phase):
    ks = np.linspace(0, np.pi / 2, 21)
    for kx in ks:
        for ky in ks:
            d = dispersion_composite(phase, (kx, ky))
            e = np.linalg.eigvalsh(bloch_composite(phase, (kx, ky)))
            assert np.max(np.abs(d - e)) < 1e-10


def test_dispersion_symmetric_about_zero():
    for phase in PHASES:
        d = dispersion_composite(phase, (0.37, 0.92))
        assert np.max(np.abs(d + d[::-1])) < 1e-12


def test_dispersion_quarter_period_and_conjugation():
    k = (0.21, 0.55)
    for phase in PHASES:
        base = dispersion_composite(phase, k)
        shifted = dispersion_composite(phase, (k[0] + np.pi / 2, k[1]))
        assert np.max(np.abs(base - shifted)) < 1e-12
        conj = dispersion_composite(np.conj(phase), k)
        assert np.max(np.abs(base - conj)) < 1e-12


def test_dispersion_degenerate_sheets_phase_minus_one():
    ks = np.linspace(0, np.pi / 2, 17)
    for kx in ks:
        for ky in ks:
            d = dispersion_composite(-1.0, (kx, ky))
            assert abs(d[0] - d[1]) < 1e-12
            assert abs(d[2] - d[3]) < 1e-12


def test_dirac_cone_linear_vanishing():
    # bands vanish linearly at (pi/4, pi/4)
    direction = np.array([1.0, 0.7]) / np.hypot(1.0, 0.7)
    slopes = []
    for eps in (1e-3, 1e-4):
        k = np.array([np.pi / 4, np.pi / 4]) + eps * direction
        top = dispersion_composite(W3, tuple(k))[3]
        slopes.append(top / eps)
    assert slopes[0] > 1e-2
    assert abs(slopes[0] - slopes[1]) / slopes[0] < 1e-2


def test_massive_reduces_to_massless():
    k = (0.3, 0.8)
    assert np.max(np.abs(dispersion_massive(W3, k, 0.0)
                         - dispersion_composite(W3, k))) < 1e-12


def test_massive_hop_factor_at_quarter():
    m = 0.37
    c = np.exp(2j * np.pi / 4) + (1 + m) * np.exp(-2j * np.pi / 4)
    assert abs(abs(c) - m) < 1e-14


@pytest.mark.parametrize("mass", [0.1, 0.5])
def test_mass_gap_at_dirac_point(mass):
    bands = dispersion_massive(W3, (np.pi / 4, np.pi / 4), mass)
    assert abs((bands[2] - bands[1]) - 2 * mass) < 1e-12


def test_window_geometry():
    w = RelativeWindow(5)
    assert w.size == 100
    assert w.coords[0] == -9 and w.coords[-1] == 9
    for dx, dy in PAIR_BASIS:
        assert 0 <= w.index(dx, dy) < w.size
    with pytest.raises(ValueError):
        RelativeWindow(1)


def test_fiber_hermitian_and_free_band():
    w = RelativeWindow(8)
    mat = fiber_operator(1.0, (0.1, 0.4), 1.0, 0.0, w)
    assert np.max(np.abs(mat - mat.conj().T)) == 0.0
    vals = np.linalg.eigvalsh(mat)
    lo, hi = essential_band(1.0, (0.1, 0.4))
    assert vals[0] > lo - 1e-12 and vals[-1] < hi + 1e-12


def test_fiber_pure_pair_block_is_bloch():
    w = RelativeWindow(4)
    k = (0.2, 0.9)
    mat = fiber_operator(W3, k, 0.0, 1.0, w)
    sites = [w.index(dx, dy) for dx, dy in PAIR_BASIS]
    block = mat[np.ix_(sites, sites)]
    assert np.max(np.abs(block - bloch_composite(W3, k))) < 1e-14
    mask = np.ones(w.size, dtype=bool)
    mask[sites] = False
    assert np.max(np.abs(mat[mask])) == 0.0
    assert np.max(np.abs(mat[:, mask])) == 0.0


def test_fiber_flux_tube_placement():
    w = RelativeWindow(4)
    mat = fiber_operator(W3, (0.0, 0.0), 1.0, 0.0, w)
    # the -1 -> +1 d_x hop is phased at negative d_y, plain at positive
    amp_low = mat[w.index(1, -3), w.index(-1, -3)]
    amp_high = mat[w.index(1, 3), w.index(-1, 3)]
    assert abs(amp_low - 2 * W3) < 1e-14
    assert abs(amp_high - 2.0) < 1e-14


def test_fiber_spectrum_invariant_under_phase_conjugation():
    w = RelativeWindow(6)
    k = (0.15, 0.6)
    a = np.linalg.eigvalsh(fiber_operator(W3, k, 1.0, 0.7, w))
    b = np.linalg.eigvalsh(fiber_operator(np.conj(W3), k, 1.0, 0.7, w))
    assert np.max(np.abs(a - b)) < 1e-10


def test_essential_band_values():
    assert essential_band(1.0, (0.0, 0.0)) == (-8.0, 8.0)
    lo, hi = essential_band(1.0, (np.pi / 4, np.pi / 4))
    assert abs(lo) < 1e-12 and abs(hi) < 1e-12


def test_band_fills_with_window_growth():
    k = (0.0, np.pi / 8)
    gaps = []
    for L in (6, 12, 24):
        vals = full_spectrum(W3, k, 1.0, 0.0, RelativeWindow(L))
        gaps.append(np.max(np.diff(vals)))
    assert gaps[2] < gaps[1] < gaps[0]


def test_no_bound_state_check_small():
    report = no_bound_state_check(W3, (0.0, np.pi / 8), 1.0, windows=(6, 10))
    assert report.no_bound_states
    assert report.ipr_decreasing


def test_no_bound_state_check_rejects_dirac_point():
    with pytest.raises(ValueError):
        no_bound_state_check(W3, (np.pi / 4, 3 * np.pi / 4), 1.0)


def test_outliers_appear_with_pair_coupling():
    vals, vecs = outlier_energies(W3, (0.0, np.pi / 4), 1.0, 1.0,
                                  RelativeWindow(14))
    assert len(vals) == 4
    assert np.max(np.abs(np.abs(vals) - 5.0)) < 1e-6
    assert vecs.shape[1] == 4


def test_max_ipr_definition():
    vec = np.zeros(10)
    vec[3] = 1.0
    spread = np.full(10, 1 / np.sqrt(10))
    assert max_ipr(np.column_stack([vec, spread])) == pytest.approx(1.0)


def test_one_particle_dispersion_values():
    assert one_particle_dispersion(0.7, (0.0, 0.0)) == pytest.approx(2.8)
    assert one_particle_dispersion(0.7, (np.pi, np.pi)) == pytest.approx(-2.8)


def test_one_particle_band_against_circulant():
    # oracle: diagonalize the nearest-neighbour hop on a 32x32 torus
    n = 32
    lam = 0.6
    idx = lambda x, y: (y % n) * n + (x % n)
    mat = np.zeros((n * n, n * n))
    for x in range(n):
        for y in range(n):
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                mat[idx(x, y), idx(x + dx, y + dy)] += lam
    vals = np.sort(np.linalg.eigvalsh(mat))
    ks = 2 * np.pi * np.arange(n) / n
    band = np.sort([one_particle_dispersion(lam, (kx, ky))
                    for kx in ks for ky in ks])
    assert np.max(np.abs(vals - band)) < 1e-10


def test_no_bound_state_trivial_phase_control():
    report = no_bound_state_check(1.0, (0.0, np.pi / 8), 1.0, windows=(6, 10))
    assert report.no_bound_states
    assert report.ipr_decreasing


def test_free_density_of_states_convergence():
    # Kolmogorov distance between the truncated flux-tube spectrum and the
    # free two-particle density of states decreases with the window
    k = (0.0, np.pi / 8)
    lam = 1.0
    cx, cy = 2 * np.cos(2 * k[0]), 2 * np.cos(2 * k[1])
    a = np.linspace(0, np.pi, 1201)
    free = (2 * lam * cx * np.cos(a)[:, None]
            + 2 * lam * cy * np.cos(a)[None, :]).ravel()
    free.sort()

    def ks_distance(vals):
        vals = np.sort(vals)
        grid = np.linspace(free[0], free[-1], 2001)
        emp = np.searchsorted(vals, grid) / len(vals)
        ref = np.searchsorted(free, grid) / len(free)
        return float(np.max(np.abs(emp - ref)))

    dists = [ks_distance(full_spectrum(W3, k, lam, 0.0, RelativeWindow(L)))
             for L in (8, 16, 32)]
    assert dists[2] < dists[1] < dists[0]
