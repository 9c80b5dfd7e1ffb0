"""Spectral analysis of the charge-flux pair sector.

After separating the center of mass at momentum k, the pair dynamics acts
on the relative coordinate d = (f - v)/2, a point with odd integer
components.  Three layers are implemented:

* the exact 4x4 Bloch matrix of the tightly bound pair (pair hopping
  only), its closed-form band dispersion, and the gapped dispersion of the
  duality-broken model;
* the truncated fiber operator combining independent charge/flux hopping
  (strength lam, a magnetic flux tube threaded at the origin) with the
  pair hopping (strength rho) supported on the four innermost sites;
* diagnostics certifying the absence or presence of bound states outside
  the essential band [-R, R], R = 4*lam*(|cos 2kx| + |cos 2ky|).

The flux tube places the phase chi(g) on the d_x hop -1 <-> +1 whenever
d_y < 0; gauge-equivalent placements change nothing in the spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "PAIR_BASIS",
    "RelativeWindow",
    "bloch_composite",
    "dispersion_composite",
    "dispersion_massive",
    "fiber_operator",
    "fiber_matrix",
    "essential_band",
    "full_spectrum",
    "outlier_energies",
    "max_ipr",
    "no_bound_state_check",
    "one_particle_dispersion",
]

# basis order of the innermost relative sites (d_x, d_y)
PAIR_BASIS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _check_phase(phase):
    phase = complex(phase)
    if abs(abs(phase) - 1.0) > 1e-12:
        raise ValueError(f"phase must be unimodular, got |{phase}|")
    return phase


def bloch_composite(phase, k) -> np.ndarray:
    """Exact 4x4 Bloch matrix of the bound pair on the basis PAIR_BASIS.

    Hops of amplitude 2cos(2ky) connect sites differing in d_y, hops of
    2cos(2kx) connect sites differing in d_x; the d_x hop on the lower row
    (d_y = -1) carries the braiding phase chi(g).
    """
    phase = _check_phase(phase)
    kx, ky = k
    cx, cy = 2 * np.cos(2 * kx), 2 * np.cos(2 * ky)
    return np.array(
        [
            [0, cy, cx, 0],
            [cy, 0, 0, phase * cx],
            [cx, 0, 0, cy],
            [0, np.conj(phase) * cx, cy, 0],
        ],
        dtype=complex,
    )


def dispersion_composite(phase, k) -> np.ndarray:
    """The four pair bands, ascending:

        E = +-2 sqrt(cos^2 2kx + cos^2 2ky +- |cos 2kx cos 2ky| sqrt(2 + 2 Re chi(g)))

    Exhibits a Dirac cone at (pi/4, pi/4) for generic phase; for phase 1
    it degenerates to +-2cos(2kx) +- 2cos(2ky).
    """
    phase = _check_phase(phase)
    kx, ky = np.asarray(k[0], dtype=float), np.asarray(k[1], dtype=float)
    cx, cy = np.abs(np.cos(2 * kx)), np.abs(np.cos(2 * ky))
    q = np.sqrt(2 + 2 * phase.real)
    # (cx - cy)^2 + (2 -+ q) cx cy == cx^2 + cy^2 -+ q cx cy, without the
    # cancellation that would spoil the near-degenerate sheets
    inner = np.stack(
        [(cx - cy) ** 2 + (2 - q) * cx * cy,
         (cx - cy) ** 2 + (2 + q) * cx * cy],
        axis=-1,
    )
    pos = 2 * np.sqrt(inner)
    bands = np.concatenate([-pos[..., ::-1], pos], axis=-1)
    return np.sort(bands, axis=-1)


def dispersion_massive(phase, k, mass) -> np.ndarray:
    """Pair bands of the duality-broken model, ascending.

    The flux-moving half of the pair hopping is weighted by (1 + mass),
    turning the hop factors 2cos(2s) into c(s) = e^{2is} + (1+mass)e^{-2is}
    and opening a gap at the Dirac point; for phase exp(2*pi*i/3) the gap
    equals 2*mass exactly.
    """
    phase = _check_phase(phase)
    if mass < 0:
        raise ValueError("mass must be >= 0")
    kx, ky = np.asarray(k[0], dtype=float), np.asarray(k[1], dtype=float)
    cx = np.abs(np.exp(2j * kx) + (1 + mass) * np.exp(-2j * kx))
    cy = np.abs(np.exp(2j * ky) + (1 + mass) * np.exp(-2j * ky))
    q = np.sqrt(2 + 2 * phase.real)
    inner = np.stack(
        [(cx - cy) ** 2 + (2 - q) * cx * cy,
         (cx - cy) ** 2 + (2 + q) * cx * cy],
        axis=-1,
    )
    pos = np.sqrt(inner)
    bands = np.concatenate([-pos[..., ::-1], pos], axis=-1)
    return np.sort(bands, axis=-1)


@dataclass(frozen=True)
class RelativeWindow:
    """Square window of odd relative coordinates |d| <= 2L-1 (4L^2 sites)."""

    L: int

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("window needs L >= 2")

    @property
    def coords(self) -> np.ndarray:
        return np.arange(-(2 * self.L - 1), 2 * self.L, 2)

    @property
    def size(self) -> int:
        return 4 * self.L**2

    def index(self, dx, dy) -> int:
        n = 2 * self.L
        ix = (dx + 2 * self.L - 1) // 2
        iy = (dy + 2 * self.L - 1) // 2
        return int(ix) * n + int(iy)


def fiber_matrix(phase, k, lam, rho, window: RelativeWindow) -> sp.csr_matrix:
    """Sparse truncated fiber operator at momentum k (open boundary).

    lam scales the free relative hopping (+-2 in each coordinate, with the
    flux-tube phase on the -1 <-> +1 d_x hop at d_y < 0); rho embeds the
    4x4 pair block on the innermost sites.
    """
    phase = _check_phase(phase)
    kx, ky = k
    cx, cy = 2 * np.cos(2 * kx), 2 * np.cos(2 * ky)
    odd = window.coords
    n = len(odd)
    rows, cols, vals = [], [], []

    def add(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)
        rows.append(j)
        cols.append(i)
        vals.append(np.conj(v))

    if lam:
        for ix, dx in enumerate(odd):
            for iy, dy in enumerate(odd):
                here = ix * n + iy
                if dx + 2 <= odd[-1]:
                    amp = lam * cx
                    if dx == -1 and dy < 0:
                        amp = amp * phase
                    add((ix + 1) * n + iy, here, amp)
                if dy + 2 <= odd[-1]:
                    add(ix * n + (iy + 1), here, lam * cy)
    if rho:
        block = rho * bloch_composite(phase, k)
        sites = [window.index(dx, dy) for dx, dy in PAIR_BASIS]
        for a in range(4):
            for b in range(4):
                if block[a, b] != 0:
                    rows.append(sites[a])
                    cols.append(sites[b])
                    vals.append(block[a, b])
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(window.size, window.size))
    mat.sum_duplicates()
    return mat


def fiber_operator(phase, k, lam, rho, window: RelativeWindow) -> np.ndarray:
    """Dense Hermitian fiber operator (see fiber_matrix)."""
    return fiber_matrix(phase, k, lam, rho, window).toarray()


def fold_to_quarter(s) -> float:
    """Distance from s to the nearest pi/4 + (pi/2) Z (the degenerate set)."""
    m = (s - np.pi / 4) % (np.pi / 2)
    return float(min(m, np.pi / 2 - m))


def _at_dirac_point(k, tol=1e-12) -> bool:
    return fold_to_quarter(k[0]) < tol and fold_to_quarter(k[1]) < tol


def essential_band(lam, k) -> tuple:
    """The essential spectrum [-R, R], R = 4 lam (|cos 2kx| + |cos 2ky|);
    independent of the pair coupling rho (a finite-rank perturbation)."""
    kx, ky = k
    r = 4 * lam * (abs(np.cos(2 * kx)) + abs(np.cos(2 * ky)))
    return (-r, r)


def full_spectrum(phase, k, lam, rho, window, eigenvectors=False):
    """All eigenvalues (and optionally eigenvectors) of the truncated fiber."""
    mat = fiber_matrix(phase, k, lam, rho, window).toarray()
    if eigenvectors:
        return sla.eigh(mat, driver="evd")
    return sla.eigh(mat, driver="evd", eigvals_only=True)


def outlier_energies(phase, k, lam, rho, window, tol=1e-6, k_each=8):
    """Eigenvalues outside the essential band by more than tol.

    Uses sparse extremal eigensolves from both spectral ends (dense for
    small windows), so the count is exact as long as fewer than k_each
    outliers hide at either end.  Returns (energies ascending,
    eigenvectors as columns).
    """
    _, r = essential_band(lam, k)
    if window.size <= 4 * k_each:
        vals, vecs = full_spectrum(phase, k, lam, rho, window,
                                   eigenvectors=True)
        sel = np.abs(vals) > r + tol
        return vals[sel], vecs[:, sel]
    mat = fiber_matrix(phase, k, lam, rho, window)
    v0 = np.full(window.size, 1.0 / np.sqrt(window.size))
    vals_hi, vecs_hi = spla.eigsh(mat, k=k_each, which="LA", v0=v0)
    vals_lo, vecs_lo = spla.eigsh(mat, k=k_each, which="SA", v0=v0)
    keep = []
    for vals, vecs in ((vals_lo, vecs_lo), (vals_hi, vecs_hi)):
        sel = np.abs(vals) > r + tol
        keep.append((vals[sel], vecs[:, sel]))
    energies = np.concatenate([keep[0][0], keep[1][0]])
    vectors = np.hstack([keep[0][1], keep[1][1]])
    order = np.argsort(energies)
    return energies[order], vectors[:, order]


def max_ipr(vectors) -> float:
    """Largest inverse participation ratio sum |psi|^4 over the columns."""
    return float(np.max(np.sum(np.abs(vectors) ** 4, axis=0)))


@dataclass
class LocalizationReport:
    """Outlier and localization diagnostics across a window sweep."""

    windows: list
    outlier_counts: list
    max_iprs: list
    band: tuple

    @property
    def no_bound_states(self) -> bool:
        return all(c == 0 for c in self.outlier_counts)

    @property
    def ipr_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.max_iprs, self.max_iprs[1:]))


def no_bound_state_check(phase, k, lam, windows=(10, 20, 40),
                         tol=1e-6) -> LocalizationReport:
    """Certify the empty point spectrum of the flux-tube fiber (rho = 0).

    For each window size, diagonalizes the truncated operator and records
    the number of eigenvalues outside [-R-tol, R+tol] together with the
    largest inverse participation ratio over all eigenvectors.  No bound
    states means zero outliers at every size and an IPR that decays as the
    window grows (no localization at the flux tube).
    """
    if _at_dirac_point(k):
        raise ValueError("k at the degenerate point; the band is {0}")
    _, r = essential_band(lam, k)
    counts, iprs = [], []
    for L in windows:
        vals, vecs = full_spectrum(phase, k, lam, 0.0, RelativeWindow(L),
                                   eigenvectors=True)
        counts.append(int(np.sum(np.abs(vals) > r + tol)))
        iprs.append(max_ipr(vecs))
    return LocalizationReport(list(windows), counts, iprs, (-r, r))


def one_particle_dispersion(lam_e, k):
    """Band of a single charge: 2 lam_e (cos kx + cos ky), the renormalized
    nearest-neighbour hop on the unscaled vertex lattice."""
    kx, ky = np.asarray(k[0], dtype=float), np.asarray(k[1], dtype=float)
    return 2 * lam_e * (np.cos(kx) + np.cos(ky))
