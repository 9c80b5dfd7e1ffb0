"""Transfer-matrix solution of the pair bound states on the analytic lines.

At k_y = pi/4 the fiber operator block-diagonalizes over the transverse
coordinate j = d_y; each block is 2*lam*cos(2kx) times a one-dimensional
hopping chain with unit amplitudes except for a single defect b_j on the
central bond (-1, 1):

    b_j = chi(g)            j < -1
    b_j = chi(g) (1 + r)    j = -1          r = rho / lam
    b_j = 1 + r             j = +1
    b_j = 1                 j > +1

The eigenvalue recursion away from the defect is solved by the transfer
matrix T = [[E, -1], [1, 0]]; square-summable solutions exist iff
|b_j| > 1, pinning E = +-(B + 1/B) with B = |1 + r|, so the j = +-1
channels each bind two states, doubly degenerate overall, localized with
tail ratio 1/B per two sites.  The k_x = pi/4 line reduces to a single
chain in d_y with defect 1 + r on the innermost two sites of each d_x =
+-1 channel, giving the same two energies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sector_spectra import RelativeWindow, fold_to_quarter, outlier_energies

__all__ = [
    "delta_matrix",
    "transfer_matrix",
    "bound_state_energies",
    "gap",
    "ky_line_energies",
    "BoundStateResult",
    "tail_ratio",
    "convergence_certificate",
]


def _check_phase(phase):
    phase = complex(phase)
    if abs(abs(phase) - 1.0) > 1e-12:
        raise ValueError("phase must be unimodular")
    return phase


def defect_amplitude(j: int, phase, r) -> complex:
    """The central-bond amplitude b_j of the transverse-j chain."""
    if j % 2 == 0:
        raise ValueError("transverse coordinate j must be odd")
    phase = _check_phase(phase)
    if j < -1:
        return phase
    if j == -1:
        return phase * (1 + r)
    if j == 1:
        return complex(1 + r)
    return 1.0 + 0j


def delta_matrix(j: int, phase, r, n: int) -> np.ndarray:
    """Truncated 1D chain of the transverse-j channel on 2n odd sites.

    Unit hops between neighbouring odd sites except the (-1, +1) bond,
    which carries b_j (conjugate below the diagonal).
    """
    if n < 4:
        raise ValueError("need n >= 4 sites per side")
    sites = np.arange(-(2 * n - 1), 2 * n, 2)
    dim = len(sites)
    mat = np.zeros((dim, dim), dtype=complex)
    b = defect_amplitude(j, phase, r)
    for i in range(dim - 1):
        m, mp = sites[i], sites[i + 1]
        amp = b if (m, mp) == (-1, 1) else 1.0
        mat[i + 1, i] = amp
        mat[i, i + 1] = np.conj(amp)
    return mat


@dataclass(frozen=True)
class TransferMatrix:
    """T = [[E, -1], [1, 0]] solving psi_{n+1} = E psi_n - psi_{n-1}."""

    energy: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.energy, -1.0], [1.0, 0.0]])

    @property
    def multipliers(self):
        """tau_+- = (E +- sqrt(E^2 - 4))/2 with tau_+ tau_- = 1."""
        e = self.energy
        root = np.sqrt(complex(e * e - 4.0))
        return (e + root) / 2, (e - root) / 2

    @property
    def eigenvectors(self):
        tp, tm = self.multipliers
        return np.array([tp, 1.0]), np.array([tm, 1.0])


def transfer_matrix(energy: float) -> TransferMatrix:
    return TransferMatrix(float(energy))


@dataclass
class BoundStateResult:
    """Bound-state energies of a fiber line, with localization data.

    energies lists each eigenvalue with multiplicity; B = |1 + rho/lam| is
    the inverse localization length per double site (tail ratio 1/B).
    """

    energies: list
    B: float
    channels: list

    @property
    def exists(self) -> bool:
        return bool(self.energies)

    @property
    def localization_rate(self) -> float:
        return 1.0 / self.B if self.B > 0 else np.inf


def bound_state_energies(lam, rho, kx, phase) -> BoundStateResult:
    """Bound states of the fiber operator on the line k = (kx, pi/4).

    If B = |1 + rho/lam| > 1 there are four eigenvalues
    +-2 lam cos(2kx) (B + 1/B), each doubly degenerate through the
    transverse channels j = +-1 (|b_1| = |b_-1|); otherwise none.
    """
    if lam == 0:
        raise ValueError("transfer analysis needs lam != 0 (pure 4x4 otherwise)")
    if fold_to_quarter(kx) < 1e-12:
        raise ValueError("kx on the degenerate set pi/4 + (pi/2)Z")
    _check_phase(phase)
    B = abs(1 + rho / lam)
    if B <= 1:
        return BoundStateResult([], B, [])
    scale = 2 * lam * np.cos(2 * kx)
    e = B + 1 / B
    energies = sorted([scale * e, scale * e, -scale * e, -scale * e])
    return BoundStateResult(energies, B, [-1, +1, -1, +1])


def gap(lam, rho, kx) -> float:
    """Distance from the bound states to the essential band edge on the
    kx line: g = 2 lam |cos 2kx| (B + 1/B - 2), positive off degeneracy."""
    B = abs(1 + rho / lam)
    if B <= 1:
        raise ValueError("no bound state: |1 + rho/lam| <= 1")
    return 2 * lam * abs(np.cos(2 * kx)) * (B + 1 / B - 2)


def ky_line_energies(lam, rho, ky) -> BoundStateResult:
    """Bound states of the reduced chain on the line k = (pi/4, ky).

    The fiber decouples over d_x; the |d_x| > 1 channels are free chains,
    while each d_x = +-1 channel carries the defect 1 + rho/lam, binding
    the two energies +-2 lam cos(2ky)(B + 1/B) when B > 1 (each simple in
    the reduced chain, doubled in the full fiber through d_x = +-1).
    """
    if lam == 0:
        raise ValueError("transfer analysis needs lam != 0")
    B = abs(1 + rho / lam)
    if B <= 1:
        return BoundStateResult([], B, [])
    scale = 2 * lam * np.cos(2 * ky)
    e = B + 1 / B
    return BoundStateResult(sorted([-scale * e, scale * e]), B, [+1, -1])


def tail_ratio(vector, window: RelativeWindow, axis=0) -> float:
    """Asymptotic |psi(d+2)/psi(d)| of a window eigenvector along an axis.

    Measured on the outer half of the window where the transfer-matrix
    tail dominates, marginalizing the other coordinate in quadrature.
    """
    n = 2 * window.L
    prob = np.abs(np.asarray(vector).reshape(n, n)) ** 2
    marg = np.sqrt(prob.sum(axis=1 - axis))
    lo, hi = 3 * n // 4, n - 2
    ratios = marg[lo + 1: hi + 1] / marg[lo:hi]
    return float(np.median(ratios))


def convergence_certificate(lam, rho, kx, phase, L, tol=1e-8):
    """Compare analytic line energies against the truncated fiber at
    (kx, pi/4), at window sizes L and 2L.

    Returns a dict with the analytic energies, both numeric spectra of
    outliers, and the maximum deviation; exponential truncation error
    makes the doubled window agree once B**(-2L) is below tol.
    """
    analytic = bound_state_energies(lam, rho, kx, phase)
    out = {"analytic": analytic.energies, "B": analytic.B}
    for size in (L, 2 * L):
        vals, _ = outlier_energies(phase, (kx, np.pi / 4), lam, rho,
                                   RelativeWindow(size))
        out[f"numeric_L{size}"] = vals.tolist()
    ana = np.array(analytic.energies)
    num = np.array(out[f"numeric_L{2 * L}"])
    if len(ana) == len(num):
        out["max_error"] = float(np.max(np.abs(ana - num))) if len(ana) else 0.0
        out["converged"] = out["max_error"] < tol
    else:
        out["max_error"] = np.inf
        out["converged"] = False
    return out
