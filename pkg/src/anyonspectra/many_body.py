"""Exact operators on the full torus Hilbert space of a quantum double model.

Each oriented edge carries C^|G|; the many-body basis is the set of edge
configurations (maps edge -> group element), encoded as base-|G| integers
with the edge id as the digit position (edge 0 least significant).  States
are dense numpy vectors of length |G|**n_edges.

Operator conventions, with tail/head the endpoints of an oriented edge and
right/left the faces seen walking along it:

    L^h |g> = |hg>            T^chi |g> = conj(chi(g)) |g>
    pair (v,e): T^chi if e leaves v, else T^{inv chi}
    pair (f,e): L^g  if f is left of e, else L^{inv g}

The face-side rule is calibrated (together with the clockwise vertex
stars) so that a dual string operator F^g creates flux g at its initial
face, which is the convention under which the flux hopping terms hop and
the string-projector relations hold at the stated endpoints.

Vertex projectors average gauge transformations, face projectors select a
fixed flux; both families are orthogonal projector resolutions of the
identity and mutually commute.  The dynamical Hamiltonian adds charge,
flux and charge-flux pair hopping with couplings (lam_e, lam_mu, lam_em);
an optional asymmetry `mass` multiplies the flux-moving half of the pair
term by (1 + mass).

Operators are materialized as scipy sparse matrices up to the desk-scale
cap; beyond it the builders hand out matrix-free appliers suitable for
iterative extremal-eigenvalue solving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .groups import FiniteAbelianGroup, fourier_matrix
from .lattice import (
    HORIZONTAL,
    DualStringPath,
    StringPath,
    TorusLattice,
    crossing_number,
    dual_string_from_steps,
    face_boundary,
    string_from_steps,
    vertex_dual_star,
    winding_number,
)

__all__ = [
    "OperatorApplier",
    "HamiltonianSpec",
    "ModelContext",
    "CheckResult",
    "build_hamiltonian",
    "ground_state",
    "holonomy",
    "continuity_check",
    "duality_check",
    "conjugation_check",
    "gauge_invariance_check",
    "run_identity_suite",
]

# sparse matrices are only materialized up to this dimension
MATRIX_DIM_CAP = 65536

RESIDUAL_TOL = 1e-12


class OperatorApplier:
    """Linear operator as an apply function, optionally with an explicit
    sparse matrix; `hermitian`/`unitary` are declarative flags."""

    def __init__(self, n, fn=None, matrix=None, hermitian=False, unitary=False):
        if fn is None and matrix is None:
            raise ValueError("need an apply function or a matrix")
        self.n = n
        self._fn = fn
        self.matrix = matrix
        self.hermitian = hermitian
        self.unitary = unitary

    def __call__(self, vec):
        if self._fn is not None:
            return self._fn(vec)
        return self.matrix @ vec

    def as_linear_operator(self):
        return spla.LinearOperator((self.n, self.n), matvec=self.__call__,
                                   dtype=np.complex128)

    def extremal_eigenvalues(self, k=6, which="SA", tol=0):
        """Iterative extremal eigenvalues; works matrix-free."""
        op = self.matrix if self.matrix is not None else self.as_linear_operator()
        return np.sort(spla.eigsh(op, k=k, which=which, tol=tol,
                                  return_eigenvectors=False))


@dataclass
class HamiltonianSpec:
    """Model parameters: H = H0 + lam_e H^e + lam_mu H^mu + lam_em H^em."""

    group: FiniteAbelianGroup
    lattice: TorusLattice
    lam_e: float = 0.0
    lam_mu: float = 0.0
    lam_em: float = 0.0
    mass: float = 0.0

    def __post_init__(self):
        if self.mass < 0:
            raise ValueError("mass asymmetry must be >= 0")

    def couplings_key(self):
        return (self.lam_e, self.lam_mu, self.lam_em, self.mass)


class ModelContext:
    """Workspace bundling a group and a torus with cached operators."""

    def __init__(self, group: FiniteAbelianGroup, lattice: TorusLattice):
        self.group = group
        self.lattice = lattice
        dim = group.order**lattice.n_edges
        if dim > 2**26:
            raise ValueError(f"|G|^|E| = {dim} exceeds the desk-scale cap")
        self.dim = int(dim)
        self.materialize = self.dim <= MATRIX_DIM_CAP
        self.pow = group.order ** np.arange(lattice.n_edges, dtype=np.int64)
        self._idx = np.arange(self.dim, dtype=np.int64)
        self._cache = {}

    # -- configuration arithmetic ------------------------------------------

    def digits(self, e):
        """Group-element index on edge e for every configuration."""
        key = ("digits", e)
        if key not in self._cache:
            self._cache[key] = (self._idx // self.pow[e]) % self.group.order
        return self._cache[key]

    def _shift_edge(self, idx, e, h_idx):
        """Apply L^h on edge e to an array of configuration indices."""
        d = (idx // self.pow[e]) % self.group.order
        return idx + (self.group.cayley[h_idx, d] - d) * self.pow[e]

    def _perm_matrix(self, perm, data=None):
        if data is None:
            data = np.ones(self.dim)
        return sp.csr_matrix((data, (perm, self._idx)),
                             shape=(self.dim, self.dim))

    # -- single-edge operators ----------------------------------------------

    def apply_L(self, e, h, reversed=False) -> OperatorApplier:
        """Left translation L^h on edge e (L^{inv h} if reversed)."""
        h_idx = self.group.index(h)
        if reversed:
            h_idx = self.group.inverse[h_idx]
        perm = self._shift_edge(self._idx, e, h_idx)

        def apply(vec):
            out = np.empty_like(vec, dtype=complex)
            out[perm] = vec
            return out

        mat = self._perm_matrix(perm) if self.materialize else None
        return OperatorApplier(self.dim, fn=apply, matrix=mat, unitary=True)

    def apply_T(self, e, chi, reversed=False) -> OperatorApplier:
        """Character phase T^chi on edge e (T^{inv chi} if reversed)."""
        m = self.group.index(chi)
        if not reversed:
            m = self.group.inverse[m]  # T^chi|g> = conj(chi(g))|g>
        phase = self.group.char_table[m, self.digits(e)]
        mat = sp.diags(phase, format="csr") if self.materialize else None
        return OperatorApplier(self.dim, fn=lambda v: phase * v, matrix=mat,
                               unitary=True)

    # -- string operators -----------------------------------------------------

    def string_phases(self, gamma: StringPath, chi) -> np.ndarray:
        """Diagonal of F^chi_gamma (a product of T factors)."""
        m = self.group.index(chi)
        m_inv = self.group.inverse[m]
        phase = np.ones(self.dim, dtype=complex)
        for v, e in gamma:
            k = m_inv if self.lattice.is_tail(v, e) else m
            phase = phase * self.group.char_table[k, self.digits(e)]
        return phase

    def string_operator(self, gamma: StringPath, chi) -> OperatorApplier:
        phase = self.string_phases(gamma, chi)
        mat = sp.diags(phase, format="csr") if self.materialize else None
        return OperatorApplier(self.dim, fn=lambda v: phase * v, matrix=mat,
                               unitary=True)

    def dual_string_perm(self, dual: DualStringPath, g) -> np.ndarray:
        """Permutation of configuration indices effected by F^g_dual."""
        g_idx = self.group.index(g)
        g_inv = self.group.inverse[g_idx]
        shift = {}
        for f, e in dual:
            k = g_inv if self.lattice.face_on_right(f, e) else g_idx
            shift[e] = self.group.cayley[shift.get(e, 0), k]
        idx = self._idx
        for e, k in shift.items():
            if k:
                idx = self._shift_edge(idx, e, k)
        return idx

    def dual_string_operator(self, dual: DualStringPath, g) -> OperatorApplier:
        perm = self.dual_string_perm(dual, g)

        def apply(vec):
            out = np.empty_like(vec, dtype=complex)
            out[perm] = vec
            return out

        mat = self._perm_matrix(perm) if self.materialize else None
        return OperatorApplier(self.dim, fn=apply, matrix=mat, unitary=True)

    # -- projectors -----------------------------------------------------------

    def gauge_perm(self, v, g_idx) -> np.ndarray:
        """Configuration permutation of the gauge transformation g at v."""
        key = ("gauge", self.lattice.wrap(v), g_idx)
        if key not in self._cache:
            g_inv = self.group.inverse[g_idx]
            idx = self._idx
            for e, outgoing in self.lattice.vertex_edges(v):
                idx = self._shift_edge(idx, e, g_idx if outgoing else g_inv)
            self._cache[key] = idx
        return self._cache[key]

    def apply_projector_A(self, v, chi, vec):
        m_inv = self.group.inverse[self.group.index(chi)]
        out = np.zeros(len(vec), dtype=complex)
        scratch = np.empty_like(out)
        for g_idx in range(self.group.order):
            perm = self.gauge_perm(v, g_idx)
            scratch[perm] = vec
            out += (self.group.char_table[m_inv, g_idx] / self.group.order) * scratch
        return out

    def projector_A(self, v, chi) -> OperatorApplier:
        """Vertex projector onto gauge-transformation character chi."""
        v = self.lattice.wrap(v)
        key = ("A", v, self.group.index(chi))
        if key not in self._cache:
            mat = None
            if self.materialize:
                m_inv = self.group.inverse[self.group.index(chi)]
                rows, data = [], []
                for g_idx in range(self.group.order):
                    rows.append(self.gauge_perm(v, g_idx))
                    coeff = self.group.char_table[m_inv, g_idx] / self.group.order
                    data.append(np.full(self.dim, coeff))
                mat = sp.csr_matrix(
                    (np.concatenate(data),
                     (np.concatenate(rows), np.tile(self._idx, self.group.order))),
                    shape=(self.dim, self.dim),
                )
            chi = self.group.coords_of(self.group.index(chi))
            self._cache[key] = OperatorApplier(
                self.dim, fn=lambda w, v=v, chi=chi: self.apply_projector_A(v, chi, w),
                matrix=mat, hermitian=True,
            )
        return self._cache[key]

    def flux_digits(self, f) -> np.ndarray:
        """Group index of the counterclockwise holonomy around face f."""
        lat, G = self.lattice, self.group
        key = ("flux", lat.wrap(f))
        if key not in self._cache:
            x, y = lat.wrap(f)
            flux = G.cayley[self.digits(lat.h_edge(x, y)),
                            self.digits(lat.u_edge(x + 1, y))]
            flux = G.cayley[flux, G.inverse[self.digits(lat.h_edge(x, y + 1))]]
            flux = G.cayley[flux, G.inverse[self.digits(lat.u_edge(x, y))]]
            self._cache[key] = flux
        return self._cache[key]

    def projector_B(self, f, g) -> OperatorApplier:
        """Face projector onto flux g."""
        f = self.lattice.wrap(f)
        key = ("B", f, self.group.index(g))
        if key not in self._cache:
            sel = (self.flux_digits(f) == self.group.index(g)).astype(complex)
            mat = sp.diags(sel, format="csr") if self.materialize else None
            self._cache[key] = OperatorApplier(
                self.dim, fn=lambda w, sel=sel: sel * w, matrix=mat,
                hermitian=True,
            )
        return self._cache[key]

    # -- hopping terms ----------------------------------------------------------

    def edge_sites(self, e):
        """(v, v', f, f') around edge e: endpoints and adjacent faces."""
        tail, head = self.lattice.edge_endpoints(e)
        right, left = self.lattice.edge_faces(e)
        return tail, head, right, left

    def pair_string_diag(self, v, e, chi) -> np.ndarray:
        """Diagonal of the one-pair string operator F^chi_{(v,e)}."""
        return self.string_phases(StringPath(self.lattice, ((v, e),)), chi)

    def _charge_hop_parts(self, e, chi):
        """The two summands of the chi term of electric hopping."""
        v, w, _, _ = self.edge_sites(e)
        G = self.group
        iota = G.trivial_character
        chi_conj = G.coords_of(G.inverse[G.index(chi)])
        return (
            (self.pair_string_diag(v, e, chi_conj),
             self.projector_A(w, iota), self.projector_A(v, chi)),
            (self.pair_string_diag(w, e, chi_conj),
             self.projector_A(v, iota), self.projector_A(w, chi)),
        )

    def _flux_hop_parts(self, e, h):
        """The two summands of the h term of magnetic hopping."""
        _, _, f, fp = self.edge_sites(e)
        G = self.group
        one = G.identity
        h_inv = G.coords_of(G.inverse[G.index(h)])
        s1 = self.dual_string_perm(DualStringPath(self.lattice, ((f, e),)), h_inv)
        s2 = self.dual_string_perm(DualStringPath(self.lattice, ((fp, e),)), h_inv)
        return (
            (s1, self.projector_B(fp, one), self.projector_B(f, h)),
            (s2, self.projector_B(f, one), self.projector_B(fp, h)),
        )

    def charge_hop_matrix(self, e, chi) -> sp.csr_matrix:
        """F^{conj chi}_{(v,e)} A^iota_{v'} A^chi_v + (v <-> v')."""
        (d1, q1, p1), (d2, q2, p2) = self._charge_hop_parts(e, chi)
        return (sp.diags(d1) @ (q1.matrix @ p1.matrix)
                + sp.diags(d2) @ (q2.matrix @ p2.matrix))

    def flux_hop_matrix(self, e, h) -> sp.csr_matrix:
        """F^{inv h}_{(f,e)} B^1_{f'} B^h_f + (f <-> f')."""
        (s1, q1, p1), (s2, q2, p2) = self._flux_hop_parts(e, h)
        m1 = self._perm_matrix(s1) @ (q1.matrix @ p1.matrix)
        m2 = self._perm_matrix(s2) @ (q2.matrix @ p2.matrix)
        return m1 + m2

    def T_epsilon(self, e) -> sp.csr_matrix:
        """Electric hopping across edge e."""
        key = ("Teps", e)
        if key not in self._cache:
            G = self.group
            total = sp.csr_matrix((self.dim, self.dim))
            for m in range(1, G.order):
                total = total + self.charge_hop_matrix(e, G.coords_of(m))
            self._cache[key] = total
        return self._cache[key]

    def T_mu(self, e) -> sp.csr_matrix:
        """Magnetic hopping across edge e."""
        key = ("Tmu", e)
        if key not in self._cache:
            G = self.group
            total = sp.csr_matrix((self.dim, self.dim))
            for k in range(1, G.order):
                total = total + self.flux_hop_matrix(e, G.coords_of(k))
            self._cache[key] = total
        return self._cache[key]

    def T_epsilon_mu(self, e, mass=0.0) -> sp.csr_matrix:
        """Composite pair hopping; flux-moving half weighted by (1 + mass)."""
        key = ("Tem", e, mass)
        if key not in self._cache:
            v, w, f, fp = self.edge_sites(e)
            G = self.group
            total = sp.csr_matrix((self.dim, self.dim))
            charges = [self.charge_hop_matrix(e, G.coords_of(m))
                       for m in range(1, G.order)]
            a_sums = [self.projector_A(v, G.coords_of(m)).matrix
                      + self.projector_A(w, G.coords_of(m)).matrix
                      for m in range(1, G.order)]
            fluxes = [self.flux_hop_matrix(e, G.coords_of(k))
                      for k in range(1, G.order)]
            b_sums = [self.projector_B(f, G.coords_of(k)).matrix
                      + self.projector_B(fp, G.coords_of(k)).matrix
                      for k in range(1, G.order)]
            for m in range(G.order - 1):
                for k in range(G.order - 1):
                    total = total + charges[m] @ b_sums[k]
                    total = total + (1.0 + mass) * (fluxes[k] @ a_sums[m])
            self._cache[key] = total
        return self._cache[key]

    def h0(self) -> sp.csr_matrix:
        """Static quantum double Hamiltonian (the total number operator)."""
        key = ("H0",)
        if key not in self._cache:
            G, lat = self.group, self.lattice
            eye = sp.identity(self.dim, format="csr")
            total = sp.csr_matrix((self.dim, self.dim))
            for v in lat.vertices():
                total = total + (eye - self.projector_A(v, G.trivial_character).matrix)
            for f in lat.faces():
                total = total + (eye - self.projector_B(f, G.identity).matrix)
            self._cache[key] = total.tocsr()
        return self._cache[key]

    def charge_number(self, chi) -> sp.csr_matrix:
        """Sum over all vertices of A^chi_v."""
        total = sp.csr_matrix((self.dim, self.dim))
        for v in self.lattice.vertices():
            total = total + self.projector_A(v, chi).matrix
        return total

    def flux_number(self, g) -> sp.csr_matrix:
        total = sp.csr_matrix((self.dim, self.dim))
        for f in self.lattice.faces():
            total = total + self.projector_B(f, g).matrix
        return total

    def hamiltonian(self, spec: HamiltonianSpec) -> sp.csr_matrix:
        key = ("H",) + spec.couplings_key()
        if key not in self._cache:
            H = self.h0()
            for e in self.lattice.edges():
                if spec.lam_e:
                    H = H + spec.lam_e * self.T_epsilon(e)
                if spec.lam_mu:
                    H = H + spec.lam_mu * self.T_mu(e)
                if spec.lam_em:
                    H = H + spec.lam_em * self.T_epsilon_mu(e, spec.mass)
            H = H.tocsr()
            H.sum_duplicates()
            self._cache[key] = H
        return self._cache[key]

    # -- matrix-free application (beyond the materialization cap) -------------

    def _apply_charge_hop(self, e, chi, vec):
        (d1, q1, p1), (d2, q2, p2) = self._charge_hop_parts(e, chi)
        return d1 * q1(p1(vec)) + d2 * q2(p2(vec))

    def _apply_flux_hop(self, e, h, vec):
        (s1, q1, p1), (s2, q2, p2) = self._flux_hop_parts(e, h)
        out1 = np.empty(self.dim, dtype=complex)
        out1[s1] = q1(p1(vec))
        out2 = np.empty(self.dim, dtype=complex)
        out2[s2] = q2(p2(vec))
        return out1 + out2

    def apply_hamiltonian(self, spec: HamiltonianSpec, vec) -> np.ndarray:
        G, lat = self.group, self.lattice
        n_terms = lat.n_vertices + lat.n_faces
        out = n_terms * vec.astype(complex)
        for v in lat.vertices():
            out -= self.apply_projector_A(v, G.trivial_character, vec)
        for f in lat.faces():
            out -= self.projector_B(f, G.identity)(vec)
        for e in lat.edges():
            for m in range(1, G.order):
                chi = G.coords_of(m)
                if spec.lam_e:
                    out += spec.lam_e * self._apply_charge_hop(e, chi, vec)
                if spec.lam_mu:
                    out += spec.lam_mu * self._apply_flux_hop(e, chi, vec)
            if spec.lam_em:
                v1, v2, f1, f2 = self.edge_sites(e)
                for m in range(1, G.order):
                    chi = G.coords_of(m)
                    a_vec = (self.apply_projector_A(v1, chi, vec)
                             + self.apply_projector_A(v2, chi, vec))
                    for k in range(1, G.order):
                        h = G.coords_of(k)
                        b_vec = (self.projector_B(f1, h)(vec)
                                 + self.projector_B(f2, h)(vec))
                        out += spec.lam_em * self._apply_charge_hop(e, chi, b_vec)
                        out += spec.lam_em * (1.0 + spec.mass) * \
                            self._apply_flux_hop(e, h, a_vec)
        return out


def build_hamiltonian(spec: HamiltonianSpec,
                      ctx: ModelContext = None) -> OperatorApplier:
    """Assemble H; sparse-backed at desk scale, matrix-free above it."""
    if ctx is None:
        ctx = ModelContext(spec.group, spec.lattice)
    if ctx.materialize:
        return OperatorApplier(ctx.dim, matrix=ctx.hamiltonian(spec),
                               hermitian=True)
    return OperatorApplier(ctx.dim, fn=lambda v: ctx.apply_hamiltonian(spec, v),
                           hermitian=True)


def ground_state(ctx: ModelContext) -> np.ndarray:
    """Canonical frustration-free ground state of H0.

    Projects the all-identity configuration with every B^1_f and A^iota_v
    and normalizes; a numerically zero result signals an indexing bug.
    """
    G, lat = ctx.group, ctx.lattice
    vec = np.zeros(ctx.dim, dtype=complex)
    vec[0] = 1.0  # all-identity configuration
    for f in lat.faces():
        vec = ctx.projector_B(f, G.identity)(vec)
    for v in lat.vertices():
        vec = ctx.apply_projector_A(v, G.trivial_character, vec)
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise RuntimeError("projected ground state vanished; indexing bug")
    return vec / norm


def holonomy(ctx: ModelContext, chi, g, dual: DualStringPath, loop: StringPath):
    """Braiding phase <psi| F^chi_loop |psi> with psi = F^g_dual Omega.

    Returns (measured, predicted, winding): predicted = chi(g)**winding,
    the winding taken around the first face of the dual string.  The loop
    must be closed and contractible.
    """
    if not loop.is_closed or loop.displacement() != (0, 0):
        raise ValueError("holonomy needs a closed contractible loop")
    omega = ground_state(ctx)
    psi = ctx.dual_string_operator(dual, g)(omega)
    phases = ctx.string_phases(loop, chi)
    measured = complex(np.vdot(psi, phases * psi))
    w = winding_number(loop, dual.start)
    predicted = complex(ctx.group.char_value(chi, g)) ** w
    return measured, predicted, w


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    residual: float
    passed: bool
    tol: float = RESIDUAL_TOL
    note: str = ""

    def as_dict(self):
        return {"check_name": self.name, "residual": self.residual,
                "pass": bool(self.passed)}


def _frob(mat) -> float:
    """Frobenius norm (an upper bound on the operator norm)."""
    if sp.issparse(mat):
        return float(np.sqrt(np.sum(np.abs(mat.data) ** 2)))
    return float(np.linalg.norm(np.asarray(mat)))


def _lanczos_norm(mat, iters=80, seed=11) -> float:
    """Spectral norm of a Hermitian matrix by Lanczos with full
    reorthogonalization; used to refine a loose Frobenius bound."""
    n = mat.shape[0]
    iters = min(iters, n)
    rng = np.random.default_rng(seed)
    q = rng.normal(size=n) + 1j * rng.normal(size=n)
    q /= np.linalg.norm(q)
    basis = [q]
    alphas, betas = [], []
    for _ in range(iters):
        w = mat @ basis[-1]
        alphas.append(float(np.real(np.vdot(basis[-1], w))))
        for b in basis:
            w = w - np.vdot(b, w) * b
        beta = np.linalg.norm(w)
        if beta < 1e-300:
            break
        betas.append(float(beta))
        basis.append(w / beta)
    tri = np.diag(alphas)
    for i, b in enumerate(betas[: len(alphas) - 1]):
        tri[i, i + 1] = tri[i + 1, i] = b
    return float(np.max(np.abs(np.linalg.eigvalsh(tri)))) if len(alphas) else 0.0


def _norm_residual(diff, tol=RESIDUAL_TOL) -> float:
    """Operator-norm residual of a Hermitian difference.

    The Frobenius norm certifies small residuals outright; when it is loose
    (entry-count accumulation on dense differences) the spectral norm is
    estimated by a converged Lanczos iteration instead.
    """
    frob = _frob(diff)
    if frob < 0.5 * tol:
        return frob
    return min(frob, _lanczos_norm(diff))


def continuity_check(ctx: ModelContext, lam_e, block, zeta, probes=0):
    """Residuals of the charge continuity equation on a vertex block.

    Compares i[lam_e H^eps, N^zeta_block] with the boundary current sum and
    [H^mu, N^zeta_block] with zero; returns (charge_residual, flux_residual).
    With probes > 0 the operators are never materialized and the residual
    is the largest norm of the defect applied to random unit vectors.
    """
    G, lat = ctx.group, ctx.lattice
    if G.index(zeta) == 0:
        raise ValueError("continuity needs a nontrivial character")
    block = {lat.wrap(v) for v in block}
    iota = G.trivial_character
    zeta = G.coords_of(G.index(zeta))

    def current_parts(v, e):
        w = StringPath(lat, ((v, e),)).end
        zeta_conj = G.coords_of(G.inverse[G.index(zeta)])
        return (
            (ctx.pair_string_diag(v, e, zeta_conj),
             ctx.projector_A(w, iota), ctx.projector_A(v, zeta)),
            (ctx.pair_string_diag(w, e, zeta_conj),
             ctx.projector_A(v, iota), ctx.projector_A(w, zeta)),
        )

    boundary = []
    for e in lat.edges():
        tail, head = lat.edge_endpoints(e)
        inside = [u for u in (tail, head) if u in block]
        if len(inside) == 1:
            boundary.append(current_parts(inside[0], e))

    if probes:
        rng = np.random.default_rng(7)

        def number_apply(vec):
            out = np.zeros(ctx.dim, dtype=complex)
            for v in block:
                out += ctx.apply_projector_A(v, zeta, vec)
            return out

        res_e = res_mu = 0.0
        for _ in range(probes):
            psi = rng.normal(size=ctx.dim) + 1j * rng.normal(size=ctx.dim)
            psi /= np.linalg.norm(psi)
            npsi = number_apply(psi)
            acc_e = np.zeros(ctx.dim, dtype=complex)
            acc_mu = np.zeros(ctx.dim, dtype=complex)
            for e in lat.edges():
                for m in range(1, G.order):
                    chi = G.coords_of(m)
                    acc_e += 1j * lam_e * (
                        ctx._apply_charge_hop(e, chi, npsi)
                        - number_apply(ctx._apply_charge_hop(e, chi, psi)))
                    acc_mu += (ctx._apply_flux_hop(e, chi, npsi)
                               - number_apply(ctx._apply_flux_hop(e, chi, psi)))
            for (d1, q1, p1), (d2, q2, p2) in boundary:
                acc_e -= 1j * lam_e * (d1 * q1(p1(psi)) - d2 * q2(p2(psi)))
            res_e = max(res_e, float(np.linalg.norm(acc_e)))
            res_mu = max(res_mu, float(np.linalg.norm(acc_mu)))
        return res_e, res_mu

    number = sum((ctx.projector_A(v, zeta).matrix for v in block),
                 sp.csr_matrix((ctx.dim, ctx.dim)))
    h_eps = sum((ctx.T_epsilon(e) for e in lat.edges()),
                sp.csr_matrix((ctx.dim, ctx.dim)))
    h_mu = sum((ctx.T_mu(e) for e in lat.edges()),
               sp.csr_matrix((ctx.dim, ctx.dim)))
    current = sp.csr_matrix((ctx.dim, ctx.dim))
    for (d1, q1, p1), (d2, q2, p2) in boundary:
        current = current + 1j * (sp.diags(d1) @ (q1.matrix @ p1.matrix)
                                  - sp.diags(d2) @ (q2.matrix @ p2.matrix))
    comm_e = 1j * lam_e * (h_eps @ number - number @ h_eps)
    comm_mu = h_mu @ number - number @ h_mu
    return _frob(comm_e - lam_e * current), _frob(comm_mu)


def _tensor_conjugate(dense, u, n_sites, order):
    """(tensor_e U) X (tensor_e U)^dagger for X on (C^order)^{tensor n_sites}.

    The uniform tensor-product unitary is applied as two batched GEMMs per
    side, with the site factors pre-grouped into half-size Kronecker blocks.
    """
    k1 = n_sites // 2
    k2 = n_sites - k1
    w1 = u.copy()
    for _ in range(k1 - 1):
        w1 = np.kron(w1, u)
    w2 = u.copy()
    for _ in range(k2 - 1):
        w2 = np.kron(w2, u)
    n = order**n_sites
    g1, g2 = order**k1, order**k2

    def rows(x):
        y = np.matmul(w1, x.reshape(g1, g2 * n))
        y = np.matmul(w2, y.reshape(g1, g2, n))
        return y.reshape(n, n)

    t1 = rows(dense.conj().T)
    return rows(t1.conj().T)


def dual_edge_map(lat: TorusLattice):
    """Edge bijection realizing lattice duality followed by a quarter turn.

    Maps the Lx x Ly torus onto the Ly x Lx torus so that faces become
    vertices while every edge keeps the up/right orientation convention.
    """
    target = TorusLattice(lat.Ly, lat.Lx)
    mapping = np.empty(lat.n_edges, dtype=np.int64)
    for e in range(lat.n_edges):
        x, y, kind = lat.edge_base(e)
        if kind == HORIZONTAL:
            mapping[e] = target.h_edge((lat.Ly - y) % lat.Ly, (x + 1) % lat.Lx)
        else:
            mapping[e] = target.u_edge((lat.Ly - y) % lat.Ly, x)
    return target, mapping


def duality_check(spec: HamiltonianSpec, ctx: ModelContext = None) -> float:
    """Residual of Fourier duality.

    Conjugates H by the edgewise group Fourier transform, transports it to
    the dual lattice (faces <-> vertices, with the induced orientation-
    preserving edge map), and compares against the model with electric and
    magnetic couplings exchanged and the group replaced by its dual.
    """
    if spec.mass != 0:
        raise ValueError("duality check requires mass = 0")
    if ctx is None:
        ctx = ModelContext(spec.group, spec.lattice)
    if ctx.dim > 8192:
        raise ValueError("duality check materializes densely; dim too large")
    H = ctx.hamiltonian(spec)
    u = fourier_matrix(spec.group)
    transformed = _tensor_conjugate(H.toarray(), u, ctx.lattice.n_edges,
                                    spec.group.order)

    target, emap = dual_edge_map(ctx.lattice)
    dual_spec = HamiltonianSpec(spec.group, target, lam_e=spec.lam_mu,
                                lam_mu=spec.lam_e, lam_em=spec.lam_em)
    dual_ctx = ModelContext(spec.group, target)
    Hd = dual_ctx.hamiltonian(dual_spec).tocoo()

    # configuration permutation induced by the edge map
    pi = np.zeros(ctx.dim, dtype=np.int64)
    for e in range(ctx.lattice.n_edges):
        pi += ctx.digits(e) * dual_ctx.pow[emap[e]]
    inv_pi = np.empty_like(pi)
    inv_pi[pi] = ctx._idx

    transformed[inv_pi[Hd.row], inv_pi[Hd.col]] -= Hd.data
    return _norm_residual(transformed)


def conjugation_check(spec: HamiltonianSpec, which: str,
                      ctx: ModelContext = None) -> float:
    """Residual of the antiunitary symmetry Theta H Theta = H.

    which='e': complex conjugation in the group basis.
    which='mu': per-edge relabel g -> inv(g) composed with conjugation.
    """
    if ctx is None:
        ctx = ModelContext(spec.group, spec.lattice)
    H = ctx.hamiltonian(spec)
    if which == "e":
        return _frob((H.conj() - H).tocsr())
    if which != "mu":
        raise ValueError("which must be 'e' or 'mu'")
    perm = ctx._idx
    for e in ctx.lattice.edges():
        d = ctx.digits(e)
        perm = perm + (ctx.group.inverse[d] - d) * ctx.pow[e]
    Hc = H.tocoo()
    mapped = sp.csr_matrix((Hc.data.conj(), (perm[Hc.row], perm[Hc.col])),
                           shape=Hc.shape)
    return _frob((mapped - H).tocsr())


def gauge_invariance_check(spec: HamiltonianSpec, ctx: ModelContext = None):
    """max over nontrivial charge/flux labels of the commutator norms
    ||[H, sum_v A^chi_v]|| and ||[H, sum_f B^g_f]||."""
    if ctx is None:
        ctx = ModelContext(spec.group, spec.lattice)
    H = ctx.hamiltonian(spec)
    G = ctx.group
    res_a = res_b = 0.0
    for k in range(1, G.order):
        na = ctx.charge_number(G.coords_of(k))
        nb = ctx.flux_number(G.coords_of(k))
        res_a = max(res_a, _frob((H @ na - na @ H).tocsr()))
        res_b = max(res_b, _frob((H @ nb - nb @ H).tocsr()))
    return res_a, res_b


# ---------------------------------------------------------------------------
# the full identity suite
# ---------------------------------------------------------------------------


def run_identity_suite(spec: HamiltonianSpec, tol=RESIDUAL_TOL):
    """Run every operator identity of the model at desk scale.

    Returns a list of CheckResult, one per named identity; residuals are
    Frobenius norms (upper bounds on the operator norm) or absolute
    deviations of scalar expectation values.
    """
    G, lat = spec.group, spec.lattice
    ctx = ModelContext(G, lat)
    if not ctx.materialize:
        raise ValueError("identity suite needs materializable matrices")
    out = []

    def add(name, residual, note=""):
        out.append(CheckResult(name, float(residual),
                               float(residual) < tol, tol, note))

    # local relations T^chi L^h = conj(chi(h)) L^h T^chi, and adjoints
    e0 = 0
    res = res_adj = 0.0
    for m in range(G.order):
        chi = G.coords_of(m)
        T = ctx.apply_T(e0, chi).matrix
        T_rev = ctx.apply_T(e0, chi, reversed=True).matrix
        res_adj = max(res_adj, _frob((T.getH() - T_rev).tocsr()))
        for k in range(G.order):
            h = G.coords_of(k)
            L = ctx.apply_L(e0, h).matrix
            L_rev = ctx.apply_L(e0, h, reversed=True).matrix
            res_adj = max(res_adj, _frob((L.getH() - L_rev).tocsr()))
            phase = np.conj(G.char_value(chi, h))
            res = max(res, _frob((T @ L - phase * (L @ T)).tocsr()))
    add("local_relations", res)
    add("adjoint_reversal", res_adj)

    # A/B are orthogonal projector families resolving the identity
    res = 0.0
    eye = sp.identity(ctx.dim, format="csr")
    v0 = f0 = (0, 0)
    for m in range(G.order):
        A1 = ctx.projector_A(v0, G.coords_of(m)).matrix
        B1 = ctx.projector_B(f0, G.coords_of(m)).matrix
        for k in range(G.order):
            A2 = ctx.projector_A(v0, G.coords_of(k)).matrix
            B2 = ctx.projector_B(f0, G.coords_of(k)).matrix
            target_a = A1 if m == k else sp.csr_matrix((ctx.dim, ctx.dim))
            target_b = B1 if m == k else sp.csr_matrix((ctx.dim, ctx.dim))
            res = max(res, _frob((A1 @ A2 - target_a).tocsr()),
                      _frob((B1 @ B2 - target_b).tocsr()))
    sum_a = sum((ctx.projector_A(v0, G.coords_of(m)).matrix
                 for m in range(G.order)), sp.csr_matrix((ctx.dim, ctx.dim)))
    sum_b = sum((ctx.projector_B(f0, G.coords_of(m)).matrix
                 for m in range(G.order)), sp.csr_matrix((ctx.dim, ctx.dim)))
    res = max(res, _frob((sum_a - eye).tocsr()), _frob((sum_b - eye).tocsr()))
    add("ab_projections", res)

    # every vertex projector commutes with every face projector
    res = 0.0
    chi1 = G.coords_of(G.order - 1)
    for v in lat.vertices():
        A = ctx.projector_A(v, chi1).matrix
        for f in lat.faces():
            B = ctx.projector_B(f, chi1).matrix
            res = max(res, _frob((A @ B - B @ A).tocsr()))
    add("ab_commute", res)

    # string-projector algebra at both endpoints, both species
    gamma = string_from_steps(lat, (0, 0), "R,U")
    res = 0.0
    for m in range(G.order):
        for k in range(G.order):
            chi, xi = G.character(G.coords_of(m)), G.character(G.coords_of(k))
            F = ctx.string_operator(gamma, xi).matrix
            a0 = ctx.projector_A(gamma.start, chi).matrix
            a0s = ctx.projector_A(gamma.start, G.mul(chi, G.inv(xi))).matrix
            a1 = ctx.projector_A(gamma.end, chi).matrix
            a1s = ctx.projector_A(gamma.end, G.mul(chi, xi)).matrix
            res = max(res, _frob((a0 @ F - F @ a0s).tocsr()),
                      _frob((a1 @ F - F @ a1s).tocsr()))
    dual = dual_string_from_steps(lat, (0, 0), "R,U")
    for m in range(G.order):
        for k in range(G.order):
            h, g = G.element(G.coords_of(m)), G.element(G.coords_of(k))
            Fd = ctx.dual_string_operator(dual, g).matrix
            b0 = ctx.projector_B(dual.start, h).matrix
            b0s = ctx.projector_B(dual.start, G.mul(h, G.inv(g))).matrix
            b1 = ctx.projector_B(dual.end, h).matrix
            b1s = ctx.projector_B(dual.end, G.mul(h, g)).matrix
            res = max(res, _frob((b0 @ Fd - Fd @ b0s).tocsr()),
                      _frob((b1 @ Fd - Fd @ b1s).tocsr()))
    add("string_proj_algebra", res)

    # string concatenation property
    g1 = string_from_steps(lat, (0, 0), "R")
    g2 = string_from_steps(lat, (1, 0), "U")
    from .lattice import concat

    res = 0.0
    for m in range(G.order):
        chi = G.coords_of(m)
        lhs = ctx.string_phases(g1, chi) * ctx.string_phases(g2, chi)
        res = max(res, float(np.max(np.abs(
            lhs - ctx.string_phases(concat(g1, g2), chi)))))
    add("string_concat", res)

    # crossing phase F^chi_gamma F^g_dual = chi(g)^c F^g_dual F^chi_gamma
    res = 0.0
    gamma_x = string_from_steps(lat, (0, 0), "R,U")
    dual_x = dual_string_from_steps(lat, (0, 0), "R")
    for gpath, dpath in [(gamma_x, dual_x), (gamma_x.reversed(), dual_x),
                         (gamma_x, dual_x.reversed())]:
        c = crossing_number(gpath, dpath)
        for m in range(G.order):
            for k in range(G.order):
                chi, g = G.coords_of(m), G.coords_of(k)
                F = ctx.string_operator(gpath, chi).matrix
                Fd = ctx.dual_string_operator(dpath, g).matrix
                phase = G.char_value(chi, g) ** c
                res = max(res, _frob((F @ Fd - phase * (Fd @ F)).tocsr()))
    add("strings_crossing", res)

    # face loop operator is the flux Fourier transform of B projectors
    res = 0.0
    loop = face_boundary(lat, f0)
    for m in range(G.order):
        chi = G.coords_of(m)
        F = ctx.string_operator(loop, chi).matrix
        acc = sum((np.conj(G.char_value(chi, G.coords_of(k)))
                   * ctx.projector_B(f0, G.coords_of(k)).matrix
                   for k in range(G.order)), sp.csr_matrix((ctx.dim, ctx.dim)))
        res = max(res, _frob((F - acc).tocsr()))
    add("face_loop_flux_fourier", res)

    # static model: commuting terms and the frustration-free ground state
    res = 0.0
    terms = [eye - ctx.projector_A(v, G.trivial_character).matrix
             for v in lat.vertices()]
    terms += [eye - ctx.projector_B(f, G.identity).matrix for f in lat.faces()]
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            res = max(res, _frob((terms[i] @ terms[j]
                                  - terms[j] @ terms[i]).tocsr()))
    add("h0_terms_commute", res)

    omega = ground_state(ctx)
    res = 0.0
    for v in lat.vertices():
        val = np.vdot(omega, ctx.apply_projector_A(v, G.trivial_character, omega))
        res = max(res, abs(val - 1.0))
        if G.order > 1:
            val = np.vdot(omega, ctx.apply_projector_A(v, G.coords_of(1), omega))
            res = max(res, abs(val))
    for f in lat.faces():
        val = np.vdot(omega, ctx.projector_B(f, G.identity)(omega))
        res = max(res, abs(val - 1.0))
    phases = ctx.string_phases(face_boundary(lat, f0), G.coords_of(G.order - 1))
    res = max(res, abs(np.vdot(omega, phases * omega) - 1.0))
    add("ground_state_ff", res)

    # continuity equation: per-edge, block, total, and flux-static claims
    if G.order > 1:
        zeta = G.coords_of(1)
        iota = G.trivial_character
        e = lat.h_edge(0, 0)
        v, w = lat.edge_endpoints(e)
        Te = ctx.T_epsilon(e)
        Av = ctx.projector_A(v, zeta).matrix
        zeta_conj = G.coords_of(G.inverse[1])
        d1 = ctx.pair_string_diag(v, e, zeta_conj)
        d2 = ctx.pair_string_diag(w, e, zeta_conj)
        p1 = ctx.projector_A(w, iota).matrix @ ctx.projector_A(v, zeta).matrix
        p2 = ctx.projector_A(v, iota).matrix @ ctx.projector_A(w, zeta).matrix
        J = 1j * (sp.diags(d1) @ p1 - sp.diags(d2) @ p2)
        add("continuity_per_edge",
            _frob((1j * (Te @ Av - Av @ Te) - J).tocsr()))

        r_block, r_flux = continuity_check(ctx, 1.0, [(0, 0), (1, 0)], zeta)
        add("continuity_block", r_block)
        add("continuity_flux_static", r_flux)
        r_total, _ = continuity_check(ctx, 1.0, lat.vertices(), zeta)
        add("continuity_total", r_total)

    # symmetries of the full interacting Hamiltonian
    r_a, r_b = gauge_invariance_check(spec, ctx)
    add("gauge_invariance_charge", r_a)
    add("gauge_invariance_flux", r_b)
    add("conjugation_epsilon", conjugation_check(spec, "e", ctx))
    add("conjugation_mu", conjugation_check(spec, "mu", ctx))
    if spec.mass == 0:
        add("duality", duality_check(spec, ctx))

    # total number operators commute with H
    H = ctx.hamiltonian(spec)
    n_charge = lat.n_vertices * eye - sum(
        (ctx.projector_A(v, G.trivial_character).matrix for v in lat.vertices()),
        sp.csr_matrix((ctx.dim, ctx.dim)))
    n_flux = lat.n_faces * eye - sum(
        (ctx.projector_B(f, G.identity).matrix for f in lat.faces()),
        sp.csr_matrix((ctx.dim, ctx.dim)))
    res = max(_frob((H @ n_charge - n_charge @ H).tocsr()),
              _frob((H @ n_flux - n_flux @ H).tocsr()))
    add("number_ops_commute", res)

    return out
