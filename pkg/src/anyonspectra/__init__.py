"""Dynamical abelian quantum double models on finite tori.

Exact operator algebra and symmetry verification on small tori, plus the
closed-form and truncated-numerical spectral theory of the charge-flux
pair sector: Bloch bands with a Dirac cone, magnetic flux-tube fiber
operators, and transfer-matrix bound states.
"""

from .groups import Character, FiniteAbelianGroup, GroupElement, char_eval, \
    fourier_matrix, make_group, parse_group
from .lattice import DualStringPath, StringPath, TorusLattice, concat, \
    crossing_number, dual_string_from_steps, face_boundary, path_between, \
    string_from_steps, vertex_dual_star, winding_function, winding_number
from .many_body import CheckResult, HamiltonianSpec, ModelContext, \
    OperatorApplier, build_hamiltonian, conjugation_check, continuity_check, \
    duality_check, gauge_invariance_check, ground_state, holonomy, \
    run_identity_suite
from .sector_spectra import RelativeWindow, bloch_composite, \
    dispersion_composite, dispersion_massive, essential_band, fiber_matrix, \
    fiber_operator, full_spectrum, max_ipr, no_bound_state_check, \
    one_particle_dispersion, outlier_energies
from .bound_states import BoundStateResult, bound_state_energies, \
    convergence_certificate, delta_matrix, gap, ky_line_energies, \
    tail_ratio, transfer_matrix

__version__ = "0.1.0"
