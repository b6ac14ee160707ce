"""Assembly of trace finite element forms on the active mesh.

All bilinear forms live on the space of P1 functions on the cut tetrahedra,
restricted to the discrete surface Gamma_h:

    mass       (u, v)_{Gamma_h}
    stiffness  (k grad_G u, grad_G v)_{Gamma_h}   with optional coefficient k
    stab       (n.grad u, n.grad v)_{Omega_h}     normal-gradient volume term

The stabilization matrix is assembled unweighted or with a per-element
weight (the schemes use the element diameter h_e and its inverse); its
elementwise kernel is grad_i . M_e . grad_j with the active mesh's normal
metric M_e = sum_s |T_s| n_s n_s^T over the geometry lattice.  Because basis
gradients and normals are constant per patch (cut lattice sub-tetrahedron),
the coefficient stiffness factorizes as (int_p k ds) * G_p with a cached
per-patch Gram tensor G_p, which makes the per-step mobility reassembly
cheap.

The degree-4 surface rule integrates every nonlinear P1 integrand used here
exactly: f0(c_h) and f0'(c_h) psi_j are quartic per element, the mobility
weight is quadratic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.sparse as sp

from .mesh import ActiveMesh
from .physics import f0, f0_prime

__all__ = [
    "AssembledForms",
    "assemble_forms",
    "assemble_surface_mass",
    "assemble_surface_stiffness",
    "assemble_normal_stabilization",
    "assemble_f0prime_load",
    "assemble_load",
    "interpolate_at_surface_qp",
    "compute_E1",
    "compute_mass",
    "l2_norm_gamma",
    "export_matrix_market",
]


def _patch_gram(active: ActiveMesh) -> np.ndarray:
    g = active._cache.get("patch_gram")
    if g is None:
        tg = active.patch_tangential_grads
        g = np.einsum("pik,pjk->pij", tg, tg)
        active._cache["patch_gram"] = g
    return g


def _scatter_pattern(active: ActiveMesh):
    pat = active._cache.get("pattern")
    if pat is None:
        d = active.elem_dofs
        n_e = active.n_elements
        rows = np.broadcast_to(d[:, :, None], (n_e, 4, 4)).reshape(-1)
        cols = np.broadcast_to(d[:, None, :], (n_e, 4, 4)).reshape(-1)
        pat = (rows, cols)
        active._cache["pattern"] = pat
    return pat


def _to_csr(active: ActiveMesh, elem_mats: np.ndarray) -> sp.csr_matrix:
    rows, cols = _scatter_pattern(active)
    n = active.n_dofs
    mat = sp.coo_matrix((elem_mats.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return mat


def _qdofs(active: ActiveMesh) -> np.ndarray:
    q = active._cache.get("qdofs")
    if q is None:
        q = active.elem_dofs[active.sq_elem]
        active._cache["qdofs"] = q
    return q


def interpolate_at_surface_qp(active: ActiveMesh, c: np.ndarray) -> np.ndarray:
    """P1 values of the DOF vector c at all surface quadrature points."""
    c = np.asarray(c, dtype=float)
    return np.einsum("qi,qi->q", active.sq_bary, c[_qdofs(active)])


def assemble_surface_mass(active: ActiveMesh) -> sp.csr_matrix:
    """(u, v)_{Gamma_h} in CSR form."""
    contrib = active.sq_weights[:, None, None] * (
        active.sq_bary[:, :, None] * active.sq_bary[:, None, :]
    )
    elem_mats = np.add.reduceat(contrib.reshape(len(contrib), -1), active.sq_offsets[:-1]).reshape(
        -1, 4, 4
    )
    return _to_csr(active, elem_mats)


def assemble_surface_stiffness(active: ActiveMesh, coefficient=None, coeff_map=None) -> sp.csr_matrix:
    """(k grad_G u, grad_G v)_{Gamma_h}.

    ``coefficient`` is a nodal DOF vector interpolated to the quadrature
    points; ``coeff_map`` is applied pointwise there (e.g. the mobility).
    With neither, k = 1.  No hidden caching of the coefficient: every call
    re-evaluates it.
    """
    if coefficient is None:
        weight = active.sq_weights
    else:
        vals = interpolate_at_surface_qp(active, coefficient)
        if coeff_map is not None:
            vals = coeff_map(vals)
        weight = active.sq_weights * vals
    k_p = np.add.reduceat(weight, active.sq_patch_offsets[:-1])
    patch_mats = k_p[:, None, None] * _patch_gram(active)
    elem_mats = np.add.reduceat(patch_mats, active.patch_offsets[:-1], axis=0)
    return _to_csr(active, elem_mats)


def assemble_normal_stabilization(active: ActiveMesh, element_weight=None) -> sp.csr_matrix:
    """(w_e n.grad u, n.grad v)_{Omega_h} over the cut tetrahedra.

    ``element_weight`` is an optional per-element factor (scalar or (n_e,)
    array); the schemes use the element diameter and its inverse.
    """
    elem_mats = np.einsum("eik,ekl,ejl->eij", active.grads, active.stab_metric, active.grads)
    if element_weight is not None:
        elem_mats = np.asarray(element_weight, dtype=float).reshape(-1, 1, 1) * elem_mats
    return _to_csr(active, elem_mats)


def assemble_f0prime_load(active: ActiveMesh, c: np.ndarray) -> np.ndarray:
    """Load vector w_j = (f0'(c_h), psi_j)_{Gamma_h}."""
    vals = f0_prime(interpolate_at_surface_qp(active, c))
    return assemble_load(active, vals)


def assemble_load(active: ActiveMesh, values) -> np.ndarray:
    """Load vector (f, psi_j)_{Gamma_h}.

    ``values`` is either a callable evaluated at the surface quadrature
    points or a precomputed (Q,) array.
    """
    if callable(values):
        vals = np.asarray(values(active.sq_points), dtype=float)
    else:
        vals = np.asarray(values, dtype=float)
    out = np.zeros(active.n_dofs)
    np.add.at(out, _qdofs(active), (active.sq_weights * vals)[:, None] * active.sq_bary)
    return out


def compute_E1(active: ActiveMesh, c: np.ndarray) -> float:
    """E1(c) = int_{Gamma_h} f0(c_h) ds, exact for the degree-4 rule."""
    vals = f0(interpolate_at_surface_qp(active, c))
    return float(np.dot(active.sq_weights, vals))


def compute_mass(active: ActiveMesh, c: np.ndarray) -> float:
    """int_{Gamma_h} c_h ds."""
    return float(np.dot(active.sq_weights, interpolate_at_surface_qp(active, c)))


def l2_norm_gamma(active: ActiveMesh, c: np.ndarray) -> float:
    """||c_h||_{L2(Gamma_h)}."""
    vals = interpolate_at_surface_qp(active, c)
    return float(np.sqrt(np.dot(active.sq_weights, vals**2)))


def export_matrix_market(path, matrix) -> None:
    """Debug export of an assembled matrix in Matrix Market format."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(matrix))


@dataclass
class AssembledForms:
    """Static forms of one active mesh plus the per-step coefficient forms.

    ``stab_h`` / ``stab_invh`` carry the per-element diameter weighting used
    by the schemes; ``h_stab`` is the common element diameter (the band mesh
    is uniform, which is asserted at assembly).  ``mobility`` and
    ``sav_load`` are refreshed by the integrators at each step's reference
    field.
    """

    active: ActiveMesh
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix
    stab: sp.csr_matrix
    stab_h: sp.csr_matrix
    stab_invh: sp.csr_matrix
    h_stab: float
    mobility: sp.csr_matrix | None = field(default=None)
    sav_load: np.ndarray | None = field(default=None)

    def update_coefficient_forms(self, c_ref: np.ndarray, physics) -> None:
        """Assemble the mobility stiffness and SAV load at the reference field."""
        self.mobility = assemble_surface_stiffness(self.active, c_ref, physics.mobility)
        self.sav_load = assemble_f0prime_load(self.active, c_ref)


def assemble_forms(active: ActiveMesh) -> AssembledForms:
    d = active.diameters
    h = float(np.mean(d))
    if np.max(d) - np.min(d) > 1e-9 * h:
        raise ValueError("active mesh has non-uniform element diameters; expected a uniform band mesh")
    return AssembledForms(
        active=active,
        mass=assemble_surface_mass(active),
        stiffness=assemble_surface_stiffness(active),
        stab=assemble_normal_stabilization(active),
        stab_h=assemble_normal_stabilization(active, d),
        stab_invh=assemble_normal_stabilization(active, 1.0 / d),
        h_stab=h,
    )
