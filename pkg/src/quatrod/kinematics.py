"""Discrete field evaluation: centerline, orientations, strains.

Centerline points and nodal rotation matrices are both interpolated by
the same Lagrange basis, so the orientation field between nodes is
generally *not* orthogonal; no re-orthogonalization is applied anywhere.
The curvature uses the skew-part extraction, which is exact for the
orthogonal case and the proper projection otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroTangent
from .mesh import lagrange_basis
from .rotations import inv_skew_symmetric_part, rotation_from_quaternion


@dataclass
class FieldEvaluation:
    """All pointwise fields needed by the virtual-work integrands.

    gamma_bar = A^T r_xi (m), kappa_bar = axial(Skw(A^T A_xi)) (rad);
    the strain measures divide by the reference tangent length J:
    gamma = gamma_bar / J (dimensionless), kappa = kappa_bar / J (1/m).
    """

    r: np.ndarray
    r_xi: np.ndarray
    A: np.ndarray
    A_xi: np.ndarray
    J: float
    gamma_bar: np.ndarray
    kappa_bar: np.ndarray
    gamma: np.ndarray
    kappa: np.ndarray


def split_element_coords(q_e, p):
    """(p+1, 3) centerline points and (p+1, 4) quaternions of q_e."""
    q_e = np.asarray(q_e, dtype=float).reshape(p + 1, 7)
    return q_e[:, :3], q_e[:, 3:]


def interpolate_fields(r_nodes, A_nodes, N, N_xi):
    """Batched field interpolation at tabulated points.

    ``r_nodes`` (n_el, p+1, 3) and ``A_nodes`` (n_el, p+1, 3, 3) hold
    nodal data; ``N``/``N_xi`` (n_pt, p+1) are basis tables.  Returns
    r, r_xi (n_el, n_pt, 3), A, A_xi (n_el, n_pt, 3, 3), and the scaled
    strains gamma_bar, kappa_bar (n_el, n_pt, 3).
    """
    r = np.einsum("gi,eic->egc", N, r_nodes)
    r_xi = np.einsum("gi,eic->egc", N_xi, r_nodes)
    A = np.einsum("gi,eixy->egxy", N, A_nodes)
    A_xi = np.einsum("gi,eixy->egxy", N_xi, A_nodes)
    gamma_bar = np.einsum("egyx,egy->egx", A, r_xi)
    kappa_bar = inv_skew_symmetric_part(
        np.einsum("egyx,egyz->egxz", A, A_xi)
    )
    return r, r_xi, A, A_xi, gamma_bar, kappa_bar


def evaluate_fields(mesh, q_e, e, xi, J):
    """Fields and strain measures of element e at parameter xi.

    ``q_e`` are the element's 7*(p+1) position coordinates and ``J`` the
    frozen reference tangent length at xi.  At nodes the interpolation
    reproduces the nodal values exactly.
    """
    r_nodes, P_nodes = split_element_coords(q_e, mesh.p)
    A_nodes = rotation_from_quaternion(P_nodes)
    N, N_xi = lagrange_basis(mesh.element_node_params(e), xi)
    r = N @ r_nodes
    r_xi = N_xi @ r_nodes
    A = np.einsum("i,ixy->xy", N, A_nodes)
    A_xi = np.einsum("i,ixy->xy", N_xi, A_nodes)
    gamma_bar = A.T @ r_xi
    kappa_bar = inv_skew_symmetric_part(A.T @ A_xi)
    return FieldEvaluation(
        r=r,
        r_xi=r_xi,
        A=A,
        A_xi=A_xi,
        J=float(J),
        gamma_bar=gamma_bar,
        kappa_bar=kappa_bar,
        gamma=gamma_bar / J,
        kappa=kappa_bar / J,
    )


@dataclass
class ReferenceGeometry:
    """Reference data frozen at the quadrature points of both rules.

    The internal-force (reduced) rule caches J and the reference strains
    gamma0/kappa0; the full rule caches J only.  Everything is sampled
    from the discrete reference configuration, which makes the reference
    state exactly stress free.
    """

    J_int: np.ndarray      # (n_el, n_int)
    gamma0: np.ndarray     # (n_el, n_int, 3)
    kappa0: np.ndarray     # (n_el, n_int, 3)
    J_full: np.ndarray     # (n_el, n_full)


def reference_from_configuration(mesh, q0, quad_int, quad_full):
    """Freeze J (both rules) and reference strains (reduced rule) from q0."""
    q0 = np.asarray(q0, dtype=float)
    r_nodes = q0[mesh.el_q_r]
    A_nodes = rotation_from_quaternion(q0[mesh.el_q_P])

    _, r_xi_full, *_ = interpolate_fields(r_nodes, A_nodes, quad_full.N, quad_full.N_xi)
    J_full = np.linalg.norm(r_xi_full, axis=-1)

    _, r_xi_int, _, _, gamma_bar, kappa_bar = interpolate_fields(
        r_nodes, A_nodes, quad_int.N, quad_int.N_xi
    )
    J_int = np.linalg.norm(r_xi_int, axis=-1)

    if np.any(J_int <= 1.0e-14) or np.any(J_full <= 1.0e-14):
        raise ZeroTangent("reference tangent vanishes at a quadrature point")

    return ReferenceGeometry(
        J_int=J_int,
        gamma0=gamma_bar / J_int[..., None],
        kappa0=kappa_bar / J_int[..., None],
        J_full=J_full,
    )
