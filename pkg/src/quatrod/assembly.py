"""Global assembly: internal/external/gyroscopic forces, mass matrix,
quaternion-unity constraints, and the kinematic map qdot = B(q) u.

Element contributions are evaluated vectorized over all elements and
quadrature points and scattered with precomputed index arrays; the
summation order per global index is fixed, so results are deterministic.

Internal forces are integrated with the reduced p-point rule; mass,
external, and gyroscopic terms with the full ceil((p+1)^2/2)-point rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .constitutive import contact_force_and_moment, strain_energy_density
from .kinematics import (
    evaluate_fields,
    interpolate_fields,
    reference_from_configuration,
)
from .mesh import element_quadrature
from .rotations import quaternion_rate_matrix, rotation_from_quaternion

LoadValue = Union[None, np.ndarray, Callable]


@dataclass
class LoadSpec:
    """External loads; all optional, all scalable by a load factor.

    Distributed entries are densities with respect to the reference arc
    length: ``body_force`` (N/m) lives in the inertial frame,
    ``body_moment`` (N*m/m) in the cross-section frame.  Boundary forces
    (N, inertial frame) and moments (N*m, cross-section frame) act at
    the parameter boundaries 0 ("root") and 1 ("tip").  Each entry is a
    3-vector, or a callable: distributed loads are called as f(xi, t)
    with xi broadcastable, boundary loads as f(t).
    """

    body_force: LoadValue = None
    body_moment: LoadValue = None
    root_force: LoadValue = None
    root_moment: LoadValue = None
    tip_force: LoadValue = None
    tip_moment: LoadValue = None

    @property
    def is_time_constant(self):
        return not any(
            callable(v)
            for v in (
                self.body_force,
                self.body_moment,
                self.root_force,
                self.root_moment,
                self.tip_force,
                self.tip_moment,
            )
        )


def _distributed(value, xi, t):
    if callable(value):
        return np.broadcast_to(np.asarray(value(xi, t), dtype=float), xi.shape + (3,))
    return np.broadcast_to(np.asarray(value, dtype=float), xi.shape + (3,))


def _boundary(value, t):
    if callable(value):
        return np.asarray(value(t), dtype=float)
    return np.asarray(value, dtype=float)


@dataclass(frozen=True)
class TipBody:
    """Rigid body attached at the tip node, center of mass coincident.

    ``inertia`` (kg*m^2) is expressed in the tip cross-section frame.
    The attachment augments the tip node's diagonal mass blocks and adds
    the body's gyroscopic force; it keeps the mass matrix constant and
    symmetric and the dynamics in pure ODE form.
    """

    mass: float
    inertia: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float))
        if self.mass <= 0.0:
            raise ValueError("tip body mass must be positive")
        if self.inertia.shape != (3, 3):
            raise ValueError("tip body inertia must be 3x3")


class RodModel:
    """Discrete rod: mesh + cross-section data + frozen reference state.

    ``q0`` is the reference configuration; reference tangent lengths and
    strains are sampled from it at the quadrature points at construction
    time, which makes ``internal_forces(q0)`` vanish identically.
    """

    def __init__(self, mesh, material, q0, tip_body: Optional[TipBody] = None):
        q0 = np.asarray(q0, dtype=float)
        if q0.shape != (mesh.n_q,):
            raise ValueError(f"q0 must have shape ({mesh.n_q},)")
        self.mesh = mesh
        self.material = material
        self.tip_body = tip_body
        self.q0 = q0.copy()

        self.quad_int = element_quadrature(mesh, mesh.internal_rule_points())
        self.quad_full = element_quadrature(mesh, mesh.full_rule_points())
        self.reference = reference_from_configuration(
            mesh, q0, self.quad_int, self.quad_full
        )
        self.tip_node = mesh.n_nodes - 1
        self._mass = None

    # -- gathering ---------------------------------------------------

    def _nodal_fields(self, q):
        q = np.asarray(q, dtype=float)
        r_nodes = q[self.mesh.el_q_r]
        A_nodes = rotation_from_quaternion(q[self.mesh.el_q_P])
        return r_nodes, A_nodes

    def fields_at(self, q, xi, J=None):
        """Pointwise fields of configuration q at parameter xi.

        If ``J`` is omitted it is computed from the reference
        configuration's tangent at xi.
        """
        mesh = self.mesh
        e = mesh.element_of(xi)
        if J is None:
            q0_e = self.q0[mesh.el_q[e]]
            ref = evaluate_fields(mesh, q0_e, e, xi, 1.0)
            J = float(np.linalg.norm(ref.r_xi))
        return evaluate_fields(mesh, np.asarray(q)[mesh.el_q[e]], e, xi, J)

    # -- strain energy and internal forces ----------------------------

    def _strain_state(self, q):
        r_nodes, A_nodes = self._nodal_fields(q)
        quad = self.quad_int
        _, _, A, _, gamma_bar, kappa_bar = interpolate_fields(
            r_nodes, A_nodes, quad.N, quad.N_xi
        )
        J = self.reference.J_int
        gamma = gamma_bar / J[..., None]
        kappa = kappa_bar / J[..., None]
        return A, gamma_bar, kappa_bar, gamma, kappa

    def strain_energy(self, q):
        """Total stored energy (J): reduced-rule integral of W*J."""
        _, _, _, gamma, kappa = self._strain_state(q)
        W = strain_energy_density(
            gamma, kappa, self.reference.gamma0, self.reference.kappa0, self.material
        )
        return float(np.einsum("g,eg,eg->", self.quad_int.weights, self.reference.J_int, W))

    def internal_forces(self, q):
        """Generalized internal forces, shape (n_u,)."""
        A, gamma_bar, kappa_bar, gamma, kappa = self._strain_state(q)
        n, m = contact_force_and_moment(
            gamma, kappa, self.reference.gamma0, self.reference.kappa0, self.material
        )
        An = np.einsum("egxy,egy->egx", A, n)
        coupling = np.cross(gamma_bar, n) + np.cross(kappa_bar, m)
        w = self.quad_int.weights
        N, N_xi = self.quad_int.N, self.quad_int.N_xi
        f_r = -np.einsum("g,gi,egc->eic", w, N_xi, An)
        f_phi = -np.einsum("g,gi,egc->eic", w, N_xi, m) + np.einsum(
            "g,gi,egc->eic", w, N, coupling
        )
        f = np.zeros(self.mesh.n_u)
        np.add.at(f, self.mesh.el_u_r, f_r)
        np.add.at(f, self.mesh.el_u_phi, f_phi)
        return f

    # -- external forces ----------------------------------------------

    def external_forces(self, t, q, loads: LoadSpec, load_factor=1.0):
        """Generalized external forces at time t, shape (n_u,).

        Distributed densities are integrated with the full rule and the
        frozen reference J; boundary loads add to the end nodes'
        slots (forces to translational, moments to rotational ones).
        The configuration q does not enter: forces are inertial-frame,
        moments cross-section-frame by definition.
        """
        mesh = self.mesh
        f = np.zeros(mesh.n_u)
        quad = self.quad_full
        w, N = quad.weights, quad.N
        J = self.reference.J_full
        if loads.body_force is not None:
            b = _distributed(loads.body_force, quad.points, t)
            np.add.at(
                f, mesh.el_u_r, np.einsum("g,gi,eg,egc->eic", w, N, J, b)
            )
        if loads.body_moment is not None:
            c = _distributed(loads.body_moment, quad.points, t)
            np.add.at(
                f, mesh.el_u_phi, np.einsum("g,gi,eg,egc->eic", w, N, J, c)
            )
        if loads.root_force is not None:
            f[0:3] += _boundary(loads.root_force, t)
        if loads.root_moment is not None:
            f[3:6] += _boundary(loads.root_moment, t)
        tip = 6 * self.tip_node
        if loads.tip_force is not None:
            f[tip : tip + 3] += _boundary(loads.tip_force, t)
        if loads.tip_moment is not None:
            f[tip + 3 : tip + 6] += _boundary(loads.tip_moment, t)
        return load_factor * f

    # -- inertia -------------------------------------------------------

    def mass_matrix(self):
        """Constant symmetric mass matrix (n_u, n_u), tip body included."""
        if self._mass is not None:
            return self._mass
        mesh = self.mesh
        mat = self.material
        quad = self.quad_full
        # overlap integrals c[e, i, k] = int N_i N_k J dxi
        c = np.einsum("g,gi,gk,eg->eik", quad.weights, quad.N, quad.N, self.reference.J_full)
        npe = mesh.p + 1
        Me = np.zeros((mesh.n_el, 6 * npe, 6 * npe))
        eye3 = np.eye(3)
        for i in range(npe):
            for k in range(npe):
                ri, pi = slice(6 * i, 6 * i + 3), slice(6 * i + 3, 6 * i + 6)
                rk, pk = slice(6 * k, 6 * k + 3), slice(6 * k + 3, 6 * k + 6)
                Me[:, ri, rk] = mat.A_rho0 * c[:, i, k, None, None] * eye3
                Me[:, pi, pk] = c[:, i, k, None, None] * mat.I_rho0
        M = np.zeros((mesh.n_u, mesh.n_u))
        for e in range(mesh.n_el):
            idx = mesh.el_u[e]
            M[np.ix_(idx, idx)] += Me[e]
        if self.tip_body is not None:
            tip = 6 * self.tip_node
            M[tip : tip + 3, tip : tip + 3] += self.tip_body.mass * eye3
            M[tip + 3 : tip + 6, tip + 3 : tip + 6] += self.tip_body.inertia
        self._mass = M
        return M

    def gyroscopic_forces(self, u):
        """Gyroscopic force term of the equations of motion, shape (n_u,).

        Signed so that udot = M^-1 (f_gyr + f_int + f_ext): the
        rotational entries carry -omega x I_rho0 omega weighted by the
        velocity interpolation, so free gyroscopic motion conserves
        energy (u^T f_gyr == 0 identically).
        """
        u = np.asarray(u, dtype=float)
        mesh = self.mesh
        quad = self.quad_full
        omega_nodes = u[mesh.el_u_phi]
        omega = np.einsum("gi,eic->egc", quad.N, omega_nodes)
        Iw = np.einsum("xy,egy->egx", self.material.I_rho0, omega)
        wxIw = np.cross(omega, Iw)
        f_phi = -np.einsum(
            "g,gi,eg,egc->eic", quad.weights, quad.N, self.reference.J_full, wxIw
        )
        f = np.zeros(mesh.n_u)
        np.add.at(f, mesh.el_u_phi, f_phi)
        if self.tip_body is not None:
            tip = 6 * self.tip_node
            om = u[tip + 3 : tip + 6]
            f[tip + 3 : tip + 6] -= np.cross(om, self.tip_body.inertia @ om)
        return f

    # -- constraints and kinematics -----------------------------------

    def constraints(self, q):
        """Quaternion-unity residuals g_a = ||P_a||^2 - 1, shape (N,)."""
        P = self.mesh.quaternion_view(q)
        return np.einsum("ai,ai->a", P, P) - 1.0

    def constraint_jacobian(self, q):
        """Dense (N, n_q) Jacobian of :meth:`constraints`: rows 2 P_a^T."""
        mesh = self.mesh
        P = mesh.quaternion_view(q)
        G = np.zeros((mesh.n_nodes, mesh.n_q))
        for a in range(mesh.n_nodes):
            G[a, 7 * a + 3 : 7 * a + 7] = 2.0 * P[a]
        return G

    def qdot(self, q, u):
        """Kinematic map qdot = B(q) u, block diagonal per node."""
        mesh = self.mesh
        q = np.asarray(q, dtype=float)
        u = np.asarray(u, dtype=float)
        un = u.reshape(mesh.n_nodes, 6)
        qd = np.zeros(mesh.n_q)
        qd_n = qd.reshape(mesh.n_nodes, 7)
        qd_n[:, :3] = un[:, :3]
        Q = quaternion_rate_matrix(mesh.quaternion_view(q))
        qd_n[:, 3:] = np.einsum("aij,aj->ai", Q, un[:, 3:])
        return qd

    # -- convenience ---------------------------------------------------

    def total_reference_length(self):
        """Reference arc length: full-rule integral of J."""
        return float(np.einsum("g,eg->", self.quad_full.weights, self.reference.J_full))

    def normalized_quaternions(self, q):
        """Copy of q with every nodal quaternion scaled to unit norm."""
        qn = np.asarray(q, dtype=float).copy()
        P = qn.reshape(self.mesh.n_nodes, 7)[:, 3:]
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        return qn
