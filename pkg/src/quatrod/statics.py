"""Load-stepped Newton solver for constrained static equilibrium.

The unknowns are the 7 position coordinates of every free node; the
equations are the free nodes' 6N force-balance rows plus their N
quaternion-unity constraints, so the reduced system is square.  Clamped
nodes are eliminated: their coordinates stay at the prescribed values,
their force rows and constraint rows are dropped.

The Newton update is a plain additive update on q, quaternion slots
included; no per-iteration normalization is applied -- the constraint
rows drive the norms back to one at convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .assembly import LoadSpec, RodModel
from .errors import NonConvergence, SingularJacobian

FD_STEP = 1.0e-7  # forward-difference step scale for the Jacobian


def free_node_indexing(mesh, fixed_nodes):
    """Free nodes and the index arrays of their coordinates/rows."""
    fixed = sorted(set(int(a) for a in fixed_nodes))
    for a in fixed:
        if not 0 <= a < mesh.n_nodes:
            raise ValueError(f"fixed node {a} out of range")
    free = np.array([a for a in range(mesh.n_nodes) if a not in fixed], dtype=int)
    if free.size == mesh.n_nodes:
        raise ValueError("at least one node must be clamped")
    free_q = (7 * free[:, None] + np.arange(7)[None, :]).ravel()
    free_u = (6 * free[:, None] + np.arange(6)[None, :]).ravel()
    return free, free_q, free_u


@dataclass
class StaticProblem:
    """Static load ramp: model, loads, clamped nodes, solver settings.

    The load factor ramps linearly through ``n_steps`` increments from 0
    to 1; convergence is max-abs residual <= tol per step.  Clamped
    nodes keep their coordinates from the model's reference state.
    """

    model: RodModel
    loads: LoadSpec
    fixed_nodes: Sequence[int] = (0,)
    n_steps: int = 1
    tol: float = 1.0e-8
    max_iter: int = 30


@dataclass
class StaticSolution:
    """Per-step history of a converged (or partially converged) ramp."""

    load_factors: list = field(default_factory=list)
    configurations: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    iterations: list = field(default_factory=list)

    def append(self, lam, q, res, iters):
        self.load_factors.append(float(lam))
        self.configurations.append(np.asarray(q).copy())
        self.residual_norms.append(float(res))
        self.iterations.append(int(iters))

    @property
    def q(self):
        """Final configuration."""
        return self.configurations[-1]


def _residual(problem, free, free_q, free_u, q, lam):
    model = problem.model
    f = model.internal_forces(q) + model.external_forces(
        0.0, q, problem.loads, load_factor=lam
    )
    g = model.constraints(q)
    return np.concatenate((f[free_u], g[free]))


def residual_jacobian(problem, q, lam, fixed_nodes=None):
    """Square Jacobian of the reduced residual at q.

    Force rows by forward differences with per-column step
    1e-7*(1+|q_j|); constraint rows are set analytically (2 P_a^T in the
    node's quaternion columns).  The matrix is unsymmetric in general.
    """
    fixed = problem.fixed_nodes if fixed_nodes is None else fixed_nodes
    free, free_q, free_u = free_node_indexing(problem.model.mesh, fixed)
    n_f = free_u.size
    r0 = _residual(problem, free, free_q, free_u, q, lam)
    J = np.empty((r0.size, free_q.size))
    qp = q.copy()
    for col, j in enumerate(free_q):
        h = FD_STEP * (1.0 + abs(q[j]))
        qp[j] = q[j] + h
        J[:, col] = (_residual(problem, free, free_q, free_u, qp, lam) - r0) / h
        qp[j] = q[j]
    # analytic constraint rows
    J[n_f:, :] = 0.0
    P = problem.model.mesh.quaternion_view(q)
    for row, a in enumerate(free):
        J[n_f + row, 7 * row + 3 : 7 * row + 7] = 2.0 * P[a]
    return J


def _newton(problem, free, free_q, free_u, q, lam):
    """Newton iteration at fixed load factor; returns (q, residual, iters)."""
    q = q.copy()
    res = _residual(problem, free, free_q, free_u, q, lam)
    norm = np.max(np.abs(res))
    for it in range(problem.max_iter):
        if norm <= problem.tol:
            return q, norm, it
        J = residual_jacobian(problem, q, lam)
        try:
            delta = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("non-finite Newton update")
        q[free_q] += delta
        res = _residual(problem, free, free_q, free_u, q, lam)
        norm = np.max(np.abs(res))
    if norm <= problem.tol:
        return q, norm, problem.max_iter
    return None, norm, problem.max_iter


def solve_static(problem: StaticProblem, q_start=None) -> StaticSolution:
    """Ramp the load factor to 1 and Newton-solve each increment.

    On a failed increment the current step is halved once (an extra
    intermediate solve); a second failure raises NonConvergence with the
    partial history attached.  q_start defaults to the model's reference
    configuration and must satisfy the unity constraints to 1e-10.
    """
    model = problem.model
    q = model.q0.copy() if q_start is None else np.asarray(q_start, dtype=float).copy()
    if np.max(np.abs(model.constraints(q))) > 1.0e-10:
        raise ValueError("q_start violates the quaternion-unity constraints")

    free, free_q, free_u = free_node_indexing(model.mesh, problem.fixed_nodes)
    solution = StaticSolution()
    res0 = np.max(np.abs(_residual(problem, free, free_q, free_u, q, 0.0)))
    solution.append(0.0, q, res0, 0)

    lam_prev = 0.0
    for k in range(1, problem.n_steps + 1):
        lam = k / problem.n_steps
        q_new, norm, iters = _newton(problem, free, free_q, free_u, q, lam)
        if q_new is None:
            # one automatic halving: solve the midpoint, then retry
            lam_mid = 0.5 * (lam_prev + lam)
            q_mid, norm_mid, iters_mid = _newton(
                problem, free, free_q, free_u, q, lam_mid
            )
            if q_mid is not None:
                q_new, norm, iters = _newton(
                    problem, free, free_q, free_u, q_mid, lam
                )
                iters += iters_mid
            if q_new is None:
                raise NonConvergence(k, problem.max_iter, norm, partial=solution)
        q = q_new
        lam_prev = lam
        solution.append(lam, q, norm, iters)
    return solution
