"""Pre-curved reference configurations from framed target curves.

A target curve is sampled as positions plus orthonormal frames (helix
with Serret-Frenet frames, or a straight line); nodal coordinates are
then fitted by minimizing the squared relative twists between target
frames and the interpolated configuration, with Levenberg-Marquardt on
the unconstrained coordinates and a final normalization of all nodal
quaternions.  The normalization is exact for the decision variables
because the rotation map is scale invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame, FitDivergence
from .kinematics import interpolate_fields
from .mesh import lagrange_basis
from .rotations import (
    quaternion_from_rotation,
    relative_twists,
    rotation_from_quaternion,
)

LM_DAMPING_START = 1.0e-3
LM_MAX_ITER = 100
GRADIENT_TOL = 1.0e-10
STEP_TOL = 1.0e-12
FD_STEP = 1.0e-7


@dataclass(frozen=True)
class HelixSpec:
    """Perfect helix: coil radius R (m), pitch k (m), coil count n_c."""

    R: float
    k: float
    n_c: float

    def __post_init__(self):
        if self.R <= 0.0 or self.n_c <= 0.0:
            raise ValueError("coil radius and coil count must be positive")

    @property
    def c(self):
        """Pitch parameter k / (2 pi R)."""
        return self.k / (2.0 * np.pi * self.R)


def helix_point(spec, xi):
    """Helix centerline r(xi) = R (sin phi, -cos phi, c phi), batched."""
    phi = 2.0 * np.pi * spec.n_c * np.asarray(xi, dtype=float)
    return spec.R * np.stack(
        (np.sin(phi), -np.cos(phi), spec.c * phi), axis=-1
    )


def helix_derivatives(spec, xi):
    """Analytic first and second xi-derivatives of the helix, batched."""
    xi = np.asarray(xi, dtype=float)
    rate = 2.0 * np.pi * spec.n_c
    phi = rate * xi
    d1 = spec.R * rate * np.stack(
        (np.cos(phi), np.sin(phi), np.full_like(phi, spec.c)), axis=-1
    )
    d2 = spec.R * rate * rate * np.stack(
        (-np.sin(phi), np.cos(phi), np.zeros_like(phi)), axis=-1
    )
    return d1, d2


@dataclass
class FramedCurveSamples:
    """Linearly spaced target positions and frames on [0, 1].

    ``xi`` (m,), ``r`` (m, 3), ``A`` (m, 3, 3) with orthonormal frames.
    """

    xi: np.ndarray
    r: np.ndarray
    A: np.ndarray


def frames_from_derivatives(d1, d2):
    """Serret-Frenet frames: e_x = d1/|d1|, e_y = d2/|d2|, e_z = e_x x e_y."""
    n2 = np.linalg.norm(d2, axis=-1)
    if np.any(n2 <= 1.0e-14):
        raise DegenerateFrame("second derivative vanishes; no normal direction")
    e_x = d1 / np.linalg.norm(d1, axis=-1, keepdims=True)
    e_y = d2 / n2[..., None]
    e_z = np.cross(e_x, e_y)
    return np.stack((e_x, e_y, e_z), axis=-1)


def sample_helix(spec, m):
    """Sample m helix points with Serret-Frenet frames at j/(m-1)."""
    if m < 2:
        raise ValueError("need at least two samples")
    xi = np.linspace(0.0, 1.0, m)
    d1, d2 = helix_derivatives(spec, xi)
    return FramedCurveSamples(xi=xi, r=helix_point(spec, xi), A=frames_from_derivatives(d1, d2))


def sample_straight_line(origin, direction, length, m, frame=None):
    """Sample a straight segment with a constant frame (default: the
    frame whose first column is the direction)."""
    if m < 2:
        raise ValueError("need at least two samples")
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    xi = np.linspace(0.0, 1.0, m)
    r = np.asarray(origin, dtype=float) + length * xi[:, None] * direction
    if frame is None:
        frame = _frame_with_first_axis(direction)
    A = np.broadcast_to(frame, (m, 3, 3)).copy()
    return FramedCurveSamples(xi=xi, r=r, A=A)


def _frame_with_first_axis(e_x):
    """Any right-handed orthonormal frame whose first column is e_x."""
    helper = np.array([0.0, 0.0, 1.0])
    if abs(e_x @ helper) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    e_y = np.cross(helper, e_x)
    e_y /= np.linalg.norm(e_y)
    return np.column_stack((e_x, e_y, np.cross(e_x, e_y)))


def initial_guess(samples, mesh):
    """Direct nodal assignment from the nearest samples.

    Positions copy the nearest sample; quaternions come from the nearest
    sample's frame, hemisphere-aligned along the node chain so adjacent
    quaternions satisfy P_a . P_{a+1} >= 0.
    """
    q = np.zeros(mesh.n_q)
    qn = q.reshape(mesh.n_nodes, 7)
    prev = None
    for a, xi_a in enumerate(mesh.node_params):
        j = int(np.argmin(np.abs(samples.xi - xi_a)))
        P = quaternion_from_rotation(samples.A[j])
        if prev is not None and prev @ P < 0.0:
            P = -P
        qn[a, :3] = samples.r[j]
        qn[a, 3:] = P
        prev = P
    return q


class _SampleInterpolation:
    """Precomputed basis tables mapping nodal coords to sample fields."""

    def __init__(self, samples, mesh):
        m = samples.xi.size
        self.elements = np.array([mesh.element_of(x) for x in samples.xi])
        counts = np.bincount(self.elements, minlength=mesh.n_el)
        if np.any(counts == 0):
            raise ValueError("every element needs at least one sample")
        self.N = np.empty((m, mesh.p + 1))
        for j, (e, x) in enumerate(zip(self.elements, samples.xi)):
            self.N[j], _ = lagrange_basis(mesh.element_node_params(e), x)
        self.node_ids = mesh.el_nodes[self.elements]  # (m, p+1)

    def evaluate(self, q, mesh):
        qn = q.reshape(mesh.n_nodes, 7)
        r_nodes = qn[self.node_ids, :3]                    # (m, p+1, 3)
        A_nodes = rotation_from_quaternion(qn[self.node_ids, 3:])
        r = np.einsum("ji,jic->jc", self.N, r_nodes)
        A = np.einsum("ji,jixy->jxy", self.N, A_nodes)
        return r, A


def twist_residuals(samples, mesh, q, interp=None):
    """Stacked relative twists theta_j between targets and q, (6m,)."""
    if interp is None:
        interp = _SampleInterpolation(samples, mesh)
    r, A = interp.evaluate(np.asarray(q, dtype=float), mesh)
    return relative_twists(samples.A, samples.r, A, r).ravel()


def fit_configuration(samples, mesh, max_iter=LM_MAX_ITER):
    """Fit nodal coordinates to the framed samples; returns q0.

    Levenberg-Marquardt on K(q) = 0.5*sum ||theta_j||^2 starting from
    the direct nodal assignment, followed by quaternion normalization.
    Stops when the gradient max-norm falls below 1e-10*(1+K) or the step
    stagnates; raises FitDivergence after ``max_iter`` iterations.
    """
    interp = _SampleInterpolation(samples, mesh)
    q = initial_guess(samples, mesh)

    def residuals(x):
        return twist_residuals(samples, mesh, x, interp)

    rho = residuals(q)
    cost = 0.5 * (rho @ rho)
    lam = LM_DAMPING_START
    for _ in range(max_iter):
        J = _fd_jacobian(residuals, q, rho)
        gradient = J.T @ rho
        if np.max(np.abs(gradient)) <= GRADIENT_TOL * (1.0 + cost):
            break
        JtJ = J.T @ J
        accepted = False
        while not accepted:
            H = JtJ + lam * np.eye(q.size)
            try:
                delta = np.linalg.solve(H, -gradient)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            rho_trial = residuals(q + delta)
            cost_trial = 0.5 * (rho_trial @ rho_trial)
            if cost_trial < cost:
                q = q + delta
                rho, cost = rho_trial, cost_trial
                lam *= 0.5
                accepted = True
            else:
                lam *= 4.0
                if lam > 1.0e12:
                    break
        if not accepted:
            break
        if np.max(np.abs(delta)) <= STEP_TOL * (1.0 + np.max(np.abs(q))):
            break
    else:
        raise FitDivergence(
            f"Levenberg-Marquardt did not meet a stop rule in {max_iter} iterations"
        )

    qn = q.reshape(mesh.n_nodes, 7)
    qn[:, 3:] /= np.linalg.norm(qn[:, 3:], axis=1, keepdims=True)
    return q


def _fd_jacobian(fun, x, f0):
    J = np.empty((f0.size, x.size))
    xp = x.copy()
    for j in range(x.size):
        h = FD_STEP * (1.0 + abs(x[j]))
        xp[j] = x[j] + h
        J[:, j] = (fun(xp) - f0) / h
        xp[j] = x[j]
    return J
