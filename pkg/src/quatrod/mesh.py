"""Element partition, Lagrange bases, Gauss-Legendre rules, DOF slices.

The parameter interval [0, 1] is split into ``n_el`` equal element
intervals; a p-th order element carries p+1 evenly spaced nodes, and
interior boundary nodes are shared, so there are ``N = p*n_el + 1``
nodes.  Each node owns 7 position coordinates (3 centerline + 4
quaternion) and 6 velocity coordinates (3 linear + 3 angular);
connectivity is realized as precomputed integer index arrays used for
gather/scatter, never as Boolean matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

SUPPORTED_ORDERS = (1, 2, 3)

N_POS_PER_NODE = 7
N_VEL_PER_NODE = 6


def lagrange_basis(nodes, xi):
    """Values and xi-derivatives of the Lagrange basis at one point.

    ``nodes`` are the p+1 strictly increasing interpolation points; the
    derivative is evaluated by the product rule directly, so the points
    themselves are fine (no removable-singularity issues).
    Returns ``(values, derivatives)``, each of shape (p+1,).
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    if n < 2 or np.any(np.diff(nodes) <= 0.0):
        raise ValueError("nodes must be strictly increasing")
    values = np.ones(n)
    derivatives = np.zeros(n)
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            values[i] *= (xi - nodes[k]) / (nodes[i] - nodes[k])
            term = 1.0 / (nodes[i] - nodes[k])
            for j in range(n):
                if j == i or j == k:
                    continue
                term *= (xi - nodes[j]) / (nodes[i] - nodes[j])
            derivatives[i] += term
    return values, derivatives


def lagrange_table(nodes, xis):
    """Basis values/derivatives at many points: two (m, p+1) tables."""
    xis = np.atleast_1d(np.asarray(xis, dtype=float))
    N = np.empty((xis.size, len(nodes)))
    N_xi = np.empty_like(N)
    for g, xi in enumerate(xis):
        N[g], N_xi[g] = lagrange_basis(nodes, xi)
    return N, N_xi


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights on an interval [a, b]; weights sum to b - a."""

    points: np.ndarray
    weights: np.ndarray


def _legendre_and_derivative(n, x):
    """P_n(x) and P_n'(x) by the three-term recurrence, |x| < 1."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_legendre(n_pt, interval=(-1.0, 1.0)):
    """Gauss-Legendre rule with ``n_pt`` points mapped to ``interval``.

    Nodes are found by Newton iteration on P_n with Chebyshev initial
    guesses, converged to 1e-15.
    """
    if not 1 <= n_pt <= 64:
        raise ValueError("point count must be in 1..64")
    k = np.arange(n_pt)
    x = np.cos(np.pi * (k + 0.75) / (n_pt + 0.5))
    if n_pt == 1:
        x = np.zeros(1)
        dp = np.full(1, 1.0)
    else:
        for _ in range(100):
            p, dp = _legendre_and_derivative(n_pt, x)
            dx = p / dp
            x -= dx
            if np.max(np.abs(dx)) < 1.0e-15:
                break
        _, dp = _legendre_and_derivative(n_pt, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    a, b = interval
    points = 0.5 * (b - a) * x[::-1] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[::-1]
    return QuadratureRule(points=points, weights=weights)


@dataclass(frozen=True)
class ElementQuadrature:
    """A per-element quadrature rule with precomputed shape tables.

    ``points`` has shape (n_el, n_pt) in the global parameter; uniform
    elements make ``weights`` (n_pt,) and the basis tables ``N`` /
    ``N_xi`` (n_pt, p+1) identical across elements.
    """

    points: np.ndarray
    weights: np.ndarray
    N: np.ndarray
    N_xi: np.ndarray

    @property
    def n_points(self):
        return self.weights.size


class MeshTopology:
    """Uniform p-th order Lagrange partition of [0, 1] with DOF layout."""

    def __init__(self, n_el, p):
        if p not in SUPPORTED_ORDERS:
            raise ValueError(f"polynomial order must be one of {SUPPORTED_ORDERS}")
        if n_el < 1:
            raise ValueError("need at least one element")
        self.n_el = int(n_el)
        self.p = int(p)
        self.element_boundaries = np.linspace(0.0, 1.0, self.n_el + 1)
        self.n_nodes = self.p * self.n_el + 1
        self.node_params = np.linspace(0.0, 1.0, self.n_nodes)
        self.n_q = N_POS_PER_NODE * self.n_nodes
        self.n_u = N_VEL_PER_NODE * self.n_nodes

        # element connectivity: global node ids per (element, local node)
        self.el_nodes = (
            self.p * np.arange(self.n_el)[:, None] + np.arange(self.p + 1)[None, :]
        )
        # index arrays into the global coordinate tuples
        self.el_q_r = (N_POS_PER_NODE * self.el_nodes)[..., None] + np.arange(3)
        self.el_q_P = (N_POS_PER_NODE * self.el_nodes)[..., None] + 3 + np.arange(4)
        self.el_u_r = (N_VEL_PER_NODE * self.el_nodes)[..., None] + np.arange(3)
        self.el_u_phi = (N_VEL_PER_NODE * self.el_nodes)[..., None] + 3 + np.arange(3)
        self.el_q = (
            N_POS_PER_NODE * self.el_nodes[..., None] + np.arange(N_POS_PER_NODE)
        ).reshape(self.n_el, -1)
        self.el_u = (
            N_VEL_PER_NODE * self.el_nodes[..., None] + np.arange(N_VEL_PER_NODE)
        ).reshape(self.n_el, -1)

    def element_of(self, xi):
        """Element index containing xi (half-open intervals, closed at 1)."""
        e = int(np.floor(xi * self.n_el))
        return min(max(e, 0), self.n_el - 1)

    def element_node_params(self, e):
        """Parameter positions of element e's p+1 nodes."""
        return self.node_params[self.el_nodes[e]]

    def position_coords(self, node):
        """Global indices of a node's 7 position coordinates."""
        return np.arange(N_POS_PER_NODE * node, N_POS_PER_NODE * (node + 1))

    def velocity_coords(self, node):
        """Global indices of a node's 6 velocity coordinates."""
        return np.arange(N_VEL_PER_NODE * node, N_VEL_PER_NODE * (node + 1))

    def quaternion_view(self, q):
        """(N, 4) view-like array of all nodal quaternions in q."""
        return np.asarray(q).reshape(self.n_nodes, N_POS_PER_NODE)[:, 3:]

    def centerline_view(self, q):
        """(N, 3) array of all nodal centerline points in q."""
        return np.asarray(q).reshape(self.n_nodes, N_POS_PER_NODE)[:, :3]

    def internal_rule_points(self):
        """Reduced rule size for internal forces: p points."""
        return self.p

    def full_rule_points(self):
        """Rule size for mass/external/gyroscopic terms: ceil((p+1)^2/2)."""
        return ceil((self.p + 1) ** 2 / 2)


def element_slices(mesh, e):
    """Index arrays selecting element e's position and velocity coords.

    Adjacent elements overlap in the shared node's indices.
    """
    if not 0 <= e < mesh.n_el:
        raise IndexError(f"element {e} out of range")
    return mesh.el_q[e].copy(), mesh.el_u[e].copy()


def element_quadrature(mesh, n_pt):
    """Quadrature points/weights plus basis tables for every element."""
    h = 1.0 / mesh.n_el
    rule = gauss_legendre(n_pt, (0.0, h))
    local_nodes = np.linspace(0.0, h, mesh.p + 1)
    N, N_xi = lagrange_table(local_nodes, rule.points)
    points = mesh.element_boundaries[:-1][:, None] + rule.points[None, :]
    return ElementQuadrature(points=points, weights=rule.weights, N=N, N_xi=N_xi)
