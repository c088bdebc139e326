"""Cross-section/material data and the quadratic stored-energy law.

The constitutive contract is the pair of maps (energy density, contact
force/moment); both are plain functions of the strain measures and a
:class:`CrossSectionMaterial`, batched over leading axes.  Only the
quadratic law ships.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CrossSectionMaterial:
    """Elastic moduli, section geometry, and inertia densities.

    K_gamma = diag(EA, GA, GA) couples dilatation/shear, K_kappa =
    diag(G*(I_y+I_z), E*I_y, E*I_z) couples torsion/bending
    (Saint-Venant relations).  ``I_rho0`` is the cross-section inertia
    density (kg*m) in the cross-section frame.
    """

    E: float
    G: float
    A: float
    I_y: float
    I_z: float
    A_rho0: float
    I_rho0: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "I_rho0", np.asarray(self.I_rho0, dtype=float))
        for name in ("E", "G", "A", "I_y", "I_z", "A_rho0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        I = self.I_rho0
        if I.shape != (3, 3):
            raise ValueError("I_rho0 must be 3x3")
        if np.max(np.abs(I - I.T)) > 1.0e-12 * max(np.max(np.abs(I)), 1.0):
            raise ValueError("I_rho0 must be symmetric")
        if np.any(np.linalg.eigvalsh(I) <= 0.0):
            raise ValueError("I_rho0 must be positive definite")

    @property
    def K_gamma(self):
        """Diagonal of the dilatation/shear stiffness (N)."""
        return np.array([self.E * self.A, self.G * self.A, self.G * self.A])

    @property
    def K_kappa(self):
        """Diagonal of the torsion/bending stiffness (N*m^2)."""
        return np.array(
            [self.G * (self.I_y + self.I_z), self.E * self.I_y, self.E * self.I_z]
        )


def strain_energy_density(gamma, kappa, gamma0, kappa0, material):
    """Quadratic energy per reference arc length (J/m), batched.

    W = 0.5*(gamma-gamma0)^T K_gamma (gamma-gamma0)
      + 0.5*(kappa-kappa0)^T K_kappa (kappa-kappa0)
    """
    dg = np.asarray(gamma, dtype=float) - gamma0
    dk = np.asarray(kappa, dtype=float) - kappa0
    return 0.5 * (
        np.einsum("...i,i,...i->...", dg, material.K_gamma, dg)
        + np.einsum("...i,i,...i->...", dk, material.K_kappa, dk)
    )


def contact_force_and_moment(gamma, kappa, gamma0, kappa0, material):
    """Resultant contact force n (N) and moment m (N*m), cross-section
    frame; the gradients of :func:`strain_energy_density`."""
    dg = np.asarray(gamma, dtype=float) - gamma0
    dk = np.asarray(kappa, dtype=float) - kappa0
    return material.K_gamma * dg, material.K_kappa * dk
