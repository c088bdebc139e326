"""Quaternion, SO(3), and SE(3) kernels.

Quaternions are arrays ``(p0, p1, p2, p3)`` with the scalar part first.
They need not have unit norm: every quaternion with norm above
``EPS_QUAT`` maps to a proper rotation, and the map is invariant under
rescaling, so a rotation never degenerates as the coordinates drift.

Homogeneous transforms are 4x4 arrays.  Twists are arrays
``(t_r, t_phi)`` of shape (6,): translational part first (m), rotational
part second (rad), with the convention ``H = se3_exp(twist)``.

All functions are pure and accept leading batch dimensions where noted.
"""

from __future__ import annotations

import numpy as np

from .errors import AngleNearPi, DegenerateQuaternion, NotARotation

# quaternions with smaller norm are rejected
EPS_QUAT = 1.0e-12

# rotation angles at or above this have no usable logarithm
MAX_LOG_ANGLE = np.pi - 1.0e-6

# below this angle the axis extraction switches to its Taylor form
_TINY_ANGLE = 1.0e-6

# below this angle the trig coefficient functions switch to series
# (the closed forms lose digits to cancellation well before 1e-6)
_SERIES_ANGLE = 1.0e-3


def skew(v):
    """Map 3-vectors to skew matrices: ``skew(v) @ r == cross(v, r)``.

    Accepts shape (..., 3), returns (..., 3, 3).
    """
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3), dtype=float)
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def inv_skew_symmetric_part(M):
    """Axial vector of the skew-symmetric part of a 3x3 matrix.

    Returns ``0.5 * (M32 - M23, M13 - M31, M21 - M12)``; the exact
    inverse of :func:`skew` on skew matrices, and the projection used by
    the discrete curvature.  Accepts shape (..., 3, 3).
    """
    M = np.asarray(M, dtype=float)
    return 0.5 * np.stack(
        (
            M[..., 2, 1] - M[..., 1, 2],
            M[..., 0, 2] - M[..., 2, 0],
            M[..., 1, 0] - M[..., 0, 1],
        ),
        axis=-1,
    )


def quaternion_norm2(P):
    P = np.asarray(P, dtype=float)
    return np.einsum("...i,...i->...", P, P)


def rotation_from_quaternion(P):
    """Rotation matrix of a (generally non-unit) quaternion.

    A(P) = I + 2 * (skew(p)^2 + p0 * skew(p)) / ||P||^2, which is
    orthogonal for every nonzero P and invariant under P -> a*P.
    Accepts shape (..., 4), returns (..., 3, 3).

    Raises DegenerateQuaternion if any norm is at or below EPS_QUAT.
    """
    P = np.asarray(P, dtype=float)
    norm2 = quaternion_norm2(P)
    if np.any(norm2 <= EPS_QUAT * EPS_QUAT) or not np.all(np.isfinite(norm2)):
        raise DegenerateQuaternion("quaternion norm at or below 1e-12")
    p0 = P[..., 0]
    p = P[..., 1:]
    # skew(p)^2 = p p^T - (p.p) I
    pp = np.einsum("...i,...j->...ij", p, p)
    A = pp + p0[..., None, None] * skew(p)
    A[..., 0, 0] -= np.einsum("...i,...i->...", p, p)
    A[..., 1, 1] -= np.einsum("...i,...i->...", p, p)
    A[..., 2, 2] -= np.einsum("...i,...i->...", p, p)
    A *= 2.0 / norm2[..., None, None]
    A[..., 0, 0] += 1.0
    A[..., 1, 1] += 1.0
    A[..., 2, 2] += 1.0
    return A


def quaternion_rate_matrix(P):
    """Matrix Q(P) with ``Pdot = Q(P) @ omega`` for body-frame omega.

    Q(P) = 0.5 * [[-p^T], [p0*I + skew(p)]].  Defined for any P; note
    P^T Q(P) omega == 0 identically, so the quaternion norm is constant
    along exact solutions of the rate equation.  Accepts (..., 4),
    returns (..., 4, 3).
    """
    P = np.asarray(P, dtype=float)
    p0 = P[..., 0]
    p = P[..., 1:]
    Q = np.zeros(P.shape[:-1] + (4, 3), dtype=float)
    Q[..., 0, :] = -p
    Q[..., 1:, :] = skew(p)
    Q[..., 1, 0] += p0
    Q[..., 2, 1] += p0
    Q[..., 3, 2] += p0
    return 0.5 * Q


def quaternion_multiply(P, R):
    """Hamilton product P * R (scalar-first), composing rotations.

    rotation_from_quaternion(P * R) equals the matrix product of the
    factors' rotations.  Accepts broadcastable (..., 4) inputs.
    """
    P = np.asarray(P, dtype=float)
    R = np.asarray(R, dtype=float)
    p0, pv = P[..., 0], P[..., 1:]
    r0, rv = R[..., 0], R[..., 1:]
    out = np.empty(np.broadcast_shapes(P.shape, R.shape), dtype=float)
    out[..., 0] = p0 * r0 - np.einsum("...i,...i->...", pv, rv)
    out[..., 1:] = (
        p0[..., None] * rv + r0[..., None] * pv + np.cross(pv, rv)
    )
    return out


def quaternion_from_rotation(A, atol=1.0e-8):
    """Unit quaternion of a rotation matrix (largest-branch extraction).

    The branch is chosen by the largest of the four squared components
    (trace and the three diagonal entries), which keeps the divisions
    well conditioned for any input angle.  The sign is canonicalized to
    p0 >= 0.

    Raises NotARotation if A is not orthonormal within ``atol`` or has
    negative determinant.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3):
        raise NotARotation(f"expected a 3x3 matrix, got shape {A.shape}")
    defect = A.T @ A - np.eye(3)
    if np.max(np.abs(defect)) > atol or np.linalg.det(A) < 0.0:
        raise NotARotation("matrix is not a rotation within tolerance")

    tr = A[0, 0] + A[1, 1] + A[2, 2]
    choices = np.array([tr, A[0, 0], A[1, 1], A[2, 2]])
    branch = int(np.argmax(choices))
    P = np.empty(4)
    if branch == 0:
        s = 2.0 * np.sqrt(1.0 + tr)
        P[0] = 0.25 * s
        P[1] = (A[2, 1] - A[1, 2]) / s
        P[2] = (A[0, 2] - A[2, 0]) / s
        P[3] = (A[1, 0] - A[0, 1]) / s
    else:
        i = branch - 1
        j, k = (i + 1) % 3, (i + 2) % 3
        s = 2.0 * np.sqrt(1.0 + A[i, i] - A[j, j] - A[k, k])
        P[1 + i] = 0.25 * s
        P[0] = (A[k, j] - A[j, k]) / s
        P[1 + j] = (A[j, i] + A[i, j]) / s
        P[1 + k] = (A[k, i] + A[i, k]) / s
    if P[0] < 0.0:
        P = -P
    return P / np.linalg.norm(P)


def _rot_coefficients(angle):
    """sin(t)/t and (1-cos(t))/t^2 with series fallbacks, batched."""
    angle = np.asarray(angle, dtype=float)
    small = angle < _SERIES_ANGLE
    t = np.where(small, 1.0, angle)  # avoid 0/0; masked out below
    t2 = angle * angle
    sinc = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(t) / t)
    onec = np.where(
        small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, (1.0 - np.cos(t)) / (t * t)
    )
    return sinc, onec


def exp_so3(phi):
    """Rodrigues map: rotation matrix of a rotation vector, (...,3) in."""
    phi = np.asarray(phi, dtype=float)
    angle = np.linalg.norm(phi, axis=-1)
    sinc, onec = _rot_coefficients(angle)
    ph = skew(phi)
    ph2 = ph @ ph
    eye = np.zeros_like(ph)
    eye[..., 0, 0] = eye[..., 1, 1] = eye[..., 2, 2] = 1.0
    return eye + sinc[..., None, None] * ph + onec[..., None, None] * ph2


def rotation_log(A):
    """Rotation vector of a rotation matrix, angle strictly below pi.

    Uses trace/axis extraction with a Taylor fallback below 1e-6 rad.
    Tolerates mildly non-orthogonal input by working with the
    skew-symmetric part only.  Accepts (..., 3, 3).

    Raises AngleNearPi for angles at or above pi - 1e-6.
    """
    A = np.asarray(A, dtype=float)
    tr = A[..., 0, 0] + A[..., 1, 1] + A[..., 2, 2]
    angle = np.arccos(np.clip(0.5 * (tr - 1.0), -1.0, 1.0))
    if np.any(angle >= MAX_LOG_ANGLE):
        raise AngleNearPi("rotation angle within 1e-6 of pi")
    vee = inv_skew_symmetric_part(A)  # = sin(angle) * axis
    small = angle < _TINY_ANGLE
    t = np.where(small, 1.0, angle)
    factor = np.where(small, 1.0 + angle * angle / 6.0, t / np.sin(t))
    return factor[..., None] * vee


def _left_jacobian_coefficients(angle):
    """Coefficients b, c of V = I + b*skew + c*skew^2, batched."""
    angle = np.asarray(angle, dtype=float)
    small = angle < _SERIES_ANGLE
    t = np.where(small, 1.0, angle)
    t2 = angle * angle
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0,
                 (1.0 - np.cos(t)) / (t * t))
    c = np.where(small, 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
                 (t - np.sin(t)) / (t * t * t))
    return b, c


def _inv_left_jacobian_coefficient(angle):
    """Coefficient d of V^-1 = I - skew/2 + d*skew^2, batched."""
    angle = np.asarray(angle, dtype=float)
    small = angle < _SERIES_ANGLE
    t = np.where(small, 1.0, angle)
    t2 = angle * angle
    closed = (1.0 - 0.5 * t * np.sin(t) / (1.0 - np.cos(t))) / (t * t)
    series = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    return np.where(small, series, closed)


def make_transform(A, r):
    """Assemble a 4x4 homogeneous transform from rotation and translation."""
    H = np.zeros((4, 4), dtype=float)
    H[:3, :3] = A
    H[:3, 3] = r
    H[3, 3] = 1.0
    return H


def transform_inverse(H):
    """Inverse of a homogeneous transform using the rotation's transpose."""
    A = H[:3, :3]
    r = H[:3, 3]
    return make_transform(A.T, -A.T @ r)


def se3_exp(twist):
    """Homogeneous transform of a twist (t_r, t_phi), shape (6,)."""
    twist = np.asarray(twist, dtype=float)
    t_r = twist[:3]
    phi = twist[3:]
    angle = np.linalg.norm(phi)
    b, c = _left_jacobian_coefficients(angle)
    ph = skew(phi)
    V = np.eye(3) + b * ph + c * (ph @ ph)
    return make_transform(exp_so3(phi), V @ t_r)


def se3_log(H):
    """Twist (t_r, t_phi) of a homogeneous transform, shape (6,).

    Inverse of :func:`se3_exp` for rotation angles strictly below pi;
    raises AngleNearPi within 1e-6 of pi.
    """
    H = np.asarray(H, dtype=float)
    phi = rotation_log(H[:3, :3])
    angle = np.linalg.norm(phi)
    d = _inv_left_jacobian_coefficient(angle)
    ph = skew(phi)
    Vinv = np.eye(3) - 0.5 * ph + d * (ph @ ph)
    return np.concatenate((Vinv @ H[:3, 3], phi))


def relative_twists(A_ref, r_ref, A, r):
    """Batched twists of H_ref^-1 * H for frame/position pairs.

    ``A_ref``/``A`` have shape (m, 3, 3) and ``r_ref``/``r`` shape
    (m, 3); returns (m, 6).  This is the residual map of the
    configuration fit, so it tolerates mildly non-orthogonal ``A``.
    """
    A_rel = np.einsum("mji,mjk->mik", A_ref, A)
    r_rel = np.einsum("mji,mj->mi", A_ref, r - r_ref)
    phi = rotation_log(A_rel)
    angle = np.linalg.norm(phi, axis=-1)
    d = _inv_left_jacobian_coefficient(angle)
    ph = skew(phi)
    ph2 = ph @ ph
    t_r = (
        r_rel
        - 0.5 * np.einsum("mij,mj->mi", ph, r_rel)
        + d[:, None] * np.einsum("mij,mj->mi", ph2, r_rel)
    )
    return np.concatenate((t_r, phi), axis=-1)
