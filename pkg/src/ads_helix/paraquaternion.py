"""Paraquaternion (split-quaternion) algebra on R^4 with signature (+, +, -, -).

A paraquaternion ``q = x1 + x2 i + x3 j + x4 k`` is stored as a float64 array
whose last axis has length 4. Every function here broadcasts over leading axes,
so a grid of points is just an array of shape ``(..., 4)``.

The generators obey ``-i^2 = j^2 = 1`` and ``k = ij = -ji``.
"""

import numpy as np

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])

#: Gram matrix of the neutral inner product on R^4_2.
EPSILON = np.diag([1.0, 1.0, -1.0, -1.0])

#: Complex structure of R^4 corresponding to left multiplication by ``i``.
J1 = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)
#: Product structure corresponding to left multiplication by ``j``.
J2 = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
)
#: Product structure corresponding to left multiplication by ``k``.
J3 = np.array(
    [
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ]
)

STRUCTURE = {1: J1, 2: J2, 3: J3}


def vec4(x1, x2=0.0, x3=0.0, x4=0.0):
    """Build a paraquaternion from its four real coordinates."""
    return np.array([x1, x2, x3, x4], dtype=float)


def pq_mul(p, q):
    """Paraquaternion product ``p q``.

    Args:
        p, q: arrays of shape ``(..., 4)``; leading axes broadcast.

    Returns:
        Array of shape ``(..., 4)``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    # i^2 = -1, j^2 = k^2 = 1, ij = k, jk = -i, ki = j
    return np.stack(
        [
            a1 * a2 - b1 * b2 + c1 * c2 + d1 * d2,
            a1 * b2 + b1 * a2 - c1 * d2 + d1 * c2,
            a1 * c2 + c1 * a2 - b1 * d2 + d1 * b2,
            a1 * d2 + d1 * a2 + b1 * c2 - c1 * b2,
        ],
        axis=-1,
    )


def pq_conj(q):
    """Conjugate ``x1 - x2 i - x3 j - x4 k``."""
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def inner(u, v):
    """Neutral inner product ``u1 v1 + u2 v2 - u3 v3 - u4 v4``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2] - u[..., 3] * v[..., 3]


def norm2(q):
    """Squared paraquaternion norm ``q conj(q)``; may be negative."""
    return inner(q, q)


def apply_J(which, q):
    """Apply the structure matrix ``J_which`` (1, 2 or 3) to ``q``."""
    try:
        mat = STRUCTURE[which]
    except KeyError:
        raise ValueError(f"structure index must be 1, 2 or 3, got {which!r}") from None
    return np.asarray(q, dtype=float) @ mat.T


def to_complex_pair(q):
    """Return ``(z, w) = (x1 + i x2, x3 + i x4)``."""
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def from_complex_pair(z, w):
    """Inverse of :func:`to_complex_pair`."""
    z = np.asarray(z)
    w = np.asarray(w)
    return np.stack([z.real, z.imag, w.real, w.imag], axis=-1).astype(float)
