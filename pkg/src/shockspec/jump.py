"""Transport of eigenfunction data across a field discontinuity.

Across a transversal crossing of the hyperplane with normal ``n`` the
``v``-component of an eigenfunction jumps by ``v+ = S v-`` with

    S = I + (f_post - f_pre) n^T / <f_pre, n>,

while the ``z``-component stays continuous.  ``S`` fixes every tangent vector
and maps ``f_pre`` to ``f_post``.  The backward matrix is its inverse,

    S^{-1} = I - (f_post - f_pre) n^T / <f_post, n>.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Transversality

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True, eq=False)
class JumpMatrix:
    """Jump matrix ``S`` together with the crossing data it was built from.

    For ``direction='forward'`` ``S`` maps ``v(xi - 0)`` to ``v(xi + 0)``;
    for ``'backward'`` it maps ``v(xi + 0)`` to ``v(xi - 0)``.
    """

    S: np.ndarray
    f_hat_pre: np.ndarray
    f_hat_post: np.ndarray
    normal: np.ndarray
    direction: str = FORWARD

    @property
    def det(self):
        return float(np.linalg.det(self.S))


def jump_matrix(f_hat_pre, f_hat_post, normal, direction=FORWARD):
    """Jump matrix for a crossing with field values ``f_hat_pre`` -> ``f_hat_post``."""
    fm = np.asarray(f_hat_pre, dtype=float)
    fp = np.asarray(f_hat_post, dtype=float)
    n = np.asarray(normal, dtype=float)
    flux_m, flux_p = float(fm @ n), float(fp @ n)
    if flux_m <= 0 or flux_p <= 0:
        raise Transversality(
            f"crossing is not transversal (normal flux before {flux_m:.6g}, after {flux_p:.6g})")
    df = fp - fm
    if direction == FORWARD:
        S = np.eye(len(n)) + np.outer(df, n) / flux_m
    elif direction == BACKWARD:
        S = np.eye(len(n)) - np.outer(df, n) / flux_p
    else:
        raise ValueError(f"direction must be '{FORWARD}' or '{BACKWARD}', got {direction!r}")
    for a in (S, fm, fp, n):
        a.setflags(write=False)
    return JumpMatrix(S, fm, fp, n, direction)


def crossing_jump(het, k, direction=FORWARD):
    """Jump matrix at crossing ``k`` of a heteroclinic."""
    pre, post = het.f_hat(k)
    return jump_matrix(pre, post, het.model.interfaces[k].normal, direction)


def block_jump(J):
    """The ``2n x 2n`` matrix ``diag(S, I)`` acting on ``(v, z)``."""
    S = J.S if isinstance(J, JumpMatrix) else np.asarray(J, dtype=float)
    n = S.shape[0]
    B = np.eye(2 * n)
    B[:n, :n] = S
    return B
