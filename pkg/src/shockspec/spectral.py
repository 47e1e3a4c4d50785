"""Spectral branches, Evans-type determinants and small-lambda structure.

Writing the eigenvalue problem as ``v' = Q v + z``, ``z' = lambda v`` on each
linear piece, solutions decaying at minus infinity have ``v' = P- v`` and
those decaying at plus infinity have ``v' = P+ v``, where ``P`` solves
``P^2 - P Q - lambda I = 0`` with spectrum in the open right (``P-``) or left
(``P+``) half-plane.  For symmetric ``Q = V diag(h) V^T`` this is explicit:
``P = V diag(sigma(h_j)) V^T`` with

    sigma = (h -+ sqrt(h^2 + 4 lambda)) / 2,

the minus sign for the stable side ``+`` and the principal square root.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Boundary, Degenerate, DegenerateField, OutOfDomain, WrongTopology
from .jump import BACKWARD, FORWARD, crossing_jump
from .model import expm_sym, sym_eig

STABLE = "+"
UNSTABLE = "-"
_SIDES = {"+": STABLE, "stable": STABLE, "-": UNSTABLE, "unstable": UNSTABLE}
RANK_RTOL = 1e-8


def _side(side):
    try:
        return _SIDES[side]
    except KeyError:
        raise ValueError(f"side must be '+' or '-', got {side!r}") from None


def _check_domain(lam, hmin_sq, continuation):
    re = np.real(lam)
    if continuation:
        if np.any(re <= -hmin_sq / 4):
            raise OutOfDomain("lambda is outside the continuation domain Re(lambda) > -min(h^2)/4")
    elif np.any(re < 0):
        raise OutOfDomain("lambda must satisfy Re(lambda) >= 0 (pass continuation=True to extend)")


def _sigma(h, lam, side):
    root = np.sqrt(h * h + 4 * np.asarray(lam, dtype=complex))
    return 0.5 * (h - root) if side == STABLE else 0.5 * (h + root)


def sigma_branch(h, lam, side, continuation=False):
    """Root of ``sigma^2 - h sigma - lambda = 0`` on the given side.

    Side ``'+'`` gives the root with negative real part, side ``'-'`` the one
    with positive real part.  The formula stays analytic for
    ``Re(lambda) > -h^2/4``; ``continuation=True`` admits that larger domain.
    """
    h = float(h)
    if h == 0:
        raise DegenerateField("h must be nonzero")
    _check_domain(lam, h * h, continuation)
    return _sigma(h, lam, _side(side))


@dataclass(frozen=True, eq=False)
class SpectralBranch:
    P: np.ndarray
    side: str
    lam: complex

    def residual(self, Q):
        P = self.P
        return float(np.linalg.norm(P @ P - P @ Q - self.lam * np.eye(len(P))))


def _branch_stack(Q, lam, side):
    """``P`` for each entry of an array of ``lambda``; result has shape ``lam.shape + (n, n)``."""
    h, V = sym_eig(Q)
    sig = _sigma(h, np.asarray(lam, dtype=complex)[..., None], side)
    return np.einsum("ij,...j,kj->...ik", V, sig, V)


def _hmin_sq(Q):
    return float(np.min(np.abs(np.linalg.eigvalsh(Q)))) ** 2


def stable_branch_matrix(Q, lam, side, continuation=False):
    """The unique solution ``P`` of ``P^2 - P Q - lambda I = 0`` with half-plane spectrum."""
    Q = np.asarray(Q, dtype=float)
    h = np.linalg.eigvalsh(Q)
    if np.any(h == 0):
        raise DegenerateField("Q has a zero eigenvalue")
    _check_domain(lam, _hmin_sq(Q), continuation)
    side = _side(side)
    return SpectralBranch(_branch_stack(Q, lam, side), side, complex(lam))


@dataclass(frozen=True)
class HalfPlaneRegion:
    """Search window ``{Re(lambda) >= delta, |lambda| <= R}``."""

    delta: float = 1e-4
    R: float = 10.0

    def __post_init__(self):
        if not 0 < self.delta < self.R:
            raise ValueError(f"need 0 < delta < R, got delta={self.delta}, R={self.R}")


def _domain_bound(model):
    return min(_hmin_sq(p.Q) for p in model.pieces)


def evans_det(model, het, lam, continuation=False):
    """``D(lambda) = det(P+(lambda) - S P-(lambda))`` for a single-crossing model.

    Vectorised: ``lam`` may be any array of complex values.
    """
    if model.n_regions != 2:
        raise WrongTopology(f"evans_det needs 2 regions, got {model.n_regions}; use theta_det")
    lam = np.asarray(lam, dtype=complex)
    _check_domain(lam, _domain_bound(model), continuation)
    S = crossing_jump(het, 0).S
    Pm = _branch_stack(model.pieces[0].Q, lam, UNSTABLE)
    Pp = _branch_stack(model.pieces[1].Q, lam, STABLE)
    return np.linalg.det(Pp - S @ Pm)


def evans_function(model, het, continuation=False):
    """Closure ``lam -> D(lam)`` for root finders."""
    return lambda lam: evans_det(model, het, lam, continuation)


def asymptotic_constant(model, het):
    """``det(I + S)``, the limit of ``D(lambda) / (-sqrt(lambda))^n`` at infinity."""
    S = crossing_jump(het, 0).S
    return float(np.linalg.det(np.eye(len(S)) + S))


def asymptotic_ratio(model, het, lam):
    lam = np.asarray(lam, dtype=complex)
    return evans_det(model, het, lam) / (-np.sqrt(lam)) ** model.dim


def _end_basis(Q, lam, side):
    """Columns ``[I; P - Q]`` spanning decaying solutions, stacked over ``lam``."""
    P = _branch_stack(Q, lam, side)
    n = len(Q)
    top = np.broadcast_to(np.eye(n, dtype=complex), P.shape)
    return np.concatenate([top, P - Q], axis=-2)


def _block(S):
    n = len(S)
    B = np.eye(2 * n)
    B[:n, :n] = S
    return B


def _middle_T(Q, lam):
    """Rows of left eigenvectors of ``[[Q, I], [lam I, 0]]`` and the matching exponents.

    The first ``n`` rows belong to the roots that vanish with ``lambda``, the
    last ``n`` to the roots near ``h``.
    """
    h, V = sym_eig(Q)
    lam = np.asarray(lam, dtype=complex)[..., None]
    up = _sigma(h, lam, STABLE)
    down = _sigma(h, lam, UNSTABLE)
    small = np.where(h > 0, up, down)
    large = np.where(h > 0, down, up)
    gap = np.abs(large - small)
    if np.any(gap <= 1e-12 * np.maximum(1.0, np.abs(h))):
        raise Degenerate("the middle-region system is defective at this lambda")
    Vt = np.broadcast_to(V.T, lam.shape[:-1] + V.shape)
    T = np.concatenate([
        np.concatenate([small[..., :, None] * Vt, Vt], axis=-1),
        np.concatenate([large[..., :, None] * Vt, Vt], axis=-1),
    ], axis=-2)
    return T, np.concatenate([small, large], axis=-1)


def theta_matrix(model, het, lam, continuation=False):
    """The ``2n x 2n`` matching matrix whose determinant vanishes at eigenvalues.

    Columns are the decaying basis from minus infinity, carried through every
    crossing and middle region, next to minus the decaying basis from plus
    infinity.  With two regions this is ``[S Y-, -Y+]``.  With more regions the
    last crossing is applied backwards to ``Y+`` and both sides are written in
    the eigen-coordinates ``T`` of the last middle region, so the large
    exponential factors appear as plain row scalings.
    """
    lam = np.asarray(lam, dtype=complex)
    _check_domain(lam, _domain_bound(model), continuation)
    pieces = model.pieces
    N = model.n_regions
    Y = _end_basis(pieces[0].Q, lam, UNSTABLE)
    R = _end_basis(pieces[-1].Q, lam, STABLE)
    if N == 2:
        Y = _block(crossing_jump(het, 0, FORWARD).S) @ Y
        return np.concatenate([Y, -R], axis=-1)
    n = model.dim
    for k in range(1, N - 1):
        Y = _block(crossing_jump(het, k - 1, FORWARD).S) @ Y
        dt = het.times[k] - het.times[k - 1]
        T, mu = _middle_T(pieces[k].Q, lam)
        E = np.exp(dt * mu)
        Y = E[..., :, None] * (T @ Y)
        if k < N - 2:
            Y = np.linalg.solve(T, Y)
    R = T @ (_block(crossing_jump(het, N - 2, BACKWARD).S) @ R)
    assert Y.shape[-2:] == (2 * n, n)
    return np.concatenate([Y, -R], axis=-1)


def theta_det(model, het, lam, normalized=False, continuation=False):
    """Determinant of :func:`theta_matrix`.

    ``normalized=True`` multiplies by ``F0 * FL / (lambda * prod Fk)``, where
    ``F0`` is the incoming normal flux at the first crossing, ``FL`` the
    outgoing flux at the last one and ``Fk`` the outgoing fluxes at the other
    crossings.  This removes the trivial zero at ``lambda = 0`` and keeps the
    values of order one when a middle region is traversed slowly.
    """
    lam = np.asarray(lam, dtype=complex)
    d = np.linalg.det(theta_matrix(model, het, lam, continuation))
    if not normalized:
        return d
    if np.any(lam == 0):
        raise OutOfDomain("normalized determinant is undefined at lambda = 0")
    last = het.n_crossings - 1
    scale = het.normal_flux(0)[0] * het.normal_flux(last)[1]
    for k in range(last):
        scale /= het.normal_flux(k)[1]
    return d * scale / lam


def _rank(M):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def _subspace(Q, unstable):
    h, V = sym_eig(Q)
    return V[:, h > 0] if unstable else V[:, h < 0]


def zero_multiplicity(model, het):
    """Dimension of the space of bounded ``lambda = 0`` data matched across the chain.

    For one crossing this is ``dim(E^s(Q+) ∩ S E^u(Q-))``.  With middle regions
    the unstable subspace is carried by the jump matrices and the exact flows
    of the middle pieces before intersecting.
    """
    A = _subspace(model.pieces[0].Q, True)
    for k in range(het.n_crossings):
        A = crossing_jump(het, k).S @ A
        if k + 1 < model.n_regions - 1:
            A = expm_sym(model.pieces[k + 1].Q, het.times[k + 1] - het.times[k]) @ A
    B = _subspace(model.pieces[-1].Q, False)
    if A.shape[1] == 0 or B.shape[1] == 0:
        return 0
    return _rank(A) + _rank(B) - _rank(np.hstack([A, B]))


_COUNTS = {
    # (sign of h, lambda in P+, halfplane) -> number of roots
    (-1, True, ">"): 1, (-1, False, ">"): 0,
    (1, True, ">"): 1, (1, False, ">"): 2,
    (-1, True, "<"): 1, (-1, False, "<"): 2,
    (1, True, "<"): 1, (1, False, "<"): 0,
}


def quadratic_root_count(h, lam, halfplane):
    """Number of roots of ``sigma^2 - h sigma - lambda`` in a half-plane, from the sign pattern alone.

    ``halfplane`` is ``'>'`` (``Re sigma > 0``) or ``'<'`` (``Re sigma < 0``).  The
    answer depends only on the sign of ``h`` and on which side of the parabola
    ``h^2 Re(lambda) = -Im(lambda)^2`` the point ``lambda`` lies.
    """
    h = float(h)
    if h == 0:
        raise DegenerateField("h must be nonzero")
    key = {">": ">", "Re>0": ">", "<": "<", "Re<0": "<"}.get(halfplane)
    if key is None:
        raise ValueError(f"halfplane must be '>' or '<', got {halfplane!r}")
    lam = complex(lam)
    b = h * h * lam.real + lam.imag ** 2
    if b == 0:
        raise Boundary("lambda lies on the boundary parabola")
    return _COUNTS[(1 if h > 0 else -1, b > 0, key)]
