"""Piecewise-linear discontinuous vector fields and their heteroclinic orbits.

A model is a chain of linear pieces ``f_k(u) = Q_k (u - u*_k)`` separated by
oriented hyperplanes.  Region ``k`` lies on the positive side of interface
``k - 1`` and on the negative side of every later interface, so a
trajectory visiting the regions in order crosses each interface along its
normal.  Points lying exactly on an interface belong to no region.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ModelGeometry, NoConnection, NonHyperbolic, SymmetryError, Transversality

SYM_TOL = 1e-12
UNIT_TOL = 1e-12
ON_PLANE_TOL = 1e-10
HIT_XTOL = 1e-12


def _frozen(a, ndim=None):
    arr = np.array(a, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ModelGeometry(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def sym_eig(Q):
    """Eigen-decomposition of a symmetric matrix.

    Diagonal matrices keep their coordinate order (and identity eigenvectors),
    which keeps hand-written block layouts recognisable; anything else goes
    through ``numpy.linalg.eigh``.
    """
    Q = np.asarray(Q, dtype=float)
    if not np.any(Q - np.diag(np.diag(Q))):
        return np.diag(Q).copy(), np.eye(len(Q))
    return np.linalg.eigh(Q)


def expm_sym(Q, t):
    """``exp(t Q)`` for symmetric ``Q`` and scalar or array ``t`` (stacked on the left)."""
    h, V = sym_eig(Q)
    e = np.exp(np.multiply.outer(np.asarray(t, dtype=float), h))
    return np.einsum("ij,...j,kj->...ik", V, e, V)


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """The hyperplane ``<normal, u> = offset`` with a unit normal."""

    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        n = _frozen(self.normal, ndim=1)
        if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            raise ModelGeometry(f"interface normal {n.tolist()} is not a unit vector")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def level(self, u):
        """Signed distance ``<n, u> - c``; vectorised over leading axes of ``u``."""
        return np.asarray(u, dtype=float) @ self.normal - self.offset

    def project(self, u):
        u = np.asarray(u, dtype=float)
        return u - self.level(u) * self.normal


@dataclass(frozen=True, eq=False)
class LinearPiece:
    """The affine field ``Q (u - u_star)`` with symmetric ``Q``."""

    Q: np.ndarray
    u_star: np.ndarray

    def __post_init__(self):
        Q = _frozen(self.Q, ndim=2)
        u = _frozen(self.u_star, ndim=1)
        if Q.shape != (len(u), len(u)):
            raise ModelGeometry(f"Q has shape {Q.shape} but u_star has length {len(u)}")
        if np.max(np.abs(Q - Q.T)) > SYM_TOL:
            raise SymmetryError("Q must be symmetric")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "u_star", u)

    @property
    def dim(self):
        return len(self.u_star)

    def field(self, u):
        return (np.asarray(u, dtype=float) - self.u_star) @ self.Q.T

    def flow(self, w, t):
        """Exact flow of ``u' = Q (u - u*)`` from ``w`` for time(s) ``t``."""
        return self.u_star + expm_sym(self.Q, t) @ (np.asarray(w, dtype=float) - self.u_star)

    def decaying_flow(self, w, t, backward):
        """Flow keeping only the modes that decay as ``t -> -inf`` (``backward``) or ``+inf``.

        Used on the end segments of an orbit, where the other components of
        ``w - u*`` vanish up to rounding and would otherwise overflow.
        """
        h, V = sym_eig(self.Q)
        keep = h > 0 if backward else h < 0
        c = V[:, keep].T @ (np.asarray(w, dtype=float) - self.u_star)
        e = np.exp(np.multiply.outer(np.asarray(t, dtype=float), h[keep]))
        return self.u_star + (e * c) @ V[:, keep].T


@dataclass(frozen=True)
class Equilibrium:
    kind: str  # 'source', 'sink' or 'saddle'
    unstable_dim: int
    eigenvalues: tuple

    def __str__(self):
        if self.kind == "saddle":
            return f"saddle({self.unstable_dim})"
        return self.kind


def classify_equilibrium(Q):
    """Classify the equilibrium of ``u' = Q (u - u*)`` for symmetric ``Q``."""
    Q = np.asarray(Q, dtype=float)
    if np.max(np.abs(Q - Q.T)) > SYM_TOL:
        raise SymmetryError("Q must be symmetric")
    h = np.linalg.eigvalsh(Q)
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.any(np.abs(h) <= 1e-14 * scale):
        raise NonHyperbolic(f"Q has a zero eigenvalue: {h.tolist()}")
    k = int(np.sum(h > 0))
    kind = "source" if k == len(h) else "sink" if k == 0 else "saddle"
    return Equilibrium(kind, k, tuple(float(x) for x in h))


@dataclass(frozen=True, eq=False)
class PLModel:
    """A chain of linear pieces separated by oriented hyperplanes."""

    pieces: tuple
    interfaces: tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        interfaces = tuple(self.interfaces)
        if len(pieces) < 2:
            raise ModelGeometry("a model needs at least two pieces")
        if len(interfaces) != len(pieces) - 1:
            raise ModelGeometry(
                f"{len(pieces)} pieces need {len(pieces) - 1} interfaces, got {len(interfaces)}")
        n = pieces[0].dim
        if any(p.dim != n for p in pieces) or any(len(s.normal) != n for s in interfaces):
            raise ModelGeometry("pieces and interfaces disagree on the dimension")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "interfaces", interfaces)
        for k, p in enumerate(pieces):
            if not self.in_region(p.u_star, k):
                raise ModelGeometry(f"equilibrium of piece {k} is not strictly inside its region")
        for k in (0, len(pieces) - 1):
            classify_equilibrium(pieces[k].Q)

    @property
    def dim(self):
        return self.pieces[0].dim

    @property
    def n_regions(self):
        return len(self.pieces)

    def region_violation(self, u, k):
        """How far ``u`` is from satisfying the strict inequalities of region ``k`` (0 if inside)."""
        worst = 0.0
        if k > 0:
            worst = max(worst, -float(self.interfaces[k - 1].level(u)))
        for s in self.interfaces[k:]:
            worst = max(worst, float(s.level(u)))
        return worst

    def in_region(self, u, k):
        if k > 0 and not self.interfaces[k - 1].level(u) > 0:
            return False
        return all(s.level(u) < 0 for s in self.interfaces[k:])

    def region_index(self, u):
        for k in range(self.n_regions):
            if self.in_region(u, k):
                return k
        return None

    def field(self, u):
        k = self.region_index(u)
        if k is None:
            raise ModelGeometry(f"field is undefined at {np.asarray(u).tolist()} (on an interface)")
        return self.pieces[k].field(u)


def build_model(pieces, interfaces):
    """Validate and assemble a :class:`PLModel`.

    ``pieces`` items may be :class:`LinearPiece` or ``(Q, u_star)`` pairs;
    ``interfaces`` items may be :class:`Hyperplane` or ``(normal, offset)`` pairs.
    """
    pieces = [p if isinstance(p, LinearPiece) else LinearPiece(*p) for p in pieces]
    interfaces = [s if isinstance(s, Hyperplane) else Hyperplane(*s) for s in interfaces]
    return PLModel(tuple(pieces), tuple(interfaces))


@dataclass(frozen=True, eq=False)
class Heteroclinic:
    """Piecewise-exponential orbit crossing interface ``k`` at ``points[k]``, time ``times[k]``.

    The first crossing happens at time 0.
    """

    model: PLModel
    points: tuple
    times: tuple

    def segment_index(self, xi):
        return int(np.searchsorted(np.asarray(self.times), xi, side="left"))

    def _anchor(self, j):
        if j == 0:
            return self.points[0], self.times[0]
        return self.points[j - 1], self.times[j - 1]

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi)
        out = np.empty(flat.shape + (self.model.dim,))
        seg = np.searchsorted(np.asarray(self.times), flat, side="left")
        last = len(self.points)
        for j in np.unique(seg):
            mask = seg == j
            w, t0 = self._anchor(j)
            piece = self.model.pieces[j]
            if j == 0 or j == last:
                out[mask] = piece.decaying_flow(w, flat[mask] - t0, backward=(j == 0))
            else:
                out[mask] = piece.flow(w, flat[mask] - t0)
        return out.reshape(xi.shape + (self.model.dim,))

    def derivative(self, xi):
        """Exact ``gamma'(xi)``; one-sided (from the left) at crossing times."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        seg = np.searchsorted(np.asarray(self.times), xi, side="left")
        g = self(xi)
        return np.array([self.model.pieces[j].field(u) for j, u in zip(seg, g)])

    @property
    def n_crossings(self):
        return len(self.points)

    def f_hat(self, k):
        """Field values just before and just after crossing ``k``."""
        w = self.points[k]
        return self.model.pieces[k].field(w), self.model.pieces[k + 1].field(w)

    def normal_flux(self, k):
        n = self.model.interfaces[k].normal
        pre, post = self.f_hat(k)
        return float(pre @ n), float(post @ n)


def _rate_bounds(Q):
    h = np.abs(np.linalg.eigvalsh(Q))
    return float(h.min()), float(h.max())


def _first_hit(piece, w, plane, max_samples=200_000):
    """First time t > 0 at which the exact flow from ``w`` reaches ``plane``."""
    slow, fast = _rate_bounds(piece.Q)
    dt = 0.01 / fast
    t_max = 80.0 / slow
    n = int(min(max_samples, np.ceil(t_max / dt))) + 1
    ts = np.linspace(0.0, t_max, n)
    with np.errstate(over="ignore", invalid="ignore"):
        g = plane.level(piece.flow(w, ts))  # growing modes may overflow far past the hit
    if g[0] >= 0:
        raise NoConnection("segment starts on the wrong side of the next interface")
    idx = np.flatnonzero(g >= 0)
    if idx.size == 0:
        raise NoConnection("segment never reaches the next interface")
    i = idx[0]

    def level(t):
        return float(plane.level(piece.flow(w, t)))

    t_hit = brentq(level, ts[i - 1], ts[i], xtol=HIT_XTOL, rtol=4 * np.finfo(float).eps)
    return t_hit, plane.project(piece.flow(w, t_hit))


def _check_on_manifold(piece, w, unstable, what):
    h, V = sym_eig(piece.Q)
    d = np.asarray(w) - piece.u_star
    coef = V.T @ d
    bad = h < 0 if unstable else h > 0
    if np.any(np.abs(coef[bad]) > ON_PLANE_TOL * max(1.0, np.linalg.norm(d))):
        side = "unstable" if unstable else "stable"
        raise NoConnection(f"{what} does not lie on the {side} subspace of its end equilibrium")


def _check_segment_region(het, j, ts):
    model = het.model
    scale = 1.0 + max(np.linalg.norm(p) for p in het.points)
    for u in het(ts):
        if model.region_violation(u, j) > 1e-9 * scale:
            raise NoConnection(f"segment {j} leaves its region")


def build_heteroclinic(model, crossing_points, tol=ON_PLANE_TOL):
    """Build the exact orbit through the given crossing points.

    ``crossing_points[k]`` must lie on interface ``k``.  Trailing points may be
    omitted; they are then found by following the exact flow of the middle
    pieces.  Raises :class:`Transversality` for a non-positive normal flux
    and :class:`NoConnection` if the pieces do not chain into a heteroclinic.
    """
    pts = [np.asarray(p, dtype=float) for p in crossing_points]
    n_cross = model.n_regions - 1
    if not 1 <= len(pts) <= n_cross:
        raise ModelGeometry(f"expected between 1 and {n_cross} crossing points, got {len(pts)}")
    for k, w in enumerate(pts):
        if w.shape != (model.dim,):
            raise ModelGeometry(f"crossing point {k} has shape {w.shape}")
        if abs(model.interfaces[k].level(w)) > tol * max(1.0, np.linalg.norm(w)):
            raise ModelGeometry(f"crossing point {k} is not on interface {k}")

    points = [model.interfaces[0].project(pts[0])]
    times = [0.0]
    _check_flux(model, points[0], 0)
    for k in range(1, n_cross):
        t, w_hit = _first_hit(model.pieces[k], points[-1], model.interfaces[k])
        if k < len(pts):
            scale = max(1.0, np.linalg.norm(w_hit))
            if np.linalg.norm(pts[k] - w_hit) > 1e-8 * scale:
                raise NoConnection(
                    f"flow from crossing {k - 1} reaches interface {k} at {w_hit.tolist()}, "
                    f"not at {pts[k].tolist()}")
        points.append(w_hit)
        times.append(times[-1] + t)
        _check_flux(model, w_hit, k)

    _check_on_manifold(model.pieces[0], points[0], True, "first crossing point")
    _check_on_manifold(model.pieces[-1], points[-1], False, "last crossing point")

    het = Heteroclinic(model, tuple(_frozen(p) for p in points), tuple(times))
    slow0, _ = _rate_bounds(model.pieces[0].Q)
    slow1, _ = _rate_bounds(model.pieces[-1].Q)
    _check_segment_region(het, 0, -np.geomspace(1e-6, 40.0 / slow0, 120))
    for j in range(1, n_cross):
        _check_segment_region(het, j, np.linspace(times[j - 1], times[j], 122)[1:-1])
    _check_segment_region(het, n_cross, times[-1] + np.geomspace(1e-6, 40.0 / slow1, 120))
    return het


def _check_flux(model, w, k):
    n = model.interfaces[k].normal
    pre = float(model.pieces[k].field(w) @ n)
    post = float(model.pieces[k + 1].field(w) @ n)
    if pre <= 0 or post <= 0:
        raise Transversality(
            f"crossing {k} at {np.asarray(w).tolist()} is not transversal "
            f"(normal flux before {pre:.6g}, after {post:.6g})")


def compressivity_index(model, het=None):
    """``dim W^u(u-) + dim W^s(u+) - n`` for the end equilibria of the chain."""
    first = classify_equilibrium(model.pieces[0].Q)
    last = classify_equilibrium(model.pieces[-1].Q)
    return first.unstable_dim + (model.dim - last.unstable_dim) - model.dim
