"""Independent check of the jump calculus by smoothing the field.

Each interface gets a layer of width ``mu`` on its post side,
``0 < <n, u> - c < mu``, in which the two neighbouring pieces are blended:

    f_mu = phi(l / mu) f_post + (1 - phi(l / mu)) f_pre,   l = <n, u> - c.

The trajectory and the variational system ``v' = df_mu(gamma_mu) v + z``,
``z' = lambda v`` are integrated with classical RK4, with small steps in and
near the layers.  Outside the layers the coefficients are those of a single
linear piece, so the solution there is propagated with the exact flow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.optimize import brentq
from scipy.special import expit

from .errors import FitFailed, LayerOverlap, Overflow, Stiffness
from .jump import BACKWARD, FORWARD, crossing_jump
from .model import _first_hit
from .spectral import STABLE, UNSTABLE, _branch_stack

H_OUT = 1e-3
LAYER_STEPS = 200      # RK4 steps per unit mu inside a layer
MAX_STEPS = 5_000_000


@dataclass(frozen=True)
class Mollifier:
    """Smooth monotone switch from 0 on ``y <= 0`` to 1 on ``y >= 1``, and the layer width ``mu``.

    ``phi(y) = s(y) / (s(y) + s(1 - y))`` with ``s(y) = exp(-1/y)``, so
    ``phi(1/2) = 1/2`` and ``phi(1 - y) = 1 - phi(y)``.
    """

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    @staticmethod
    def phi(y):
        y = np.asarray(y, dtype=float)
        inner = np.clip(y, 1e-300, 1 - 1e-16)
        out = expit(1.0 / (1.0 - inner) - 1.0 / inner)
        return np.where(y <= 0, 0.0, np.where(y >= 1, 1.0, out))

    @staticmethod
    def dphi(y):
        y = np.asarray(y, dtype=float)
        inner = np.clip(y, 1e-3, 1 - 1e-3)
        p = expit(1.0 / (1.0 - inner) - 1.0 / inner)
        d = p * (1 - p) * (1.0 / inner ** 2 + 1.0 / (1.0 - inner) ** 2)
        return np.where((y <= 1e-3) | (y >= 1 - 1e-3), 0.0, d)


def _levels(model, u):
    return np.array([s.level(u) for s in model.interfaces])


def _region(model, lev):
    """Region index with points on an interface counted on its post side."""
    N = model.n_regions
    for k in range(N):
        if (k == 0 or lev[k - 1] >= 0) and np.all(lev[k:] < 0):
            return k
    raise LayerOverlap("point is not in any region of the chain")


def _layer_state(model, mol, u):
    """(region, blending weight, weight derivative) at ``u``."""
    lev = _levels(model, u)
    k = _region(model, lev)
    if k == 0 or lev[k - 1] >= mol.mu:
        return k, None, None
    y = lev[k - 1] / mol.mu
    others = np.delete(np.abs(lev), k - 1)
    if others.size and np.any(others < mol.mu):
        raise LayerOverlap(f"layers of width {mol.mu:g} overlap near {np.asarray(u).tolist()}")
    return k, float(Mollifier.phi(y)), float(Mollifier.dphi(y))


def smoothed_field_eval(model, mollifier, u):
    """Value of the blended field at ``u``; equal to the piecewise field outside the layers."""
    u = np.asarray(u, dtype=float)
    k, p, _ = _layer_state(model, mollifier, u)
    if p is None:
        return model.pieces[k].field(u)
    return p * model.pieces[k].field(u) + (1 - p) * model.pieces[k - 1].field(u)


def smoothed_jacobian(model, mollifier, u):
    u = np.asarray(u, dtype=float)
    k, p, dp = _layer_state(model, mollifier, u)
    post = model.pieces[k]
    if p is None:
        return post.Q
    pre = model.pieces[k - 1]
    n = model.interfaces[k - 1].normal
    return (p * post.Q + (1 - p) * pre.Q
            + (dp / mollifier.mu) * np.outer(post.field(u) - pre.field(u), n))


def _field_and_jac(model, mol, u):
    k, p, dp = _layer_state(model, mol, u)
    post = model.pieces[k]
    if p is None:
        return post.field(u), post.Q
    pre = model.pieces[k - 1]
    fp, fm = post.field(u), pre.field(u)
    n = model.interfaces[k - 1].normal
    J = p * post.Q + (1 - p) * pre.Q + (dp / mol.mu) * np.outer(fp - fm, n)
    return p * fp + (1 - p) * fm, J


def _rhs(model, mol, lam, u, V):
    f, J = _field_and_jac(model, mol, u)
    n = len(u)
    return f, np.concatenate([J @ V[:n] + V[n:], lam * V[:n]], axis=0)


def _rk4(model, mol, lam, u, V, h):
    k1u, k1v = _rhs(model, mol, lam, u, V)
    k2u, k2v = _rhs(model, mol, lam, u + 0.5 * h * k1u, V + 0.5 * h * k1v)
    k3u, k3v = _rhs(model, mol, lam, u + 0.5 * h * k2u, V + 0.5 * h * k2v)
    k4u, k4v = _rhs(model, mol, lam, u + h * k3u, V + h * k3v)
    return (u + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u),
            V + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v))


def _step_size(model, mol, u, h_in, h_out):
    lev = _levels(model, u)
    dist = np.where(lev < 0, -lev, np.where(lev > mol.mu, lev - mol.mu, 0.0))
    speed = np.linalg.norm(smoothed_field_eval(model, mol, u)) + 1e-300
    return float(np.clip(dist.min() / (2 * speed), h_in, h_out))


def _march(model, mol, lam, u, V, xi, stop, direction=1.0, h_out=H_OUT, record=None):
    """Step until ``stop(xi, u)`` is true; ``direction`` is +1 or -1."""
    h_in = mol.mu / LAYER_STEPS
    if h_in <= 1e-15 * max(1.0, abs(xi)):
        raise Stiffness(f"layer step {h_in:g} underflows at xi = {xi:g}")
    for _ in range(MAX_STEPS):
        if stop(xi, u):
            return u, V, xi
        h = direction * _step_size(model, mol, u, h_in, h_out)
        u, V = _rk4(model, mol, lam, u, V, h)
        xi += h
        if not np.all(np.isfinite(V)):
            raise Overflow("variational solution overflowed")
        if record is not None:
            record.append((xi, u.copy(), V.copy()))
    raise Stiffness("step budget exhausted")


def _big_Q(Q, lam):
    n = len(Q)
    return np.block([[Q.astype(complex), np.eye(n)], [lam * np.eye(n), np.zeros((n, n))]])


def _exact(piece, lam, u, V, t):
    """Exact flow of one linear piece for time ``t`` (trajectory and variational data)."""
    return piece.flow(u, t), expm(t * _big_Q(piece.Q, lam)) @ V


@dataclass
class SmoothedSolution:
    xi: np.ndarray
    gamma: np.ndarray
    v: np.ndarray
    z: np.ndarray


def integrate_smoothed_variational(model, mollifier, het, lam, v_init, z_init, span, h_out=H_OUT):
    """RK4 solution of the smoothed system on ``span = (a, b)`` with ``a <= 0 <= b``.

    Initial data ``gamma(0) = w`` (the first crossing point), ``v(0) = v_init``,
    ``z(0) = z_init``; ``v_init``/``z_init`` may hold several columns.  Steps
    are at most ``mu / 200`` inside a layer and ``h_out`` far from it.
    """
    n = model.dim
    v0 = np.asarray(v_init, dtype=complex).reshape(n, -1)
    z0 = np.asarray(z_init, dtype=complex).reshape(n, -1)
    V0 = np.concatenate([v0, z0], axis=0)
    a, b = span
    out = []
    for end, sign in ((a, -1.0), (b, 1.0)):
        rec = []
        if end != 0:
            _march(model, mollifier, lam, np.array(het.points[0], dtype=float), V0.copy(), 0.0,
                   lambda xi, u, e=end, s=sign: s * (xi - e) >= 0, sign, h_out, rec)
        out.append(rec)
    left = out[0][::-1]
    rows = left + [(0.0, np.array(het.points[0], dtype=float), V0)] + out[1]
    xi = np.array([r[0] for r in rows])
    g = np.array([r[1] for r in rows])
    V = np.array([r[2] for r in rows])
    squeeze = (lambda A: A[..., 0]) if np.ndim(v_init) == 1 else (lambda A: A)
    return SmoothedSolution(xi, g, squeeze(V[:, :n]), squeeze(V[:, n:]))


def layer_crossing_time(model, mollifier, het, k=0):
    """Time for the smoothed orbit started at crossing ``k`` to leave the layer, and ``mu * a``.

    ``a = int_0^1 dy / (phi(y) F+ + (1 - phi(y)) F-)`` with ``F-/F+`` the normal
    fluxes before and after the crossing.
    """
    s = model.interfaces[k]
    u = np.array(het.points[k], dtype=float)
    V = np.zeros((2 * model.dim, 0), dtype=complex)
    rec = []
    _march(model, mollifier, 0.0, u, V, 0.0, lambda xi, x: s.level(x) >= mollifier.mu,
           1.0, H_OUT, rec)
    (x0, u0, _), (x1, u1, _) = ((0.0, u, None) if len(rec) < 2 else rec[-2]), rec[-1]
    l0, l1 = s.level(u0), s.level(u1)
    t = x0 + (mollifier.mu - l0) * (x1 - x0) / (l1 - l0)
    fm, fp = het.normal_flux(k)
    a = quad(lambda y: 1.0 / (Mollifier.phi(y) * fp + (1 - Mollifier.phi(y)) * fm), 0, 1,
             epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return t, mollifier.mu * a


def layer_transfer(model, het, k, lam, v, z, mu, direction=FORWARD):
    """Numerical jump of ``v`` across crossing ``k`` for layer width ``mu``.

    Forward: start on the interface with ``(v, z)``, integrate through the
    layer and pull the result back to the crossing time with the exact flow
    of the next piece.  Backward: start where the exact post-side orbit reaches
    the far edge of the layer, integrate backwards through it and push the
    result forward to the crossing time with the exact flow of the previous
    piece.  Returns the transported ``(v, z)``.
    """
    mol = Mollifier(mu)
    n = model.dim
    s = model.interfaces[k]
    pre, post = model.pieces[k], model.pieces[k + 1]
    V = np.concatenate([np.asarray(v, complex), np.asarray(z, complex)])[:, None]
    w = np.array(het.points[k], dtype=float)
    if direction == FORWARD:
        u, V, xi = _march(model, mol, lam, w, V, 0.0, lambda xi, x: s.level(x) >= mu)
        V = expm(-xi * _big_Q(post.Q, lam)) @ V
    else:
        t_b = brentq(lambda t: s.level(post.flow(w, t)) - mu * (1 + 1e-9), 0.0,
                     _layer_exit_bound(post, w, s, mu), xtol=1e-16)
        u = post.flow(w, t_b)
        V = expm(t_b * _big_Q(post.Q, lam)) @ V
        u, V, xi = _march(model, mol, lam, u, V, t_b, lambda xi, x: s.level(x) <= 0, -1.0)
        V = expm(-xi * _big_Q(pre.Q, lam)) @ V
    return V[:n, 0], V[n:, 0]


def _layer_exit_bound(piece, w, s, mu):
    t = mu / max(float(piece.field(w) @ s.normal), 1e-300)
    for _ in range(60):
        if s.level(piece.flow(w, t)) > mu:
            return t
        t *= 2
    raise LayerOverlap("orbit does not leave the layer")


@dataclass
class ConvergenceFit:
    mu: np.ndarray
    errors: np.ndarray
    slope: float | None
    skipped: str | None = None
    v2_errors: np.ndarray | None = None  # relative error of the normal-component transfer

    @property
    def passed(self):
        if self.skipped:
            return True
        return self.slope is not None and 0.8 <= self.slope <= 1.2


def jump_convergence_fit(model, het, lam, v_minus, z0, mu_grid, crossing=0, direction=FORWARD):
    """Fit ``log |v_num(mu) - S v| ~ slope * log mu`` over a decreasing ``mu`` grid.

    ``direction='backward'`` transports ``v_minus`` (then data on the post
    side) backwards and compares against the backward jump matrix.
    Raises :class:`FitFailed` when the errors do not decrease with ``mu``.
    """
    mu = np.asarray(mu_grid, dtype=float)
    if mu.ndim != 1 or mu.size < 2 or np.any(np.diff(mu) >= 0):
        raise FitFailed("mu grid must be strictly decreasing with at least two points", mu)
    _check_spacing(model, het, mu.max())
    J = crossing_jump(het, crossing, direction)
    v = np.asarray(v_minus, dtype=complex)
    target = J.S @ v
    n_vec = J.normal
    dfn = np.linalg.norm(J.f_hat_post - J.f_hat_pre)
    errors, v2 = [], []
    for m in mu:
        vn, _ = layer_transfer(model, het, crossing, lam, v, z0, m, direction)
        errors.append(np.linalg.norm(vn - target))
        t2 = target @ n_vec
        v2.append(abs(vn @ n_vec - t2) / max(abs(t2), 1e-300))
    errors, v2 = np.array(errors), np.array(v2)
    if dfn <= 1e-12 * max(1.0, np.linalg.norm(J.f_hat_pre)):
        return ConvergenceFit(mu, errors, None, "skipped: zero jump", v2)
    if np.any(errors <= 0) or np.any(np.diff(errors) >= 0):
        raise FitFailed("errors do not decrease monotonically with mu", mu, errors)
    slope = float(np.polyfit(np.log(mu), np.log(errors), 1)[0])
    return ConvergenceFit(mu, errors, slope, None, v2)


def _check_spacing(model, het, mu):
    """Raise :class:`LayerOverlap` if a layer reaches the next crossing of the orbit."""
    for k in range(1, het.n_crossings):
        if model.interfaces[k - 1].level(het.points[k]) <= mu:
            raise LayerOverlap(f"layer width {mu:g} exceeds the spacing of crossings {k - 1} and {k}")
    for k, w in enumerate(het.points):
        lev = np.abs(np.delete(_levels(model, w), k))
        if lev.size and np.any(lev < mu):
            raise LayerOverlap(f"layer width {mu:g} exceeds the distance from crossing {k} "
                               "to another interface")


def shooting_mismatch(model, mollifier, het, lam, renormalize=True):
    """Matching determinant of the smoothed problem at ``lambda``.

    The decaying basis ``[I; P- - Q-]`` at the first crossing is carried
    through every layer by RK4 and between layers by the exact flow; the
    result is matched against ``[I; P+ - Q+]`` once the orbit has left the
    last layer.  Columns are renormalised after every stage, which keeps the
    sign of real values and conjugate symmetry but not analyticity.
    """
    _check_spacing(model, het, mollifier.mu)
    lam = complex(lam)
    n = model.dim
    pieces = model.pieces
    V = _basis(pieces[0].Q, lam, UNSTABLE)
    u = np.array(het.points[0], dtype=float)
    xi = 0.0
    N = model.n_regions
    for k in range(N - 1):
        if k > 0:
            t_hit, _ = _first_hit(pieces[k], u, model.interfaces[k])
            u, V = _exact(pieces[k], lam, u, V, t_hit)
            u = model.interfaces[k].project(u)
            xi += t_hit
            V = _normalize(V, renormalize)
        s = model.interfaces[k]
        u, V, xi = _march(model, mollifier, lam, u, V, xi, lambda x, p, s=s: s.level(p) >= mollifier.mu)
        V = _normalize(V, renormalize)
    R = _basis(pieces[-1].Q, lam, STABLE)
    return complex(np.linalg.det(np.concatenate([V, -R], axis=1)))


def _basis(Q, lam, side):
    P = _branch_stack(Q, lam, side)
    return np.concatenate([np.eye(len(Q), dtype=complex), P - Q], axis=0)


def _normalize(V, on):
    if not np.all(np.isfinite(V)):
        raise Overflow("variational solution overflowed")
    if not on:
        return V
    return V / np.linalg.norm(V, axis=0)
