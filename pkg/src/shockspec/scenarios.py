"""Ready-made planar shock families with their closed-form predictions.

* diagonal two-region shocks (always spectrally stable),
* overcompressive source-to-sink shocks crossing ``{u2 = 0}`` at ``(s, 0)``,
  with a rotated sink matrix,
* a three-region field whose heteroclinic passes close to a saddle and
  splits into two sub-shocks when ``eps = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ModelGeometry
from .model import build_heteroclinic, build_model
from .spectral import evans_det, theta_det


# diagonal shocks -----------------------------------------------------------

def make_diagonal_shock(h1m, h2m, h1p, h2p, u_minus, u_plus, w):
    """Two-region shock with ``Q- = diag(h1m, h2m)``, ``Q+ = diag(h1p, h2p)``, interface ``{u2 = 0}``.

    ``w`` is the crossing point.  At least one of ``h1m, h2m`` must be
    positive and at least one of ``h1p, h2p`` negative.
    """
    if not (h1m > 0 or h2m > 0) or not (h1p < 0 or h2p < 0):
        raise ModelGeometry("need an unstable direction at u- and a stable direction at u+")
    u_minus, u_plus = np.asarray(u_minus, float), np.asarray(u_plus, float)
    if not (u_minus[1] < 0 < u_plus[1]):
        raise ModelGeometry("need u-_2 < 0 < u+_2")
    model = build_model([(np.diag([h1m, h2m]), u_minus), (np.diag([h1p, h2p]), u_plus)],
                        [((0.0, 1.0), 0.0)])
    return model, build_heteroclinic(model, [w])


def random_diagonal_shock(rng):
    """A random admissible diagonal shock (and its parameters) for stability sweeps.

    The heteroclinic needs ``h2m > 0 > h2p``; ``h1m`` and ``h1p`` take either
    sign, and when ``h1m < 0 < h1p`` the equilibria and crossing share ``u1``.
    """
    h2m = np.exp(rng.uniform(-2, 2))
    h2p = -np.exp(rng.uniform(-2, 2))
    h1m = rng.choice([-1, 1]) * np.exp(rng.uniform(-2, 2))
    h1p = rng.choice([-1, 1]) * np.exp(rng.uniform(-2, 2))
    u_minus = np.array([rng.uniform(-3, 3), -np.exp(rng.uniform(-1.5, 1.5))])
    u_plus = np.array([rng.uniform(-3, 3), np.exp(rng.uniform(-1.5, 1.5))])
    if h1m < 0 and h1p > 0:
        u_plus[0] = u_minus[0]
        w1 = u_minus[0]
    elif h1m < 0:
        w1 = u_minus[0]
    elif h1p > 0:
        w1 = u_plus[0]
    else:
        w1 = rng.uniform(-3, 3)
    params = dict(h1m=h1m, h2m=h2m, h1p=h1p, h2p=h2p, u_minus=u_minus, u_plus=u_plus, w=(w1, 0.0))
    return make_diagonal_shock(**params), params


# overcompressive shocks ----------------------------------------------------

@dataclass(frozen=True)
class OvercompressiveParams:
    """Source ``diag(h1m, h2m)`` at ``u_minus``; sink rotated by ``theta`` at ``u_plus``."""

    h1m: float
    h2m: float
    h1p: float
    h2p: float
    theta: float
    u_minus: tuple
    u_plus: tuple
    s: float

    def __post_init__(self):
        if not (self.h1m > 0 and self.h2m > 0):
            raise ModelGeometry("need h1m, h2m > 0")
        if not (self.h1p < self.h2p < 0):
            raise ModelGeometry("need h1p < h2p < 0")
        if not 0 < self.theta < np.pi / 2:
            raise ModelGeometry("need 0 < theta < pi/2")
        object.__setattr__(self, "u_minus", tuple(float(x) for x in self.u_minus))
        object.__setattr__(self, "u_plus", tuple(float(x) for x in self.u_plus))
        if not (self.u_minus[1] < 0 < self.u_plus[1]):
            raise ModelGeometry("need u-_2 < 0 < u+_2")

    @property
    def a_plus(self):
        c, s = np.cos(self.theta), np.sin(self.theta)
        return self.h1p * c * c + self.h2p * s * s

    @property
    def b_plus(self):
        c, s = np.cos(self.theta), np.sin(self.theta)
        return self.h2p * c * c + self.h1p * s * s

    @property
    def c_plus(self):
        return (self.h2p - self.h1p) * np.sin(self.theta) * np.cos(self.theta)

    @property
    def Q_minus(self):
        return np.diag([self.h1m, self.h2m])

    @property
    def Q_plus(self):
        return np.array([[self.a_plus, self.c_plus], [self.c_plus, self.b_plus]])

    @property
    def s0(self):
        return self.u_plus[0] + self.b_plus * self.u_plus[1] / self.c_plus

    def f2_minus(self):
        return -self.h2m * self.u_minus[1]

    def f2_plus(self):
        return (self.s - self.u_plus[0]) * self.c_plus - self.b_plus * self.u_plus[1]

    def with_s(self, s):
        return OvercompressiveParams(self.h1m, self.h2m, self.h1p, self.h2p, self.theta,
                                     self.u_minus, self.u_plus, s)


@dataclass(frozen=True)
class OvercompressivePredictions:
    s0: float
    A1: float
    A2: float
    Lambda: float
    chi_threshold: float
    Fprime0: float
    lambda_largescale: float  # limit of s * lambda(s) for the small real root as s grows

    @property
    def predicts_unstable(self):
        return self.Lambda < 0


def overcompressive_predictions(p):
    """Closed forms for the family through ``(s, 0)``.

    ``f2- D(0) = Lambda = A1 (u1+ - u1-) + A2 (u2+ - u2-)`` for every ``s``,
    with ``A1 = -c+ h1- h2-`` and ``A2 = h2- det Q+ - b+ det Q-``, so
    ``Lambda < 0`` exactly when ``u1+ - u1- > chi_threshold``.  Writing
    ``f2- D(lambda) = s F(lambda) + G(lambda)``, ``F(0) = 0`` and the small
    real root for large ``s`` is ``lambda ~ -G(0) / (s F'(0))``.
    """
    det_m = p.h1m * p.h2m
    det_p = p.h1p * p.h2p
    A1 = -p.c_plus * det_m
    A2 = p.h2m * det_p - p.b_plus * det_m
    du1 = p.u_plus[0] - p.u_minus[0]
    du2 = p.u_plus[1] - p.u_minus[1]
    Lam = A1 * du1 + A2 * du2
    sc = np.sin(p.theta) * np.cos(p.theta)
    fp0 = (p.h2m * sc * (p.h2p - p.h1p) * (p.h1m - p.h1p) * (p.h1m - p.h2p)
           / (p.h1p * p.h2p * p.h1m))
    return OvercompressivePredictions(
        s0=float(p.s0), A1=float(A1), A2=float(A2), Lambda=float(Lam),
        chi_threshold=float(A2 * du2 / (-A1)), Fprime0=float(fp0),
        lambda_largescale=float(-Lam / fp0))


def make_overcompressive(p):
    """Model, heteroclinic through ``(p.s, 0)`` and predictions.

    Raises :class:`~shockspec.errors.Transversality` when ``s <= s0``.
    """
    model = build_model([(p.Q_minus, p.u_minus), (p.Q_plus, p.u_plus)], [((0.0, 1.0), 0.0)])
    het = build_heteroclinic(model, [(p.s, 0.0)])
    return model, het, overcompressive_predictions(p)


def overcompressive_family(p, continuation=True):
    """``s -> (lambda -> D(lambda; s))`` for branch tracing; models are cached per ``s``."""

    @lru_cache(maxsize=256)
    def build(s):
        model, het, _ = make_overcompressive(p.with_s(s))
        return model, het

    def family(s):
        model, het = build(float(s))
        return lambda lam: evans_det(model, het, lam, continuation=continuation)

    return family


# three-region bifurcation --------------------------------------------------

@dataclass(frozen=True)
class BifurcationParams:
    """Rates of the three diagonal pieces, the ``u2`` coordinate of ``u+`` and the offset ``eps``.

    ``Q- = diag(nu_m, kappa_m)`` at ``(0, -2)``, ``Qx = diag(kappa_x, nu_x)`` at
    ``(eps, eps)`` and ``Q+ = diag(kappa_p, nu_p)`` at ``(-2, chi_state)``.
    """

    nu_m: float
    kappa_m: float
    kappa_x: float
    nu_x: float
    kappa_p: float
    nu_p: float
    chi_state: float
    eps: float = 0.0

    def __post_init__(self):
        if not self.nu_m < 0 < self.kappa_m:
            raise ModelGeometry("need nu_m < 0 < kappa_m")
        if not self.nu_x < 0 < self.kappa_x:
            raise ModelGeometry("need nu_x < 0 < kappa_x")
        if not self.nu_p < self.kappa_p < 0:
            raise ModelGeometry("need nu_p < kappa_p < 0")
        if not self.eps >= 0:
            raise ModelGeometry("need eps >= 0")

    def with_eps(self, eps):
        return BifurcationParams(self.nu_m, self.kappa_m, self.kappa_x, self.nu_x,
                                 self.kappa_p, self.nu_p, self.chi_state, eps)

    @property
    def eps_times(self):
        """``u2`` coordinate where the orbit meets ``{u1 = -1}``."""
        e = self.eps
        if e == 0:
            return 0.0
        return e - (1 + e) * (e / (1 + e)) ** (-self.nu_x / self.kappa_x)

    @property
    def xi_gap(self):
        """Time spent in the middle region."""
        e = self.eps
        return np.log((1 + e) / e) / self.kappa_x if e > 0 else np.inf

    @property
    def eps_flat(self):
        ex = self.eps_times
        return (-ex * self.nu_p + (ex - self.eps) * self.nu_x) / self.nu_x

    def S_minus(self):
        e = self.eps
        return np.array([[1.0, -e * self.kappa_x / self.kappa_m],
                         [0.0, -(1 + e) * self.nu_x / self.kappa_m]])

    def S_plus(self):
        e = self.eps
        return np.array([[-(1 + e) * self.kappa_x / self.kappa_p, 0.0],
                         [(self.chi_state * self.nu_p + self.eps_flat * self.nu_x) / self.kappa_p, 1.0]])

    def kernel_vector(self):
        """``(a, b)`` with ``a = f`` entering the first crossing, ``b = f`` leaving the last."""
        return np.array([0.0, self.kappa_m, self.kappa_p,
                         (self.eps_times - self.chi_state) * self.nu_p])


@dataclass(frozen=True)
class BifurcationPredictions:
    c: float            # slope of the small real root, lambda ~ c eps
    c_reference: float  # nu_m kx^2 (2 nu_x + chi) / (4 nu_x (kx - nu_m))
    eps_times: float
    eps_flat: float
    xi_gap: float
    flags: tuple = field(default=())


def bifurcation_predictions(p):
    """Small-``eps`` constants, with both slope formulas and sign flags."""
    c = bifurcation_slope(p)
    c_ref = (p.nu_m * p.kappa_x ** 2 * (2 * p.nu_x + p.chi_state)
             / (4 * p.nu_x * (p.kappa_x - p.nu_m)))
    flags = []
    if p.chi_state <= -2 * p.nu_x:
        flags.append("c_reference <= 0: no predicted instability")
    if c <= 0:
        flags.append("c <= 0: no predicted instability")
    return BifurcationPredictions(float(c), float(c_ref), float(p.eps_times), float(p.eps_flat),
                                  float(p.xi_gap), tuple(flags))


def bifurcation_slope(p):
    """Slope ``c`` of the root ``lambda = c eps + o(eps)`` of the normalised determinant.

    The normalised determinant tends to ``nu_m kx^2 (chi + 2)`` as
    ``lambda -> 0+`` (``chi + 2`` is the ``u2`` gap between the end states),
    and the root sits at ``c = nu_m kx^2 (chi + 2) / (4 (kx - nu_m))``.
    ``c_reference`` in :class:`BifurcationPredictions` keeps the alternative
    expression ``nu_m kx^2 (2 nu_x + chi) / (4 nu_x (kx - nu_m))`` for comparison;
    the two agree only when ``chi = 0``.
    """
    return p.nu_m * p.kappa_x ** 2 * (p.chi_state + 2) / (4 * (p.kappa_x - p.nu_m))


class Bifurcation(NamedTuple):
    model: object
    het: object
    predictions: BifurcationPredictions


def _bifurcation_pieces(p):
    e = p.eps
    return [(np.diag([p.nu_m, p.kappa_m]), (0.0, -2.0)),
            (np.diag([p.kappa_x, p.nu_x]), (e, e)),
            (np.diag([p.kappa_p, p.nu_p]), (-2.0, p.chi_state))]


LOWER = ((0.0, 1.0), -1.0)   # {u2 = -1}, crossed upwards
LEFT = ((-1.0, 0.0), 1.0)    # {u1 = -1}, crossed leftwards


def make_bifurcation(p):
    """Three-region model and heteroclinic for ``eps > 0``.

    For ``eps = 0`` the heteroclinic breaks into two sub-shocks meeting at the
    saddle; ``model`` and ``het`` are then pairs ``(lower, left)`` of two-region
    models and their heteroclinics.
    """
    pieces = _bifurcation_pieces(p)
    preds = bifurcation_predictions(p)
    if p.eps == 0:
        lower = build_model(pieces[:2], [LOWER])
        left = build_model(pieces[1:], [LEFT])
        return Bifurcation((lower, left),
                           (build_heteroclinic(lower, [(0.0, -1.0)]),
                            build_heteroclinic(left, [(-1.0, 0.0)])),
                           preds)
    model = build_model(pieces, [LOWER, LEFT])
    return Bifurcation(model, build_heteroclinic(model, [(0.0, -1.0)]), preds)


def bifurcation_function(p, normalized=True, continuation=False):
    model, het, _ = make_bifurcation(p)
    return lambda lam: theta_det(model, het, lam, normalized=normalized, continuation=continuation)


# named fixtures ------------------------------------------------------------

REFERENCE_OVERCOMPRESSIVE = OvercompressiveParams(
    1.0, 2.0, -2.0, -1.0, np.pi / 6, (0.0, -1.0), (0.0, 1.0), 1.0)
UNSTABLE_OVERCOMPRESSIVE = OvercompressiveParams(
    1.0, 2.0, -2.0, -1.0, np.pi / 6, (0.0, -1.0), (20.0, 1.0), 18.0)
BIFURCATION = BifurcationParams(-1.0, 1.0, 1.0, -1.0, -1.0, -2.0, 3.0, 1e-3)
BIFURCATION_UNSTABLE = BifurcationParams(-1.0, 1.0, 1.0, -1.0, -1.0, -2.0, -3.0, 1e-3)
# small rotation angle; its complex pair crosses the imaginary axis near s = s0 + 1.913
HOPF_OVERCOMPRESSIVE = OvercompressiveParams(
    1.16, 0.114, -4.35, -0.427, 0.113, (0.0, -1.475), (4.76, 0.42), 5.3)

SCENARIOS = {
    "overcompressive-reference": REFERENCE_OVERCOMPRESSIVE,
    "overcompressive-unstable": UNSTABLE_OVERCOMPRESSIVE,
    "overcompressive-hopf": HOPF_OVERCOMPRESSIVE,
    "bifurcation": BIFURCATION,
    "bifurcation-unstable": BIFURCATION_UNSTABLE,
}


def params_from_dict(data, where="scenario"):
    """Parameters from ``{"family": "overcompressive" | "bifurcation", "params": {...}}``."""
    family = data.get("family") if isinstance(data, dict) else None
    kwargs = data.get("params") if isinstance(data, dict) else None
    if family not in ("overcompressive", "bifurcation") or not isinstance(kwargs, dict):
        raise ModelGeometry(f"{where}: need 'family' (overcompressive|bifurcation) and 'params'")
    cls = OvercompressiveParams if family == "overcompressive" else BifurcationParams
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ModelGeometry(f"{where}: {exc}") from None


def params_to_dict(p):
    family = "overcompressive" if isinstance(p, OvercompressiveParams) else "bifurcation"
    return {"family": family, "params": {k: (list(v) if isinstance(v, tuple) else v)
                                         for k, v in p.__dict__.items()}}
