"""Zero counting and localisation for analytic functions of ``lambda``.

Counting uses the argument principle: the change of ``arg fn`` along a closed
contour, sampled adaptively until consecutive samples differ in argument by
less than a fixed angle.  Localisation subdivides a rectangle by winding
counts and polishes each simple zero with a complex secant iteration.
Eigenvalue branches along a parameter are followed by a secant predictor and
corrector.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ContourHitsRoot, OutOfDomain, TraceLost
from .spectral import HalfPlaneRegion, asymptotic_constant, asymptotic_ratio

MAX_DARG = np.pi / 4
HIT_RTOL = 1e-12


# contours ------------------------------------------------------------------

class Contour:
    """A closed, positively oriented curve made of parametrised edges on ``[0, 1]``."""

    def edges(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Rectangle(Contour):
    x0: float
    x1: float
    y0: float
    y1: float

    def corners(self):
        return [complex(self.x0, self.y0), complex(self.x1, self.y0),
                complex(self.x1, self.y1), complex(self.x0, self.y1)]

    def edges(self):
        c = self.corners()
        return [_segment(c[i], c[(i + 1) % 4]) for i in range(4)]

    @property
    def center(self):
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    @property
    def size(self):
        return max(self.x1 - self.x0, self.y1 - self.y0)

    def contains(self, z, pad=0.0):
        return (self.x0 - pad <= z.real <= self.x1 + pad) and (self.y0 - pad <= z.imag <= self.y1 + pad)


@dataclass(frozen=True)
class Circle(Contour):
    center: complex
    radius: float

    def edges(self):
        c, r = complex(self.center), self.radius
        return [lambda t: c + r * np.exp(2j * np.pi * t)]


@dataclass(frozen=True)
class HalfDisc(Contour):
    """Boundary of ``{Re z >= delta, |z| <= R}``: down the line, then along the arc."""

    delta: float
    R: float

    def edges(self):
        d, R = self.delta, self.R
        a = np.arccos(d / R)
        top, bottom = R * np.exp(1j * a), R * np.exp(-1j * a)
        return [_segment(top, bottom), lambda t: R * np.exp(1j * (-a + 2 * a * t))]


def _segment(a, b):
    return lambda t: a + (b - a) * t


def _edge_increment(fn, edge, panels, max_samples):
    t = np.linspace(0.0, 1.0, panels + 1)
    v = np.asarray(fn(edge(t)), dtype=complex)
    while True:
        if not np.all(np.isfinite(v)):
            raise ContourHitsRoot("function is not finite on the contour")
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.angle(v[1:] / v[:-1])
        bad = np.flatnonzero(np.abs(d) > MAX_DARG)
        if bad.size == 0:
            return float(np.sum(d)), v
        if len(t) + bad.size > max_samples:
            raise ContourHitsRoot("argument refinement did not converge; a zero is close to the contour")
        tm = 0.5 * (t[bad] + t[bad + 1])
        vm = np.asarray(fn(edge(tm)), dtype=complex)
        t = np.insert(t, bad + 1, tm)
        v = np.insert(v, bad + 1, vm)


def winding_data(fn, contour, panels=64, max_samples=200_000):
    """Winding number of ``fn`` along ``contour`` and the sampled ``|fn|`` values."""
    total = 0.0
    mags = []
    for edge in contour.edges():
        inc, v = _edge_increment(fn, edge, panels, max_samples)
        total += inc
        a = np.abs(v)
        # local test: |fn| may legitimately vary over many decades along a long edge
        near = np.maximum(np.r_[a[1:], a[-1]], np.r_[a[0], a[:-1]])
        if np.any(a <= HIT_RTOL * near) or np.any(a == 0):
            raise ContourHitsRoot("function nearly vanishes on the contour")
        mags.append(a)
    mags = np.concatenate(mags)
    w = total / (2 * np.pi)
    k = int(round(w))
    if abs(w - k) > 0.1:
        raise ContourHitsRoot(f"raw winding {w:.4f} is not close to an integer")
    return k, mags


def winding_number(fn, contour, panels=64):
    """Number of zeros (with multiplicity) of analytic ``fn`` inside ``contour``.

    ``fn`` must accept arrays.  Raises :class:`ContourHitsRoot` when ``fn``
    (nearly) vanishes on the contour.
    """
    return winding_data(fn, contour, panels)[0]


# localisation --------------------------------------------------------------

@dataclass(frozen=True)
class Root:
    lam: complex
    residual: float
    winding: int
    converged: bool = True


@dataclass
class EigenvalueReport:
    roots: list
    region: HalfPlaneRegion
    total_winding: int
    strip_caveat: bool = True
    cells: list = field(default_factory=list)  # (Rectangle, winding) of the leaves

    @property
    def n_roots(self):
        return sum(r.winding for r in self.roots)

    @property
    def consistent(self):
        return sum(w for _, w in self.cells) == self.total_winding


def secant(fn, z0, z1, maxiter=100, tol=1e-14):
    """Complex secant iteration for a scalar analytic function."""
    try:
        f0, f1 = complex(fn(z0)), complex(fn(z1))
    except OutOfDomain:
        return z1, False
    for _ in range(maxiter):
        if f1 == f0:
            break
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        if not np.isfinite(z2):
            return z1, False
        try:
            f2 = complex(fn(z2))
        except OutOfDomain:
            return z1, False
        z0, f0 = z1, f1
        z1, f1 = z2, f2
        if abs(z1 - z0) <= tol * max(1.0, abs(z1)) or f1 == 0:
            return z1, True
    return z1, abs(f1) == 0 or abs(z1 - z0) <= 1e3 * tol * max(1.0, abs(z1))


def _refine(fn, cell, mags, real_symmetric):
    c, h = cell.center, 1e-3 * cell.size
    r, ok = secant(fn, c, c + h)
    if not ok or not cell.contains(r, pad=1e-9 * cell.size):
        return None
    if real_symmetric and abs(r.imag) <= 1e-8 * max(abs(r), cell.size):
        x = r.real
        rr, ok2 = secant(fn, x, x * (1 + 1e-7) + 1e-14)
        if ok2 and abs(rr.imag) == 0 and cell.contains(rr, pad=1e-9 * cell.size):
            r = complex(rr.real, 0.0)
    res = abs(complex(fn(r)))
    if res > 1e-8 * float(np.median(mags)):
        return None
    return Root(r, res, 1)


_SPLITS = (0.5173, 0.4791, 0.5437)


def _children(cell, frac):
    xm = cell.x0 + 0.5 * (cell.x1 - cell.x0)
    ym = cell.y0 + frac * (cell.y1 - cell.y0)
    return [Rectangle(cell.x0, xm, cell.y0, ym), Rectangle(xm, cell.x1, cell.y0, ym),
            Rectangle(cell.x0, xm, ym, cell.y1), Rectangle(xm, cell.x1, ym, cell.y1)]


def _order(z, scale):
    # conjugate partners differ in the last bits of the real part
    q = 1e-9 * scale
    return (round(z.real / q), round(z.imag / q))


def locate_eigenvalues(fn, region, real_symmetric=True, min_size=None, panels=64):
    """Find the zeros of ``fn`` in ``{Re >= delta, |lambda| <= R}``.

    The half-disc winding gives the total count.  The bounding rectangle is
    split into quadrants (the horizontal cut slightly off centre so that real
    zeros never sit on an edge) until each cell holds a single zero, which is
    then polished by a secant iteration.  Cells that cannot be resolved down
    to ``min_size`` are reported as one unconverged root carrying the cell
    winding.
    """
    total = winding_number(fn, HalfDisc(region.delta, region.R), panels)
    root_cell = Rectangle(region.delta, region.R, -region.R, region.R)
    min_size = min_size or 1e-10 * region.R
    roots, leaves = [], []
    stack = [root_cell]
    w0, mags0 = winding_data(fn, root_cell, panels)
    known = {root_cell: (w0, mags0)}
    while stack:
        cell = stack.pop(0)
        w, mags = known.pop(cell)
        if w == 0:
            continue
        if w == 1:
            root = _refine(fn, cell, mags, real_symmetric)
            if root is not None:
                roots.append(root)
                leaves.append((cell, w))
                continue
        if cell.size <= min_size:
            c = cell.center
            roots.append(Root(c, abs(complex(fn(c))), w, converged=False))
            leaves.append((cell, w))
            continue
        for frac in _SPLITS:
            try:
                kids = _children(cell, frac)
                data = [winding_data(fn, k, panels) for k in kids]
            except ContourHitsRoot:
                continue
            if sum(d[0] for d in data) == w:
                break
        else:
            raise ContourHitsRoot(f"could not subdivide cell {cell} cleanly")
        for k, d in zip(kids, data):
            known[k] = d
            stack.append(k)
    kept = sorted(((r, leaf) for r, leaf in zip(roots, leaves) if abs(r.lam) <= region.R),
                  key=lambda rl: _order(rl[0].lam, region.R))
    return EigenvalueReport([r for r, _ in kept], region, total, True, [leaf for _, leaf in kept])


def auto_radius(model, het, R0=1.0, tol=0.2, R_max=1e8, n_rays=5):
    """Smallest ``R = R0 2^k`` at which ``D / (-sqrt(lambda))^n`` is within ``tol`` of ``det(I + S)``.

    The test is made on ``n_rays`` rays spread over the closed right half-plane.
    """
    target = asymptotic_constant(model, het)
    angles = np.linspace(-np.pi / 2, np.pi / 2, n_rays)
    R = R0
    while R <= R_max:
        ratio = asymptotic_ratio(model, het, R * np.exp(1j * angles))
        if np.all(np.abs(ratio - target) <= tol * abs(target)):
            return R
        R *= 2
    raise ContourHitsRoot(f"asymptotic regime not reached below R = {R_max:g}")


def real_axis_roots(fn, a, b, n=400, log=True):
    """Sign changes of the real function ``Re fn`` on ``[a, b]``, polished by Brent's method."""
    xs = np.geomspace(a, b, n) if log else np.linspace(a, b, n)
    vals = np.real(np.asarray(fn(xs.astype(complex))))
    out = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        out.append(brentq(lambda x: float(np.real(fn(complex(x)))), xs[i], xs[i + 1],
                          xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))
    return out


# continuation --------------------------------------------------------------

@dataclass
class BranchTrace:
    s: np.ndarray
    lam: np.ndarray
    crossings: list  # (s1, lambda(s1)) where Re lambda changes sign

    @property
    def s1(self):
        return self.crossings[0][0] if self.crossings else None


def _correct(family, s, guess, scale):
    fn = family(s)
    return secant(fn, guess, guess + 1e-7 * scale)


def trace_branch(family, seed_lambda, seed_s, path, max_halvings=30, rtol=1e-6):
    """Follow a simple zero of ``family(s)`` along the increasing or decreasing grid ``path``.

    ``family(s)`` returns a callable ``lambda -> value``.  Each step predicts
    linearly from the last two accepted samples and corrects with a secant
    iteration; a correction that moves more than a tenth of ``|lambda|`` from
    the prediction is rejected and the step halved.  Sign changes of
    ``Re lambda`` between accepted samples are bisected in ``s`` until the
    interval is below ``rtol`` relative and ``|Re lambda|`` stops improving.
    """
    lam0, ok = _correct(family, seed_s, complex(seed_lambda), max(abs(seed_lambda), 1e-12))
    if not ok:
        raise TraceLost("seed is not a zero of the family", seed_s, seed_lambda)
    ss, ls = [seed_s], [lam0]
    crossings = []
    prev = None  # (s, lambda) before the last accepted
    for target in path:
        if target == ss[-1]:
            continue
        s_cur, l_cur = ss[-1], ls[-1]
        step = target - s_cur
        halvings = 0
        while s_cur != target:
            s_new = s_cur + step
            if (step > 0 and s_new > target) or (step < 0 and s_new < target):
                s_new = target
            if prev is not None and prev[0] != s_cur:
                guess = l_cur + (l_cur - prev[1]) * (s_new - s_cur) / (s_cur - prev[0])
            else:
                guess = l_cur
            scale = max(abs(l_cur), 1e-12)
            l_new, ok = _correct(family, s_new, guess, scale)
            if ok and abs(l_new - guess) <= 0.1 * scale and np.isfinite(l_new):
                if np.sign(l_new.real) != np.sign(l_cur.real) and l_cur.real != 0:
                    crossings.append(_bisect_crossing(family, s_cur, l_cur, s_new, l_new, rtol))
                prev = (s_cur, l_cur)
                s_cur, l_cur = s_new, l_new
                halvings = 0
                step = target - s_cur if abs(step) * 2 > abs(target - s_cur) else step * 2
            else:
                halvings += 1
                step *= 0.5
                if halvings > max_halvings or abs(step) < 1e-10 * max(1.0, abs(s_cur)):
                    raise TraceLost(f"continuation failed near s = {s_cur!r}", s_cur, l_cur)
        ss.append(s_cur)
        ls.append(l_cur)
    return BranchTrace(np.array(ss), np.array(ls), crossings)


def _bisect_crossing(family, sa, la, sb, lb, rtol):
    fa = la.real
    best = (sa, la) if abs(la.real) < abs(lb.real) else (sb, lb)
    for _ in range(200):
        sm = 0.5 * (sa + sb)
        if sm in (sa, sb):
            break
        guess = la + (lb - la) * (sm - sa) / (sb - sa)
        lm, ok = _correct(family, sm, guess, max(abs(guess), 1e-12))
        if not ok:
            raise TraceLost("corrector failed while bisecting a crossing", sm, guess)
        if abs(lm.real) < abs(best[1].real):
            best = (sm, lm)
        if lm.real == 0:
            break
        if np.sign(lm.real) == np.sign(fa):
            sa, la, fa = sm, lm, lm.real
        else:
            sb, lb = sm, lm
        if abs(sb - sa) <= rtol * 1e-6 * max(1.0, abs(sm)):
            break
    return float(best[0]), complex(best[1])
