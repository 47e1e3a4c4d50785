"""A shock that passes close to a saddle: three regions, two crossings and a small real eigenvalue.

Run with ``python3 demos/03_three_regions.py``.
"""
import numpy as np
from scipy.optimize import brentq

from shockspec import (BIFURCATION, BIFURCATION_UNSTABLE, HalfPlaneRegion, locate_eigenvalues,
                       make_bifurcation, theta_det, theta_matrix)

for p in (BIFURCATION, BIFURCATION_UNSTABLE):
    b = make_bifurcation(p)
    pr = b.predictions
    print(f"chi = {p.chi_state:+g}: crossings {np.round(b.het.points, 6).tolist()}, "
          f"time in the middle region {b.het.times[1]:.3f}")
    print("  predicted slope c =", pr.c, pr.flags)

    # lambda = 0 is a zero of det Theta; the kernel vector is explicit
    Th = theta_matrix(b.model, b.het, 0.0)
    print("  |Theta(0) a| =", np.linalg.norm(Th @ p.kernel_vector()))

    # dividing by lambda removes that zero; look for a positive root of the rest
    fn = lambda x: theta_det(b.model, b.het, x + 0j, normalized=True).real
    print("  d(0+) =", fn(1e-12))
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        bb = make_bifurcation(p.with_eps(eps))
        g = lambda x: theta_det(bb.model, bb.het, x + 0j, normalized=True).real
        xs = np.geomspace(1e-8, 1.0, 300)
        v = g(xs)
        idx = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
        roots = [brentq(g, xs[i], xs[i + 1], xtol=1e-18) for i in idx]
        print(f"  eps = {eps:g}: lambda / eps = {[r / eps for r in roots]}")

# the same root from the complex-plane search
b = make_bifurcation(BIFURCATION_UNSTABLE)
rep = locate_eigenvalues(lambda z: theta_det(b.model, b.het, z, normalized=True), HalfPlaneRegion(1e-5, 1.0))
print("winding", rep.total_winding, "roots", [r.lam for r in rep.roots])
