"""Overcompressive shocks: the sign of D(0), a real instability, and a Hopf-type crossing.

Run with ``python3 demos/02_overcompressive.py``.
"""
import numpy as np

from shockspec import (HOPF_OVERCOMPRESSIVE, REFERENCE_OVERCOMPRESSIVE, HalfPlaneRegion,
                       OvercompressiveParams, auto_radius, evans_det, locate_eigenvalues,
                       make_overcompressive, overcompressive_family, real_axis_roots, trace_branch)

p = REFERENCE_OVERCOMPRESSIVE
model, het, pred = make_overcompressive(p)
print("s0 =", pred.s0, " A1 =", pred.A1, " A2 =", pred.A2, " Lambda =", pred.Lambda)
print("f2- D(0) =", p.f2_minus() * evans_det(model, het, 0.0).real)
print("threshold on u1+ - u1-:", pred.chi_threshold)

# Push u1+ past the threshold: D(0) changes sign and a real root appears.
for du1 in (10.0, 20.0):
    q = OvercompressiveParams(p.h1m, p.h2m, p.h1p, p.h2p, p.theta, (0, -1), (du1, 1), du1 - 2)
    m, h, pr = make_overcompressive(q)
    fn = lambda z: evans_det(m, h, z)
    rep = locate_eigenvalues(fn, HalfPlaneRegion(1e-4, auto_radius(m, h)))
    print(f"u1+ - u1- = {du1:4.1f}: Lambda = {pr.Lambda:8.3f}, roots = {[r.lam for r in rep.roots]}, "
          f"bisection = {real_axis_roots(fn, 1e-4, 16.0)}")

# A small rotation angle gives a complex pair near s0 which crosses back into the left half-plane.
p = HOPF_OVERCOMPRESSIVE
s_seed = p.s0 + 1.0
m, h, _ = make_overcompressive(p.with_s(s_seed))
rep = locate_eigenvalues(lambda z: evans_det(m, h, z), HalfPlaneRegion(1e-4, auto_radius(m, h)))
seed = max(rep.roots, key=lambda r: r.lam.imag).lam
print("seed eigenvalue at s0 + 1:", seed)
tr = trace_branch(overcompressive_family(p), seed, s_seed, p.s0 + np.linspace(1.1, 2.1, 5))
for s, lam in zip(tr.s, tr.lam):
    print(f"  s = {s:.4f}  lambda = {lam.real:+.6f} {lam.imag:+.6f}i")
print("crossing (s1, lambda):", tr.crossings)

# For large s the remaining real root is small and negative, s * lambda -> -Lambda / F'(0).
p = REFERENCE_OVERCOMPRESSIVE
for s in (1e2, 1e3, 1e4):
    m, h, pr = make_overcompressive(p.with_s(s))
    r = real_axis_roots(lambda z: evans_det(m, h, -z, continuation=True), 1e-9, 0.2)
    print(f"s = {s:g}: s * lambda = {-s * r[0]:.5f}  (limit {pr.lambda_largescale:.5f})")
