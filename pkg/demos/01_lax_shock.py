"""A Lax shock between two diagonal regions, built by hand and checked for stability.

Run with ``python3 demos/01_lax_shock.py``.
"""
import numpy as np

from shockspec import (HalfPlaneRegion, auto_radius, build_heteroclinic, build_model, compressivity_index,
                       crossing_jump, evans_det, locate_eigenvalues, zero_multiplicity)

# Saddle at (0, -1) below the line u2 = 0, sink at (0, 1) above it.
model = build_model([(np.diag([-1.0, 1.0]), (0.0, -1.0)),
                     (np.diag([-1.0, -2.0]), (0.0, 1.0))],
                    [((0.0, 1.0), 0.0)])
het = build_heteroclinic(model, [(0.0, 0.0)])
print("compressivity index:", compressivity_index(model, het))  # 1 -> Lax

# The field jumps across u2 = 0; eigenfunctions jump with it.
J = crossing_jump(het, 0)
print("field before/after:", *het.f_hat(0))
print("jump matrix S:\n", J.S)

# lambda = 0 is always an eigenvalue (the derivative of the orbit)
print("multiplicity of lambda = 0:", zero_multiplicity(model, het))

# Everything else: count zeros of D in {Re >= 1e-4, |lambda| <= R}
R = auto_radius(model, het)
rep = locate_eigenvalues(lambda z: evans_det(model, het, z), HalfPlaneRegion(1e-4, R))
print(f"R = {R:g}, winding = {rep.total_winding}, roots = {[r.lam for r in rep.roots]}")

# D along the imaginary axis never winds around zero
y = np.linspace(-20, 20, 9)
print(np.round(evans_det(model, het, 1e-4 + 1j * y), 4))
