"""Replace the discontinuity by a thin smooth layer and watch the jump matrix emerge.

Run with ``python3 demos/04_smoothing_oracle.py``.
"""
import numpy as np
from scipy.optimize import brentq

from shockspec import (BIFURCATION_UNSTABLE, Mollifier, build_heteroclinic, build_model, crossing_jump,
                       jump_convergence_fit, layer_crossing_time, make_bifurcation, shooting_mismatch,
                       theta_det)

model = build_model([(np.eye(2), (-1.0, -2.0)), (-np.eye(2), (3.0, 4.0))], [((0.0, 1.0), 0.0)])
het = build_heteroclinic(model, [(0.0, 0.0)])
print("S =\n", crossing_jump(het, 0).S)  # [[1, 1], [0, 2]]

fit = jump_convergence_fit(model, het, 0.5, (1.0, 1.5), (0.5, 0.5), [1e-2, 1e-3, 1e-4])
for mu, e in zip(fit.mu, fit.errors):
    print(f"mu = {mu:.0e}: |v_mu - S v| = {e:.3e}")
print("fitted order:", fit.slope)

t, ma = layer_crossing_time(model, Mollifier(1e-3), het)
print("time in the layer:", t, " quadrature:", ma)

# Whole-line shooting through both layers of the three-region shock
p = BIFURCATION_UNSTABLE.with_eps(1e-2)
b = make_bifurcation(p)
root = brentq(lambda x: theta_det(b.model, b.het, x + 0j, normalized=True).real, 1e-5, 1e-2, xtol=1e-16)
mol = Mollifier(1e-4)
shoot = brentq(lambda x: shooting_mismatch(b.model, mol, b.het, x).real, 0.8 * root, 1.2 * root,
               xtol=1e-12)
print(f"eigenvalue from the jump calculus {root:.8e}, from the smoothed field {shoot:.8e}")
