import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shockspec.errors import ModelGeometry, NoConnection, NonHyperbolic, SymmetryError, Transversality
from shockspec.model import build_heteroclinic, build_model, classify_equilibrium, compressivity_index
from shockspec.scenarios import (BIFURCATION, REFERENCE_OVERCOMPRESSIVE, make_bifurcation,
                                 make_diagonal_shock, make_overcompressive)


def test_classify_diagonal():
    e = classify_equilibrium(np.diag([1.0, 2.0]))
    assert e.kind == "source" and e.eigenvalues == (1.0, 2.0)
    assert classify_equilibrium(np.diag([-1.0, -2.0])).kind == "sink"
    assert str(classify_equilibrium(np.diag([-1.0, 3.0]))) == "saddle(1)"


def test_classify_rotated_sink():
    p = REFERENCE_OVERCOMPRESSIVE
    e = classify_equilibrium(p.Q_plus)
    assert e.kind == "sink"
    np.testing.assert_allclose(sorted(e.eigenvalues), [-2.0, -1.0], atol=1e-14)


def test_classify_errors():
    with pytest.raises(SymmetryError):
        classify_equilibrium([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NonHyperbolic):
        classify_equilibrium(np.diag([1.0, 0.0]))


def test_build_model_valid_and_geometry():
    m = build_model([(np.diag([1.0, 2.0]), (0, -1)), (np.diag([-1.0, -2.0]), (0, 1))], [((0, 1), 0)])
    assert m.n_regions == 2 and m.dim == 2
    assert m.region_index((0, -0.5)) == 0 and m.region_index((0, 0.5)) == 1
    assert m.region_index((3, 0.0)) is None
    with pytest.raises(ModelGeometry):
        build_model([(np.eye(2), (0, 0)), (-np.eye(2), (0, 1))], [((0, 1), 0)])


def test_three_region_model():
    b = make_bifurcation(BIFURCATION)
    m = b.model
    assert m.n_regions == 3
    assert m.region_index((0.0, -2.0)) == 0
    assert m.region_index((0.5, 0.5)) == 1
    assert m.region_index((-2.0, 3.0)) == 2


def test_gamma_minus_closed_form():
    # eps = 0: lower sub-shock reaches (0, -1) from (0, -2) along the u2 axis
    b = make_bifurcation(BIFURCATION.with_eps(0.0))
    het = b.het[0]
    xi = -np.linspace(0.01, 5.0, 50)
    expected = np.stack([np.zeros_like(xi), -2.0 + np.exp(BIFURCATION.kappa_m * xi)], axis=1)
    np.testing.assert_allclose(het(xi), expected, atol=1e-12)


def test_gamma_plus_closed_form():
    p = BIFURCATION.with_eps(0.0)
    het = make_bifurcation(p).het[1]
    xi = np.linspace(0.01, 5.0, 50)
    u1 = -2.0 + np.exp(p.kappa_p * xi)
    u2 = p.chi_state - p.chi_state * np.exp(p.nu_p * xi)
    np.testing.assert_allclose(het(xi), np.stack([u1, u2], axis=1), atol=1e-12)


def test_overcompressive_below_s0_is_not_transversal():
    p = REFERENCE_OVERCOMPRESSIVE
    with pytest.raises(Transversality):
        make_overcompressive(p.with_s(p.s0 - 0.1))
    model, het, _ = make_overcompressive(p.with_s(p.s0 + 1e-6))
    assert 0 < het.normal_flux(0)[1] < 1e-5


def test_off_plane_crossing():
    with pytest.raises(ModelGeometry):
        make_diagonal_shock(-1, 1, -1, -2, (0, -1), (0, 1), (0, 0.3))


def test_end_segment_must_converge():
    # u1 unstable at u- but crossing off the u1 = u1- line
    with pytest.raises(NoConnection):
        make_diagonal_shock(-1, 1, -1, -2, (0, -1), (0, 1), (0.5, 0))


def test_continuity_and_ode(lax_shock):
    b = make_bifurcation(BIFURCATION)
    for model, het in (lax_shock, (b.model, b.het)):
        for k, (w, t) in enumerate(zip(het.points, het.times)):
            np.testing.assert_allclose(het(t - 1e-13), w, atol=1e-10)
            np.testing.assert_allclose(het(t + 1e-13), w, atol=1e-10)
        # finite-difference derivative against the field, per segment
        edges = [het.times[0] - 5.0, *het.times, het.times[-1] + 5.0]
        for a, c in zip(edges[:-1], edges[1:]):
            xi = np.linspace(a, c, 102)[1:-1]
            h = 1e-6 * (c - a)
            fd = (het(xi + h) - het(xi - h)) / (2 * h)
            np.testing.assert_allclose(fd, het.derivative(xi), atol=1e-8 * max(1, np.abs(fd).max()))


def test_end_limits(lax_shock):
    model, het = lax_shock
    rho = 1.0
    errs = []
    for X in (5.0, 10.0, 20.0):
        errs.append(max(np.linalg.norm(het(-X / rho) - model.pieces[0].u_star),
                        np.linalg.norm(het(X / rho) - model.pieces[1].u_star)))
    assert errs[0] <= 2 * np.exp(-5.0) and errs[2] <= 2 * np.exp(-20.0)
    assert errs[0] > errs[1] > errs[2]


def test_compressivity():
    lax = make_diagonal_shock(-1, 1, -1, -2, (0, -1), (0, 1), (0, 0))
    assert compressivity_index(*lax) == 1
    model, het, _ = make_overcompressive(REFERENCE_OVERCOMPRESSIVE)
    assert compressivity_index(model, het) == 2
    under = make_diagonal_shock(-1, 1, 1, -2, (0, -1), (0, 1), (0, 0))
    assert compressivity_index(*under) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_transversality_invariant(seed):
    from shockspec.scenarios import random_diagonal_shock
    (model, het), _ = random_diagonal_shock(np.random.default_rng(seed))
    for k in range(het.n_crossings):
        pre, post = het.normal_flux(k)
        assert pre > 0 and post > 0
