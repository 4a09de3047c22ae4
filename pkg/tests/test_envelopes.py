import threading

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from proxkit import catalog as C
from proxkit.envelopes import (
    ENVELOPE_CACHE,
    Grid,
    NCProximalAverage,
    NotProxBoundedBelow,
    envelope_table,
    fenchel_conjugate,
    fenchel_conjugate_report,
    lipschitz_mix_prox,
    moreau_envelope,
    nc_pa,
    nc_pa_lambda_lipschitz,
    nc_pa_table,
    nearest_to,
    pa_convex,
    pa_convex_env,
    pa_convex_table,
    prox_bound_threshold,
    prox_map,
)
from proxkit.errors import DimensionMismatch, ImproperOnGrid, NotConvexTagged, OutsideDomain, ThresholdViolated
from proxkit.model import Box, FunctionOracle

G4 = Grid.interval(-4.0, 4.0, 801)
G2 = Grid.interval(-2.0, 2.0, 401)


def huber_env(x, r):
    """e_r |.|: r x^2 / 2 for |x| <= 1/r, else |x| - 1/(2r)."""
    a = abs(x)
    return 0.5 * r * x * x if a <= 1.0 / r else a - 0.5 / r


def test_grid_shape_and_expansion():
    g = Grid(Box.cube(-1, 1, 2), 5)
    assert g.nodes.shape == (25, 2)
    assert g.boundary.sum() == 16
    e = G2.expanded(3)
    assert np.allclose(e.spacing, G2.spacing) and e.points_per_axis == 1201
    with pytest.raises(DimensionMismatch):
        Grid(Box.cube(-1, 1, 4), 3)


@given(st.floats(-3, 3), st.sampled_from([0.5, 1.0, 2.0, 4.0]))
def test_envelope_of_abs_against_closed_form(x, r):
    res = moreau_envelope(C.oracle("abs"), r, [x], G4)
    # grid error is at most r/2 * (h/2)^2
    assert res.value == pytest.approx(huber_env(x, r), abs=0.5 * r * (0.005) ** 2 + 1e-12)
    assert not res.boundary_attained


def test_prox_of_abs_is_soft_threshold():
    p = prox_map(C.oracle("abs"), 1.0, [2.0], G4)
    assert np.allclose(p, [[1.0]])
    p = nearest_to(prox_map(C.oracle("abs"), 2.0, [0.3], G4), [0.3])
    assert p[0] == pytest.approx(0.0)


def test_envelope_below_function_and_monotone_in_r():
    f = C.oracle("double_well")
    g = Grid.interval(-2, 2, 201)
    vals = f.values(g.nodes)
    e1, _ = envelope_table(f, 1.0, g)
    e4, _ = envelope_table(f, 4.0, g)
    assert np.all(e1 <= vals + 1e-15)
    assert np.all(e1 <= e4 + 1e-15)


def test_conjugate_of_quadratic_and_unbounded_flag():
    assert fenchel_conjugate(C.oracle("quad"), G4, [1.5]) == pytest.approx(1.125)
    assert fenchel_conjugate_report(C.oracle("line"), G4, [3.0]).unbounded
    assert not fenchel_conjugate_report(C.oracle("line"), G4, [1.0]).unbounded
    assert fenchel_conjugate(C.oracle("abs"), G4, [0.5]) == pytest.approx(0.0)


def test_grid_errors():
    empty = FunctionOracle(lambda X: np.full(np.shape(X)[:-1], np.inf), 1, Box.cube(-10, 10))
    with pytest.raises(ImproperOnGrid):
        moreau_envelope(empty, 1.0, [0.0], G4)
    small = FunctionOracle(lambda X: X[..., 0] * 0, 1, Box.cube(-1, 1))
    with pytest.raises(OutsideDomain):
        moreau_envelope(small, 1.0, [0.0], G4)
    with pytest.raises(ValueError):
        moreau_envelope(C.oracle("abs"), 0.0, [0.0], G4)


def test_prox_bound_thresholds():
    g = Grid.interval(-4, 4, 401)
    assert isinstance(prox_bound_threshold(C.oracle("neg_quartic"), g, 64.0), NotProxBoundedBelow)
    est = prox_bound_threshold(C.oracle("neg_quad"), g, 8.0)
    assert 1.0 <= est < 2.0
    assert prox_bound_threshold(C.oracle("quad"), g, 8.0) <= 8.0 * 2.0 ** -29


@pytest.mark.parametrize("pair", [("quad", "quad"), ("abs", "abs"), ("quad", "abs"), ("huberizable", "abs")])
@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_pa_formulations_agree(pair, lam):
    f0, f1 = (C.oracle(p) for p in pair)
    a = pa_convex_table(f0, f1, lam, G2)
    from proxkit.envelopes import pa_convex_env_table
    b = pa_convex_env_table(f0, f1, lam, G2)
    assert np.max(np.abs(a - b)[1:-1]) < 1e-3


def test_pa_examples():
    q, a = C.oracle("quad"), C.oracle("abs")
    assert pa_convex(q, q, 0.5, [1.0], G2) == pytest.approx(0.5, abs=1e-3)
    assert pa_convex_env(q, q, 0.5, [1.0], G2) == pytest.approx(0.5, abs=1e-3)
    assert abs(pa_convex(q, a, 0.5, [0.0], G2) - pa_convex_env(q, a, 0.5, [0.0], G2)) < 1e-3
    assert pa_convex(q, a, 0.0, [1.3], G2) == pytest.approx(q([1.3]), abs=1e-3)
    assert pa_convex_env(q, a, 1.0, [1.3], G2) == pytest.approx(1.3, abs=1e-3)
    with pytest.raises(NotConvexTagged):
        pa_convex(C.oracle("neg_abs"), q, 0.5, [0.0], G2)
    with pytest.raises(ValueError):
        pa_convex(q, q, 1.5, [0.0], G2)


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_pa_convex_is_midpoint_convex(lam):
    vals = pa_convex_table(C.oracle("quad"), C.oracle("abs"), lam, G2)
    i, j = np.meshgrid(np.arange(401), np.arange(401), indexing="ij")
    even = (i + j) % 2 == 0
    mid = ((i + j) // 2)[even]
    assert np.all(vals[mid] <= 0.5 * (vals[i[even]] + vals[j[even]]) + 1e-6)


def test_prox_of_convex_is_nonexpansive():
    g = Grid.interval(-3, 3, 601)
    xs = np.linspace(-2, 2, 41)
    for name in ("abs", "huberizable", "indicator_unit_interval"):
        f = C.oracle(name)
        p = np.array([nearest_to(prox_map(f, 1.0, [x], g), [x])[0] for x in xs])
        d = np.abs(p[:, None] - p[None, :]) - np.abs(xs[:, None] - xs[None, :])
        assert np.all(d <= 1e-6 + g.spacing[0]), name


def test_nc_pa_examples_and_errors():
    q = C.oracle("quad")
    # closed form: e_2 q = y^2/3, outer parameter 9/4, minimizer y = 27/19, value 9/19.
    # The self-average identity needs the outer parameter to equal r, which it
    # does not here (r + lam(1 - lam) = 2.25).
    assert nc_pa(q, q, 2.0, 0.5, [1.0], G2) == pytest.approx(9 / 19, abs=1e-4)
    assert np.isfinite(nc_pa(q, C.oracle("quad_minus_abs"), 4.0, 0.5, [0.0], G2))
    with pytest.raises(ThresholdViolated):
        nc_pa(C.oracle("neg_quad"), q, 1.0, 0.5, [0.0], G2)
    assert np.isfinite(nc_pa(C.oracle("neg_quad"), q, 1.5, 0.5, [0.0], G2))
    with pytest.raises(ValueError):
        nc_pa(q, q, 2.0, 1.0, [0.0], G2)


def test_nc_pa_lipschitz_in_lambda_finite():
    L = nc_pa_lambda_lipschitz(C.oracle("quad"), C.oracle("quad_minus_abs"), 4.0, G2, np.linspace(0.1, 0.9, 9))
    assert np.isfinite(L)


def test_lipschitz_mix_prox_examples():
    q = C.oracle("quad")
    assert lipschitz_mix_prox(q, q, 1.0, 0.5, G2) == pytest.approx(0.5, abs=1e-4)
    for name in ("abs", "huberizable"):
        f = C.oracle(name)
        assert lipschitz_mix_prox(f, f, 1.0, 0.0, G2) <= 1 + 1e-6
    trend = [lipschitz_mix_prox(q, q, r, 0.5, G2) for r in (1.0, 10.0, 100.0)]
    assert trend[0] > trend[1] > trend[2]
    assert trend[2] == pytest.approx(1 / 101, abs=1e-4)


def test_lipschitz_mix_prox_sees_prox_jump():
    q, f1 = C.oracle("quad"), C.oracle("quad_minus_abs")
    assert lipschitz_mix_prox(q, f1, 4.0, 0.5, G2) > 1.0
    local = G2.nodes[np.abs(G2.nodes[:, 0] - 0.5) <= 0.25]
    assert lipschitz_mix_prox(q, f1, 4.0, 0.5, G2, samples=local) == pytest.approx(0.2, abs=1e-4)


def test_refined_nc_pa_matches_grid_and_gradient():
    q, f1 = C.oracle("quad"), C.oracle("quad_minus_abs")
    P = NCProximalAverage(q, f1, 4.0, G2)
    xs = np.array([-1.3, -0.4, 0.5, 1.1])
    vals, grads = P.evaluate(xs, np.full(4, 0.3))
    grid_vals = nc_pa_table(q, f1, 4.0, 0.3, G2, X=xs[:, None])
    assert np.allclose(vals, grid_vals, atol=1e-3)
    h = 1e-5
    fd = (P.evaluate(xs + h, np.full(4, 0.3))[0] - P.evaluate(xs - h, np.full(4, 0.3))[0]) / (2 * h)
    assert np.allclose(grads, fd, atol=1e-5)


def test_cache_is_safe_under_threads():
    ENVELOPE_CACHE.clear()
    f = C.oracle("double_well")
    g = Grid.interval(-2, 2, 301)
    out = []

    def work():
        out.append(envelope_table(f, 3.0, g)[0])

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(np.array_equal(o, out[0]) for o in out)
    assert len(ENVELOPE_CACHE) == 1
