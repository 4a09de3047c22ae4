import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from proxkit import catalog as C
from proxkit.errors import (
    DimensionMismatch,
    EmptyList,
    EvalInfinite,
    NoSubdiffOracle,
    NotC1Tagged,
    NotFiniteValued,
    OutsideDomain,
    ProxkitError,
)
from proxkit.model import (
    Box,
    FunctionOracle,
    Subdifferential,
    as_parametrized,
    build_arg_scale,
    build_arg_shift,
    build_tilt_shift,
    build_weighted_max,
    build_weighted_sum,
    central_difference,
    eval_subdifferential,
    eval_subdifferential_x,
    ext_mul,
    recenter,
)

finite = st.floats(-5, 5, allow_nan=False)


def test_ext_mul_zero_times_inf():
    assert ext_mul(0.0, math.inf) == 0.0
    assert ext_mul(2.0, math.inf) == math.inf


def test_box_ops():
    b = Box.cube(-1.0, 3.0, 2)
    assert np.allclose(b.center, [1, 1])
    assert b.contains([3.0, -1.0]) and not b.contains([3.1, 0.0])
    assert np.allclose(b.scaled(2).lower, [-3, -3])
    assert b.contains_box(Box.cube(0, 1, 2))
    with pytest.raises(ValueError):
        Box([1.0], [0.0])


def test_subdifferential_membership():
    s = Subdifferential.hull([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert s.contains([0.25, 0.25])
    assert not s.contains([0.75, 0.75])
    sep = Subdifferential.separate([[-1.0], [1.0]])
    assert sep.contains([1.0]) and not sep.contains([0.0])


def test_of_multiple_splits_hull_for_negative_scalars():
    s = Subdifferential.hull([[-1.0], [1.0]])
    neg = s.of_multiple(-2.0)
    assert not neg.is_convex
    assert neg.generator_set() == {(-2.0,), (2.0,)}
    assert s.of_multiple(0.0).generator_set() == {(0.0,)}


def test_minkowski_sum():
    a = Subdifferential.hull([[-1.0], [1.0]])
    b = Subdifferential.point([0.5])
    assert (a + b).generator_set() == {(-0.5,), (1.5,)}
    with pytest.raises(DimensionMismatch):
        a + Subdifferential.point([0.0, 0.0])
    with pytest.raises(EmptyList):
        Subdifferential(())


def test_sample_includes_interior():
    pts = Subdifferential.hull([[-1.0], [1.0]]).sample(9)
    assert any(np.isclose(pts[:, 0], 0.5))


def test_abs_subdifferential_at_kink():
    assert C.oracle("abs")  # builds
    s = eval_subdifferential(C.oracle("abs"), [0.0])
    assert s.generator_set() == {(-1.0,), (1.0,)}
    assert s.contains([0.3])


def test_c1_tag_uses_central_difference():
    f = FunctionOracle(lambda X: np.sin(X[..., 0]), 1, Box.cube(-5, 5), "C1")
    g = eval_subdifferential(f, [0.3]).generators[0, 0]
    assert g == pytest.approx(math.cos(0.3), abs=1e-8)


def test_errors():
    f = FunctionOracle(lambda X: np.abs(X[..., 0]), 1, Box.cube(-1, 1), "lsc")
    with pytest.raises(NoSubdiffOracle):
        eval_subdifferential(f, [0.2])
    with pytest.raises(OutsideDomain):
        eval_subdifferential(f, [2.0])
    with pytest.raises(EvalInfinite):
        eval_subdifferential(C.oracle("indicator_unit_interval"), [1.5])
    with pytest.raises(DimensionMismatch):
        C.oracle("abs")([0.0, 1.0])
    bad = FunctionOracle(lambda X: np.full(np.shape(X)[:-1], -np.inf), 1, Box.cube(-1, 1))
    with pytest.raises(ProxkitError):
        bad([0.0])


def test_tilt_shift_literal_example():
    g = build_tilt_shift(C.oracle("quad"), [1.0], [1.0])
    # g(x) = (x - 1)^2 / 2 - (x - 1); at x = 2: 1/2 - 1
    assert g([2.0]) == pytest.approx(-0.5)
    assert eval_subdifferential_x(g, [2.0], []).generator_set() == {(0.0,)}


@given(finite, finite, finite)
def test_recenter_moves_base_point(xbar, vbar, x):
    f = C.oracle("double_well")
    g = recenter(f, [xbar], [vbar])
    assert g([x]) == pytest.approx(f([x + xbar]) - vbar * x, abs=1e-9)
    s = eval_subdifferential_x(g, [x], [])
    assert s.generators[0, 0] == pytest.approx((x + xbar) ** 3 - (x + xbar) - vbar, abs=1e-9)


def test_lambda_abs_negative_parameter_is_concave_kink():
    s = eval_subdifferential_x(C.oracle("lambda_abs"), [0.0], [-1.0])
    assert not s.is_convex
    assert s.generator_set() == {(-1.0,), (1.0,)}
    assert not s.contains([0.0])


def test_weighted_sum_zero_weight_contributes_nothing():
    F = build_weighted_sum([C.oracle("abs"), C.oracle("indicator_unit_interval")])
    assert F([5.0], [1.0, 0.0]) == 5.0
    assert eval_subdifferential_x(F, [0.0], [1.0, 0.0]).generator_set() == {(-1.0,), (1.0,)}


def test_weighted_sum_at_kink():
    F = C.oracle("wsum_abs_quad")
    s = eval_subdifferential_x(F, [0.0], [1.0, 1.0])
    assert s.generator_set() == {(-1.0,), (1.0,)}


def test_weighted_max_active_hull():
    F = C.oracle("wmax_quad_line")
    # max(2 x^2 / 2, 1 x) at x = 1: both pieces equal 1
    assert F([1.0], [2.0, 1.0]) == 1.0
    assert eval_subdifferential_x(F, [1.0], [2.0, 1.0]).generator_set() == {(1.0,), (2.0,)}


def test_weighted_max_rejects_nonsmooth_and_infinite_atoms():
    with pytest.raises(NotC1Tagged):
        build_weighted_max([C.oracle("abs"), C.oracle("quad")])
    spiky = FunctionOracle(lambda X: np.where(X[..., 0] > 0, np.inf, 0.0), 1, Box.cube(-1, 1), "C1")
    F = build_weighted_max([spiky, C.oracle("quad")])
    with pytest.raises(NotFiniteValued):
        F([0.5], [1.0, 1.0])


@given(finite, st.floats(-2, 2))
def test_arg_shift_and_scale(x, lam):
    f = C.oracle("abs")
    assert build_arg_shift(f)([x], [lam]) == pytest.approx(abs(x - lam))
    q = build_arg_scale(C.oracle("quad"))
    assert q([x], [lam]) == pytest.approx(0.5 * (lam * x) ** 2)
    g = eval_subdifferential_x(q, [x], [lam]).generators[0, 0]
    assert g == pytest.approx(lam * lam * x)


def test_as_parametrized_has_empty_parameter():
    F = as_parametrized(C.oracle("quad"))
    assert F.lambda_dim == 0
    assert F([3.0], []) == 4.5


def test_central_difference_step():
    g = central_difference(lambda x: float(x[0] ** 3), np.array([2.0]))
    assert g[0] == pytest.approx(12.0, rel=1e-8)
