"""Analytic test functions with exact subdifferentials.

Every entry records the facts that the test-suite relies on, together with a
one-line analytic justification:

abs                 |x|; convex, so the subgradient inequality holds globally (r = 0).
quad                x^2/2; convex and C2.
neg_abs             -|x|; concave kink at 0, limiting subgradients {-1, +1}.
                    For v = 1 and x' = t > 0: -t >= t - r t^2/2 fails when t < 4/r.
quad_minus_abs      x^2/2 - |x| = min(x^2/2 - x, x^2/2 + x); same concave kink as
                    -|x| at 0, so not prox-regular there.  Prox-bounded (threshold 0).
abs_minus_quad      |x| - x^2/2 = max of two C2 functions (lower-C2); Hessian bounded
                    below by -1 away from the kink, kink is convex, so r = 1 globally.
huberizable         Huber function (x^2/2 on [-1, 1], |x| - 1/2 outside), the
                    Moreau envelope e_1 of |x|; convex and C1.
indicator_unit_interval
                    0 on [-1, 1], +inf outside; convex.  Normal cones at +-1 are
                    truncated to length 10 so they stay finitely generated.
double_well         (x^2 - 1)^2 / 4; C2 with f'' = 3x^2 - 1 >= -1, so r = 1 globally.
neg_quad            -x^2/2; C2, r = 1 globally; prox-bounded with threshold 1.
neg_quartic         -x^4; C2 but not prox-bounded (quartic beats every quadratic).
line, neg_line      x and -x; affine.

Parametrized entries (x in R, lam the parameter):

lambda_abs          lam |x|; convex in x for lam >= 0, not prox-regular at 0 for lam < 0.
lambda_neg_abs      lam (-|x|); concave kink at 0 for lam > 0.
shift_abs           |x - lam|; convex for every lam.
scale_quad          (lam x)^2 / 2; convex for every lam.
wsum_abs_quad       lam_1 |x| + lam_2 x^2/2; convex for lam >= 0.
wmax_lines          max(lam_1 x, -lam_2 x); convex for lam >= 0.
wmax_quad_line      max(lam_1 x^2/2, lam_2 x); convex for lam >= 0.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from .model import (
    Box,
    FunctionOracle,
    ParametrizedOracle,
    Subdifferential,
    build_arg_scale,
    build_arg_shift,
    build_weighted_max,
    build_weighted_sum,
)

NORMAL_CONE_CAP = 10.0
WINDOW = Box.cube(-100.0, 100.0, 1)

Oracle = Union[FunctionOracle, ParametrizedOracle]


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    id: str
    build: Callable[[], Oracle]
    properties: frozenset = frozenset()
    threshold: Optional[float] = None
    global_r: Optional[float] = None       # r valid for every base point and every eps
    lambda_region: Optional[Box] = None    # parameter values where the properties hold

    @property
    def oracle(self) -> Oracle:
        if self.id not in _oracle_cache:
            _oracle_cache[self.id] = self.build()
        return _oracle_cache[self.id]

    @property
    def parametrized(self) -> bool:
        return isinstance(self.oracle, ParametrizedOracle)

    def has(self, flag: str) -> bool:
        return flag in self.properties


_oracle_cache: dict = {}


def _x(X):
    return np.asarray(X, dtype=float)[..., 0]


def _abs_sub(x):
    if x[0] > 0:
        return Subdifferential.point([1.0])
    if x[0] < 0:
        return Subdifferential.point([-1.0])
    return Subdifferential.hull([[-1.0], [1.0]])


def _neg_abs_sub(x):
    if x[0] > 0:
        return Subdifferential.point([-1.0])
    if x[0] < 0:
        return Subdifferential.point([1.0])
    return Subdifferential.separate([[-1.0], [1.0]])


def _indicator_sub(x):
    if abs(x[0]) < 1.0:
        return Subdifferential.point([0.0])
    if x[0] == 1.0:
        return Subdifferential.hull([[0.0], [NORMAL_CONE_CAP]])
    return Subdifferential.hull([[-NORMAL_CONE_CAP], [0.0]])


def _smooth(name, fn, grad, tag="C2", convex=False):
    return FunctionOracle(
        fn=lambda X: fn(_x(X)), dim=1, domain=WINDOW, tag=tag,
        grad=lambda x: np.array([grad(x[0])]),
        subdiff=lambda x: Subdifferential.point([grad(x[0])]),
        name=name, convex=convex,
    )


def abs_fn() -> FunctionOracle:
    return FunctionOracle(lambda X: np.abs(_x(X)), 1, WINDOW, "convex", subdiff=_abs_sub, name="abs")


def quad() -> FunctionOracle:
    return _smooth("quad", lambda x: 0.5 * x * x, lambda x: x, convex=True)


def neg_abs() -> FunctionOracle:
    return FunctionOracle(lambda X: -np.abs(_x(X)), 1, WINDOW, "lsc", subdiff=_neg_abs_sub, name="neg_abs")


def quad_minus_abs() -> FunctionOracle:
    def sub(x):
        return _neg_abs_sub(x).shifted(x)
    return FunctionOracle(lambda X: 0.5 * _x(X) ** 2 - np.abs(_x(X)), 1, WINDOW, "lsc",
                          subdiff=sub, name="quad_minus_abs")


def abs_minus_quad() -> FunctionOracle:
    def sub(x):
        return _abs_sub(x).shifted(-x)
    return FunctionOracle(lambda X: np.abs(_x(X)) - 0.5 * _x(X) ** 2, 1, WINDOW, "lsc",
                          subdiff=sub, name="abs_minus_quad")


def huber() -> FunctionOracle:
    def fn(x):
        a = np.abs(x)
        return np.where(a <= 1.0, 0.5 * x * x, a - 0.5)
    return _smooth("huberizable", fn, lambda x: float(np.clip(x, -1.0, 1.0)), tag="C1", convex=True)


def indicator_unit_interval() -> FunctionOracle:
    def fn(X):
        x = _x(X)
        return np.where(np.abs(x) <= 1.0, 0.0, np.inf)
    return FunctionOracle(fn, 1, WINDOW, "convex", subdiff=_indicator_sub, name="indicator_unit_interval")


def double_well() -> FunctionOracle:
    return _smooth("double_well", lambda x: 0.25 * (x * x - 1.0) ** 2, lambda x: x ** 3 - x)


def neg_quad() -> FunctionOracle:
    return _smooth("neg_quad", lambda x: -0.5 * x * x, lambda x: -x)


def neg_quartic() -> FunctionOracle:
    return _smooth("neg_quartic", lambda x: -(x ** 4), lambda x: -4.0 * x ** 3)


def line() -> FunctionOracle:
    return _smooth("line", lambda x: x + 0.0 * x, lambda x: 1.0, convex=True)


def neg_line() -> FunctionOracle:
    return _smooth("neg_line", lambda x: -x + 0.0 * x, lambda x: -1.0, convex=True)


def _renamed(F: ParametrizedOracle, name: str) -> ParametrizedOracle:
    return replace(F, name=name)


def lambda_abs() -> ParametrizedOracle:
    return _renamed(build_weighted_sum([abs_fn()], Box.cube(-2.0, 2.0, 1)), "lambda_abs")


def lambda_neg_abs() -> ParametrizedOracle:
    return _renamed(build_weighted_sum([neg_abs()], Box.cube(-2.0, 2.0, 1)), "lambda_neg_abs")


def shift_abs() -> ParametrizedOracle:
    return _renamed(build_arg_shift(abs_fn(), Box.cube(-2.0, 2.0, 1)), "shift_abs")


def scale_quad() -> ParametrizedOracle:
    return _renamed(build_arg_scale(quad(), Box.cube(-2.0, 2.0, 1)), "scale_quad")


def wsum_abs_quad() -> ParametrizedOracle:
    return _renamed(build_weighted_sum([abs_fn(), quad()]), "wsum_abs_quad")


def wmax_lines() -> ParametrizedOracle:
    return _renamed(build_weighted_max([line(), neg_line()]), "wmax_lines")


def wmax_quad_line() -> ParametrizedOracle:
    return _renamed(build_weighted_max([quad(), line()]), "wmax_quad_line")


_POSITIVE_1 = Box.cube(0.0, 2.0, 1)
_POSITIVE_2 = Box.cube(0.0, 2.0, 2)
_ANY_1 = Box.cube(-2.0, 2.0, 1)

_CONVEX = frozenset({"convex", "prox_regular_everywhere", "prox_bounded"})

CATALOG: dict[str, CatalogEntry] = {
    e.id: e
    for e in [
        CatalogEntry("abs", abs_fn, _CONVEX, threshold=0.0, global_r=0.0),
        CatalogEntry("quad", quad, _CONVEX | {"C2"}, threshold=0.0, global_r=0.0),
        CatalogEntry("neg_abs", neg_abs, frozenset({"not_prox_regular_at_0", "prox_bounded"}), threshold=0.0),
        CatalogEntry("quad_minus_abs", quad_minus_abs, frozenset({"not_prox_regular_at_0", "prox_bounded"}),
                     threshold=0.0),
        CatalogEntry("abs_minus_quad", abs_minus_quad, frozenset({"prox_regular_everywhere", "prox_bounded"}),
                     threshold=1.0, global_r=1.0),
        CatalogEntry("huberizable", huber, _CONVEX | {"C1"}, threshold=0.0, global_r=0.0),
        CatalogEntry("indicator_unit_interval", indicator_unit_interval, _CONVEX, threshold=0.0, global_r=0.0),
        CatalogEntry("double_well", double_well, frozenset({"C2", "prox_regular_everywhere", "prox_bounded"}),
                     threshold=0.0, global_r=1.0),
        CatalogEntry("neg_quad", neg_quad, frozenset({"C2", "prox_regular_everywhere", "prox_bounded"}),
                     threshold=1.0, global_r=1.0),
        CatalogEntry("neg_quartic", neg_quartic, frozenset({"C2", "prox_regular_everywhere"}), global_r=None),
        CatalogEntry("line", line, _CONVEX | {"C2"}, threshold=0.0, global_r=0.0),
        CatalogEntry("neg_line", neg_line, _CONVEX | {"C2"}, threshold=0.0, global_r=0.0),
        CatalogEntry("lambda_abs", lambda_abs, frozenset({"convex"}), global_r=0.0, lambda_region=_POSITIVE_1),
        CatalogEntry("lambda_neg_abs", lambda_neg_abs, frozenset({"not_prox_regular_at_0"}),
                     lambda_region=_POSITIVE_1),
        CatalogEntry("shift_abs", shift_abs, frozenset({"convex"}), global_r=0.0, lambda_region=_ANY_1),
        CatalogEntry("scale_quad", scale_quad, frozenset({"convex"}), global_r=0.0, lambda_region=_ANY_1),
        CatalogEntry("wsum_abs_quad", wsum_abs_quad, frozenset({"convex"}), global_r=0.0,
                     lambda_region=_POSITIVE_2),
        CatalogEntry("wmax_lines", wmax_lines, frozenset({"convex"}), global_r=0.0, lambda_region=_POSITIVE_2),
        CatalogEntry("wmax_quad_line", wmax_quad_line, frozenset({"convex"}), global_r=0.0,
                     lambda_region=_POSITIVE_2),
    ]
}


def get(entry_id: str) -> CatalogEntry:
    try:
        return CATALOG[entry_id]
    except KeyError:
        raise KeyError(f"unknown catalog id {entry_id!r}; known: {sorted(CATALOG)}") from None


def oracle(entry_id: str) -> Oracle:
    return get(entry_id).oracle
