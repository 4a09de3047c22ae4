"""Extended-real-valued functions, parametrized families and their subdifferentials.

Values live in R u {+inf}; a Python float with ``math.inf`` plays the role of
the extended real.  ``-inf`` and NaN are rejected at evaluation time because
every function handled here is proper.

A subdifferential is stored as a finite union of convex hulls (``groups``).
Convex and max-type functions need one group; concave kinks such as the one
of ``-|x|`` at the origin need one singleton group per limiting gradient.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import nnls

from .errors import (
    DimensionMismatch,
    EmptyList,
    EvalInfinite,
    NoSubdiffOracle,
    NotC1Tagged,
    NotFiniteValued,
    OutsideDomain,
    ProxkitError,
)

TAGS = ("C2", "C1", "convex", "lsc")
SMOOTH_TAGS = ("C2", "C1")

INF = float("inf")


def as_vector(x, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.shape[0] != n:
        raise DimensionMismatch(f"expected a vector of length {n}, got {v.shape[0]}")
    return v


def ext_mul(c, v):
    """``c * v`` with the convention ``0 * inf = 0``."""
    c = np.asarray(c, dtype=float)
    v = np.asarray(v, dtype=float)
    with np.errstate(invalid="ignore"):
        out = c * v
    return np.where(c == 0.0, 0.0, out)


def _checked(vals, what: str):
    vals = np.asarray(vals, dtype=float)
    if np.any(np.isnan(vals)):
        raise ProxkitError(f"{what} returned NaN")
    if np.any(vals == -np.inf):
        raise ProxkitError(f"{what} returned -inf; functions must be proper")
    return vals


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float)).reshape(-1)
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float)).reshape(-1)
        if lo.shape != hi.shape:
            raise DimensionMismatch("box bounds differ in length")
        if np.any(lo > hi):
            raise ValueError("box needs lower <= upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, lo: float, hi: float, n: int = 1) -> "Box":
        return cls(np.full(n, lo), np.full(n, hi))

    @classmethod
    def empty(cls) -> "Box":
        return cls(np.zeros(0), np.zeros(0))

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def contains_box(self, other: "Box", tol: float = 1e-12) -> bool:
        return self.contains(other.lower, tol) and self.contains(other.upper, tol)

    def shifted(self, d) -> "Box":
        return Box(self.lower + d, self.upper + d)

    def scaled(self, factor: float) -> "Box":
        c, h = self.center, 0.5 * self.width * factor
        return Box(c - h, c + h)

    def to_list(self):
        return [self.lower.tolist(), self.upper.tolist()]

    def __repr__(self):
        return f"Box({self.lower.tolist()}, {self.upper.tolist()})"


@dataclass(frozen=True, eq=False)
class Subdifferential:
    """Union of the convex hulls of ``groups`` (each an array of shape (k, n))."""

    groups: tuple

    def __post_init__(self):
        gs = tuple(np.atleast_2d(np.asarray(g, dtype=float)) for g in self.groups)
        if not gs:
            raise EmptyList("a subdifferential needs at least one group")
        n = gs[0].shape[1]
        if any(g.shape[1] != n for g in gs):
            raise DimensionMismatch("subgradient groups differ in dimension")
        object.__setattr__(self, "groups", gs)

    @classmethod
    def hull(cls, vectors) -> "Subdifferential":
        return cls((np.atleast_2d(np.asarray(vectors, dtype=float)),))

    @classmethod
    def point(cls, v) -> "Subdifferential":
        return cls((np.asarray(v, dtype=float).reshape(1, -1),))

    @classmethod
    def separate(cls, vectors) -> "Subdifferential":
        """Finite set with no convex combinations between its members."""
        vs = np.atleast_2d(np.asarray(vectors, dtype=float))
        return cls(tuple(v.reshape(1, -1) for v in vs))

    @property
    def dim(self) -> int:
        return self.groups[0].shape[1]

    @property
    def generators(self) -> np.ndarray:
        """All vertices, deduplicated and sorted lexicographically."""
        return np.unique(np.vstack(self.groups), axis=0)

    def generator_set(self) -> set:
        return {tuple(float(c) for c in v) for v in self.generators}

    @property
    def is_convex(self) -> bool:
        return len(self.groups) == 1

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = as_vector(v, self.dim)
        return any(_in_hull(g, v, tol) for g in self.groups)

    def sample(self, hull_points: int = 9) -> np.ndarray:
        """Vertices plus evenly spaced points on every edge of every group."""
        out = []
        ts = np.linspace(0.0, 1.0, max(hull_points, 2))[1:-1]
        for g in self.groups:
            out.append(g)
            for a, b in itertools.combinations(range(g.shape[0]), 2):
                out.append((1.0 - ts)[:, None] * g[a] + ts[:, None] * g[b])
            if g.shape[0] > 2:
                out.append(g.mean(axis=0, keepdims=True))
        return np.unique(np.vstack(out), axis=0)

    def map_vectors(self, c: float) -> "Subdifferential":
        """Linear image ``{c * w}`` (chain rule for an inner scaling)."""
        return Subdifferential(tuple(c * g for g in self.groups))

    def of_multiple(self, c: float) -> "Subdifferential":
        """Subdifferential of ``c * f`` given this one for ``f``.

        For ``c < 0`` a hull group turns into its vertices: a convex kink of
        ``f`` becomes a concave kink of ``c * f``, whose limiting subgradients
        are the one-sided gradients only.
        """
        if c == 0.0:
            return Subdifferential.point(np.zeros(self.dim))
        if c > 0.0:
            return Subdifferential(tuple(c * g for g in self.groups))
        return Subdifferential(tuple((c * g[i]).reshape(1, -1) for g in self.groups for i in range(g.shape[0])))

    def shifted(self, w) -> "Subdifferential":
        w = as_vector(w, self.dim)
        return Subdifferential(tuple(g + w for g in self.groups))

    def __add__(self, other: "Subdifferential") -> "Subdifferential":
        if other.dim != self.dim:
            raise DimensionMismatch("Minkowski sum of subdifferentials of different dimension")
        groups = []
        for a in self.groups:
            for b in other.groups:
                groups.append((a[:, None, :] + b[None, :, :]).reshape(-1, self.dim))
        return Subdifferential(tuple(np.unique(g, axis=0) for g in groups))

    @staticmethod
    def convex_union(parts: Sequence["Subdifferential"]) -> "Subdifferential":
        return Subdifferential.hull(np.vstack([np.vstack(p.groups) for p in parts]))

    def __repr__(self):
        return "Subdifferential(" + " u ".join(f"conv{g.tolist()}" for g in self.groups) + ")"


def _in_hull(g: np.ndarray, v: np.ndarray, tol: float) -> bool:
    if g.shape[0] == 1:
        return bool(np.linalg.norm(g[0] - v) <= tol)
    if g.shape[1] == 1:
        return bool(g.min() - tol <= v[0] <= g.max() + tol)
    weight = 1e3
    A = np.vstack([g.T, weight * np.ones((1, g.shape[0]))])
    b = np.concatenate([v, [weight]])
    _, res = nnls(A, b)
    return bool(res <= tol)


def central_difference(fun: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        h = max(1e-6, 1e-6 * abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


@dataclass(frozen=True, eq=False)
class FunctionOracle:
    """f : R^n -> R u {+inf} with optional gradient / subdifferential oracles.

    ``fn`` must accept arrays of shape (..., n) and return shape (...).
    ``domain`` is the finite sampling window, not the effective domain.
    ``convex`` marks smooth functions that are also convex (the tag holds
    only one of smoothness or convexity).
    """

    fn: Callable
    dim: int
    domain: Box
    tag: str = "lsc"
    grad: Optional[Callable] = None
    subdiff: Optional[Callable] = None
    name: Optional[str] = None
    convex: bool = False

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown smoothness tag {self.tag!r}")
        if self.domain.n != self.dim:
            raise DimensionMismatch("domain dimension differs from function dimension")
        if self.tag == "convex":
            object.__setattr__(self, "convex", True)

    def __call__(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(_checked(self.fn(x), self.name or "function"))

    def values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        return _checked(np.broadcast_to(self.fn(X), X.shape[:1]), self.name or "function").astype(float)


@dataclass(frozen=True, eq=False)
class ParametrizedOracle:
    """f : R^n x R^m -> R u {+inf}; ``fn(x, lam)`` broadcasts over leading axes."""

    fn: Callable
    x_dim: int
    lambda_dim: int
    x_domain: Box
    lambda_domain: Box = field(default_factory=Box.empty)
    subdiff_x: Optional[Callable] = None
    tag: str = "lsc"
    name: Optional[str] = None
    grad_x: Optional[Callable] = None  # vectorized x-gradient, (X, L) -> (..., n)

    def __post_init__(self):
        if self.x_domain.n != self.x_dim or self.lambda_domain.n != self.lambda_dim:
            raise DimensionMismatch("domain dimensions differ from oracle dimensions")

    def __call__(self, x, lam=()) -> float:
        x = as_vector(x, self.x_dim)
        lam = as_vector(lam, self.lambda_dim)
        return float(_checked(self.fn(x, lam), self.name or "function"))

    def values(self, X, lam) -> np.ndarray:
        """Values at many x for one parameter value."""
        X = np.asarray(X, dtype=float).reshape(-1, self.x_dim)
        lam = as_vector(lam, self.lambda_dim)
        L = np.broadcast_to(lam, (X.shape[0], self.lambda_dim))
        return _checked(np.broadcast_to(self.fn(X, L), X.shape[:1]), self.name or "function").astype(float)

    def at(self, lam) -> FunctionOracle:
        lam = as_vector(lam, self.lambda_dim)
        sub = None
        if self.subdiff_x is not None:
            sub = lambda x: self.subdiff_x(as_vector(x, self.x_dim), lam)
        return FunctionOracle(
            fn=lambda X: self.fn(X, np.broadcast_to(lam, np.shape(X)[:-1] + (self.lambda_dim,))),
            dim=self.x_dim,
            domain=self.x_domain,
            tag=self.tag,
            subdiff=sub,
            name=None if self.name is None else f"{self.name}@{lam.tolist()}",
        )


def as_parametrized(f) -> ParametrizedOracle:
    """View a FunctionOracle as a family with an empty parameter."""
    if isinstance(f, ParametrizedOracle):
        return f
    sub = None
    if f.subdiff is not None or f.grad is not None or f.tag in SMOOTH_TAGS:
        sub = lambda x, lam: eval_subdifferential(f, x)
    return ParametrizedOracle(
        fn=lambda X, L: f.fn(X),
        x_dim=f.dim,
        lambda_dim=0,
        x_domain=f.domain,
        subdiff_x=sub,
        tag=f.tag,
        name=f.name,
    )


def eval_subdifferential(f: FunctionOracle, x) -> Subdifferential:
    """Subgradients of f at x, exact when f carries an oracle."""
    x = as_vector(x, f.dim)
    if not f.domain.contains(x):
        raise OutsideDomain(f"{x.tolist()} is outside {f.domain}")
    if f(x) == INF:
        raise EvalInfinite(f"f({x.tolist()}) = +inf")
    if f.subdiff is not None:
        return f.subdiff(x)
    if f.grad is not None:
        return Subdifferential.point(f.grad(x))
    if f.tag in SMOOTH_TAGS:
        return Subdifferential.point(central_difference(f, x))
    raise NoSubdiffOracle(f"{f.name or 'function'} has no subdifferential oracle")


def eval_subdifferential_x(F: ParametrizedOracle, x, lam) -> Subdifferential:
    x = as_vector(x, F.x_dim)
    lam = as_vector(lam, F.lambda_dim)
    if F(x, lam) == INF:
        raise EvalInfinite(f"f({x.tolist()}, {lam.tolist()}) = +inf")
    if F.subdiff_x is not None:
        return F.subdiff_x(x, lam)
    if F.tag in SMOOTH_TAGS:
        return Subdifferential.point(central_difference(lambda z: F(z, lam), x))
    raise NoSubdiffOracle(f"{F.name or 'function'} has no subdifferential oracle")


def _name(f) -> str:
    return f.name if f.name is not None else "f"


def build_tilt_shift(F, xbar, vbar) -> ParametrizedOracle:
    """g(x, lam) = f(x - xbar, lam) - <vbar, x - xbar>."""
    F = as_parametrized(F)
    xbar = as_vector(xbar, F.x_dim)
    vbar = as_vector(vbar, F.x_dim)

    def fn(X, L):
        D = np.asarray(X, dtype=float) - xbar
        return F.fn(D, L) - D @ vbar

    def sub(x, lam):
        return eval_subdifferential_x(F, x - xbar, lam).shifted(-vbar)

    return ParametrizedOracle(
        fn=fn, x_dim=F.x_dim, lambda_dim=F.lambda_dim,
        x_domain=F.x_domain.shifted(xbar), lambda_domain=F.lambda_domain,
        subdiff_x=sub, tag=F.tag,
        name=f"tilt({_name(F)},{xbar.tolist()},{vbar.tolist()})",
    )


def recenter(F, xbar, vbar) -> ParametrizedOracle:
    """g(x, lam) = f(x + xbar, lam) - <vbar, x>, moving (xbar, vbar) to (0, 0)."""
    F = as_parametrized(F)
    xbar = as_vector(xbar, F.x_dim)
    vbar = as_vector(vbar, F.x_dim)

    def fn(X, L):
        X = np.asarray(X, dtype=float)
        return F.fn(X + xbar, L) - X @ vbar

    def sub(x, lam):
        return eval_subdifferential_x(F, x + xbar, lam).shifted(-vbar)

    return ParametrizedOracle(
        fn=fn, x_dim=F.x_dim, lambda_dim=F.lambda_dim,
        x_domain=F.x_domain.shifted(-xbar), lambda_domain=F.lambda_domain,
        subdiff_x=sub, tag=F.tag,
        name=f"recenter({_name(F)},{xbar.tolist()},{vbar.tolist()})",
    )


def build_arg_shift(f: FunctionOracle, lambda_domain: Optional[Box] = None) -> ParametrizedOracle:
    """f(x - lam) with lam in R^n."""
    n = f.dim

    def fn(X, L):
        return f.fn(np.asarray(X, dtype=float) - np.asarray(L, dtype=float))

    def sub(x, lam):
        return eval_subdifferential(f, x - lam)

    return ParametrizedOracle(
        fn=fn, x_dim=n, lambda_dim=n, x_domain=f.domain,
        lambda_domain=lambda_domain if lambda_domain is not None else Box.cube(-1.0, 1.0, n),
        subdiff_x=sub, tag=f.tag, name=f"argshift({_name(f)})",
    )


def build_arg_scale(f: FunctionOracle, lambda_domain: Optional[Box] = None) -> ParametrizedOracle:
    """f(lam * x) with scalar lam; subgradients lam * w, w in the subdifferential of f at lam * x."""

    def fn(X, L):
        return f.fn(np.asarray(L, dtype=float) * np.asarray(X, dtype=float))

    def sub(x, lam):
        return eval_subdifferential(f, lam[0] * x).map_vectors(lam[0])

    return ParametrizedOracle(
        fn=fn, x_dim=f.dim, lambda_dim=1, x_domain=f.domain,
        lambda_domain=lambda_domain if lambda_domain is not None else Box.cube(0.0, 2.0, 1),
        subdiff_x=sub, tag=f.tag, name=f"argscale({_name(f)})",
    )


def _common_dim(fs) -> int:
    if len(fs) == 0:
        raise EmptyList("need at least one function")
    n = fs[0].dim
    if any(f.dim != n for f in fs):
        raise DimensionMismatch("functions differ in dimension")
    return n


def _intersect_domains(fs) -> Box:
    lo = np.max([f.domain.lower for f in fs], axis=0)
    hi = np.min([f.domain.upper for f in fs], axis=0)
    return Box(lo, np.maximum(lo, hi))


def build_weighted_sum(fs: Sequence[FunctionOracle], lambda_domain: Optional[Box] = None) -> ParametrizedOracle:
    """sum_i lam_i f_i(x); subgradients by Minkowski sum of lam_i * (subdifferential of f_i)."""
    fs = list(fs)
    n = _common_dim(fs)
    m = len(fs)

    def fn(X, L):
        X = np.asarray(X, dtype=float)
        L = np.asarray(L, dtype=float)
        total = 0.0
        for i, f in enumerate(fs):
            total = total + ext_mul(L[..., i], f.fn(X))
        return total

    def sub(x, lam):
        acc = None
        for i, f in enumerate(fs):
            if lam[i] == 0.0:
                part = Subdifferential.point(np.zeros(n))
            else:
                part = eval_subdifferential(f, x).of_multiple(lam[i])
            acc = part if acc is None else acc + part
        return acc

    tags = {f.tag for f in fs}
    tag = "C2" if tags == {"C2"} else ("C1" if tags <= set(SMOOTH_TAGS) else "lsc")
    return ParametrizedOracle(
        fn=fn, x_dim=n, lambda_dim=m, x_domain=_intersect_domains(fs),
        lambda_domain=lambda_domain if lambda_domain is not None else Box.cube(0.0, 2.0, m),
        subdiff_x=sub, tag=tag,
        name="wsum(" + ",".join(_name(f) for f in fs) + ")",
    )


def build_weighted_max(fs: Sequence[FunctionOracle], lambda_domain: Optional[Box] = None) -> ParametrizedOracle:
    """max_i lam_i f_i(x) for real-valued C1 atoms.

    Index i is active when lam_i f_i(x) >= f(x, lam) - 1e-9 (1 + |f(x, lam)|);
    the subdifferential is the convex hull of lam_i grad f_i(x) over active i.
    """
    fs = list(fs)
    n = _common_dim(fs)
    m = len(fs)
    for f in fs:
        if f.tag not in SMOOTH_TAGS:
            raise NotC1Tagged(f"{_name(f)} is tagged {f.tag!r}; weighted max needs C1 atoms")

    def terms(X, L):
        X = np.asarray(X, dtype=float)
        L = np.asarray(L, dtype=float)
        vals = [f.fn(X) for f in fs]
        if any(np.any(np.isinf(v)) for v in vals):
            raise NotFiniteValued("weighted max atoms must be finite")
        return np.stack([L[..., i] * np.asarray(v, dtype=float) for i, v in enumerate(vals)], axis=-1)

    def fn(X, L):
        return terms(X, L).max(axis=-1)

    def sub(x, lam):
        t = terms(x, lam)
        top = t.max()
        active = np.nonzero(t >= top - 1e-9 * (1.0 + abs(top)))[0]
        gens = [lam[i] * eval_subdifferential(fs[i], x).generators[0] for i in active]
        return Subdifferential.hull(np.vstack(gens))

    return ParametrizedOracle(
        fn=fn, x_dim=n, lambda_dim=m, x_domain=_intersect_domains(fs),
        lambda_domain=lambda_domain if lambda_domain is not None else Box.cube(0.0, 2.0, m),
        subdiff_x=sub, tag="lsc",
        name="wmax(" + ",".join(_name(f) for f in fs) + ")",
    )


def fix_parameter(F: ParametrizedOracle, lam) -> FunctionOracle:
    return F.at(lam)
