"""Explicit (eps, r) rules for sums, scalings, maxima and amenable compositions.

The formulas are deliberately conservative; nothing here tries to tighten
them.  Constants for amenable compositions are estimated from samples and
inflated by 10 % unless the sampled quantity is constant over the box, in
which case the sample already is the supremum.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import DegenerateBox, DimensionMismatch, EmptyList, NonpositiveLambda, NotC1Tagged
from .model import SMOOTH_TAGS, Box, FunctionOracle, Subdifferential, as_vector, eval_subdifferential

INFLATION = 1.1


@dataclass(frozen=True)
class PRParams:
    eps: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "r", float(self.r))
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.r >= 0:
            raise ValueError("r must be nonnegative")

    def to_dict(self) -> dict:
        return {"eps": float(self.eps), "r": float(self.r)}


def _positive(lams, m: Optional[int] = None) -> np.ndarray:
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if m is not None and lams.shape[0] != m:
        raise DimensionMismatch(f"expected {m} weights, got {lams.shape[0]}")
    if np.any(lams <= 0):
        raise NonpositiveLambda("all weights must be positive")
    return lams


def _nonempty(ps) -> list:
    ps = list(ps)
    if not ps:
        raise EmptyList("need at least one PRParams")
    return ps


def scalar_mult_params(p: PRParams, lam: float) -> PRParams:
    """lam * f for fixed lam > 0: (min(eps, lam eps), lam r)."""
    lam = float(_positive(lam)[0])
    return PRParams(min(p.eps, lam * p.eps), lam * p.r)


def scalar_mult_para_params(p: PRParams, lambar: float) -> PRParams:
    """(x, lam) -> lam f(x) near lambar > 0.

    Uses the constants of the argument rather than the shorter statement:
    eps = min(delta, eps, delta eps) with delta = lambar / 2, r = 3 lambar r / 2.
    """
    lambar = float(_positive(lambar)[0])
    delta = 0.5 * lambar
    return PRParams(min(delta, p.eps, delta * p.eps), 1.5 * lambar * p.r)


def sum_params(ps: Sequence[PRParams]) -> PRParams:
    ps = _nonempty(ps)
    return PRParams(min(p.eps for p in ps), len(ps) * max(p.r for p in ps))


def weighted_sum_params(ps: Sequence[PRParams], lams) -> PRParams:
    ps = _nonempty(ps)
    lams = _positive(lams, len(ps))
    eps = min(min(p.eps, lam * p.eps) for p, lam in zip(ps, lams))
    return PRParams(eps, len(ps) * max(lam * p.r for p, lam in zip(ps, lams)))


def para_sum_params(ps: Sequence[PRParams], lambar) -> PRParams:
    ps = _nonempty(ps)
    lams = _positive(lambar, len(ps))
    eps = min(min(0.5 * lam, p.eps, 0.5 * lam * p.eps) for p, lam in zip(ps, lams))
    return PRParams(eps, len(ps) * max(1.5 * lam * p.r for p, lam in zip(ps, lams)))


def para_max_params(ps: Sequence[PRParams], lambar, fs: Optional[Sequence[FunctionOracle]] = None) -> PRParams:
    """max_i lam_i f_i near lambar; no factor m in r.  ``fs`` enables the C1 tag check."""
    ps = _nonempty(ps)
    lams = _positive(lambar, len(ps))
    if fs is not None:
        for f in fs:
            if f.tag not in SMOOTH_TAGS:
                raise NotC1Tagged(f"{f.name or 'function'} is tagged {f.tag!r}")
    eps = min(min(p.eps, 0.5 * lam * p.eps) for p, lam in zip(ps, lams))
    return PRParams(eps, max(1.5 * lam * p.r for p, lam in zip(ps, lams)))


# ---------------------------------------------------------------------------
# amenable compositions g(F(x))

@dataclass(frozen=True, eq=False)
class VectorMap:
    """C2 map F : R^n -> R^m with Jacobian (m, n) and component Hessians (m, n, n)."""

    F: Callable
    J: Callable
    H: Callable
    n: int
    m: int
    name: str = "F"

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.F(as_vector(x, self.n)), dtype=float).reshape(self.m)


def diagonal_map(m: int) -> VectorMap:
    """x in R -> (x, ..., x) in R^m."""
    return VectorMap(
        F=lambda x: np.repeat(x, m),
        J=lambda x: np.ones((m, 1)),
        H=lambda x: np.zeros((m, 1, 1)),
        n=1, m=m, name=f"diag{m}",
    )


def identity_map(n: int = 1) -> VectorMap:
    return VectorMap(F=lambda x: x.copy(), J=lambda x: np.eye(n), H=lambda x: np.zeros((n, n, n)),
                     n=n, m=n, name="identity")


def square_pair_map() -> VectorMap:
    """x in R -> (x, x^2)."""
    return VectorMap(
        F=lambda x: np.array([x[0], x[0] ** 2]),
        J=lambda x: np.array([[1.0], [2.0 * x[0]]]),
        H=lambda x: np.array([[[0.0]], [[2.0]]]),
        n=1, m=2, name="square_pair",
    )


@dataclass(frozen=True, eq=False)
class AmenableConstants:
    r1: float
    r2: float
    k: float
    rbar: float
    x_box: Optional[Box] = None
    y_box: Optional[Box] = None
    raw: Optional[dict] = None    # sampled maxima before inflation

    def __post_init__(self):
        if min(self.r1, self.r2, self.k, self.rbar) < 0:
            raise ValueError("amenable constants must be nonnegative")

    def to_dict(self) -> dict:
        d = {"r1": self.r1, "r2": self.r2, "k": self.k, "rbar": self.rbar}
        if self.x_box is not None:
            d["x_box"] = self.x_box.to_list()
        if self.y_box is not None:
            d["y_box"] = self.y_box.to_list()
        return d


def _inflate(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    top = float(values.max()) if values.size else 0.0
    if values.size == 0 or top - float(values.min()) <= 1e-12 * (1.0 + abs(top)):
        return max(top, 0.0)
    return max(INFLATION * top, 0.0)


def _box_samples(box: Box, points: int, n_lowdisc: int, seed: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, points) for lo, hi in zip(box.lower, box.upper)]
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, box.n)
    sob = qmc.Sobol(d=box.n, scramble=True, seed=seed).random(n_lowdisc)
    return np.unique(np.vstack([lattice, box.lower + sob * box.width]), axis=0)


def _corners(box: Box) -> np.ndarray:
    return np.array(list(itertools.product(*zip(box.lower, box.upper))), dtype=float)


def estimate_amenable_constants(Fmap: VectorMap, y_box: Box, x_box: Box, rs: Sequence, points: int = 9,
                                n_lowdisc: int = 32, seed: int = 0) -> AmenableConstants:
    """Sampled r1, r2, k over ``x_box`` and rbar = max r_i.

    Both r1 and r2 are linear in y (resp. eta) inside a convex function, so
    their maxima over the boxes sit at box corners; only x is sampled.
    """
    rs = _nonempty(rs)
    if x_box.n != Fmap.n or y_box.n != Fmap.m:
        raise DimensionMismatch("box dimensions do not match the map")
    if np.any(x_box.width <= 0):
        raise DegenerateBox("x_box must have positive width on every axis")
    rbar = max(float(p.r if isinstance(p, PRParams) else p) for p in rs)
    X = _box_samples(x_box, points, n_lowdisc, seed)
    Fs = np.array([Fmap(x) for x in X])
    Js = np.array([np.asarray(Fmap.J(x), dtype=float).reshape(Fmap.m, Fmap.n) for x in X])
    Hs = np.array([np.asarray(Fmap.H(x), dtype=float).reshape(Fmap.m, Fmap.n, Fmap.n) for x in X])
    Y = _corners(y_box)
    eta_box = Box(y_box.lower - y_box.upper, y_box.upper - y_box.lower)
    E = _corners(eta_box)

    i, j = np.triu_indices(X.shape[0], k=1)
    dx = np.linalg.norm(X[i] - X[j], axis=1)
    k_q = np.linalg.norm(Fs[i] - Fs[j], axis=1) / dx
    dJ = Js[i] - Js[j]                                    # (P, m, n)
    r1_q = np.linalg.norm(np.einsum("pmn,cm->pcn", dJ, Y), axis=-1).max(axis=1) / dx
    HE = np.einsum("xmab,cm->xcab", Hs, E)                # Hessians of <eta, F> at corners
    r2_q = np.linalg.eigvalsh(HE)[..., -1].max(axis=1)

    raw = {"r1": float(r1_q.max()), "r2": float(r2_q.max()), "k": float(k_q.max())}
    return AmenableConstants(_inflate(r1_q), _inflate(r2_q), _inflate(k_q), rbar, x_box, y_box, raw)


def amenable_params(c: AmenableConstants, eps: float) -> PRParams:
    """(eps, r1 + r2 + rbar k^2); eps must come from the caller (see module docs)."""
    return PRParams(float(eps), c.r1 + c.r2 + c.rbar * c.k ** 2)


def compose_separable(fs: Sequence[FunctionOracle], Fmap: VectorMap, domain: Optional[Box] = None,
                      name: Optional[str] = None) -> FunctionOracle:
    """x -> sum_i f_i(F_i(x)) for 1-D atoms f_i, subgradients J(x)^T (v_1, ..., v_m)."""
    fs = list(fs)
    if len(fs) != Fmap.m:
        raise DimensionMismatch("need one atom per component of the map")
    if any(f.dim != 1 for f in fs):
        raise DimensionMismatch("separable composition expects 1-D atoms")

    def fn(X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, Fmap.n)
        Y = np.array([Fmap(x) for x in flat]).reshape(X.shape[:-1] + (Fmap.m,))
        total = 0.0
        for i, f in enumerate(fs):
            total = total + f.fn(Y[..., i:i + 1])
        return total

    def sub(x):
        y = Fmap(x)
        J = np.asarray(Fmap.J(x), dtype=float).reshape(Fmap.m, Fmap.n)
        parts = [eval_subdifferential(f, y[i:i + 1]) for i, f in enumerate(fs)]
        groups = []
        for combo in itertools.product(*[p.groups for p in parts]):
            pts = np.array([np.concatenate(v) for v in itertools.product(*combo)])
            groups.append(np.unique(pts @ J, axis=0))
        return Subdifferential(tuple(groups))

    dom = domain if domain is not None else Box.cube(-10.0, 10.0, Fmap.n)
    return FunctionOracle(fn, Fmap.n, dom, "lsc", subdiff=sub,
                          name=name or f"compose({','.join(f.name or 'f' for f in fs)};{Fmap.name})")
