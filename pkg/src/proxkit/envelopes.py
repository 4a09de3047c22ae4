"""Grid-based conjugates, Moreau envelopes, prox maps and proximal averages.

Every infimum/supremum is a discrete reduction over the nodes of a ``Grid``.
When the optimum sits on the boundary of the window the result is flagged,
because the true optimum may lie outside it.  Grids with more than three axes
are not supported: the node count grows as ``points ** n``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    ImproperOnGrid,
    NotConvexTagged,
    OutsideDomain,
    ThresholdViolated,
)
from .model import INF, Box, FunctionOracle, ParametrizedOracle, Subdifferential, as_vector

MAX_GRID_DIM = 3
_CHUNK = 2_000_000  # max entries of a (queries x nodes) block
_GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


@dataclass(frozen=True, eq=False)
class Grid:
    box: Box
    points_per_axis: int

    def __post_init__(self):
        if self.points_per_axis < 3:
            raise ValueError("points_per_axis must be at least 3")
        if self.box.n > MAX_GRID_DIM:
            raise DimensionMismatch(f"grids are limited to n <= {MAX_GRID_DIM}")
        if np.any(self.box.width <= 0):
            raise ValueError("grid box must have positive width on every axis")

    @classmethod
    def interval(cls, lo: float, hi: float, points: int) -> "Grid":
        return cls(Box.cube(lo, hi, 1), points)

    @property
    def n(self) -> int:
        return self.box.n

    @property
    def spacing(self) -> np.ndarray:
        return self.box.width / (self.points_per_axis - 1)

    @cached_property
    def axes(self) -> list:
        return [np.linspace(lo, hi, self.points_per_axis) for lo, hi in zip(self.box.lower, self.box.upper)]

    @cached_property
    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    @cached_property
    def boundary(self) -> np.ndarray:
        idx = np.stack(np.meshgrid(*[np.arange(self.points_per_axis)] * self.n, indexing="ij"), -1).reshape(-1, self.n)
        return np.any((idx == 0) | (idx == self.points_per_axis - 1), axis=1)

    @property
    def signature(self) -> tuple:
        return (tuple(self.box.lower), tuple(self.box.upper), self.points_per_axis)

    @property
    def center(self) -> np.ndarray:
        return self.box.center

    def expanded(self, factor: int) -> "Grid":
        """Same spacing and centre, box ``factor`` times wider."""
        return Grid(self.box.scaled(factor), factor * (self.points_per_axis - 1) + 1)

    def rescaled(self, factor: float) -> "Grid":
        """Same node count, box ``factor`` times wider."""
        return Grid(self.box.scaled(factor), self.points_per_axis)


@dataclass(frozen=True, eq=False)
class EnvelopeResult:
    value: float
    argmin_set: np.ndarray
    boundary_attained: bool = False

    @property
    def finite(self) -> bool:
        return np.isfinite(self.value)


@dataclass(frozen=True, eq=False)
class ConjugateResult:
    value: float
    argmax_set: np.ndarray
    unbounded: bool = False


@dataclass(frozen=True)
class NotProxBoundedBelow:
    """No tested r in (0, r_max] produced a trustworthy finite envelope."""

    r_max: float


def _require_inside(f: FunctionOracle, grid: Grid):
    if grid.n != f.dim:
        raise DimensionMismatch("grid and function dimensions differ")
    if not f.domain.contains_box(grid.box):
        raise OutsideDomain(f"grid {grid.box} leaves the sampling window {f.domain}")


def _grid_values(f: FunctionOracle, grid: Grid) -> np.ndarray:
    _require_inside(f, grid)
    vals = f.values(grid.nodes)
    if not np.any(np.isfinite(vals)):
        raise ImproperOnGrid(f"{f.name or 'function'} is +inf on every grid node")
    return vals


def _tol(v) -> np.ndarray:
    return 1e-9 * (1.0 + np.abs(v))


def _reduce_min(vals: np.ndarray, nodes: np.ndarray, r: float, X: np.ndarray):
    """min over finite nodes y of vals(y) + r/2 |y - x|^2 for every row x of X."""
    X = np.asarray(X, dtype=float).reshape(-1, nodes.shape[1])
    keep = np.isfinite(vals)
    v, Y = vals[keep], nodes[keep]
    idx_map = np.nonzero(keep)[0]
    out = np.empty(X.shape[0])
    arg = np.empty(X.shape[0], dtype=int)
    step = max(1, _CHUNK // max(1, Y.shape[0]))
    for s in range(0, X.shape[0], step):
        xs = X[s:s + step]
        d2 = ((xs[:, None, :] - Y[None, :, :]) ** 2).sum(-1)
        obj = v[None, :] + 0.5 * r * d2
        k = obj.argmin(axis=1)
        out[s:s + step] = obj[np.arange(xs.shape[0]), k]
        arg[s:s + step] = idx_map[k]
    return out, arg


def _reduce_max_linear(vals: np.ndarray, nodes: np.ndarray, Yq: np.ndarray):
    """max over finite nodes x of <x, y> - vals(x) for every row y of Yq."""
    keep = np.isfinite(vals)
    v, X = vals[keep], nodes[keep]
    idx_map = np.nonzero(keep)[0]
    out = np.empty(Yq.shape[0])
    arg = np.empty(Yq.shape[0], dtype=int)
    step = max(1, _CHUNK // max(1, X.shape[0]))
    for s in range(0, Yq.shape[0], step):
        obj = Yq[s:s + step] @ X.T - v[None, :]
        k = obj.argmax(axis=1)
        out[s:s + step] = obj[np.arange(obj.shape[0]), k]
        arg[s:s + step] = idx_map[k]
    return out, arg


def fenchel_conjugate_report(f: FunctionOracle, grid: Grid, y) -> ConjugateResult:
    vals = _grid_values(f, grid)
    y = as_vector(y, f.dim)
    keep = np.isfinite(vals)
    obj = np.full(vals.shape, -INF)
    obj[keep] = grid.nodes[keep] @ y - vals[keep]
    best = obj.max()
    hits = np.nonzero(obj >= best - _tol(best))[0]
    return ConjugateResult(float(best), grid.nodes[hits], bool(np.all(grid.boundary[hits])))


def fenchel_conjugate(f: FunctionOracle, grid: Grid, y) -> float:
    """sup over grid nodes x of <x, y> - f(x).

    Use ``fenchel_conjugate_report`` to learn whether the supremum was
    attained only on the window boundary (a sign that f*(y) = +inf).
    """
    return fenchel_conjugate_report(f, grid, y).value


def moreau_envelope(f: FunctionOracle, r: float, x, grid: Grid) -> EnvelopeResult:
    """e_r f(x) = min over grid nodes y of f(y) + r/2 |y - x|^2."""
    if not r > 0:
        raise ValueError("r must be positive")
    vals = _grid_values(f, grid)
    x = as_vector(x, f.dim)
    keep = np.isfinite(vals)
    obj = np.full(vals.shape, INF)
    obj[keep] = vals[keep] + 0.5 * r * ((grid.nodes[keep] - x) ** 2).sum(-1)
    best = obj.min()
    hits = np.nonzero(obj <= best + _tol(best))[0]
    return EnvelopeResult(float(best), grid.nodes[hits], bool(np.all(grid.boundary[hits])))


def prox_map(f: FunctionOracle, r: float, x, grid: Grid) -> np.ndarray:
    """All grid minimizers of f(y) + r/2 |y - x|^2 (rows of the returned array)."""
    return moreau_envelope(f, r, x, grid).argmin_set


def nearest_to(points: np.ndarray, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return points[np.argmin(((points - x) ** 2).sum(-1))]


def _bounded_at(f: FunctionOracle, grids: Sequence[Grid], r: float) -> bool:
    for g in grids:
        res = moreau_envelope(f, r, g.center, g)
        if not res.finite or res.boundary_attained:
            return False
    return True


def prox_bound_threshold(f: FunctionOracle, grid: Grid, r_max: float, steps: int = 30,
                         window_scales: Sequence[float] = (1, 2, 4, 8, 16)
                         ) -> Union[float, NotProxBoundedBelow]:
    """Upper estimate of the prox-boundedness threshold of f.

    r is accepted when e_r f at the grid centre is finite and not attained on
    the boundary for every window in ``grid`` scaled by ``window_scales``
    (windows leaving the sampling domain are skipped).  The sweep runs over
    r_max * 2**-k and returns the smallest r accepted before the first
    rejection.
    """
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    grids = [grid.rescaled(s) for s in window_scales if f.domain.contains_box(grid.box.scaled(s))]
    if not grids:
        grids = [grid]
    best: Optional[float] = None
    for k in range(steps + 1):
        r = r_max * 2.0 ** (-k)
        if not _bounded_at(f, grids, r):
            break
        best = r
    return NotProxBoundedBelow(r_max) if best is None else best


# ---------------------------------------------------------------------------
# proximal averages

def _is_convex(f: FunctionOracle) -> bool:
    return f.tag == "convex" or getattr(f, "convex", False)


def _dual_grid(phis: Sequence[np.ndarray], grid: Grid, points: int) -> Grid:
    """Bounding box of difference quotients of the phis, padded by 10% per side."""
    lo = np.full(grid.n, INF)
    hi = np.full(grid.n, -INF)
    P = grid.points_per_axis
    for phi in phis:
        a = phi.reshape((P,) * grid.n)
        for ax in range(grid.n):
            with np.errstate(invalid="ignore"):
                d = np.diff(a, axis=ax) / grid.spacing[ax]
            d = d[np.isfinite(d)]
            if d.size:
                lo[ax] = min(lo[ax], d.min())
                hi[ax] = max(hi[ax], d.max())
    lo = np.where(np.isfinite(lo), lo, -1.0)
    hi = np.where(np.isfinite(hi), hi, 1.0)
    pad = 0.1 * np.maximum(hi - lo, 1e-3)
    return Grid(Box(lo - pad, hi + pad), points)


def pa_convex_table(f0: FunctionOracle, f1: FunctionOracle, lam: float, grid: Grid,
                    X=None, dual_points: Optional[int] = None, expand: int = 3) -> np.ndarray:
    """Conjugate-formula proximal average at the rows of X (grid nodes by default).

    The primal suprema run over a window ``expand`` times wider than ``grid``
    (same spacing) so that values near the edge of ``grid`` are not distorted
    by truncating the conjugates.
    """
    if not (_is_convex(f0) and _is_convex(f1)):
        raise NotConvexTagged("pa_convex needs convex-tagged inputs")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    E = grid.expanded(expand)
    nodes = E.nodes
    half = 0.5 * (nodes ** 2).sum(-1)
    phi0 = _grid_values(f0, E) + half
    phi1 = _grid_values(f1, E) + half
    # a dual grid finer than the primal one keeps the outer conjugate (piecewise
    # linear in x) from producing visible concave facets after subtracting q
    default = 4 * (E.points_per_axis - 1) + 1 if grid.n == 1 else E.points_per_axis
    dual = _dual_grid([phi0, phi1], E, dual_points or default)
    c0, _ = _reduce_max_linear(phi0, nodes, dual.nodes)
    c1, _ = _reduce_max_linear(phi1, nodes, dual.nodes)
    psi = (1.0 - lam) * c0 + lam * c1
    X = grid.nodes if X is None else np.asarray(X, dtype=float).reshape(-1, grid.n)
    outer, _ = _reduce_max_linear(psi, dual.nodes, X)
    return outer - 0.5 * (X ** 2).sum(-1)


def pa_convex(f0: FunctionOracle, f1: FunctionOracle, lam: float, x, grid: Grid) -> float:
    """((1-lam)(f0 + q)* + lam (f1 + q)*)*(x) - q(x), q = |.|^2 / 2."""
    x = as_vector(x, grid.n)
    return float(pa_convex_table(f0, f1, lam, grid, X=x[None, :])[0])


class EnvelopeCache:
    """Thread-safe store of envelope tables keyed by (name, r, grid signature)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._data: dict = {}

    def get_or_compute(self, key, compute):
        if key[0] is None:
            return compute()
        with self._lock:
            if key in self._data:
                return self._data[key]
        value = compute()
        with self._lock:
            return self._data.setdefault(key, value)

    def clear(self):
        with self._lock:
            self._data.clear()

    def __len__(self):
        return len(self._data)


ENVELOPE_CACHE = EnvelopeCache()


def envelope_table(f: FunctionOracle, r: float, grid: Grid):
    """(values, argmin node index) of e_r f at every node of ``grid``, cached."""
    def compute():
        vals = _grid_values(f, grid)
        return _reduce_min(vals, grid.nodes, r, grid.nodes)
    return ENVELOPE_CACHE.get_or_compute((f.name, float(r), grid.signature), compute)


def _nested_envelope(inner0, inner1, lam, s, E: Grid, X):
    g = -(1.0 - lam) * inner0 - lam * inner1
    vals, arg = _reduce_min(g, E.nodes, s, X)
    return -vals, arg


def pa_convex_env_table(f0, f1, lam, grid: Grid, X=None, expand: int = 3) -> np.ndarray:
    """-e_1(-(1-lam) e_1 f0 - lam e_1 f1)(x), minimizing over a window ``expand`` times wider."""
    if not (_is_convex(f0) and _is_convex(f1)):
        raise NotConvexTagged("pa_convex_env needs convex-tagged inputs")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    E = grid.expanded(expand)
    e0, _ = envelope_table(f0, 1.0, E)
    e1, _ = envelope_table(f1, 1.0, E)
    X = grid.nodes if X is None else np.asarray(X, dtype=float).reshape(-1, grid.n)
    return _nested_envelope(e0, e1, lam, 1.0, E, X)[0]


def pa_convex_env(f0, f1, lam: float, x, grid: Grid) -> float:
    x = as_vector(x, grid.n)
    return float(pa_convex_env_table(f0, f1, lam, grid, X=x[None, :])[0])


def check_nc_threshold(f: FunctionOracle, r: float, grid: Grid):
    est = prox_bound_threshold(f, grid, r_max=0.999 * r)
    if isinstance(est, NotProxBoundedBelow):
        raise ThresholdViolated(f"r = {r} does not exceed the prox-boundedness threshold of {f.name}")
    return est


def nc_pa_table(f0, f1, r: float, lam: float, grid: Grid, X=None, expand: int = 3,
                check_threshold: bool = True) -> np.ndarray:
    if not 0.0 < lam < 1.0:
        raise ValueError("NC proximal average needs lambda in (0, 1)")
    if not r > 0:
        raise ValueError("r must be positive")
    if check_threshold:
        check_nc_threshold(f0, r, grid)
        check_nc_threshold(f1, r, grid)
    E = grid.expanded(expand)
    e0, _ = envelope_table(f0, r, E)
    e1, _ = envelope_table(f1, r, E)
    X = grid.nodes if X is None else np.asarray(X, dtype=float).reshape(-1, grid.n)
    return _nested_envelope(e0, e1, lam, r + lam * (1.0 - lam), E, X)[0]


def nc_pa(f0, f1, r: float, lam: float, x, grid: Grid) -> float:
    """PA_r(x, lam) = -e_{r + lam(1-lam)}(-(1-lam) e_r f0 - lam e_r f1)(x)."""
    x = as_vector(x, grid.n)
    return float(nc_pa_table(f0, f1, r, lam, grid, X=x[None, :])[0])


def nc_pa_lambda_lipschitz(f0, f1, r: float, grid: Grid, lambdas: Sequence[float], X=None) -> float:
    """max over nodes and consecutive lambdas of |PA_r(x, l2) - PA_r(x, l1)| / (l2 - l1)."""
    lambdas = np.sort(np.asarray(lambdas, dtype=float))
    tabs = [nc_pa_table(f0, f1, r, lam, grid, X=X, check_threshold=(i == 0)) for i, lam in enumerate(lambdas)]
    T = np.array(tabs)
    return float(np.max(np.abs(np.diff(T, axis=0)) / np.diff(lambdas)[:, None]))


# ---------------------------------------------------------------------------
# 1-D refinement: golden section inside one grid cell, then a parabolic step

def _refine_1d(obj, y0: np.ndarray, h: float, iters: int = 60):
    """Minimize a vectorized scalar objective near y0 (one grid cell each side)."""
    y0 = np.asarray(y0, dtype=float)
    a, b = y0 - h, y0 + h
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = obj(c), obj(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - _GOLDEN * (b - a)
        new_d = a + _GOLDEN * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_next = np.where(left, obj(new_c), fd)
        fd_next = np.where(left, fc, obj(new_d))
        c, d, fc, fd = c_next, d_next, fc_next, fd_next
    y = 0.5 * (a + b)
    fy = obj(y)
    # parabolic polish; accepted only when it lowers the objective
    delta = 1e-5 * max(h, 1e-12)
    fp, fm = obj(y + delta), obj(y - delta)
    curv = fp - 2.0 * fy + fm
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(curv > 0, -0.5 * delta * (fp - fm) / curv, 0.0)
    step = np.clip(np.nan_to_num(step), -delta, delta)
    y2 = y + step
    f2 = obj(y2)
    better = f2 < fy
    y = np.where(better, y2, y)
    fy = np.where(better, f2, fy)
    f0 = obj(y0)
    keep0 = f0 <= fy
    return np.where(keep0, y0, y), np.where(keep0, f0, fy)


def _as_1d_fn(f: FunctionOracle):
    return lambda y: np.asarray(f.fn(np.asarray(y, dtype=float)[..., None]), dtype=float)


def refined_envelope_1d(f: FunctionOracle, r: float, X, grid: Grid):
    """e_r f and a prox point at arbitrary 1-D points, refined below grid spacing.

    Ties on the grid are broken towards the node nearest to x.
    """
    X = np.asarray(X, dtype=float).reshape(-1)
    vals = _grid_values(f, grid)
    nodes = grid.nodes[:, 0]
    fn = _as_1d_fn(f)
    keep = np.isfinite(vals)
    obj = vals[keep][None, :] + 0.5 * r * (nodes[keep][None, :] - X[:, None]) ** 2
    best = obj.min(axis=1, keepdims=True)
    ties = obj <= best + _tol(best)
    dist = np.where(ties, np.abs(nodes[keep][None, :] - X[:, None]), INF)
    y0 = nodes[keep][dist.argmin(axis=1)]
    h = float(grid.spacing[0])
    lo, hi = grid.box.lower[0], grid.box.upper[0]

    def objective(y):
        yc = np.clip(y, lo, hi)
        return fn(yc) + 0.5 * r * (yc - X) ** 2 + np.where(yc != y, INF, 0.0)

    y, fy = _refine_1d(objective, y0, h)
    return fy, y


def lipschitz_mix_prox(f0: FunctionOracle, f1: FunctionOracle, r: float, lam: float, grid: Grid,
                       samples=None) -> float:
    """Largest difference quotient of g = lam P_r f0 + (1-lam) P_r f1 - I over sample pairs.

    Prox points are searched over the whole grid; ``samples`` (default: the
    grid nodes) are where g is evaluated.  In 1-D the prox points are refined
    below the grid spacing so that the quotient is not dominated by rounding
    to nodes.
    """
    X = grid.nodes if samples is None else np.asarray(samples, dtype=float).reshape(-1, grid.n)
    if grid.n == 1:
        p0 = refined_envelope_1d(f0, r, X[:, 0], grid)[1][:, None]
        p1 = refined_envelope_1d(f1, r, X[:, 0], grid)[1][:, None]
    else:
        p0 = np.array([nearest_to(prox_map(f0, r, x, grid), x) for x in X])
        p1 = np.array([nearest_to(prox_map(f1, r, x, grid), x) for x in X])
    g = lam * p0 + (1.0 - lam) * p1 - X
    best = 0.0
    for i in range(X.shape[0] - 1):
        dx = np.linalg.norm(X[i + 1:] - X[i], axis=1)
        dg = np.linalg.norm(g[i + 1:] - g[i], axis=1)
        ok = dx > 0
        if np.any(ok):
            best = max(best, float(np.max(dg[ok] / dx[ok])))
    return best


class NCProximalAverage:
    """NC proximal average of two 1-D functions as a parametrized oracle.

    Values come from the nested-envelope formula with both minimizations
    refined below grid spacing; the x-gradient is s (y* - x) with
    s = r + lam (1 - lam) and y* the outer minimizer.
    """

    def __init__(self, f0: FunctionOracle, f1: FunctionOracle, r: float, grid: Grid, expand: int = 3):
        if grid.n != 1:
            raise DimensionMismatch("NCProximalAverage supports 1-D grids only")
        check_nc_threshold(f0, r, grid)
        check_nc_threshold(f1, r, grid)
        self.f0, self.f1, self.r, self.grid = f0, f1, r, grid
        self.E = grid.expanded(expand)
        self._z = self.E.nodes[:, 0]
        self._h = float(self.E.spacing[0])
        self._tables = [envelope_table(f, r, self.E) for f in (f0, f1)]
        self._fns = [_as_1d_fn(f0), _as_1d_fn(f1)]
        self._memo: dict = {}

    def _inner(self, i: int, Y: np.ndarray) -> np.ndarray:
        """Refined e_r f_i at arbitrary points Y (inside the expanded window)."""
        _, arg = self._tables[i]
        fn = self._fns[i]
        z, h, r = self._z, self._h, self.r
        j = np.clip(np.floor((Y - z[0]) / h).astype(int), 0, z.size - 2)
        best = np.full(Y.shape, INF)
        for cand in (arg[j], arg[j + 1]):
            z0 = z[cand]

            def objective(t, Y=Y):
                tc = np.clip(t, z[0], z[-1])
                return fn(tc) + 0.5 * r * (tc - Y) ** 2 + np.where(tc != t, INF, 0.0)

            _, val = _refine_1d(objective, z0, h, iters=50)
            best = np.minimum(best, val)
        return best

    def evaluate(self, X, L):
        """Values and x-gradients at paired points X (k,) and scalar parameters L (k,)."""
        X = np.asarray(X, dtype=float).reshape(-1)
        L = np.ascontiguousarray(np.broadcast_to(np.asarray(L, dtype=float).reshape(-1), X.shape))
        key = (X.tobytes(), L.tobytes())
        if key in self._memo:
            return self._memo[key]
        out = self._evaluate(X, L)
        if len(self._memo) >= 8:
            self._memo.pop(next(iter(self._memo)))
        self._memo[key] = out
        return out

    def _evaluate(self, X, L):
        s = self.r + L * (1.0 - L)
        (e0, _), (e1, _) = self._tables
        z = self._z
        k = X.size
        y0 = np.empty(k)
        step = max(1, _CHUNK // z.size)
        for a in range(0, k, step):
            sl = slice(a, a + step)
            g = -(1.0 - L[sl, None]) * e0[None, :] - L[sl, None] * e1[None, :]
            obj = g + 0.5 * s[sl, None] * (z[None, :] - X[sl, None]) ** 2
            y0[sl] = z[obj.argmin(axis=1)]

        def objective(y):
            yc = np.clip(y, z[0], z[-1])
            g = -(1.0 - L) * self._inner(0, yc) - L * self._inner(1, yc)
            return g + 0.5 * s * (yc - X) ** 2 + np.where(yc != y, INF, 0.0)

        y, val = _refine_1d(objective, y0, self._h, iters=50)
        return -val, s * (y - X)

    def oracle(self, name: Optional[str] = None) -> ParametrizedOracle:
        def fn(X, L):
            X = np.asarray(X, dtype=float)
            L = np.asarray(L, dtype=float)
            shape = np.broadcast_shapes(X.shape[:-1], L.shape[:-1])
            Xb = np.broadcast_to(X[..., 0], shape).reshape(-1)
            Lb = np.broadcast_to(L[..., 0], shape).reshape(-1)
            return self.evaluate(Xb, Lb)[0].reshape(shape)

        def sub(x, lam):
            _, g = self.evaluate(np.asarray(x, dtype=float), np.asarray(lam, dtype=float))
            return Subdifferential.point(g)

        def grad(X, L):
            X = np.asarray(X, dtype=float)
            L = np.asarray(L, dtype=float)
            shape = np.broadcast_shapes(X.shape[:-1], L.shape[:-1])
            Xb = np.broadcast_to(X[..., 0], shape).reshape(-1)
            Lb = np.broadcast_to(L[..., 0], shape).reshape(-1)
            return self.evaluate(Xb, Lb)[1].reshape(shape + (1,))

        return ParametrizedOracle(
            fn=fn, x_dim=1, lambda_dim=1, x_domain=self.grid.box, lambda_domain=Box.cube(0.0, 1.0, 1),
            subdiff_x=sub, tag="C1", grad_x=grad,
            name=name or f"nc_pa({self.f0.name},{self.f1.name},r={self.r})",
        )
