"""Sample-based checks of (para-)prox-regularity and its monotone characterization.

A check never proves anything: it samples an f-attentive localization around
the base point, tests the defining inequality on every sample and reports
either a violation (with a replayable witness) or the worst margin seen.

Tolerances
    direct inequality   1e-8 (1 + |f(x, lam)| + |f(x', lam)|)
    monotone inequality 2e-8 (1 + |f(x0, lam)| + |f(x1, lam)|)
The monotone slack is twice the direct one because the monotone inequality
is the sum of two direct ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import EvalInfinite, InvalidCertificate, OutsideDomain
from .model import (
    INF,
    FunctionOracle,
    ParametrizedOracle,
    _checked,
    as_parametrized,
    as_vector,
    eval_subdifferential_x,
)

DIRECT_SLACK = 1e-8
MONOTONE_SLACK = 2e-8
_BLOCK = 2_000_000


@dataclass(frozen=True)
class SamplerConfig:
    """Where the localization is sampled.

    x: an open lattice of ``points`` per axis over the eps-box, ``n_lowdisc``
    scrambled Sobol points and, per axis, the geometric points
    xbar +- eps 2**-k for k = 1..``geometric`` (these catch violations that
    only appear at distances of order 1/r).  lam: an open lattice of
    ``lambda_points`` per axis (default 11 for m = 1, 5 otherwise).
    """

    points: int = 11
    lambda_points: Optional[int] = None
    n_lowdisc: int = 256
    geometric: int = 24
    hull_points: int = 9
    seed: int = 0
    min_tuples: int = 8

    def lambda_count(self, m: int) -> int:
        if self.lambda_points is not None:
            return self.lambda_points
        return 11 if m == 1 else 5


@dataclass(frozen=True, eq=False)
class ParaProxCertificate:
    xbar: np.ndarray
    lambdabar: np.ndarray
    vbar: np.ndarray
    eps: float
    r: float

    def __post_init__(self):
        for name in ("xbar", "lambdabar", "vbar"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        if not self.eps > 0:
            raise InvalidCertificate("eps must be positive")
        if not self.r >= 0:
            raise InvalidCertificate("r must be nonnegative")

    def with_params(self, eps: float, r: float) -> "ParaProxCertificate":
        return ParaProxCertificate(self.xbar, self.lambdabar, self.vbar, eps, r)

    def to_dict(self) -> dict:
        return {"xbar": self.xbar.tolist(), "lambdabar": self.lambdabar.tolist(),
                "vbar": self.vbar.tolist(), "eps": float(self.eps), "r": float(self.r)}


def ProxCertificate(xbar, vbar, eps: float, r: float) -> ParaProxCertificate:
    """Certificate for a function without parameters."""
    return ParaProxCertificate(xbar, np.zeros(0), vbar, eps, r)


@dataclass(frozen=True, eq=False)
class SampleTuple:
    x: np.ndarray
    v: np.ndarray
    fval: float
    lam: np.ndarray

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "v": self.v.tolist(), "fval": float(self.fval), "lambda": self.lam.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SampleTuple":
        return cls(np.asarray(d["x"], float), np.asarray(d["v"], float), float(d["fval"]),
                   np.asarray(d["lambda"], float))


@dataclass(frozen=True, eq=False)
class ViolationWitness:
    """A sampled instance of the inequality that fails by more than the slack.

    ``kind`` is "direct" (x_prime against tuple), "monotone" (partner tuple
    against tuple) or "subgradient" (x_prime against the base point).
    """

    kind: str
    x_prime: np.ndarray
    tuple: SampleTuple
    lhs: float
    rhs: float
    margin: float
    r: float
    partner: Optional[SampleTuple] = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "x_prime": self.x_prime.tolist(), "tuple": self.tuple.to_dict(),
             "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin, "r": self.r}
        if self.partner is not None:
            d["partner"] = self.partner.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ViolationWitness":
        partner = d.get("partner")
        return cls(d["kind"], np.asarray(d["x_prime"], float), SampleTuple.from_dict(d["tuple"]),
                   float(d["lhs"]), float(d["rhs"]), float(d["margin"]), float(d["r"]),
                   None if partner is None else SampleTuple.from_dict(partner))


@dataclass(frozen=True, eq=False)
class CheckReport:
    verdict: str
    tuples_checked: int
    worst_margin: float
    witness: Optional[ViolationWitness] = None
    kind: str = "direct"
    cert: Optional[ParaProxCertificate] = None
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        wm = self.worst_margin
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "tuples_checked": self.tuples_checked,
            "worst_margin": wm if np.isfinite(wm) else None,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "certificate": None if self.cert is None else self.cert.to_dict(),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class NotFound:
    """No (eps, r) pair on the search grids produced a pass."""

    eps_grid: tuple
    r_grid: tuple

    def __bool__(self):
        return False


# ---------------------------------------------------------------------------
# sampling

def _open_lattice(count: int) -> np.ndarray:
    """``count`` points strictly inside (-1, 1); includes 0 when count is odd."""
    return np.linspace(-1.0, 1.0, count + 2)[1:-1]


def _box_lattice(center: np.ndarray, eps: float, count: int) -> np.ndarray:
    k = center.shape[0]
    if k == 0:
        return np.zeros((1, 0))
    axes = [_open_lattice(count) * eps] * k
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, k)
    return center + mesh


def sample_x(xbar: np.ndarray, eps: float, sampler: SamplerConfig) -> np.ndarray:
    n = xbar.shape[0]
    parts = [_box_lattice(xbar, eps, sampler.points)]
    if sampler.n_lowdisc > 0:
        sob = qmc.Sobol(d=n, scramble=True, seed=sampler.seed).random(sampler.n_lowdisc)
        parts.append(xbar + (2.0 * sob - 1.0) * eps)
    if sampler.geometric > 0:
        steps = eps * 2.0 ** -np.arange(1, sampler.geometric + 1)
        for i in range(n):
            for sgn in (1.0, -1.0):
                P = np.repeat(xbar[None, :], steps.size, axis=0)
                P[:, i] += sgn * steps
                parts.append(P)
    X = np.unique(np.vstack(parts), axis=0)
    return X[np.linalg.norm(X - xbar, axis=1) < eps]


def sample_lambda(lambdabar: np.ndarray, eps: float, sampler: SamplerConfig, domain=None) -> np.ndarray:
    """Parameter lattice within eps of lambdabar, clipped to ``domain`` when given."""
    L = _box_lattice(lambdabar, eps, sampler.lambda_count(lambdabar.shape[0]))
    L = L[np.linalg.norm(L - lambdabar, axis=1) < eps]
    if domain is not None and domain.n > 0:
        L = L[[domain.contains(lam) for lam in L]]
    return L


# ---------------------------------------------------------------------------
# localization

def _value_matrix(F: ParametrizedOracle, X: np.ndarray, L: np.ndarray) -> np.ndarray:
    """f(x_i, lam_j) as a (len(L), len(X)) matrix."""
    K, N = L.shape[0], X.shape[0]
    Xb = np.broadcast_to(X[None, :, :], (K, N, X.shape[1]))
    Lb = np.broadcast_to(L[:, None, :], (K, N, L.shape[1]))
    vals = np.broadcast_to(F.fn(Xb, Lb), (K, N))
    return _checked(vals, F.name or "function").astype(float).copy()


def _gradient_matrix(F: ParametrizedOracle, X, L) -> np.ndarray:
    K, N = L.shape[0], X.shape[0]
    Xb = np.broadcast_to(X[None, :, :], (K, N, X.shape[1]))
    Lb = np.broadcast_to(L[:, None, :], (K, N, L.shape[1]))
    return np.asarray(F.grad_x(Xb, Lb), dtype=float).reshape(K, N, X.shape[1])


@dataclass(eq=False)
class Localization:
    """Sampled f-attentive localization plus the comparison points x'.

    Tuples are stored column-wise: tuple t sits at x = X[ix[t]],
    lam = L[il[t]] with subgradient V[t] and value fvals[t].
    """

    X: np.ndarray
    L: np.ndarray
    ix: np.ndarray
    il: np.ndarray
    V: np.ndarray
    fvals: np.ndarray
    values: Optional[np.ndarray] = None  # f(X, L) matrix of the oracle it was collected from
    seed: Optional[int] = None

    def __len__(self) -> int:
        return int(self.ix.shape[0])

    @property
    def tuples(self) -> list:
        return [self.tuple_at(t) for t in range(len(self))]

    def tuple_at(self, t: int) -> SampleTuple:
        return SampleTuple(self.X[self.ix[t]].copy(), self.V[t].copy(), float(self.fvals[t]), self.L[self.il[t]].copy())

    def mirrored(self, xbar, vbar) -> "Localization":
        """The same samples seen by recenter(f, xbar, vbar): x -> x - xbar, v -> v - vbar."""
        xbar = np.asarray(xbar, dtype=float)
        vbar = np.asarray(vbar, dtype=float)
        Xg = self.X - xbar
        return Localization(
            X=Xg, L=self.L, ix=self.ix, il=self.il, V=self.V - vbar,
            fvals=self.fvals - Xg[self.ix] @ vbar, values=None, seed=self.seed,
        )


def _validate(F: ParametrizedOracle, cert: ParaProxCertificate):
    try:
        as_vector(cert.xbar, F.x_dim)
        as_vector(cert.vbar, F.x_dim)
        as_vector(cert.lambdabar, F.lambda_dim)
    except ValueError as exc:
        raise InvalidCertificate(str(exc)) from None
    try:
        sub = eval_subdifferential_x(F, cert.xbar, cert.lambdabar)
    except EvalInfinite as exc:
        raise InvalidCertificate(f"base point outside the effective domain: {exc}") from None
    if not sub.contains(cert.vbar, tol=1e-9):
        raise InvalidCertificate(f"vbar = {cert.vbar.tolist()} is not a subgradient at the base point ({sub})")


def collect_localization(f, cert: ParaProxCertificate, sampler: SamplerConfig = SamplerConfig()) -> Localization:
    """All sampled (x, v, f(x, lam), lam) inside the f-attentive eps-localization."""
    F = as_parametrized(f)
    _validate(F, cert)
    eps = cert.eps
    X = sample_x(cert.xbar, eps, sampler)
    L = sample_lambda(cert.lambdabar, eps, sampler, F.lambda_domain)
    fbar = F(cert.xbar, cert.lambdabar)
    vals = _value_matrix(F, X, L)
    near = np.isfinite(vals) & (np.abs(vals - fbar) < eps)
    grads = _gradient_matrix(F, X, L) if F.grad_x is not None and np.any(near) else None
    ix, il, V, fv = [], [], [], []
    for j, i in zip(*np.nonzero(near)):
        if grads is not None:
            cand = grads[j, i][None, :]
        else:
            try:
                cand = eval_subdifferential_x(F, X[i], L[j]).sample(sampler.hull_points)
            except (EvalInfinite, OutsideDomain):
                continue
        keep = np.linalg.norm(cand - cert.vbar, axis=1) < eps
        for v in cand[keep]:
            ix.append(i)
            il.append(j)
            V.append(v)
            fv.append(vals[j, i])
    n = F.x_dim
    return Localization(
        X=X, L=L, ix=np.asarray(ix, dtype=int), il=np.asarray(il, dtype=int),
        V=np.asarray(V, dtype=float).reshape(-1, n), fvals=np.asarray(fv, dtype=float),
        values=vals, seed=sampler.seed,
    )


# ---------------------------------------------------------------------------
# checks on a fixed localization

def _values_for(F: ParametrizedOracle, loc: Localization) -> np.ndarray:
    if loc.values is None:
        loc.values = _value_matrix(F, loc.X, loc.L)
    return loc.values


def _verdict(violated: bool, count: int, sampler: SamplerConfig) -> str:
    if violated:
        return "fail"
    return "pass" if count >= sampler.min_tuples else "inconclusive"


def direct_check(F: ParametrizedOracle, loc: Localization, cert: ParaProxCertificate,
                 sampler: SamplerConfig = SamplerConfig()) -> CheckReport:
    """f(x', lam) >= fval + <v, x' - x> - r/2 |x' - x|^2 for every tuple and every x'."""
    r = cert.r
    vals = _values_for(F, loc)
    inside = np.linalg.norm(loc.X - cert.xbar, axis=1) < cert.eps
    Xp = loc.X[inside]
    T = len(loc)
    worst, worst_idx = INF, None
    viol, viol_idx = INF, None
    step = max(1, _BLOCK // max(1, Xp.shape[0]))
    for s in range(0, T, step):
        sl = slice(s, min(T, s + step))
        x0 = loc.X[loc.ix[sl]]
        D = Xp[None, :, :] - x0[:, None, :]
        fp = vals[loc.il[sl]][:, inside]
        f0 = loc.fvals[sl][:, None]
        with np.errstate(invalid="ignore"):
            rhs = f0 + np.einsum("tn,tkn->tk", loc.V[sl], D) - 0.5 * r * (D ** 2).sum(-1)
            margin = np.where(np.isfinite(fp), fp - rhs, INF)
        tol = DIRECT_SLACK * (1.0 + np.abs(f0) + np.where(np.isfinite(fp), np.abs(fp), 0.0))
        k = np.unravel_index(np.argmin(margin), margin.shape)
        if margin[k] < worst:
            worst, worst_idx = float(margin[k]), (s + k[0], k[1])
        bad = np.where(margin < -tol, margin, INF)
        k = np.unravel_index(np.argmin(bad), bad.shape)
        if bad[k] < viol:
            viol, viol_idx = float(bad[k]), (s + k[0], k[1])
    witness = None
    if viol_idx is not None:
        t, kp = viol_idx
        tup = loc.tuple_at(t)
        xp = Xp[kp]
        lhs = float(vals[loc.il[t]][inside][kp])
        rhs = tup.fval + float(tup.v @ (xp - tup.x)) - 0.5 * r * float((xp - tup.x) @ (xp - tup.x))
        witness = ViolationWitness("direct", xp.copy(), tup, lhs, rhs, lhs - rhs, r)
    return CheckReport(_verdict(witness is not None, T, sampler), T, worst, witness, "direct", cert, loc.seed)


def monotone_check(F: ParametrizedOracle, loc: Localization, cert: ParaProxCertificate,
                   sampler: SamplerConfig = SamplerConfig()) -> CheckReport:
    """<v1 - v0, x1 - x0> >= -r |x1 - x0|^2 over tuple pairs sharing lam."""
    r = cert.r
    T = len(loc)
    worst, viol = INF, INF
    viol_pair = None
    for j in np.unique(loc.il):
        idx = np.nonzero(loc.il == j)[0]
        Xj, Vj, Fj = loc.X[loc.ix[idx]], loc.V[idx], loc.fvals[idx]
        step = max(1, _BLOCK // max(1, idx.size))
        for s in range(0, idx.size, step):
            sl = slice(s, s + step)
            DX = Xj[None, :, :] - Xj[sl, None, :]
            DV = Vj[None, :, :] - Vj[sl, None, :]
            margin = (DX * DV).sum(-1) + r * (DX ** 2).sum(-1)
            tol = MONOTONE_SLACK * (1.0 + np.abs(Fj[sl, None]) + np.abs(Fj[None, :]))
            k = np.unravel_index(np.argmin(margin), margin.shape)
            worst = min(worst, float(margin[k]))
            bad = np.where(margin < -tol, margin, INF)
            k = np.unravel_index(np.argmin(bad), bad.shape)
            if bad[k] < viol:
                viol, viol_pair = float(bad[k]), (idx[s + k[0]], idx[k[1]])
    witness = None
    if viol_pair is not None:
        a, b = (loc.tuple_at(t) for t in viol_pair)
        lhs = float((b.v - a.v) @ (b.x - a.x))
        rhs = -r * float((b.x - a.x) @ (b.x - a.x))
        witness = ViolationWitness("monotone", b.x.copy(), a, lhs, rhs, lhs - rhs, r, partner=b)
    return CheckReport(_verdict(witness is not None, T, sampler), T, worst, witness, "monotone", cert, loc.seed)


# ---------------------------------------------------------------------------
# public checks

def check_para_prox_regular(f, cert: ParaProxCertificate, sampler: SamplerConfig = SamplerConfig(),
                            localization: Optional[Localization] = None) -> CheckReport:
    """Quadratic-minorant inequality over the sampled localization.

    Pass ``localization`` to reuse (or mirror) a previously collected sample set.
    """
    F = as_parametrized(f)
    loc = localization if localization is not None else collect_localization(F, cert, sampler)
    return direct_check(F, loc, cert, sampler)


def check_prox_regular(f: FunctionOracle, cert: ParaProxCertificate,
                       sampler: SamplerConfig = SamplerConfig()) -> CheckReport:
    """Parameter-free version; the strict variant is checked in its non-strict form."""
    return check_para_prox_regular(as_parametrized(f), cert, sampler)


def check_monotone_localization(f, cert: ParaProxCertificate, sampler: SamplerConfig = SamplerConfig(),
                                localization: Optional[Localization] = None) -> CheckReport:
    F = as_parametrized(f)
    loc = localization if localization is not None else collect_localization(F, cert, sampler)
    return monotone_check(F, loc, cert, sampler)


def check_proximal_subgradient(f, xbar, lambdabar, vbar, eps: float, r: float,
                               sampler: SamplerConfig = SamplerConfig()) -> CheckReport:
    """f(x, lam) >= f(xbar, lambdabar) + <vbar, x - xbar> - r/2 |x - xbar|^2 near (xbar, lambdabar)."""
    F = as_parametrized(f)
    cert = ParaProxCertificate(xbar, lambdabar, vbar, eps, r)
    _validate(F, cert)
    X = sample_x(cert.xbar, eps, sampler)
    L = sample_lambda(cert.lambdabar, eps, sampler, F.lambda_domain)
    vals = _value_matrix(F, X, L)
    fbar = F(cert.xbar, cert.lambdabar)
    D = X - cert.xbar
    rhs = fbar + D @ cert.vbar - 0.5 * r * (D ** 2).sum(-1)
    with np.errstate(invalid="ignore"):
        margin = np.where(np.isfinite(vals), vals - rhs[None, :], INF)
    tol = DIRECT_SLACK * (1.0 + abs(fbar) + np.where(np.isfinite(vals), np.abs(vals), 0.0))
    count = int(vals.size)
    worst = float(margin.min()) if margin.size else INF
    bad = np.where(margin < -tol, margin, INF)
    witness = None
    if bad.size and np.isfinite(bad.min()):
        j, i = np.unravel_index(np.argmin(bad), bad.shape)
        base = SampleTuple(cert.xbar.copy(), cert.vbar.copy(), fbar, L[j].copy())
        witness = ViolationWitness("subgradient", X[i].copy(), base, float(vals[j, i]), float(rhs[i]),
                                   float(vals[j, i] - rhs[i]), r)
    return CheckReport(_verdict(witness is not None, count, sampler), count, worst, witness,
                       "subgradient", cert, sampler.seed)


def replay_witness(f, witness: ViolationWitness) -> float:
    """Recompute the margin of a witness from scratch (one scalar evaluation)."""
    F = as_parametrized(f)
    t, r = witness.tuple, witness.r
    if witness.kind == "monotone":
        b = witness.partner
        d = b.x - t.x
        return float((b.v - t.v) @ d + r * (d @ d))
    xp = witness.x_prime
    d = xp - t.x
    lhs = F(xp, t.lam)
    return float(lhs - (t.fval + t.v @ d - 0.5 * r * (d @ d)))


def search_certificate(f, xbar, lambdabar, vbar, sampler: SamplerConfig = SamplerConfig(),
                       eps_grid: Sequence[float] = (1.0, 0.5, 0.25, 0.125, 0.0625),
                       r_grid: Sequence[float] = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e3, 1e4)):
    """Largest eps (then smallest r) for which the direct and monotone checks both pass."""
    F = as_parametrized(f)
    eps_grid = sorted(set(float(e) for e in eps_grid), reverse=True)
    r_grid = sorted(set(float(r) for r in r_grid))
    for eps in eps_grid:
        base = ParaProxCertificate(xbar, lambdabar, vbar, eps, 0.0)
        loc = collect_localization(F, base, sampler)
        for r in r_grid:
            cert = base.with_params(eps, r)
            if direct_check(F, loc, cert, sampler).passed and monotone_check(F, loc, cert, sampler).passed:
                return cert
    return NotFound(tuple(eps_grid), tuple(r_grid))


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    direct: CheckReport
    monotone: CheckReport
    implication_holds: bool     # direct pass => monotone pass (exact on shared samples)
    converse_evidence: str      # "consistent", "sample-limited" or "inconsistent"
    notes: tuple = field(default_factory=tuple)


def cross_validate_equivalence(f, cert: ParaProxCertificate,
                               sampler: SamplerConfig = SamplerConfig()) -> EquivalenceReport:
    """Run both characterizations on one tuple set and compare.

    Only "direct pass implies monotone pass" is exact on samples; a monotone
    pass alongside a direct fail is evidence about sampling, not a
    contradiction.
    """
    F = as_parametrized(f)
    loc = collect_localization(F, cert, sampler)
    d = direct_check(F, loc, cert, sampler)
    m = monotone_check(F, loc, cert, sampler)
    implication = not (d.passed and m.verdict == "fail")
    notes = []
    if d.verdict == m.verdict:
        converse = "consistent"
    elif m.verdict != "fail" and d.verdict == "fail":
        converse = "sample-limited"
        notes.append("monotone check did not fail while the direct check did; the converse needs the full localization")
    else:
        converse = "inconsistent" if not implication else "sample-limited"
    return EquivalenceReport(d, m, implication, converse, tuple(notes))


@dataclass(frozen=True)
class ResolventEvidence:
    pairs_compared: int
    max_x_gap: float
    consistent: bool


def resolvent_evidence(f, cert: ParaProxCertificate, sampler: SamplerConfig = SamplerConfig(),
                       delta_z: float = 1e-6, x_tol: Optional[float] = None) -> ResolventEvidence:
    """Evidence that (subdifferential + r I)^{-1} is single-valued, per fixed lam.

    Tuples whose z = v + r x agree within ``delta_z`` must have x agreeing
    within ``x_tol`` (default: the lattice spacing).
    """
    F = as_parametrized(f)
    loc = collect_localization(F, cert, sampler)
    if x_tol is None:
        x_tol = 2.0 * cert.eps / (sampler.points + 1)
    pairs, gap = 0, 0.0
    for j in np.unique(loc.il):
        idx = np.nonzero(loc.il == j)[0]
        Xj = loc.X[loc.ix[idx]]
        Z = loc.V[idx] + cert.r * Xj
        dz = np.linalg.norm(Z[:, None, :] - Z[None, :, :], axis=-1)
        close = np.triu(dz <= delta_z, k=1)
        if np.any(close):
            dx = np.linalg.norm(Xj[:, None, :] - Xj[None, :, :], axis=-1)[close]
            pairs += int(close.sum())
            gap = max(gap, float(dx.max()))
    return ResolventEvidence(pairs, gap, gap <= x_tol)
