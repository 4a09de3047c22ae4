"""Piecewise-polynomial 1-D functions described by a small JSON format.

    {
      "name": "kinked",                  optional
      "breakpoints": [-1.0, 0.0],        strictly increasing
      "pieces": [[0, -1], [0, 0, 0.5], "inf"],
      "domain": [-10, 10],               optional sampling window
      "tag": "lsc"                       optional smoothness tag
    }

``pieces`` has one more entry than ``breakpoints``.  Each entry is either a
list of coefficients in ascending powers of x or the string ``"inf"``.
At a breakpoint where the function is continuous the subgradients are the
one-sided derivatives (a convex hull when left <= right, two separate limiting
gradients otherwise).  At a jump the value is the smaller one-sided limit.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .errors import SpecParseError
from .model import INF, TAGS, Box, FunctionOracle, Subdifferential

NORMAL_CONE_CAP = 10.0
DEFAULT_DOMAIN = (-100.0, 100.0)


class PiecewisePolynomial:
    def __init__(self, breakpoints, pieces):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.pieces = [None if p is None else np.asarray(p, dtype=float) for p in pieces]
        self.derivs = [None if p is None else np.polynomial.polynomial.polyder(p) if p.size > 1 else np.zeros(1)
                       for p in self.pieces]
        self._bp_values = np.array([self._kink_value(i) for i in range(len(self.breakpoints))])

    def _piece_value(self, i, x):
        p = self.pieces[i]
        if p is None:
            return np.full(np.shape(x), INF)
        return np.polynomial.polynomial.polyval(x, p)

    def _piece_deriv(self, i, x) -> float:
        return float(np.polynomial.polynomial.polyval(x, self.derivs[i]))

    def _one_sided(self, i):
        b = self.breakpoints[i]
        return float(self._piece_value(i, b)), float(self._piece_value(i + 1, b))

    def _kink_value(self, i) -> float:
        left, right = self._one_sided(i)
        return min(left, right)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="left")
        out = np.empty(x.shape)
        for i in range(len(self.pieces)):
            mask = idx == i
            if np.any(mask):
                out[mask] = self._piece_value(i, x[mask])
        if self.breakpoints.size:
            at = np.isin(x, self.breakpoints)
            if np.any(at):
                pos = np.searchsorted(self.breakpoints, x[at])
                out[at] = self._bp_values[pos]
        return out

    def subdifferential(self, x: float) -> Subdifferential:
        hits = np.nonzero(self.breakpoints == x)[0]
        if hits.size == 0:
            i = int(np.searchsorted(self.breakpoints, x, side="left"))
            return Subdifferential.point([self._piece_deriv(i, x)])
        i = int(hits[0])
        left, right = self._one_sided(i)
        scale = 1e-12 * (1.0 + abs(left if np.isfinite(left) else right))
        if np.isfinite(left) and np.isfinite(right) and abs(left - right) <= scale:
            dl, dr = self._piece_deriv(i, x), self._piece_deriv(i + 1, x)
            if dl <= dr:
                return Subdifferential.hull([[dl], [dr]])
            return Subdifferential.separate([[dl], [dr]])
        if not np.isfinite(left):
            dr = self._piece_deriv(i + 1, x)
            return Subdifferential.hull([[dr - NORMAL_CONE_CAP], [dr]])
        if not np.isfinite(right):
            dl = self._piece_deriv(i, x)
            return Subdifferential.hull([[dl], [dl + NORMAL_CONE_CAP]])
        # finite jump: only the lower side is seen by f-attentive limits
        side = i if left < right else i + 1
        return Subdifferential.point([self._piece_deriv(side, x)])


def _fail(msg: str):
    raise SpecParseError(msg)


def _number_list(value, field: str):
    if not isinstance(value, list) or not value:
        _fail(f"field {field!r}: expected a non-empty list of numbers")
    for j, c in enumerate(value):
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            _fail(f"field '{field}[{j}]': expected a number, got {c!r}")
    return [float(c) for c in value]


def function_from_spec(spec: dict) -> FunctionOracle:
    if not isinstance(spec, dict):
        _fail("top level: expected a JSON object")
    unknown = set(spec) - {"name", "breakpoints", "pieces", "domain", "tag"}
    if unknown:
        _fail(f"unknown field(s): {sorted(unknown)}")
    if "pieces" not in spec:
        _fail("missing field 'pieces'")
    bps = spec.get("breakpoints", [])
    if bps:
        bps = _number_list(bps, "breakpoints")
    if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
        _fail("field 'breakpoints': must be strictly increasing")
    raw = spec["pieces"]
    if not isinstance(raw, list):
        _fail("field 'pieces': expected a list")
    if len(raw) != len(bps) + 1:
        _fail(f"field 'pieces': expected {len(bps) + 1} pieces for {len(bps)} breakpoints, got {len(raw)}")
    pieces = []
    for i, p in enumerate(raw):
        if p == "inf":
            pieces.append(None)
        else:
            pieces.append(_number_list(p, f"pieces[{i}]"))
    if all(p is None for p in pieces):
        _fail("field 'pieces': function is +inf everywhere (not proper)")
    dom = spec.get("domain", list(DEFAULT_DOMAIN))
    dom = _number_list(dom, "domain")
    if len(dom) != 2 or dom[0] >= dom[1]:
        _fail("field 'domain': expected [lower, upper] with lower < upper")
    tag = spec.get("tag", "lsc")
    if tag not in TAGS:
        _fail(f"field 'tag': expected one of {list(TAGS)}, got {tag!r}")
    name = spec.get("name", "piecewise")
    if not isinstance(name, str):
        _fail("field 'name': expected a string")

    pp = PiecewisePolynomial(bps, pieces)
    return FunctionOracle(
        fn=lambda X: pp(np.asarray(X, dtype=float)[..., 0]),
        dim=1,
        domain=Box.cube(dom[0], dom[1], 1),
        tag=tag,
        subdiff=lambda x: pp.subdifferential(float(x[0])),
        name=name,
    )


def parse_function_spec(text: str) -> FunctionOracle:
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return function_from_spec(spec)


def load_function_spec(path: Union[str, Path]) -> FunctionOracle:
    text = Path(path).read_text(encoding="utf-8")
    return parse_function_spec(text)
