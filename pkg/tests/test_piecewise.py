import json

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from proxkit.errors import SpecParseError
from proxkit.model import eval_subdifferential
from proxkit.piecewise import function_from_spec, load_function_spec, parse_function_spec

ABS = {"name": "abs", "breakpoints": [0.0], "pieces": [[0, -1], [0, 1]], "tag": "convex"}


def test_abs_spec_matches_abs():
    f = function_from_spec(ABS)
    xs = np.linspace(-3, 3, 13)
    assert np.allclose(f.values(xs[:, None]), np.abs(xs))
    assert eval_subdifferential(f, [0.0]).generator_set() == {(-1.0,), (1.0,)}
    assert eval_subdifferential(f, [0.0]).is_convex


def test_concave_kink_gives_separate_gradients():
    f = function_from_spec({"breakpoints": [0.0], "pieces": [[0, 1], [0, -1]]})
    s = eval_subdifferential(f, [0.0])
    assert not s.is_convex and s.generator_set() == {(-1.0,), (1.0,)}


def test_infinite_piece_and_jump():
    f = function_from_spec({"breakpoints": [-1.0, 1.0], "pieces": ["inf", [0], "inf"]})
    assert f([2.0]) == np.inf and f([1.0]) == 0.0
    assert eval_subdifferential(f, [1.0]).generator_set() == {(0.0,), (10.0,)}
    g = function_from_spec({"breakpoints": [0.0], "pieces": [[1], [0, 2]]})
    assert g([0.0]) == 0.0  # lower one-sided limit
    assert eval_subdifferential(g, [0.0]).generator_set() == {(2.0,)}


@given(st.floats(-5, 5))
def test_quadratic_piece_gradient(x):
    f = function_from_spec({"breakpoints": [], "pieces": [[1, 2, 3]]})
    assert f([x]) == pytest.approx(1 + 2 * x + 3 * x * x)
    assert eval_subdifferential(f, [x]).generators[0, 0] == pytest.approx(2 + 6 * x)


@pytest.mark.parametrize("spec, fragment", [
    ({"breakpoints": [0.0]}, "missing field 'pieces'"),
    ({"breakpoints": [1.0, 0.0], "pieces": [[0], [0], [0]]}, "strictly increasing"),
    ({"breakpoints": [0.0], "pieces": [[0]]}, "expected 2 pieces"),
    ({"breakpoints": [0.0], "pieces": [[0], ["a"]]}, "pieces[1][0]"),
    ({"pieces": ["inf"]}, "not proper"),
    ({"pieces": [[0]], "tag": "smooth"}, "field 'tag'"),
    ({"pieces": [[0]], "colour": 1}, "unknown field"),
    ({"pieces": [[0]], "domain": [1, 0]}, "field 'domain'"),
])
def test_spec_diagnostics(spec, fragment):
    with pytest.raises(SpecParseError) as err:
        function_from_spec(spec)
    assert fragment in str(err.value)


def test_json_syntax_error_reports_position():
    with pytest.raises(SpecParseError) as err:
        parse_function_spec('{\n  "pieces": [[0],\n}')
    assert "line 3" in str(err.value)


def test_load_from_file(tmp_path):
    p = tmp_path / "abs.json"
    p.write_text(json.dumps(ABS), encoding="utf-8")
    f = load_function_spec(p)
    assert f.name == "abs" and f([-2.0]) == 2.0
