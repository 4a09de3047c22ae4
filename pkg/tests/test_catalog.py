import numpy as np
import pytest

from proxkit import catalog as C
from proxkit.model import ParametrizedOracle, eval_subdifferential, eval_subdifferential_x


@pytest.mark.parametrize("entry_id", sorted(C.CATALOG))
def test_entries_build_and_evaluate(entry_id):
    e = C.get(entry_id)
    F = e.oracle
    if isinstance(F, ParametrizedOracle):
        lam = e.lambda_region.center
        assert np.isfinite(F([0.5], lam))
        assert eval_subdifferential_x(F, [0.5], lam).dim == 1
    else:
        assert np.isfinite(F([0.5]))
        assert eval_subdifferential(F, [0.5]).dim == 1


@pytest.mark.parametrize("entry_id", [i for i, e in C.CATALOG.items() if not e.parametrized and e.oracle.tag in ("C1", "C2")])
def test_smooth_gradients_match_differences(entry_id):
    f = C.oracle(entry_id)
    for x in (-1.3, 0.2, 0.7):
        g = eval_subdifferential(f, [x]).generators[0, 0]
        h = 1e-6
        assert g == pytest.approx((f([x + h]) - f([x - h])) / (2 * h), abs=1e-5)


def test_unknown_id():
    with pytest.raises(KeyError):
        C.get("nope")


def test_global_r_minorant_on_random_pairs():
    rng = np.random.default_rng(0)
    for e in C.CATALOG.values():
        if e.parametrized or e.global_r is None:
            continue
        f = e.oracle
        xs = rng.uniform(-0.99, 0.99, 40)
        for x in xs:
            for v in eval_subdifferential(f, [x]).generators[:, 0]:
                xp = rng.uniform(-0.99, 0.99, 40)
                lhs = f.values(xp[:, None])
                rhs = f([x]) + v * (xp - x) - 0.5 * e.global_r * (xp - x) ** 2
                assert np.all(lhs >= rhs - 1e-9), e.id
