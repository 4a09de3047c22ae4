"""Feed parameters from the calculus rules back into direct certification on random compositions."""
import argparse

import numpy as np

from proxkit import catalog as C
from proxkit.calculus import (
    PRParams,
    amenable_params,
    compose_separable,
    diagonal_map,
    estimate_amenable_constants,
    para_max_params,
    para_sum_params,
)
from proxkit.certify import ParaProxCertificate, SamplerConfig, check_para_prox_regular
from proxkit.model import Box, as_parametrized, build_weighted_max, build_weighted_sum, eval_subdifferential_x

SUM_ATOMS = ("abs", "quad", "abs_minus_quad", "double_well", "neg_quad", "huberizable")
MAX_ATOMS = ("quad", "huberizable", "double_well", "neg_quad", "line", "neg_line")


def draw(rng, pool, m):
    names = list(rng.choice(pool, m))
    return names, [PRParams(rng.uniform(0.3, 1.0), C.get(n).global_r) for n in names]


def cases(rng, n):
    for k in range(n):
        m = 1 + (k // 3) % 3
        kind = ("para_sum", "para_max", "amenable")[k % 3]
        if kind == "para_sum":
            names, ps = draw(rng, SUM_ATOMS, m)
            lam = rng.uniform(0.5, 2.0, m)
            yield kind, names, build_weighted_sum([C.oracle(i) for i in names]), lam, para_sum_params(ps, lam)
        elif kind == "para_max":
            names, ps = draw(rng, MAX_ATOMS, m)
            fs = [C.oracle(i) for i in names]
            lam = rng.uniform(0.5, 2.0, m)
            yield kind, names, build_weighted_max(fs), lam, para_max_params(ps, lam, fs)
        else:
            names, ps = draw(rng, SUM_ATOMS, m + 1)
            c = estimate_amenable_constants(diagonal_map(m + 1), Box.cube(-1, 1, m + 1), Box.cube(-2, 2, 1), ps)
            g = compose_separable([C.oracle(i) for i in names], diagonal_map(m + 1))
            yield kind, names, as_parametrized(g), np.zeros(0), amenable_params(c, min(p.eps for p in ps))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    sampler = SamplerConfig(n_lowdisc=32, lambda_points=3, seed=args.seed)
    passed = 0
    for kind, names, F, lam, params in cases(rng, args.n):
        x = rng.uniform(-1, 1, 1)
        v = eval_subdifferential_x(F, x, lam).generators[0]
        rep = check_para_prox_regular(F, ParaProxCertificate(x, lam, v, params.eps, params.r), sampler)
        passed += rep.passed
        print(f"{kind:9s} {','.join(names):40s} eps={params.eps:.3f} r={params.r:8.3f} -> {rep.verdict}")
    print(f"{passed}/{args.n} passed")


if __name__ == "__main__":
    main()
