"""Reproduce the worked examples: lam|x| certificates, negative controls and envelope values."""
import argparse

import numpy as np

from proxkit import catalog as C
from proxkit.certify import NotFound, ParaProxCertificate, SamplerConfig, check_para_prox_regular, search_certificate
from proxkit.envelopes import Grid, moreau_envelope, prox_map


def certificates(seed: int):
    sampler = SamplerConfig(seed=seed)
    F = C.oracle("lambda_abs")
    rep = check_para_prox_regular(F, ParaProxCertificate([0], [1], [0], 0.5, 0.0), sampler)
    print(f"lam|x| at (0, 1), vbar=0, eps=0.5, r=0: {rep.verdict} ({rep.tuples_checked} tuples)")
    for r in (1.0, 10.0, 100.0, 1e4):
        rep = check_para_prox_regular(F, ParaProxCertificate([0], [-1], [1], 0.5, r), sampler)
        w = rep.witness
        print(f"lam|x| at (0, -1), vbar=1, r={r:g}: {rep.verdict}; witness x={w.tuple.x[0]:.4g}, "
              f"lam={w.tuple.lam[0]:.4g}, x'={w.x_prime[0]:.4g}, margin={w.margin:.3e}")
    for name, lam in (("neg_abs", []), ("lambda_neg_abs", [1.0])):
        res = search_certificate(C.oracle(name), [0], lam, [1], sampler)
        print(f"search {name} at 0, vbar=1: {'NotFound' if isinstance(res, NotFound) else res.to_dict()}")


def envelopes():
    g = Grid.interval(-4.0, 4.0, 4001)
    for name, x, exact in (("quad", 2.0, 1.0), ("abs", 2.0, 1.5), ("abs", 0.5, 0.125)):
        v = moreau_envelope(C.oracle(name), 1.0, [x], g).value
        print(f"e_1({name})({x:g}) = {v:.6f}  (exact {exact})")
    print(f"P_1(abs)(2) = {prox_map(C.oracle('abs'), 1.0, [2.0], g)[:, 0].tolist()}")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    np.set_printoptions(precision=4)
    certificates(args.seed)
    envelopes()


if __name__ == "__main__":
    main()
