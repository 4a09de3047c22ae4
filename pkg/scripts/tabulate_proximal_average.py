"""Write proximal-average tables (convex, envelope form, nonconvex) for catalog pairs as CSV."""
import argparse
from pathlib import Path

from proxkit.cli import run

PAIRS = (("quad", "abs"), ("quad", "quad"), ("abs", "abs"), ("quad", "quad_minus_abs"))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="results/pa", help="output directory")
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--box", type=float, nargs=2, default=(-2.0, 2.0))
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--lambdas", default="0,0.25,0.5,0.75,1")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for f0, f1 in PAIRS:
        path = out / f"pa_{f0}_{f1}.csv"
        code = run(["pa", "--f0", f0, "--f1", f1, "--points", str(args.points), "--box", *map(str, args.box),
                    "--r", str(args.r), "--lambdas", args.lambdas, "-o", str(path)])
        print(f"{path}: exit {code}")


if __name__ == "__main__":
    main()
