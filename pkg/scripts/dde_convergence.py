"""Error-vs-step-size study for the scalar DDE benchmark.

Integrates the benchmark up to T = 2 for every (method, h) combination,
measures the final-value error against the exact solution and reports the
fitted convergence slopes (expected: 1, 2, 3).

Usage: python scripts/dde_convergence.py [--out dde_convergence.csv]
"""

import argparse
from dataclasses import dataclass

from expdelay import belzen, converge
from expdelay.harness import format_csv


@dataclass
class Config:
    lam: float = 1.0
    T: float = 2.0
    hs: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    methods: tuple = ("expeuler", "heun", "expo3")
    out: str = "dde_convergence.csv"


def run(cfg: Config):
    rows, slopes = converge(belzen(cfg.lam), list(cfg.methods), list(cfg.hs), cfg.T)
    with open(cfg.out, "w", newline="") as fh:
        fh.write(format_csv("converge", rows))
    print(f"wrote {cfg.out}")
    for method in sorted(slopes):
        sx, su = slopes[method]
        print(f"{method:9s}  value-error slope {sx:6.3f}   history slope {su:6.3f}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=Config.out)
    args = parser.parse_args()
    run(Config(out=args.out))
