"""Extend the k = 1, 2 rate study past N = 64 and compare with log-factor models.

Observed rates are set against the plain model (ln N / N)^(k+1) and the
bound N^-(k+1) (ln N)^(k+3/2), each evaluated between N and 2N.

Usage: python scripts/rate_extension.py [--max-n 256]
"""

import argparse
import math

from shishkin_nipg.experiment import ExperimentConfig, run_sweep


def model_rate(N, k, extra_log_power):
    f = lambda n: (math.log(n) / n) ** (k + 1) * math.log(n) ** extra_log_power
    return math.log2(f(N) / f(2 * N))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-n", type=int, default=256)
    args = parser.parse_args()
    Ns = []
    N = 8
    while N <= args.max_n:
        Ns.append(N)
        N *= 2
    table = run_sweep(ExperimentConfig(epsilons=(1e-8,), degrees=(1, 2), Ns=tuple(Ns)))
    print(f"{'k':>2} {'N':>4} {'p_Ik':>6} {'p_post':>6} {'plain':>6} {'bound':>6} {'post/uN':>8}")
    for r in table:
        if r.p_Ik is None:
            continue
        print(f"{r.k:2d} {r.N:4d} {r.p_Ik:6.3f} {r.p_post:6.3f} "
              f"{model_rate(r.N, r.k, 0):6.3f} {model_rate(r.N, r.k, 0.5):6.3f} {r.e_post / r.e_uN_nipg:8.3f}")


if __name__ == "__main__":
    main()
