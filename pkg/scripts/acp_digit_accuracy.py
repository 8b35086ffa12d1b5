"""Per-digit success of the constant-precision readout on random phases.

Each random phase has more bits than the register, so the readout only ever
sees an approximation. For every digit we report the exact probability of
reading the true leading bit, its worst case over all phases, and the same
probability restricted to runs where the two correcting digits came out right.
"""

import argparse
import math

import numpy as np

from qpekit.qpe import PhaseFraction, build_acp_qpe
from qpekit.statevector import exact_distribution


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--qubits", type=int, default=4)
    parser.add_argument("--bits", type=int, default=8)
    parser.add_argument("--phases", type=int, default=100)
    parser.add_argument("--seed", type=int, default=5)
    args = parser.parse_args()

    n = args.qubits
    rng = np.random.default_rng(args.seed)
    mean, worst = np.zeros(n), np.ones(n)
    conditional = np.ones(n)
    for _ in range(args.phases):
        phase = PhaseFraction(tuple(int(b) for b in rng.integers(0, 2, args.bits)))
        x = [str(b) for b in phase.bits[:n]]
        dist = exact_distribution(build_acp_qpe(n, phase, False))
        for j in range(n):
            p = sum(v for k, v in dist.items() if k[j] == x[j])
            mean[j] += p / args.phases
            worst[j] = min(worst[j], p)
            helpers = [i for i in (j + 1, j + 2) if i < n]
            if len(helpers) == 2:
                given = sum(v for k, v in dist.items() if all(k[i] == x[i] for i in helpers))
                both = sum(v for k, v in dist.items() if all(k[i] == x[i] for i in helpers + [j]))
                if given > 1e-12:
                    conditional[j] = min(conditional[j], both / given)

    print(f"bound cos^2(pi/8) = {math.cos(math.pi / 8) ** 2:.6f}")
    print(f"{'digit':<7}{'mean':>8}{'worst':>8}{'worst | helpers right':>24}")
    for j in range(n):
        cond = f"{conditional[j]:.4f}" if j < n - 2 else "n/a"
        print(f"x{j + 1:<6}{mean[j]:>8.4f}{worst[j]:>8.4f}{cond:>24}")


if __name__ == "__main__":
    main()
