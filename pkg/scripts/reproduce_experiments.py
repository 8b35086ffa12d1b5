"""Run every circuit family on phi = 0.1011 with four readout qubits.

Prints one row per (variant, noise) cell: decoded phase, probability of the
correct outcome, gate counts and depth. Kitaev rows have no single histogram,
so their correct-outcome column is blank.
"""

import argparse

from qpekit.cli import RunConfig, run_experiment
from qpekit.qpe import PhaseFraction, Variant
from qpekit.statevector import NoiseModel


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--phase", default="1011", help="binary digits after the point")
    parser.add_argument("--shots", type=int, default=1024)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    phase = PhaseFraction.from_bitstring(args.phase)
    n = len(phase)
    print(f"{'variant':<14}{'noise':<8}{'decoded':<10}{'P(correct)':>11}{'digit acc':>11}"
          f"{'gates':>7}{'ctrl':>6}{'depth':>7}")
    for noise_name, noise in (("none", None), ("default", NoiseModel())):
        for variant in Variant:
            report = run_experiment(RunConfig(variant, phase, n, shots=args.shots, seed=args.seed,
                                              noise=noise, repeat=args.repeat))
            p = "" if report.correct_prob is None else f"{report.correct_prob:.4f}"
            acc = report.per_digit_accuracy.mean if report.per_digit_accuracy else float("nan")
            print(f"{variant.value:<14}{noise_name:<8}{report.decoded.bits.bitstring():<10}{p:>11}"
                  f"{acc:>11.4f}{report.gate_counts['total']:>7}"
                  f"{report.gate_counts['controlled']:>6}{report.depth:>7}")


if __name__ == "__main__":
    main()
