"""Experiment harness: build a QPE variant, sample it, decode, report.

Exit codes: 0 success, 2 usage or parse error, 3 capacity error,
4 rewrite-ineligible, 1 any other failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import constants as C
from .circuit import Circuit
from .errors import CapacityError, DomainError, PhaseParseError, QpeError, RewriteIneligibleError
from .estimation import (
    DigitAccuracy, PhaseEstimate, decode_histogram, digit_accuracy, kitaev_estimate,
    kitaev_estimate_from_counts, phase_probability,
)
from .qpe import PhaseFraction, QpeConfig, Variant, build_circuit, remove_ancilla
from .statevector import NoiseModel, ShotHistogram, run_shots

log = logging.getLogger(__name__)

_BINARY = re.compile(r"0\.([01]+)")
_RATIONAL = re.compile(r"(\d+)/(\d+)")


def parse_phase(text: str) -> PhaseFraction:
    """Parse ``0.1011`` (binary fraction) or ``11/16`` (dyadic rational)."""
    s = text.strip()
    offset = len(text) - len(text.lstrip())
    if _BINARY.fullmatch(s):
        return PhaseFraction.from_bitstring(s[2:])
    m = _RATIONAL.fullmatch(s)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        den_pos = offset + m.start(2)
        if den == 0:
            raise PhaseParseError(text, den_pos, "zero denominator")
        if den & (den - 1):
            raise PhaseParseError(text, den_pos, f"denominator {den} is not a power of two")
        if num >= den:
            raise PhaseParseError(text, offset, "phase must be below 1")
        return PhaseFraction.from_fraction(Fraction(num, den))
    raise PhaseParseError(text, offset + _first_bad_char(s), "expected 0.<bits> or <int>/<power of two>")


def _first_bad_char(s: str) -> int:
    if "/" in s:
        head, _, tail = s.partition("/")
        for i, ch in enumerate(head):
            if not ch.isdigit():
                return i
        if not head:
            return 0
        for i, ch in enumerate(tail):
            if not ch.isdigit():
                return len(head) + 1 + i
        return len(s)
    if not s.startswith("0"):
        return 0
    if len(s) < 2 or s[1] != ".":
        return 1
    for i, ch in enumerate(s[2:], start=2):
        if ch not in "01":
            return i
    return len(s)


@dataclass
class RunConfig:
    algorithm: Variant
    phase: PhaseFraction
    n: int
    shots: int = C.DEFAULT_SHOTS
    seed: int = 0
    noise: NoiseModel | None = None
    output_format: str = "json"
    dump_circuit: bool = False
    repeat: int = 1
    kitaev_k_max: int | None = None
    remove_ancilla: bool = False
    max_qubits: int = C.DEFAULT_MAX_QUBITS

    def __post_init__(self):
        self.algorithm = Variant(self.algorithm)
        if self.shots < 1:
            raise DomainError(f"shots must be >= 1, got {self.shots}")
        if self.repeat < 1:
            raise DomainError(f"repeat must be >= 1, got {self.repeat}")
        if self.output_format not in ("json", "csv"):
            raise DomainError(f"unknown format {self.output_format!r}")
        if not 0 <= self.seed < 1 << 64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def qpe(self) -> QpeConfig:
        return QpeConfig(self.n, self.phase, self.algorithm, self.kitaev_k_max)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "phase": str(self.phase),
            "n": self.n,
            "shots": self.shots,
            "seed": self.seed,
            "noise": self.noise.to_dict() if self.noise is not None else None,
            "repeat": self.repeat,
            "kitaev_k_max": self.qpe.kitaev_k_max if self.algorithm is Variant.KITAEV else None,
            "remove_ancilla": self.remove_ancilla,
        }


@dataclass
class ExperimentReport:
    config: RunConfig
    histograms: dict[str, ShotHistogram]
    decoded: PhaseEstimate
    correct_prob: float | None
    gate_counts: dict[str, int]
    depth: int
    per_digit_accuracy: DigitAccuracy | None = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def histogram(self) -> ShotHistogram:
        """The single histogram of a one-circuit run."""
        if len(self.histograms) != 1:
            raise DomainError("this run produced several histograms")
        return next(iter(self.histograms.values()))

    def to_dict(self) -> dict:
        if list(self.histograms) == [""]:
            hist = self.histograms[""].to_dict()["counts"]
        else:
            hist = {label: h.to_dict()["counts"] for label, h in self.histograms.items()}
        doc = {
            "config": self.config.to_dict(),
            "histogram": hist,
            "decoded": self.decoded.to_dict(),
            "correct_prob": self.correct_prob,
            "gate_counts": dict(self.gate_counts),
            "depth": self.depth,
        }
        if self.per_digit_accuracy is not None:
            doc["per_digit_accuracy"] = self.per_digit_accuracy.to_dict()
        return doc


def derive_seed(seed: int, *path: int) -> int:
    state = np.random.SeedSequence(seed, spawn_key=path).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def build_circuits(config: RunConfig) -> dict[str, Circuit]:
    built = build_circuit(config.qpe)
    if isinstance(built, Circuit):
        circuits = {"": built}
    else:
        circuits = {}
        for i, qc in enumerate(built):
            circuits[f"{'sin' if i % 2 else 'cos'}{i // 2 + 1}"] = qc
    if config.remove_ancilla:
        circuits = {label: remove_ancilla(qc) for label, qc in circuits.items()}
    return circuits


def _run_once(config: RunConfig, circuits: dict[str, Circuit], seed: int):
    if config.algorithm is Variant.KITAEV:
        hists = {label: run_shots(qc, config.shots, config.noise, derive_seed(seed, 0x4B, i),
                                  config.max_qubits)
                 for i, (label, qc) in enumerate(circuits.items())}
        samples = [kitaev_estimate_from_counts(hists[f"cos{k}"], hists[f"sin{k}"], k)
                   for k in range(1, config.qpe.kitaev_k_max + 1)]
        return hists, kitaev_estimate(samples, config.n)
    hist = run_shots(circuits[""], config.shots, config.noise, seed, config.max_qubits)
    return {"": hist}, decode_histogram(hist, config.n, config.algorithm)


def run_experiment(config: RunConfig) -> ExperimentReport:
    """Run ``config.repeat`` seeded repetitions; the first one is reported in full.

    Repetition 0 uses ``config.seed`` itself, so a single run and the first
    of many agree.
    """
    start = time.perf_counter()
    circuits = build_circuits(config)
    target = config.phase.truncated(config.n)
    hists, decoded = _run_once(config, circuits, config.seed)
    trials = [(target, decoded.bits)]
    for r in range(1, config.repeat):
        _, est = _run_once(config, circuits, derive_seed(config.seed, 0xE7, r))
        trials.append((target, est.bits))

    correct = None
    if list(hists) == [""]:
        correct = phase_probability(hists[""], target, config.algorithm)
    counts = [qc.gate_counts() for qc in circuits.values()]
    report = ExperimentReport(
        config=config,
        histograms=hists,
        decoded=decoded,
        correct_prob=correct,
        gate_counts={"total": sum(c["total"] for c in counts),
                     "controlled": sum(c["controlled"] for c in counts)},
        depth=max(qc.depth() for qc in circuits.values()),
        per_digit_accuracy=digit_accuracy(trials) if config.repeat > 1 else None,
    )
    report.wall_time = time.perf_counter() - start
    return report


def emit_report(report: ExperimentReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode()
    if fmt != "csv":
        raise DomainError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bitstring", "count", "probability"])
    for label, hist in report.histograms.items():
        for key, count in sorted(hist.counts.items()):
            name = f"{label}/{key}" if label else key
            writer.writerow([name, count, repr(count / hist.shots)])
    buf.write(f"# decoded={report.decoded.bits}\n")
    buf.write(f"# value={report.decoded.value!r}\n")
    buf.write(f"# correct_prob={report.correct_prob!r}\n")
    buf.write(f"# gate_counts=total:{report.gate_counts['total']},"
              f"controlled:{report.gate_counts['controlled']}\n")
    buf.write(f"# depth={report.depth}\n")
    if report.per_digit_accuracy is not None:
        acc = report.per_digit_accuracy
        buf.write(f"# per_digit_accuracy={','.join(repr(a) for a in acc.per_digit)}"
                  f";mean={acc.mean!r};trials={acc.trials}\n")
    return buf.getvalue().encode()


def _variant(text: str) -> Variant:
    try:
        return Variant(text.upper().replace("-", "_"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown algorithm {text!r}; choose from "
            + ", ".join(v.value.lower() for v in Variant)) from None


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpekit", description=__doc__.splitlines()[0])
    p.add_argument("--algorithm", type=_variant, required=True,
                   help="kitaev, iterative, iqft, iqft_modified, acp or acp_modified")
    p.add_argument("--phase", required=True, help="eigenphase as 0.1011 or 11/16")
    p.add_argument("--qubits", type=int, required=True, help="number of phase bits to read out")
    p.add_argument("--shots", type=int, default=C.DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--noise", default=None,
                   help="readout=R,depol1=A,depol2=B (or 'default'); omit for noiseless runs")
    p.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    p.add_argument("--dump-circuit", action="store_true", help="print the circuit JSON and exit")
    p.add_argument("--repeat", type=int, default=C.DEFAULT_REPEAT,
                   help="independent seeded repetitions used for per-digit accuracy")
    p.add_argument("--kitaev-kmax", type=int, default=None)
    p.add_argument("--remove-ancilla", action="store_true",
                   help="apply the ancilla-removal rewrite to the built circuit(s)")
    p.add_argument("--max-qubits", type=int, default=C.DEFAULT_MAX_QUBITS)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = RunConfig(
            algorithm=args.algorithm,
            phase=parse_phase(args.phase),
            n=args.qubits,
            shots=args.shots,
            seed=args.seed,
            noise=NoiseModel.parse(args.noise) if args.noise is not None else None,
            output_format=args.output_format,
            dump_circuit=args.dump_circuit,
            repeat=args.repeat,
            kitaev_k_max=args.kitaev_kmax,
            remove_ancilla=args.remove_ancilla,
            max_qubits=args.max_qubits,
        )
        if config.dump_circuit:
            circuits = build_circuits(config)
            docs = [qc.to_dict() for qc in circuits.values()]
            doc = docs[0] if list(circuits) == [""] else docs
            sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
            return 0
        report = run_experiment(config)
        log.info("wall time %.3f s", report.wall_time)
        sys.stdout.buffer.write(emit_report(report, config.output_format))
        sys.stdout.flush()
        return 0
    except (PhaseParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except RewriteIneligibleError as exc:
        print(f"rewrite not applicable: {exc}", file=sys.stderr)
        return 4
    except QpeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
