"""Classical post-processing: Kitaev angle recovery, bit stitching, decoding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateSampleError, DomainError, InconsistentEstimatesError
from .qpe import BitOrder, PhaseFraction, Variant
from .statevector import ShotHistogram


def circular_distance(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class KitaevSample:
    k: int
    c_hat: float
    s_hat: float
    shots: int

    def __post_init__(self):
        if self.shots < 1:
            raise DomainError(f"shots must be >= 1, got {self.shots}")
        for name in ("c_hat", "s_hat"):
            if not -1.0 <= getattr(self, name) <= 1.0:
                raise DomainError(f"{name} must lie in [-1, 1], got {getattr(self, name)}")

    def stderr(self) -> float:
        """Binomial standard error of the angle estimate, in turns."""
        c, s = self.c_hat, self.s_hat
        r2 = c * c + s * s
        if r2 == 0.0:
            return math.inf
        var_c = (1.0 - c * c) / self.shots
        var_s = (1.0 - s * s) / self.shots
        return math.sqrt(c * c * var_s + s * s * var_c) / (2 * math.pi * r2)


@dataclass
class PhaseEstimate:
    value: float
    bits: PhaseFraction
    per_k: list[float] = field(default_factory=list)
    stderr_per_k: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.value < 1.0:
            raise DomainError(f"estimate must lie in [0, 1), got {self.value}")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bits": self.bits.bitstring(),
            "per_k": list(self.per_k),
            "stderr_per_k": list(self.stderr_per_k),
        }


def kitaev_point_estimate(sample: KitaevSample) -> float:
    """Angle of the point (C_k, S_k) in turns, in [0, 1).

    Using both coordinates resolves phi_k from -phi_k.
    """
    if sample.c_hat == 0.0 and sample.s_hat == 0.0:
        raise DegenerateSampleError(f"k={sample.k}: cosine and sine estimates are both zero")
    turns = math.atan2(sample.s_hat, sample.c_hat) / (2 * math.pi)
    turns %= 1.0
    return 0.0 if turns == 1.0 else turns


def _zero_frequency(hist: ShotHistogram) -> float:
    if hist.shots < 1:
        raise DomainError("histogram has no shots")
    return hist.counts.get("0", 0) / hist.shots


def kitaev_estimate_from_counts(cos_hist: ShotHistogram, sin_hist: ShotHistogram, k: int) -> KitaevSample:
    """Invert P0 = (1 + cos)/2 and P0 = (1 - sin)/2 from the two histograms."""
    c = float(np.clip(2.0 * _zero_frequency(cos_hist) - 1.0, -1.0, 1.0))
    s = float(np.clip(1.0 - 2.0 * _zero_frequency(sin_hist), -1.0, 1.0))
    return KitaevSample(k, c, s, min(cos_hist.shots, sin_hist.shots))


def kitaev_stitch(per_k: Sequence[float]) -> float:
    """Refine estimates of 2^(k-1)*phi (k = 1..m) into one estimate of phi.

    Starting from the finest estimate, each step halves the running value and
    picks whichever of the two preimages lies nearer the next coarser
    estimate.
    """
    m = len(per_k)
    if m < 1:
        raise DomainError("need at least one per-k estimate")
    for k, est in enumerate(per_k, start=1):
        if not 0.0 <= est < 1.0:
            raise DomainError(f"estimate for k={k} must lie in [0, 1), got {est}")
    for k in range(1, m):
        # doubling phi_k must land near phi_{k+1}
        gap = circular_distance(2.0 * per_k[k - 1], per_k[k])
        if gap > 0.25:
            raise InconsistentEstimatesError(
                k, f"estimate k={k} doubled is {gap:.3f} turns from estimate k={k + 1}")
    rho = per_k[-1]
    for k in range(m - 1, 0, -1):
        candidates = (rho / 2.0, (rho + 1.0) / 2.0)
        rho = min(candidates, key=lambda c: circular_distance(c, per_k[k - 1]))
    return rho


def kitaev_stitch_bits(per_k: Sequence[float], n: int) -> PhaseFraction:
    m = len(per_k)
    if not 1 <= n <= m:
        raise DomainError(f"need 1 <= n <= m, got n={n}, m={m}")
    rho = kitaev_stitch(per_k)
    return PhaseFraction.nearest(rho, m).truncated(n)


def kitaev_estimate(samples: Sequence[KitaevSample], n: int) -> PhaseEstimate:
    ordered = sorted(samples, key=lambda s: s.k)
    per_k = [kitaev_point_estimate(s) for s in ordered]
    rho = kitaev_stitch(per_k) % 1.0
    return PhaseEstimate(rho, kitaev_stitch_bits(per_k, n), per_k, [s.stderr() for s in ordered])


def _bits_from_key(key: str, n: int, order: BitOrder) -> PhaseFraction:
    digits = key if order is BitOrder.MSB_FIRST else key[::-1]
    return PhaseFraction.from_bitstring(digits[:n])


def decode_histogram(hist: ShotHistogram, n: int, bit_order: BitOrder | Variant = BitOrder.MSB_FIRST) -> PhaseEstimate:
    """Most frequent outcome as a phase; ties go to the smallest bitstring."""
    if not hist.counts:
        raise DomainError("empty histogram")
    order = bit_order.bit_order if isinstance(bit_order, Variant) else BitOrder(bit_order)
    key = hist.most_frequent()
    if len(key) < n:
        raise DomainError(f"bitstrings have {len(key)} bits, need {n}")
    bits = _bits_from_key(key, n, order)
    return PhaseEstimate(bits.value(), bits)


def phase_probability(hist: ShotHistogram, target: PhaseFraction,
                      bit_order: BitOrder | Variant = BitOrder.MSB_FIRST) -> float:
    """Fraction of shots whose readout decodes to ``target``."""
    order = bit_order.bit_order if isinstance(bit_order, Variant) else BitOrder(bit_order)
    n = len(target)
    hits = sum(c for k, c in hist.counts.items() if _bits_from_key(k, n, order) == target)
    return hits / hist.shots


@dataclass
class DigitAccuracy:
    per_digit: list[float]
    mean: float
    trials: int

    def to_dict(self) -> dict:
        return {"per_digit": list(self.per_digit), "mean": self.mean, "trials": self.trials}


def digit_accuracy(trials: Sequence[tuple[PhaseFraction, PhaseFraction]]) -> DigitAccuracy:
    if not trials:
        raise DomainError("no trials")
    width = len(trials[0][0])
    if any(len(t) != width or len(d) != width for t, d in trials):
        raise DomainError("all phases must have the same number of bits")
    hits = np.array([[a == b for a, b in zip(t.bits, d.bits)] for t, d in trials])
    per_digit = hits.mean(axis=0).tolist()
    return DigitAccuracy(per_digit, float(np.mean(per_digit)), len(trials))
