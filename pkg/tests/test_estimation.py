import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpekit.errors import DegenerateSampleError, DomainError, InconsistentEstimatesError
from qpekit.estimation import (
    KitaevSample, circular_distance, decode_histogram, digit_accuracy, kitaev_estimate,
    kitaev_estimate_from_counts, kitaev_point_estimate, kitaev_stitch_bits, phase_probability,
)
from qpekit.qpe import BitOrder, PhaseFraction, Variant, build_kitaev_pair
from qpekit.statevector import ShotHistogram, run_shots

PHI = PhaseFraction.from_bitstring("1011")


def hist(counts, seed=0):
    return ShotHistogram(dict(counts), sum(counts.values()), seed)


def exact_per_k(phase: PhaseFraction, m: int):
    return [float((phase.fraction * 2 ** (k - 1)) % 1) for k in range(1, m + 1)]


# -- point estimate -----------------------------------------------------------------

@pytest.mark.parametrize("c,s,expected", [
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.25),
    (-0.38268, -0.92388, 0.6875),
])
def test_point_estimate(c, s, expected):
    assert kitaev_point_estimate(KitaevSample(1, c, s, 100)) == pytest.approx(expected, abs=1e-5)


def test_point_estimate_degenerate():
    with pytest.raises(DegenerateSampleError):
        kitaev_point_estimate(KitaevSample(1, 0.0, 0.0, 10))


def test_point_estimate_recovers_uniform_angles():
    rng = np.random.default_rng(0)
    for phi in rng.random(1000):
        theta = 2 * math.pi * phi
        est = kitaev_point_estimate(KitaevSample(1, math.cos(theta), math.sin(theta), 1))
        assert circular_distance(est, phi) <= 1e-12
        assert 0.0 <= est < 1.0


def test_sample_range_is_checked():
    with pytest.raises(DomainError):
        KitaevSample(1, 1.5, 0.0, 10)
    with pytest.raises(DomainError):
        KitaevSample(1, 0.0, 0.0, 0)


# -- counts to samples ---------------------------------------------------------------

def test_counts_zero_phase():
    s = kitaev_estimate_from_counts(hist({"0": 1024}), hist({"0": 512, "1": 512}), 1)
    assert (s.c_hat, s.s_hat) == (1.0, 0.0)


def test_counts_plugged_into_inversion():
    s = kitaev_estimate_from_counts(hist({"0": 316, "1": 708}), hist({"0": 39, "1": 985}), 1)
    assert s.c_hat == pytest.approx(2 * 316 / 1024 - 1)
    assert s.s_hat == pytest.approx(1 - 2 * 39 / 1024)
    assert s.c_hat == pytest.approx(-0.3828, abs=1e-4)
    assert s.s_hat == pytest.approx(0.9238, abs=1e-4)


def test_counts_quarter_turn():
    s = kitaev_estimate_from_counts(hist({"0": 512, "1": 512}), hist({"0": 0, "1": 1024}), 1)
    assert (s.c_hat, s.s_hat) == (0.0, 1.0)
    assert kitaev_point_estimate(s) == 0.25


def test_counts_require_shots():
    with pytest.raises(DomainError):
        kitaev_estimate_from_counts(hist({}), hist({"0": 1}), 1)


# -- stitching ----------------------------------------------------------------------

def test_stitch_exact_eleven_sixteenths():
    assert kitaev_stitch_bits(exact_per_k(PHI, 4), 4) == PHI


@pytest.mark.parametrize("m,n", [(1, 1), (3, 2), (6, 6)])
def test_stitch_zero_phase(m, n):
    assert kitaev_stitch_bits([0.0] * m, n).bits == (0,) * n


def test_stitch_tolerates_perturbation_corners():
    exact = exact_per_k(PHI, 4)
    for signs in itertools.product((-1, 1), repeat=4):
        noisy = [(e + 0.05 * s) % 1.0 for e, s in zip(exact, signs)]
        assert kitaev_stitch_bits(noisy, 4) == PHI


@pytest.mark.parametrize("n", range(1, 11))
def test_stitch_round_trip_all_phases(n):
    for bits in itertools.product((0, 1), repeat=n):
        phase = PhaseFraction(bits)
        assert kitaev_stitch_bits(exact_per_k(phase, n), n) == phase


def test_stitch_with_more_estimates_than_bits():
    phase = PhaseFraction.from_bitstring("101101")
    assert kitaev_stitch_bits(exact_per_k(phase, 6), 3) == PhaseFraction.from_bitstring("101")


def test_stitch_inconsistent_estimates():
    with pytest.raises(InconsistentEstimatesError) as info:
        kitaev_stitch_bits([0.1, 0.7, 0.4], 3)
    assert info.value.k == 1


def test_stitch_argument_checks():
    with pytest.raises(DomainError):
        kitaev_stitch_bits([0.1], 2)
    with pytest.raises(DomainError):
        kitaev_stitch_bits([1.2], 1)


def test_estimator_consistency_at_large_shots():
    shots = 2**14
    for seed in range(20):
        for k in range(1, 5):
            cos_c, sin_c = build_kitaev_pair(k, PHI)
            sample = kitaev_estimate_from_counts(
                run_shots(cos_c, shots, None, 1000 * seed + 2 * k),
                run_shots(sin_c, shots, None, 1000 * seed + 2 * k + 1), k)
            true = float((PHI.fraction * 2 ** (k - 1)) % 1)
            assert circular_distance(kitaev_point_estimate(sample), true) <= 4 / math.sqrt(shots)


def test_kitaev_estimate_reports_stderr():
    samples = [KitaevSample(k, math.cos(2 * math.pi * p), math.sin(2 * math.pi * p), 1024)
               for k, p in zip((2, 1), (0.375, 0.6875))]
    est = kitaev_estimate(samples, 2)
    assert est.bits.bitstring() == "11"  # 0.6875 rounds to 0.11 at two bits
    assert est.per_k == pytest.approx([0.6875, 0.375])
    assert len(est.stderr_per_k) == 2 and all(e > 0 for e in est.stderr_per_k)


# -- decoding -----------------------------------------------------------------------

def test_decode_iqft_order():
    est = decode_histogram(hist({"1011": 1024}), 4, Variant.IQFT)
    assert est.bits == PHI and est.value == 0.6875


def test_decode_plain_argmax():
    assert decode_histogram(hist({"0000": 600, "0001": 424}), 4).bits.bitstring() == "0000"


def test_decode_tie_breaks_lexicographically():
    est = decode_histogram(hist({"1011": 343, "0110": 343, "0000": 338}), 4)
    assert est.bits.bitstring() == "0110"


def test_decode_iterative_order_is_reversed():
    assert decode_histogram(hist({"1101": 10}), 4, Variant.ITERATIVE).bits == PHI
    assert decode_histogram(hist({"1101": 10}), 4, BitOrder.LSB_FIRST).bits == PHI


def test_decode_errors():
    with pytest.raises(DomainError):
        decode_histogram(hist({}), 4)
    with pytest.raises(DomainError):
        decode_histogram(hist({"10": 3}), 4)


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.text("01", min_size=4, max_size=4), st.integers(1, 50), min_size=1),
       st.integers(2, 9))
def test_decode_invariant_under_scaling(counts, factor):
    a = decode_histogram(hist(counts), 4)
    b = decode_histogram(hist({k: v * factor for k, v in counts.items()}), 4)
    assert a.bits == b.bits


def test_phase_probability():
    h = hist({"1011": 700, "1010": 300})
    assert phase_probability(h, PHI) == pytest.approx(0.7)
    assert phase_probability(hist({"1101": 5, "0000": 5}), PHI, Variant.ITERATIVE) == 0.5


# -- digit accuracy -----------------------------------------------------------------

def test_digit_accuracy_all_correct():
    acc = digit_accuracy([(PHI, PHI)] * 100)
    assert acc.per_digit == [1.0] * 4 and acc.mean == 1.0


def test_digit_accuracy_alternating_first_bit():
    wrong = PhaseFraction.from_bitstring("0011")
    acc = digit_accuracy([(PHI, PHI), (PHI, wrong)] * 50)
    assert acc.per_digit == [0.5, 1.0, 1.0, 1.0]
    assert acc.mean == pytest.approx(0.875)


def test_digit_accuracy_errors():
    with pytest.raises(DomainError):
        digit_accuracy([])
    with pytest.raises(DomainError):
        digit_accuracy([(PHI, PhaseFraction.from_bitstring("10"))])
