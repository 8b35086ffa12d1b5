"""Phase-estimation circuit builders and the ancilla-removal rewrite.

The unitary under study is always ``U = PHASE(2*pi*phi)`` with eigenstate |1>.
In the ancilla forms that eigenstate lives on the last qubit; the modified
forms drop it and apply the kicked-back phase directly to each readout qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .circuit import Barrier, Circuit, ConditionalGate, GateKind, GateOp, Measure
from .errors import DomainError, RewriteIneligibleError

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class PhaseFraction:
    """Binary fraction 0.x1x2...xm."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise DomainError("a phase needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise DomainError(f"bits must be 0 or 1, got {bits}")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "0." + "".join(map(str, self.bits))

    @property
    def fraction(self) -> Fraction:
        return Fraction(int("".join(map(str, self.bits)), 2), 1 << len(self.bits))

    def value(self) -> float:
        return float(self.fraction)

    def bitstring(self) -> str:
        return "".join(map(str, self.bits))

    @classmethod
    def from_fraction(cls, frac: Fraction | int, num_bits: int | None = None) -> PhaseFraction:
        """Exact conversion of a dyadic rational in [0, 1)."""
        frac = Fraction(frac)
        if not 0 <= frac < 1:
            raise DomainError(f"phase must lie in [0, 1), got {frac}")
        den = frac.denominator
        if den & (den - 1):
            raise DomainError(f"{frac} is not a dyadic rational")
        width = max(1, den.bit_length() - 1)
        if num_bits is None:
            num_bits = width
        elif num_bits < width:
            raise DomainError(f"{frac} needs {width} bits, only {num_bits} allowed")
        numer = frac.numerator << (num_bits - (den.bit_length() - 1))
        return cls(tuple(int(c) for c in format(numer, f"0{num_bits}b")))

    @classmethod
    def from_bitstring(cls, text: str) -> PhaseFraction:
        return cls(tuple(int(c) for c in text))

    @classmethod
    def nearest(cls, value: float, num_bits: int) -> PhaseFraction:
        """Closest ``num_bits``-bit fraction on the circle; ties go to the smaller."""
        scaled = (value % 1.0) * (1 << num_bits)
        k = math.ceil(scaled - 0.5) % (1 << num_bits)
        return cls.from_fraction(Fraction(k, 1 << num_bits), num_bits)

    def truncated(self, num_bits: int) -> PhaseFraction:
        bits = self.bits[:num_bits]
        return PhaseFraction(bits + (0,) * (num_bits - len(bits)))


class BitOrder(str, Enum):
    MSB_FIRST = "msb_first"  # bitstring reads x1 x2 ... xn
    LSB_FIRST = "lsb_first"  # bitstring reads xn ... x2 x1


class Variant(str, Enum):
    KITAEV = "KITAEV"
    ITERATIVE = "ITERATIVE"
    IQFT = "IQFT"
    IQFT_MODIFIED = "IQFT_MODIFIED"
    ACP = "ACP"
    ACP_MODIFIED = "ACP_MODIFIED"

    @property
    def bit_order(self) -> BitOrder:
        return BitOrder.LSB_FIRST if self is Variant.ITERATIVE else BitOrder.MSB_FIRST

    @property
    def with_ancilla(self) -> bool:
        return self not in (Variant.IQFT_MODIFIED, Variant.ACP_MODIFIED)


@dataclass(frozen=True)
class QpeConfig:
    n: int
    phase: PhaseFraction
    variant: Variant = Variant.IQFT
    kitaev_k_max: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.kitaev_k_max is None:
            object.__setattr__(self, "kitaev_k_max", self.n)
        if self.kitaev_k_max < 1:
            raise DomainError(f"kitaev_k_max must be >= 1, got {self.kitaev_k_max}")


def _require_n(n: int):
    if n < 1:
        raise DomainError(f"number of readout qubits must be >= 1, got {n}")


# ---------------------------------------------------------------------------
# Kitaev

def build_kitaev_pair(k: int, phase: PhaseFraction) -> tuple[Circuit, Circuit]:
    """Cosine and sine circuits measuring cos/sin of 2*pi*2^(k-1)*phi.

    P(0) is (1 + cos)/2 for the first circuit and (1 - sin)/2 for the second,
    which inserts S after the first Hadamard.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    theta = TWO_PI * phase.value()
    circuits = []
    for with_s in (False, True):
        qc = Circuit(2, 1)
        qc.x(1)
        qc.h(0)
        if with_s:
            qc.s(0)
        qc.cu_power(0, 1, theta, 1 << (k - 1))
        qc.h(0)
        qc.measure(0, 0)
        circuits.append(qc)
    return circuits[0], circuits[1]


# ---------------------------------------------------------------------------
# Inverse QFT

def iqft_ops(qubits: Sequence[int]) -> list[GateOp]:
    """Inverse QFT without the final swap network.

    ``qubits[0]`` carries the finest phase 0.xn and is decoded first; each
    later qubit is corrected by controlled R_j^-1 from every earlier one.
    """
    if not qubits:
        raise DomainError("inverse QFT needs at least one qubit")
    ops = []
    for i, q in enumerate(qubits):
        ops.append(GateOp(GateKind.H, (q,)))
        for j, later in enumerate(qubits[i + 1:], start=2):
            ops.append(GateOp(GateKind.CPHASE, (later,), (q,), angle=-TWO_PI / (1 << j)))
    return ops


def build_iqft_subcircuit(qubits: Sequence[int], num_qubits: int | None = None) -> Circuit:
    if not qubits:
        raise DomainError("inverse QFT needs at least one qubit")
    width = num_qubits if num_qubits is not None else max(qubits) + 1
    return Circuit(width, 0, iqft_ops(qubits))


def build_qft_subcircuit(qubits: Sequence[int], num_qubits: int | None = None) -> Circuit:
    return build_iqft_subcircuit(qubits, num_qubits).inverse()


# ---------------------------------------------------------------------------
# Kickback stage shared by the IQFT and ACP builders

def _kickback(qc: Circuit, n: int, phase: PhaseFraction, with_ancilla: bool):
    """Readout qubit j receives U^(2^(n-1-j)), so it holds 0.x_{n-j}...x_m."""
    theta = TWO_PI * phase.value()
    ancilla = n
    if with_ancilla:
        qc.x(ancilla)
    for j in range(n):
        power = 1 << (n - 1 - j)
        qc.h(j)
        if with_ancilla:
            qc.cu_power(j, ancilla, theta, power)
        else:
            qc.phase(j, theta * power)


def _measure_readout(qc: Circuit, n: int):
    # qubit j holds digit x_{n-j}; classical bit n-1-j keeps the string as x1..xn
    for j in range(n):
        qc.measure(j, n - 1 - j)


def build_iqft_qpe(n: int, phase: PhaseFraction, with_ancilla: bool = True) -> Circuit:
    _require_n(n)
    qc = Circuit(n + 1 if with_ancilla else n, n)
    _kickback(qc, n, phase, with_ancilla)
    qc.extend(iqft_ops(list(range(n))))
    _measure_readout(qc, n)
    return qc


def build_acp_qpe(n: int, phase: PhaseFraction, with_ancilla: bool = True) -> Circuit:
    """IQFT readout keeping only the R2^-1 and R3^-1 corrections.

    Each readout qubit is corrected by the two qubits decoded just before it,
    then measured straight away.
    """
    _require_n(n)
    qc = Circuit(n + 1 if with_ancilla else n, n)
    _kickback(qc, n, phase, with_ancilla)
    for j in range(n):
        for dist in (1, 2):
            if j - dist >= 0:
                qc.cphase(j - dist, j, -TWO_PI / (1 << (dist + 1)))
        qc.h(j)
        qc.measure(j, n - 1 - j)
    return qc


# ---------------------------------------------------------------------------
# Iterative

def build_iterative_qpe(n: int, phase: PhaseFraction) -> Circuit:
    """One readout qubit reused for ``n`` rounds, least significant bit first.

    Round j (1-based) writes classical bit j-1 with digit x_{n-j+1}, so the
    measured bitstring reads xn ... x1.
    """
    _require_n(n)
    theta = TWO_PI * phase.value()
    qc = Circuit(2, n)
    qc.x(1)
    for j in range(1, n + 1):
        if j > 1:
            qc.c_if(j - 2, GateOp(GateKind.X, (0,)))  # reset after the previous readout
        qc.h(0)
        qc.cu_power(0, 1, theta, 1 << (n - j))
        for l in range(2, j + 1):
            qc.c_if(j - l, GateOp(GateKind.PHASE, (0,), angle=-TWO_PI / (1 << l)))
        qc.h(0)
        qc.measure(0, j - 1)
    return qc


def build_circuit(config: QpeConfig) -> Circuit | list[Circuit]:
    """Circuit(s) for a config; Kitaev yields [cos_1, sin_1, cos_2, sin_2, ...]."""
    v, n, phase = config.variant, config.n, config.phase
    if v is Variant.KITAEV:
        out = []
        for k in range(1, config.kitaev_k_max + 1):
            out.extend(build_kitaev_pair(k, phase))
        return out
    if v is Variant.ITERATIVE:
        return build_iterative_qpe(n, phase)
    if v in (Variant.IQFT, Variant.IQFT_MODIFIED):
        return build_iqft_qpe(n, phase, v.with_ancilla)
    return build_acp_qpe(n, phase, v.with_ancilla)


# ---------------------------------------------------------------------------
# Ancilla removal

def _find_ancilla(circuit: Circuit) -> int:
    targets = {op.targets[0] for op in circuit.gate_ops() if op.kind == GateKind.CU_POWER}
    if len(targets) != 1:
        raise RewriteIneligibleError(
            f"expected a single controlled-U target, found {sorted(targets) or 'none'}")
    ancilla = targets.pop()
    prepared = False
    for pos, op in enumerate(circuit.ops):
        if isinstance(op, Barrier):
            continue
        if isinstance(op, Measure):
            if op.qubit == ancilla:
                raise RewriteIneligibleError(f"ancilla {ancilla} is measured (op {pos})")
            continue
        if isinstance(op, ConditionalGate):
            if ancilla in op.op.qubits:
                raise RewriteIneligibleError(f"ancilla {ancilla} is used by a conditional gate (op {pos})")
            continue
        if ancilla not in op.qubits:
            continue
        if op.kind == GateKind.X and not op.controls and not prepared:
            prepared = True
        elif op.kind == GateKind.CU_POWER and op.targets[0] == ancilla and prepared:
            if len(op.controls) != 1:
                raise RewriteIneligibleError(f"op {pos} has {len(op.controls)} controls")
        else:
            raise RewriteIneligibleError(
                f"ancilla {ancilla} is used by {op.kind.value} at op {pos}")
    if not prepared:
        raise RewriteIneligibleError(f"ancilla {ancilla} is never prepared in |1>")
    return ancilla


def remove_ancilla(circuit: Circuit) -> Circuit:
    """Drop the |1>-eigenstate qubit and turn each controlled U^p into PHASE(theta*p).

    Raises RewriteIneligibleError unless the circuit has exactly one qubit
    that is prepared by a lone X and otherwise only targeted by controlled-U
    powers.
    """
    ancilla = _find_ancilla(circuit)
    if circuit.num_qubits == 1:  # pragma: no cover - a CU needs two qubits
        raise RewriteIneligibleError("no readout qubits would remain")

    def remap(q: int) -> int:
        return q - 1 if q > ancilla else q

    def remap_gate(op: GateOp) -> GateOp:
        return GateOp(op.kind, tuple(map(remap, op.targets)), tuple(map(remap, op.controls)),
                      angle=op.angle, power=op.power)

    out = Circuit(circuit.num_qubits - 1, circuit.num_clbits)
    for op in circuit.ops:
        if isinstance(op, GateOp):
            if op.kind == GateKind.X and op.targets[0] == ancilla:
                continue
            if op.kind == GateKind.CU_POWER:
                out.phase(remap(op.controls[0]), op.angle * op.power)
                continue
            out.append(remap_gate(op))
        elif isinstance(op, Measure):
            out.measure(remap(op.qubit), op.clbit)
        elif isinstance(op, ConditionalGate):
            out.c_if(op.clbit, remap_gate(op.op))
        else:
            out.append(op)
    return out
