"""Circuit container: gate ops, measurements, classically conditioned gates.

Qubit 0 is the most significant bit of a basis-state index, and classical
bit 0 is the leftmost character of a measured bitstring.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

from .errors import DomainError


class GateKind(str, Enum):
    H = "H"
    X = "X"
    S = "S"
    PHASE = "PHASE"
    CPHASE = "CPHASE"
    CU_POWER = "CU_POWER"


_CONTROLLED_KINDS = (GateKind.CPHASE, GateKind.CU_POWER)


@dataclass(frozen=True)
class GateOp:
    """A single unitary gate.

    ``CU_POWER`` with (angle, power) acts exactly like ``CPHASE`` with
    ``angle * power``; the pair is kept so circuit listings show U^(2^k).
    """

    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float = 0.0
    power: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        if len(self.targets) != 1:
            raise DomainError(f"{self.kind.value} takes exactly one target, got {self.targets}")
        if set(self.targets) & set(self.controls):
            raise DomainError(f"controls {self.controls} overlap targets {self.targets}")
        if len(set(self.controls)) != len(self.controls):
            raise DomainError(f"duplicate controls {self.controls}")
        if self.kind in _CONTROLLED_KINDS and not self.controls:
            raise DomainError(f"{self.kind.value} requires at least one control")
        if self.power < 0:
            raise DomainError(f"power must be non-negative, got {self.power}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    @property
    def is_controlled(self) -> bool:
        return bool(self.controls)

    @property
    def phase_angle(self) -> float:
        """Phase applied to |1> of the target by PHASE-type gates."""
        if self.kind == GateKind.CU_POWER:
            return self.angle * self.power
        return self.angle

    def inverse(self) -> GateOp:
        if self.kind in (GateKind.H, GateKind.X):
            return self
        if self.kind == GateKind.S:
            return GateOp(GateKind.PHASE, self.targets, self.controls, angle=-math.pi / 2)
        return GateOp(self.kind, self.targets, self.controls, angle=-self.angle, power=self.power)


@dataclass(frozen=True)
class Measure:
    qubit: int
    clbit: int


@dataclass(frozen=True)
class ConditionalGate:
    """Apply ``op`` when classical bit ``clbit`` reads 1."""

    clbit: int
    op: GateOp


@dataclass(frozen=True)
class Barrier:
    pass


Op = Union[GateOp, Measure, ConditionalGate, Barrier]


@dataclass
class Circuit:
    num_qubits: int
    num_clbits: int = 0
    ops: list[Op] = field(default_factory=list)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise DomainError(f"num_qubits must be >= 1, got {self.num_qubits}")
        if self.num_clbits < 0:
            raise DomainError(f"num_clbits must be >= 0, got {self.num_clbits}")
        ops, self.ops = list(self.ops), []
        self._written: set[int] = set()
        for op in ops:
            self.append(op)

    # -- construction -------------------------------------------------------

    def _check_qubits(self, qubits: Iterable[int]):
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise DomainError(f"qubit {q} out of range for {self.num_qubits}-qubit circuit")

    def _check_clbit(self, c: int):
        if not 0 <= c < self.num_clbits:
            raise DomainError(f"classical bit {c} out of range for {self.num_clbits} bits")

    def append(self, op: Op) -> Circuit:
        if isinstance(op, GateOp):
            self._check_qubits(op.qubits)
        elif isinstance(op, Measure):
            self._check_qubits([op.qubit])
            self._check_clbit(op.clbit)
            self._written.add(op.clbit)
        elif isinstance(op, ConditionalGate):
            self._check_clbit(op.clbit)
            self._check_qubits(op.op.qubits)
            if op.clbit not in self._written:
                raise DomainError(f"classical bit {op.clbit} is read before any measurement writes it")
        elif not isinstance(op, Barrier):
            raise TypeError(f"not a circuit op: {op!r}")
        self.ops.append(op)
        return self

    def extend(self, ops: Iterable[Op]) -> Circuit:
        for op in ops:
            self.append(op)
        return self

    def h(self, q: int) -> Circuit:
        return self.append(GateOp(GateKind.H, (q,)))

    def x(self, q: int) -> Circuit:
        return self.append(GateOp(GateKind.X, (q,)))

    def s(self, q: int) -> Circuit:
        return self.append(GateOp(GateKind.S, (q,)))

    def phase(self, q: int, angle: float) -> Circuit:
        return self.append(GateOp(GateKind.PHASE, (q,), angle=angle))

    def cphase(self, control: int, target: int, angle: float) -> Circuit:
        return self.append(GateOp(GateKind.CPHASE, (target,), (control,), angle=angle))

    def cu_power(self, control: int, target: int, angle: float, power: int) -> Circuit:
        return self.append(GateOp(GateKind.CU_POWER, (target,), (control,), angle=angle, power=power))

    def measure(self, q: int, c: int) -> Circuit:
        return self.append(Measure(q, c))

    def c_if(self, c: int, op: GateOp) -> Circuit:
        return self.append(ConditionalGate(c, op))

    def barrier(self) -> Circuit:
        return self.append(Barrier())

    def inverse(self) -> Circuit:
        """Adjoint of a measurement-free circuit."""
        inv = Circuit(self.num_qubits, self.num_clbits)
        for op in reversed(self.ops):
            if isinstance(op, GateOp):
                inv.append(op.inverse())
            elif isinstance(op, Barrier):
                inv.append(op)
            else:
                raise DomainError("cannot invert a circuit containing measurements")
        return inv

    # -- inspection ---------------------------------------------------------

    def gate_ops(self) -> list[GateOp]:
        """Every unitary gate, including the bodies of conditional gates."""
        out = []
        for op in self.ops:
            if isinstance(op, GateOp):
                out.append(op)
            elif isinstance(op, ConditionalGate):
                out.append(op.op)
        return out

    def gate_counts(self) -> dict[str, int]:
        gates = self.gate_ops()
        return {"total": len(gates), "controlled": sum(g.is_controlled for g in gates)}

    def depth(self) -> int:
        """Layered depth; measurements count as a layer, barriers synchronise."""
        qtime = [0] * self.num_qubits
        ctime = [0] * self.num_clbits
        for op in self.ops:
            if isinstance(op, Barrier):
                t = max(qtime, default=0)
                qtime = [t] * self.num_qubits
                continue
            if isinstance(op, GateOp):
                qs, cs = op.qubits, ()
            elif isinstance(op, Measure):
                qs, cs = (op.qubit,), (op.clbit,)
            else:
                qs, cs = op.op.qubits, (op.clbit,)
            t = 1 + max([qtime[q] for q in qs] + [ctime[c] for c in cs])
            for q in qs:
                qtime[q] = t
            for c in cs:
                ctime[c] = t
        return max(qtime + ctime, default=0)

    @property
    def has_conditionals(self) -> bool:
        return any(isinstance(op, ConditionalGate) for op in self.ops)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.num_qubits, self.num_clbits, self.ops) == (
            other.num_qubits, other.num_clbits, other.ops)

    # -- serialisation ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "num_clbits": self.num_clbits,
            "ops": [_op_to_dict(op) for op in self.ops],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> Circuit:
        return cls(doc["num_qubits"], doc["num_clbits"], [_op_from_dict(d) for d in doc["ops"]])

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        return cls.from_dict(json.loads(text))


def _gate_to_dict(op: GateOp) -> dict:
    return {
        "kind": op.kind.value,
        "targets": list(op.targets),
        "controls": list(op.controls),
        "angle": op.angle,
        "power": op.power,
        "clbit": None,
    }


def _op_to_dict(op: Op) -> dict:
    if isinstance(op, GateOp):
        return _gate_to_dict(op)
    if isinstance(op, Measure):
        return {"kind": "MEASURE", "targets": [op.qubit], "controls": [],
                "angle": 0.0, "power": 1, "clbit": op.clbit}
    if isinstance(op, ConditionalGate):
        # Conditional gates are gate records carrying the clbit they read.
        return {**_gate_to_dict(op.op), "clbit": op.clbit}
    return {"kind": "BARRIER", "targets": [], "controls": [], "angle": 0.0, "power": 1, "clbit": None}


def _op_from_dict(d: dict) -> Op:
    kind = d["kind"]
    if kind == "MEASURE":
        return Measure(d["targets"][0], d["clbit"])
    if kind == "BARRIER":
        return Barrier()
    gate = GateOp(GateKind(kind), tuple(d["targets"]), tuple(d.get("controls", ())),
                  angle=float(d.get("angle", 0.0)), power=int(d.get("power", 1)))
    if d.get("clbit") is not None:
        return ConditionalGate(d["clbit"], gate)
    return gate
