"""Dense state-vector simulation.

The kernels work on a batch of state vectors with shape ``(B, 2**n)``,
viewed as a ``(B, 2, ..., 2)`` tensor where axis ``1 + q`` is qubit ``q``.
A single :class:`StateVector` is just the ``B == 1`` case; shot sampling
evolves every trajectory in a chunk at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants as C
from .circuit import Barrier, Circuit, ConditionalGate, GateKind, GateOp, Measure
from .errors import CapacityError, DomainError

_SQRT1_2 = 1 / math.sqrt(2)
_H = np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)

_DIAGONAL = (GateKind.S, GateKind.PHASE, GateKind.CPHASE, GateKind.CU_POWER)


# ---------------------------------------------------------------------------
# Batched kernels

def _tensor(psi: np.ndarray, n: int) -> np.ndarray:
    return psi.reshape((psi.shape[0],) + (2,) * n)


def _phase_on_ones(t: np.ndarray, qubits, factor: complex):
    """Multiply every amplitude whose ``qubits`` are all |1> by ``factor``."""
    n = t.ndim - 1
    qs = set(qubits)
    idx = (slice(None),) + tuple(1 if q in qs else slice(None) for q in range(n))
    t[idx] *= factor


def _apply_matrix(t: np.ndarray, target: int, controls, m: np.ndarray):
    n = t.ndim - 1
    cs = set(controls)
    idx = (slice(None),) + tuple(1 if q in cs else slice(None) for q in range(n))
    sub = t[idx]
    # target axis position inside ``sub`` after the control axes are dropped
    axis = 1 + sum(1 for q in range(target) if q not in cs)
    sub = np.moveaxis(sub, axis, -1)
    a0 = sub[..., 0].copy()
    a1 = sub[..., 1].copy()
    sub[..., 0] = m[0, 0] * a0 + m[0, 1] * a1
    sub[..., 1] = m[1, 0] * a0 + m[1, 1] * a1


def _apply_op(t: np.ndarray, op: GateOp):
    kind = op.kind
    if kind in _DIAGONAL:
        angle = math.pi / 2 if kind == GateKind.S else op.phase_angle
        _phase_on_ones(t, op.qubits, complex(math.cos(angle), math.sin(angle)))
    elif kind == GateKind.H:
        _apply_matrix(t, op.targets[0], op.controls, _H)
    elif kind == GateKind.X:
        _apply_matrix(t, op.targets[0], op.controls, _X)
    else:  # pragma: no cover - GateKind is closed
        raise DomainError(f"unsupported gate {kind}")


def _apply_pauli(t: np.ndarray, qubit: int, which: int):
    """which: 0 -> X, 1 -> Y, 2 -> Z."""
    if which == 2:
        _phase_on_ones(t, (qubit,), -1.0)
    else:
        _apply_matrix(t, qubit, (), _X if which == 0 else _Y)


def _prob_one(t: np.ndarray, qubit: int) -> np.ndarray:
    sl = t[(slice(None),) * (1 + qubit) + (1,)]
    return np.sum(np.abs(sl.reshape(sl.shape[0], -1)) ** 2, axis=1)


def _collapse(t: np.ndarray, qubit: int, outcome: np.ndarray, p1: np.ndarray):
    """Project each row onto its outcome and renormalise in place."""
    one_rows = outcome.astype(bool)
    t[(one_rows,) + (slice(None),) * qubit + (0,)] = 0
    t[(~one_rows,) + (slice(None),) * qubit + (1,)] = 0
    p = np.where(one_rows, p1, 1.0 - p1)
    scale = 1.0 / np.sqrt(p)
    t *= scale.reshape((-1,) + (1,) * (t.ndim - 1))


# ---------------------------------------------------------------------------
# Single-vector API

@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise DomainError(f"num_qubits must be >= 1, got {self.num_qubits}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.shape[0] != 1 << self.num_qubits:
            raise DomainError(
                f"expected {1 << self.num_qubits} amplitudes, got {self.amplitudes.shape[0]}")
        if abs(self.norm() - 1.0) > C.ATOL:
            raise DomainError(f"state is not normalised (norm {self.norm():.3e})")

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> StateVector:
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def _check_qubit(self, q: int):
        if not 0 <= q < self.num_qubits:
            raise DomainError(f"qubit {q} out of range for {self.num_qubits}-qubit state")


def new_basis_state(num_qubits: int, basis_index: int) -> StateVector:
    if num_qubits < 1:
        raise DomainError(f"num_qubits must be >= 1, got {num_qubits}")
    if not 0 <= basis_index < 1 << num_qubits:
        raise DomainError(f"basis index {basis_index} out of range for {num_qubits} qubits")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[basis_index] = 1.0
    return StateVector(num_qubits, amps)


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    """Return a new state with ``op`` applied; the input is not modified."""
    for q in op.qubits:
        state._check_qubit(q)
    psi = state.amplitudes.copy().reshape(1, -1)
    _apply_op(_tensor(psi, state.num_qubits), op)
    return StateVector(state.num_qubits, psi.reshape(-1))


def measure_qubit(state: StateVector, qubit: int, rng: np.random.Generator) -> tuple[int, StateVector]:
    """Projective Z measurement. Consumes exactly one uniform draw from ``rng``."""
    state._check_qubit(qubit)
    psi = state.amplitudes.copy().reshape(1, -1)
    t = _tensor(psi, state.num_qubits)
    p1 = _prob_one(t, qubit)
    bit = (rng.random(1) < p1).astype(np.uint8)
    _collapse(t, qubit, bit, p1)
    return int(bit[0]), StateVector(state.num_qubits, psi.reshape(-1))


# ---------------------------------------------------------------------------
# Exact distributions

def _check_capacity(circuit: Circuit, max_qubits: int):
    if circuit.num_qubits > max_qubits:
        raise CapacityError(
            f"circuit needs {circuit.num_qubits} qubits; ceiling is {max_qubits}")


def _measurements_deferrable(circuit: Circuit) -> bool:
    """True when every measurement commutes to the end of the circuit.

    Holds if nothing is classically conditioned and no measured qubit is later
    the target of a non-diagonal gate.
    """
    if circuit.has_conditionals:
        return False
    measured: set[int] = set()
    for op in circuit.ops:
        if isinstance(op, Measure):
            measured.add(op.qubit)
        elif isinstance(op, GateOp) and op.kind not in _DIAGONAL and op.targets[0] in measured:
            return False
    return True


def _bitstring(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def exact_distribution(circuit: Circuit, max_qubits: int = C.DEFAULT_MAX_QUBITS) -> dict[str, float]:
    """Joint distribution of the classical register for a noiseless run.

    Circuits whose measurements can be deferred are simulated once; otherwise
    every measurement branches the evolution and branch weights multiply.
    """
    _check_capacity(circuit, max_qubits)
    n = circuit.num_qubits
    if _measurements_deferrable(circuit):
        return _deferred_distribution(circuit)

    out: dict[str, float] = {}
    psi0 = np.zeros((1, 1 << n), dtype=complex)
    psi0[0, 0] = 1.0
    stack = [(0, psi0, (0,) * circuit.num_clbits, 1.0)]
    while stack:
        pos, psi, clbits, weight = stack.pop()
        t = _tensor(psi, n)
        while pos < len(circuit.ops):
            op = circuit.ops[pos]
            pos += 1
            if isinstance(op, GateOp):
                _apply_op(t, op)
            elif isinstance(op, ConditionalGate):
                if clbits[op.clbit]:
                    _apply_op(t, op.op)
            elif isinstance(op, Measure):
                p1 = float(_prob_one(t, op.qubit)[0])
                for outcome, p in ((1, p1), (0, 1.0 - p1)):
                    if weight * p <= C.BRANCH_CUTOFF:
                        continue
                    branch = psi.copy()
                    _collapse(_tensor(branch, n), op.qubit, np.array([outcome]), np.array([p1]))
                    bits = list(clbits)
                    bits[op.clbit] = outcome
                    stack.append((pos, branch, tuple(bits), weight * p))
                break
        else:
            key = _bitstring(clbits)
            out[key] = out.get(key, 0.0) + weight
    return dict(sorted(out.items()))


def _deferred_distribution(circuit: Circuit) -> dict[str, float]:
    n = circuit.num_qubits
    psi = np.zeros((1, 1 << n), dtype=complex)
    psi[0, 0] = 1.0
    t = _tensor(psi, n)
    source: dict[int, int] = {}
    for op in circuit.ops:
        if isinstance(op, GateOp):
            _apply_op(t, op)
        elif isinstance(op, Measure):
            source[op.clbit] = op.qubit
    probs = np.abs(psi[0]) ** 2
    index = np.arange(1 << n)
    key = np.zeros(1 << n, dtype=np.int64)
    m = circuit.num_clbits
    for c, q in source.items():
        key |= ((index >> (n - 1 - q)) & 1) << (m - 1 - c)
    totals = np.bincount(key, weights=probs, minlength=1 << m if m else 1)
    return {
        format(k, f"0{m}b") if m else "": float(p)
        for k, p in enumerate(totals)
        if p > C.BRANCH_CUTOFF
    }


# ---------------------------------------------------------------------------
# Noise and sampling

@dataclass(frozen=True)
class NoiseModel:
    readout_flip: float = C.DEFAULT_READOUT_FLIP
    depol_1q: float = C.DEFAULT_DEPOL_1Q
    depol_2q: float = C.DEFAULT_DEPOL_2Q

    def __post_init__(self):
        for name in ("readout_flip", "depol_1q", "depol_2q"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")

    def gate_error(self, op: GateOp) -> float:
        return self.depol_2q if op.is_controlled else self.depol_1q

    @classmethod
    def parse(cls, text: str) -> NoiseModel:
        """Parse ``readout=R,depol1=A,depol2=B``; omitted keys keep defaults.

        ``"default"`` gives the default model and ``"none"`` an all-zero one.
        """
        text = text.strip()
        if text == "default":
            return cls()
        if text == "none":
            return cls(0.0, 0.0, 0.0)
        names = {"readout": "readout_flip", "depol1": "depol_1q", "depol2": "depol_2q"}
        kwargs = {}
        for item in filter(None, (s.strip() for s in text.split(","))):
            key, sep, value = item.partition("=")
            if not sep or key.strip() not in names:
                raise DomainError(f"bad noise setting {item!r}; expected readout=,depol1=,depol2=")
            try:
                kwargs[names[key.strip()]] = float(value)
            except ValueError:
                raise DomainError(f"bad noise value {value!r}") from None
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {"readout_flip": self.readout_flip, "depol_1q": self.depol_1q,
                "depol_2q": self.depol_2q}


@dataclass
class ShotHistogram:
    counts: dict[str, int]
    shots: int
    seed: int

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise DomainError("counts must be non-negative")
        if sum(self.counts.values()) != self.shots:
            raise DomainError(f"counts sum to {sum(self.counts.values())}, expected {self.shots}")
        if len({len(k) for k in self.counts}) > 1:
            raise DomainError("bitstrings have inconsistent lengths")

    def frequency(self, key: str) -> float:
        return self.counts.get(key, 0) / self.shots

    def probabilities(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}

    def most_frequent(self) -> str:
        """Argmax bitstring; ties go to the lexicographically smallest."""
        if not self.counts:
            raise DomainError("empty histogram")
        best = max(self.counts.values())
        return min(k for k, v in self.counts.items() if v == best)

    def to_dict(self) -> dict:
        return {"counts": dict(sorted(self.counts.items())), "shots": self.shots, "seed": self.seed}


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _run_chunk(circuit: Circuit, size: int, noise: NoiseModel | None,
               rng: np.random.Generator) -> np.ndarray:
    n = circuit.num_qubits
    psi = np.zeros((size, 1 << n), dtype=complex)
    psi[:, 0] = 1.0
    t = _tensor(psi, n)
    clbits = np.zeros((size, circuit.num_clbits), dtype=np.uint8)

    def inject(op: GateOp, rows):
        p = noise.gate_error(op) if noise is not None else 0.0
        if p <= 0.0:
            return
        nrows = size if rows is None else int(rows.sum())
        for q in op.qubits:
            hit = rng.random(nrows) < p
            which = rng.integers(0, 3, nrows)
            for w in range(3):
                sel = hit & (which == w)
                if rows is not None:
                    full = np.zeros(size, dtype=bool)
                    full[np.flatnonzero(rows)[sel]] = True
                    sel = full
                if sel.any():
                    sub = t[sel]
                    _apply_pauli(sub, q, w)
                    t[sel] = sub

    for op in circuit.ops:
        if isinstance(op, GateOp):
            _apply_op(t, op)
            inject(op, None)
        elif isinstance(op, ConditionalGate):
            rows = clbits[:, op.clbit] == 1
            if rows.any():
                sub = t[rows]
                _apply_op(sub, op.op)
                t[rows] = sub
            inject(op.op, rows)
        elif isinstance(op, Measure):
            p1 = np.clip(_prob_one(t, op.qubit), 0.0, 1.0)
            outcome = (rng.random(size) < p1).astype(np.uint8)
            _collapse(t, op.qubit, outcome, p1)
            if noise is not None and noise.readout_flip > 0.0:
                outcome ^= (rng.random(size) < noise.readout_flip).astype(np.uint8)
            clbits[:, op.clbit] = outcome
        elif not isinstance(op, Barrier):  # pragma: no cover
            raise TypeError(op)
    return clbits


def run_shots(circuit: Circuit, shots: int, noise: NoiseModel | None = None, seed: int = 0,
              max_qubits: int = C.DEFAULT_MAX_QUBITS) -> ShotHistogram:
    """Sample ``shots`` independent trajectories of ``circuit``.

    Shots are split into fixed-size chunks; chunk ``i`` draws from the stream
    ``SeedSequence(seed, spawn_key=(i,))``, so the histogram depends only on
    the arguments and not on how chunks are scheduled.
    """
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    if not 0 <= seed < 1 << 64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    _check_capacity(circuit, max_qubits)
    chunk = max(1, C.BATCH_AMPLITUDES >> circuit.num_qubits)
    m = circuit.num_clbits
    weights = (1 << np.arange(m - 1, -1, -1, dtype=np.int64)) if m else np.zeros(0, dtype=np.int64)
    totals = np.zeros(1 << m, dtype=np.int64)
    for i, start in enumerate(range(0, shots, chunk)):
        size = min(chunk, shots - start)
        clbits = _run_chunk(circuit, size, noise, _chunk_rng(seed, i))
        keys = clbits.astype(np.int64) @ weights if m else np.zeros(size, dtype=np.int64)
        totals += np.bincount(keys, minlength=1 << m)
    counts = {format(k, f"0{m}b") if m else "": int(c) for k, c in enumerate(totals) if c}
    return ShotHistogram(counts, shots, seed)
