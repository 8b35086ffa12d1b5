"""Independent reference computations used by the tests.

Nothing here imports the simulator kernels: full 2^n x 2^n matrices are built
with Kronecker products and circuits are evaluated by plain matrix products.
"""

import itertools
import math

import numpy as np

from qpekit.circuit import GateKind, GateOp, Measure

I2 = np.eye(2, dtype=complex)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)


def single_qubit_matrix(op: GateOp) -> np.ndarray:
    k = op.kind
    if k == GateKind.H:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if k == GateKind.X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k == GateKind.S:
        return np.diag([1, 1j])
    angle = op.angle * op.power if k == GateKind.CU_POWER else op.angle
    return np.diag([1, np.exp(1j * angle)])


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def dense_matrix(op: GateOp, n: int) -> np.ndarray:
    """Full unitary; qubit 0 is the leftmost Kronecker factor."""
    u = single_qubit_matrix(op)
    target = op.targets[0]
    if not op.controls:
        return kron_all([u if q == target else I2 for q in range(n)])
    # sum over control assignments: identity unless every control is |1>
    total = np.zeros((1 << n, 1 << n), dtype=complex)
    for assignment in itertools.product((0, 1), repeat=len(op.controls)):
        proj = dict(zip(op.controls, assignment))
        active = all(assignment)
        factors = []
        for q in range(n):
            if q in proj:
                factors.append(P1 if proj[q] else P0)
            elif q == target and active:
                factors.append(u)
            else:
                factors.append(I2)
        total += kron_all(factors)
    return total


def dense_final_state(circuit) -> np.ndarray:
    """Evolve |0...0> through the gate ops of a measurement-free circuit."""
    n = circuit.num_qubits
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1
    for op in circuit.ops:
        if isinstance(op, GateOp):
            psi = dense_matrix(op, n) @ psi
    return psi


def dense_terminal_distribution(circuit) -> dict:
    """Outcome distribution for circuits whose measurements are all terminal."""
    n = circuit.num_qubits
    measures = [op for op in circuit.ops if isinstance(op, Measure)]
    probs = np.abs(dense_final_state(circuit)) ** 2
    out = {}
    for idx, p in enumerate(probs):
        bits = ["0"] * circuit.num_clbits
        for m in measures:
            bits[m.clbit] = str((idx >> (n - 1 - m.qubit)) & 1)
        key = "".join(bits)
        out[key] = out.get(key, 0.0) + p
    return out


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def kitaev_cos_p0(phi: float, k: int) -> float:
    return (1 + math.cos(2 * math.pi * (2 ** (k - 1)) * phi)) / 2


def kitaev_sin_p0(phi: float, k: int) -> float:
    return (1 - math.sin(2 * math.pi * (2 ** (k - 1)) * phi)) / 2


def semiclassical_distribution(phi: float, n: int, max_distance: int | None) -> dict:
    """Readout distribution of kickback + (truncated) inverse QFT, by enumeration.

    Readout qubit j holds phase 2^(n-1-j) * phi and is decoded after qubits
    0..j-1. A controlled R_{d+1}^-1 from a qubit that is measured anyway acts
    like a classically conditioned rotation, so each digit is a single-qubit
    interference experiment: P(1) = sin^2(pi * alpha) for the corrected phase
    alpha. ``max_distance`` keeps only corrections from that many previous
    qubits (None = full inverse QFT, 2 = constant-precision readout).
    Keys are written with qubit j at position n-1-j.
    """
    out = {}
    for bits in itertools.product((0, 1), repeat=n):
        prob = 1.0
        for j in range(n):
            alpha = (2 ** (n - 1 - j)) * phi
            for d in range(1, j + 1):
                if max_distance is not None and d > max_distance:
                    break
                alpha -= bits[j - d] / 2 ** (d + 1)
            p1 = math.sin(math.pi * alpha) ** 2
            prob *= p1 if bits[j] else 1 - p1
        key = "".join(str(bits[n - 1 - i]) for i in range(n))
        out[key] = out.get(key, 0.0) + prob
    return out


def iterative_distribution(phi: float, n: int) -> dict:
    """Round-by-round enumeration of iterative phase estimation.

    Round j reads 2^(n-j) * phi after subtracting the bits already measured;
    keys list round 1 first, so they read x_n ... x_1.
    """
    out = {}
    for bits in itertools.product((0, 1), repeat=n):
        prob = 1.0
        for j in range(1, n + 1):
            alpha = (2 ** (n - j)) * phi
            for l in range(2, j + 1):
                alpha -= bits[j - l] / 2 ** l
            p1 = math.sin(math.pi * alpha) ** 2
            prob *= p1 if bits[j - 1] else 1 - p1
        key = "".join(map(str, bits))
        out[key] = out.get(key, 0.0) + prob
    return out
