"""Numerical tolerances and defaults shared across the package."""

# Structural tolerance: norms, amplitude agreement, probability sums.
ATOL = 1e-10

# Branches of the measurement tree with lower weight are dropped.
BRANCH_CUTOFF = 1e-14

# Largest register exact_distribution / run_shots will allocate.
DEFAULT_MAX_QUBITS = 24

# Amplitudes per trajectory batch when sampling shots.
BATCH_AMPLITUDES = 1 << 20

DEFAULT_SHOTS = 1024
DEFAULT_REPEAT = 100

# Noise defaults, roughly IBMQX4-era error rates.
DEFAULT_READOUT_FLIP = 0.03
DEFAULT_DEPOL_1Q = 0.001
DEFAULT_DEPOL_2Q = 0.02
