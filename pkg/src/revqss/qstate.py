"""Exact statevector engine for small labeled qubit registers.

States are dense complex amplitude vectors over named qubits, ordered
big-endian by the label list (the first label is the most significant bit of
the basis index). Measurements follow a collapse-and-discard convention:
measured qubits are removed from the register and the surviving factor is
renormalized without touching its phase. Every operation is a pure function
over immutable values, so results are safe to cache and compare.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

# Tolerance policy: construction and plain algebra hold to 1e-12, derived
# equalities to 1e-10, and negative tests must miss by more than 1e-6.
ATOL_ALGEBRA = 1e-12
ATOL_DERIVED = 1e-10
NEGATIVE_MARGIN = 1e-6

MAX_QUBITS = 5

# Branch probabilities at or below this floor are treated as impossible;
# the post-measurement state is undefined there and reported as None.
PROB_FLOOR = 1e-14

_SQRT2 = sqrt(2.0)

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2

#: Basis order for Pauli decompositions: identity, x, y, z.
PAULIS = (ID2, SIGMA_X, SIGMA_Y, SIGMA_Z)

BELL_TOKENS = ("phi+", "phi-", "psi+", "psi-")
HADAMARD_TOKENS = ("+", "-")

# _BELL_COEFFS[token][s, a] is the amplitude of |s a> in the Bell vector.
_BELL_COEFFS = {
    "phi+": np.array([[1, 0], [0, 1]], dtype=complex) / _SQRT2,
    "phi-": np.array([[1, 0], [0, -1]], dtype=complex) / _SQRT2,
    "psi+": np.array([[0, 1], [1, 0]], dtype=complex) / _SQRT2,
    "psi-": np.array([[0, 1], [-1, 0]], dtype=complex) / _SQRT2,
}
_HADAMARD_COEFFS = {
    "+": np.array([1, 1], dtype=complex) / _SQRT2,
    "-": np.array([1, -1], dtype=complex) / _SQRT2,
}


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized pure state of 1..5 labeled qubits."""

    labels: tuple[str, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        n = len(labels)
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"register must hold 1..{MAX_QUBITS} qubits, got {n}")
        if len(set(labels)) != n:
            raise ValueError(f"duplicate qubit labels in {labels}")
        if amps.shape != (2**n,):
            raise ValueError(f"expected {2**n} amplitudes for {n} qubits, got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"state norm {norm!r} is not 1 within {ATOL_ALGEBRA}")
        amps.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown qubit label {label!r}, register is {self.labels}") from None

    def amplitude(self, bits: str) -> complex:
        """Amplitude of the basis ket given as a bit string in label order."""
        if len(bits) != self.num_qubits:
            raise ValueError(f"expected {self.num_qubits} bits, got {bits!r}")
        return complex(self.amplitudes[int(bits, 2)])

    def __repr__(self):
        return f"PureState(labels={self.labels}, amplitudes={np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Reduced density matrix over a set of labeled qubits."""

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        dim = 2 ** len(labels)
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix for {labels}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite entry")
        if np.max(np.abs(m - m.conj().T)) > ATOL_ALGEBRA:
            raise ValueError("matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"trace {tr!r} is not 1")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise ValueError("matrix has a significantly negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """One branch of a projective measurement.

    ``post_state`` is None when the branch probability is below PROB_FLOOR or
    when the measurement consumed the whole register.
    """

    basis: str  # "bell" | "hadamard" | "computational"
    outcome: str
    probability: float
    post_state: PureState | None


def single_qubit(a0: complex, a1: complex, label: str = "q") -> PureState:
    return PureState((label,), np.array([a0, a1], dtype=complex))


def basis_state(labels, bits: str) -> PureState:
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return PureState(tuple(labels), amps)


def tensor(left: PureState, right: PureState) -> PureState:
    """Kronecker product of two registers; labels concatenate left to right."""
    overlap = set(left.labels) & set(right.labels)
    if overlap:
        raise ValueError(f"label collision between registers: {sorted(overlap)}")
    return PureState(left.labels + right.labels, np.kron(left.amplitudes, right.amplitudes))


def require_unitary(gate: np.ndarray, tol: float = ATOL_ALGEBRA) -> np.ndarray:
    g = np.asarray(gate, dtype=complex)
    if g.shape != (2, 2):
        raise ValueError(f"expected a 2x2 gate, got shape {g.shape}")
    if np.max(np.abs(g.conj().T @ g - ID2)) > tol:
        raise ValueError("gate is not unitary within tolerance")
    return g


def apply_gate(state: PureState, gate: np.ndarray, qubit: str) -> PureState:
    """Apply a single-qubit unitary on the addressed tensor factor."""
    g = require_unitary(gate)
    ax = state.axis(qubit)
    n = state.num_qubits
    t = state.amplitudes.reshape((2,) * n)
    out = np.moveaxis(np.tensordot(g, t, axes=([1], [ax])), 0, ax)
    return PureState(state.labels, out.reshape(-1))


def _project(state: PureState, axes: tuple[int, ...], coeffs: np.ndarray):
    """Project the named axes onto a basis vector; returns (prob, unnormalized rest)."""
    n = state.num_qubits
    t = state.amplitudes.reshape((2,) * n)
    moved = np.moveaxis(t, axes, tuple(range(len(axes))))
    k = len(axes)
    proj = np.tensordot(coeffs.conj(), moved, axes=(tuple(range(k)), tuple(range(k))))
    proj = np.asarray(proj).reshape(-1)
    prob = float(np.vdot(proj, proj).real)
    return prob, proj


def _branch_records(state, axes, basis, table, order):
    keep = tuple(lbl for i, lbl in enumerate(state.labels) if i not in axes)
    records = []
    for token in order:
        prob, proj = _project(state, axes, table[token])
        if prob <= PROB_FLOOR or not keep:
            post = None
        else:
            post = PureState(keep, proj / sqrt(prob))
        records.append(MeasurementRecord(basis, token, prob, post))
    return records


def measure_bell(state: PureState, q1: str, q2: str) -> list[MeasurementRecord]:
    """Projective Bell-basis measurement of two qubits, which are then discarded.

    Returns the four branches in fixed order phi+, phi-, psi+, psi- with
    phi/psi defined as (|00> +- |11>)/sqrt(2) and (|01> +- |10>)/sqrt(2).
    """
    if q1 == q2:
        raise ValueError("Bell measurement needs two distinct qubits")
    axes = (state.axis(q1), state.axis(q2))
    return _branch_records(state, axes, "bell", _BELL_COEFFS, BELL_TOKENS)


def measure_hadamard(state: PureState, q: str) -> list[MeasurementRecord]:
    """Projective measurement in the |+>, |-> basis; the qubit is discarded."""
    axes = (state.axis(q),)
    return _branch_records(state, axes, "hadamard", _HADAMARD_COEFFS, HADAMARD_TOKENS)


def partial_trace(state: PureState, keep) -> DensityMatrix:
    """Reduced density matrix over the kept qubits, in register order."""
    keep = set(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    unknown = keep - set(state.labels)
    if unknown:
        raise KeyError(f"unknown qubit labels {sorted(unknown)}")
    kept_axes = tuple(i for i, lbl in enumerate(state.labels) if lbl in keep)
    traced_axes = tuple(i for i in range(state.num_qubits) if i not in kept_axes)
    n = state.num_qubits
    t = state.amplitudes.reshape((2,) * n)
    if traced_axes:
        rho = np.tensordot(t, t.conj(), axes=(traced_axes, traced_axes))
    else:
        rho = np.multiply.outer(t, t.conj())
    dim = 2 ** len(kept_axes)
    labels = tuple(state.labels[i] for i in kept_axes)
    return DensityMatrix(labels, rho.reshape(dim, dim))


def fidelity(x: PureState, y: PureState) -> float:
    """|<x|y>|^2; invariant under a global phase on either state."""
    if x.num_qubits != y.num_qubits:
        raise ValueError(f"register shape mismatch: {x.num_qubits} vs {y.num_qubits} qubits")
    return float(abs(np.vdot(x.amplitudes, y.amplitudes)) ** 2)


def equal_up_to_phase(x, y, tol: float = ATOL_DERIVED) -> bool:
    """True iff y = exp(i theta) x entrywise within tol.

    The phase is read off the largest-magnitude entry of x, so the check is
    deterministic and works for both state vectors and 2x2 matrices.
    """
    a = np.asarray(x, dtype=complex).reshape(-1)
    b = np.asarray(y, dtype=complex).reshape(-1)
    if a.shape != b.shape:
        return False
    ix = int(np.argmax(np.abs(a)))
    if abs(a[ix]) <= tol:
        return bool(np.max(np.abs(b)) <= tol)
    if abs(b[ix]) == 0.0:
        return False
    phase = b[ix] / a[ix]
    if abs(abs(phase) - 1.0) > tol:
        return False
    return bool(np.max(np.abs(b - phase * a)) <= tol)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) ||rho - sigma||_1 via the eigenvalues of the difference."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho.matrix - sigma.matrix))))


def pauli_coefficients(m: np.ndarray) -> tuple[complex, complex, complex, complex]:
    """Coefficients (w_i, w_x, w_y, w_z) with m = sum_k w_k sigma_k."""
    m = np.asarray(m, dtype=complex)
    return tuple(complex(np.trace(p @ m)) / 2.0 for p in PAULIS)
