"""Three-party protocol state machine: sharing, revocation, reconstruction.

The dealer (Alice, holding qubits A1 and A2) combines a single-qubit secret S
with the four-qubit resource and Bell-measures (S, A1), leaving a three-qubit
shared state on (A2, B, C). From there either the shareholders measure in the
Hadamard basis and the dealer corrects her qubit (revocation), or the dealer
and one shareholder measure and the other shareholder corrects (reconstruction).
Branches are enumerated exactly; a seeded sampler picks single trajectories
for trial runs. Correction unitaries come from a small closed-form table where
one is documented, and from the brute-force oracle everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from math import sqrt

import numpy as np

from .qstate import (
    ATOL_ALGEBRA,
    ID2,
    PAULIS,
    PROB_FLOOR,
    SIGMA_X,
    PureState,
    apply_gate,
    fidelity,
    measure_bell,
    measure_hadamard,
    partial_trace,
    pauli_coefficients,
    tensor,
    trace_distance,
)
from .resource import GParams, Secret, build_g_state

_SQRT2 = sqrt(2.0)

#: Full register order: secret qubit, dealer's two resource qubits, shareholders.
REGISTER = ("S", "A1", "A2", "B", "C")


class BellOutcome(Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


class HadamardBit(Enum):
    """Hadamard-basis outcome with the classical encoding + -> 0, - -> 1."""

    PLUS = "+"
    MINUS = "-"

    @property
    def bit(self) -> int:
        return 0 if self is HadamardBit.PLUS else 1

    @classmethod
    def from_bit(cls, bit: int) -> "HadamardBit":
        if bit == 0:
            return cls.PLUS
        if bit == 1:
            return cls.MINUS
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")


class Flow(Enum):
    REVOCATION = "revocation"
    RECONSTRUCT_CHARLIE = "reconstruction-charlie"
    RECONSTRUCT_BOB = "reconstruction-bob"

    @property
    def measured_qubits(self) -> tuple[str, str]:
        return _FLOW_MEASURED[self]

    @property
    def corrected_qubit(self) -> str:
        return _FLOW_CORRECTED[self]

    @property
    def senders(self) -> tuple[str, str]:
        return _FLOW_SENDERS[self]


_FLOW_MEASURED = {
    Flow.REVOCATION: ("B", "C"),
    Flow.RECONSTRUCT_CHARLIE: ("A2", "B"),
    Flow.RECONSTRUCT_BOB: ("A2", "C"),
}
_FLOW_CORRECTED = {
    Flow.REVOCATION: "A2",
    Flow.RECONSTRUCT_CHARLIE: "C",
    Flow.RECONSTRUCT_BOB: "B",
}
_FLOW_SENDERS = {
    Flow.REVOCATION: ("Bob", "Charlie"),
    Flow.RECONSTRUCT_CHARLIE: ("Alice", "Bob"),
    Flow.RECONSTRUCT_BOB: ("Alice", "Charlie"),
}


class CorrectionNotFound(RuntimeError):
    """No secret-independent correction unitary exists for the branch."""


@dataclass(frozen=True, eq=False)
class Correction:
    """A 2x2 correction unitary with its Pauli decomposition.

    ``source`` is "closed-form" for the documented branch formulas and
    "oracle" for brute-force solutions. Closed-form entries are phase
    normalized to det = -1, oracle entries to a real nonpositive identity
    coefficient, so equal corrections are emitted identically.
    """

    matrix: np.ndarray
    source: str
    pauli: tuple[complex, complex, complex, complex]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("correction must be 2x2")
        if np.max(np.abs(m.conj().T @ m - ID2)) > ATOL_ALGEBRA:
            raise ValueError("correction is not unitary within 1e-12")
        rebuilt = sum(w * p for w, p in zip(self.pauli, PAULIS))
        if np.max(np.abs(m - rebuilt)) > ATOL_ALGEBRA:
            raise ValueError("Pauli coefficients do not reconstruct the matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, source: str) -> "Correction":
        m = np.asarray(matrix, dtype=complex)
        return cls(m, source, pauli_coefficients(m))


@dataclass(frozen=True, eq=False)
class Transcript:
    """Record of one protocol branch.

    ``share`` fills the first block and leaves the rest None; ``revoke`` and
    ``reconstruct`` return completed copies. ``branch_probability`` is
    conditional on the Bell outcome; multiply by ``bell_probability`` for the
    joint weight. ``fidelity`` is None on branches that cannot occur for this
    secret (probability 0). ``correction_found`` is False when no exact
    secret-independent correction exists; the correction then carried is the
    closest unitary and ``fidelity`` is what it actually achieves.
    """

    params: GParams
    secret: Secret
    bell: BellOutcome
    bell_probability: float
    shared_state: PureState
    flow: Flow | None = None
    hadamard_bits: tuple[tuple[str, HadamardBit], tuple[str, HadamardBit]] | None = None
    branch_probability: float | None = None
    pre_correction_state: PureState | None = None
    correction: Correction | None = None
    recovered_state: PureState | None = None
    fidelity: float | None = None
    correction_found: bool | None = None

    @property
    def bits(self) -> tuple[HadamardBit, HadamardBit] | None:
        if self.hadamard_bits is None:
            return None
        return (self.hadamard_bits[0][1], self.hadamard_bits[1][1])


def _secret_state(secret: Secret) -> PureState:
    return PureState(("S",), secret.as_array())


def share(secret: Secret, params: GParams, bell: BellOutcome | None = None) -> list[Transcript]:
    """Sharing phase: Bell-measure (S, A1) on secret (x) resource.

    Returns one transcript stub per Bell outcome (all four in enum order, or
    just the requested one). Each outcome occurs with probability exactly 1/4
    and leaves the shared three-qubit state on (A2, B, C).
    """
    combined = tensor(_secret_state(secret), build_g_state(params))
    records = measure_bell(combined, "S", "A1")
    stubs = []
    for outcome, rec in zip(BellOutcome, records):
        if bell is not None and outcome is not bell:
            continue
        if abs(rec.probability - 0.25) > ATOL_ALGEBRA:
            raise AssertionError(f"Bell branch probability {rec.probability} is not 1/4")
        stubs.append(
            Transcript(
                params=params,
                secret=secret,
                bell=outcome,
                bell_probability=rec.probability,
                shared_state=rec.post_state,
            )
        )
    return stubs


def _complete(stub: Transcript, flow: Flow, bits) -> list[Transcript]:
    if stub.flow not in (None, flow):
        raise ValueError(f"transcript already bound to flow {stub.flow}")
    if stub.shared_state is None:
        raise ValueError("transcript has no shared state")
    wanted = None if bits is None else (bits[0], bits[1])
    q1, q2 = flow.measured_qubits
    s1, s2 = flow.senders
    secret_state = _secret_state(stub.secret)
    out = []
    first = measure_hadamard(stub.shared_state, q1)
    for b1, rec1 in zip(HadamardBit, first):
        if rec1.post_state is None:
            second = [(b2, 0.0, None) for b2 in HadamardBit]
        else:
            second = [
                (b2, rec1.probability * rec2.probability, rec2.post_state)
                for b2, rec2 in zip(HadamardBit, measure_hadamard(rec1.post_state, q2))
            ]
        for b2, prob, pre in second:
            if wanted is not None and (b1, b2) != wanted:
                continue
            corr, found = _branch_correction(stub.params, flow, stub.bell, (b1, b2))
            recovered = None
            fid = None
            if pre is not None and corr is not None:
                recovered = apply_gate(pre, corr.matrix, flow.corrected_qubit)
                fid = fidelity(recovered, secret_state)
            out.append(
                replace(
                    stub,
                    flow=flow,
                    hadamard_bits=((s1, b1), (s2, b2)),
                    branch_probability=prob,
                    pre_correction_state=pre,
                    correction=corr,
                    recovered_state=recovered,
                    fidelity=fid,
                    correction_found=found,
                )
            )
    return out


def revoke(stub: Transcript, bits=None) -> list[Transcript]:
    """Dealer retrieval: shareholders measure B then C, dealer corrects A2."""
    return _complete(stub, Flow.REVOCATION, bits)


def reconstruct(stub: Transcript, at: str = "charlie", bits=None) -> list[Transcript]:
    """Shareholder retrieval at Charlie (A2, B measured) or Bob (A2, C measured)."""
    key = at.lower()
    if key == "charlie":
        flow = Flow.RECONSTRUCT_CHARLIE
    elif key == "bob":
        flow = Flow.RECONSTRUCT_BOB
    else:
        raise ValueError(f"unknown reconstruction location {at!r}")
    return _complete(stub, flow, bits)


def run_flow(secret: Secret, params: GParams, flow: Flow, bits=None) -> list[Transcript]:
    """Enumerate all 16 (Bell x Hadamard x Hadamard) branches of one flow."""
    out = []
    for stub in share(secret, params):
        out.extend(_complete(stub, flow, bits))
    return out


def sample_transcript(secret: Secret, params: GParams, flow: Flow, seed: int) -> Transcript:
    """Seeded single-trajectory run: outcomes drawn by their exact probabilities."""
    rng = np.random.default_rng(seed)
    stubs = share(secret, params)
    probs = np.array([t.bell_probability for t in stubs])
    stub = stubs[int(rng.choice(len(stubs), p=probs / probs.sum()))]
    completed = _complete(stub, flow, None)
    weights = np.array([t.branch_probability for t in completed])
    total = weights.sum()
    if total <= PROB_FLOOR:
        raise RuntimeError("no branch has positive probability")
    return completed[int(rng.choice(len(completed), p=weights / total))]


# Documented closed-form corrections, keyed by (flow, bell, bits). Each entry
# is only a valid unitary on its admissible parameter pattern; outside it the
# table falls back to the oracle.
def _cf_revocation_phi_plus_pp(p: GParams) -> np.ndarray:
    return _SQRT2 * (-p.a * ID2 + p.b * SIGMA_X)


def _cf_revocation_phi_plus_pm(p: GParams) -> np.ndarray:
    return _SQRT2 * np.array([[p.d, p.c], [-p.c, -p.d]], dtype=complex)


def _cf_revocation_phi_minus_pm(p: GParams) -> np.ndarray:
    return -_SQRT2 * (p.d * ID2 + p.c * SIGMA_X)


def _cf_revocation_psi_plus_pp(p: GParams) -> np.ndarray:
    return _SQRT2 * (-p.b * ID2 + p.a * SIGMA_X)


def _cf_reconstruct_charlie_phi_plus_pp(p: GParams) -> np.ndarray:
    return (-p.lambda1 * ID2 + p.lambda2 * SIGMA_X) / _SQRT2


CLOSED_FORMS = {
    (Flow.REVOCATION, BellOutcome.PHI_PLUS, (HadamardBit.PLUS, HadamardBit.PLUS)): _cf_revocation_phi_plus_pp,
    (Flow.REVOCATION, BellOutcome.PHI_PLUS, (HadamardBit.PLUS, HadamardBit.MINUS)): _cf_revocation_phi_plus_pm,
    (Flow.REVOCATION, BellOutcome.PHI_MINUS, (HadamardBit.PLUS, HadamardBit.MINUS)): _cf_revocation_phi_minus_pm,
    (Flow.REVOCATION, BellOutcome.PSI_PLUS, (HadamardBit.PLUS, HadamardBit.PLUS)): _cf_revocation_psi_plus_pp,
    (Flow.RECONSTRUCT_CHARLIE, BellOutcome.PHI_PLUS, (HadamardBit.PLUS, HadamardBit.PLUS)): _cf_reconstruct_charlie_phi_plus_pp,
}


def _normalize_det(m: np.ndarray) -> np.ndarray:
    """Rotate the global phase so det = -1 (the closed-form convention)."""
    det = np.linalg.det(m)
    theta = (np.pi - np.angle(det)) / 2.0
    return m * np.exp(1j * theta)


def _normalize_w_identity(m: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the identity coefficient is real and <= 0."""
    w = np.trace(m) / 2.0
    if abs(w) > 1e-12:
        return m * (-w.conjugate() / abs(w))
    coeffs = pauli_coefficients(m)
    k = int(np.argmax(np.abs(coeffs)))
    wk = coeffs[k]
    return m * (wk.conjugate() / abs(wk))


def _is_unitary(m: np.ndarray) -> bool:
    return bool(np.max(np.abs(m.conj().T @ m - ID2)) <= ATOL_ALGEBRA)


@lru_cache(maxsize=16384)
def _branch_correction(params: GParams, flow: Flow, bell: BellOutcome, bits) -> tuple[Correction | None, bool]:
    """Correction for one branch plus a flag for whether it is exact.

    Corrections depend only on (params, flow, branch), never on the secret;
    the cache therefore returns the identical object across secrets.
    """
    builder = CLOSED_FORMS.get((flow, bell, bits))
    if builder is not None:
        m = builder(params)
        if _is_unitary(m):
            return Correction.from_matrix(_normalize_det(m), "closed-form"), True
    from . import oracle  # local import: oracle depends on this module's enums

    result = oracle.solve_correction(oracle.branch_map(params, flow, bell, bits))
    if result.correction is not None:
        return result.correction, True
    if result.candidate is None:
        return None, False
    best = Correction.from_matrix(_normalize_w_identity(result.candidate), "oracle")
    return best, False


def correction_table(params: GParams, flow: Flow, bell: BellOutcome, bits) -> Correction:
    """Branch correction: closed form where documented, oracle-solved otherwise.

    Raises CorrectionNotFound when the branch admits no secret-independent
    correction (the branch map is not proportional to a unitary).
    """
    corr, found = _branch_correction(params, flow, bell, (bits[0], bits[1]))
    if corr is None or not found:
        raise CorrectionNotFound(
            f"no exact correction for {flow.value} {bell.value} "
            f"bits ({bits[0].value}{bits[1].value})"
        )
    return corr


def collusion_probe(params: GParams, secrets: tuple[Secret, Secret]) -> float:
    """Distinguishability left to colluding shareholders after sharing.

    For each Bell outcome, traces the dealer's qubit A2 out of the shared
    state and takes the trace distance between the (B, C) reduced states the
    two secrets induce. Returns the worst case over the four outcomes.
    """
    s1, s2 = secrets
    worst = 0.0
    for outcome in BellOutcome:
        rho1 = partial_trace(share(s1, params, bell=outcome)[0].shared_state, ("B", "C"))
        rho2 = partial_trace(share(s2, params, bell=outcome)[0].shared_state, ("B", "C"))
        worst = max(worst, trace_distance(rho1, rho2))
    return worst
