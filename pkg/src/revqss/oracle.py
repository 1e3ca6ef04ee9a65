"""Brute-force verification layer, independent of the protocol's tables.

Every post-measurement state of the protocol is linear in the secret
(alpha, beta), so each branch defines a 2x2 map K assembled from the basis
secrets (1,0) and (0,1). A secret-independent correction exists exactly when
K^dagger K = s I for a positive scalar s, in which case (K/sqrt(s))^dagger
inverts the branch. This module rebuilds the maps from the resource builder
and raw measurements only, solves them, and sweeps parameter regions to
compare branch solvability against the printed admissibility cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, pi, sin, sqrt

import numpy as np

from .protocol import BellOutcome, Correction, Flow, HadamardBit, _normalize_w_identity
from .qstate import PROB_FLOOR, PureState, measure_bell, measure_hadamard, tensor
from .resource import GParams, Secret, sample_params, theorem1_check, theorem2_check

#: Thresholds for declaring a branch solvable.
DEFECT_TOL = 1e-9
RESIDUAL_TOL = 1e-9
SCALE_FLOOR = 1e-9

_BELL_INDEX = {o: i for i, o in enumerate(BellOutcome)}
_HBIT_INDEX = {b: i for i, b in enumerate(HadamardBit)}

ALL_BITS = tuple((b1, b2) for b1 in HadamardBit for b2 in HadamardBit)


@dataclass(frozen=True, eq=False)
class BranchMap:
    """Linear action of one protocol branch on the secret.

    Columns are the renormalized pre-correction states for the basis secrets,
    each scaled by sqrt(2 * branch probability), which cancels the per-secret
    renormalization and leaves a map that is exactly linear in the secret.
    """

    matrix: np.ndarray
    flow: Flow
    bell: BellOutcome
    bits: tuple[HadamardBit, HadamardBit]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("branch map must be 2x2")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite branch map entry")
        if abs(np.linalg.det(m)) > 1.0 + 1e-10:
            raise ValueError("branch map determinant exceeds 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of a correction solve; absence of a correction is a result.

    ``residual`` is the worst 1 - fidelity over the probe secrets under the
    best candidate unitary; ``proportionality_defect`` is the Frobenius miss
    of K^dagger K from its nearest scalar multiple of the identity. The
    ``candidate`` (nearest unitary, inverted) is kept even when no exact
    correction exists so callers can report the fidelity actually achieved.
    """

    correction: Correction | None
    residual: float
    proportionality_defect: float
    scale: float
    candidate: np.ndarray | None


def probe_secrets() -> np.ndarray:
    """Deterministic 2x20 probe set (cos t, e^{i p} sin t): poles plus a
    3x6 lattice over the sphere including the equator ring."""
    cols = [(1.0, 0.0), (0.0, 1.0)]
    for t in (pi / 8, pi / 4, 3 * pi / 8):
        for k in range(6):
            phase = np.exp(1j * k * pi / 3)
            cols.append((cos(t), phase * sin(t)))
    return np.array(cols, dtype=complex).T


_PROBES = probe_secrets()


def branch_map(params: GParams, flow: Flow, bell: BellOutcome, bits) -> BranchMap:
    """Rebuild one branch's linear map from the resource and raw measurements."""
    from .resource import build_g_state  # local to keep the dependency obvious

    bits = (bits[0], bits[1])
    q1, q2 = flow.measured_qubits
    cols = []
    for amps in ((1.0, 0.0), (0.0, 1.0)):
        state = tensor(PureState(("S",), np.array(amps, dtype=complex)), build_g_state(params))
        shared = measure_bell(state, "S", "A1")[_BELL_INDEX[bell]].post_state
        rec1 = measure_hadamard(shared, q1)[_HBIT_INDEX[bits[0]]]
        if rec1.post_state is None:
            cols.append(np.zeros(2, dtype=complex))
            continue
        rec2 = measure_hadamard(rec1.post_state, q2)[_HBIT_INDEX[bits[1]]]
        prob = rec1.probability * rec2.probability
        if rec2.post_state is None or prob <= PROB_FLOOR:
            cols.append(np.zeros(2, dtype=complex))
            continue
        cols.append(sqrt(2.0 * prob) * rec2.post_state.amplitudes)
    return BranchMap(np.column_stack(cols), flow, bell, bits)


def solve_correction(bm: BranchMap) -> SolveResult:
    """Solve for the branch correction from first principles.

    K^dagger K is compared against its best scalar multiple of the identity;
    when proportional (and the scale positive) the inverse of the unitary
    factor is the correction, verified on the 20 probe secrets.
    """
    k = bm.matrix
    gram = k.conj().T @ k
    scale = float(np.trace(gram).real) / 2.0
    defect = float(np.linalg.norm(gram - scale * np.eye(2)))
    if scale <= SCALE_FLOOR:
        return SolveResult(None, 1.0, defect, scale, None)
    u, _, vh = np.linalg.svd(k)
    candidate = (u @ vh).conj().T
    images = k @ _PROBES
    norms = np.linalg.norm(images, axis=0)
    live = norms > sqrt(PROB_FLOOR)
    residual = 1.0
    if np.any(live):
        states = images[:, live] / norms[live]
        recovered = candidate @ states
        fids = np.abs(np.sum(_PROBES[:, live].conj() * recovered, axis=0)) ** 2
        residual = float(np.max(1.0 - fids))
    found = defect <= DEFECT_TOL and residual < RESIDUAL_TOL
    correction = (
        Correction.from_matrix(_normalize_w_identity(candidate), "oracle") if found else None
    )
    return SolveResult(correction, residual, defect, scale, candidate)


def branch_probability_table(params: GParams, secret: Secret, flow: Flow):
    """Exact joint probability of each of the 16 (Bell, bit, bit) branches."""
    state = tensor(PureState(("S",), secret.as_array()), build_g_state_cached(params))
    q1, q2 = flow.measured_qubits
    rows = []
    for outcome, rec in zip(BellOutcome, measure_bell(state, "S", "A1")):
        firsts = measure_hadamard(rec.post_state, q1)
        for b1, rec1 in zip(HadamardBit, firsts):
            if rec1.post_state is None:
                for b2 in HadamardBit:
                    rows.append((outcome, (b1, b2), 0.0))
                continue
            for b2, rec2 in zip(HadamardBit, measure_hadamard(rec1.post_state, q2)):
                rows.append((outcome, (b1, b2), rec.probability * rec1.probability * rec2.probability))
    return rows


def build_g_state_cached(params: GParams) -> PureState:
    from .resource import build_g_state

    return build_g_state(params)


@dataclass(frozen=True)
class SweepSpec:
    """Sampling plan for a region sweep."""

    count: int = 200
    seed: int = 0
    region: str | None = None  # None: the theorem's own region


@dataclass(frozen=True)
class SampleRecord:
    index: int
    params: GParams
    predicate: bool
    cases: tuple[int, ...]
    all_branches_solvable: bool
    max_defect: float
    min_scale: float
    unsolvable_branches: tuple[str, ...]
    classification: str  # "consistent" | "predicate_only" | "solvable_only"


@dataclass(frozen=True)
class RegionReport:
    theorem: int
    region: str
    count: int
    seed: int
    counts: dict[str, int]
    records: tuple[SampleRecord, ...]
    counterexamples: tuple[SampleRecord, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        def rec_dict(r: SampleRecord) -> dict:
            a, b, c, d = r.params.as_tuple()
            return {
                "index": r.index,
                "params": [a.real, a.imag, b.real, b.imag, c.real, c.imag, d.real, d.imag],
                "predicate": r.predicate,
                "cases": list(r.cases),
                "all_branches_solvable": r.all_branches_solvable,
                "max_defect": r.max_defect,
                "min_scale": r.min_scale,
                "unsolvable_branches": list(r.unsolvable_branches),
                "classification": r.classification,
            }

        return {
            "theorem": self.theorem,
            "region": self.region,
            "samples": self.count,
            "seed": self.seed,
            "counts": dict(self.counts),
            "counterexamples": [rec_dict(r) for r in self.counterexamples],
            "records": [rec_dict(r) for r in self.records],
        }


def verify_theorem(which: int, spec: SweepSpec | None = None) -> RegionReport:
    """Compare a printed admissibility predicate against branch solvability.

    For each sampled parameter point the relevant flow's 16 branches are
    solved independently; the point is classified as consistent (predicate
    and solvability agree), predicate_only (the predicate holds but some
    branch is unsolvable, a genuine counterexample) or solvable_only (all
    branches solvable without the predicate, showing the printed cases are
    not necessary for branch-wise recovery).
    """
    if which not in (1, 2):
        raise ValueError("theorem must be 1 or 2")
    spec = spec or SweepSpec()
    if spec.count < 1:
        raise ValueError("sample count must be >= 1")
    region = spec.region or ("theorem1" if which == 1 else "theorem2")
    flow = Flow.REVOCATION if which == 1 else Flow.RECONSTRUCT_CHARLIE
    check = theorem1_check if which == 1 else theorem2_check
    points = sample_params(region, spec.count, spec.seed)
    records = []
    counts = {"consistent": 0, "predicate_only": 0, "solvable_only": 0}
    for idx, params in enumerate(points):
        report = check(params)
        predicate = report.revocable if which == 1 else report.reconstructible
        cases = report.theorem1_cases if which == 1 else report.theorem2_cases
        max_defect = 0.0
        min_scale = float("inf")
        unsolvable = []
        for bell in BellOutcome:
            for bits in ALL_BITS:
                res = solve_correction(branch_map(params, flow, bell, bits))
                max_defect = max(max_defect, res.proportionality_defect)
                min_scale = min(min_scale, res.scale)
                if res.correction is None:
                    unsolvable.append(f"{bell.value}:{bits[0].value}{bits[1].value}")
        solvable = not unsolvable
        if predicate and not solvable:
            cls = "predicate_only"
        elif solvable and not predicate:
            cls = "solvable_only"
        else:
            cls = "consistent"
        counts[cls] += 1
        records.append(
            SampleRecord(
                index=idx,
                params=params,
                predicate=predicate,
                cases=cases,
                all_branches_solvable=solvable,
                max_defect=max_defect,
                min_scale=min_scale,
                unsolvable_branches=tuple(unsolvable),
                classification=cls,
            )
        )
    counterexamples = tuple(r for r in records if r.classification == "predicate_only")
    return RegionReport(
        theorem=which,
        region=region,
        count=spec.count,
        seed=spec.seed,
        counts=counts,
        records=tuple(records),
        counterexamples=counterexamples,
    )
