"""Resource-state construction and parameter admissibility analysis.

The protocol runs on a four-qubit entangled resource parametrized by four
complex coefficients (a, b, c, d) with unit norm. Two printed condition sets
govern when the dealer can revoke the secret (theorem 1, four cases) and when
the shareholder can reconstruct it (theorem 2, eight cases). Both are
evaluated here exactly as listed, case by case, with per-condition residuals
so callers can see how far a parameter point misses.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .qstate import ATOL_ALGEBRA, ATOL_DERIVED, PureState

G_LABELS = ("A1", "A2", "B", "C")

_HALF_SQRT2 = 1.0 / sqrt(2.0)

REGIONS = ("theorem1", "theorem2", "both", "unconstrained")


class EmptyRegionError(ValueError):
    """Raised when a requested sampling region admits no valid point."""


@dataclass(frozen=True)
class GParams:
    """Coefficients of the four-qubit resource state, |a|^2+|b|^2+|c|^2+|d|^2 = 1."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            z = complex(getattr(self, name))
            if not (np.isfinite(z.real) and np.isfinite(z.imag)):
                raise ValueError(f"coefficient {name} is not finite")
            object.__setattr__(self, name, z)
        norm2 = sum(abs(z) ** 2 for z in self.as_tuple())
        if abs(norm2 - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"squared norm {norm2!r} is not 1 within {ATOL_ALGEBRA}")

    @classmethod
    def normalized(cls, a, b, c, d) -> "GParams":
        vec = np.array([a, b, c, d], dtype=complex)
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            raise ValueError("cannot normalize a zero coefficient vector")
        return cls(*(vec / norm))

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    @property
    def lambda1(self) -> complex:
        return self.a + self.b - self.c + self.d

    @property
    def lambda2(self) -> complex:
        return self.a + self.b + self.c - self.d


@dataclass(frozen=True)
class Secret:
    """Single-qubit secret alpha|0> + beta|1>, |alpha|^2+|beta|^2 = 1."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        for name in ("alpha", "beta"):
            z = complex(getattr(self, name))
            if not (np.isfinite(z.real) and np.isfinite(z.imag)):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, z)
        norm2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm2 - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"squared norm {norm2!r} is not 1 within {ATOL_ALGEBRA}")

    @classmethod
    def normalized(cls, alpha, beta) -> "Secret":
        vec = np.array([alpha, beta], dtype=complex)
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            raise ValueError("cannot normalize a zero secret")
        return cls(*(vec / norm))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Case-by-case evaluation of both admissibility condition sets.

    ``residuals`` maps condition keys like "t1.case2.mag_b" to signed misses;
    reality conditions store |Im| or |Re|, magnitude equalities store
    (1/2 - r^2) - |partner|^2, inequalities store r^2 - 1/2. ``boundary``
    flags satisfied magnitude conditions whose partner coefficient is zero,
    which is the closed edge of the region.
    """

    theorem1_cases: tuple[int, ...]
    theorem2_cases: tuple[int, ...]
    revocable: bool
    reconstructible: bool
    residuals: dict[str, float]
    lambda1: complex
    lambda2: complex
    lambda_conditions_ok: bool
    boundary: tuple[str, ...]


# Case tables. "real"/"imag" name the coefficients constrained to be purely
# real / purely imaginary; "mag" pairs (x, r) require |x|^2 = 1/2 - Re(r)^2
# together with Re(r)^2 <= 1/2; "eq" triples (x, y, s) require x = s*y.
_T1_CASES = {
    1: {"real": ("a", "c"), "imag": ("b", "d"), "mag": (("b", "a"), ("d", "c"))},
    2: {"real": ("a", "d"), "imag": ("b", "c"), "mag": (("b", "a"), ("c", "d"))},
    3: {"real": ("b", "c"), "imag": ("a", "d"), "mag": (("a", "b"), ("d", "c"))},
    4: {"real": ("b", "d"), "imag": ("a", "c"), "mag": (("a", "b"), ("c", "d"))},
}

_T2_CASES = {
    1: {**_T1_CASES[1], "eq": (("a", "c", 1), ("b", "d", 1))},
    2: {**_T1_CASES[2], "eq": (("a", "d", -1), ("b", "c", -1))},
    3: {**_T1_CASES[3], "eq": (("b", "c", 1), ("a", "d", 1))},
    4: {**_T1_CASES[4], "eq": (("b", "d", -1), ("a", "c", -1))},
    5: {**_T1_CASES[1], "eq": (("b", "d", -1), ("a", "c", -1))},
    6: {**_T1_CASES[2], "eq": (("b", "c", 1), ("a", "d", 1))},
    7: {**_T1_CASES[3], "eq": (("a", "d", -1), ("b", "c", -1))},
    8: {**_T1_CASES[4], "eq": (("a", "c", 1), ("b", "d", 1))},
}


def build_g_state(p: GParams) -> PureState:
    """Resource state on qubits (A1, A2, B, C).

    Amplitudes: (a+d)/2 on 0000 and 1111, (a-d)/2 on 1100 and 0011,
    (b+c)/2 on 0101 and 1010, (b-c)/2 on 0110 and 1001, zero elsewhere.
    """
    a, b, c, d = p.as_tuple()
    amps = np.zeros(16, dtype=complex)
    amps[0b0000] = amps[0b1111] = (a + d) / 2.0
    amps[0b1100] = amps[0b0011] = (a - d) / 2.0
    amps[0b0101] = amps[0b1010] = (b + c) / 2.0
    amps[0b0110] = amps[0b1001] = (b - c) / 2.0
    return PureState(G_LABELS, amps)


def _case_residuals(p: GParams, spec: dict, prefix: str) -> tuple[dict[str, float], list[str]]:
    vals = {"a": p.a, "b": p.b, "c": p.c, "d": p.d}
    res: dict[str, float] = {}
    boundary: list[str] = []
    for name in spec["real"]:
        res[f"{prefix}.{name}_real"] = abs(vals[name].imag)
    for name in spec["imag"]:
        res[f"{prefix}.{name}_imag"] = abs(vals[name].real)
    for x, r in spec["mag"]:
        re2 = vals[r].real ** 2
        res[f"{prefix}.ineq_{r}"] = re2 - 0.5
        res[f"{prefix}.mag_{x}"] = (0.5 - re2) - abs(vals[x]) ** 2
        if abs(vals[x]) ** 2 <= ATOL_DERIVED and abs(0.5 - re2) <= ATOL_DERIVED:
            boundary.append(f"{prefix}.{x}")
    for x, y, s in spec.get("eq", ()):
        res[f"{prefix}.eq_{x}_{y}"] = abs(vals[x] - s * vals[y])
    return res, boundary


def _case_ok(res: dict[str, float], prefix: str, tol: float) -> bool:
    for key, val in res.items():
        if not key.startswith(prefix):
            continue
        if key.split(".")[-1].startswith("ineq_"):
            if val > tol:
                return False
        elif abs(val) > tol:
            return False
    return True


def _analyze(p: GParams, tol: float) -> AdmissibilityReport:
    residuals: dict[str, float] = {}
    boundary: list[str] = []
    t1: list[int] = []
    for k, spec in _T1_CASES.items():
        prefix = f"t1.case{k}"
        res, edge = _case_residuals(p, spec, prefix)
        residuals.update(res)
        if _case_ok(res, prefix, tol):
            t1.append(k)
            boundary.extend(edge)
    t2: list[int] = []
    for k, spec in _T2_CASES.items():
        prefix = f"t2.case{k}"
        res, edge = _case_residuals(p, spec, prefix)
        residuals.update(res)
        if _case_ok(res, prefix, tol):
            t2.append(k)
            boundary.extend(edge)
    l1, l2 = p.lambda1, p.lambda2
    lam_ok = (
        abs(l1.real) <= tol
        and abs(l2.imag) <= tol
        and abs(abs(l1) ** 2 + abs(l2) ** 2 - 2.0) <= tol
    )
    return AdmissibilityReport(
        theorem1_cases=tuple(t1),
        theorem2_cases=tuple(t2),
        revocable=bool(t1),
        reconstructible=bool(t2),
        residuals=residuals,
        lambda1=l1,
        lambda2=l2,
        lambda_conditions_ok=lam_ok,
        boundary=tuple(dict.fromkeys(boundary)),
    )


def theorem1_check(p: GParams, tol: float = ATOL_DERIVED) -> AdmissibilityReport:
    """Evaluate the revocation condition set (and everything else) for p."""
    return _analyze(p, tol)


def theorem2_check(p: GParams, tol: float = ATOL_DERIVED) -> AdmissibilityReport:
    """Evaluate the reconstruction condition set (and everything else) for p."""
    return _analyze(p, tol)


def _build_case_point(spec: dict, free: tuple[float, ...], signs: tuple[int, ...]) -> GParams:
    """Construct one admissible point for a case from its free real parameters.

    Theorem-1 cases have two free reals (one per magnitude pair); theorem-2
    cases have one because the equality constraints tie the pairs together.
    """
    vals: dict[str, complex] = {}
    if "eq" not in spec:
        (x1, r1), (x2, r2) = spec["mag"]
        vals[r1] = complex(free[0])
        vals[r2] = complex(free[1])
        vals[x1] = 1j * signs[0] * sqrt(max(0.5 - free[0] ** 2, 0.0))
        vals[x2] = 1j * signs[1] * sqrt(max(0.5 - free[1] ** 2, 0.0))
        return GParams(vals["a"], vals["b"], vals["c"], vals["d"])
    r = free[0]
    im = signs[0] * sqrt(max(0.5 - r**2, 0.0))
    (x1, r1), (x2, r2) = spec["mag"]
    vals[r1] = complex(r)
    vals[x1] = 1j * im
    for x, y, s in spec["eq"]:
        if y in vals and x not in vals:
            vals[x] = s * vals[y]
        elif x in vals and y not in vals:
            vals[y] = vals[x] / s
    return GParams(vals["a"], vals["b"], vals["c"], vals["d"])


def sample_params(region: str, count: int, seed: int, case: int | None = None) -> list[GParams]:
    """Deterministically sample normalized parameter points from a region.

    Regions: "unconstrained" (Haar-like random direction), "theorem1",
    "theorem2" and "both" (constructive samples satisfying the predicates).
    When ``case`` is None the constrained samplers cycle through the case
    list round robin, so count=100 on theorem1 yields 25 points per case.
    Every emitted point is re-validated against the requested predicate.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if region not in REGIONS:
        raise ValueError(f"unknown region {region!r}, expected one of {REGIONS}")
    rng = np.random.default_rng(seed)
    out: list[GParams] = []
    for i in range(count):
        if region == "unconstrained":
            vec = rng.normal(size=8).view(complex)
            out.append(GParams.normalized(*vec))
            continue
        if region == "theorem1":
            table, pred = _T1_CASES, "revocable"
        else:
            table, pred = _T2_CASES, "reconstructible"
        k = case if case is not None else sorted(table)[i % len(table)]
        if k not in table:
            raise ValueError(f"unknown case {k} for region {region!r}")
        spec = table[k]
        nfree = 2 if "eq" not in spec else 1
        free = tuple(rng.uniform(-_HALF_SQRT2, _HALF_SQRT2, size=nfree))
        signs = tuple(int(s) for s in rng.integers(0, 2, size=nfree) * 2 - 1)
        point = _build_case_point(spec, free, signs)
        report = _analyze(point, ATOL_ALGEBRA)
        if not getattr(report, pred) or (region == "both" and not report.revocable):
            raise EmptyRegionError(f"sampler produced no valid point for {region} case {k}")
        out.append(point)
    return out


def sample_secrets(count: int, seed: int) -> list[Secret]:
    """Deterministic Haar-like random secrets."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        vec = rng.normal(size=4).view(complex)
        out.append(Secret.normalized(*vec))
    return out
