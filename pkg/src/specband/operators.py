"""Periodic Jacobi operators on the discrete half-line.

An operator J acts on square-summable sequences indexed by sites n = 1, 2, ...

    [J v]_1 = b_1 v_1 + a_1 v_2
    [J v]_n = a_{n-1} v_{n-1} + b_n v_n + a_n v_{n+1}    (n >= 2)

with strictly positive hopping a_n > 0 and real on-site terms b_n, both
q-periodic.  The stored period is always minimal: constructor input whose
coefficient lists repeat a shorter block is reduced, and the original length
is kept in ``reduced_from``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCoefficients, LengthMismatch, NonPositiveHopping


@dataclass(frozen=True)
class JacobiOperator:
    """Immutable periodic Jacobi operator with minimal period ``q``."""

    a: tuple[float, ...]
    b: tuple[float, ...]
    reduced_from: int | None = None

    @property
    def q(self) -> int:
        return len(self.a)

    def a_at(self, n: int) -> float:
        """Hopping coefficient a_n for any site index n >= 1."""
        return self.a[(n - 1) % self.q]

    def b_at(self, n: int) -> float:
        """On-site coefficient b_n for any site index n >= 1."""
        return self.b[(n - 1) % self.q]

    def coefficients(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (a_1..a_count, b_1..b_count) extended periodically."""
        reps = -(-count // self.q)
        aa = np.tile(np.asarray(self.a, dtype=float), reps)[:count]
        bb = np.tile(np.asarray(self.b, dtype=float), reps)[:count]
        return aa, bb


@dataclass
class FiniteState:
    """Complex amplitudes on sites 1..N (index i holds site i+1's value)."""

    values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex).ravel()

    @classmethod
    def delta(cls, n: int, size: int | None = None) -> "FiniteState":
        """Unit amplitude on site n, zeros elsewhere."""
        if n < 1:
            raise ValueError("site indices start at 1")
        vals = np.zeros(size if size is not None else n, dtype=complex)
        vals[n - 1] = 1.0
        return cls(vals)

    @property
    def support(self) -> int:
        return len(self.values)

    def padded(self, size: int) -> np.ndarray:
        out = np.zeros(size, dtype=complex)
        out[: min(size, len(self.values))] = self.values[:size]
        return out

    def inner(self, other: "FiniteState") -> complex:
        """<self, other> with conjugation on the left, padded to common support."""
        size = max(self.support, other.support)
        return complex(np.vdot(self.padded(size), other.padded(size)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def _minimal_block(a: list[float], b: list[float]) -> int:
    """Length of the shortest block whose repetition reproduces (a, b)."""
    q = len(a)
    for d in range(1, q):
        if q % d:
            continue
        if all(a[i] == a[i % d] for i in range(q)) and all(
            b[i] == b[i % d] for i in range(q)
        ):
            return d
    return q


def new_operator(a, b) -> JacobiOperator:
    """Validate coefficients and build an operator with minimal period.

    Parameters
    ----------
    a, b : sequences of numbers, equal length >= 1; every a_n must be > 0.

    Returns
    -------
    JacobiOperator
        If the input lists repeat a shorter block, the stored period is the
        minimal one and ``reduced_from`` records the original length.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    if len(a) == 0 or len(b) == 0:
        raise EmptyCoefficients("coefficient lists must be nonempty")
    if len(a) != len(b):
        raise LengthMismatch(f"len(a)={len(a)} != len(b)={len(b)}")
    if any(not np.isfinite(x) for x in a + b):
        raise ValueError("coefficients must be finite")
    for x in a:
        if x <= 0.0:
            raise NonPositiveHopping(f"hopping coefficient {x} is not positive")
    d = _minimal_block(a, b)
    if d < len(a):
        return JacobiOperator(tuple(a[:d]), tuple(b[:d]), reduced_from=len(a))
    return JacobiOperator(tuple(a), tuple(b))


def apply(J: JacobiOperator, v: FiniteState) -> FiniteState:
    """Apply J to a finitely supported state.

    The output support is one site longer than the input: the hopping term
    a_N v_N lands on site N+1.
    """
    n = v.support
    if n == 0:
        return FiniteState()
    aa, bb = J.coefficients(n + 1)
    out = np.zeros(n + 1, dtype=complex)
    out[:n] = bb[:n] * v.values
    out[1:] += aa[:n] * v.values          # a_{n-1} v_{n-1} contribution at site n
    out[:n] += aa[:n] * v.padded(n + 1)[1:]  # a_n v_{n+1} contribution at site n
    return FiniteState(out)


def truncate(J: JacobiOperator, size: int) -> np.ndarray:
    """Dense symmetric tridiagonal truncation onto sites 1..size."""
    if size < 1:
        raise ValueError("truncation size must be >= 1")
    aa, bb = J.coefficients(size)
    m = np.diag(bb)
    if size > 1:
        m += np.diag(aa[: size - 1], 1) + np.diag(aa[: size - 1], -1)
    return m


def tridiag_bands(J: JacobiOperator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """(diagonal, off-diagonal) arrays of the size-N truncation, no dense matrix."""
    aa, bb = J.coefficients(size)
    return bb, aa[: size - 1]


def norm_bound(J: JacobiOperator) -> float:
    """Upper bound max|b_n| + 2 max a_n on the operator norm."""
    return float(max(abs(x) for x in J.b) + 2.0 * max(J.a))


def config_dict(J: JacobiOperator) -> dict:
    """Canonical JSON-ready form of the stored (minimal-period) coefficients."""
    return {"a": [float(x) for x in J.a], "b": [float(x) for x in J.b]}


def config_hash(J: JacobiOperator) -> str:
    """Short deterministic hash identifying the operator's coefficients."""
    blob = json.dumps(config_dict(J), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def load_operator(path: str) -> JacobiOperator:
    """Read an operator config file: a JSON object {"a": [...], "b": [...]}."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "a" not in data or "b" not in data:
        raise ValueError(f"{path}: expected a JSON object with keys 'a' and 'b'")
    return new_operator(data["a"], data["b"])
