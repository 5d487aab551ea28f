"""Band structure, point spectrum, and band phase functions.

The continuous spectrum of a period-q operator is Delta^{-1}([-2, 2]): q bands
whose 2q edges are the roots of Delta(x) -+ 2.  Roots are located by the
colleague matrix of the Chebyshev interpolant and polished by a
multiplicity-robust Newton iteration, so touching bands (double roots) are
resolved cleanly and clustered.

On each band the discriminant is monotone and Theta(x) = -arccos(Delta(x)/2)
traverses [-pi, 0]; its inverse k_j(phi) = Delta_j^{-1}(2 cos phi) is the band
dispersion.  Derivatives of k_j follow from differentiating
Delta(k_j(phi)) = 2 cos phi:

    Delta' k'                                  = -2 sin phi
    Delta'' (k')^2 + Delta' k''                = -2 cos phi
    Delta''' (k')^3 + 3 Delta'' k' k'' + Delta' k''' = 2 sin phi

with limits at gapped edges (k' = 0, k'' = -2 cos(phi)/Delta', k''' = 0) and,
at an edge where two bands touch (Delta' = 0 there),

    k'(phi*) = +- sqrt(-2 cos(phi*) / Delta''),
    k''(phi*) = -Delta''' [k']^2 / (3 Delta'').
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DerivativeSingularity,
    EigenvalueInBand,
    OutsideSpectrum,
    RootCountMismatch,
)
from .transfer import MonodromyData

_TOUCH_TOL = 1e-7       # cluster width for band-touching double roots
_EDGE_CLAMP = 1e-10     # how far beyond an edge still counts as "on the band"
_ENDPOINT_PHI = 1e-12   # phi this close to -pi or 0 is treated as the endpoint


@dataclass(frozen=True)
class BandStructure:
    """Edges, bands, gaps, and critical points of the continuous spectrum."""

    edges: np.ndarray                 # sorted, length 2q (touching edges equal)
    critical_points: np.ndarray       # q - 1 zeros of Delta'
    endpoint_gapped: tuple[bool, ...] # per edge, length 2q
    orientation: tuple[int, ...]      # per band: sign of Delta' inside

    @property
    def q(self) -> int:
        return len(self.edges) // 2

    @property
    def bands(self) -> list[tuple[float, float]]:
        e = self.edges
        return [(float(e[2 * j]), float(e[2 * j + 1])) for j in range(self.q)]

    @property
    def gaps(self) -> list[tuple[float, float]]:
        """Internal gaps (possibly zero width at touchings)."""
        e = self.edges
        return [(float(e[2 * j + 1]), float(e[2 * j + 2])) for j in range(self.q - 1)]

    def locate(self, x: float, tol: float = _EDGE_CLAMP) -> int | None:
        """1-based index of a band containing x (within tol), else None."""
        for j, (lo, hi) in enumerate(self.bands, start=1):
            if lo - tol <= x <= hi + tol:
                return j
        return None


@dataclass
class EigenvalueInfo:
    """A point-spectrum eigenvalue in a gap; weight is filled by the measure."""

    value: float
    gap_index: int
    weight: float | None = None


def _real_roots(cheb, radius: float) -> np.ndarray:
    """Real roots of a Chebyshev-form polynomial inside [-radius, radius]."""
    coef = cheb.coef
    scale = np.max(np.abs(coef))
    if scale == 0.0:
        return np.zeros(0)
    trimmed = cheb.trim(tol=scale * 1e-12)
    if len(trimmed.coef) <= 1:
        return np.zeros(0)
    roots = trimmed.roots()
    keep = np.abs(roots.imag) <= 1e-6 * max(1.0, radius)
    real = np.real(roots[keep])
    return real[(real >= -radius - 1e-9) & (real <= radius + 1e-9)]


def _polish_root(f, f1, f2, x0: float, radius: float) -> float:
    """Newton on u = f/f' (multiplicity-robust), seeded from a colleague root."""
    x = float(x0)
    for _ in range(60):
        g = f(x)
        g1 = f1(x)
        g2 = f2(x)
        denom = g1 * g1 - g * g2
        if denom == 0.0:
            break
        step = g * g1 / denom
        if abs(step) > 0.5 * radius:
            step = math.copysign(0.5 * radius, step)
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return x


def band_structure(M: MonodromyData) -> BandStructure:
    """Locate the 2q band edges and q-1 critical points of Delta."""
    q = M.operator.q
    radius = M.radius
    delta_cheb = M.cheb["delta"]
    d1 = delta_cheb.deriv(1)
    d2 = delta_cheb.deriv(2)
    d3 = delta_cheb.deriv(3) if q >= 3 else (lambda x: 0.0)

    roots = []
    for sigma in (2.0, -2.0):
        seeds = _real_roots(delta_cheb - sigma, radius)
        roots.extend(
            _polish_root(lambda x, s=sigma: M.delta(x) - s, d1, d2, r, radius)
            for r in seeds
        )
    if len(roots) != 2 * q:
        raise RootCountMismatch(
            f"expected {2 * q} band edges, found {len(roots)}"
        )

    edges = np.sort(np.asarray(roots))
    # snap touching pairs (double roots) to their mean
    i = 0
    while i < len(edges) - 1:
        if edges[i + 1] - edges[i] <= _TOUCH_TOL * max(1.0, radius):
            mean = 0.5 * (edges[i] + edges[i + 1])
            edges[i] = edges[i + 1] = mean
            i += 2
        else:
            i += 1

    # sanity: |Delta| <= 2 on band midpoints, >= 2 on open gap midpoints
    for j in range(q):
        mid = 0.5 * (edges[2 * j] + edges[2 * j + 1])
        if abs(M.delta(mid)) > 2.0 + 1e-9:
            raise RootCountMismatch(f"band {j + 1} midpoint has |Delta| > 2")
    for j in range(q - 1):
        lo, hi = edges[2 * j + 1], edges[2 * j + 2]
        if hi - lo > _TOUCH_TOL and abs(M.delta(0.5 * (lo + hi))) < 2.0 - 1e-9:
            raise RootCountMismatch(f"gap {j + 1} midpoint has |Delta| < 2")

    if q > 1:
        seeds = _real_roots(d1, radius)
        crit = np.sort([_polish_root(M.delta_d1, d2, d3, r, radius) for r in seeds])
        if len(crit) != q - 1:
            raise RootCountMismatch(
                f"expected {q - 1} critical points, found {len(crit)}"
            )
        for j in range(q - 1):
            if not (edges[2 * j + 1] - 1e-7 <= crit[j] <= edges[2 * j + 2] + 1e-7):
                raise RootCountMismatch(
                    f"critical point {crit[j]} outside gap {j + 1}"
                )
    else:
        crit = np.zeros(0)

    gapped = [True] * (2 * q)
    for j in range(q - 1):
        if edges[2 * j + 2] - edges[2 * j + 1] <= _TOUCH_TOL * max(1.0, radius):
            gapped[2 * j + 1] = gapped[2 * j + 2] = False

    orientation = []
    for j in range(q):
        mid = 0.5 * (edges[2 * j] + edges[2 * j + 1])
        orientation.append(1 if M.delta_d1(mid) > 0 else -1)

    return BandStructure(
        edges=edges,
        critical_points=np.asarray(crit, dtype=float),
        endpoint_gapped=tuple(gapped),
        orientation=tuple(orientation),
    )


def point_spectrum(M: MonodromyData, B: BandStructure) -> list[EigenvalueInfo]:
    """Eigenvalues of the half-line operator: roots of t21 with |t11| < 1.

    Every root of t21 lies in a closed spectral gap; roots with |t11| >= 1
    correspond to no square-summable eigenvector and are discarded.
    """
    t21_cheb = M.cheb["t21"]
    d1 = t21_cheb.deriv(1)
    d2 = t21_cheb.deriv(2)
    seeds = _real_roots(t21_cheb, M.radius)
    found: list[EigenvalueInfo] = []
    for seed in seeds:
        e = _polish_root(M.t21, d1, d2, seed, M.radius)
        if abs(M.t11(e)) >= 1.0 - 1e-9:
            continue
        j = B.locate(e, tol=-1e-9)  # strict interior test
        if j is not None:
            lo, hi = B.bands[j - 1]
            depth = min(e - lo, hi - e)
            if depth > 1e-9:
                raise EigenvalueInBand(
                    f"t21 root {e} sits {depth:.2e} inside band {j}"
                )
        gap_index = None
        for g, (lo, hi) in enumerate(B.gaps, start=1):
            if lo - 1e-9 <= e <= hi + 1e-9:
                gap_index = g
                break
        if gap_index is None:
            raise EigenvalueInBand(f"t21 root {e} lies in no spectral gap")
        found.append(EigenvalueInfo(value=float(e), gap_index=gap_index))
    found.sort(key=lambda info: info.value)
    return found


def theta(M: MonodromyData, B: BandStructure, x: float) -> float:
    """Band phase Theta(x) = -arccos(Delta(x)/2) in [-pi, 0].

    x must lie on a band (up to a 1e-10 clamp beyond the edges).
    """
    x = float(x)
    j = B.locate(x)
    if j is None:
        raise OutsideSpectrum(f"{x} is not on any spectral band")
    lo, hi = B.bands[j - 1]
    x = min(max(x, lo), hi)
    half = np.clip(M.delta(x) / 2.0, -1.0, 1.0)
    return float(-np.arccos(half))


@dataclass
class PhaseFunction:
    """Dispersion k_j(phi) of band j and its first three derivatives.

    k_j inverts the band phase: Delta(k_j(phi)) = 2 cos phi for
    phi in [-pi, 0], with k_j strictly monotone (direction = band
    orientation).  Evaluators accept scalars or arrays.
    """

    M: MonodromyData = field(repr=False)
    j: int
    lo: float
    hi: float
    orientation: int
    gapped_at_mpi: bool   # is the phi = -pi edge (where Delta = -2) gapped?
    gapped_at_zero: bool  # is the phi = 0 edge (where Delta = +2) gapped?

    def _edge_for(self, at_zero: bool) -> float:
        """Band edge reached at phi = 0 (Delta=+2) or phi = -pi (Delta=-2)."""
        if self.orientation > 0:
            return self.hi if at_zero else self.lo
        return self.lo if at_zero else self.hi

    @staticmethod
    def _check_domain(phi: np.ndarray) -> np.ndarray:
        if np.any(phi < -np.pi - 1e-9) or np.any(phi > 1e-9):
            raise ValueError("phase arguments must lie in [-pi, 0]")
        return np.clip(phi, -np.pi, 0.0)

    def k(self, phi):
        """Solve Delta(x) = 2 cos phi on the band (safeguarded Newton)."""
        scalar = np.ndim(phi) == 0
        phi = self._check_domain(np.atleast_1d(np.asarray(phi, dtype=float)))
        target = 2.0 * np.cos(phi)
        lo = np.full_like(phi, self.lo)
        hi = np.full_like(phi, self.hi)
        x = 0.5 * (lo + hi)
        sgn = float(self.orientation)
        for _ in range(120):
            g = self.M.delta(x) - target
            if np.max(np.abs(g)) <= 1e-14:
                break
            too_high = sgn * g > 0
            hi = np.where(too_high, x, hi)
            lo = np.where(too_high, lo, x)
            d = self.M.delta_d1(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(d != 0.0, g / np.where(d == 0.0, 1.0, d), np.inf)
            x_new = x - step
            bad = ~np.isfinite(x_new) | (x_new < lo) | (x_new > hi)
            x_new = np.where(bad, 0.5 * (lo + hi), x_new)
            if np.allclose(x_new, x, rtol=0.0, atol=1e-16 * max(1.0, self.M.radius)):
                x = x_new
                break
            x = x_new
        # exact endpoints: pin to the edge itself
        x = np.where(np.abs(phi + np.pi) <= _ENDPOINT_PHI, self._edge_for(False), x)
        x = np.where(np.abs(phi) <= _ENDPOINT_PHI, self._edge_for(True), x)
        return float(x[0]) if scalar else x

    def _masks(self, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        at_mpi = np.abs(phi + np.pi) <= _ENDPOINT_PHI
        at_zero = np.abs(phi) <= _ENDPOINT_PHI
        return at_mpi, at_zero

    def k1(self, phi):
        """dk/dphi; zero at gapped edges, sqrt limit at a touching edge."""
        scalar = np.ndim(phi) == 0
        phi = self._check_domain(np.atleast_1d(np.asarray(phi, dtype=float)))
        x = self.k(phi)
        at_mpi, at_zero = self._masks(phi)
        interior = ~(at_mpi | at_zero)
        out = np.zeros_like(phi)
        d1 = self.M.delta_d1(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[interior] = -2.0 * np.sin(phi[interior]) / d1[interior]
        for mask, gapped, cosval in (
            (at_mpi, self.gapped_at_mpi, -1.0),
            (at_zero, self.gapped_at_zero, 1.0),
        ):
            if not np.any(mask):
                continue
            if gapped:
                out[mask] = 0.0
            else:
                d2 = self.M.delta_d2(x[mask])
                out[mask] = self.orientation * np.sqrt(
                    np.maximum(0.0, -2.0 * cosval / d2)
                )
        return float(out[0]) if scalar else out

    def k2(self, phi):
        """d2k/dphi2 via the second derivative identity (with edge limits)."""
        scalar = np.ndim(phi) == 0
        phi = self._check_domain(np.atleast_1d(np.asarray(phi, dtype=float)))
        x = self.k(phi)
        v1 = np.atleast_1d(self.k1(phi))
        at_mpi, at_zero = self._masks(phi)
        ungapped = (at_mpi & (not self.gapped_at_mpi)) | (at_zero & (not self.gapped_at_zero))
        out = np.zeros_like(phi)
        reg = ~ungapped
        d1 = self.M.delta_d1(x)
        d2 = self.M.delta_d2(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[reg] = (-2.0 * np.cos(phi[reg]) - d2[reg] * v1[reg] ** 2) / d1[reg]
        if np.any(ungapped):
            d3 = self.M.delta_d3(x[ungapped])
            out[ungapped] = -d3 * v1[ungapped] ** 2 / (3.0 * d2[ungapped])
        return float(out[0]) if scalar else out

    def k3(self, phi):
        """d3k/dphi3; exactly zero at gapped edges, no limit at a touching."""
        scalar = np.ndim(phi) == 0
        phi = self._check_domain(np.atleast_1d(np.asarray(phi, dtype=float)))
        at_mpi, at_zero = self._masks(phi)
        ungapped = (at_mpi & (not self.gapped_at_mpi)) | (at_zero & (not self.gapped_at_zero))
        if np.any(ungapped):
            raise DerivativeSingularity(
                f"k''' of band {self.j} has no implemented limit at a touching edge"
            )
        x = self.k(phi)
        v1 = np.atleast_1d(self.k1(phi))
        v2 = np.atleast_1d(self.k2(phi))
        out = np.zeros_like(phi)
        interior = ~(at_mpi | at_zero)
        d1 = self.M.delta_d1(x)
        d2 = self.M.delta_d2(x)
        d3 = self.M.delta_d3(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = (
                2.0 * np.sin(phi[interior])
                - d3[interior] * v1[interior] ** 3
                - 3.0 * d2[interior] * v1[interior] * v2[interior]
            )
            out[interior] = num / d1[interior]
        # at gapped endpoints every numerator term vanishes: k''' = 0 exactly
        return float(out[0]) if scalar else out

    @cached_property
    def speed_bound(self) -> float:
        """max |k'| over the band (dense-grid estimate, used for panel counts)."""
        grid = np.linspace(-np.pi, 0.0, 1025)
        return float(np.max(np.abs(self.k1(grid))))


def phase_function(M: MonodromyData, B: BandStructure, j: int) -> PhaseFunction:
    """Phase function of band j (1-based)."""
    if not 1 <= j <= B.q:
        raise ValueError(f"band index {j} outside 1..{B.q}")
    lo, hi = B.bands[j - 1]
    o = B.orientation[j - 1]
    g_left = B.endpoint_gapped[2 * (j - 1)]
    g_right = B.endpoint_gapped[2 * (j - 1) + 1]
    if o > 0:
        gapped_at_mpi, gapped_at_zero = g_left, g_right
    else:
        gapped_at_mpi, gapped_at_zero = g_right, g_left
    return PhaseFunction(
        M=M,
        j=j,
        lo=lo,
        hi=hi,
        orientation=o,
        gapped_at_mpi=gapped_at_mpi,
        gapped_at_zero=gapped_at_zero,
    )


@dataclass
class BandAudit:
    """Stationary-point inventory of one band's dispersion."""

    j: int
    interval: tuple[float, float]
    gapped: tuple[bool, bool]          # at phi = -pi, at phi = 0
    t2: list[float]                    # zeros of k'' in [-pi, 0]
    t3: list[float]                    # zeros of k''' in [-pi, 0]
    min_abs_k3_on_t2: float | None     # degeneracy margin
    c_est: float | None                # min over phi of sum_{l=2}^{q} |k^(l)|


@dataclass
class AuditReport:
    """Dispersive-decay classification of an operator's band structure."""

    q: int
    bands: list[BandAudit]
    nondegenerate: bool
    evenq_all_gapped: bool
    predicted_local: float
    predicted_global: float | None
    c_est: float | None

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "bands": [
                {
                    "band": ba.j,
                    "interval": [ba.interval[0], ba.interval[1]],
                    "gapped": list(ba.gapped),
                    "t2": ba.t2,
                    "t3": ba.t3,
                    "min_abs_k3_on_t2": ba.min_abs_k3_on_t2,
                    "c_est": ba.c_est,
                }
                for ba in self.bands
            ],
            "nondegenerate": self.nondegenerate,
            "evenq_all_gapped": self.evenq_all_gapped,
            "predicted_local_exponent": self.predicted_local,
            "predicted_global_exponent": (
                self.predicted_global
                if self.predicted_global is not None
                else "unclassified"
            ),
            "c_est": self.c_est,
        }


_AUDIT_GRID = 4096


def _sign_change_roots(f, grid: np.ndarray, vals: np.ndarray) -> list[float]:
    """Bisection roots of f at each sign change of vals over grid, to 1e-10."""
    roots = []
    for i in range(len(grid) - 1):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(float(grid[i]))
            continue
        if va * vb >= 0.0:
            continue
        a, b = float(grid[i]), float(grid[i + 1])
        fa = va
        while b - a > 1e-10:
            m = 0.5 * (a + b)
            fm = f(m)
            if fa * fm <= 0.0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    return roots


def _fd_high_order(f, phi: np.ndarray, order: int, h: float = 1e-3) -> np.ndarray:
    """Central finite differences of f, applied (order) times."""
    if order == 0:
        return f(phi)
    lower = lambda p: _fd_high_order(f, p, order - 1, h)
    return (lower(phi + h) - lower(phi - h)) / (2.0 * h)


def stationary_audit(M: MonodromyData, B: BandStructure) -> AuditReport:
    """Classify dispersive decay from stationary points of each band phase.

    T2 collects zeros of k'' (interior sign changes plus endpoint zeros by
    value), T3 likewise for k'''.  Nondegeneracy (|k'''| > 1e-6 at every T2
    root) predicts the sharp global exponent -1/3; the even-q all-gapped
    fallback predicts -1/(q+1); anything else is unclassified.
    """
    q = B.q
    grid = np.linspace(-np.pi, 0.0, _AUDIT_GRID)
    step = grid[1] - grid[0]
    bands: list[BandAudit] = []
    all_nondegenerate = True
    evenq_all_gapped = q % 2 == 0 and all(B.endpoint_gapped)

    for j in range(1, q + 1):
        P = phase_function(M, B, j)
        inner = grid.copy()
        if not P.gapped_at_mpi:
            inner[0] = grid[0] + 1e-3 * step
        if not P.gapped_at_zero:
            inner[-1] = grid[-1] - 1e-3 * step

        k2_vals = P.k2(grid)
        t2 = _sign_change_roots(P.k2, grid, k2_vals)
        for endpoint, val in ((-np.pi, k2_vals[0]), (0.0, k2_vals[-1])):
            if abs(val) < 1e-9 and not any(abs(r - endpoint) < 1e-8 for r in t2):
                t2.append(endpoint)
        t2 = sorted(r for r in t2 if abs(P.k2(r)) < 1e-7)

        k3_vals = P.k3(inner)
        t3 = _sign_change_roots(P.k3, inner, k3_vals)
        for endpoint, gapped in ((-np.pi, P.gapped_at_mpi), (0.0, P.gapped_at_zero)):
            if gapped and abs(P.k3(endpoint)) < 1e-9:
                if not any(abs(r - endpoint) < 1e-8 for r in t3):
                    t3.append(endpoint)
        t3 = sorted(t3)

        min_k3 = min((abs(P.k3(r)) for r in t2), default=None)
        if min_k3 is not None and min_k3 <= 1e-6:
            all_nondegenerate = False

        c_est = None
        if evenq_all_gapped:
            margin = np.abs(P.k2(inner)) + (np.abs(P.k3(inner)) if q >= 3 else 0.0)
            for order in range(4, q + 1):
                extra = _fd_high_order(P.k3, np.clip(inner, -np.pi + 0.01, -0.01),
                                       order - 3)
                margin = margin + np.abs(extra)
            c_est = float(np.min(margin))

        bands.append(
            BandAudit(
                j=j,
                interval=B.bands[j - 1],
                gapped=(P.gapped_at_mpi, P.gapped_at_zero),
                t2=[float(r) for r in t2],
                t3=[float(r) for r in t3],
                min_abs_k3_on_t2=min_k3,
                c_est=c_est,
            )
        )

    if all_nondegenerate:
        predicted_global = -1.0 / 3.0
    elif evenq_all_gapped:
        predicted_global = -1.0 / (q + 1)
    else:
        predicted_global = None

    c_est_all = min(
        (ba.c_est for ba in bands if ba.c_est is not None), default=None
    )
    return AuditReport(
        q=q,
        bands=bands,
        nondegenerate=all_nondegenerate,
        evenq_all_gapped=evenq_all_gapped,
        predicted_local=-0.5,
        predicted_global=predicted_global,
        c_est=c_est_all,
    )
