"""Empirical decay rates of the evolved states.

Norms of psi(t) over a geometric time grid are fitted to a power law
t^slope by least squares in log-log coordinates; the fitted slope is then
compared against the rate predicted by the stationary-phase audit of the
band functions (global sup norm), the universal local rate -1/2 for the
n-weighted sup norm, and conservation (slope 0) for the l2 norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientPoints, NonPositiveNorm, RangeTooSmall
from .measure import SpectralData, spectral_data
from .operators import FiniteState, JacobiOperator
from .propagator import EvolutionResult, StateSnapshot, evolve_grid
from .spectrum import stationary_audit

NORM_KINDS = ("sup", "wsup", "l2")
SLOPE_MARGIN = 0.07
L2_MARGIN = 0.02


def state_norm(snapshot: StateSnapshot, kind: str) -> float:
    """sup = max_n |psi_n|; wsup = max_n |psi_n| / n; l2 = euclidean norm.

    The site range must cover the ballistic cone (norm_bound * t + 64),
    otherwise the sup norms would silently miss the wavefront.
    """
    size = snapshot.values.shape[0]
    needed = snapshot.norm_bound * abs(snapshot.t) + 64
    if size < needed:
        raise RangeTooSmall(f"{size} sites but the cone at t={snapshot.t} needs {needed:.0f}")
    mags = np.abs(snapshot.values)
    if kind == "sup":
        return float(np.max(mags))
    if kind == "wsup":
        sites = np.arange(1, size + 1, dtype=float)
        return float(np.max(mags / sites))
    if kind == "l2":
        return float(np.linalg.norm(mags))
    raise ValueError(f"unknown norm kind {kind!r}")


def norm_series(result: EvolutionResult, kind: str) -> np.ndarray:
    return np.asarray(
        [state_norm(result.snapshot(i), kind) for i in range(len(result.times))]
    )


@dataclass
class FitResult:
    """Least-squares power-law fit log norm = slope * log t + intercept."""

    slope: float
    intercept: float
    stderr: float
    half_width: float            # 1.96 * stderr
    n_points: int
    t_min: float


def fit_exponent(times, norms, t_min: float = 20.0) -> FitResult:
    """Fit t^slope through the samples with t >= t_min."""
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    mask = times >= t_min
    t = times[mask]
    v = norms[mask]
    if t.size < 8:
        raise InsufficientPoints(f"{t.size} samples at t >= {t_min}; need at least 8")
    if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
        raise NonPositiveNorm("power-law fit needs positive finite norms")
    x = np.log(t)
    y = np.log(v)
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (slope * x + intercept)
    dof = max(t.size - 2, 1)
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    return FitResult(
        slope=slope,
        intercept=intercept,
        stderr=stderr,
        half_width=1.96 * stderr,
        n_points=int(t.size),
        t_min=float(t_min),
    )


@dataclass
class DecayReport:
    """One fitted norm together with its predicted rate and verdict."""

    kind: str
    fit: FitResult
    predicted: float | None
    passed: bool | None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "slope": self.fit.slope,
            "half_width": self.fit.half_width,
            "stderr": self.fit.stderr,
            "n_points": self.fit.n_points,
            "t_min": self.fit.t_min,
            "predicted": "unclassified" if self.predicted is None else self.predicted,
            "passed": self.passed,
        }


@dataclass
class DecayExperiment:
    evolution: EvolutionResult
    norms: dict[str, np.ndarray]
    reports: tuple[DecayReport, ...]


def judge(kind: str, fit: FitResult, predicted: float | None) -> bool | None:
    """Verdicts are one-sided: measured decay at least as fast as predicted.

    l2 is conserved instead, so there the check is two-sided around zero.
    """
    if kind == "l2":
        return abs(fit.slope) <= L2_MARGIN
    if predicted is None:
        return None
    return fit.slope <= predicted + SLOPE_MARGIN


def decay_experiment(
    J: JacobiOperator,
    u: FiniteState,
    times,
    kinds=NORM_KINDS,
    n_max: int | None = None,
    method: str = "spectral",
    t_min: float = 20.0,
    data: SpectralData | None = None,
    workers: int | None = None,
) -> DecayExperiment:
    """Evolve once over the grid, then fit every requested norm kind."""
    if data is None:
        data = spectral_data(J)
    result = evolve_grid(
        J, u, times, n_max=n_max, method=method, data=data, workers=workers
    )
    audit = stationary_audit(data.monodromy, data.bands)
    predictions: dict[str, float | None] = {
        "sup": audit.predicted_global,
        "wsup": audit.predicted_local,
        "l2": 0.0,
    }
    norms = {kind: norm_series(result, kind) for kind in kinds}
    reports = []
    for kind in kinds:
        fit = fit_exponent(result.times, norms[kind], t_min=t_min)
        predicted = predictions[kind]
        reports.append(
            DecayReport(kind=kind, fit=fit, predicted=predicted, passed=judge(kind, fit, predicted))
        )
    return DecayExperiment(evolution=result, norms=norms, reports=tuple(reports))


def geometric_times(start: float, stop: float, count: int) -> np.ndarray:
    """Geometric grid used by the command-line tools."""
    if not (start > 0 and stop > start and count >= 2):
        raise ValueError("need 0 < start < stop and count >= 2")
    return np.geomspace(start, stop, count)
