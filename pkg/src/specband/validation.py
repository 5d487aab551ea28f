"""Cross-checking invariant suite behind the `validate` subcommand.

Every check pits one implementation route against an independent one
(recurrences vs closed forms, quadrature vs operator powers, band-wise
phase-space evolution vs the truncated Chebyshev oracle), so a silent bug in
either route shows up as a disagreement here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecbandError
from .measure import gram_matrix, moment, moment_oracle, spectral_data
from .operators import FiniteState, JacobiOperator, norm_bound
from .polynomials import poly_closed_form, poly_recurrence
from .propagator import evolve_oracle, evolve_spectral, bound_state_vector, project_continuous
from .transfer import power_via_rho, transfer_entries


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _interior_points(data, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random points strictly inside the bands, biased away from the edges."""
    pts = []
    bands = data.bands.bands
    for _ in range(count):
        lo, hi = bands[rng.integers(0, len(bands))]
        u = rng.uniform(0.02, 0.98)
        pts.append(lo + u * (hi - lo))
    return np.asarray(pts)


def validation_suite(J: JacobiOperator, seed: int = 0) -> list[CheckResult]:
    """Run the full invariant table for one operator."""
    rng = np.random.default_rng(seed)
    checks: list[CheckResult] = []

    def record(name: str, fn) -> None:
        try:
            passed, detail = fn()
        except SpecbandError as err:
            passed, detail = False, f"{type(err).__name__}: {err}"
        checks.append(CheckResult(name=name, passed=bool(passed), detail=detail))

    data = spectral_data(J)
    radius = norm_bound(J)
    q = J.q

    def det_check():
        x = rng.uniform(-radius, radius, size=40)
        t11, t12, t21, t22 = transfer_entries(J, 2 * q + 3, x)
        scale = np.maximum(1.0, np.abs(t11 * t22) + np.abs(t12 * t21))
        err = float(np.max(np.abs(t11 * t22 - t12 * t21 - 1.0) / scale))
        return err <= 1e-10, f"max relative |det - 1| = {err:.2e}"

    def power_check():
        x = _interior_points(data, 50, rng)
        worst = 0.0
        for s in (1, 2, 3, 6):
            P = power_via_rho(data.monodromy, s, x)
            t11, t12, t21, t22 = transfer_entries(J, s * q, x)
            direct = np.array([[t11, t12], [t21, t22]])
            scale = np.maximum(np.abs(direct), 1.0)
            worst = max(worst, float(np.max(np.abs(P - direct) / scale)))
        return worst <= 1e-8, f"max relative entry error = {worst:.2e}"

    def closed_form_check():
        x = _interior_points(data, 50, rng)
        worst = 0.0
        table = poly_recurrence(J, x, 4 * q + 5)
        for n in range(4 * q + 6):
            direct = poly_closed_form(J, data.monodromy, x, n)
            scale = np.maximum(np.abs(table[n]), 1.0)
            worst = max(worst, float(np.max(np.abs(direct - table[n]) / scale)))
        return worst <= 1e-8, f"max relative error = {worst:.2e}"

    def moment_check():
        worst = 0.0
        for k in range(21):
            exact = moment_oracle(J, k)
            quad = moment(data.measure, k)
            worst = max(worst, abs(quad - exact) / max(1.0, abs(exact)))
        return worst <= 1e-8, f"max relative moment error = {worst:.2e}"

    def gram_check():
        G = gram_matrix(data.measure, 25)
        err = float(np.max(np.abs(G - np.eye(26))))
        return err <= 1e-7, f"max |<p_n, p_m> - delta| = {err:.2e}"

    def agreement_check():
        u = FiniteState.delta(1)
        worst = 0.0
        for t in (1.0, 10.0):
            n_max = int(np.ceil(radius * t)) + 64
            a = evolve_spectral(J, data.measure, u, t, n_max)
            b = evolve_oracle(J, u, t, n_max)
            worst = max(worst, float(np.max(np.abs(a.values - b.values))))
        return worst <= 1e-6, f"max site disagreement = {worst:.2e}"

    def unitarity_check():
        u = FiniteState.delta(1)
        pc = project_continuous(J, data.measure, u)
        t = 10.0
        n_big = int(np.ceil(radius * t)) + 400
        psi = evolve_spectral(J, data.measure, u, t, n_big)
        drift = abs(psi.norm() - pc.norm()) / pc.norm()
        ortho = 0.0
        for info in data.eigenvalues:
            v = bound_state_vector(J, info.value, info.weight)
            size = max(v.support, psi.support)
            ortho = max(ortho, abs(np.vdot(v.padded(size), psi.padded(size))))
        ok = drift <= 1e-7 and ortho <= 1e-7
        return ok, f"norm drift = {drift:.2e}, bound-state overlap = {ortho:.2e}"

    record("transfer determinant = 1", det_check)
    record("monodromy power identity", power_check)
    record("polynomial closed form vs recurrence", closed_form_check)
    record("measure moments vs operator powers", moment_check)
    record("orthonormality (n, m <= 25)", gram_check)
    record("spectral vs oracle evolution (t = 1, 10)", agreement_check)
    record("norm conservation and bound-state orthogonality", unitarity_check)
    return checks


def format_table(checks: list[CheckResult]) -> str:
    width = max(len(c.name) for c in checks)
    lines = []
    for c in checks:
        status = "pass" if c.passed else "FAIL"
        lines.append(f"{c.name.ljust(width)}  {status}  {c.detail}")
    return "\n".join(lines)
