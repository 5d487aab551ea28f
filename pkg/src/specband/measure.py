"""Spectral measure of the first site vector.

The measure dmu splits into an absolutely continuous part on the bands with
density

    w(x) = sqrt(4 - Delta(x)^2) / (2 pi |t21(x)|)

and point masses at the gap eigenvalues with weight 1 / sum_n p_n(E)^2.  The
1/(2 pi) normalization is pinned by the zeroth moment: integrating w over the
bands plus the point masses gives exactly 1, and more generally the k-th
moment of dmu equals the matrix element (J^k)_{11}.

Band integrals are evaluated in the phase variable: substituting x = k_j(phi)
turns w(x) dx into (2/pi) sin^2(phi) / (|t21| |Delta'|) dphi, which removes
the square-root vanishing at gapped edges and leaves a smooth integrand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DivergentNormSum, OutsideSpectrum
from .operators import JacobiOperator
from .polynomials import poly_recurrence
from .spectrum import BandStructure, EigenvalueInfo, PhaseFunction, phase_function
from .transfer import MonodromyData, transfer_entries


def density(M: MonodromyData, B: BandStructure, x):
    """Continuous density w(x) on the bands (0 at edges); vectorized over x."""
    scalar = np.ndim(x) == 0
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    clamped = np.empty_like(pts)
    for i, xi in enumerate(pts):
        j = B.locate(xi)
        if j is None:
            raise OutsideSpectrum(f"{xi} is not on any spectral band")
        lo, hi = B.bands[j - 1]
        clamped[i] = min(max(xi, lo), hi)
    top = np.sqrt(np.maximum(0.0, 4.0 - M.delta(clamped) ** 2))
    t21 = np.abs(M.t21(clamped))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(top == 0.0, 0.0, top / (2.0 * np.pi * t21))
    return float(out[0]) if scalar else out


def point_mass(J: JacobiOperator, energy: float) -> float:
    """Weight 1 / sum_{n>=0} p_n(E)^2 of an eigenvalue E.

    At a gap eigenvalue t21(E) = 0, so the transfer matrix over one period is
    triangular and the decaying solution replays itself scaled by t11(E) each
    period: p_{sq+r}(E) = t11(E)^s p_r(E) exactly.  The norm sum collapses to
    the geometric series

        sum_n p_n(E)^2 = (sum_{r<q} p_r(E)^2) / (1 - t11(E)^2),

    which avoids running the recurrence into its exponential instability.
    Raises DivergentNormSum when |t11(E)| >= 1 (no decaying solution).
    """
    e = float(energy)
    q = J.q
    t11 = float(transfer_entries(J, q, e)[0])
    if abs(t11) >= 1.0:
        raise DivergentNormSum(
            f"|t11({e})| = {abs(t11):.6g} >= 1: formal eigenvector does not decay"
        )
    head = poly_recurrence(J, e, q - 1)
    return float((1.0 - t11 * t11) / np.sum(head * head))


@dataclass
class SpectralMeasure:
    """Continuous density on the bands plus gap point masses."""

    operator: JacobiOperator
    monodromy: MonodromyData = field(repr=False)
    bands: BandStructure
    phases: list[PhaseFunction] = field(repr=False)
    point_masses: list[EigenvalueInfo]
    continuous_mass: float

    def density(self, x: float) -> float:
        return density(self.monodromy, self.bands, x)

    def phi_weight(self, j: int, phi) -> np.ndarray:
        """w(k_j(phi)) |k_j'(phi)|, the band-j integrand factor in phase form."""
        P = self.phases[j - 1]
        x = P.k(np.asarray(phi, dtype=float))
        t21 = np.abs(self.monodromy.t21(x))
        d1 = np.abs(self.monodromy.delta_d1(x))
        s = np.sin(np.asarray(phi, dtype=float))
        return (2.0 / np.pi) * s * s / (t21 * d1)


def _band_nodes(S: SpectralMeasure, j: int, count: int):
    """Gauss-Legendre nodes/weights on [-pi, 0] with the measure factor folded in."""
    y, wgl = leggauss(count)
    phi = 0.5 * (y + 1.0) * np.pi - np.pi
    wphi = 0.5 * np.pi * wgl * S.phi_weight(j, phi)
    x = S.phases[j - 1].k(phi)
    return phi, x, wphi


def spectral_measure(
    J: JacobiOperator,
    M: MonodromyData,
    B: BandStructure,
    eigenvalues: list[EigenvalueInfo],
    mass_nodes: int = 256,
) -> SpectralMeasure:
    """Assemble the full measure; fills the eigenvalue weights in place.

    The continuous mass is computed by quadrature (not as 1 - sum of weights),
    so total mass 1 remains a verifiable property of the construction.
    """
    phases = [phase_function(M, B, j) for j in range(1, B.q + 1)]
    for info in eigenvalues:
        info.weight = point_mass(J, info.value)
    S = SpectralMeasure(
        operator=J,
        monodromy=M,
        bands=B,
        phases=phases,
        point_masses=eigenvalues,
        continuous_mass=0.0,
    )
    mass = 0.0
    for j in range(1, B.q + 1):
        _, _, wphi = _band_nodes(S, j, mass_nodes)
        mass += float(np.sum(wphi))
    S.continuous_mass = mass
    return S


def moment(S: SpectralMeasure, k: int, nodes_per_band: int = 256) -> float:
    """k-th moment of the full spectral measure (bands + point masses)."""
    if k < 0 or k > 40:
        raise ValueError("moment order must be in 0..40")
    total = 0.0
    for j in range(1, S.bands.q + 1):
        _, x, wphi = _band_nodes(S, j, nodes_per_band)
        total += float(np.sum(x**k * wphi))
    for info in S.point_masses:
        total += info.weight * info.value**k
    return total


def moment_oracle(J: JacobiOperator, k: int) -> float:
    """(J^k)_{11} by k-fold application of J to the first site vector."""
    from .operators import FiniteState, apply

    v = FiniteState.delta(1)
    for _ in range(k):
        v = apply(J, v)
    return float(v.values[0].real)


def gram_matrix(S: SpectralMeasure, n_max: int, nodes_per_band: int | None = None) -> np.ndarray:
    """Inner products <p_n, p_m> under the measure for n, m = 0..n_max."""
    q = S.bands.q
    if nodes_per_band is None:
        nodes_per_band = 32 * (n_max // q + 8)
    gram = np.zeros((n_max + 1, n_max + 1))
    for j in range(1, q + 1):
        _, x, wphi = _band_nodes(S, j, nodes_per_band)
        P = poly_recurrence(S.operator, x, n_max)
        gram += (P * wphi) @ P.T
    for info in S.point_masses:
        pe = poly_recurrence(S.operator, info.value, n_max)
        gram += info.weight * np.outer(pe, pe)
    return gram


@dataclass
class SpectralData:
    """Everything derived from one operator, built once and passed around."""

    operator: JacobiOperator
    monodromy: MonodromyData = field(repr=False)
    bands: BandStructure
    eigenvalues: list[EigenvalueInfo]
    measure: SpectralMeasure = field(repr=False)


def spectral_data(J: JacobiOperator) -> SpectralData:
    """Run the full pipeline: monodromy, bands, point spectrum, measure."""
    from .spectrum import band_structure, point_spectrum
    from .transfer import monodromy

    M = monodromy(J)
    B = band_structure(M)
    eigs = point_spectrum(M, B)
    S = spectral_measure(J, M, B, eigs)
    return SpectralData(
        operator=J, monodromy=M, bands=B, eigenvalues=eigs, measure=S
    )
