"""Transfer matrices and the monodromy matrix of a periodic Jacobi operator.

The one-step transfer matrix at energy x is

    A(a, b, x) = (1/a) [[x - b, -1], [a^2, 0]],   det A = 1,

and the n-step matrix is the ordered product T_n(x) = A_n ... A_2 A_1.  The
monodromy matrix is T_q over one period; its trace Delta(x) = t11 + t22 is the
discriminant, a degree-q polynomial with leading coefficient 1/(a_1 ... a_q).

Entries are evaluated by direct products (numerically stable), while a
Chebyshev interpolant of each entry on [-R, R], R = norm_bound + 1, provides
exact polynomial derivatives and colleague-matrix root finding downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import Chebyshev

from .errors import NonPositiveHopping, OutsideBandInterior
from .operators import JacobiOperator, norm_bound


def step_matrix(a: float, b: float, x: float) -> np.ndarray:
    """One-step transfer matrix A(a, b, x) as a (2, 2) array."""
    if a <= 0.0:
        raise NonPositiveHopping(f"hopping coefficient {a} is not positive")
    return np.array([[(x - b) / a, -1.0 / a], [a, 0.0]])


def transfer_entries(J: JacobiOperator, n: int, x) -> tuple[np.ndarray, ...]:
    """Entries (t11, t12, t21, t22) of T_n(x), vectorized over x."""
    x = np.asarray(x, dtype=float)
    t11 = np.ones_like(x)
    t12 = np.zeros_like(x)
    t21 = np.zeros_like(x)
    t22 = np.ones_like(x)
    aa, bb = J.coefficients(n)
    for i in range(n):
        a, b = aa[i], bb[i]
        top = (x - b) / a
        n11 = top * t11 - t21 / a
        n12 = top * t12 - t22 / a
        t21 = a * t11
        t22 = a * t12
        t11, t12 = n11, n12
    return t11, t12, t21, t22


def transfer_matrix(J: JacobiOperator, n: int, x: float) -> np.ndarray:
    """n-step transfer matrix T_n(x) = A_n ... A_1 as a (2, 2) array."""
    if n < 0:
        raise ValueError("step count must be >= 0")
    t11, t12, t21, t22 = transfer_entries(J, n, float(x))
    return np.array([[t11, t12], [t21, t22]], dtype=float)


def _scalar_or_array(x, vals):
    return float(vals) if np.ndim(x) == 0 else vals


@dataclass
class MonodromyData:
    """Monodromy matrix T_q of an operator, with polynomial metadata.

    Entry evaluation goes through direct transfer products; the Chebyshev
    interpolants (exact, since every entry has degree <= q) carry the
    coefficient vectors and supply derivatives of the discriminant.
    """

    operator: JacobiOperator
    radius: float
    cheb: dict[str, Chebyshev] = field(repr=False)

    def _entries(self, x):
        return transfer_entries(self.operator, self.operator.q, np.asarray(x, float))

    def t11(self, x):
        return _scalar_or_array(x, self._entries(x)[0])

    def t12(self, x):
        return _scalar_or_array(x, self._entries(x)[1])

    def t21(self, x):
        return _scalar_or_array(x, self._entries(x)[2])

    def t22(self, x):
        return _scalar_or_array(x, self._entries(x)[3])

    def delta(self, x):
        e = self._entries(x)
        return _scalar_or_array(x, e[0] + e[3])

    @cached_property
    def _delta_derivs(self) -> tuple[Chebyshev, Chebyshev, Chebyshev]:
        d1 = self.cheb["delta"].deriv(1)
        return d1, d1.deriv(1), d1.deriv(2)

    def delta_d1(self, x):
        return _scalar_or_array(x, self._delta_derivs[0](np.asarray(x, float)))

    def delta_d2(self, x):
        return _scalar_or_array(x, self._delta_derivs[1](np.asarray(x, float)))

    def delta_d3(self, x):
        return _scalar_or_array(x, self._delta_derivs[2](np.asarray(x, float)))

    @property
    def cheb_coeffs(self) -> dict[str, np.ndarray]:
        """Chebyshev-basis coefficient vectors of each entry on [-R, R]."""
        return {name: c.coef.copy() for name, c in self.cheb.items()}


def monodromy(J: JacobiOperator) -> MonodromyData:
    """Build the monodromy data of J on the bracketing interval [-R, R]."""
    radius = norm_bound(J) + 1.0
    domain = [-radius, radius]
    q = J.q

    def entry(i):
        return lambda x: transfer_entries(J, q, x)[i]

    cheb = {
        name: Chebyshev.interpolate(entry(i), q, domain=domain)
        for i, name in enumerate(("t11", "t12", "t21", "t22"))
    }
    cheb["delta"] = Chebyshev.interpolate(
        lambda x: (lambda e: e[0] + e[3])(transfer_entries(J, q, x)), q, domain=domain
    )
    return MonodromyData(operator=J, radius=radius, cheb=cheb)


def rho_sequence(delta, ell: int):
    """Values rho_0..rho_ell of the kernel sequence at given Delta value(s).

    rho_0 = 0, rho_1 = 1, rho_{l+1} = Delta rho_l - rho_{l-1}; this is the
    Chebyshev three-term recurrence, so rho_l = U_{l-1}(Delta/2) and the
    sequence stays finite at band edges (rho_l -> l (+-1)^{l+1} as Delta -> +-2).
    """
    delta = np.asarray(delta, dtype=float)
    out = np.zeros((ell + 1,) + delta.shape)
    if ell >= 1:
        out[1] = 1.0
    for l in range(1, ell):
        out[l + 1] = delta * out[l] - out[l - 1]
    return out


def power_via_rho(M: MonodromyData, s: int, x) -> np.ndarray:
    """s-period transfer matrix T_{sq}(x) from the monodromy entries alone.

    Cayley-Hamilton for a unimodular 2x2 matrix gives T^s = rho_s T -
    rho_{s-1} I, i.e.

        T_{sq} = [[t11 rho_s - rho_{s-1},  t12 rho_s],
                  [t21 rho_s,              t22 rho_s - rho_{s-1}]].

    Valid everywhere (the rho recurrence is polynomial in Delta), but guarded
    to band interiors |Delta(x)| < 2 where downstream callers need it.
    Vectorized over x: the result has shape (2, 2) + x.shape.
    """
    if s < 1:
        raise ValueError("power s must be >= 1")
    t11, t12, t21, t22 = M._entries(x)
    delta = t11 + t22
    if not np.all(np.abs(delta) < 2.0):
        raise OutsideBandInterior(f"|Delta({x})| = {float(np.max(np.abs(delta)))} >= 2")
    r = rho_sequence(delta, s)
    return np.array(
        [
            [t11 * r[s] - r[s - 1], t12 * r[s]],
            [t21 * r[s], t22 * r[s] - r[s - 1]],
        ]
    )
