"""Orthonormal polynomials of the half-line operator.

p_n(x) is the value at site n+1 of the formal eigenvector fixed by v_1 = 1:
p_{-1} = 0, p_0 = 1, and

    a_n p_n = (x - b_n) p_{n-1} - a_{n-1} p_{n-2}     (n >= 1, a_0 := 1).

Equivalently p_n(x) = [T_n(x)]_{11}.  The closed form through the monodromy
power identity gives p_n for n = s q + r without iterating n steps.
"""

from __future__ import annotations

import numpy as np

from .errors import OutsideBandInterior
from .operators import JacobiOperator
from .transfer import MonodromyData, power_via_rho, rho_sequence, transfer_entries


def poly_recurrence(J: JacobiOperator, x, n_max: int) -> np.ndarray:
    """Values p_0(x)..p_{n_max}(x) by the three-term recurrence.

    Vectorized: for array x of shape S the result has shape (n_max + 1,) + S.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max == 0:
        return out
    aa, bb = J.coefficients(n_max)
    prev = np.zeros_like(x)      # p_{-1}
    cur = out[0]
    for n in range(1, n_max + 1):
        a_n, b_n = aa[n - 1], bb[n - 1]
        a_prev = aa[n - 2] if n >= 2 else 1.0
        nxt = ((x - b_n) * cur - a_prev * prev) / a_n
        out[n] = nxt
        prev, cur = cur, nxt
    return out


def rho(M: MonodromyData, ell: int, x):
    """Kernel-sequence value rho_ell(x) = U_{ell-1}(Delta(x)/2)."""
    if ell < 0:
        raise ValueError("rho index must be >= 0")
    vals = rho_sequence(M.delta(np.asarray(x, float)), ell)[ell]
    return float(vals) if np.ndim(x) == 0 else vals


def poly_closed_form(J: JacobiOperator, M: MonodromyData, x, n: int):
    """p_n(x) in a band interior via the monodromy power identity.

    Factors n = s q + r and left-multiplies T_{sq}(x) by the r-step prefix;
    the (1,1) entry is p_n.  Requires |Delta(x)| < 2.  Vectorized over x.
    """
    if n < 0:
        raise ValueError("polynomial degree must be >= 0")
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(M.delta(x)) >= 2.0):
        raise OutsideBandInterior("some points have |Delta(x)| >= 2")
    q = J.q
    s, r = divmod(n, q)
    p11, p12, _, _ = transfer_entries(J, r, x)
    if s == 0:
        out = p11
    else:
        t = power_via_rho(M, s, x)
        out = p11 * t[0, 0] + p12 * t[1, 0]
    return float(out) if scalar else out
