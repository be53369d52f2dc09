"""Closed-form inverse of beta*M1^T + alpha*M2^T.

For alpha/beta = +-cos(pi/p) the inverse is built from the Taylor modes of
((1+x)/(1-x))**(1/p) and its conjugate exponent.  alpha = +-beta are the two
exact cases M1 -+ M2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .basis import CouplingMatrices, build_coupling, window_residual
from .taylor import InsufficientModesError, ModeTable, _check_pair

P_MAX = 64
_MATCH_TOL = 1e-9


class ParameterDomainError(ValueError):
    """alpha/beta does not correspond to any integer p in [2, P_MAX]."""


@dataclass(frozen=True)
class InverseParams:
    alpha: float
    beta: float
    p: int
    alpha_prime: float
    beta_prime: float
    k: int | None = None
    special: Literal["plus", "minus"] | None = None

    def condition_residuals(self) -> tuple[float, float]:
        """beta' alpha + alpha' beta cos(pi/p) and alpha' alpha + beta' beta cos(pi/p); both vanish."""
        c = math.cos(math.pi / self.p)
        r1 = self.beta_prime * self.alpha + self.alpha_prime * self.beta * c
        r2 = self.alpha_prime * self.alpha + self.beta_prime * self.beta * c
        return r1, r2


@dataclass(frozen=True, eq=False)
class InverseMatrix:
    N: int
    entries: np.ndarray = field(repr=False)
    params: InverseParams | None = None


def solve_params(alpha: float, beta: float) -> InverseParams:
    """Recover p from |alpha/beta| = cos(pi/p) and fix alpha', beta'.

    alpha = beta and alpha = -beta (p -> infinity in the family) are flagged
    as the exact special cases.
    """
    if alpha == 0 or beta == 0:
        raise ParameterDomainError("alpha and beta must be non-zero")
    ratio = alpha / beta
    if abs(abs(ratio) - 1.0) <= _MATCH_TOL:
        which = "plus" if ratio > 0 else "minus"
        return InverseParams(alpha, beta, 0, math.nan, math.nan, special=which)
    for p in range(2, P_MAX + 1):
        c = math.cos(math.pi / p)
        if abs(abs(ratio) - c) <= _MATCH_TOL:
            break
    else:
        raise ParameterDomainError(f"|alpha/beta| = {abs(ratio)!r} is not cos(pi/p) for 2 <= p <= {P_MAX}")
    sn, c = math.sin(math.pi / p), math.cos(math.pi / p)
    a_prime = 1.0 / (2.0 * sn * beta)
    b_prime = -c / (2.0 * sn * alpha)
    return InverseParams(alpha, beta, p, a_prime, b_prime)


def params_from_strings(k: int, n_strings: int) -> InverseParams:
    """Parameters for M1^T + cos(k pi / N) M2^T, N the number of strings.

    k = 2N and k = N are the special cases; otherwise p is recovered from
    alpha = cos(k pi / N) and must be an integer.
    """
    if n_strings < 1 or not 1 <= k <= 2 * n_strings:
        raise ParameterDomainError("need 1 <= k <= 2N")
    base = solve_params(math.cos(k * math.pi / n_strings), 1.0)
    return InverseParams(base.alpha, base.beta, base.p, base.alpha_prime, base.beta_prime, k, base.special)


def ansatz_inverse(params: InverseParams, modes_a: ModeTable, modes_b: ModeTable, N: int) -> InverseMatrix:
    """Entry (n, m), both 1-based, of (beta M1^T + alpha M2^T)^{-1}."""
    if params.special is not None:
        raise ValueError("alpha = +-beta has no ansatz form; use special_inverse")
    _check_pair(modes_a, modes_b)
    p = params.p
    if modes_a.exponents.p != p:
        raise ValueError(f"mode tables are for p={modes_a.exponents.p}, params need p={p}")
    if min(modes_a.length, modes_b.length) < 2 * N:
        raise InsufficientModesError(f"ansatz at N={N} needs mode tables of order {2 * N}")
    n = np.arange(1, N + 1)[:, None]
    m = np.arange(1, N + 1)[None, :]
    e, o = 2 * n, 2 * m - 1
    ua, ub = modes_a.coeffs, modes_b.coeffs
    plus = ub[e] * ua[o] + ua[e] * ub[o]
    minus = ub[e] * ua[o] - ua[e] * ub[o]
    sgn = np.where((n + m) % 2 == 0, 1.0, -1.0)
    c, sn = math.cos(math.pi / p), math.sin(math.pi / p)
    ent = sgn * np.sqrt(e * o) / (2 * sn) * (
        plus / (params.beta * (e - o)) - (c / params.alpha) * minus / (e + o)
    )
    return InverseMatrix(N, ent, params)


def special_inverse(which: Literal["plus", "minus"], coupling: CouplingMatrices) -> InverseMatrix:
    """(M1^T + M2^T)^{-1} = M1 - M2 and (M1^T - M2^T)^{-1} = M1 + M2."""
    if which == "plus":
        ent = coupling.M1 - coupling.M2
    elif which == "minus":
        ent = coupling.M1 + coupling.M2
    else:
        raise ValueError("which must be 'plus' or 'minus'")
    return InverseMatrix(coupling.N, np.array(ent))


def target_matrix(alpha: float, beta: float, coupling: CouplingMatrices) -> np.ndarray:
    return beta * coupling.M1.T + alpha * coupling.M2.T


def numeric_inverse(alpha: float, beta: float, N: int) -> np.ndarray:
    """Dense LU inverse of the truncated matrix; independent of the mode tables."""
    return np.linalg.inv(target_matrix(alpha, beta, build_coupling(N)))


def inverse_residuals(inv: InverseMatrix, alpha: float, beta: float, window: int,
                      coupling: CouplingMatrices | None = None) -> dict[str, float]:
    cp = coupling.leading(inv.N) if coupling is not None else build_coupling(inv.N)
    A = target_matrix(alpha, beta, cp)
    return {
        "left": window_residual(inv.entries @ A, 1.0, window),
        "right": window_residual(A @ inv.entries, 1.0, window),
    }
