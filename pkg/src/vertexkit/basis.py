"""Half-string / full-string change of basis.

Index conventions: ``M1[m-1, n-1]`` holds M^1_{mn} with m, n starting at 1.
Stacked vectors have length 2N+1:

    full side   [x_0; x_1, x_3, ..., x_{2N-1}; x_2, x_4, ..., x_{2N}]
    half side   [x_M; x^L_1 .. x^L_N; x^R_1 .. x^R_N]

so slot 0 is the zero mode (full) or the midpoint (half).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

MapKind = Literal["coord_full_to_half", "coord_half_to_full", "mom_full_to_half", "mom_half_to_full"]
MAP_KINDS = ("coord_full_to_half", "coord_half_to_full", "mom_full_to_half", "mom_half_to_full")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CouplingMatrices:
    N: int
    M1: np.ndarray = field(repr=False)
    M2: np.ndarray = field(repr=False)

    def entry(self, which: int, m: int, n: int) -> float:
        """1-based element access, ``which`` in {1, 2}."""
        mat = {1: self.M1, 2: self.M2}[which]
        return float(mat[m - 1, n - 1])

    def leading(self, K: int) -> "CouplingMatrices":
        """The K x K leading block (entries are exact, so this equals build_coupling(K))."""
        if K > self.N:
            raise ValueError(f"coupling has order {self.N}, need {K}")
        return CouplingMatrices(K, _frozen(self.M1[:K, :K]), _frozen(self.M2[:K, :K]))


def build_coupling(N: int) -> CouplingMatrices:
    if N < 1:
        raise ValueError("N must be >= 1")
    m = np.arange(1, N + 1, dtype=np.float64)[:, None]
    n = np.arange(1, N + 1, dtype=np.float64)[None, :]
    odd = 2 * n - 1
    base = (2 / math.pi) * np.sqrt(2 * m / odd) * np.where((m + n) % 2 == 0, 1.0, -1.0)
    return CouplingMatrices(N, _frozen(base / (2 * m - odd)), _frozen(base / (2 * m + odd)))


@dataclass(frozen=True, eq=False)
class BasisMap:
    kind: str
    N: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        size = 2 * self.N + 1
        if self.matrix.shape != (size, size):
            raise ValueError(f"{self.kind} at N={self.N} must be {size}x{size}")

    def __call__(self, vec):
        return self.matrix @ np.asarray(vec)

    # named blocks, for readability in tests
    @property
    def odd(self) -> slice:
        return slice(1, self.N + 1)

    @property
    def even(self) -> slice:
        return slice(self.N + 1, 2 * self.N + 1)


def _grid(N):
    n = np.arange(1, N + 1, dtype=np.float64)
    return n, np.where(n % 2 == 0, 1.0, -1.0)


def _forward_even_block(cp: CouplingMatrices) -> np.ndarray:
    # c[n, m] = sqrt(2m/(2n-1)) (M1 + M2)_{mn}
    n, _ = _grid(cp.N)
    ratio = np.sqrt(2 * n[None, :] / (2 * n[:, None] - 1))
    return ratio * (cp.M1 + cp.M2).T


def _inverse_even_block(cp: CouplingMatrices) -> np.ndarray:
    # d[k, n] = 1/2 sqrt((2n-1)/(2k)) (M1 - M2)_{kn}
    n, _ = _grid(cp.N)
    ratio = np.sqrt((2 * n[None, :] - 1) / (2 * n[:, None]))
    return 0.5 * ratio * (cp.M1 - cp.M2)


def coord_full_to_half(N: int, coupling: CouplingMatrices | None = None) -> BasisMap:
    cp = coupling.leading(N) if coupling is not None else build_coupling(N)
    n, sgn = _grid(N)
    A = np.zeros((2 * N + 1, 2 * N + 1))
    L, R, odd, even = slice(1, N + 1), slice(N + 1, 2 * N + 1), slice(1, N + 1), slice(N + 1, 2 * N + 1)
    c = _forward_even_block(cp)
    A[0, 0] = 1.0
    A[0, even] = math.sqrt(2) * sgn
    A[L, odd] = np.eye(N)
    A[R, odd] = -np.eye(N)
    A[L, even] = c
    A[R, even] = c
    return BasisMap("coord_full_to_half", N, _frozen(A))


def coord_half_to_full(N: int, coupling: CouplingMatrices | None = None) -> BasisMap:
    cp = coupling.leading(N) if coupling is not None else build_coupling(N)
    n, sgn = _grid(N)
    B = np.zeros((2 * N + 1, 2 * N + 1))
    L, R, odd, even = slice(1, N + 1), slice(N + 1, 2 * N + 1), slice(1, N + 1), slice(N + 1, 2 * N + 1)
    d = _inverse_even_block(cp)
    mid = -(math.sqrt(2) / math.pi) * sgn / (2 * n - 1)
    B[0, 0] = 1.0
    B[0, L] = mid
    B[0, R] = mid
    B[odd, L] = 0.5 * np.eye(N)
    B[odd, R] = -0.5 * np.eye(N)
    B[even, L] = d
    B[even, R] = d
    return BasisMap("coord_half_to_full", N, _frozen(B))


def mom_full_to_half(N: int, coupling: CouplingMatrices | None = None) -> BasisMap:
    """Momenta transform with the transpose of the inverse coordinate map."""
    B = coord_half_to_full(N, coupling).matrix
    return BasisMap("mom_full_to_half", N, _frozen(B.T.copy()))


def mom_half_to_full(N: int, coupling: CouplingMatrices | None = None) -> BasisMap:
    A = coord_full_to_half(N, coupling).matrix
    return BasisMap("mom_half_to_full", N, _frozen(A.T.copy()))


def basis_map(kind: str, N: int, coupling: CouplingMatrices | None = None) -> BasisMap:
    builders = {
        "coord_full_to_half": coord_full_to_half,
        "coord_half_to_full": coord_half_to_full,
        "mom_full_to_half": mom_full_to_half,
        "mom_half_to_full": mom_half_to_full,
    }
    if kind not in builders:
        raise ValueError(f"unknown map kind {kind!r}")
    return builders[kind](N, coupling)


def window_indices(N: int, window: int) -> np.ndarray:
    """Stacked-vector slots whose mode number is <= window (midpoint/zero slot included)."""
    w = min(window, N)
    return np.concatenate(([0], np.arange(1, w + 1), np.arange(N + 1, N + 1 + w)))


def round_trip_residual(N: int, window: int, momentum: bool = False) -> float:
    """max |(inverse @ forward - I)| restricted to the interior window."""
    cp = build_coupling(N)
    if momentum:
        fwd, inv = mom_full_to_half(N, cp), mom_half_to_full(N, cp)
    else:
        fwd, inv = coord_full_to_half(N, cp), coord_half_to_full(N, cp)
    prod = inv.matrix @ fwd.matrix
    idx = window_indices(N, window)
    sub = prod[np.ix_(idx, idx)] - np.eye(idx.size)
    return float(np.abs(sub).max())


def window_residual(X: np.ndarray, target: np.ndarray | float, window: int) -> float:
    """max |X - target| over the leading window x window block."""
    X = np.asarray(X)
    if np.isscalar(target):
        T = target * np.eye(X.shape[0])
    else:
        T = np.asarray(target)
    return float(np.abs((X - T)[:window, :window]).max())


def commutator_residuals(cp: CouplingMatrices, window: int) -> dict[str, float]:
    """Residuals of the four bilinear identities satisfied by M1, M2."""
    M1, M2 = cp.M1, cp.M2
    return {
        "m1t_m1_minus_m2t_m2": window_residual(M1.T @ M1 - M2.T @ M2, 1.0, window),
        "m1t_m2_minus_m2t_m1": window_residual(M1.T @ M2 - M2.T @ M1, 0.0, window),
        "m1_m1t_minus_m2_m2t": window_residual(M1 @ M1.T - M2 @ M2.T, 1.0, window),
        "m1_m2t_minus_m2_m1t": window_residual(M1 @ M2.T - M2 @ M1.T, 0.0, window),
    }


# --------------------------------------------------------------------------
# Z3 Fourier transform over the three strings

_E = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))


@dataclass(frozen=True, eq=False)
class Z3Transform:
    T: np.ndarray = field(
        default_factory=lambda: _frozen(
            np.array([[_E, _E.conjugate(), 1], [_E.conjugate(), _E, 1], [1, 1, 1]]) / math.sqrt(3)
        ),
        repr=False,
    )

    @staticmethod
    def shift() -> np.ndarray:
        """Cyclic shift S with S_jk = 1 when j = k+1 mod 3."""
        return np.roll(np.eye(3), 1, axis=0)


def z3_apply(T: Z3Transform, triple) -> np.ndarray:
    v = np.asarray(triple, dtype=np.complex128)
    if v.shape[0] != 3:
        raise ValueError("expected a leading axis of length 3")
    return T.T @ v
