"""Three-string Neumann family, momentum representation and ghost insertion.

Block (r, s) of the family, r, s in {1, 2, 3}:

    (1/3) [ (C + F + conj F) delta_rs + (C - (F + conj F)/2) (1 - delta_rs)
            + i (sqrt3/2) (F - conj F) eps_rs ]

with eps_rs = +1 when s = r+1 (mod 3), -1 when s = r-1, 0 on the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fmatrix import CMatrix, FMatrix, c_matrix

REALITY_TOL = 1e-12
STRINGS = (1, 2, 3)


class ImaginaryResidueError(AssertionError):
    """A block that must be real carries an imaginary part above tolerance."""


class SingularTransformError(ZeroDivisionError):
    """F00 = 1 makes the momentum-representation transform singular."""


def _eps(r: int, s: int) -> int:
    d = (s - r) % 3
    return {0: 0, 1: 1, 2: -1}[d]


def _check_rs(r, s):
    if r not in STRINGS or s not in STRINGS:
        raise ValueError("string indices must be 1, 2 or 3")


def combine_blocks(r: int, s: int, F: np.ndarray, C: np.ndarray) -> np.ndarray:
    """The three-string combination of a complex F and a real C (no reality check)."""
    _check_rs(r, s)
    Fb = F.conj()
    if r == s:
        out = C + F + Fb
    else:
        out = C - 0.5 * (F + Fb) + 1j * (math.sqrt(3) / 2) * _eps(r, s) * (F - Fb)
    return out / 3.0


def _real(block: np.ndarray, what: str) -> np.ndarray:
    residue = float(np.abs(block.imag).max()) if block.size else 0.0
    if residue > REALITY_TOL:
        raise ImaginaryResidueError(f"{what}: imaginary residue {residue:.3e}")
    return np.ascontiguousarray(block.real)


def neumann_block(r: int, s: int, F: FMatrix, C: CMatrix | None = None) -> np.ndarray:
    C = C if C is not None else c_matrix(F.N)
    if C.N != F.N:
        raise ValueError("C and F orders differ")
    return _real(combine_blocks(r, s, F.entries, C.matrix), f"block {r}{s}")


@dataclass(frozen=True, eq=False)
class NeumannFamily:
    N: int
    blocks: dict = field(repr=False)

    def __getitem__(self, rs):
        return self.blocks[rs]

    def row_sum_defect(self, C: CMatrix | None = None) -> float:
        C = C if C is not None else c_matrix(self.N)
        return max(
            float(np.abs(sum(self.blocks[(r, s)] for s in STRINGS) - C.matrix).max()) for r in STRINGS
        )

    def cyclicity_defect(self) -> float:
        nxt = lambda i: i % 3 + 1
        return max(
            float(np.abs(self.blocks[(r, s)] - self.blocks[(nxt(r), nxt(s))]).max())
            for r in STRINGS for s in STRINGS
        )

    def exchange_defect(self) -> float:
        return max(
            float(np.abs(self.blocks[(r, s)] - self.blocks[(s, r)].T).max())
            for r in STRINGS for s in STRINGS
        )


def neumann_family(F: FMatrix, C: CMatrix | None = None) -> NeumannFamily:
    C = C if C is not None else c_matrix(F.N)
    return NeumannFamily(F.N, {(r, s): neumann_block(r, s, F, C) for r in STRINGS for s in STRINGS})


def imaginary_residue(F: FMatrix) -> float:
    """Largest imaginary part over all nine blocks before it is discarded."""
    C = c_matrix(F.N).matrix
    return max(float(np.abs(combine_blocks(r, s, F.entries, C).imag).max()) for r in STRINGS for s in STRINGS)


# --------------------------------------------------------------------------
# momentum representation


@dataclass(frozen=True, eq=False)
class MomentumRep:
    N: int
    f00_prime: float
    f0n_prime: np.ndarray = field(repr=False)
    fn0_prime: np.ndarray = field(repr=False)
    fnm_prime: np.ndarray = field(repr=False)

    @property
    def full(self) -> np.ndarray:
        """Primed matrix laid out like F (zero row and column included)."""
        out = np.empty((self.N + 1, self.N + 1), dtype=np.complex128)
        out[0, 0] = self.f00_prime
        out[0, 1:] = self.f0n_prime
        out[1:, 0] = self.fn0_prime
        out[1:, 1:] = self.fnm_prime
        return out

    def involution_residual(self, window: int) -> float:
        """max |sum_{k>=1} F'_nk F'_km - delta_nm| for 1 <= n, m <= window."""
        w = min(window, self.N)
        P = self.fnm_prime[:w, :] @ self.fnm_prime[:, :w]
        return float(np.abs(P - np.eye(w)).max())


def momentum_rep(F: FMatrix) -> MomentumRep:
    F00 = complex(F.entries[0, 0])
    if abs(1.0 - F00) == 0.0:
        raise SingularTransformError("F00 = 1")
    d = 1.0 - F00
    ent = F.entries
    f00p = (1.0 + F00) / d
    return MomentumRep(
        F.N,
        float(f00p.real),
        ent[0, 1:] / d,
        ent[1:, 0] / d,
        ent[1:, 1:] + np.outer(ent[1:, 0], ent[0, 1:]) / d,
    )


def mode_weights(N: int) -> np.ndarray:
    """1/sqrt(n + delta_n0)."""
    n = np.arange(N + 1, dtype=np.float64)
    n[0] = 1.0
    return 1.0 / np.sqrt(n)


def g_matrix(r: int, s: int, momentum: MomentumRep, C: CMatrix | None = None) -> np.ndarray:
    """G^{rs} = -W F'^{rs} W with F'^{rs} the family built from C and the primed F."""
    C = C if C is not None else c_matrix(momentum.N)
    block = _real(combine_blocks(r, s, momentum.full, C.matrix), f"primed block {r}{s}")
    w = mode_weights(momentum.N)
    return -(w[:, None] * block * w[None, :])


def g_family(momentum: MomentumRep, C: CMatrix | None = None) -> dict:
    return {(r, s): g_matrix(r, s, momentum, C) for r in STRINGS for s in STRINGS}


# --------------------------------------------------------------------------
# ghost midpoint insertion


@dataclass(frozen=True, eq=False)
class GhostInsertion:
    N: int
    coeffs: np.ndarray = field(repr=False)


def ghost_insertion(N: int) -> GhostInsertion:
    """3 (-1)^{n/2} / sqrt(n) on even n >= 2, zero elsewhere (index 0..N)."""
    if N < 2:
        raise ValueError("N must be >= 2")
    n = np.arange(N + 1)
    out = np.zeros(N + 1)
    even = n[2::2]
    out[2::2] = 3.0 * np.where((even // 2) % 2 == 0, 1.0, -1.0) / np.sqrt(even)
    return GhostInsertion(N, out)
