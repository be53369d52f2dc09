"""The coupling matrix F of the comma vertex.

F is (N+1)x(N+1), indexed from 0, Hermitian, with real same-parity entries
and imaginary mixed-parity entries.  Off-diagonal entries are closed forms in
the Taylor modes a_k = u_k^{1/3}, b_k = u_k^{2/3}; diagonal entries need the
squared-denominator sums Stilde (even index) and Etilde (odd index).

Sign convention used throughout: sgn(r) = (-1)**((r+1)//2), which is
(-1)**n for both r = 2n and r = 2n-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .basis import CouplingMatrices, build_coupling
from .taylor import (
    InsufficientModesError,
    ModeTable,
    SumConfig,
    SumValue,
    _check_pair,
    parity_sum,
    parity_sums,
    richardson,
)

LN_27_16 = math.log(27.0 / 16.0)
SQ3 = math.sqrt(3.0)
STRUCTURE_TOL = 1e-12


class SumConvergenceError(RuntimeError):
    """A diagonal sum's error estimate exceeds the configured tolerance."""


class RankDeficiencyError(np.linalg.LinAlgError):
    def __init__(self, null_dim: int, message: str = ""):
        self.null_dim = null_dim
        super().__init__(message or f"constraint system has a {null_dim}-dimensional null space")


class StructureError(AssertionError):
    """Assembled F violates an exact structural identity."""


def f00() -> float:
    """Solution of (1 + F00)/(1 - F00) = ln(27/16)."""
    return (LN_27_16 - 1.0) / (LN_27_16 + 1.0)


def f00_series(modes_a: ModeTable, cfg: SumConfig) -> SumValue:
    """sum_{n>=1} a_{2n}/(2n), whose exact value is (3/2) ln 3 - 2 ln 2."""
    return parity_sum(modes_a, 2, 0.0, 1, cfg)


@dataclass(frozen=True, eq=False)
class CMatrix:
    N: int

    @property
    def diag(self) -> np.ndarray:
        return np.where(np.arange(self.N + 1) % 2 == 0, 1.0, -1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)


def c_matrix(N: int) -> CMatrix:
    if N < 0:
        raise ValueError("N must be >= 0")
    return CMatrix(N)


def _sgn(r):
    return np.where(((np.asarray(r) + 1) // 2) % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class FMatrix:
    N: int
    entries: np.ndarray = field(repr=False)
    f00: float
    sum_cfg: SumConfig | None = None
    diag_error: np.ndarray | None = field(default=None, repr=False)
    source: str = "closed_form"
    diagnostics: dict = field(default_factory=dict)
    # a_r X^b_r - b_r X^a_r for even and odd r, kept so F can be rebuilt
    diag_sums: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128)
        if arr.shape != (self.N + 1, self.N + 1):
            raise ValueError(f"entries must be {(self.N + 1, self.N + 1)}, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def hermiticity_defect(self) -> float:
        F = self.entries
        return float(np.abs(F - F.conj().T).max())

    def parity_reality_defect(self) -> float:
        """max |C F C - conj(F)|: imaginary parts on same-parity, real parts on mixed-parity entries."""
        c = c_matrix(self.N).diag
        F = self.entries
        return float(np.abs(c[:, None] * F * c[None, :] - F.conj()).max())

    def involution_residual(self, window: int) -> float:
        F = self.entries
        w = min(window, self.N) + 1
        P = F[:w, :] @ F[:, :w]
        return float(np.abs(P - np.eye(w)).max())

    def with_entry(self, row: int, col: int, delta: complex) -> "FMatrix":
        """Copy with one entry shifted (sensitivity and negative-control checks)."""
        arr = np.array(self.entries)
        arr[row, col] += delta
        return FMatrix(self.N, arr, self.f00, self.sum_cfg, self.diag_error, self.source + "+perturbed",
                       diag_sums=self.diag_sums)


# --------------------------------------------------------------------------
# closed forms


def _diag_sums(N, modes_a, modes_b, cfg):
    """a_r X^b_r - b_r X^a_r for r = 1..N, X = Stilde (even r) or Etilde (odd r), plus error bars."""
    even = np.arange(2, N + 1, 2, dtype=np.float64)
    odd = np.arange(1, N + 1, 2, dtype=np.float64)
    st_a = parity_sums(modes_a, 1, even, 2, cfg)
    st_b = parity_sums(modes_b, 1, even, 2, cfg)
    et_a = parity_sums(modes_a, 0, odd, 2, cfg)
    et_b = parity_sums(modes_b, 0, odd, 2, cfg)
    a, b = modes_a.coeffs, modes_b.coeffs
    ie, io = even.astype(int), odd.astype(int)

    def combine(idx, xa, xb):
        val = np.array([a[r] * vb.value - b[r] * va.value for r, va, vb in zip(idx, xa, xb)])
        err = np.array([a[r] * vb.est_error + b[r] * va.est_error for r, va, vb in zip(idx, xa, xb)])
        return val, err

    de, ee = combine(ie, st_a, st_b)
    do, eo = combine(io, et_a, et_b)
    # error on the diagonal entry itself: prefactor r sqrt(3)/(2 pi)
    err = np.zeros(N + 1)
    err[ie] = ee * even * SQ3 / (2 * math.pi)
    err[io] = eo * odd * SQ3 / (2 * math.pi)
    return de, do, err


def _mode_need(N, cfg):
    from .taylor import required_length

    return max(N, required_length(cfg, N, 1))


def f_assemble(N: int, modes_a: ModeTable, modes_b: ModeTable, cfg: SumConfig,
               strict: bool = True) -> FMatrix:
    """All closed-form blocks at truncation order N.

    Hermiticity and parity-reality are asserted after the build.  With
    ``strict`` a diagonal sum whose error estimate exceeds ``cfg.tolerance``
    raises; otherwise the estimates are kept in ``diag_error``.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    _check_pair(modes_a, modes_b)
    if modes_a.exponents.p != 3:
        raise ValueError("F is built from the p = 3 modes")
    need = _mode_need(N, cfg)
    if min(modes_a.length, modes_b.length) < need:
        raise InsufficientModesError(f"F at N={N} with {cfg} needs mode tables of order {need}")
    de, do, err = _diag_sums(N, modes_a, modes_b, cfg)
    if strict and err.max() > cfg.tolerance:
        worst = int(err.argmax())
        raise SumConvergenceError(
            f"diagonal entry {worst}: estimated error {err[worst]:.3e} exceeds tolerance {cfg.tolerance:g}"
        )
    ent = _core.f_closed_form(modes_a.coeffs, modes_b.coeffs, f00(), N, de, do)
    F = FMatrix(N, ent, f00(), cfg, err, diag_sums=(de, do))
    h, pr = F.hermiticity_defect(), F.parity_reality_defect()
    if h > STRUCTURE_TOL or pr > STRUCTURE_TOL:
        raise StructureError(f"hermiticity defect {h:.3e}, parity-reality defect {pr:.3e}")
    return F


def f_element(row: int, col: int, modes_a: ModeTable, modes_b: ModeTable, cfg: SumConfig) -> complex:
    """One entry of F evaluated directly from its closed form (scalar path)."""
    if row < 0 or col < 0:
        raise ValueError("indices must be >= 0")
    _check_pair(modes_a, modes_b)
    top = max(row, col)
    if top > min(modes_a.length, modes_b.length):
        raise InsufficientModesError(f"index {top} beyond mode tables")
    a, b = modes_a.coeffs, modes_b.coeffs
    F00 = f00()
    g = F00 - 1.0
    if row == 0 and col == 0:
        return complex(F00)
    if row == 0 or col == 0:
        r = max(row, col)
        z = g * float(_sgn(r)) * a[r] / math.sqrt(r)
        if r % 2 == 0:
            return complex(z)
        return complex(1j * z) if col == 0 else complex(-1j * z)
    r, c = row, col
    s = float(_sgn(r) * _sgn(c))
    root = math.sqrt(r * c)
    zm = g * s * a[r] * a[c] / root
    if r == c:
        if r % 2 == 0:
            sa, sb = parity_sum(modes_a, 1, r, 2, cfg), parity_sum(modes_b, 1, r, 2, cfg)
            err = (a[r] * sb.est_error + b[r] * sa.est_error) * r * SQ3 / (2 * math.pi)
            val = g * a[r] ** 2 / r - 0.5 * a[r] * b[r] - 0.5 - (r / math.pi) * (SQ3 / 2) * (
                a[r] * sb.value - b[r] * sa.value
            )
        else:
            ea, eb = parity_sum(modes_a, 0, r, 2, cfg), parity_sum(modes_b, 0, r, 2, cfg)
            err = (a[r] * eb.est_error + b[r] * ea.est_error) * r * SQ3 / (2 * math.pi)
            val = g * a[r] ** 2 / r + 0.5 * a[r] * b[r] + 0.5 + (SQ3 / (2 * math.pi)) * r * (
                a[r] * eb.value - b[r] * ea.value
            )
        if err > cfg.tolerance:
            raise SumConvergenceError(f"F[{r},{r}]: estimated error {err:.3e} exceeds {cfg.tolerance:g}")
        return complex(val)
    if r % 2 == c % 2:
        plus = (a[r] * b[c] + b[r] * a[c]) / (r + c)
        minus = (a[r] * b[c] - b[r] * a[c]) / (r - c)
        off = 0.5 * s * root * (plus + minus)
        return complex(zm - off) if r % 2 == 0 else complex(zm + off)
    mixed = 0.5 * s * root * ((a[r] * b[c] + b[r] * a[c]) / (r - c) + (a[r] * b[c] - b[r] * a[c]) / (r + c))
    if r % 2 == 0:
        return complex(-1j * mixed - 1j * zm)
    return complex(-1j * mixed + 1j * zm)


def _even_row_column(col: int, rows: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Off-diagonal F[rows, col] for even rows (vectorised, any length)."""
    g = f00() - 1.0
    r = rows.astype(np.float64)
    if col == 0:
        return g * _sgn(rows) * a[rows] / np.sqrt(r)
    c = float(col)
    s = _sgn(rows) * float(_sgn(col))
    root = np.sqrt(r * c)
    zm = g * s * a[rows] * a[col] / root
    ar, br, ac, bc = a[rows], b[rows], a[col], b[col]
    if col % 2 == 0:
        return zm - 0.5 * s * root * ((ar * bc + br * ac) / (r + c) + (ar * bc - br * ac) / (r - c))
    mixed = 0.5 * s * root * ((ar * bc + br * ac) / (r - c) + (ar * bc - br * ac) / (r + c))
    return -1j * mixed - 1j * zm


MIDPOINT_TAIL = (2.0 / 3.0, 1.0, 4.0 / 3.0, 5.0 / 3.0)


def midpoint_relations(F: FMatrix, modes_a: ModeTable, modes_b: ModeTable, m_max: int,
                       terms: int = 2 ** 15, levels: int = 4) -> list[SumValue]:
    """Residuals of the midpoint relations for columns m = 0..m_max.

    Column m: (F_{0m} + delta_{0m}) + 2 sum_k (-1)^k / sqrt(2k) (F_{2k,m} + delta_{2k,m}).
    The sum over k runs past the truncation order using the closed-form
    column, and is extrapolated in the number of terms.
    """
    if m_max > F.N:
        raise ValueError("m_max exceeds the matrix order")
    need = 2 * terms
    if min(modes_a.length, modes_b.length) < need:
        raise InsufficientModesError(f"midpoint sums need mode tables of order {need}")
    a, b = modes_a.coeffs, modes_b.coeffs
    k = np.arange(1, terms + 1)
    rows = 2 * k
    weight = 2.0 * np.where(k % 2 == 0, 1.0, -1.0) / np.sqrt(rows)
    checkpoints = [terms >> (levels - j) for j in range(levels + 1)]
    out = []
    for m in range(m_max + 1):
        col = np.zeros(terms, dtype=np.complex128)
        mask = rows != m
        col[mask] = _even_row_column(m, rows[mask], a, b)
        if not mask.all():
            col[~mask] = F.entries[m, m] + 1.0
        head = F.entries[0, m] + (1.0 if m == 0 else 0.0)
        partial = head + np.cumsum(weight * col)
        vals = [partial[cp - 1] for cp in checkpoints]
        table = richardson(vals, MIDPOINT_TAIL[:levels])
        est = abs(table[-1][-1] - table[-2][-1])
        out.append(SumValue(float(abs(table[-1][-1])), float(est), terms))
    return out


# --------------------------------------------------------------------------
# overlap constraints


@dataclass(frozen=True)
class ConstraintReport:
    N: int
    window: int
    first: float
    second: float
    midpoint: float
    first_rows: tuple[float, ...]
    second_rows: tuple[float, ...]
    midpoint_cols: tuple[float, ...]

    @property
    def maxima(self) -> dict[str, float]:
        return {"first": self.first, "second": self.second, "midpoint": self.midpoint}

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "window": self.window,
            "max_abs": self.maxima,
            "first_rows": list(self.first_rows),
            "second_rows": list(self.second_rows),
            "midpoint_cols": list(self.midpoint_cols),
        }


def constraint_system(N: int, coupling: CouplingMatrices | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Rows A and signs s such that every constraint reads A_row (F + s_row I) = 0.

    Row blocks: first family (n = 1..n_odd), second family (n = 1..n_odd),
    then the single midpoint row.
    """
    n_odd, n_even = (N + 1) // 2, N // 2
    cp = coupling if coupling is not None else build_coupling(max(n_odd, 1))
    if cp.N < n_odd:
        raise ValueError(f"coupling order {cp.N} too small for F of order {N}")
    M1, M2 = cp.M1[:n_even, :n_odd], cp.M2[:n_even, :n_odd]
    odd_cols = np.arange(1, N + 1, 2)
    even_cols = np.arange(2, N + 1, 2)
    A = np.zeros((2 * n_odd + 1, N + 1), dtype=np.complex128)
    n = np.arange(1, n_odd + 1)
    first, second = slice(0, n_odd), slice(n_odd, 2 * n_odd)
    A[first, odd_cols] = np.eye(n_odd)
    A[first, even_cols] = -1j * SQ3 * (M1 + M2).T
    A[second, odd_cols] = np.eye(n_odd)
    A[second, even_cols] = (1j / SQ3) * (M1 - M2).T
    A[second, 0] = -(4 / math.pi) * (1j / SQ3) * np.where(n % 2 == 0, 1.0, -1.0) / (2 * n - 1) ** 1.5
    k = np.arange(1, n_even + 1)
    A[-1, 0] = 1.0
    A[-1, even_cols] = 2.0 * np.where(k % 2 == 0, 1.0, -1.0) / np.sqrt(2 * k)
    signs = np.concatenate((np.ones(n_odd), -np.ones(n_odd), [1.0]))
    return A, signs


def f_constraint_residual(F: FMatrix, coupling: CouplingMatrices | None = None,
                          window: int | None = None) -> ConstraintReport:
    """Residuals of the three constraint families on rows/columns <= window."""
    N = F.N
    w = window if window is not None else max(N // 16, 8)
    w = min(w, (N + 1) // 2)
    A, s = constraint_system(N, coupling)
    R = A @ F.entries + s[:, None] * A
    n_odd = (N + 1) // 2
    cols = slice(0, w + 1)
    r1 = np.abs(R[:w, cols]).max(axis=1)
    r2 = np.abs(R[n_odd : n_odd + w, cols]).max(axis=1)
    r3 = np.abs(R[-1, cols])
    return ConstraintReport(
        N, w, float(r1.max()), float(r2.max()), float(r3.max()),
        tuple(map(float, r1)), tuple(map(float, r2)), tuple(map(float, r3)),
    )


def f_oracle_solve(N: int, coupling: CouplingMatrices | None = None, cfg: SumConfig | None = None,
                   rank_tol: float = 1e-12) -> FMatrix:
    """Constraint-only reconstruction of F by least squares.

    Minimises |A F - B|^2 + |F A^H - B^H|^2, i.e. the constraints together
    with their Hermitian conjugates, with each constraint row scaled to unit
    norm.  The normal equations are the Sylvester equation H F + F H = R with
    H = A^H A, solved in the eigenbasis of H.  No symmetry of F is assumed;
    the Hermiticity defect of the result is reported in ``diagnostics``.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if N > 128:
        raise ValueError("dense oracle is limited to N <= 128")
    A, s = constraint_system(N, coupling)
    B = -s[:, None] * A
    scale = np.linalg.norm(A, axis=1)
    A, B = A / scale[:, None], B / scale[:, None]
    H = A.conj().T @ A
    R = A.conj().T @ B + B.conj().T @ A
    lam, V = np.linalg.eigh(H)
    null_dim = int(np.sum(lam <= rank_tol * lam.max()))
    if null_dim:
        raise RankDeficiencyError(null_dim)
    X = (V.conj().T @ R @ V) / (lam[:, None] + lam[None, :])
    ent = V @ X @ V.conj().T
    res = float(np.linalg.norm(A @ ent - B))
    F = FMatrix(N, ent, float(ent[0, 0].real), cfg, None, "oracle")
    F.diagnostics.update(
        null_space_dim=null_dim,
        min_eigenvalue=float(lam.min()),
        residual_norm=res,
        hermiticity_defect=F.hermiticity_defect(),
    )
    return F
