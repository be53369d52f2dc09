"""Taylor modes of ((1+x)/(1-x))**(q/p) and the slowly convergent sums built on them.

The modes u_k obey (k+1) u_{k+1} = 2(q/p) u_k + (k-1) u_{k-1}, which follows
from (1-x^2) f' = 2(q/p) f.  Every sum here has the shape

    sum over m = start, start+2, ... of u_m / (shift + m)**power

whose terms decay like m**(q/p - 1 - power).  Partial sums are accelerated by
Richardson extrapolation on a doubling sequence of term counts, eliminating
the known tail exponents in order.  The error estimate is the larger of the
last level-to-level change and the last same-level change.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from . import _core

Extrapolation = Literal["none", "richardson1", "richardson2"]
_LEVELS = {"none": 0, "richardson1": 1, "richardson2": 2}


class InsufficientModesError(ValueError):
    """Raised when a mode table is too short for the requested sum or index."""


@dataclass(frozen=True)
class ExponentPair:
    """Selects the exponent q/p; only the conjugate pair q in {1, p-1} is allowed."""

    p: int
    q: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise ValueError(f"p must be an integer >= 2, got {self.p}")
        if self.q not in (1, self.p - 1):
            raise ValueError(f"q must be 1 or p-1 (= {self.p - 1}), got {self.q}")

    @property
    def exponent(self) -> float:
        return self.q / self.p

    @property
    def angle(self) -> float:
        """q*pi/p, the angle entering the closed-form sums."""
        return self.q * math.pi / self.p

    def conjugate(self) -> "ExponentPair":
        return ExponentPair(self.p, self.p - self.q)


@dataclass(frozen=True, eq=False)
class ModeTable:
    exponents: ExponentPair
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def length(self) -> int:
        """Highest available order L (the table holds u_0 .. u_L)."""
        return self.coeffs.size - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return self.coeffs.size

    def truncated(self, length: int) -> "ModeTable":
        if length > self.length:
            raise InsufficientModesError(f"table has order {self.length}, need {length}")
        return ModeTable(self.exponents, self.coeffs[: length + 1])


@dataclass(frozen=True)
class SumConfig:
    sum_order: int = 2048
    extrapolation: Extrapolation = "richardson2"
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.sum_order < 16:
            raise ValueError("sum_order must be >= 16")
        if self.extrapolation not in _LEVELS:
            raise ValueError(f"unknown extrapolation {self.extrapolation!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    @property
    def levels(self) -> int:
        return _LEVELS[self.extrapolation]

    def to_dict(self) -> dict:
        return {
            "sum_order": self.sum_order,
            "extrapolation": self.extrapolation,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class SumValue:
    value: float
    est_error: float
    terms_used: int


def generate_modes(exponents: ExponentPair, L: int) -> ModeTable:
    if L < 0:
        raise ValueError("L must be >= 0")
    return ModeTable(exponents, _core.taylor_recurrence(exponents.exponent, int(L)))


def generate_modes_oracle(exponents: ExponentPair, L: int) -> ModeTable:
    """Independent route: convolve the binomial series of (1+x)**s and (1-x)**(-s)."""
    if L < 0:
        raise ValueError("L must be >= 0")
    s = exponents.exponent
    k = np.arange(1, L + 1, dtype=np.float64)
    # C(s, k) = prod (s - j + 1)/j ;  (s)_k / k! = prod (s + j - 1)/j
    rising = np.concatenate(([1.0], np.cumprod((s + k - 1.0) / k)))
    binom = np.concatenate(([1.0], np.cumprod((s - k + 1.0) / k)))
    return ModeTable(exponents, np.convolve(binom, rising)[: L + 1])


def mode_pair(p: int, L: int, cache: "ModeCache | None" = None) -> tuple[ModeTable, ModeTable]:
    """Tables for exponents 1/p and 1-1/p (a_k and b_k when p = 3)."""
    first, second = ExponentPair(p, 1), ExponentPair(p, p - 1)
    if cache is not None:
        return cache.get(first, L), cache.get(second, L)
    return generate_modes(first, L), generate_modes(second, L)


# --------------------------------------------------------------------------
# accelerated parity sums


def tail_exponents(s: float, power: int) -> list[float]:
    """Decay exponents of the truncation error, leading first.

    The pole of f at x = 1 gives u_m ~ m**(s-1) (1 + O(1/m)); the zero at
    x = -1 adds a piece ~ (-1)**m m**(-s-1), which a single parity class
    sees as a plain power.
    """
    cands = {power - s, power + s, power + 1 - s, power + 1 + s}
    return sorted(e for e in cands if e > 0)


def effective_terms(cfg: SumConfig, shift: float) -> int:
    """Term count actually summed: sum_order doubled until it dwarfs |shift|."""
    terms = cfg.sum_order
    while terms < 8 * abs(shift):
        terms *= 2
    return terms


def required_length(cfg: SumConfig, max_shift: float, start: int = 1) -> int:
    """Mode-table order needed for parity sums with shifts up to ``max_shift``."""
    return start + 2 * (effective_terms(cfg, max_shift) - 1) + 2


def richardson(values, ratio_exponents):
    """Eliminate error terms c_j M**(-e_j) from partial sums at M, 2M, 4M, ...

    ``values`` are ordered coarse to fine; returns the table of extrapolants,
    one list per level (level 0 is the raw input).
    """
    table = [list(values)]
    for e in ratio_exponents:
        prev = table[-1]
        if len(prev) < 2:
            break
        f = 2.0 ** e
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1.0) for i in range(len(prev) - 1)])
    return table


def parity_sums(modes: ModeTable, start: int, shifts, power: int, cfg: SumConfig) -> list[SumValue]:
    """Accelerated values of sum_m u_m/(shift+m)**power for each shift, m = start, start+2, ..."""
    shifts = np.atleast_1d(np.asarray(shifts, dtype=np.float64))
    if shifts.size == 0:
        return []
    if _hits_pole(start, shifts):
        raise ValueError("a summand has a vanishing denominator")
    s = modes.exponents.exponent
    exps = tail_exponents(s, power)
    levels = cfg.levels
    out: list[SumValue] = []
    # group by effective term count so one kernel call serves many shifts
    terms_of = np.array([effective_terms(cfg, sh) for sh in shifts])
    for terms in np.unique(terms_of):
        sel = np.nonzero(terms_of == terms)[0]
        # one spare refinement so the final level has two extrapolants to compare
        depth = levels + 1
        checkpoints = [int(terms) >> (depth - j) for j in range(depth + 1)]
        need = start + 2 * (int(terms) - 1)
        if modes.length < need:
            raise InsufficientModesError(
                f"sum needs modes up to order {need}, table has {modes.length}"
            )
        partial = _core.parity_partial_sums(modes.coeffs, start, shifts[sel], power, checkpoints)
        for row, i in zip(partial, sel):
            table = richardson(row, exps[:levels])
            value = table[-1][-1]
            if levels == 0:
                # leading-order tail, doubled to cover the subleading terms
                est = 2.0 * abs(row[-1] - row[-2]) / (2.0 ** exps[0] - 1.0)
            else:
                last = table[-1]
                est = max(abs(last[-1] - table[-2][-1]), abs(last[-1] - last[-2]))
            out.append((i, SumValue(float(value), float(est), int(terms))))
    out.sort(key=lambda t: t[0])
    return [v for _, v in out]


def _hits_pole(start, shifts):
    # shift + m = 0 for some m >= start of matching parity
    for sh in shifts:
        m = -sh
        if m >= start and (m - start) % 2 == 0 and float(m).is_integer():
            return True
    return False


def parity_sum(modes: ModeTable, start: int, shift: float, power: int, cfg: SumConfig) -> SumValue:
    return parity_sums(modes, start, [shift], power, cfg)[0]


def _sign(sign) -> int:
    if sign in ("+", 1, +1):
        return 1
    if sign in ("-", -1):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def sum_O(sign, n: int, modes: ModeTable, cfg: SumConfig) -> SumValue:
    """Sum over odd m of u_m / (+-n + m), n even."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even index >= 2")
    return parity_sum(modes, 1, _sign(sign) * n, 1, cfg)


def O_closed(n: int, modes: ModeTable) -> float:
    """Known value pi / (2 sin(q pi / p)) * u_n of the '+' sum."""
    return math.pi / (2.0 * math.sin(modes.exponents.angle)) * modes[n]


def sum_S(n: int, modes: ModeTable, cfg: SumConfig) -> SumValue:
    """Sum over m >= 0 with n + m even of u_m / (n + m)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return parity_sum(modes, n % 2, n, 1, cfg)


def sum_Stilde(sign, n: int, modes: ModeTable, cfg: SumConfig) -> SumValue:
    """Sum over odd m of u_m / (+-n + m)**2, n even."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even index >= 2")
    return parity_sum(modes, 1, _sign(sign) * n, 2, cfg)


def sum_Etilde(sign, n: int, modes: ModeTable, cfg: SumConfig) -> SumValue:
    """Sum over even m >= 0 of u_m / (+-n + m)**2, n odd."""
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be an odd index >= 1")
    return parity_sum(modes, 0, _sign(sign) * n, 2, cfg)


def reflected_square_sum(n: int, modes: ModeTable, cfg: SumConfig) -> SumValue:
    """Predicted value of the '-' squared sum from the '+' one.

    Stilde_{-n} = cos(t) Stilde_n + (pi/2) sin(t) S_n with t = q pi / p; the
    same relation links Etilde for odd n.
    """
    t = modes.exponents.angle
    plus = (sum_Stilde if n % 2 == 0 else sum_Etilde)("+", n, modes, cfg)
    s = sum_S(n, modes, cfg)
    c1, c2 = math.cos(t), 0.5 * math.pi * math.sin(t)
    return SumValue(
        c1 * plus.value + c2 * s.value,
        abs(c1) * plus.est_error + abs(c2) * s.est_error,
        max(plus.terms_used, s.terms_used),
    )


def identity_uS(n: int, modes_a: ModeTable, modes_b: ModeTable, cfg: SumConfig) -> SumValue:
    """u^{1/p}_{2n} S^{(p-1,p)}_{2n} + u^{1-1/p}_{2n} S^{(1,p)}_{2n}; equals 1/n."""
    _check_pair(modes_a, modes_b)
    if n < 1:
        raise ValueError("n must be >= 1")
    sa = sum_S(2 * n, modes_a, cfg)
    sb = sum_S(2 * n, modes_b, cfg)
    ua, ub = modes_a[2 * n], modes_b[2 * n]
    return SumValue(
        float(ua * sb.value + ub * sa.value),
        float(ua * sb.est_error + ub * sa.est_error),
        max(sa.terms_used, sb.terms_used),
    )


def _check_pair(modes_a: ModeTable, modes_b: ModeTable):
    ea, eb = modes_a.exponents, modes_b.exponents
    if ea.p != eb.p or ea.q != 1 or eb.q != ea.p - 1:
        raise ValueError("expected tables for exponents 1/p and 1-1/p with the same p")


def w_element(m: int, n: int, modes_a: ModeTable, modes_b: ModeTable) -> float:
    """W_mn = (u^{1/p}_m u^{1-1/p}_n + u^{1-1/p}_m u^{1/p}_n) / (m + n)."""
    if m < 0 or n < 0:
        raise ValueError("indices must be non-negative")
    if m + n == 0:
        raise ValueError("W is undefined at m = n = 0")
    top = max(m, n)
    if top > modes_a.length or top > modes_b.length:
        raise InsufficientModesError(f"index {top} beyond mode tables")
    return float((modes_a[m] * modes_b[n] + modes_b[m] * modes_a[n]) / (m + n))


def w_recursion_residual(n: int, m: int, modes_a: ModeTable, modes_b: ModeTable) -> float:
    """(n+1) W_{n+1,m} - (n-1) W_{n-1,m} + (m+1) W_{n,m+1} - (m-1) W_{n,m-1}.

    Vanishes when n + m is odd.  Terms with a zero prefactor are skipped so
    that n = 1 or m = 1 never touches W_{0,0}.
    """
    w = lambda i, j: w_element(i, j, modes_a, modes_b)
    total = (n + 1) * w(n + 1, m) + (m + 1) * w(n, m + 1)
    if n != 1:
        total -= (n - 1) * w(n - 1, m)
    if m != 1:
        total -= (m - 1) * w(n, m - 1)
    return float(total)


# --------------------------------------------------------------------------
# disk cache


def default_cache_dir() -> Path:
    env = os.environ.get("VERTEXKIT_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "vertexkit"


class ModeCache:
    """Directory of JSON mode tables keyed by (p, q, L).

    A request is served from the shortest stored table that is long enough;
    writes go to a temporary file in the same directory and are renamed into
    place, so concurrent readers never observe a partial file.
    """

    def __init__(self, root: str | os.PathLike | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def path_for(self, exponents: ExponentPair, L: int) -> Path:
        return self.root / f"modes_p{exponents.p}_q{exponents.q}_L{L}.json"

    def entries(self) -> list[tuple[int, int, int]]:
        if not self.root.is_dir():
            return []
        keys = []
        for path in self.root.glob("modes_p*_q*_L*.json"):
            try:
                p, q, L = (int(part[1:]) for part in path.stem.split("_")[1:])
            except ValueError:
                continue
            keys.append((p, q, L))
        return sorted(keys)

    def get(self, exponents: ExponentPair, L: int) -> ModeTable:
        stored = [
            k[2] for k in self.entries() if k[0] == exponents.p and k[1] == exponents.q and k[2] >= L
        ]
        if stored:
            return read_mode_table(self.path_for(exponents, min(stored))).truncated(L)
        table = generate_modes(exponents, L)
        self.put(table)
        return table

    def put(self, table: ModeTable) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        target = self.path_for(table.exponents, table.length)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(mode_table_json(table))
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return target

    def clear(self) -> int:
        removed = 0
        for p, q, L in self.entries():
            self.path_for(ExponentPair(p, q), L).unlink(missing_ok=True)
            removed += 1
        return removed

    def prewarm(self, p: int, L: int) -> list[Path]:
        paths = []
        for q in sorted({1, p - 1}):
            table = generate_modes(ExponentPair(p, q), L)
            paths.append(self.put(table))
        return paths


def mode_table_json(table: ModeTable) -> str:
    coeffs = ", ".join(format(float(c), ".17g") for c in table.coeffs)
    head = json.dumps({"p": table.exponents.p, "q": table.exponents.q, "length": table.length})
    return head[:-1] + f', "coeffs": [{coeffs}]}}\n'


def read_mode_table(path: str | os.PathLike) -> ModeTable:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    coeffs = np.asarray(data["coeffs"], dtype=np.float64)
    if coeffs.size != data["length"] + 1:
        raise ValueError(f"{path}: length field does not match coefficient count")
    return ModeTable(ExponentPair(int(data["p"]), int(data["q"])), coeffs)
