"""Verification suites and convergence tables.

Every check carries its measured value and the tolerance it was held to, so
reports are self-describing.  A check passes when value <= tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels_py
from .basis import build_coupling, commutator_residuals, round_trip_residual, window_residual
from .fmatrix import (
    FMatrix,
    LN_27_16,
    f00,
    f00_series,
    f_assemble,
    f_constraint_residual,
    f_oracle_solve,
    midpoint_relations,
)
from .inverse import (
    ansatz_inverse,
    inverse_residuals,
    numeric_inverse,
    solve_params,
    special_inverse,
)
from .io import SCHEMA_VERSION
from .taylor import (
    ExponentPair,
    ModeCache,
    SumConfig,
    generate_modes,
    generate_modes_oracle,
    identity_uS,
    mode_pair,
    O_closed,
    reflected_square_sum,
    required_length,
    sum_Etilde,
    sum_O,
    sum_Stilde,
    w_recursion_residual,
)
from .vertex import g_family, imaginary_residue, momentum_rep, neumann_family

QUOTED_F00 = -0.312987

DEFAULT_TOLERANCES = {
    "exact": 1e-12,
    "modes_oracle": 1e-12,
    "f00_closed": 1e-14,
    "f00_series_raw": 1e-2,
    "f00_series_extrapolated": 1e-5,
    "m_identity": 5e-2,
    "round_trip": 1e-2,
    "inverse": 5e-2,
    "numeric_inverse": 1e-2,
    "param_conditions": 1e-14,
    "f_involution": 1e-2,
    "constraints": 5e-2,
    "midpoint": 1e-6,
    "oracle_window": 5e-2,
    "oracle_f00": 2e-2,
    "primed_involution": 1e-2,
    "f00_prime": 1e-14,
    "w_recursion": 1e-12,
}

SUITES = ("taylor", "m-identities", "inverse", "f-properties", "constraints", "oracle", "vertex")
IDENTITIES = (
    "m-commutators",
    "special-inverse",
    "round-trip",
    "ansatz-inverse",
    "f-involution",
    "f-constraints",
    "primed-involution",
)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "passed": self.passed}


@dataclass
class Context:
    """Shared inputs for one run; memoises mode tables and F."""

    N: int = 256
    window: int = 16
    cfg: SumConfig = field(default_factory=lambda: SumConfig(2048, "richardson1", 1e-5))
    tolerances: dict = field(default_factory=dict)
    cache: ModeCache | None = None
    perturb_seed: int | None = None
    _modes: dict = field(default_factory=dict, repr=False)
    _F: dict = field(default_factory=dict, repr=False)

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def modes(self, p: int, L: int):
        have = self._modes.get(p)
        if have is None or have[0].length < L:
            self._modes[p] = mode_pair(p, L, self.cache)
        a, b = self._modes[p]
        return a, b

    def fmatrix(self, N: int | None = None) -> FMatrix:
        N = N or self.N
        if N not in self._F:
            a, b = self.modes(3, required_length(self.cfg, N) + 2)
            self._F[N] = f_assemble(N, a, b, self.cfg, strict=False)
        return self._F[N]

    def checked_fmatrix(self, N: int | None = None) -> FMatrix:
        """F as handed to the checks: perturbed when a seed is set."""
        F = self.fmatrix(N)
        if self.perturb_seed is None:
            return F
        rng = np.random.default_rng(self.perturb_seed)
        row, col = (int(x) for x in rng.integers(0, F.N + 1, size=2))
        return F.with_entry(row, col, 0.1)

    def perturbed_entry(self, N: int | None = None) -> list[int] | None:
        if self.perturb_seed is None:
            return None
        rng = np.random.default_rng(self.perturb_seed)
        n = (N or self.N) + 1
        return [int(x) for x in rng.integers(0, n, size=2)]


# --------------------------------------------------------------------------
# suites


def suite_taylor(ctx: Context) -> list[Check]:
    cfg = ctx.cfg
    out = []
    worst = 0.0
    for p in (2, 3, 4, 6):
        for q in sorted({1, p - 1}):
            e = ExponentPair(p, q)
            r, o = generate_modes(e, 2000).coeffs, generate_modes_oracle(e, 2000).coeffs
            worst = max(worst, float(np.max(np.abs(r - o) / np.abs(o))))
    out.append(Check("modes_recursion_vs_oracle", worst, ctx.tol("modes_oracle")))

    a, b = ctx.modes(3, required_length(cfg, 120) + 2)
    ratio_closed = ratio_refl = 0.0
    for n in range(2, 21, 2):
        for modes in (a, b):
            plus, minus = sum_O("+", n, modes, cfg), sum_O("-", n, modes, cfg)
            ratio_closed = max(ratio_closed, abs(plus.value - O_closed(n, modes)) / plus.est_error)
            c = math.cos(modes.exponents.angle)
            ratio_refl = max(ratio_refl, abs(minus.value + c * plus.value) / (2 * plus.est_error + 2 * minus.est_error))
    # ratios: deviation measured in units of the error estimate
    out.append(Check("o_closed_form_over_est_error", ratio_closed, 1.0))
    out.append(Check("o_reflection_over_est_error", ratio_refl, 1.0))

    dev = max(abs(identity_uS(n, a, b, cfg).value - 1.0 / n) for n in range(1, 51))
    out.append(Check("identity_uS", dev, cfg.tolerance))

    rel = 0.0
    for n in (2, 4):
        for modes in (a, b):
            v = sum_Stilde("-", n, modes, cfg).value
            rel = max(rel, abs(v - reflected_square_sum(n, modes, cfg).value) / abs(v))
    for n in (1, 3):
        for modes in (a, b):
            v = sum_Etilde("-", n, modes, cfg).value
            rel = max(rel, abs(v - reflected_square_sum(n, modes, cfg).value) / abs(v))
    out.append(Check("square_sum_reflection_rel", rel, cfg.tolerance))

    rng = np.random.default_rng(0)
    wa, wb = ctx.modes(3, 502)
    pairs = [(1, 2), (2, 1)] + [tuple(int(x) for x in rng.integers(1, 500, size=2)) for _ in range(400)]
    pairs = [(n, m) for n, m in pairs if (n + m) % 2 == 1]
    wres = max(abs(w_recursion_residual(n, m, wa, wb)) for n, m in pairs)
    out.append(Check("w_recursion", wres, ctx.tol("w_recursion")))

    out.append(Check("f00_closed_form", abs((1 + f00()) / (1 - f00()) - LN_27_16), ctx.tol("f00_closed")))
    target = 1.5 * math.log(3) - 2 * math.log(2)
    fa, _ = ctx.modes(3, required_length(SumConfig(2048), 0, 2) + 2)
    raw = f00_series(fa, SumConfig(2048, "none"))
    ext = f00_series(fa, SumConfig(2048, "richardson1"))
    out.append(Check("f00_series_raw_2048", abs(raw.value - target), ctx.tol("f00_series_raw")))
    out.append(Check("f00_series_richardson1_2048", abs(ext.value - target), ctx.tol("f00_series_extrapolated")))
    return out


def suite_m_identities(ctx: Context) -> list[Check]:
    N = ctx.N
    w = max(N // 8, 1)
    cp = build_coupling(N)
    out = [Check(f"{k}_window{w}", v, ctx.tol("m_identity")) for k, v in commutator_residuals(cp, w).items()]
    plus = special_inverse("plus", cp).entries
    minus = special_inverse("minus", cp).entries
    out.append(Check(f"special_plus_window{w}", window_residual((cp.M1.T + cp.M2.T) @ plus, 1.0, w), ctx.tol("m_identity")))
    out.append(Check(f"special_minus_window{w}", window_residual((cp.M1.T - cp.M2.T) @ minus, 1.0, w), ctx.tol("m_identity")))
    out.append(Check(f"coord_round_trip_window{w}", round_trip_residual(N, w), ctx.tol("round_trip")))
    out.append(Check(f"mom_round_trip_window{w}", round_trip_residual(N, w, momentum=True), ctx.tol("round_trip")))
    return out


def suite_inverse(ctx: Context) -> list[Check]:
    N = ctx.N
    w = max(N // 16, 1)
    params = solve_params(0.5, 1.0)
    a, b = ctx.modes(3, 2 * N + 2)
    inv = ansatz_inverse(params, a, b, N)
    res = inverse_residuals(inv, 0.5, 1.0, w)
    r1, r2 = params.condition_residuals()
    block = min(16, N)
    num = numeric_inverse(0.5, 1.0, N)
    return [
        Check(f"ansatz_left_window{w}", res["left"], ctx.tol("inverse")),
        Check(f"ansatz_right_window{w}", res["right"], ctx.tol("inverse")),
        Check("param_conditions", max(abs(r1), abs(r2)), ctx.tol("param_conditions")),
        Check(f"ansatz_vs_numeric_block{block}", float(np.abs(num[:block, :block] - inv.entries[:block, :block]).max()),
              ctx.tol("numeric_inverse")),
    ]


def suite_f_properties(ctx: Context) -> list[Check]:
    F = ctx.checked_fmatrix()
    a, b = ctx.modes(3, required_length(ctx.cfg, ctx.N) + 2)
    # independent rebuild through the NumPy fallback from the recorded diagonal sums
    ref = _kernels_py.f_closed_form(a.coeffs, b.coeffs, f00(), F.N, *F.diag_sums)
    return [
        Check("hermiticity", F.hermiticity_defect(), ctx.tol("exact")),
        Check("parity_reality", F.parity_reality_defect(), ctx.tol("exact")),
        Check(f"involution_window{ctx.window}", F.involution_residual(ctx.window), ctx.tol("f_involution")),
        Check("fallback_kernel_agreement", float(np.abs(F.entries - ref).max()), ctx.tol("exact")),
        Check("diagonal_sum_error", float(F.diag_error.max()) if F.diag_error is not None else 0.0, ctx.cfg.tolerance),
    ]


def suite_constraints(ctx: Context) -> list[Check]:
    F = ctx.checked_fmatrix()
    rep = f_constraint_residual(F, window=ctx.window)
    out = [Check(f"{k}_window{rep.window}", v, ctx.tol("constraints")) for k, v in rep.maxima.items()]
    m_max = min(16, F.N)
    a, b = ctx.modes(3, 2 ** 16 + 2)
    mids = midpoint_relations(F, a, b, m_max)
    out.append(Check(f"midpoint_relations_m{m_max}", max(v.value for v in mids), ctx.tol("midpoint")))
    return out


def suite_oracle(ctx: Context) -> list[Check]:
    N = ctx.N if ctx.N <= 128 else 64
    O = f_oracle_solve(N)
    F = ctx.fmatrix(N)
    w = 8
    return [
        Check(f"oracle_vs_closed_N{N}_window{w}", float(np.abs(O.entries - F.entries)[: w + 1, : w + 1].max()),
              ctx.tol("oracle_window")),
        Check("oracle_f00", abs(O.f00 - QUOTED_F00), ctx.tol("oracle_f00")),
        Check("oracle_null_space_dim", float(O.diagnostics["null_space_dim"]), 0.0),
    ]


def suite_vertex(ctx: Context) -> list[Check]:
    F = ctx.checked_fmatrix()
    fam = neumann_family(F) if imaginary_residue(F) <= ctx.tol("exact") else None
    out = [Check("imaginary_residue", imaginary_residue(F), ctx.tol("exact"))]
    if fam is not None:
        out += [
            Check("row_sum_equals_c", fam.row_sum_defect(), ctx.tol("exact")),
            Check("cyclicity", fam.cyclicity_defect(), ctx.tol("exact")),
            Check("exchange_symmetry", fam.exchange_defect(), ctx.tol("exact")),
        ]
    M = momentum_rep(F)
    out.append(Check("f00_prime", abs(M.f00_prime - LN_27_16), ctx.tol("f00_prime")))
    out.append(Check(f"primed_involution_window{ctx.window}", M.involution_residual(ctx.window),
                     ctx.tol("primed_involution")))
    try:
        G = g_family(M)
        gsym = max(float(np.abs(G[(r, s)] - G[(s, r)].T).max()) for r in (1, 2, 3) for s in (1, 2, 3))
    except AssertionError:
        gsym = math.inf
    out.append(Check("g_exchange_symmetry", gsym, ctx.tol("exact")))
    return out


_SUITE_FUNCS = {
    "taylor": suite_taylor,
    "m-identities": suite_m_identities,
    "inverse": suite_inverse,
    "f-properties": suite_f_properties,
    "constraints": suite_constraints,
    "oracle": suite_oracle,
    "vertex": suite_vertex,
}


def run_suites(names, ctx: Context) -> dict:
    names = list(SUITES) if names in ("all", ["all"]) else list(names)
    for n in names:
        if n not in _SUITE_FUNCS:
            raise ValueError(f"unknown suite {n!r}")
    results = {}
    for n in names:
        checks = _SUITE_FUNCS[n](ctx)
        results[n] = {"checks": [c.to_dict() for c in checks], "passed": all(c.passed for c in checks)}
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "verify",
        "config": {
            "N": ctx.N,
            "window": ctx.window,
            "sum_cfg": ctx.cfg.to_dict(),
            "perturbed_entry": ctx.perturbed_entry(),
        },
        "tolerances": {**DEFAULT_TOLERANCES, **ctx.tolerances},
        "suites": results,
        "passed": all(r["passed"] for r in results.values()),
    }


# --------------------------------------------------------------------------
# convergence


def _identity_rows(identity: str, N: int, ctx: Context, window: int | None) -> dict[str, float]:
    if identity == "m-commutators":
        w = window or max(N // 8, 1)
        return commutator_residuals(build_coupling(N), w)
    if identity == "special-inverse":
        w = window or max(N // 8, 1)
        cp = build_coupling(N)
        return {
            "plus": window_residual((cp.M1.T + cp.M2.T) @ (cp.M1 - cp.M2), 1.0, w),
            "minus": window_residual((cp.M1.T - cp.M2.T) @ (cp.M1 + cp.M2), 1.0, w),
        }
    if identity == "round-trip":
        w = window or max(N // 8, 1)
        return {"coord": round_trip_residual(N, w), "mom": round_trip_residual(N, w, momentum=True)}
    if identity == "ansatz-inverse":
        w = window or max(N // 16, 1)
        a, b = ctx.modes(3, 2 * N + 2)
        return inverse_residuals(ansatz_inverse(solve_params(0.5, 1.0), a, b, N), 0.5, 1.0, w)
    w = window or ctx.window
    if identity == "f-involution":
        return {"f_squared": ctx.fmatrix(N).involution_residual(w)}
    if identity == "f-constraints":
        return f_constraint_residual(ctx.fmatrix(N), window=w).maxima
    if identity == "primed-involution":
        return {"f_prime_squared": momentum_rep(ctx.fmatrix(N)).involution_residual(w)}
    raise ValueError(f"unknown identity {identity!r}")


def convergence_report(identity: str, Ns, ctx: Context, window: int | None = None) -> dict:
    Ns = [int(n) for n in Ns]
    if len(Ns) < 2 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("N values must be strictly increasing and at least two")
    per_N = [_identity_rows(identity, N, ctx, window) for N in Ns]
    rows = []
    for label in per_N[0]:
        points = []
        for i, (N, vals) in enumerate(zip(Ns, per_N)):
            r = float(vals[label])
            order = None
            if i > 0 and r > 0 and points[-1]["residual"] > 0:
                order = math.log(points[-1]["residual"] / r) / math.log(N / Ns[i - 1])
            points.append({"N": N, "residual": r, "est_order": order})
        res = [p["residual"] for p in points]
        rows.append({
            "label": label,
            "points": points,
            "strictly_decreasing": all(y < x for x, y in zip(res, res[1:])),
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "convergence",
        "identity": identity,
        "config": {"N": Ns, "window": window, "sum_cfg": ctx.cfg.to_dict()},
        "rows": rows,
        "passed": all(r["strictly_decreasing"] for r in rows),
    }


def convergence_summary(report: dict) -> str:
    lines = [f"{report['identity']}:"]
    for row in report["rows"]:
        pts = "  ".join(
            f"N={p['N']} {p['residual']:.3e}" + (f" (order {p['est_order']:.2f})" if p["est_order"] is not None else "")
            for p in row["points"]
        )
        flag = "ok" if row["strictly_decreasing"] else "NOT DECREASING"
        lines.append(f"  {row['label']}: {pts}  [{flag}]")
    return "\n".join(lines)
