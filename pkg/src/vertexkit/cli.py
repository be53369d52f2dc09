"""Command-line front end.

Exit codes: 0 all checks pass, 2 a tolerance was violated, 1 usage or I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .basis import MAP_KINDS, basis_map, build_coupling
from .fmatrix import f_assemble
from .inverse import ansatz_inverse, solve_params, special_inverse
from .suites import DEFAULT_TOLERANCES, IDENTITIES, SUITES, Context, convergence_report, convergence_summary, run_suites
from .taylor import (
    ExponentPair,
    ModeCache,
    SumConfig,
    generate_modes,
    generate_modes_oracle,
    mode_pair,
    mode_table_json,
    required_length,
)
from .vertex import g_family, momentum_rep, neumann_family

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2
COMMANDS = ("modes", "matrices", "inverse", "fmatrix", "vertex", "verify", "convergence", "cache")
DEFAULT_SUM_TOLERANCE = 1e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    N: int = 256
    sum_order: int = 2048
    extrapolation: str = "richardson1"
    window: int = 16
    out_path: str | None = None
    format: str = "json"
    tolerances: dict = field(default_factory=dict)
    cache_dir: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.N < 1:
            raise UsageError("--N must be >= 1")
        if self.window < 1 or self.window > max(self.N // 4, 1):
            raise UsageError(f"--window must be between 1 and N/4 (= {max(self.N // 4, 1)})")
        if self.sum_order < self.N:
            raise UsageError("--sum-order must be >= N")
        if self.format not in ("json", "csv"):
            raise UsageError("--format must be json or csv")

    def sum_cfg(self) -> SumConfig:
        tol = float(self.tolerances.get("sum", DEFAULT_SUM_TOLERANCE))
        return SumConfig(self.sum_order, self.extrapolation, tol)

    def check_tolerances(self) -> dict:
        return {k: v for k, v in self.tolerances.items() if k != "sum"}

    def cache(self) -> ModeCache | None:
        root = self.cache_dir or os.environ.get("VERTEXKIT_CACHE")
        return ModeCache(root) if root else None


def _parse_tolerances(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--tolerance expects KEY=VAL, got {item!r}")
        if key != "sum" and key not in DEFAULT_TOLERANCES:
            raise UsageError(f"unknown tolerance key {key!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise UsageError(f"tolerance {key} is not a number: {val!r}") from None
        if not out[key] >= 0:
            raise UsageError(f"tolerance {key} must be non-negative")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", default=None, help="truncation order (comma list for convergence)")
    common.add_argument("--sum-order", type=int, default=2048, help="terms before tail extrapolation")
    common.add_argument("--extrapolation", choices=["none", "richardson1", "richardson2"], default="richardson1")
    common.add_argument("--window", type=int, default=None, help="interior window for identity checks")
    common.add_argument("--out", default=None, help="output path (stdout when omitted)")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--tolerance", action="append", metavar="KEY=VAL",
                        help="override a tolerance; 'sum' sets the series tolerance")
    common.add_argument("--cache-dir", default=None, help="mode-table cache (default: $VERTEXKIT_CACHE)")

    p = _Parser(prog="vertexkit", description="Comma three-string vertex in the full-string oscillator basis.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("modes", parents=[common], help="Taylor modes of ((1+x)/(1-x))^(q/p)")
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--L", type=int, default=16)
    s.add_argument("--oracle", action="store_true", help="use the binomial-convolution route")

    s = sub.add_parser("matrices", parents=[common], help="M1, M2 and the basis maps")
    s.add_argument("--kind", choices=("m1", "m2") + MAP_KINDS, default="m1")

    s = sub.add_parser("inverse", parents=[common], help="inverse of beta M1^T + alpha M2^T")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--beta", type=float, default=1.0)

    sub.add_parser("fmatrix", parents=[common], help="closed-form coupling matrix F")

    s = sub.add_parser("vertex", parents=[common], help="Neumann family, optionally the G blocks")
    s.add_argument("--momentum", action="store_true", help="export G instead of the oscillator-basis family")

    s = sub.add_parser("verify", parents=[common], help="run verification suites")
    s.add_argument("--suite", choices=SUITES + ("all",), action="append")
    s.add_argument("--perturb-seed", type=int, default=None, help="shift one seeded F entry by 0.1 before checking")

    s = sub.add_parser("convergence", parents=[common], help="residual tables across N")
    s.add_argument("--identity", choices=IDENTITIES, required=True)

    s = sub.add_parser("cache", parents=[common], help="manage the mode-table cache")
    s.add_argument("action", choices=["list", "clear", "prewarm"])
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--L", type=int, default=8192)
    return p


def _emit(cfg: RunConfig, text: str):
    if cfg.out_path:
        io.write_text(cfg.out_path, text)
    else:
        sys.stdout.write(text)


def _parse_N(raw, default):
    if raw is None:
        return default
    try:
        vals = [int(x) for x in str(raw).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--N must be an integer or comma list, got {raw!r}") from None
    if not vals:
        raise UsageError("--N is empty")
    return vals


def _config(args) -> tuple[RunConfig, list[int]]:
    Ns = _parse_N(args.N, [128, 256, 512] if args.command == "convergence" else [256])
    if args.command != "convergence" and len(Ns) != 1:
        raise UsageError("--N takes a single value for this command")
    N = max(Ns)
    # interior window N/16, at least 8, never past N/4
    window = args.window if args.window is not None else min(max(min(Ns) // 16, 8), max(min(Ns) // 4, 1))
    cfg = RunConfig(
        command=args.command,
        N=min(Ns) if args.command == "convergence" else N,
        sum_order=args.sum_order,
        extrapolation=args.extrapolation,
        window=window,
        out_path=args.out,
        format=args.format,
        tolerances=_parse_tolerances(args.tolerance),
        cache_dir=args.cache_dir,
    )
    cfg.validate()
    if cfg.sum_order < N:
        raise UsageError("--sum-order must be >= N")
    return cfg, Ns


def _cmd_modes(args, cfg):
    e = ExponentPair(args.p, args.q)
    if args.L < 0:
        raise UsageError("--L must be >= 0")
    table = (generate_modes_oracle if args.oracle else generate_modes)(e, args.L)
    if cfg.format == "json":
        return mode_table_json(table)
    return io.matrix_csv(table.coeffs[:, None], f"modes_p{e.p}_q{e.q}", args.L, 0)


def _cmd_matrices(args, cfg):
    N = cfg.N
    if args.kind in ("m1", "m2"):
        cp = build_coupling(N)
        M, base = (cp.M1 if args.kind == "m1" else cp.M2), 1
    else:
        M, base = basis_map(args.kind, N).matrix, 0
    if cfg.format == "csv":
        return io.matrix_csv(M, args.kind, N, base)
    return io.dumps({"kind": args.kind, "N": N, "index_base": base, "rows": io.real_rows(M)})


def _cmd_inverse(args, cfg):
    N = cfg.N
    params = solve_params(args.alpha, args.beta)
    if params.special is not None:
        inv = special_inverse(params.special, build_coupling(N))
        if args.beta != 1.0:
            inv = type(inv)(N, inv.entries / args.beta)
    else:
        a, b = mode_pair(params.p, 2 * N + 2, cfg.cache())
        inv = ansatz_inverse(params, a, b, N)
    if cfg.format == "csv":
        return io.matrix_csv(inv.entries, "inverse", N, 1)
    finite = lambda x: float(x) if np.isfinite(x) else None
    meta = {
        "alpha": params.alpha, "beta": params.beta, "p": params.p,
        "alpha_prime": finite(params.alpha_prime), "beta_prime": finite(params.beta_prime),
        "special": params.special,
    }
    return io.dumps({"kind": "inverse", "N": N, "index_base": 1, "params": meta, "rows": io.real_rows(inv.entries)})


def _fmatrix(cfg):
    sc = cfg.sum_cfg()
    a, b = mode_pair(3, required_length(sc, cfg.N) + 2, cfg.cache())
    return f_assemble(cfg.N, a, b, sc, strict=False)


def _cmd_fmatrix(args, cfg):
    if cfg.N < 2:
        raise UsageError("fmatrix needs N >= 2")
    F = _fmatrix(cfg)
    if cfg.format == "csv":
        return io.matrix_csv(F.entries, "fmatrix", cfg.N, 0)
    return io.dumps(io.fmatrix_payload(F))


def _cmd_vertex(args, cfg):
    if cfg.N < 2:
        raise UsageError("vertex needs N >= 2")
    F = _fmatrix(cfg)
    if args.momentum:
        M = momentum_rep(F)
        blocks, extra = g_family(M), {"kind": "g_blocks", "f00_prime": M.f00_prime}
    else:
        blocks, extra = neumann_family(F).blocks, {"kind": "neumann_family", "f00": F.f00}
    if cfg.format == "json":
        return io.dumps(io.family_payload(cfg.N, blocks, extra))
    if not cfg.out_path:
        raise UsageError("vertex --format csv writes one file per block and needs --out")
    out = Path(cfg.out_path)
    for (r, s), B in sorted(blocks.items()):
        io.write_text(out.with_name(f"{out.stem}_{r}{s}{out.suffix or '.csv'}"),
                      io.matrix_csv(B, f"{extra['kind']}_{r}{s}", cfg.N, 0))
    return None


def _context(cfg, perturb_seed=None) -> Context:
    return Context(N=cfg.N, window=cfg.window, cfg=cfg.sum_cfg(), tolerances=cfg.check_tolerances(),
                   cache=cfg.cache(), perturb_seed=perturb_seed)


def _cmd_verify(args, cfg):
    if cfg.N < 2:
        raise UsageError("verify needs N >= 2")
    names = args.suite or ["all"]
    names = "all" if "all" in names else sorted(set(names), key=SUITES.index)
    report = run_suites(names, _context(cfg, args.perturb_seed))
    for name, res in report["suites"].items():
        for c in res["checks"]:
            mark = "PASS" if c["passed"] else "FAIL"
            print(f"{mark} {name}/{c['name']}: {c['value']:.3e} (tol {c['tolerance']:.1e})", file=sys.stderr)
    return io.dumps(report), report["passed"]


def _cmd_convergence(args, cfg, Ns):
    window = args.window
    report = convergence_report(args.identity, Ns, _context(cfg), window)
    print(convergence_summary(report), file=sys.stderr)
    return io.dumps(report), report["passed"]


def _cmd_cache(args, cfg):
    cache = ModeCache(cfg.cache_dir)
    if args.action == "list":
        entries = [{"p": p, "q": q, "length": L} for p, q, L in cache.entries()]
        return io.dumps({"cache_dir": str(cache.root), "entries": entries})
    if args.action == "clear":
        return io.dumps({"cache_dir": str(cache.root), "removed": cache.clear()})
    paths = cache.prewarm(args.p, args.L)
    return io.dumps({"cache_dir": str(cache.root), "written": [p.name for p in paths]})


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, Ns = _config(args) if args.command != "cache" else (_cache_config(args), [])
        ok = True
        if args.command == "verify":
            text, ok = _cmd_verify(args, cfg)
        elif args.command == "convergence":
            text, ok = _cmd_convergence(args, cfg, Ns)
        else:
            handler = {
                "modes": _cmd_modes, "matrices": _cmd_matrices, "inverse": _cmd_inverse,
                "fmatrix": _cmd_fmatrix, "vertex": _cmd_vertex, "cache": _cmd_cache,
            }[args.command]
            text = handler(args, cfg)
        if text is not None:
            _emit(cfg, text)
    except UsageError as exc:
        print(f"vertexkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"vertexkit: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"vertexkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if ok else EXIT_TOLERANCE


def _cache_config(args) -> RunConfig:
    return RunConfig("cache", out_path=args.out, cache_dir=args.cache_dir)


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
