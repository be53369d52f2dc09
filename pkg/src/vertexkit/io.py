"""Serialisation of matrices and reports.

CSV layout: two header lines (field names, then values of kind, N and
index_base), followed by one line per matrix row.  Reals are written with 17
significant digits; complex entries take two columns (re, im).
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def matrix_csv(matrix: np.ndarray, kind: str, N: int, index_base: int) -> str:
    M = np.asarray(matrix)
    lines = ["kind,N,index_base", f"{kind},{N},{index_base}"]
    if np.iscomplexobj(M):
        for row in M:
            lines.append(",".join(f"{fmt17(z.real)},{fmt17(z.imag)}" for z in row))
    else:
        for row in M:
            lines.append(",".join(fmt17(x) for x in row))
    return "\n".join(lines) + "\n"


def read_matrix_csv(text: str) -> tuple[dict, np.ndarray]:
    lines = text.strip("\n").split("\n")
    keys, vals = lines[0].split(","), lines[1].split(",")
    meta = dict(zip(keys, vals))
    meta["N"], meta["index_base"] = int(meta["N"]), int(meta["index_base"])
    rows = [np.array([float(x) for x in ln.split(",")]) for ln in lines[2:]]
    M = np.array(rows)
    return meta, M


def complex_pairs(M: np.ndarray) -> list:
    """Row-major [re, im] pairs."""
    return [[float(z.real), float(z.imag)] for z in np.asarray(M, dtype=np.complex128).ravel()]


def real_rows(M: np.ndarray) -> list:
    return [[float(x) for x in row] for row in np.asarray(M, dtype=np.float64)]


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True) + "\n"


def write_text(path: str | os.PathLike, text: str) -> Path:
    """Write through a temporary file in the target directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return target


def fmatrix_payload(F) -> dict:
    return {
        "N": F.N,
        "f00": F.f00,
        "source": F.source,
        "sum_cfg": F.sum_cfg.to_dict() if F.sum_cfg is not None else None,
        "entries": complex_pairs(F.entries),
    }


def fmatrix_from_payload(data: dict):
    from .fmatrix import FMatrix
    from .taylor import SumConfig

    N = int(data["N"])
    pairs = np.asarray(data["entries"], dtype=np.float64)
    ent = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(N + 1, N + 1)
    cfg = SumConfig(**data["sum_cfg"]) if data.get("sum_cfg") else None
    return FMatrix(N, ent, float(data["f00"]), cfg, None, data.get("source", "closed_form"))


def family_payload(N: int, blocks: dict, extra: dict | None = None) -> dict:
    out = {"N": N, "blocks": {f"{r}{s}": real_rows(B) for (r, s), B in sorted(blocks.items())}}
    if extra:
        out.update(extra)
    return out
