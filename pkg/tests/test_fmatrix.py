import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FAST_CFG, build_f
from vertexkit.fmatrix import (
    LN_27_16,
    FMatrix,
    RankDeficiencyError,
    SumConvergenceError,
    c_matrix,
    constraint_system,
    f00,
    f00_series,
    f_assemble,
    f_constraint_residual,
    f_element,
    f_oracle_solve,
    midpoint_relations,
)
from vertexkit.taylor import InsufficientModesError, SumConfig, mode_pair

F00_FROZEN = -0.3129837106232803
QUOTED_F00 = -0.312987


def test_f00_closed_form():
    assert f00() == pytest.approx(F00_FROZEN, abs=1e-15)
    assert abs((1 + f00()) / (1 - f00()) - LN_27_16) <= 1e-14
    # the quoted six-digit value is a rounding of the closed form
    assert abs(f00() - QUOTED_F00) < 5e-6


def test_f00_series(modes3):
    a, _ = modes3
    target = 1.5 * math.log(3) - 2 * math.log(2)
    assert target == pytest.approx(0.261624, abs=1e-6)
    raw = f00_series(a, SumConfig(2048, "none"))
    ext = f00_series(a, SumConfig(2048, "richardson1"))
    assert abs(raw.value - target) <= 1e-2
    assert abs(ext.value - target) <= 1e-5
    assert abs(ext.value - target) < abs(raw.value - target)


def test_frozen_entries(F64):
    F = F64.entries
    assert F[0, 0].real == pytest.approx(F00_FROZEN, abs=1e-15)
    assert F[2, 0] == pytest.approx(0.2063155, abs=1e-7)
    assert F[0, 1] == pytest.approx(-0.8753225j, abs=1e-7)
    assert F[1, 0] == pytest.approx(0.8753225j, abs=1e-7)


@pytest.mark.parametrize("N", [64, 256])
def test_structure(N):
    F = build_f(N)
    assert F.hermiticity_defect() <= 1e-12
    assert F.parity_reality_defect() <= 1e-12


def test_parity_pattern(F64):
    # same-parity entries real, mixed-parity entries imaginary
    F = F64.entries
    i = np.arange(F.shape[0])
    same = (i[:, None] + i[None, :]) % 2 == 0
    assert np.abs(F.imag[same]).max() < 1e-15
    assert np.abs(F.real[~same]).max() < 1e-15


def test_involution_decreases():
    vals = [build_f(N).involution_residual(16) for N in (128, 256, 512)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-3


def test_entries_read_only(F64):
    with pytest.raises(ValueError):
        F64.entries[0, 0] = 1.0


def test_with_entry_detected(F64):
    G = F64.with_entry(3, 5, 0.1)
    assert G.hermiticity_defect() == pytest.approx(0.1)
    assert F64.hermiticity_defect() <= 1e-12
    assert G.source.endswith("perturbed")


@settings(max_examples=20, deadline=None)
@given(row=st.integers(0, 24), col=st.integers(0, 24))
def test_scalar_path_matches_kernel(modes3, row, col):
    a, b = modes3
    F = build_f(24)
    assert abs(f_element(row, col, a, b, FAST_CFG) - F.entries[row, col]) < 1e-13


def test_strict_mode_raises(modes3):
    a, b = modes3
    tight = SumConfig(64, "none", 1e-12)
    with pytest.raises(SumConvergenceError):
        f_assemble(16, a, b, tight, strict=True)
    F = f_assemble(16, a, b, tight, strict=False)
    assert F.diag_error.max() > 1e-12


def test_assemble_input_checks(modes3):
    a, b = modes3
    with pytest.raises(ValueError):
        f_assemble(1, a, b, FAST_CFG)
    a4, b4 = mode_pair(4, 5000)
    with pytest.raises(ValueError):
        f_assemble(8, a4, b4, FAST_CFG)
    short_a, short_b = mode_pair(3, 40)
    with pytest.raises(InsufficientModesError):
        f_assemble(8, short_a, short_b, FAST_CFG)


def test_shape_validation():
    with pytest.raises(ValueError):
        FMatrix(3, np.zeros((3, 3)), 0.0)


def test_c_matrix():
    C = c_matrix(4)
    assert C.diag.tolist() == [1, -1, 1, -1, 1]
    assert np.array_equal(C.matrix @ C.matrix, np.eye(5))


def test_constraints_shrink():
    reps = [f_constraint_residual(build_f(N), window=16) for N in (128, 256, 512)]
    for key in ("first", "second", "midpoint"):
        vals = [r.maxima[key] for r in reps]
        assert vals[0] > vals[1] > vals[2]
    assert reps[-1].second < 1e-4
    d = reps[0].to_dict()
    assert d["window"] == 16 and len(d["first_rows"]) == 16


def test_constraint_system_shape():
    A, s = constraint_system(10)
    assert A.shape == (11, 11)
    assert s.tolist() == [1] * 5 + [-1] * 5 + [1]


def test_midpoint_relations(modes3, F64):
    a, b = modes3
    vals = midpoint_relations(F64, a, b, 8)
    assert len(vals) == 9
    assert max(v.value for v in vals) < 1e-6
    with pytest.raises(ValueError):
        midpoint_relations(F64, a, b, 65)


def test_oracle_matches_closed_form(F64):
    O = f_oracle_solve(64)
    assert O.source == "oracle"
    assert O.diagnostics["null_space_dim"] == 0
    assert O.hermiticity_defect() < 1e-10
    assert np.abs(O.entries - F64.entries)[:9, :9].max() <= 5e-2
    assert abs(O.f00 - QUOTED_F00) <= 2e-2


def test_oracle_limits():
    with pytest.raises(ValueError):
        f_oracle_solve(256)
    with pytest.raises(ValueError):
        f_oracle_solve(1)


def test_rank_deficiency_error_carries_dimension():
    err = RankDeficiencyError(3)
    assert err.null_dim == 3
