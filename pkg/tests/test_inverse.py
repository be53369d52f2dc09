import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vertexkit.basis import build_coupling
from vertexkit.inverse import (
    ParameterDomainError,
    ansatz_inverse,
    inverse_residuals,
    numeric_inverse,
    params_from_strings,
    solve_params,
    special_inverse,
)
from vertexkit.taylor import InsufficientModesError, mode_pair


@pytest.fixture(scope="module")
def inv512(modes3):
    a, b = modes3
    return ansatz_inverse(solve_params(0.5, 1.0), a, b, 512)


def test_params_for_p3():
    prm = solve_params(0.5, 1.0)
    assert prm.p == 3
    assert prm.alpha_prime == pytest.approx(1 / math.sqrt(3), rel=1e-15)
    assert prm.beta_prime == pytest.approx(-1 / (2 * math.sqrt(3)) / 0.5, rel=1e-15)
    r1, r2 = prm.condition_residuals()
    assert abs(r1) < 1e-15 and abs(r2) < 1e-15


@settings(max_examples=40, deadline=None)
@given(p=st.integers(2, 64), beta=st.floats(0.1, 10), neg=st.booleans())
def test_params_conditions_hold(p, beta, neg):
    alpha = (-1 if neg else 1) * beta * math.cos(math.pi / p)
    if p == 2:
        return  # alpha = 0 is outside the domain
    prm = solve_params(alpha, beta)
    assert prm.p == p
    r1, r2 = prm.condition_residuals()
    assert abs(r1) < 1e-12 and abs(r2) < 1e-12


def test_special_routing():
    assert solve_params(1.0, 1.0).special == "plus"
    assert solve_params(-2.0, 2.0).special == "minus"
    assert params_from_strings(6, 3).special == "plus"
    assert params_from_strings(3, 3).special == "minus"


def test_params_from_strings():
    prm = params_from_strings(1, 3)
    assert prm.p == 3 and prm.k == 1
    assert prm.alpha == pytest.approx(0.5)


def test_domain_errors():
    with pytest.raises(ParameterDomainError):
        solve_params(0.3, 1.0)
    with pytest.raises(ParameterDomainError):
        solve_params(0.0, 1.0)
    with pytest.raises(ParameterDomainError):
        params_from_strings(0, 3)


def test_ansatz_entry_frozen(modes3):
    a, b = modes3
    inv = ansatz_inverse(solve_params(0.5, 1.0), a, b, 4)
    assert inv.entries[0, 0] == pytest.approx(0.645133, abs=5e-7)


def test_ansatz_rejects_special_and_short(modes3):
    a, b = modes3
    with pytest.raises(ValueError):
        ansatz_inverse(solve_params(1.0, 1.0), a, b, 8)
    a4, b4 = mode_pair(4, 20)
    with pytest.raises(ValueError):
        ansatz_inverse(solve_params(0.5, 1.0), a4, b4, 8)
    a3, b3 = mode_pair(3, 10)
    with pytest.raises(InsufficientModesError):
        ansatz_inverse(solve_params(0.5, 1.0), a3, b3, 8)


def test_ansatz_residuals_decrease(modes3):
    a, b = modes3
    prm = solve_params(0.5, 1.0)
    rows = []
    for N in (128, 256, 512):
        rows.append(inverse_residuals(ansatz_inverse(prm, a, b, N), 0.5, 1.0, N // 16))
    for key in ("left", "right"):
        vals = [r[key] for r in rows]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] <= 5e-2


def test_ansatz_scales_with_beta(modes3):
    # (c B)^{-1} = B^{-1} / c with alpha/beta fixed
    a, b = modes3
    one = ansatz_inverse(solve_params(0.5, 1.0), a, b, 16).entries
    two = ansatz_inverse(solve_params(1.0, 2.0), a, b, 16).entries
    assert np.allclose(two, one / 2, rtol=1e-14)


def test_ansatz_matches_dense_inverse(modes3):
    a, b = modes3
    inv = ansatz_inverse(solve_params(0.5, 1.0), a, b, 1024).entries
    num = numeric_inverse(0.5, 1.0, 1024)
    assert np.abs(num[:16, :16] - inv[:16, :16]).max() <= 1e-2


def test_special_inverse_bad_name():
    with pytest.raises(ValueError):
        special_inverse("both", build_coupling(4))
