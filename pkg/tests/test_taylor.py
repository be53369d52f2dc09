import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vertexkit.taylor import (
    ExponentPair,
    InsufficientModesError,
    ModeCache,
    ModeTable,
    O_closed,
    SumConfig,
    effective_terms,
    generate_modes,
    generate_modes_oracle,
    identity_uS,
    mode_pair,
    mode_table_json,
    parity_sum,
    read_mode_table,
    reflected_square_sum,
    richardson,
    sum_Etilde,
    sum_O,
    sum_S,
    sum_Stilde,
    tail_exponents,
    w_element,
    w_recursion_residual,
)

A_FIRST = [Fraction(1), Fraction(2, 3), Fraction(2, 9), Fraction(22, 81)]
B_FIRST = [Fraction(1), Fraction(4, 3), Fraction(8, 9), Fraction(68, 81)]


def exact_modes(s, L):
    u = [Fraction(1), 2 * s]
    for k in range(1, L):
        u.append((2 * s * u[k] + (k - 1) * u[k - 1]) / (k + 1))
    return u[: L + 1]


def test_first_coefficients_frozen():
    a = generate_modes(ExponentPair(3, 1), 3)
    b = generate_modes(ExponentPair(3, 2), 3)
    assert a.coeffs.tolist() == pytest.approx([float(x) for x in A_FIRST], rel=1e-15)
    assert b.coeffs.tolist() == pytest.approx([float(x) for x in B_FIRST], rel=1e-15)


def test_recursion_matches_exact_rationals():
    exact = exact_modes(Fraction(1, 3), 60)
    got = generate_modes(ExponentPair(3, 1), 60).coeffs
    assert np.allclose(got, [float(x) for x in exact], rtol=1e-13, atol=0)


@pytest.mark.parametrize("p", [2, 3, 4, 6])
@pytest.mark.parametrize("conj", [False, True])
def test_recursion_matches_oracle(p, conj):
    e = ExponentPair(p, p - 1 if conj else 1)
    r = generate_modes(e, 2000).coeffs
    o = generate_modes_oracle(e, 2000).coeffs
    assert np.max(np.abs(r - o) / np.abs(o)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(p=st.integers(2, 12), conj=st.booleans(), L=st.integers(0, 400))
def test_recursion_oracle_property(p, conj, L):
    e = ExponentPair(p, p - 1 if conj else 1)
    r = generate_modes(e, L).coeffs
    o = generate_modes_oracle(e, L).coeffs
    assert r.shape == (L + 1,)
    assert np.allclose(r, o, rtol=1e-11, atol=0)


def test_modes_large_k_asymptotics():
    # u_k ~ (2^s / Gamma(s)) k^(s-1)
    s = 1 / 3
    a = generate_modes(ExponentPair(3, 1), 100000)
    k = 100000
    lead = 2 ** s / math.gamma(s) * k ** (s - 1)
    assert abs(a[k] / lead - 1) < 1e-3


def test_exponent_pair_validation():
    with pytest.raises(ValueError):
        ExponentPair(1, 1)
    with pytest.raises(ValueError):
        ExponentPair(5, 2)
    assert ExponentPair(3, 1).conjugate() == ExponentPair(3, 2)
    assert ExponentPair(4, 3).angle == pytest.approx(3 * math.pi / 4)


def test_mode_table_read_only_and_truncation():
    a = generate_modes(ExponentPair(3, 1), 10)
    with pytest.raises(ValueError):
        a.coeffs[0] = 2.0
    assert a.truncated(4).length == 4
    with pytest.raises(InsufficientModesError):
        a.truncated(11)


def test_sum_config_validation():
    with pytest.raises(ValueError):
        SumConfig(8)
    with pytest.raises(ValueError):
        SumConfig(extrapolation="aitken")
    with pytest.raises(ValueError):
        SumConfig(tolerance=0.0)


def test_tail_exponents_sorted():
    assert tail_exponents(1 / 3, 1) == pytest.approx([2 / 3, 4 / 3, 5 / 3, 7 / 3])


def test_effective_terms_grows_with_shift():
    cfg = SumConfig(64, "richardson1", 1e-4)
    assert effective_terms(cfg, 4) == 64
    assert effective_terms(cfg, 20) >= 160


def test_richardson_removes_known_powers():
    # partial sums of 1/k^2 have tail 1/M - 1/(2M^2) + ...
    M = [256, 512, 1024, 2048]
    vals = [sum(1.0 / k ** 2 for k in range(1, m + 1)) for m in M]
    table = richardson(vals, [1.0, 2.0, 3.0])
    exact = math.pi ** 2 / 6
    assert abs(vals[-1] - exact) > 1e-4
    assert abs(table[-1][-1] - exact) < 1e-11


def test_O_closed_form(modes3):
    a, b = modes3
    cfg = SumConfig(4096, "richardson2", 1e-6)
    for t in (a, b):
        for n in range(2, 21, 2):
            plus = sum_O("+", n, t, cfg)
            assert abs(plus.value - O_closed(n, t)) <= plus.est_error


def test_O_reflection(modes3):
    # O_{-n} = -cos(q pi/p) O_n
    a, b = modes3
    cfg = SumConfig(4096, "richardson2", 1e-6)
    for t in (a, b):
        c = math.cos(t.exponents.angle)
        for n in range(2, 21, 2):
            plus = sum_O("+", n, t, cfg)
            minus = sum_O("-", n, t, cfg)
            assert abs(minus.value + c * plus.value) <= 2 * (minus.est_error + plus.est_error)


@pytest.mark.parametrize("extrap", ["none", "richardson1", "richardson2"])
def test_est_error_bounds_true_error(modes3, extrap):
    a, _ = modes3
    cfg = SumConfig(2048, extrap, 1e-6)
    for n in (2, 6, 12):
        v = sum_O("+", n, a, cfg)
        assert abs(v.value - O_closed(n, a)) <= v.est_error


def test_raw_sum_converges_slowly(modes3):
    a, _ = modes3
    raw = sum_O("+", 4, a, SumConfig(2048, "none", 1e-6))
    ext = sum_O("+", 4, a, SumConfig(2048, "richardson2", 1e-6))
    exact = O_closed(4, a)
    assert abs(ext.value - exact) < abs(raw.value - exact) / 100


def test_identity_uS(modes3, tight_cfg):
    a, b = modes3
    worst = max(abs(identity_uS(n, a, b, tight_cfg).value - 1.0 / n) for n in range(1, 51))
    assert worst < 1e-5


def test_reflected_square_sums(modes3, tight_cfg):
    a, b = modes3
    for t in (a, b):
        for n in range(1, 13):
            pred = reflected_square_sum(n, t, tight_cfg)
            minus = (sum_Stilde if n % 2 == 0 else sum_Etilde)("-", n, t, tight_cfg)
            assert abs(pred.value - minus.value) <= 1e-5 * max(1.0, abs(minus.value))


def test_sum_index_validation(modes3, fast_cfg):
    a, _ = modes3
    with pytest.raises(ValueError):
        sum_O("+", 3, a, fast_cfg)
    with pytest.raises(ValueError):
        sum_O("x", 2, a, fast_cfg)
    with pytest.raises(ValueError):
        sum_Etilde("+", 2, a, fast_cfg)
    with pytest.raises(ValueError):
        sum_S(0, a, fast_cfg)


def test_short_table_rejected(fast_cfg):
    a = generate_modes(ExponentPair(3, 1), 100)
    with pytest.raises(InsufficientModesError):
        parity_sum(a, 1, 2, 1, fast_cfg)


def test_w_recursion(modes3):
    a, b = modes3
    worst = 0.0
    for n in range(1, 501, 37):
        for m in range(1, 501, 41):
            if (n + m) % 2:
                worst = max(worst, w_recursion_residual(n, m, a, b))
    assert worst <= 1e-12


def test_w_element_symmetry(modes3):
    a, b = modes3
    assert w_element(3, 8, a, b) == pytest.approx(w_element(8, 3, a, b), rel=1e-15)
    with pytest.raises(ValueError):
        w_element(0, 0, a, b)


def test_mode_pair_rejects_mismatch(modes3, fast_cfg):
    a, _ = modes3
    a4, b4 = mode_pair(4, 64)
    with pytest.raises(ValueError):
        identity_uS(1, a, b4, fast_cfg)


def test_json_round_trip(tmp_path):
    t = generate_modes(ExponentPair(4, 3), 50)
    path = tmp_path / "m.json"
    path.write_text(mode_table_json(t))
    back = read_mode_table(path)
    assert back.exponents == t.exponents
    assert np.array_equal(back.coeffs, t.coeffs)


def test_cache_round_trip(tmp_path):
    cache = ModeCache(tmp_path)
    e = ExponentPair(3, 1)
    first = cache.get(e, 64)
    assert cache.entries() == [(3, 1, 64)]
    cache.put(generate_modes(e, 256))
    again = cache.get(e, 100)
    assert again.length == 100
    assert np.array_equal(again.coeffs[:65], first.coeffs)
    assert sorted(p.name for p in cache.prewarm(3, 32)) == ["modes_p3_q1_L32.json", "modes_p3_q2_L32.json"]
    assert cache.clear() == 4
    assert cache.entries() == []
    assert not list(tmp_path.glob(".tmp-*"))


def test_cache_ignores_foreign_files(tmp_path):
    (tmp_path / "modes_px_q1_L3.json").write_text("{}")
    assert ModeCache(tmp_path).entries() == []


def test_mode_table_constructor_copies():
    src = np.ones(4)
    t = ModeTable(ExponentPair(2, 1), src)
    src[0] = 5.0
    assert t[0] == 1.0


def test_w_element_values(modes3):
    a, b = modes3
    assert w_element(1, 2, a, b) == pytest.approx(8 / 27, rel=1e-15)
    assert w_element(0, 1, a, b) == pytest.approx(2.0, rel=1e-15)


def test_identity_uS_p4(tight_cfg):
    a, b = mode_pair(4, 2 ** 16 + 8)
    for n in (1, 5):
        assert identity_uS(n, a, b, tight_cfg).value == pytest.approx(1.0 / n, abs=1e-5)


def test_doubling_sum_order_within_estimate(modes3):
    a, _ = modes3
    for power, start, shift in ((1, 1, 4), (2, 1, -4), (2, 0, 3)):
        lo = parity_sum(a, start, shift, power, SumConfig(2048, "richardson2", 1e-6))
        hi = parity_sum(a, start, shift, power, SumConfig(4096, "richardson2", 1e-6))
        assert abs(hi.value - lo.value) <= lo.est_error
