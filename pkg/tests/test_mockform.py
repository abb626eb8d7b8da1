import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kleinmock.errors import InconsistentExtraction, OrbitNotFound, ParseError, PoleOnHorocycle
from kleinmock.mockform import (MockFormSession, al_L_value, al_matrix, al_mero_part, al_sign,
                                dft_coefficients, extract_function, fourier_extract,
                                fourier_extract_many, mero_part, normalized_preimages,
                                parse_target, sample_count, sample_horocycle, scalar_zv,
                                working_digits, zhat_V)
from kleinmock.numerics import PrecisionContext
from kleinmock.periods import GroupElement

from oracles import eta_quotient

LEVEL27 = {-1: Fraction(1), 2: Fraction(1, 2), 5: Fraction(-701, 5), 8: Fraction(1407, 4),
           11: Fraction(-40776, 11), 14: Fraction(37961, 2), 17: Fraction(-2125098, 17)}

ZV23 = ["3.864515", "0.142266", "0.319448", "0.193313", "0.304709",
        "0.055558", "0.059060", "0.080332", "0.572492", "-0.190607"]
PRE23 = [
    ["0.259008", "1.000942", "4.868978", "18.294037", "68.247223", "252.912538",
     "938.377980", "3477.898343", "12892.503560", "47787.961740"],
    ["-0.505669", "-1.954167", "-6.9786217", "-26.191387", "-97.573609", "-361.535343",
     "-1341.254086", "-4971.053026", "-18427.581035", "-68304.578170"],
]


def _zv256(n):
    r2 = mpmath.sqrt(2)
    forms = {
        1: ((-1 + 2 * r2), (2 - r2)),
        3: ((2 - 2 * r2), (8 - 8 * r2)),
        # the decimal expansion fixes the sign of the imaginary part at n = 5
        5: ((200 - 160 * r2) / 5, (104 - 100 * r2) / 5),
        7: ((1441 - 1056 * r2) / 7, 224 * r2 / 7),
        9: ((5211 - 3510 * r2) / 9, (-5238 + 3987 * r2) / 9),
    }
    re, im = forms[n]
    return mpmath.mpc(re, im)


# ---------------------------------------------------------------- extraction machinery

def test_working_digits_and_samples():
    assert working_digits(40, 0, 0.35) == 50
    assert working_digits(40, 17, 0.35) > working_digits(40, 5, 0.35)
    for n in (1, 17, 109):
        M = sample_count(n, 0.35, 40)
        assert M & (M - 1) == 0 and M >= 2 * n + 4


@settings(max_examples=20, deadline=None)
@given(st.dictionaries(st.integers(-1, 12), st.integers(-50, 50), min_size=1, max_size=6))
def test_dft_recovers_fourier_polynomials(coeffs):
    with mpmath.workdps(50):
        y = mpmath.mpf("0.4")
        fn = lambda tau: mpmath.fsum(c * mpmath.expjpi(2 * n * tau) for n, c in coeffs.items())
        got = dft_coefficients(sample_horocycle(fn, y, 32), y, -1, 12)
        for n in range(-1, 13):
            assert abs(got[n] - coeffs.get(n, 0)) < mpmath.mpf(10) ** -34


def test_extract_function_synthetic(ctx):
    fn = lambda tau: mpmath.expjpi(-2 * tau) + 3 * mpmath.expjpi(4 * tau)
    tab = extract_function(fn, 10, 0.35, ctx)
    assert tab.rationals[-1] == 1 and tab.rationals[2] == 3
    for n in range(0, 11):
        if n != 2:
            assert abs(tab[n]) < mpmath.mpf(10) ** -34
    assert tab.consistency < mpmath.mpf(10) ** -34


def test_extract_function_detects_inconsistency(ctx):
    # a pole at height 0.5 makes the two horocycles disagree
    fn = lambda tau: 1 / (mpmath.expjpi(2 * tau) - mpmath.exp(-mpmath.pi))
    with pytest.raises(InconsistentExtraction):
        extract_function(fn, 6, 0.35, ctx, M=16)


def test_pole_on_horocycle(s27, ctx):
    from kleinmock.errors import NearThetaDivisor

    def fn(tau):
        raise NearThetaDivisor("synthetic")

    with pytest.raises(PoleOnHorocycle):
        sample_horocycle(fn, 0.3, 4)


def test_parse_target():
    assert parse_target("scalar") == ("scalar",)
    assert parse_target("alsum:23:2") == ("alsum", 23, 2)
    for bad in ("component", "al:x", "nope:1", "scalar:1"):
        with pytest.raises(ParseError):
            parse_target(bad)


def test_bad_component_index(s23):
    with pytest.raises(ParseError):
        fourier_extract(s23, 2, target="component:3")


def test_session_errors(ctx):
    with pytest.raises(ParseError):
        MockFormSession.open("23.2.a.a", ctx, basis="magic")
    with pytest.raises(OrbitNotFound):
        MockFormSession.open("9999.2.x.x", ctx)


# ---------------------------------------------------------------- pointwise structure

@pytest.mark.parametrize("name", ["s27", "s23", "s256"])
def test_gamma0_invariance(name, request, ctx):
    s = request.getfixturevalue(name)
    N = s.orbit.level
    g = GroupElement(1, 0, N, 1)
    with ctx.work():
        # near the balanced point both tau and g tau stay at height ~ 1/N
        tau = mpmath.mpc(-1, "1.3") / N
        a = zhat_V(tau, s)
        b = zhat_V(g.act(tau), s)
        assert max(abs(x - y) for x, y in zip(a, b)) < 1e-28


@pytest.mark.parametrize("name", ["s27", "s23"])
def test_mero_part_is_holomorphic(name, request, ctx):
    s = request.getfixturevalue(name)
    with ctx.work():
        tau = mpmath.mpc("0.21", "0.5")
        h = mpmath.mpf(10) ** -12
        vals = [mero_part(tau + d, s) for d in (h, -h, 1j * h, -1j * h)]
        for j in range(s.g):
            dbar = (vals[0][j] - vals[1][j]) / (2 * h) + 1j * (vals[2][j] - vals[3][j]) / (2 * h)
            assert abs(dbar) < 1e-10
        z = [zhat_V(tau + d, s) for d in (h, -h, 1j * h, -1j * h)]
        assert max(abs((z[0][j] - z[1][j]) / (2 * h) + 1j * (z[2][j] - z[3][j]) / (2 * h))
                   for j in range(s.g)) > 1e-3


def test_scalar_is_component_sum(s23, ctx):
    with ctx.work():
        tau = mpmath.mpc("0.1", "0.6")
        assert abs(scalar_zv(tau, s23) - mpmath.fsum(mero_part(tau, s23))) < ctx.check_eps


def test_linearity_of_extraction(s23, ctx):
    tabs = fourier_extract_many(s23, 4, ["scalar", "component:1", "component:2"], ctx=ctx)
    with ctx.work():
        for n in range(-1, 5):
            assert abs(tabs["scalar"][n] - tabs["component:1"][n] - tabs["component:2"][n]) < ctx.check_eps


def test_precision_independence(s27):
    lo = fourier_extract(s27, 5)
    hi = fourier_extract(s27.with_digits(50), 5)
    for n in range(-1, 6):
        assert abs(lo[n] - hi[n]) < mpmath.mpf(10) ** -36


# ---------------------------------------------------------------- reference tables

def test_level27_table(s27):
    tab = fourier_extract(s27, 17)
    for n in range(-1, 18):
        if n in LEVEL27:
            assert tab.rationals[n] == LEVEL27[n]
        else:
            assert abs(tab[n]) < 1e-10
    assert tab.consistency < mpmath.mpf(10) ** -10


def test_level23_tables(s23):
    tabs = fourier_extract_many(s23, 9, ["scalar", "preimage:1", "preimage:2"])
    zv = tabs["scalar"]
    assert abs(zv[-1] - 1) < 1e-30
    for n in range(0, 10):
        assert abs(zv[n] - mpmath.mpf(ZV23[n])) < 1e-5
    for k in (1, 2):
        t = tabs[f"preimage:{k}"]
        for n in range(-1, 9):
            ref = mpmath.mpf(PRE23[k - 1][n + 1])
            assert abs(t[n] - ref) < 1e-5 * max(1, abs(ref))


def test_level256_closed_forms(s256, ctx):
    tab = fourier_extract(s256, 9)
    with ctx.work():
        assert abs(tab[-1] - 1) < 1e-30
        for n in (1, 3, 5, 7, 9):
            assert abs(tab[n] - _zv256(n)) < 1e-20
        for n in (0, 2, 4, 6, 8):
            assert abs(tab[n]) < 1e-20


# ---------------------------------------------------------------- Atkin-Lehner

def test_al_matrices():
    for N, Q in ((23, 23), (27, 27), (10, 2), (10, 5), (12, 4), (12, 3)):
        a, b, c, d = al_matrix(N, Q)
        assert a * d - b * c == Q and a % Q == 0 and d % Q == 0 and c % N == 0
    assert al_matrix(23, 1) == (1, 0, 0, 1)


def test_al_signs(s23, s27):
    assert al_sign(s23.orbit, 23) == -1
    assert al_sign(s23.orbit, 1) == 1
    with pytest.raises(ValueError):
        al_sign(s23.orbit, 5)


def test_al_identity_divisor(s27, ctx):
    with ctx.work():
        tau = mpmath.mpc("0.05", "0.4")
        L = al_L_value(1, s27)
        assert all(x == 0 for x in L)
        a = al_mero_part(tau, 1, s27, L)
        b = mero_part(tau, s27)
        assert max(abs(x - y) for x, y in zip(a, b)) < ctx.check_eps


def _binary_theta(a, b, c, n):
    out = [0] * (n + 1)
    for x in range(-n - 1, n + 2):
        for y in range(-n - 1, n + 2):
            v = a * x * x + b * x * y + c * y * y
            if v <= n:
                out[v] += 1
    return out


def hauptmodul23(n):
    """``theta_{x^2+xy+6y^2} / (eta(tau) eta(23 tau))`` as ``{exponent: coefficient}``."""
    num = _binary_theta(1, 1, 6, n + 1)
    e = eta_quotient([(1, 1), (23, 1)], n + 2)
    den = [e.get(k + 1, 0) for k in range(n + 2)]
    inv = [Fraction(0)] * (n + 2)
    inv[0] = Fraction(1, den[0])
    for k in range(1, n + 2):
        inv[k] = -sum(den[j] * inv[k - j] for j in range(1, k + 1)) / den[0]
    return {k - 1: sum(num[j] * inv[k - j] for j in range(k + 1)) for k in range(n + 2)}


def test_hauptmodul_oracle():
    T = hauptmodul23(7)
    assert [T[k] for k in range(-1, 8)] == [1, 3, 4, 7, 13, 19, 33, 47, 74]


def test_level23_atkin_lehner(s23):
    tabs = fourier_extract_many(s23, 6, ["alsum:23:1", "alsum:23:2"])
    scales = []
    for k in (1, 2):
        t = tabs[f"alsum:23:{k}"]
        c = t[-1]
        scales.append(c)
        T = hauptmodul23(6)
        for n in range(1, 7):
            assert abs(t[n] / c - T[n]) < 1e-10
    assert abs(scales[0] - mpmath.mpf("-2.732921")) < 1e-4
    assert abs(scales[1] - mpmath.mpf("3.7329211")) < 1e-4
    assert abs(tabs["alsum:23:1"][0] / scales[0] - mpmath.mpf("-0.019847")) < 1e-4
    assert abs(tabs["alsum:23:2"][0] / scales[1] - mpmath.mpf("2.543165")) < 1e-4
