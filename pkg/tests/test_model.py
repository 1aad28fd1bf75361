import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvbs.model import (DIVERGENT, GapClass, ModelError, Params, c_orthant,
                        c_tilde, choose_ell, classify_halfspace, classify_zd,
                        epsilon_ell, infinite_gs_census, log_lambda,
                        select_tilt)


def test_params_parsing_is_exact():
    p = Params(("0.1", "1"), ("2", "1/3"))
    assert p.lambda_a == (Fraction(1, 10), Fraction(1))
    assert p.lambda_b == (Fraction(2), Fraction(1, 3))
    assert log_lambda(p, "a")[1] == 0.0  # exactly zero at 1


def test_params_validation():
    with pytest.raises(ModelError):
        Params(("0",), ("1",))
    with pytest.raises(ModelError):
        Params(("-2",), ("1",))
    with pytest.raises(ModelError):
        Params(("1", "2"), ("1",))  # length mismatch


def test_classify_zd():
    assert classify_zd(Params(("1", "1"), ("2", "3"))) is GapClass.GAPLESS
    assert classify_zd(Params(("2", "1"), ("1", "3"))) is GapClass.GAPPED
    assert classify_zd(Params(("1",), ("1",))) is GapClass.GAPLESS


def test_classifier_grid_exactness():
    # gapless exactly when one species' vector is all ones
    vals = [Fraction(1, 2), Fraction(1), Fraction(2)]
    for a1 in vals:
        for a2 in vals:
            for b1 in vals:
                for b2 in vals:
                    p = Params((a1, a2), (b1, b2))
                    expect = (a1 == a2 == 1) or (b1 == b2 == 1)
                    got = classify_zd(p) is GapClass.GAPLESS
                    assert got == expect, (a1, a2, b1, b2)


def test_classify_halfspace():
    normal = (0.0, 1.0)
    p = Params(("1", "1"), ("2", "2"))
    assert classify_halfspace(p, normal) is GapClass.GAPLESS
    # log vector anti-parallel to the inward normal: gapless edge modes
    lam = math.exp(-1.0)
    p2 = Params(("2", "3"), (str(Fraction(math.exp(0.0))), "1"))
    # those are exact fractions; build the anti-parallel case numerically
    p3 = Params(("2", "2"), (Fraction(1, 2), "1"))
    # log_b = (-log2, 0) ~ anti-parallel to normal (1, 0)
    assert classify_halfspace(p3, (1.0, 0.0)) is GapClass.GAPLESS
    assert classify_halfspace(p3, (0.0, 1.0)) is GapClass.CONJECTURED_GAPPED
    del lam, p2


def test_census_zd():
    # particles escape to infinity: only the vacuum survives
    p = Params(("2",), ("3",))
    assert infinite_gs_census("zd", p) == {"vacuum"}
    assert infinite_gs_census("halfspace", p) == {"vacuum"}


def test_orthant_census_and_constant():
    p = Params((Fraction(1, 2), Fraction(1, 3)), (Fraction(2), Fraction(3)))
    assert c_orthant(p, "a") == pytest.approx(
        (1 / (1 - 0.25)) * (1 / (1 - 1 / 9)))
    assert c_orthant(p, "b") == DIVERGENT
    states = infinite_gs_census("orthant", p)
    assert "omega_a" in states and "omega_b" not in states


def test_select_tilt_case1_d1():
    t = select_tilt(Params(("10",), ("1/10",)))
    assert t.case == 1
    assert t.lambda_tilde_a == (Fraction(10),)
    assert c_tilde(t) == pytest.approx(101.0, rel=1e-12)


def test_select_tilt_case1_multidim_margin():
    # shared coordinate 0; coordinate 1 needs a tilt integer since both are 1
    p = Params(("10", "1"), ("1/10", "1"))
    t = select_tilt(p)
    assert t.case == 1
    assert t.v == (1,)
    assert t.lambda_tilde_a[1] == Fraction(1, 10)
    assert t.lambda_tilde_b[1] == Fraction(10)


def test_select_tilt_case2():
    p = Params(("10", "1"), ("1", "1/10"))
    t = select_tilt(p)
    assert t.case == 2
    assert t.lambda_tilde_a == (Fraction(10), Fraction(1, 10))
    assert t.lambda_tilde_b == (Fraction(1, 10), Fraction(1, 10))
    assert t.kappa_a == pytest.approx(2.0)  # 1 + 1^2
    assert t.kappa_b == pytest.approx(1.01)


def test_select_tilt_rejects_gapless():
    with pytest.raises(ModelError):
        select_tilt(Params(("1",), ("2",)))


def test_select_tilt_margin_failure():
    close = Fraction(101, 100)  # |log| ~ 0.00995 < eta
    with pytest.raises(ModelError):
        select_tilt(Params((close,), (close,)))


def test_c_tilde_values():
    t10 = select_tilt(Params(("10",), ("1/10",)))
    assert c_tilde(t10) == pytest.approx(101.0, rel=1e-12)
    t2 = select_tilt(Params(("2",), ("1/2",)))
    assert c_tilde(t2) == pytest.approx(5.0, rel=1e-12)


def test_choose_ell_frozen_values():
    t10 = select_tilt(Params(("10",), ("1/10",)))
    ell, eps = choose_ell(t10)
    assert ell == 7
    assert eps == pytest.approx(0.2080, abs=1e-4)
    assert eps < 1 / math.sqrt(7)
    # one step earlier must fail
    assert epsilon_ell(t10, 6) > 1 / math.sqrt(6)

    t2 = select_tilt(Params(("2",), ("1/2",)))
    ell2, eps2 = choose_ell(t2)
    assert ell2 == 13
    assert epsilon_ell(t2, 12) > 1 / math.sqrt(12)
    assert eps2 < 1 / math.sqrt(13)


def test_choose_ell_cap():
    t = select_tilt(Params(("10",), ("1/10",)))
    with pytest.raises(ModelError):
        choose_ell(t, cap=4)


@given(st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(2),
                        Fraction(3), Fraction(5)]),
       st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(2),
                        Fraction(3), Fraction(5)]))
@settings(max_examples=25, deadline=None)
def test_epsilon_monotone_in_ell(la, lb):
    t = select_tilt(Params((la,), (lb,)))
    vals = [epsilon_ell(t, ell) for ell in range(3, 12)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
