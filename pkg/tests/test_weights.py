import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmgraph import (
    LimitParams,
    ScalingTriple,
    WeightSeq,
    classify_criticality,
    er_limit_params,
    gen_er_triple,
    gen_powerlaw_triple,
    powerlaw_alpha0,
    sigma_r,
)
from wmgraph.weights import _zeta_em

weight_vectors = st.lists(
    st.floats(min_value=0.01, max_value=50.0, allow_nan=False),
    min_size=1, max_size=30)


def test_weights_sorted_and_positive():
    w = WeightSeq([1.0, 3.0, 2.0])
    assert np.all(w.w == [3.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        WeightSeq([1.0, 0.0])
    with pytest.raises(ValueError):
        WeightSeq([])


def test_sigma_hand_values():
    w = WeightSeq([3.0, 2.0, 2.0, 1.0, 1.0, 1.0])
    assert w.sigma(1.0) == 10.0
    assert w.sigma(2.0) == 20.0
    assert w.sigma(3.0) == 46.0
    assert sigma_r(WeightSeq([2.0, 1.0]), 2.0) == 5.0


def test_sigma_fsum_exactness():
    # dyadic weights sum exactly in float arithmetic
    w = WeightSeq([0.5, 0.25, 0.125] * 100)
    assert w.sigma(1.0) == 100 * 0.875


@given(weight_vectors, st.floats(min_value=0.5, max_value=4.0))
@settings(max_examples=50, deadline=None)
def test_sigma_homogeneity(ws, lam):
    w = WeightSeq(ws)
    w2 = WeightSeq(lam * np.asarray(sorted(ws, reverse=True)))
    for r in (1.0, 2.0, 3.0):
        assert sigma_r(w2, r) == pytest.approx(lam ** r * sigma_r(w, r),
                                               rel=1e-12)


@given(weight_vectors)
@settings(max_examples=50, deadline=None)
def test_sigma_monotone_in_extension(ws):
    w = WeightSeq(ws)
    w2 = WeightSeq(list(ws) + [1.0])
    for r in (1.0, 2.0, 3.0):
        assert sigma_r(w2, r) > sigma_r(w, r)


def test_criticality_trichotomy():
    assert classify_criticality(WeightSeq([1.0, 1.0])) == "critical"
    assert classify_criticality(WeightSeq([2.0, 1.0, 1.0])) == "supercritical"
    assert classify_criticality(WeightSeq([0.5, 0.5])) == "subcritical"
    # just inside the relative tolerance band still reads critical
    w = WeightSeq(np.full(4, 1.0 + 1e-14))
    assert classify_criticality(w) == "critical"


def test_json_roundtrips():
    w = WeightSeq([2.0, 1.0])
    assert WeightSeq.from_json(w.to_json()).w.tolist() == [2.0, 1.0]
    p = LimitParams(-1.0, 2.0, 3.0, c=(0.5, 0.25))
    p2 = LimitParams.from_json(p.to_json())
    assert (p2.alpha, p2.beta, p2.kappa) == (-1.0, 2.0, 3.0)
    assert p2.c.tolist() == [0.5, 0.25]
    assert json.loads(p.to_json())["schema"] == 1
    tr = gen_er_triple(100, 0.01)
    tr2 = ScalingTriple.from_json(tr.to_json())
    assert tr2.n == 100 and tr2.a == tr.a and tr2.b == tr.b


def test_limit_params_validation():
    with pytest.raises(ValueError):
        LimitParams(0.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        LimitParams(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        LimitParams(0.0, 1.0, 1.0, c=(0.25, 0.5))


def test_er_triple_normalization():
    n = 1000
    p = 1 - math.exp(-1 / n)
    tr = gen_er_triple(n, p)
    assert tr.a == pytest.approx(n ** (1 / 3))
    assert tr.b == tr.a * tr.a  # exact by construction
    assert np.all(tr.weights.w == tr.weights.w[0])
    # alpha = 0 exactly at this p
    assert tr.weights.w[0] == pytest.approx(1.0, rel=1e-12)
    assert er_limit_params(n, p).alpha == pytest.approx(0.0, abs=1e-9)


def test_zeta_euler_maclaurin():
    assert _zeta_em(2.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    # reference value of zeta(1/2)
    assert _zeta_em(0.5) == pytest.approx(-1.4603545088095868, rel=1e-12)


def test_powerlaw_alpha0_oracle():
    # frozen from the closed form -kappa*q^2*zeta(2/rho), cross-checked
    # against partial sums of int_1^inf frac(x) x^(-2/rho-1) dx / rho
    assert powerlaw_alpha0(2.5, 1.0, 1.0) == pytest.approx(
        4.437538415895549, rel=1e-12)
    assert powerlaw_alpha0(2.5, 2.0, 3.0) == pytest.approx(
        12 * 4.437538415895549, rel=1e-12)


def test_powerlaw_alpha0_vs_quadrature():
    # independent oracle: partial sums with a mean-1/2 tail correction
    from scipy.integrate import quad
    rho = 2.7
    expo = -2.0 / rho - 1.0
    tot = 0.0
    K = 4000
    for k in range(1, K):
        piece, _ = quad(lambda x: (x - k) * x ** expo, k, k + 1)
        tot += piece
    # remaining tail: frac averages 1/2, first-order correction negligible
    tot += 0.5 * K ** (expo + 1.0) / (-expo - 1.0)
    integral = tot / rho
    expected = 2.0 * (integral + 1.0 / (rho - 2.0))
    assert powerlaw_alpha0(rho, 1.0, 1.0) == pytest.approx(expected, rel=1e-4)


def test_powerlaw_triple_shape():
    tr = gen_powerlaw_triple(1000, 2.5)
    w = tr.weights.w
    assert w[0] / tr.a == pytest.approx(1.0, rel=1e-12)  # tilt is exactly 1
    assert np.all(np.diff(w) < 0)
    assert tr.b == pytest.approx(tr.declared_limit.kappa * tr.weights.sigma(1.0) / tr.a)
    assert tr.declared_limit.beta == 0.0
    # the declared jump sizes are q*j^(-1/rho), independent of n
    c = tr.declared_limit.c
    assert c[:5] == pytest.approx(np.arange(1.0, 6.0) ** (-1.0 / 2.5))
    c2 = gen_powerlaw_triple(2000, 2.5).declared_limit.c
    assert c2[:c.size] == pytest.approx(c)
    with pytest.raises(ValueError):
        gen_powerlaw_triple(100, 3.5)
    with pytest.raises(ValueError):
        gen_powerlaw_triple(100, 2.5, quantile=lambda y: 1.0)
