import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ptmoment.bounds import (
    beta0,
    feasibility_order3,
    gamma0,
    oppt_chain,
    oppt_violation,
    optimal_bounds,
    p3_bounds,
    p4_bounds,
    p5_bounds,
)
from ptmoment.bounds_batch import p3_min_batch, p4_bounds_batch, p5_bounds_batch
from ptmoment.errors import InfeasibleMomentsError, UnsupportedOrderError
from ptmoment.moments import moments_of_spectrum, pt_moments
from ptmoment.oracle import oracle_bounds, oracle_optimize, patterns
from ptmoment.states import bell_state, maximally_mixed, product_state


def spectrum(d, seed, zeros=True):
    rng = np.random.default_rng(seed)
    x = rng.dirichlet(np.full(d, rng.uniform(0.2, 3.0)))
    if zeros and rng.random() < 0.3:
        x[rng.integers(0, d, size=rng.integers(1, d))] = 0.0
        x /= x.sum()
    return np.sort(x)[::-1]


def prefix(x, n):
    return [len(x)] + [float(np.sum(x**k)) for k in range(1, n + 1)]


def reproduces(witness, p, n, tol=1e-8):
    s = np.asarray(witness.values)
    return all(abs(np.sum(s**k) - p[k]) <= tol for k in range(1, n))


# --- closed-form and boundary examples --------------------------------------------------


def test_p3_closed_form_at_two_thirds():
    b = p3_bounds(2 / 3, 4)
    assert b.multiplicities["alpha"] == 1
    x = (1 + math.sqrt(1 / 3)) / 2
    np.testing.assert_allclose(b.spectrum_min.values[:2], [x, 1 - x], rtol=1e-14)
    assert b.p_min == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_p3_degenerate_ends(d):
    b = p3_bounds(1 / d, d)
    assert b.p_min == pytest.approx(1 / d**2, rel=1e-12) and b.p_max == pytest.approx(1 / d**2, rel=1e-12)
    b = p3_bounds(1.0, d)
    assert b.p_min == pytest.approx(1.0) and b.p_max == pytest.approx(1.0)


def test_feasibility_order3():
    assert feasibility_order3([4, 1, 0.25, 1 / 16])
    assert not feasibility_order3([4, 1, 1, 0.25])
    assert not feasibility_order3([4, 1, 2, 0.5])


@pytest.mark.parametrize("d", [3, 4, 6])
def test_maximally_mixed_prefixes_pin_everything(d):
    p = [d] + [d ** (1.0 - k) for k in range(1, 6)]
    for n in (3, 4, 5):
        b = optimal_bounds(p, n)
        assert b.p_min == pytest.approx(d ** (1.0 - n), rel=1e-9)
        assert b.p_max == pytest.approx(d ** (1.0 - n), rel=1e-9)
    assert all(v.value == pytest.approx(0.0, abs=1e-12) for v in oppt_chain(p))


def test_p4_contains_the_inner_value():
    p = prefix(np.array([0.5, 0.3, 0.2, 0.0]), 4)
    assert p[4] == pytest.approx(0.0722, rel=1e-12)
    b = p4_bounds(p)
    assert b.p_min <= p[4] <= b.p_max


def test_p5_contains_the_inner_value():
    p = prefix(np.array([0.4, 0.3, 0.2, 0.1]), 5)
    assert p[5] == pytest.approx(0.013, rel=1e-12)
    b = p5_bounds(p)
    assert b.p_min <= p[5] <= b.p_max


def test_pure_state_prefix():
    b = p5_bounds([4, 1, 1, 1, 1])
    assert b.p_min == pytest.approx(1.0) and b.p_max == pytest.approx(1.0)


def test_bell_prefix_is_infeasible_at_order_three():
    p = pt_moments(bell_state(), 5).values
    with pytest.raises(InfeasibleMomentsError) as info:
        p4_bounds(p)
    assert info.value.order == 3
    b = optimal_bounds(p, 4)
    assert not b.feasible and "order 3" in b.reason


def test_bell_oppt():
    p = pt_moments(bell_state(), 5)
    chain = oppt_chain(p)
    assert chain[0].value == pytest.approx(0.75, abs=1e-9)
    assert not chain[1].defined and not chain[2].defined
    assert oppt_violation(p, 3).value == pytest.approx(0.75, abs=1e-9)
    with pytest.raises(UnsupportedOrderError):
        oppt_violation(p, 6)


def test_maximally_mixed_state_has_zero_violation():
    p = pt_moments(maximally_mixed(2, 3), 5)
    assert [v.value for v in oppt_chain(p)] == pytest.approx([0, 0, 0], abs=1e-12)


def test_ppt_states_have_zero_violation(ppt_qubit_states):
    from ptmoment.linalg import BipartiteState

    for m in ppt_qubit_states:
        for v in oppt_chain(pt_moments(BipartiteState(2, 2, m), 5)):
            assert v.defined and v.value <= 1e-8


def test_two_point_parameters():
    # a two-value spectrum is its own extremizer: beta0 recovers the multiplicity of the small value
    x = np.array([0.4, 0.2, 0.2, 0.2])
    p2, p3 = float(np.sum(x**2)), float(np.sum(x**3))
    assert beta0(p2, p3, 4) == pytest.approx(3.0, abs=1e-9)
    g = gamma0(p2, p3, 4)
    assert g is None or g > 0


# --- witnesses ----------------------------------------------------------------------------


@given(st.integers(2, 9), st.integers(0, 2**31))
def test_witnesses_reproduce_lower_moments(d, seed):
    x = spectrum(d, seed)
    p = prefix(x, 5)
    for n in (3, 4, 5):
        b = optimal_bounds(p, n)
        assert b.feasible
        assert b.p_min <= p[n] + 1e-12 and p[n] <= b.p_max + 1e-12
        for s in (b.spectrum_min, b.spectrum_max):
            assert len(s) == d
            assert np.all(s.values >= 0) and np.all(np.diff(s.values) <= 0)
            assert reproduces(s, p, n)
        assert np.sum(b.spectrum_min.values**n) == pytest.approx(b.p_min, abs=1e-12)
        assert np.sum(b.spectrum_max.values**n) == pytest.approx(b.p_max, abs=1e-12)


@given(st.integers(2, 9), st.integers(0, 2**31))
def test_product_state_realizes_the_minimum(d, seed):
    x = spectrum(d, seed)
    b = p3_bounds(float(np.sum(x**2)), d)
    p = pt_moments(product_state(b.spectrum_min.values), 3)
    np.testing.assert_allclose(p.values[1:], [1.0, np.sum(x**2), b.p_min], atol=1e-8)


# --- batch solver against the scalar reference ------------------------------------------


@pytest.mark.parametrize("d", [4, 9, 16])
def test_batch_matches_scalar(d):
    X = np.array([spectrum(d, 1000 * d + s) for s in range(40)])
    P = np.array([prefix(x, 5) for x in X])
    lo3 = p3_min_batch(P[:, 2], d)
    lo4, hi4 = p4_bounds_batch(P[:, 2], P[:, 3], d)
    lo5, hi5 = p5_bounds_batch(P[:, 2], P[:, 3], P[:, 4], d)
    for i, p in enumerate(P):
        assert lo3[i] == pytest.approx(p3_bounds(p[2], d).p_min, abs=1e-13)
        b4 = p4_bounds(p)
        assert (lo4[i], hi4[i]) == pytest.approx((b4.p_min, b4.p_max), abs=1e-13)
        b5 = p5_bounds(p)
        assert (lo5[i], hi5[i]) == pytest.approx((b5.p_min, b5.p_max), abs=1e-12)


# --- independent oracle -----------------------------------------------------------------------


def test_pattern_enumeration():
    assert patterns(2, 4) == ((1,), (2,), (1, 1))
    assert len(patterns(8, 4)) == sum(math.comb(u - 1, g - 1) for u in range(1, 9) for g in range(1, 5))


@pytest.mark.parametrize("d", [4, 6])
def test_structured_bounds_match_oracle(d):
    for s in range(6):
        p = prefix(spectrum(d, 77 * d + s), 5)
        for n in (3, 4, 5):
            lo, hi, xlo, xhi = oracle_bounds(p, n, d)
            b = optimal_bounds(p, n)
            assert b.p_min == pytest.approx(lo, abs=1e-6)
            assert b.p_max == pytest.approx(hi, abs=1e-6)


def test_oracle_on_maximally_mixed_prefix():
    d = 4
    p = [d] + [d ** (1.0 - k) for k in range(1, 5)]
    for n in (3, 4):
        assert oracle_optimize(p, n, d, "min") == pytest.approx(d ** (1.0 - n), rel=1e-9)
        val, x = oracle_optimize(p, n, d, "max", return_spectrum=True)
        assert val == pytest.approx(d ** (1.0 - n), rel=1e-9)
        np.testing.assert_allclose(x, 1 / d, atol=1e-8)


def test_oracle_rejects_infeasible_prefix():
    with pytest.raises(InfeasibleMomentsError):
        oracle_optimize([4, 1, 1, 0.25], 4, 4)


def test_p3_matches_oracle_on_a_grid():
    d = 4
    for p2 in np.linspace(1 / d, 1, 100):
        lo = oracle_optimize([d, 1, p2], 3, d, "min")
        assert p3_bounds(p2, d).p_min == pytest.approx(lo, abs=1e-8)


def test_moments_of_witness_spectrum_helper():
    b = p4_bounds(prefix(np.array([0.5, 0.3, 0.2, 0.0]), 4))
    m = moments_of_spectrum(b.spectrum_max, 4)
    assert m[4] == pytest.approx(b.p_max, abs=1e-14)
