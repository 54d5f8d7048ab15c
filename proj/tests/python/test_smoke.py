import math

import numpy as np
import pytest

import edgelab


def mode(l, n, value=1.0):
    a = np.zeros(2 * n + 1, dtype=complex)
    a[l + n] = value
    return a


def test_hilbert_signs_and_involution():
    n = 4
    assert edgelab.hilbert_transform(mode(1, n))[n + 1] == 1.0
    assert edgelab.hilbert_transform(mode(-1, n))[n - 1] == -1.0
    rng = np.random.default_rng(0)
    u = rng.normal(size=2 * n + 1) + 1j * rng.normal(size=2 * n + 1)
    np.testing.assert_array_equal(edgelab.hilbert_transform(edgelab.hilbert_transform(u)), u)


def test_graded_norm_and_resolvent():
    assert edgelab.graded_norm(mode(3, 4), 1.0) == pytest.approx(math.sqrt(10.0))
    assert edgelab.fractional_resolvent(mode(2, 2), 1.0)[4] == pytest.approx(0.2)
    with pytest.raises(ValueError):
        edgelab.graded_norm(np.zeros(4, dtype=complex), 0.0)


def test_L_examples():
    one = np.array([1.0 + 0j])
    zero = np.array([0j])
    e1 = mode(1, 1)
    np.testing.assert_allclose(edgelab.L_op(e1, one, zero), e1, atol=1e-15)
    out = edgelab.L_op(e1, zero, one)
    np.testing.assert_allclose(out, mode(-1, 1, -1.0), atol=1e-15)


def test_T_half_order_growth():
    one, zero = np.array([1.0 + 0j]), np.array([0j])
    for l in (4, 16, 64):
        t = edgelab.T_op(mode(l, l), one, zero)
        expected = 3 * math.pi * l * l * (l * l + 1) ** -0.75
        assert abs(t[2 * l]) == pytest.approx(expected, rel=1e-10)


def test_obstruction_mode_closed_form():
    r, plus, minus = edgelab.euclidean_obstruction_mode(2.0, 4.0, 200)
    r = np.asarray(r)
    np.testing.assert_allclose(np.asarray(plus).real, math.sqrt(2) * np.exp(-2 * r) / np.sqrt(r), rtol=1e-12)
    np.testing.assert_allclose(np.asarray(minus), np.asarray(plus), rtol=1e-12)
    sol = edgelab.solve_mode_ode(0, 2.0, 4.0, 900)
    assert sol["residual"] < 1e-8
    assert not sol["exponential_growth"]


def test_toy_rough_preset():
    f = edgelab.rough_data(128, 1.1, 1.0, 1)
    plain = edgelab.toy_solve(f, 0.1, smoothed=False)
    nm = edgelab.toy_solve(f, 0.1, smoothed=True)
    assert plain["status"] == "diverged"
    assert nm["converged"] and nm["iterations"] <= 30
    assert nm["final_residual"] < 1e-8


def test_run_experiment_summary_schema():
    s = edgelab.run_experiment("continuation")
    assert {"experiment", "paper_anchor", "pass", "metrics"} <= set(s)
    assert s["experiment"] == "continuation" and s["pass"]
    with pytest.raises(ValueError, match="unknown key"):
        edgelab.run_experiment("continuation", tl=1)
    with pytest.raises(ValueError, match="N"):
        edgelab.run_experiment("continuation", N=-4)
    assert "nash-moser" in edgelab.commands()
