from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmfrac.schemes import catalog, gl_weights
from cmfrac.seqkit import (
    SingularSequenceError,
    as_seq,
    check_cm,
    conv_inverse,
    convolve,
    delta,
    eval_generating,
    miller_power,
    resolvent,
)


def binom_series(alpha, n):
    """Coefficients of (1 - z)^alpha from mpmath binomials."""
    return np.array([float((-1) ** k * mp.binomial(alpha, k)) for k in range(n)])


# -- convolve ---------------------------------------------------------------


@pytest.mark.parametrize(
    "u, v, expected",
    [
        ((1, 0, 0), (3, 4, 5), (3, 4, 5)),
        ((1, 1), (1, 1), (1, 2)),
        ((1, -0.5, -0.125), (1, 0.5, 0.375), (1, 0, 0)),
        ((1, 2, 3, 4), (1, 1), (1, 3)),
    ],
)
def test_convolve_examples(u, v, expected):
    np.testing.assert_allclose(convolve(u, v), expected, atol=1e-15)


def test_convolve_rejects_empty_and_nan():
    with pytest.raises(ValueError):
        convolve([], [1.0])
    with pytest.raises(ValueError):
        convolve([1.0, np.nan], [1.0, 2.0])


def test_as_seq_is_read_only():
    s = as_seq([1.0, 2.0])
    with pytest.raises(ValueError):
        s[0] = 3.0


@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=12),
    st.lists(st.floats(-5, 5), min_size=1, max_size=12),
)
def test_convolve_commutes(u, v):
    np.testing.assert_allclose(convolve(u, v), convolve(v, u), atol=1e-12)


# -- conv_inverse -----------------------------------------------------------


@pytest.mark.parametrize(
    "w, expected",
    [
        ((1, 0, 0, 0), (1, 0, 0, 0)),
        ((1, -0.5, 0, 0), (1, 0.5, 0.25, 0.125)),
        ((1, -0.5, -0.125, -0.0625), (1, 0.5, 0.375, 0.3125)),
    ],
)
def test_conv_inverse_examples(w, expected):
    np.testing.assert_allclose(conv_inverse(w), expected, rtol=1e-15)


def test_conv_inverse_matches_exact_fractions():
    w = [Fraction(3), Fraction(-1), Fraction(1, 2), Fraction(-1, 7), Fraction(2, 3)]
    a = [1 / w[0]]
    for n in range(1, len(w)):
        a.append(-sum(w[j] * a[n - j] for j in range(1, n + 1)) / w[0])
    np.testing.assert_allclose(conv_inverse([float(x) for x in w]), [float(x) for x in a], rtol=1e-14)


def test_conv_inverse_singular():
    with pytest.raises(SingularSequenceError):
        conv_inverse([0.0, 1.0, 2.0])


@settings(max_examples=60)
@given(
    st.floats(1e-8, 10).flatmap(lambda w0: st.sampled_from([w0, -w0])),
    st.lists(st.floats(-1, 1), min_size=0, max_size=40),
)
def test_roundtrip_property(w0, tail):
    w = np.array([w0] + tail)
    back = convolve(w, conv_inverse(w))
    err = np.max(np.abs(back - delta(w.size)))
    # forward substitution amplifies by up to (max|w| / |w0|)^n; keep the
    # property on well-conditioned draws where the bound is meaningful
    growth = np.max(np.abs(conv_inverse(w))) * np.max(np.abs(w))
    if growth < 1e3:
        assert err <= 1e-12 * max(np.max(np.abs(w)), 1.0)


# -- check_cm ---------------------------------------------------------------


def test_geometric_is_cm():
    r = check_cm([1, 0.5, 0.25, 0.125], max_depth=3)
    assert r.is_cm and r.first_violation is None and r.depth_checked == 3


def test_trapezoidal_pattern_fails():
    r = check_cm([1, 1, 0.5, 0.5], max_depth=2)
    assert not r.is_cm
    assert r.first_violation == (2, 0)
    assert r.violation_value == pytest.approx(-0.5)


def test_gl_a_is_cm():
    assert check_cm(gl_weights(0.5, 64).a, max_depth=10).is_cm


def test_report_invariants():
    for v in ([1, 0.5, 0.25], [1, 1, 0.5, 0.5], [1, -1, 1]):
        r = check_cm(v, 3)
        assert r.is_cm == (r.min_difference >= -r.tolerance)
        assert (r.first_violation is None) == r.is_cm
        assert r.raw_min_difference == pytest.approx(r.min_difference * r.scale)


def test_check_cm_rejects_complex_and_bad_args():
    with pytest.raises(TypeError):
        check_cm(np.array([1 + 1j, 0.5]))
    with pytest.raises(ValueError):
        check_cm([1, 0.5], max_depth=0)
    with pytest.raises(ValueError):
        check_cm([1, 0.5], tol=-1)


def test_depth_capped_by_length():
    assert check_cm([1.0, 0.5, 0.25], max_depth=20).depth_checked == 2


def test_moment_sequence_deep_check():
    # Hausdorff moments of the uniform measure on [0, 1]: 1 / (n + 1)
    v = 1.0 / np.arange(1, 200)
    assert check_cm(v, max_depth=20, tol=1e-10).is_cm


@settings(max_examples=40)
@given(st.lists(st.tuples(st.floats(0.01, 1), st.floats(0, 0.99)), min_size=1, max_size=4), st.integers(3, 10))
def test_cm_closure(mixture, depth):
    """A positive mixture of geometric sequences is CM, and so is its first difference."""
    n = np.arange(40)
    v = sum(c * q**n for c, q in mixture)
    assert check_cm(v, depth).is_cm
    assert check_cm(v[:-1] - v[1:], depth - 1).is_cm


# -- miller_power -----------------------------------------------------------


@pytest.mark.parametrize(
    "c, alpha, expected",
    [
        ((1, 1, 0, 0), 1.0, (1, 1, 0, 0)),
        ((1, -1, 0, 0), 0.5, (1, -0.5, -0.125, -0.0625)),
        ((1, -1, 0, 0), -0.5, (1, 0.5, 0.375, 0.3125)),
    ],
)
def test_miller_examples(c, alpha, expected):
    np.testing.assert_allclose(miller_power(c, alpha), expected, rtol=1e-15, atol=1e-15)


@pytest.mark.parametrize("alpha", [0.3, -0.7, 1.5])
def test_miller_matches_mpmath_binomials(alpha):
    np.testing.assert_allclose(miller_power([1, -1] + [0] * 48, alpha), binom_series(alpha, 50), rtol=1e-13)


def test_miller_general_series_against_mpmath_taylor():
    c = [1.0, 0.3, -0.2, 0.1]
    f = lambda z: (1 + 0.3 * z - 0.2 * z**2 + 0.1 * z**3) ** 0.4  # noqa: E731
    expected = [float(x) for x in mp.taylor(f, 0, 11)]
    np.testing.assert_allclose(miller_power(c + [0.0] * 8, 0.4), expected, rtol=1e-12, atol=1e-15)


def test_miller_requires_unit_leading():
    with pytest.raises(ValueError):
        miller_power([2.0, 1.0], 0.5)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
@settings(max_examples=100)
@given(data=st.data())
def test_miller_inverse_power(alpha, data):
    n = data.draw(st.integers(2, 32))
    tail = data.draw(st.lists(st.floats(-1, 1), min_size=n - 1, max_size=n - 1))
    c = np.array([1.0] + tail)
    back = miller_power(miller_power(c, alpha), 1.0 / alpha)
    np.testing.assert_allclose(back, c, rtol=0, atol=1e-10)


# -- eval_generating --------------------------------------------------------


def test_eval_generating_examples():
    assert eval_generating(delta(5), 0.3 + 0.2j) == 1
    v = 0.5 ** np.arange(64)
    assert abs(eval_generating(v, 0.5) - 4 / 3) < 1e-15
    w = gl_weights(0.5, 4096)
    assert abs(eval_generating(w.omega, -1.0) - np.sqrt(2)) < 1e-6


def test_eval_generating_vectorized():
    z = np.exp(1j * np.linspace(0, 1, 5))
    out = eval_generating([1, 2, 3], z)
    np.testing.assert_allclose(out, 1 + 2 * z + 3 * z**2)


# -- resolvent --------------------------------------------------------------


def test_resolvent_examples():
    np.testing.assert_allclose(resolvent(delta(4), 1.0), [0.5, 0, 0, 0])
    b = resolvent([1, 0.5, 0.375], 2.0)
    assert b[0] == pytest.approx(2 / 3)
    # b + lam (a * b) = lam a
    np.testing.assert_allclose(b + 2 * convolve([1, 0.5, 0.375], b), 2 * np.array([1, 0.5, 0.375]), atol=1e-15)


def test_resolvent_gl_is_cm():
    b = resolvent(gl_weights(0.5, 256).a, 1.0)
    assert b[0] == pytest.approx(0.5)
    assert np.all(b >= 0)
    assert check_cm(b, 8).is_cm


@pytest.mark.parametrize("lam", [0.5, 1.0, 10.0])
@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_resolvent_of_catalog_is_cm(alpha, lam):
    for w in catalog(alpha, 256):
        assert check_cm(resolvent(w.a, lam), 8, 1e-8).is_cm, w.label


def test_resolvent_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        resolvent([1.0, 0.5], 0.0)
