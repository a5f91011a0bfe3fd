import math

import numpy as np
import pytest

from cmfrac.csvio import read_csv
from cmfrac.schemes import CATALOG_SPECS, catalog, counterexample_weights, gl_weights, l1_weights, make_weights
from cmfrac.seqkit import eval_generating
from cmfrac.stability import (
    boundary_locus,
    classify_grid,
    instability_radius,
    is_stable_empirical,
    max_arg,
    wedge_probe,
    write_grid_csv,
)

CM_IDS = [s[0] + str(s[1].get("theta", "")) for s in CATALOG_SPECS]


@pytest.fixture(scope="module")
def gl_long():
    return {a: gl_weights(a, 2**22) for a in (0.5, 0.9)}


# -- locus ------------------------------------------------------------------


def test_locus_sampling_grid():
    loc = boundary_locus(gl_weights(0.5, 4096), 64)
    assert len(loc) == 63
    np.testing.assert_allclose(loc.theta, 2 * np.pi * np.arange(1, 64) / 64)


def test_locus_matches_horner():
    w = l1_weights(0.4, 300)
    loc = boundary_locus(w, 128)
    direct = eval_generating(w.omega, np.exp(1j * loc.theta))
    np.testing.assert_allclose(loc.values, direct, rtol=1e-12, atol=1e-13)


def test_gl_at_minus_one():
    loc = boundary_locus(gl_weights(0.5, 4096), 4096)
    v = loc.values[2047]  # theta = pi
    assert loc.theta[2047] == pytest.approx(math.pi)
    assert v.real == pytest.approx(math.sqrt(2), abs=1e-6)
    assert abs(v.imag) < 1e-12


def test_gl_arg_near_the_cusp(gl_long):
    loc = boundary_locus(gl_long[0.5], 2**16)
    assert np.angle(loc.values[0]) == pytest.approx(-math.pi / 4, abs=2e-3)
    assert np.angle(loc.values[-1]) == pytest.approx(math.pi / 4, abs=2e-3)


@pytest.mark.parametrize("alpha", [0.5, 0.9])
def test_gl_max_arg_is_alpha_pi_over_two(alpha, gl_long):
    M = 2**16
    theta0 = max_arg(boundary_locus(gl_long[alpha], M))
    assert theta0 == pytest.approx(alpha * math.pi / 2, abs=1e-3)
    assert abs(theta0 - alpha * math.pi / 2) <= 2 * math.pi / M + 1e-6


def test_l1_max_arg_below_right_angle():
    theta0 = max_arg(boundary_locus(l1_weights(0.5, 2**14), 2**14))
    assert theta0 < math.pi / 2 - 0.01


def test_resolution_beyond_weights_warns():
    w = l1_weights(0.5, 2**12)
    with pytest.warns(RuntimeWarning, match="truncation"):
        over = max_arg(boundary_locus(w, 2**14))
    # the extra samples near theta = 0 see the truncated tail, not the scheme
    assert over > max_arg(boundary_locus(l1_weights(0.5, 2**16), 2**14)) + 0.01


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
@pytest.mark.parametrize("spec", CATALOG_SPECS, ids=CM_IDS)
def test_positive_real_part_and_theta0(alpha, spec):
    kind, params = spec
    loc = boundary_locus(make_weights(kind, alpha, 4096, **params), 4096)
    assert np.all(loc.values.real > 0)
    assert max_arg(loc) < math.pi / 2


@pytest.mark.parametrize("spec", CATALOG_SPECS, ids=CM_IDS)
def test_conjugate_symmetry(spec):
    kind, params = spec
    v = boundary_locus(make_weights(kind, 0.6, 2048, **params), 1024).values
    np.testing.assert_allclose(v[::-1], np.conj(v), atol=1e-12)


def test_counterexample_phase_near_right_angle():
    loc = boundary_locus(counterexample_weights(0.5, 50.0, 0.99, 2**16), 2**14)
    assert max_arg(loc) > 0.4 * math.pi
    assert max_arg(loc) < math.pi / 2


def test_locus_csv(tmp_path):
    loc = boundary_locus(gl_weights(0.5, 64), 8)
    schema, header, rows = read_csv(loc.to_csv(tmp_path / "locus.csv"))
    assert schema == "stability_locus"
    assert header == ["theta", "re", "im"]
    assert len(rows) == 7


def test_resolution_validation():
    with pytest.raises(ValueError):
        boundary_locus(gl_weights(0.5, 64), 2)


# -- empirical classification -----------------------------------------------


@pytest.mark.parametrize("label", [w.label for w in catalog(0.5, 2)])
def test_negative_real_lambda_is_stable(label):
    w = next(x for x in catalog(0.5, 4096) if x.label == label)
    r = is_stable_empirical(0.5, -1.0, w, 0.1, 4096)
    assert r.stable
    assert r.exponent < 0


def test_imaginary_axis_is_stable():
    r = is_stable_empirical(0.5, 1j, gl_weights(0.5, 4096), 0.1, 4096)
    assert r.stable


def test_positive_lambda_is_unstable():
    r = is_stable_empirical(0.5, 1.0, gl_weights(0.5, 4096), 0.1, 4096)
    assert not r.stable
    assert r.reason in ("overflow", "no decay")


def test_requires_long_run():
    with pytest.raises(ValueError):
        is_stable_empirical(0.5, -1.0, gl_weights(0.5, 100), 0.1, 100)


@pytest.mark.parametrize("h", [0.05, 0.1])
@pytest.mark.parametrize("spec", CATALOG_SPECS, ids=CM_IDS)
def test_left_half_plane_grid(spec, h):
    kind, params = spec
    # the slowest mode (|lambda| = 0.1 on the imaginary axis) needs ~8k steps
    # before its envelope leaves the initial hump
    alpha, N = 0.7, 8192
    w = make_weights(kind, alpha, N, **params)
    mods = np.geomspace(0.1, 10, 6)
    angs = np.linspace(math.pi / 2, math.pi, 6)
    lams = [m * np.exp(1j * a) for m in mods for a in angs]
    assert all(r.stable for r in classify_grid(alpha, lams, w, h, N))


@pytest.mark.parametrize("spec", CATALOG_SPECS, ids=CM_IDS)
def test_instability_set_is_bounded(spec):
    kind, params = spec
    alpha, N = 0.5, 2048
    w = make_weights(kind, alpha, N, **params)
    R = instability_radius(boundary_locus(w, 2048))
    zs = [r * np.exp(1j * a) for r in (0.3, 1.3, 2.7, 5.1) for a in np.linspace(0, math.pi, 7)]
    for z, rep in zip(zs, classify_grid(alpha, zs, w, 1.0, N)):
        if not rep.stable:
            assert z.real > 0
            assert abs(z) <= R
    # far outside the disk everything is stable again
    assert is_stable_empirical(alpha, 2 * R, w, 1.0, N).stable


def test_grid_csv(tmp_path):
    reps = classify_grid(0.5, [-1.0, 1.0 + 0j], gl_weights(0.5, 2048), 0.1, 2048)
    schema, header, rows = read_csv(write_grid_csv(tmp_path / "g.csv", reps))
    assert schema == "stability_grid"
    assert header == ["re_lambda", "im_lambda", "stable"]
    assert rows == [["-1.0", "0.0", "1"], ["1.0", "0.0", "0"]]


# -- wedge ------------------------------------------------------------------


def test_wedge_probe_negative_axis_and_bracketing():
    w = gl_weights(0.5, 8192)
    probe = wedge_probe(0.5, w, [0.05], np.linspace(0.1, 1.0, 10) * math.pi, N=8192)
    assert probe.stable[0, -1]  # phi = pi
    assert not probe.stable[0, 0]
    b = probe.boundary[0]
    assert 0.25 * math.pi - 0.05 <= b <= 0.25 * math.pi + 0.1


def test_wedge_probe_validation():
    w = gl_weights(0.5, 100)
    with pytest.raises(ValueError):
        wedge_probe(0.5, w, [-0.1], [0.5], N=100)
    with pytest.raises(ValueError):
        wedge_probe(0.5, w, [0.1], [0.5], N=4096)
