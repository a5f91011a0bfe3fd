import math

import numpy as np
import pytest

from cmfrac.csvio import read_csv
from cmfrac.mlf import UnsupportedDomainError, mittag_leffler
from cmfrac.pdelab import (
    AdvDiffOperator,
    eigenvalues_advdiff,
    solve_subdiffusion,
    spectral_reference,
    write_eigen_csv,
    write_field_csv,
)
from cmfrac.schemes import CATALOG_SPECS, gl_weights, l1_weights, make_weights
from cmfrac.solver import solve_linear_test

ADV = dict(d=10.0, D=0.1, Nx=32)


# -- operator ---------------------------------------------------------------


def test_constant_is_null_mode():
    op = AdvDiffOperator(**ADV)
    np.testing.assert_allclose(op.action(np.full(32, 3.0)), 0.0, atol=1e-10)


def test_pure_diffusion_is_symmetric():
    L = AdvDiffOperator(0.0, 0.7, 16).matrix
    np.testing.assert_array_equal(L, L.T)


def test_matrix_is_read_only_and_cached():
    op = AdvDiffOperator(**ADV)
    assert op.matrix is op.matrix
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 1.0


def test_grid():
    op = AdvDiffOperator(**ADV)
    assert op.dx == 1 / 32 and op.size == 32
    assert op.x[0] == pytest.approx(1 / 32) and op.x[-1] == pytest.approx(1.0)
    dop = AdvDiffOperator(0.0, 1.0, 32, boundary="dirichlet")
    assert dop.size == 31 and dop.x[-1] == pytest.approx(31 / 32)


@pytest.mark.parametrize(
    "kwargs",
    [dict(d=0, D=1, Nx=2), dict(d=0, D=0, Nx=8), dict(d=1, D=1, Nx=8, boundary="dirichlet"), dict(d=0, D=1, Nx=8, boundary="x")],
)
def test_operator_validation(kwargs):
    with pytest.raises(ValueError):
        AdvDiffOperator(**kwargs)


def test_action_shape_check():
    with pytest.raises(ValueError):
        AdvDiffOperator(**ADV).action(np.zeros(31))


# -- eigenvalues ------------------------------------------------------------


def test_eigen_examples():
    lam = eigenvalues_advdiff(**ADV)
    assert lam[-1] == 0
    assert lam[15] == pytest.approx(-409.6 + 0j, abs=1e-10)
    assert np.max(np.abs(lam.imag)) == pytest.approx(320.0, rel=1e-12)
    assert np.all(lam.real <= 0)


def test_eigen_match_dense_spectrum():
    op = AdvDiffOperator(**ADV)
    num = np.linalg.eigvals(-op.matrix)
    closed = eigenvalues_advdiff(**ADV)
    # match as multisets
    for z in closed:
        assert np.min(np.abs(num - z)) < 1e-10 * 410


def test_eigen_on_ellipse():
    lam = eigenvalues_advdiff(**ADV)
    a = 2 * 0.1 * 32**2
    b = 10 * 32
    resid = ((lam.real + a) / a) ** 2 + (lam.imag / b) ** 2 - 1
    np.testing.assert_allclose(resid, 0, atol=1e-10)


def test_advection_leaves_three_quarter_wedge():
    lam = eigenvalues_advdiff(**ADV)
    assert ADV["d"] > 2 * ADV["D"] * ADV["Nx"]
    nz = lam[lam != 0]
    assert np.any(np.abs(np.angle(nz)) < 3 * math.pi / 4)
    # pure diffusion stays on the negative axis
    assert np.all(np.abs(np.angle(eigenvalues_advdiff(0.0, 0.1, 32)[:-1])) == math.pi)


def test_dirichlet_eigenvalues():
    op = AdvDiffOperator(0.0, 0.5, 20, boundary="dirichlet")
    np.testing.assert_allclose(np.sort(op.eigenvalues().real), np.sort(np.linalg.eigvalsh(-op.matrix)), atol=1e-10)


# -- time stepping ----------------------------------------------------------


def test_constant_field_is_steady():
    op = AdvDiffOperator(**ADV)
    tr = solve_subdiffusion(op, np.full(32, 2.5), l1_weights(0.9, 51), 0.01, 50)
    np.testing.assert_allclose(tr.values, 2.5, rtol=1e-13)


@pytest.mark.parametrize("k", [1, 3])
def test_single_mode_matches_linear_test(k):
    op = AdvDiffOperator(0.0, 1.0, 32)
    lam = 2 / op.dx**2 * (math.cos(2 * math.pi * k * op.dx) - 1)
    mode = np.sin(2 * math.pi * k * op.x)
    w = gl_weights(0.6, 201)
    tr = solve_subdiffusion(op, mode, w, 1e-3, 200)
    amp = solve_linear_test(0.6, lam, w, 1e-3, 200).scalar
    np.testing.assert_allclose(tr.values, np.outer(amp, mode), atol=1e-10)


def test_advection_run_is_bounded():
    op = AdvDiffOperator(**ADV)
    u0 = np.sin(2 * math.pi * op.x)
    tr = solve_subdiffusion(op, u0, l1_weights(0.9, 101), 0.01, 100)
    sup = np.max(np.abs(tr.values), axis=1)
    assert np.all(sup <= np.max(np.abs(u0)) * (1 + 1e-8))
    assert np.all(np.isfinite(tr.values))


@pytest.mark.parametrize("spec", CATALOG_SPECS, ids=lambda s: s[0] + str(s[1].get("theta", "")))
def test_l2_norm_nonincreasing(spec):
    kind, params = spec
    op = AdvDiffOperator(0.0, 0.2, 24, boundary="dirichlet")
    u0 = np.random.default_rng(1).uniform(-1, 1, op.size)
    tr = solve_subdiffusion(op, u0, make_weights(kind, 0.5, 201, **params), 0.01, 200)
    norms = tr.norms()
    assert np.all(np.diff(norms) <= 1e-13 * norms[0])


def test_needs_enough_weights():
    op = AdvDiffOperator(**ADV)
    with pytest.raises(ValueError):
        solve_subdiffusion(op, np.zeros(32), l1_weights(0.9, 10), 0.01, 10)
    with pytest.raises(ValueError):
        solve_subdiffusion(op, np.zeros(31), l1_weights(0.9, 11), 0.01, 10)


# -- spectral reference -----------------------------------------------------


def test_reference_at_time_zero():
    op = AdvDiffOperator(0.0, 1.0, 16)
    u0 = np.random.default_rng(2).normal(size=16)
    np.testing.assert_array_equal(spectral_reference(op, u0, 0.5, 0.0), u0)


def test_reference_single_mode():
    op = AdvDiffOperator(0.0, 1.0, 16)
    k = 2
    lam = 2 / op.dx**2 * (math.cos(2 * math.pi * k * op.dx) - 1)
    mode = np.cos(2 * math.pi * k * op.x)
    np.testing.assert_allclose(spectral_reference(op, mode, 0.7, 1.0), mode * mittag_leffler(0.7, lam), atol=1e-14)


def test_reference_dirichlet_single_mode():
    op = AdvDiffOperator(0.0, 1.0, 16, boundary="dirichlet")
    lam = op.eigenvalues().real[0]
    mode = np.sin(math.pi * op.x)
    np.testing.assert_allclose(spectral_reference(op, mode, 0.5, 0.3), mode * mittag_leffler(0.5, lam * 0.3**0.5), atol=1e-14)


def test_reference_rejects_advection():
    with pytest.raises(UnsupportedDomainError):
        spectral_reference(AdvDiffOperator(**ADV), np.zeros(32), 0.5, 1.0)


def test_cross_validation_random_field():
    op = AdvDiffOperator(0.0, 1.0, 32)
    u0 = np.random.default_rng(3).uniform(-1, 1, 32)
    tr = solve_subdiffusion(op, u0, l1_weights(0.5, 501), 1e-3, 500)
    ref = spectral_reference(op, u0, 0.5, 0.5)
    assert np.max(np.abs(tr.values[-1] - ref)) < 1e-2


def test_convergence_against_reference():
    """Spatial sup-norm error at t = 0.5 halves with h.

    The sup over all steps is not used: for rough data the first step is
    dominated by stiff modes with |lambda| h^alpha >> 1, whose error only
    starts shrinking once h^alpha |lambda_max| = O(1).
    """
    op = AdvDiffOperator(0.0, 1.0, 32)
    u0 = np.random.default_rng(4).uniform(-1, 1, 32)
    ref = spectral_reference(op, u0, 0.5, 0.5)
    errs = []
    for h in (0.02, 0.01, 0.005):
        N = round(0.5 / h)
        tr = solve_subdiffusion(op, u0, gl_weights(0.5, N + 1), h, N)
        errs.append(np.max(np.abs(tr.values[-1] - ref)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.1)


# -- output -----------------------------------------------------------------


def test_csv_writers(tmp_path):
    op = AdvDiffOperator(**ADV)
    schema, header, rows = read_csv(write_field_csv(tmp_path / "f.csv", op, np.zeros(32)))
    assert (schema, header, len(rows)) == ("field", ["x", "u"], 32)
    schema, header, rows = read_csv(write_eigen_csv(tmp_path / "e.csv", eigenvalues_advdiff(**ADV)))
    assert (schema, header) == ("eigenvalues", ["j", "re", "im"])
    assert rows[-1] == ["32", "0.0", "0.0"]
