import os
import subprocess
import sys

import numpy as np
import pytest

from felogit import _kernels


def _random_batch(rng, n=40, T=8, p=3):
    scores = rng.standard_normal((n, T))
    covariates = rng.standard_normal((n, T, p))
    totals = rng.integers(0, T + 1, size=n)
    return scores, covariates, totals.astype(np.int64)


@pytest.mark.skipif(_kernels.logdenom_numba is None, reason="numba unavailable")
def test_logdenom_backends_agree():
    rng = np.random.default_rng(101)
    for _ in range(5):
        scores, covariates, totals = _random_batch(rng)
        ld_nb, mean_nb = _kernels.logdenom_numba(scores, covariates, totals)
        ld_np, mean_np = _kernels.logdenom_numpy(scores, covariates, totals)
        np.testing.assert_allclose(ld_nb, ld_np, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(mean_nb, mean_np, rtol=1e-12, atol=1e-12)


@pytest.mark.skipif(_kernels.qp_numba is None, reason="numba unavailable")
def test_qp_backends_agree():
    rng = np.random.default_rng(103)
    for _ in range(10):
        m, p = int(rng.integers(2, 40)), int(rng.integers(1, 4))
        w = rng.standard_normal((m, p))
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        out_nb = _kernels.qp_numba(w, 1e-8, 1e-6, 100_000)
        out_np = _kernels.qp_numpy(w, 1e-8, 1e-6, 100_000)
        assert out_nb[4] == out_np[4]  # same exit flag
        assert out_nb[1] == pytest.approx(out_np[1], rel=1e-8, abs=1e-10)


def test_logdenom_deterministic():
    rng = np.random.default_rng(107)
    scores, covariates, totals = _random_batch(rng)
    a = _kernels.logdenom_batch(scores, covariates, totals)
    b = _kernels.logdenom_batch(scores, covariates, totals)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_qp_flags():
    # opposite unit vectors cancel at lam = 1: zero minimum immediately
    w = np.array([[1.0], [-1.0]])
    lam, q, _u, iters, flag, _ = _kernels.qp_minimize(w, 1e-8, 1e-6, 100)
    assert flag == _kernels.QP_ZERO
    assert q <= 1e-8
    assert iters == 1
    # a single vector is stationary at lam = 1 with q = 1
    w = np.array([[-1.0]])
    lam, q, u, iters, flag, _ = _kernels.qp_minimize(w, 1e-8, 1e-6, 100)
    assert flag == _kernels.QP_STATIONARY
    assert q == pytest.approx(1.0)
    assert u[0] == pytest.approx(-1.0)


def test_qp_iteration_cap():
    # needs several projected-gradient steps; a cap of 2 cannot finish
    w = np.array([[1.0, 0.0], [-0.6, 0.8], [-0.6, -0.8]])
    *_rest, flag, _ = _kernels.qp_minimize(w, 1e-8, 1e-6, 2)
    assert flag == _kernels.QP_MAXITER
    *_rest, flag, _ = _kernels.qp_minimize(w, 1e-8, 1e-6, 100_000)
    assert flag == _kernels.QP_ZERO


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ)
    env["FELOGIT_NUMBA"] = "0"
    src = "import felogit; print(felogit.active_backend())"
    out = subprocess.run(
        [sys.executable, "-c", src], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"


def test_env_flag_backend_matches_default_decisions(fixture_path):
    env = dict(os.environ)
    env["FELOGIT_NUMBA"] = "0"
    src = (
        "import felogit, sys\n"
        "r = felogit.detect_panel_separation(felogit.load_csv(sys.argv[1]))\n"
        "print(r.status, repr(r.qp_min))\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", src, str(fixture_path)],
        env=env, capture_output=True, text=True, check=True,
    )
    status, qp_min = out.stdout.split()
    assert status == "separated"
    assert float(qp_min) == pytest.approx(196.0)
