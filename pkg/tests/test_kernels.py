import numpy as np
import pytest
from mpmath import mpf

from pcfbounds import _kernels
from pcfbounds import integral as ig


def _args(lam, n, ctx):
    sd = ig.saddle(lam, ctx)
    k = ig.cauchy_kernel(n)
    exps, coefs = k.arrays()
    return (float(sd.lam), float(sd.s_minus), float(sd.w0), float(sd.A), exps, coefs, k.qpow, k.ppow)


SVALS = np.array([0.0, 0.05, 0.7, 1.0, 2.5, 9.0, 40.0, 300.0])


def test_circles_layout():
    c1, r1, c2, r2 = _kernels.circles(1.0, 1.2, -0.5)
    assert r2 == 0.0 and c1 - r1 > -0.5
    c1, r1, c2, r2 = _kernels.circles(50.0, 1.0, -0.9)
    assert r2 > 0 and c1 == 50.0 and c2 == 1.0
    assert c2 - r2 > -0.9


@pytest.mark.parametrize("lam", [0.0, 0.3, 4.0, 25.0])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_numpy_matches_extended_precision(ctx30, lam, n):
    got = _kernels._fn_scan_numpy(SVALS, *_args(lam, n, ctx30), 128)
    for s, v in zip(SVALS, got):
        ref = float(ig.f_n(mpf(s), mpf(lam), n, ctx=ctx30))
        assert abs(v - ref) <= 1e-11 * max(1.0, abs(ref))


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("lam", [0.0, 0.3, 25.0])
def test_numba_matches_numpy(ctx30, lam):
    args = _args(lam, 2, ctx30)
    a = _kernels._fn_scan_numpy(SVALS, *args, 128)
    b = _kernels._jitted()(SVALS, *args, 128)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-15)


def test_env_switch(monkeypatch):
    monkeypatch.setenv("PCFBOUNDS_NUMBA", "0")
    assert not _kernels.numba_enabled()
    monkeypatch.setenv("PCFBOUNDS_NUMBA", "1")
    assert _kernels.numba_enabled() == _kernels.HAVE_NUMBA


def test_fn_scan_dispatch(ctx30, monkeypatch):
    args = _args(1.0, 1, ctx30)
    monkeypatch.setenv("PCFBOUNDS_NUMBA", "0")
    a = _kernels.fn_scan(SVALS, *args)
    monkeypatch.setenv("PCFBOUNDS_NUMBA", "1")
    b = _kernels.fn_scan(SVALS, *args)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-15)
