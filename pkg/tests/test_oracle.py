import pytest
from mpmath import mp, mpf, mpc, sqrt, pi, exp, e

from pcfbounds.numerics.context import PrecisionContext
from pcfbounds.numerics.special import erfc_ref
from pcfbounds.oracle import (
    OracleError,
    check_recurrence,
    connection_residuals,
    pcf_u,
    pcf_values,
    u_negative_a,
    u_quadrature,
    uprime_quadrature,
    v_ref,
    whittaker_ref,
)
from pcfbounds.scaled import relative_residual

HALF = mpf(1) / 2


def rel(x, y):
    return abs(x - y) / abs(y)


def test_u_at_origin(ctx30):
    with ctx30.workdps():
        assert rel(u_quadrature(HALF, 0, ctx30).value(), sqrt(pi / 2)) < ctx30.eps(3)
        assert rel(uprime_quadrature(HALF, 0, ctx30).value(), mpf(-1)) < ctx30.eps(3)


def test_u_half_is_erfc(ctx30):
    with ctx30.workdps():
        z = mpf(2)
        ref = sqrt(pi / 2) * exp(z * z / 4) * erfc_ref(z / sqrt(2), ctx30)
        assert rel(u_quadrature(HALF, z, ctx30).value(), ref) < ctx30.eps(3)


def test_recurrence_and_self_check(ctx30):
    assert check_recurrence(ctx30)
    with ctx30.workdps():
        z = mpf(1)
        u = [u_quadrature(HALF + k, z, ctx30) for k in range(3)]
        assert relative_residual([u[0], u[1] * (-z), u[2] * (-2)]) < ctx30.eps(5)


def test_uprime_finite_difference():
    ctx = PrecisionContext(digits=60)
    with ctx.workdps():
        h = mpf(10) ** -10
        fd = (u_quadrature(1, 2 + h, ctx).value() - u_quadrature(1, 2 - h, ctx).value()) / (2 * h)
        assert rel(fd, uprime_quadrature(1, 2, ctx).value()) < mpf(10) ** -18


@pytest.mark.parametrize("a", ["-0.25", "0", "0.5"])
def test_negative_a_recurrence_matches_quadrature(ctx30, a):
    with ctx30.workdps():
        a = mpf(a)
        assert rel(u_negative_a(a, 1, ctx30).value(), u_quadrature(a, 1, ctx30).value()) < ctx30.eps(5)


@pytest.mark.parametrize("a,z", [("-0.5", "1"), ("-1", "0"), ("-3.7", "2"), ("-10", "5")])
def test_negative_a_against_mpmath(ctx30, a, z):
    with ctx30.workdps():
        ref = mp.pcfu(mpf(a), mpf(z))
        assert rel(pcf_u(mpf(a), mpf(z), ctx30).value(), ref) < ctx30.eps(8)


def test_u_large_z_logscale(ctx30):
    v = pcf_u(100, 1000, ctx30)
    assert v.logscale < -2e5
    with ctx30.workdps():
        # e^{-z^2/4} z^{-a-1/2} leading behaviour
        lead = -mpf(1000) ** 2 / 4 - (100 + HALF) * mp.log(1000)
        assert abs(v.log_abs() - lead) < mpf("0.01")


@pytest.mark.parametrize("a,z", [(1, 1), (2, 1), (-2, 3)])
def test_wronskian(ctx30, a, z):
    vals = pcf_values(a, z, ctx30)
    with ctx30.workdps():
        assert abs(vals.wronskian() - sqrt(2 / pi)) < ctx30.eps(10)


def test_v_at_a_zero(ctx30):
    with ctx30.workdps():
        z = mpf(3) / 2
        expect = pcf_u(0, -z, ctx30).value() * mp.gamma(HALF) / pi
        assert rel(v_ref(0, z, ctx30).value(), expect) < ctx30.eps(3)


@pytest.mark.parametrize("a,z", [(HALF, 2 * mp.expj(pi / 3)), (mpf(3) / 2, 1), (0, 0)])
def test_connection_residuals(ctx30, a, z):
    res = connection_residuals(a, z, ctx30)
    assert res
    for key, r in res.items():
        if r is not None:
            assert r < ctx30.eps(10), key


@pytest.mark.parametrize("a", [0, HALF, 1, 2])
@pytest.mark.parametrize("z", [1, 2])
def test_i15_grid(ctx30, a, z):
    assert connection_residuals(a, z, ctx30)["I15"] < ctx30.eps(10)


def test_whittaker_erfc(ctx30):
    with ctx30.workdps():
        w = whittaker_ref(-mpf(1) / 4, 1, ctx30).value()
        assert rel(w, sqrt(pi * e) * erfc_ref(1, ctx30)) < ctx30.eps(3)
        z = mpf(7)
        ref = sqrt(pi) * z ** (mpf(1) / 4) * exp(z / 2) * erfc_ref(sqrt(z), ctx30)
        assert rel(whittaker_ref(-mpf(1) / 4, z, ctx30).value(), ref) < ctx30.eps(3)


def test_complex_z(ctx30):
    with ctx30.workdps():
        z = mpc(3, 4)
        ref = mp.pcfu(HALF, z)
        assert rel(pcf_u(HALF, z, ctx30).value(), ref) < ctx30.eps(8)


def test_precondition(ctx30):
    with pytest.raises(ValueError):
        u_quadrature(-1, 1, ctx30)
