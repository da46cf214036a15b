from functools import lru_cache

import pytest
from mpmath import mp, mpf, mpc, sqrt, pi, exp, log

from pcfbounds.numerics.context import PrecisionContext
from pcfbounds.numerics.special import chi
from pcfbounds.oracle import pcf_u, v_ref, whittaker_ref
from pcfbounds.poincare import (
    PhaseError,
    RegionError,
    RegionLabel,
    bound_quantities,
    classify_region,
    region_boundaries,
    remainder_bound,
    table_point,
    table_poincare,
    u_compound,
    u_series_partial,
    u_series_terms,
    v_series_partial,
    variation_2f1,
    variation_bound,
    whittaker_coeff,
)

HALF = mpf(1) / 2
CTX = PrecisionContext(digits=30)


def test_single_term_prefactor(ctx30):
    with ctx30.workdps():
        z = mpc(3, 1)
        got = u_series_partial(2, z, 1, ctx30).value()
        assert abs(got / exp(-z * z / 4 - (2 + HALF) * log(z)) - 1) < ctx30.eps(3)
        got = v_series_partial(2, mpf(3), 1, ctx30).value()
        assert abs(got / (sqrt(2 / pi) * exp(mpf(9) / 4) * 3 ** (2 - HALF)) - 1) < ctx30.eps(3)


def test_term_ratio():
    a, z = mpf(3), mpf(7)
    t = u_series_terms(a, z, 2)
    assert abs(t[1] / t[0]) == (a + HALF) * (a + HALF + 1) / (2 * z * z)


def test_v_series_exact_at_half(ctx30):
    with ctx30.workdps():
        z = mpf(4)
        assert abs(v_series_partial(HALF, z, 6, ctx30).value() / v_ref(HALF, z, ctx30).value() - 1) < ctx30.eps(5)


def test_v_series_omitted_term(ctx30):
    with ctx30.workdps():
        a, z = mpf(-5), mpf(10)
        approx = v_series_partial(a, z, 3, ctx30).value()
        exact = v_ref(a, z, ctx30).value()
        lead = sqrt(2 / pi) * exp(z * z / 4) * z ** (a - HALF)
        from pcfbounds.poincare import v_series_terms

        omitted = abs(v_series_terms(a, z, 4)[3]) * lead
        assert abs(approx - exact) < 2 * omitted


def test_phase_errors(ctx30):
    with pytest.raises(PhaseError):
        u_series_partial(1, -10, 3, ctx30)
    with pytest.raises(PhaseError):
        v_series_partial(1, mpc(1, 1), 3, ctx30)
    with pytest.raises(PhaseError):
        u_compound(1, 10, 3, 3, ctx30)


def test_compound_against_oracle(ctx30):
    with ctx30.workdps():
        z = 10 * mp.expj(3 * pi / 4)
        approx = u_compound(HALF, z, 6, 6, ctx30).value()
        exact = pcf_u(HALF, z, ctx30).value()
        assert abs(approx / exact - 1) < mpf("1e-6")


def test_compound_conjugate_symmetry(ctx30):
    with ctx30.workdps():
        z = 8 * mp.expj(2 * pi / 3)
        a = mpf("1.3")
        u1 = u_compound(a, z, 4, 4, ctx30).value()
        u2 = u_compound(a, mp.conj(z), 4, 4, ctx30).value()
        assert abs(u1 - mp.conj(u2)) < ctx30.eps(5) * abs(u1)


def test_compound_overlap(ctx30):
    with ctx30.workdps():
        z = 10 * mp.expj(pi / 2)
        a = mpf(1)
        one = u_series_partial(a, z, 8, ctx30).value()
        two = u_compound(a, z, 8, 8, ctx30).value()
        lead = abs(exp(-z * z / 4) * z ** (-a - HALF))
        est = abs(u_series_terms(a, z, 9)[8]) * lead
        assert abs(one - two) < 10 * est + abs(two) * mpf("1e-6")


@pytest.mark.parametrize(
    "a,z,label",
    [
        (HALF, 10, RegionLabel.R1),
        (HALF, mpc(0, 10), RegionLabel.R2),
        (HALF, 10 * mp.expj(pi / 8), RegionLabel.R1),
        (1, 3, RegionLabel.R1),
        (1, -3, RegionLabel.R4),
        (1, mpc(-0.5, 0.2), RegionLabel.R2EXT),
    ],
)
def test_classify(a, z, label):
    assert classify_region(a, z) == label


def test_strict_outside():
    assert classify_region(1, mpc(-0.5, 0.2), strict=True) == RegionLabel.OUTSIDE


def test_boundaries_points():
    b = region_boundaries(1, 16)
    assert abs(b["Q"][0] - mpc(-sqrt(3), 1)) < mpf("1e-12")
    assert b["S"][0] == mpc(0, 1)
    assert abs(abs(b["arc_PQ"][5]) - 2) < mpf("1e-12")
    assert abs(abs(b["arc_ST"][5]) - 1) < mpf("1e-12")


def test_bound_quantities():
    q = bound_quantities(0, 10)
    assert (q.kappa, q.sigma, q.alpha, q.beta) == (0, 0, 1, HALF)
    assert q.delta == mpf(3) / 16
    q = bound_quantities(HALF, 10)
    assert q.sigma == mpf(1) / 20 and abs(q.alpha - mpf(20) / 19) < mpf("1e-25")
    with pytest.raises(RegionError):
        bound_quantities(20, 10)


def test_variation_bound_values(ctx30):
    with ctx30.workdps():
        assert abs(variation_bound(3, HALF, 10, RegionLabel.R1, ctx30) - mpf("1e-3")) < ctx30.eps(3)
        assert abs(variation_bound(1, HALF, mpc(0, 10), RegionLabel.R2, ctx30) - pi / 20) < ctx30.eps(3)
        # sigma = 0, v = 1: only the chi(n) term survives
        assert abs(variation_bound(4, 0, -10, RegionLabel.R4, ctx30) - chi(4, ctx30) * mpf("1e-4")) < ctx30.eps(3)
        with pytest.raises(RegionError):
            variation_bound(1, HALF, 10, RegionLabel.OUTSIDE, ctx30)


def test_variation_2f1_limits(ctx30):
    with ctx30.workdps():
        a = HALF
        r = mpf(10)
        phi = mp.acos(a / r)
        assert abs(variation_2f1(3, a, r * mp.expj(phi), ctx30) - r**-3) < ctx30.eps(3)
        z = r * mp.expj(phi + pi / 2)
        assert abs(variation_2f1(3, a, z, ctx30) - chi(3, ctx30) * r**-3) < ctx30.eps(3)


@pytest.mark.parametrize("j", range(1, 9))
@pytest.mark.parametrize("n", [1, 5, 10])
def test_2f1_never_exceeds_chi(ctx30, j, n):
    z = table_point(j)
    assert variation_2f1(n, HALF, z, ctx30) <= variation_bound(n, HALF, z, RegionLabel.R2, ctx30) * (1 + ctx30.eps(3))


def test_whittaker_coeff():
    assert whittaker_coeff(HALF, 0) == 1
    assert whittaker_coeff(HALF, 1) == -mpf(2) / 4


@pytest.mark.parametrize(
    "z,n,mode,expected",
    [(10, 5, "piecewise", "0.29"), (table_point(8), 10, "piecewise", "0.37"), (table_point(6), 15, "hyp2f1", "0.29")],
)
def test_table_examples(ctx30, z, n, mode, expected):
    rep = remainder_bound(HALF, z, n, mode, ctx30, exact=True)
    assert abs(rep.ratio - mpf(expected)) <= mpf("0.01")


def test_theta_zero_columns_agree(ctx30):
    t1 = table_poincare("piecewise", ctx30)
    t2 = table_poincare("hyp2f1", ctx30)
    for row1, row2 in zip(t1, t2):
        assert abs(row1[0] - row2[0]) < mpf("1e-12")


@lru_cache(maxsize=None)
def _whittaker(a, r, j):
    with CTX.workdps(5):
        z = table_point(j, r)
        return whittaker_ref(-mpf(a) / 2, z, CTX).value()


@pytest.mark.slow
@pytest.mark.parametrize("a", ["0", "0.5", "2"])
@pytest.mark.parametrize("r", [5, 10, 40])
def test_soundness_sweep(a, r):
    bad = []
    for j in range(9):
        w = _whittaker(a, r, j)
        z = table_point(j, r)
        for mode in ("piecewise", "hyp2f1"):
            for n in range(1, 16):
                rep = remainder_bound(mpf(a), z, n, mode, CTX, exact_value=w)
                if rep.ratio > 1:
                    bad.append((j, mode, n, float(rep.ratio)))
    assert bad == []
