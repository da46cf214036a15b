"""float64 kernels for scanning f_n(s) over many s values.

The M_n search in the weight-function bound needs |f_n(s)| on a dense grid;
extended precision is not needed there.  Each s value gets the same contour
layout as the extended-precision path (one circle around s and lambda, or
one circle around each), evaluated with a fixed trapezoidal rule.

Two interchangeable implementations exist: scalar loops compiled with
numba, and a numpy version vectorized over the s values.  Set
``PCFBOUNDS_NUMBA=0`` to force numpy; numba is also skipped when it is not
installed.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised indirectly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("PCFBOUNDS_NUMBA", "1") != "0"


BISECT_STEPS = 80
NEWTON_STEPS = 12


def circles(s, lam, s_minus):
    """Contour layout shared with the extended-precision path.

    Returns ``(c1, r1, c2, r2)``; ``r2 == 0`` means a single circle.
    """
    c = 0.5 * (s + lam)
    h = 0.5 * abs(s - lam)
    d = c - s_minus
    if h <= 0.4 * d:
        return c, 0.5 * (h + 0.8 * d), 0.0, 0.0
    r_s = 0.5 * min(2.0 * h, s - s_minus)
    r_l = 0.5 * min(2.0 * h, lam - s_minus)
    return s, r_s, lam, r_l


# ----------------------------------------------------------------- scalar


def _h_real(w, x, lam, A):
    return w + 0.5 * w * w - lam * np.log(w / x) - x - A


def _w_real_scalar(x, lam, w0, A):
    """Positive w with s(w) = x > 0 (monotone branch, bisection in log w)."""
    if lam == 0.0:
        return -1.0 + np.sqrt(1.0 + 2.0 * x)
    if x == lam:
        return w0
    if x > lam:
        lo = np.log(w0)
        hi = np.log(w0 + 1.0 + np.sqrt(2.0 * x))
        while _h_real(np.exp(hi), x, lam, A) <= 0.0:
            hi += 1.0
        for _ in range(BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            if _h_real(np.exp(mid), x, lam, A) > 0.0:
                hi = mid
            else:
                lo = mid
    else:
        hi = np.log(w0)
        lo = hi - 1.0
        while _h_real(np.exp(lo), x, lam, A) <= 0.0:
            lo -= 1.0
        for _ in range(BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            if _h_real(np.exp(mid), x, lam, A) > 0.0:
                lo = mid
            else:
                hi = mid
    return np.exp(0.5 * (lo + hi))


def _f_node(sig, u, lam, norm):
    w = sig * u
    if lam == 0.0:
        return 1.0 / (np.sqrt(u) * (w + 1.0))
    return norm * np.sqrt(u) * (sig - lam) / (w * w + w - lam)


def _ipow(x, k):
    out = 1.0 + 0.0j
    for _ in range(k):
        out *= x
    return out


def _qn_scalar(sig, lam, s, exps, coefs, qpow, ppow):
    num = 0.0 + 0.0j
    for k in range(coefs.shape[0]):
        num += coefs[k] * _ipow(sig, exps[k, 0]) * (lam ** exps[k, 1] * s ** exps[k, 2])
    return num / (_ipow(sig - lam, qpow) * _ipow(sig - s, ppow))


def _circle_scalar(c, r, s, lam, w0, A, norm, exps, coefs, qpow, ppow, N):
    x = c + r
    w = _w_real_scalar(x, lam, w0, A)
    u = complex(w / x)
    total = 0.0
    half = N // 2
    for j in range(half + 1):
        th = 2.0 * np.pi * j / N
        sig = c + r * complex(np.cos(th), np.sin(th))
        if lam == 0.0:
            u = 2.0 / (np.sqrt(1.0 + 2.0 * sig) + 1.0)
        else:
            for _ in range(NEWTON_STEPS):
                g = sig * u + 0.5 * sig * sig * u * u - lam * np.log(u) - sig - A
                dg = sig + sig * sig * u - lam / u
                du = g / dg
                u -= du
                if abs(du) <= 1e-15 * abs(u):
                    break
        term = _qn_scalar(sig, lam, s, exps, coefs, qpow, ppow) * _f_node(sig, u, lam, norm) * (sig - c)
        wt = 1.0 if 0 < j < half else 0.5
        total += 2.0 * wt * term.real
    return total / N


def _fn_scan_scalar(svals, lam, s_minus, w0, A, exps, coefs, qpow, ppow, N):
    out = np.empty(svals.shape[0])
    norm = (1.0 + 4.0 * lam) ** 0.25
    for i in range(svals.shape[0]):
        s = svals[i]
        c1, r1, c2, r2 = circles(s, lam, s_minus)
        v = _circle_scalar(c1, r1, s, lam, w0, A, norm, exps, coefs, qpow, ppow, N)
        if r2 > 0.0:
            v += _circle_scalar(c2, r2, s, lam, w0, A, norm, exps, coefs, qpow, ppow, N)
        out[i] = v
    return out


def _compile():
    """numba copies of the scalar path; globals are rebound so that jitted
    functions call jitted helpers, the pure-Python originals stay intact."""
    names = ("circles", "_h_real", "_w_real_scalar", "_f_node", "_ipow", "_qn_scalar", "_circle_scalar", "_fn_scan_scalar")
    g = dict(globals())
    out = {}
    for name in names:
        fn = g[name]
        clone = type(fn)(fn.__code__, g, name, fn.__defaults__, fn.__closure__)
        out[name] = numba.njit(cache=False)(clone)
        g[name] = out[name]
    return out["_fn_scan_scalar"]


_JIT = {}


def _jitted():
    if "scan" not in _JIT:
        _JIT["scan"] = _compile()
    return _JIT["scan"]


# ------------------------------------------------------------ vectorized


def _w_real_vec(x, lam, w0, A):
    if lam == 0.0:
        return -1.0 + np.sqrt(1.0 + 2.0 * x)
    right = x > lam
    t0 = np.full_like(x, np.log(w0))
    far = np.where(right, np.log(w0 + 1.0 + np.sqrt(2.0 * x)), t0 - 1.0)
    step = np.where(right, 1.0, -1.0)
    while True:
        bad = (_h_real(np.exp(far), x, lam, A) <= 0.0) & (x != lam)
        if not bad.any():
            break
        far = np.where(bad, far + step, far)
    lo = np.minimum(t0, far)
    hi = np.maximum(t0, far)
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        pos = _h_real(np.exp(mid), x, lam, A) > 0.0
        # H increases with w to the right of w0 and decreases to the left
        go_left = np.where(right, pos, ~pos)
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
    return np.where(x == lam, w0, np.exp(0.5 * (lo + hi)))


def _qn_vec(sig, lam, s, exps, coefs, qpow, ppow):
    num = np.zeros_like(sig)
    for k in range(coefs.shape[0]):
        num = num + coefs[k] * sig ** exps[k, 0] * lam ** exps[k, 1] * s ** exps[k, 2]
    return num / ((sig - lam) ** qpow * (sig - s) ** ppow)


def _fn_scan_numpy(svals, lam, s_minus, w0, A, exps, coefs, qpow, ppow, N):
    svals = np.asarray(svals, dtype=float)
    lay = np.array([circles(s, lam, s_minus) for s in svals]).reshape(-1, 4)
    cs = np.concatenate([lay[:, 0], lay[:, 2]])
    rs = np.concatenate([lay[:, 1], lay[:, 3]])
    ss = np.concatenate([svals, svals])
    owner = np.concatenate([np.arange(svals.size)] * 2)
    keep = rs > 0.0
    cs, rs, ss, owner = cs[keep], rs[keep], ss[keep], owner[keep]
    norm = (1.0 + 4.0 * lam) ** 0.25
    x = cs + rs
    u = (_w_real_vec(x, lam, w0, A) / x).astype(complex)
    total = np.zeros(cs.size)
    half = N // 2
    for j in range(half + 1):
        th = 2.0 * np.pi * j / N
        sig = cs + rs * np.exp(1j * th)
        if lam == 0.0:
            u = 2.0 / (np.sqrt(1.0 + 2.0 * sig) + 1.0)
            f = 1.0 / (np.sqrt(u) * (sig * u + 1.0))
        else:
            for _ in range(NEWTON_STEPS):
                g = sig * u + 0.5 * sig * sig * u * u - lam * np.log(u) - sig - A
                dg = sig + sig * sig * u - lam / u
                du = g / dg
                u = u - du
                if np.all(np.abs(du) <= 1e-15 * np.abs(u)):
                    break
            w = sig * u
            f = norm * np.sqrt(u) * (sig - lam) / (w * w + w - lam)
        term = _qn_vec(sig, lam, ss, exps, coefs, qpow, ppow) * f * (sig - cs)
        wt = 1.0 if 0 < j < half else 0.5
        total += 2.0 * wt * term.real
    out = np.zeros(svals.size)
    np.add.at(out, owner, total / N)
    return out


def fn_scan(svals, lam, s_minus, w0, A, exps, coefs, qpow, ppow, N=128):
    """f_n at every entry of ``svals`` (float64), kernel Q_n given by monomials.

    ``exps`` is a (K, 3) integer array of exponents of (sigma, lambda, s),
    ``coefs`` the matching float coefficients; the denominator is
    ``(sigma - lambda)**qpow (sigma - s)**ppow``.
    """
    svals = np.ascontiguousarray(svals, dtype=np.float64)
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    coefs = np.ascontiguousarray(coefs, dtype=np.float64)
    args = (svals, float(lam), float(s_minus), float(w0), float(A), exps, coefs, int(qpow), int(ppow), int(N))
    if numba_enabled():
        return _jitted()(*args)
    return _fn_scan_numpy(*args)
