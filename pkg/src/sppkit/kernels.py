"""Hot numeric loops, each in a numba and a pure-numpy flavour.

The public entry points (:func:`synthesize_modes`, :func:`apply_harmonics`,
:func:`coupling_matrix`) dispatch on :data:`sppkit._accel.USE_NUMBA`.  The
``*_numba`` / ``*_numpy`` functions are importable on their own so tests and
the benchmark can run both paths side by side.

Normalised Laguerre functions
-----------------------------
The field synthesis uses

    g_p(X) = sqrt(p!/(p+a)!) X^{a/2} e^{-X/2} L_p^{(a)}(X),

which obey the bounded three-term recurrence

    sqrt((p+1)(p+1+a)) g_{p+1} = (2p+1+a-X) g_p - sqrt(p(p+a)) g_{p-1}.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import JIT_OPTIONS, USE_NUMBA, njit, prange

# ---------------------------------------------------------------------------
# field synthesis: sum_l e^{il phi} sum_p c_{pl} g_p^{|l|}(X)
# ---------------------------------------------------------------------------


@njit(parallel=True, **JIT_OPTIONS)
def _synthesize_nb(X, phi, ls, cre, cim, up, down, lg0):
    npix = X.shape[0]
    nl, np1 = cre.shape
    out = np.zeros(npix, dtype=np.complex128)
    for j in prange(npix):
        x = X[j]
        lx = math.log(x) if x > 0.0 else 0.0
        re = 0.0
        im = 0.0
        for li in range(nl):
            a = abs(ls[li])
            if x > 0.0:
                g0 = math.exp(0.5 * (a * lx - x) - lg0[li])
            elif a == 0:
                g0 = 1.0
            else:
                continue
            sr = cre[li, 0] * g0
            si = cim[li, 0] * g0
            gm, g = 0.0, g0
            for p in range(np1 - 1):
                gn = ((2 * p + 1 + a - x) * g - down[li, p] * gm) * up[li, p]
                gm, g = g, gn
                sr += cre[li, p + 1] * g
                si += cim[li, p + 1] * g
            ang = ls[li] * phi[j]
            c, s = math.cos(ang), math.sin(ang)
            re += sr * c - si * s
            im += sr * s + si * c
        out[j] = complex(re, im)
    return out


def _recurrence_tables(ls, np1):
    """1/sqrt((p+1)(p+1+a)), sqrt(p(p+a)) and lgamma(a+1)/2 for every |l|."""
    a = np.abs(np.asarray(ls, dtype=np.float64))[:, None]
    p = np.arange(max(np1 - 1, 1), dtype=np.float64)[None, :]
    up = 1.0 / np.sqrt((p + 1.0) * (p + 1.0 + a))
    down = np.sqrt(p * (p + a))
    lg0 = np.array([0.5 * math.lgamma(x + 1.0) for x in a[:, 0]])
    return up, down, lg0


def _synthesize_np(X, phi, ls, coefs):
    X = np.asarray(X, dtype=float)
    out = np.zeros(X.shape, dtype=complex)
    with np.errstate(divide="ignore"):
        logx = np.log(X)
    for li, l in enumerate(ls):
        a = abs(int(l))
        if a == 0:
            g = np.exp(-0.5 * X)
        else:
            g = np.where(X > 0.0, np.exp(0.5 * (a * logx - X - math.lgamma(a + 1.0))), 0.0)
        gm = np.zeros_like(X)
        s = coefs[li, 0] * g
        for p in range(coefs.shape[1] - 1):
            gn = ((2 * p + 1 + a - X) * g - math.sqrt(p * (p + a)) * gm) / math.sqrt((p + 1.0) * (p + 1.0 + a))
            gm, g = g, gn
            s = s + coefs[li, p + 1] * g
        out += s * np.exp(1j * l * phi)
    return out


def synthesize_modes_numba(X, phi, ls, coefs):
    coefs = np.asarray(coefs, dtype=np.complex128)
    ls = np.ascontiguousarray(ls, dtype=np.int64)
    up, down, lg0 = _recurrence_tables(ls, coefs.shape[1])
    return _synthesize_nb(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(phi, dtype=np.float64),
        ls,
        np.ascontiguousarray(coefs.real),
        np.ascontiguousarray(coefs.imag),
        up, down, lg0,
    )


def synthesize_modes_numpy(X, phi, ls, coefs):
    return _synthesize_np(X, phi, np.asarray(ls), np.asarray(coefs, dtype=complex))


def synthesize_modes(X, phi, ls, coefs):
    """Evaluate sum_l e^{il phi} sum_p coefs[l, p] g_p^{|l|}(X) on flat arrays."""
    if USE_NUMBA:
        return synthesize_modes_numba(X, phi, ls, coefs)
    return synthesize_modes_numpy(X, phi, ls, coefs)


# ---------------------------------------------------------------------------
# rational-ladder phase harmonics (operator engine)
# ---------------------------------------------------------------------------


class HarmonicTables:
    """Laurent-leading-term tables for a set of harmonics.

    For harmonic k the engine needs, with every rational exponent shifted by
    +eps,

    * ``b1[i]``  = binom(k/2 + eps, i)
    * ``b2[h]``  = binom(-k/2 + eps, h)
    * ``g[j]``   = Gamma(1 + j - k/2 + eps), j = n_minus - h

    each stored as a coefficient and an integer order in eps.
    """

    def __init__(self, ks, i_max, h_max, n_max):
        ks = np.asarray(ks, dtype=np.int64)
        nk = ks.size
        self.ks = ks
        self.j0 = h_max
        self.b1c = np.zeros((nk, i_max + 1))
        self.b1o = np.zeros((nk, i_max + 1), dtype=np.int64)
        self.b2c = np.zeros((nk, h_max + 1))
        self.b2o = np.zeros((nk, h_max + 1), dtype=np.int64)
        self.gc = np.zeros((nk, h_max + n_max + 1))
        self.go = np.zeros((nk, h_max + n_max + 1), dtype=np.int64)
        for kk, k in enumerate(ks):
            half = 0.5 * k
            _binomial_row(half, self.b1c[kk], self.b1o[kk])
            _binomial_row(-half, self.b2c[kk], self.b2o[kk])
            for idx in range(self.gc.shape[1]):
                x = 1.0 + (idx - h_max) - half
                if x <= 0.0 and x == round(x):
                    nn = -int(round(x))
                    self.gc[kk, idx] = (-1.0) ** nn / math.factorial(nn)
                    self.go[kk, idx] = -1
                elif x > 171.0:
                    self.gc[kk, idx] = np.inf
                else:
                    self.gc[kk, idx] = math.gamma(x)


def _binomial_row(r, coef, order):
    c, o = 1.0, 0
    coef[0], order[0] = 1.0, 0
    for i in range(1, coef.size):
        f = r - (i - 1)
        if f == 0.0:
            o += 1
        else:
            c *= f
        c /= i
        coef[i], order[i] = c, o


def _log_factorials(n):
    return np.array([math.lgamma(i + 1.0) for i in range(n + 1)])


def _inv_factorials(n):
    return np.array([math.exp(-math.lgamma(i + 1.0)) for i in range(n + 1)])


@njit(**JIT_OPTIONS)
def _apply_row(pp, row, in_p, in_m, in_amp, weights, ks, l_cap,
               b1c, b1o, b2c, b2o, gc, go, j0, lf, invf):
    bad = 0
    for e in range(in_p.shape[0]):
        m = in_p[e]
        n = in_m[e]
        amp = in_amp[e]
        L = m - n
        for kk in range(ks.shape[0]):
            w = weights[kk]
            if w == 0:
                continue
            Lp = L + ks[kk]
            if Lp > l_cap or Lp < -l_cap:
                continue
            npo = pp + max(Lp, 0)
            nmo = pp + max(-Lp, 0)
            d = npo - m
            s = 0.0
            comp = 0.0
            for h in range(max(0, -d), m + 1):
                i = h + d
                order = b1o[kk, i] + b2o[kk, h] + go[kk, n - h + j0]
                if order > 0:
                    continue
                if order < 0:
                    bad += 1
                    continue
                t = b1c[kk, i] * b2c[kk, h] * gc[kk, n - h + j0] * invf[m - h]
                # Neumaier compensated sum
                tot = s + t
                if abs(s) >= abs(t):
                    comp += (s - tot) + t
                else:
                    comp += (t - tot) + s
                s = tot
            s += comp
            if s != 0.0:
                pref = math.exp(0.5 * (lf[m] + lf[npo] - lf[n] - lf[nmo]))
                row[Lp + l_cap] += w * amp * (pref * s)
    return bad


@njit(parallel=True, **JIT_OPTIONS)
def _apply_nb(in_p, in_m, in_amp, weights, ks, m_max, l_cap,
              b1c, b1o, b2c, b2o, gc, go, j0, lf, invf):
    out = np.zeros((m_max + 1, 2 * l_cap + 1), dtype=np.complex128)
    bad = np.zeros(m_max + 1, dtype=np.int64)
    for pp in prange(m_max + 1):
        bad[pp] = _apply_row(pp, out[pp], in_p, in_m, in_amp, weights, ks, l_cap,
                             b1c, b1o, b2c, b2o, gc, go, j0, lf, invf)
    return out, bad


def _apply_np(in_p, in_m, in_amp, weights, ks, m_max, l_cap,
              b1c, b1o, b2c, b2o, gc, go, j0, lf, invf):
    out = np.zeros((m_max + 1, 2 * l_cap + 1), dtype=complex)
    bad = 0
    pp = np.arange(m_max + 1)
    for m, n, amp in zip(in_p, in_m, in_amp):
        L = m - n
        h = np.arange(m + 1)
        for kk, k in enumerate(ks):
            w = weights[kk]
            if w == 0:
                continue
            Lp = L + k
            if abs(Lp) > l_cap:
                continue
            npo = pp + max(Lp, 0)
            nmo = pp + max(-Lp, 0)
            d = npo - m
            i = h[None, :] + d[:, None]
            valid = i >= 0
            ic = np.where(valid, i, 0)
            order = b1o[kk][ic] + b2o[kk][h][None, :] + go[kk][n - h + j0][None, :]
            keep = valid & (order == 0)
            bad += int(np.count_nonzero(valid & (order < 0)))
            terms = b1c[kk][ic] * (b2c[kk][h] * gc[kk][n - h + j0] * invf[m - h])[None, :]
            s = np.where(keep, terms, 0.0).sum(axis=1)
            pref = np.exp(0.5 * (lf[m] + lf[npo] - lf[n] - lf[nmo]))
            out[:, Lp + l_cap] += w * amp * pref * s
    return out, bad


def _engine_args(in_p, in_m, in_amp, ks, m_max, l_cap):
    in_p = np.ascontiguousarray(in_p, dtype=np.int64)
    in_m = np.ascontiguousarray(in_m, dtype=np.int64)
    h_max = int(in_p.max()) if in_p.size else 0
    n_max = int(in_m.max()) if in_m.size else 0
    i_max = h_max + m_max + l_cap + 1
    tab = HarmonicTables(ks, i_max, h_max, n_max)
    top = max(i_max, n_max, h_max) + m_max + l_cap + 2
    return (in_p, in_m, np.ascontiguousarray(in_amp, dtype=np.complex128), tab,
            _log_factorials(top), _inv_factorials(top))


def apply_harmonics_numba(in_p, in_m, in_amp, ks, weights, m_max, l_cap):
    in_p, in_m, in_amp, tab, lf, invf = _engine_args(in_p, in_m, in_amp, ks, m_max, l_cap)
    out, bad = _apply_nb(in_p, in_m, in_amp, np.ascontiguousarray(weights, dtype=np.complex128),
                         tab.ks, m_max, l_cap, tab.b1c, tab.b1o, tab.b2c, tab.b2o,
                         tab.gc, tab.go, tab.j0, lf, invf)
    return out, int(bad.sum())


def apply_harmonics_numpy(in_p, in_m, in_amp, ks, weights, m_max, l_cap):
    in_p, in_m, in_amp, tab, lf, invf = _engine_args(in_p, in_m, in_amp, ks, m_max, l_cap)
    return _apply_np(in_p, in_m, in_amp, np.asarray(weights, dtype=complex), tab.ks, m_max, l_cap,
                     tab.b1c, tab.b1o, tab.b2c, tab.b2o, tab.gc, tab.go, tab.j0, lf, invf)


def apply_harmonics(in_p, in_m, in_amp, ks, weights, m_max, l_cap):
    """Apply sum_k weights[k] e^{ik phi} to a sparse two-mode state.

    Inputs are parallel arrays of occupations (n_plus, n_minus) and complex
    amplitudes.  The result is a dense array ``out[p, L + l_cap]`` over the
    output window p = min(n_plus, n_minus) <= m_max, |L| <= l_cap, plus the
    number of terms whose Laurent order was negative (always 0 in practice).
    """
    if len(in_p) == 0:
        return np.zeros((m_max + 1, 2 * l_cap + 1), dtype=complex), 0
    if USE_NUMBA:
        return apply_harmonics_numba(in_p, in_m, in_amp, ks, weights, m_max, l_cap)
    return apply_harmonics_numpy(in_p, in_m, in_amp, ks, weights, m_max, l_cap)


# ---------------------------------------------------------------------------
# normalised Laguerre coupling matrices
# ---------------------------------------------------------------------------


def _binom_table(r, n):
    out = np.empty(n + 1)
    c = 1.0
    out[0] = 1.0
    for i in range(1, n + 1):
        c *= (r - (i - 1)) / i
        out[i] = c
    return out


@njit(**JIT_OPTIONS)
def _coupling_nb(a, b, p_max, h_max, t1, t2, t3, logpref):
    out = np.empty((p_max + 1, h_max + 1))
    for p in range(p_max + 1):
        for h in range(h_max + 1):
            s = 0.0
            for r in range(min(p, h) + 1):
                s += t1[p - r] * t2[h - r] * t3[r]
            sign = -1.0 if (p + h) % 2 else 1.0
            out[p, h] = sign * s * math.exp(logpref[p, h])
    return out


def _coupling_np(a, b, p_max, h_max, t1, t2, t3, logpref):
    acc = np.zeros((p_max + 1, h_max + 1))
    for r in range(min(p_max, h_max) + 1):
        acc[r:, r:] += t3[r] * np.outer(t1[: p_max + 1 - r], t2[: h_max + 1 - r])
    sign = np.where((np.add.outer(np.arange(p_max + 1), np.arange(h_max + 1)) % 2) == 1, -1.0, 1.0)
    return sign * acc * np.exp(logpref)


def _coupling_args(a, b, p_max, h_max):
    s = 0.5 * (a + b)
    d = 0.5 * (b - a)
    t1 = _binom_table(d, p_max)
    t2 = _binom_table(-d, h_max)
    t3 = np.array([math.exp(math.lgamma(s + r + 1) - math.lgamma(s + 1) - math.lgamma(r + 1))
                   for r in range(min(p_max, h_max) + 1)])
    lp = np.array([math.lgamma(p + 1) - math.lgamma(p + a + 1) for p in range(p_max + 1)])
    lh = np.array([math.lgamma(h + 1) - math.lgamma(h + b + 1) for h in range(h_max + 1)])
    logpref = math.lgamma(s + 1) + 0.5 * np.add.outer(lp, lh)
    return t1, t2, t3, logpref


def coupling_matrix_numba(a, b, p_max, h_max):
    a, b = abs(int(a)), abs(int(b))
    return _coupling_nb(a, b, p_max, h_max, *_coupling_args(a, b, p_max, h_max))


def coupling_matrix_numpy(a, b, p_max, h_max):
    a, b = abs(int(a)), abs(int(b))
    return _coupling_np(a, b, p_max, h_max, *_coupling_args(a, b, p_max, h_max))


def coupling_matrix(a, b, p_max, h_max):
    """Normalised kernel sqrt(p!h!/((p+a)!(h+b)!)) I_{p,h}(a, b) for all p, h."""
    if USE_NUMBA:
        return coupling_matrix_numba(a, b, p_max, h_max)
    return coupling_matrix_numpy(a, b, p_max, h_max)
