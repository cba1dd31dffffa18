"""Hot numeric kernels, each in a numba flavour and a pure-numpy flavour.

The public names at the bottom pick one flavour according to
``ginzburg._accel.USE_NUMBA``; both flavours stay importable (``*_numba`` and
``*_numpy``) so tests and the benchmark can compare them directly.

Conventions: medium parameters are passed as plain floats (Omega, g, G^2);
all frequencies and wave numbers are in eV.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit
from .quadrature import G_WEIGHTS, GK_NODES, GK_WEIGHTS

_TWO_PI = 2.0 * math.pi
_EIGHT_PI2 = 8.0 * math.pi**2

# inner k-integral layout for the correlator
WINDOW_HALF_PERIODS = 12  # uniform half-period panels on each side of the pole
IBP_TERMS = 10
GEOMETRIC_RATIO = 3.0


# ---------------------------------------------------------------------------
# 1D and 3D rate integrands
# ---------------------------------------------------------------------------

@njit
def _rate1d_exact_numba(kappa, w_gamma, v_abs, Om, g, G2):
    out = np.empty(kappa.size)
    for i in range(kappa.size):
        kap = kappa[i]
        ks = (w_gamma + kap) / v_abs
        dre = Om * Om - kap * kap
        dim = -0.5 * G2 * kap
        u = ks * ks - kap * kap
        zr = dre * u - g * g * kap * kap
        zi = dim * u
        out[i] = kap**3 / (zr * zr + zi * zi)
    return out


def _rate1d_exact_numpy(kappa, w_gamma, v_abs, Om, g, G2):
    ks = (w_gamma + kappa) / v_abs
    u = ks * ks - kappa * kappa
    zr = (Om * Om - kappa * kappa) * u - g * g * kappa * kappa
    zi = -0.5 * G2 * kappa * u
    return kappa**3 / (zr * zr + zi * zi)


@njit
def _rate1d_smallv_numba(kappa, omega, Om, G2):
    out = np.empty(kappa.size)
    for i in range(kappa.size):
        kap = kappa[i]
        d = kap * kap - Om * Om
        out[i] = kap**3 / ((kap + omega) ** 4 * (d * d + kap * kap * G2 * G2 / 4.0))
    return out


def _rate1d_smallv_numpy(kappa, omega, Om, G2):
    d = kappa * kappa - Om * Om
    return kappa**3 / ((kappa + omega) ** 4 * (d * d + kappa * kappa * G2 * G2 / 4.0))


@njit
def _rate3d_numba(kappa, eta, w_gamma, v_abs, Om, g, G2, k_max):
    """kappa^3 k*^2 / (eta |v| |zeta(k*, kappa)|^2) with k* = (w/gamma + kappa)/(eta |v|)."""
    out = np.empty(kappa.size)
    for i in range(kappa.size):
        kap = kappa[i]
        ks = (w_gamma + kap) / (eta * v_abs)
        if ks >= k_max:
            out[i] = 0.0
            continue
        u = ks * ks - kap * kap
        zr = (Om * Om - kap * kap) * u - g * g * kap * kap
        zi = -0.5 * G2 * kap * u
        out[i] = kap**3 * ks * ks / (eta * v_abs * (zr * zr + zi * zi))
    return out


def _rate3d_numpy(kappa, eta, w_gamma, v_abs, Om, g, G2, k_max):
    ks = (w_gamma + kappa) / (eta * v_abs)
    u = ks * ks - kappa * kappa
    zr = (Om * Om - kappa * kappa) * u - g * g * kappa * kappa
    zi = -0.5 * G2 * kappa * u
    val = kappa**3 * ks * ks / (eta * v_abs * (zr * zr + zi * zi))
    return np.where(ks >= k_max, 0.0, val)


# ---------------------------------------------------------------------------
# correlator: inner k-integral of the spectral density
# ---------------------------------------------------------------------------

@njit
def _pole_data(kap, Om, g, G2):
    """(C, k0, w): density = C / |k^2 - q^2|^2 with q = k0 + i w."""
    dre = Om * Om - kap * kap
    dim = -0.5 * G2 * kap
    dd = dre * dre + dim * dim
    # q^2 = kappa^2 (1 + g^2 / D)
    qr = kap * kap * (1.0 + g * g * dre / dd)
    qi = kap * kap * (-g * g * dim / dd)
    q = np.sqrt(complex(qr, qi))
    C = g * g * G2 * kap**5 / (_EIGHT_PI2 * dd)
    return C, q.real, abs(q.imag)


@njit
def _density_at(C, k0, w, delta):
    # |k^2 - q^2|^2 written around k = k0 + delta to avoid cancellation
    u = delta * (2.0 * k0 + delta) + w * w
    v = 2.0 * k0 * w
    return C / (u * u + v * v)


@njit
def _ibp_sum(C, a, b, k, X, nterms):
    """sum_m (-1)^m f^(m)(k) / (i X)^(m+1) for f = C / ((k^2 - a)^2 + b^2)."""
    P = np.empty(5)
    P[0] = (k * k - a) ** 2 + b * b
    P[1] = 4.0 * k**3 - 4.0 * a * k
    P[2] = 12.0 * k * k - 4.0 * a
    P[3] = 24.0 * k
    P[4] = 24.0
    f = np.empty(nterms)
    f[0] = C / P[0]
    for m in range(1, nterms):
        acc = 0.0
        binom = 1.0
        for j in range(1, min(m, 4) + 1):
            binom = binom * (m - j + 1) / j
            acc += binom * P[j] * f[m - j]
        f[m] = -acc / P[0]
    s = 0j
    ix = 1j * X
    pw = ix
    sign = 1.0
    last = 0.0
    for m in range(nterms):
        term = sign * f[m] / pw
        s += term
        last = abs(term)
        pw = pw * ix
        sign = -sign
    return s, last


@njit
def _inner_offsets(k0, w, X):
    """Panel boundaries as offsets from the pole: geometric, then uniform half-periods."""
    if X > 0:
        h = math.pi / X
        n_uniform = WINDOW_HALF_PERIODS
    else:
        h = max(k0, w)
        n_uniform = 0
    n_geo = 0
    s = w
    while s < h:
        n_geo += 1
        s *= GEOMETRIC_RATIO
    offs = np.empty(n_geo + n_uniform + 1)
    s = w
    for j in range(n_geo):
        offs[j] = s
        s *= GEOMETRIC_RATIO
    for j in range(n_uniform):
        offs[n_geo + j] = h * (j + 1)
    offs[n_geo + n_uniform] = 0.0
    if n_uniform == 0:
        offs[n_geo] = h
    return offs[: n_geo + max(n_uniform, 1)]


@njit
def _gk_segment(C, k0, w, X, lo, hi):
    """GK15 on [k0+lo, k0+hi] (offsets) of density*cos(kX); returns (K, |K-G|)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    rk = 0.0
    rg = 0.0
    for j in range(15):
        d = mid + half * GK_NODES[j]
        val = _density_at(C, k0, w, d) * math.cos((k0 + d) * X)
        rk += GK_WEIGHTS[j] * val
        rg += G_WEIGHTS[j] * val
    return rk * half, abs(rk - rg) * half


@njit
def _inner_one(kap, X, Om, g, G2):
    if kap == 0.0:
        return 0.0, 0.0
    C, k0, w = _pole_data(kap, Om, g, G2)
    if C == 0.0:
        return 0.0, 0.0
    offs = _inner_offsets(k0, w, X)
    n = offs.size
    total = 0.0
    err = 0.0
    # central panels [k0 - w0, k0] and [k0, k0 + w0], the left one clipped at k = 0
    prev = offs[0]
    lo = max(-prev, -k0)
    v, e = _gk_segment(C, k0, w, X, 0.0, prev)
    total += v
    err += e
    v, e = _gk_segment(C, k0, w, X, lo, 0.0)
    total += v
    err += e
    left_done = lo <= -k0
    for j in range(1, n):
        cur = offs[j]
        v, e = _gk_segment(C, k0, w, X, prev, cur)
        total += v
        err += e
        if not left_done:
            lo = max(-cur, -k0)
            v, e = _gk_segment(C, k0, w, X, lo, -prev)
            total += v
            err += e
            left_done = lo <= -k0
        prev = cur
    a = k0 * k0 - w * w
    b = 2.0 * k0 * w
    if X > 0:
        s, last = _ibp_sum(C, a, b, k0 + prev, X, IBP_TERMS)
        ph = complex(math.cos((k0 + prev) * X), math.sin((k0 + prev) * X))
        total += (-ph * s).real
        err += last
        if not left_done:
            B = k0 - prev
            s, last = _ibp_sum(C, a, b, B, X, IBP_TERMS)
            ph = complex(math.cos(B * X), math.sin(B * X))
            total += (ph * s).real
            err += last
    else:
        # non-oscillatory tail: k = R / t
        R = k0 + prev
        half = 0.5
        rk = 0.0
        rg = 0.0
        for j in range(15):
            t = 0.5 + half * GK_NODES[j]
            d = R / t - k0
            val = _density_at(C, k0, w, d) * R / (t * t)
            rk += GK_WEIGHTS[j] * val
            rg += G_WEIGHTS[j] * val
        total += rk * half
        err += abs(rk - rg) * half
        if not left_done:
            v, e = _gk_segment(C, k0, w, X, -k0, -prev)
            total += v
            err += e
    return 2.0 * total, 2.0 * err


@njit
def _correlator_inner_numba(kappa, X, Om, g, G2):
    n = kappa.size
    val = np.empty(n)
    err = np.empty(n)
    for i in range(n):
        val[i], err[i] = _inner_one(abs(kappa[i]), X, Om, g, G2)
    return val, err


def _pole_data_np(kap, Om, g, G2):
    D = Om * Om - kap * kap - 0.5j * G2 * kap
    dd = np.abs(D) ** 2
    q = np.sqrt(kap * kap * (1.0 + g * g / D))
    C = g * g * G2 * kap**5 / (_EIGHT_PI2 * dd)
    return C, q.real, np.abs(q.imag)


def _ibp_sum_np(C, a, b, k, X, nterms):
    P = [
        (k * k - a) ** 2 + b * b,
        4.0 * k**3 - 4.0 * a * k,
        12.0 * k * k - 4.0 * a,
        24.0 * k,
        np.full_like(k, 24.0),
    ]
    f = [C / P[0]]
    for m in range(1, nterms):
        acc = np.zeros_like(k)
        binom = 1.0
        for j in range(1, min(m, 4) + 1):
            binom = binom * (m - j + 1) / j
            acc = acc + binom * P[j] * f[m - j]
        f.append(-acc / P[0])
    s = np.zeros(k.shape, dtype=complex)
    last = np.zeros_like(k)
    ix = 1j * X
    for m in range(nterms):
        term = (-1.0) ** m * f[m] / ix ** (m + 1)
        s = s + term
        last = np.abs(term)
    return s, last


def _correlator_inner_numpy(kappa, X, Om, g, G2, chunk=4096):
    """Vectorized twin of the numba kernel: same panels, padded to a common count."""
    kappa = np.abs(np.asarray(kappa, dtype=float))
    val = np.zeros(kappa.size)
    err = np.zeros(kappa.size)
    for start in range(0, kappa.size, chunk):
        sl = slice(start, start + chunk)
        v, e = _inner_chunk_numpy(kappa[sl], X, Om, g, G2)
        val[sl], err[sl] = v, e
    return val, err


def _inner_chunk_numpy(kap, X, Om, g, G2):
    n = kap.size
    out_v = np.zeros(n)
    out_e = np.zeros(n)
    live = kap > 0
    if not live.any():
        return out_v, out_e
    kap = kap[live]
    C, k0, w = _pole_data_np(kap, Om, g, G2)
    ok = C > 0
    if X > 0:
        h = np.full_like(k0, math.pi / X)
        n_uniform = WINDOW_HALF_PERIODS
    else:
        h = np.maximum(k0, w)
        n_uniform = 0
    # geometric count per node, then pad to the batch maximum
    with np.errstate(divide="ignore"):
        n_geo = np.where(w < h, np.ceil(np.log(h / w) / math.log(GEOMETRIC_RATIO) - 1e-12), 0).astype(int)
    n_geo = np.maximum(n_geo, 0)
    gmax = int(n_geo.max()) if n_geo.size else 0
    j = np.arange(gmax)
    geo = w[:, None] * GEOMETRIC_RATIO ** j[None, :]
    geo = np.where(j[None, :] < n_geo[:, None], geo, np.nan)
    if n_uniform:
        uni = h[:, None] * np.arange(1, n_uniform + 1)[None, :]
    else:
        uni = h[:, None]
    offs = np.concatenate([geo, uni], axis=1)
    # push padding to the front as duplicates of the first real offset -> zero-width panels
    first = np.where(n_geo > 0, w, h)
    offs = np.where(np.isnan(offs), first[:, None], offs)
    offs = np.sort(offs, axis=1)
    last = offs[:, -1]
    # right panels: [0, o0], [o0, o1], ...; left panels mirrored and clipped at -k0
    lo_r = np.concatenate([np.zeros((kap.size, 1)), offs[:, :-1]], axis=1)
    hi_r = offs
    right = _gk_offsets_np(C, k0, w, X, lo_r, hi_r)
    lo_l = np.maximum(-hi_r, -k0[:, None])
    hi_l = np.maximum(-lo_r, -k0[:, None])
    left = _gk_offsets_np(C, k0, w, X, lo_l, hi_l)
    total = right[0] + left[0]
    err = right[1] + left[1]
    reached = last >= k0
    a = k0 * k0 - w * w
    b = 2.0 * k0 * w
    if X > 0:
        R = k0 + last
        s, lr = _ibp_sum_np(C, a, b, R, X, IBP_TERMS)
        total = total + (-np.exp(1j * R * X) * s).real
        err = err + lr
        B = k0 - last
        s, lb = _ibp_sum_np(C, a, b, np.where(reached, 1.0, B), X, IBP_TERMS)
        total = total + np.where(reached, 0.0, (np.exp(1j * B * X) * s).real)
        err = err + np.where(reached, 0.0, lb)
    else:
        R = k0 + last
        t = 0.5 + 0.5 * GK_NODES
        d = R[:, None] / t[None, :] - k0[:, None]
        f = _density_np(C[:, None], k0[:, None], w[:, None], d) * R[:, None] / t[None, :] ** 2
        rk = 0.5 * (f * GK_WEIGHTS).sum(axis=1)
        rg = 0.5 * (f * G_WEIGHTS).sum(axis=1)
        total = total + rk
        err = err + np.abs(rk - rg)
        rest = _gk_offsets_np(C, k0, w, X, -k0[:, None], np.minimum(-last, 0.0)[:, None])
        total = total + np.where(reached, 0.0, rest[0])
        err = err + np.where(reached, 0.0, rest[1])
    total = np.where(ok, 2.0 * total, 0.0)
    err = np.where(ok, 2.0 * err, 0.0)
    out_v[live] = total
    out_e[live] = err
    return out_v, out_e


def _density_np(C, k0, w, d):
    u = d * (2.0 * k0 + d) + w * w
    v = 2.0 * k0 * w
    return C / (u * u + v * v)


def _gk_offsets_np(C, k0, w, X, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    d = mid[..., None] + half[..., None] * GK_NODES
    cc, kk, ww = (z[:, None, None] for z in (C, k0, w))
    vals = _density_np(cc, kk, ww, d) * np.cos((kk + d) * X)
    rk = (vals * GK_WEIGHTS).sum(axis=-1) * half
    rg = (vals * G_WEIGHTS).sum(axis=-1) * half
    return rk.sum(axis=1), np.abs(rk - rg).sum(axis=1)


# ---------------------------------------------------------------------------
# correlator: residue-reduced kappa integrand
# ---------------------------------------------------------------------------

@njit
def _q_of(kap, Om, g, G2):
    """q = kappa n(kappa) for complex kappa on the kappa > 0 sheet."""
    D = Om * Om - kap * kap - 0.5j * G2 * kap
    return kap * np.sqrt(1.0 + g * g / D)


@njit
def _residue_real_numba(kappa, T, X, Om, g, G2):
    out = np.empty(kappa.size, dtype=np.complex128)
    for i in range(kappa.size):
        kap = kappa[i]
        if kap == 0.0:
            out[i] = 0.0
            continue
        q = _q_of(complex(kap, 0.0), Om, g, G2)
        r = (np.exp(1j * q * X) / q).real
        out[i] = kap * kap / _TWO_PI * r * np.exp(-1j * kap * T)
    return out


def _residue_real_numpy(kappa, T, X, Om, g, G2):
    kappa = np.asarray(kappa, dtype=float)
    safe = np.where(kappa == 0, 1.0, kappa)
    D = Om * Om - safe * safe - 0.5j * G2 * safe
    q = safe * np.sqrt(1.0 + g * g / D)
    r = (np.exp(1j * q * X) / q).real
    out = safe * safe / _TWO_PI * r * np.exp(-1j * safe * T)
    return np.where(kappa == 0, 0.0, out)


@njit
def _residue_leg_numba(s, K, up, conj_branch, T, X, Om, g, G2):
    """Leg kappa = K +/- i s of either the q-term or the conj(q)-term."""
    out = np.empty(s.size, dtype=np.complex128)
    sg = 1.0 if up else -1.0
    for i in range(s.size):
        kap = complex(K, sg * s[i])
        if conj_branch:
            q = np.conj(_q_of(np.conj(kap), Om, g, G2))
            ph = -1j * (q * X + kap * T)
        else:
            q = _q_of(kap, Om, g, G2)
            ph = 1j * (q * X - kap * T)
        out[i] = kap * kap / (2.0 * _TWO_PI) * np.exp(ph) / q * (1j * sg)
    return out


def _residue_leg_numpy(s, K, up, conj_branch, T, X, Om, g, G2):
    sg = 1.0 if up else -1.0
    kap = K + 1j * sg * np.asarray(s, dtype=float)

    def q_of(z):
        D = Om * Om - z * z - 0.5j * G2 * z
        return z * np.sqrt(1.0 + g * g / D)

    if conj_branch:
        q = np.conj(q_of(np.conj(kap)))
        ph = -1j * (q * X + kap * T)
    else:
        q = q_of(kap)
        ph = 1j * (q * X - kap * T)
    return kap * kap / (2.0 * _TWO_PI) * np.exp(ph) / q * (1j * sg)


# ---------------------------------------------------------------------------
# brute-force oracles
# ---------------------------------------------------------------------------

@njit
def _grid_sum_numba(T, X, eps, Om, g, G2, h_kappa, n_kappa, h_k, n_k):
    """Midpoint double sum of 2 int_0 dkappa 2 int_0 dk density cos(kX) e^{-i kappa (T - i eps)}."""
    acc = 0j
    for i in range(n_kappa):
        kap = (i + 0.5) * h_kappa
        dre = Om * Om - kap * kap
        dim = -0.5 * G2 * kap
        dd = dre * dre + dim * dim
        C = g * g * G2 * kap**5 / (_EIGHT_PI2 * dd)
        inner = 0.0
        for j in range(n_k):
            k = (j + 0.5) * h_k
            u = k * k - kap * kap
            zr = dre * u - g * g * kap * kap
            zi = dim * u
            inner += math.cos(k * X) / (zr * zr + zi * zi)
        inner *= C * dd * h_k
        acc += inner * np.exp(-1j * kap * T - eps * kap)
    return 4.0 * acc * h_kappa


def _grid_sum_numpy(T, X, eps, Om, g, G2, h_kappa, n_kappa, h_k, n_k, chunk=64):
    k = (np.arange(n_k) + 0.5) * h_k
    cosk = np.cos(k * X)
    acc = 0j
    for start in range(0, n_kappa, chunk):
        kap = (np.arange(start, min(start + chunk, n_kappa)) + 0.5) * h_kappa
        dre = (Om * Om - kap * kap)[:, None]
        dim = (-0.5 * G2 * kap)[:, None]
        u = k[None, :] ** 2 - (kap * kap)[:, None]
        zr = dre * u - g * g * (kap * kap)[:, None]
        zi = dim * u
        C = g * g * G2 * kap**5 / _EIGHT_PI2
        inner = C * ((cosk[None, :] / (zr * zr + zi * zi)).sum(axis=1)) * h_k
        acc += (inner * np.exp(-1j * kap * T - eps * kap)).sum()
    return 4.0 * acc * h_kappa


@njit
def _radial_trapezoid_numba(r_max, n):
    """Trapezoid sums of R31 R20 r^3, R20^2 r^2, R31^2 r^2 on [0, r_max] (a0 = 1)."""
    h = r_max / (n - 1)
    c20 = 1.0 / math.sqrt(2.0)
    c31 = 8.0 / (27.0 * math.sqrt(6.0))
    s_d = 0.0
    s_20 = 0.0
    s_31 = 0.0
    for i in range(n):
        r = i * h
        r20 = c20 * (1.0 - r / 2.0) * math.exp(-r / 2.0)
        r31 = c31 * r * (1.0 - r / 6.0) * math.exp(-r / 3.0)
        wt = 0.5 if (i == 0 or i == n - 1) else 1.0
        s_d += wt * r31 * r20 * r**3
        s_20 += wt * r20 * r20 * r * r
        s_31 += wt * r31 * r31 * r * r
    return s_d * h, s_20 * h, s_31 * h


def _radial_trapezoid_numpy(r_max, n):
    r = np.linspace(0.0, r_max, n)
    r20 = (1.0 / math.sqrt(2.0)) * (1.0 - r / 2.0) * np.exp(-r / 2.0)
    r31 = 8.0 / (27.0 * math.sqrt(6.0)) * r * (1.0 - r / 6.0) * np.exp(-r / 3.0)
    h = r[1] - r[0]
    wt = np.ones(n)
    wt[0] = wt[-1] = 0.5
    return (float((wt * r31 * r20 * r**3).sum() * h),
            float((wt * r20 * r20 * r * r).sum() * h),
            float((wt * r31 * r31 * r * r).sum() * h))


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    rate1d_exact = _rate1d_exact_numba
    rate1d_smallv = _rate1d_smallv_numba
    rate3d = _rate3d_numba
    correlator_inner = _correlator_inner_numba
    residue_real = _residue_real_numba
    residue_leg = _residue_leg_numba
    grid_sum = _grid_sum_numba
    radial_trapezoid = _radial_trapezoid_numba
else:
    rate1d_exact = _rate1d_exact_numpy
    rate1d_smallv = _rate1d_smallv_numpy
    rate3d = _rate3d_numpy
    correlator_inner = _correlator_inner_numpy
    residue_real = _residue_real_numpy
    residue_leg = _residue_leg_numpy
    grid_sum = _grid_sum_numpy
    radial_trapezoid = _radial_trapezoid_numpy

PAIRS = {
    "rate1d_exact": (_rate1d_exact_numba, _rate1d_exact_numpy),
    "rate1d_smallv": (_rate1d_smallv_numba, _rate1d_smallv_numpy),
    "rate3d": (_rate3d_numba, _rate3d_numpy),
    "correlator_inner": (_correlator_inner_numba, _correlator_inner_numpy),
    "residue_real": (_residue_real_numba, _residue_real_numpy),
    "residue_leg": (_residue_leg_numba, _residue_leg_numpy),
    "grid_sum": (_grid_sum_numba, _grid_sum_numpy),
    "radial_trapezoid": (_radial_trapezoid_numba, _radial_trapezoid_numpy),
}
