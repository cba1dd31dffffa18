"""Adaptive quadrature for peaked and oscillatory integrands.

The workhorse is a globally adaptive, vectorized Gauss-Kronrod (7/15) rule.
Integrands receive a 1D array of nodes and return values of shape ``(n,)``
or ``(n, m)`` (real or complex), so a whole batch of panels is evaluated per
call.  Peak hints ``(location, width)`` force panel boundaries around narrow
Lorentzians that a coarse initial mesh would never see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

# QUADPACK qk15 abscissae/weights, non-negative half
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point stencil on [-1, 1]
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G_WEIGHTS = np.zeros(15)
G_WEIGHTS[1:7:2] = _WG[:3]
G_WEIGHTS[7] = _WG[3]
G_WEIGHTS[9:15:2] = _WG[2::-1]

_EPMACH = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny

PEAK_OFFSETS = (1.0, 3.0, 10.0, 30.0, 100.0)


class NonConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    """Numerical-integration settings shared by every integral in the package.

    ``epsilon_regulator`` is the largest i*epsilon time shift (in 1/eV) used
    by oscillatory integrals; 0 selects the per-operation default.
    ``tail_cutoff_factor`` replaces the semi-infinite map by a hard cutoff at
    ``factor * scale``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-300
    max_subdivisions: int = 20000
    peak_hints: tuple = ()
    epsilon_regulator: float = 0.0
    tail_cutoff_factor: float | None = None
    richardson: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.epsilon_regulator < 0:
            raise ValueError("epsilon_regulator must be >= 0")
        if self.tail_cutoff_factor is not None and not self.tail_cutoff_factor > 0:
            raise ValueError("tail_cutoff_factor must be > 0")
        object.__setattr__(self, "peak_hints", tuple(tuple(map(float, h)) for h in self.peak_hints))

    def with_hints(self, *hints) -> "QuadratureConfig":
        return replace(self, peak_hints=self.peak_hints + tuple(hints))


class QuadResult(NamedTuple):
    value: float | complex | np.ndarray
    error: float
    converged: bool
    neval: int


def _as_components(vals: np.ndarray) -> np.ndarray:
    """(P, 15[, m]) possibly complex -> real (P, 15, c)."""
    if vals.ndim == 2:
        vals = vals[:, :, None]
    if np.iscomplexobj(vals):
        vals = np.concatenate([vals.real, vals.imag], axis=2)
    return vals


def gk15_panels(f: Callable, a: np.ndarray, b: np.ndarray):
    """Apply the 15-point Kronrod rule on every panel [a_i, b_i].

    Returns (integral per panel, error estimate per panel, raw |f| mass).
    """
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center[:, None] + half[:, None] * GK_NODES[None, :]
    fx = np.asarray(f(x.ravel()))
    vals = fx.reshape((a.size, 15) + fx.shape[1:])
    w = GK_WEIGHTS.reshape((1, 15) + (1,) * (vals.ndim - 2))
    wg = G_WEIGHTS.reshape(w.shape)
    hs = half.reshape((-1,) + (1,) * (vals.ndim - 2))
    resk = (vals * w).sum(axis=1) * hs

    comp = _as_components(vals)
    hk = half[:, None]
    rk = (comp * GK_WEIGHTS[None, :, None]).sum(axis=1)
    rg = (comp * G_WEIGHTS[None, :, None]).sum(axis=1)
    resabs = (np.abs(comp) * GK_WEIGHTS[None, :, None]).sum(axis=1) * np.abs(hk)
    mean = rk * 0.5
    resasc = (np.abs(comp - mean[:, None, :]) * GK_WEIGHTS[None, :, None]).sum(axis=1) * np.abs(hk)
    err = np.abs((rk - rg) * hk)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPMACH * resabs
    err = np.where(resabs > _UFLOW / (50 * _EPMACH), np.maximum(floor, err), err)
    return resk, err.max(axis=1), resabs.max(axis=1)


def integrate_panels(f: Callable, breakpoints: Sequence[float], cfg: QuadratureConfig) -> QuadResult:
    """Globally adaptive integration over consecutive panels of ``breakpoints``."""
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    if pts.size < 2:
        return QuadResult(0.0, 0.0, True, 0)
    a, b = pts[:-1], pts[1:]
    vals, errs, _ = gk15_panels(f, a, b)
    neval = 15 * a.size
    nsplit = 0
    frozen = np.zeros(a.size, dtype=bool)
    converged = False
    while True:
        total = vals.sum(axis=0)
        err = float(errs.sum())
        tol = max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(total))))
        if err <= tol:
            converged = True
            break
        live = ~frozen
        if nsplit >= cfg.max_subdivisions or not live.any():
            break
        sel = live & (errs > tol / errs.size)
        if not sel.any():
            sel = np.zeros_like(live)
            sel[np.argmax(np.where(live, errs, -1.0))] = True
        idx = np.flatnonzero(sel)
        # largest errors first when the budget runs short
        budget = cfg.max_subdivisions - nsplit
        if idx.size > budget:
            idx = idx[np.argsort(-errs[idx], kind="stable")[:budget]]
            idx.sort()
        mid = 0.5 * (a[idx] + b[idx])
        tiny = (b[idx] - a[idx]) <= 64 * _EPMACH * np.maximum(np.abs(a[idx]), np.abs(b[idx]))
        if tiny.any():
            frozen[idx[tiny]] = True
            idx, mid = idx[~tiny], mid[~tiny]
            if idx.size == 0:
                continue
        na = np.concatenate([a[idx], mid])
        nb = np.concatenate([mid, b[idx]])
        nv, ne, _ = gk15_panels(f, na, nb)
        neval += 15 * na.size
        nsplit += idx.size
        keep = np.ones(a.size, dtype=bool)
        keep[idx] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        frozen = np.concatenate([frozen[keep], np.zeros(na.size, dtype=bool)])
        order = np.argsort(a, kind="stable")
        a, b, vals, errs, frozen = a[order], b[order], vals[order], errs[order], frozen[order]
    total = vals.sum(axis=0)
    value = total.item() if np.ndim(total) == 0 else total
    return QuadResult(value, float(errs.sum()), converged, neval)


def peak_breakpoints(hints, lo: float = -np.inf, hi: float = np.inf) -> list[float]:
    """Panel boundaries at loc and loc +/- {1,3,10,30,100} * width, clipped to (lo, hi)."""
    out = []
    for loc, width in hints:
        out.append(loc)
        if width > 0:
            for c in PEAK_OFFSETS:
                out.extend((loc - c * width, loc + c * width))
    return [p for p in out if lo < p < hi and math.isfinite(p)]


def integrate_interval(f: Callable, a: float, b: float, cfg: QuadratureConfig, extra_points=()) -> QuadResult:
    pts = [a, b, *peak_breakpoints(cfg.peak_hints, a, b), *[p for p in extra_points if a < p < b]]
    return integrate_panels(f, pts, cfg)


def integrate_semi_infinite(f: Callable, cfg: QuadratureConfig, scale: float | None = None,
                            extra_points=()) -> QuadResult:
    """Integrate f over [0, inf).

    Without ``cfg.tail_cutoff_factor`` the half-line is mapped onto [0, 1) by
    x = s t / (1 - t), where the scale s defaults to the largest peak-hint
    location (or 1).  Peak hints are split in the original variable and then
    mapped, so narrow features keep their own panels.
    """
    if scale is None:
        locs = [h[0] + 10 * h[1] for h in cfg.peak_hints if h[0] > 0]
        scale = max(locs) if locs else 1.0
    pts_x = [p for p in (*peak_breakpoints(cfg.peak_hints, 0.0, np.inf), *extra_points) if p > 0]
    if cfg.tail_cutoff_factor is not None:
        upper = cfg.tail_cutoff_factor * scale
        return integrate_panels(f, [0.0, upper, *[p for p in pts_x if p < upper]], cfg)

    s = float(scale)

    def mapped(t):
        one_m = 1.0 - t
        x = s * t / one_m
        jac = s / one_m**2
        fx = np.asarray(f(x))
        return fx * (jac if fx.ndim == 1 else jac[:, None])

    pts_t = [0.0, 1.0, *[p / (s + p) for p in pts_x]]
    # a couple of default splits so the tail is not one panel
    pts_t += [0.5, 0.9, 0.99]
    return integrate_panels(mapped, pts_t, cfg)


@dataclass
class OscillatoryResult:
    value: complex
    error: float
    epsilon_used: float
    converged: bool
    per_epsilon: list = field(default_factory=list)


def richardson(values: Sequence[complex]) -> tuple[complex, float]:
    """Extrapolate W(eps), W(eps/2), W(eps/4) to eps -> 0.

    Removes the O(eps) and O(eps^2) terms; the returned error is the change
    introduced by the last elimination step.
    """
    if len(values) == 1:
        return values[0], float("nan")
    if len(values) == 2:
        w1, w2 = values
        return 2 * w2 - w1, abs(w2 - w1)
    w1, w2, w3 = values[:3]
    a1, a2 = 2 * w2 - w1, 2 * w3 - w2
    r = (4 * a2 - a1) / 3
    return r, abs(r - a2)


def epsilon_sequence(eps0: float, richardson_on: bool) -> list[float]:
    return [eps0, eps0 / 2, eps0 / 4] if richardson_on else [eps0]


def integrate_oscillatory_2d(amplitude: Callable | None, dt: float, dx: float, cfg: QuadratureConfig, *,
                             epsilon: float | None = None, inner: Callable | None = None,
                             k_hints: Callable | None = None, kappa_hints=(),
                             even_kappa: bool = False, kappa_step: float | None = None,
                             decay_margin: float = 40.0,
                             analytic_radius: float | None = None) -> OscillatoryResult:
    """Regulated double integral of amplitude(k, kappa) exp(i k dx - i |kappa| dt).

    The time argument is shifted to dt - i*eps, which damps the large-|kappa|
    tail by exp(-eps |kappa|).  With ``cfg.richardson`` the integral is done
    at eps, eps/2, eps/4 on a shared kappa mesh and extrapolated to eps -> 0.

    ``inner(kappa_nodes)`` may replace the generic k-quadrature; it must
    return the k-integral including the exp(i k dx) factor for every node.
    ``k_hints(kappa)`` returns peak hints in k for the generic inner route.
    ``even_kappa`` folds kappa in (-inf, 0] onto [0, inf).

    ``analytic_radius`` is the distance from dt to the nearest singularity of
    the result in the complex time plane.  When given, the extrapolation error
    is scaled from the O(eps^2) difference down to the O(eps^3) remainder the
    extrapolated value actually carries.
    """
    eps0 = cfg.epsilon_regulator if epsilon is None else epsilon
    if eps0 < 0:
        raise ValueError("epsilon must be >= 0")
    eps_list = epsilon_sequence(eps0, cfg.richardson and eps0 > 0)

    if inner is None:
        if amplitude is None:
            raise ValueError("need either amplitude or inner")
        inner = _generic_inner(amplitude, dx, cfg, k_hints)

    eps_arr = np.asarray(eps_list)

    def outer(kappa, sign):
        kap = sign * kappa
        inn = np.asarray(inner(kap), dtype=complex)
        phase = np.exp(-1j * np.abs(kap)[:, None] * dt - np.abs(kap)[:, None] * eps_arr[None, :])
        return inn[:, None] * phase

    signs = (1.0,) if even_kappa else (1.0, -1.0)
    total = np.zeros(len(eps_list), dtype=complex)
    err = 0.0
    ok = True
    for sign in signs:
        fn = (lambda x, s=sign: outer(x, s))
        hints = [(abs(loc), w) for loc, w in kappa_hints]
        if eps0 > 0:
            upper = decay_margin / min(eps_list)
            pts = [0.0, upper, *peak_breakpoints(hints, 0.0, upper)]
            if kappa_step:
                pts.extend(np.arange(kappa_step, upper, kappa_step))
            res = integrate_panels(fn, pts, cfg)
        else:
            res = integrate_semi_infinite(fn, replace(cfg, peak_hints=tuple(hints)))
        total += np.atleast_1d(res.value)
        err += res.error
        ok &= res.converged
    if even_kappa:
        total *= 2.0
        err *= 2.0
    per_eps = list(zip(eps_list, total.tolist()))
    if len(eps_list) == 1:
        return OscillatoryResult(complex(total[0]), err, eps_list[0], ok, per_eps)
    value, extrap_err = richardson(list(total))
    if analytic_radius:
        extrap_err *= min(1.0, 4.0 * eps0 / analytic_radius)
    tol = max(cfg.abs_tol, 1e3 * cfg.rel_tol * abs(value))
    return OscillatoryResult(complex(value), err + extrap_err, eps_list[-1],
                             ok and extrap_err <= tol, per_eps)


def _generic_inner(amplitude, dx, cfg, k_hints):
    inner_cfg = replace(cfg, peak_hints=())

    def inner(kappa_nodes):
        out = np.empty(kappa_nodes.size, dtype=complex)
        for i, kap in enumerate(kappa_nodes):
            hints = tuple(k_hints(kap)) if k_hints else ()
            c = replace(inner_cfg, peak_hints=tuple((abs(l), w) for l, w in hints))

            def f(k, kap=kap):
                return (np.asarray(amplitude(k, kap)) * np.exp(1j * k * dx)
                        + np.asarray(amplitude(-k, kap)) * np.exp(-1j * k * dx))

            out[i] = integrate_semi_infinite(f, c).value
        return out

    return inner
