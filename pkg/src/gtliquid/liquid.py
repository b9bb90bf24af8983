"""The liquid-region chart: the explicit map from the upper half-plane onto
the liquid region, its inverse by root finding, the complex slope, and the
local Beta kernel.

Conventions.  For w = u + iv in the upper half-plane write C = C(w),
P = -Im C/pi and H = Re C/pi.  The point w lands at

    chi = u + v (exp(-pi H) - cos(pi P)) / sin(pi P)
    eta = 1 - v (exp(pi H) + exp(-pi H) - 2 cos(pi P)) / sin(pi P)

and the complex slope there is Omega = exp(-C) = (w - chi)/(w - chi - eta + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import DensitySpec
from .transforms import HalfPlanePoint, cauchy

__all__ = [
    "LiquidSample",
    "NoConvergence",
    "NotInLiquidRegion",
    "PathDegenerate",
    "beta_kernel",
    "burgers_residual",
    "critical",
    "forward_map",
    "infinity_point",
    "inverse_map",
    "inverse_map_arrays",
    "root_count",
]


class NotInLiquidRegion(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


class PathDegenerate(ValueError):
    pass


@dataclass(frozen=True)
class LiquidSample:
    w: HalfPlanePoint
    chi: float
    eta: float
    omega: complex
    rho: float
    fprime_residual: float


def critical(spec: DensitySpec, chi: float, eta: float, w, C=None):
    """f'_{(chi, eta)}(w) = C(w) - log(w - chi - eta + 1) + log(w - chi),
    evaluated term by term with principal logarithms."""
    w = np.asarray(w, dtype=complex)
    if C is None:
        C = cauchy(spec, w)
    return C - np.log(w - chi - eta + 1) + np.log(w - chi)


def _critical_prime(spec, chi, eta, w):
    return cauchy(spec, w, 1) - 1.0 / (w - chi - eta + 1) + 1.0 / (w - chi)


def inverse_map_arrays(spec: DensitySpec, u, v) -> dict:
    """Vectorised chart evaluation; returns arrays keyed like LiquidSample."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = u + 1j * v
    C = np.asarray(cauchy(spec, w))
    P = -C.imag / math.pi
    H = C.real / math.pi
    s, c = np.sin(math.pi * P), np.cos(math.pi * P)
    ep, em = np.exp(math.pi * H), np.exp(-math.pi * H)
    # P underflows to 0 far below the real axis resolution; the result is then
    # non-finite and callers (forward_map's guard) treat it as a miss
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = u + v * (em - c) / s
        eta = 1 - v * (ep + em - 2 * c) / s
        res = np.abs(critical(spec, chi, eta, w, C))
    return {"chi": chi, "eta": eta, "omega": np.exp(-C), "rho": P, "residual": res}


def inverse_map(spec: DensitySpec, p: HalfPlanePoint) -> LiquidSample:
    d = inverse_map_arrays(spec, p.u, p.v)
    return LiquidSample(
        w=p,
        chi=float(d["chi"]),
        eta=float(d["eta"]),
        omega=complex(d["omega"]),
        rho=float(d["rho"]),
        fprime_residual=float(d["residual"]),
    )


def infinity_point(spec: DensitySpec) -> tuple[float, float]:
    """Where the chart sends w -> infinity: (1/2 + first moment, 0)."""
    return (0.5 + spec.first_moment, 0.0)


# ---------------------------------------------------------------------------
# forward map


_SEED_CACHE: dict = {}


def _seed_table(spec: DensitySpec):
    key = spec
    if key not in _SEED_CACHE:
        a, b = spec.hull
        span = b - a
        u = np.concatenate([np.linspace(a - span, b + span, 90), a + (b - a) / 2 + span * np.geomspace(2, 200, 12), a + (b - a) / 2 - span * np.geomspace(2, 200, 12)])
        v = span * np.geomspace(1e-5, 100, 60)
        U, V = np.meshgrid(u, v)
        d = inverse_map_arrays(spec, U.ravel(), V.ravel())
        ok = np.isfinite(d["chi"]) & np.isfinite(d["eta"])
        _SEED_CACHE[key] = (U.ravel()[ok] + 1j * V.ravel()[ok], d["chi"][ok], d["eta"][ok])
    return _SEED_CACHE[key]


def _newton(spec, chi, eta, w0, tol, maxit=80):
    w = complex(w0)
    F = complex(critical(spec, chi, eta, w))
    for _ in range(maxit):
        if abs(F) < tol:
            return w
        step = F / complex(_critical_prime(spec, chi, eta, w))
        lam = 1.0
        while True:
            wn = w - lam * step
            if wn.imag > 0:
                Fn = complex(critical(spec, chi, eta, wn))
                if np.isfinite(Fn) and abs(Fn) < abs(F):
                    break
            lam *= 0.5
            if lam < 1e-10:
                return None
        w, F = wn, Fn
    return w if abs(F) < tol else None


def _edge_points(box, n, focus=None):
    u0, u1, v0, v1 = box
    # bottom (left to right), right (up), top (right to left), left (down)
    us = np.linspace(u0, u1, n)
    if focus is not None:
        # real roots of f' in frozen stretches sit just under the bottom edge,
        # and a close pair of them turns the phase by a full 2 pi between
        # coarse samples; sample the stretch carrying the density finely
        fa, fb = max(u0, focus[0]), min(u1, focus[1])
        if fb > fa:
            us = np.union1d(us, np.linspace(fa, fb, 40 * n))
    vs = np.geomspace(v0, v1, n)
    pts = [us + 1j * v0, u1 + 1j * vs, us[::-1] + 1j * v1, u0 + 1j * vs[::-1]]
    return np.concatenate(pts)


def root_count(spec: DensitySpec, chi: float, eta: float, box, n: int = 400, max_pts: int = 200000) -> int:
    """Zeros of f'_{(chi, eta)} inside box = (u0, u1, v0, v1) by the argument
    principle, refining the boundary until every phase step is below pi/4."""
    a, b = spec.hull
    span = b - a
    z = _edge_points(box, n, (min(a, chi + eta - 1) - 0.5 * span, max(b, chi) + 0.5 * span))
    z = np.append(z, z[0])
    F = critical(spec, chi, eta, z)
    for _ in range(80):
        dphi = np.angle(F[1:] / F[:-1])
        bad = np.abs(dphi) > math.pi / 4
        if not bad.any():
            # a segment can hide a whole turn between two samples with
            # matching phase; probe every midpoint once before trusting it
            zm = 0.5 * (z[:-1] + z[1:])
            Fm = critical(spec, chi, eta, zm)
            halves = np.angle(Fm / F[:-1]) + np.angle(F[1:] / Fm)
            bad = (np.abs(halves - dphi) > 1e-6) | (np.abs(halves) > math.pi / 4)
            if not bad.any():
                return int(round(dphi.sum() / (2 * math.pi)))
            mids, Fmid = zm[bad], Fm[bad]
        else:
            mids = 0.5 * (z[:-1][bad] + z[1:][bad])
            Fmid = critical(spec, chi, eta, mids)
        if len(z) > max_pts:
            break
        idx = np.flatnonzero(bad) + 1
        z = np.insert(z, idx, mids)
        F = np.insert(F, idx, Fmid)
    raise NoConvergence("argument principle did not resolve the phase")


def _search_box(spec):
    a, b = spec.hull
    span = b - a
    return (a - 50 * span, b + 50 * span, 1e-7 * span, 100 * span)


def _locate(spec, chi, eta, box, tol, depth=0):
    cnt = root_count(spec, chi, eta, box)
    if cnt == 0:
        return None
    if cnt != 1:
        raise NoConvergence(f"{cnt} roots found in search box")
    u0, u1, v0, v1 = box
    w = _newton(spec, chi, eta, complex(0.5 * (u0 + u1), math.sqrt(v0 * v1)), tol)
    if w is not None and u0 <= w.real <= u1 and v0 <= w.imag <= v1:
        return w
    if depth > 60:
        raise NoConvergence("bisection did not isolate the root")
    # split the longer side (v measured logarithmically)
    if (u1 - u0) > math.log(v1 / v0) * math.sqrt(v0 * v1):
        um = 0.5 * (u0 + u1)
        halves = [(u0, um, v0, v1), (um, u1, v0, v1)]
    else:
        vm = math.sqrt(v0 * v1)
        halves = [(u0, u1, v0, vm), (u0, u1, vm, v1)]
    for hb in halves:
        if root_count(spec, chi, eta, hb) == 1:
            return _locate(spec, chi, eta, hb, tol, depth + 1)
    raise NoConvergence("root lost while bisecting")


def _round_trip(spec, chi, eta, w, rtol=1e-7) -> bool:
    """Guards against Newton settling where |f'| is merely tiny (far out, or
    pinned to the real axis): the chart must send w back to (chi, eta)."""
    a, b = spec.hull
    d = inverse_map_arrays(spec, w.real, w.imag)
    err = abs(float(d["chi"]) - chi) + abs(float(d["eta"]) - eta)
    return bool(np.isfinite(err) and err <= rtol * max(1.0, b - a))


def forward_map(spec: DensitySpec, chi: float, eta: float, tol: float = 1e-12, seed: complex | None = None) -> HalfPlanePoint:
    """The unique w in the upper half-plane with f'_{(chi, eta)}(w) = 0."""
    if not 0 < eta < 1 + 1e-15:
        raise NotInLiquidRegion(f"eta={eta} outside (0, 1]")
    seeds = [] if seed is None else [complex(seed)]
    W, X, Y = _seed_table(spec)
    near = np.argsort((X - chi) ** 2 + (Y - eta) ** 2)[:4]
    seeds.extend(W[near])
    for s in seeds:
        w = _newton(spec, chi, eta, s, tol)
        if w is not None and _round_trip(spec, chi, eta, w):
            return HalfPlanePoint(w.real, w.imag)
    w = _locate(spec, chi, eta, _search_box(spec), tol)
    if w is None or not _round_trip(spec, chi, eta, w):
        raise NotInLiquidRegion(f"no root in the upper half-plane for ({chi}, {eta})")
    return HalfPlanePoint(w.real, w.imag)


# ---------------------------------------------------------------------------
# Burgers equation


def burgers_residual(spec: DensitySpec, p: HalfPlanePoint, h: float) -> float:
    """|Omega d_chi Omega + (1 - Omega) d_eta Omega| by central differences of
    Omega o forward_map around the image of p."""
    s = inverse_map(spec, p)

    def om(c, e):
        w = forward_map(spec, c, e, tol=1e-14, seed=p.w)
        return complex(np.exp(-cauchy(spec, w.w)))

    d_chi = (om(s.chi + h, s.eta) - om(s.chi - h, s.eta)) / (2 * h)
    d_eta = (om(s.chi, s.eta + h) - om(s.chi, s.eta - h)) / (2 * h)
    return abs(s.omega * d_chi + (1 - s.omega) * d_eta)


# ---------------------------------------------------------------------------
# Beta kernel


def _arc(omega: complex, cross: float):
    """Circle through conj(omega), cross, omega: returns (centre, radius,
    theta_start, theta_end) with the arc running from conj(omega) to omega
    through the real point `cross`."""
    x, y = omega.real, omega.imag
    if abs(x - cross) < 1e-14 * max(1.0, abs(x)):
        return None
    c0 = (x * x + y * y - cross * cross) / (2 * (x - cross))
    r = abs(cross - c0)
    th = math.atan2(y, x - c0)
    if cross > c0:
        return c0, r, -th, th
    return c0, r, -th, th - 2 * math.pi


def beta_kernel(omega: complex, m: int, l: int, tol: float = 1e-12) -> complex:
    """(1/2 pi i) int_{conj(omega)}^{omega} (1 - z)^m z^(-l-1) dz, with the
    path crossing (0, 1) for m >= 0 and (-inf, 0) for m < 0."""
    omega = complex(omega)
    if abs(omega.imag) <= tol:
        raise PathDegenerate("omega is (numerically) real")
    if m == 0 and l == 0 and omega.imag > 0:
        return complex(math.atan2(omega.imag, omega.real) / math.pi)
    cross = 0.5 if m >= 0 else -1.0 - abs(omega)
    arc = _arc(omega, cross)

    def integrand(z):
        return (1 - z) ** m * z ** (-l - 1)

    def gl(npts, pieces):
        x, wts = np.polynomial.legendre.leggauss(npts)
        total = 0j
        if arc is None:
            edges = np.linspace(-omega.imag, omega.imag, pieces + 1)
            for a, b in zip(edges[:-1], edges[1:]):
                s = 0.5 * (b - a) * x + 0.5 * (a + b)
                z = omega.real + 1j * s
                total += 0.5 * (b - a) * np.sum(wts * integrand(z) * 1j)
            return total
        c0, r, t0, t1 = arc
        edges = np.linspace(t0, t1, pieces + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            th = 0.5 * (b - a) * x + 0.5 * (a + b)
            z = c0 + r * np.exp(1j * th)
            total += 0.5 * (b - a) * np.sum(wts * integrand(z) * 1j * r * np.exp(1j * th))
        return total

    pieces = 1
    prev = gl(64, pieces)
    for _ in range(8):
        pieces *= 2
        cur = gl(64, pieces)
        if abs(cur - prev) <= 1e-13 * max(1.0, abs(cur)):
            break
        prev = cur
    return complex(cur / (2j * math.pi))
