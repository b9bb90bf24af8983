"""Cauchy transform of a density and everything derived from it: Poisson and
conjugate Poisson integrals, the principal-value Hilbert transform and its
derivative, one-sided means, and a Dini-type convergence probe.

Infinite or undefined results come back as `ExtReal` tags so they never leak
into floating-point arithmetic by accident.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._atoms import Indeterminate, PolyAtom, QuadratureFailure
from .density import DensitySpec, Tabulated

__all__ = [
    "ExtReal",
    "HalfPlanePoint",
    "Indeterminate",
    "MeanProfile",
    "QuadratureFailure",
    "cauchy",
    "conjugate",
    "dini_check",
    "hilbert",
    "hilbert_prime",
    "inverse_square",
    "mean_profile",
    "poisson",
]


@dataclass(frozen=True)
class HalfPlanePoint:
    u: float
    v: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"need v > 0, got {self.v}")

    @property
    def w(self) -> complex:
        return complex(self.u, self.v)


@dataclass(frozen=True)
class ExtReal:
    """A real number or one of the tags '+inf', '-inf', 'undefined'."""

    value: float = 0.0
    tag: str = "finite"

    @property
    def finite(self) -> bool:
        return self.tag == "finite"

    def __float__(self) -> float:
        if not self.finite:
            raise ValueError(f"{self.tag} has no float value")
        return self.value

    def __str__(self) -> str:
        return repr(self.value) if self.finite else self.tag

    def to_json(self):
        return self.value if self.finite else self.tag


POS_INF = ExtReal(0.0, "+inf")
NEG_INF = ExtReal(0.0, "-inf")
UNDEFINED = ExtReal(0.0, "undefined")


# ---------------------------------------------------------------------------
# Cauchy, Poisson, conjugate


def cauchy(spec: DensitySpec, w, deriv: int = 0):
    """C(w) = int f(t)/(w - t) dt (or its first/second w-derivative)."""
    w_arr = np.asarray(w, dtype=complex)
    if np.any(w_arr.imag == 0):
        raise ValueError("cauchy needs Im w != 0")
    out = spec.cauchy(w_arr, deriv)
    return complex(out) if out.ndim == 0 else out


def _uv(p, v):
    if v is None:
        return p.u, p.v
    return p, v


def poisson(spec: DensitySpec, p, v=None):
    """P_v f(u) = -Im C(u + iv)/pi; takes a HalfPlanePoint or arrays (u, v)."""
    u, v = _uv(p, v)
    return -np.imag(cauchy(spec, np.asarray(u) + 1j * np.asarray(v))) / math.pi


def conjugate(spec: DensitySpec, p, v=None):
    """H_v f(u) = Re C(u + iv)/pi."""
    u, v = _uv(p, v)
    return np.real(cauchy(spec, np.asarray(u) + 1j * np.asarray(v))) / math.pi


# ---------------------------------------------------------------------------
# boundary values on the real line


def _pv_sum(spec: DensitySpec, x: float, atoms=None):
    atoms = spec.atoms if atoms is None else atoms
    fin = 0.0
    div = 0.0  # coefficient of log|eps| as the window closes on x
    for at in atoms:
        f, ca, cb = at.hilbert_pv(x)
        fin += f
        div += ca - cb
    return fin, div


def hilbert(spec: DensitySpec, x: float) -> ExtReal:
    """Principal value (1/pi) p.v. int f(t)/(x - t) dt.

    A net density jump at x makes the p.v. diverge logarithmically; the sign
    of the jump decides which infinity is returned."""
    fin, div = _pv_sum(spec, x)
    if abs(div) > 1e-12:
        return NEG_INF if div > 0 else POS_INF
    return ExtReal(fin / math.pi)


def _complement_atoms(spec: DensitySpec):
    """Atoms of 1 - f restricted to the declared pieces, plus the unit gaps
    between them; the two unbounded rays are handled by the caller."""
    out = []
    prev = None
    for at in spec.atoms:
        if prev is not None and at.a > prev:
            out.append(PolyAtom(prev, at.a, (1.0,)))
        if isinstance(at, PolyAtom):
            c = list(at.coeffs)
            out.append(PolyAtom(at.a, at.b, [1.0 - c[0]] + [-v for v in c[1:]]))
        else:
            out.append(at.complement())
        prev = at.b
    return out


def inverse_square(spec: DensitySpec, x: float, complement: bool = False) -> float:
    """int f(t)/(x - t)^2 dt, or the same for 1 - f; math.inf when divergent."""
    if not complement:
        return float(sum(at.inverse_square(x) for at in spec.atoms))
    lo, hi = spec.atoms[0].a, spec.atoms[-1].b
    if not lo < x < hi:
        return math.inf
    total = 1.0 / (x - lo) + 1.0 / (hi - x)
    for at in _complement_atoms(spec):
        total += at.inverse_square(x)
    return float(total)


def hilbert_prime(spec: DensitySpec, x: float, complement: bool = False) -> ExtReal:
    """(Hf)'(x) = -(1/pi) int f(t)/(x - t)^2 dt when the integral converges.

    A divergent integral is reported as the '-inf' tag (the integrand is
    positive, so the derivative runs off to minus infinity)."""
    val = inverse_square(spec, x, complement)
    if math.isinf(val):
        return NEG_INF
    return ExtReal(-val / math.pi)


# ---------------------------------------------------------------------------
# one-sided means


def mean_integral(spec: DensitySpec, lo: float, hi: float) -> float:
    return float(sum(at.mass(lo, hi) for at in spec.atoms if at.b > lo and at.a < hi))


def mean_right(spec, x, h):
    return mean_integral(spec, x, x + h) / h


def mean_left(spec, x, h):
    return mean_integral(spec, x - h, x) / h


def delta_mean(spec, x, h):
    return (mean_integral(spec, x, x + h) - mean_integral(spec, x - h, x)) / h


@dataclass(frozen=True)
class MeanProfile:
    x: float
    h_grid: tuple[float, ...]
    mr: tuple[float, ...]
    ml: tuple[float, ...]
    dm: tuple[float, ...]
    fr_plus: float
    fr_minus: float
    fl_plus: float
    fl_minus: float
    c_x: float
    b_x: float
    dm_sup: float
    m_f_delta: float
    m_1mf_delta: float


def mean_profile(spec: DensitySpec, x: float, h_min: float = 1e-8, h_max: float = 1.0, n_h: int = 49) -> MeanProfile:
    """Right/left means on a geometric h-grid, with limsup/liminf estimated as
    max/min over the smallest decade of the grid."""
    if not 0 < h_min < h_max or n_h < 8:
        raise ValueError("need 0 < h_min < h_max and n_h >= 8")
    hs = np.geomspace(h_max, h_min, n_h)
    mr = np.array([mean_right(spec, x, h) for h in hs])
    ml = np.array([mean_left(spec, x, h) for h in hs])
    dm = mr - ml
    small = hs <= 10 * h_min * (1 + 1e-12)
    fr_p, fr_m = float(mr[small].max()), float(mr[small].min())
    fl_p, fl_m = float(ml[small].max()), float(ml[small].min())
    c_x = max(abs(fr_p - fl_m), abs(fl_p - fr_m))
    b_x = 0.25 * min(2 - fr_p - fl_p, fr_m + fl_m)
    mid = 0.5 * (mr + ml)
    return MeanProfile(
        x=float(x),
        h_grid=tuple(float(h) for h in hs),
        mr=tuple(float(v) for v in mr),
        ml=tuple(float(v) for v in ml),
        dm=tuple(float(v) for v in dm),
        fr_plus=fr_p,
        fr_minus=fr_m,
        fl_plus=fl_p,
        fl_minus=fl_m,
        c_x=float(c_x),
        b_x=float(b_x),
        dm_sup=float(np.abs(dm).max()),
        m_f_delta=float(mid.max()),
        m_1mf_delta=float((1 - mid).max()),
    )


# ---------------------------------------------------------------------------
# Dini-type condition


def _table_spacing(spec: DensitySpec, x: float, r: float) -> float:
    """Finest node spacing of tabulated data within r of x (inf if none)."""
    best = math.inf
    for p in spec.pieces:
        if isinstance(p.kind, Tabulated) and p.a <= x + r and p.b >= x - r:
            ts = np.array([t for t, _ in p.kind.nodes])
            best = min(best, float(np.diff(ts).min()))
    return best


def _shell(spec: DensitySpec, x: float, fx: float, r0: float, r1: float) -> float:
    xg, wg = np.polynomial.legendre.leggauss(32)
    total = 0.0
    for lo, hi in ((x + r0, x + r1), (x - r1, x - r0)):
        for at in spec.atoms:
            a, b = max(lo, at.a), min(hi, at.b)
            if b <= a:
                continue
            if isinstance(at, PolyAtom):
                t = 0.5 * (b - a) * xg + 0.5 * (a + b)
                total += 0.5 * (b - a) * float(np.sum(wg * np.abs(fx - at.values(t)) / np.abs(x - t)))
            else:
                g = lambda t, f: np.abs(fx - f) / np.abs(x - t)
                total += float(np.real(at.integrate(g, a, b, tol=1e-3, pole=x)))
    return total


def dini_check(spec: DensitySpec, x: float, budget: int = 40) -> str:
    """Classify int |f(x) - f(t)|/|x - t| dt near x as 'Satisfied',
    'Violated' or 'Indeterminate' from dyadic shell contributions S_k.

    Geometric decay of S_k means convergence.  S_k decaying no faster than
    1/k makes the partial sums grow at least like log k, which we call
    divergence.  Tabulated data that the shells never resolve stays
    undecided."""
    fx = spec(x)
    if not math.isfinite(fx):
        return "Indeterminate"
    S = np.array([_shell(spec, x, fx, 2.0 ** -(k + 1), 2.0**-k) for k in range(budget)])
    m = max(4, budget // 2)
    ks = np.arange(budget - m, budget)
    tail = S[-m:]
    # shells under the rounding floor only happen after genuine decay
    floor = 1e-12 * max(1.0, S[0])
    live = tail > floor
    if not live.any():
        return "Satisfied"
    if not live[-1] and np.all(np.diff(tail[live]) < 0):
        return "Satisfied"
    if np.all(live):
        slope = np.polyfit(ks, np.log(tail), 1)[0]
        if slope < math.log(0.8) and np.all(np.diff(tail) < 0):
            return "Satisfied"
    if _table_spacing(spec, x, 1.0) < 2.0 ** -budget:
        return "Indeterminate"
    if np.all(tail > 0):
        kS = (ks + 1) * tail
        if kS.min() >= 0.5 * kS.max():
            return "Violated"
    return "Indeterminate"
