"""Boundary of the liquid region: the edge over the open set R, point
classification on the non-trivial support, singular segments with the
tangential paths that reach them, and the assembled boundary atlas."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._atoms import Indeterminate as _QuadIndeterminate
from ._atoms import NamedAtom, PolyAtom, QuadratureFailure, cauchy_sum
from .density import DensitySpec, Polynomial, SupportAtlas, support_atlas
from .liquid import infinity_point, inverse_map
from .transforms import (
    HalfPlanePoint,
    _pv_sum,
    hilbert,
    inverse_square,
    mean_profile,
)

__all__ = [
    "BoundaryAtlas",
    "ConvexityUndeclared",
    "EdgePoint",
    "Generic",
    "IndeterminatePoint",
    "MissingConstants",
    "NoSolution",
    "NotInR",
    "OutsideDomain",
    "RegularCriteria",
    "RegularLebesgue",
    "RegularVanishing",
    "SingularI",
    "SingularII",
    "SingularIII",
    "SingularIV",
    "SingularSegment",
    "TangentialPath",
    "assemble",
    "classify",
    "convex_path",
    "edge_curve",
    "edge_point",
    "singular_segment",
    "tangential_path",
]


class NotInR(ValueError):
    pass


class OutsideDomain(ValueError):
    pass


class MissingConstants(ValueError):
    pass


class NoSolution(ValueError):
    pass


class ConvexityUndeclared(ValueError):
    pass


R_PARTS = ("R_mu", "R_lambda_mu", "R_0", "R_1", "R_2")


# ---------------------------------------------------------------------------
# edge


def _atoms_without(spec: DensitySpec, lo: float, hi: float):
    return [at for at in spec.atoms if not (at.a >= lo and at.b <= hi)]


def _real_cauchy(atoms, t: float, deriv: int = 0) -> float:
    return float(np.real(cauchy_sum(atoms, complex(t), deriv)))


def edge_point(spec: DensitySpec, atlas: SupportAtlas, t: float):
    """(chi, eta, omega) on the edge over t in R; omega is 0.0 on R_1 and
    math.inf on R_2.

    Every branch comes from the boundary value Omega = exp(-C(t + i0)) and
    C'(t + i0): chi = t + (1 - Omega)/C', eta = 1 + (1/Omega + Omega - 2)/C'.
    Inside an f = 1 interval I = (t2, t1) the boundary value splits as
    C = C_I + log((t - t2)/(t - t1)) with the logarithmic part known exactly."""
    part = atlas.locate(t)
    if part not in R_PARTS:
        raise NotInR(f"t={t} lies in {part}")
    if part == "R_0":
        return (float(t), 1.0, 1.0)
    if part in ("R_1", "R_2"):
        # R_1: f = 1 on (t2, t), f = 0 right of t; R_2 mirrored
        if part == "R_1":
            t2 = next(lo for lo, hi in atlas.r_lambda_mu if hi == t)
            ci = _real_cauchy(_atoms_without(spec, t2, t), t)
            return (float(t), 1.0 - math.exp(ci) * (t - t2), 0.0)
        t1 = next(hi for lo, hi in atlas.r_lambda_mu if lo == t)
        ci = _real_cauchy(_atoms_without(spec, t, t1), t)
        e = math.exp(-ci) * (t - t1)
        return (float(t - e), 1.0 + e, math.inf)
    if part == "R_mu":
        c = _real_cauchy(spec.atoms, t)
        cp = _real_cauchy(spec.atoms, t, 1)
        om = math.exp(-c)
        chi = t - math.expm1(-c) / cp
        far = _far_eta(spec, t, c, cp)
        eta = far if far is not None else 1.0 + 4.0 * math.sinh(0.5 * c) ** 2 / cp
        return (float(chi), float(eta), float(om))
    else:
        t2, t1 = atlas.one_interval_at(t)
        atoms = _atoms_without(spec, t2, t1)
        ci = _real_cauchy(atoms, t)
        cp = _real_cauchy(atoms, t, 1) + 1.0 / (t - t2) - 1.0 / (t - t1)
        om = (t - t1) / (t - t2) * math.exp(-ci)
    chi = t + (1.0 - om) / cp
    eta = 1.0 + (1.0 / om + om - 2.0) / cp
    return (float(chi), float(eta), float(om))


def _far_eta(spec: DensitySpec, t: float, c: float, cp: float):
    """eta well away from the hull, where 1 + (1/Omega + Omega - 2)/C' cancels
    to leading order.  Uses -C' - C^2 = mass_g^2 Var_g(s) for the weight
    g = f/(t - s)^2, and 2(cosh C - 1) - C^2 by its series."""
    a, b = spec.hull
    if a - 0.5 * (b - a) < t < b + 0.5 * (b - a):
        return None
    if any(at.kind != "poly" for at in spec.atoms):
        return None
    xg, wg = _GL64
    s_all, g_all = [], []
    for at in spec.atoms:
        s = at.c + at.h * xg
        s_all.append(s)
        g_all.append(at.h * wg * at.values(s) / (t - s) ** 2)
    s, g = np.concatenate(s_all), np.concatenate(g_all)
    m = g.sum()
    mean = (g * s).sum() / m
    S = m * (g * (s - mean) ** 2).sum()
    if abs(c) < 1.0:
        E, term, k = 0.0, 0.5 * c * c, 1
        while True:
            term *= c * c / ((2 * k + 1) * (2 * k + 2))
            E += 2 * term
            k += 1
            if abs(term) < 1e-18 * max(abs(E), 1e-300):
                break
    else:
        E = 2 * (math.cosh(c) - 1) - c * c
    return float((-S + E) / cp)


_GL64 = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class EdgePolyline:
    region: str
    t: tuple[float, ...]
    points: tuple[tuple[float, float], ...]
    omega: tuple[float, ...]
    limits: tuple  # ((t_end, (chi, eta)) or None) at the low and high ends


def _t_of(lo, hi, sig, scale):
    """Map sig in (0, 1) onto the component (lo, hi), possibly unbounded."""
    if math.isfinite(lo) and math.isfinite(hi):
        return lo + (hi - lo) * sig
    if math.isfinite(hi):
        return hi - scale * (1.0 / sig - 1.0)
    if math.isfinite(lo):
        return lo + scale * (1.0 / (1.0 - sig) - 1.0)
    return scale * math.tan(math.pi * (sig - 0.5))


def _initial_sigmas(lo, hi, n):
    base = list(np.linspace(0, 1, n + 2)[1:-1])
    ends = [10.0**-k for k in range(2, 10)]
    if math.isfinite(lo):
        base += ends
    if math.isfinite(hi):
        base += [1 - e for e in ends]
    if not math.isfinite(lo):
        base += [0.5 * e for e in ends[:4]]
    if not math.isfinite(hi):
        base += [1 - 0.5 * e for e in ends[:4]]
    return sorted(set(base))


def edge_curve(spec: DensitySpec, atlas: SupportAtlas | None = None, n: int = 64, max_chord: float = 0.02, max_turn: float = 0.15, max_points: int = 4000):
    """Polylines of the edge, one per R_mu / R_lambda_mu component, refined
    until chords are short and the turning angle per vertex is small; the
    isolated R_0 / R_1 / R_2 points come back as one-point polylines."""
    atlas = support_atlas(spec) if atlas is None else atlas
    a, b = spec.hull
    scale = b - a
    out = []
    comps = [("R_mu", iv) for iv in atlas.r_mu] + [("R_lambda_mu", iv) for iv in atlas.r_lambda_mu]
    comps.sort(key=lambda c: c[1][0])
    for region, (lo, hi) in comps:
        sig = _initial_sigmas(lo, hi, n)
        pts = {s: edge_point(spec, atlas, _t_of(lo, hi, s, scale)) for s in sig}
        for _ in range(30):
            ss = sorted(pts)
            P = np.array([pts[s][:2] for s in ss])
            seg = np.diff(P, axis=0)
            length = np.hypot(seg[:, 0], seg[:, 1])
            new = [0.5 * (ss[i] + ss[i + 1]) for i in np.flatnonzero(length > max_chord)]
            if len(P) > 2:
                ang = np.arctan2(seg[:, 1], seg[:, 0])
                turn = np.abs(np.angle(np.exp(1j * np.diff(ang))))
                for i in np.flatnonzero(turn > max_turn):
                    new += [0.5 * (ss[i] + ss[i + 1]), 0.5 * (ss[i + 1] + ss[i + 2])]
            new = [s for s in set(new) if s not in pts and 0 < s < 1]
            if not new or len(pts) + len(new) > max_points:
                break
            for s in new:
                pts[s] = edge_point(spec, atlas, _t_of(lo, hi, s, scale))
        ss = sorted(pts)
        ts = tuple(float(_t_of(lo, hi, s, scale)) for s in ss)
        limits = (_end_limit(spec, atlas, lo, +1), _end_limit(spec, atlas, hi, -1))
        out.append(
            EdgePolyline(
                region=region,
                t=ts,
                points=tuple((float(pts[s][0]), float(pts[s][1])) for s in ss),
                omega=tuple(float(pts[s][2]) for s in ss),
                limits=limits,
            )
        )
    for region, pts in (("R_0", atlas.r_zero), ("R_1", atlas.r_one), ("R_2", atlas.r_two)):
        for t in pts:
            chi, eta, om = edge_point(spec, atlas, t)
            out.append(EdgePolyline(region, (float(t),), ((chi, eta),), (om,), (None, None)))
    return out


def _end_limit(spec, atlas, end, direction, eps=1e-9):
    """One-sided limit of the edge at a component end (approached from the
    inside); the infinity point for unbounded ends."""
    if not math.isfinite(end):
        return (end, infinity_point(spec))
    a, b = spec.hull
    t = end + direction * eps * max(1.0, b - a)
    try:
        chi, eta, _ = edge_point(spec, atlas, t)
    except (NotInR, ZeroDivisionError, OverflowError):
        return None
    return (float(end), (chi, eta))


# ---------------------------------------------------------------------------
# point classes


@dataclass(frozen=True)
class _Class:
    @property
    def kind(self) -> str:
        return type(self).__name__

    @property
    def regular(self) -> bool:
        return False

    @property
    def singular(self) -> bool:
        return False

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        d.update(_jsonable(asdict(self)))
        return d


@dataclass(frozen=True)
class RegularLebesgue(_Class):
    f_x: float

    @property
    def regular(self):
        return True


@dataclass(frozen=True)
class RegularCriteria(_Class):
    c_x: float
    b_x: float

    @property
    def regular(self):
        return True


@dataclass(frozen=True)
class RegularVanishing(_Class):
    """Lebesgue point with f(x) in {0, 1} that is still regular; `rule` is
    'vanishing-hilbert', 'divergent-inverse-square' or 'mean-growth'."""

    f_x: float
    rule: str
    detail: float

    @property
    def regular(self):
        return True


@dataclass(frozen=True)
class Generic(_Class):
    witness: str
    regular_by: _Class = field(default=None)

    @property
    def regular(self):
        return True


@dataclass(frozen=True)
class SingularI(_Class):
    delta: float
    H_phi: float

    @property
    def singular(self):
        return True


@dataclass(frozen=True)
class SingularII(_Class):
    delta: float
    H_phi: float

    @property
    def singular(self):
        return True


@dataclass(frozen=True)
class SingularIII(_Class):
    H_f: float
    Hp_f: float

    @property
    def singular(self):
        return True


@dataclass(frozen=True)
class SingularIV(_Class):
    H_1mf: float
    Hp_1mf: float

    @property
    def singular(self):
        return True


@dataclass(frozen=True)
class EdgePoint(_Class):
    region: str


@dataclass(frozen=True)
class IndeterminatePoint(_Class):
    diagnostics: str


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
    return obj


# ---------------------------------------------------------------------------
# classification


def _adjacent_piece(spec: DensitySpec, x: float, side: str):
    for p in spec.pieces:
        if side == "left" and p.b == x:
            return p
        if side == "right" and p.a == x:
            return p
    return None


def _phi_atoms(spec, x, delta, cls):
    lo, hi = (x - delta, x) if cls == "I" else (x, x + delta)
    return list(spec.atoms) + [PolyAtom(lo, hi, (-1.0,))]


def hilbert_phi(spec: DensitySpec, x: float, delta: float, cls: str) -> float:
    """H(f - indicator)(x) for the unit jump at x; NaN when it diverges."""
    fin, div = _pv_sum(spec, x, _phi_atoms(spec, x, delta, cls))
    if abs(div) > 1e-12:
        return math.nan
    return fin / math.pi


def _unit_jump(spec, x, tz, delta):
    fl, fr = spec.limit(x, "left"), spec.limit(x, "right")
    if not (math.isfinite(fl) and math.isfinite(fr)):
        return None
    if abs(fl - 1) < tz and abs(fr) < tz:
        cls, side = "I", "left"
    elif abs(fl) < tz and abs(fr - 1) < tz:
        cls, side = "II", "right"
    else:
        return None
    piece = _adjacent_piece(spec, x, side)
    if piece is None:
        return None
    d = piece.b - piece.a if delta is None else min(delta, piece.b - piece.a)
    return cls, d


def _near_polynomial(spec, x, r=1e-3):
    return all(isinstance(p.kind, Polynomial) for p in spec.pieces if p.a <= x + r and p.b >= x - r)


def _mean_growth(prof, side_vals) -> float:
    """Log-log slope of the larger one-sided mean over the two smallest
    decades of the profile."""
    hs = np.array(prof.h_grid)
    m = np.maximum(np.array(prof.mr), np.array(prof.ml)) if side_vals is None else side_vals
    sel = hs <= 100 * hs.min() * (1 + 1e-12)
    if np.any(m[sel] <= 0):
        return math.inf
    return float(np.polyfit(np.log(hs[sel]), np.log(m[sel]), 1)[0])


def _criteria_stable(spec, x, prof) -> bool:
    """b(x) and c(x) read off the smallest decade should not drift when the
    decade before is used instead; a drift means the one-sided limits are
    still moving and the estimate cannot be trusted."""
    hs = np.array(prof.h_grid)
    mr, ml = np.array(prof.mr), np.array(prof.ml)
    hmin = hs.min()
    prev = (hs > 10 * hmin * (1 + 1e-12)) & (hs <= 100 * hmin * (1 + 1e-12))
    last = hs <= 10 * hmin * (1 + 1e-12)

    def bc(sel):
        frp, frm, flp, flm = mr[sel].max(), mr[sel].min(), ml[sel].max(), ml[sel].min()
        c = max(abs(frp - flm), abs(flp - frm))
        b = 0.25 * min(2 - frp - flp, frm + flm)
        return b, c

    b0, c0 = bc(prev)
    b1, c1 = bc(last)
    return b1 >= 0.9 * b0 and c1 <= c0 + 0.1 * (1 - c0)


def _regularity(spec, x, tz):
    """Regular class at x if one of the sufficient conditions is certified."""
    fl, fr = spec.limit(x, "left"), spec.limit(x, "right")
    lebesgue = math.isfinite(fl) and math.isfinite(fr) and abs(fl - fr) < tz
    if lebesgue:
        fx = 0.5 * (fl + fr)
        if tz < fx < 1 - tz:
            return RegularLebesgue(f_x=float(fx))
        comp = fx >= 1 - tz
        try:
            isq = inverse_square(spec, x, complement=comp)
            H = hilbert(spec, x)
        except (_QuadIndeterminate, QuadratureFailure):
            isq, H = math.nan, None
        if math.isinf(isq) and H is not None and H.finite and _near_polynomial(spec, x):
            return RegularVanishing(f_x=float(round(fx)), rule="divergent-inverse-square", detail=float(H.value))
        prof = mean_profile(spec, x)
        vals = np.maximum(prof.mr, prof.ml) if not comp else np.maximum(1 - np.array(prof.mr), 1 - np.array(prof.ml))
        slope = _mean_growth(prof, np.asarray(vals))
        if slope < 0.9:
            return RegularVanishing(f_x=float(round(fx)), rule="mean-growth", detail=slope)
        return None
    prof = mean_profile(spec, x)
    if prof.c_x < 1 - 1e-9 and prof.b_x > 1e-9 and _criteria_stable(spec, x, prof):
        return RegularCriteria(c_x=prof.c_x, b_x=prof.b_x)
    return None


def _generic(spec, atlas, x, n_wit=6):
    """Dyadic flanking witnesses r_k = x + d 2^-k, l_k = x - d 2^-k checked
    for regularity with a uniform bound on the mean cancellation and on the
    truncated maximal means."""
    comp = next(((lo, hi) for lo, hi in atlas.s_nt if lo <= x <= hi), None)
    if comp is None:
        return None
    lo, hi = comp
    a, b = spec.hull
    room = [r for r in (x - lo, hi - x) if r > 0]
    if not room:
        return None
    d = 0.25 * min(min(room), 0.2 * (b - a))
    sides = [s for s, r in ((-1, x - lo), (1, hi - x)) if r > 0]
    tz = spec.zero_tol * 1e3
    m1, m2 = 0.0, math.inf
    for s in sides:
        for k in range(n_wit):
            y = x + s * d * 2.0**-k
            if _regularity(spec, y, tz) is None:
                return None
            prof = mean_profile(spec, y, h_min=1e-7 * d, h_max=2 * (b - a), n_h=33)
            hs = np.array(prof.h_grid)
            mid = 0.5 * (np.array(prof.mr) + np.array(prof.ml))
            small = hs < d
            m1 = max(m1, prof.dm_sup)
            m2 = min(m2, 1 - mid[small].max(), 1 - (1 - mid[small]).max())
    if m1 < 1 - 1e-6 and m2 > 1e-6:
        side = "two-sided" if len(sides) == 2 else ("right" if sides == [1] else "left")
        return f"{side} dyadic witnesses x±{d:.4g}·2^-k, k<{n_wit}; m1={m1:.4g}, m2={m2:.4g}"
    return None


def classify(spec: DensitySpec, atlas: SupportAtlas | None, x: float, delta: float | None = None, generic: bool = True):
    """Decide the class of x: structural unit jumps first, then the
    vanishing-density singular classes, then the regularity criteria, and
    finally genericity through flanking witnesses."""
    atlas = support_atlas(spec) if atlas is None else atlas
    part = atlas.locate(x)
    if part in R_PARTS:
        return EdgePoint(region=part)
    if part != "S_nt":
        raise OutsideDomain(f"x={x} is neither in R nor in the non-trivial support")
    tz = spec.zero_tol * 1e3
    diag = []
    jump = _unit_jump(spec, x, tz, delta)
    if jump is not None:
        cls, d = jump
        hphi = hilbert_phi(spec, x, d, cls)
        if math.isfinite(hphi):
            return SingularI(delta=d, H_phi=hphi) if cls == "I" else SingularII(delta=d, H_phi=hphi)
        diag.append(f"unit jump {cls} with divergent H(phi)")
    try:
        isq = inverse_square(spec, x)
        isq_c = inverse_square(spec, x, complement=True)
        H = hilbert(spec, x)
    except (_QuadIndeterminate, QuadratureFailure) as e:
        isq = isq_c = math.inf
        H = None
        diag.append(f"hilbert data unavailable: {e}")
    if H is not None and H.finite:
        if math.isfinite(isq):
            if abs(H.value) > 1e-10:
                return SingularIII(H_f=H.value, Hp_f=-isq / math.pi)
            return RegularVanishing(f_x=0.0, rule="vanishing-hilbert", detail=isq)
        if math.isfinite(isq_c):
            if abs(H.value) > 1e-10:
                return SingularIV(H_1mf=-H.value, Hp_1mf=-isq_c / math.pi)
            return RegularVanishing(f_x=1.0, rule="vanishing-hilbert", detail=isq_c)
    reg = _regularity(spec, x, tz)
    if reg is None:
        diag.append("no regularity criterion certified")
        return IndeterminatePoint(diagnostics="; ".join(diag))
    if generic:
        w = _generic(spec, atlas, x)
        if w is not None:
            return Generic(witness=w, regular_by=reg)
    return reg


# ---------------------------------------------------------------------------
# singular segments


@dataclass(frozen=True)
class SingularSegment:
    x: float
    cls: str
    xi_grid: tuple[float, ...]
    points: tuple[tuple[float, float], ...]
    endpoint_nt: tuple[float, float]
    omega_limit: float

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "x": self.x,
                "class": self.cls,
                "xi": list(self.xi_grid),
                "points": [list(p) for p in self.points],
                "endpoint": list(self.endpoint_nt),
                "omega": self.omega_limit,
            }
        )


def segment_point(x: float, cls, xi: float) -> tuple[float, float]:
    """Point of the singular segment at parameter xi (xi = 0 is the
    non-tangential endpoint, xi -> inf tends to (x, 1))."""
    if isinstance(cls, SingularI):
        e = cls.delta * math.exp(math.pi * cls.H_phi) / (1 + xi)
        return (x, 1 - e)
    if isinstance(cls, SingularII):
        e = cls.delta * math.exp(-math.pi * cls.H_phi) / (1 + xi)
        return (x + e, 1 - e)
    if isinstance(cls, SingularIII):
        h = math.pi * cls.H_f
        den = xi - math.pi * cls.Hp_f
        return (x + (math.exp(-h) - 1) / den, 1 - (math.exp(h) + math.exp(-h) - 2) / den)
    if isinstance(cls, SingularIV):
        h = math.pi * cls.H_1mf
        den = xi - math.pi * cls.Hp_1mf
        return (x + (math.exp(h) + 1) / den, 1 - (math.exp(h) + math.exp(-h) + 2) / den)
    raise MissingConstants(f"{type(cls).__name__} carries no segment constants")


def _class_name(cls) -> str:
    return {SingularI: "I", SingularII: "II", SingularIII: "III", SingularIV: "IV"}[type(cls)]


def singular_segment(spec: DensitySpec, x: float, cls, xi_grid=None) -> SingularSegment:
    if not getattr(cls, "singular", False):
        raise MissingConstants("need a singular class from classify")
    for v in asdict(cls).values():
        if isinstance(v, float) and not math.isfinite(v):
            raise MissingConstants("non-finite constant")
    xi = tuple(float(v) for v in (np.geomspace(1e-3, 1e3, 25) if xi_grid is None else xi_grid))
    pts = tuple(segment_point(x, cls, v) for v in xi)
    if isinstance(cls, SingularIII):
        om = math.exp(-math.pi * cls.H_f)
    elif isinstance(cls, SingularIV):
        om = -math.exp(math.pi * cls.H_1mf)
    elif isinstance(cls, SingularI):
        om = 0.0
    else:
        om = math.inf
    return SingularSegment(float(x), _class_name(cls), xi, pts, segment_point(x, cls, 0.0), om)


# ---------------------------------------------------------------------------
# tangential and convex paths

_GL16 = np.polynomial.legendre.leggauss(16)


def _lorentz(g, p, q, c, v, breaks=()):
    """int_p^q g(t) / ((t - c)^2 + v^2) dt on a mesh graded geometrically
    toward c so the width-v peak is resolved."""
    pts = {p, q}
    k = v
    while k < (q - p):
        for y in (c - k, c + k):
            if p < y < q:
                pts.add(y)
        k *= 4.0
    if p < c < q:
        pts.add(c)
    pts.update(y for y in breaks if p < y < q)
    e = np.array(sorted(pts))
    lo, hi = e[:-1], e[1:]
    xg, wg = _GL16
    t = 0.5 * (hi - lo)[:, None] * xg[None, :] + 0.5 * (hi + lo)[:, None]
    vals = g(t.ravel()).reshape(t.shape) / ((t - c) ** 2 + v * v)
    return float(np.sum(0.5 * (hi - lo)[:, None] * wg[None, :] * vals))


def _path_integrand(spec, x, cls):
    if isinstance(cls, (SingularI, SingularII)):
        lo, hi = (x - cls.delta, x) if isinstance(cls, SingularI) else (x, x + cls.delta)
        return lambda t: spec(t) - ((t >= lo) & (t <= hi))
    if isinstance(cls, SingularIII):
        return lambda t: spec(t)
    if isinstance(cls, SingularIV):
        return lambda t: 1.0 - spec(t)
    raise MissingConstants("tangential paths need a singular class")


def path_function(spec: DensitySpec, x: float, cls, s: float, v: float) -> float:
    """G_1 (classes I/II, with the indicator removed) or G_2 (classes
    III/IV) at (s, v)."""
    g = _path_integrand(spec, x, cls)
    p, q = sorted((x, x + 2 * s))
    breaks = [pc.a for pc in spec.pieces] + [pc.b for pc in spec.pieces]
    val = _lorentz(g, p, q, x + s, v, breaks)
    if isinstance(cls, (SingularI, SingularII)):
        val *= s
    return val


@dataclass(frozen=True)
class TangentialPath:
    x: float
    cls: str
    xi: float
    points: tuple[tuple[float, float], ...]  # (s, v)
    skipped: tuple[tuple[float, str], ...]

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(v / abs(s) for s, v in self.points)


def _solve_v(G, s, xi, steps=200):
    lo, hi = abs(s) * 1e-16, abs(s) * 1e4
    if not G(lo) > xi:
        raise NoSolution(f"G(s={s}, v) stays below xi={xi}")
    if not G(hi) < xi:
        raise NoSolution(f"G(s={s}, v) stays above xi={xi}")
    a, b = math.log(lo), math.log(hi)
    for _ in range(steps):
        m = 0.5 * (a + b)
        if G(math.exp(m)) > xi:
            a = m
        else:
            b = m
        if b - a < 1e-13:
            break
    return math.exp(0.5 * (a + b))


def tangential_path(spec: DensitySpec, x: float, cls, xi: float, s_grid) -> TangentialPath:
    """For each s solve G(s, v; x) = xi for v by bisection in log v (G is
    strictly decreasing in v); s values where no root exists are skipped."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    pts, skipped = [], []
    for s in s_grid:
        s = float(s)
        try:
            v = _solve_v(lambda v: path_function(spec, x, cls, s, v), s, xi)
        except NoSolution as e:
            skipped.append((s, str(e)))
            continue
        pts.append((s, v))
    return TangentialPath(float(x), _class_name(cls), float(xi), tuple(pts), tuple(skipped))


def _convex_near(spec, x, eps):
    pieces = [p for p in spec.pieces if p.a < x + eps and p.b > x - eps]
    if any(not isinstance(p.kind, Polynomial) for p in pieces):
        return False
    ts = np.linspace(x - eps, x + eps, 401)
    f = np.asarray(spec(ts))
    # convexity of the sampled function, including across breakpoints
    second = f[:-2] - 2 * f[1:-1] + f[2:]
    return bool(np.all(second >= -1e-12 * max(1.0, np.abs(f).max())))


def convex_path(spec: DensitySpec, x: float, xi: float, s_grid, eps: float = 0.05):
    """v(s) = (pi/xi) f(x + s) with G_2 evaluated along it; returns
    (s, v, G_2) triples, skipping s where f(x + s) = 0."""
    if not _convex_near(spec, x, eps):
        raise ConvexityUndeclared(f"f is not certified convex on [{x - eps}, {x + eps}]")
    cls = SingularIII(H_f=math.nan, Hp_f=math.nan)
    out = []
    for s in s_grid:
        s = float(s)
        v = math.pi / xi * float(spec(x + s))
        if v <= 0:
            continue
        out.append((s, v, path_function(spec, x, cls, s, v)))
    return out


# ---------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class BoundaryAtlas:
    infinity: tuple[float, float]
    edge: tuple[EdgePolyline, ...]
    generic_top: tuple[tuple[float, float], ...]
    regular_top: tuple[tuple[float, float], ...]
    singular: tuple[SingularSegment, ...]
    gaps: tuple[tuple[float, float], ...]
    classes: tuple[tuple[float, dict], ...]
    continuity: tuple[dict, ...]

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "infinity": list(self.infinity),
                "edge": [
                    {
                        "region": e.region,
                        "t": list(e.t),
                        "points": [list(p) for p in e.points],
                        "omega": list(e.omega),
                        "limits": [None if lim is None else [lim[0], list(lim[1])] for lim in e.limits],
                    }
                    for e in self.edge
                ],
                "generic_top": [list(iv) for iv in self.generic_top],
                "regular_top": [list(iv) for iv in self.regular_top],
                "singular": [s.to_dict() for s in self.singular],
                "gaps": [list(iv) for iv in self.gaps],
                "classes": [[x, c] for x, c in self.classes],
                "continuity": list(self.continuity),
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _candidates(spec: DensitySpec, lo: float, hi: float, tz: float):
    """Points of [lo, hi] that may be singular: ends, piece breakpoints,
    oscillation centres, and interior zeros of f or 1 - f on polynomial
    pieces."""
    pts = {lo, hi}
    for at in spec.atoms:
        for y in (at.a, at.b):
            if lo <= y <= hi:
                pts.add(y)
        if isinstance(at, NamedAtom):
            if lo <= at.center <= hi:
                pts.add(at.center)
            continue
        for target in (0.0, 1.0):
            c = np.array(at.glob.coef, dtype=float)
            c[0] -= target
            if np.all(np.abs(c) < tz):
                continue
            for r in np.polynomial.polynomial.polyroots(c) if len(c) > 1 else []:
                if abs(r.imag) < 1e-9 and at.a < r.real < at.b and lo < r.real < hi:
                    if abs(float(at.values(r.real)) - target) < tz:
                        pts.add(float(r.real))
    # a multiple root splits into a cluster under rounding; keep one point,
    # preferring structural points (ends, breakpoints) already present
    structural = {lo, hi} | {y for at in spec.atoms for y in (at.a, at.b)}
    out: list[float] = []
    for y in sorted(pts, key=lambda y: (y not in structural, y)):
        if all(abs(y - z) > 1e-6 * max(1.0, hi - lo) for z in out):
            out.append(y)
    return sorted(out)


def _join(ivs, keeps):
    """Merge open intervals (a, b, class_a, class_b) through shared
    endpoints whose own class passes `keeps`."""
    out = []
    for a, b, ca, cb in sorted(ivs, key=lambda r: r[0]):
        if out and out[-1][1] == a and keeps(ca):
            out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


def assemble(spec: DensitySpec, xi_grid=None, n_edge: int = 64) -> BoundaryAtlas:
    atlas = support_atlas(spec)
    edge = tuple(edge_curve(spec, atlas, n=n_edge))
    tz = spec.zero_tol * 1e3
    classes, singular, gaps, gen, reg, cont = [], [], [], [], [], []

    def safe_classify(y):
        try:
            return classify(spec, atlas, y)
        except (_QuadIndeterminate, QuadratureFailure) as e:
            return IndeterminatePoint(diagnostics=str(e))

    for lo, hi in atlas.s_nt:
        cands = _candidates(spec, lo, hi, tz)
        kinds = {}
        for y in cands:
            c = safe_classify(y)
            kinds[y] = c
            classes.append((float(y), c.to_dict()))
            if c.singular:
                seg = singular_segment(spec, y, c, xi_grid)
                singular.append(seg)
                side = _iso_side(atlas, y)
                if side is not None:
                    lim = _end_limit(spec, atlas, y, side)
                    if lim is not None:
                        err = math.hypot(lim[1][0] - seg.endpoint_nt[0], lim[1][1] - seg.endpoint_nt[1])
                        cont.append({"x": float(y), "edge_limit": list(lim[1]), "endpoint": list(seg.endpoint_nt), "error": err})
            elif isinstance(c, IndeterminatePoint):
                gaps.append((float(y), float(y)))
        # open pieces between candidates, judged at three interior samples
        for a, b in zip(cands, cands[1:]):
            samples = [safe_classify(a + (b - a) * r) for r in (0.25, 0.5, 0.75)]
            if all(isinstance(s, Generic) for s in samples):
                gen.append((a, b, kinds[a], kinds[b]))
            elif all(s.regular for s in samples):
                reg.append((a, b, kinds[a], kinds[b]))
            else:
                gaps.append((a, b))
    return BoundaryAtlas(
        infinity=infinity_point(spec),
        edge=edge,
        generic_top=_join(gen, lambda c: isinstance(c, Generic)),
        regular_top=_join(reg, lambda c: c.regular),
        singular=tuple(singular),
        gaps=tuple(gaps),
        classes=tuple(classes),
        continuity=tuple(cont),
    )


def _iso_side(atlas: SupportAtlas, y: float):
    """Direction (+1/-1) from y into the neighbouring R component, if y is an
    isolated end of the non-trivial support next to R."""
    for x, tag in atlas.s_nt_iso:
        if x == y:
            if atlas.component(y + 1e-9 * max(1.0, abs(y))) is not None and tag.startswith("R"):
                return +1
            if atlas.component(y - 1e-9 * max(1.0, abs(y))) is not None and tag.startswith("L"):
                return -1
    return None


def nontangential_limit(spec: DensitySpec, x: float, k: float, v: float) -> tuple[float, float]:
    """inverse_map at x + k v + i v."""
    s = inverse_map(spec, HalfPlanePoint(x + k * v, v))
    return (s.chi, s.eta)
