"""Admissible densities: piecewise descriptions, validation, and the support
decomposition of the real line.

A density is a sorted tuple of pieces on disjoint intervals.  Each piece is a
polynomial, a linear interpolation table, or a registered analytic function.
Everything downstream (transforms, the liquid maps, the boundary) consumes the
pieces through the integration atoms built here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from ._atoms import NAMED, NamedAtom, PolyAtom, cauchy_sum


class MalformedSpec(ValueError):
    """Pieces overlap, are unordered, or carry an unreadable payload."""


class UnknownName(KeyError):
    pass


# ---------------------------------------------------------------------------
# piece kinds


@dataclass(frozen=True)
class Polynomial:
    coeffs: tuple[float, ...]  # ascending degree, in the global variable t


@dataclass(frozen=True)
class Tabulated:
    nodes: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class NamedAnalytic:
    name: str
    params: tuple[tuple[str, float], ...] = ()

    @property
    def param_dict(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True)
class Piece:
    a: float
    b: float
    kind: Polynomial | Tabulated | NamedAnalytic


def poly(a: float, b: float, *coeffs: float) -> Piece:
    return Piece(float(a), float(b), Polynomial(tuple(float(c) for c in coeffs)))


def named(a: float, b: float, name: str, **params: float) -> Piece:
    return Piece(float(a), float(b), NamedAnalytic(name, tuple(sorted((k, float(v)) for k, v in params.items()))))


def table(nodes: Iterable[tuple[float, float]]) -> Piece:
    nodes = tuple((float(t), float(v)) for t, v in nodes)
    return Piece(nodes[0][0], nodes[-1][0], Tabulated(nodes))


# ---------------------------------------------------------------------------
# the density


@dataclass(frozen=True)
class DensitySpec:
    pieces: tuple[Piece, ...]
    tol_mass: float | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise MalformedSpec("no pieces")
        prev_b = -math.inf
        for i, p in enumerate(self.pieces):
            if not (math.isfinite(p.a) and math.isfinite(p.b)) or not p.a < p.b:
                raise MalformedSpec(f"piece {i}: need finite a < b, got [{p.a}, {p.b}]")
            if p.a < prev_b:
                raise MalformedSpec(f"piece {i}: overlaps or precedes piece {i - 1}")
            prev_b = p.b
            k = p.kind
            if isinstance(k, Tabulated):
                ts = [t for t, _ in k.nodes]
                if len(ts) < 2 or ts[0] != p.a or ts[-1] != p.b or any(x >= y for x, y in zip(ts, ts[1:])):
                    raise MalformedSpec(f"piece {i}: table nodes must increase from a to b")
            elif isinstance(k, NamedAnalytic):
                if k.name not in NAMED:
                    raise MalformedSpec(f"piece {i}: unknown analytic kind {k.name!r}")
                try:
                    NamedAtom(p.a, p.b, k.name, k.param_dict).values(np.array([p.a, p.b]))
                except TypeError as exc:
                    raise MalformedSpec(f"piece {i}: bad parameters for {k.name!r}: {exc}") from None
            elif isinstance(k, Polynomial):
                if not k.coeffs:
                    raise MalformedSpec(f"piece {i}: empty coefficient list")
            else:
                raise MalformedSpec(f"piece {i}: unknown kind")

    # -- structure ---------------------------------------------------------

    @cached_property
    def atoms(self) -> tuple:
        out = []
        for p in self.pieces:
            k = p.kind
            if isinstance(k, Polynomial):
                out.append(PolyAtom(p.a, p.b, k.coeffs))
            elif isinstance(k, Tabulated):
                for (t0, v0), (t1, v1) in zip(k.nodes, k.nodes[1:]):
                    slope = (v1 - v0) / (t1 - t0)
                    out.append(PolyAtom(t0, t1, (v0 - slope * t0, slope)))
            else:
                out.append(NamedAtom(p.a, p.b, k.name, k.param_dict))
        return tuple(out)

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(p.kind, Polynomial) for p in self.pieces)

    @property
    def has_named(self) -> bool:
        return any(isinstance(p.kind, NamedAnalytic) for p in self.pieces)

    @property
    def tol(self) -> float:
        if self.tol_mass is not None:
            return self.tol_mass
        return 1e-9 if self.is_polynomial else 1e-6

    @property
    def zero_tol(self) -> float:
        return 1e-12 if self.is_polynomial else 1e-6

    @cached_property
    def hull(self) -> tuple[float, float]:
        live = [at for at in self.atoms if not at.is_zero()]
        if not live:
            return (self.pieces[0].a, self.pieces[-1].b)
        return (live[0].a, live[-1].b)

    @cached_property
    def mass(self) -> float:
        return float(sum(at.mass() for at in self.atoms))

    @cached_property
    def first_moment(self) -> float:
        return float(sum(at.moment(1) for at in self.atoms))

    # -- evaluation --------------------------------------------------------

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        # later atoms overwrite shared endpoints, so values are right-continuous
        for at in self.atoms:
            m = (t >= at.a) & (t <= at.b)
            if np.any(m):
                out[m] = at.values(t[m])
        return out if out.ndim else float(out)

    def limit(self, x: float, side: str) -> float:
        """One-sided limit f(x+) (side='right') or f(x-) (side='left')."""
        for at in self.atoms:
            inside = at.a <= x < at.b if side == "right" else at.a < x <= at.b
            if inside:
                if isinstance(at, NamedAtom) and at.osc and x == at.center:
                    return math.nan
                return float(at.values(x))
        return 0.0

    def cauchy(self, w, deriv: int = 0):
        return cauchy_sum(self.atoms, w, deriv)

    def shifted(self, c: float) -> "DensitySpec":
        pieces = []
        for p in self.pieces:
            k = p.kind
            if isinstance(k, Polynomial):
                q = np.polynomial.Polynomial(k.coeffs)(np.polynomial.Polynomial([-c, 1.0]))
                kind = Polynomial(tuple(float(v) for v in q.coef))
            elif isinstance(k, Tabulated):
                kind = Tabulated(tuple((t + c, v) for t, v in k.nodes))
            else:
                d = k.param_dict
                d["center"] = d.get("center", 0.0) + c
                kind = NamedAnalytic(k.name, tuple(sorted(d.items())))
            pieces.append(Piece(p.a + c, p.b + c, kind))
        return DensitySpec(tuple(pieces), self.tol_mass, self.name)

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        ps = []
        for p in self.pieces:
            k = p.kind
            d = {"a": p.a, "b": p.b}
            if isinstance(k, Polynomial):
                d["poly"] = list(k.coeffs)
            elif isinstance(k, Tabulated):
                d["table"] = [list(n) for n in k.nodes]
            else:
                d["analytic"] = {"name": k.name, "params": dict(k.params)}
            ps.append(d)
        out = {"pieces": ps}
        if self.tol_mass is not None:
            out["tol_mass"] = self.tol_mass
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict, name: str = "") -> "DensitySpec":
        try:
            raw = d["pieces"]
            pieces = []
            for item in raw:
                a, b = float(item["a"]), float(item["b"])
                if "poly" in item:
                    kind = Polynomial(tuple(float(c) for c in item["poly"]))
                elif "table" in item:
                    kind = Tabulated(tuple((float(t), float(v)) for t, v in item["table"]))
                elif "analytic" in item:
                    an = item["analytic"]
                    params = tuple(sorted((str(k), float(v)) for k, v in an.get("params", {}).items()))
                    kind = NamedAnalytic(str(an["name"]), params)
                else:
                    raise MalformedSpec("piece has no poly/table/analytic payload")
                pieces.append(Piece(a, b, kind))
            tol = d.get("tol_mass")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MalformedSpec):
                raise
            raise MalformedSpec(f"unreadable density: {exc!r}") from None
        return cls(tuple(pieces), None if tol is None else float(tol), name)

    @classmethod
    def from_json(cls, text: str, name: str = "") -> "DensitySpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedSpec(f"invalid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise MalformedSpec("top level must be an object")
        return cls.from_dict(d, name)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    invariant: str  # "range" | "mass" | "hull"
    location: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def _atom_range(at) -> tuple[float, float]:
    if isinstance(at, PolyAtom):
        crit = [-1.0, 1.0]
        if at.dP.degree() >= 1:
            for r in at.dP.roots():
                if abs(r.imag) < 1e-12 and -1 < r.real < 1:
                    crit.append(r.real)
        vals = at.P(np.array(crit))
        return float(vals.min()), float(vals.max())
    t = np.linspace(at.a, at.b, 2001)
    vals = at.values(t)
    return float(vals.min()), float(vals.max())


def validate(spec: DensitySpec) -> ValidationReport:
    """List every violated admissibility invariant; an empty report means valid."""
    out = []
    eps = 1e-12
    for i, at in enumerate(spec.atoms):
        lo, hi = _atom_range(at)
        if lo < -eps or hi > 1 + eps:
            out.append(Violation("range", f"piece on [{at.a:g}, {at.b:g}]", f"values span [{lo:.6g}, {hi:.6g}]"))
    m = spec.mass
    if abs(m - 1.0) > spec.tol:
        out.append(Violation("mass", "whole line", f"integral {m:.12g}, tolerance {spec.tol:g}"))
    a, b = spec.hull
    if not b - a > 1.0:
        out.append(Violation("hull", f"[{a:g}, {b:g}]", f"hull length {b - a:.12g} is not above 1"))
    return ValidationReport(tuple(out))


# ---------------------------------------------------------------------------
# support decomposition


@dataclass(frozen=True)
class SupportAtlas:
    supp_mu: tuple[tuple[float, float], ...]
    supp_lambda_minus_mu: tuple[tuple[float, float], ...]
    r_mu: tuple[tuple[float, float], ...]
    r_lambda_mu: tuple[tuple[float, float], ...]
    r_zero: tuple[float, ...]
    r_one: tuple[float, ...]
    r_two: tuple[float, ...]
    s_nt: tuple[tuple[float, float], ...]
    s_nt_iso: tuple[tuple[float, str], ...]
    segments: tuple[tuple[float, float, str], ...]  # labelled cover of the hull

    def locate(self, t: float) -> str:
        """Name the part of the line containing t."""
        if any(abs(t - z) <= 1e-12 * max(1.0, abs(z)) for z in self.r_zero):
            return "R_0"
        if t in self.r_one:
            return "R_1"
        if t in self.r_two:
            return "R_2"
        if any(lo < t < hi for lo, hi in self.r_mu):
            return "R_mu"
        if any(lo < t < hi for lo, hi in self.r_lambda_mu):
            return "R_lambda_mu"
        if any(lo <= t <= hi for lo, hi in self.s_nt):
            return "S_nt"
        return "boundary"

    def component(self, t: float) -> tuple[float, float] | None:
        """The R_mu or R_lambda_mu interval holding t, if any."""
        for lo, hi in self.r_mu + self.r_lambda_mu:
            if lo < t < hi:
                return (lo, hi)
        return None

    def one_interval_at(self, t: float) -> tuple[float, float] | None:
        """The maximal f=1 interval whose closure contains t."""
        for lo, hi in self.r_lambda_mu:
            if lo <= t <= hi:
                return (lo, hi)
        return None


def _label(at, zero_tol: float) -> str:
    if at.is_zero(zero_tol):
        return "0"
    if at.is_one(zero_tol):
        return "1"
    return "mixed"


def _segments(spec: DensitySpec, zero_tol: float):
    segs: list[list] = []

    def push(lo, hi, lab):
        if hi <= lo:
            return
        if segs and segs[-1][2] == lab and segs[-1][1] == lo:
            segs[-1][1] = hi
        else:
            segs.append([lo, hi, lab])

    push(-math.inf, spec.pieces[0].a, "0")
    for at in spec.atoms:
        if segs and segs[-1][1] < at.a:
            push(segs[-1][1], at.a, "0")
        push(at.a, at.b, _label(at, zero_tol))
    push(segs[-1][1], math.inf, "0")
    return [tuple(s) for s in segs]


def _merge(intervals):
    out: list[list[float]] = []
    for lo, hi in intervals:
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((a, b) for a, b in out)


def _gap_zero(spec: DensitySpec, p: float, q: float) -> float | None:
    """The zero of C on the gap (p, q) outside the support, if any.

    C decreases strictly on the gap, from +inf-ish at p to -inf-ish at q, so
    there is at most one root; near-ties count as no root."""

    def c(t):
        return float(spec.cauchy(complex(t)).real)

    span = q - p
    # a positive density limit at a gap end makes C log-divergent there, so
    # creep toward the end until the sign shows up or floats run out
    lo = hi = None
    for k in range(6, 40):
        off = span * 10.0**-k
        if lo is None and p + off > p and c(p + off) > 0:
            lo = p + off
        if hi is None and q - off < q and c(q - off) < 0:
            hi = q - off
        if lo is not None and hi is not None:
            break
    if lo is None or hi is None:
        return None
    return optimize.brentq(c, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def support_atlas(spec: DensitySpec, zero_tol: float | None = None) -> SupportAtlas:
    zero_tol = spec.zero_tol if zero_tol is None else zero_tol
    segs = _segments(spec, zero_tol)
    supp_mu = _merge((lo, hi) for lo, hi, lab in segs if lab != "0")
    supp_lm = _merge((lo, hi) for lo, hi, lab in segs if lab != "1")
    s_nt = _merge((lo, hi) for lo, hi, lab in segs if lab == "mixed")
    r_one, r_two = [], []
    for (lo0, hi0, l0), (lo1, hi1, l1) in zip(segs, segs[1:]):
        if l0 == "1" and l1 == "0":
            r_one.append(hi0)
        elif l0 == "0" and l1 == "1":
            r_two.append(hi0)
    # complement of supp mu, split at the zeros of C
    gaps = []
    edges = [-math.inf] + [v for iv in supp_mu for v in iv] + [math.inf]
    for p, q in zip(edges[::2], edges[1::2]):
        if q > p:
            gaps.append((p, q))
    r_zero = []
    r_mu = []
    for p, q in gaps:
        z = _gap_zero(spec, p, q) if math.isfinite(p) and math.isfinite(q) else None
        if z is None:
            r_mu.append((p, q))
        else:
            r_zero.append(z)
            r_mu.extend([(p, z), (z, q)])
    r_lm = tuple((lo, hi) for lo, hi, lab in segs if lab == "1")
    iso = []
    for i, (lo, hi, lab) in enumerate(segs):
        if lab != "mixed":
            continue
        if i > 0 and segs[i - 1][2] != "mixed":
            iso.append((lo, "L" + segs[i - 1][2]))
        if i + 1 < len(segs) and segs[i + 1][2] != "mixed":
            iso.append((hi, "R" + segs[i + 1][2]))
    return SupportAtlas(
        supp_mu=supp_mu,
        supp_lambda_minus_mu=supp_lm,
        r_mu=tuple(r_mu),
        r_lambda_mu=r_lm,
        r_zero=tuple(r_zero),
        r_one=tuple(r_one),
        r_two=tuple(r_two),
        s_nt=s_nt,
        s_nt_iso=tuple(iso),
        segments=tuple(segs),
    )


# ---------------------------------------------------------------------------
# builtin examples


def _solve_mass(build, lo: float, hi: float, tol: float):
    root = optimize.brentq(lambda p: build(p).mass - 1.0, lo, hi, xtol=1e-15, rtol=1e-15)
    spec = build(root)
    assert abs(spec.mass - 1.0) <= tol
    return spec


def _with_indicator(core: Sequence[Piece], start: float, name: str, hi: float = 3.0):
    def build(a):
        return DensitySpec(tuple(core) + (poly(start, a, 1.0),), name=name)

    return _solve_mass(build, start + 1e-9, hi, 1e-9 if all(isinstance(p.kind, Polynomial) for p in core) else 1e-6)


def _dyadic_core(depth: int = 40) -> list[Piece]:
    right = []
    for n in range(2, depth + 1):
        k, odd = divmod(n, 2)
        val = 1.0 / (2 * k + 1) if odd else 1.0 - 1.0 / (2 * k)
        right.append((2.0 ** -(n + 1), 2.0**-n, val))
    right.reverse()
    core = 2.0 ** -(depth + 1)
    left = [(-b, -a, v) for a, b, v in reversed(right)]
    return [poly(a, b, v) for a, b, v in left] + [poly(-core, core, 0.5)] + [poly(a, b, v) for a, b, v in right]


def _builtin(name: str) -> DensitySpec:
    if name == "uniform-half":
        return DensitySpec((poly(0, 2, 0.5),), name=name)
    if name == "quartic":
        c = 15.0 / 16.0
        return DensitySpec((poly(-1, 1, c, 0.0, -2 * c, 0.0, c),), name=name)
    if name == "sing1-ramp":
        return DensitySpec((poly(-1, 0, 1.0, 1.0), poly(0, 1, 0.0, 1.0)), name=name)
    if name == "sing2-ramp":
        return DensitySpec((poly(-1, 0, 0.0, -1.0), poly(0, 1, 1.0, -1.0)), name=name)
    if name == "symmetric-square":
        s = 1.0 / 6.0
        return DensitySpec((poly(-1 - s, -1, 1.0), poly(-1, 1, 0.0, 0.0, 1.0), poly(1, 1 + s, 1.0)), name=name)
    if name == "two-interval":
        return DensitySpec((poly(0, 0.5, 1.0), poly(2, 2.5, 1.0)), name=name)
    if name == "dip-iv":
        build = lambda a: DensitySpec((poly(-a, 0.5, 1.0, 0.0, -1.0),), name=name)
        return _solve_mass(build, 0.3, 0.9, 1e-9)
    if name == "half-root-sine":
        build = lambda a: DensitySpec((named(-a, a, "root-sine", amp=0.5, power=0.5),), name=name)
        return _solve_mass(build, 0.8, 2.0, 1e-6)
    if name == "hausdorff":
        r = 2.0 / (3.0 * math.pi)
        return _with_indicator([named(-r, r, "square-sine")], 0.5, name)
    if name == "log-cusp":
        return _with_indicator([poly(-0.25, 0, 0.0, 0.0, 1.0), named(0, 0.25, "log-cusp")], 0.5, name)
    if name == "dyadic-steps":
        return _with_indicator(_dyadic_core(), 0.5, name)
    raise UnknownName(name)


BUILTIN_NAMES = (
    "uniform-half",
    "quartic",
    "sing1-ramp",
    "sing2-ramp",
    "symmetric-square",
    "two-interval",
    "dip-iv",
    "half-root-sine",
    "hausdorff",
    "log-cusp",
    "dyadic-steps",
)

_CACHE: dict[str, DensitySpec] = {}


def builtin(name: str) -> DensitySpec:
    """Registered example densities, with normalising parameters solved."""
    if name not in _CACHE:
        _CACHE[name] = _builtin(name)
    return _CACHE[name]
