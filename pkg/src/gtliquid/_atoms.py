"""Integration atoms: the pieces of a density reduced to objects that know how
to integrate themselves against a kernel.

A polynomial atom integrates in closed form.  A named atom carries its own
integrator: oscillating kinds are integrated period by period in the
reciprocal variable, everything else goes through scipy's adaptive quadrature.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, special

SERIES_RADIUS = 8.0
SERIES_TERMS = 40
# between this and SERIES_RADIUS the closed form cancels badly; quadrature
# on [-1, 1] converges geometrically there instead
QUAD_RADIUS = 1.5
_GL48 = np.polynomial.legendre.leggauss(48)
ZERO_TOL = 1e-12


class QuadratureFailure(RuntimeError):
    """Raised when a numerical integral misses its tolerance."""


class Indeterminate(RuntimeError):
    """Raised when a quantity cannot be decided with the available budget."""


# ---------------------------------------------------------------------------
# polynomial pieces


class PolyAtom:
    """p(t) on [a, b], stored in the local variable s = (t - c)/h on [-1, 1]."""

    def __init__(self, a: float, b: float, coeffs):
        self.a = float(a)
        self.b = float(b)
        self.coeffs = tuple(float(c) for c in coeffs)
        self.c = 0.5 * (self.a + self.b)
        self.h = 0.5 * (self.b - self.a)
        glob = Polynomial(self.coeffs)
        self.glob = glob
        self.P = glob(Polynomial([self.c, self.h])).trim(tol=0)
        self.dP = self.P.deriv()
        self.ddP = self.dP.deriv()
        pc = self.P.coef
        # R(omega) = int_{-1}^{1} (P(s) - P(omega))/(s - omega) ds
        r = np.zeros(max(len(pc) - 1, 1))
        for k in range(1, len(pc)):
            for j in range(0, k, 2):
                r[k - 1 - j] += pc[k] * 2.0 / (j + 1)
        self.R = Polynomial(r)
        self.dR = self.R.deriv()
        self.ddR = self.dR.deriv()
        mom = np.zeros(SERIES_TERMS)
        for k in range(SERIES_TERMS):
            for j, cj in enumerate(pc):
                if (j + k) % 2 == 0:
                    mom[k] += cj * 2.0 / (j + k + 1)
        self.moments = mom
        self.antideriv = self.P.integ()

    kind = "poly"

    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        return all(abs(c) <= tol for c in self.coeffs)

    def is_one(self, tol: float = ZERO_TOL) -> bool:
        return abs(self.coeffs[0] - 1.0) <= tol and all(abs(c) <= tol for c in self.coeffs[1:])

    def values(self, t):
        return self.glob(np.asarray(t, dtype=float))

    def clipped(self, lo: float, hi: float) -> "PolyAtom | None":
        lo, hi = max(lo, self.a), min(hi, self.b)
        if hi <= lo:
            return None
        return PolyAtom(lo, hi, self.coeffs)

    def mass(self, lo: float | None = None, hi: float | None = None) -> float:
        lo = self.a if lo is None else max(lo, self.a)
        hi = self.b if hi is None else min(hi, self.b)
        if hi <= lo:
            return 0.0
        s0, s1 = (lo - self.c) / self.h, (hi - self.c) / self.h
        return float(self.h * (self.antideriv(s1) - self.antideriv(s0)))

    def moment(self, k: int) -> float:
        """int t^k p(t) dt."""
        q = self.glob * Polynomial([0.0] * k + [1.0])
        Q = q.integ()
        return float(Q(self.b) - Q(self.a))

    def cauchy(self, w, deriv: int = 0):
        """d^deriv/dw^deriv of int_a^b p(t)/(w - t) dt, w off [a, b]."""
        w = np.asarray(w, dtype=complex)
        om = (w - self.c) / self.h
        out = np.empty_like(om)
        far = np.abs(om) > SERIES_RADIUS
        if np.any(far):
            o = om[far]
            inv = 1.0 / o
            k = np.arange(SERIES_TERMS)
            powers = inv[..., None] ** (k + 1 + deriv)
            if deriv == 0:
                fac = np.ones(SERIES_TERMS)
            elif deriv == 1:
                fac = -(k + 1.0)
            else:
                fac = (k + 1.0) * (k + 2.0)
            out[far] = (powers * (fac * self.moments)).sum(axis=-1)
        mid = ~far & (np.abs(om) > QUAD_RADIUS)
        if np.any(mid):
            xg, wg = _GL48
            d = om[mid][..., None] - xg
            out[mid] = (wg * self.P(xg) * (-1.0) ** deriv * math.factorial(deriv) / d ** (deriv + 1)).sum(axis=-1)
        near = ~far & ~mid
        if np.any(near):
            o = om[near]
            L = np.log(o + 1) - np.log(o - 1)
            if deriv == 0:
                val = self.P(o) * L - self.R(o)
            else:
                L1 = 1.0 / (o + 1) - 1.0 / (o - 1)
                if deriv == 1:
                    val = self.dP(o) * L + self.P(o) * L1 - self.dR(o)
                else:
                    L2 = -1.0 / (o + 1) ** 2 + 1.0 / (o - 1) ** 2
                    val = self.ddP(o) * L + 2 * self.dP(o) * L1 + self.P(o) * L2 - self.ddR(o)
            out[near] = val
        return out / self.h**deriv

    def hilbert_pv(self, x: float):
        """Real p.v. int p(t)/(x - t) dt, plus the log-divergence coefficients
        at the endpoints: returns (finite_part, coef_a, coef_b) where the full
        value is finite_part + coef_a*log|x-a| - coef_b*log|x-b| and the
        coefficients are only nonzero when x sits on that endpoint."""
        om = (x - self.c) / self.h
        if abs(om) > SERIES_RADIUS:
            return float(self.cauchy(complex(x)).real), 0.0, 0.0
        Pw = float(self.P(om))
        fin = -float(self.R(om))
        ca = cb = 0.0
        if abs(x - self.a) <= 1e-14 * max(1.0, abs(self.a)):
            ca = Pw
            fin -= Pw * math.log(abs(1 - om) * self.h)
        elif abs(x - self.b) <= 1e-14 * max(1.0, abs(self.b)):
            cb = Pw
            fin += Pw * math.log(abs(om + 1) * self.h)
        else:
            fin += Pw * math.log(abs((om + 1) / (om - 1)))
        return fin, ca, cb

    def inverse_square(self, x: float, tol: float = ZERO_TOL) -> float:
        """int_a^b p(t)/(x - t)^2 dt; +inf when it diverges."""
        if x < self.a or x > self.b:
            return float(-self.cauchy(complex(x), deriv=1).real)
        px = float(self.glob(x))
        dpx = float(self.glob.deriv()(x))
        if abs(px) > tol or abs(dpx) > tol * 1e3:
            if self.is_zero(tol):
                return 0.0
            return math.inf
        quot = self.glob // Polynomial([x * x, -2 * x, 1.0])
        Q = quot.integ()
        return float(Q(self.b) - Q(self.a))

    def integrate(self, fn: Callable, lo: float, hi: float, npts: int = 64):
        """Gauss-Legendre for smooth integrands fn(t, f(t))."""
        lo, hi = max(lo, self.a), min(hi, self.b)
        if hi <= lo:
            return 0.0
        x, wts = np.polynomial.legendre.leggauss(npts)
        t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        return 0.5 * (hi - lo) * np.sum(wts * fn(t, self.values(t)))


# ---------------------------------------------------------------------------
# named analytic pieces


def _root_sine(tau, amp=0.5, power=0.5):
    with np.errstate(divide="ignore", invalid="ignore"):
        return amp * np.abs(np.sin(1.0 / tau)) ** power


def _root_sine_mean(amp=0.5, power=0.5):
    return amp * special.gamma((power + 1) / 2) / (math.sqrt(math.pi) * special.gamma(power / 2 + 1))


def _square_sine(tau):
    with np.errstate(divide="ignore", invalid="ignore"):
        return tau**2 * np.sin(1.0 / tau) ** 2


def _log_cusp(tau):
    at = np.abs(tau)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1.0 / np.log(1.0 / at)
    return np.where(at == 0, 0.0, out)


# name -> (function of tau = t - center, oscillates, mean near center, even)
NAMED = {
    "root-sine": (_root_sine, True, _root_sine_mean, True),
    "square-sine": (_square_sine, True, lambda: 0.0, True),
    "log-cusp": (_log_cusp, False, lambda: 0.0, True),
}

_BASE_KEYS = {"center", "offset", "scale"}


class NamedAtom:
    """offset + scale * g(t - center) on [a, b] for a registered g."""

    kind = "named"
    periods = 4000

    def __init__(self, a: float, b: float, name: str, params: dict):
        if name not in NAMED:
            raise KeyError(name)
        self.a, self.b = float(a), float(b)
        self.name = name
        self.params = dict(params)
        self.center = float(params.get("center", 0.0))
        self.offset = float(params.get("offset", 0.0))
        self.scale = float(params.get("scale", 1.0))
        fn, osc, mean, even = NAMED[name]
        extra = {k: v for k, v in self.params.items() if k not in _BASE_KEYS}
        self._g = lambda tau: fn(tau, **extra)
        self.osc = osc
        self.core_mean = self.offset + self.scale * mean(**extra)
        self.even = even

    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        return False

    def is_one(self, tol: float = ZERO_TOL) -> bool:
        return False

    def values(self, t):
        t = np.asarray(t, dtype=float)
        v = self.offset + self.scale * self._g(t - self.center)
        return np.where(t == self.center, self.core_mean, v)

    def complement(self) -> "NamedAtom":
        p = dict(self.params)
        p["offset"] = 1.0 - self.offset
        p["scale"] = -self.scale
        return NamedAtom(self.a, self.b, self.name, p)

    def clipped(self, lo: float, hi: float) -> "NamedAtom | None":
        lo, hi = max(lo, self.a), min(hi, self.b)
        if hi <= lo:
            return None
        return NamedAtom(lo, hi, self.name, self.params)

    # -- integration -------------------------------------------------------

    def integrate(self, fn: Callable, lo: float, hi: float, tol: float = 1e-9, pole: complex | None = None):
        """int_lo^hi fn(t, f(t)) dt for a vectorised, possibly complex fn.

        `pole` marks where fn itself is (nearly) singular; stretches close to
        it go through adaptive quadrature instead of fixed Gauss rules."""
        lo, hi = max(lo, self.a), min(hi, self.b)
        if hi <= lo:
            return 0.0
        c = self.center
        total = 0.0
        if hi > c:
            total = total + self._side(fn, max(lo - c, 0.0), hi - c, +1, tol, pole)
        if lo < c:
            total = total + self._side(fn, max(c - hi, 0.0), c - lo, -1, tol, pole)
        return total

    def _side(self, fn, l: float, h: float, sign: int, tol: float, pole):
        c = self.center
        if not self.osc:
            pts = []
            if pole is not None:
                pts.append(pole.real if isinstance(pole, complex) else float(pole))
            return self._adaptive(fn, c + sign * l, c + sign * h, pts)
        s_lo = 1.0 / h
        s_hi = math.inf if l == 0 else 1.0 / l
        k0 = math.floor(s_lo / math.pi) + 1
        top = min(s_hi, (k0 + self.periods) * math.pi)
        k1 = math.ceil(top / math.pi) - 1
        brk = np.array([s_lo] + [k * math.pi for k in range(k0, k1 + 1) if s_lo < k * math.pi < top] + [top])
        near = np.zeros(len(brk) - 1, dtype=bool)
        total = 0.0
        if pole is not None:
            t_b = c + sign / brk
            t0, t1 = np.minimum(t_b[:-1], t_b[1:]), np.maximum(t_b[:-1], t_b[1:])
            pr = pole.real if isinstance(pole, complex) else float(pole)
            pi_ = abs(pole.imag) if isinstance(pole, complex) else 0.0
            dist = np.hypot(np.maximum(0.0, np.maximum(t0 - pr, pr - t1)), pi_)
            near = dist < 2.0 * (t1 - t0)
            for j in np.flatnonzero(near):
                pts = [pr] if t0[j] < pr < t1[j] else []
                total = total + self._adaptive(fn, t0[j], t1[j], pts)
        far = ~near
        v1 = self._periods(fn, brk, far, sign, 24)
        v2 = self._periods(fn, brk, far, sign, 48)
        err = 0.0
        if top < s_hi:
            # below 1/top the density is replaced by its local mean
            tau_end = 1.0 / top
            tm = c + sign * 0.5 * tau_end
            tail = fn(np.array([tm]), np.array([self.core_mean]))[0] * tau_end
            if l > 0:
                tail = tail * (1 - l * top)
            total = total + tail
            err = abs(tail) * 1e-3 + tau_end**2
        if abs(v2 - v1) > tol * (1 + abs(v2)) + err:
            raise QuadratureFailure(f"oscillatory quadrature on {self.name}: {abs(v2 - v1):.2e}")
        return total + v2

    def _periods(self, fn, brk, mask, sign, n):
        if not np.any(mask):
            return 0.0
        A, B = brk[:-1][mask, None], brk[1:][mask, None]
        x, wts = np.polynomial.legendre.leggauss(n)
        u = 0.5 * (x + 1)
        ss = 3 * u**2 - 2 * u**3
        dss = 6 * u * (1 - u) * 0.5
        sig = A + (B - A) * ss
        t = self.center + sign / sig
        vals = fn(t, self.values(t))
        jac = (B - A) * dss / sig**2
        return np.sum(vals * wts * jac)

    def _adaptive(self, fn, t0, t1, points=()):
        lo, hi = min(t0, t1), max(t0, t1)
        pts = [p for p in points if lo < p < hi] or None

        def part(g):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err = integrate.quad(g, lo, hi, points=pts, limit=400, epsabs=1e-13, epsrel=1e-11)
            if err > 1e-8 * (1 + abs(val)):
                raise QuadratureFailure(f"adaptive quadrature on {self.name}: err {err:.2e}")
            return val

        def call(t):
            arr = np.array([t])
            return fn(arr, self.values(arr))[0]

        probe = call(lo + 0.3819660112501051 * (hi - lo))
        if np.iscomplexobj(probe):
            return part(lambda t: call(t).real) + 1j * part(lambda t: call(t).imag)
        return part(call)

    def mass(self, lo: float | None = None, hi: float | None = None) -> float:
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        return float(np.real(self.integrate(lambda t, f: f, lo, hi)))

    def moment(self, k: int) -> float:
        return float(np.real(self.integrate(lambda t, f: f * t**k, self.a, self.b)))

    def cauchy(self, w, deriv: int = 0):
        w = np.asarray(w, dtype=complex)
        flat = w.ravel()
        out = np.empty(flat.shape, dtype=complex)
        a, b = self.a, self.b
        for i, wi in enumerate(flat):
            # subtract the density value nearest the pole and add it back in
            # closed form; this keeps near-axis evaluations well conditioned
            u = min(max(wi.real, a), b)
            if u == self.center:
                u = u + 1e-12 * (b - a) if u < b else u - 1e-12 * (b - a)
            f0 = float(self.values(u))
            if deriv == 0:
                g = lambda t, f, wi=wi: (f - f0) / (wi - t)
                exact = np.log(wi - a) - np.log(wi - b)
            elif deriv == 1:
                g = lambda t, f, wi=wi: -(f - f0) / (wi - t) ** 2
                exact = -(1 / (wi - b) - 1 / (wi - a))
            else:
                g = lambda t, f, wi=wi: 2 * (f - f0) / (wi - t) ** 3
                exact = 1 / (wi - b) ** 2 - 1 / (wi - a) ** 2
            out[i] = self.integrate(g, a, b, pole=complex(wi)) + f0 * exact
        return out.reshape(w.shape)

    def hilbert_pv(self, x: float):
        if x < self.a or x > self.b:
            val = self.integrate(lambda t, f: f / (x - t), self.a, self.b, pole=x)
            return float(np.real(val)), 0.0, 0.0
        if x == self.center:
            if self.even and abs((self.b - x) - (x - self.a)) < 1e-14:
                return 0.0, 0.0, 0.0
            raise Indeterminate("principal value at the oscillation centre")
        fx = float(self.values(x))

        def g(t, f):
            with np.errstate(divide="ignore", invalid="ignore"):
                out = (f - fx) / (x - t)
            return np.where(t == x, 0.0, out)

        val = float(np.real(self.integrate(g, self.a, self.b, pole=x)))
        ca = cb = 0.0
        if x == self.a:
            ca = fx
            val -= fx * math.log(self.b - x)
        elif x == self.b:
            cb = fx
            val += fx * math.log(x - self.a)
        else:
            val += fx * math.log((x - self.a) / (self.b - x))
        return val, ca, cb

    def inverse_square(self, x: float, tol: float = 1e-9) -> float:
        if x < self.a or x > self.b:
            return float(np.real(self.integrate(lambda t, f: f / (x - t) ** 2, self.a, self.b, pole=x)))
        if x == self.center:
            if self.osc and self.core_mean > tol:
                return math.inf
            raise Indeterminate("inverse-square integral at the oscillation centre")
        fx = float(self.values(x))
        if abs(fx) > tol:
            return math.inf
        eps = 1e-6 * max(1e-3, abs(x - self.center))
        fp = float((self.values(x + eps) - self.values(x - eps)) / (2 * eps))
        if abs(fp) > 1e-4:
            return math.inf

        def g(t, f):
            with np.errstate(divide="ignore", invalid="ignore"):
                out = f / (x - t) ** 2
            return np.where(t == x, 0.0, out)

        return float(np.real(self.integrate(g, self.a, self.b, pole=x)))


def cauchy_sum(atoms, w, deriv: int = 0):
    w = np.asarray(w, dtype=complex)
    total = np.zeros_like(w)
    for at in atoms:
        total = total + at.cauchy(w, deriv)
    return total
