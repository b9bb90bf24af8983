"""Finite-n interlacing particle systems: uniform Gelfand-Tsetlin patterns
with a fixed top row, their exact count, an exact top-down sampler, the
determinantal correlation kernel as an exact residue sum, and the
empirical density used to compare against the liquid-region density.

Sampling.  Given row x (length M+1), the row below is uniform over
interlacing completions, so its law is proportional to the number of
patterns it tops, i.e. to the Vandermonde prod_{i<j}(y_i - y_j).  Writing
the Vandermonde as det[q_j(y_i)] for any polynomial basis q_0..q_{M-1} and
using multilinearity, the weight of y_k = a after fixing y_1..y_{k-1} is
det of the matrix whose earlier rows are q(y_i), whose row k is q(a) and
whose later rows are interval sums S_i = sum_{y in I_i} q(y).  That is
q(a) . A^{-1} e_k up to a positive factor, and fixing y_k is a rank-one row
replacement, so A^{-1} is maintained by Sherman-Morrison updates.

Small tops (n <= EXACT_LIMIT) run this in exact rational arithmetic with
the binomial basis; larger tops use floats with an orthonormal polynomial
basis built by Arnoldi iteration on the lattice, batched over samples.
Every sample consumes one uniform draw per coordinate, rows top to bottom
and coordinates left to right, from a Philox generator keyed by
(seed, sample index).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np
from scipy import optimize

from .density import DensitySpec
from .liquid import NoConvergence, NotInLiquidRegion, forward_map, inverse_map
from .transforms import mean_integral

__all__ = [
    "EXACT_LIMIT",
    "GTPattern",
    "InadmissibleQuery",
    "DensityComparison",
    "InfeasibleRounding",
    "MixedDepth",
    "TopRow",
    "compare_density",
    "correlation",
    "empirical_density",
    "enumerate_patterns",
    "gt_count",
    "gt_sample",
    "gt_sample_batch",
    "kernel",
    "phi",
    "predicted_density",
    "read_samples_csv",
    "toprow_from_density",
    "write_samples_csv",
]

EXACT_LIMIT = 64


class InadmissibleQuery(ValueError):
    pass


class MixedDepth(ValueError):
    pass


class InfeasibleRounding(UserWarning):
    pass


@dataclass(frozen=True)
class TopRow:
    x: tuple[int, ...]
    repaired: int = 0  # coordinates moved by the greedy repair in toprow_from_density

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        object.__setattr__(self, "x", x)
        if not x:
            raise ValueError("empty top row")
        if any(a <= b for a, b in zip(x, x[1:])):
            raise ValueError("top row must be strictly decreasing")

    @property
    def n(self) -> int:
        return len(self.x)


def _top(top) -> TopRow:
    return top if isinstance(top, TopRow) else TopRow(tuple(top))


@dataclass(frozen=True)
class GTPattern:
    rows: tuple[tuple[int, ...], ...]  # rows[r - 1] = y^(r)

    @property
    def n(self) -> int:
        return len(self.rows)

    def interlaced(self) -> bool:
        for r, (lo, hi) in enumerate(zip(self.rows, self.rows[1:]), start=1):
            if len(lo) != r or len(hi) != r + 1:
                return False
            for i in range(r):
                if not hi[i] >= lo[i] > hi[i + 1]:
                    return False
        return True

    def particles(self) -> Iterator[tuple[int, int]]:
        for r, row in enumerate(self.rows, start=1):
            for u in row:
                yield (u, r)


# ---------------------------------------------------------------------------
# counting and enumeration


def gt_count(top) -> int:
    """prod_{i<j} (x_i - x_j)/(j - i), computed in exact integers."""
    x = _top(top).x
    num, den = 1, 1
    for i, j in combinations(range(len(x)), 2):
        num *= x[i] - x[j]
        den *= j - i
    q, rem = divmod(num, den)
    assert rem == 0
    return q


def _rows_below(x: Sequence[int]) -> Iterator[tuple[int, ...]]:
    ranges = [range(x[i + 1] + 1, x[i] + 1) for i in range(len(x) - 1)]

    def rec(i, acc):
        if i == len(ranges):
            yield tuple(acc)
            return
        for v in ranges[i]:
            acc.append(v)
            yield from rec(i + 1, acc)
            acc.pop()

    yield from rec(0, [])


def enumerate_patterns(top) -> Iterator[GTPattern]:
    """All patterns with the given top row (brute force; small n only)."""
    x = _top(top).x

    def rec(row):
        if len(row) == 1:
            yield (row,)
            return
        for below in _rows_below(row):
            for rest in rec(below):
                yield rest + (row,)

    for rows in rec(x):
        yield GTPattern(rows)


# ---------------------------------------------------------------------------
# exact sampler


def _adjugate(A: list[list[int]]) -> tuple[int, list[list[int]]]:
    """(det A, adj A) by fraction-free Gauss-Jordan elimination."""
    m = len(A)
    M = [list(row) + [int(i == j) for j in range(m)] for i, row in enumerate(A)]
    prev, sign = 1, 1
    for c in range(m):
        p = next(r for r in range(c, m) if M[r][c] != 0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            sign = -sign
        piv = M[c][c]
        for r in range(m):
            if r != c:
                f = M[r][c]
                M[r] = [(piv * a - f * b) // prev for a, b in zip(M[r], M[c])]
        prev = piv
    # left block is now det * I up to the row-swap sign
    det = sign * prev
    return det, [[sign * v for v in row[m:]] for row in M]


def _exact_row(x: Sequence[int], base: int, draws: Iterator[float]) -> tuple[int, ...]:
    """Row below x, in integer arithmetic: A^{-1} is carried as adj/det and
    each rank-one row replacement divides exactly by the old determinant."""
    m = len(x) - 1
    if m == 0:
        return ()

    def q(a):
        return [math.comb(a - base, j) for j in range(m)]

    def ssum(lo, hi):
        # sum_{a=lo}^{hi} C(a - base, j) = C(hi - base + 1, j + 1) - C(lo - base, j + 1)
        return [math.comb(hi - base + 1, j + 1) - math.comb(lo - base, j + 1) for j in range(m)]

    lo = [x[k + 1] + 1 for k in range(m)]
    hi = [x[k] for k in range(m)]
    rows = [ssum(lo[k], hi[k]) for k in range(m)]
    det, adj = _adjugate(rows)
    y = []
    for k in range(m):
        g = [adj[i][k] for i in range(m)]
        cand = range(lo[k], hi[k] + 1)
        w = [sum(qa * gi for qa, gi in zip(q(a), g)) for a in cand]
        if det < 0:
            w = [-v for v in w]
        u = Fraction(next(draws))
        total = sum(w)
        thresh = u * total
        acc = 0
        pick = cand[-1]
        for a, wa in zip(cand, w):
            acc += wa
            if acc > thresh:
                pick = a
                break
        y.append(pick)
        if k + 1 < m:
            new = q(pick)
            diff = [a - b for a, b in zip(new, rows[k])]
            # det' = det + diff . adj e_k;  adj' = (det' adj - g (diff adj)) / det
            ndet = det + sum(d * gi for d, gi in zip(diff, g))
            cols = range(k + 1, m)
            h = {j: sum(diff[i] * adj[i][j] for i in range(m)) for j in cols}
            for i in range(m):
                row = adj[i]
                for j in cols:
                    row[j] = (ndet * row[j] - g[i] * h[j]) // det
            det = ndet
            rows[k] = new
    return tuple(y)


def _draws(seed: int, index: int, count: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), int(index)]))
    return gen.random(count)


def _exact_sample(top: TopRow, seed: int, index: int) -> GTPattern:
    n = top.n
    draws = iter(_draws(seed, index, n * (n - 1) // 2).tolist())
    rows = [top.x]
    base = top.x[-1]
    while len(rows[-1]) > 1:
        rows.append(_exact_row(rows[-1], base, draws))
    return GTPattern(tuple(reversed(rows)))


# ---------------------------------------------------------------------------
# batched float sampler


def _float_rows(top: TopRow, draws: np.ndarray) -> list[list[tuple[int, ...]]]:
    """Batched float sampling; draws has shape (B, n(n-1)/2).

    The basis is Lagrange at one node c_i inside each interval (never on the
    lattice).  Row i of the working matrix is scaled by the node polynomial
    l(a) = prod_l (a - c_l) evaluated in log space, so it reads
    sum_{a in I_i} tau_i(a) (a - c_i)/(a - c_j) with tau_i of order one.
    That is an interlaced Cauchy-like matrix, well conditioned where the
    same matrix in a global polynomial basis is hopeless."""
    n = top.n
    B = draws.shape[0]
    cur = np.tile(np.array(top.x, dtype=np.int64), (B, 1))
    out = [[tuple(top.x)] for _ in range(B)]
    col = 0
    ar = np.arange(B)
    while cur.shape[1] > 1:
        m = cur.shape[1] - 1
        lo = cur[:, 1:] + 1
        hi = cur[:, :-1]
        c = 0.5 * (lo + hi) + 0.25  # (B, m), strictly inside (lo - 1, hi + 1)
        L = int((hi - lo).max()) + 1
        offs = np.arange(L)
        pts = lo[:, :, None] + offs  # (B, m, L)
        valid = offs[None, None, :] <= (hi - lo)[:, :, None]
        pts = np.where(valid, pts, lo[:, :, None]).astype(float)
        diff = pts[:, :, :, None] - c[:, None, None, :]  # (B, m, L, m): a - c_j
        logl = np.log(np.abs(diff)).sum(axis=-1)
        own = np.log(np.abs(pts - c[:, :, None]))
        logt = np.where(valid, logl - own, -np.inf)
        tau = np.exp(logt - logt.max(axis=2, keepdims=True))  # (B, m, L)
        cauchy = (pts - c[:, :, None])[:, :, :, None] / diff  # (a - c_i)/(a - c_j)
        rows = np.einsum("bil,bilj->bij", tau, cauchy)
        Ainv = np.linalg.inv(rows)
        y = np.empty((B, m), dtype=np.int64)
        for k in range(m):
            g = Ainv[:, :, k]
            W = tau[:, k, :] * np.matmul(cauchy[:, k, :, :], g[:, :, None])[:, :, 0]
            W = np.where(valid[:, k, :], np.maximum(W, 0.0), 0.0)
            cdf = np.cumsum(W, axis=1)
            thresh = draws[:, col] * cdf[:, -1]
            width = hi[:, k] - lo[:, k] + 1
            j = np.minimum((cdf <= thresh[:, None]).sum(axis=1), width - 1)
            pick = lo[:, k] + j
            y[:, k] = pick
            col += 1
            if k + 1 < m:
                new = cauchy[ar, k, j, :]
                den = np.einsum("bj,bj->b", new, g)
                d = new - rows[:, k, :]
                rest = Ainv[:, :, k + 1 :]
                h = np.matmul(d[:, None, :], rest)[:, 0, :]
                rest -= (g / den[:, None])[:, :, None] * h[:, None, :]
                rows[:, k, :] = new
        for b in range(B):
            out[b].append(tuple(int(v) for v in y[b]))
        cur = y
    return out


def gt_sample_batch(top, seed: int, count: int, exact: bool | None = None, chunk: int = 64) -> list[GTPattern]:
    """count samples; sample i uses the Philox stream keyed by (seed, i)."""
    top = _top(top)
    n = top.n
    exact = n <= EXACT_LIMIT if exact is None else exact
    if exact or n == 1:
        return [_exact_sample(top, seed, i) for i in range(count)]
    out = []
    # chunks keep the (B, m, m) working set cache-sized; per-sample arithmetic
    # does not depend on the chunking
    for start in range(0, count, chunk):
        draws = np.stack([_draws(seed, i, n * (n - 1) // 2) for i in range(start, min(count, start + chunk))])
        out.extend(GTPattern(tuple(reversed(r))) for r in _float_rows(top, draws))
    return out


def gt_sample(top, seed: int, index: int = 0, exact: bool | None = None) -> GTPattern:
    top = _top(top)
    exact = top.n <= EXACT_LIMIT if exact is None else exact
    if exact or top.n == 1:
        return _exact_sample(top, seed, index)
    draws = _draws(seed, index, top.n * (top.n - 1) // 2)[None, :]
    return GTPattern(tuple(reversed(_float_rows(top, draws)[0])))


# ---------------------------------------------------------------------------
# correlation kernel


def phi(r: int, s: int, u: int, v: int) -> Fraction:
    if v < u or s <= r:
        return Fraction(0)
    if s == r + 1:
        return Fraction(1)
    num = 1
    for j in range(1, s - r):
        num *= v - u + s - r - j
    return Fraction(num, math.factorial(s - r - 1))


def _check(top: TopRow, u, r):
    n = top.n
    if not (1 <= r <= n - 1):
        raise InadmissibleQuery(f"row {r} outside 1..{n - 1}")
    if u < top.x[-1] + n - r:
        raise InadmissibleQuery(f"position {u} below {top.x[-1] + n - r} on row {r}")


def kernel_tilde(top, p1, p2, extra_poles: bool = False) -> Fraction:
    """Double residue sum: z at the top-row poles enclosed, then w at the
    integer poles v+s-n..v.  With extra_poles the z-contour also encloses
    the poles u+r-n < x_i < u, whose residues vanish."""
    top = _top(top)
    x = top.x
    n = top.n
    (u, r), (v, s) = p1, p2
    ks = range(v + s - n, v + 1)
    zeros = range(u + r - n + 1, u)
    pref = Fraction(math.factorial(n - s), math.factorial(n - r - 1))
    total = Fraction(0)
    for i, xi in enumerate(x):
        if xi < u and not (extra_poles and xi > u + r - n):
            continue
        Nz = 1
        for k in zeros:
            Nz *= xi - k
        if Nz == 0:
            continue
        dz = 1
        for j, xj in enumerate(x):
            if j != i:
                dz *= xi - xj
        inner = Fraction(0)
        for k in ks:
            num = 1
            for j, xj in enumerate(x):
                if j != i:
                    num *= k - xj
            den = 1
            for mm in ks:
                if mm != k:
                    den *= k - mm
            inner += Fraction(num, den)
        total += Fraction(Nz, dz) * inner
    return pref * total


def kernel(top, p1: tuple[int, int], p2: tuple[int, int]) -> Fraction:
    """K_n((u, r), (v, s)) as an exact rational."""
    top = _top(top)
    _check(top, *p1)
    _check(top, *p2)
    (u, r), (v, s) = p1, p2
    return kernel_tilde(top, p1, p2) - phi(r, s, u, v)


def _det(M: list[list[Fraction]]) -> Fraction:
    M = [list(r) for r in M]
    m = len(M)
    d = Fraction(1)
    for c in range(m):
        p = next((r for r in range(c, m) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            d = -d
        d *= M[c][c]
        for r in range(c + 1, m):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return d


def correlation(top, points: Sequence[tuple[int, int]]) -> Fraction:
    """det[K(p_i, p_j)]: probability that all points are occupied."""
    return _det([[kernel(top, p, q) for q in points] for p in points])


# ---------------------------------------------------------------------------
# empirical density and discretisation


def empirical_density(samples: Sequence[GTPattern], n: int, chi_edges, eta_edges) -> np.ndarray:
    """Fraction of occupied lattice sites per (chi, eta) bin under
    (u, r) -> (u/n, r/n); NaN for bins without sites.  A site (u, r) counts
    when a particle could sit there, x_n + n - r <= u <= x_1."""
    if any(s.n != n for s in samples):
        raise MixedDepth("samples of different depth")
    chi_edges = np.asarray(chi_edges, dtype=float)
    eta_edges = np.asarray(eta_edges, dtype=float)
    shape = (len(chi_edges) - 1, len(eta_edges) - 1)
    counts = np.zeros(shape)
    sites = np.zeros(shape)
    site_cache: dict = {}
    for s in samples:
        pts = np.array(list(s.particles()), dtype=float)
        h, _, _ = np.histogram2d(pts[:, 0] / n, pts[:, 1] / n, bins=[chi_edges, eta_edges])
        counts += h
        top = s.rows[-1]
        if top not in site_cache:
            U = np.concatenate([np.arange(top[-1] + n - r, top[0] + 1) for r in range(1, n + 1)])
            R = np.concatenate([np.full(top[0] - top[-1] - n + r + 1, r) for r in range(1, n + 1)])
            site_cache[top], _, _ = np.histogram2d(U / n, R / n, bins=[chi_edges, eta_edges])
        sites += site_cache[top]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(sites > 0, counts / sites, np.nan)


def toprow_from_density(spec: DensitySpec, n: int) -> TopRow:
    """x_i = floor(n F^{-1}((n - i + 1/2)/n)), i.e. the site whose cell
    [k/n, (k+1)/n) holds the quantile, repaired greedily from the bottom so
    the integers are strictly decreasing."""
    a, b = spec.hull
    mass = spec.mass

    def cdf(t):
        return mean_integral(spec, a, t) / mass

    xs = []
    for i in range(1, n + 1):
        p = (n - i + 0.5) / n
        t = optimize.brentq(lambda t: cdf(t) - p, a, b, xtol=1e-13)
        xs.append(math.floor(n * t))
    repaired = 0
    for i in range(n - 2, -1, -1):
        if xs[i] <= xs[i + 1]:
            xs[i] = xs[i + 1] + 1
            repaired += 1
    if repaired:
        warnings.warn(f"{repaired} quantile sites collided and were moved up", InfeasibleRounding, stacklevel=2)
    return TopRow(tuple(xs), repaired=repaired)


@dataclass(frozen=True)
class DensityComparison:
    chi_edges: tuple[float, ...]
    eta_edges: tuple[float, ...]
    empirical: np.ndarray
    predicted: np.ndarray  # NaN where some probe point is not in the liquid region
    samples: int

    @property
    def interior(self) -> np.ndarray:
        return np.isfinite(self.predicted) & np.isfinite(self.empirical)

    @property
    def error(self) -> np.ndarray:
        return np.where(self.interior, np.abs(self.empirical - self.predicted), np.nan)

    @property
    def sup_error(self) -> float:
        e = self.error
        return float(np.nanmax(e)) if np.isfinite(e).any() else math.nan

    def rows(self):
        """(chi_lo, chi_hi, eta_lo, eta_hi, empirical, predicted, interior)"""
        for i in range(len(self.chi_edges) - 1):
            for j in range(len(self.eta_edges) - 1):
                yield (
                    self.chi_edges[i],
                    self.chi_edges[i + 1],
                    self.eta_edges[j],
                    self.eta_edges[j + 1],
                    float(self.empirical[i, j]),
                    float(self.predicted[i, j]),
                    bool(self.interior[i, j]),
                )


def predicted_density(spec: DensitySpec, chi_edges, eta_edges, sub: int = 4) -> np.ndarray:
    """Mean of rho over a sub x sub midpoint grid in each bin; a bin with any
    probe point outside the liquid region (or unresolved) gets NaN."""
    chi_edges = np.asarray(chi_edges, dtype=float)
    eta_edges = np.asarray(eta_edges, dtype=float)
    out = np.full((len(chi_edges) - 1, len(eta_edges) - 1), np.nan)
    frac = (np.arange(sub) + 0.5) / sub
    seed = None
    for i in range(len(chi_edges) - 1):
        for j in range(len(eta_edges) - 1):
            vals = []
            for fc in frac:
                c = chi_edges[i] + fc * (chi_edges[i + 1] - chi_edges[i])
                for fe in frac:
                    e = eta_edges[j] + fe * (eta_edges[j + 1] - eta_edges[j])
                    try:
                        w = forward_map(spec, c, e, seed=seed)
                    except (NotInLiquidRegion, NoConvergence):
                        vals = None
                        break
                    seed = w.w
                    vals.append(inverse_map(spec, w).rho)
                if vals is None:
                    break
            if vals is not None:
                out[i, j] = float(np.mean(vals))
    return out


def compare_density(spec: DensitySpec, samples: Sequence[GTPattern], n: int, chi_edges, eta_edges, sub: int = 4) -> DensityComparison:
    emp = empirical_density(samples, n, chi_edges, eta_edges)
    pred = predicted_density(spec, chi_edges, eta_edges, sub)
    return DensityComparison(
        chi_edges=tuple(float(v) for v in chi_edges),
        eta_edges=tuple(float(v) for v in eta_edges),
        empirical=emp,
        predicted=pred,
        samples=len(samples),
    )


def write_samples_csv(samples: Sequence[GTPattern], path_or_file) -> None:
    """Rows (sample_id, r, i, y), one per particle."""
    import csv

    def dump(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id", "r", "i", "y"])
        for sid, s in enumerate(samples):
            for r, row in enumerate(s.rows, start=1):
                for i, y in enumerate(row, start=1):
                    w.writerow([sid, r, i, y])

    if hasattr(path_or_file, "write"):
        dump(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            dump(fh)


def read_samples_csv(path_or_file) -> list[GTPattern]:
    import csv

    def load(fh):
        rows: dict[int, dict[int, dict[int, int]]] = {}
        for rec in csv.DictReader(fh):
            sid, r, i, y = (int(rec[k]) for k in ("sample_id", "r", "i", "y"))
            rows.setdefault(sid, {}).setdefault(r, {})[i] = y
        out = []
        depths = set()
        for sid in sorted(rows):
            rs = rows[sid]
            pat = GTPattern(tuple(tuple(rs[r][i] for i in sorted(rs[r])) for r in sorted(rs)))
            depths.add(pat.n)
            out.append(pat)
        if len(depths) > 1:
            raise MixedDepth(f"samples have depths {sorted(depths)}")
        return out

    if hasattr(path_or_file, "read"):
        return load(path_or_file)
    with open(path_or_file, newline="") as fh:
        return load(fh)
