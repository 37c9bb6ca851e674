"""Exact solution counting for Vinogradov systems, Hua moments and Waring sums.

The workhorse is a meet-in-the-middle engine: for an s-tuple of integers in
[1, N] it computes the vector of power sums (one entry per exponent), builds
the multiplicity of every vector over all ordered s-tuples, and returns the
sum of squared multiplicities.  Only non-decreasing tuples are enumerated;
each is weighted by the number of its distinct permutations, which is exact
because power sums are symmetric.

Keys are compared as full integer vectors.  When the vector fits a
mixed-radix encoding below 2**63 it is packed into one int64 (an injective
map, so no collisions are possible); otherwise rows of int64 columns are
sorted lexicographically; past int64 range a dictionary keyed by Python
integer tuples is used.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Integral, Rational, Real
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InstanceTooLarge, InsufficientPoints, PreconditionError
from .reports import BoundReport

__all__ = [
    "DEFAULT_BUDGET_BYTES",
    "BRUTEFORCE_LIMIT",
    "VinogradovInstance",
    "PowerSumKey",
    "GrowthSeries",
    "GuardedCount",
    "resolve_budget",
    "power_sum_multiplicities",
    "count_vinogradov_bruteforce",
    "count_vinogradov",
    "count_hua_moment",
    "count_waring_representations",
    "count_near_solutions",
    "conjectured_exponent",
    "classical_exponent_bound",
    "asymptotic_threshold",
    "fit_growth_exponent",
]

DEFAULT_BUDGET_BYTES = 2 * 1024**3
BRUTEFORCE_LIMIT = 10**9
NEAR_SOLUTION_GUARD = 2.0**-40

_INT64_LIMIT = 2**63 - 1
_CHUNK_ROWS = 1 << 20
_PAIR_BLOCK = 1 << 22


def resolve_budget(budget: int | None = None) -> int:
    """Memory budget in bytes: explicit value, else ``VLAB_BUDGET_BYTES``, else 2 GiB."""
    if budget is not None:
        budget = int(budget)
    else:
        env = os.environ.get("VLAB_BUDGET_BYTES")
        budget = int(env) if env else DEFAULT_BUDGET_BYTES
    if budget <= 0:
        raise PreconditionError(f"memory budget must be positive, got {budget}")
    return budget


def _check_positive_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise PreconditionError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < 1:
        raise PreconditionError(f"{name} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class VinogradovInstance:
    """Parameters (k, s, N) of the system sum n_i^j = sum n_{s+i}^j, 1 <= j <= k."""

    k: int
    s: int
    N: int

    def __post_init__(self):
        for name in ("k", "s", "N"):
            object.__setattr__(self, name, _check_positive_int(name, getattr(self, name)))

    @property
    def powers(self) -> tuple[int, ...]:
        return tuple(range(1, self.k + 1))

    def estimated_table_bytes(self) -> int:
        return _estimate_bytes(self.N, self.s, self.powers)


@dataclass(frozen=True)
class PowerSumKey:
    """Exact power-sum vector (sum n_i, sum n_i^2, ..., sum n_i^k) of a tuple."""

    sums: tuple[int, ...]

    @classmethod
    def of(cls, values: Iterable[int], k: int) -> "PowerSumKey":
        values = [int(v) for v in values]
        return cls(tuple(sum(v**j for v in values) for j in range(1, k + 1)))


@dataclass(frozen=True)
class GrowthSeries:
    """Counts indexed by N with the least-squares slope of log(count) vs log(N)."""

    points: tuple[tuple[int, int], ...]
    fitted_slope: float | None = field(init=False, default=None)
    residual: float | None = field(init=False, default=None)

    def __post_init__(self):
        pts = tuple((int(n), int(c)) for n, c in self.points)
        for (n0, _), (n1, _) in zip(pts, pts[1:]):
            if n1 <= n0:
                raise PreconditionError("growth series points must be strictly increasing in N")
        object.__setattr__(self, "points", pts)
        if len(pts) >= 3 and all(c > 0 for _, c in pts):
            slope, residual = _loglog_fit(pts)
            object.__setattr__(self, "fitted_slope", slope)
            object.__setattr__(self, "residual", residual)


class GuardedCount(int):
    """An exact count that also records how many tuples sat inside a float guard band.

    ``boundary`` counts tuples whose classification could change if every
    floating comparison moved by at most ``guard_band``.
    """

    def __new__(cls, value: int, guard_band: float = 0.0, boundary: int = 0, exact: bool = True):
        obj = super().__new__(cls, value)
        obj.guard_band = guard_band
        obj.boundary = boundary
        obj.exact = exact
        return obj

    def __repr__(self):
        return (
            f"GuardedCount({int(self)}, guard_band={self.guard_band!r}, "
            f"boundary={self.boundary}, exact={self.exact})"
        )


# ---------------------------------------------------------------------------
# meet-in-the-middle engine
# ---------------------------------------------------------------------------


def _nondecreasing(lo: int, hi: int, r: int) -> np.ndarray:
    """All non-decreasing r-tuples with entries in [lo, hi], one per row."""
    if r == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if r == 1:
        return np.arange(lo, hi + 1, dtype=np.int64)[:, None]
    if r == 2:
        i, j = np.triu_indices(hi - lo + 1)
        return np.stack([i + lo, j + lo], axis=1).astype(np.int64)
    blocks = []
    for v in range(lo, hi + 1):
        rest = _nondecreasing(v, hi, r - 1)
        head = np.full((rest.shape[0], 1), v, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def _permutation_counts(rows: np.ndarray) -> np.ndarray:
    """Number of distinct orderings of each sorted row: s! / prod(multiplicity!)."""
    n, s = rows.shape
    run = np.ones(n, dtype=np.int64)
    denom = np.ones(n, dtype=np.int64)
    for c in range(1, s):
        run = np.where(rows[:, c] == rows[:, c - 1], run + 1, 1)
        denom *= run
    return math.factorial(s) // denom


def _key_mode(N: int, s: int, powers: Sequence[int]) -> tuple[str, list[int]]:
    radices = [s * N**p - s + 1 for p in powers]
    if math.prod(radices) - 1 <= _INT64_LIMIT:
        strides, acc = [], 1
        for r in radices:
            strides.append(acc)
            acc *= r
        return "packed", strides
    if s * N ** max(powers) <= _INT64_LIMIT:
        return "columns", []
    return "python", []


def _estimate_bytes(N: int, s: int, powers: Sequence[int]) -> int:
    rows = math.comb(N + s - 1, s)
    mode, _ = _key_mode(N, s, powers)
    if mode == "packed":
        per_row = 8 + 8
    elif mode == "columns":
        per_row = 8 * len(powers) + 8
    else:
        per_row = 120 + 40 * len(powers)
    # sort keys + reduced copy + merged copy
    return 3 * per_row * rows


def _power_columns(rows: np.ndarray, powers: Sequence[int]) -> list[np.ndarray]:
    cols = []
    for p in powers:
        cols.append((rows**p).sum(axis=1))
    return cols


def _reduce_packed(keys: np.ndarray, weights: np.ndarray):
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    weights = weights[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    return keys[starts], np.add.reduceat(weights, starts)


def _reduce_columns(keys: np.ndarray, weights: np.ndarray):
    order = np.lexsort(keys.T[::-1])
    keys = keys[order]
    weights = weights[order]
    diff = np.any(keys[1:] != keys[:-1], axis=1)
    starts = np.flatnonzero(np.r_[True, diff])
    return keys[starts], np.add.reduceat(weights, starts)


def _chunk_bounds(N: int, s: int) -> list[tuple[int, int]]:
    """Group consecutive values of the smallest entry n_1 into chunks of ~_CHUNK_ROWS rows."""
    bounds, lo, acc = [], 1, 0
    for a in range(1, N + 1):
        acc += math.comb(N - a + s - 1, s - 1)
        if acc >= _CHUNK_ROWS:
            bounds.append((lo, a))
            lo, acc = a + 1, 0
    if lo <= N:
        bounds.append((lo, N))
    return bounds


def _chunk_rows(a_lo: int, a_hi: int, N: int, s: int) -> np.ndarray:
    blocks = []
    for a in range(a_lo, a_hi + 1):
        rest = _nondecreasing(a, N, s - 1)
        head = np.full((rest.shape[0], 1), a, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def power_sum_multiplicities(
    N: int,
    s: int,
    powers: Sequence[int],
    *,
    budget: int | None = None,
    workers: int = 1,
):
    """Multiplicity map of the power-sum vectors of all ordered s-tuples in [1, N]^s.

    Returns ``(mode, keys, counts)``.  ``counts[i]`` is the number of ordered
    tuples whose key is ``keys[i]``; the key layout depends on ``mode``
    ("packed", "columns" or "python").  Raises :class:`InstanceTooLarge` when
    the estimated table exceeds the memory budget.
    """
    N = _check_positive_int("N", N)
    s = _check_positive_int("s", s)
    powers = tuple(_check_positive_int("power", p) for p in powers)
    if not powers:
        raise PreconditionError("at least one exponent is required")
    if s > 20:
        raise PreconditionError("s > 20 overflows the int64 permutation weights")
    budget = resolve_budget(budget)
    need = _estimate_bytes(N, s, powers)
    if need > budget:
        raise InstanceTooLarge(
            f"multiplicity table for N={N}, s={s}, powers={powers} needs ~{need} bytes "
            f"(budget {budget})",
            required=need,
            budget=budget,
        )
    mode, strides = _key_mode(N, s, powers)

    if mode == "python":
        table: dict[tuple[int, ...], int] = {}
        for a_lo, a_hi in _chunk_bounds(N, s):
            rows = _chunk_rows(a_lo, a_hi, N, s)
            weights = _permutation_counts(rows)
            for row, w in zip(rows.tolist(), weights.tolist()):
                key = tuple(sum(v**p for v in row) for p in powers)
                table[key] = table.get(key, 0) + w
        keys = sorted(table)
        return mode, keys, [table[k] for k in keys]

    def work(bounds):
        rows = _chunk_rows(bounds[0], bounds[1], N, s)
        weights = _permutation_counts(rows)
        cols = _power_columns(rows, powers)
        if mode == "packed":
            key = np.zeros(rows.shape[0], dtype=np.int64)
            for col, stride in zip(cols, strides):
                key += (col - s) * stride
            return _reduce_packed(key, weights)
        return _reduce_columns(np.stack(cols, axis=1), weights)

    chunks = _chunk_bounds(N, s)
    if workers and workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]

    if len(parts) == 1:
        keys, counts = parts[0]
    else:
        keys = np.concatenate([p[0] for p in parts])
        counts = np.concatenate([p[1] for p in parts])
        reducer = _reduce_packed if mode == "packed" else _reduce_columns
        keys, counts = reducer(keys, counts)
    return mode, keys, counts


def _sum_of_squares(counts, total: int) -> int:
    if isinstance(counts, list):
        return sum(c * c for c in counts)
    # sum c^2 <= (sum c) * max c <= total^2
    if total * total <= _INT64_LIMIT:
        return int(np.dot(counts, counts))
    big = counts.astype(object)
    return int(np.dot(big, big))


def _meet_in_the_middle(N: int, s: int, powers: Sequence[int], budget, workers) -> int:
    _, _, counts = power_sum_multiplicities(N, s, powers, budget=budget, workers=workers)
    return _sum_of_squares(counts, N**s)


# ---------------------------------------------------------------------------
# public counting operations
# ---------------------------------------------------------------------------


def _ordered_power_sums(values: Sequence, s: int, powers: Sequence[int], dtype) -> np.ndarray:
    """Power-sum vectors of every ordered s-tuple drawn from ``values`` (row-major order)."""
    base = np.array(values, dtype=dtype)
    n = len(values)
    idx = np.indices((n,) * s).reshape(s, -1)
    out = np.empty((idx.shape[1], len(powers)), dtype=dtype)
    for c, p in enumerate(powers):
        col = base[idx[0]] ** p
        for i in range(1, s):
            col = col + base[idx[i]] ** p
        out[:, c] = col
    return out


def _count_pairs(left: np.ndarray, right: np.ndarray, predicate) -> int:
    """Count (i, j) with predicate(left[i] - right[j]) true, in row blocks."""
    step = max(1, _PAIR_BLOCK // max(1, right.shape[0] * right.shape[1]))
    total = 0
    for start in range(0, left.shape[0], step):
        block = left[start : start + step]
        diff = block[:, None, :] - right[None, :, :]
        total += int(np.count_nonzero(predicate(diff)))
    return total


def _bruteforce(N: int, s: int, powers: Sequence[int]) -> int:
    if N ** (2 * s) > BRUTEFORCE_LIMIT:
        raise InstanceTooLarge(
            f"brute force needs N^(2s) = {N ** (2 * s)} > {BRUTEFORCE_LIMIT} tuples",
            required=N ** (2 * s),
            budget=BRUTEFORCE_LIMIT,
        )
    dtype = np.int64 if s * N ** max(powers) <= _INT64_LIMIT // 2 else object
    sums = _ordered_power_sums(list(range(1, N + 1)), s, powers, dtype)
    return _count_pairs(sums, sums, lambda d: np.all(d == 0, axis=2))


def count_vinogradov_bruteforce(k: int, s: int, N: int) -> int:
    """J_{s,k}(N) by comparing the power sums of every pair of ordered s-tuples.

    Used as an oracle; refuses instances with N**(2s) above 10**9.
    """
    inst = VinogradovInstance(k, s, N)
    return _bruteforce(inst.N, inst.s, inst.powers)


def count_vinogradov(
    k: int, s: int, N: int, *, budget: int | None = None, workers: int = 1
) -> int:
    """Exact J_{s,k}(N): the number of 2s-tuples in [1, N] solving the Vinogradov system.

    >>> count_vinogradov(2, 2, 3)
    15
    """
    inst = VinogradovInstance(k, s, N)
    return _meet_in_the_middle(inst.N, inst.s, inst.powers, budget, workers)


def count_hua_moment(
    k: int, m: int, N: int, *, budget: int | None = None, workers: int = 1
) -> int:
    """Exact value of the integral of |sum_{n<=N} e(n^k x)|^(2m) over [0, 1].

    Equal to the number of solutions of n_1^k + ... + n_m^k = n_{m+1}^k + ... + n_{2m}^k.
    """
    k = _check_positive_int("k", k)
    m = _check_positive_int("m", m)
    N = _check_positive_int("N", N)
    return _meet_in_the_middle(N, m, (k,), budget, workers)


@lru_cache(maxsize=None)
def _representations(remaining: int, terms: int, k: int) -> int:
    if terms == 1:
        root = _integer_root(remaining, k)
        return 1 if root is not None else 0
    total = 0
    x = 1
    while True:
        xk = x**k
        # the other terms contribute at least terms - 1
        if xk > remaining - (terms - 1):
            break
        total += _representations(remaining - xk, terms - 1, k)
        x += 1
    return total


def _integer_root(n: int, k: int) -> int | None:
    if n < 1:
        return None
    if k == 1:
        return n
    if k == 2:
        r = math.isqrt(n)
    else:
        r = round(n ** (1.0 / k))
        while r**k > n:
            r -= 1
        while (r + 1) ** k <= n:
            r += 1
    return r if r**k == n else None


def count_waring_representations(n: int, s: int, k: int) -> int:
    """Number of ordered s-tuples of positive integers with x_1^k + ... + x_s^k = n."""
    n = _check_positive_int("n", n)
    s = _check_positive_int("s", s)
    k = _check_positive_int("k", k)
    return _representations(n, s, k)


def _validate_near_points(t: Sequence) -> None:
    N = len(t)
    for n, tn in enumerate(t, start=1):
        if isinstance(tn, Rational):
            ok = Fraction(n - 1, N) < Fraction(tn) <= Fraction(n, N)
        else:
            # floats are checked against the rounded endpoints so that t_n = n/N passes
            ok = (n - 1) / N < float(tn) <= n / N
        if not ok:
            raise PreconditionError(
                f"t_{n} = {tn!r} must satisfy (n-1)/N < t_n < n/N or t_n = n/N"
            )


def count_near_solutions(t: Sequence, s: int, k: int, threshold) -> GuardedCount:
    """Count 2s-tuples of indices with |sum t_{n_i}^j - sum t_{n_{s+i}}^j| < threshold for 1 <= j <= k.

    Rational points (``Fraction``/``int``) are compared exactly after scaling
    to a common denominator.  If any point is a float the comparison is done
    in double precision and the number of tuples lying within
    ``NEAR_SOLUTION_GUARD`` of the threshold is reported on the result.
    """
    s = _check_positive_int("s", s)
    k = _check_positive_int("k", k)
    t = list(t)
    N = len(t)
    if N < 1:
        raise PreconditionError("at least one point t_n is required")
    if not isinstance(threshold, Real) or threshold <= 0:
        raise PreconditionError(f"threshold must be a positive real, got {threshold!r}")
    _validate_near_points(t)
    if N ** (2 * s) > BRUTEFORCE_LIMIT:
        raise InstanceTooLarge(
            f"near-solution enumeration needs N^(2s) = {N ** (2 * s)} > {BRUTEFORCE_LIMIT}",
            required=N ** (2 * s),
            budget=BRUTEFORCE_LIMIT,
        )
    powers = tuple(range(1, k + 1))

    if all(isinstance(v, Rational) for v in t):
        fracs = [Fraction(v) for v in t]
        L = math.lcm(*(f.denominator for f in fracs))
        ints = [int(f * L) for f in fracs]
        thr = Fraction(threshold)
        # integer differences d_j satisfy |d_j| / L^j < thr  <=>  |d_j| <= ceil(thr L^j) - 1
        bounds = [math.ceil(thr * L**p) - 1 for p in powers]
        if min(bounds) < 0:
            return GuardedCount(0)
        dtype = np.int64 if s * max(ints) ** k <= _INT64_LIMIT // 2 else object
        sums = _ordered_power_sums(ints, s, powers, dtype)
        cap = np.array(bounds, dtype=dtype)
        count = _count_pairs(sums, sums, lambda d: np.all(np.abs(d) <= cap, axis=2))
        return GuardedCount(count)

    sums = _ordered_power_sums([float(v) for v in t], s, powers, np.float64)
    thr = float(threshold)
    g = NEAR_SOLUTION_GUARD
    count = _count_pairs(sums, sums, lambda d: np.all(np.abs(d) < thr, axis=2))
    inner = _count_pairs(sums, sums, lambda d: np.all(np.abs(d) < thr - g, axis=2))
    outer = _count_pairs(sums, sums, lambda d: np.all(np.abs(d) < thr + g, axis=2))
    return GuardedCount(count, guard_band=g, boundary=outer - inner, exact=outer == inner)


# ---------------------------------------------------------------------------
# exponent formulas
# ---------------------------------------------------------------------------


def conjectured_exponent(s: int, k: int) -> float:
    """Exponent of the dominant term of N^s + N^(2s - k(k+1)/2)."""
    s = _check_positive_int("s", s)
    k = _check_positive_int("k", k)
    return float(max(Fraction(s), 2 * s - Fraction(k * (k + 1), 2)))


def classical_exponent_bound(s: int, k: int) -> BoundReport:
    """Vinogradov-Karatsuba-Stechkin exponent 2s - k(k+1)/2 + eta_{s,k}.

    eta_{s,k} = (k^2/2) (1 - 1/k)^floor(s/k).  The prefactor D(s,k) contains
    an unspecified absolute constant c and is reported symbolically only.
    """
    s = _check_positive_int("s", s)
    k = _check_positive_int("k", k)
    if s < k:
        raise PreconditionError(f"classical bound requires s >= k, got s={s}, k={k}")
    eta = Fraction(k * k, 2) * Fraction(k - 1, k) ** (s // k)
    value = 2 * s - Fraction(k * (k + 1), 2) + eta
    return BoundReport(
        value=float(value),
        formula="2s - k(k+1)/2 + eta, eta = (k^2/2)(1-1/k)^floor(s/k)",
        params={"s": s, "k": k},
        extras={
            "eta": float(eta),
            "eta_exact": str(eta),
            "D": f"min({k}^(c*{s * k}), {k}^(c*{k**3}))",
            "c": "unspecified absolute constant",
        },
        notes=("D(s,k) carries an unspecified constant c; no numeric value is assigned",),
    )


def asymptotic_threshold(k: int) -> float:
    """k^2 (2 log k + log log k + 5), natural logarithms."""
    if isinstance(k, bool) or not isinstance(k, Integral):
        raise PreconditionError(f"k must be an integer, got {k!r}")
    k = int(k)
    if k < 2:
        raise PreconditionError(f"log log k is undefined for k < 2, got k={k}")
    return k * k * (2 * math.log(k) + math.log(math.log(k)) + 5)


# ---------------------------------------------------------------------------
# growth fits
# ---------------------------------------------------------------------------


def _loglog_fit(points) -> tuple[float, float]:
    x = np.log(np.array([float(n) for n, _ in points]))
    y = np.log(np.array([float(c) for _, c in points]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(np.sqrt(np.mean(resid**2)))


def fit_growth_exponent(series: GrowthSeries | Iterable[tuple[int, int]]) -> float:
    """Unweighted least-squares slope of log(count) against log(N)."""
    if not isinstance(series, GrowthSeries):
        series = GrowthSeries(tuple(series))
    if len(series.points) < 3:
        raise InsufficientPoints(f"need at least 3 points, got {len(series.points)}")
    if any(c <= 0 for _, c in series.points):
        raise PreconditionError("counts must be positive to take logarithms")
    return series.fitted_slope


def growth_series(counter, Ns: Iterable[int]) -> GrowthSeries:
    """Evaluate ``counter(N)`` for each N and wrap the results in a GrowthSeries."""
    return GrowthSeries(tuple((int(n), int(counter(int(n)))) for n in Ns))
