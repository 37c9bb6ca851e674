"""Singular series, the Waring main term, and the G~(k) bound calculators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import PreconditionError
from .reports import BoundReport

__all__ = [
    "SingularSeriesTruncation",
    "GtildeReport",
    "InterpolationParams",
    "complete_exp_sum",
    "local_factor",
    "singular_series",
    "waring_main_term",
    "gtilde_classical",
    "gtilde_log",
    "gtilde_improved",
    "gtilde_report",
    "eta_interpolation",
    "min_admissible_s0",
    "wooley_reference_bound",
]

TYPO_REPAIR_NOTE = (
    "classical bound reads the printed 'k_j' as j*k and the range '2^s <= k^2' as 2^j <= k^2"
)
WOOLEY_TABLE = {5: 28, 6: 43, 7: 61}
WOOLEY_CONSTANT = 1.5407


@dataclass(frozen=True)
class SingularSeriesTruncation:
    n: int
    s: int
    k: int
    Q: int
    value: float
    tail_flag: bool
    tail: float = 0.0


@dataclass(frozen=True)
class GtildeReport:
    k: int
    bound_classical: int
    bound_log: int
    bound_improved: int
    maximizer_classical: int
    maximizer_improved: int
    notes: tuple[str, ...] = (TYPO_REPAIR_NOTE,)


@dataclass(frozen=True)
class InterpolationParams:
    s0: int
    s: int
    k: int
    a: Fraction
    eta: Fraction


def _require_int(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise PreconditionError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise PreconditionError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def _ceil(t: Fraction) -> int:
    # smallest integer no smaller than t
    return -((-t.numerator) // t.denominator)


# ---------------------------------------------------------------------------
# singular series
# ---------------------------------------------------------------------------


def complete_exp_sum(a: int, q: int, k: int) -> complex:
    """(1/q) sum_{r=1}^q e(a r^k / q), with r^k reduced mod q in integers."""
    q = _require_int("q", q, 1)
    k = _require_int("k", k, 1)
    a = _require_int("a", a, 1)
    if a > q or math.gcd(a, q) != 1:
        raise PreconditionError(f"need 1 <= a <= q and gcd(a, q) = 1, got a={a}, q={q}")
    r = np.array([pow(x, k, q) for x in range(1, q + 1)], dtype=np.int64)
    return complex(np.exp(2j * np.pi * ((a * r) % q) / q).mean())


@lru_cache(maxsize=4096)
def _local_terms(q: int, k: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Units a mod q and the values S(a, q)^s."""
    a = np.array([x for x in range(1, q + 1) if math.gcd(x, q) == 1], dtype=np.int64)
    r = np.array([pow(x, k, q) for x in range(1, q + 1)], dtype=np.int64)
    phases = (a[:, None] * r[None, :]) % q
    S = np.exp(2j * np.pi * phases / q).mean(axis=1)
    return a, S**s


def local_factor(q: int, n: int, s: int, k: int) -> complex:
    """A_q(n) = sum over units a mod q of S(a, q)^s e(-n a / q)."""
    q = _require_int("q", q, 1)
    a, Ss = _local_terms(q, k, s)
    return complex(np.sum(Ss * np.exp(-2j * np.pi * ((n * a) % q) / q)))


def singular_series(n: int, s: int, k: int, Q: int) -> SingularSeriesTruncation:
    """Truncation of the singular series to q <= Q, summed in increasing q.

    ``tail_flag`` is set when the final tenth of the q-range contributes more
    than 10^-3 of the magnitude of the total.
    """
    n = _require_int("n", n, 1)
    s = _require_int("s", s, 1)
    k = _require_int("k", k, 1)
    Q = _require_int("Q", Q, 1)
    last = max(1, Q // 10)
    total = 0j
    tail = 0j
    for q in range(1, Q + 1):
        a, Ss = _local_terms(q, k, s)
        term = complex(np.sum(Ss * np.exp(-2j * np.pi * ((n % q) * a % q) / q)))
        total += term
        if q > Q - last:
            tail += term
    if abs(total.imag) > 1e-9 * max(1.0, abs(total)):
        raise ArithmeticError(f"singular series has imaginary residue {total.imag!r}")
    flag = abs(tail) > 1e-3 * abs(total)
    return SingularSeriesTruncation(n, s, k, Q, total.real, bool(flag), tail.real)


def waring_main_term(n: int, s: int, k: int, Q: int) -> float:
    """Gamma(1+1/k)^s / Gamma(s/k) * singular_series * n^(s/k - 1)."""
    n = _require_int("n", n, 1)
    s = _require_int("s", s, 1)
    k = _require_int("k", k, 1)
    if s <= k:
        raise PreconditionError(f"main term needs s > k, got s={s}, k={k}")
    series = singular_series(n, s, k, Q).value
    log_gamma = s * math.lgamma(1 + 1 / k) - math.lgamma(s / k)
    return math.exp(log_gamma) * series * n ** (s / k - 1)


# ---------------------------------------------------------------------------
# G~(k) calculators
# ---------------------------------------------------------------------------


def _classical_terms(k: int):
    for j in range(1, k):
        if 2**j > k * k:
            break
        num = j * k - 2**j
        if num < 0:
            continue
        yield j, _ceil(Fraction(num, k + 1 - j))


def gtilde_classical(k: int) -> int:
    """k^2 + 1 - max_{1<=j<=k-1, 2^j<=k^2} ceil((jk - 2^j)/(k+1-j))."""
    k = _require_int("k", k, 3)
    return k * k + 1 - max(v for _, v in _classical_terms(k))


def gtilde_log(k: int) -> int:
    """k^2 + 1 - floor(log k / log 2)."""
    k = _require_int("k", k, 3)
    return k * k + 1 - (k.bit_length() - 1)


def _improved_terms(k: int):
    for s in range(1, k + 1):
        t = Fraction(s * (k - s - 1), k - s + 1)
        if t < 0:
            continue
        yield s, _ceil(t)


def gtilde_improved(k: int) -> int:
    """k^2 + 1 - max_{1<=s<=k} ceil(s(k-s-1)/(k-s+1))."""
    k = _require_int("k", k, 3)
    return k * k + 1 - max(v for _, v in _improved_terms(k))


def gtilde_report(k: int) -> GtildeReport:
    k = _require_int("k", k, 3)
    j_best, c_best = max(_classical_terms(k), key=lambda jv: (jv[1], -jv[0]))
    s_best, i_best = max(_improved_terms(k), key=lambda sv: (sv[1], -sv[0]))
    return GtildeReport(
        k=k,
        bound_classical=k * k + 1 - c_best,
        bound_log=gtilde_log(k),
        bound_improved=k * k + 1 - i_best,
        maximizer_classical=j_best,
        maximizer_improved=s_best,
    )


def eta_interpolation(s0: int, s: int, k: int) -> InterpolationParams:
    """a = (k(k+1) - s0)/(k(k+1) - s(s+1)) and eta = (1-a)(k+1) + a s."""
    k = _require_int("k", k, 2)
    s = _require_int("s", s, 1)
    s0 = _require_int("s0", s0, 1)
    if s >= k:
        raise PreconditionError(f"need s < k, got s={s}, k={k}")
    if not s * (s + 1) <= s0 <= k * (k + 1):
        raise PreconditionError(f"need s(s+1) <= s0 <= k(k+1), got s0={s0}")
    a = Fraction(k * (k + 1) - s0, k * (k + 1) - s * (s + 1))
    eta = (1 - a) * (k + 1) + a * s
    return InterpolationParams(s0, s, k, a, eta)


def min_admissible_s0(s: int, k: int) -> int:
    """Least integer s0 in [s(s+1), k(k+1)] with s0 > k^2 - s(k-s-1)/(k+1-s)."""
    k = _require_int("k", k, 2)
    s = _require_int("s", s, 1)
    if s >= k:
        raise PreconditionError(f"need s < k, got s={s}, k={k}")
    bound = k * k - Fraction(s * (k - s - 1), k + 1 - s)
    least = math.floor(bound) + 1
    s0 = max(least, s * (s + 1))
    if s0 > k * (k + 1):
        raise PreconditionError(f"no admissible s0 in [{s * (s + 1)}, {k * (k + 1)}]")
    return s0


def wooley_reference_bound(k: int) -> BoundReport:
    """Comparison line 1.5407 k^2 (o(1) term unknown), plus tabulated values for k = 5, 6, 7."""
    k = _require_int("k", k, 5)
    tabulated = WOOLEY_TABLE.get(k)
    return BoundReport(
        value=float(tabulated) if tabulated is not None else WOOLEY_CONSTANT * k * k,
        formula="(1.5407... + o(1)) k^2",
        params={"k": k},
        extras={"asymptotic": WOOLEY_CONSTANT * k * k, "tabulated": tabulated},
        notes=("comparison only: the o(1) term is unknown, so the line is not a rigorous bound",),
        approximate=tabulated is None,
    )
