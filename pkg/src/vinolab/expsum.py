"""Weyl sums, rational approximation, arc classification and the trapezoidal kernel.

Phases n x_1 + n^2 x_2 + ... + n^k x_k are reduced modulo 1 exactly: each
coordinate is stored as a 64-bit fixed-point fraction X_j / 2**64 and the
phase numerator sum_j (n^j mod 2**64) X_j is accumulated in wrapping uint64
arithmetic.  For coordinates at or above 2**-12 the fixed-point value equals
the float exactly, so no precision is lost to the size of n^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral
from typing import Iterator, Sequence

import numpy as np

from .exceptions import PreconditionError

__all__ = [
    "FrequencyPoint",
    "RationalApprox",
    "ArcLabel",
    "TrapezoidKernel",
    "MinorArcMoment",
    "eval_weyl_sum",
    "eval_power_sum",
    "power_sum_grid",
    "power_sum_moment",
    "convergents",
    "rational_approx",
    "weyl_envelope",
    "vinogradov_envelope",
    "classify_arc",
    "minor_arc_mask",
    "minor_arc_moment",
    "kernel_coeff",
    "kernel_l1_norm",
]

_TWO64 = 1 << 64
_SCALE = 2.0**-64
_BLOCK = 1 << 16


def _reduce(c: float) -> float:
    c = float(c) % 1.0
    # (-tiny) % 1.0 rounds to 1.0
    return 0.0 if c >= 1.0 else c


@dataclass(frozen=True)
class FrequencyPoint:
    """A point of the torus [0, 1)^k; coordinates are reduced mod 1 on construction."""

    coords: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(_reduce(c) for c in self.coords))

    @property
    def k(self) -> int:
        return len(self.coords)

    def fixed_point(self) -> list[int]:
        return [round(Fraction(c) * _TWO64) % _TWO64 for c in self.coords]


@dataclass(frozen=True)
class RationalApprox:
    a: int
    q: int
    err: float


@dataclass(frozen=True)
class ArcLabel:
    label: str
    witness: RationalApprox | None = None

    @property
    def is_major(self) -> bool:
        return self.label == "Major"


@dataclass(frozen=True)
class TrapezoidKernel:
    """Kernel on R/Z whose Fourier coefficients form a trapezoid: 1 on |n| <= r, 0 on |n| >= 2r."""

    r: int

    def __post_init__(self):
        if isinstance(self.r, bool) or not isinstance(self.r, Integral) or self.r < 1:
            raise PreconditionError(f"r must be a positive integer, got {self.r!r}")

    def coeff(self, n: int) -> float:
        return kernel_coeff(self.r, n)

    def values(self, grid: int) -> np.ndarray:
        """K_r(i / grid) for i = 0..grid-1."""
        if grid < 4 * self.r:
            raise PreconditionError(f"grid must be >= 4r = {4 * self.r} to avoid aliasing")
        c = np.zeros(grid)
        for n in range(-2 * self.r + 1, 2 * self.r):
            c[n % grid] = kernel_coeff(self.r, n)
        return (grid * np.fft.ifft(c)).real


@dataclass(frozen=True)
class MinorArcMoment:
    value: float
    full_moment: float
    minor_fraction: float
    grid: int
    exact_full: bool
    notes: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# exponential sums
# ---------------------------------------------------------------------------


def eval_weyl_sum(x: FrequencyPoint | Sequence[float], N: int, k: int | None = None) -> complex:
    """f_k(x, N) = sum_{n=1}^N e(n x_1 + n^2 x_2 + ... + n^k x_k)."""
    if not isinstance(x, FrequencyPoint):
        x = FrequencyPoint(tuple(x))
    if k is None:
        k = x.k
    if k != x.k:
        raise PreconditionError(f"dimension mismatch: point has {x.k} coordinates, k={k}")
    if N < 1:
        raise PreconditionError(f"N must be >= 1, got {N}")
    fixed = [np.uint64(v) for v in x.fixed_point()]
    total = 0j
    for start in range(1, N + 1, _BLOCK):
        n = np.arange(start, min(N, start + _BLOCK - 1) + 1, dtype=np.uint64)
        acc = np.zeros_like(n)
        npow = np.ones_like(n)
        for xj in fixed:
            npow = npow * n
            acc = acc + npow * xj
        phase = acc.astype(np.float64) * _SCALE
        total += complex(np.exp(2j * np.pi * phase).sum())
    return total


def eval_power_sum(x: float, N: int, k: int) -> complex:
    """S(x) = sum_{n=1}^N e(n^k x)."""
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    coords = [0.0] * (k - 1) + [x]
    return eval_weyl_sum(FrequencyPoint(tuple(coords)), N, k)


def power_sum_grid(N: int, k: int, grid: int) -> np.ndarray:
    """S(i / grid) for i = 0..grid-1, with exact integer phases, via one inverse FFT."""
    if N < 1 or k < 1 or grid < 1:
        raise PreconditionError("N, k and grid must be positive")
    residues = np.array([pow(n, k, grid) for n in range(1, N + 1)], dtype=np.int64)
    hist = np.bincount(residues, minlength=grid).astype(np.float64)
    return grid * np.fft.ifft(hist)


def power_sum_moment(N: int, k: int, p: float, grid: int) -> float:
    """Mean of |S|^p over ``grid`` uniform nodes; exact for even p once grid > p N^k."""
    S = power_sum_grid(N, k, grid)
    return float(np.mean(np.abs(S) ** p))


# ---------------------------------------------------------------------------
# rational approximation and arcs
# ---------------------------------------------------------------------------


def convergents(x) -> Iterator[tuple[int, int]]:
    """Continued-fraction convergents (p, q) of the exact value of ``x``."""
    frac = Fraction(x)
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    num, den = frac.numerator, frac.denominator
    while den:
        a, rem = divmod(num, den)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        yield h, k
        num, den = den, rem


def rational_approx(x: float, Qmax: int) -> RationalApprox:
    """Last continued-fraction convergent a/q of x mod 1 with q <= Qmax."""
    if isinstance(Qmax, bool) or not isinstance(Qmax, Integral) or Qmax < 1:
        raise PreconditionError(f"Qmax must be a positive integer, got {Qmax!r}")
    xr = Fraction(_reduce(x)) if not isinstance(x, Fraction) else x % 1
    best = (0, 1)
    for a, q in convergents(xr):
        if q > Qmax:
            break
        best = (a, q)
    a, q = best
    return RationalApprox(a, q, float(abs(xr - Fraction(a, q))))


def weyl_envelope(q: int, N: int, k: int) -> float:
    """N (1/q + 1/N + q/N^k)^(2^(1-k)), the Weyl bound without its N^eps factor."""
    if k < 1 or q < 1 or N < 1:
        raise PreconditionError("q, N and k must be positive")
    return N * (1.0 / q + 1.0 / N + q / float(N) ** k) ** (2.0 ** (1 - k))


def vinogradov_envelope(q: int, N: int, j: int, k: int) -> float:
    """N (1/q + 1/N + q/N^j)^(1/(k(k-1))), valid for k >= 3 and 2 <= j <= k."""
    if k < 3:
        raise PreconditionError(f"the Vinogradov-method envelope needs k >= 3, got k={k}")
    if not 2 <= j <= k:
        raise PreconditionError(f"j must lie in [2, k], got j={j}, k={k}")
    if q < 1 or N < 1:
        raise PreconditionError("q and N must be positive")
    return N * (1.0 / q + 1.0 / N + q / float(N) ** j) ** (1.0 / (k * (k - 1)))


def _arc_parameters(N: int, k: int) -> tuple[int, Fraction]:
    if N <= 2 * k:
        raise PreconditionError(f"arc classification needs N > 2k, got N={N}, k={k}")
    return N // (2 * k), Fraction(1, 2 * k * N ** (k - 1))


def classify_arc(x: float, N: int, k: int) -> ArcLabel:
    """Major if some coprime (a, q) has q <= N/(2k) and |qx - a| <= N^(1-k)/(2k), else Minor.

    Convergents are scanned first.  Any (a, q) with |qx - a| < 1/(2q) is a
    convergent, so the scan is complete whenever the tolerance is below
    1/(2 qmax); otherwise every denominator up to qmax is tried directly.
    """
    qmax, tol = _arc_parameters(N, k)
    xr = Fraction(_reduce(x))
    for a, q in convergents(xr):
        if q > qmax:
            break
        if abs(q * xr - a) <= tol:
            return ArcLabel("Major", RationalApprox(a, q, float(abs(xr - Fraction(a, q)))))
    if tol >= Fraction(1, 2 * qmax):
        for q in range(1, qmax + 1):
            a = round(q * xr)
            if abs(q * xr - a) <= tol:
                g = math.gcd(a, q)
                a, q = a // g, q // g
                return ArcLabel("Major", RationalApprox(a, q, float(abs(xr - Fraction(a, q)))))
    return ArcLabel("Minor")


def minor_arc_mask(N: int, k: int, grid: int) -> np.ndarray:
    """Boolean mask of the nodes i/grid that are minor, computed in exact integers.

    For N < 2k no denominator is admissible and every node is minor.
    """
    if N < 2 * k:
        return np.ones(grid, dtype=bool)
    qmax, tol = N // (2 * k), Fraction(1, 2 * k * N ** (k - 1))
    scale = tol.denominator  # tol = 1 / scale
    i = np.arange(grid, dtype=np.int64)
    major = np.zeros(grid, dtype=bool)
    for q in range(1, qmax + 1):
        r = (q * i) % grid
        dist = np.minimum(r, grid - r)  # grid * |q i/grid - a| at the nearest a
        if scale > grid:
            major |= dist == 0
        else:
            # |q x - a| <= 1/scale  <=>  dist * scale <= grid
            major |= dist * scale <= grid
    return ~major


def minor_arc_moment(N: int, k: int, p: int, grid: int) -> MinorArcMoment:
    """Riemann-sum estimate of the integral of |S|^p over the minor arcs.

    The full-circle mean is exact when grid >= 2 N^k p; otherwise the result is
    flagged approximate in ``notes``.
    """
    if p < 2 or p % 2:
        raise PreconditionError(f"p must be a positive even integer, got {p}")
    S = np.abs(power_sum_grid(N, k, grid)) ** p
    minor = minor_arc_mask(N, k, grid)
    exact = grid >= 2 * N**k * p
    notes = () if exact else (f"grid {grid} < 2 N^k p = {2 * N**k * p}: quadrature approximate",)
    return MinorArcMoment(
        value=float(S[minor].sum() / grid),
        full_moment=float(S.mean()),
        minor_fraction=float(minor.mean()),
        grid=grid,
        exact_full=exact,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# trapezoidal kernel
# ---------------------------------------------------------------------------


def kernel_coeff(r: int, n: int) -> float:
    """Fourier coefficient of K_r at n: 1 on |n| <= r, (2r - |n|)/r on the ramp, 0 beyond 2r."""
    if r < 1:
        raise PreconditionError(f"r must be >= 1, got {r}")
    m = abs(n)
    if m <= r:
        return 1.0
    if m >= 2 * r:
        return 0.0
    return (2 * r - m) / r


def kernel_l1_norm(r: int, grid: int) -> float:
    """Riemann-sum estimate of the integral of |K_r| over [0, 1)."""
    if grid < 16 * r:
        raise PreconditionError(f"grid must be >= 16 r = {16 * r}")
    return float(np.mean(np.abs(TrapezoidKernel(r).values(grid))))
