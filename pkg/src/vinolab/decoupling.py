"""Numerical decoupling experiments for the moment curve t -> (t, t^2, ..., t^k).

Densities g live on a uniform midpoint grid of [0, 1].  Extension integrals
E_J g(x) = int_J g(t) e(t x_1 + ... + t^k x_k) dt use the composite midpoint
rule on that grid, so E_{[0,1]} g is exactly the sum of the E_J g over any
partition aligned with the grid.  Norms are lattice sums over a ball, weighted
by (1 + |x - c|/R)^(-100k).  That weight has effective width R/(100k), so the
default lattice spacing resolves both the wave scale (at most 1/4) and the
weight (two points per width).  The lattice is truncated where the weight's
remaining mass drops below a tolerance, and that mass is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exceptions import InstanceTooLarge, PreconditionError, ResolutionError

__all__ = [
    "Interval",
    "SampledDensity",
    "BallSpec",
    "Lattice",
    "DecouplingReport",
    "TransversalityResult",
    "partition",
    "ball_lattice",
    "default_spacing",
    "extension_operator",
    "weight_omega",
    "weighted_lp_norm",
    "decoupling_ratio",
    "decoupling_ratios",
    "decoupling_trend",
    "discrete_decoupling_check",
    "discrete_decoupling_envelope",
    "parabolic_rescale_identity",
    "frenet_subspace",
    "transversality_sample_check",
]

MIN_NODES_PER_INTERVAL = 64
MAX_SPACING = 0.25
POINTS_PER_WEIGHT_WIDTH = 2
DEFAULT_TAIL_TOL = 1e-12
MAX_LATTICE_POINTS = 4_000_000
_ELEMENTS_PER_BLOCK = 1 << 21


@dataclass(frozen=True)
class Interval:
    t0: float
    length: float

    def __post_init__(self):
        if not 0.0 <= self.t0 <= 1.0 or self.length <= 0 or self.t0 + self.length > 1.0 + 1e-12:
            raise PreconditionError(f"invalid interval [{self.t0}, {self.t0 + self.length}]")

    @property
    def end(self) -> float:
        return self.t0 + self.length


def _pieces(delta) -> int:
    frac = Fraction(delta).limit_denominator(10**6)
    if frac <= 0 or frac > 1 or frac.numerator != 1 or abs(float(frac) - float(delta)) > 1e-12:
        raise PreconditionError(f"1/delta must be a positive integer, got delta={delta!r}")
    return frac.denominator


def partition(delta) -> list[Interval]:
    """The 1/delta consecutive intervals of length delta covering [0, 1]."""
    n = _pieces(delta)
    return [Interval(i / n, 1.0 / n) for i in range(n)]


@dataclass(frozen=True, eq=False)
class SampledDensity:
    """Complex samples of g at the midpoints (i + 1/2)/M of a uniform grid of [0, 1]."""

    samples: np.ndarray
    seed: int | None = None
    label: str = "custom"

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128).ravel()
        if arr.size == 0:
            raise PreconditionError("a density needs at least one sample")
        object.__setattr__(self, "samples", arr)

    @property
    def M(self) -> int:
        return self.samples.size

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) / self.M

    @classmethod
    def constant(cls, M: int, value: complex = 1.0) -> "SampledDensity":
        return cls(np.full(M, value, dtype=np.complex128), label="const")

    @classmethod
    def gaussian(cls, M: int, seed: int) -> "SampledDensity":
        """Independent complex standard Gaussian value at every node."""
        rng = np.random.default_rng(seed)
        z = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) / math.sqrt(2)
        return cls(z, seed=seed, label="gauss")

    @classmethod
    def from_function(cls, f, M: int) -> "SampledDensity":
        t = (np.arange(M) + 0.5) / M
        return cls(np.asarray(f(t), dtype=np.complex128), label="function")

    def restricted(self, J: Interval) -> "SampledDensity":
        """Copy of g with every node outside J set to zero."""
        mask = self.node_mask(J)
        return SampledDensity(np.where(mask, self.samples, 0), seed=self.seed, label=self.label)

    def node_mask(self, J: Interval) -> np.ndarray:
        t = self.nodes
        return (t >= J.t0) & (t < J.end)


@dataclass(frozen=True)
class BallSpec:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.radius <= 0:
            raise PreconditionError(f"ball radius must be positive, got {self.radius}")

    @classmethod
    def origin(cls, k: int, radius: float) -> "BallSpec":
        return cls((0.0,) * k, radius)


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice points of spacing h around a ball centre, with the weight at each point."""

    points: np.ndarray
    weights: np.ndarray
    spacing: float
    ball: BallSpec
    truncation: float
    tail_mass: float

    @property
    def cell(self) -> float:
        return self.spacing ** self.points.shape[1]


@dataclass(frozen=True)
class DecouplingReport:
    k: int
    p: float
    delta: float
    lhs: float
    rhs: float
    ratio: float
    spacing: float
    nodes: int
    ball: BallSpec
    seed: int | None
    density: str
    lattice_points: int
    truncation: float
    weight_tail: float
    notes: tuple[str, ...] = field(default=())
    weight: str = "omega"


@dataclass(frozen=True)
class TransversalityResult:
    holds: bool
    worst_margin: float
    witness_dim: int | None
    samples: int
    notes: tuple[str, ...] = ("sampled necessary check, not a proof",)


# ---------------------------------------------------------------------------
# weights, lattices, norms
# ---------------------------------------------------------------------------


def weight_omega(x, ball: BallSpec, k: int | None = None):
    """(1 + |x - c_B| / R)^(-100k); accepts one point or an array of points (last axis = k)."""
    x = np.asarray(x, dtype=np.float64)
    if k is None:
        k = x.shape[-1]
    dist = np.linalg.norm(x - np.asarray(ball.center), axis=-1)
    w = np.exp(-100 * k * np.log1p(dist / ball.radius))
    return float(w) if np.ndim(w) == 0 else w


def _weight_tail_radius(k: int, tol: float) -> float:
    """u0 with int_{|y| > u0 R} w <= tol * int w, from (1+u)^(k-1) >= u^(k-1)."""
    alpha = 100 * k
    log_beta = math.lgamma(k) + math.lgamma(alpha - k) - math.lgamma(alpha)
    # tail / total <= (1+u0)^(k-alpha) / ((alpha-k) B(k, alpha-k))
    log_base = math.log(tol) + math.log(alpha - k) + log_beta
    return math.exp(log_base / (k - alpha)) - 1.0


def _tail_fraction(k: int, u0: float) -> float:
    alpha = 100 * k
    log_beta = math.lgamma(k) + math.lgamma(alpha - k) - math.lgamma(alpha)
    return math.exp((k - alpha) * math.log1p(u0) - math.log(alpha - k) - log_beta)


def default_spacing(k: int, radius: float, weight: str = "omega") -> float:
    """min(1/4, R / (100k * POINTS_PER_WEIGHT_WIDTH)); plain 1/4 for the indicator weight."""
    if weight == "indicator":
        return MAX_SPACING
    return min(MAX_SPACING, radius / (100 * k * POINTS_PER_WEIGHT_WIDTH))


def ball_lattice(
    ball: BallSpec,
    spacing: float | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_points: int = MAX_LATTICE_POINTS,
    weight: str = "omega",
) -> Lattice:
    """Lattice of the given spacing centred on the ball.

    ``weight="omega"`` uses (1 + |x - c|/R)^(-100k), cut at min(4R, radius
    where the weight mass ends).  ``weight="indicator"`` uses 1 on the closed
    ball and nothing outside; it is a diagnostic, not the default.
    """
    if weight not in ("omega", "indicator"):
        raise PreconditionError(f"weight must be 'omega' or 'indicator', got {weight!r}")
    k = len(ball.center)
    if spacing is None:
        spacing = default_spacing(k, ball.radius, weight)
    if spacing > MAX_SPACING:
        raise ResolutionError(f"lattice spacing {spacing} exceeds {MAX_SPACING}")
    if weight == "indicator":
        rho = ball.radius
    else:
        rho = min(4.0, _weight_tail_radius(k, tail_tol)) * ball.radius
    steps = int(math.floor(rho / spacing))
    side = 2 * steps + 1
    if side**k > max_points * 2:
        raise InstanceTooLarge(
            f"lattice with {side}^{k} candidate points exceeds {max_points}",
            required=side**k,
            budget=max_points,
        )
    axis = np.arange(-steps, steps + 1) * spacing
    grids = np.meshgrid(*([axis] * k), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=1)
    offsets = offsets[np.linalg.norm(offsets, axis=1) <= rho]
    points = offsets + np.asarray(ball.center)
    if weight == "indicator":
        return Lattice(points, np.ones(points.shape[0]), spacing, ball, rho, 0.0)
    weights = weight_omega(points, ball, k)
    return Lattice(points, np.atleast_1d(weights), spacing, ball, rho, _tail_fraction(k, rho / ball.radius))


def weighted_lp_norm(F, lattice: Lattice, p: float) -> float:
    """(sum_x |F(x)|^p w(x) h^k)^(1/p) over the lattice."""
    if p < 1:
        raise PreconditionError(f"p must be >= 1, got {p}")
    if lattice.spacing > MAX_SPACING:
        raise ResolutionError(f"lattice spacing {lattice.spacing} exceeds {MAX_SPACING}")
    F = np.asarray(F)
    return float((np.sum(np.abs(F) ** p * lattice.weights) * lattice.cell) ** (1.0 / p))


# ---------------------------------------------------------------------------
# extension operator
# ---------------------------------------------------------------------------


def _curve_powers(t: np.ndarray, k: int) -> np.ndarray:
    return np.stack([t**j for j in range(1, k + 1)], axis=1)


def extension_operator(g: SampledDensity, J: Interval, x, k: int):
    """Midpoint-rule value of int_J g(t) e(t x_1 + ... + t^k x_k) dt at one point or many."""
    if k < 2:
        raise PreconditionError(f"k must be >= 2, got {k}")
    mask = g.node_mask(J)
    if mask.sum() < MIN_NODES_PER_INTERVAL:
        raise ResolutionError(
            f"interval [{J.t0}, {J.end}) holds {int(mask.sum())} nodes, "
            f"need {MIN_NODES_PER_INTERVAL}"
        )
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != k:
        raise PreconditionError(f"points must have {k} coordinates")
    T = _curve_powers(g.nodes[mask], k)
    gw = g.samples[mask] / g.M
    out = np.empty(X.shape[0], dtype=np.complex128)
    step = max(1, _ELEMENTS_PER_BLOCK // T.shape[0])
    for start in range(0, X.shape[0], step):
        ph = X[start : start + step] @ T.T
        out[start : start + step] = np.exp(2j * np.pi * ph) @ gw
    return complex(out[0]) if single else out


def _piece_norms(densities: Sequence[SampledDensity], pieces: int, k: int, p: float, lattice: Lattice):
    """Per-density weighted p-th power sums of E_J g for every piece J and of their total.

    Returns (pieces_pp, total_pp) of shapes (ng, pieces) and (ng,).
    """
    M = densities[0].M
    m = M // pieces
    nodes = densities[0].nodes
    T = _curve_powers(nodes, k)
    G = np.stack([d.samples for d in densities], axis=1) / M  # (M, ng)
    G = G.reshape(pieces, m, len(densities))  # (J, m, ng)
    ng = len(densities)
    piece_pp = np.zeros((ng, pieces))
    total_pp = np.zeros(ng)
    step = max(1, _ELEMENTS_PER_BLOCK // M)
    for start in range(0, lattice.points.shape[0], step):
        X = lattice.points[start : start + step]
        w = lattice.weights[start : start + step]
        E = np.exp(2j * np.pi * (X @ T.T))  # (P, M)
        E = E.reshape(X.shape[0], pieces, m).transpose(1, 0, 2)  # (J, P, m)
        fields = np.matmul(E, G)  # (J, P, ng)
        piece_pp += np.einsum("jpg,p->gj", np.abs(fields) ** p, w)
        total_pp += (np.abs(fields.sum(axis=0)) ** p).T @ w
    return piece_pp * lattice.cell, total_pp * lattice.cell


def decoupling_ratios(
    densities: Sequence[SampledDensity],
    delta,
    p: float,
    k: int,
    ball: BallSpec | None = None,
    spacing: float | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
    weight: str = "omega",
) -> list[DecouplingReport]:
    """Decoupling ratios for several densities sharing one grid, one delta and one ball.

    lhs = ||E_{[0,1]} g||, rhs = (sum_J ||E_J g||^2)^(1/2), both weighted L^p
    norms over the ball.  The ball defaults to the origin with radius delta^-k.
    ``weight="indicator"`` swaps the weight for 1_B (diagnostic only).
    """
    if not densities:
        return []
    pieces = _pieces(delta)
    if k < 2:
        raise PreconditionError(f"k must be >= 2, got {k}")
    M = densities[0].M
    if any(d.M != M for d in densities):
        raise PreconditionError("all densities must share one grid")
    if M % pieces:
        raise ResolutionError(f"grid of {M} nodes is not aligned with 1/delta = {pieces} pieces")
    if M // pieces < MIN_NODES_PER_INTERVAL:
        raise ResolutionError(
            f"{M // pieces} nodes per interval, need {MIN_NODES_PER_INTERVAL} (M >= {64 * pieces})"
        )
    if ball is None:
        ball = BallSpec.origin(k, float(pieces) ** k)
    if len(ball.center) != k:
        raise PreconditionError("ball dimension must equal k")
    if ball.radius < float(pieces) ** k * (1 - 1e-12):
        raise PreconditionError(f"ball radius {ball.radius} below delta^-k = {pieces**k}")
    lattice = ball_lattice(ball, spacing, tail_tol, weight=weight)
    piece_pp, total_pp = _piece_norms(densities, pieces, k, p, lattice)
    reports = []
    for i, g in enumerate(densities):
        lhs = total_pp[i] ** (1.0 / p)
        rhs = math.sqrt(float(np.sum(piece_pp[i] ** (2.0 / p))))
        reports.append(
            DecouplingReport(
                k=k,
                p=p,
                delta=1.0 / pieces,
                lhs=float(lhs),
                rhs=rhs,
                ratio=float(lhs / rhs) if rhs > 0 else math.inf,
                spacing=lattice.spacing,
                nodes=M,
                ball=ball,
                seed=g.seed,
                density=g.label,
                lattice_points=lattice.points.shape[0],
                truncation=lattice.truncation,
                weight_tail=lattice.tail_mass,
                weight=weight,
            )
        )
    return reports


def decoupling_ratio(g: SampledDensity, delta, p: float, k: int, ball: BallSpec | None = None, **kw) -> DecouplingReport:
    """Ratio ||E g||_{L^p(w_B)} / (sum_J ||E_J g||^2_{L^p(w_B)})^(1/2); a lower estimate of K_p(delta)."""
    return decoupling_ratios([g], delta, p, k, ball, **kw)[0]


def decoupling_trend(
    densities: Sequence[SampledDensity], deltas: Sequence, p: float, k: int, **kw
) -> tuple[np.ndarray, np.ndarray]:
    """Slopes of log(ratio) against log(1/delta), one per density, and the ratio table.

    Every density must be sampled finely enough for the smallest delta.
    """
    inv = np.array([_pieces(d) for d in deltas], dtype=np.float64)
    ratios = np.array(
        [[r.ratio for r in decoupling_ratios(densities, d, p, k, **kw)] for d in deltas]
    )  # (deltas, densities)
    slopes = np.polyfit(np.log(inv), np.log(ratios), 1)[0]
    return np.atleast_1d(slopes), ratios


# ---------------------------------------------------------------------------
# discretized inequality
# ---------------------------------------------------------------------------


def discrete_decoupling_envelope(N: int, k: int, p: float, eps: float = 0.1) -> float:
    """N^eps (1 + N^((1 - k(k+1)/p)/2))."""
    return N**eps * (1 + N ** (0.5 * (1 - k * (k + 1) / p)))


def discrete_decoupling_check(a, t, p: float, k: int, R: float, spacing: float | None = None) -> float:
    """Weighted L^p average of sum_n a_n e(t_n x_1 + ... + t_n^k x_k) over B_R, divided by ||a||_2.

    The average is normalised by the total weight, so a single exponential
    has ratio 1.
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    t = np.asarray(t, dtype=np.float64).ravel()
    N = a.size
    if t.size != N or N == 0:
        raise PreconditionError("a and t must have the same positive length")
    n = np.arange(1, N + 1)
    if np.any(t <= (n - 1) / N) or np.any(t > n / N):
        raise PreconditionError("need (n-1)/N < t_n <= n/N for every n")
    if R <= N**k:
        raise PreconditionError(f"need R > N^k = {N**k}, got R={R}")
    norm_a = float(np.linalg.norm(a))
    if norm_a == 0:
        raise PreconditionError("coefficient vector must be nonzero")
    lattice = ball_lattice(BallSpec.origin(k, R), spacing)
    T = _curve_powers(t, k)
    acc = 0.0
    step = max(1, _ELEMENTS_PER_BLOCK // N)
    for start in range(0, lattice.points.shape[0], step):
        X = lattice.points[start : start + step]
        F = np.exp(2j * np.pi * (X @ T.T)) @ a
        acc += float(np.abs(F) ** p @ lattice.weights[start : start + step])
    mean = acc / float(lattice.weights.sum())
    return mean ** (1.0 / p) / norm_a


# ---------------------------------------------------------------------------
# rescaling and transversality
# ---------------------------------------------------------------------------


def parabolic_rescale_identity(t0, sigma, tprime, x):
    """Both sides of x_1 t + x_2 t^2 = x_1 t0 + x_2 t0^2 + sigma (x_1 + 2 x_2 t0) t' + sigma^2 x_2 t'^2."""
    x = np.asarray(x, dtype=np.float64)
    x1, x2 = x[..., 0], x[..., 1]
    t = t0 + sigma * tprime
    lhs = x1 * t + x2 * t * t
    rhs = x1 * t0 + x2 * t0 * t0 + sigma * (x1 + 2 * x2 * t0) * tprime + sigma * sigma * x2 * tprime * tprime
    return lhs, rhs


def frenet_subspace(t: float, d: int, k: int) -> np.ndarray:
    """Orthonormal basis (k x d) of span{gamma'(t), ..., gamma^(d)(t)} for gamma(t) = (t, ..., t^k)."""
    if not 1 <= d <= k:
        raise PreconditionError(f"need 1 <= d <= k, got d={d}, k={k}")
    D = np.zeros((k, d))
    for m in range(1, d + 1):
        for j in range(m, k + 1):
            D[j - 1, m - 1] = math.perm(j, m) * t ** (j - m)
    q, _ = np.linalg.qr(D)
    return q[:, :d]


def _orthonormal(B: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    if B.size == 0:
        return B.reshape(B.shape[0], 0)
    u, sv, _ = np.linalg.svd(B, full_matrices=False)
    return u[:, sv > tol * max(1.0, sv[0])]


def _complement(B: np.ndarray) -> np.ndarray:
    k = B.shape[0]
    if B.shape[1] == 0:
        return np.eye(k)
    u, sv, _ = np.linalg.svd(B, full_matrices=True)
    rank = int(np.sum(sv > 1e-10))
    return u[:, rank:]


def _intersection(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # V ∩ W = complement of (V^perp + W^perp)
    return _complement(_orthonormal(np.hstack([_complement(A), _complement(B)])))


def transversality_sample_check(
    subspaces: Sequence[np.ndarray], k: int, samples: int = 1000, seed: int = 0, rank_tol: float = 1e-8
) -> TransversalityResult:
    """Test (d/k) dim V <= (1/M) sum_i dim(pi_i V) on sampled and probe subspaces V.

    Random V of every dimension are drawn by orthonormalising Gaussian frames.
    Deterministic probes add each V_i, its orthogonal complement, pairwise
    intersections and the complements of pairwise sums, together with random
    subspaces of each probe.
    """
    if samples < 1000:
        raise PreconditionError(f"need at least 1000 samples, got {samples}")
    bases = [_orthonormal(np.asarray(V, dtype=np.float64).reshape(k, -1)) for V in subspaces]
    if not bases:
        raise PreconditionError("need at least one subspace")
    dims = {b.shape[1] for b in bases}
    if len(dims) != 1:
        raise PreconditionError("all subspaces must have the same dimension")
    d = dims.pop()
    M = len(bases)
    rng = np.random.default_rng(seed)

    probes = []
    for i, A in enumerate(bases):
        probes.extend([A, _complement(A)])
        for B in bases[i + 1 :]:
            probes.append(_intersection(A, B))
            probes.append(_complement(_orthonormal(np.hstack([A, B]))))
    probes = [P for P in probes if P.shape[1] > 0]
    probes.append(np.eye(k))

    candidates = list(probes)
    for P in probes:
        for m in range(1, P.shape[1]):
            candidates.append(_orthonormal(P @ rng.standard_normal((P.shape[1], m))))
    for i in range(samples):
        m = i % k + 1
        candidates.append(_orthonormal(rng.standard_normal((k, m))))

    worst, witness, holds = math.inf, None, True
    for V in candidates:
        m = V.shape[1]
        if m == 0:
            continue
        total = 0
        for U in bases:
            sv = np.linalg.svd(U.T @ V, compute_uv=False)
            total += int(np.sum(sv > rank_tol))
        margin = total / M - d * m / k
        if margin < worst:
            worst = margin
            if margin < -1e-12:
                holds, witness = False, m
    return TransversalityResult(holds, float(worst), witness, len(candidates))
