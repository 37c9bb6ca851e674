import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vinolab.decoupling import (
    BallSpec,
    Interval,
    SampledDensity,
    ball_lattice,
    decoupling_ratio,
    decoupling_ratios,
    decoupling_trend,
    default_spacing,
    discrete_decoupling_check,
    discrete_decoupling_envelope,
    extension_operator,
    frenet_subspace,
    parabolic_rescale_identity,
    partition,
    transversality_sample_check,
    weight_omega,
    weighted_lp_norm,
)
from vinolab.exceptions import PreconditionError, ResolutionError

UNIT = Interval(0.0, 1.0)


def same_span(A, B):
    # orthogonal projectors agree
    return np.allclose(A @ np.linalg.pinv(A), B @ np.linalg.pinv(B), atol=1e-10)


class TestPartition:
    def test_exact_pieces(self):
        parts = partition(Fraction(1, 8))
        assert len(parts) == 8
        assert parts[0].t0 == 0 and parts[-1].end == pytest.approx(1.0)
        assert all(J.length == pytest.approx(1 / 8) for J in parts)

    def test_float_delta(self):
        assert len(partition(0.25)) == 4

    def test_non_integral_rejected(self):
        with pytest.raises(PreconditionError):
            partition(0.3)

    def test_interval_bounds(self):
        with pytest.raises(PreconditionError):
            Interval(0.8, 0.5)


class TestWeight:
    def test_examples(self):
        ball = BallSpec((1.0, -2.0), 5.0)
        assert weight_omega((1.0, -2.0), ball) == 1.0
        assert weight_omega((6.0, -2.0), ball, 2) == pytest.approx(2.0**-200, rel=1e-12)

    def test_monotone_decay(self):
        ball = BallSpec.origin(2, 3.0)
        r = np.linspace(0, 100, 50)
        w = weight_omega(np.stack([r, np.zeros_like(r)], axis=1), ball)
        assert np.all(np.diff(w) < 0) and w[-1] < 1e-100

    def test_lattice_mass_matches_closed_form(self):
        # int_{R^2} (1 + |x|/R)^-200 dx = 2 pi R^2 / (199 * 198)
        R = 8.0
        lat = ball_lattice(BallSpec.origin(2, R), spacing=R / 1600)
        F = np.ones(lat.points.shape[0])
        exact = 2 * math.pi * R * R / (199 * 198)
        assert weighted_lp_norm(F, lat, 2) ** 2 == pytest.approx(exact, rel=1e-3)
        assert lat.tail_mass <= 1e-12 and lat.truncation <= 4 * R

    def test_default_spacing_resolves_weight(self):
        assert default_spacing(2, 16.0) == pytest.approx(0.04)
        assert default_spacing(2, 1e4) == 0.25
        assert default_spacing(2, 16.0, "indicator") == 0.25

    def test_indicator_lattice(self):
        lat = ball_lattice(BallSpec.origin(2, 4.0), weight="indicator")
        assert np.all(lat.weights == 1) and lat.tail_mass == 0
        assert np.all(np.linalg.norm(lat.points, axis=1) <= 4.0)
        # lattice count approximates the disc area
        assert lat.points.shape[0] * lat.cell == pytest.approx(math.pi * 16, rel=0.03)
        with pytest.raises(PreconditionError):
            ball_lattice(BallSpec.origin(2, 4.0), weight="box")

    def test_zero_field(self):
        lat = ball_lattice(BallSpec.origin(2, 4.0))
        assert weighted_lp_norm(np.zeros(lat.points.shape[0]), lat, 3) == 0.0

    def test_coarse_lattice_rejected(self):
        with pytest.raises(ResolutionError):
            ball_lattice(BallSpec.origin(2, 4.0), spacing=0.5)


class TestExtension:
    def test_examples(self):
        g1 = SampledDensity.constant(256)
        assert extension_operator(g1, UNIT, (0.0, 0.0), 2) == pytest.approx(1.0)
        assert extension_operator(SampledDensity.constant(256, 0.0), UNIT, (3.0, -1.0), 2) == 0
        assert abs(extension_operator(g1, UNIT, (1.0, 0.0), 2)) < 1e-12

    @pytest.mark.parametrize("lam", [0.37, 2.5, 7.1])
    def test_closed_form(self, lam):
        g1 = SampledDensity.constant(4096)
        ref = (cmath.exp(2j * math.pi * lam) - 1) / (2j * math.pi * lam)
        assert extension_operator(g1, UNIT, (lam, 0.0), 2) == pytest.approx(ref, abs=1e-6)

    def test_under_resolved(self):
        with pytest.raises(ResolutionError):
            extension_operator(SampledDensity.constant(256), Interval(0.0, 0.125), (0.0, 0.0), 2)

    def test_k_below_2(self):
        with pytest.raises(PreconditionError):
            extension_operator(SampledDensity.constant(256), UNIT, (0.0,), 1)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10**6), c=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    def test_linearity(self, seed, c):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-20, 20, (16, 2))
        f = SampledDensity.gaussian(256, seed)
        g = SampledDensity.gaussian(256, seed + 1)
        fg = SampledDensity(f.samples + c * g.samples)
        lhs = extension_operator(fg, UNIT, X, 2)
        rhs = extension_operator(f, UNIT, X, 2) + c * extension_operator(g, UNIT, X, 2)
        assert np.allclose(lhs, rhs, atol=1e-10 * (1 + abs(c)))

    def test_interval_additivity_and_magnitude(self):
        g = SampledDensity.gaussian(512, 3)
        X = np.random.default_rng(0).uniform(-50, 50, (40, 3))
        whole = extension_operator(g, UNIT, X, 3)
        parts = sum(extension_operator(g, J, X, 3) for J in partition(Fraction(1, 8)))
        assert np.allclose(whole, parts, atol=1e-12)
        for J in partition(Fraction(1, 4)):
            mass = np.abs(g.samples[g.node_mask(J)]).sum() / g.M
            assert np.all(np.abs(extension_operator(g, J, X, 3)) <= mass + 1e-12)


class TestRatio:
    def test_single_interval(self):
        g = SampledDensity.gaussian(256, 5).restricted(Interval(0.25, 0.25))
        rep = decoupling_ratio(g, Fraction(1, 4), 6, 2)
        assert rep.ratio == pytest.approx(1.0, abs=1e-6)

    def test_trivial_bound_and_report(self):
        dens = [SampledDensity.constant(512)] + [SampledDensity.gaussian(512, s) for s in range(4)]
        for rep in decoupling_ratios(dens, Fraction(1, 8), 6, 2):
            assert 0 < rep.lhs and 0 < rep.rhs
            assert rep.ratio <= math.sqrt(8) + 1e-6
            assert rep.ball.radius == 64 and rep.spacing == pytest.approx(0.16) and rep.nodes == 512
        assert [r.seed for r in decoupling_ratios(dens, Fraction(1, 8), 6, 2)][1:] == [0, 1, 2, 3]

    def test_constant_density_regression(self):
        # frozen from this implementation's defaults (weight-resolving spacing, M = 64/delta)
        rep = decoupling_ratio(SampledDensity.constant(512), Fraction(1, 8), 6, 2)
        assert rep.ratio == pytest.approx(2.3712, abs=1e-3)

    def test_self_refinement(self):
        # E_[0,1] 1 on a radius-16 ball, p = 6: halve the default lattice spacing
        ball = BallSpec.origin(2, 16.0)
        g = SampledDensity.constant(1024)
        h0 = default_spacing(2, 16.0)
        vals = []
        for h in (h0, h0 / 2):
            lat = ball_lattice(ball, h)
            vals.append(weighted_lp_norm(extension_operator(g, UNIT, lat.points, 2), lat, 6))
        assert vals[0] == pytest.approx(vals[1], rel=0.02)

    def test_preconditions(self):
        g = SampledDensity.constant(512)
        with pytest.raises(PreconditionError):
            decoupling_ratio(g, Fraction(1, 8), 6, 2, ball=BallSpec.origin(2, 10.0))
        with pytest.raises(ResolutionError):
            decoupling_ratio(SampledDensity.constant(256), Fraction(1, 8), 6, 2)
        with pytest.raises(PreconditionError):
            decoupling_ratio(g, 0.3, 6, 2)

    def test_indicator_weight_mode(self):
        g = SampledDensity.gaussian(256, 9)
        one = decoupling_ratio(g.restricted(Interval(0.5, 0.25)), Fraction(1, 4), 6, 2, weight="indicator")
        assert one.ratio == pytest.approx(1.0, abs=1e-6) and one.weight == "indicator"
        rep = decoupling_ratio(g, Fraction(1, 4), 6, 2, weight="indicator")
        assert 0 < rep.ratio <= 2 + 1e-6

    def test_trend_shapes(self):
        dens = [SampledDensity.constant(256), SampledDensity.gaussian(256, 1)]
        slopes, ratios = decoupling_trend(dens, [Fraction(1, 2), Fraction(1, 4)], 6, 2)
        assert slopes.shape == (2,) and ratios.shape == (2, 2)
        assert np.all(slopes < 0.5)


class TestDiscrete:
    def test_single_wave(self):
        N = 4
        a = np.zeros(N)
        a[0] = 1
        t = (np.arange(1, N + 1) - 0.5) / N
        assert discrete_decoupling_check(a, t, 6, 2, R=20) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("N", [2, 3])
    def test_orthogonality(self, N):
        t = np.arange(1, N + 1) / N
        assert discrete_decoupling_check(np.ones(N), t, 2, 2, R=200 * N) == pytest.approx(1.0, rel=0.1)

    def test_critical_exponent_within_envelope(self):
        N = 8
        t = (np.arange(1, N + 1) - 0.5) / N
        ratio = discrete_decoupling_check(np.ones(N), t, 6, 2, R=100)
        assert 1 < ratio <= discrete_decoupling_envelope(N, 2, 6)

    def test_envelope(self):
        assert discrete_decoupling_envelope(8, 2, 6) == pytest.approx(8**0.1 * 2)
        assert discrete_decoupling_envelope(8, 2, 2) == pytest.approx(8**0.1 * (1 + 8.0 ** -1))

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            discrete_decoupling_check([1, 1], [0.5, 1.0], 2, 2, R=4)
        with pytest.raises(PreconditionError):
            discrete_decoupling_check([1, 1], [0.6, 1.0], 2, 2, R=10)
        with pytest.raises(PreconditionError):
            discrete_decoupling_check([0, 0], [0.5, 1.0], 2, 2, R=10)


class TestRescaling:
    def test_examples(self):
        lhs, rhs = parabolic_rescale_identity(0.3, 0.1, 0.5, (1.0, 2.0))
        assert lhs == pytest.approx(0.595) and rhs == pytest.approx(0.595)
        lhs, rhs = parabolic_rescale_identity(0.4, 0.0, 0.9, (2.0, 3.0))
        assert lhs == rhs == pytest.approx(2 * 0.4 + 3 * 0.16)
        assert parabolic_rescale_identity(0.2, 0.3, 0.7, (0.0, 0.0)) == (0.0, 0.0)

    @settings(max_examples=300)
    @given(
        t0=st.floats(0, 1),
        frac=st.floats(0, 1),
        tp=st.floats(0, 1),
        x1=st.floats(-1e6, 1e6),
        x2=st.floats(-1e6, 1e6),
    )
    def test_identity(self, t0, frac, tp, x1, x2):
        sigma = frac * (1 - t0)
        lhs, rhs = parabolic_rescale_identity(t0, sigma, tp, (x1, x2))
        scale = abs(x1) + abs(x2) + 1e-300
        assert abs(lhs - rhs) <= 1e-12 * scale


class TestTransversality:
    def test_frenet_examples(self):
        assert same_span(frenet_subspace(0.0, 1, 2), np.array([[1.0], [0.0]]))
        B = np.array([[1.0, 0.0], [2.0, 2.0], [3.0, 6.0]])
        assert same_span(frenet_subspace(1.0, 2, 3), B)
        for t in (0.0, 0.5, 2.0):
            assert np.linalg.matrix_rank(frenet_subspace(t, 4, 4)) == 4

    def test_examples(self):
        V1, V2 = np.array([[1.0], [0.0]]), np.array([[1.0], [2.0]])
        assert transversality_sample_check([V1, V2], 2).holds
        res = transversality_sample_check([V1, V1], 2)
        assert not res.holds and res.witness_dim == 1
        full = transversality_sample_check([np.eye(3)] * 2, 3)
        assert full.holds and full.worst_margin == pytest.approx(0.0)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_moment_curve(self, k):
        ts = np.linspace(0, 1, k)
        for d in range(1, k):
            Vs = [frenet_subspace(t, d, k) for t in ts]
            assert transversality_sample_check(Vs, k, seed=k * 10 + d).holds

    def test_coincident_points_fail(self):
        Vs = [frenet_subspace(0.3, 1, 2)] * 2
        assert not transversality_sample_check(Vs, 2).holds

    def test_needs_samples(self):
        with pytest.raises(PreconditionError):
            transversality_sample_check([np.eye(2)], 2, samples=10)

    def test_reported_as_sampled(self):
        res = transversality_sample_check([np.eye(2)], 2, samples=1000)
        assert res.samples >= 1000 and "not a proof" in res.notes[0]
