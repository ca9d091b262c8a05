"""Frames, gauges and the operators L and L_p."""

import json

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from subhardy.frames import (
    DegeneratePointError,
    Frame,
    apply_L,
    apply_Lp,
    fd_gradient,
    fd_hessian,
    heisenberg_sublaplacian,
    horizontal_gradient,
    make_frame,
    parse_frame_spec,
    radial_operator_apply,
    random_points,
)
from subhardy.testfns import TestFunction, make_fundamental, make_power, make_random_bump, radial_function

FRAMES = [
    ("euclidean", dict(n=4)),
    ("heisenberg", dict(n=1)),
    ("heisenberg", dict(n=2)),
    ("heisenberg_greiner", dict(n=1, gamma=2.0)),
    ("heisenberg_greiner", dict(n=2, gamma=1.5)),
    ("baouendi_grushin", dict(n=2, k=1, gamma=1.0)),
    ("baouendi_grushin", dict(n=1, k=2, gamma=0.5)),
    ("baouendi_grushin", dict(n=1, k=1, gamma=0.0)),
]
IDS = [f"{k}-{'-'.join(f'{v:g}' for v in kw.values())}" for k, kw in FRAMES]


@pytest.fixture(params=FRAMES, ids=IDS)
def fg(request):
    kind, kw = request.param
    return make_frame(kind, **kw)


class TestConstruction:
    def test_heisenberg_dimensions(self):
        frame, _ = make_frame("heisenberg", 1)
        assert (frame.N, frame.h, frame.Q) == (3, 2, 4.0)

    def test_grushin_Q(self):
        frame, _ = make_frame("baouendi_grushin", 1, 1, 1.0)
        assert frame.Q == 3.0

    def test_euclidean_identity(self):
        frame, _ = make_frame("euclidean", 5)
        x = np.random.default_rng(0).normal(size=(3, 5))
        np.testing.assert_array_equal(frame.sigma(x), np.broadcast_to(np.eye(5), (3, 5, 5)))
        assert frame.Q == 5

    def test_greiner_Q(self):
        frame, _ = make_frame("greiner", 2, gamma=1.5)
        assert frame.Q == 2 * 2 + 2 * 1.5
        np.testing.assert_allclose(frame.dilation_exponents, [1, 1, 1, 1, 3])

    @pytest.mark.parametrize("kind,kw", [
        ("heisenberg_greiner", dict(n=1, gamma=0.5)),
        ("baouendi_grushin", dict(n=1, k=1, gamma=-0.1)),
        ("euclidean", dict(n=0)),
        ("nonsense", dict(n=1)),
    ])
    def test_rejects_bad_parameters(self, kind, kw):
        with pytest.raises(ValueError):
            make_frame(kind, **kw)

    def test_parse_specs(self):
        for spec, expect in [
            ("euclidean:5", Frame("euclidean", 5)),
            ("heisenberg:2", Frame("heisenberg", 2)),
            ("greiner:1,2", Frame("heisenberg_greiner", 1, gamma=2.0)),
            ("baouendi_grushin:2,1,1", Frame("baouendi_grushin", 2, 1, 1.0)),
        ]:
            frame, _ = parse_frame_spec(spec)
            assert frame == expect
            assert parse_frame_spec(json.dumps(frame.to_dict()))[0] == expect
            assert parse_frame_spec(frame.to_dict())[0] == expect

    @pytest.mark.parametrize("spec", ["euclidean", "heisenberg:1,2", "grushin:1,1", "blah:3"])
    def test_parse_rejects(self, spec):
        with pytest.raises(ValueError):
            parse_frame_spec(spec)


class TestFrameInvariants:
    def test_A_symmetric_psd(self, fg):
        frame, gauge = fg
        X = random_points(frame, gauge, 300, 1)
        A = frame.A(X)
        np.testing.assert_allclose(A, np.swapaxes(A, 1, 2))
        assert np.linalg.eigvalsh(A).min() > -1e-12

    def test_dsigma_matches_fd(self, fg):
        frame, gauge = fg
        X = random_points(frame, gauge, 50, 2)
        h = 1e-6
        fd = np.stack([(frame.sigma(X + h * e) - frame.sigma(X - h * e)) / (2 * h) for e in np.eye(frame.N)], -1)
        np.testing.assert_allclose(frame.dsigma(X), fd, atol=1e-7)

    def test_sigma_divergence_matches_fd(self, fg):
        frame, gauge = fg
        X = random_points(frame, gauge, 50, 3)
        h = 1e-6
        div = sum((frame.A(X + h * e)[:, i, :] - frame.A(X - h * e)[:, i, :]) / (2 * h)
                  for i, e in enumerate(np.eye(frame.N)))
        np.testing.assert_allclose(frame.sigma_divergence(X), div, atol=1e-7)

    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_fields_homogeneous_degree_one(self, fg, lam):
        frame, gauge = fg
        u = make_random_bump(gauge, 5, (0.3, 3.0))
        X = random_points(frame, gauge, 40, 4, r_range=(0.6, 1.4))
        lhs = np.einsum("mij,mj->mi", frame.sigma(X), fd_gradient(lambda y: u.value(frame.dilate(y, lam)), X))
        rhs = lam * horizontal_gradient(frame, u, frame.dilate(X, lam))
        np.testing.assert_allclose(lhs, rhs, atol=1e-6 * (1 + np.abs(rhs).max()))


class TestGauge:
    @pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
    def test_homogeneity(self, fg, lam):
        frame, gauge = fg
        X = random_points(frame, gauge, 1000, 5, r_range=(0.1, 3.0))
        np.testing.assert_allclose(gauge.value(frame.dilate(X, lam)), lam * gauge.value(X), rtol=1e-12, atol=0)
        np.testing.assert_allclose(gauge.horizontal_norm(frame.dilate(X, lam)), gauge.horizontal_norm(X),
                                   atol=1e-12)

    def test_analytic_derivatives_match_fd(self, fg):
        frame, gauge = fg
        X = random_points(frame, gauge, 100, 6)
        _, g, H = gauge.jet(X)
        np.testing.assert_allclose(g, fd_gradient(gauge.value, X), atol=1e-8)
        np.testing.assert_allclose(H, fd_hessian(gauge.value, X), atol=1e-6)

    def test_psi_in_unit_interval(self):
        frame, gauge = make_frame("heisenberg", 1)
        rng = np.random.default_rng(7)
        X = rng.uniform(-2, 2, size=(10_000, 3))
        psi = gauge.horizontal_norm(X) ** 2
        assert psi.min() >= 0 and psi.max() <= 1 + 1e-14
        z2 = np.sum(X[:, :2] ** 2, axis=1)
        np.testing.assert_allclose(psi, z2 / gauge.value(X) ** 2, rtol=1e-12)

    def test_greiner_closed_form(self):
        frame, gauge = make_frame("heisenberg_greiner", 2, gamma=1.5)
        X = random_points(frame, gauge, 200, 8)
        assert gauge.closed_form_checks(X)["|z|^(2g-1)/d^(2g-1)"] < 1e-13

    def test_grushin_closed_form_exponent(self):
        # |sigma grad rho| equals (|x|/rho)^gamma; the squared form is psi
        frame, gauge = make_frame("baouendi_grushin", 2, 1, 1.0)
        X = random_points(frame, gauge, 200, 9)
        checks = gauge.closed_form_checks(X)
        assert checks["|x|^g/d^g"] < 1e-13
        assert checks["|x|^(2g)/d^(2g)"] > 1e-2

    def test_degenerate_sets(self):
        _, hg = make_frame("heisenberg", 1)
        assert hg.degenerate(np.array([[0.0, 0.0, 1.0]]))[0]
        assert not hg.degenerate(np.array([[1.0, 0.0, 0.0]]))[0]
        _, gg = make_frame("baouendi_grushin", 1, 1, 1.0)
        assert gg.degenerate(np.array([[0.0, 1.0]]))[0]
        _, g0 = make_frame("baouendi_grushin", 1, 1, 0.0)
        assert not g0.degenerate(np.array([[0.0, 1.0]]))[0]
        _, ge = make_frame("euclidean", 3)
        assert ge.degenerate(np.zeros((1, 3)))[0]

    def test_box_contains_ball(self, fg):
        frame, gauge = fg
        rng = np.random.default_rng(10)
        # points on the unit gauge sphere via dilation of random directions
        X = rng.normal(size=(5000, frame.N))
        Y = frame.dilate(X, 1.0 / gauge.value(X))
        assert np.all(np.abs(Y) <= gauge.bounding_half_widths(1.0) * (1 + 1e-12))


class TestHorizontalGradient:
    def test_euclidean_coordinate(self):
        frame, _ = make_frame("euclidean", 3)
        u = TestFunction(lambda x: np.asarray(x)[..., 0])
        np.testing.assert_allclose(horizontal_gradient(frame, u, np.array([0.3, -1.0, 2.0])), [1, 0, 0], atol=1e-9)

    def test_heisenberg_gauge_values(self):
        frame, gauge = make_frame("heisenberg", 1)
        rho = TestFunction(gauge.value, gauge.euclid_gradient)
        assert np.linalg.norm(horizontal_gradient(frame, rho, np.array([1.0, 0, 0]))) == pytest.approx(1.0)
        assert np.linalg.norm(horizontal_gradient(frame, rho, np.array([0, 0, 1.0]))) == pytest.approx(0.0)

    def test_fd_path_refuses_singular_locus(self):
        frame, gauge = make_frame("heisenberg", 1)
        with pytest.raises(DegeneratePointError):
            horizontal_gradient(frame, TestFunction(gauge.value), np.array([0, 0, 1.0]), gauge=gauge)


class TestSubLaplacian:
    def test_euclidean_square_norm(self):
        frame, _ = make_frame("euclidean", 3)
        u = TestFunction(lambda x: np.sum(np.atleast_2d(x) ** 2, axis=1))
        X = np.random.default_rng(0).normal(size=(20, 3))
        np.testing.assert_allclose(apply_L(frame, u, X), 6.0, atol=1e-6)

    def test_heisenberg_gauge_at_unit_point(self):
        frame, gauge = make_frame("heisenberg", 1)
        fd_only = TestFunction(gauge.value)
        x = np.array([1.0, 0.0, 0.0])
        assert apply_L(frame, fd_only, x, gauge=gauge) == pytest.approx(3.0, abs=1e-6)
        assert apply_L(frame, make_power(gauge, 1.0), x) == pytest.approx(3.0, abs=1e-12)

    def test_heisenberg_fundamental_solution_fd(self):
        frame, gauge = make_frame("heisenberg", 1)
        X = random_points(frame, gauge, 100, 11)
        gam = TestFunction(lambda x: gauge.value(x) ** (2 - frame.Q))
        assert np.max(np.abs(apply_L(frame, gam, X, gauge=gauge))) < 1e-5

    @pytest.mark.parametrize("n", [1, 2])
    def test_heisenberg_decomposition(self, n):
        frame, gauge = make_frame("heisenberg", n)
        X = random_points(frame, gauge, 200, 12)
        for seed in range(3):
            u = make_random_bump(gauge, seed, (0.4, 2.5))
            a = apply_L(frame, u, X)
            b = heisenberg_sublaplacian(frame, u, X)
            np.testing.assert_allclose(a, b, atol=1e-6 * (1 + np.abs(a).max()))
            fd = heisenberg_sublaplacian(frame, TestFunction(u.value), X)
            np.testing.assert_allclose(fd, a, atol=1e-5 * (1 + np.abs(a).max()))

    def test_decomposition_only_for_heisenberg(self):
        frame, gauge = make_frame("euclidean", 3)
        with pytest.raises(ValueError):
            heisenberg_sublaplacian(frame, make_power(gauge, 1.0), np.ones(3))

    def test_fd_matches_analytic_on_bumps(self, fg):
        frame, gauge = fg
        X = random_points(frame, gauge, 60, 13, r_range=(0.6, 1.8))
        u = make_random_bump(gauge, 21, (0.4, 2.5))
        a = apply_L(frame, u, X)
        b = apply_L(frame, TestFunction(u.value), X, gauge=gauge)
        np.testing.assert_allclose(b, a, atol=1e-5 * (1 + np.abs(a).max()))


class TestPLaplacian:
    def test_p2_equals_L(self, fg):
        frame, gauge = fg
        X = random_points(frame, gauge, 100, 14)
        u = make_random_bump(gauge, 2, (0.4, 2.5))
        np.testing.assert_allclose(apply_Lp(frame, gauge, 2, u, X), apply_L(frame, u, X), rtol=1e-14, atol=0)

    def test_heisenberg_p3_gauge(self):
        frame, gauge = make_frame("heisenberg", 1)
        X = random_points(frame, gauge, 200, 15)
        expected = (frame.Q - 1) * gauge.horizontal_norm(X) ** 3 / gauge.value(X)
        np.testing.assert_allclose(apply_Lp(frame, gauge, 3, make_power(gauge, 1.0), X), expected, rtol=1e-12)
        fd = apply_Lp(frame, gauge, 3, TestFunction(gauge.value), X)
        np.testing.assert_allclose(fd, expected, atol=1e-6)

    def test_euclidean_p3_norm(self):
        frame, gauge = make_frame("euclidean", 5)
        X = random_points(frame, gauge, 100, 16)
        r = np.linalg.norm(X, axis=1)
        fd = apply_Lp(frame, gauge, 3, TestFunction(gauge.value), X)
        np.testing.assert_allclose(fd, 4 / r, rtol=1e-6)
        np.testing.assert_allclose(apply_Lp(frame, gauge, 3, make_power(gauge, 1.0), X), 4 / r, rtol=1e-13)

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_gauge_identity(self, fg, p):
        frame, gauge = fg
        X = random_points(frame, gauge, 300, 17 + p)
        Ld = apply_Lp(frame, gauge, p, make_power(gauge, 1.0), X)
        target = (frame.Q - 1) * gauge.horizontal_norm(X) ** p / gauge.value(X)
        assert np.max(np.abs(Ld - target) / (1 + np.abs(Ld))) < 1e-6

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_fundamental_harmonic(self, fg, p):
        frame, gauge = fg
        X = random_points(frame, gauge, 300, 27 + p)
        assert np.max(np.abs(apply_Lp(frame, gauge, p, make_fundamental(gauge, p), X))) < 1e-5

    def test_fd_path_for_p3(self, fg):
        frame, gauge = fg
        X = random_points(frame, gauge, 40, 30, r_range=(0.7, 1.6))
        u = make_power(gauge, -0.7)
        a = apply_Lp(frame, gauge, 3, u, X)
        b = apply_Lp(frame, gauge, 3, TestFunction(u.value), X)
        np.testing.assert_allclose(b, a, atol=1e-5 * (1 + np.abs(a).max()))

    def test_vanishing_gradient_rejected(self):
        frame, gauge = make_frame("euclidean", 3)
        const = TestFunction(lambda x: np.ones(np.atleast_2d(x).shape[0]),
                             lambda x: np.zeros(np.atleast_2d(x).shape),
                             lambda x: np.zeros(np.atleast_2d(x).shape + (3,)))
        with pytest.raises(DegeneratePointError):
            apply_Lp(frame, gauge, 3, const, np.ones(3))
        assert apply_Lp(frame, gauge, 4, const, np.ones(3)) == 0.0

    def test_rejects_small_p(self):
        frame, gauge = make_frame("euclidean", 3)
        with pytest.raises(ValueError):
            apply_Lp(frame, gauge, 1.5, make_power(gauge, 1.0), np.ones(3))


class TestRadialOperator:
    def test_euclidean_square(self):
        frame, gauge = make_frame("euclidean", 3)
        prof = (lambda r: r**2, lambda r: 2 * r, lambda r: 2 + 0 * r)
        X = random_points(frame, gauge, 20, 31)
        np.testing.assert_allclose(radial_operator_apply(frame, gauge, prof, X), 6.0, rtol=1e-13)

    def test_heisenberg_fundamental(self):
        frame, gauge = make_frame("heisenberg", 1)
        a = 2 - frame.Q
        prof = (lambda r: r**a, lambda r: a * r ** (a - 1), lambda r: a * (a - 1) * r ** (a - 2))
        X = random_points(frame, gauge, 100, 32)
        assert np.max(np.abs(radial_operator_apply(frame, gauge, prof, X))) < 1e-12

    def test_grushin_random_spline(self):
        frame, gauge = make_frame("baouendi_grushin", 1, 1, 1.0)
        rng = np.random.default_rng(33)
        knots = np.linspace(0.3, 3.0, 8)
        spl = CubicSpline(knots, rng.normal(size=knots.size))
        prof = (spl, spl.derivative(1), spl.derivative(2))
        X = random_points(frame, gauge, 400, 34, r_range=(0.5, 2.5))
        d = gauge.value(X)
        # keep away from the knots, where the third derivative jumps
        X = X[np.min(np.abs(d[:, None] - knots[None]), axis=1) > 0.02][:100]
        fast = radial_operator_apply(frame, gauge, prof, X)
        fd = apply_L(frame, TestFunction(lambda x: spl(gauge.value(x))), X, gauge=gauge)
        np.testing.assert_allclose(fast, fd, atol=1e-5)

    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_matches_generic_operator(self, fg, p):
        frame, gauge = fg
        X = random_points(frame, gauge, 100, 35)
        prof = (np.sin, np.cos, lambda r: -np.sin(r))
        u = radial_function(gauge, *prof)
        np.testing.assert_allclose(radial_operator_apply(frame, gauge, prof, X, p=p),
                                   apply_Lp(frame, gauge, p, u, X), atol=1e-11)

    def test_origin_rejected(self):
        frame, gauge = make_frame("euclidean", 3)
        with pytest.raises(DegeneratePointError):
            radial_operator_apply(frame, gauge, (np.sin, np.cos, np.sin), np.zeros(3))
