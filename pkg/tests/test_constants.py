"""Closed-form constants, exponents and Rellich admissibility."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subhardy import constants as C
from subhardy.frames import make_frame


def P(p, theta, Q):
    return C.InequalityParams(p, theta, Q)


class TestSpotValues:
    def test_hardy(self):
        assert C.hardy_sharp_constant(P(2, 1, 5)) == 2.25
        assert C.hardy_sharp_constant(P(2, 1, 4)) == 1.0
        assert C.hardy_sharp_constant(P(3, 1, 4)) == pytest.approx(1 / 27, rel=1e-14)

    def test_rellich(self):
        assert C.rellich_sharp_constant(P(2, 0, 5)) == 1.5625
        assert C.rellich_sharp_constant(P(2, 0, 6)) == 9.0

    def test_auxiliary(self):
        assert C.auxiliary_hardy_constant(P(2, 0, 5)) == 0.25
        assert C.auxiliary_hardy_constant(P(2, -1, 4)) == 1.0

    def test_euclidean_rellich_theta_zero_form(self):
        # theta = 0: (N(p-1)(N-2p)/p^2)^p
        N, p = 9.0, 3.0
        assert C.rellich_sharp_constant(P(p, 0, N)) == pytest.approx((N * (p - 1) * (N - 2 * p) / p**2) ** p)

    def test_extremal_exponents(self):
        h, r = C.extremal_exponents(P(2, 1, 5))
        assert h == -1.5
        assert C.extremal_exponents(P(2, 0, 5))[1] == -0.5
        assert C.extremal_exponents(P(2, 2, 4))[0] == 0.0


class TestCriticalWeights:
    @pytest.mark.parametrize("p,Q", [(2, 4), (3, 5), (2.5, 7)])
    def test_hardy_vanishes_at_Q_over_p(self, p, Q):
        with pytest.warns(C.CriticalWeightWarning):
            assert C.hardy_sharp_constant(P(p, Q / p, Q)) == 0.0

    def test_rellich_and_auxiliary_vanish(self):
        Q, p = 7.0, 2.0
        th = Q / p - 2
        with pytest.warns(C.CriticalWeightWarning):
            assert C.rellich_sharp_constant(P(p, th, Q)) == 0.0
        with pytest.warns(C.CriticalWeightWarning):
            assert C.auxiliary_hardy_constant(P(p, th, Q)) == 0.0

    def test_hardy_positive_off_critical(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for th in np.linspace(-3, 3, 61):
                if not math.isclose(th, 2.5):
                    assert C.hardy_sharp_constant(P(2, th, 5)) > 0

    def test_sharp_constants_records_flag(self):
        with pytest.warns(C.CriticalWeightWarning):
            sc = C.sharp_constants(P(2, 2, 4))
        assert sc.hardy == 0.0
        assert "Hardy" in sc.critical


class TestCrossForms:
    @given(
        p=st.floats(2, 6),
        theta=st.floats(-3, 3),
        Q=st.integers(3, 12),
    )
    @settings(max_examples=300, deadline=None)
    def test_forms_agree(self, p, theta, Q):
        forms = C.constant_forms(P(p, theta, Q))
        for name, (a, b) in forms.items():
            assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12), name

    def test_rellich_factorization(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            p, th, Q = rng.uniform(2, 6), rng.uniform(-3, 3), rng.integers(3, 13)
            prm = P(p, th, Q)
            if C.rellich_product(prm) > 0:
                expected = ((Q - p * (th + 2)) / p * (p * th + Q * (p - 1)) / p) ** p
                assert C.rellich_sharp_constant(prm) == pytest.approx(expected, rel=1e-12)

    def test_beta_relations(self):
        prm = P(3.0, 0.4, 7.0)
        assert (1 - prm.beta_hardy) * (prm.p - 1) == pytest.approx(prm.Q - 1)
        assert 1 - prm.beta_rellich == pytest.approx(prm.Q - 1)

    def test_continuity_in_theta(self):
        th = np.linspace(-2, 2, 4001)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", C.CriticalWeightWarning)
            vals = np.array([C.hardy_sharp_constant(P(3, t, 5)) for t in th])
        assert np.max(np.abs(np.diff(vals))) < 0.05


class TestAdmissibility:
    def test_euclidean(self):
        assert C.rellich_admissible(P(2, 0, 5), make_frame("euclidean", 5)[0])

    def test_heisenberg_Q_equal_2p(self):
        frame, _ = make_frame("heisenberg", 1)
        adm = C.rellich_admissible(P(2, 0, 4), frame)
        assert not adm
        assert adm.reasons == ("Q > 2p",)
        with pytest.raises(C.InadmissibleParameters) as err:
            C.rellich_sharp_constant(P(2, 0, 4), frame)
        assert "Q > 2p" in err.value.reasons

    def test_heisenberg_n2_admissible(self):
        frame, _ = make_frame("heisenberg", 2)
        assert C.rellich_admissible(P(2, 0, 6), frame)
        assert C.rellich_sharp_constant(P(2, 0, 6), frame) == 9.0

    def test_grushin_gamma_zero_is_trivial(self):
        frame, _ = make_frame("baouendi_grushin", 1, 1, 0.0)
        prm = C.InequalityParams.for_frame(frame, 2, 0)
        adm = C.rellich_admissible(prm, frame)
        assert adm.clauses["Q > 2g(p-1)+(1+g)k"]  # n + k > k

    def test_grushin_condition_equivalent_to_n(self):
        for n, k, g, p in [(2, 1, 1.0, 2.0), (3, 1, 1.0, 2.0), (5, 2, 0.5, 3.0), (1, 3, 2.0, 2.0)]:
            frame, _ = make_frame("baouendi_grushin", n, k, g)
            prm = C.InequalityParams.for_frame(frame, p, -1.0)
            assert C.rellich_admissible(prm, frame).clauses["Q > 2g(p-1)+(1+g)k"] == (n > 2 * g * (p - 1))

    def test_greiner_clauses(self):
        frame, _ = make_frame("heisenberg_greiner", 1, gamma=2.0)
        adm = C.rellich_admissible(C.InequalityParams.for_frame(frame, 2, 0), frame)
        assert not adm
        assert set(adm.reasons) >= {"2n > 2(2g-1)(p-1)"}
        # gamma = 1 reduces both clauses to Q > 2p
        frame, _ = make_frame("heisenberg_greiner", 3, gamma=1.0)
        adm = C.rellich_admissible(C.InequalityParams.for_frame(frame, 2, 0), frame)
        assert adm and all(adm.clauses.values())

    def test_product_clause_named(self):
        adm = C.rellich_admissible(P(2, 1, 5))
        assert adm.reasons == (C.PRODUCT_CLAUSE,)

    def test_mismatched_Q(self):
        with pytest.raises(ValueError):
            C.rellich_admissible(P(2, 0, 5), make_frame("euclidean", 4)[0])


class TestValidation:
    @pytest.mark.parametrize("args", [(1.5, 0, 3), (2, math.nan, 3), (2, 0, -1)])
    def test_invalid_params(self, args):
        with pytest.raises(ValueError):
            P(*args)
