import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gffnet.errors import ParameterError
from gffnet.estimator import estimate_precision
from gffnet.gff import GFFModel, exact_Leta
from gffnet.graph import laplacian, sample_erdos_renyi
from gffnet.metrics import (
    binomial_se,
    bound_phi_tail,
    bound_sigma_error,
    error_report,
    fit_rate_slope,
)

from conftest import random_graph


class TestErrorReport:
    def test_identical(self):
        g = sample_erdos_renyi(6, 0.5, 1)
        P = laplacian(g) + 0.1 * np.eye(6)
        rep = error_report(P, P, g.edge_set())
        assert (rep.frob, rep.op_norm, rep.entry_max, rep.frob_scaled) == (0, 0, 0, 0)
        assert rep.support_exact is True

    def test_rank_one(self):
        d = 4
        E = np.zeros((d, d))
        E[0, 0] = 1
        rep = error_report(E, np.zeros((d, d)))
        assert rep.frob == rep.op_norm == rep.entry_max == 1
        assert rep.frob_scaled == 1 / d
        assert rep.support_exact is None

    def test_brute_force_frobenius(self, rng):
        A, B = rng.normal(size=(5, 5)), rng.normal(size=(5, 5))
        total = 0.0
        for i in range(5):
            for j in range(5):
                total += (A[i, j] - B[i, j]) ** 2
        assert error_report(A, B).frob == pytest.approx(np.sqrt(total), abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            error_report(np.eye(2), np.eye(3))

    @settings(max_examples=40, deadline=None)
    @given(arrays(float, (4, 4), elements=st.floats(-10, 10)), arrays(float, (4, 4), elements=st.floats(-10, 10)))
    def test_swap_symmetric_and_ordered(self, A, B):
        A, B = A + A.T, B + B.T
        r1, r2 = error_report(A, B), error_report(B, A)
        assert (r1.frob, r1.op_norm, r1.entry_max, r1.frob_scaled) == pytest.approx(
            (r2.frob, r2.op_norm, r2.entry_max, r2.frob_scaled), abs=1e-12)
        assert r1.frob_scaled == pytest.approx(r1.frob / 4, abs=1e-12)
        assert r1.op_norm <= r1.frob + 1e-9 and r1.entry_max <= r1.frob + 1e-12


class TestPhiTail:
    def test_small_x_limit(self):
        assert bound_phi_tail(100, 1e-12) == pytest.approx(4.0)

    def test_full_below_simplified(self):
        for x in np.linspace(0.01, 1.0, 50):
            assert bound_phi_tail(500, x) <= bound_phi_tail(500, x, simplified=True)

    def test_monotone(self):
        ns = [10, 100, 1000, 10_000]
        assert all(bound_phi_tail(b, 0.1) < bound_phi_tail(a, 0.1) for a, b in zip(ns, ns[1:]))
        xs = [0.05, 0.1, 0.5, 1, 3]
        assert all(bound_phi_tail(200, b) < bound_phi_tail(200, a) for a, b in zip(xs, xs[1:]))

    def test_nonpositive_x(self):
        with pytest.raises(ParameterError):
            bound_phi_tail(10, 0.0)


class TestSigmaBound:
    def test_zero_error(self):
        assert bound_sigma_error(3.0, 0.1, 1.0, 0.0, 0.0) == (0.0, True)

    def test_scalar_arithmetic(self):
        b = bound_sigma_error(0.0, 1.0, 1.0, 0.1, 0.1)
        assert b.applicable and b.value == pytest.approx(0.5)

    def test_inapplicable(self):
        b = bound_sigma_error(0.0, 1.0, 1.0, 0.5, 0.1)  # (2/1)*0.5 = 1
        assert not b.applicable and b.value == np.inf

    def test_monotone_in_error(self):
        vals = [bound_sigma_error(4.0, 0.1, 1.0, e, e).value for e in (0.01, 0.05, 0.1)]
        assert vals[0] < vals[1] < vals[2]

    def test_dominates_perturbed_oracle(self, rng):
        for _ in range(40):
            d = int(rng.integers(2, 10))
            mu, eta = float(rng.choice([0.05, 0.5, 2.0])), float(rng.choice([0.1, 1.0, 5.0]))
            m = GFFModel.from_graph(random_graph(rng, d), mu)
            lam1 = m.spectrum.lambda_max
            E = rng.normal(size=(d, d))
            E = E + E.T
            E *= rng.uniform(0.01, 0.5) * eta**2 / (lam1 + mu + eta) / np.linalg.norm(E, 2)
            L = exact_Leta(m, eta)
            rep = error_report(L + E, L)
            bound = bound_sigma_error(lam1, mu, eta, rep.op_norm, rep.frob_scaled)
            observed = error_report(estimate_precision(L + E, eta), m.precision()).frob_scaled
            assert bound.applicable and observed <= bound.value


class TestSlope:
    ns = np.array([1e3, 1e4, 1e5, 1e6])

    def test_exact_rate(self):
        assert fit_rate_slope(zip(self.ns, self.ns**-0.5)) == pytest.approx(-0.5, abs=1e-12)

    def test_constant(self):
        assert fit_rate_slope(zip(self.ns, [0.3] * 4)) == pytest.approx(0.0, abs=1e-12)

    def test_noisy_rate(self):
        gen = np.random.default_rng(0)
        for _ in range(100):
            errs = self.ns**-0.5 * (1 + 0.1 * gen.standard_normal(4))
            assert -0.6 <= fit_rate_slope(zip(self.ns, errs)) <= -0.4

    @pytest.mark.parametrize("pts", [[(1, 1), (2, 1)], [(1, 1), (2, 0), (3, 1)], [(1, 1), (2, -1), (3, 1)]])
    def test_invalid(self, pts):
        with pytest.raises(ParameterError):
            fit_rate_slope(pts)


def test_binomial_se():
    assert binomial_se(0, 100) == 0
    assert binomial_se(25, 100) == pytest.approx(np.sqrt(0.25 * 0.75 / 100))
    # standard error scales as reps^{-1/2} at fixed frequency
    assert binomial_se(100, 400) == pytest.approx(binomial_se(25, 100) / 2)
