import numpy as np
import pytest

from gffnet.baseline import (
    BaselineConfig,
    bmt_condition,
    canonical_U,
    estimate_sigma_bmt,
    gaussian_charfn,
    improvised_U,
    invert_baseline,
    oracle_sigma_bmt,
    psi_n,
    sample_bmt_table,
    tail_probability,
    tau_bound,
)
from gffnet.errors import IllConditionedPlugin, ParameterError
from gffnet.estimator import SQRT_HALF
from gffnet.gff import GFFModel, covariance, sample_field
from gffnet.graph import WeightedGraph
from gffnet.metrics import bound_inverse_error, error_report

from conftest import random_graph


class TestPsiN:
    def test_origin(self, rng):
        assert psi_n(rng.normal(size=(20, 3)), np.zeros(3)) == 1

    def test_scalar_gaussian(self):
        n, U = 200_000, 1.3
        X = np.random.default_rng(1).normal(size=(n, 1))
        assert abs(abs(psi_n(X, [U])) - np.exp(-U**2 / 2)) <= 3 / np.sqrt(n)

    def test_conjugate_symmetry(self, rng):
        X, u = rng.normal(size=(50, 4)), rng.normal(size=4)
        assert psi_n(X, -u) == np.conj(psi_n(X, u))

    def test_table_matches_direct(self, rng):
        X = rng.normal(size=(1000, 4))
        table = sample_bmt_table(X, 0.7, chunk=300)
        eye = np.eye(4)
        for i in range(4):
            assert table.axes[i] == pytest.approx(psi_n(X, 0.7 * eye[i]), abs=1e-13)
            for j in range(i + 1, 4):
                assert table.pairs[i, j] == pytest.approx(psi_n(X, 0.7 * SQRT_HALF * (eye[i] + eye[j])), abs=1e-13)


class TestSigmaBMT:
    def test_oracle_mode(self, rng):
        for _ in range(5):
            m = GFFModel.from_graph(random_graph(rng, 7), 0.5)
            S = covariance(m)
            np.testing.assert_allclose(oracle_sigma_bmt(S, np.sqrt(0.5)).entries, S, atol=1e-10)

    def test_scalar_model(self):
        m = GFFModel(np.zeros((1, 1)), 1.0)
        cfg = BaselineConfig(U=1.0)
        vals = [estimate_sigma_bmt(sample_field(m, 1_000_000, 1.0, k).X, cfg).entries[0, 0] for k in range(20)]
        assert abs(np.median(vals) - 1.0) <= 0.02

    def test_symmetric(self, rng):
        X = rng.normal(size=(500, 5))
        E = estimate_sigma_bmt(X, BaselineConfig(U=0.8)).entries
        assert np.array_equal(E, E.T)

    def test_needs_U(self, rng):
        with pytest.raises(ParameterError):
            estimate_sigma_bmt(rng.normal(size=(5, 2)), BaselineConfig())


class TestFrequencyChoices:
    def test_canonical_unit(self):
        d = 7
        n = np.e * np.log(np.e * d)
        assert canonical_U(BaselineConfig(R=1.0, c0=1.0), n, d) == pytest.approx(1.0)

    def test_canonical_monotone_and_scaling(self):
        cfg = BaselineConfig(R=1.0)
        grid = [canonical_U(cfg, n, 10) for n in (10, 100, 1e4, 1e6)]
        assert all(b > a for a, b in zip(grid, grid[1:]))
        assert canonical_U(BaselineConfig(R=4.0), 1e4, 10) == pytest.approx(canonical_U(cfg, 1e4, 10) / 2)

    def test_canonical_small_n(self):
        with pytest.raises(ParameterError):
            canonical_U(BaselineConfig(), 2, 10)

    def test_improvised(self):
        assert improvised_U(BaselineConfig(R=1.0)) == 1.0
        assert improvised_U(BaselineConfig(R=1 / 0.04)) == pytest.approx(0.2)
        for R in (0.3, 1.0, 17.0):
            assert R * improvised_U(BaselineConfig(R=R)) ** 2 == pytest.approx(1.0)

    def test_gamma_must_exceed_sqrt2(self):
        with pytest.raises(ParameterError):
            BaselineConfig(gamma=1.4)


class TestTauBound:
    def test_backsolved_value(self):
        # log(e)/n = e^{-2}/36 makes the square root e^{-1}/6, so tau = gamma
        n = 36 * np.e**2
        tau = tau_bound(BaselineConfig(R=1.0, gamma=2.0), n, 1, U=1.0)
        assert tau.value == pytest.approx(2.0)
        assert not tau.applicable  # 8*gamma*e^{-1}/6 > e^{-1}

    def test_decreasing_in_n(self):
        cfg = BaselineConfig()
        vals = [tau_bound(cfg, n, 5, U=1.0).value for n in (1e3, 1e4, 1e5, 1e6)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_linear_in_gamma(self):
        a = tau_bound(BaselineConfig(gamma=2.0), 1e4, 5, U=1.0).value
        b = tau_bound(BaselineConfig(gamma=4.0), 1e4, 5, U=1.0).value
        assert b == pytest.approx(2 * a)

    def test_applicability(self):
        cfg = BaselineConfig(R=1.0)
        assert tau_bound(cfg, 1e5, 5, U=1.0).applicable
        assert not tau_bound(cfg, 1e5, 5, U=0.5).applicable  # U < 1
        assert bmt_condition(cfg, 1.0, 1e5, 5) and not bmt_condition(cfg, 1.0, 100, 5)

    def test_tail_probability(self):
        assert tail_probability(2.0, 5) == pytest.approx(12 * np.exp(-4) / 25)


class TestInvert:
    def test_single_edge(self):
        m = GFFModel.from_graph(WeightedGraph(2, ((0, 1, 1.0),)), 1.0)
        np.testing.assert_allclose(invert_baseline(covariance(m)).entries, [[2, -1], [-1, 2]], atol=1e-9)

    def test_identity(self):
        np.testing.assert_array_equal(invert_baseline(np.eye(4)).entries, np.eye(4))

    def test_singular(self):
        with pytest.raises(IllConditionedPlugin):
            invert_baseline(np.ones((3, 3)))

    def test_perturbation_bound(self, rng):
        for _ in range(20):
            m = GFFModel.from_graph(random_graph(rng, 8), float(rng.choice([0.05, 0.5, 2.0])))
            S = covariance(m)
            s_min = np.linalg.svd(S, compute_uv=False)[-1]
            E = rng.normal(size=(8, 8))
            E = E + E.T
            E *= 0.1 * s_min / np.linalg.norm(E, 2)
            rep = error_report(S + E, S)
            bound = bound_inverse_error(s_min, rep.op_norm, rep.frob_scaled)
            assert bound.applicable
            observed = error_report(invert_baseline(S + E), np.linalg.inv(S)).frob_scaled
            assert observed <= bound.value

    def test_oracle_inverse(self, rng):
        m = GFFModel.from_graph(random_graph(rng, 6), 0.5)
        S = covariance(m)
        P = invert_baseline(oracle_sigma_bmt(S, np.sqrt(0.5))).entries
        assert np.linalg.norm(P - m.precision()) <= 1e-8 * np.linalg.norm(m.precision())


def test_gaussian_charfn():
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert gaussian_charfn(S)(np.array([1.0, -1.0])) == pytest.approx(np.exp(-0.5 * 2.0))
