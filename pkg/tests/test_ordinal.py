import math

import numpy as np
import pytest

from factuality.core import Category
from factuality.stats import OrderedLogit


def sigmoid(z):
    """Textbook logistic, kept independent of the implementation under test."""
    return 1.0 / (1.0 + np.exp(-z))


def sample_ordinal(rng, n, beta, t1, t2):
    """Draw from the proportional-odds model with known parameters."""
    x = rng.normal(0.0, 1.0, n)
    u = rng.uniform(size=n)
    p_minus = sigmoid(t1 - beta * x)
    p_le_neutral = sigmoid(t2 - beta * x)
    y = np.where(u < p_minus, 0, np.where(u < p_le_neutral, 1, 2))
    return x, y


class TestRecovery:
    def test_single_synthetic_fit(self):
        rng = np.random.default_rng(42)
        x, y = sample_ordinal(rng, 5000, 1.5, -2.2, 0.4)
        m = OrderedLogit().fit(x, y)
        assert m.converged_
        assert m.beta_ == pytest.approx(1.5, abs=0.1)
        assert m.thresholds_[0] == pytest.approx(-2.2, abs=0.15)
        assert m.thresholds_[1] == pytest.approx(0.4, abs=0.15)
        assert m.se_beta_ < 0.1

    def test_recovery_across_known_slopes(self):
        # simulation oracle: 20 datasets with known slopes in [0.5, 2.5]
        betas = np.linspace(0.5, 2.5, 20)
        hits = 0
        for i, beta in enumerate(betas):
            rng = np.random.default_rng(1000 + i)
            x, y = sample_ordinal(rng, 5000, beta, -2.2, 0.4)
            m = OrderedLogit().fit(x, y)
            hits += abs(m.beta_ - beta) <= 0.1
        assert hits >= 18

    def test_constant_predictor_matches_cumulative_logit_formula(self):
        x = np.full(200, 2.0)
        y = np.array([0] * 30 + [1] * 80 + [2] * 90)
        m = OrderedLogit().fit(x, y)
        t1 = math.log((30 / 200) / (1 - 30 / 200))
        t2 = math.log((110 / 200) / (1 - 110 / 200))
        assert m.beta_ == pytest.approx(0.0, abs=1e-6)
        assert m.thresholds_[0] == pytest.approx(t1, abs=1e-6)
        assert m.thresholds_[1] == pytest.approx(t2, abs=1e-6)
        assert m.converged_


class TestLikelihood:
    def test_loglik_nondecreasing(self):
        rng = np.random.default_rng(5)
        x, y = sample_ordinal(rng, 800, 2.0, -1.0, 1.0)
        m = OrderedLogit().fit(x, y)
        assert np.all(np.diff(m.loglik_path_) >= 0.0)
        assert m.loglik_ <= 0.0

    def test_complete_separation_flagged(self):
        x = np.concatenate([np.linspace(-3, -1, 50), np.linspace(1, 3, 50)])
        y = np.array([0] * 50 + [2] * 50)
        m = OrderedLogit().fit(x, y)
        assert not m.converged_
        assert np.isfinite(m.beta_)  # best iterate is still reported
        assert np.all(np.diff(m.loglik_path_) >= 0.0)

    def test_degenerate_categories_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            OrderedLogit().fit([0.0, 1.0, 2.0], [1, 1, 1])
        with pytest.raises(ValueError):
            OrderedLogit().fit([0.0, 1.0], [0, 2])  # fewer than 3 points


class TestPredictProba:
    @pytest.fixture()
    def fitted(self):
        rng = np.random.default_rng(11)
        x, y = sample_ordinal(rng, 2000, 1.2, -1.5, 0.8)
        return OrderedLogit().fit(x, y)

    def test_rows_sum_to_one(self, fitted):
        probs = fitted.predict_proba(np.linspace(-4, 4, 101))
        assert np.all(probs >= 0.0)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_extreme_x_limits(self, fitted):
        hi = fitted.predict_proba(np.array([50.0]))[0]
        lo = fitted.predict_proba(np.array([-50.0]))[0]
        assert hi[2] == pytest.approx(1.0, abs=1e-6)
        assert lo[0] == pytest.approx(1.0, abs=1e-6)

    def test_null_coefficient_ignores_x(self):
        x = np.full(300, 0.7)
        y = np.array([0] * 60 + [1] * 120 + [2] * 120)
        m = OrderedLogit().fit(x, y)
        probs = m.predict_proba(np.array([-10.0, 0.0, 10.0]))
        assert np.allclose(probs[0], probs[1], atol=1e-9)
        assert np.allclose(probs[1], probs[2], atol=1e-9)

    def test_hand_computed_probabilities(self):
        # frozen by hand: with beta=1.488 and thresholds (-2.165, 0.429),
        # at x=0 the cumulative probabilities are sigmoid(-2.165) and
        # sigmoid(0.429)
        m = OrderedLogit()
        m.beta_ = 1.488
        m.thresholds_ = np.array([-2.165, 0.429])
        m.converged_ = True
        probs = m.predict_proba(np.array([0.0]))[0]
        p_minus = 1.0 / (1.0 + math.exp(2.165))
        p_le_neutral = 1.0 / (1.0 + math.exp(-0.429))
        assert probs[0] == pytest.approx(p_minus, abs=1e-12)
        assert probs[0] == pytest.approx(0.103, abs=5e-4)
        assert probs[0] + probs[1] == pytest.approx(p_le_neutral, abs=1e-12)
        assert probs[0] + probs[1] == pytest.approx(0.606, abs=5e-4)

    def test_unconverged_model_needs_override(self, fitted):
        fitted.converged_ = False
        with pytest.raises(RuntimeError, match="converge"):
            fitted.predict_proba([0.0])
        fitted.predict_proba([0.0], allow_unconverged=True)

    def test_predict_returns_categories(self, fitted):
        out = fitted.predict(np.array([-5.0, 0.0, 5.0]))
        assert out[0] is Category.MINUS
        assert out[2] is Category.PLUS

    def test_category_enums_accepted_as_y(self):
        x = np.array([-2.0, -1.5, 0.0, 0.2, 1.8, 2.5])
        y = [
            Category.MINUS,
            Category.MINUS,
            Category.NEUTRAL,
            Category.NEUTRAL,
            Category.PLUS,
            Category.PLUS,
        ]
        m = OrderedLogit().fit(x, y)
        assert m.beta_ > 0

    def test_to_dict_serializes(self, fitted):
        d = fitted.to_dict()
        assert set(d) >= {"beta", "thresholds", "loglik", "n_iter", "converged"}
