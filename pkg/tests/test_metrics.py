import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factuality.stats import mae, pearson


def mae_oracle(pred, gold):
    """Direct-definition mean absolute error, summed term by term."""
    return sum(abs(p - g) for p, g in zip(pred, gold)) / len(pred)


def pearson_oracle(x, y):
    """Textbook covariance / (sigma_x * sigma_y), no shortcuts."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    sx = math.sqrt(sum((a - mx) ** 2 for a in x) / n)
    sy = math.sqrt(sum((b - my) ** 2 for b in y) / n)
    return cov / (sx * sy)


class TestMae:
    def test_hand_cases(self):
        assert mae([1, 2], [0, 0]) == 1.5
        assert mae([1.0, -2.0, 0.5], [1.0, -2.0, 0.5]) == 0.0
        assert mae([-3], [3]) == 6.0

    def test_against_oracle_on_random_vectors(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            n = rng.integers(1, 40)
            p = rng.uniform(-3, 3, n)
            g = rng.uniform(-3, 3, n)
            assert abs(mae(p, g) - mae_oracle(p, g)) <= 1e-12

    def test_symmetry_and_nonnegativity(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            p = rng.uniform(-3, 3, 10)
            g = rng.uniform(-3, 3, 10)
            assert mae(p, g) == mae(g, p)
            assert mae(p, g) >= 0.0

    def test_zero_iff_equal(self):
        rng = np.random.default_rng(8)
        p = rng.uniform(-3, 3, 10)
        assert mae(p, p) == 0.0
        q = p.copy()
        q[3] += 1e-6
        assert mae(p, q) > 0.0

    def test_errors(self):
        with pytest.raises(ValueError):
            mae([1, 2], [1])
        with pytest.raises(ValueError):
            mae([], [])


class TestPearson:
    def test_perfect_correlation(self):
        x = [0.0, 1.0, 2.0, 5.0]
        assert pearson(x, x) == pytest.approx(1.0, abs=1e-12)
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_case_against_oracle(self):
        x = [1.0, 2.0, 3.0]
        y = [1.0, 2.0, 4.0]
        assert pearson(x, y) == pytest.approx(pearson_oracle(x, y), abs=1e-12)

    def test_against_oracle_on_random_vectors(self):
        rng = np.random.default_rng(99)
        for _ in range(1000):
            n = rng.integers(2, 40)
            x = rng.uniform(-3, 3, n)
            y = rng.uniform(-3, 3, n)
            if np.ptp(x) == 0 or np.ptp(y) == 0:
                continue
            assert abs(pearson(x, y) - pearson_oracle(x, y)) <= 1e-12

    def test_constant_vector_is_undefined_not_error(self):
        assert pearson([1.0, 1.0, 1.0], [0.0, 1.0, 2.0]) is None
        assert pearson([0.0, 1.0, 2.0], [2.0, 2.0, 2.0]) is None

    def test_errors(self):
        with pytest.raises(ValueError):
            pearson([1.0], [1.0])
        with pytest.raises(ValueError):
            pearson([1, 2, 3], [1, 2])

    @settings(max_examples=200)
    @given(
        xs=st.lists(st.floats(-3, 3), min_size=3, max_size=20),
        ys=st.lists(st.floats(-3, 3), min_size=3, max_size=20),
        a=st.floats(0.01, 50),
        b=st.floats(-100, 100),
    )
    def test_affine_invariance(self, xs, ys, a, b):
        n = min(len(xs), len(ys))
        x = np.asarray(xs[:n])
        y = np.asarray(ys[:n])
        r = pearson(x, y)
        if r is None:
            return
        r_scaled = pearson(a * x + b, y)
        if r_scaled is not None:
            assert abs(r - r_scaled) <= 1e-9
