"""Proportional-odds ordered logistic regression for the three factuality categories.

The model is ``P(y <= k | x) = sigmoid(theta_k - beta * x)`` with two
thresholds separating MINUS | NEUTRAL | PLUS. The likelihood is maximized by
Newton iterations on ``(beta, theta_1, log(theta_2 - theta_1))`` so the
thresholds stay ordered, with step halving to keep the log-likelihood
non-decreasing.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from ..core import Category
from ..validation import as_float_vector, check_equal_length, check_fitted

_TINY = 1e-300


def _expit(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _encode_categories(y) -> np.ndarray:
    coded = np.asarray([int(v) for v in y], dtype=int)
    if coded.size and not np.all((coded >= 0) & (coded <= 2)):
        raise ValueError("category codes must be in {0, 1, 2} (MINUS, NEUTRAL, PLUS)")
    return coded


def _cell_derivatives(beta, t1, t2, x, masks):
    """Per-item derivatives of the log-likelihood wrt the two cutpoint arguments.

    Returns (loglik, d1, d2, h11, h22, h12) where z1 = t1 - beta*x and
    z2 = t2 - beta*x are the lower/upper cutpoint arguments.
    """
    m0, m1, m2 = masks
    z1 = t1 - beta * x
    z2 = t2 - beta * x
    f1 = _expit(z1)
    f2 = _expit(z2)
    d1f = f1 * (1.0 - f1)
    d2f = f2 * (1.0 - f2)

    p = np.where(m0, f1, np.where(m1, f2 - f1, 1.0 - f2))
    p = np.maximum(p, _TINY)
    loglik = float(np.sum(np.log(p)))

    d1 = np.where(m0, 1.0 - f1, np.where(m1, -d1f / p, 0.0))
    d2 = np.where(m2, -f2, np.where(m1, d2f / p, 0.0))

    dd1 = d1f * (1.0 - 2.0 * f1)
    dd2 = d2f * (1.0 - 2.0 * f2)
    h11 = np.where(m0, -d1f, np.where(m1, -dd1 / p - (d1f / p) ** 2, 0.0))
    h22 = np.where(m2, -d2f, np.where(m1, dd2 / p - (d2f / p) ** 2, 0.0))
    h12 = np.where(m1, d1f * d2f / (p * p), 0.0)
    return loglik, d1, d2, h11, h22, h12


def _grad_hess_working(v, x, masks):
    """Gradient and Hessian in the working parameterization (beta, t1, s)."""
    beta, t1, s = v
    es = math.exp(s)
    ll, d1, d2, h11, h22, h12 = _cell_derivatives(beta, t1, t1 + es, x, masks)

    dsum = d1 + d2
    grad = np.array([-np.sum(x * dsum), np.sum(dsum), es * np.sum(d2)])

    hsum = h11 + h22 + 2.0 * h12
    h2c = h22 + h12
    hess = np.empty((3, 3))
    hess[0, 0] = np.sum(x * x * hsum)
    hess[0, 1] = hess[1, 0] = -np.sum(x * hsum)
    hess[0, 2] = hess[2, 0] = -es * np.sum(x * h2c)
    hess[1, 1] = np.sum(hsum)
    hess[1, 2] = hess[2, 1] = es * np.sum(h2c)
    hess[2, 2] = es * es * np.sum(h22) + es * np.sum(d2)
    return ll, grad, hess


def _hess_natural(beta, t1, t2, x, masks):
    """Observed-information Hessian in the natural parameterization (beta, t1, t2)."""
    _, _, _, h11, h22, h12 = _cell_derivatives(beta, t1, t2, x, masks)
    hess = np.empty((3, 3))
    hess[0, 0] = np.sum(x * x * (h11 + h22 + 2.0 * h12))
    hess[0, 1] = hess[1, 0] = -np.sum(x * (h11 + h12))
    hess[0, 2] = hess[2, 0] = -np.sum(x * (h22 + h12))
    hess[1, 1] = np.sum(h11)
    hess[1, 2] = hess[2, 1] = np.sum(h12)
    hess[2, 2] = np.sum(h22)
    return hess


class OrderedLogit(BaseEstimator):
    """Maximum-likelihood proportional-odds model with a single predictor.

    Parameters
    ----------
    tol : relative log-likelihood change below which iteration stops.
    max_iter : Newton iteration cap; hitting it leaves ``converged_`` False.

    Attributes (after fit)
    ----------------------
    beta_ : slope on the predictor.
    thresholds_ : increasing cutpoints (theta_{-|o}, theta_{o|+}).
    loglik_, loglik_path_, n_iter_, converged_ : fit diagnostics.
    se_beta_, se_thresholds_ : observed-information standard errors (NaN when
        the information matrix is singular, e.g. under a constant predictor).
    """

    def __init__(self, tol: float = 1e-10, max_iter: int = 200):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, x, y) -> "OrderedLogit":
        xv = as_float_vector(x, "x")
        coded = _encode_categories(y)
        n = check_equal_length(xv, coded, names=("x", "y"))
        if n < 3:
            raise ValueError("need at least 3 observations")
        present = np.unique(coded)
        if present.size < 2:
            raise ValueError("need at least two distinct categories to fit thresholds")

        masks = tuple(coded == k for k in (0, 1, 2))
        counts = np.array([m.sum() for m in masks], dtype=float)

        # cumulative-logit start; this is already the MLE when x is constant
        eps = 0.5 / n
        q0 = min(max(counts[0] / n, eps), 1.0 - eps)
        q01 = min(max((counts[0] + counts[1]) / n, eps), 1.0 - eps)
        t1 = _logit(q0)
        gap = max(_logit(q01) - t1, 1e-6)
        v = np.array([0.0, t1, math.log(gap)])

        ll, grad, hess = _grad_hess_working(v, xv, masks)
        path = [ll]
        converged = False
        gtol = 1e-8 * max(1.0, float(n))
        it = 0
        for it in range(1, self.max_iter + 1):
            if np.abs(grad).max() <= gtol:
                # already stationary (e.g. constant predictor: the
                # cumulative-logit start is the MLE and the ridge along
                # beta must not be walked)
                converged = True
                break
            try:
                step = np.linalg.solve(hess, -grad)
                if not np.all(np.isfinite(step)):
                    raise np.linalg.LinAlgError
            except np.linalg.LinAlgError:
                step = grad  # steepest ascent fallback near flat regions
            # step halving: never accept a decrease in log-likelihood
            scale = 1.0
            new_v = v + step
            new_ll, new_grad, new_hess = _grad_hess_working(new_v, xv, masks)
            while new_ll < ll and scale > 1e-12:
                scale *= 0.5
                new_v = v + scale * step
                new_ll, new_grad, new_hess = _grad_hess_working(new_v, xv, masks)
            if new_ll < ll:
                converged = bool(np.abs(grad).max() < 1e-6)
                break
            v, grad, hess = new_v, new_grad, new_hess
            path.append(new_ll)
            if abs(new_ll - ll) <= self.tol * max(1.0, abs(new_ll)):
                ll = new_ll
                converged = True
                break
            ll = new_ll

        beta, t1, s = v
        t2 = t1 + math.exp(s)
        # a likelihood at the boundary (every item fitted with probability
        # ~1) or runaway magnitudes mean complete separation: the maximum
        # does not exist and the best iterate is reported unconverged
        at_boundary = path[-1] > n * math.log(1.0 - 1e-6)
        runaway = not np.all(np.isfinite([beta, t1, t2])) or max(abs(beta), abs(t1), abs(t2)) > 100.0
        if at_boundary or runaway:
            converged = False
        self.beta_ = float(beta)
        self.thresholds_ = np.array([t1, t2])
        self.loglik_ = float(path[-1])
        self.loglik_path_ = np.asarray(path)
        self.n_iter_ = it
        self.converged_ = bool(converged)
        self.classes_ = np.array([Category.MINUS, Category.NEUTRAL, Category.PLUS])

        info = -_hess_natural(beta, t1, t2, xv, masks)
        try:
            cov = np.linalg.inv(info)
            diag = np.diag(cov)
            ses = np.sqrt(np.where(diag > 0, diag, np.nan))
        except np.linalg.LinAlgError:
            ses = np.full(3, np.nan)
        self.se_beta_ = float(ses[0])
        self.se_thresholds_ = np.asarray(ses[1:])
        return self

    def predict_proba(self, x, allow_unconverged: bool = False) -> np.ndarray:
        """Per-item probability triples (P(MINUS), P(NEUTRAL), P(PLUS))."""
        check_fitted(self, "beta_")
        if not self.converged_ and not allow_unconverged:
            raise RuntimeError("fit did not converge; pass allow_unconverged=True to override")
        xv = as_float_vector(x, "x")
        c1 = _expit(self.thresholds_[0] - self.beta_ * xv)
        c2 = _expit(self.thresholds_[1] - self.beta_ * xv)
        probs = np.stack([c1, c2 - c1, 1.0 - c2], axis=1)
        return np.maximum(probs, 0.0)

    def predict(self, x, allow_unconverged: bool = False) -> np.ndarray:
        probs = self.predict_proba(x, allow_unconverged=allow_unconverged)
        return np.array([Category(int(k)) for k in np.argmax(probs, axis=1)], dtype=object)

    def to_dict(self) -> dict:
        check_fitted(self, "beta_")
        return {
            "beta": self.beta_,
            "thresholds": list(self.thresholds_),
            "se_beta": self.se_beta_,
            "se_thresholds": list(self.se_thresholds_),
            "loglik": self.loglik_,
            "n_iter": self.n_iter_,
            "converged": self.converged_,
        }
