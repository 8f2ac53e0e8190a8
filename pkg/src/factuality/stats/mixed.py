"""Linear mixed-effects regression with a random intercept and slope per group.

Fits ``y = (a + a_g) + (b + b_g) * x + e`` by maximum likelihood, where the
per-group deviations (a_g, b_g) share a 2x2 covariance. Estimation is plain
EM treating the deviations as missing data, so the observed-data
log-likelihood is non-decreasing across iterations; per-group effects are
posterior modes.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from sklearn.base import BaseEstimator

from ..validation import as_float_vector, check_equal_length, check_fitted

_VAR_FLOOR = 1e-12


class MixedLinearModel(BaseEstimator):
    """Random-intercept-and-slope regression fit by EM.

    Parameters
    ----------
    tol : relative log-likelihood change below which EM stops.
    max_iter : EM iteration cap.
    random_effects : when False the covariance is pinned to zero and the fit
        reduces to ordinary least squares (single groups are then allowed).

    Attributes (after fit)
    ----------------------
    fixed_intercept_, fixed_slope_ : fixed effects.
    group_effects_ : dict group label -> (intercept deviation, slope deviation).
    cov_ : 2x2 random-effect covariance (positive semidefinite).
    residual_var_ : residual variance (floored at 1e-12 for exact-fit data).
    loglik_, loglik_path_, n_iter_, converged_ : fit diagnostics.
    """

    def __init__(self, tol: float = 1e-10, max_iter: int = 200, random_effects: bool = True):
        self.tol = tol
        self.max_iter = max_iter
        self.random_effects = random_effects

    def fit(self, x, y, groups) -> "MixedLinearModel":
        xv = as_float_vector(x, "x")
        yv = as_float_vector(y, "y")
        labels = list(groups)
        check_equal_length(xv, yv, labels, names=("x", "y", "groups"))
        if len(xv) == 0:
            raise ValueError("empty data")

        index: dict = {}
        for i, g in enumerate(labels):
            index.setdefault(g, []).append(i)
        order = sorted(index, key=repr)
        if self.random_effects:
            if len(order) < 2:
                raise ValueError("need at least 2 groups for random effects")
            small = [repr(g) for g in order if len(index[g]) < 3]
            if small:
                raise ValueError(f"groups too small (need >= 3 points): {', '.join(small)}")

        Xg = [np.column_stack([np.ones(len(index[g])), xv[index[g]]]) for g in order]
        yg = [yv[index[g]] for g in order]
        N = len(xv)
        G = len(order)

        theta, *_ = np.linalg.lstsq(np.vstack(Xg), np.concatenate(yg), rcond=None)
        resid = np.concatenate(yg) - np.vstack(Xg) @ theta
        sigma2 = max(float(resid @ resid) / N, _VAR_FLOOR)

        if not self.random_effects:
            psi = np.zeros((2, 2))
            means = [np.zeros(2) for _ in order]
            ll = self._loglik(Xg, yg, theta, sigma2, psi)
            self._finalize(order, theta, psi, sigma2, means, [ll], 0, True)
            return self

        # start the deviation covariance from per-group least squares
        devs = []
        for X, yv_g in zip(Xg, yg):
            coef, *_ = np.linalg.lstsq(X, yv_g, rcond=None)
            devs.append(coef - theta)
        psi = sum(np.outer(d, d) for d in devs) / G
        psi += np.eye(2) * (1e-6 * (np.trace(psi) / 2.0 + 1.0))

        ll = self._loglik(Xg, yg, theta, sigma2, psi)
        path = [ll]
        converged = False
        ridge_warned = False
        it = 0
        xtx_total = sum(X.T @ X for X in Xg)
        for it in range(1, self.max_iter + 1):
            psi, ridge_warned = self._ensure_invertible(psi, ridge_warned)
            psi_inv = np.linalg.inv(psi)

            # E-step: posterior mean/covariance of each group's deviations
            means, covs = [], []
            for X, yv_g in zip(Xg, yg):
                A = X.T @ X
                M = A / sigma2 + psi_inv
                V = np.linalg.inv(M)
                m = V @ (X.T @ (yv_g - X @ theta)) / sigma2
                means.append(m)
                covs.append(V)

            # M-step
            theta = np.linalg.solve(
                xtx_total, sum(X.T @ (yv_g - X @ m) for X, yv_g, m in zip(Xg, yg, means))
            )
            sse = 0.0
            for X, yv_g, m, V in zip(Xg, yg, means, covs):
                r = yv_g - X @ theta - X @ m
                sse += float(r @ r) + float(np.sum(V * (X.T @ X)))
            sigma2 = max(sse / N, _VAR_FLOOR)
            psi = sum(np.outer(m, m) + V for m, V in zip(means, covs)) / G

            new_ll = self._loglik(Xg, yg, theta, sigma2, psi)
            path.append(new_ll)
            if abs(new_ll - ll) <= self.tol * max(1.0, abs(new_ll)):
                ll = new_ll
                converged = True
                break
            ll = new_ll

        # posterior modes under the final parameters
        psi, ridge_warned = self._ensure_invertible(psi, ridge_warned)
        psi_inv = np.linalg.inv(psi)
        means = [
            np.linalg.solve(X.T @ X / sigma2 + psi_inv, X.T @ (yv_g - X @ theta) / sigma2)
            for X, yv_g in zip(Xg, yg)
        ]
        self._finalize(order, theta, psi, sigma2, means, path, it, converged)
        return self

    @staticmethod
    def _ensure_invertible(psi: np.ndarray, warned: bool) -> tuple[np.ndarray, bool]:
        det = psi[0, 0] * psi[1, 1] - psi[0, 1] * psi[1, 0]
        scale = max(np.trace(psi) / 2.0, _VAR_FLOOR)
        if det <= 1e-12 * scale * scale:
            if not warned:
                warnings.warn(
                    "random-effect covariance is near singular; ridge-stabilized",
                    RuntimeWarning,
                    stacklevel=3,
                )
                warned = True
            psi = psi + np.eye(2) * (1e-10 * scale)
        return psi, warned

    @staticmethod
    def _loglik(Xg, yg, theta, sigma2, psi) -> float:
        """Exact marginal log-likelihood, one small solve per group."""
        ll = 0.0
        eye = np.eye(2)
        for X, yv_g in zip(Xg, yg):
            n = len(yv_g)
            r = yv_g - X @ theta
            A = X.T @ X
            sign, logdet = np.linalg.slogdet(eye + psi @ A / sigma2)
            if sign <= 0:
                return -np.inf
            zr = X.T @ r
            inner = np.linalg.solve(sigma2 * np.linalg.inv(psi) + A, zr) if _is_pd(psi) else None
            if inner is None:
                quad = float(r @ r) / sigma2
            else:
                quad = (float(r @ r) - float(zr @ inner)) / sigma2
            ll += -0.5 * (n * math.log(2.0 * math.pi * sigma2) + logdet + quad)
        return ll

    def _finalize(self, order, theta, psi, sigma2, means, path, n_iter, converged) -> None:
        self.fixed_intercept_ = float(theta[0])
        self.fixed_slope_ = float(theta[1])
        self.cov_ = np.asarray(psi)
        self.residual_var_ = float(sigma2)
        self.group_effects_ = {g: np.asarray(m) for g, m in zip(order, means)}
        self.group_labels_ = list(order)
        self.loglik_ = float(path[-1])
        self.loglik_path_ = np.asarray(path)
        self.n_iter_ = n_iter
        self.converged_ = bool(converged)

    def group_coefficients(self) -> dict:
        """Per-group (intercept, slope) totals: fixed effect plus deviation."""
        check_fitted(self, "group_effects_")
        return {
            g: (self.fixed_intercept_ + float(m[0]), self.fixed_slope_ + float(m[1]))
            for g, m in self.group_effects_.items()
        }

    def predict(self, x, groups) -> np.ndarray:
        """Fitted values; unseen group labels fall back to the fixed effects."""
        check_fitted(self, "group_effects_")
        xv = as_float_vector(x, "x")
        labels = list(groups)
        check_equal_length(xv, labels, names=("x", "groups"))
        out = np.empty(len(xv))
        for i, (xi, g) in enumerate(zip(xv, labels)):
            dev = self.group_effects_.get(g)
            a = self.fixed_intercept_ + (float(dev[0]) if dev is not None else 0.0)
            b = self.fixed_slope_ + (float(dev[1]) if dev is not None else 0.0)
            out[i] = a + b * xi
        return out

    def to_dict(self) -> dict:
        check_fitted(self, "group_effects_")
        return {
            "fixed_intercept": self.fixed_intercept_,
            "fixed_slope": self.fixed_slope_,
            "group_effects": {
                repr(g) if not isinstance(g, str) else g: [float(m[0]), float(m[1])]
                for g, m in self.group_effects_.items()
            },
            "cov": [list(map(float, row)) for row in self.cov_],
            "residual_var": self.residual_var_,
            "loglik": self.loglik_,
            "n_iter": self.n_iter_,
            "converged": self.converged_,
        }


def _is_pd(psi: np.ndarray) -> bool:
    return psi[0, 0] > 0 and psi[1, 1] > 0 and np.linalg.det(psi) > 0
