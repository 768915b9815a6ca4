"""ARMA baselines: conditional least-squares fitting and one-step prediction.

Also provides the linear price-plus-sentiment predictor that weights an ARMA
price forecast together with a linear function of recent sentiment scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArmaParams",
    "SentimentArmaParams",
    "ResidualState",
    "SingularSystemError",
    "arma_predict",
    "arma_fit",
    "arma_one_step_predictions",
    "residual_trajectory",
    "sentiment_arma_predict",
    "sentiment_arma_fit",
]


class SingularSystemError(ValueError):
    """The least-squares normal equations are rank-deficient."""


@dataclass(frozen=True, eq=False)
class ArmaParams:
    """Level constant plus AR and MA coefficient vectors."""

    mu: float
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=np.float64))
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=np.float64))
        if self.phi.ndim != 1 or self.psi.ndim != 1:
            raise ValueError("phi and psi must be 1-D coefficient vectors")
        if not (math.isfinite(self.mu) and np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.psi))):
            raise ValueError("all coefficients must be finite")

    @property
    def p(self) -> int:
        return len(self.phi)

    @property
    def q(self) -> int:
        return len(self.psi)

    def to_dict(self) -> dict:
        return {"mu": self.mu, "phi": self.phi.tolist(), "psi": self.psi.tolist()}


@dataclass(frozen=True, eq=False)
class SentimentArmaParams:
    """Weights for predicted price, recent sentiment, and an intercept."""

    alpha: float
    lambda_s: float
    c: float
    price_arma: ArmaParams
    sent_coeffs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "sent_coeffs", np.asarray(self.sent_coeffs, dtype=np.float64))
        if len(self.sent_coeffs) != self.price_arma.p:
            raise ValueError("sent_coeffs must have one weight per AR lag")
        values = (self.alpha, self.lambda_s, self.c)
        if not all(math.isfinite(v) for v in values) or not np.all(np.isfinite(self.sent_coeffs)):
            raise ValueError("all coefficients must be finite")


@dataclass
class ResidualState:
    """Rolling buffer of the last q one-step residuals, most recent last."""

    eps: np.ndarray

    def __post_init__(self) -> None:
        self.eps = np.asarray(self.eps, dtype=np.float64)
        if self.eps.ndim != 1:
            raise ValueError("eps must be a 1-D buffer")

    @classmethod
    def zeros(cls, q: int) -> "ResidualState":
        return cls(np.zeros(q))

    def push(self, residual: float) -> None:
        """Shift the buffer and append the newest residual."""
        if len(self.eps):
            self.eps = np.append(self.eps[1:], residual)


def arma_predict(
    params: ArmaParams, history, residuals: ResidualState | None = None
) -> float:
    """One-step point forecast: mu + sum(phi_i * x[t-i]) - sum(psi_j * eps[t-j]).

    ``history`` holds past values with the most recent last; ``residuals``
    defaults to a zero buffer (the convention for point forecasts).
    """
    hist = np.asarray(history, dtype=np.float64)
    if len(hist) < params.p:
        raise ValueError(f"history of length {len(hist)} is shorter than AR order {params.p}")
    value = params.mu
    if params.p:
        recent = hist[len(hist) - params.p :][::-1]  # recent[i-1] = x[t-i]
        value += float(np.dot(params.phi, recent))
    if params.q:
        eps = np.zeros(params.q) if residuals is None else residuals.eps
        if len(eps) != params.q:
            raise ValueError("residual buffer length must equal q")
        value -= float(np.dot(params.psi, eps[::-1]))
    return float(value)


def _solve_least_squares(A: np.ndarray, b: np.ndarray, ridge: float) -> np.ndarray:
    if ridge > 0.0:
        gram = A.T @ A + ridge * np.eye(A.shape[1])
        return np.linalg.solve(gram, A.T @ b)
    theta, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < A.shape[1]:
        raise SingularSystemError(
            f"normal equations are singular (rank {rank} of {A.shape[1]}); "
            "pass ridge > 0 to regularize"
        )
    return theta


def _design_matrix(x: np.ndarray, eps: np.ndarray, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(x)
    t0 = max(p, q)  # every AR and MA lag must exist
    cols = [np.ones(n - t0)]
    for i in range(1, p + 1):
        cols.append(x[t0 - i : n - i])
    for j in range(1, q + 1):
        cols.append(-eps[t0 - j : n - j])
    return np.column_stack(cols), x[t0:]


def _refresh_residuals(x: np.ndarray, mu: float, phi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Recompute one-step residuals sequentially, seeding the first p at zero.

    Residual lags that fall before the start of the series count as zero,
    the same convention as the zero seeding of the warm-up span.
    """
    p, q = len(phi), len(psi)
    eps = np.zeros(len(x))
    for t in range(p, len(x)):
        pred = mu
        for i in range(1, p + 1):
            pred += phi[i - 1] * x[t - i]
        for j in range(1, min(q, t) + 1):
            pred -= psi[j - 1] * eps[t - j]
        eps[t] = x[t] - pred
    return eps


def arma_fit(
    series, p: int, q: int, *, ridge: float = 0.0, refinements: int = 50
) -> ArmaParams:
    """Fit ARMA(p, q) by conditional least squares with zero-seeded residuals.

    For q > 0 the residual series is refreshed and the regression re-solved
    ``refinements`` times. Deterministic for fixed input. Raises
    SingularSystemError on rank-deficient regressors unless ridge > 0.
    """
    x = np.asarray(getattr(series, "prices", series), dtype=np.float64)
    if p < 0 or q < 0:
        raise ValueError("orders must be non-negative")
    if len(x) < p + q + 2:
        raise ValueError(f"series of length {len(x)} is too short for ARMA({p}, {q})")
    mu, phi, psi = 0.0, np.zeros(p), np.zeros(q)
    eps = np.zeros(len(x))
    if q > 0:
        # Zero-seeded residual columns would be identically zero on the first
        # pass, so warm up with the AR-only regression to obtain residuals.
        A, b = _design_matrix(x, eps, p, 0)
        theta = _solve_least_squares(A, b, ridge)
        eps = _refresh_residuals(x, float(theta[0]), theta[1:], psi)
    for _ in range(refinements if q > 0 else 1):
        A, b = _design_matrix(x, eps, p, q)
        theta = _solve_least_squares(A, b, ridge)
        mu = float(theta[0])
        phi = theta[1 : 1 + p]
        psi = theta[1 + p :]
        if q == 0:
            break
        eps = _refresh_residuals(x, mu, phi, psi)
    return ArmaParams(mu, phi, psi)


def residual_trajectory(params: ArmaParams, series) -> np.ndarray:
    """One-step residuals over the whole series (zeros for t < p)."""
    x = np.asarray(getattr(series, "prices", series), dtype=np.float64)
    return _refresh_residuals(x, params.mu, params.phi, params.psi)


def arma_one_step_predictions(params: ArmaParams, series) -> np.ndarray:
    """In-sample one-step forecasts for t = p..n-1, tracking residuals."""
    x = np.asarray(getattr(series, "prices", series), dtype=np.float64)
    eps = residual_trajectory(params, x)
    preds = x[params.p :] - eps[params.p :]
    return preds


def sentiment_arma_predict(
    params: SentimentArmaParams,
    price_history,
    sent_history,
    residuals: ResidualState | None = None,
) -> float:
    """alpha * ARMA price forecast + lambda_s * (sentiment lags . coeffs) + c."""
    base = arma_predict(params.price_arma, price_history, residuals)
    p = params.price_arma.p
    sent = np.asarray(sent_history, dtype=np.float64)
    if len(sent) < p:
        raise ValueError(f"sentiment history of length {len(sent)} is shorter than {p}")
    recent = sent[len(sent) - p :][::-1] if p else sent[:0]
    f2 = float(np.dot(params.sent_coeffs, recent)) if p else 0.0
    return params.alpha * base + params.lambda_s * f2 + params.c


def sentiment_arma_fit(
    prices, sentiments, p: int, q: int = 0, *, ridge: float = 0.0
) -> SentimentArmaParams:
    """Fit the combined predictor by least squares on top of a fitted ARMA.

    The sentiment term's overall scale is not identifiable separately from
    its lag coefficients, so lambda_s is fixed at 1.0 and the scale lives in
    the learned coefficients.
    """
    x = np.asarray(getattr(prices, "prices", prices), dtype=np.float64)
    s = np.asarray(sentiments, dtype=np.float64)
    if len(x) != len(s):
        raise ValueError("price and sentiment series must align")
    if p < 1:
        raise ValueError("need at least one AR lag for the sentiment term")
    price_arma = arma_fit(x, p, q, ridge=ridge)
    base = arma_one_step_predictions(price_arma, x)
    n = len(x)
    cols = [np.ones(n - p), base]
    for i in range(1, p + 1):
        cols.append(s[p - i : n - i])
    theta = _solve_least_squares(np.column_stack(cols), x[p:], ridge)
    return SentimentArmaParams(
        alpha=float(theta[1]),
        lambda_s=1.0,
        c=float(theta[0]),
        price_arma=price_arma,
        sent_coeffs=theta[2:],
    )
