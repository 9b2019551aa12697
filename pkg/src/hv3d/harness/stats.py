"""Correlation coefficients and the four-parameter logistic mapping."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, special, stats

from ..errors import InsufficientDataError

__all__ = ["pearson", "spearman", "LogisticFit", "logistic", "logistic_fit"]

log = logging.getLogger(__name__)


def _vectors(x, y, min_len=3):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < min_len:
        raise InsufficientDataError(f"need at least {min_len} points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")
    return x, y


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation."""
    x, y = _vectors(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0:
        raise ValueError("first input has zero variance")
    if syy == 0.0:
        raise ValueError("second input has zero variance")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks."""
    x, y = _vectors(x, y)
    rx, ry = stats.rankdata(x), stats.rankdata(y)
    if np.all(rx == rx[0]):
        raise ValueError("first input is constant; ranks have zero variance")
    if np.all(ry == ry[0]):
        raise ValueError("second input is constant; ranks have zero variance")
    return pearson(rx, ry)


def logistic(x, a, b, c, d):
    """``a + (b - a) / (1 + exp(-(x - c) / d))``."""
    return a + (b - a) * special.expit((np.asarray(x, dtype=np.float64) - c) / d)


@dataclass(frozen=True)
class LogisticFit:
    a: float
    b: float
    c: float
    d: float
    rmse: float
    converged: bool
    degenerate: bool = False

    @property
    def params(self):
        return self.a, self.b, self.c, self.d

    def predict(self, x):
        return logistic(x, *self.params)


def _starts(z, y):
    a0, b0 = float(y.min()), float(y.max())
    q1, med, q3 = np.percentile(z, [25, 50, 75])
    iqr = float(q3 - q1) or float(np.ptp(z)) or 1.0
    for c0 in (med, q1, q3):
        for scale in (1.0, 0.25, 4.0):
            for sign in (1.0, -1.0):
                yield np.array([a0, b0, float(c0), sign * iqr * scale])


def logistic_fit(scores: Sequence[float], mos: Sequence[float],
                 max_nfev: int = 2000) -> LogisticFit:
    """Least-squares fit of the 4-parameter logistic from fixed starts.

    Starts are seeded from the data (MOS range for the asymptotes, score
    quartiles for the midpoint, score IQR for the slope) and refined with
    Levenberg-Marquardt; the lowest-cost converged solution wins. The
    result is reported with ``d > 0``.
    """
    x, y = _vectors(scores, mos, min_len=5)
    xm, xs = float(x.mean()), float(x.std())
    if np.ptp(y) == 0.0 or xs == 0.0:
        yc = float(y.mean())
        c = float(np.median(x))
        rmse = math.sqrt(float(np.mean((y - yc) ** 2)))
        return LogisticFit(yc, yc, c, 1.0, rmse, converged=False, degenerate=True)
    z = (x - xm) / xs

    def resid(p):
        return p[0] + (p[1] - p[0]) * special.expit((z - p[2]) / p[3]) - y

    best = None
    for p0 in _starts(z, y):
        try:
            r = optimize.least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15,
                                       gtol=1e-15, max_nfev=max_nfev)
        except (ValueError, FloatingPointError):
            continue
        if not np.all(np.isfinite(r.x)) or r.x[3] == 0.0:
            continue
        ok = r.status > 0
        key = (not ok, r.cost)
        if best is None or key < best[0]:
            best = (key, r.x, ok)
    if best is None:
        log.warning("logistic fit failed from every start; returning linear-range guess")
        p, ok = next(_starts(z, y)), False
    else:
        _, p, ok = best
    a, b, c, d = (float(v) for v in p)
    if d < 0:
        a, b, d = b, a, -d
    c, d = xm + xs * c, xs * d
    fit = LogisticFit(a, b, c, d, 0.0, converged=bool(ok))
    rmse = math.sqrt(float(np.mean((fit.predict(x) - y) ** 2)))
    if not ok:
        log.warning("logistic fit did not converge (best-effort parameters returned)")
    return LogisticFit(a, b, c, d, rmse, converged=bool(ok))
