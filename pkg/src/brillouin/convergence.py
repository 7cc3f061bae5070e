"""Empirical domain-of-convergence diagnostics.

The expansion converges for |z| > limsup |C_n|^{1/n}; the estimators here
work on the envelope of the oscillating coefficient sequence, taking
running maxima over octave windows [n, 2n] and then removing the slow
(log n)/n bias of the raw root statistic by fitting

    log max|C~| = n log(rho/R) + log K - gamma log n

over the window maxima.  A verdict of over-convergence on a synthetic
generic planet indicates a bug or a deliberate parameter coincidence:
convergence strictly below the Brillouin sphere requires the degenerate
cancellations that the closed-form predictors flag as vanishing.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._io import write_json
from .coeffs import coeff_series

__all__ = [
    "RootTestResult",
    "root_test",
    "LimsupStat",
    "limsup_stat",
    "ConvergenceReport",
    "convergence_verdict",
    "verdict_from_series",
]

CONVERGES_AT_BRILLOUIN = "ConvergesExactlyAtBrillouin"
OVERCONVERGENCE = "OverconvergenceSuspected"
INCONCLUSIVE = "Inconclusive"

BRILLOUIN_BAND = 0.01      # rho within 1% of R counts as "at the sphere"
OVERCONV_BAND = 0.03       # rho below R by > 3% counts as suspicious
WINDOW_AGREE_BAND = 0.01   # two tail estimates must agree to 1%
TREND_SLOPE_BAND = 0.25
MIN_WINDOW_N = 64


def _octave_maxima(ns, vals):
    """(n_at_max, log max|val|) per octave window [hi/2, hi), newest first."""
    out = []
    hi = int(ns[-1])
    while hi >= MIN_WINDOW_N and len(out) < 8:
        lo = hi // 2
        m = (ns >= lo) & (ns < hi + (1 if not out else 0))
        if np.any(m):
            vv = np.abs(vals[m])
            j = int(np.argmax(vv))
            if vv[j] > 0:
                out.append((float(ns[m][j]), math.log(vv[j])))
        hi = lo
    return out[::-1]


def _fit_rho(windows, R):
    nn = np.array([w[0] for w in windows])
    yy = np.array([w[1] for w in windows])
    A = np.vstack([nn, np.ones_like(nn), np.log(nn)]).T
    coef, *_ = np.linalg.lstsq(A, yy, rcond=None)
    return R * math.exp(min(coef[0], 0.0)), coef


@dataclass(frozen=True)
class RootTestResult:
    rho_hat: float
    degenerate: bool
    windows: tuple
    gamma: float


def root_test(series):
    """Envelope-corrected root estimate of the convergence radius.

    Identically zero tails return rho 0 with the degenerate flag (finite
    expansions).  Otherwise requires n_max >= 100 so at least three octave
    windows exist.
    """
    vals = series.values
    ns = series.n
    if not np.any(np.abs(vals) > 0):
        return RootTestResult(0.0, True, (), 0.0)
    if series.n_max < 100:
        raise ValueError("root test needs n_max >= 100")
    windows = _octave_maxima(ns, vals)
    if len(windows) < 3:
        raise ValueError("not enough octave windows for the root test")
    rho, coef = _fit_rho(windows, series.R)
    return RootTestResult(float(min(rho, series.R)), False, tuple(windows),
                          float(-coef[2]))


@dataclass(frozen=True)
class LimsupStat:
    beta_m: float
    window_centers: tuple
    window_maxima: tuple
    slope: float
    trend: str


def limsup_stat(series, beta_m):
    """Running window maxima of R^3 n^{3/2 + beta_m} |C~_n| and their trend.

    A flat positive trend means beta_m matches the envelope decay; the
    statistic diverges when beta_m is too large and dies when too small.
    """
    if beta_m <= 0:
        raise ValueError("beta_m must be positive")
    s = series.R**3 * series.n.astype(float) ** (1.5 + beta_m) * np.abs(series.values)
    windows = _octave_maxima(series.n, s)
    if len(windows) < 2:
        return LimsupStat(beta_m, (), (), 0.0, INCONCLUSIVE)
    nn = np.array([w[0] for w in windows])
    yy = np.array([w[1] for w in windows])
    slope = float(np.polyfit(np.log(nn), yy, 1)[0])
    if slope > TREND_SLOPE_BAND:
        trend = "increasing"
    elif slope < -TREND_SLOPE_BAND:
        trend = "decaying"
    else:
        trend = "flat"
    return LimsupStat(beta_m, tuple(nn.tolist()),
                      tuple(math.exp(y) for y in yy), slope, trend)


@dataclass(frozen=True)
class ConvergenceReport:
    rho_hat: float
    rho_check: float
    beta_m: float
    limsup_trend: str
    verdict: str
    n_range: tuple
    degenerate: bool = False

    def to_json_dict(self, config_hash=None):
        d = {
            "rho_hat": self.rho_hat,
            "rho_check": self.rho_check,
            "beta_m": self.beta_m,
            "limsup_trend": self.limsup_trend,
            "verdict": self.verdict,
            "n_range": list(self.n_range),
            "degenerate": self.degenerate,
        }
        if config_hash is not None:
            d["config_hash"] = config_hash
        return d

    def to_json(self, path, config_hash=None):
        write_json(path, self.to_json_dict(config_hash=config_hash))

    def render(self):
        lines = [
            "convergence verdict",
            f"  rho_hat      : {self.rho_hat:.6g}",
            f"  cross-check  : {self.rho_check:.6g}",
            f"  beta_m       : {self.beta_m:.6g}",
            f"  limsup trend : {self.limsup_trend}",
            f"  orders       : {self.n_range[0]}..{self.n_range[1]}",
            f"  verdict      : {self.verdict}",
        ]
        return "\n".join(lines)


def verdict_from_series(series, beta_m=None):
    """Convergence verdict for an already computed coefficient series.

    ``beta_m`` defaults to the envelope-fitted exponent (gamma - 3/2); an
    explicit value makes the limsup statistic a genuine two-sided check.
    The verdict is Inconclusive when the two tail estimates of rho disagree
    by more than 1% or there is not enough data.
    """
    R = series.R
    vals = series.values
    if not np.any(np.abs(vals) > 0):
        return ConvergenceReport(0.0, 0.0, 0.0, "flat", OVERCONVERGENCE,
                                 (series.n_min, series.n_max), degenerate=True)
    try:
        rt = root_test(series)
    except ValueError:
        return ConvergenceReport(float("nan"), float("nan"), 0.0, INCONCLUSIVE,
                                 INCONCLUSIVE, (series.n_min, series.n_max))
    windows = rt.windows
    if len(windows) >= 4:
        rho_check, _ = _fit_rho(windows[:-1], R)
        rho_check = min(rho_check, R)
    else:
        rho_check = rt.rho_hat
    disagree = abs(rt.rho_hat - rho_check) / R > WINDOW_AGREE_BAND

    if beta_m is None:
        beta_m = max(rt.gamma - 1.5, 0.5)
    ls = limsup_stat(series, beta_m)

    if disagree:
        verdict = INCONCLUSIVE
    elif rt.rho_hat >= R * (1.0 - BRILLOUIN_BAND) and ls.trend == "flat":
        verdict = CONVERGES_AT_BRILLOUIN
    elif rt.rho_hat < R * (1.0 - OVERCONV_BAND):
        verdict = OVERCONVERGENCE
    else:
        verdict = INCONCLUSIVE
    return ConvergenceReport(rt.rho_hat, rho_check, float(beta_m), ls.trend,
                             verdict, (series.n_min, series.n_max))


def convergence_verdict(profile, n_max, tol=1e-10, beta_m=None, n_min=1):
    """Compute the coefficient series and classify where it converges."""
    series = coeff_series(profile, n_min, n_max, tol)
    return verdict_from_series(series, beta_m=beta_m)
