"""Sphere Green's function, swept surface densities, their longitudinal
average, the half-power-to-Cauchy transform A, and Plemelj jump recovery.

Everything is set in three dimensions on the unit sphere (radial units
normalized to the Brillouin radius).  Sign convention: the swept density
sigma and its longitudinal average mu are kept nonnegative for positive
mass, normalized so the integral of mu over [-1, 1] equals the total
(G-weighted) swept mass; the attractive potential is then recovered as

    V(z) = -Q(p) / sqrt(z^2 + 1),   p = 2 z / (z^2 + 1),

which is negative for positive mass, matching the coefficient module.

The transform A acts diagonally on Maclaurin coefficients,
c_k -> sqrt(pi) Gamma(1+k) / Gamma(k+1/2) c_k, and maps the square-root
kernel (1 - p x)^{-1/2} to the Cauchy kernel (1 - p x)^{-1}; on the
variable zeta = 1/p it is the Cauchy transform zeta * int mu(x)/(zeta - x) dx,
whose jump across (-1, 0) u (0, 1) returns -2 pi i x mu(x).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._io import write_csv
from ._panels import composite_nodes, graded_offsets, uniform_breakpoints
from .errors import BrillouinError

__all__ = [
    "SurfaceMeasure",
    "PowerSeries",
    "green_sphere",
    "swept_density_point",
    "mu_from_point_masses",
    "build_Q",
    "apply_A_series",
    "apply_A_cauchy",
    "plemelj_jump",
    "analyticity_probe",
    "swept_potential",
    "halfpower_convolution_coeff",
    "CutViolation",
    "OnCut",
    "ExtrapolationUnstable",
]


class CutViolation(BrillouinError):
    """The kernel (1 - p x)^{-1/2} is singular on [-1, 1] for this p."""


class OnCut(BrillouinError):
    """Cauchy transform evaluated on the cut [-1, 1]."""


class ExtrapolationUnstable(BrillouinError):
    """Richardson extrapolation of the jump failed to settle."""


@dataclass(frozen=True)
class SurfaceMeasure:
    """Longitudinally averaged surface density mu as a function of x = cos(theta).

    ``mu`` is a vectorized callable on [-1, 1]; ``smoothness`` optionally
    records a known Holder exponent or "analytic".
    """

    mu: Callable
    smoothness: Optional[str] = None

    def __call__(self, x):
        return self.mu(np.asarray(x, dtype=float))

    def total_mass(self, n_nodes=400):
        bp = uniform_breakpoints(-1.0, 1.0, 2.0 / (n_nodes // 16))
        x, w = composite_nodes(bp)
        return float(np.sum(w * self(x)))

    def sample(self, xs):
        xs = np.asarray(xs, dtype=float)
        return xs, self(xs)

    def to_csv(self, path, xs, config_hash=None):
        xs, vals = self.sample(xs)
        write_csv(path, ["x", "mu"], zip(xs.tolist(), vals.tolist()),
                  config_hash=config_hash)

    @staticmethod
    def from_samples(xs, vals, smoothness=None):
        xs = np.asarray(xs, dtype=float)
        vals = np.asarray(vals, dtype=float)

        def interp(x):
            return np.interp(np.asarray(x, dtype=float), xs, vals)

        return SurfaceMeasure(interp, smoothness=smoothness)

    @staticmethod
    def from_csv(path, smoothness=None):
        xs, vals = [], []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.startswith("x,"):
                    continue
                a, b = line.split(",")
                xs.append(float(a))
                vals.append(float(b))
        return SurfaceMeasure.from_samples(np.array(xs), np.array(vals),
                                           smoothness=smoothness)


@dataclass(frozen=True)
class PowerSeries:
    """Finite Maclaurin coefficient vector c_0..c_K on the unit disk."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs))
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")

    def __len__(self):
        return len(self.coeffs)

    def eval(self, p):
        total = 0.0
        for c in self.coeffs[::-1]:
            total = total * p + c
        return total


# ---------------------------------------------------------------------------
# Green's function and swept densities
# ---------------------------------------------------------------------------

def green_sphere(x, y):
    """Green's function of the unit ball at interior x and point y (interior
    or on the sphere), by the method of images:

        G(x, y) = Phi(y - x) - Phi(|x| (y - x*)),   x* = x / |x|^2,

    with Phi(w) = 1 / (4 pi |w|).  The image norm |x| |y - x*| equals
    sqrt(|x|^2 |y|^2 - 2 x.y + 1), a symmetric expression that stays finite
    as x -> 0, where G tends to (1/4 pi)(1/|y| - 1).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    direct = np.linalg.norm(y - x)
    if direct == 0.0:
        raise ValueError("Green's function is singular at x = y")
    image = math.sqrt(max(float(x @ x) * float(y @ y) - 2.0 * float(x @ y) + 1.0, 0.0))
    return (1.0 / direct - 1.0 / image) / (4.0 * math.pi)


def swept_density_point(x0, y):
    """Surface density swept from a unit point mass at interior x0:

        sigma(y) = (1 - |x0|^2) / (4 pi |y - x0|^3),   |y| = 1,

    the outward normal derivative of the Green's function.  Nonnegative and
    of unit total mass.
    """
    x0 = np.asarray(x0, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = float(x0 @ x0)
    if y.ndim == 1:
        d = np.linalg.norm(y - x0)
        return (1.0 - r2) / (4.0 * math.pi * d**3)
    d = np.linalg.norm(y - x0[None, :], axis=-1)
    return (1.0 - r2) / (4.0 * math.pi * d**3)


def _axis_mu(m, d, x):
    # closed form for a mass on the polar axis at height d
    return m * (1.0 - d * d) / (2.0 * (1.0 - 2.0 * d * x + d * d) ** 1.5)


def mu_from_point_masses(masses, G=1.0, tol=1e-12):
    """Longitudinal average of the swept densities of interior point masses.

    ``masses`` is a sequence of (m, (x, y, z)) with |position| < 1.  The
    longitude integral of each swept density is smooth and periodic, so a
    doubling trapezoid rule converges spectrally; on-axis masses reduce to
    a closed form.  Total mass of the result equals G * sum(m).
    """
    prepared = []
    for m, pos in masses:
        pos = np.asarray(pos, dtype=float)
        r = float(np.linalg.norm(pos))
        if r >= 1.0:
            raise ValueError("point masses must lie strictly inside the unit ball")
        ct = 1.0 if r == 0.0 else pos[2] / r
        st = math.sqrt(max(1.0 - ct * ct, 0.0))
        prepared.append((float(m), r, ct, st))

    def mu(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        st_x = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
        total = np.zeros_like(x)
        for m, r, ct, st in prepared:
            if r * st < 1e-14:
                total += _axis_mu(m, r * (1.0 if ct >= 0 else -1.0) * abs(ct) if r else 0.0, x) \
                    if r else m * np.full_like(x, 0.5)
                continue
            A = 1.0 + r * r - 2.0 * r * x * ct
            B = 2.0 * r * st_x * st
            n_lam = 64
            prev = None
            while True:
                lam = np.linspace(0.0, 2.0 * math.pi, n_lam, endpoint=False)
                integrand = (A[:, None] - B[:, None] * np.cos(lam)[None, :]) ** -1.5
                cur = integrand.mean(axis=1) * 2.0 * math.pi
                if prev is not None and np.max(np.abs(cur - prev)) <= tol * max(
                        1.0, float(np.max(np.abs(cur)))):
                    break
                if n_lam >= 1 << 16:
                    break
                prev = cur
                n_lam *= 2
            total += m * (1.0 - r * r) / (4.0 * math.pi) * cur
        return total * G

    def mu_scalar_ok(x):
        out = mu(x)
        return out if np.ndim(x) else float(out[0])

    return SurfaceMeasure(mu_scalar_ok, smoothness="analytic")


def swept_potential(x0, obs, n_theta=200):
    """Exterior potential of the swept density of a unit mass at x0,
    integrated over the sphere: should equal 1/|obs - x0| for |obs| > 1."""
    x0 = np.asarray(x0, dtype=float)
    obs = np.asarray(obs, dtype=float)
    rule_x, rule_w = composite_nodes(uniform_breakpoints(-1.0, 1.0, 2.0 / (n_theta // 16)))
    n_lam = 2 * n_theta
    lam = np.linspace(0.0, 2.0 * math.pi, n_lam, endpoint=False)
    st = np.sqrt(np.clip(1.0 - rule_x**2, 0.0, None))
    y = np.empty((rule_x.size, n_lam, 3))
    y[:, :, 0] = st[:, None] * np.cos(lam)[None, :]
    y[:, :, 1] = st[:, None] * np.sin(lam)[None, :]
    y[:, :, 2] = rule_x[:, None]
    d_src = np.linalg.norm(y - x0[None, None, :], axis=-1)
    sigma = (1.0 - float(x0 @ x0)) / (4.0 * math.pi * d_src**3)
    d_obs = np.linalg.norm(y - obs[None, None, :], axis=-1)
    vals = (sigma / d_obs).mean(axis=1) * 2.0 * math.pi
    return float(np.sum(rule_w * vals))


# ---------------------------------------------------------------------------
# the transform A
# ---------------------------------------------------------------------------

def build_Q(measure, p, tol=1e-12):
    """Q(p) = integral_{-1}^{1} mu(x) (1 - p x)^{-1/2} dx.

    Real p must satisfy |p| < 1 (beyond that the kernel's branch point
    enters the integration range); complex p off the real rays |p| >= 1 is
    allowed.  The attractive axis potential is -Q(p(z)) / sqrt(z^2 + 1).
    """
    p = complex(p)
    if p.imag == 0.0 and abs(p.real) >= 1.0:
        raise CutViolation(f"p = {p.real} puts the kernel singularity inside [-1, 1]")

    def run(level):
        # graded panels toward both endpoints handle p near +-1
        offs = graded_offsets(2.0 ** -(18 + 2 * level), 0.25 / 2.0**level)
        bp = sorted(set(np.concatenate([
            -1.0 + offs, 1.0 - offs,
            uniform_breakpoints(-1.0 + offs[-1], 1.0 - offs[-1], 0.125 / 2.0**level),
        ])))
        x, w = composite_nodes(np.asarray(bp))
        ker = (1.0 - p * x) ** -0.5
        return np.sum(w * measure(x) * ker)

    prev = run(0)
    for level in range(1, 4):
        cur = run(level)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            prev = cur
            break
        prev = cur
    val = prev
    return complex(val) if p.imag != 0.0 else float(np.real(val))


_A_MULTIPLIER_CACHE = [1.0]


def _a_multiplier(k):
    # sqrt(pi) Gamma(1 + k) / Gamma(k + 1/2), by the stable ratio recurrence
    while len(_A_MULTIPLIER_CACHE) <= k:
        j = len(_A_MULTIPLIER_CACHE)
        _A_MULTIPLIER_CACHE.append(_A_MULTIPLIER_CACHE[-1] * j / (j - 0.5))
    return _A_MULTIPLIER_CACHE[k]


def apply_A_series(series):
    """A acting on Maclaurin coefficients: c_k -> sqrt(pi) Gamma(1+k) / Gamma(k+1/2) c_k."""
    out = np.array([_a_multiplier(k) * c for k, c in enumerate(series.coeffs)])
    return PowerSeries(out)


def halfpower_convolution_coeff(k):
    """Coefficient of p^{k + 1/2} in the convolution p^{-1/2} * p^k:
    sqrt(pi) Gamma(1 + k) / Gamma(k + 3/2).  Differentiating and scaling by
    sqrt(p) multiplies by (k + 1/2), reproducing the diagonal multiplier of
    :func:`apply_A_series`; kept as the validation route for that identity.
    """
    return _a_multiplier(k) / (k + 0.5)


def apply_A_cauchy(measure, zeta, tol=1e-12):
    """(AQ)(zeta) = zeta * integral mu(x) / (zeta - x) dx for zeta off [-1, 1]."""
    zeta = complex(zeta)
    if zeta.imag == 0.0 and -1.0 <= zeta.real <= 1.0:
        raise OnCut(f"zeta = {zeta.real} lies on the cut [-1, 1]")

    near = abs(zeta.imag) if (-1.0 < zeta.real < 1.0) else 1.0

    def run(level):
        base = 0.125 / 2.0**level
        pts = {-1.0, 1.0}
        pts.update(uniform_breakpoints(-1.0, 1.0, base))
        if near < 0.25:
            # refine around the near-cut projection down to the distance scale
            offs = graded_offsets(max(near / 8.0, 1e-14) / 2.0**level, base)
            for off in offs:
                for s in (zeta.real - off, zeta.real + off):
                    if -1.0 < s < 1.0:
                        pts.add(s)
        bp = np.asarray(sorted(pts))
        keep = np.concatenate([[True], np.diff(bp) > 0])
        x, w = composite_nodes(bp[keep])
        return zeta * np.sum(w * measure(x) / (zeta - x))

    prev = run(0)
    for level in range(1, 4):
        cur = run(level)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return complex(cur)
        prev = cur
    return complex(prev)


def plemelj_jump(measure, x0, eps_seq=(1e-2, 1e-3, 1e-4), margin=1e-3):
    """Boundary jump of the Cauchy transform across the cut at x0, and the
    density it recovers.

    Evaluates AQ just above and below the cut at heights ``eps_seq`` and
    extrapolates the difference to the cut by Neville's scheme; the
    recovered density is jump / (-2 pi i x0).  x0 must stay away from 0
    (where the jump formula degenerates) and from the endpoints.
    """
    if not (margin < abs(x0) < 1.0 - margin):
        raise ValueError(f"x0 must stay off 0 and +-1 by margin {margin}")
    eps_seq = sorted(eps_seq, reverse=True)
    if len(eps_seq) < 2:
        raise ValueError("need at least two heights for extrapolation")
    jumps = [apply_A_cauchy(measure, complex(x0, e)) - apply_A_cauchy(measure, complex(x0, -e))
             for e in eps_seq]
    # Neville tableau in the height variable; for convergent data each
    # level moves the top extrapolant less than the previous one
    tab = list(jumps)
    xs = list(eps_seq)
    scale = max(abs(j) for j in jumps)
    prev_corr = None
    for lvl in range(1, len(tab)):
        top_before = tab[0]
        for i in range(len(tab) - lvl):
            tab[i] = tab[i + 1] + (tab[i + 1] - tab[i]) * xs[i + lvl] / (xs[i] - xs[i + lvl])
        corr = abs(tab[0] - top_before)
        if prev_corr is not None and corr > prev_corr and corr > 1e-9 * scale:
            raise ExtrapolationUnstable(
                f"Neville corrections grew from {prev_corr:.3e} to {corr:.3e}")
        prev_corr = corr
    jump = tab[0]
    recovered = jump / (-2.0j * math.pi * x0)
    return complex(jump), complex(recovered)


# ---------------------------------------------------------------------------
# local analyticity probe
# ---------------------------------------------------------------------------

PROBE_SCALES = (0.1, 0.05, 0.025, 0.0125)
CONSISTENT = "ConsistentWithAnalytic"
NON_ANALYTIC = "NonAnalyticSignature"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ProbeReport:
    classification: str
    scales: tuple
    tail_fractions: tuple
    residuals: tuple

    def to_json_dict(self):
        return {
            "classification": self.classification,
            "scales": list(self.scales),
            "tail_fractions": list(self.tail_fractions),
            "residuals": list(self.residuals),
        }


def analyticity_probe(measure, x0, scales=PROBE_SCALES, degree=8):
    """Heuristic local-analyticity classifier (explicitly not a decision
    procedure: analyticity cannot be decided from finitely many samples).

    Fits Chebyshev polynomials on shrinking stencils around x0 and watches
    the high-order coefficient fraction.  For analytic densities it decays
    geometrically with the stencil radius; a persistent algebraic tail is
    the non-analytic signature; residual-dominated fits (noise floor) are
    inconclusive.
    """
    from numpy.polynomial import chebyshev

    scales = tuple(sorted(scales, reverse=True))
    fracs, resids = [], []
    for h in scales:
        u = np.cos(np.linspace(0.0, math.pi, 33))  # Chebyshev-extrema stencil
        xs = x0 + h * u
        vals = measure(xs)
        coef = chebyshev.chebfit(u, vals, degree)
        fit = chebyshev.chebval(u, coef)
        resids.append(float(np.max(np.abs(fit - vals))))
        head = float(np.max(np.abs(coef)))
        tail = float(np.max(np.abs(coef[degree - 2:])))
        fracs.append(tail / head if head > 0 else 0.0)

    fracs_arr = np.array(fracs)
    resids_arr = np.array(resids)
    # noise floor: residuals neither shrink with h nor sit at rounding level
    if resids_arr[-1] > 1e-12 and resids_arr[-1] > 0.25 * resids_arr[0]:
        cls = INCONCLUSIVE
    elif np.all(fracs_arr < 1e-10):
        cls = CONSISTENT
    else:
        good = fracs_arr > 1e-14
        if np.count_nonzero(good) < 2:
            cls = CONSISTENT
        else:
            slope = float(np.polyfit(np.log(np.array(scales)[good]),
                                     np.log(fracs_arr[good]), 1)[0])
            if slope >= 3.0:
                cls = CONSISTENT
            elif slope <= 2.0:
                cls = NON_ANALYTIC
            else:
                cls = INCONCLUSIVE
    return ProbeReport(cls, scales, tuple(fracs), tuple(resids))
