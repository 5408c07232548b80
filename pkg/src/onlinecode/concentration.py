"""Concentration bounds for l1 norms of Gaussian vectors, with Monte Carlo checks.

Each analytic bound has a companion sampler.  Samplers draw in fixed-size
batches whose seeds are spawned from one :class:`numpy.random.SeedSequence`,
so results do not depend on how the work is split.  Standard errors are
binomial and comparisons allow three of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

GAMMA_SMALL_BALL = math.sqrt(math.pi / 2.0) / math.e
MC_SAMPLES = 100_000
BATCH = 10_000


@dataclass(frozen=True)
class GaussianSpec:
    sigmas: tuple
    means: tuple | None = None

    def __post_init__(self):
        s = np.asarray(self.sigmas, dtype=float)
        if s.ndim != 1 or s.size == 0 or np.any(s <= 0):
            raise ValueError("sigmas must be a non-empty vector of positive reals")
        object.__setattr__(self, "sigmas", tuple(float(v) for v in s))
        m = np.zeros(s.size) if self.means is None else np.asarray(self.means, dtype=float)
        if m.shape != s.shape:
            raise ValueError("means and sigmas must have equal length")
        object.__setattr__(self, "means", tuple(float(v) for v in m))

    @property
    def n(self) -> int:
        return len(self.sigmas)

    def scaled(self, factor: float) -> "GaussianSpec":
        return GaussianSpec(tuple(factor * s for s in self.sigmas), self.means)

    @property
    def decay_parameter(self) -> float:
        s = np.asarray(self.sigmas)
        return float(s.sum() ** 2 / (s ** 2).sum())


@dataclass
class MonteCarloEstimate:
    p: float
    se: float
    n: int

    def dominated_by(self, bound: float, k_se: float = 3.0) -> bool:
        return bound >= self.p - k_se * self.se


def _estimate(hits: int, n: int) -> MonteCarloEstimate:
    p = hits / n
    return MonteCarloEstimate(p=p, se=math.sqrt(max(p * (1 - p), 1.0 / n) / n), n=n)


def _batches(seed, N):
    ss = np.random.SeedSequence(seed)
    full, rest = divmod(N, BATCH)
    sizes = [BATCH] * full + ([rest] if rest else [])
    for child, size in zip(ss.spawn(len(sizes)), sizes):
        yield np.random.default_rng(child), size


def sample_l1(spec: GaussianSpec, N=MC_SAMPLES, seed=0) -> np.ndarray:
    """``N`` draws of ``||X + a||_1`` with ``X ~ N(0, diag(sigma**2))``."""
    s = np.asarray(spec.sigmas)
    a = np.asarray(spec.means)
    out = []
    for rng, size in _batches(seed, N):
        out.append(np.abs(a + rng.standard_normal((size, s.size)) * s).sum(axis=1))
    return np.concatenate(out)


# --- Gaussian tail -------------------------------------------------------------

def gaussian_tail_bound(t: float, sigma: float = 1.0) -> float:
    """Mills-ratio bound ``sigma / (t sqrt(2 pi)) exp(-t**2 / (2 sigma**2))``."""
    if t <= 0:
        raise ValueError("t must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return sigma / (t * math.sqrt(2.0 * math.pi)) * math.exp(-t * t / (2.0 * sigma * sigma))


def gaussian_tail(t: float, sigma: float = 1.0) -> float:
    """Exact ``Pr[X >= t]`` for ``X ~ N(0, sigma**2)``."""
    return float(stats.norm.sf(t / sigma))


# --- l1 upper tail ---------------------------------------------------------------

def l1_upper_tail_bound(alpha: float, sigmas) -> tuple[float, bool]:
    """Bound on ``Pr[||X||_1 > alpha sqrt(n)]``; second value flags vacuity (>= 1)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    s2 = float(np.sum(np.asarray(sigmas, dtype=float) ** 2))
    n = len(sigmas)
    exponent = -n * (alpha * alpha / (2.0 * s2) - math.log(2.0))
    bound = math.exp(exponent)
    return bound, exponent >= 0.0


def vacuity_threshold(sigmas) -> float:
    """Smallest ``alpha`` for which :func:`l1_upper_tail_bound` is below 1."""
    s2 = float(np.sum(np.asarray(sigmas, dtype=float) ** 2))
    return math.sqrt(2.0 * math.log(2.0) * s2)


def l1_upper_tail_mc(alpha, sigmas, N=MC_SAMPLES, seed=0) -> MonteCarloEstimate:
    spec = GaussianSpec(tuple(sigmas))
    v = sample_l1(spec, N, seed)
    return _estimate(int((v > alpha * math.sqrt(spec.n)).sum()), N)


# --- the nu function ------------------------------------------------------------

def nu(x: float) -> float:
    """``x/2 - log(pi/2)/2 + log int_{sqrt x}^inf exp(-t**2/2) dt`` by quadrature.

    The integrand is shifted by ``sqrt(x)`` so the quadrature sees
    ``exp(-u**2/2 - sqrt(x) u)``, which cancels the ``x/2`` term and keeps
    everything of order one.
    """
    if x < 0:
        raise ValueError("nu is defined for x >= 0")
    s = math.sqrt(x)
    val, err = integrate.quad(lambda u: math.exp(-0.5 * u * u - s * u), 0.0, math.inf,
                              epsabs=0.0, epsrel=1e-12, limit=200)
    if not np.isfinite(val) or val <= 0 or err > 1e-10 * val:
        raise ArithmeticError(f"quadrature failed for nu({x}): value {val}, error {err}")
    return math.log(val) - 0.5 * math.log(math.pi / 2.0)


def nu_closed(x: float) -> float:
    """Closed form ``log erfcx(sqrt(x / 2))``."""
    if x < 0:
        raise ValueError("nu is defined for x >= 0")
    return float(np.log(special.erfcx(math.sqrt(x / 2.0))))


def nu_bound(x: float) -> float:
    if x < 0:
        raise ValueError("nu is defined for x >= 0")
    if x == 0:
        return 0.0
    return 0.5 * min(0.0, -math.log(math.pi * x / 2.0))


def abs_exp_moment(c: float, sigma: float) -> float:
    """``E exp(-c |Y|)`` for ``Y ~ N(0, sigma**2)`` by direct integration of the density."""
    dens = lambda y: math.exp(-c * y) * math.exp(-y * y / (2 * sigma * sigma))
    val, _ = integrate.quad(dens, 0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * val / (sigma * math.sqrt(2.0 * math.pi))


# --- small ball -----------------------------------------------------------------

def small_ball_bound(tau: float, sigmas, S=None) -> tuple[float, float]:
    """``(threshold, bound)`` with ``Pr[||X||_1 < threshold] <= bound``.

    ``threshold = tau * gamma * G * |S|`` where ``G`` is the geometric mean of
    ``sigmas[S]`` and ``gamma = sqrt(pi/2)/e``; ``bound = tau ** |S|``.
    ``S`` holds 0-based indices (all coordinates by default).
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    s = np.asarray(sigmas, dtype=float)
    idx = np.arange(s.size) if S is None else np.asarray(list(S), dtype=int)
    if idx.size == 0:
        raise ValueError("S must be non-empty")
    G = math.exp(float(np.log(s[idx]).mean()))
    return tau * GAMMA_SMALL_BALL * G * idx.size, tau ** idx.size


def small_ball_mc(threshold, sigmas, N=MC_SAMPLES, seed=0) -> MonteCarloEstimate:
    v = sample_l1(GaussianSpec(tuple(sigmas)), N, seed)
    return _estimate(int((v < threshold).sum()), N)


# --- stochastic domination ---------------------------------------------------------

def dominance_check(a: float, b: float, sigma: float = 1.0, N=MC_SAMPLES, seed=0,
                    grid=50) -> bool:
    """Whether ``|a + X|`` empirically dominates ``|b + X|``.

    Uses one shared sample of ``X`` for both variables (coupling).  The
    empirical CDF of ``|a + X|`` must stay at or below that of ``|b + X|``
    up to three standard errors of the paired difference, on a grid of
    quantiles.
    """
    if abs(a) < abs(b):
        raise ValueError("dominance_check needs |a| >= |b|")
    x = np.concatenate([rng.standard_normal(size) * sigma for rng, size in _batches(seed, N)])
    va, vb = np.abs(a + x), np.abs(b + x)
    ys = np.quantile(np.concatenate([va, vb]), np.linspace(0.01, 0.99, grid))
    for y in ys:
        d = (va <= y).astype(float) - (vb <= y).astype(float)
        se = d.std(ddof=1) / math.sqrt(N) if N > 1 else 0.0
        if d.mean() > 3.0 * se + 1e-15:
            return False
    return True


def l1_shift_check(v, sigmas, N=MC_SAMPLES, seed=0, grid=50) -> bool:
    """Coupled check of ``Pr[||v + X||_1 < t] <= Pr[||X||_1 < t]`` on a grid of ``t``."""
    v = np.asarray(v, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    l0, l1 = [], []
    for rng, size in _batches(seed, N):
        x = rng.standard_normal((size, s.size)) * s
        l0.append(np.abs(x).sum(axis=1))
        l1.append(np.abs(v + x).sum(axis=1))
    l0, l1 = np.concatenate(l0), np.concatenate(l1)
    for t in np.quantile(l0, np.linspace(0.01, 0.99, grid)):
        d = (l1 < t).astype(float) - (l0 < t).astype(float)
        if d.mean() > 3.0 * d.std(ddof=1) / math.sqrt(N) + 1e-15:
            return False
    return True


# --- lower tail with non-zero means ------------------------------------------------

@dataclass
class DecayFit:
    slope: float
    parameters: list
    probabilities: list
    below_resolution: bool
    pairwise_slopes: list

    @property
    def passed(self) -> bool:
        if self.below_resolution:
            return True
        if not self.slope < 0:
            return False
        ps = [abs(s) for s in self.pairwise_slopes if s < 0]
        return len(ps) == len(self.pairwise_slopes) and max(ps) <= 3.0 * min(ps)


def nonzero_mean_lower_tail(gamma: float, spec: GaussianSpec, N=MC_SAMPLES, seed=0):
    """Monte Carlo ``Pr[||X + a||_1 < gamma ||a||_1]``."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    v = sample_l1(spec, N, seed)
    return _estimate(int((v < gamma * np.abs(spec.means).sum()).sum()), N)


def nonzero_mean_lower_tail_check(gamma: float, specs, N=MC_SAMPLES, seed=0) -> DecayFit:
    """Fit ``log Pr`` against ``(sum sigma)**2 / sum sigma**2`` over ``specs``.

    The decay constant is not known in closed form, so only its sign (and
    rough stability across consecutive specs) is checked.
    """
    params, probs = [], []
    for j, spec in enumerate(specs):
        est = nonzero_mean_lower_tail(gamma, spec, N, seed=[seed, j])
        params.append(spec.decay_parameter)
        probs.append(est.p)
    if all(p == 0 for p in probs):
        return DecayFit(float("nan"), params, probs, True, [])
    keep = [i for i, p in enumerate(probs) if p > 0]
    x = np.array([params[i] for i in keep])
    y = np.log([probs[i] for i in keep])
    slope = float(np.polyfit(x, y, 1)[0]) if len(keep) > 1 else float("nan")
    pair = [float((y[i + 1] - y[i]) / (x[i + 1] - x[i])) for i in range(len(keep) - 1)]
    return DecayFit(slope, params, probs, False, pair)


def equal_sigma_specs(sizes=(4, 16, 64), mean=1.0, sigma=1.0):
    return [GaussianSpec((sigma,) * n, (mean,) * n) for n in sizes]
