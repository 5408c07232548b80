"""Numerical checks of the matrix-level claims.

Operator norms, dyadic block norms, the Bandeira-van Handel expectation
bound, ``2 -> 1`` norms, and multistart estimates of the robust
invertibility ratio ``inf_x dagger(A x) / star(x)``.

The invertibility routines minimize a non-convex ratio and therefore
return an *estimate (upper bound on inf)* together with a witness vector
that attains it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .matrix_ensemble import LotMatrix
from .weighted_norms import dagger_norm, dagger_weights, star_norm, star_weights, tf


class ConvergenceError(RuntimeError):
    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


def operator_norm(A, tol=1e-8, max_iter=100_000, seed=0) -> float:
    """Largest singular value by power iteration on ``A.T @ A``.

    Stops once the eigen-residual ``||A^T A v - s^2 v||`` falls below
    ``tol * s^2``; raises :class:`ConvergenceError` after ``max_iter``.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix must be finite")
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    s2 = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        s2 = float(v @ w)
        if s2 == 0.0:
            return 0.0
        if np.linalg.norm(w - s2 * v) <= tol * s2:
            return math.sqrt(s2)
        v = w / np.linalg.norm(w)
    raise ConvergenceError("power iteration did not converge", last=math.sqrt(s2))


def jacobi_singular_values(A, tol=1e-15, max_sweeps=100) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi rotations, descending."""
    U = np.array(A, dtype=float)
    if U.shape[0] < U.shape[1]:
        U = U.T.copy()
    n = U.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = U[:, p] @ U[:, p]
                beta = U[:, q] @ U[:, q]
                gamma = U[:, p] @ U[:, q]
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                up = U[:, p].copy()
                U[:, p] = c * up - s * U[:, q]
                U[:, q] = s * up + c * U[:, q]
        if not rotated:
            break
    return np.sort(np.linalg.norm(U, axis=0))[::-1]


def row_blocks(M: LotMatrix):
    """Row blocks ``M(i)``: segments ``2**(i-1) .. min(2**i - 1, T)``."""
    out = []
    for i in range(1, tf(M.T) + 1):
        lo = 2 ** (i - 1)
        hi = min(2 ** i - 1, M.T)
        out.append(M.entries[M.k * (lo - 1): M.k * hi])
    return out


def block_norm_profile(M: LotMatrix) -> np.ndarray:
    """Operator norms of the row blocks ``M(i)``, ``i = 1..tf(T)``."""
    return np.array([np.linalg.norm(b, 2) for b in row_blocks(M)])


def block_event(profile) -> bool:
    """Whether every block satisfies ``||M(i)|| <= 1 / (i sqrt 2)``.

    When it holds, ``||M|| <= 1``.
    """
    profile = np.asarray(profile)
    i = np.arange(1, profile.size + 1)
    return bool(np.all(profile <= 1.0 / (i * math.sqrt(2.0))))


def bvh_bound(variances) -> float:
    """Bandeira-van Handel bound on ``E||A||`` for independent centred Gaussians.

    ``variances[i, j]`` is the variance of ``A[i, j]``.
    """
    a2 = np.asarray(variances, dtype=float)
    if a2.ndim != 2 or np.any(a2 < 0):
        raise ValueError("variances must be a non-negative matrix")
    s1 = math.sqrt(a2.sum(axis=1).max())
    s2 = math.sqrt(a2.sum(axis=0).max())
    s0 = math.sqrt(a2.max())
    return 1.5 * (s1 + s2 + 10.0 * s0 * math.sqrt(math.log(min(a2.shape))))


EXACT_ROW_CAP = 20


def two_one_norm(A, mode="exact", restarts=1000, seed=0) -> float:
    """``||A||_{2->1} = max_{|s_i| = 1} ||A^T s||_2``.

    ``mode="exact"`` enumerates sign vectors (at most ``EXACT_ROW_CAP``
    rows).  ``mode="estimate"`` runs random sign starts followed by greedy
    single flips and returns a lower bound.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    if mode == "exact":
        if m > EXACT_ROW_CAP:
            raise ValueError(f"exact mode refuses more than {EXACT_ROW_CAP} rows")
        if m == 0:
            return 0.0
        best = 0.0
        # s and -s give the same value, so fix the first sign
        for chunk in _sign_chunks(m - 1):
            s = np.hstack([np.ones((chunk.shape[0], 1)), chunk])
            best = max(best, float(np.linalg.norm(s @ A, axis=1).max()))
        return best
    if mode != "estimate":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    G = A @ A.T
    best = 0.0
    for _ in range(restarts):
        s = rng.choice([-1.0, 1.0], size=m)
        while True:
            # flipping s_i changes s^T G s by -4 s_i (G s)_i + 4 G_ii
            gain = -4.0 * s * (G @ s) + 4.0 * np.diag(G)
            i = int(np.argmax(gain))
            if gain[i] <= 1e-12 * max(1.0, abs(s @ G @ s)):
                break
            s[i] = -s[i]
        best = max(best, math.sqrt(max(float(s @ G @ s), 0.0)))
    return best


def _sign_chunks(m, chunk_bits=14):
    if m == 0:
        yield np.zeros((1, 0))
        return
    low = min(m, chunk_bits)
    base = np.array(list(itertools.product([1.0, -1.0], repeat=low)))
    for high in itertools.product([1.0, -1.0], repeat=m - low):
        yield np.hstack([np.tile(high, (base.shape[0], 1)), base]) if high else base


# --- robust invertibility ----------------------------------------------------

@dataclass
class InvertibilityEstimate:
    """Estimate (upper bound on inf) of ``dagger(A x) / star(x)``."""

    t: int
    mu: float
    value: float
    method: str
    starts: int
    best_x: np.ndarray = field(repr=False)


def invertibility_ratio(A, x, mu) -> float:
    A = np.asarray(A)
    den = star_norm(x, mu)
    return dagger_norm(A @ x, mu) / den


def structured_starts(t: int) -> np.ndarray:
    """Unit pulses and dyadic recent-suffix vectors, as columns."""
    cols = [np.eye(t)[:, s] for s in range(t)]
    width = 1
    while width <= t:
        v = np.zeros(t)
        v[t - width:] = 1.0
        cols.append(v)
        alt = np.zeros(t)
        alt[t - width:] = (-1.0) ** np.arange(width)
        cols.append(alt)
        width *= 2
    return np.array(cols).T


def _sphere_grid(t, points):
    if t == 1:
        return np.ones((1, 1))
    if t == 2:
        th = np.linspace(0.0, math.pi, points, endpoint=False)
        return np.vstack([np.cos(th), np.sin(th)])
    # Fibonacci lattice on S^2 (antipodal points give equal values)
    i = np.arange(points) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / points)
    theta = math.pi * (1.0 + 5.0 ** 0.5) * i
    return np.vstack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi),
                      np.cos(phi)])


def _subgradient_min(G, U, iters, step0, free_rows=0):
    """Minimize ``||G u||_1`` over unit ``u`` (column-wise), track the best.

    The first ``G.shape[1] - free_rows`` coordinates are held on the unit
    sphere; trailing ``free_rows`` coordinates are unconstrained.
    """
    head = G.shape[1] - free_rows
    best_val = np.abs(G @ U).sum(axis=0)
    best_U = U.copy()
    for it in range(1, iters + 1):
        R = G @ U
        g = G.T @ np.sign(R)
        gh = g[:head]
        # tangent projection on the sphere part
        gh = gh - U[:head] * (U[:head] * gh).sum(axis=0)
        g = np.vstack([gh, g[head:]])
        gn = np.linalg.norm(g, axis=0)
        gn[gn == 0.0] = 1.0
        U = U - (step0 / math.sqrt(it)) * g / gn
        U[:head] /= np.linalg.norm(U[:head], axis=0)
        val = np.abs(G @ U).sum(axis=0)
        better = val < best_val
        best_val = np.where(better, val, best_val)
        best_U[:, better] = U[:, better]
    return best_val, best_U


def robust_invertibility(A_t, mu, starts=64, iters=500, seed=0, step0=0.5,
                         extra_starts=None, grid_points=100_000) -> InvertibilityEstimate:
    """Estimate ``inf_x dagger_mu(A_t x) / star_mu(x)`` from above.

    Projected subgradient descent on the star-unit sphere from ``starts``
    random starts plus unit pulses and recent-suffix vectors (and any
    ``extra_starts`` columns).  Ties between starts go to the lower start
    index.  For ``t <= 3`` a sphere grid of ``grid_points`` points is also
    evaluated and the smaller value kept.
    """
    A = np.asarray(A_t, dtype=float)
    n, t = A.shape
    L = dagger_weights(n, mu)
    Rinv = np.sqrt(star_weights(t, mu))
    G = (L[:, None] * A) / Rinv[None, :]

    cand = [structured_starts(t) * Rinv[:, None]]
    if extra_starts is not None:
        cand.append(np.asarray(extra_starts, dtype=float).reshape(t, -1) * Rinv[:, None])
    rng = np.random.default_rng(seed)
    cand.append(rng.standard_normal((t, starts)))
    U0 = np.hstack(cand)
    U0 = U0 / np.linalg.norm(U0, axis=0)
    if t == 1:
        vals, U = np.abs(G @ U0).sum(axis=0), U0
    else:
        vals, U = _subgradient_min(G, U0, iters, step0)
    method = "multistart_subgradient"
    idx = int(np.argmin(vals))  # argmin returns the first (lowest index) tie
    best_u = U[:, idx]
    if 1 < t <= 3:
        grid = _sphere_grid(t, grid_points)
        gv = np.abs(G @ grid).sum(axis=0)
        g_idx = int(np.argmin(gv))
        if gv[g_idx] < vals[idx]:
            best_u = grid[:, g_idx]
            method = "sphere_grid"
    best_x = best_u / Rinv
    best_x = best_x / star_norm(best_x, mu)
    value = invertibility_ratio(A, best_x, mu)
    return InvertibilityEstimate(t=t, mu=mu, value=value, method=method,
                                 starts=starts, best_x=best_x)


@dataclass(frozen=True)
class PrefixSplit:
    """Old/recent split of ``n`` coordinates.

    The recent suffix has ``2**(j0 - 1) - 1`` coordinates, with
    ``j0 = ceil(4 tf(tf(n)) / delta)`` unless given explicitly.
    """

    n: int
    delta: float = 0.25
    j0: int | None = None

    def __post_init__(self):
        if self.j0 is None:
            object.__setattr__(self, "j0", math.ceil(4 * tf(tf(self.n)) / self.delta))
        if self.j0 < 1:
            raise ValueError("j0 must be at least 1")

    @property
    def suffix_length(self) -> int:
        return 2 ** (self.j0 - 1) - 1

    @property
    def usable(self) -> bool:
        return self.suffix_length < self.n


def prefix_invertibility(A_n, mu, split: PrefixSplit, starts=64, iters=500,
                         seed=0, step0=0.5) -> InvertibilityEstimate:
    """Estimate ``inf_x dagger(A_n x) / star(x with its recent suffix zeroed)``.

    Suffix coordinates are free variables.  After the subgradient phase the
    suffix of the winning start is re-optimized exactly by weighted LAD.
    Candidates whose denominator is below ``1e-12`` are discarded.
    """
    from .simplex import lad_solve

    A = np.asarray(A_n, dtype=float)
    rows, n = A.shape
    if n != split.n:
        raise ValueError(f"split is for n={split.n}, matrix has {n} columns")
    s = split.suffix_length
    if s >= n:
        raise ValueError(
            f"suffix of {s} coordinates leaves nothing of n={n}; pass an explicit j0")
    if s == 0:
        return robust_invertibility(A, mu, starts=starts, iters=iters, seed=seed,
                                    step0=step0)
    head = n - s
    L = dagger_weights(rows, mu)
    # star weights of the full length-n vector, restricted to the kept part
    Rinv = np.sqrt(star_weights(n, mu))[:head]
    G = L[:, None] * A
    G = np.hstack([G[:, :head] / Rinv[None, :], G[:, head:]])

    rng = np.random.default_rng(seed)
    struct = structured_starts(n)
    cand = np.hstack([struct, rng.standard_normal((n, starts))])
    cand[:head] *= Rinv[:, None]
    keep = np.linalg.norm(cand[:head], axis=0) > 1e-12
    cand = cand[:, keep]
    cand[:head] /= np.linalg.norm(cand[:head], axis=0)
    vals, U = _subgradient_min(G, cand, iters, step0, free_rows=s)
    idx = int(np.argmin(vals))
    u = U[:, idx].copy()
    # exact suffix: min_v ||G_h u_h + G_s v||_1
    res = lad_solve(np.ones(rows), -G[:, head:], G[:, :head] @ u[:head])
    u[head:] = res.x
    x = np.concatenate([u[:head] / Rinv, u[head:]])
    den = star_norm(np.concatenate([x[:head], np.zeros(s)]), mu)
    if den < 1e-12:
        raise RuntimeError("all candidates degenerate")
    value = dagger_norm(A @ x, mu) / den
    return InvertibilityEstimate(t=n, mu=mu, value=value,
                                 method="multistart_subgradient",
                                 starts=starts, best_x=x / den)


def fit_power_law(ts, values):
    """Fit ``values ~ c0 * t ** (1/2 - delta)`` in log-log space.

    Returns ``(c0_hat, delta_hat, r_squared)``.
    """
    if len(ts) < 2 or len(ts) != len(values):
        raise ValueError("need at least two (t, value) pairs of equal length")
    lt = np.log(np.asarray(ts, dtype=float))
    lv = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(lt, lv, 1)
    pred = intercept + slope * lt
    ss_res = float(((lv - pred) ** 2).sum())
    ss_tot = float(((lv - lv.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return math.exp(intercept), 0.5 - slope, r2
