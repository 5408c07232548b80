"""Convex-duality machinery behind the logarithmic lower bound.

The primal problem over ``z`` in ``R^{kT}`` is::

    minimize    ||z||_2 ** 2
    subject to  sum_i z_i f[t, i] >= gamma_t   (t = 1..T),   z >= 0

with ``gamma_t = c0 t**(mu/2) / k**((1-mu)/2)`` and
``f[t, i] = (k t - i + 1) ** (-(1-mu)/2)`` for ``i <= k t`` (zero beyond).
Its Lagrange dual (bound multipliers eliminated) is::

    g(lam) = sum_t lam_t gamma_t - (1/4) sum_i Lambda_i ** 2,   Lambda = F^T lam

and any ``lam >= 0`` gives ``g(lam) <= primal optimum``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.optimize import nnls

MAX_ROWS = 2048


@dataclass(frozen=True, eq=False)
class LowerBoundInstance:
    mu: float
    c0: float
    k: int
    T: int
    gamma: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)  # T x kT, zero where i > k t

    @property
    def n(self) -> int:
        return self.k * self.T


@dataclass
class DualCertificate:
    a0: float
    c_prime: float
    tau: float
    lam: np.ndarray = field(repr=False)
    Lambda: np.ndarray = field(repr=False)
    value: float


def build_instance(mu: float, c0: float, k: int, T: int) -> LowerBoundInstance:
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    if k < 1 or T < 1:
        raise ValueError("k and T must be positive")
    t = np.arange(1, T + 1, dtype=float)
    gamma = c0 * t ** (mu / 2.0) / k ** ((1.0 - mu) / 2.0)
    i = np.arange(1, k * T + 1, dtype=float)[None, :]
    kt = k * t[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(i <= kt, (kt - i + 1.0) ** (-(1.0 - mu) / 2.0), 0.0)
    return LowerBoundInstance(mu=mu, c0=c0, k=k, T=T, gamma=gamma, f=f)


def Lambda_of(inst: LowerBoundInstance, lam) -> np.ndarray:
    return inst.f.T @ np.asarray(lam, dtype=float)


def dual_value(inst: LowerBoundInstance, lam) -> float:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (inst.T,):
        raise ValueError(f"lambda must have length T={inst.T}")
    if np.any(lam < 0):
        raise ValueError("lambda must be non-negative")
    Lam = Lambda_of(inst, lam)
    return float(lam @ inst.gamma - 0.25 * (Lam @ Lam))


def certificate_constants(mu: float, c0: float, k: int):
    """``(c', a0, tau)`` from the closing argument of the lower-bound proof."""
    c_prime = 1.0 + 2.0 * (2.0 + mu) / (mu * (1.0 + mu) * k ** ((1.0 - mu) / 2.0))
    a0 = 2.0 * c0 / (k ** ((3.0 - mu) / 2.0) * c_prime ** 2)
    tau = a0 * (c0 / k ** ((1.0 - mu) / 2.0) - k * a0 * c_prime ** 2 / 4.0)
    return c_prime, a0, tau


def make_certificate(inst: LowerBoundInstance) -> DualCertificate:
    c_prime, a0, tau = certificate_constants(inst.mu, inst.c0, inst.k)
    t = np.arange(1, inst.T + 1, dtype=float)
    lam = a0 / t ** (1.0 + inst.mu / 2.0)
    return DualCertificate(a0=a0, c_prime=c_prime, tau=tau, lam=lam,
                           Lambda=Lambda_of(inst, lam), value=dual_value(inst, lam))


@dataclass
class PrimalSolution:
    z: np.ndarray = field(repr=False)
    objective: float
    lam: np.ndarray = field(repr=False)
    kkt_residual: float


class QPConvergenceError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


def kkt_residual(inst: LowerBoundInstance, z, lam) -> float:
    """Largest violation among primal feasibility, stationarity, complementarity."""
    z = np.asarray(z)
    slack = inst.f @ z - inst.gamma
    scale = max(1.0, float(np.abs(inst.gamma).max()))
    primal = max(0.0, float(-slack.min()), float(-z.min()))
    # z_i = Lambda_i / 2 wherever z_i > 0; Lambda_i / 2 <= 0 is impossible here
    stat = float(np.abs(np.maximum(Lambda_of(inst, lam) / 2.0, 0.0) - z).max())
    comp = float(np.abs(lam * slack).max())
    return max(primal, stat, comp) / scale


def primal_solve(inst: LowerBoundInstance, tol=1e-9) -> PrimalSolution:
    """Exact optimum via the dual non-negative QP.

    Because ``f >= 0``, ``z = F^T lam / 2`` is automatically non-negative,
    so the bound ``z >= 0`` is inactive and the dual reduces to
    ``min_{lam >= 0} (1/4) lam^T F F^T lam - gamma^T lam``.  With the
    Cholesky factor ``F F^T / 2 = R^T R`` this is the non-negative least
    squares problem ``min ||R lam - R^{-T} gamma||``, solved by the
    Lawson-Hanson active-set method.
    """
    if inst.n > MAX_ROWS:
        raise ValueError(f"k*T={inst.n} exceeds the desk-scale limit {MAX_ROWS}")
    Q = 0.5 * inst.f @ inst.f.T
    R = np.linalg.cholesky(Q).T
    rhs = solve_triangular(R, inst.gamma, trans="T")
    lam, _ = nnls(R, rhs, maxiter=50 * inst.T)
    z = Lambda_of(inst, lam) / 2.0
    res = kkt_residual(inst, z, lam)
    if res > tol:
        # polish on the active set (nnls stops at its own tolerance)
        act = lam > 0
        if act.any():
            fa = inst.f[act]
            lam_a = cho_solve(cho_factor(0.5 * fa @ fa.T), inst.gamma[act])
            if np.all(lam_a >= 0):
                lam = np.zeros_like(lam)
                lam[act] = lam_a
                z = Lambda_of(inst, lam) / 2.0
                res = kkt_residual(inst, z, lam)
    if res > tol:
        raise QPConvergenceError(f"KKT residual {res:.3e} above tol {tol:.1e}",
                                 residuals=res)
    return PrimalSolution(z=z, objective=float(z @ z), lam=lam, kkt_residual=res)


def projected_gradient_dual(inst: LowerBoundInstance, iters=100_000, tol=1e-14):
    """First-order oracle: accelerated projected gradient on the dual.

    Returns ``(lam, dual value)``; by strong duality the value approaches
    the primal optimum.
    """
    Q = 0.5 * inst.f @ inst.f.T
    step = 1.0 / np.linalg.eigvalsh(Q)[-1]
    lam = np.zeros(inst.T)
    y = lam.copy()
    theta = 1.0
    for _ in range(iters):
        new = np.maximum(y - step * (Q @ y - inst.gamma), 0.0)
        theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        y = new + ((theta - 1.0) / theta_new) * (new - lam)
        if np.abs(new - lam).max() <= tol * max(1.0, np.abs(new).max()):
            lam = new
            break
        lam, theta = new, theta_new
    return lam, dual_value(inst, lam)


def integral_bound(a: int, b: int, alpha: float) -> float:
    """``int_a^b x**(-alpha) dx``, which dominates ``sum_{i=a+1}^b i**(-alpha)``."""
    if not a < b:
        raise ValueError("integral_bound needs a < b")
    if a <= 0 or alpha <= 0:
        raise ValueError("integral_bound needs a > 0 and alpha > 0")
    if alpha == 1.0:
        return math.log(b / a)
    return (b ** (1.0 - alpha) - a ** (1.0 - alpha)) / (1.0 - alpha)


def harmonic(T: int) -> float:
    return float(np.sum(1.0 / np.arange(1, T + 1)))


def unit_pulse_chain(inst: LowerBoundInstance, column, primal_opt: float | None = None) -> dict:
    """Check the reduction from a code column to the primal program.

    ``column`` is the first column of a causal matrix (length ``kT``).
    If ``|column|`` satisfies the primal constraints, its squared l2 norm
    must be at least the primal optimum.
    """
    z = np.abs(np.asarray(column, dtype=float))
    if z.shape != (inst.n,):
        raise ValueError(f"column must have length kT={inst.n}")
    if primal_opt is None:
        primal_opt = primal_solve(inst).objective
    feasible = bool(np.all(inst.f @ z >= inst.gamma * (1 - 1e-12)))
    l2sq = float(z @ z)
    return {"feasible": feasible, "l2_squared": l2sq, "primal": primal_opt,
            "holds": (not feasible) or l2sq >= primal_opt * (1 - 1e-9)}
