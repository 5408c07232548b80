"""Time-weighted decoding (star) and noise (dagger) norms.

Coordinates are 1-based in the formulas below and 0-based in arrays.  For a
signal ``x`` of length ``T`` and a transmission ``y`` of length ``n``::

    star_mu(x)   = sqrt(sum_i ((T - i + 1) / T) ** mu * x_i ** 2)
    dagger_mu(y) = sum_i ((n - i + 1) / n) ** (-(1 - mu) / 2) * |y_i|

The star norm charges errors on old inputs more; the dagger norm charges the
channel more for recent noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def tf(n: int) -> int:
    """Bit length of ``n``, i.e. ``ceil(log2(n + 1))``."""
    n = int(n)
    if n < 1:
        raise ValueError(f"tf is defined for n >= 1, got {n}")
    return n.bit_length()


@dataclass(frozen=True)
class NormParams:
    """Weighting exponent ``mu``, signal length ``horizon`` and ``rate``.

    The dagger norm is taken over ``rate * horizon`` coordinates.  Use
    ``rate=k`` for the raw ensemble and ``rate=k + 1`` for the systematic
    code.  ``mu = 0`` is allowed for evaluation only.
    """

    mu: float
    horizon: int
    rate: int = 1

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon}")
        if int(self.rate) != self.rate or self.rate < 1:
            raise ValueError(f"rate must be a positive integer, got {self.rate}")

    @property
    def length(self) -> int:
        return int(self.rate * self.horizon)


def star_weights(T: int, mu: float) -> np.ndarray:
    i = np.arange(1, T + 1, dtype=float)
    return ((T - i + 1) / T) ** mu


def dagger_weights(n: int, mu: float) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=float)
    return ((n - i + 1) / n) ** (-(1.0 - mu) / 2.0)


def _resolve(vec, params, length_of):
    v = np.asarray(vec, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a one-dimensional vector")
    if isinstance(params, NormParams):
        expected = length_of(params)
        if v.size != expected:
            raise ValueError(f"vector has length {v.size}, expected {expected}")
        return v, params.mu
    mu = float(params)
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    if v.size == 0:
        raise ValueError("empty vector")
    return v, mu


def star_norm(x, params) -> float:
    """Decoding norm of ``x``.

    ``params`` is a :class:`NormParams` (length checked against ``horizon``)
    or a bare ``mu``, in which case ``T = len(x)``.
    """
    x, mu = _resolve(x, params, lambda p: p.horizon)
    return math.sqrt(float(star_weights(x.size, mu) @ (x * x)))


def dagger_norm(y, params) -> float:
    """Noise norm of ``y`` over its full length.

    ``params`` is a :class:`NormParams` (length checked against
    ``rate * horizon``) or a bare ``mu``.
    """
    y, mu = _resolve(y, params, lambda p: p.length)
    return float(dagger_weights(y.size, mu) @ np.abs(y))


def weight_diagonals(params: NormParams):
    """Diagonals ``(L, R^-1)`` turning both norms into unweighted ones.

    ``dagger_norm(y) == l1(L * y)`` and ``star_norm(x) == l2(Rinv * x)``.
    """
    L = dagger_weights(params.length, params.mu)
    Rinv = np.sqrt(star_weights(params.horizon, params.mu))
    return L, Rinv
