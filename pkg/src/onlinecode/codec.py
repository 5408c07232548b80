"""Causal streaming encoder and weighted-l1 LP decoder.

Public parameters of a code are ``(seed, k, mu)``: the encoder and decoder
both regenerate the scaled systematic matrix ``C`` from ``(seed, k)``, so at
time ``t`` the channel has carried ``(k + 1) * t`` symbols.  Decoding picks
``x_hat`` minimizing ``dagger_mu(z - C_t @ x)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import simplex
from .matrix_ensemble import EnsembleParams, code_matrix, segment_rows
from .weighted_norms import dagger_norm, dagger_weights


@dataclass(frozen=True)
class CodeParams:
    """Shared public parameters of the code."""

    seed: int
    k: int
    mu: float = 0.5

    def __post_init__(self):
        EnsembleParams(T=1, k=self.k, seed=self.seed)
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")

    @property
    def rate(self) -> int:
        return self.k + 1


class DecodeError(RuntimeError):
    """Decoding failed; ``x`` is the best feasible point reached."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class EncoderState:
    """Single-owner streaming encoder.

    Each call to :meth:`step` consumes one input symbol and emits the
    ``k + 1`` channel symbols of the current segment.  Only the prefix seen
    so far is used, so the transcript after ``t`` steps is ``C_t @ x[:t]``.
    """

    def __init__(self, params: CodeParams):
        self.params = params
        self.x_prefix: list[float] = []
        self.transcript: list[float] = []

    @property
    def t(self) -> int:
        return len(self.x_prefix)

    def step(self, x_t: float) -> np.ndarray:
        self.x_prefix.append(float(x_t))
        out = encode_segment(self.params, np.asarray(self.x_prefix))
        self.transcript.extend(out.tolist())
        return out


def encode_segment(params: CodeParams, x_prefix) -> np.ndarray:
    """Channel symbols of segment ``t = len(x_prefix)``."""
    x_prefix = np.asarray(x_prefix, dtype=float)
    t = x_prefix.size
    rows = segment_rows(params.seed, params.k, t)
    out = np.empty(params.k + 1)
    out[:-1] = rows @ x_prefix
    out[-1] = x_prefix[-1]
    return out / math.sqrt(2.0)


def encode_step(state: EncoderState, x_t: float) -> np.ndarray:
    return state.step(x_t)


def encode(params: CodeParams, x) -> np.ndarray:
    """Full transcript ``C_t @ x`` for ``t = len(x)``, built segment by segment."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("x must be a non-empty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    return np.concatenate([encode_segment(params, x[:t]) for t in range(1, x.size + 1)])


@dataclass
class DecodeResult:
    """Output of :func:`decode`.

    ``residual_dagger`` is the optimal LP value ``dagger(z - C_t x_hat)``; it
    never exceeds the noise norm ``dagger(y)`` of whatever noise produced
    ``z``.  For such noise ``dagger(C_t (x - x_hat)) <= dagger(y) +
    residual_dagger <= 2 dagger(y)``, and ``certified_bound`` is the smallest
    value that right-hand side can take, ``2 * residual_dagger``.
    """

    x_hat: np.ndarray
    t: int
    residual_dagger: float
    certified_bound: float
    lp_stats: dict = field(default_factory=dict)
    rank_deficient: bool = False

    def error_bound(self, noise_dagger: float) -> float:
        """Bound on ``dagger(C_t (x - x_hat))`` given the noise norm."""
        return noise_dagger + self.residual_dagger

    def to_dict(self) -> dict:
        d = asdict(self)
        d["x_hat"] = [float(v) for v in self.x_hat]
        return d


def lp_solve(weights, A, z, max_pivots=simplex.MAX_PIVOTS):
    """Minimize ``sum(weights * |z - A x|)``; returns ``(x_opt, objective)``."""
    res = simplex.lad_solve(weights, A, z, max_pivots=max_pivots)
    return res.x, res.objective


def decode(z, params: CodeParams, t: int | None = None, C=None,
           max_pivots=simplex.MAX_PIVOTS) -> DecodeResult:
    """Decode the first ``(k + 1) * t`` received symbols.

    Only ``z[:(k + 1) * t]`` is read.  ``C`` may pass a precomputed code
    matrix with at least ``t`` columns; otherwise it is regenerated from
    the seed.
    """
    z = np.asarray(z, dtype=float)
    rate = params.rate
    if t is None:
        if z.size % rate:
            raise ValueError(f"len(z)={z.size} is not a multiple of k+1={rate}")
        t = z.size // rate
    if t < 1 or rate * t > z.size:
        raise ValueError(f"need {rate * t} received symbols for t={t}, got {z.size}")
    z = z[: rate * t]
    if not np.all(np.isfinite(z)):
        raise ValueError("received vector must be finite")
    if C is None:
        C_t = code_matrix(params.seed, params.k, t).entries
    else:
        C_t = np.asarray(C)[: rate * t, :t]
    w = dagger_weights(rate * t, params.mu)
    try:
        res = simplex.lad_solve(w, C_t, z, max_pivots=max_pivots)
    except simplex.IterationLimitError as err:
        raise DecodeError(str(err), x=err.x) from err
    x_hat = res.x
    residual = dagger_norm(z - C_t @ x_hat, params.mu)
    rank_deficient = bool(np.linalg.matrix_rank(C_t) < t)
    return DecodeResult(
        x_hat=x_hat,
        t=t,
        residual_dagger=residual,
        certified_bound=2.0 * residual,
        lp_stats={"pivots": res.pivots, "breakpoints": res.breakpoints},
        rank_deficient=rank_deficient,
    )
