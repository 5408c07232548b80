"""Noise strategies for the channel simulator.

Every strategy may read the full transcript (the worst-case model lets the
adversary know the signal and its encoding).  None of them is claimed to
be optimal against the code; they are probes of different regimes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .weighted_norms import dagger_weights

KINDS = ("zero", "single_burst", "uniform_spread", "dagger_budget", "zeroing_l2",
         "compact_support")
PLACEMENTS = ("old", "recent", "time")


@dataclass(frozen=True)
class NoiseModel:
    """Declarative noise description.

    ``t0`` is a 1-based time; ``magnitude`` is the burst's l1 mass;
    ``budget`` is the l1 budget (``uniform_spread``) or dagger budget
    (``dagger_budget``); ``inner`` is the wrapped model of
    ``compact_support``.
    """

    kind: str = "zero"
    t0: int | None = None
    magnitude: float = 1.0
    budget: float = 1.0
    placement: str = "old"
    inner: "NoiseModel | None" = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; choose from {KINDS}")
        if self.kind in ("single_burst", "compact_support") and (self.t0 is None or self.t0 < 1):
            raise ValueError(f"{self.kind} needs a time t0 >= 1")
        if self.kind == "dagger_budget":
            if self.placement not in PLACEMENTS:
                raise ValueError(f"placement must be one of {PLACEMENTS}")
            if self.placement == "time" and (self.t0 is None or self.t0 < 1):
                raise ValueError("placement 'time' needs t0")
        if self.kind == "compact_support" and self.inner is None:
            raise ValueError("compact_support needs an inner model")
        if self.magnitude < 0 or self.budget < 0:
            raise ValueError("magnitude and budget must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        d = dict(d)
        if isinstance(d.get("inner"), dict):
            d["inner"] = cls.from_dict(d["inner"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown noise fields: {sorted(unknown)}")
        return cls(**d)


def _rate(transcript, t):
    n = len(transcript)
    if t < 1 or n % t:
        raise ValueError(f"transcript length {n} is not a multiple of t={t}")
    return n // t


def _signs(rng, size):
    return rng.choice(np.array([-1.0, 1.0]), size=size)


def generate(model: NoiseModel, transcript, t: int, mu: float = 0.5, seed=None) -> np.ndarray:
    """Noise vector ``y`` of the transcript's length ``(k + 1) * t``.

    ``seed`` overrides ``model.seed`` (the harness passes per-trial seeds).
    """
    transcript = np.asarray(transcript, dtype=float)
    rate = _rate(transcript, t)
    n = rate * t
    rng = np.random.default_rng(model.seed if seed is None else seed)
    kind = model.kind
    if model.t0 is not None and model.t0 > t and kind in ("single_burst", "compact_support"):
        raise ValueError(f"t0={model.t0} exceeds t={t}")

    if kind == "zero":
        return np.zeros(n)
    if kind == "zeroing_l2":
        return -transcript.copy()
    if kind == "single_burst":
        y = np.zeros(n)
        lo = rate * (model.t0 - 1)
        y[lo: lo + rate] = _signs(rng, rate) * (model.magnitude / rate)
        return y
    if kind == "uniform_spread":
        return _signs(rng, n) * (model.budget / n)
    if kind == "dagger_budget":
        w = dagger_weights(n, mu)
        if model.placement == "old":
            idx = 0
        elif model.placement == "recent":
            idx = n - 1
        else:
            if model.t0 > t:
                raise ValueError(f"t0={model.t0} exceeds t={t}")
            idx = rate * (model.t0 - 1)
        y = np.zeros(n)
        y[idx] = _signs(rng, 1)[0] * model.budget / w[idx]
        return y
    # compact_support: the inner noise restricted to times <= t0
    y = generate(model.inner, transcript, t, mu, seed=rng.integers(2 ** 63))
    y[rate * model.t0:] = 0.0
    return y

