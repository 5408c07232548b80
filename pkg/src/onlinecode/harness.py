"""Scenario files, the end-to-end simulation loop and calibration.

A scenario is a TOML file with five tables::

    [ensemble]                 # the code
    seed = 7                   # base seed; per-trial seeds are derived from it
    k = 16
    mu = 0.5
    delta = 0.25               # reporting exponent in the ratio column
    T = 64

    [signal]
    source = "random"          # "random" | "unit_pulse" | "file"
    pulse_time = 1             # unit_pulse only (1-based)
    path = "x.csv"             # file only: one value per line

    [noise]                    # fields of adversaries.NoiseModel
    kind = "single_burst"
    t0 = 8
    magnitude = 1.0

    [schedule]
    times = [16, 32, 64]
    trials = 50
    vary_code = true           # draw a fresh code seed per trial

    [output]                   # optional; relative paths resolve against the file
    csv = "run.csv"
    json = "run.json"

Noise is drawn once per trial against the transcript up to the last
scheduled time; the decode at time ``t`` receives its first ``(k + 1) t``
entries, as a real channel would deliver them.

Trial ``r`` uses ``SeedSequence(seed, spawn_key=(r,)).generate_state(3)``
as (code seed, signal seed, noise seed); with ``vary_code = false`` the
code seed is the base seed itself.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import pathlib
from dataclasses import dataclass, field

import numpy as np
import tomli

from . import adversaries
from .adversaries import NoiseModel
from .analysis import block_event, block_norm_profile, fit_power_law, operator_norm, robust_invertibility
from .codec import CodeParams, DecodeError, decode, encode
from .matrix_ensemble import MAX_T, EnsembleParams, code_matrix, sample_M
from .weighted_norms import dagger_norm, star_norm

SCHEMA_VERSION = 1
CSV_HEADER = ["schema_version", "trial", "t", "metric", "value"]
METRICS = ("star_error", "linf_error", "dagger_budget", "ratio", "residual_dagger",
           "certified_bound", "pivots", "breakpoints", "failed")
CALIBRATION_HEADER = ["schema_version", "k", "T", "seeds", "opnorm_fraction",
                      "block_event_frequency", "c0_hat", "delta_hat", "r_squared",
                      "guarantee_rate"]
THREADS_ENV = "ONLINECODE_THREADS"


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    seed: int
    k: int
    mu: float
    T: int
    noise: NoiseModel
    times: list
    trials: int = 1
    delta: float = 0.25
    signal: dict = field(default_factory=lambda: {"source": "random"})
    vary_code: bool = True
    csv_path: str | None = None
    json_path: str | None = None

    def __post_init__(self):
        EnsembleParams(T=self.T, k=self.k, seed=self.seed)
        if not 0.0 <= self.mu <= 1.0:
            raise ScenarioError(f"ensemble.mu must lie in [0, 1], got {self.mu}")
        if self.T > MAX_T:
            raise ScenarioError(f"ensemble.T={self.T} exceeds the limit {MAX_T}")
        if not self.times:
            raise ScenarioError("schedule.times must list at least one time")
        bad = [t for t in self.times if not 1 <= t <= self.T]
        if bad:
            raise ScenarioError(f"schedule.times {bad} fall outside 1..T={self.T}")
        if self.trials < 1:
            raise ScenarioError("schedule.trials must be at least 1")
        src = self.signal.get("source", "random")
        if src not in ("random", "unit_pulse", "file"):
            raise ScenarioError(f"signal.source {src!r} is not random, unit_pulse or file")
        if src == "file" and "path" not in self.signal:
            raise ScenarioError("signal.source = 'file' needs signal.path")
        self.times = sorted(set(int(t) for t in self.times))

    @classmethod
    def from_dict(cls, d: dict, base: pathlib.Path | None = None) -> "Scenario":
        known = {"ensemble", "signal", "noise", "schedule", "output"}
        extra = set(d) - known
        if extra:
            raise ScenarioError(f"unknown scenario tables: {sorted(extra)}")
        for table in ("ensemble", "noise", "schedule"):
            if table not in d:
                raise ScenarioError(f"scenario is missing the [{table}] table")
        ens, sch, out = d["ensemble"], d["schedule"], d.get("output", {})
        for key in ("k", "T"):
            if key not in ens:
                raise ScenarioError(f"[ensemble] needs '{key}'")
        if "times" not in sch:
            raise ScenarioError("[schedule] needs 'times'")
        try:
            noise = NoiseModel.from_dict(d["noise"])
        except (TypeError, ValueError) as err:
            raise ScenarioError(f"[noise]: {err}") from err
        signal = dict(d.get("signal", {"source": "random"}))

        def resolve(p):
            if p is None or base is None:
                return p
            p = pathlib.Path(p)
            return str(p if p.is_absolute() else base / p)

        if "path" in signal:
            signal["path"] = resolve(signal["path"])
        return cls(seed=int(ens.get("seed", 0)), k=int(ens["k"]), mu=float(ens.get("mu", 0.5)),
                   T=int(ens["T"]), delta=float(ens.get("delta", 0.25)), noise=noise,
                   times=list(sch["times"]), trials=int(sch.get("trials", 1)),
                   vary_code=bool(sch.get("vary_code", True)), signal=signal,
                   csv_path=resolve(out.get("csv")), json_path=resolve(out.get("json")))


def load_scenario(path) -> Scenario:
    path = pathlib.Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as err:
        raise ScenarioError(f"{path}: not valid TOML ({err})") from err
    return Scenario.from_dict(data, base=path.parent)


def trial_seeds(seed: int, trial: int):
    """(code seed, signal seed, noise seed) of one trial."""
    state = np.random.SeedSequence(seed, spawn_key=(trial,)).generate_state(3, np.uint64)
    return tuple(int(s) for s in state)


def read_vector(path) -> np.ndarray:
    with open(path) as fh:
        vals = [float(line) for line in fh if line.strip()]
    return np.array(vals)


def write_vector(path, v):
    with open(path, "w") as fh:
        for x in np.asarray(v, dtype=float):
            fh.write(f"{float(x)!r}\n")


def make_signal(s: Scenario, seed: int) -> np.ndarray:
    src = s.signal.get("source", "random")
    if src == "random":
        return np.random.default_rng(seed).standard_normal(s.T)
    if src == "unit_pulse":
        x = np.zeros(s.T)
        x[int(s.signal.get("pulse_time", 1)) - 1] = 1.0
        return x
    x = read_vector(s.signal["path"])
    if x.size < s.T:
        raise ScenarioError(f"signal file has {x.size} values, need T={s.T}")
    return x[: s.T]


def _run_trial(s: Scenario, trial: int):
    code_seed, signal_seed, noise_seed = trial_seeds(s.seed, trial)
    if not s.vary_code:
        code_seed = s.seed
    params = CodeParams(seed=code_seed, k=s.k, mu=s.mu)
    x = make_signal(s, signal_seed)
    horizon = s.times[-1]
    C = code_matrix(code_seed, s.k, horizon).entries
    transcript = encode(params, x[:horizon])
    rate = params.rate
    # one noise realization per trial; decoding at t sees its prefix
    noise = adversaries.generate(s.noise, transcript, horizon, mu=s.mu, seed=noise_seed)
    rows = []
    for t in s.times:
        xt = x[:t]
        tr = transcript[: rate * t]
        y = noise[: rate * t]
        try:
            res = decode(tr + y, params, t=t, C=C)
        except DecodeError:
            rows.append((trial, t, "failed", 1.0))
            continue
        err = res.x_hat - xt
        star = star_norm(err, s.mu)
        budget = dagger_norm(y, s.mu)
        ratio = star * t ** (0.5 - s.delta) / budget if budget > 0 else float("nan")
        vals = {"star_error": star, "linf_error": float(np.abs(err).max()),
                "dagger_budget": budget, "ratio": ratio,
                "residual_dagger": res.residual_dagger,
                "certified_bound": res.certified_bound,
                "pivots": float(res.lp_stats["pivots"]),
                "breakpoints": float(res.lp_stats["breakpoints"]), "failed": 0.0}
        rows.extend((trial, t, m, float(vals[m])) for m in METRICS if m != "failed")
        rows.append((trial, t, "failed", 0.0))
    return rows


@dataclass
class ExperimentReport:
    scenario: Scenario
    rows: list

    def values(self, metric: str, t: int) -> np.ndarray:
        return np.array([v for (_, tt, m, v) in self.rows if m == metric and tt == t])

    def median(self, metric: str, t: int) -> float:
        v = self.values(metric, t)
        v = v[~np.isnan(v)]
        return float(np.median(v)) if v.size else float("nan")

    def aggregates(self) -> dict:
        out = {}
        for t in self.scenario.times:
            per = {}
            for m in METRICS:
                v = self.values(m, t)
                v = v[~np.isnan(v)]
                if v.size == 0:
                    continue
                q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
                per[m] = {"median": float(med), "q1": float(q1), "q3": float(q3),
                          "n": int(v.size)}
            out[str(t)] = per
        return {"schema_version": SCHEMA_VERSION, "trials": self.scenario.trials,
                "k": self.scenario.k, "mu": self.scenario.mu, "T": self.scenario.T,
                "delta": self.scenario.delta, "noise": self.scenario.noise.kind,
                "by_time": out}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for trial, t, m, v in self.rows:
            w.writerow([SCHEMA_VERSION, trial, t, m, repr(v)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.aggregates(), indent=2, sort_keys=True) + "\n"

    def write(self, csv_path=None, json_path=None):
        csv_path = csv_path or self.scenario.csv_path
        json_path = json_path or self.scenario.json_path
        if csv_path:
            pathlib.Path(csv_path).write_text(self.to_csv())
        if json_path:
            pathlib.Path(json_path).write_text(self.to_json())


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_scenario(s: Scenario, n_jobs: int | None = None) -> ExperimentReport:
    """Run every trial; rows are sorted by (trial, t, metric) before return."""
    n_jobs = thread_count() if n_jobs is None else n_jobs
    if n_jobs > 1:
        from joblib import Parallel, delayed
        chunks = Parallel(n_jobs=n_jobs)(delayed(_run_trial)(s, r) for r in range(s.trials))
    else:
        chunks = [_run_trial(s, r) for r in range(s.trials)]
    rows = sorted((row for chunk in chunks for row in chunk), key=lambda r: r[:3])
    return ExperimentReport(scenario=s, rows=rows)


# --- calibration ---------------------------------------------------------------

def invertibility_curve(seed: int, k: int, mu: float, ts, starts=64, iters=500):
    C = code_matrix(seed, k, max(ts))
    return [robust_invertibility(C.leading(t).entries, mu, starts=starts, iters=iters,
                                 seed=seed).value for t in ts]


def opnorm_ok(seed: int, k: int, T: int) -> bool:
    """Whether ``max_{t <= T} ||C_t|| <= 1``.

    Leading submatrices have norms no larger than the whole, so the
    maximum is attained at ``t = T``.
    """
    return operator_norm(code_matrix(seed, k, T).entries) <= 1.0


def calibrate(ks, T, seeds, mu=0.5, ts=None, inv_seeds=None, starts=64, iters=500):
    """Per ``k``: operator-norm success fraction, block-event frequency,
    fitted ``(c0_hat, delta_hat, R^2)`` of the median invertibility curve,
    and the fraction of trials meeting the residual guarantee.

    ``inv_seeds`` limits the (costly) invertibility fit to a subset of
    the accepted seeds.
    """
    if not ks or not seeds:
        raise ValueError("ks and seeds must be non-empty")
    ts = ts or [t for t in (4, 8, 16, 32, 64, 128, 256) if t <= T]
    table = []
    for k in ks:
        ok = [s for s in seeds if opnorm_ok(s, k, T)]
        events = [block_event(block_norm_profile(sample_M(EnsembleParams(T=T, k=k, seed=s))))
                  for s in seeds]
        fit_seeds = (ok or list(seeds))[: inv_seeds or len(seeds)]
        curves = np.array([invertibility_curve(s, k, mu, ts, starts, iters) for s in fit_seeds])
        if len(ts) >= 2:
            c0, dlt, r2 = fit_power_law(ts, np.median(curves, axis=0))
        else:
            c0 = dlt = r2 = float("nan")
        table.append({"schema_version": SCHEMA_VERSION, "k": k, "T": T, "seeds": len(seeds),
                      "opnorm_fraction": len(ok) / len(seeds),
                      "block_event_frequency": float(np.mean(events)),
                      "c0_hat": c0, "delta_hat": dlt, "r_squared": r2,
                      "guarantee_rate": _guarantee_rate(k, T, mu, seeds[:5])})
    return table


def _guarantee_rate(k, T, mu, seeds) -> float:
    """Fraction of burst trials where ``dagger(C(x - x_hat)) <= 2 dagger(y)``."""
    hits = 0
    for s in seeds:
        params = CodeParams(seed=s, k=k, mu=mu)
        x = np.random.default_rng(s).standard_normal(T)
        tr = encode(params, x)
        y = adversaries.generate(NoiseModel("single_burst", t0=max(1, T // 8)), tr, T, mu, seed=s)
        res = decode(tr + y, params)
        C = code_matrix(s, k, T).entries
        hits += dagger_norm(C @ (x - res.x_hat), mu) <= 2 * dagger_norm(y, mu) + 1e-8
    return hits / len(seeds)


def calibration_csv(table) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CALIBRATION_HEADER, lineterminator="\n")
    w.writeheader()
    for row in table:
        w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
