"""The ten acceptance criteria as runnable checks.

Each ``criterion_N`` returns a :class:`CriterionResult` with the measured
quantities in ``detail``.  Tolerances and sizes are pinned here; runtime
limits are part of the pass condition where a limit is stated.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import concentration as conc
from . import lower_bound as lb
from .adversaries import NoiseModel, generate
from .analysis import fit_power_law, jacobi_singular_values, operator_norm
from .codec import CodeParams, decode, encode
from .harness import Scenario, invertibility_curve, opnorm_ok, run_scenario
from .matrix_ensemble import EnsembleParams, code_matrix, sample_M
from .simplex import lad_interpolation_oracle, lad_solve
from .weighted_norms import dagger_norm, star_norm, weight_diagonals, NormParams


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name} ({self.seconds:.1f}s)"


def _timed(number, name, limit=None):
    def wrap(fn):
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            passed, detail = fn(*args, **kwargs)
            secs = time.perf_counter() - t0
            if limit is not None:
                detail["runtime_limit_s"] = limit
                passed = passed and secs < limit
            return CriterionResult(number, name, bool(passed), secs, detail)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


@_timed(1, "structural exactness", limit=30)
def criterion_1(configs=200, seed=1):
    rng = np.random.default_rng(seed)
    lot = prefix = invariant = 0
    for _ in range(configs):
        T = int(rng.integers(1, 65))
        k = int(rng.integers(1, 17))
        s = int(rng.integers(2 ** 63))
        M = sample_M(EnsembleParams(T=T, k=k, seed=s))
        lot += M.is_lot()
        t = int(rng.integers(1, T + 1))
        params = CodeParams(seed=s, k=k)
        x = rng.standard_normal(T)
        full = encode(params, x)
        prefix += np.array_equal(encode(params, x[:t]), full[: (k + 1) * t])
        small = sample_M(EnsembleParams(T=t, k=k, seed=s))
        invariant += np.array_equal(M.leading(t).entries, small.entries)
    ok = lot == prefix == invariant == configs
    return ok, {"configs": configs, "lot": lot, "prefix_bitwise": prefix,
                "time_invariant_bitwise": invariant}


@_timed(2, "norm identities")
def criterion_2(vectors=10_000, seed=2, tol=1e-12):
    rng = np.random.default_rng(seed)
    worst_d = worst_s = worst_mu1 = 0.0
    for _ in range(vectors):
        mu = float(rng.uniform(0.0, 1.0))
        T = int(rng.integers(1, 65))
        rate = int(rng.integers(1, 18))
        p = NormParams(mu=mu, horizon=T, rate=rate)
        L, Rinv = weight_diagonals(p)
        y = rng.standard_normal(p.length)
        x = rng.standard_normal(T)
        d = dagger_norm(y, p)
        worst_d = max(worst_d, abs(d - np.abs(L * y).sum()) / max(1.0, d))
        s = star_norm(x, p)
        worst_s = max(worst_s, abs(s - np.linalg.norm(Rinv * x)) / max(1.0, s))
        # mu = 1: dagger is l1 and star^2 = sum (T - i + 1)/T x_i^2
        one = NormParams(mu=1.0, horizon=T, rate=rate)
        w = (T - np.arange(T)) / T
        worst_mu1 = max(worst_mu1,
                        abs(dagger_norm(y, one) - np.abs(y).sum()),
                        abs(star_norm(x, one) - math.sqrt(float(w @ x ** 2))))
    ok = worst_d <= tol and worst_s <= tol and worst_mu1 <= tol
    return ok, {"max_dagger_gap": worst_d, "max_star_gap": worst_s, "max_mu1_gap": worst_mu1}


@_timed(3, "zero-noise decoding", limit=120)
def criterion_3(trials=100, T=32, k=8, mu=0.5, tol=1e-6):
    worst = 0.0
    for r in range(trials):
        params = CodeParams(seed=1000 + r, k=k, mu=mu)
        x = np.random.default_rng(r).standard_normal(T)
        res = decode(encode(params, x), params)
        worst = max(worst, float(np.abs(res.x_hat - x).max()))
    return worst <= tol, {"trials": trials, "max_linf_error": worst}


NOISE_MIX = (
    NoiseModel("single_burst", t0=3, magnitude=1.0),
    NoiseModel("uniform_spread", budget=2.0),
    NoiseModel("dagger_budget", budget=1.0, placement="recent"),
    NoiseModel("dagger_budget", budget=1.0, placement="old"),
    NoiseModel("compact_support", t0=10, inner=NoiseModel("uniform_spread", budget=5.0)),
)


@_timed(4, "LP optimality and residual bound")
def criterion_4(trials=50, T=24, k=8, mu=0.5, oracle_instances=50):
    opt_ok = bound_ok = 0
    worst_opt = worst_bound = -np.inf
    for r in range(trials):
        params = CodeParams(seed=2000 + r, k=k, mu=mu)
        rng = np.random.default_rng(r)
        x = rng.standard_normal(T)
        z0 = encode(params, x)
        y = generate(NOISE_MIX[r % len(NOISE_MIX)], z0, T, mu, seed=r)
        res = decode(z0 + y, params)
        C = code_matrix(params.seed, k, T).entries
        dy = dagger_norm(y, mu)
        gap = dagger_norm(z0 + y - C @ res.x_hat, mu) - dy * (1 + 1e-9)
        worst_opt = max(worst_opt, gap)
        opt_ok += gap <= 0
        gap2 = dagger_norm(C @ (x - res.x_hat), mu) - (2 * dy + 1e-8)
        worst_bound = max(worst_bound, gap2)
        bound_ok += gap2 <= 0
    rng = np.random.default_rng(4)
    oracle_gap = 0.0
    for _ in range(oracle_instances):
        t = int(rng.integers(1, 5))
        m = int(rng.integers(t + 1, 9))
        A = rng.standard_normal((m, t))
        z = rng.standard_normal(m)
        w = rng.uniform(0.5, 2.0, m)
        _, ref = lad_interpolation_oracle(w, A, z)
        got = lad_solve(w, A, z).objective
        oracle_gap = max(oracle_gap, abs(got - ref) / max(1.0, abs(ref)))
    ok = opt_ok == trials and bound_ok == trials and oracle_gap <= 1e-7
    return ok, {"optimality_holds": opt_ok, "residual_bound_holds": bound_ok,
                "worst_optimality_gap": worst_opt, "worst_bound_gap": worst_bound,
                "oracle_max_rel_gap": oracle_gap, "trials": trials}


@_timed(5, "burst attenuation", limit=600)
def criterion_5(trials=50, T=64, k=16, mu=0.5, seed=5):
    s = Scenario(seed=seed, k=k, mu=mu, T=T, trials=trials, times=[16, 32, 64],
                 noise=NoiseModel("single_burst", t0=8, magnitude=1.0))
    rep = run_scenario(s)
    med = [rep.median("star_error", t) for t in s.times]
    ok = med[2] <= 0.5 * med[0] and med[0] > med[1] > med[2]
    return ok, {"median_star_error": dict(zip(s.times, med)),
                "ratio_64_over_16": med[2] / med[0] if med[0] else float("nan")}


def opnorm_fraction(k, seeds, T=64):
    ok = [s for s in seeds if opnorm_ok(s, k, T)]
    return len(ok) / len(seeds), ok


@_timed(6, "operator norm")
def criterion_6(seeds=100, T=64, k_small=4, k_large=16, oracle_matrices=20):
    seeds = list(range(seeds))
    f_small, _ = opnorm_fraction(k_small, seeds, T)
    f_large, _ = opnorm_fraction(k_large, seeds, T)
    rng = np.random.default_rng(6)
    gap = 0.0
    for _ in range(oracle_matrices):
        A = rng.standard_normal((8, 5))
        gap = max(gap, abs(operator_norm(A) - jacobi_singular_values(A)[0]))
    ok = f_large >= 0.5 and f_large > f_small and gap <= 1e-7
    return ok, {"fraction_k%d" % k_small: f_small, "fraction_k%d" % k_large: f_large,
                "power_vs_jacobi_max_gap": gap}


@_timed(7, "robust invertibility")
def criterion_7(k=16, mu=0.5, T=64, max_seeds=20, seed_pool=100,
                ts=(4, 8, 16, 32, 64), starts=64, iters=500):
    accepted = [s for s in range(seed_pool) if opnorm_ok(s, k, T)][:max_seeds]
    curves = np.array([invertibility_curve(s, k, mu, list(ts), starts, iters)
                       for s in accepted])
    med = np.median(curves, axis=0)
    c0, dlt, r2 = fit_power_law(ts, med)
    scaled = med / np.sqrt(ts)
    ok = 0 < dlt < 0.5 and r2 >= 0.8 and scaled[-1] < scaled[0]
    return ok, {"seeds": len(accepted), "median_estimates": dict(zip(ts, med.tolist())),
                "c0_hat": c0, "delta_hat": dlt, "r_squared": r2,
                "estimate_over_sqrt_t": dict(zip(ts, scaled.tolist()))}


@_timed(8, "lower bound machinery", limit=60)
def criterion_8(Ts=(4, 16, 64, 256), mus=(0.25, 0.5, 1.0), ks=(1, 4), c0=1.0):
    base = lb.build_instance(1.0, 1.0, 1, 1)
    p = lb.primal_solve(base).objective
    d = lb.dual_value(base, [2.0])
    ok = abs(p - 1) <= 1e-6 and abs(d - 1) <= 1e-6
    rows = []
    for mu in mus:
        for k in ks:
            for T in Ts:
                inst = lb.build_instance(mu, c0, k, T)
                primal = lb.primal_solve(inst).objective
                cert = lb.make_certificate(inst)
                j = np.ceil(np.arange(1, inst.n + 1) / k)
                weak = primal >= cert.value - 1e-8
                growth = cert.tau > 0 and cert.value >= cert.tau * lb.harmonic(T)
                lam_ok = bool(np.all(cert.Lambda <= cert.a0 * cert.c_prime / np.sqrt(j) * (1 + 1e-12)))
                ok = ok and weak and growth and lam_ok
                rows.append({"mu": mu, "k": k, "T": T, "primal": primal,
                             "certificate": cert.value, "tau_H_T": cert.tau * lb.harmonic(T),
                             "weak": weak, "growth": growth, "Lambda_bound": lam_ok})
    return ok, {"base_primal": p, "base_dual": d, "instances": rows}


@_timed(9, "concentration bounds", limit=180)
def criterion_9(N=conc.MC_SAMPLES, seed=9):
    checks = {}
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(N)
    tail = []
    for t in (0.5, 1.0, 2.0, 3.0):
        est = conc._estimate(int((x >= t).sum()), N)
        tail.append(est.dominated_by(conc.gaussian_tail_bound(t)))
    checks["gaussian_tail"] = all(tail)

    sig = np.linspace(0.5, 2.0, 16)
    upper = []
    for scale in (0.8, 1.0, 1.1, 1.3):
        alpha = scale * conc.vacuity_threshold(sig)
        bound, _ = conc.l1_upper_tail_bound(alpha, sig)
        upper.append(conc.l1_upper_tail_mc(alpha, sig, N, seed=[seed, 1]).dominated_by(bound))
    checks["l1_upper_tail"] = all(upper)

    small = []
    for tau, sigmas, S in ((0.5, [1.0], None), (0.8, [1.0] * 8, None),
                           (0.9, list(np.linspace(0.3, 3.0, 12)), range(6)),
                           (0.95, list(np.linspace(0.5, 1.5, 6)), None)):
        thr, bound = conc.small_ball_bound(tau, sigmas, S)
        small.append(conc.small_ball_mc(thr, sigmas, N, seed=[seed, 2]).dominated_by(bound))
    checks["small_ball"] = all(small)

    grid = np.linspace(0.01, 10.0, 200)
    nus = np.array([conc.nu(v) for v in grid])
    checks["nu_bound_grid"] = bool(np.all(nus <= np.array([conc.nu_bound(v) for v in grid]) + 1e-15)
                                   and np.all(nus <= 1e-15))
    gap = max(abs(conc.abs_exp_moment(c, s) - math.exp(conc.nu(c * c * s * s)))
              for c in (0.1, 0.5, 1.0, 2.0, 4.0) for s in (0.25, 1.0, 3.0))
    checks["nu_exp_moment"] = gap <= 1e-8
    checks["dominance"] = (conc.dominance_check(1.0, 0.0, 1.0, N, seed)
                           and conc.dominance_check(2.0, -1.5, 0.7, N, seed + 1)
                           and conc.l1_shift_check(rng.standard_normal(8), np.linspace(0.5, 2, 8),
                                                   N, seed + 2))
    return all(checks.values()), {**checks, "nu_exp_moment_gap": gap}


@_timed(10, "zeroing adversary")
def criterion_10(T=32, k=8, mu=0.5, trials=10):
    worst = 0.0
    for r in range(trials):
        params = CodeParams(seed=3000 + r, k=k, mu=mu)
        x = np.random.default_rng(r).standard_normal(T)
        z0 = encode(params, x)
        y = generate(NoiseModel("zeroing_l2"), z0, T, mu)
        worst = max(worst, float(np.abs(decode(z0 + y, params).x_hat).max()))
    return worst <= 1e-8, {"max_linf_xhat": worst}


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all(only=None, echo=print):
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        if only and i not in only:
            continue
        res = fn()
        if echo:
            echo(res.line())
        results.append(res)
    return results
