"""Command-line interface: ``onlinecode <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings

import numpy as np

from . import acceptance, analysis, concentration as conc, harness, lower_bound as lb
from .codec import CodeParams, decode, encode
from .matrix_ensemble import EnsembleParams, code_matrix, sample_M

log = logging.getLogger("onlinecode")


def _warn_mu(mu):
    if mu == 0.0:
        warnings.warn("mu=0 is allowed for norm evaluation only; the decoding "
                      "guarantees assume 0 < mu <= 1", stacklevel=2)


def _code_args(p, with_mu=True):
    p.add_argument("--seed", type=int, default=0, help="shared public seed of the code")
    p.add_argument("--k", type=int, default=16, help="coded symbols per input (rate k+1)")
    if with_mu:
        p.add_argument("--mu", type=float, default=0.5, help="weighting exponent in [0, 1]")


def _write_rows(path, header, rows):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    finally:
        if path:
            fh.close()


def _dump_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_encode(a):
    _warn_mu(a.mu)
    x = harness.read_vector(a.input)
    z = encode(CodeParams(seed=a.seed, k=a.k, mu=a.mu), x)
    harness.write_vector(a.out, z)
    return 0


def cmd_decode(a):
    _warn_mu(a.mu)
    z = harness.read_vector(a.input)
    res = decode(z, CodeParams(seed=a.seed, k=a.k, mu=a.mu), t=a.t)
    harness.write_vector(a.out, res.x_hat)
    if a.report:
        _dump_json(a.report, res.to_dict())
    return 0


def cmd_simulate(a):
    s = harness.load_scenario(a.scenario)
    if a.seed is not None:
        s.seed = a.seed
    _warn_mu(s.mu)
    rep = harness.run_scenario(s, n_jobs=a.jobs)
    rep.write(a.csv, a.json)
    if not (a.csv or s.csv_path):
        sys.stdout.write(rep.to_csv())
    return 0


def cmd_analyze(a):
    C = code_matrix(a.seed, a.k, a.T)
    ts = a.ts or [t for t in (1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024) if t <= a.T]
    if a.what == "opnorm":
        rows = [(t, analysis.operator_norm(C.leading(t).entries)) for t in ts]
        _write_rows(a.out, ["t", "opnorm"], rows)
    elif a.what == "blocks":
        M = sample_M(EnsembleParams(T=a.T, k=a.k, seed=a.seed))
        prof = analysis.block_norm_profile(M)
        rows = [(i, v, 1.0 / (i * np.sqrt(2.0))) for i, v in enumerate(prof, start=1)]
        _write_rows(a.out, ["block", "opnorm", "threshold"], rows)
    elif a.what == "invertibility":
        rows = []
        for t in ts:
            e = analysis.robust_invertibility(C.leading(t).entries, a.mu, starts=a.starts,
                                              seed=a.seed)
            rows.append((t, e.value, float(np.linalg.norm(e.best_x)), e.starts))
        _write_rows(a.out, ["t", "estimate", "witness_norm", "starts"], rows)
    else:
        rows = []
        for n in ts:
            split = analysis.PrefixSplit(n, a.delta, a.j0)
            if not split.usable:
                log.warning("n=%d: suffix of %d coordinates leaves no prefix; skipped",
                            n, split.suffix_length)
                continue
            e = analysis.prefix_invertibility(C.leading(n).entries, a.mu, split,
                                              starts=a.starts, seed=a.seed)
            rows.append((n, e.value, float(np.linalg.norm(e.best_x)), e.starts))
        _write_rows(a.out, ["t", "estimate", "witness_norm", "starts"], rows)
    return 0


def cmd_lowerbound(a):
    rows = []
    for T in a.T:
        inst = lb.build_instance(a.mu, a.c0, a.k, T)
        cert = lb.make_certificate(inst)
        rows.append((T, lb.primal_solve(inst).objective, cert.value,
                     cert.tau * lb.harmonic(T)))
    _write_rows(a.out, ["T", "primal", "dual", "tau_H_T"], rows)
    return 0


def cmd_concentration(a):
    N, seed = a.N, a.seed
    report = {"check": a.check, "N": N, "seed": seed}
    if a.check == "tail":
        x = np.random.default_rng(seed).standard_normal(N)
        report["rows"] = [{"t": t, "bound": conc.gaussian_tail_bound(t),
                           "exact": conc.gaussian_tail(t), "mc": float((x >= t).mean())}
                          for t in (0.5, 1.0, 2.0, 3.0)]
    elif a.check == "l1upper":
        sig = np.linspace(0.5, 2.0, 16)
        rows = []
        for scale in (0.8, 1.0, 1.1, 1.3):
            alpha = scale * conc.vacuity_threshold(sig)
            bound, vac = conc.l1_upper_tail_bound(alpha, sig)
            est = conc.l1_upper_tail_mc(alpha, sig, N, seed)
            rows.append({"alpha": alpha, "bound": bound, "vacuous": vac, "mc": est.p, "se": est.se})
        report["rows"] = rows
    elif a.check == "smallball":
        rows = []
        for tau in (0.25, 0.5, 0.8, 0.95):
            thr, bound = conc.small_ball_bound(tau, [1.0] * 8)
            est = conc.small_ball_mc(thr, [1.0] * 8, N, seed)
            rows.append({"tau": tau, "threshold": thr, "bound": bound, "mc": est.p, "se": est.se})
        report["rows"] = rows
    elif a.check == "nu":
        report["rows"] = [{"x": x, "nu": conc.nu(x), "nu_bound": conc.nu_bound(x)}
                          for x in (0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0)]
    elif a.check == "dominance":
        report["a1_b0"] = conc.dominance_check(1.0, 0.0, 1.0, N, seed)
        report["shift"] = conc.l1_shift_check(np.ones(8), np.ones(8), N, seed)
    else:
        fit = conc.nonzero_mean_lower_tail_check(0.9, conc.equal_sigma_specs(), N, seed)
        report.update(slope=fit.slope, parameters=fit.parameters,
                      probabilities=fit.probabilities, pairwise_slopes=fit.pairwise_slopes,
                      below_resolution=fit.below_resolution, passed=fit.passed)
    _dump_json(a.out, report)
    return 0


def cmd_calibrate(a):
    table = harness.calibrate(a.ks, a.T, list(range(a.seed, a.seed + a.seeds)), mu=a.mu,
                              inv_seeds=a.inv_seeds, starts=a.starts)
    text = harness.calibration_csv(table)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_accept(a):
    results = acceptance.run_all(only=set(a.only) if a.only else None)
    if a.report:
        _dump_json(a.report, [{"criterion": r.number, "name": r.name, "passed": r.passed,
                               "seconds": r.seconds, "detail": r.detail} for r in results])
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="onlinecode", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("encode", help="encode a signal (one value per line)")
    _code_args(e)
    e.add_argument("--input", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="decode a received vector")
    _code_args(d)
    d.add_argument("--t", type=int, default=None, help="decode time (default: all)")
    d.add_argument("--input", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--report", help="JSON file for the decode report")
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("simulate", help="run a TOML scenario")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=int, default=None, help="override ensemble.seed")
    s.add_argument("--csv")
    s.add_argument("--json")
    s.add_argument("--jobs", type=int, default=None,
                   help=f"worker count (default: ${harness.THREADS_ENV} or 1)")
    s.set_defaults(func=cmd_simulate)

    an = sub.add_parser("analyze", help="matrix diagnostics")
    an.add_argument("--what", choices=["opnorm", "blocks", "invertibility", "prefix"],
                    required=True)
    _code_args(an)
    an.add_argument("--T", type=int, default=64)
    an.add_argument("--ts", type=int, nargs="*")
    an.add_argument("--starts", type=int, default=64)
    an.add_argument("--delta", type=float, default=0.25)
    an.add_argument("--j0", type=int, default=None, help="override the prefix split")
    an.add_argument("--out")
    an.set_defaults(func=cmd_analyze)

    lo = sub.add_parser("lowerbound", help="primal/dual table of the lower-bound program")
    lo.add_argument("--mu", type=float, default=0.5)
    lo.add_argument("--c0", type=float, default=1.0)
    lo.add_argument("--k", type=int, default=1)
    lo.add_argument("--T", type=int, nargs="+", default=[4, 16, 64, 256])
    lo.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")
    lo.add_argument("--out")
    lo.set_defaults(func=cmd_lowerbound)

    c = sub.add_parser("concentration", help="Monte Carlo checks of the Gaussian bounds")
    c.add_argument("--check", required=True,
                   choices=["tail", "l1upper", "smallball", "nu", "dominance", "nonzero"])
    c.add_argument("--N", type=int, default=conc.MC_SAMPLES)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_concentration)

    ca = sub.add_parser("calibrate", help="sweep k and tabulate empirical constants")
    ca.add_argument("--ks", type=int, nargs="+", default=[4, 8, 16, 32])
    ca.add_argument("--T", type=int, default=64)
    ca.add_argument("--seeds", type=int, default=20, help="number of seeds")
    ca.add_argument("--seed", type=int, default=0, help="first seed")
    ca.add_argument("--inv-seeds", type=int, default=5,
                    help="seeds used for the invertibility fit")
    ca.add_argument("--starts", type=int, default=64)
    ca.add_argument("--mu", type=float, default=0.5)
    ca.add_argument("--out")
    ca.set_defaults(func=cmd_calibrate)

    ac = sub.add_parser("accept", help="run the acceptance suite")
    ac.add_argument("--only", type=int, nargs="*")
    ac.add_argument("--report")
    ac.add_argument("--seed", type=int, default=0, help="unused; criteria pin their seeds")
    ac.set_defaults(func=cmd_accept)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        log.error("%s", err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
