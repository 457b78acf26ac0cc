"""Command line entry point: ``dki-sim {bounds,build,simulate,sweep}``."""

from __future__ import annotations

import argparse
import logging
import math
import sys

from . import bounds, config, montecarlo, packing
from .channel import FadingModel
from .decoder import TargetSet
from .errors import DKIError, InvalidParameter, ValidationFailed
from .report import OutputSet, fmt


def _channel(cfg):
    g_max = cfg["channel.g_max"]
    ch = bounds.ChannelParams(A=cfg["channel.A"], sigma2=cfg["channel.sigma2"],
                              gamma=cfg["channel.gamma"], g_max=g_max)
    # validates the fading description even though simulation only uses its support
    FadingModel(kind=cfg["fading.kind"], gamma=ch.gamma, g_max=ch.g_max,
                scale=cfg["fading.scale"])
    return ch


def _first_code(cfg):
    return bounds.CodeParams(n=cfg["code.n"][0], kappa=cfg["code.kappa"][0], b=cfg["code.b"])


def _codebook(cfg, code, ch):
    path = cfg["codebook.path"]
    if path:
        return packing.read_codebook(path)
    return packing.build_codebook(
        code, ch, seed=cfg["sim.seed"], saturation_T=cfg["packing.saturation_T"],
        theta=cfg["code.theta"], max_codewords=cfg["packing.max_codewords"],
        memory_cap=cfg["packing.memory_cap"])


def cmd_bounds(cfg, out):
    ch = _channel(cfg)
    rows = []
    for n in cfg["code.n"]:
        for kappa in cfg["code.kappa"]:
            rep = bounds.bound_report(bounds.CodeParams(n=n, kappa=kappa, b=cfg["code.b"]), ch)
            rows.append(rep)
            print(f"n={n} kappa={fmt(kappa)} b={fmt(rep.b)}")
            for name in ("theta_n", "tau_n", "K", "rate_lower", "rate_upper", "log2M_lower",
                         "log2M_upper", "min_dist_converse", "type1_bound", "type2_bound"):
                print(f"  {name:<18} {fmt(getattr(rep, name))}")
    cols = ["n", "kappa", "b", "theta", "tau", "K", "rate_lower", "rate_upper",
            "log2M_lower", "log2M_upper", "min_dist_converse", "type1_bound", "type2_bound"]
    out.write_csv("bounds.csv", cols, [
        (r.n, r.kappa, r.b, r.theta_n, r.tau_n, r.K, r.rate_lower, r.rate_upper,
         r.log2M_lower, r.log2M_upper, r.min_dist_converse, r.type1_bound, r.type2_bound)
        for r in rows], cfg.echo())
    return 0


def cmd_build(cfg, out):
    ch = _channel(cfg)
    code = _first_code(cfg)
    cb = _codebook(cfg, code, ch)
    packing.write_codebook(cb, out.path("codebook.txt"))
    rep = packing.validate_codebook(cb, ch)
    samples = cfg["packing.coverage_samples"]
    coverage = packing.coverage_certificate(cb, samples, seed=cfg["sim.seed"],
                                            threads=cfg.threads) if samples else float("nan")
    cap = packing.log2_volume_ratio_cap(cb.n, cb.R_inner, cb.r0) if cb.R_inner > 0 else 0.0
    out.write_csv("validation.csv",
                  ["n", "M", "r0", "R_inner", "max_norm", "min_distance", "power_ok",
                   "distance_ok", "log2M", "log2_volume_cap", "coverage", "saturation_rejections"],
                  [(cb.n, cb.M, cb.r0, cb.R_inner, rep.max_norm, rep.min_distance, rep.power_ok,
                    rep.distance_ok, math.log2(cb.M), cap, coverage, cb.saturation_rejections)],
                  cfg.echo())
    print(f"M={cb.M} max_norm={fmt(rep.max_norm)} min_distance={fmt(rep.min_distance)} "
          f"coverage={fmt(coverage)}")
    if not rep.passed:
        raise ValidationFailed("codebook failed the power or distance check")
    return 0


def _target(cfg, cb, code, i, include):
    explicit = cfg["sim.target"]
    if explicit:
        return TargetSet(tuple(explicit))
    K = cfg["sim.K"] or bounds.target_set_size(code.n, code.kappa)
    K = min(K, cb.M if include else cb.M - 1)
    return montecarlo.choose_target(cb, i, K, cfg["sim.target_policy"], include=include,
                                    seed=cfg["sim.seed"])


def cmd_simulate(cfg, out):
    ch = _channel(cfg)
    code = _first_code(cfg)
    seed, trials = cfg["sim.seed"], cfg["sim.trials"]
    experiments = cfg["sim.experiments"]
    unknown = set(experiments) - {"type1", "type2", "degenerate", "converse"}
    if unknown:
        raise InvalidParameter(f"unknown experiments {sorted(unknown)}")
    grid = montecarlo.make_ggrid(ch.gamma, ch.g_max, cfg["grid.points"])
    echo = cfg.echo()
    needs_book = any(e in experiments for e in ("type1", "type2", "degenerate"))
    cb = _codebook(cfg, code, ch) if needs_book else None
    i = cfg["sim.message"]
    if cb is not None:
        if not 0 <= i < cb.M:
            raise InvalidParameter(f"sim.message={i} outside the codebook (M={cb.M})")
    tau = None if cb is None else ch.gamma ** 2 * cb.theta / 3.0
    b1 = bounds.type1_error_bound(code, ch)
    b2 = bounds.type2_error_bound(code, ch)
    cols = ["g", "p_hat", "half_width", "trials", "K", "analytic_bound"]

    if "type1" in experiments:
        t1 = _target(cfg, cb, code, i, include=True)
        est = montecarlo.estimate_type1(cb, i, t1, ch, grid, trials, seed, threads=cfg.threads)
        rows = [(g, p, montecarlo.half_width(p, trials), trials, t1.K, b1)
                for g, p in zip(est.g_grid, est.per_g)]
        out.write_csv("type1.csv", cols, rows, echo)
        print(f"type1: p_hat={fmt(est.p_hat)} +- {fmt(est.half_width)} at g={fmt(est.g_worst)}"
              f" (bound {fmt(b1)})")
    if "type2" in experiments:
        t2 = _target(cfg, cb, code, i, include=False)
        est = montecarlo.estimate_type2(cb, i, t2, ch, grid, trials, seed, threads=cfg.threads)
        rows = [(g, p, montecarlo.half_width(p, trials), trials, t2.K, b2)
                for g, p in zip(est.g_grid, est.per_g)]
        out.write_csv("type2.csv", cols, rows, echo)
        print(f"type2: p_hat={fmt(est.p_hat)} +- {fmt(est.half_width)} at g={fmt(est.g_worst)}"
              f" (bound {fmt(b2)})")
    if "degenerate" in experiments:
        t1 = _target(cfg, cb, code, i, include=True)
        outside = [j for j in range(cb.M) if j not in t1]
        if not outside:
            raise InvalidParameter("degenerate experiment needs a codeword outside the target set")
        res = montecarlo.degenerate_fading_experiment(
            cb, i, outside[0], t1, ch, trials, seed, shared=cfg["sim.shared_streams"],
            tau=tau, threads=cfg.threads)
        out.write_csv("degenerate.csv", ["i1", "i2", "shared", "trials", "p1", "p2", "sum"],
                      [(i, outside[0], res.shared, trials, res.p1, res.p2, res.total)], echo)
        print(f"degenerate: p1+p2={fmt(res.total)}")
    if "converse" in experiments:
        t = bounds.tau(code, ch)
        R_inner = max(0.0, math.sqrt(ch.A) - math.sqrt(bounds.theta(code, ch)))
        dmax = min(2.0 * math.sqrt(ch.sigma2 + t) / ch.gamma, 2.0 * R_inner)
        dists = cfg["converse.distances"]
        if not dists:
            k = cfg["converse.points"]
            dists = [0.0] + [dmax * (j + 1) / k for j in range(k)]
        curve = montecarlo.converse_distance_experiment(
            code.n, ch, code, dists, trials, seed, shared=cfg["sim.shared_streams"],
            threads=cfg.threads)
        out.write_csv("converse.csv", ["d", "p1", "p2", "sum", "hw1", "hw2", "alpha_n"],
                      [(p.d, p.p1, p.p2, p.total, p.hw1, p.hw2,
                        bounds.converse_min_distance(code, ch)) for p in curve], echo)
        print("converse: " + " ".join(f"{fmt(p.d)}:{fmt(p.total)}" for p in curve))
    return 0


def cmd_sweep(cfg, out):
    ch = _channel(cfg)
    rows = []
    for kappa in cfg["code.kappa"]:
        rows.extend(montecarlo.scaling_sweep(cfg["code.n"], kappa, cfg["code.b"], ch,
                                             seed=cfg["sim.seed"],
                                             saturation_T=cfg["packing.saturation_T"]))
    out.write_csv("sweep.csv",
                  ["n", "kappa", "b", "seed", "M", "rate_ratio", "converse_ratio", "within_bound"],
                  [(r.n, r.kappa, r.b, r.seed, r.M, r.rate_ratio, r.converse_ratio,
                    r.within_bound) for r in rows], cfg.echo())
    for r in rows:
        print(f"n={r.n} kappa={fmt(r.kappa)} M={r.M} ratio={fmt(r.rate_ratio)} "
              f"converse={fmt(r.converse_ratio)}")
    if not all(r.within_bound for r in rows):
        raise ValidationFailed("a sweep point exceeds the converse codebook bound")
    return 0


COMMANDS = {"bounds": cmd_bounds, "build": cmd_build, "simulate": cmd_simulate,
            "sweep": cmd_sweep}


def build_parser():
    p = argparse.ArgumentParser(prog="dki-sim", description=__doc__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="key = value config file (or an output CSV)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--trials", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config.Config(config.load(args.config))
        cfg.override("sim.seed", args.seed)
        cfg.override("sim.trials", args.trials)
        threads = args.threads or montecarlo.default_threads()
        if threads < 1:
            raise InvalidParameter("--threads must be >= 1")
        cfg.threads = threads
        with OutputSet(args.out) as out:
            return COMMANDS[args.command](cfg, out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DKIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
