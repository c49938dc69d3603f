"""``hedscore`` command line.

Every command prints a JSON run report on stdout. Exit status is 0 on
success, 2 for usage or parse problems and 3 when the input breaks an
invariant.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from hedscore import io
from hedscore.core import (
    DecayParams,
    half_life,
    hed_exact_piecewise,
    hed_phase_decomposition,
    hed_score,
    hed_smooth,
    hed_upper_bound,
    lambda_from_budget,
)
from hedscore.errors import HedError, InvariantViolation
from hedscore.frontier import abc, frontier_curve
from hedscore.significance import BootstrapConfig, bootstrap_compare
from hedscore.synth import ScenarioSpec, generate_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVARIANT = 3

# (domain, representative system, lambda, printed half-life)
STANDARD_TABLE = (
    ("Ultra-High Latency Sensitivity", "High-Frequency / Algorithmic Trading", 0.50, 1.39),
    ("Network Security & IDS", "Intrusion Detection (NSL-KDD)", 0.14, 4.95),
    ("Cyber-Physical & BioRefinery", "BIOLOOP Industrial Control", 0.05, 13.86),
    ("Epidemiological Surveillance", "Pandemic Onset Detection", 0.02, 34.66),
    ("Seismic Early Warning", "P-wave / S-wave Discrimination", 0.01, 69.31),
)


class UsageError(HedError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_decay(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float, help="decay rate per step")
    g.add_argument("--budget", type=float, help="response budget in steps (sets the half-life)")


def _decay(args) -> DecayParams:
    return lambda_from_budget(args.budget) if args.budget is not None else DecayParams(args.lam)


def _decay_params(args, decay: DecayParams) -> dict:
    d = {"lambda": decay.lambda_h}
    if args.budget is not None:
        d["budget"] = args.budget
    return d


def _load(path: str, t_start: Optional[int]):
    stream, meta = io.read_stream(path, t_start)
    return stream, meta, io.file_digest(path)


def _equal_phases(t_start: int, horizon: int, k: int) -> list[int]:
    if k < 1:
        raise UsageError("--phases must be >= 1")
    edges = np.linspace(t_start, horizon, k + 1)
    return [int(round(x)) for x in edges]


def cmd_score(args) -> dict:
    stream, meta, digest = _load(args.stream, args.t_start)
    decay = _decay(args)
    res = hed_score(stream, decay)
    results = {
        "score": res.score,
        "exact_piecewise": hed_exact_piecewise(stream, decay),
        "baseline": res.baseline,
        "half_life": half_life(decay),
        "upper_bound_discrete": hed_upper_bound(stream, decay, mode="discrete"),
        "upper_bound_continuous": hed_upper_bound(stream, decay, mode="continuous"),
        "t_start": stream.t_start,
        "horizon": stream.horizon,
    }
    params = _decay_params(args, decay)
    if args.phases is not None:
        rep = hed_phase_decomposition(stream, decay, _equal_phases(stream.t_start, stream.horizon, args.phases))
        results["phases"] = {"boundaries": list(rep.boundaries), "contributions": rep.contributions}
        params["phases"] = args.phases
    if args.smooth is not None:
        results["smooth_score"] = hed_smooth(stream, decay, args.smooth)
        params["smooth_beta"] = args.smooth
    if args.out_csv:
        t = np.arange(stream.t_start, stream.horizon + 1)
        io.write_table(args.out_csv, {"t": t, "lift": res.lifts, "discount": res.discounts})
    return io.build_report(
        "score", {"stream": digest}, params, {"label": meta.get("label", ""), **results}
    )


def cmd_compare(args) -> dict:
    if args.seed is None:
        raise UsageError("compare: --seed is required (no implicit entropy)")
    a, _, da = _load(args.stream_a, args.t_start)
    b, _, db = _load(args.stream_b, args.t_start)
    decay = _decay(args)
    cfg = BootstrapConfig(seed=args.seed, num_resamples=args.B, block_len=args.block)
    res = bootstrap_compare(a, b, decay, cfg, workers=args.workers)
    params = {**_decay_params(args, decay), "B": args.B, "block": res.block_len}
    results = res.to_dict()
    results["score_a"] = hed_score(a, decay).score
    results["score_b"] = hed_score(b, decay).score
    return io.build_report("compare", {"stream_a": da, "stream_b": db}, params, results, seed=args.seed)


def _curve_dict(curve) -> dict:
    return {"label": curve.label, "theta": curve.thetas, "far": curve.fars, "hed": curve.heds}


def cmd_frontier(args) -> dict:
    a, ma, da = _load(args.stream_a, args.t_start)
    decay = _decay(args)
    curves = [frontier_curve(a, decay, label=ma.get("label") or "A")]
    inputs = {"stream_a": da}
    if args.stream_b:
        b, mb, db = _load(args.stream_b, args.t_start)
        curves.append(frontier_curve(b, decay, label=mb.get("label") or "B"))
        inputs["stream_b"] = db
    results = {"curves": [_curve_dict(c) for c in curves]}
    if len(curves) == 2:
        r = abc(curves[0], curves[1])
        results["abc"] = r.abc
        results["dominated"] = r.dominated
    if args.out_csv:
        cols = {"curve": [], "theta": [], "far": [], "hed": []}
        for c in curves:
            cols["curve"] += [c.label] * len(c)
            cols["theta"] += list(c.thetas)
            cols["far"] += list(c.fars)
            cols["hed"] += list(c.heds)
        io.write_table(args.out_csv, cols)
    if args.out_svg:
        io.plot_frontiers(args.out_svg, curves)
    return io.build_report("frontier", inputs, _decay_params(args, decay), results)


def _spec_from_config(path: str) -> ScenarioSpec:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: $ must be a flat JSON object")
    known = {f.name: f for f in fields(ScenarioSpec)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise UsageError(f"{path}: $.{key}: unknown field; valid fields are {sorted(known)}")
        if key == "detectors":
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise UsageError(f"{path}: $.detectors: expected a list of detector names")
            value = tuple(value)
        elif known[key].type in ("int",):
            if isinstance(value, bool) or not isinstance(value, int):
                raise UsageError(f"{path}: $.{key}: expected an integer, got {value!r}")
        elif known[key].type in ("float",):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise UsageError(f"{path}: $.{key}: expected a number, got {value!r}")
            value = float(value)
        kwargs[key] = value
    try:
        return ScenarioSpec(**kwargs)
    except InvariantViolation as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_simulate(args) -> dict:
    spec = _spec_from_config(args.config)
    scenario = generate_scenario(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, stream in scenario.streams.items():
        p = io.write_stream(out / f"{name}.csv", stream, label=name)
        written[p.name] = io.file_digest(p)
        written[io.meta_path(p).name] = io.file_digest(io.meta_path(p))
    obs = io.write_table(
        out / "observations.csv",
        {"t": np.arange(scenario.observations.size), "y": scenario.observations, "regime": scenario.regimes},
    )
    written[obs.name] = io.file_digest(obs)
    truth = out / "truth.json"
    truth.write_text(
        json.dumps({"onset": scenario.onset, "horizon": spec.horizon, "spec": spec.to_dict()}, sort_keys=True, indent=2)
        + "\n"
    )
    written[truth.name] = io.file_digest(truth)
    return io.build_report(
        "simulate",
        {"config": io.file_digest(args.config)},
        spec.to_dict(),
        {"onset": scenario.onset, "files": written},
        seed=spec.seed,
    )


def table_rows() -> list[dict]:
    rows = []
    for domain, system, lam, printed in STANDARD_TABLE:
        tau = half_life(lam)
        rows.append(
            {
                "domain": domain,
                "system": system,
                "lambda": lam,
                "half_life": tau,
                "printed_half_life": printed,
                "matches": round(tau, 2) == printed,
            }
        )
    return rows


def cmd_table(args) -> dict:
    rows = table_rows()
    if not args.quiet:
        width = max(len(r["domain"]) for r in rows)
        for r in rows:
            print(f"{r['domain']:<{width}}  {r['lambda']:.2f}  {r['half_life']:.2f}", file=sys.stderr)
    return io.build_report("table", {}, {}, {"rows": rows, "verified": all(r["matches"] for r in rows)})


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hedscore", description=__doc__.splitlines()[0])
    from hedscore import __version__

    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("score", help="score one stream")
    s.add_argument("stream")
    _add_decay(s)
    s.add_argument("--t-start", type=int, help="override the sidecar onset")
    s.add_argument("--phases", type=int, help="split the post-onset window into k equal phases")
    s.add_argument("--smooth", type=float, metavar="BETA", help="also report the softplus score")
    s.add_argument("--out-csv", help="write per-step lifts and discounts")
    s.set_defaults(func=cmd_score)

    c = sub.add_parser("compare", help="paired block-bootstrap test of A against B")
    c.add_argument("stream_a")
    c.add_argument("stream_b")
    _add_decay(c)
    c.add_argument("--t-start", type=int)
    c.add_argument("--B", type=int, default=2000, help="number of resamples")
    c.add_argument("--block", type=int, help="block length (default floor(T^(1/3)))")
    c.add_argument("--seed", type=int, help="required; 64-bit unsigned")
    c.add_argument("--workers", type=int, default=1, help="threads; does not change results")
    c.set_defaults(func=cmd_compare)

    f = sub.add_parser("frontier", help="FAR versus score curves")
    f.add_argument("stream_a")
    f.add_argument("stream_b", nargs="?")
    _add_decay(f)
    f.add_argument("--t-start", type=int)
    f.add_argument("--out-csv")
    f.add_argument("--out-svg")
    f.set_defaults(func=cmd_frontier)

    m = sub.add_parser("simulate", help="generate a scenario from a flat JSON config")
    m.add_argument("config")
    m.add_argument("--out-dir", required=True)
    m.set_defaults(func=cmd_simulate)

    t = sub.add_parser("table", help="decay-rate calibration table")
    t.add_argument("--quiet", action="store_true", help="JSON report only")
    t.set_defaults(func=cmd_table)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        report = args.func(args)
    except (UsageError, io.StreamFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"error: invariant violated ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except HedError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    print(io.dumps_report(report))
    if report["command"] == "table" and not report["results"]["verified"]:
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
