"""Command-line experiment runner.

``torus-spreader {build,verify,rotate,probe,render} --config CFG.json --out DIR``

Each invocation validates the config against the bundled JSON schema, runs
one pipeline and writes ``DIR/record.json`` (plus cloud and SVG artifacts)
atomically. Exit status: 0 pass, 2 violated, 3 inconclusive, 1 error.
"""
from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

from . import io, svg
from .dynamics import FundamentalDomain, threads_from_env
from .errors import InvalidInput, LargeApproxFailure
from .geom import convex_hull
from .homothety import normalize
from .rotation import (
    deviation_profile, generalized_rot_estimate, rigidity_profile, rotation_set_estimate,
    weak_spreading_probe,
)
from .spreader import build_commuting_family, build_spreader, verify_stages, worst_verdict

__all__ = ["run", "main", "EXIT_CODES", "COMMANDS"]

COMMANDS = ("build", "verify", "rotate", "probe", "render")
EXIT_CODES = {"pass": 0, "violated": 2, "inconclusive": 3}
EXIT_ERROR = 1
RECORD_NAME = "record.json"

_REQUIRED = {
    "build": ("generators", "r"),
    "verify": ("generators", "r"),
    "probe": ("map", "probe"),
}


def _require(config: dict, command: str, keys):
    for key in keys:
        if key not in config:
            raise InvalidInput(f"config field '{key}' is required for {command}")


def _domain(config: dict) -> FundamentalDomain:
    bp = config.get("basepoint", [[1, 2], [1, 2]])
    return FundamentalDomain(config.get("resolution", 200), tuple(float(io.parse_real(c)) for c in bp))


def _recipe(config: dict, xi_override):
    gens = [tuple(io.parse_rational(c) for c in g) for g in config["generators"]]
    r = io.parse_real(config["r"])
    xi = xi_override if xi_override is not None else config.get("xi")
    return build_spreader(gens, r, xi=xi)


def recipe_summary(recipe) -> dict:
    p = recipe.params
    return {
        "r": recipe.r,
        "scale": p.scale,
        "generators": [list(v) for v in p.generators],
        "l": p.l,
        "eps_prime": p.eps_p,
        "lambda": p.lam,
        "delta": p.delta,
        "delta_prime": p.delta_p,
        "xi0": p.xi0,
        "stage_xi0": list(p.stage_xi0),
        "xi": recipe.xi,
        "delta_without_v0": p.delta_without_v0,
        "xi0_without_v0": p.xi0_without_v0,
        "conventions_differ": p.conventions_differ,
        "merged_vertical": p.merged_vertical,
        "admissible_a": {"offset": recipe.admissible_a.offset,
                         "period": recipe.admissible_a.period,
                         "set": recipe.admissible_a.describe()},
        "stages": [{"index": s.index, "A": s.A.rows(), "eta": s.eta, "v": list(s.v)}
                   for s in p.stages],
        "shear_blocks": len(recipe.F.shears()),
        "F": io.map_to_json(recipe.F),
    }


def _witness_dict(w) -> dict:
    return {"r": w.r, "scale": w.scale, "translation": list(w.translation),
            "achieved_gap": w.achieved_gap, "sampling_slack": w.sampling_slack,
            "bound": w.bound, "threshold": 1.0 / w.r}


def _verify(config, xi_override, out: Path, threads):
    recipe = _recipe(config, xi_override)
    a = io.parse_real(config["a"]) if "a" in config else recipe.admissible_a.offset
    b = io.parse_real(config.get("b", 0))
    if not recipe.admissible_a.contains(a):
        raise InvalidInput(f"config field 'a': a={a} is not in {recipe.admissible_a.describe()}")
    trace = verify_stages(recipe, a, b, _domain(config), seed=config.get("seed", 0), threads=threads)
    mode = config.get("clouds", "final")
    stages = []
    for s in trace.stages:
        entry = {"index": s.index, "points": len(s.D), "d_to_k": s.d_to_k.as_dict(),
                 "k_to_d": s.k_to_d.as_dict(), "K": s.K.vertices}
        if mode == "all" or (mode == "final" and s is trace.stages[-1]):
            name, digest = io.write_cloud(out, s.D.points)
            entry["cloud"] = {"file": name, "sha256": digest}
        stages.append(entry)
    result = {
        "a": a, "b": b,
        "stages": stages,
        "final_hausdorff": trace.final.as_dict(),
        "final_diameter": trace.diameter.as_dict(),
        "witness": _witness_dict(trace.witness) if trace.witness else {"failure": trace.witness_failure},
        "witness_verdict": trace.witness_verdict,
        "identity_defect": trace.identity_defect,
        "failing_stage": trace.failing_stage,
        "verdict": trace.verdict,
    }
    return recipe, trace, result


def _rotate(config, xi_override, threads):
    dom = _domain(config)
    result, verdicts, series, target = {}, [], [], None
    if "family" in config:
        fam_cfg = config["family"]
        gens = [tuple(io.parse_rational(c) for c in g) for g in fam_cfg["generators"]]
        fam = build_commuting_family(fam_cfg["p"], fam_cfg["q"], gens, io.parse_real(fam_cfg["ell"]),
                                     xi=xi_override)
        target = normalize(fam.target)
        members = []
        for i in fam_cfg.get("members", [1, 2, 3]):
            t = fam.t(i)
            est = generalized_rot_estimate(fam.map(i), [t], dom, threads)
            series.append(est)
            entry = {"member": i, "t": t, "theta": list(fam.theta(i)),
                     "alpha": list(fam.alpha(i)), "diameter": est.diam_trace[0]}
            try:
                w = fam.certify(i, dom, threads)
                entry["witness"] = _witness_dict(w)
                entry["verdict"] = "pass"
            except LargeApproxFailure as exc:
                entry["witness"] = {"failure": str(exc)}
                entry["verdict"] = "inconclusive"
            verdicts.append(entry["verdict"])
            members.append(entry)
        result["family"] = {"p": fam.p, "q": fam.q, "ell": fam.ell, "j": fam.j,
                            "recipe": recipe_summary(fam.recipe), "members": members}
        m = None
    else:
        if "map" not in config:
            raise InvalidInput("config field 'map' or 'family' is required for rotate")
        m = io.parse_map(config["map"])
    if m is not None:
        if "ns" in config:
            ests = [rotation_set_estimate(m, n, dom, threads) for n in config["ns"]]
            series.extend(ests)
            result["rotation"] = [{"n": e.n, "hull": e.hull.vertices, "diameter": e.diameter,
                                   "resolution": e.resolution} for e in ests]
        if "subsequence" in config:
            g = generalized_rot_estimate(m, config["subsequence"], dom, threads)
            result["generalized"] = {"subsequence": g.subsequence, "diam_trace": g.diam_trace,
                                     "cauchy_gap": g.cauchy_gap, "diverging": g.diverging}
        if "deviation" in config:
            d = config["deviation"]
            prof = deviation_profile(m, [float(io.parse_real(c)) for c in d["v"]],
                                     [float(io.parse_real(c)) for c in d["rho"]], d["N"], dom, threads)
            result["deviation"] = {"v": prof.direction, "rho": prof.rho, "max_deviation": prof.deviations}
        if "rigidity_N" in config:
            result["rigidity"] = rigidity_profile(m, config["rigidity_N"], dom, threads)
    result["verdict"] = worst_verdict(*verdicts)
    return result, series, target


def _probe(config, threads):
    m = io.parse_map(config["map"])
    p = config["probe"]
    U = convex_hull([[float(io.parse_real(c)) for c in pt] for pt in p["U"]])
    w = weak_spreading_probe(m, U, float(io.parse_real(p["eps"])), float(io.parse_real(p["R"])),
                             p["N"], threads=threads)
    if w is None:
        return {"found": False, "verdict": "inconclusive"}
    return {"found": True, "n": w.n, "center": list(w.center), "density": w.density, "verdict": "pass"}


def run(config: dict, command: str | None = None, out=".", *, threads: int | None = None,
        seed: int | None = None, xi_override: int | None = None) -> tuple[dict, int]:
    """Execute one experiment and write its record; returns ``(record, exit status)``."""
    start = time.perf_counter()
    config = io.validate_config(dict(config))
    command = command or config.get("command")
    if command not in COMMANDS:
        raise InvalidInput(f"config field 'command': unknown command {command!r}")
    if config.get("command", command) != command:
        raise InvalidInput(f"config field 'command': {config['command']!r} does not match {command!r}")
    if seed is not None:
        config["seed"] = seed
    if xi_override is not None and (isinstance(xi_override, bool) or not isinstance(xi_override, int)
                                    or xi_override < 1):
        raise InvalidInput("--xi-override must be a positive integer")
    _require(config, command, _REQUIRED.get(command, ()))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    record = {"command": command, "config": config, "options": {"xi_override": xi_override}}
    verdict = "pass"
    if command == "build":
        record["recipe"] = recipe_summary(_recipe(config, xi_override))
    elif command == "verify":
        recipe, _, result = _verify(config, xi_override, out, threads)
        record["recipe"] = recipe_summary(recipe)
        record["verification"] = result
        verdict = result["verdict"]
    elif command == "rotate":
        result, _, _ = _rotate(config, xi_override, threads)
        record["rotation"] = result
        verdict = result["verdict"]
    elif command == "probe":
        result = _probe(config, threads)
        record["probe"] = result
        verdict = result["verdict"]
    else:
        opts = config.get("render", {})
        what = opts.get("what", "trace" if "generators" in config else "hulls")
        name = opts.get("file", f"{what}.svg")
        max_points = opts.get("max_points", 4000)
        if what == "trace":
            _require(config, command, ("generators", "r"))
            recipe, trace, result = _verify(config, xi_override, out, threads)
            record["recipe"] = recipe_summary(recipe)
            record["verification"] = result
            doc = svg.render_trace(trace, out / name, max_points)
        else:
            result, series, target = _rotate(config, xi_override, threads)
            if not series:
                raise InvalidInput("config field 'ns': hull rendering needs 'ns' or 'family'")
            record["rotation"] = result
            poly = target.polygon if target is not None else None
            doc = svg.render_hull_series(series, out / name, poly, max_points)
        record["svg"] = {"file": name, "sha256": hashlib.sha256(doc.encode()).hexdigest()}
        verdict = result["verdict"]
    record["verdict"] = verdict
    record["timings"] = {"total_seconds": time.perf_counter() - start}
    io.atomic_write(out / RECORD_NAME, io.dumps_record(record))
    return record, EXIT_CODES[verdict]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torus-spreader", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON experiment config")
        p.add_argument("--out", default=Path("."), type=Path, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $TORUS_SPREADER_THREADS or 1)")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
        p.add_argument("--xi-override", type=int, default=None, dest="xi_override",
                       help="use this xi instead of the computed xi0 (must not be smaller)")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        threads = args.threads if args.threads is not None else threads_from_env()
        if threads < 1:
            raise InvalidInput("--threads must be >= 1")
        config = io.load_config(args.config)
        record, status = run(config, args.command, args.out, threads=threads,
                             seed=args.seed, xi_override=args.xi_override)
    except (InvalidInput, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{args.command}: {record['verdict']} -> {args.out / RECORD_NAME}")
    return status


if __name__ == "__main__":
    sys.exit(main())
