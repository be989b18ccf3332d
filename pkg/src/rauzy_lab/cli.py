"""Command line harness: ``rauzy-lab <renormalize|cocycle|converge|selftest>``."""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import exact, presets
from .analysis import GRID_SIZES, bounded_partial_sums
from .checks import (IDENTITY_CLASSES, class_identities, oracle_equivalence, q_identity,
                     smoothing_battery)
from .cocycle import (CocycleError, CocyclePath, central_space_limit, check_theta_omega, cone_membership,
                      growth_estimate, stable_subspace_approx, unstable_ray, unstable_seed)
from .combinatorics import CombinatorialPair, InvalidPair, NoPath, RauzyPath, omega_matrix
from .experiments import (affine_comparison, moebius_comparison, pair_comparison, residual_series,
                          summarize)
from .induction import ConnectionDetected, renormalize
from .maps import MapError, giem_from_json
from .records import write_csv, write_json, write_series

EXIT_OK, EXIT_USAGE, EXIT_CONNECTION, EXIT_IDENTITY = 0, 1, 2, 3
MAX_DEPTH = 40


class UsageError(ValueError):
    pass


class IdentityViolation(RuntimeError):
    pass


MAP_PRESETS = {
    "golden_standard": lambda cfg: presets.golden_standard(),
    "moebius_kink": lambda cfg: presets.moebius_kink_map(),
    "moebius_pair": lambda cfg: presets.moebius_pair_map(),
    "partner": lambda cfg: presets.partner_map(),
    "random": lambda cfg: presets.random_genus_one_map(np.random.default_rng(cfg.get("seed", 0)),
                                                       cfg.get("d")),
}


@dataclass
class ExperimentConfig:
    experiment: str = ""
    maps: list = field(default_factory=list)
    path: object = None
    depth: int = 10
    grid: int = 4097
    precision: str = "std"
    out: str = "."
    seed: int = 0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.depth <= MAX_DEPTH:
            raise UsageError("depth must lie in [0, %d]" % MAX_DEPTH)
        if self.grid not in GRID_SIZES:
            raise UsageError("grid must be one of %s" % (GRID_SIZES,))
        if self.precision not in ("std", "dd"):
            raise UsageError("precision must be 'std' or 'dd'")


def _load_map(spec, base_dir, precision):
    if isinstance(spec, str):
        with open(os.path.join(base_dir, spec), encoding="utf-8") as fh:
            spec = json.load(fh)
    if "preset" in spec:
        name = spec["preset"]
        if name not in MAP_PRESETS:
            raise UsageError("unknown map preset %r" % name)
        f = MAP_PRESETS[name](spec)
        return f.with_precision(precision) if precision != "std" else f
    return giem_from_json(spec, precision=precision)


def _load_path(spec):
    if "preset" in spec:
        name, length = spec["preset"], int(spec.get("length", 20))
        if name == "golden":
            return CocyclePath.from_types(presets.GOLDEN_PAIR, presets.golden_types(length))
        if name == "constant":
            return CocyclePath.from_types(presets.GOLDEN_PAIR, [0] * length)
        if name == "d3_fibonacci":
            types, _ = presets.d3_fibonacci_types(int(spec.get("words", 34)))
            return CocyclePath.from_types(presets.D3_PAIR, types)
        raise UsageError("unknown path preset %r" % name)
    start = CombinatorialPair.from_json(spec["start"])
    return CocyclePath(RauzyPath.from_types(start, [int(t) for t in spec["types"]]))


def load_config(path, args):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    precision = args.precision or raw.get("precision", "std")
    map_specs = raw.get("maps") or ([raw["map"]] if "map" in raw else [])
    cfg = ExperimentConfig(
        experiment=raw.get("experiment", args.command),
        maps=[_load_map(m, base, precision) for m in map_specs],
        path=_load_path(raw["path"]) if "path" in raw else None,
        depth=int(raw.get("depth", 10)),
        grid=int(raw.get("grid", 4097)),
        precision=precision,
        out=args.out or raw.get("out", "."),
        seed=args.seed if args.seed is not None else int(raw.get("seed", 0)),
        options={k: v for k, v in raw.items() if k not in {"maps", "map", "path"}},
    )
    return cfg


# --- commands -------------------------------------------------------------


def _state_rows(states):
    rows = []
    for s in states:
        for i, a in enumerate(s.alphabet):
            rows.append((s.level, a, "length", float(s.lengths[i])))
            rows.append((s.level, a, "image_length", float(s.image_lengths[i])))
            rows.append((s.level, a, "normalized_length", float(s.normalized_lengths[i])))
            rows.append((s.level, a, "q", s.q[i]))
    return rows


def _dump_states(states, out, plots):
    write_json(os.path.join(out, "states.json"), [s.to_json() for s in states])
    write_series(os.path.join(out, "lengths.csv"), _state_rows(states))
    last = states[-1]
    write_csv(os.path.join(out, "types.csv"), ("n", "type", "winner", "loser"),
              [(k, st.eps, st.winner, st.loser) for k, st in enumerate(last.history)])
    if plots and len(states) > 1:
        from .plotting import plot_lengths
        plot_lengths(os.path.join(out, "lengths.png"), states)


def cmd_renormalize(cfg, plots=True):
    if not cfg.maps:
        raise UsageError("renormalize needs a map")
    f = cfg.maps[0]
    try:
        states = renormalize(f, cfg.depth, cfg.precision)
    except ConnectionDetected as exc:
        if exc.states:
            _dump_states(exc.states, cfg.out, plots)
        raise
    _dump_states(states, cfg.out, plots)
    write_json(os.path.join(cfg.out, "summary.json"),
               {"experiment": "renormalize", "depth": cfg.depth, "map": f.to_json(),
                "types": states[-1].path.types if cfg.depth else []})
    return 0


def cmd_cocycle(cfg, plots=True):
    states = None
    if cfg.path is not None:
        cpath = cfg.path
    elif cfg.maps:
        states = renormalize(cfg.maps[0], cfg.depth, cfg.precision)
        if cfg.depth == 0:
            raise UsageError("cocycle needs depth >= 1")
        cpath = CocyclePath(states[-1].history)
    else:
        raise UsageError("cocycle needs a path or a map")
    N = len(cpath)
    rows, summary = [], {"experiment": "cocycle", "steps": N, "alphabet": list(cpath.start.alphabet)}

    det_ok = all(exact.det(t.rows()) == 1 for t in cpath.thetas)
    omega_ok = all(check_theta_omega(s.pair, s.eps) for s in cpath.path.steps)
    identities = {"det_theta_is_one": det_ok, "theta_omega_theta_t": omega_ok}
    if states is not None:
        identities["q_identity"] = all(list(s.q) == cpath.q_vector(k) for k, s in enumerate(states))
    for n in range(N + 1):
        for a, q in zip(cpath.start.alphabet, cpath.q_vector(n)):
            rows.append((n, a, "q", q))

    u0 = unstable_seed(cpath.start)
    fwd = growth_estimate(cpath, u0, "forward")
    for n, v in enumerate(fwd.norms):
        rows.append((n, "", "unstable_norm", float(v)))
    summary["forward_rate"] = fwd.rate
    end_pair = cpath.pair_at(N)
    s0 = np.array(omega_matrix(end_pair), dtype=float) @ np.ones(cpath.d)
    if cone_membership(s0, end_pair, "Cs"):
        bwd = growth_estimate(cpath, s0, "backward")
        for n, v in enumerate(bwd.norms):
            rows.append((n, "", "stable_norm", float(v)))
        summary["backward_rate"] = bwd.rate

    bases = {"unstable": unstable_ray(cpath, N).to_json()}
    depth = int(cfg.options.get("stable_depth", min(20, N)))
    try:
        bases["stable"] = stable_subspace_approx(cpath, min(depth, N)).to_json()
    except CocycleError as exc:
        bases["stable"] = {"error": str(exc)}
    ladder = cfg.options.get("ladder")
    if ladder:
        lim = central_space_limit(cpath, [int(k) for k in ladder])
        bases["central"] = lim.to_json()
    summary["identities"] = identities
    summary["bases"] = bases

    out = cfg.out
    write_json(os.path.join(out, "theta_products.json"), cpath.to_json())
    write_series(os.path.join(out, "cocycle.csv"), rows)
    write_json(os.path.join(out, "summary.json"), summary)
    if plots:
        from .plotting import plot_growth
        plot_growth(os.path.join(out, "growth.png"), fwd.norms, fwd.rate, "unstable seed")
    if not all(identities.values()):
        bad = ", ".join(k for k, v in identities.items() if not v)
        raise IdentityViolation("identity check failed: %s" % bad)
    return 0


def cmd_converge(cfg, plots=True):
    mode = cfg.options.get("compare", "moebius" if len(cfg.maps) == 1 else "pair")
    N = cfg.depth
    summary = {"experiment": "converge", "compare": mode, "depth": N, "grid": cfg.grid}
    if mode == "moebius":
        series = moebius_comparison(cfg.maps[0], N, cfg.grid)
        quantities = ["c1", "l1_d2"]
    elif mode == "affine_model":
        series, model = affine_comparison(cfg.maps[0], N, cfg.grid)
        summary["model"] = {"matched": model.matched, "lengths": model.lengths,
                            "slopes": model.slopes}
        quantities = ["c1", "zeta_gap"]
    elif mode == "pair":
        if len(cfg.maps) != 2:
            raise UsageError("pair comparison needs two maps")
        series = pair_comparison(cfg.maps[0], cfg.maps[1], N, cfg.grid)
        quantities = ["c1"]
    else:
        raise UsageError("unknown comparison %r" % mode)
    rows = list(series.rows)
    summary["trends"] = {q: summarize(series, q) for q in quantities}
    if cfg.options.get("residuals"):
        depth = int(cfg.options.get("residual_depth", N))
        summary["residuals"] = {}
        for i, f in enumerate(cfg.maps):
            res = residual_series(f, depth)
            rows += [(n, "%s%s" % (a, i) if a else str(i), q, v) for n, a, q, v in res.rows]
            stat = bounded_partial_sums(res.array("eps_norm") ** 2)
            summary["residuals"][str(i)] = {"ok": stat["ok"], "growth_ratio": stat["growth_ratio"],
                                            "tail_log_slope": stat["tail_log_slope"]}
    summary["pass"] = all(t["negative_slope"] and t["partial_sums_bounded"]
                          for t in summary["trends"].values())
    write_series(os.path.join(cfg.out, "converge.csv"), rows)
    write_json(os.path.join(cfg.out, "summary.json"), summary)
    if plots:
        from .plotting import plot_levels
        plot_levels(os.path.join(cfg.out, "distances.png"), series.levels,
                    {q: series.values[q] for q in quantities}, "distance", title=mode)
    return 0


def cmd_selftest(cfg, plots=False):
    rng = np.random.default_rng(cfg.seed)
    n_maps = int(cfg.options.get("oracle_maps", 20))
    n_points = int(cfg.options.get("oracle_points", 100))
    rows, failures = [], []

    for mono in IDENTITY_CLASSES:
        res = class_identities(mono)
        ok = all(d and o for _, _, d, o in res)
        rows.append(("identities", "".join(map(str, mono)), "edges", len(res)))
        rows.append(("identities", "".join(map(str, mono)), "ok", ok))
        if not ok:
            failures.append("cocycle identities %s" % (mono,))

    cases = [("golden", presets.golden_standard()),
             ("d3_seeded", presets.random_standard_map(rng, presets.D3_PAIR))]
    for name, f in cases:
        _, _, bad = q_identity(f, 25)
        rows.append(("q_identity", name, "bad_levels", len(bad)))
        if bad:
            failures.append("return-time identity %s" % name)

    violations, _ = smoothing_battery(rng)
    rows.append(("smoothing", "battery", "violations", violations))
    if violations:
        failures.append("smoothing bounds")

    for i in range(n_maps):
        f = presets.random_genus_one_map(rng)
        err, mism, level = oracle_equivalence(f, 8, n_points, rng)
        rows.append(("oracle", str(i), "max_error", err))
        rows.append(("oracle", str(i), "time_mismatches", mism))
        rows.append(("oracle", str(i), "level", level))
        if err > 1e-9 or mism:
            failures.append("oracle map %d" % i)

    write_csv(os.path.join(cfg.out, "selftest.csv"), ("check", "case", "quantity", "value"), rows)
    write_json(os.path.join(cfg.out, "summary.json"),
               {"experiment": "selftest", "seed": cfg.seed, "failures": failures, "pass": not failures})
    for msg in failures:
        print("FAIL %s" % msg, file=sys.stderr)
    print("selftest: %s (%d checks)" % ("ok" if not failures else "FAILED", len(rows)))
    if failures:
        raise IdentityViolation("; ".join(failures))
    return 0


COMMANDS = {"renormalize": cmd_renormalize, "cocycle": cmd_cocycle,
            "converge": cmd_converge, "selftest": cmd_selftest}


def build_parser():
    p = argparse.ArgumentParser(prog="rauzy-lab", description="Rauzy-Veech renormalization experiments")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="experiment configuration (JSON)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--precision", choices=["std", "dd"])
    p.add_argument("--no-plots", action="store_true", help="write data files only")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.config:
            cfg = load_config(args.config, args)
        elif args.command == "selftest":
            cfg = ExperimentConfig("selftest", out=args.out or ".",
                                   seed=args.seed if args.seed is not None else 0)
        else:
            raise UsageError("--config is required for %s" % args.command)
        os.makedirs(cfg.out, exist_ok=True)
        return COMMANDS[args.command](cfg, plots=not args.no_plots)
    except ConnectionDetected as exc:
        print("connection at level %d" % exc.level, file=sys.stderr)
        return EXIT_CONNECTION
    except IdentityViolation as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IDENTITY
    except (UsageError, InvalidPair, MapError, NoPath, KeyError, OSError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
