"""Command line experiment runner.

    esmlab esm {verify,dump,excess}
    esmlab bounds {sweep,rate,proj}
    esmlab fiid {density,cut,curve}
    esmlab urs {cylinders,distance,mtp,limit}

Exit status: 0 success, 1 invariant violation, 2 usage or parse error.
A ``--config`` file holds flat ``key=value`` lines naming the same options as
the flags (without dashes); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import sys

import numpy as np

from . import __version__, bounds, esm, fiid, unimodular
from .cube import CubeSubset, LinearOrder, binary_entropy, measure
from .groups import GroupSpec, ball
from .report import Table, emit, fmt


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# value parsers


def count_arg(text: str) -> int:
    """Integers, also written as 1e5."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != int(v) or v < 0:
        raise argparse.ArgumentTypeError(f"not a nonnegative integer: {text!r}")
    return int(v)


def real(text: str) -> float:
    """Floats, also written as 2^-4."""
    text = text.strip()
    try:
        if "^" in text:
            base, exp = text.split("^")
            return float(base) ** float(exp)
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def real_list(text: str) -> list[float]:
    return [real(t) for t in text.split(",") if t.strip()]


def int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def group_arg(text: str) -> GroupSpec:
    try:
        return GroupSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def subset_arg(text: str) -> CubeSubset:
    try:
        return CubeSubset.from_text(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def default_threads() -> int:
    env = os.environ.get("ESMLAB_THREADS", "").strip()
    if not env:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--seed", type=count_arg, default=0)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--threads", type=count_arg, default=default_threads())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="esmlab", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"esmlab {__version__}")
    top = ap.add_subparsers(dest="group_cmd", required=True)

    def sub(parent, name, fmt="json", **kw):
        p = parent.add_parser(name, **kw)
        _common(p)
        p.add_argument("--format", choices=("csv", "json"), default=fmt)
        return p

    g = top.add_parser("esm").add_subparsers(dest="cmd", required=True)
    p = sub(g, "verify", help="mass, disjointness and equivariance checks")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=count_arg, default=200)
    p.add_argument("--tol", type=real, default=1e-9)
    p = sub(g, "dump", fmt="csv", help="support-map heights of one subset")
    p.add_argument("--subset", type=subset_arg, required=True)
    p.add_argument("--order", type=int_list, help="coordinates in reveal order (default natural)")
    p = sub(g, "excess", help="union excess of V inside U")
    p.add_argument("--subset", type=subset_arg, required=True)
    p.add_argument("--subset-v", type=subset_arg, required=True)
    p.add_argument("--order", type=int_list)

    g = top.add_parser("bounds").add_subparsers(dest="cmd", required=True)
    p = sub(g, "sweep", help="inequality sweep")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--random", action="store_true", help="random triples instead of exhaustive pairs")
    p.add_argument("--count", type=count_arg, default=10_000)
    p = sub(g, "rate", fmt="csv", help="relative union excess against density")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--densities", type=real_list, default=[2.0**-k for k in range(4, 13)])
    p.add_argument("--trials", type=count_arg, default=100)
    p = sub(g, "proj", help="projective-metric sandwich on random positive pairs")
    p.add_argument("--count", type=count_arg, default=10_000)
    p.add_argument("--dim-min", type=int, default=2)
    p.add_argument("--dim-max", type=int, default=8)

    g = top.add_parser("fiid").add_subparsers(dest="cmd", required=True)
    for name in ("density", "cut", "curve"):
        p = sub(g, name, fmt="csv")
        p.add_argument("--group", type=group_arg, default=GroupSpec("free", 2))
        p.add_argument("--rule", default="zoo:q=1e-3,pat=ball1")
        p.add_argument("--R", type=int, default=8)
        p.add_argument("--trials", type=count_arg, default=50 if name != "density" else 10_000)
        p.add_argument("--ball-csv", help="also write the ball's edge list here")
        if name != "density":
            p.add_argument("--k", type=int, default=50)
        if name == "curve":
            p.add_argument("--densities", type=real_list, default=[1e-2, 1e-3, 1e-4])

    g = top.add_parser("urs").add_subparsers(dest="cmd", required=True)
    p = sub(g, "cylinders", help="empirical cylinder table of a factor-of-iid rule")
    p.add_argument("--group", type=group_arg, default=GroupSpec("free", 2))
    p.add_argument("--rule", default="zoo:q=1e-2,pat=ball1")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--samples", type=count_arg, default=100_000)
    p.add_argument("--mode", choices=("rejection", "planted"), default="rejection")
    p = sub(g, "distance", help="weak-* distance between two table files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p = sub(g, "mtp", help="mass-transport check of finite unimodular subsets")
    p.add_argument("--group", type=group_arg, default=GroupSpec("free", 2))
    p.add_argument("--set", help="comma-separated elements, e.g. e,a,ab")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--max-size", type=int, default=4)
    p.add_argument("--tol", type=real, default=1e-12)
    p = sub(g, "limit", fmt="csv", help="zoo cylinder tables against the uniform translate of the pattern")
    p.add_argument("--group", type=group_arg, default=GroupSpec("free", 2))
    p.add_argument("--pattern", default="ball1")
    p.add_argument("--intensities", type=real_list, default=[1e-2, 1e-3, 1e-4])
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--samples", type=count_arg, default=100_000)
    p.add_argument("--mode", choices=("rejection", "planted"), default="planted")
    p.add_argument("--threshold", type=real, default=0.05)
    return ap


def _config_argv(path: str, parser_for_cmd: argparse.ArgumentParser) -> list[str]:
    """Turn key=value lines into flags; unknown keys are usage errors."""
    known = {}
    for action in parser_for_cmd._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                known[opt[2:]] = action
    argv = []
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for ln in lines:
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise UsageError(f"config line is not key=value: {ln!r}")
        key, val = (s.strip() for s in ln.split("=", 1))
        key = key.replace("_", "-")
        if key in ("config", "help", "version") or key not in known:
            raise UsageError(f"unknown config key {key!r}")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            if val.lower() in ("1", "true", "yes"):
                argv.append(f"--{key}")
            elif val.lower() not in ("0", "false", "no"):
                raise UsageError(f"config key {key!r} expects true/false")
        else:
            argv += [f"--{key}", val]
    return argv


def _subparser(ap: argparse.ArgumentParser, group_cmd: str, cmd: str) -> argparse.ArgumentParser:
    top = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    mid = top.choices[group_cmd]
    inner = next(a for a in mid._actions if isinstance(a, argparse._SubParsersAction))
    return inner.choices[cmd]


def parse(argv: list[str]) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        extra = _config_argv(args.config, _subparser(ap, args.group_cmd, args.cmd))
        # config flags first so that explicit flags override them
        args = ap.parse_args(argv[:2] + extra + argv[2:])
    return args


def resolved_config(args: argparse.Namespace) -> dict:
    out = {"command": f"{args.group_cmd} {args.cmd}"}
    for k, v in sorted(vars(args).items()):
        if k in ("group_cmd", "cmd", "config", "out", "format", "threads"):
            continue
        if isinstance(v, CubeSubset):
            v = v.to_text()
        elif isinstance(v, GroupSpec):
            v = str(v)
        out[k] = v
    return out


# ---------------------------------------------------------------------------
# commands; each returns (payload, exit status, notes)


def _order(args, n):
    if args.order is None:
        return LinearOrder.natural(n)
    try:
        return LinearOrder.from_sequence(args.order)
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad order: {exc}") from None


def cmd_esm_verify(args):
    n = args.n
    if not 1 <= n <= 12:
        raise UsageError("esm verify supports 1 <= n <= 12")
    rng = np.random.default_rng(args.seed)
    if args.exhaustive:
        if n > 4:
            raise UsageError("--exhaustive is limited to n <= 4")
        tables = ((np.arange(1 << (1 << n))[:, None] >> np.arange(1 << n)) & 1).astype(bool)
        orders = [LinearOrder.from_sequence(p) for p in itertools.permutations(range(n))]
    else:
        tables = rng.random((args.samples, 1 << n)) < rng.random((args.samples, 1))
        orders = [esm.sample_uniform_order(n, rng) for _ in range(4)]
    H = np.array([binary_entropy(m) for m in tables.mean(axis=1)])
    worst_mass = 0.0
    for o in orders:
        worst_mass = max(worst_mass, float(np.abs(esm.batch_field_masses(tables, o) - H).max()))
    # disjoint pairs and equivariance on random samples
    disjoint_max = 0.0
    equi_max = 0.0
    checks = min(args.samples, 1000)
    for _ in range(checks):
        part = rng.integers(0, 3, size=1 << n)
        U, V = CubeSubset(n, part == 1), CubeSubset(n, part == 2)
        o = esm.sample_uniform_order(n, rng)
        disjoint_max = max(disjoint_max, esm.pair_masses(esm.esm_field(U, o), esm.esm_field(V, o)).intersection)
        sigma = rng.permutation(n).tolist()
        equi_max = max(equi_max, esm.check_equivariance(U, o, sigma))
    ok = worst_mass <= args.tol and disjoint_max == 0.0 and equi_max <= args.tol
    result = {
        "mass_identity": {"subsets": len(tables), "orders": len(orders), "max_deviation": worst_mass},
        "disjointness": {"pairs": checks, "max_intersection_mass": disjoint_max},
        "equivariance": {"triples": checks, "max_deviation": equi_max},
        "ok": ok,
    }
    return result, 0 if ok else 1, {}


def cmd_esm_dump(args):
    U = args.subset
    f = esm.esm_field(U, _order(args, U.n))
    return f.to_csv(), 0, {}


def cmd_esm_excess(args):
    U, V = args.subset, args.subset_v
    if U.n != V.n:
        raise UsageError("subsets live in different cubes")
    if not V.issubset(U):
        raise UsageError("V must be a subset of U")
    o = _order(args, U.n)
    fU, fV = esm.esm_field(U, o), esm.esm_field(V, o)
    pm = esm.pair_masses(fU, fV)
    mU = esm.field_mass(fU)
    row = {"mu_u": measure(U), "mu_v": measure(V), "mass_u": mU, "mass_v": esm.field_mass(fV),
           "mass_union": pm.union, "union_excess": esm.union_excess(U, V, o),
           "relative_excess": (pm.union - mU) / mU if mU > 0 else 0.0}
    return Table(list(row), [row]), 0, {}


def cmd_bounds_sweep(args):
    if args.random:
        rep = bounds.random_sweep(args.n, args.count, args.seed)
    else:
        if args.n > 4:
            raise UsageError("exhaustive sweeps are limited to n <= 4; use --random")
        rep = bounds.exhaustive_sweep(args.n, args.max_size)
    d = rep.as_dict()
    d["total_violations"] = rep.total_violations
    return d, 0 if rep.total_violations == 0 else 1, {}


def cmd_bounds_rate(args):
    try:
        tab = bounds.excess_rate_experiment(args.n, args.densities, args.trials, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return Table(["mu", "excess_mean", "excess_sd", "bound"], tab.rows), 0, {"fitted_C": tab.C}


def cmd_bounds_proj(args):
    if not 2 <= args.dim_min <= args.dim_max:
        raise UsageError("need 2 <= dim-min <= dim-max")
    out = bounds.proj_sweep(args.count, range(args.dim_min, args.dim_max + 1), args.seed)
    bad = out["metric_violations"] + out["lower_violations"] + out["upper_violations"]
    return out, 0 if bad == 0 else 1, {}


def _rule(args):
    try:
        return fiid.parse_rule(args.rule, args.group)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _ball_csv(args):
    if args.ball_csv:
        with open(args.ball_csv, "w") as fh:
            fh.write(ball(args.group, args.R).edges_csv())


def cmd_fiid_density(args):
    rule = _rule(args)
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    try:
        p, ci = fiid.density_estimate(args.group, rule, args.R, args.trials, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _ball_csv(args)
    row = {"rule": str(rule), "p_hat": p, "ci95": ci, "samples": args.trials}
    return Table(list(row), [row]), 0, {}


def cmd_fiid_cut(args):
    rule = _rule(args)
    if args.k < 1:
        raise UsageError("--k must be positive")
    try:
        res = fiid.cut_trials(args.group, rule, args.R, args.k, args.trials, args.seed, args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _ball_csv(args)
    rows = [{"trial": t, "members": r.member_count, "cut": r.cut_count, "cut_fraction": r.cut_fraction,
             "k_emp": r.max_component} for t, r in enumerate(res)]
    return Table(["trial", "members", "cut", "cut_fraction", "k_emp"], rows), 0, {}


def cmd_fiid_curve(args):
    rule = _rule(args)
    try:
        rows = fiid.hyperfiniteness_curve(args.group, rule, args.densities, args.k, args.R, args.trials,
                                          args.seed, args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _ball_csv(args)
    cols = ["density", "mean_cut_fraction", "pooled_cut_fraction", "mean_k_emp", "nonempty_trials", "trials"]
    return Table(cols, rows), 0, {}


def cmd_urs_cylinders(args):
    rule = _rule(args)
    try:
        t = unimodular.cylinder_probabilities(args.group, rule, args.r, args.samples, args.seed, args.mode,
                                              args.threads)
    except (ValueError, MemoryError) as exc:
        raise UsageError(str(exc)) from None
    except RuntimeError as exc:
        print(f"esmlab: {exc}", file=sys.stderr)
        return None, 1, {}
    return t, 0, {}


def _load_table(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
        return unimodular.CylinderTable.from_json(data.get("result", data))
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read table {path}: {exc}") from None


def cmd_urs_distance(args):
    a, b = _load_table(args.a), _load_table(args.b)
    try:
        d = unimodular.weak_star_distance(a, b)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return {"distance": d, "shared_patterns": len(set(a.entries) & set(b.entries)),
            "mixed_status": unimodular.mixed_status(a, b)}, 0, {}


def cmd_urs_mtp(args):
    spec = args.group
    try:
        if args.set:
            sets = [[spec.parse_element(t) for t in args.set.split(",")]]
        else:
            verts = ball(spec, args.radius).vertices
            sets = [c for k in range(1, args.max_size + 1) for c in itertools.combinations(verts, k)]
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad set: {exc}") from None
    battery = unimodular.mtp_battery(spec)
    worst = {name: 0.0 for name, _ in battery}
    for F in sets:
        d = unimodular.finite_urs(spec, F)
        for name, f in battery:
            worst[name] = max(worst[name], unimodular.mtp_check(d, f))
    top = max(worst.values())
    return {"sets": len(sets), "worst_by_function": worst, "worst": top, "ok": top <= args.tol}, \
        0 if top <= args.tol else 1, {}


def cmd_urs_limit(args):
    spec = args.group
    try:
        pattern = fiid.named_pattern(spec, args.pattern)
        rep = unimodular.fiid_thinning_limit_check(spec, pattern, args.intensities, args.r, args.samples,
                                                   args.seed, args.mode, args.threshold, args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except RuntimeError as exc:
        print(f"esmlab: {exc}", file=sys.stderr)
        return None, 1, {}
    cols = ["q", "distance", "accepted", "acceptance_rate", "density", "covolume_proxy"]
    ok = rep.trend_ok and rep.final_ok
    return Table(cols, rep.rows), 0 if ok else 1, {"inversions": rep.inversions, "trend_ok": rep.trend_ok,
                                                   "final_ok": rep.final_ok}


COMMANDS = {
    ("esm", "verify"): cmd_esm_verify,
    ("esm", "dump"): cmd_esm_dump,
    ("esm", "excess"): cmd_esm_excess,
    ("bounds", "sweep"): cmd_bounds_sweep,
    ("bounds", "rate"): cmd_bounds_rate,
    ("bounds", "proj"): cmd_bounds_proj,
    ("fiid", "density"): cmd_fiid_density,
    ("fiid", "cut"): cmd_fiid_cut,
    ("fiid", "curve"): cmd_fiid_curve,
    ("urs", "cylinders"): cmd_urs_cylinders,
    ("urs", "distance"): cmd_urs_distance,
    ("urs", "mtp"): cmd_urs_mtp,
    ("urs", "limit"): cmd_urs_limit,
}


def _write(text: str, path: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except UsageError as exc:
        print(f"esmlab: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse: usage already printed
        return int(exc.code or 0)
    if args.threads < 1:
        print("esmlab: error: --threads must be positive", file=sys.stderr)
        return 2
    config = resolved_config(args)
    try:
        payload, status, notes = COMMANDS[(args.group_cmd, args.cmd)](args)
    except UsageError as exc:
        print(f"esmlab: error: {exc}", file=sys.stderr)
        return 2
    if payload is None:
        return status
    if isinstance(payload, str):  # esm dump: fixed CSV layout, config on comment lines
        text = (f"# version={__version__}\n# config=" + json.dumps(config, sort_keys=True) + "\n" + payload)
        _write(text, args.out)
    elif isinstance(payload, unimodular.CylinderTable):
        body = payload.to_json()
        body = fmt({"version": __version__, "config": config, **body})
        _write(json.dumps(body, indent=2) + "\n", args.out)
    else:
        if args.format == "csv" and not isinstance(payload, Table):
            payload = Table(sorted(payload), [payload]) if _flat(payload) else payload
            if not isinstance(payload, Table):
                print("esmlab: error: this report is nested; use --format json", file=sys.stderr)
                return 2
        emit(payload, args.format, args.out, config, notes)
    return status


def _flat(d: dict) -> bool:
    return all(not isinstance(v, (dict, list)) for v in d.values())


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
