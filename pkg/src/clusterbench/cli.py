"""Command-line front end.

Every subcommand resolves its options as built-in defaults, then values from
``--config FILE`` (JSON, validated against ``config.schema.json``), then
explicit flags. The resolved options are echoed in every output's manifest.
The default seed comes from ``CLUSTERBENCH_SEED`` when set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources

import jsonschema

from . import __version__, analytics, bench, refocus, verify
from .builder import ChainSpec, Explicit, GaussianPerBond, Uniform
from .gates import InteractionKind
from .output import RunManifest, dump_json, write_csv, write_sidecar
from .statevec import BlochOrientation
from .teleport import refresh_teleport, teleport_fidelity

log = logging.getLogger("clusterbench")

SEED_ENV = "CLUSTERBENCH_SEED"
FALLBACK_SEED = 12345
STAT_HEADER = {
    "min-curve": ["kind", "n", "eps", "statistic", "value", "samples", "seed"],
    "histogram": ["kind", "n", "sigma", "statistic", "value", "samples", "seed"],
    "threshold": ["kind", "n", "eps", "statistic", "value", "samples", "seed"],
}
BLOCH_HEADER = ["theta0", "phi0", "x", "y", "z", "fidelity"]
BINS_HEADER = ["kind", "n", "sigma", "bin_center", "count"]


class UsageError(ValueError):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return FALLBACK_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def defaults(command: str) -> dict:
    seed = default_seed()
    table = {
        "teleport": dict(kind="cp", n=3, theta0=0.0, phi0=0.0, eps=None, sigma=None, explicit=None, seed=seed, refresh_window=None, out=None),
        "bloch-map": dict(kind="cp", n=3, eps=0.0, samples=bench.DEFAULT_MIN_SAMPLES, seed=seed, out=None),
        "min-curve": dict(kind="zz", n=[3, 5, 7, 9], eps=[0.1, 0.2, 0.3, 0.5], samples=bench.DEFAULT_MIN_SAMPLES, seed=seed, out=None),
        "histogram": dict(kind="zz", n=[7], sigma=[0.1, 0.2], samples=bench.DEFAULT_HIST_SAMPLES, seed=seed, bin_width=bench.DEFAULT_BIN_WIDTH, out=None, bins_out=None),
        "threshold": dict(kind="zz", n=[3, 5, 7, 9], scan_step=0.01, out=None),
        "refocus": dict(family="zz", theta=None, delta=None, alpha=None, gamma=None, eps_grid=list(refocus.DEFAULT_EPS_GRID), out=None),
        "verify": dict(only=None),
    }
    return table[command]


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    schema = json.loads(resources.files("clusterbench").joinpath("config.schema.json").read_text())
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"config {path} invalid at {where}: {exc.message}") from None
    return data


def resolve(args) -> dict:
    cfg = defaults(args.command)
    if args.config:
        for key, value in load_config(args.config).items():
            if key in cfg:
                cfg[key] = value
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["jobs"] = args.jobs if args.jobs is not None else 1
    return cfg


def _as_list(value) -> list:
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _scalar(value, name):
    if isinstance(value, (list, tuple)):
        if len(value) != 1:
            raise UsageError(f"--{name.replace('_', '-')} takes a single value here")
        return value[0]
    return value


# -- commands ---------------------------------------------------------------------


def cmd_teleport(cfg, out):
    chosen = [k for k in ("eps", "sigma", "explicit") if cfg[k] is not None]
    if len(chosen) > 1:
        raise UsageError(f"choose one error model, got {', '.join('--' + k for k in chosen)}")
    if cfg["sigma"] is not None:
        model = GaussianPerBond(float(_scalar(cfg["sigma"], "sigma")), int(cfg["seed"]))
    elif cfg["explicit"] is not None:
        model = Explicit(cfg["explicit"])
    else:
        model = Uniform(float(_scalar(cfg["eps"], "eps") or 0.0))
    spec = ChainSpec(cfg["kind"], int(_scalar(cfg["n"], "n")), model)
    orientation = BlochOrientation(cfg["theta0"], cfg["phi0"])
    manifest = RunManifest("teleport", cfg, cfg["seed"] if cfg["sigma"] is not None else None)
    if cfg["refresh_window"] is not None:
        report = refresh_teleport(spec, orientation, int(cfg["refresh_window"]))
    else:
        report = teleport_fidelity(spec, orientation)
    return _emit_json({"report": report.to_dict(verbose=cfg["verbose"])}, manifest, cfg, out)


def _emit_json(payload, manifest, cfg, out):
    if cfg.get("out"):
        manifest.outputs.append(cfg["out"])
    payload["manifest"] = manifest.finish().to_dict()
    text = dump_json(payload)
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    out.write(text + "\n")
    return 0


def _require_out(cfg, command):
    if not cfg.get("out"):
        raise UsageError(f"{command} needs --out FILE")


def _finish_csv(path, header, rows, manifest, out):
    write_csv(path, header, rows, manifest)
    write_sidecar(path, manifest.finish())
    out.write(f"wrote {path} ({len(rows)} rows)\n")


def cmd_bloch_map(cfg, out):
    _require_out(cfg, "bloch-map")
    manifest = RunManifest("bloch-map", cfg, cfg["seed"])
    rows = bench.bloch_map(cfg["kind"], int(_scalar(cfg["n"], "n")), float(_scalar(cfg["eps"], "eps")), int(cfg["samples"]), int(cfg["seed"]))
    _finish_csv(cfg["out"], BLOCH_HEADER, rows, manifest, out)
    return 0


def cmd_min_curve(cfg, out):
    _require_out(cfg, "min-curve")
    config = bench.SweepConfig(cfg["kind"], _as_list(cfg["n"]), _as_list(cfg["eps"]), int(cfg["samples"]), int(cfg["seed"]), jobs=cfg["jobs"])
    manifest = RunManifest("min-curve", cfg, config.seed)
    stats = ("sampled_min", "sampled_mean", "anchor_xz", "anchor_plus_y", "anchor_minus_y", "sphere_min", "closed_form")
    rows = []
    for r in bench.min_fidelity_curve(config):
        for stat in stats:
            if stat in r:
                rows.append({"kind": r["kind"], "n": r["n"], "eps": r["eps"], "statistic": stat, "value": r[stat], "samples": config.samples, "seed": config.seed})
    _finish_csv(cfg["out"], STAT_HEADER["min-curve"], rows, manifest, out)
    return 0


def cmd_histogram(cfg, out):
    _require_out(cfg, "histogram")
    config = bench.SweepConfig(
        cfg["kind"], _as_list(cfg["n"]), _as_list(cfg["sigma"]), int(cfg["samples"]), int(cfg["seed"]),
        mode="gaussian", bin_width=float(cfg["bin_width"]), jobs=cfg["jobs"],
    )
    manifest = RunManifest("histogram", cfg, config.seed)
    stats = ("mode_center", "lower_half_max_fidelity", "unity_mass", "exact_unity_count", "mean", "minimum")
    rows, bins = [], []
    for h in bench.disorder_histogram(config):
        summary = h.summary()
        for stat in stats:
            rows.append({"kind": h.kind, "n": h.n, "sigma": h.sigma, "statistic": stat, "value": summary[stat], "samples": h.samples, "seed": config.seed})
        bins.extend({"kind": h.kind, "n": h.n, "sigma": h.sigma, "bin_center": c, "count": k} for c, k in zip(h.centers, h.counts))
    _finish_csv(cfg["out"], STAT_HEADER["histogram"], rows, manifest, out)
    if cfg.get("bins_out"):
        _finish_csv(cfg["bins_out"], BINS_HEADER, bins, manifest, out)
    return 0


def cmd_threshold(cfg, out):
    _require_out(cfg, "threshold")
    manifest = RunManifest("threshold", cfg, None)
    kind = InteractionKind.parse(cfg["kind"])
    rows = []
    for n in _as_list(cfg["n"]):
        res = bench.threshold_crossing(kind, int(n), scan_step=float(cfg["scan_step"]))
        base = {"kind": kind.value, "n": int(n), "eps": res["eps"] if res["eps"] is not None else "none", "samples": None, "seed": None}
        rows.append(dict(base, statistic="eps_threshold", value=res["eps"] if res["eps"] is not None else "none"))
        rows.append(dict(base, statistic="residual", value=res["residual"]))
        if kind is not InteractionKind.CP:
            rows.append(dict(base, statistic="closed_form", value=float(analytics.eps_max(int(n)))))
    _finish_csv(cfg["out"], STAT_HEADER["threshold"], rows, manifest, out)
    return 0


_ANGLE_FLAG = {"zz": "delta", "xy": "alpha", "cp": "gamma"}


def cmd_refocus(cfg, out):
    family = InteractionKind.parse(cfg["family"]).value
    own = _ANGLE_FLAG[family]
    for name in _ANGLE_FLAG.values():
        if name != own and cfg[name] is not None:
            raise UsageError(f"--{name} does not apply to family {family}; use --{own}")
    angle = cfg[own]
    theta = cfg["theta"] if cfg["theta"] is not None else refocus.default_theta(family, angle)
    manifest = RunManifest("refocus", cfg, None)
    report = refocus.refocus_report(family, theta, angle, cfg["eps_grid"])
    for warning in report["warnings"]:
        log.warning(warning)
    if cfg["dump_sequence"]:
        report["sequence"] = refocus.sequence_for(family, theta, angle).dump()
    return _emit_json({"refocus": report}, manifest, cfg, out)


def cmd_verify(cfg, out):
    results = verify.run(cfg["only"], emit=lambda line: out.write(line + "\n"))
    failed = [r for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} criteria passed\n")
    return 1 if failed else 0


COMMANDS = {
    "teleport": cmd_teleport,
    "bloch-map": cmd_bloch_map,
    "min-curve": cmd_min_curve,
    "histogram": cmd_histogram,
    "threshold": cmd_threshold,
    "refocus": cmd_refocus,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("--jobs", type=int, help="worker processes for sampling sweeps (default 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="more detail (branch list for teleport)")

    parser = argparse.ArgumentParser(prog="clusterbench", description="Cluster-state teleportation benchmarks under two-qubit gate error.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in InteractionKind]

    p = sub.add_parser("teleport", parents=[common], help="fidelity of one chain, all branches enumerated")
    p.add_argument("--kind", choices=kinds)
    p.add_argument("--n", type=int, help="chain length N, odd")
    p.add_argument("--theta0", type=float, help="input polar angle (rad)")
    p.add_argument("--phi0", type=float, help="input azimuth (rad)")
    p.add_argument("--eps", type=float, help="uniform fractional error")
    p.add_argument("--sigma", type=float, help="per-bond Gaussian error width (uses --seed)")
    p.add_argument("--explicit", type=float, nargs="+", help="one error per bond")
    p.add_argument("--seed", type=int)
    p.add_argument("--refresh-window", type=int, help="simulate with at most W live qubits")
    p.add_argument("--out", help="also write the JSON report here")

    p = sub.add_parser("bloch-map", parents=[common], help="fidelity point cloud over sampled directions")
    p.add_argument("--kind", choices=kinds)
    p.add_argument("--n", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("min-curve", parents=[common], help="minimum fidelity vs uniform error")
    p.add_argument("--kind", choices=kinds)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--eps", type=float, nargs="+")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("histogram", parents=[common], help="fidelity histogram under per-bond Gaussian disorder")
    p.add_argument("--kind", choices=kinds)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--sigma", type=float, nargs="+")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bin-width", type=float)
    p.add_argument("--out")
    p.add_argument("--bins-out", help="optional CSV of bin counts")

    p = sub.add_parser("threshold", parents=[common], help="uniform error where Min(F) reaches 2/3")
    p.add_argument("--kind", choices=kinds)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--scan-step", type=float)
    p.add_argument("--out")

    p = sub.add_parser("refocus", parents=[common], help="raw vs refocused gate infidelity")
    p.add_argument("--family", choices=kinds)
    p.add_argument("--theta", type=float, help="gate angle; CP: conditional phase")
    p.add_argument("--delta", type=float, help="ZZ pulse angle")
    p.add_argument("--alpha", type=float, help="XY pulse angle")
    p.add_argument("--gamma", type=float, help="CP pulse angle")
    p.add_argument("--eps-grid", type=float, nargs="+")
    p.add_argument("--dump-sequence", action="store_true", help="include the pulse list in order of action")
    p.add_argument("--out")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--only", nargs="+", help="criterion numbers or groups (e.g. analytics, refocus, 4)")
    return parser


def main(argv=None, stdout=None) -> int:
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = resolve(args)
        cfg["verbose"] = args.verbose
        cfg["dump_sequence"] = getattr(args, "dump_sequence", False)
        return COMMANDS[args.command](cfg, out)
    except (ValueError, OSError) as exc:
        print(f"clusterbench {args.command}: error: {exc}", file=sys.stderr)
        return 2
