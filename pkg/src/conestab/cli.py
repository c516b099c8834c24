"""Command-line front end: threshold tables, variation reports, stability
sweeps, the two-dimensional divergence witness, and the invariant suites.

Reports are deterministic: a fixed (config, seed) pair produces
byte-identical JSON, so runs can be referenced from documentation.  All
real numbers are emitted as decimal strings at full (round-trip)
precision; CSV rows carry the same digits.

Exit codes: 0 success, 2 invalid config, 3 quadrature failure, 4
invariant-suite failure, 5 unstable witness found (informational).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .domain import ConeParams
from .errors import ConeStabError, ConfigError, QuadratureError
from .quadrature import QuadratureSpec
from .stability import (UNSTABLE, instability_witness_n2, lambda_star,
                        stability_sweep)
from .trial import battery_descriptors, build_trial
from .variation import variation_report
from .verify import ALL_SUITES, run_suites

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_QUADRATURE = 3
EXIT_SUITE_FAILURE = 4
EXIT_WITNESS = 5

SUITE_VERSIONS = {"package": None, "jacobian": "1", "foliation": "1",
                  "remainder": "1", "kato": "1"}

_CONFIG_KEYS = {
    "n", "lambda", "t0", "levels", "epsilons", "seed", "quadrature",
    "trial_functions", "format", "out", "samples", "discrepancy_rtol",
    "corrupt_closed_form",
}
_QUAD_KEYS = {"radial_nodes", "angular_nodes", "box_nodes_per_axis",
              "support_radius", "epsilon_cutoff"}
_SAMPLE_KEYS = {"random_draws", "flow_samples", "pairs", "points", "battery_size"}


@dataclasses.dataclass
class RunConfig:
    n: int = 3
    lam: float = 0.5
    t0: float | None = None
    levels: int = 8
    epsilons: tuple = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    seed: int = 20260810
    quadrature: QuadratureSpec = dataclasses.field(default_factory=QuadratureSpec)
    trial_functions: tuple = ()
    format: str = "json"
    out: str | None = None
    samples: dict = dataclasses.field(default_factory=dict)
    discrepancy_rtol: float = 0.01
    corrupt_closed_form: bool = False  # negative-control hook for `verify`


def load_config(path: str | None, overrides: dict) -> RunConfig:
    raw = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    cfg = RunConfig()
    try:
        if "n" in merged:
            cfg.n = int(merged["n"])
        if "lambda" in merged:
            cfg.lam = float(merged["lambda"])
        if "t0" in merged and merged["t0"] is not None:
            cfg.t0 = float(merged["t0"])
        if "levels" in merged:
            cfg.levels = int(merged["levels"])
        if "epsilons" in merged:
            eps = tuple(float(e) for e in merged["epsilons"])
            if not eps or any(not 0.0 < e < 1.0 for e in eps):
                raise ConfigError("epsilons must lie in (0, 1)")
            cfg.epsilons = tuple(sorted(eps, reverse=True))
        if "seed" in merged:
            cfg.seed = int(merged["seed"])
        quad = merged.get("quadrature", {})
        if isinstance(quad, QuadratureSpec):
            cfg.quadrature = quad
        else:
            unknown = set(quad) - _QUAD_KEYS
            if unknown:
                raise ConfigError(f"unknown quadrature keys: {sorted(unknown)}")
            cfg.quadrature = QuadratureSpec(**{k: (float(v) if "radius" in k or "cutoff" in k
                                                  else int(v))
                                               for k, v in quad.items()})
        if "trial_functions" in merged:
            tf = merged["trial_functions"]
            if not isinstance(tf, (list, tuple)):
                raise ConfigError("trial_functions must be a list of descriptors")
            cfg.trial_functions = tuple(tf)
        if "format" in merged:
            if merged["format"] not in ("json", "csv"):
                raise ConfigError(f"format must be json or csv, got {merged['format']!r}")
            cfg.format = merged["format"]
        if "out" in merged:
            cfg.out = merged["out"]
        if "samples" in merged:
            smp = merged["samples"]
            unknown = set(smp) - _SAMPLE_KEYS
            if unknown:
                raise ConfigError(f"unknown sample keys: {sorted(unknown)}")
            if any(int(v) <= 0 for v in smp.values()):
                raise ConfigError("sample counts must be positive")
            cfg.samples = {k: int(v) for k, v in smp.items()}
        if "discrepancy_rtol" in merged:
            cfg.discrepancy_rtol = float(merged["discrepancy_rtol"])
        if "corrupt_closed_form" in merged:
            cfg.corrupt_closed_form = bool(merged["corrupt_closed_form"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    if cfg.n < 2:
        raise ConfigError(f"n must be >= 2, got {cfg.n}")
    if not (math.isfinite(cfg.lam) and cfg.lam >= 0.0):
        raise ConfigError(f"lambda must be finite and >= 0, got {cfg.lam}")
    if cfg.levels < 3:
        raise ConfigError(f"levels must be >= 3, got {cfg.levels}")
    return cfg


# -- serialization -------------------------------------------------------------

def _jsonable(obj):
    """Recursive converter; floats become full-precision decimal strings."""
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, (np.floating,)):
        return repr(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if obj.__class__.__name__ == "TrialFunction":
            return {"label": obj.label, "descriptor": _jsonable(obj.descriptor)}
        return {f.name: _jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _config_payload(cfg: RunConfig):
    d = dataclasses.asdict(cfg)
    d["lambda"] = d.pop("lam")
    return _jsonable(d)


def _emit(payload: dict, cfg: RunConfig, csv_rows=None, csv_header=None) -> str:
    """Render the report; JSON unless csv requested and rows provided."""
    if cfg.format == "csv" and csv_rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_header)
        for row in csv_rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _report(cfg: RunConfig, results) -> dict:
    versions = dict(SUITE_VERSIONS)
    versions["package"] = __version__
    return {"config": _config_payload(cfg), "results": _jsonable(results),
            "suite_versions": versions}


def _trial_functions(cfg: RunConfig):
    descs = cfg.trial_functions or tuple(battery_descriptors(8))
    out = []
    for desc in descs:
        if not isinstance(desc, dict):
            raise ConfigError("trial-function descriptors must be objects")
        try:
            out.append(build_trial(dict(desc), cfg.n))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad trial descriptor {desc!r}: {exc}") from exc
    return out


# -- subcommands ----------------------------------------------------------------

def cmd_threshold(args) -> int:
    n_min, n_max = args.n_min, args.n_max
    if n_min < 3 or n_max > 64:
        print("threshold: range must lie within [3, 64]", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    for n in range(n_min, n_max + 1):
        thr = lambda_star(n)
        aperture = 2.0 * math.atan2(1.0, thr.lambda_star)
        rows.append((n, thr.k_n, thr.lambda_star, aperture, thr.residual))
    cfg = RunConfig(format=args.format, out=args.out)
    payload = _report(cfg, [{"n": r[0], "k_n": r[1], "lambda_star": r[2],
                             "aperture": r[3], "residual": r[4]} for r in rows])
    text = _emit(payload, cfg, csv_rows=rows,
                 csv_header=["n", "k_n", "lambda_star", "aperture", "residual"])
    _write(text, args.out)
    return EXIT_OK


def _variation_rows(cfg: RunConfig, reports):
    rows = []
    for rep in reports:
        first = rep.first_variation
        second = rep.second_variation_fd
        rows.append((cfg.n, cfg.lam, rep.label,
                     first.extrapolated, int(first.converged),
                     second.extrapolated, int(second.converged),
                     rep.closed_form, rep.dirichlet_term, rep.boundary_term,
                     rep.discrepancy))
    return rows


def cmd_variation(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    _apply_epsilon_cutoff(cfg, args)
    params = ConeParams(cfg.n, cfg.lam)
    reports = []
    witness_found = False
    for f in _trial_functions(cfg):
        rep = variation_report(params, f, t0=cfg.t0, levels=cfg.levels,
                               spec=cfg.quadrature)
        reports.append(rep)
        if rep.divergent:
            witness_found = True
    payload = _report(cfg, reports)
    header = ["n", "lambda", "trial_id", "first_variation", "first_converged",
              "second_variation", "second_converged", "closed_form",
              "dirichlet_term", "boundary_term", "discrepancy"]
    _write(_emit(payload, cfg, _variation_rows(cfg, reports), header), cfg.out)
    if witness_found:
        return EXIT_WITNESS
    ok = all(r.first_variation.converged and r.second_variation_fd.converged
             and r.discrepancy <= cfg.discrepancy_rtol * max(1e-12, abs(r.closed_form))
             for r in reports)
    return EXIT_OK if ok else EXIT_QUADRATURE


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    _apply_epsilon_cutoff(cfg, args)
    if cfg.n < 3:
        raise ConfigError("sweep requires n >= 3; use witness-n2 for n = 2")
    params = ConeParams(cfg.n, cfg.lam)
    verdict = stability_sweep(params, _trial_functions(cfg), cfg.quadrature)
    payload = _report(cfg, verdict)
    rows = [(cfg.n, cfg.lam, verdict.regime,
             verdict.margin if verdict.margin is not None else "",
             verdict.witness.label if verdict.witness else "")]
    header = ["n", "lambda", "regime", "margin", "witness"]
    _write(_emit(payload, cfg, rows, header), cfg.out)
    return EXIT_WITNESS if verdict.regime == UNSTABLE else EXIT_OK


def cmd_witness_n2(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    _apply_epsilon_cutoff(cfg, args)
    params = ConeParams(2, cfg.lam)
    verdict = instability_witness_n2(params, cfg.epsilons, spec=cfg.quadrature)
    payload = _report(cfg, verdict)
    rows = [(2, cfg.lam, verdict.regime,
             verdict.margin if verdict.margin is not None else "", verdict.detail)]
    _write(_emit(payload, cfg, rows, ["n", "lambda", "regime", "margin", "detail"]),
           cfg.out)
    if verdict.regime == UNSTABLE:
        return EXIT_WITNESS
    return EXIT_QUADRATURE  # failed fit signals quadrature misconfiguration


def cmd_verify(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    sizes = {"random_draws": 10_000, "flow_samples": 1000, "pairs": 1000,
             "points": 1000, "battery_size": 20, **cfg.samples}
    results = run_suites(ALL_SUITES, seed=cfg.seed,
                         corrupt_closed_form=cfg.corrupt_closed_form, **sizes)
    payload = _report(cfg, results)
    rows = [(r.name, int(r.passed), r.worst_error, r.samples, r.detail)
            for r in results]
    _write(_emit(payload, cfg, rows,
                 ["suite", "passed", "worst_error", "samples", "detail"]), cfg.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_SUITE_FAILURE


def _overrides(args) -> dict:
    keys = ("n", "lambda", "t0", "levels", "seed", "format", "out",
            "epsilon_cutoff")
    out = {}
    for k in keys:
        v = getattr(args, k.replace("-", "_"), None)
        if v is None:
            continue
        if k == "epsilon_cutoff":
            # flag override folds into the quadrature spec
            continue
        out[k] = v
    return out


def _apply_epsilon_cutoff(cfg: RunConfig, args):
    eps = getattr(args, "epsilon_cutoff", None)
    if eps is not None:
        q = cfg.quadrature
        cfg.quadrature = QuadratureSpec(q.radial_nodes, q.angular_nodes,
                                        q.box_nodes_per_axis, q.support_radius,
                                        epsilon_cutoff=float(eps))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conestab",
        description="Stability toolkit for the free-boundary half-plane in a "
                    "convex circular cone")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="trace constants and threshold apertures")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_threshold)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--lambda", dest="lambda", type=float, default=None)
        p.add_argument("--t0", type=float, default=None)
        p.add_argument("--levels", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--epsilon-cutoff", dest="epsilon_cutoff", type=float,
                       default=None)

    p = sub.add_parser("variation", help="first/second variation reports")
    common(p)
    p.set_defaults(func=cmd_variation)

    p = sub.add_parser("sweep", help="stability margins over a battery (n >= 3)")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("witness-n2", help="two-dimensional divergence witness")
    common(p)
    p.set_defaults(func=cmd_witness_n2)

    p = sub.add_parser("verify", help="run the randomized invariant suites")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _write(json.dumps({"error": {"code": EXIT_CONFIG, "message": str(exc)}},
                          sort_keys=True) + "\n", None)
        return EXIT_CONFIG
    except QuadratureError as exc:
        _write(json.dumps({"error": {"code": EXIT_QUADRATURE, "message": str(exc)}},
                          sort_keys=True) + "\n", None)
        return EXIT_QUADRATURE
    except ConeStabError as exc:
        _write(json.dumps({"error": {"code": EXIT_CONFIG, "message": str(exc)}},
                          sort_keys=True) + "\n", None)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
