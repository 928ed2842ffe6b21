"""Command-line front end: enumeration with caching and report tables.

Every subcommand writes deterministic artifacts (CSV or JSON, floats at
15 significant digits) so reruns with the same config are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import acceptance, forms
from .cache import (
    CacheError,
    CacheMissing,
    default_cache_dir,
    load_edge_list,
    store_edge_list,
)
from .enumeration import enumerate_edges
from .periods import bridge_residual, residual_regression
from .quadratic import fundamental_discriminants_by_unit, waldspurger_moment
from .stats import (
    degree_vs_strip_report,
    geodesic_periods_bulk,
    lifted_distribution_report,
    small_period_census,
    vertical_clt_report,
    vertical_period_samples,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    N: int = 100
    form: str = "delta"
    maass_file: str | None = None
    tol: float = 1e-8
    threads: int = 1
    cache_dir: str = ""
    out: str = "."
    seed: int = 0
    format: str = "csv"

    def __post_init__(self):
        if not 1e-14 <= self.tol <= 1e-3:
            raise UsageError("tolerance must lie in [1e-14, 1e-3]")
        if not 1 <= self.N <= 100_000:
            raise UsageError("N must lie in [1, 100000]")
        if self.threads < 1:
            raise UsageError("threads must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if not self.cache_dir:
            self.cache_dir = str(default_cache_dir())


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.15g}"
    return str(v)


def _emit(config: RunConfig, name: str, columns: list[str], rows,
          summary: dict) -> Path:
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.format == "csv":
        path = out_dir / f"{name}.csv"
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
    else:
        path = out_dir / f"{name}.json"
        payload = {
            "config": asdict(config),
            "columns": columns,
            "rows": [[_fmt(v) for v in row] for row in rows],
            "summary": {k: _fmt(v) for k, v in summary.items()},
        }
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    for k, v in summary.items():
        print(f"{k}={_fmt(v)}")
    print(f"wrote {path}")
    return path


def _load_form(config: RunConfig):
    if config.maass_file:
        return forms.MaassCuspForm(*forms.ingest_maass_coefficients(
            config.maass_file))
    if config.form == "delta":
        M = max(64, int(8 * config.N) + 64)
        return forms.HolomorphicCuspForm.delta(M)
    if config.form == "eisenstein":
        return forms.EisensteinSeries(1.0)
    if config.form == "maass":
        return forms.bundled_maass_form()
    raise UsageError(f"unknown form {config.form!r}; use delta, eisenstein, "
                     "maass, or --maass-file")


def _require_edges(config: RunConfig):
    try:
        return load_edge_list(config.cache_dir, config.N)
    except CacheMissing as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_enumerate(config: RunConfig, args) -> int:
    el = enumerate_edges(config.N)
    store_edge_list(config.cache_dir, el)
    print(f"cosets={len(el.cosets)} classes={len(el.class_keys)} "
          f"edges={el.edge_count}")
    print(f"cache={config.cache_dir}")
    return EXIT_OK


def cmd_periods(config: RunConfig, args) -> int:
    el = _require_edges(config)
    f = _load_form(config)
    if args.kind == "geodesic":
        from .enumeration import class_from_key

        reps = [class_from_key(k).canonical_rep for k in el.class_keys]
        vals = geodesic_periods_bulk(f, reps, config.tol)
        rows = [(k[0], k[1], k[2][0], k[2][1], k[2][2],
                 float(v.real), float(v.imag))
                for k, v in zip(el.class_keys, vals)]
        columns = ["trace", "content", "A", "B", "C", "re", "im"]
        summary = {"classes": len(rows)}
    else:
        cs, As, Ls = vertical_period_samples(f, config.N, config.tol)
        rows = [(int(c), int(a), float(v.real), float(v.imag))
                for c, a, v in zip(cs, As, Ls)]
        columns = ["c", "a", "re", "im"]
        summary = {"cosets": len(rows)}
    _emit(config, f"periods_{args.kind}_N{config.N}", columns, rows, summary)
    return EXIT_OK


def cmd_bridge(config: RunConfig, args) -> int:
    import random

    f = _load_form(config)
    rng = random.Random(config.seed)
    pairs = acceptance._sample_edges(config.N, args.sample, rng)
    rows = []
    ratios, residuals = [], []
    for x, k in pairs:
        br = bridge_residual(f, x, k, config.tol)
        ratios.append(br.ratio)
        residuals.append(br.residual)
        rows.append((br.c, x.a_mod_c, k, br.trace, float(br.ratio),
                     float(abs(br.residual)),
                     float(br.residual.real), float(br.residual.imag)))
    reg = residual_regression(ratios, residuals)
    _emit(config, f"bridge_{config.form}_N{config.N}",
          ["c", "a", "k", "trace", "ratio", "abs_residual", "re", "im"],
          rows, {"slope": reg.slope, "bound_K": reg.bound_constant,
                 "bound_holds": reg.bound_holds(ratios, residuals)})
    return EXIT_OK


def cmd_graph_stats(config: RunConfig, args) -> int:
    el = _require_edges(config)
    rep = degree_vs_strip_report(config.N, edge_list=el)
    rows = [(r.trace, r.key[1], r.key[2][0], r.key[2][1], r.key[2][2],
             r.degree, float(r.strip_length),
             float(r.ratio) if r.ratio is not None else float("nan"))
            for r in rep.rows]
    deg_law = acceptance.criterion_degree_law((config.N,))
    _emit(config, f"graph_stats_N{config.N}",
          ["trace", "content", "A", "B", "C", "degree", "strip_length",
           "ratio"],
          rows, {"min_ratio": rep.min_ratio,
                 "degree_law_ceil_violations":
                     deg_law.details["ceil_violations"],
                 "degree_law_floor_violations":
                     deg_law.details["floor_violations"]})
    return EXIT_OK


def cmd_distribution(config: RunConfig, args) -> int:
    f = _load_form(config)
    if args.lifted:
        rep = lifted_distribution_report(f, config.N, tol=config.tol,
                                         seed=config.seed)
    else:
        rep = vertical_clt_report(f, config.N, tol=config.tol,
                                  seed=config.seed)
    rows = [(float(a), float(b), float(d))
            for a, b, d in zip(rep.histogram_edges[:-1],
                               rep.histogram_edges[1:],
                               rep.histogram_density)]
    kind = "lifted" if args.lifted else "vertical"
    _emit(config, f"distribution_{kind}_N{config.N}",
          ["bin_lo", "bin_hi", "density"],
          rows, {"samples": rep.sample_count, "ks_real": rep.ks_real,
                 "ks_imag": rep.ks_imag, "c_hat": rep.c_hat,
                 "degenerate": rep.degenerate})
    return EXIT_OK


def cmd_census(config: RunConfig, args) -> int:
    f = _load_form(config)
    ladder = [n for n in (250, 500, 1000, 2000) if n <= config.N] or [config.N]
    rep = small_period_census(f, config.N, args.delta, ladder=ladder,
                              tol=max(config.tol, 1e-9))
    rows = list(zip(rep.ladder, rep.ladder_counts,
                    rep.indistinguishable_from_zero))
    _emit(config, f"census_N{config.N}",
          ["N", "count_below_threshold", "count_at_noise_floor"],
          rows, {"fitted_exponent": rep.fitted_exponent
                 if rep.fitted_exponent is not None else float("nan"),
                 "noise_floor": rep.noise_floor})
    return EXIT_OK


def cmd_waldspurger(config: RunConfig, args) -> int:
    f = _load_form(config)
    rows = []
    worst = 0.0
    for d in fundamental_discriminants_by_unit(args.unit_bound):
        rep = waldspurger_moment(f, d.D, max(config.tol, 1e-9))
        worst = max(worst, rep.difference)
        rows.append((d.D, rep.h_plus, float(rep.lhs), float(rep.rhs),
                     float(rep.difference)))
    _emit(config, f"waldspurger_{config.form}",
          ["D", "h_plus", "lhs", "rhs", "difference"],
          rows, {"discriminants": len(rows), "worst_difference": worst})
    return EXIT_OK


def cmd_verify(config: RunConfig, args) -> int:
    numbers = None
    if args.criteria:
        numbers = sorted({int(tok) for tok in args.criteria.split(",")})
        if any(n < 1 or n > len(acceptance.ALL_CRITERIA) for n in numbers):
            raise UsageError("criteria numbers must lie in 1..13")
    results = acceptance.run_all(numbers)
    for res in results:
        print(res.line())
    failed = [res.number for res in results if not res.passed]
    if failed:
        print(f"failed criteria: {failed}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing


def _read_config_file(path: str) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


_CONFIG_TYPES = {"N": int, "tol": float, "threads": int, "seed": int}


def build_config(args) -> RunConfig:
    values: dict = {}
    if args.config:
        raw = _read_config_file(args.config)
        for key, val in raw.items():
            if key not in RunConfig.__dataclass_fields__:
                raise UsageError(f"unknown config key {key!r}")
            values[key] = _CONFIG_TYPES.get(key, str)(val)
    for key in RunConfig.__dataclass_fields__:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunConfig(**values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoperiods",
        description="periods of automorphic forms over the modular graph")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--N", type=int, dest="N")
    parser.add_argument("--form", choices=["delta", "eisenstein", "maass"])
    parser.add_argument("--maass-file", dest="maass_file")
    parser.add_argument("--tol", type=float)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--cache-dir", dest="cache_dir")
    parser.add_argument("--out")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--format", choices=["csv", "json"])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("enumerate").set_defaults(fn=cmd_enumerate)
    p = sub.add_parser("periods")
    p.add_argument("--kind", choices=["geodesic", "vertical"],
                   default="geodesic")
    p.set_defaults(fn=cmd_periods)
    p = sub.add_parser("bridge")
    p.add_argument("--sample", type=int, default=100)
    p.set_defaults(fn=cmd_bridge)
    sub.add_parser("graph-stats").set_defaults(fn=cmd_graph_stats)
    p = sub.add_parser("distribution")
    p.add_argument("--lifted", action="store_true")
    p.set_defaults(fn=cmd_distribution)
    p = sub.add_parser("census")
    p.add_argument("--delta", type=float, default=0.1)
    p.set_defaults(fn=cmd_census)
    p = sub.add_parser("waldspurger")
    p.add_argument("--unit-bound", type=int, default=50)
    p.set_defaults(fn=cmd_waldspurger)
    p = sub.add_parser("verify")
    p.add_argument("--suite", choices=["primary"], default="primary")
    p.add_argument("--criteria", help="comma-separated criterion numbers")
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = build_config(args)
        return args.fn(config, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CacheError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
