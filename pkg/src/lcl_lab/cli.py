"""Batch driver.

    lcl-lab COMMAND --config run.toml [--out DIR] [--format json|csv] [--jobs N] [--tol REL]

Exit status: 0 success, 2 domain or configuration error, 3 divergence-only
outcome, 4 tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import ConfigError, RunConfig, load_config
from .criterion import (
    _jsonable,
    A_alpha,
    constant_bounds,
    dual_A_alpha,
)
from .errors import DivergenceError, DomainError, ToleranceError
from .operators import BallPowerWeight
from .verifier import (
    check_beta_reduction,
    check_duality,
    default_gamma_sequence,
    evaluate_inequality,
    multinomial_probe_profile,
    sharpness_probe_dual,
    sharpness_probe_power,
    verify_multinomial,
)

COMMANDS = ("verify", "criterion", "bounds", "sharpness", "duality", "reduce", "multinomial", "sweep")

EXIT_OK, EXIT_DOMAIN, EXIT_DIVERGENCE, EXIT_TOLERANCE = 0, 2, 3, 4


class Outcome:
    """Rows or a JSON document, plus the exit status they imply."""

    def __init__(self, payload, status: int = EXIT_OK, rows: list[dict] | None = None):
        self.payload = payload
        self.status = status
        self.rows = rows


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    cols = list(rows[0].keys())
    for r in rows[1:]:
        cols.extend(k for k in r if k not in cols)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in cols])
    return buf.getvalue()


def _cell(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return x


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _setup(cfg: RunConfig):
    return cfg.group_obj(), cfg.params_obj(), cfg.spec_obj(), *cfg.weight_objs()


def cmd_verify(cfg: RunConfig) -> Outcome:
    G, params, spec, u, v = _setup(cfg)
    rep = evaluate_inequality(cfg.function_obj(), u, v, params, G, spec, side=cfg.verify.side)
    status = EXIT_DIVERGENCE if rep.holds is None else EXIT_OK
    row = {"lhs": rep.lhs, "rhs": rep.rhs, "ratio": rep.ratio, "bound_lower": rep.bound_lower,
           "bound_upper": rep.bound_upper, "holds": rep.holds}
    return Outcome(rep.to_dict(), status, [row])


def cmd_criterion(cfg: RunConfig) -> Outcome:
    G, params, spec, u, v = _setup(cfg)
    alphas = cfg.criterion.alpha or [params.alpha if params.alpha is not None else G.Q]
    results, rows = [], []
    for al in alphas:
        fwd = A_alpha(u, v, params, G, spec, alpha=al, per_decade=cfg.criterion.per_decade)
        entry = {"forward": fwd.to_dict()}
        row = {"alpha": al, "A": fwd.A_value, "finite": fwd.finite}
        if cfg.criterion.dual:
            dual = dual_A_alpha(u, v, params, G, spec, alpha=al)
            entry["dual"] = dual.to_dict()
            row.update({"A_dual": dual.A_value, "finite_dual": dual.finite})
        results.append(entry)
        rows.append(row)
    status = EXIT_OK if any(r["finite"] for r in rows) else EXIT_DIVERGENCE
    return Outcome({"results": _jsonable(results)}, status, rows)


def cmd_bounds(cfg: RunConfig) -> Outcome:
    G, params, spec, u, v = _setup(cfg)
    b = constant_bounds(u, v, params, G, spec, side=cfg.bounds.side, n_grid=cfg.bounds.n_alpha)
    status = EXIT_OK if math.isfinite(b.upper) else EXIT_DIVERGENCE
    row = {"lower": b.lower, "upper": b.upper, "alpha_star_lower": b.alpha_star_lower,
           "alpha_star_upper": b.alpha_star_upper, "side": b.side}
    return Outcome(b.to_dict(), status, [row])


def _probe_exponent(cfg: RunConfig, u) -> float:
    if cfg.sharpness.a is not None:
        return cfg.sharpness.a
    if isinstance(u, BallPowerWeight):
        return u.a
    raise ConfigError("sharpness.a", "needed unless weights.u is a ball_power weight")


def cmd_sharpness(cfg: RunConfig) -> Outcome:
    G, params, spec, u, _ = _setup(cfg)
    a = _probe_exponent(cfg, u)
    n = cfg.sharpness.n_probes
    rows, doc = [], {}
    sides = ("forward", "dual") if cfg.sharpness.side == "both" else (cfg.sharpness.side,)
    for side in sides:
        if side == "forward":
            res = sharpness_probe_power(a, params.beta, G, default_gamma_sequence(a, n), spec,
                                        generic_upto=cfg.sharpness.generic_upto)
        else:
            res = sharpness_probe_dual(a, params.beta, G, default_gamma_sequence(-(a + 2.0), n), spec)
        doc[side] = res.to_dict()
        for r in res.rows:
            rows.append({"side": side, "gamma_over_Q": r.gamma_over_Q, "ratio_numeric": r.ratio_numeric,
                         "ratio_closed_form": r.ratio_closed_form, "limit_constant": r.limit_constant})
    if len(sides) == 1:
        rows = [{k: v for k, v in r.items() if k != "side"} for r in rows]
    return Outcome(doc, EXIT_OK, rows)


def _check_outcome(chk) -> Outcome:
    status = EXIT_OK
    if chk.agreement is None:
        status = EXIT_DIVERGENCE
    elif not chk.agreement:
        status = EXIT_TOLERANCE
    row = {"ratio_direct": chk.ratio_direct, "ratio_reduced": chk.ratio_reduced,
           "rel_diff": chk.rel_diff, "agreement": chk.agreement}
    return Outcome(chk.to_dict(), status, [row])


def cmd_duality(cfg: RunConfig) -> Outcome:
    G, params, spec, u, v = _setup(cfg)
    return _check_outcome(check_duality(cfg.function_obj(), u, v, params, G, spec))


def cmd_reduce(cfg: RunConfig) -> Outcome:
    G, params, spec, u, v = _setup(cfg)
    chk = check_beta_reduction(u, v, cfg.function_obj(), params.beta, G, spec, p=params.p, q=params.q)
    return _check_outcome(chk)


def cmd_multinomial(cfg: RunConfig) -> Outcome:
    G, params, spec, _, _ = _setup(cfg)
    mc = cfg.multinomial
    if mc.use_function:
        f = cfg.function_obj()
    else:
        f = multinomial_probe_profile(mc.a, mc.k, params.beta, G, mc.gap)
    rep = verify_multinomial(mc.a, mc.k, params.beta, G, f, spec)
    status = EXIT_DIVERGENCE if rep.holds is None else EXIT_OK
    row = {"lhs": rep.lhs, "rhs": rep.rhs, "ratio": rep.ratio, "bound_lower": rep.bound_lower,
           "bound_upper": rep.bound_upper, "holds": rep.holds}
    return Outcome(rep.to_dict(), status, [row])


def _sweep_point(args):
    cfg_dict, command, point = args
    from .config import from_dict

    cfg = from_dict(cfg_dict)
    for path, value in point:
        cfg = cfg.with_override(path, value)
    row = {path: value for path, value in point}
    try:
        out = HANDLERS[command](cfg.validate())
    except DivergenceError as exc:
        return [{**row, "status": EXIT_DIVERGENCE, "error": str(exc)}]
    except ToleranceError as exc:
        return [{**row, "status": EXIT_TOLERANCE, "error": str(exc)}]
    except DomainError as exc:
        return [{**row, "status": EXIT_DOMAIN, "error": str(exc)}]
    return [{**row, **r, "status": out.status} for r in (out.rows or [{}])]


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> Outcome:
    command = cfg.sweep.command
    if command not in HANDLERS or command == "sweep":
        raise ConfigError("sweep.command", f"must be one of {[c for c in COMMANDS if c != 'sweep']}")
    if not cfg.sweep.axes:
        raise ConfigError("sweep.axes", "declare at least one axis")
    names = list(cfg.sweep.axes)
    for name in names:
        if not cfg.sweep.axes[name]:
            raise ConfigError(f"sweep.axes.{name}", "axis has no values")
        cfg.with_override(name, cfg.sweep.axes[name][0]).validate()
    points = [tuple(zip(names, combo)) for combo in itertools.product(*(cfg.sweep.axes[n] for n in names))]
    base = cfg.to_dict()
    tasks = [(base, command, pt) for pt in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = [r for chunk in results for r in chunk]
    statuses = {r["status"] for r in rows}
    status = EXIT_OK if EXIT_OK in statuses else max(statuses)
    return Outcome({"command": command, "rows": _jsonable(rows)}, status, rows)


HANDLERS = {
    "verify": cmd_verify,
    "criterion": cmd_criterion,
    "bounds": cmd_bounds,
    "sharpness": cmd_sharpness,
    "duality": cmd_duality,
    "reduce": cmd_reduce,
    "multinomial": cmd_multinomial,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lcl-lab", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH", help="TOML run configuration (defaults if omitted)")
    ap.add_argument("--out", metavar="DIR", default=".", help="directory for report files")
    ap.add_argument("--format", choices=("json", "csv"), default=None,
                    help="report format (default: csv for sharpness and sweep, json otherwise)")
    ap.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes for sweep")
    ap.add_argument("--tol", type=float, default=None, metavar="REL",
                    help="override quadrature.rel_tol")
    return ap


def run(command: str, cfg: RunConfig, *, out_dir: str = ".", fmt: str | None = None,
        jobs: int = 1) -> tuple[int, str]:
    """Run one command and write ``<command>-<hash>.<ext>``; returns (status, path)."""
    cfg.validate()
    if command == "sweep":
        outcome = cmd_sweep(cfg, jobs=jobs)
    else:
        outcome = HANDLERS[command](cfg)
    fmt = fmt or ("csv" if command in ("sharpness", "sweep") else "json")
    if fmt == "csv":
        text = _rows_csv(outcome.rows or [])
    else:
        text = json.dumps(_jsonable(outcome.payload), sort_keys=True, indent=2) + "\n"
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{command}-{cfg.digest()}.{fmt}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return outcome.status, path


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.tol is not None:
            cfg = cfg.with_override("quadrature.rel_tol", float(args.tol))
        if args.jobs < 1:
            raise ConfigError("--jobs", "must be at least 1")
        status, path = run(args.command, cfg, out_dir=args.out, fmt=args.format, jobs=args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DivergenceError as exc:
        print(f"divergence at {exc.endpoint}: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ToleranceError as exc:
        print(f"tolerance failure: {exc} (best estimate {exc.estimate!r})", file=sys.stderr)
        return EXIT_TOLERANCE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(path)
    return status


if __name__ == "__main__":
    sys.exit(main())
