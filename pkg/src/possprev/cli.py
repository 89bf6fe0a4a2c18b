"""Command-line front end: ``possprev solve|compare|check|sweep``.

Exit codes: 0 success, 1 verification violation, 2 invalid input (schema,
flags, parameter path), 3 domain, model-mismatch or solver error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, kernels
from .checks import SUITES, run_suite
from .errors import PossprevError, SchemaError
from .models import XTOL, ModelId, solve_optimal
from .scenario_io import parse_data, parse_document, scenario_items, set_path
from .theorems import (EQUIVALENCES, GUARD_BAND, STANDARD_PAIRS, ComparisonCase, ConditionId,
                       compare_pair, verify_equivalence)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3
THREADS_ENV = "POSSPREV_THREADS"


class UsageError(Exception):
    """Bad flag value detected after argparse."""


def _num(x) -> str:
    # 17 significant digits: CSV values parse back to the same doubles
    return format(float(x), ".17g")


def _short(cell: str) -> str:
    try:
        return format(float(cell), ".10g")
    except ValueError:
        return cell


def _default_threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _pmap(fn, items, threads):
    # results come back in input order whatever the execution order
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_document(text)


def _models_for(s, flag, file_models):
    if flag is None:
        return file_models if file_models else s.supported_models()
    if flag == "all":
        return s.supported_models()
    out = []
    for part in flag.split(","):
        try:
            out.append(ModelId.parse(part))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return out


def _emit(rows, header, fmt, out, meta):
    if fmt == "csv":
        print(meta, file=sys.stderr)
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    print(meta, file=out)
    rows = [[_short(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    for r in [header] + rows:
        print("  ".join(c.ljust(n) for c, n in zip(r, widths)).rstrip(), file=out)


def cmd_solve(args, out):
    scenarios, _ = _read(args.file)
    jobs = [(s, m) for s, fm in scenarios for m in _models_for(s, args.model, fm)]
    results = _pmap(lambda job: solve_optimal(*job), jobs, args.threads)
    rows = [[s.name, r.model.value, _num(r.e_star), _num(r.foc_residual), r.corner.value]
            for (s, _), r in zip(jobs, results)]
    meta = f"# possprev {__version__} solve backend={kernels.BACKEND} xtol={XTOL:g}"
    _emit(rows, ["scenario_id", "model", "e_star", "foc_residual", "corner"],
          args.format, out, meta)
    return EXIT_OK


def _pair_cases(spec, band):
    if spec == "paper-set":
        return [_case(l, r, band) for l, r in STANDARD_PAIRS], True
    if ":" in spec:
        left, _, right = spec.partition(":")
        try:
            return [_case(ModelId.parse(left), ModelId.parse(right), band)], False
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        cid = ConditionId(spec.upper())
    except ValueError:
        raise UsageError(f"--pair expects left:right, paper-set or a result id, got {spec!r}") from None
    if cid not in EQUIVALENCES:
        raise UsageError(f"{cid} is not an equivalence result; use left:right")
    return [ComparisonCase.for_condition(cid, band)], False


def _case(left, right, band):
    for cid, (l, r, _) in EQUIVALENCES.items():
        if (l, r) == (left, right):
            return ComparisonCase.for_condition(cid, band)
    return ComparisonCase(left, right, guard_band=band)


def _statement(c):
    sign = EQUIVALENCES[c.condition_id][2] if c.condition_id in EQUIVALENCES else 1
    rel = "<=" if sign > 0 else ">="
    return f"e_{c.right.value}{rel}e_{c.left.value}"


def cmd_compare(args, out):
    if not args.band >= 0:
        raise UsageError("--band must be >= 0")
    scenarios, _ = _read(args.file)
    cases, skip_unsupported = _pair_cases(args.pair, args.band)
    jobs = []
    for s, _ in scenarios:
        for c in cases:
            if skip_unsupported and not (s.supports(c.left) and s.supports(c.right)):
                print(f"# skipped {c.left.value}:{c.right.value} on {s.name!r}: missing risk",
                      file=sys.stderr)
                continue
            jobs.append((s, c))

    def run(job):
        s, c = job
        if c.condition_id == ConditionId.GENERIC:
            return compare_pair(s, c.left, c.right, c.guard_band)
        return verify_equivalence(s, c)

    verdicts = _pmap(run, jobs, args.threads)
    rows, violated = [], False
    for (s, c), v in zip(jobs, verdicts):
        if v.equivalence_respected is None:
            eq = "undefined"
        else:
            eq = "respected" if v.equivalence_respected else "violated"
            violated |= not v.equivalence_respected
        rows.append([s.name, c.left.value, c.right.value, str(c.condition_id), _statement(c),
                     _num(v.e_left), _num(v.e_right),
                     "tie" if abs(v.ordering_gap) <= c.guard_band else str(v.ordering_holds).lower(),
                     _num(v.margin), str(v.condition_holds).lower(), eq])
    header = ["scenario_id", "left", "right", "result", "statement", "e_left", "e_right",
              "ordering", "condition_value", "condition", "equivalence"]
    meta = (f"# possprev {__version__} compare backend={kernels.BACKEND} xtol={XTOL:g} "
            f"band={args.band:g}")
    _emit(rows, header, args.format, out, meta)
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_check(args, out):
    if args.count is not None and args.count < 1:
        raise UsageError("--count must be >= 1")
    print(f"# possprev {__version__} check suite={args.suite} seed={args.seed} "
          f"count={args.count if args.count is not None else 'default'} "
          f"backend={kernels.BACKEND}", file=out)
    lines = run_suite(args.suite, args.seed, args.count)
    for line in lines:
        print(line.summary(), file=out)
    failed = [line for line in lines if not line.ok]
    print(f"# {len(lines) - len(failed)} of {len(lines)} lines passed", file=out)
    for line in failed:
        for replay in line.replays:
            print(f"# replay {line.suite}/{line.label}", file=out)
            print(json.dumps(replay, sort_keys=True), file=out)
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_sweep(args, out):
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    scenarios, data = _read(args.file)
    items = scenario_items(data)
    values = np.linspace(args.start, args.stop, args.steps + 1)
    header = None
    rows = []
    for (s0, fm), raw in zip(scenarios, items):
        models = _models_for(s0, args.models, fm)
        if header is None:
            header_models = models
            header = ["scenario_id", "value"] + [f"e_star_{m.value}" for m in models] + ["status"]
        elif models != header_models:
            raise UsageError("every scenario in a sweep must use the same models; pass --models")
        for x in values:
            edited = raw
            for path in args.param:
                edited = set_path(edited, path, float(x))
            try:
                (s, _), = parse_data(edited)
            except SchemaError as exc:
                rows.append([s0.name, _num(x)] + ["nan"] * len(models) + [_status(exc)])
                continue
            es, status = [], "ok"
            for m in models:
                try:
                    r = solve_optimal(s, m)
                    es.append(_num(r.e_star))
                    if not r.interior and status == "ok":
                        status = r.corner.value
                except PossprevError as exc:
                    es.append("nan")
                    status = _status(exc)
            rows.append([s0.name, _num(x)] + es + [status])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    print(f"# possprev {__version__} sweep param={','.join(args.param)} "
          f"backend={kernels.BACKEND} xtol={XTOL:g}", file=sys.stderr)
    out.write(buf.getvalue())
    return EXIT_OK


def _status(exc):
    return f"{type(exc).__name__}: {exc}".replace("\n", " ")


def build_parser():
    p = argparse.ArgumentParser(prog="possprev",
                                description="Optimal prevention under fuzzy and random background risk")
    p.add_argument("--version", action="version", version=f"possprev {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve for optimal prevention in each model")
    sp.add_argument("file")
    sp.add_argument("--model", default=None, help="model id, comma list or 'all'")
    sp.add_argument("--format", choices=("table", "csv"), default="table")
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("compare", help="compare optimal prevention between two models")
    sp.add_argument("file")
    sp.add_argument("--pair", default="paper-set", help="left:right, a result id or 'paper-set'")
    sp.add_argument("--band", type=float, default=GUARD_BAND, help="guard band for ties")
    sp.add_argument("--format", choices=("table", "csv"), default="table")
    sp.set_defaults(fn=cmd_compare)

    sp = sub.add_parser("check", help="run a randomized verification suite")
    sp.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=None, help="draws per check line")
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("sweep", help="optimal prevention along a parameter range (CSV)")
    sp.add_argument("file")
    sp.add_argument("--param", action="append", required=True,
                    help="dotted path of a numeric field; repeat to move several together")
    sp.add_argument("--from", dest="start", type=float, required=True)
    sp.add_argument("--to", dest="stop", type=float, required=True)
    sp.add_argument("--steps", type=int, default=10, help="number of intervals")
    sp.add_argument("--models", default=None, help="comma list of model ids or 'all'")
    sp.set_defaults(fn=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.threads = _default_threads()
        return args.fn(args, sys.stdout)
    except (SchemaError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PossprevError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
