"""Command-line entry point: ``cubesum <command> ...``.

Every command prints JSON to stdout; ``--pretty`` switches to plain tables.
Long runs (scan, enumerate) append to a JSONL ledger and can be resumed from
a single-line JSON checkpoint.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from .arith import CubefreeK, cubefree_part, factorize
from .curves import CurveModel, CurvePoint, Form, conductor, convert, minimal_model, parse_fraction
from .descent import build_descent_matrix, selmer_rank_bound
from .enumeration import MAX_CONDUCTOR, MAX_K, iter_candidates
from .heights import DEFAULT_TOL, certify_independent
from .ledger import (
    CandidateRecord, Checkpoint, append, fingerprint, load_checkpoint, merge, read_ledger,
    save_checkpoint, write_ledger,
)
from .mestre import default_cache, mestre_score, score_curve
from .pointsearch import DEFAULT_A_BUDGET, SearchTask, search_report
from .surfaces import DEFAULT_FACTOR_CAP, ScanFilters, ScanStats, SurfaceId, next_triple, scan_steps
from .verify import TO_EK, TO_EKPRIME, transfer, verify_paper


def _ck(text: str) -> CubefreeK:
    k = int(text)
    if k < 1:
        raise SystemExit(f"k must be a positive integer, got {text}")
    try:
        return CubefreeK.of(k)
    except ValueError as exc:
        raise SystemExit(str(exc))


def _factors_json(factors) -> list:
    return [[str(p), e] for p, e in factors]


# ---------------------------------------------------------------------------
# resumable drivers


def run_scan(surface: str, box: int, filters: ScanFilters, out: str | os.PathLike,
             checkpoint: str | os.PathLike | None = None, max_steps: int | None = None,
             checkpoint_every: int = 1) -> dict:
    """Append scan samples to ``out``; returns a summary.

    With ``checkpoint`` the cursor (last finished triple) is saved every
    ``checkpoint_every`` triples and at the end, and an existing checkpoint
    is resumed.  ``max_steps`` stops early after that many triples, as an
    interruption would.
    """
    params = {"surface": surface, "box": box, "min_selmer": filters.min_selmer,
              "max_k": filters.max_k, "factor_cap": filters.factor_cap}
    fp = fingerprint("scan", params)
    start = None
    if checkpoint is not None:
        cp = load_checkpoint(checkpoint, fp)
        if cp is not None:
            if cp.cursor.get("done"):
                return {"emitted": 0, "triples": 0, "done": True}
            start = next_triple(box, tuple(cp.cursor["triple"]))
            if start is None:
                return {"emitted": 0, "triples": 0, "done": True}
    stats = ScanStats()
    steps = 0
    last = None
    done = True
    for params_, smp in scan_steps(surface, box, filters, start, stats):
        if smp is not None:
            sb = selmer_rank_bound(smp.k)
            rec = CandidateRecord(
                k=str(smp.k.k), factors=_factors_json(smp.k.factors), selmer_bound=sb.bound,
                points=[p.to_json() for p in smp.points],
                provenance={"command": "scan", **params, "triple": list(params_)},
            )
            append(out, rec)
        steps += 1
        last = params_
        if checkpoint is not None and steps % checkpoint_every == 0:
            save_checkpoint(checkpoint, Checkpoint(fp, {"triple": list(last)}))
        if max_steps is not None and steps >= max_steps:
            done = next_triple(box, last) is None
            break
    if checkpoint is not None:
        cursor = {"done": True} if done else {"triple": list(last)}
        save_checkpoint(checkpoint, Checkpoint(fp, cursor))
    return {"emitted": stats.emitted, "triples": stats.triples, "degenerate": stats.degenerate,
            "filtered": stats.filtered, "failed": stats.failed, "done": done}


def run_enumerate(budget: int, measure: str, target: int, out: str | os.PathLike,
                  checkpoint: str | os.PathLike | None = None,
                  max_steps: int | None = None) -> dict:
    """Append candidates in DFS order; on completion rewrite ``out`` sorted by k."""
    fp = fingerprint("enumerate", {"budget": budget, "measure": measure, "target": target})
    after = None
    if checkpoint is not None:
        cp = load_checkpoint(checkpoint, fp)
        if cp is not None:
            if cp.cursor.get("done"):
                return {"emitted": 0, "done": True}
            after = tuple(tuple(pe) for pe in cp.cursor["path"]) if cp.cursor.get("path") is not None else None
    emitted = 0
    done = True
    for path, ck in iter_candidates(budget, measure, target, after=after):
        sb = selmer_rank_bound(ck)
        append(out, CandidateRecord(
            k=str(ck.k), factors=_factors_json(ck.factors), selmer_bound=sb.bound,
            provenance={"command": "enumerate", "budget": str(budget), "measure": measure,
                        "min_selmer": target},
        ))
        emitted += 1
        if checkpoint is not None:
            save_checkpoint(checkpoint, Checkpoint(fp, {"path": [list(pe) for pe in path]}))
        if max_steps is not None and emitted >= max_steps:
            done = False
            break
    if done:
        write_ledger(out, sorted(merge(read_ledger(out)), key=lambda r: r.k_int))
        if checkpoint is not None:
            save_checkpoint(checkpoint, Checkpoint(fp, {"done": True}))
    return {"emitted": emitted, "done": done}


# ---------------------------------------------------------------------------
# point loading for certify


def load_points(k: CubefreeK, path: str | os.PathLike) -> list[CurvePoint]:
    """Points from JSONL, moved to the minimal model of E'_k.

    Accepts search output lines (curve/x/y/d) and serialized CurvePoints
    (model/x/y); E_k points cross over through phi.
    """
    target = minimal_model(k)
    out = []
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            if "model" in data:
                p = CurvePoint.from_json(k, data)
            else:
                form = Form.CUBIC_EK if data["curve"] == "ek" else Form.CUBIC_EKPRIME
                d = parse_fraction(data.get("d", "1"))
                p = CurveModel(k, form).point(parse_fraction(data["x"]) / d, parse_fraction(data["y"]) / d)
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise SystemExit(f"{path}:{n}: bad point line ({exc})")
        if p.model.form.curve == "ek":
            p = transfer(p, TO_EKPRIME)
        out.append(convert(p, target.form))
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_factor(args) -> Any:
    n = int(args.n)
    fac = factorize(abs(n))
    k, d, sign = cubefree_part(n)
    return {"n": str(n), "factors": _factors_json(fac.factors),
            "cubefree_part": {"k": str(k.k), "d": str(d), "sign": sign}}


def cmd_descent_bound(args) -> Any:
    ck = _ck(args.k)
    out = selmer_rank_bound(ck).to_json()
    if args.matrix:
        dm = build_descent_matrix(ck)
        out["matrix"] = {"rows": [str(r) for r in dm.row_labels],
                         "cols": [f"{p}^{e}" for p, e in dm.col_labels],
                         "entries": dm.matrix.entries}
    return out


def cmd_conductor(args) -> Any:
    ck = _ck(args.k)
    c = conductor(ck)
    return {"k": str(ck.k), "conductor": str(c.value), "beta3": c.beta3,
            "minimal_model": str(minimal_model(ck))}


def cmd_mestre(args) -> Any:
    ck = _ck(args.k)
    cache = default_cache()
    cache.ensure(args.primes_up_to)
    res = mestre_score(ck, args.primes_up_to, cache).to_json()
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "log_score"])
            for x, s in score_curve(ck, args.primes_up_to, args.step, cache):
                w.writerow([x, f"{s:.12g}"])
        res["csv"] = args.csv
    return res


def cmd_search(args) -> Any:
    ck = _ck(args.k)
    task = SearchTask(ck, d_max=args.dmax, a_budget=args.abudget, curve=args.curve)
    report = search_report(task, args.jobs)
    if args.out:
        with open(args.out, "w") as fh:
            for fp in report.points:
                fh.write(json.dumps({"k": str(ck.k), **fp.to_json()}, sort_keys=True) + "\n")
    return {"k": str(ck.k), "points": [fp.to_json() for fp in report.points],
            "cells": report.cells, "exhaustive": report.exhaustive}


def cmd_scan(args) -> Any:
    surface = SurfaceId(args.surface)
    cap = DEFAULT_FACTOR_CAP[surface] if args.factor_cap is None else args.factor_cap
    filters = ScanFilters(min_selmer=args.min_selmer, max_k=args.max_k, factor_cap=cap)
    return run_scan(surface.value, args.box, filters, args.out, args.resume,
                    checkpoint_every=args.checkpoint_every)


def cmd_enumerate(args) -> Any:
    if args.max_k is not None:
        budget, measure = args.max_k, MAX_K
    else:
        budget, measure = args.max_conductor, MAX_CONDUCTOR
    return run_enumerate(budget, measure, args.min_selmer, args.out, args.resume)


def cmd_certify(args) -> Any:
    ck = _ck(args.k)
    pts = load_points(ck, args.points)
    cert = certify_independent(pts, tol=args.tol, jobs=args.jobs)
    return {"k": str(ck.k), "model": str(minimal_model(ck)), **cert}


def cmd_verify_paper(args) -> Any:
    ranks = [int(r) for r in args.ranks.split(",") if r.strip()] if args.ranks else []
    return verify_paper(minimality_ranks=ranks, d_max=args.dmax, jobs=args.jobs,
                        certify=not args.no_certify)


def cmd_transfer(args) -> Any:
    ck = _ck(args.k)
    model = CurveModel.make(ck, args.model)
    p = model.point(parse_fraction(args.x), parse_fraction(args.y))
    q = transfer(p, args.direction)
    return {"k": str(ck.k), "from": p.to_json(), "to": q.to_json(), "to_model": str(q.model)}


# ---------------------------------------------------------------------------
# output


def _render(value: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for key, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{key}:")
                lines.extend(_render(v, indent + 1))
            else:
                lines.append(f"{pad}{key}: {v}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, dict):
                lines.append(f"{pad}-")
                lines.extend(_render(v, indent + 1))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{value}")
    return lines


def _render_report(report: dict) -> list[str]:
    lines = []
    width = max(len(c["name"]) for c in report["checks"]) if report["checks"] else 10
    for c in report["checks"]:
        lines.append(f"{c['name']:<{width}}  {'PASS' if c['ok'] else 'FAIL'}")
    lines.append(f"overall: {'PASS' if report['ok'] else 'FAIL'} ({report['seconds']} s)")
    return lines


def emit(result: Any, pretty: bool, stream=None) -> None:
    stream = stream or sys.stdout
    if not pretty:
        stream.write(json.dumps(result, default=str) + "\n")
        return
    if isinstance(result, dict) and "checks" in result:
        lines = _render_report(result)
    else:
        lines = _render(result)
    stream.write("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes (default: all CPUs)")

    ap = argparse.ArgumentParser(prog="cubesum", description="Tools for the curves x^3 + y^3 = k.",
                                 parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", parents=[common], help="factor n and split off its cubefree part")
    p.add_argument("n")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("descent-bound", parents=[common], help="Selmer rank bound from the descent matrix")
    p.add_argument("k")
    p.add_argument("--matrix", action="store_true", help="include the matrix itself")
    p.set_defaults(func=cmd_descent_bound)

    p = sub.add_parser("conductor", parents=[common], help="conductor and minimal model")
    p.add_argument("k")
    p.set_defaults(func=cmd_conductor)

    p = sub.add_parser("mestre", parents=[common], help="Mestre product score")
    p.add_argument("k")
    p.add_argument("--primes-up-to", type=int, default=10**4)
    p.add_argument("--csv", help="write (x, log score) samples to this CSV file")
    p.add_argument("--step", type=int, default=100, help="x spacing of the CSV samples")
    p.set_defaults(func=cmd_mestre)

    p = sub.add_parser("search", parents=[common], help="divisor point search")
    p.add_argument("k")
    p.add_argument("--dmax", type=int, default=1)
    p.add_argument("--curve", choices=["ek", "ekprime", "both"], default="ek")
    p.add_argument("--abudget", type=int, default=DEFAULT_A_BUDGET)
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("scan", parents=[common], help="scan a parametrized cubic surface")
    p.add_argument("--surface", choices=["s1", "s2", "s3"], required=True)
    p.add_argument("--box", type=int, required=True)
    p.add_argument("--min-selmer", type=int)
    p.add_argument("--max-k", type=int)
    p.add_argument("--factor-cap", type=int, help="skip factor values above this size")
    p.add_argument("--out", required=True)
    p.add_argument("--resume", metavar="CKPT", help="checkpoint file to resume from and update")
    p.add_argument("--checkpoint-every", type=int, default=100)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("enumerate", parents=[common], help="enumerate k with a large Selmer bound")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--max-k", type=int)
    g.add_argument("--max-conductor", type=int)
    p.add_argument("--min-selmer", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resume", metavar="CKPT")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("certify", parents=[common], help="independence certificate for a point set")
    p.add_argument("--k", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify-paper", parents=[common], help="re-check the shipped record data")
    p.add_argument("--ranks", default="0,1,2,3", help="ranks whose minimality is re-derived")
    p.add_argument("--dmax", type=int, default=40, help="point search depth for minimality")
    p.add_argument("--no-certify", action="store_true")
    p.set_defaults(func=cmd_verify_paper)

    p = sub.add_parser("transfer", parents=[common], help="move a point across the 3-isogeny")
    p.add_argument("--k", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--model", default="minimal_ekprime_odd",
                   choices=[f.value for f in Form], help="model of the input point")
    p.add_argument("--direction", choices=[TO_EK, TO_EKPRIME], required=True)
    p.set_defaults(func=cmd_transfer)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except (ValueError, ArithmeticError) as exc:
        emit({"error": type(exc).__name__, "message": str(exc)}, args.pretty, sys.stderr)
        return 2
    emit(result, args.pretty)
    if isinstance(result, dict) and result.get("ok") is False:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
