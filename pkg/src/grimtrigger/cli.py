"""Command-line interface.

Exit codes: 0 success or implementable, 1 not implementable (or a failed cross-check),
2 input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .apps import (
    AuctionParams,
    AuditParams,
    GrantParams,
    audit_closed_form,
    gen_audit_model,
    gen_auction_model,
    gen_grant_model,
)
from .beliefs import enumerate_vertices, pairwise_prefilter
from .ic import METHODS, check_implementable, check_sender_ic
from .lp import NumericalError
from .model import Allocation, ModelError, ModelSpec, load_allocation, load_model, receiver_value
from .optimizer import constrained_optimum
from .structure import monotone_certificate_check, structure_report

EXIT_OK, EXIT_NOT_IMPLEMENTABLE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


def _emit(args, doc: dict, text: str) -> None:
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text)


def _fmt(probs) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in probs) + ")"


def _cmd_check(args) -> int:
    model = load_model(args.model)
    p = load_allocation(model, args.allocation)
    report = check_implementable(model, p, method=args.method, parallel=args.parallel)
    lines = [f"implementable: {report.implementable}"]
    for r in report.reports:
        s = model.senders[r.sender_index]
        flag = " (boundary)" if r.boundary else ""
        lines.append(
            f"  {s.name}: gap {r.deviation_gap:.9g}{flag} at belief {_fmt(r.worst_belief.probs)}"
            f" punished by {{{', '.join(model.outcomes[k] for k in r.grim_set)}}}"
        )
    _emit(args, report.to_dict(model), "\n".join(lines))
    return EXIT_OK if report.implementable else EXIT_NOT_IMPLEMENTABLE


def _cmd_deviate(args) -> int:
    model = load_model(args.model)
    p = load_allocation(model, args.allocation)
    r = check_sender_ic(model, p, args.sender, method=args.method)
    s = model.senders[r.sender_index]
    text = [f"{s.name}: gap {r.deviation_gap:.9g}, implementable: {r.implementable}"]
    if not r.implementable:
        text.append(f"  pool into {_fmt(r.worst_belief.probs)} with probability {r.alpha:.6g}")
        for t, w in zip(s.types, r.residual):
            if w > 0:
                text.append(f"  reveal {t} with probability {w:.6g}")
    _emit(args, r.to_dict(model), "\n".join(text))
    return EXIT_OK if r.implementable else EXIT_NOT_IMPLEMENTABLE


def _cmd_beliefs(args) -> int:
    model = load_model(args.model)
    i = model.sender_index(args.sender)
    if args.pairwise:
        ps = pairwise_prefilter(model, i)
        doc = {
            "sender": i,
            "entries": [
                {
                    "outcomes": [model.outcomes[r] for r in e.outcomes],
                    "types": [model.senders[i].types[t] for t in e.types],
                    "alpha": e.alpha,
                    "belief": e.belief.probs.tolist(),
                }
                for e in ps.entries
            ],
        }
        text = "\n".join(f"{d['outcomes']} on {d['types']}: {_fmt(d['belief'])}" for d in doc["entries"])
    else:
        doc = enumerate_vertices(model, i, parallel=args.parallel).to_dict(model)
        text = "\n".join(f"{b['kind']:10s} {_fmt(b['probs'])} {b['regions']}" for b in doc["beliefs"])
    _emit(args, doc, text or "(none)")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    model = load_model(args.model)
    opt = constrained_optimum(model, parallel=args.parallel)
    text = [
        f"value: {opt.value:.9g} (first best {opt.unconstrained_value:.9g})",
        f"deterministic: {opt.deterministic}, binding constraints: {len(opt.binding)}",
    ]
    for t in model.profiles():
        row = opt.allocation.row(t)
        parts = [f"{model.outcomes[r]}:{row[r]:.6g}" for r in np.flatnonzero(row > 1e-12)]
        text.append(f"  {','.join(model.profile_labels(t))} -> {' '.join(parts)}")
    _emit(args, opt.to_dict(model), "\n".join(text))
    return EXIT_OK


def _cmd_structure(args) -> int:
    model = load_model(args.model)
    p = load_allocation(model, args.allocation) if args.allocation else None
    report = structure_report(model, p)
    _emit(args, {"senders": report}, json.dumps(report, indent=2))
    return EXIT_OK


def _write_instance(out: str | None, model: ModelSpec, p: Allocation | None) -> None:
    if out is None:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / "model.json").write_text(json.dumps(model.to_dict(), indent=2) + "\n")
    if p is not None:
        (d / "alloc.json").write_text(json.dumps(p.to_dict(model), indent=2) + "\n")


def _cmd_app(args) -> int:
    doc = json.loads(Path(args.params).read_text())
    code = EXIT_OK
    if args.app == "audit":
        params = AuditParams.from_dict(doc)
        model = gen_audit_model(params)
        sol = audit_closed_form(params)
        out = {
            "fined": list(sol.fined),
            "indifferent": list(sol.indifferent),
            "outcome": model.outcomes[sol.outcome],
            "value": receiver_value(model, Allocation.constant(model, sol.outcome)),
        }
        text = [f"fine set {model.outcomes[sol.outcome]}, value {out['value']:.9g}"]
        if sol.indifferent:
            text.append(f"indifferent firms: {list(sol.indifferent)}")
        if args.cross_check:
            opt = constrained_optimum(model)
            support = sorted({int(r) for r in np.flatnonzero(opt.allocation.probs.reshape(-1, model.n_outcomes).max(0) > 1e-9)})
            agree = abs(opt.value - out["value"]) <= 1e-6 and (sol.indifferent or support == [sol.outcome])
            out["cross_check"] = {"lp_value": opt.value, "lp_support": [model.outcomes[r] for r in support], "agree": bool(agree)}
            text.append(f"LP optimum {opt.value:.9g} on {out['cross_check']['lp_support']}: {'agree' if agree else 'DISAGREE'}")
            code = EXIT_OK if agree else EXIT_NOT_IMPLEMENTABLE
        _write_instance(args.out, model, Allocation.constant(model, sol.outcome))
    elif args.app == "grant":
        params = GrantParams.from_dict(doc)
        model, p = gen_grant_model(params.f, params.g, params.weights, params.priors)
        out = {"allocation": p.to_dict(model), "value": receiver_value(model, p)}
        text = [f"efficient allocation value {out['value']:.9g}"]
        if args.cross_check:
            rep = check_implementable(model, p)
            out["cross_check"] = {"implementable": rep.implementable, "certificates": monotone_certificate_check(model, p)}
            text.append(f"implementable: {rep.implementable}; certificates {out['cross_check']['certificates']}")
            code = EXIT_OK if rep.implementable else EXIT_NOT_IMPLEMENTABLE
        _write_instance(args.out, model, p)
    else:
        params = AuctionParams.from_dict(doc)
        res = gen_auction_model(params)
        model = res.model
        out = {
            "allocation": res.allocation.to_dict(model),
            "transfers": [
                {"profile": list(model.profile_labels(t)), "x": res.transfers[(slice(None),) + t].tolist()}
                for t in model.profiles()
            ],
            "positive_iff_winner": res.positive_iff_winner,
            "epir_binds": bool(np.all(np.abs(res.epir_slack) <= 1e-9)),
            "cap_violations": [{"sender": i, "profile": list(model.profile_labels(t)), "x": x} for i, t, x in res.cap_violations],
        }
        text = [f"positive transfer iff winner: {res.positive_iff_winner}; EPIR binds: {out['epir_binds']}"]
        if res.cap_violations:
            text.append(f"{len(res.cap_violations)} transfers outside the admissible set")
        if args.cross_check:
            rep = check_implementable(model, res.allocation)
            out["cross_check"] = {"implementable": rep.implementable}
            text.append(f"efficient allocation implementable: {rep.implementable}")
            code = EXIT_OK if rep.implementable else EXIT_NOT_IMPLEMENTABLE
        _write_instance(args.out, model, res.allocation)
    _emit(args, out, "\n".join(text))
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--parallel", action="store_true", help="check senders concurrently")

    parser = argparse.ArgumentParser(prog="grimtrigger", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="decide implementability of an allocation")
    p.add_argument("model")
    p.add_argument("allocation")
    p.add_argument("--method", choices=METHODS, default="vertex")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("deviate", parents=[common], help="construct a profitable deviation for one sender")
    p.add_argument("model")
    p.add_argument("allocation")
    p.add_argument("--sender", type=int, required=True)
    p.add_argument("--method", choices=METHODS, default="vertex")
    p.set_defaults(func=_cmd_deviate)

    p = sub.add_parser("beliefs", parents=[common], help="list the test beliefs of one sender")
    p.add_argument("model")
    p.add_argument("--sender", type=int, required=True)
    p.add_argument("--pairwise", action="store_true", help="only two-type indifference beliefs")
    p.set_defaults(func=_cmd_beliefs)

    p = sub.add_parser("optimize", parents=[common], help="receiver-optimal implementable allocation")
    p.add_argument("model")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("structure", parents=[common], help="classify sender preferences")
    p.add_argument("model")
    p.add_argument("allocation", nargs="?")
    p.set_defaults(func=_cmd_structure)

    p = sub.add_parser("app", parents=[common], help="generate and solve an applied model")
    p.add_argument("app", choices=("audit", "grant", "auction"))
    p.add_argument("params")
    p.add_argument("--cross-check", action="store_true", help="verify against the general solver")
    p.add_argument("--out", help="directory to write the generated model.json/alloc.json")
    p.set_defaults(func=_cmd_app)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ModelError, ValueError, IndexError, KeyError, OSError, jsonschema.ValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
