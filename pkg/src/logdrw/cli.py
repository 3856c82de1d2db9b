"""Command line front end.

Exit codes: 0 when every check passes, 1 when a mathematical failure witness
is reported, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from sympy import isprime

from .compare import counterexample_probe, de_rham_x_complex, enumerate_labels, homology, verify_comparison, x_part_complex
from .drw_basis import WordError, format_word, parse_word, random_word
from .log_drw import (
    AbsoluteContext,
    ContextError,
    LogDRWElement,
    QuotientContext,
    RelativeContext,
    decompose,
    element_to_json,
    g_map,
)
from .monoid import (
    AffineMonoid,
    MonoidError,
    MonoidHom,
    MonoidIdeal,
    check_star_star,
    is_integral_hom,
    is_p_saturated_hom,
    is_radical_ideal,
    parse_monoid_text,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_monoid_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    try:
        return parse_monoid_text(text, name=Path(path).stem)
    except MonoidError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _load(args) -> dict:
    """Monoid P, optional hom Q -> P and optional ideal of Q from the file flags."""
    out = {"P": None, "hom": None, "ideal": None}
    if args.monoid:
        parsed = _read_monoid_file(args.monoid)
        if parsed["monoid"] is None:
            raise UsageError(f"{args.monoid}: no monoid defined")
        out["P"] = parsed["monoid"]
    if args.hom:
        if out["P"] is None:
            raise UsageError("--hom needs --monoid for the target")
        parsed = _read_monoid_file(args.hom)
        if parsed["monoid"] is None or not parsed["hom"]:
            raise UsageError(f"{args.hom}: expected the source monoid and 'hom' rows")
        try:
            out["hom"] = MonoidHom(parsed["monoid"], out["P"], tuple(parsed["hom"]))
        except MonoidError as exc:
            raise UsageError(f"{args.hom}: {exc}") from exc
    if args.ideal:
        if out["hom"] is None:
            raise UsageError("--ideal needs --hom")
        parsed = _read_monoid_file(args.ideal)
        try:
            out["ideal"] = MonoidIdeal(out["hom"].source, tuple(parsed["ideal"]))
        except MonoidError as exc:
            raise UsageError(f"{args.ideal}: {exc}") from exc
    return out


def _context(args):
    data = _load(args)
    if data["P"] is None:
        raise UsageError("--monoid is required")
    try:
        if data["ideal"] is not None:
            return QuotientContext(data["hom"], args.p, args.m, args.window, True, data["ideal"])
        if data["hom"] is not None:
            if data["P"].lattice:
                raise UsageError("relative contexts need the target monoid in lattice coordinates")
            return RelativeContext(data["hom"], args.p, args.m, args.window)
        return AbsoluteContext(data["P"], args.p, args.m)
    except (ContextError, MonoidError) as exc:
        raise UsageError(str(exc)) from exc


def _emit(args, payload: dict, lines: list) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print("\n".join(lines))


# ---------------------------------------------------------------------------
# subcommands


def cmd_monoid_check(args) -> int:
    data = _load(args)
    P = data["P"]
    if P is None:
        raise UsageError("--monoid is required")
    std = P.standardized()
    report = {
        "monoid": str(P),
        "rank": P.rank,
        "facets": [list(f) for f in std.facets],
        "hilbert_basis": [list(v) for v in std.hilbert_basis(args.window)],
        "checks": {},
    }
    f = data["hom"]
    if f is not None:
        report["checks"]["integral"] = is_integral_hom(f, args.window).as_dict()
        report["checks"]["p_saturated"] = is_p_saturated_hom(f, args.p, args.window).as_dict()
        report["checks"]["star_star"] = check_star_star(f, args.p, args.window).as_dict()
    if data["ideal"] is not None:
        report["checks"]["radical"] = is_radical_ideal(f.source, data["ideal"], args.window).as_dict()
    failed = [k for k, v in report["checks"].items() if v["status"] == "fails"]
    report["verdict"] = "fail" if failed else "pass"
    lines = [f"monoid {report['monoid']} rank {P.rank}", f"  facets {report['facets']}", f"  hilbert basis (window {args.window}) {report['hilbert_basis']}"]
    for name, v in report["checks"].items():
        wit = f"  witness {v['witness']}" if v.get("witness") else ""
        lines.append(f"  {name}: {v['status']}{wit}")
    _emit(args, report, lines)
    return EXIT_FAIL if failed else EXIT_OK


def _words(args, ctx) -> list:
    if args.word is not None:
        try:
            return [parse_word(args.word, ctx.engine.ring, ctx.engine.rank)]
        except WordError as exc:
            raise UsageError(f"--word: {exc}") from exc
    rng = np.random.default_rng(args.seed)
    return [random_word(rng, ctx.engine.rank, ctx.m, ctx.engine.ring) for _ in range(args.random)]


def _absolute_for_words(args):
    if args.monoid:
        return _context(args)
    if args.rank is None:
        raise UsageError("give --monoid or --rank")
    return AbsoluteContext(AffineMonoid.free(args.rank), args.p, args.m)


def cmd_drw_normalize(args) -> int:
    ctx = _absolute_for_words(args)
    out, lines = [], []
    for word in _words(args, ctx):
        nf = LogDRWElement(ctx, ctx.engine.normalize(word))
        out.append({"word": format_word(word, ctx.engine.ring), "normal_form": element_to_json(nf)["terms"]})
        lines.append(f"{format_word(word, ctx.engine.ring) or '1'}  ->  {nf.nf!r}")
    _emit(args, {"context": ctx.header(), "results": out}, lines)
    return EXIT_OK


def cmd_drw_decompose(args) -> int:
    ctx = _absolute_for_words(args)
    out, lines = [], []
    for word in _words(args, ctx):
        e = LogDRWElement(ctx, ctx.engine.normalize(word))
        parts = []
        lines.append(format_word(word, ctx.engine.ring) or "1")
        for x, part in decompose(e).items():
            if ctx.u_label(x) is None:
                basic = None  # only labels in P[1/p] have P-basic expansions
            else:
                s = g_map(part, x)
                basic = {",".join(map(str, I)) or "-": ctx.engine.ring.to_json(c) for I, c in sorted(s.terms.items())}
            parts.append({"label": str(x), "terms": element_to_json(part)["terms"], "p_basic": basic})
            lines.append(f"  x = {x}: {part.nf!r}   P-basic {basic}")
        out.append({"word": format_word(word, ctx.engine.ring), "parts": parts})
    _emit(args, {"context": ctx.header(), "results": out}, lines)
    return EXIT_OK


def cmd_cohomology(args) -> int:
    ctx = _context(args)
    rows, lines = [], [f"{'weight':>16}  {'H(de Rham)':<28} H(W)"]
    for x in enumerate_labels(ctx, args.box):
        W = x_part_complex(ctx, x)
        DR, _ = de_rham_x_complex(ctx, x, args.window)
        hw = {str(n): v for n, v in homology(W).items() if v}
        hd = {str(n): v for n, v in homology(DR).items() if v}
        rows.append({"weight": str(x), "homology_lhs": hd, "homology_rhs": hw})
        if hw or hd:
            lines.append(f"{str(x):>16}  {json.dumps(hd):<28} {json.dumps(hw)}")
    _emit(args, {"context": ctx.header(), "results": rows}, lines)
    return EXIT_OK


def cmd_compare_verify(args) -> int:
    ctx = _context(args)
    report = verify_comparison(ctx, box=args.box, window=args.window)
    lines = [
        f"{report['context']['variant']} comparison, p={args.p} m={args.m}: {report['verdict']}",
        f"  {report['labels']} labels ({report['image_labels']} image, {report['outside_labels']} outside); {report['scope']}",
    ]
    if report["witness"]:
        lines.append(f"  witness {json.dumps(report['witness'], default=str)}")
    _emit(args, report, lines)
    return EXIT_OK if report["verdict"] == "pass" else EXIT_FAIL


def cmd_compare_counterexample(args) -> int:
    if args.k is None:
        raise UsageError("--k is required")
    try:
        record = counterexample_probe(args.p, args.k, args.m, args.window)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    lines = [
        f"element {record['element']} at label ({', '.join(record['label'])})",
        f"  nonzero {record['nonzero']}, d = 0 {record['cocycle']}, in comparison image {record['in_comparison_image']}",
        f"  H^0 of the x-part {record['x_part_H0']}",
        f"  (**) {record['star_star']['status']} witness {record['star_star']['witness']}",
        f"  verdict: {record['verdict']}",
    ]
    _emit(args, record, lines)
    return EXIT_FAIL if record["verdict"] == "counterexample" else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=2, help="the prime")
    common.add_argument("--m", type=int, default=2, help="truncation level")
    common.add_argument("--box", type=int, default=3, help="label numerator bound")
    common.add_argument("--window", type=int, default=3, help="search window for monoid predicates")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--monoid", metavar="FILE")
    common.add_argument("--hom", metavar="FILE", help="source monoid plus 'hom' rows")
    common.add_argument("--ideal", metavar="FILE", help="'ideal' generators in the source monoid")

    parser = argparse.ArgumentParser(prog="logdrw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True)

    mon = sub.add_parser("monoid").add_subparsers(dest="action", required=True)
    mon.add_parser("check", parents=[common]).set_defaults(func=cmd_monoid_check)

    drw = sub.add_parser("drw").add_subparsers(dest="action", required=True)
    for name, func in (("normalize", cmd_drw_normalize), ("decompose", cmd_drw_decompose)):
        p = drw.add_parser(name, parents=[common])
        p.add_argument("--word", help="factors joined by '*', e.g. \"V(3 X^(1,2)) * dlog(0,1)\"")
        p.add_argument("--rank", type=int)
        p.add_argument("--random", type=int, default=1, help="number of random words when --word is absent")
        p.set_defaults(func=func)

    sub.add_parser("cohomology", parents=[common]).set_defaults(func=cmd_cohomology)

    cmp_ = sub.add_parser("compare").add_subparsers(dest="action", required=True)
    cmp_.add_parser("verify", parents=[common]).set_defaults(func=cmd_compare_verify)
    ce = cmp_.add_parser("counterexample", parents=[common])
    ce.add_argument("--k", type=int)
    ce.set_defaults(func=cmd_compare_counterexample)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if not isprime(args.p):
            raise UsageError(f"--p {args.p} is not prime")
        if args.m < 1 or args.box < 0 or args.window < 0:
            raise UsageError("need m >= 1 and nonnegative box and window")
        if args.p ** (args.m + 1) >= 2**31:
            raise UsageError("p^(m+1) must stay below 2^31")
        return args.func(args)
    except UsageError as exc:
        print(f"logdrw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
