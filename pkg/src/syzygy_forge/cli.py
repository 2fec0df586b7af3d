"""Command-line surface: construct, resolve, cohomology, classify, multiproj
and the regression suite.

Exit codes: 0 ok, 2 parse error, 3 precondition violation, 4 degree window
exhausted, 5 regression failure. Identical inputs, seed and modulus produce
byte-identical output; JSON is emitted with sorted keys for diffability.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .algebra import PolyRing, parse_poly
from .bundles import (
    example_f1,
    example_f2,
    example_rank5,
    line_sum_module,
    monomial_curve_modules,
    null_correlation_module,
    obfuscated_line_sum,
    omega_module,
)
from .classify import classify
from .cohomology import (
    NEG_INF,
    a_invariant,
    regularity,
    sheaf_cohomology_table,
)
from .errors import BoundTooSmall, EngineError, ParseError, PreconditionError, StabilizationFailure
from .modules import (
    betti_table,
    minimal_free_resolution,
    module_dumps,
    module_loads,
    poly_str,
)
from .multiproj import bigraded_table
from .verify import format_report, run as run_criteria

STANDARD_SKEW = np.array(
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=np.int64
)


def _parse_window(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise ParseError(f"window must be lo:hi, got {text!r}") from exc
    if lo > hi:
        raise ParseError(f"window lo {lo} exceeds hi {hi}")
    return lo, hi


def _example_module(name: str, p: int, seed: int):
    ring = PolyRing(p, 3)
    if name == "nc3":
        return null_correlation_module(ring, STANDARD_SKEW % p)
    if name == "F1":
        return example_f1(ring)
    if name == "F2":
        return example_f2(ring)
    if name == "rank5":
        return example_rank5(ring)
    if name == "curve3":
        return monomial_curve_modules(p)[0]
    if name == "curve4":
        return monomial_curve_modules(p)[1]
    if name.startswith("omega:"):
        parts = name.split(":")
        if len(parts) != 3:
            raise ParseError("omega example takes omega:p:l")
        return omega_module(ring, int(parts[1]), int(parts[2]))
    if name.startswith("linesum:"):
        twists = tuple(int(t) for t in name.split(":")[1].split(","))
        return obfuscated_line_sum(ring, twists, seed=seed)
    raise ParseError(f"unknown example {name!r}")


def _spec_module(data: dict, p: int, seed: int):
    kind = data.get("type")
    ring = PolyRing(p, int(data.get("n", 3)))
    if kind == "line_sum":
        return line_sum_module(ring, tuple(int(t) for t in data["twists"]))
    if kind == "omega":
        return omega_module(ring, int(data["p"]), int(data.get("twist", 0)))
    if kind == "null_correlation":
        return null_correlation_module(ring, np.array(data["matrix"], dtype=np.int64) % p)
    if kind == "cokernel":
        from .bundles import cokernel_bundle

        forms = [parse_poly(ring, f) for f in data.get("forms", [])]
        return cokernel_bundle(ring, np.array(data["matrix"], dtype=np.int64) % p, forms)
    if kind == "presentation":
        from .modules import module_from_json

        return module_from_json(data)
    raise ParseError(f"unknown bundle spec type {data.get('type')!r}")


def _load_module(args):
    if getattr(args, "example", None):
        return _example_module(args.example, args.p, args.seed)
    if not args.input:
        raise ParseError("provide an input presentation file or --example")
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {args.input}: {exc}") from exc
    return module_loads(text)


def cmd_construct(args) -> int:
    if args.spec:
        try:
            with open(args.spec, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ParseError(f"cannot read {args.spec}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"invalid JSON at line {exc.lineno} column {exc.colno}"
            ) from exc
        m = _spec_module(data, args.p, args.seed)
    elif args.example:
        m = _example_module(args.example, args.p, args.seed)
    else:
        raise ParseError("construct needs --spec or --example")
    print(module_dumps(m))
    return 0


def cmd_resolve(args) -> int:
    m = _load_module(args)
    res = minimal_free_resolution(m)
    bt = betti_table(res)
    print("j\ttwist\tmultiplicity")
    for (j, a), c in sorted(bt.items()):
        print(f"{j}\t{-a}\t{c}")
    if args.raw:
        for k, mp in enumerate(res.maps):
            print(f"# differential {k + 1}: {list(mp.source.degrees)} -> {list(mp.target.degrees)}")
            for i in range(mp.target.rank):
                print("\t".join(poly_str(mp.entries[i][j]) for j in range(mp.source.rank)))
    return 0


def cmd_cohomology(args) -> int:
    m = _load_module(args)
    window = _parse_window(args.window)
    table = sheaf_cohomology_table(m, window)
    if args.format == "json":
        print(json.dumps(table.to_json_dict(), sort_keys=True))
    else:
        print(table.to_tsv())
    n = m.ring.n
    avals = []
    for i in range(1, n + 1):
        a = a_invariant(m, i)
        avals.append("-inf" if a == NEG_INF else str(int(a)))
    print("a-invariants\t" + "\t".join(avals))
    reg = regularity(m)
    print(f"regularity\t{reg.sheaf}\t(module: {reg.module})")
    return 0


def cmd_classify(args) -> int:
    m = _load_module(args)
    result = classify(m, seed=args.seed)
    print(json.dumps(result.to_json_dict(), sort_keys=True))
    return 0


def cmd_multiproj(args) -> int:
    twists = []
    for part in args.twists.split(";"):
        u, v = part.split(",")
        twists.append((int(u), int(v)))
    table = bigraded_table(args.m, args.n, twists)
    print(table.to_tsv())
    return 0


def cmd_verify(args) -> int:
    results = run_criteria(only=args.only, p=args.p, seed=args.seed)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 5


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="syzygy-forge",
        description="exact graded-module engine for bundles on projective space",
    )
    ap.add_argument("--p", type=int, default=32003, help="odd prime modulus")
    ap.add_argument("--seed", type=int, default=2024, help="seed for randomized checks")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_input(sp):
        sp.add_argument("input", nargs="?", help="presentation file (JSON)")
        sp.add_argument("--example", help="F1|F2|rank5|nc3|omega:p:l|curve3|curve4|linesum:t1,t2,..")

    sp = sub.add_parser("construct", help="emit a presentation file for a bundle spec")
    sp.add_argument("--spec", help="BundleSpec JSON file")
    sp.add_argument("--example", help="same shortcuts as elsewhere")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("resolve", help="minimal Betti table of a module")
    add_input(sp)
    sp.add_argument("--raw", action="store_true", help="dump the differentials")
    sp.set_defaults(func=cmd_resolve)

    sp = sub.add_parser("cohomology", help="sheaf cohomology table")
    add_input(sp)
    sp.add_argument("--window", default="-8:8", help="degree window lo:hi")
    sp.add_argument("--format", choices=("tsv", "json"), default="tsv")
    sp.set_defaults(func=cmd_cohomology)

    sp = sub.add_parser("classify", help="Buchsbaum-type classification verdict")
    add_input(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("multiproj", help="bigraded line-bundle cohomology table")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--twists", required=True, help="semicolon-separated u,v pairs")
    sp.set_defaults(func=cmd_multiproj)

    sp = sub.add_parser("verify", help="run the regression suite")
    sp.add_argument("--only", help="substring filter on criterion ids")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 3
    except (BoundTooSmall, StabilizationFailure) as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 4
    except EngineError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
