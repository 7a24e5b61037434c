"""Command line front end. Every command prints (or writes) one JSON document."""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .cartan import CartanError, build_model, cartan_test
from .geometry import GermError, MetricGerm, OrderError
from .generators import UsageError, generate, normalize_label
from .pipeline import EXIT_INVALID, EXIT_OK, classify_germ
from . import tables


def _signature(text: Optional[str]):
    if text is None:
        return None
    try:
        p, q = (int(x) for x in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise UsageError(f"signature must look like 'p,q', got {text!r}") from None
    return p, q


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load_germ(path: str) -> MetricGerm:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise GermError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise GermError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise GermError(f"{path}: top-level JSON value must be an object")
    return MetricGerm.from_json(obj)


def cmd_classify(args) -> int:
    germ = _load_germ(args.germ)
    rep = classify_germ(germ, seed=args.seed, deriv_order=args.deriv_order, samples=args.samples)
    out = rep.to_json()
    out["config"]["command"] = "classify"
    out["config"]["input"] = args.germ
    _emit(out, args.out)
    return rep.exit_code()


def cmd_verify(args) -> int:
    germ = _load_germ(args.germ)
    rep = classify_germ(germ, seed=args.seed, deriv_order=args.deriv_order, samples=args.samples)
    _emit({"config": dict(rep.config, command="verify", input=args.germ), "label": rep.label,
           "verification": rep.verification}, args.out)
    return rep.exit_code()


def cmd_generate(args) -> int:
    label = normalize_label(args.label)
    gen = generate(label, d=args.d, signature=_signature(args.signature), seed=args.seed, K=args.jet_order)
    out = gen.to_json()
    out["config"] = {"command": "generate", "label": label, "seed": args.seed, "jet_order": gen.germ.K}
    _emit(out, args.out)
    return EXIT_OK


def cmd_cartan(args) -> int:
    sig = _signature(args.signature)
    p = None
    if sig is not None:
        p, q = sig
        if p + q != args.delta:
            raise UsageError(f"signature ({p},{q}) must satisfy p + q = delta = {args.delta}")
    model = build_model(args.delta, args.epsilon, p, complex=args.complex)
    rep = cartan_test(model, seed=args.seed)
    out = rep.to_json()
    out["config"] = {"command": "cartan", "delta": args.delta, "epsilon": args.epsilon, "complex": args.complex,
                     "seed": args.seed}
    _emit(out, args.out)
    return EXIT_OK if rep.ok() else 1


def cmd_table(args) -> int:
    res = tables.build(args.which, seed=args.seed, deriv_order=args.deriv_order)
    res["config"] = {"command": "table", "which": args.which, "seed": args.seed, "deriv_order": args.deriv_order}
    _emit(res, args.out)
    return EXIT_OK if res["ok"] else 1


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2, which is taken by "skipped"; usage errors are 4 here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="parallel-endo",
                                 description="Parallel endomorphisms of metric germs: classification and checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("classify", help="classify a germ file")
    p.add_argument("germ")
    p.add_argument("--deriv-order", type=int, default=None, help="covariant derivatives of R (default K-2)")
    p.add_argument("--samples", type=int, default=8)
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="run only the identity suites on a germ file")
    p.add_argument("germ")
    p.add_argument("--deriv-order", type=int, default=None)
    p.add_argument("--samples", type=int, default=8)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="generate a germ of a given type")
    p.add_argument("--label", required=True, help="(1), (1C), (2), (2'), (2C), (3), (3') or (3C)")
    p.add_argument("--signature", help="p,q")
    p.add_argument("--d", type=int)
    p.add_argument("--jet-order", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cartan", help="Cartan test for the omega_H system")
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--epsilon", type=int, default=-1, choices=[-1, 1])
    p.add_argument("--signature", help="p,q with p + q = delta (epsilon = -1)")
    p.add_argument("--complex", action="store_true")
    common(p)
    p.set_defaults(func=cmd_cartan)

    p = sub.add_parser("table", help="regenerate and check a structure table")
    p.add_argument("which", choices=["1", "2", "3", "types_row"])
    p.add_argument("--deriv-order", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_table)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    try:
        return args.func(args)
    except (GermError, OrderError) as exc:
        msg = str(exc)
        if not msg.startswith("invalid germ") and not msg.startswith("malformed"):
            msg = "invalid germ: " + msg
        print(msg, file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, CartanError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
