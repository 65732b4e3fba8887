"""Command-line surface: telescoping, creative telescoping,
simplification, relation discovery, and oracle verification.

Each verb reads expression text (inline or from a file), prints a
human-readable identity, and emits a deterministic JSON certificate
(schema 1).  Exit codes: 0 success, 2 parse error, 3 scope violation
(input outside the supported class), 4 oracle failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from gmpy2 import mpq

from .expressions import parse, to_text, ParseError, ExprError
from .polys import PolyError
from .reduction import ScopeError
from .depthopt import ProductDependenceError
from .oracle import verify_identity, EvalError
from .frontend import (FrontendError, simplify, telescope,
                       creative_telescope, find_relations,
                       serialize_tower, elem_str)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SCOPE = 3
EXIT_ORACLE = 4

SCHEMA = 1


def _read_input(text):
    if os.path.isfile(text):
        with open(text) as fh:
            return fh.read().strip()
    return text


def _parse_range(text):
    a, b = text.split(":")
    return int(a), int(b)


def _parse_assigns(items):
    out = {}
    for item in items or []:
        name, _, val = item.partition("=")
        if not _ or not name:
            raise ValueError("assignments look like name=value")
        out[name] = mpq(Fraction(val))
    return out


def _identity_cert_json(verb, cert):
    return {
        "schema": SCHEMA,
        "verb": verb,
        "kind": cert.kind,
        "input": to_text(cert.input),
        "result": to_text(cert.result_expr),
        "element": elem_str(cert.elem, cert.session.tower),
        "tower": serialize_tower(cert.session.tower),
        "oracle": cert.oracle_report,
        "flags": {k: v for k, v in sorted(cert.flags.items())},
    }


def _recurrence_cert_json(cert):
    return {
        "schema": SCHEMA,
        "verb": "csum",
        "kind": "recurrence",
        "input": to_text(cert.input),
        "parameter": cert.param,
        "order": cert.order,
        "coefficients": [str(c) for c in cert.coeffs],
        "recurrence": cert.recurrence_text(),
        "rhs_formula": cert.rhs_formula,
        "rhs_values": {str(mu): str(v)
                       for mu, v in sorted(cert.rhs_values.items())},
        "certificate_element": elem_str(cert.g, cert.session.tower),
        "tower": serialize_tower(cert.session.tower),
        "oracle": cert.report,
        "flags": {k: v for k, v in sorted(cert.flags.items())},
    }


def _emit(doc, out, path):
    blob = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(blob + "\n")
    else:
        out.write(blob + "\n")


def _run_simplify(args, out, verb):
    expr = parse(_read_input(args.expr))
    fn = telescope if verb == "telescope" else simplify
    cert = fn(expr, rng=args.range, m_max=args.m_max,
              safety=args.safety, shortcuts=not args.no_shortcuts)
    out.write("%s = %s\n" % (to_text(cert.input),
                             to_text(cert.result_expr)))
    out.write("oracle: %s (%d points checked)\n"
              % ("pass" if cert.passed else "FAIL",
                 cert.oracle_report["checked"]))
    _emit(_identity_cert_json(verb, cert), out, args.output)
    return EXIT_OK if cert.passed else EXIT_ORACLE


def _run_csum(args, out):
    expr = parse(_read_input(args.expr))
    assigns = _parse_assigns(args.assign)
    cert = creative_telescope(
        expr, args.param, mode=args.mode, max_order=args.max_order,
        m_max=args.m_max, check=args.check, assignments=assigns,
        safety=args.safety, shortcuts=not args.no_shortcuts)
    if cert is None:
        sys.stderr.write("no recurrence of order <= %d found in %s "
                         "mode\n" % (args.max_order, args.mode))
        return EXIT_SCOPE
    out.write("recurrence (order %d): %s\n"
              % (cert.order, cert.recurrence_text()))
    out.write("oracle: %s (%d points checked)\n"
              % ("pass" if cert.passed else "FAIL",
                 cert.report["checked"]))
    _emit(_recurrence_cert_json(cert), out, args.output)
    return EXIT_OK if cert.passed else EXIT_ORACLE


def _run_relations(args, out):
    exprs = [parse(_read_input(t)) for t in args.exprs]
    certs, sess = find_relations(
        exprs, rng=args.range, m_max=args.m_max, mode=args.mode,
        safety=args.safety, shortcuts=not args.no_shortcuts)
    for cert in certs:
        out.write("[%s] %s = %s\n"
                  % (cert.kind, to_text(cert.input),
                     to_text(cert.result_expr)))
    out.write("depth profile: %s\n" % sess.depth_profile())
    doc = {
        "schema": SCHEMA,
        "verb": "relations",
        "certificates": [_identity_cert_json("relations", c)
                         for c in certs],
        "depth_profile": sess.depth_profile(),
        "tower": serialize_tower(sess.tower),
    }
    _emit(doc, out, args.output)
    if not certs:
        return EXIT_OK
    return EXIT_OK if all(c.passed for c in certs) else EXIT_ORACLE


def _run_verify(args, out):
    text = _read_input(args.identity)
    if "=" not in text:
        raise ParseError("verify expects an identity lhs = rhs", 0)
    lhs_text, _, rhs_text = text.partition("=")
    lhs = parse(lhs_text)
    rhs = parse(rhs_text)
    assigns = _parse_assigns(args.assign)
    report = verify_identity(lhs, rhs, rng=args.range,
                             assignments=[assigns] if assigns else None)
    doc = {"schema": SCHEMA, "verb": "verify", "oracle": report}
    if report["pass"]:
        out.write("oracle: pass (%d points checked)\n"
                  % report["checked"])
        _emit(doc, out, args.output)
        return EXIT_OK
    for f in report["failures"][:3]:
        out.write("counterexample: %s\n" % json.dumps(f, sort_keys=True))
    out.write("oracle: FAIL (%d failures)\n" % len(report["failures"]))
    _emit(doc, out, args.output)
    return EXIT_ORACLE


def _add_common(p):
    p.add_argument("--range", type=_parse_range, default=(1, 30),
                   metavar="A:B", help="oracle verification range")
    p.add_argument("--m-max", type=int,
                   default=int(os.environ.get("NESTSUM_M_MAX", "12")),
                   help="bound for the product-extension homogeneous "
                        "check (env NESTSUM_M_MAX)")
    p.add_argument("--safety", type=int, default=0,
                   help="extra slack added to solver degree bounds")
    p.add_argument("--no-shortcuts", action="store_true",
                   help="disable generator reuse by defining element")
    p.add_argument("-o", "--output", metavar="PATH",
                   help="write the JSON certificate to PATH instead "
                        "of stdout")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="nestsum",
        description="telescoping and simplification of nested sums in "
                    "towers of difference-field extensions")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("telescope", help="telescope a single sum")
    p.add_argument("expr", help="sum expression or file")
    _add_common(p)

    p = sub.add_parser("simplify",
                       help="depth-minimal form of an expression")
    p.add_argument("expr", help="expression or file")
    _add_common(p)

    p = sub.add_parser("csum", help="recurrence in a parameter for a "
                                    "definite sum")
    p.add_argument("expr", help="sum expression or file")
    p.add_argument("--param", required=True,
                   help="recurrence parameter (the sum's upper bound)")
    p.add_argument("--mode", choices=("refined", "naive"),
                   default="refined")
    p.add_argument("--max-order", type=int, default=5)
    p.add_argument("--check", type=_parse_range, default=(0, 25),
                   metavar="A:B", help="parameter range for replay")
    p.add_argument("--assign", action="append", metavar="NAME=VALUE",
                   help="value for each extra parameter")
    _add_common(p)

    p = sub.add_parser("relations",
                       help="relations among sums registered in one "
                            "shared tower")
    p.add_argument("exprs", nargs="+", help="sum expressions or files")
    p.add_argument("--mode", choices=("refined", "naive"),
                   default="refined")
    _add_common(p)

    p = sub.add_parser("verify", help="oracle-check an identity "
                                      "lhs = rhs")
    p.add_argument("identity", help="identity text or file")
    p.add_argument("--assign", action="append", metavar="NAME=VALUE",
                   help="parameter assignment for the check")
    _add_common(p)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = sys.stdout
    t0 = time.time()
    try:
        if args.verb in ("telescope", "simplify"):
            code = _run_simplify(args, out, args.verb)
        elif args.verb == "csum":
            code = _run_csum(args, out)
        elif args.verb == "relations":
            code = _run_relations(args, out)
        else:
            code = _run_verify(args, out)
    except ParseError as exc:
        pos = exc.args[1] if len(exc.args) > 1 else "?"
        sys.stderr.write("parse error at position %s: %s\n"
                         % (pos, exc.args[0]))
        return EXIT_PARSE
    except (ExprError, ValueError) as exc:
        sys.stderr.write("parse error: %s\n" % exc)
        return EXIT_PARSE
    except (FrontendError, ScopeError, EvalError, PolyError,
            ProductDependenceError) as exc:
        sys.stderr.write("scope error: %s\n" % exc)
        return EXIT_SCOPE
    finally:
        sys.stderr.write("elapsed: %.2fs\n" % (time.time() - t0))
    return code


if __name__ == "__main__":
    sys.exit(main())
