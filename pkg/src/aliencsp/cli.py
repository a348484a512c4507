"""Command-line interface: ``aliencsp <command> [options]``, JSON on stdout.

Exit status 0 on success, 2 on bad input (including failed preconditions),
3 when a search budget runs out.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import serialize
from .algebra import compute_core, ppdef_check
from .alien import classify_boolean, solve_alien_auto, solve_alien_fpt
from .equality import INF, classify_equality, eq_compute_c, neq_witness_search
from .errors import AlienCSPError, BudgetExceeded, FormatError
from .reductions import equiv_via_impl, impl_via_redundant, is_redundant, redundant_to_alien
from .solvers import DEFAULT_NODE_BUDGET, solve_bruteforce

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, ensure_ascii=False) + "\n")


def _instance(path):
    return serialize.load_instance(path)


def _structure(path):
    return serialize.load_structure(path)


def _eq_language(path):
    return serialize.eq_language_from_json(serialize.load_json(path), str(path))


def cmd_solve(args):
    inst = _instance(args.instance)
    _emit(solve_bruteforce(inst, budget=args.budget_nodes).to_json())


def cmd_solve_alien(args):
    inst = _instance(args.instance)
    if args.strategy == "fpt":
        res = solve_alien_fpt(inst, base_solver=lambda leaf: solve_bruteforce(leaf, budget=args.budget_nodes))
    else:
        res = solve_alien_auto(inst, budget=args.budget_nodes)
    out = res.to_json()
    out["strategy"] = res.strategy
    out["k"] = inst.k
    if "leaves" in res.stats:
        out["leaves"] = res.stats["leaves"]
    _emit(out)


def cmd_classify_boolean(args):
    _emit(classify_boolean(_structure(args.base), _structure(args.alien)).to_json())


def cmd_classify_equality(args):
    verdict = classify_equality(
        _eq_language(args.base), _eq_language(args.alien), args.nmax, args.mmax, args.budget_nodes
    )
    _emit(verdict.to_json())


def cmd_core(args):
    core, e = compute_core(_structure(args.base))
    _emit({"core": serialize.structure_to_json(core), "endomorphism": list(e.table)})


def cmd_redundant(args):
    inst = _instance(args.instance)
    solver = lambda i: solve_bruteforce(i, budget=args.budget_nodes)  # noqa: E731
    out = {"redundant": is_redundant(inst, args.constraint, solver)}
    if args.emit_instance:
        out["alien_instance"] = serialize.instance_to_json(redundant_to_alien(inst, args.constraint))
    _emit(out)


def _oracle(args):
    solver = lambda i: solve_bruteforce(i, budget=args.budget_nodes)  # noqa: E731
    return lambda inst, idx: is_redundant(inst, idx, solver)


def cmd_implies(args):
    i1, i2 = _instance(args.instance), _instance(args.other)
    _emit({"implies": impl_via_redundant(i1, i2, _oracle(args))})


def cmd_equiv(args):
    i1, i2 = _instance(args.instance), _instance(args.other)
    impl = lambda a, b: impl_via_redundant(a, b, _oracle(args))  # noqa: E731
    _emit({"equivalent": equiv_via_impl(i1, i2, impl)})


def cmd_ppdef_check(args):
    s = _structure(args.base)
    doc = serialize.load_json(args.relation)
    domain = list(s.labels) if s.labels is not None else s.domain_size
    r = serialize.relation_from_json(doc, domain, str(args.relation))
    res = ppdef_check(r, s, budget=args.budget_nodes)
    out = {"definable": res.definable}
    if res.certificate is not None:
        out["certificate"] = {"arity": res.certificate.arity, "table": list(res.certificate.table)}
    _emit(out)


def cmd_compute_c(args):
    c = eq_compute_c(_eq_language(args.base))
    _emit({"c": "inf" if c == INF else c})


def cmd_witness_search(args):
    base = _eq_language(args.base) if args.base else {}
    res = neq_witness_search(base, _eq_language(args.alien), args.k, args.c, args.nmax, args.mmax, args.budget_nodes)
    _emit(res.to_json())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aliencsp", description="CSPs with alien constraints")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--format", choices=["json"], default="json", help="output format")
        return sp

    def budget(sp, default):
        sp.add_argument("--budget-nodes", type=int, default=default, help=f"search budget (default {default})")

    sp = command("solve", cmd_solve, "decide an instance by backtracking")
    sp.add_argument("--instance", required=True, type=Path)
    budget(sp, DEFAULT_NODE_BUDGET)

    sp = command("solve-alien", cmd_solve_alien, "solve an instance with alien constraints")
    sp.add_argument("--instance", required=True, type=Path)
    sp.add_argument("--strategy", choices=["auto", "fpt"], default="auto")
    budget(sp, DEFAULT_NODE_BUDGET)

    sp = command("classify-boolean", cmd_classify_boolean, "complexity of Alien(A, B) over {0,1}")
    sp.add_argument("--base", required=True, type=Path)
    sp.add_argument("--alien", required=True, type=Path)

    sp = command("classify-equality", cmd_classify_equality, "complexity of Alien(A, B) for equality languages")
    sp.add_argument("--base", required=True, type=Path)
    sp.add_argument("--alien", required=True, type=Path)
    sp.add_argument("--nmax", type=int, default=None, help="witness search: most variables")
    sp.add_argument("--mmax", type=int, default=None, help="witness search: most constraints")
    budget(sp, 200_000)

    sp = command("core", cmd_core, "core of a structure")
    sp.add_argument("--base", required=True, type=Path)

    sp = command("redundant", cmd_redundant, "is a constraint redundant")
    sp.add_argument("--instance", required=True, type=Path)
    sp.add_argument("--constraint", required=True, type=int, help="0-based constraint index")
    sp.add_argument("--emit-instance", action="store_true", help="also print the alien instance used")
    budget(sp, DEFAULT_NODE_BUDGET)

    sp = command("implies", cmd_implies, "does --instance imply --other")
    sp.add_argument("--instance", required=True, type=Path)
    sp.add_argument("--other", required=True, type=Path)
    budget(sp, DEFAULT_NODE_BUDGET)

    sp = command("equiv", cmd_equiv, "are two instances equivalent")
    sp.add_argument("--instance", required=True, type=Path)
    sp.add_argument("--other", required=True, type=Path)
    budget(sp, DEFAULT_NODE_BUDGET)

    sp = command("ppdef-check", cmd_ppdef_check, "is a relation pp-definable in a structure")
    sp.add_argument("--base", required=True, type=Path)
    sp.add_argument("--relation", required=True, type=Path)
    budget(sp, 10**6)

    sp = command("compute-c", cmd_compute_c, "threshold c of an equality language")
    sp.add_argument("--base", required=True, type=Path)

    sp = command("witness-search", cmd_witness_search, "bounded search for a pp-definition of NEQ_c")
    sp.add_argument("--base", type=Path, default=None, help="base equality language (default empty)")
    sp.add_argument("--alien", required=True, type=Path)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--c", type=int, required=True)
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--mmax", type=int, default=None)
    budget(sp, 200_000)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    for name in ("budget_nodes", "k", "c", "nmax", "mmax"):
        value = getattr(args, name, None)
        if value is not None and value < (0 if name == "k" else 1):
            print(f"error: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_INPUT
    try:
        args.func(args)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AlienCSPError, IndexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
