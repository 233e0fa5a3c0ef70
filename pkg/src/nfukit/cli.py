"""Command-line front end; every subcommand wraps one library operation.

Output is JSON (sorted keys, two-space indent) except where a plain string
or the indented tree form is the documented format.  Exit codes: 0 for a
completed run, including audits that report failures; 1 for domain errors
such as invariant violations; 2 for usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import amodels, formulas, qmodel, ramsey, setcode, termmodel


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part != ""]


def _str_list(text: str) -> list[str]:
    return [part for part in text.split(",") if part != ""]


# ---------------------------------------------------------------------------
# stratify / comprehend


def cmd_stratify(args) -> int:
    phi = formulas.parse_formula(args.formula)
    result = formulas.stratify(phi)
    if isinstance(result, formulas.Stratification):
        _emit({"stratified": True, "assignment": result.assignment})
    else:
        _emit({"stratified": False, "cycle": [list(edge) for edge in result.cycle]})
    return 0


def cmd_comprehend(args) -> int:
    phi = formulas.parse_formula(args.phi)
    params = _str_list(args.params) if args.params else []
    instance = formulas.comprehension_axiom(phi, params)
    _emit({"axiom": formulas.to_text(instance)})
    return 0


# ---------------------------------------------------------------------------
# set


def cmd_set(args) -> int:
    if args.action == "ord":
        graph = setcode.ordinal_code(args.n, cap=args.cap)
        _emit(setcode.graph_to_json(graph))
        return 0
    g1 = setcode.graph_from_json(_load_json(args.graph))
    if args.action == "validate":
        flags = setcode.validate(g1)
        _emit(
            {
                "extensional": flags.extensional,
                "well_founded": flags.well_founded,
                "topped": flags.topped,
            }
        )
    elif args.action == "collapse":
        print(setcode.collapse(g1))
    elif args.action == "t":
        _emit(setcode.graph_to_json(setcode.usc_T(g1)))
    elif args.action == "decode":
        _emit({"ordinal": setcode.decode_ordinal(g1)})
    elif args.action in ("iso", "e"):
        g2 = setcode.graph_from_json(_load_json(args.other))
        if args.action == "iso":
            _emit({"isomorphic": setcode.iso_eq(g1, g2)})
        else:
            _emit(setcode.e_rel_report(g1, g2, cap=args.cap))
    return 0


# ---------------------------------------------------------------------------
# q


def cmd_q(args) -> int:
    base = qmodel.base_from_json(_load_json(args.base))
    if args.action == "criterion1":
        _emit({"holds": qmodel.criterion1_check(base, _str_list(args.chain))})
        return 0
    if args.action == "code":
        target = _str_list(args.target) if args.target else []
        _emit({"witness": qmodel.coded_subsets_report(base, target)})
        return 0
    q = qmodel.build_q(base)
    if args.action == "build":
        _emit(
            {
                "domain": list(q.domain),
                "setness": {x: q.setness[x] for x in sorted(q.setness)},
                "membership": sorted([list(e) for e in q.q_edges]),
                "pairs": {
                    f"{a},{b}": list(zs) for (a, b), zs in sorted(q.pairs.items())
                },
            }
        )
    elif args.action == "audit-ext":
        _emit(qmodel.audit_extensionality(q))
    elif args.action == "audit-pair":
        _emit(qmodel.audit_pairing(q))
    elif args.action == "comprehension":
        phi = formulas.parse_formula(args.phi)
        env = json.loads(args.env) if args.env else {}
        _emit({"witness": qmodel.audit_comprehension(q, phi, env)})
    return 0


# ---------------------------------------------------------------------------
# limit


def cmd_limit(args) -> int:
    if args.action == "check" and args.random:
        rng = random.Random(args.seed)
        failures = []
        for index in range(args.random):
            diagram = amodels.random_diagram(rng)
            report = amodels.validate_diagram(diagram, depth=args.depth)
            limit, cocone = amodels.direct_limit(diagram)
            oracle = amodels.oracle_limit(diagram)
            if not (report["pass"] and amodels.amodel_isomorphic(limit, oracle)):
                failures.append(index)
        _emit({"checked": args.random, "failures": failures, "pass": not failures})
        return 0
    diagram = amodels.diagram_from_json(_load_json(args.diagram))
    if args.action == "compute":
        limit, cocone = amodels.direct_limit(diagram)
        _emit(
            {
                "limit": amodels.amodel_to_json(limit),
                "cocone": {str(a): m for a, m in sorted(cocone.items())},
            }
        )
    elif args.action == "check":
        _emit(amodels.validate_diagram(diagram, depth=args.depth))
    elif args.action == "oracle":
        _emit({"limit": amodels.amodel_to_json(amodels.oracle_limit(diagram))})
    return 0


# ---------------------------------------------------------------------------
# ramsey


def cmd_ramsey(args) -> int:
    if args.action == "tree":
        family = ramsey.family_from_json(_load_json(args.family))
        members = _int_list(args.set) if args.set else list(range(len(family.gammas)))
        tree, thinned = ramsey.basic_module(members, family)
        print(ramsey.render_assignment_tree(tree))
        _emit({"thinned": list(thinned)})
    elif args.action == "levels":
        data = _load_json(args.families)
        families = [ramsey.family_from_json(f) for f in data]
        spread = tuple(_int_list(args.spread)) if args.spread else None
        levels = ramsey.length_construction(
            ramsey.ScaleContext(args.K), families, len(families), spread_thin=spread
        )
        _emit(ramsey.levels_to_json(levels))
    elif args.action == "partition":
        coloring = ramsey.coloring_from_json(_load_json(args.coloring))
        if args.levels:
            levels = ramsey.levels_from_json(_load_json(args.levels))
        else:
            levels = ramsey.prepare_levels([(coloring, args.arity, args.gamma)], args.K)
        cert = ramsey.partition_find(coloring, args.arity, args.gamma, levels)
        if cert is None:
            _emit({"certificate": None, "insufficient": True})
        else:
            verified = ramsey.verify_partition_certificate(
                coloring, args.arity, levels, cert
            )
            _emit(
                {
                    "certificate": {"m": cert.m, "G": list(cert.G), "eta": cert.eta},
                    "verified": verified,
                }
            )
    elif args.action == "measure":
        levels = ramsey.levels_from_json(_load_json(args.levels))
        value = ramsey.nu_measure(_int_list(args.subset), levels, min_tail=args.min_tail)
        _emit({"measure": value if value is not None else "undefined"})
    elif args.action == "validate-tree":
        _emit(ramsey.tree_validators(_load_json(args.tree), args.K))
    return 0


# ---------------------------------------------------------------------------
# term


def _levels_for(args, colorings):
    if args.levels:
        return ramsey.levels_from_json(_load_json(args.levels))
    K = args.K
    if K is None:
        raise termmodel.TermModelError("need either --levels or -K to prepare levels")
    return ramsey.prepare_levels(colorings, K)


def cmd_term(args) -> int:
    if args.action == "eval":
        func = termmodel.function_from_json(_load_json(args.function))
        point = _load_json(args.point)
        wp = termmodel.window_point(point["lo"], point["hi"], point["values"])
        _emit({"value": termmodel.eval_supported(func, wp)})
    elif args.action == "shift":
        func = termmodel.function_from_json(_load_json(args.function))
        _emit(termmodel.function_to_json(termmodel.shift_K(func)))
    elif args.action == "equiv":
        f1 = termmodel.function_from_json(_load_json(args.f1))
        f2 = termmodel.function_from_json(_load_json(args.f2))
        K = args.K
        coloring, n = termmodel.agreement_coloring(f1, f2, K) if K else (None, None)
        levels = _levels_for(args, [(coloring, n, 2)] if coloring and n else [])
        _emit({"verdict": termmodel.verdict_string(termmodel.equiv(f1, f2, levels))})
    elif args.action == "rel":
        funcs = [termmodel.function_from_json(_load_json(p)) for p in args.functions]
        K = args.K
        if K:
            coloring, n = termmodel.relation_coloring(args.name, funcs, K)
            needed = [(coloring, n, 2)] if n else []
        else:
            needed = []
        levels = _levels_for(args, needed)
        _emit(
            {
                "verdict": termmodel.verdict_string(
                    termmodel.relation_holds(args.name, funcs, levels)
                )
            }
        )
    elif args.action == "support":
        func = termmodel.function_from_json(_load_json(args.function))
        window = tuple(_int_list(args.window))
        if args.levels:
            levels = ramsey.levels_from_json(_load_json(args.levels))
        else:
            if args.K is None:
                raise termmodel.TermModelError("need either --levels or -K")
            seed_levels = ramsey.LevelSequence(
                K=args.K, B=(tuple(range(args.K)),), families=()
            )
            levels = ramsey.prepare_levels(
                termmodel.block_support_colorings(func, seed_levels, window), args.K
            )
        block = termmodel.min_block_support(func, levels, window)
        _emit({"block": list(block) if block else []})
    elif args.action == "jprime":
        func = termmodel.function_from_json(_load_json(args.function))
        base = qmodel.base_from_json(_load_json(args.base))
        _emit(termmodel.function_to_json(termmodel.compose_jprime(func, base.j)))
    elif args.action == "code":
        amodel = amodels.amodel_from_json(_load_json(args.amodel))
        subset = _str_list(args.subset) if args.subset else []
        func = termmodel.code_subset(subset, amodel, args.K)
        _emit(termmodel.function_to_json(func))
    return 0


# ---------------------------------------------------------------------------
# Argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nfukit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stratify", help="level-check a formula")
    p.add_argument("formula")
    p.set_defaults(func=cmd_stratify)

    p = sub.add_parser("comprehend", help="emit a set-existence instance")
    p.add_argument("--phi", required=True)
    p.add_argument("--params", default="")
    p.set_defaults(func=cmd_comprehend)

    p = sub.add_parser("set", help="pointed-digraph set codes")
    p.add_argument("action", choices=["validate", "collapse", "iso", "e", "t", "ord", "decode"])
    p.add_argument("graph", nargs="?", help="graph JSON path (or ordinal for 'ord')")
    p.add_argument("other", nargs="?", help="second graph JSON path for iso/e")
    p.add_argument("--cap", type=int, default=setcode.DEFAULT_EMBED_CAP)
    p.set_defaults(func=_dispatch_set)

    p = sub.add_parser("q", help="derived membership model")
    p.add_argument("action", choices=["build", "audit-ext", "audit-pair", "comprehension", "criterion1", "code"])
    p.add_argument("base", help="base structure JSON path")
    p.add_argument("--phi")
    p.add_argument("--env")
    p.add_argument("--chain", default="")
    p.add_argument("--target", default="")
    p.set_defaults(func=cmd_q)

    p = sub.add_parser("limit", help="chains and direct limits")
    p.add_argument("action", choices=["compute", "check", "oracle"])
    p.add_argument("diagram", nargs="?", help="diagram JSON path")
    p.add_argument("--depth", type=int, default=0)
    p.add_argument("--random", type=int, default=0, help="check this many random diagrams instead")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("ramsey", help="tree assignment and partition machinery")
    p.add_argument("action", choices=["tree", "levels", "partition", "measure", "validate-tree"])
    p.add_argument("--family", help="single coloring family JSON path")
    p.add_argument("--families", help="list-of-families JSON path")
    p.add_argument("--set", default="", help="comma-separated subset for 'tree'")
    p.add_argument("--coloring", help="coloring JSON path")
    p.add_argument("--arity", type=int, default=1)
    p.add_argument("--gamma", type=int, default=2)
    p.add_argument("--levels", help="level sequence JSON path")
    p.add_argument("--subset", default="")
    p.add_argument("--min-tail", type=int, default=2, dest="min_tail")
    p.add_argument("--tree", help="tree presentation JSON path")
    p.add_argument("--spread", default="", help="gap table for optional thinning")
    p.add_argument("-K", type=int, default=8)
    p.set_defaults(func=cmd_ramsey)

    p = sub.add_parser("term", help="supported functions")
    p.add_argument("action", choices=["eval", "equiv", "rel", "shift", "support", "jprime", "code"])
    p.add_argument("--function")
    p.add_argument("--point")
    p.add_argument("--f1")
    p.add_argument("--f2")
    p.add_argument("--functions", nargs="*", default=[])
    p.add_argument("--name", default="=")
    p.add_argument("--levels")
    p.add_argument("--window", default="")
    p.add_argument("--base")
    p.add_argument("--amodel")
    p.add_argument("--subset", default="")
    p.add_argument("-K", type=int)
    p.set_defaults(func=cmd_term)

    return parser


def _dispatch_set(args) -> int:
    if args.action == "ord":
        if args.graph is None:
            raise formulas.ParseError("ord needs an integer argument", 0)
        args.n = int(args.graph)
    elif args.graph is None:
        raise formulas.ParseError("missing graph path", 0)
    if args.action in ("iso", "e") and args.other is None:
        raise formulas.ParseError("iso/e need two graph paths", 0)
    return cmd_set(args)


USAGE_ERRORS = (formulas.ParseError, json.JSONDecodeError, FileNotFoundError)
DOMAIN_ERRORS = (
    formulas.NotStratifiedError,
    setcode.GraphError,
    setcode.InvalidCodeError,
    qmodel.BaseStructureError,
    qmodel.UnboundVariableError,
    amodels.DiagramError,
    ramsey.RamseyError,
    termmodel.TermModelError,
    ValueError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as err:
        print(json.dumps({"error": str(err)}), file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as err:
        print(json.dumps({"error": str(err)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
