"""Command-line frontend: validation, solvers, generators, oracles.

All reports are JSON on standard output with rationals rendered as
"num/den" strings; identical inputs and flags produce byte-identical reports.
Exit codes: 0 success, 1 validation error, 2 capacity error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import agent, correlated, generators, linear, oracle
from .general import payment_bound, solve_general
from .model import (
    CapacityError,
    Contract,
    Instance,
    ValidationError,
    contract_from_doc,
    contract_to_doc,
    format_rational,
    instance_digest,
    instance_to_doc,
    parse_rational,
    validate_instance,
)

__all__ = ["RunConfig", "main", "run"]

USAGE_EXIT = 64


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs: subcommand, paths, budgets, knobs."""

    subcommand: str
    instance_path: Optional[str] = None
    contract_path: Optional[str] = None
    family: Optional[str] = None
    convert_kind: Optional[str] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    budget_vertices: int = 3_000_000
    budget_oracle: int = oracle.DEFAULT_ORACLE_BUDGET
    grid_step: Optional[Fraction] = None
    seed: int = 0
    approx: bool = False
    n: Optional[int] = None
    m: Optional[int] = None
    k: Optional[int] = None
    eps: Optional[Fraction] = None
    gamma: Optional[Fraction] = None
    multiset: Optional[tuple[Fraction, ...]] = None

    def __post_init__(self) -> None:
        if self.budget_vertices <= 0 or self.budget_oracle <= 0:
            raise ValidationError("budgets must be positive")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _load_json(path: str) -> object:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _load_instance(path: str) -> Instance:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ValidationError("instance document must be a JSON object")
    instance, _ = validate_instance(doc)
    return instance


def _load_contract(path: str, inst: Instance) -> Contract:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ValidationError("contract document must be a JSON object")
    contract = contract_from_doc(doc)
    if contract.m != inst.m:
        raise ValidationError("contract and instance outcome counts differ")
    return contract


def _emit(report: dict, config: RunConfig) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _approx(value: Fraction) -> float:
    return float(value)


def _cmd_validate(config: RunConfig) -> dict:
    doc = _load_json(config.instance_path)
    if not isinstance(doc, dict):
        raise ValidationError("instance document must be a JSON object")
    instance, order = validate_instance(doc)
    return {
        "valid": True,
        "n": instance.n,
        "m": instance.m,
        "outcome_order": [j + 1 for j in order],
        "instance": instance_to_doc(instance),
        "instance_digest": instance_digest(instance),
    }


def _cmd_best_response(config: RunConfig) -> dict:
    inst = _load_instance(config.instance_path)
    contract = _load_contract(config.contract_path, inst)
    strategy = agent.best_response(inst, contract)
    ev = agent.evaluate_strategy(inst, contract, strategy)
    report = {
        "strategy": agent.strategy_to_doc(strategy),
        "agent_utility": format_rational(ev.agent_utility),
        "principal_utility": format_rational(ev.principal_utility),
        "outcome_mass": [format_rational(x) for x in ev.distribution.mass],
        "take_probability": [format_rational(x) for x in ev.take_probability],
        "instance_digest": instance_digest(inst),
    }
    if config.approx:
        report["approx"] = {
            "agent_utility": _approx(ev.agent_utility),
            "principal_utility": _approx(ev.principal_utility),
        }
    return report


def _cmd_eval(config: RunConfig) -> dict:
    inst = _load_instance(config.instance_path)
    contract = _load_contract(config.contract_path, inst)
    utility, strategy = agent.principal_utility(inst, contract)
    ev = agent.evaluate_strategy(inst, contract, strategy)
    report = {
        "utility": format_rational(utility),
        "agent_utility": format_rational(ev.agent_utility),
        "strategy": agent.strategy_to_doc(strategy),
        "instance_digest": instance_digest(inst),
    }
    if config.approx:
        report["approx"] = {"utility": _approx(utility)}
    return report


def _cmd_solve_linear(config: RunConfig) -> dict:
    inst = _load_instance(config.instance_path)
    report_data = linear.scan_linear(inst)
    best = report_data.best()
    report = {
        "alpha": format_rational(best.alpha),
        "utility": format_rational(best.utility),
        "strategy": agent.strategy_to_doc(best.strategy),
        "candidates": [
            {"alpha": format_rational(ev.alpha), "utility": format_rational(ev.utility)}
            for ev in report_data.evaluations
        ],
        "instance_digest": instance_digest(inst),
    }
    if config.approx:
        report["approx"] = {"alpha": _approx(best.alpha), "utility": _approx(best.utility)}
    return report


def _cmd_solve_general(config: RunConfig) -> dict:
    inst = _load_instance(config.instance_path)
    solution = solve_general(inst, vertex_budget=config.budget_vertices)
    report = {
        "contract": contract_to_doc(solution.contract),
        "utility": format_rational(solution.utility),
        "strategy": agent.strategy_to_doc(solution.strategy),
        "vertex_count": solution.vertex_count,
        "hyperplane_counts": dict(solution.hyperplane_counts),
        "payment_bound": format_rational(payment_bound(inst)),
        "instance_digest": instance_digest(inst),
    }
    if config.approx:
        report["approx"] = {"utility": _approx(solution.utility)}
    return report


def _cmd_oracle(config: RunConfig) -> dict:
    inst = _load_instance(config.instance_path)
    if config.grid_step is not None:
        contract, utility = oracle.grid_search_general(inst, step=config.grid_step)
        return {
            "mode": "grid",
            "grid_step": format_rational(config.grid_step),
            "contract": contract_to_doc(contract),
            "utility": format_rational(utility),
            "instance_digest": instance_digest(inst),
        }
    if config.contract_path is None:
        alpha, utility = oracle.oracle_best_linear(inst, budget=config.budget_oracle)
        return {
            "mode": "linear",
            "alpha": format_rational(alpha),
            "utility": format_rational(utility),
            "instance_digest": instance_digest(inst),
        }
    contract = _load_contract(config.contract_path, inst)
    report = oracle.oracle_best_response(
        inst, contract, budget=config.budget_oracle, max_materialized=200
    )
    return {
        "mode": "best-response",
        "best_agent_utility": format_rational(report.best_agent_utility),
        "principal_value": format_rational(report.principal_value),
        "principal_strategy": agent.strategy_to_doc(report.principal_strategy),
        "maximizer_count": report.maximizer_count,
        "maximizers": [agent.strategy_to_doc(s) for s in report.maximizers],
        "maximizers_truncated": report.maximizers_truncated,
        "instance_digest": instance_digest(inst),
    }


def _meta(**fields: object) -> dict:
    return {key: value for key, value in fields.items() if value is not None}


def _cmd_gen(config: RunConfig) -> dict:
    family = config.family
    if family == "partition":
        multiset = config.multiset
        if multiset is None:
            raise ValidationError("gen partition requires --a (comma-separated rationals)")
        inst, params = generators.gen_partition_reduction(multiset)
        doc = instance_to_doc(inst)
        doc["meta"] = _meta(
            family="partition",
            a=[format_rational(x) for x in params.a],
            epsilon=format_rational(params.epsilon),
            q=format_rational(params.q),
            c=format_rational(params.c),
            quadratic_residual=format_rational(params.residual),
        )
        return doc
    if family == "gap":
        if config.n is None:
            raise ValidationError("gen gap requires --n")
        inst = generators.gen_gap_instance(config.n)
        doc = instance_to_doc(inst)
        meta = _meta(family="gap", n=config.n)
        if config.eps is not None:
            companion = generators.gap_general_contract(config.n, config.eps)
            meta["companion_contract"] = contract_to_doc(companion)
            meta["eps"] = format_rational(config.eps)
        doc["meta"] = meta
        return doc
    if family == "critpoints":
        if config.m is None:
            raise ValidationError("gen critpoints requires --m")
        inst = generators.gen_critpoints_instance(config.m)
        doc = instance_to_doc(inst)
        doc["meta"] = _meta(family="critpoints", m=config.m)
        return doc
    if family == "superpoly":
        if config.n is None or config.m is None:
            raise ValidationError("gen superpoly requires --n and --m")
        fam = generators.gen_superpoly_instance(config.n, config.m)
        doc = instance_to_doc(fam.instance)
        doc["meta"] = _meta(
            family="superpoly",
            n=config.n,
            m=config.m,
            ell=fam.ell,
            action_labels=[
                None if label is None else list(label) for label in fam.labels
            ],
        )
        return doc
    if family == "random":
        if config.n is None or config.m is None:
            raise ValidationError("gen random requires --n and --m")
        inst = generators.gen_random_instance(config.n, config.m, config.seed)
        doc = instance_to_doc(inst)
        doc["meta"] = _meta(family="random", n=config.n, m=config.m, seed=config.seed)
        return doc
    if family == "correlated-hardness":
        if config.k is None:
            raise ValidationError("gen correlated-hardness requires --k")
        gamma = config.gamma if config.gamma is not None else Fraction(1, 2)
        k = config.k
        universe = tuple(f"u{i + 1}" for i in range(k))
        weights = tuple(Fraction(1, k) for _ in range(k))
        actions = tuple(f"a{i + 1}" for i in range(k))
        cover = tuple(frozenset({i}) for i in range(k))
        fprime = correlated.CoverageFunction(universe, weights, actions, cover)
        ci = correlated.hardness_reduction(fprime, k, gamma)
        doc = correlated.correlated_instance_to_doc(ci)
        doc["meta"] = _meta(
            family="correlated-hardness", k=k, gamma=format_rational(gamma)
        )
        return doc
    raise ValidationError(f"unknown generator family {family!r}")


def _cmd_convert(config: RunConfig) -> dict:
    doc = _load_json(config.input_path)
    if not isinstance(doc, dict):
        raise ValidationError("conversion input must be a JSON object")
    kind = config.convert_kind
    if kind == "coverage":
        f, _ = correlated.coverage_from_doc(doc)
        joint = correlated.coverage_to_bernoulli(f)
        return {
            "kind": "bernoulli",
            "actions": list(joint.actions),
            "support": [
                {"vector": list(vector), "prob": format_rational(p)}
                for vector, p in zip(joint.support, joint.pdf)
            ],
        }
    if kind == "bernoulli":
        joint = _bernoulli_from_doc(doc)
        f = correlated.bernoulli_to_coverage(joint)
        result = correlated.coverage_to_doc(f)
        result["kind"] = "coverage"
        return result
    if kind == "corrmax":
        joint = _corrmax_from_doc(doc)
        f = correlated.corrmax_to_coverage(joint)
        result = correlated.coverage_to_doc(f)
        result["kind"] = "coverage"
        return result
    raise ValidationError(f"unknown conversion kind {kind!r}")


def _bernoulli_from_doc(doc: dict) -> correlated.BernoulliJoint:
    for key in ("actions", "support"):
        if key not in doc:
            raise ValidationError(f"bernoulli document is missing {key!r}")
    actions = tuple(str(a) for a in doc["actions"])
    support = []
    pdf = []
    for entry in doc["support"]:
        if not isinstance(entry, dict) or "vector" not in entry or "prob" not in entry:
            raise ValidationError("support entries need 'vector' and 'prob'")
        support.append(tuple(int(v) for v in entry["vector"]))
        pdf.append(parse_rational(entry["prob"]))
    return correlated.BernoulliJoint(actions, tuple(support), tuple(pdf))


def _corrmax_from_doc(doc: dict) -> correlated.ValueJoint:
    for key in ("actions", "support"):
        if key not in doc:
            raise ValidationError(f"corrmax document is missing {key!r}")
    actions = tuple(str(a) for a in doc["actions"])
    support = []
    pdf = []
    for entry in doc["support"]:
        if not isinstance(entry, dict) or "values" not in entry or "prob" not in entry:
            raise ValidationError("support entries need 'values' and 'prob'")
        support.append(tuple(parse_rational(v) for v in entry["values"]))
        pdf.append(parse_rational(entry["prob"]))
    return correlated.ValueJoint(actions, tuple(support), tuple(pdf))


_HANDLERS = {
    "validate": _cmd_validate,
    "best-response": _cmd_best_response,
    "eval": _cmd_eval,
    "solve-linear": _cmd_solve_linear,
    "solve-general": _cmd_solve_general,
    "gen": _cmd_gen,
    "oracle": _cmd_oracle,
    "convert": _cmd_convert,
}


def run(config: RunConfig) -> int:
    """Execute one subcommand; returns the process exit status."""
    try:
        report = _HANDLERS[config.subcommand](config)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except CapacityError as exc:
        sys.stderr.write(f"capacity error: {exc}\n")
        return 2
    _emit(report, config)
    return 0


def _add_common_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # The same flags are valid before and after the subcommand; the
    # after-subcommand copies default to SUPPRESS so they never clobber a
    # value given up front.
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--budget-vertices", type=int, default=default(3_000_000))
    parser.add_argument(
        "--budget-oracle", type=int, default=default(oracle.DEFAULT_ORACLE_BUDGET)
    )
    parser.add_argument("--grid-step", type=str, default=default(None))
    parser.add_argument("--seed", type=int, default=default(0))
    parser.add_argument(
        "--approx",
        action="store_const",
        const=True,
        default=default(False),
    )
    parser.add_argument("-o", "--output", type=str, default=default(None))


def _build_parser() -> _Parser:
    parser = _Parser(prog="seqcontract", description=__doc__)
    _add_common_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_common_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser(
        "validate", parents=[common], help="check and normalize an instance document"
    )
    p.add_argument("instance")
    p = sub.add_parser(
        "best-response", parents=[common], help="agent best response to a contract"
    )
    p.add_argument("instance")
    p.add_argument("contract")
    p = sub.add_parser("eval", parents=[common], help="principal utility of a contract")
    p.add_argument("instance")
    p.add_argument("contract")
    p = sub.add_parser("solve-linear", parents=[common], help="optimal linear contract")
    p.add_argument("instance")
    p = sub.add_parser(
        "solve-general", parents=[common], help="optimal general contract (small m)"
    )
    p.add_argument("instance")
    p = sub.add_parser(
        "oracle", parents=[common], help="brute-force oracles (needs small n, m)"
    )
    p.add_argument("instance")
    p.add_argument("contract", nargs="?", default=None)
    p = sub.add_parser("gen", parents=[common], help="emit a named instance family")
    p.add_argument(
        "family",
        choices=[
            "partition",
            "gap",
            "critpoints",
            "superpoly",
            "random",
            "correlated-hardness",
        ],
    )
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eps", type=str, default=None)
    p.add_argument("--gamma", type=str, default=None)
    p.add_argument("--a", dest="multiset", type=str, default=None)
    p = sub.add_parser(
        "convert", parents=[common], help="convert between set-function encodings"
    )
    p.add_argument("kind", choices=["coverage", "bernoulli", "corrmax"])
    p.add_argument("input")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    multiset = None
    if getattr(args, "multiset", None):
        multiset = tuple(
            parse_rational(part.strip()) for part in args.multiset.split(",")
        )
    return RunConfig(
        subcommand=args.subcommand,
        instance_path=getattr(args, "instance", None),
        contract_path=getattr(args, "contract", None),
        family=getattr(args, "family", None),
        convert_kind=getattr(args, "kind", None),
        input_path=getattr(args, "input", None),
        output_path=args.output,
        budget_vertices=args.budget_vertices,
        budget_oracle=args.budget_oracle,
        grid_step=parse_rational(args.grid_step) if args.grid_step else None,
        seed=args.seed,
        approx=args.approx,
        n=getattr(args, "n", None),
        m=getattr(args, "m", None),
        k=getattr(args, "k", None),
        eps=parse_rational(args.eps) if getattr(args, "eps", None) else None,
        gamma=parse_rational(args.gamma) if getattr(args, "gamma", None) else None,
        multiset=multiset,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
