"""Batch command-line surface.

Every command reads UTF-8 JSON files, prints one canonical JSON report
to stdout (sorted keys, stable ordering end to end), and exits 0 on a
clean verdict, 2 on a refutation or failure that carries a certificate,
and 1 on file, parse, or usage errors.  Reports are byte-identical for
identical inputs; wall-clock timing is only added under --timing since
it would break that guarantee.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import __version__
from .axioms import reevaluate
from .categorize import (
    Decomposition,
    Partition,
    WeakDecomposition,
    coarsest_partition,
    compose,
    decompose,
    decompose_weak,
    enumerate_categories,
    partition_poset,
)
from .core import StochasticChoice, ZERO, canon_menu, parse_probability, validate_dataset
from .errors import ChoiceError, DatasetFormatError
from .models import (
    NestSpec,
    WeightFamilySpec,
    classify,
    luce_choice,
    nested_choice,
    weighted_two_stage,
)
from .population import (
    PopulationDistribution,
    ResolvableChoice,
    enumerate_resolvable,
    induce_choice,
    population_from_decomposition,
    resolvable_count,
    solve_population,
)
from .rum import check_local_rationalizability, check_rum

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REFUTED = 2


def _sha256(path: Path) -> str:
    try:
        return hashlib.sha256(path.read_bytes()).hexdigest()
    except OSError as exc:
        raise DatasetFormatError(f"cannot read {path}: {exc}") from exc


def _load_json(path: str) -> Any:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetFormatError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def _input_record(path: str) -> dict[str, str]:
    return {"path": path, "sha256": _sha256(Path(path))}


def _emit(report: dict[str, Any], args: argparse.Namespace, started: float) -> None:
    if getattr(args, "timing", False):
        report["timing_ms"] = round((time.monotonic() - started) * 1000.0, 3)
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if getattr(args, "report", None):
        Path(args.report).write_text(text + "\n", encoding="utf-8")


def _write_artifact(args: argparse.Namespace, doc: dict[str, Any]) -> str | None:
    out = getattr(args, "out", None)
    if out is None:
        return None
    Path(out).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return out


def _epsilon(args: argparse.Namespace) -> Fraction:
    raw = getattr(args, "epsilon", None)
    if raw is None:
        return ZERO
    value = parse_probability(raw)
    if value < 0:
        raise DatasetFormatError("--epsilon must be nonnegative")
    return value


def _load_dataset(args: argparse.Namespace, path: str) -> StochasticChoice:
    return validate_dataset(_load_json(path), _epsilon(args), getattr(args, "max_n", None))


# -- commands ---------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    started = time.monotonic()
    report: dict[str, Any] = {
        "command": "validate",
        "inputs": {"dataset": _input_record(args.dataset)},
    }
    try:
        p = _load_dataset(args, args.dataset)
    except ChoiceError as exc:
        report["status"] = "refuted"
        report["certificate"] = exc.to_json_dict()
        _emit(report, args, started)
        return EXIT_REFUTED
    report["status"] = "ok"
    report["verdicts"] = {
        "items": p.n,
        "menus": len(p.menus()),
        "positive": p.positive,
    }
    _emit(report, args, started)
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    started = time.monotonic()
    p = _load_dataset(args, args.dataset)
    epsilon = _epsilon(args)
    categories = enumerate_categories(p, weak=args.weak, epsilon=epsilon, limit=args.max_n)
    coarsest = None if args.weak else coarsest_partition(p, epsilon, args.max_n)
    poset = None if args.weak else partition_poset(p, epsilon, args.max_n)
    report: dict[str, Any] = {
        "command": "detect",
        "inputs": {"dataset": _input_record(args.dataset)},
        "weak": args.weak,
        "verdicts": {
            "categories": [list(c) for c in categories],
            "coarsest_partition": None if coarsest is None else coarsest.to_json(),
            "poset": None if poset is None else poset.to_json_dict(),
        },
    }
    if categories:
        report["status"] = "ok"
        code = EXIT_OK
    else:
        report["status"] = "refuted"
        report["certificate"] = {
            "finding": "no non-trivial category"
            + ("" if args.weak else "; no non-degenerate two-stage structure"),
        }
        code = EXIT_REFUTED
    _emit(report, args, started)
    return code


def _parse_partition_arg(raw: str) -> Partition:
    if raw.endswith(".json"):
        return Partition.from_json(_load_json(raw))
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"--partition is neither a file nor inline JSON: {exc}") from exc
    return Partition.from_json(doc)


def cmd_decompose(args: argparse.Namespace) -> int:
    started = time.monotonic()
    p = _load_dataset(args, args.dataset)
    epsilon = _epsilon(args)
    report: dict[str, Any] = {
        "command": "decompose",
        "inputs": {"dataset": _input_record(args.dataset)},
        "weak": args.weak,
    }
    if args.partition == "auto":
        partition = coarsest_partition(p, epsilon, args.max_n)
        if partition is None:
            report["status"] = "refuted"
            report["certificate"] = {"finding": "no non-degenerate two-stage structure"}
            _emit(report, args, started)
            return EXIT_REFUTED
    else:
        partition = _parse_partition_arg(args.partition)
    report["partition"] = partition.to_json()
    try:
        d: Decomposition | WeakDecomposition
        d = (
            decompose_weak(p, partition, epsilon)
            if args.weak
            else decompose(p, partition, epsilon)
        )
    except ChoiceError as exc:
        report["status"] = "refuted"
        report["certificate"] = exc.to_json_dict()
        _emit(report, args, started)
        return EXIT_REFUTED
    doc = d.to_json_dict()
    artifact = _write_artifact(args, doc)
    report["status"] = "ok"
    report["decomposition"] = doc
    if artifact:
        report["artifacts"] = {"decomposition": artifact}
    if args.verify:
        report["verified"] = compose(d) == p
    _emit(report, args, started)
    return EXIT_OK


def cmd_rum(args: argparse.Namespace) -> int:
    started = time.monotonic()
    p = _load_dataset(args, args.dataset)
    report: dict[str, Any] = {
        "command": "rum",
        "inputs": {"dataset": _input_record(args.dataset)},
    }
    if args.local:
        subset = canon_menu(args.local.split(","))
        result = check_local_rationalizability(p, subset, args.max_n)
        report["local"] = list(subset)
        report["verdicts"] = result.to_json_dict()
        if args.verify and result.distribution is not None:
            reduced_ok = True
            for menu in p.menus():
                overlap = tuple(x for x in subset if x in menu)
                if not overlap:
                    continue
                mass = p.event_prob(overlap, menu)
                for x in overlap:
                    share = ZERO
                    for order, w in result.distribution.weights.items():
                        best = next(i for i in order if i in overlap)
                        if best == x:
                            share += w
                    if p.prob(x, menu) != mass * share:
                        reduced_ok = False
            report["verified"] = reduced_ok
        status_ok = result.feasible
    else:
        result = check_rum(p, args.max_n)
        report["verdicts"] = result.to_json_dict()
        if args.verify and result.witness is not None:
            report["verified"] = result.witness.rationalizes(p)
        status_ok = result.is_rum
    if args.out:
        _write_artifact(args, report["verdicts"])
        report["artifacts"] = {"witness": args.out}
    report["status"] = "ok" if status_ok else "refuted"
    _emit(report, args, started)
    return EXIT_OK if status_ok else EXIT_REFUTED


def _population_from_json(doc: dict[str, Any]) -> PopulationDistribution:
    partition = Partition.from_json(doc["partition"])
    weights: dict[ResolvableChoice, Fraction] = {}
    for entry in doc["choices"]:
        base_map = {canon_menu(e["menu"]): e["choice"] for e in entry["base"]}
        base = tuple(base_map[m] for m in partition.index_menus)
        fibers = []
        for i, label in enumerate(partition.labels):
            fiber_map = {canon_menu(e["menu"]): e["choice"] for e in entry["fibers"][label]}
            fibers.append(tuple(fiber_map[m] for m in partition.class_menus(i)))
        rc = ResolvableChoice(partition, base, tuple(fibers))
        weights[rc] = parse_probability(entry["weight"])
    population = PopulationDistribution(partition, weights)
    population.validate()
    return population


def cmd_population(args: argparse.Namespace) -> int:
    started = time.monotonic()
    report: dict[str, Any] = {"command": f"population {args.action}"}
    if args.action == "enumerate":
        partition = _parse_partition_arg(args.partition)
        count = resolvable_count(partition)
        report["inputs"] = {"partition": partition.to_json()}
        report["verdicts"] = {"count": count}
        if not args.count_only:
            choices = enumerate_resolvable(partition, args.max_n)
            report["verdicts"]["choices"] = [rc.to_json_dict() for rc in choices]
        report["status"] = "ok"
        _emit(report, args, started)
        return EXIT_OK
    if args.action == "induce":
        doc = _load_json(args.population)
        population = _population_from_json(doc)
        p = induce_choice(population)
        report["inputs"] = {"population": _input_record(args.population)}
        dataset = p.to_json_dict()
        artifact = _write_artifact(args, dataset)
        report["status"] = "ok"
        report["dataset"] = dataset
        report["verdicts"] = {"positive": p.positive}
        if artifact:
            report["artifacts"] = {"dataset": artifact}
        _emit(report, args, started)
        return EXIT_OK
    # synthesize: population from a dataset + partition, or from a decomposition
    if args.decomposition:
        d = Decomposition.from_json_dict(_load_json(args.decomposition))
        report["inputs"] = {"decomposition": _input_record(args.decomposition)}
        population = population_from_decomposition(d)
        target = compose(d)
    else:
        p = _load_dataset(args, args.dataset)
        partition = _parse_partition_arg(args.partition)
        report["inputs"] = {"dataset": _input_record(args.dataset)}
        try:
            population = solve_population(p, partition, _epsilon(args), args.max_n)
        except ChoiceError as exc:
            report["status"] = "refuted"
            report["certificate"] = exc.to_json_dict()
            _emit(report, args, started)
            return EXIT_REFUTED
        target = p
    doc = population.to_json_dict()
    artifact = _write_artifact(args, doc)
    report["status"] = "ok"
    report["population"] = doc
    if artifact:
        report["artifacts"] = {"population": artifact}
    if args.verify:
        report["verified"] = induce_choice(population) == target
    _emit(report, args, started)
    return EXIT_OK


def _model_from_spec(doc: dict[str, Any]) -> StochasticChoice:
    if not isinstance(doc, dict) or "model" not in doc:
        raise DatasetFormatError('model spec needs a "model" field')
    kind = doc["model"]
    if kind == "luce":
        u = {k: parse_probability(v) for k, v in doc["u"].items()}
        return luce_choice(u)
    if kind in ("nsc", "nested", "nested_logit"):
        partition = Partition.from_json(doc["partition"])
        u = {k: parse_probability(v) for k, v in doc["u"].items()}
        if kind == "nested_logit" or "lambda" in doc:
            exponents = {
                label: parse_probability(doc["lambda"][label])
                for label in partition.labels
            }
            return nested_choice(NestSpec(partition, u, nest_exponents=exponents))
        v_map = {
            (entry["class"], canon_menu(entry["menu"])): parse_probability(entry["value"])
            for entry in doc["v"]
        }
        return nested_choice(NestSpec(partition, u, v=v_map))
    if kind == "weighted_two_stage":
        partition = Partition.from_json(doc["partition"])
        sigmas: dict[str, StochasticChoice] = {}
        for label, sub in doc["sigmas"].items():
            sigmas[label] = StochasticChoice.from_table(
                sub["universe"], {tuple(e["items"]): e["probs"] for e in sub["menus"]}
            )
        spec = WeightFamilySpec(
            kind=doc["kind"],
            beta=parse_probability(doc["beta"]) if "beta" in doc else None,
            salience={k: parse_probability(v) for k, v in doc["salience"].items()}
            if "salience" in doc
            else None,
            u={k: parse_probability(v) for k, v in doc["u"].items()} if "u" in doc else None,
            theta=parse_probability(doc["theta"]) if "theta" in doc else None,
        )
        return weighted_two_stage(partition, sigmas, spec)
    raise DatasetFormatError(f"unknown model kind {kind!r}")


def cmd_synthesize(args: argparse.Namespace) -> int:
    started = time.monotonic()
    doc = _load_json(args.spec)
    report: dict[str, Any] = {
        "command": "synthesize",
        "inputs": {"spec": _input_record(args.spec)},
    }
    p = _model_from_spec(doc)
    dataset = p.to_json_dict()
    artifact = _write_artifact(args, dataset)
    report["status"] = "ok"
    report["dataset"] = dataset
    report["verdicts"] = {"items": p.n, "positive": p.positive}
    if artifact:
        report["artifacts"] = {"dataset": artifact}
    _emit(report, args, started)
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    started = time.monotonic()
    p = _load_dataset(args, args.dataset)
    result = classify(p, args.max_n)
    report = {
        "command": "classify",
        "inputs": {"dataset": _input_record(args.dataset)},
        "status": "ok",
        "verdicts": result.to_json_dict(),
    }
    _emit(report, args, started)
    return EXIT_OK


def cmd_axioms(args: argparse.Namespace) -> int:
    started = time.monotonic()
    from . import axioms as ax

    p = _load_dataset(args, args.dataset)
    epsilon = _epsilon(args)
    subject = canon_menu(args.set.split(","))
    checks = {
        "ratio-independence": ax.check_ratio_independence,
        "outside-neutrality": ax.check_outside_neutrality,
        "category": ax.is_category,
        "weak-category": ax.is_weak_category,
        "local-iia": ax.check_local_iia,
        "choice-overload": ax.check_choice_overload,
        "content-monotonicity": ax.check_content_monotonicity,
    }
    verdict = checks[args.axiom](p, subject, epsilon)
    report: dict[str, Any] = {
        "command": "axioms",
        "inputs": {"dataset": _input_record(args.dataset)},
        "axiom": args.axiom,
        "set": list(subject),
        "verdicts": verdict.to_json_dict(),
        "status": "ok" if verdict.holds else "refuted",
    }
    if args.verify and not verdict.holds:
        report["verified"] = reevaluate(p, verdict, epsilon)
    _emit(report, args, started)
    return EXIT_OK if verdict.holds else EXIT_REFUTED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revealed-categories",
        description="Exact analysis of categorized stochastic choice data",
    )
    parser.add_argument("--version", action="version", version=__version__)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--epsilon", default=None,
                         help="tolerance for every equality test (exact rational; default exact)")
        sub.add_argument("--max-n", type=int, default=None, help="override size bounds")
        sub.add_argument("--report", default=None, help="also write the JSON report to a file")
        sub.add_argument("--verify", action="store_true",
                         help="re-validate certificates and witnesses before reporting")
        sub.add_argument("--timing", action="store_true",
                         help="include wall-clock timing (breaks byte-identical reports)")

    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("validate", help="validate a dataset file")
    sp.add_argument("dataset")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = subs.add_parser("detect", help="find categories, the coarsest partition, and the poset")
    sp.add_argument("dataset")
    sp.add_argument("--weak", action="store_true", help="detect weak categories instead")
    common(sp)
    sp.set_defaults(func=cmd_detect)

    sp = subs.add_parser("decompose", help="two-stage decomposition for a partition")
    sp.add_argument("dataset")
    sp.add_argument("--partition", default="auto",
                    help='"auto" (coarsest) or inline/file JSON [["a","b"],["c"]]')
    sp.add_argument("--weak", action="store_true", help="allow menu-dependent class weights")
    sp.add_argument("--out", default=None, help="write the decomposition JSON here")
    common(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = subs.add_parser("rum", help="random-utility rationalizability")
    sp.add_argument("dataset")
    sp.add_argument("--local", default=None,
                    help="comma-separated subset for local rationalizability")
    sp.add_argument("--out", default=None, help="write the witness or certificate here")
    common(sp)
    sp.set_defaults(func=cmd_rum)

    sp = subs.add_parser("population", help="resolvable-choice populations")
    sp.add_argument("action", choices=["enumerate", "induce", "synthesize"])
    sp.add_argument("--partition", default=None, help="partition JSON (inline or file)")
    sp.add_argument("--population", default=None, help="population JSON file (induce)")
    sp.add_argument("--dataset", default=None, help="dataset file (synthesize)")
    sp.add_argument("--decomposition", default=None,
                    help="decomposition JSON file (synthesize from a two-stage form)")
    sp.add_argument("--count-only", action="store_true", help="report only the family size")
    sp.add_argument("--out", default=None, help="write the produced JSON here")
    common(sp)
    sp.set_defaults(func=cmd_population)

    sp = subs.add_parser("synthesize", help="generate a dataset from a model spec")
    sp.add_argument("spec")
    sp.add_argument("--out", default=None, help="write the dataset JSON here")
    common(sp)
    sp.set_defaults(func=cmd_synthesize)

    sp = subs.add_parser("classify", help="model-region membership report")
    sp.add_argument("dataset")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = subs.add_parser("axioms", help="run one behavioral check on one set")
    sp.add_argument("dataset")
    sp.add_argument("--axiom", required=True,
                    choices=["ratio-independence", "outside-neutrality", "category",
                             "weak-category", "local-iia", "choice-overload",
                             "content-monotonicity"])
    sp.add_argument("--set", required=True, help="comma-separated item ids")
    common(sp)
    sp.set_defaults(func=cmd_axioms)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except ChoiceError as exc:
        print(json.dumps({"status": "error", **exc.to_json_dict()},
                         sort_keys=True, indent=2))
        return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
