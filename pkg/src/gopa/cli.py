"""Command-line front end.

Subcommands: ``solve`` (full two-stage pipeline), ``opa`` (rankings only),
``elicit`` (first stage of one cell), ``metrics`` (consensus report from a
solution report), ``sensitivity`` (expert-rank permutation sweep), ``verify``
(closed forms against the LP solver).  Reports are deterministic: stable key
order and floats at 12 significant digits.

Exit codes: 0 success, 1 failed verification, 2 validation error,
3 infeasible preference context, 4 numeric failure.
"""

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .elicit_continuous import cumulative_utilities, elicit_continuous
from .elicit_discrete import elicit_discrete
from .exceptions import (
    DomainError,
    GopaError,
    InfeasibleContext,
    InfeasibleStage2,
    NumericFailure,
    ValidationError,
)
from .lpcheck import build_gopa_lp, build_opa_lp, solve_lp, verify_efficiency
from .metrics import consensus_report
from .model import load_document
from .pipeline import (
    elicit_utilities,
    report_to_solution,
    solution_report,
    solve_document,
)
from .sensitivity import permutation_stats
from .solver import solve_gopa, solve_opa
from .structures import surrogate_weights, target_density


@dataclass
class RunConfig:
    """Parsed invocation: subcommand plus every flag that shapes a run."""

    command: str
    input: str = None
    output: str = None
    csv_dir: str = None
    orientation: str = "reversed"
    bound_mode: str = "equality"
    tol: float = 1e-8
    method: str = "gopa"
    cell: str = None
    samples: int = None
    dump_target: bool = False
    raw: str = None
    random: int = None
    seed: int = 0

    def __post_init__(self):
        if self.orientation not in ("reversed", "literal"):
            raise ValidationError("orientation", f"unknown value {self.orientation!r}")
        if self.bound_mode not in ("equality", "inequality"):
            raise ValidationError("bound-mode", f"unknown value {self.bound_mode!r}")
        if not self.tol > 0:
            raise ValidationError("tol", "tolerance must be positive")


def _fmt(x):
    return format(float(x), ".12g")


def _round_floats(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _round_floats(obj.item())
    return obj


def _write_text(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_json(doc, path):
    _write_text(json.dumps(_round_floats(doc), indent=2, sort_keys=True) + "\n", path)


def _write_csv(rows, path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    _write_text(buf.getvalue(), path)


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(str(path), "input file not found")
    except json.JSONDecodeError as exc:
        raise ValidationError(str(path), f"not valid JSON ({exc})")


def _weights_csv(report):
    rows = [("section", "id", "weight")]
    for section in ("experts", "attributes", "alternatives"):
        for name in report["ids"][section]:
            rows.append((section, name, _fmt(report[section][name])))
    return rows


def _utilities_csv(report):
    rows = [("expert", "attribute", "rank", "utility")]
    for eid in report["ids"]["experts"]:
        for aid in report["ids"]["attributes"]:
            for r, u in enumerate(report["utilities"][eid][aid], start=1):
                rows.append((eid, aid, r, _fmt(u)))
    return rows


def _cmd_solve(config, command):
    method = "gopa" if command == "solve" else "opa"
    doc = _load_json(config.input)
    solution, _, _ = solve_document(doc, method=method,
                                    orientation=config.orientation,
                                    bound_mode=config.bound_mode)
    report = solution_report(solution, method, config.orientation, config.bound_mode)
    _write_json(report, config.output)
    if config.csv_dir is not None:
        out = Path(config.csv_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(_weights_csv(report), out / "weights.csv")
        if "utilities" in report:
            _write_csv(_utilities_csv(report), out / "utilities.csv")
    return 0


def _find_cell(problem, label):
    try:
        eid, aid = (part.strip() for part in label.split(","))
        return problem.expert_ids.index(eid), problem.attribute_ids.index(aid)
    except (ValueError, AttributeError):
        raise ValidationError("--cell", f"expected 'EXPERT_ID,ATTRIBUTE_ID', got {label!r}")


def _cmd_elicit(config):
    if config.cell is None:
        raise ValidationError("--cell", "elicit requires --cell EXPERT_ID,ATTRIBUTE_ID")
    doc = _load_json(config.input)
    problem, context, structures = load_document(doc)
    i, j = _find_cell(problem, config.cell)
    kij = int(problem.max_rank[i, j])
    ctx = context.cell(i, j)
    structure = structures.cell(i, j)

    if structure.is_discrete:
        target = surrogate_weights(structure, kij)
        if config.dump_target:
            rows = [("rank", "target")] + [(r + 1, _fmt(v)) for r, v in enumerate(target)]
        elif config.samples:
            raise ValidationError("--samples", "curve sampling applies to continuous cells")
        else:
            u = elicit_discrete(target, ctx, kij)
            rows = [("rank", "utility")] + [(r + 1, _fmt(v)) for r, v in enumerate(u)]
        _write_csv(rows, config.output)
        return 0

    density_target = target_density(structure, kij)
    if config.dump_target:
        n = config.samples or 200
        xs = np.linspace(0.0, kij, n + 1)
        rows = [("x", "target")] + [(_fmt(x), _fmt(density_target.value(x))) for x in xs]
        _write_csv(rows, config.output)
        return 0
    solved = elicit_continuous(density_target, ctx, kij, bound_mode=config.bound_mode)
    if config.samples:
        xs = np.linspace(0.0, kij, config.samples + 1)
        rows = [("x", "density", "cdf")]
        rows += [(_fmt(x), _fmt(solved.value(x)), _fmt(solved.cdf(x))) for x in xs]
    else:
        u = cumulative_utilities(solved, orientation=config.orientation)
        rows = [("rank", "utility")] + [(r + 1, _fmt(v)) for r, v in enumerate(u)]
    _write_csv(rows, config.output)
    return 0


def _cmd_metrics(config):
    report = _load_json(config.input)
    if not isinstance(report, dict) or report.get("kind") != "solution":
        raise ValidationError(str(config.input), "expected a solution report document")
    solution = report_to_solution(report)
    cons = consensus_report(solution)
    out = {"kind": "consensus", **cons.to_dict(solution.problem)}
    _write_json(out, config.output)
    if config.csv_dir is not None:
        outdir = Path(config.csv_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        rows = [("section", "id", "psd", "kendall", "lcl", "label")]
        for j, aid in enumerate(solution.problem.attribute_ids):
            rows.append(("attributes", aid, _fmt(cons.psd_attributes[j]),
                         _fmt(cons.kendall_alternatives[j]),
                         _fmt(cons.lcl_alternatives[j]), cons.label_alternatives[j]))
        for k, mid in enumerate(solution.problem.alternative_ids):
            rows.append(("alternatives", mid, _fmt(cons.psd_alternatives[k]), "", "", ""))
        _write_csv(rows, outdir / "metrics.csv")
    return 0


def _cmd_sensitivity(config):
    doc = _load_json(config.input)
    problem, context, structures = load_document(doc)
    utilities = None
    if config.method == "gopa":
        utilities, _ = elicit_utilities(problem, context, structures,
                                        orientation=config.orientation,
                                        bound_mode=config.bound_mode)
    stats = permutation_stats(problem, utilities)
    rows = [("section", "id", "mean", "skewness", "kurtosis", "cv", "min", "max")]
    for section in ("experts", "attributes", "alternatives"):
        for name, st in stats[section]:
            rows.append((section, name, _fmt(st.mean), _fmt(st.skewness),
                         _fmt(st.kurtosis), _fmt(st.cv), _fmt(st.minimum),
                         _fmt(st.maximum)))
    _write_csv(rows, config.output)
    if config.raw is not None:
        raw_rows = [("scenario", "section", "id", "weight")]
        for section in ("experts", "attributes", "alternatives"):
            ids = [name for name, _ in stats[section]]
            matrix = stats["raw"][section]
            for n in range(matrix.shape[0]):
                for idx, name in enumerate(ids):
                    raw_rows.append((n, section, name, _fmt(matrix[n, idx])))
        _write_csv(raw_rows, config.raw)
    return 0


def _check_instance(problem, utilities, tol):
    checks = []
    sol = solve_opa(problem)
    res = solve_lp(build_opa_lp(problem))
    delta = abs(res.value - sol.objective) if res.status == "optimal" else float("inf")
    checks.append({"name": "ordinal_lp_matches_formula", "pass": delta <= tol,
                   "delta": delta})
    gsol = solve_gopa(problem, utilities)
    gres = solve_lp(build_gopa_lp(problem, utilities))
    gdelta = abs(gres.value - gsol.objective) if gres.status == "optimal" else float("inf")
    checks.append({"name": "generalized_lp_matches_formula", "pass": gdelta <= tol,
                   "delta": gdelta})
    if not problem.has_internal_gaps:
        # skipped ranks leave weight variables outside the normalization row,
        # which makes the stage-2 program unbounded
        eff = verify_efficiency(problem, sol.objective)
        slack_delta = abs(eff.min_slack - sol.objective)
        checks.append({"name": "stage2_min_slack_equals_objective",
                       "pass": slack_delta <= tol, "delta": slack_delta})
        try:
            verify_efficiency(problem, sol.objective * 1.1)
            rejected = False
        except InfeasibleStage2:
            rejected = True
        checks.append({"name": "stage2_rejects_inflated_objective", "pass": rejected,
                       "delta": 0.0})
    return checks


def _random_document(rng, allow_irregular=True):
    n_e = int(rng.integers(1, 4))
    n_a = int(rng.integers(1, 4))
    n_m = int(rng.integers(2, 7))
    experts = [{"id": f"E{i+1}", "rank": int(r)}
               for i, r in enumerate(rng.permutation(n_e) + 1)]
    attributes = [f"C{j+1}" for j in range(n_a)]
    alternatives = [f"A{k+1}" for k in range(n_m)]
    attribute_ranks = {e["id"]: {a: int(r) for a, r in
                                 zip(attributes, rng.permutation(n_a) + 1)}
                       for e in experts}
    alternative_ranks = {}
    for e in experts:
        alternative_ranks[e["id"]] = {}
        for a in attributes:
            if allow_irregular and rng.random() < 0.4:
                present = sorted(rng.choice(n_m, size=int(rng.integers(1, n_m + 1)),
                                            replace=False))
                ranks = {alternatives[k]: int(rng.integers(1, n_m + 1)) for k in present}
            else:
                ranks = {alt: int(r) for alt, r in
                         zip(alternatives, rng.permutation(n_m) + 1)}
            alternative_ranks[e["id"]][a] = ranks
    return {"experts": experts, "attributes": attributes,
            "alternatives": alternatives, "attribute_ranks": attribute_ranks,
            "alternative_ranks": alternative_ranks}


def _random_utilities(problem, rng):
    utilities = {}
    for i, j in problem.cells():
        kij = int(problem.max_rank[i, j])
        u = np.sort(rng.random(kij))[::-1] + 1e-3
        utilities[(i, j)] = u / u.sum()
    return utilities


def _cmd_verify(config):
    summary = {"kind": "verify", "instances": []}
    rng = np.random.default_rng(config.seed)
    if config.random:
        for n in range(config.random):
            problem, _, _ = load_document(_random_document(rng))
            checks = _check_instance(problem, _random_utilities(problem, rng), config.tol)
            summary["instances"].append({"instance": f"random-{n}", "checks": checks})
    else:
        if config.input is None:
            raise ValidationError("input", "verify needs an input file or --random N")
        doc = _load_json(config.input)
        problem, context, structures = load_document(doc)
        utilities, _ = elicit_utilities(problem, context, structures,
                                        orientation=config.orientation,
                                        bound_mode=config.bound_mode)
        checks = _check_instance(problem, utilities, config.tol)
        summary["instances"].append({"instance": str(config.input), "checks": checks})
    ok = all(c["pass"] for inst in summary["instances"] for c in inst["checks"])
    summary["pass"] = ok
    _write_json(summary, config.output)
    return 0 if ok else 1


def run(config):
    """Execute one configured run; returns the process exit code."""
    try:
        if config.command in ("solve", "opa"):
            return _cmd_solve(config, config.command)
        if config.command == "elicit":
            return _cmd_elicit(config)
        if config.command == "metrics":
            return _cmd_metrics(config)
        if config.command == "sensitivity":
            return _cmd_sensitivity(config)
        if config.command == "verify":
            return _cmd_verify(config)
        raise ValidationError("command", f"unknown subcommand {config.command!r}")
    except InfeasibleContext as exc:
        print(f"infeasible preference context: {exc}", file=sys.stderr)
        return 3
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except (ValidationError, DomainError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except GopaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _parser():
    parser = argparse.ArgumentParser(prog="gopa",
                                     description="Ordinal weight elicitation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("input", help="input document (JSON)")
        p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
        p.add_argument("--orientation", default="reversed",
                       choices=("reversed", "literal"))
        p.add_argument("--bound-mode", default="equality",
                       choices=("equality", "inequality"), dest="bound_mode")
        p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("solve", help="full pipeline: elicit utilities, then weights")
    common(p)
    p.add_argument("--csv", dest="csv_dir", default=None,
                   help="directory for weights.csv and utilities.csv")

    p = sub.add_parser("opa", help="weights from rankings alone")
    common(p)
    p.add_argument("--csv", dest="csv_dir", default=None)

    p = sub.add_parser("elicit", help="first-stage utilities of one cell")
    common(p)
    p.add_argument("--cell", required=True, help="EXPERT_ID,ATTRIBUTE_ID")
    p.add_argument("--samples", type=int, default=None,
                   help="sample the solved density curve at N+1 points")
    p.add_argument("--dump-target", action="store_true", dest="dump_target",
                   help="emit the target structure instead of solving")

    p = sub.add_parser("metrics", help="consensus report from a solution report")
    common(p)
    p.add_argument("--csv", dest="csv_dir", default=None)

    p = sub.add_parser("sensitivity", help="expert-rank permutation statistics (CSV)")
    common(p)
    p.add_argument("--method", default="gopa", choices=("gopa", "opa"))
    p.add_argument("--raw", default=None, help="also write per-scenario weights here")

    p = sub.add_parser("verify", help="closed forms against the LP solver")
    common(p, needs_input=False)
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--random", type=int, default=None, metavar="N",
                   help="check N random instances instead of an input file")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None):
    args = vars(_parser().parse_args(argv))
    try:
        config = RunConfig(**args)
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
