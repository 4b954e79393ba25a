"""Command line interface.

Every command reads a count table (CSV grid or JSON document), runs the
corresponding pipeline and prints a single JSON report to stdout.  Errors
become a JSON error object and a nonzero exit code; exit code 0 means the
report contains no error object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .arrays import vec
from .basis import (
    basis_from_columns,
    constraint_matrix,
    dependence_basis,
    load_basis_matrix,
    save_basis_matrix,
)
from .errors import DiscopulaError
from .inference import quasi_independence_test, yule_inference
from .projection import (
    IpfConfig,
    copula_array,
    smoothed_empirical,
    uniform_margins_feasible,
)
from .simulate import SimScenario, clt_study
from .tables import TableDocument, parse_table


def _ipf_config(args) -> IpfConfig:
    return IpfConfig(margin_tol=args.ipf_tol, max_sweeps=args.ipf_max_sweeps)


def _load_document(args) -> TableDocument:
    path = Path(args.input)
    fmt = args.format or ("json" if path.suffix.lower() == ".json" else "csv")
    return parse_table(path.read_text(), fmt, has_headers=args.headers)


def _emit(args, report: dict) -> None:
    text = json.dumps(report, indent=2 if args.pretty else None)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)


def _flat(a) -> list[float]:
    return [float(x) for x in vec(np.asarray(a, dtype=float))]


def _base_report(command: str, doc: TableDocument) -> dict:
    return {
        "command": command,
        "version": __version__,
        "table": doc.to_dict(),
        "n": doc.n,
        "method": {
            "estimator": "smoothed empirical frequencies",
            "projection": "iterative proportional fitting onto uniform margins",
            "covariance": "plug-in sandwich",
            "vec_order": "column-major (first coordinate fastest)",
        },
    }


def cmd_copula(args) -> dict:
    doc = _load_document(args)
    config = _ipf_config(args)
    support = doc.support()
    p_hat = smoothed_empirical(doc.counts, support, smooth=not args.no_smoothing)
    outcome = copula_array(p_hat, config)
    bundle = dependence_basis(support, config=config)
    feasibility = uniform_margins_feasible(support, config)
    report = _base_report("copula", doc)
    report.update({
        "smoothing": not args.no_smoothing,
        "prob_array": _flat(p_hat),
        "copula_array": _flat(outcome.array),
        "d_circ": bundle.d_circ,
        "feasible": feasibility.feasible,
        "diagnostics": {
            "sweeps": outcome.sweeps_used,
            "converged": outcome.converged,
            "final_margin_error": outcome.final_margin_error,
        },
    })
    return report


def cmd_yule(args) -> dict:
    doc = _load_document(args)
    estimate = yule_inference(doc.counts, doc.support(), ci_level=args.level,
                              smooth=not args.no_smoothing,
                              config=_ipf_config(args))
    report = _base_report("yule", doc)
    report["yule"] = {
        "upsilon": estimate.upsilon,
        "variance": estimate.variance,
        "std_error": estimate.std_error,
        "ci_level": estimate.ci_level,
        "ci": list(estimate.ci),
        "kappa": estimate.kappa,
        "n": estimate.n,
    }
    return report


def cmd_quasi_test(args) -> dict:
    doc = _load_document(args)
    config = _ipf_config(args)
    support = doc.support()
    bundle = None
    if args.basis:
        bundle = basis_from_columns(support, load_basis_matrix(args.basis),
                                    config=config)
    result = quasi_independence_test(doc.counts, support, basis=bundle,
                                     smooth=not args.no_smoothing, config=config)
    report = _base_report("quasi-test", doc)
    report["test"] = {
        "coords": [float(t) for t in result.coords],
        "statistic": result.statistic,
        "dof": result.dof,
        "p_value": result.p_value,
        "basis_source": args.basis or "computed",
    }
    return report


def cmd_basis(args) -> dict:
    doc = _load_document(args)
    config = _ipf_config(args)
    support = doc.support()
    constraints = constraint_matrix(support)
    bundle = dependence_basis(support, config=config)
    feasibility = uniform_margins_feasible(support, config)
    if args.matrix_out:
        save_basis_matrix(args.matrix_out, bundle.columns)
    report = _base_report("basis", doc)
    report.update({
        "d_circ": bundle.d_circ,
        "feasible": feasibility.feasible,
        "constraint_rows": int(constraints.matrix.shape[0]),
        "columns": [[float(x) for x in row] for row in bundle.columns],
        "quasi_independence_array": (
            _flat(bundle.quasi_independence)
            if bundle.quasi_independence is not None else None
        ),
    })
    return report


def cmd_simulate(args) -> dict:
    data = json.loads(Path(args.scenario).read_text())
    truth_spec = data["truth"]
    dims = tuple(int(r) for r in truth_spec["dims"])
    if "probs" in truth_spec:
        flat = np.asarray(truth_spec["probs"], dtype=float)
    else:
        flat = np.asarray(truth_spec["counts"], dtype=float)
        flat = flat / flat.sum()
    truth = flat.reshape(dims, order="F")
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    scenario = SimScenario(truth=truth, n=int(data["n"]),
                           replicates=int(data["replicates"]), seed=seed)
    report_obj = clt_study(scenario, config=_ipf_config(args))
    return {"command": "simulate", "version": __version__,
            "scenario_file": args.scenario, **report_obj.to_dict()}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discopula",
        description="Discrete copulas of count tables: projection, "
                    "concordance and quasi-independence inference",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, table=True):
        if table:
            p.add_argument("--input", "-i", required=True, help="table file")
            p.add_argument("--format", choices=["csv", "json"],
                           help="input format (default: by file extension)")
            p.add_argument("--headers", action="store_true",
                           help="CSV has a header row and a stub column")
            p.add_argument("--no-smoothing", action="store_true",
                           help="use raw relative frequencies")
        p.add_argument("--ipf-tol", type=float, default=1e-12,
                       help="margin convergence tolerance")
        p.add_argument("--ipf-max-sweeps", type=int, default=10_000,
                       help="sweep budget of the scaling loop")
        p.add_argument("--output", "-o", help="write the report here instead of stdout")
        p.add_argument("--pretty", action="store_true", help="indent the JSON report")

    p = sub.add_parser("copula", help="empirical copula array and diagnostics")
    add_common(p)
    p.set_defaults(func=cmd_copula)

    p = sub.add_parser("yule", help="concordance coefficient with confidence interval")
    add_common(p)
    p.add_argument("--level", type=float, default=0.95, help="confidence level")
    p.set_defaults(func=cmd_yule)

    p = sub.add_parser("quasi-test", help="chi-square test of quasi-independence")
    add_common(p)
    p.add_argument("--basis", help="optional basis matrix file (plain text)")
    p.set_defaults(func=cmd_quasi_test)

    p = sub.add_parser("basis", help="dependence basis and dimension of a support")
    add_common(p)
    p.add_argument("--matrix-out", help="also write the basis matrix to this file")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("simulate", help="Monte Carlo study from a scenario file")
    add_common(p, table=False)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except DiscopulaError as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        diagnostic = getattr(exc, "diagnostic", None)
        if diagnostic:
            error["error"]["diagnostic"] = {
                k: (v if not isinstance(v, (np.ndarray, np.generic)) else np.asarray(v).tolist())
                for k, v in diagnostic.items()
            }
        print(json.dumps(error))
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": {"type": "OSError", "message": str(exc)}}))
        return 1
    _emit(args, report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
