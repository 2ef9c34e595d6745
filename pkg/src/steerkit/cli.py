"""Command-line reproduction of the worked examples as CSV/JSON tables.

Exit codes: 0 success, 2 validation/schema error, 3 numeric failure.
Ranges use the inclusive ``start:stop:step`` syntax (endpoints kept within
half a step); CSV output uses '.' decimals, ',' separators and 15
significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .assemblage import Assemblage, assemblage_from_pure_state, steering_witness
from .linalg import NumericError, ValidationError, require_hermitian
from .pure import (
    optimal_povm_qfi,
    optimal_povm_var,
    s_avg_pure,
    s_max_lower_bound,
    s_max_pure,
    schmidt,
)
from .experiments import (
    cat_rows,
    estimate_run,
    ghz_noise_rows,
    ghz_rows,
    multigen_rows,
    quantify_rows,
    split_dicke_partition_rows,
    split_dicke_rows,
)
from .serialize import SchemaError
from .states import BipartitePureState


def format_cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.15g}"
    return str(value)


def write_csv(header, rows, out) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(format_cell(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def write_json_doc(doc, out) -> None:
    text = json.dumps(doc, default=float, indent=2) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def write_json_table(header, rows, out) -> None:
    doc = {"columns": list(header), "rows": [[None if v == "" else v for v in row] for row in rows]}
    write_json_doc(doc, out)


def parse_range(text: str, kind=float):
    """Inclusive start:stop:step range (or a single value)."""
    parts = str(text).split(":")
    if len(parts) == 1:
        return [kind(parts[0])]
    if len(parts) == 2:
        start, stop, step = float(parts[0]), float(parts[1]), 1.0
    elif len(parts) == 3:
        start, stop, step = float(parts[0]), float(parts[1]), float(parts[2])
    else:
        raise ValidationError(f"cannot parse range {text!r}; expected start:stop:step")
    if step <= 0:
        raise ValidationError(f"range step must be positive in {text!r}")
    values = []
    x = start
    while x <= stop + step / 2.0:
        values.append(kind(round(x, 12)) if kind is float else kind(round(x)))
        x += step
    if not values:
        raise ValidationError(f"range {text!r} is empty")
    return values


def _emit(args, header, rows) -> None:
    if args.format == "json":
        write_json_table(header, rows, args.out)
    else:
        write_csv(header, rows, args.out)


def _cmd_ghz(args):
    header, rows = ghz_rows(parse_range(args.n, int), phi=args.phi)
    _emit(args, header, rows)


def _cmd_ghz_noise(args):
    noise = args.noise if args.noise is not None else args.p
    if noise is None:
        raise ValidationError("ghz-noise needs --noise (or --p) with the mixing probability")
    header, rows = ghz_noise_rows(parse_range(args.n, int), parse_range(noise), phi=args.phi)
    _emit(args, header, rows)


def _cmd_split_dicke(args):
    values_n = parse_range(args.n, int)
    if len(values_n) != 1:
        raise ValidationError("split-dicke takes a single --n")
    k = int(parse_range(args.k, int)[0]) if args.k is not None else values_n[0] // 2
    header, rows = split_dicke_rows(values_n[0], k)
    _emit(args, header, rows)


def _cmd_split_dicke_partition(args):
    values_n = parse_range(args.n, int)
    if len(values_n) != 1:
        raise ValidationError("split-dicke-partition takes a single --n")
    n = values_n[0]
    ks = parse_range(args.k, int) if args.k is not None else list(range(0, n + 1))
    p = args.p if args.p is not None else 0.5
    header, rows = split_dicke_partition_rows(n, p, ks)
    _emit(args, header, rows)


def _cmd_cat(args):
    header, rows = cat_rows(parse_range(args.alpha))
    _emit(args, header, rows)


def _cmd_quantify(args):
    header, rows = quantify_rows(step=args.step)
    _emit(args, header, rows)


def _cmd_multigen(args):
    header, rows = multigen_rows(parse_range(args.d, int))
    _emit(args, header, rows)


def _cmd_estimate(args):
    check = estimate_run(theta=args.theta, shots=args.shots, reps=args.reps, seed=args.seed)
    if args.format == "json":
        doc = serialize.sample_run_to_json(check.run)
        doc.update(
            {
                "product": check.product,
                "bound": check.bound,
                "threshold": check.threshold,
                "epr_flag": check.epr_flag,
                "var_h_est": check.var_h_est,
            }
        )
        write_json_doc(doc, args.out)
        return
    header = ["rep", "estimate"]
    rows = [[i, float(v)] for i, v in enumerate(check.run.estimates)]
    rows.append(["summary:empirical_var", check.run.empirical_var])
    rows.append(["summary:predicted_var", check.run.predicted_var])
    rows.append(["summary:product", check.product])
    rows.append(["summary:bound", check.bound])
    rows.append(["summary:epr_flag", int(check.epr_flag)])
    write_csv(header, rows, args.out)


def _witness_input(path: str):
    doc = serialize.load_document(path)
    if doc.get("type") == "assemblage":
        return serialize.assemblage_from_json(doc)
    return serialize.load_state(path)


def _cmd_witness(args):
    loaded = _witness_input(args.input)
    observable = require_hermitian(serialize.load_observable(args.observable), name="observable")
    if isinstance(loaded, Assemblage):
        asm = loaded
        quantifiers = {}
        if args.quantify:
            quantifiers["s_lower_bound"] = s_max_lower_bound(asm, seed=args.seed)
    elif isinstance(loaded, BipartitePureState):
        asm = assemblage_from_pure_state(
            loaded,
            [
                ("qfi-opt", optimal_povm_qfi(loaded, observable)),
                ("var-opt", optimal_povm_var(loaded, observable)),
            ],
        )
        spectrum = schmidt(loaded).coefficients
        quantifiers = {"s_max_pure": s_max_pure(spectrum), "s_avg_pure": s_avg_pure(spectrum)}
    else:
        raise ValidationError(
            "witness needs a bipartite pure state or an assemblage; a bare density "
            "matrix does not determine Alice's settings"
        )
    report = steering_witness(asm, observable)
    doc = serialize.witness_report_to_json(report)
    doc.update(quantifiers)
    if args.format == "json":
        write_json_doc(doc, args.out)
        return
    header = ["quantity", "value"]
    rows = [[key, value] for key, value in doc.items() if key != "type"]
    write_csv(header, rows, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steerkit",
        description="Metrological EPR-steering witnesses from the quantum Fisher information",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)

    def add_common(p):
        p.add_argument("--out", default="-", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("ghz", help="pure GHZ conditional QFI/variance table")
    p.add_argument("--n", required=True, help="Bob qubit count or range start:stop[:step]")
    p.add_argument("--phi", type=float, default=0.0)
    add_common(p)
    p.set_defaults(func=_cmd_ghz)

    p = sub.add_parser("ghz-noise", help="GHZ mixed with white noise")
    p.add_argument("--n", required=True)
    p.add_argument("--noise", help="mixing probability p or range")
    p.add_argument("--p", dest="p", help="alias for --noise")
    p.add_argument("--phi", type=float, default=0.0)
    add_common(p)
    p.set_defaults(func=_cmd_ghz_noise)

    p = sub.add_parser("split-dicke", help="deterministically split Dicke state table")
    p.add_argument("--n", required=True, help="total (even) particle number")
    p.add_argument("--k", help="total excitations (default n/2)")
    add_common(p)
    p.set_defaults(func=_cmd_split_dicke)

    p = sub.add_parser("split-dicke-partition", help="beam-splitter split Dicke table")
    p.add_argument("--n", required=True)
    p.add_argument("--k", help="excitation number or range (default 0:n)")
    p.add_argument("--p", type=float, help="splitting ratio (default 0.5)")
    add_common(p)
    p.set_defaults(func=_cmd_split_dicke_partition)

    p = sub.add_parser("cat", help="hybrid qubit-oscillator cat state table")
    p.add_argument("--alpha", required=True, help="coherent amplitude or range")
    add_common(p)
    p.set_defaults(func=_cmd_cat)

    p = sub.add_parser("quantify", help="pure-state quantifiers on the d=3 simplex")
    p.add_argument("--step", type=float, default=0.01)
    add_common(p)
    p.set_defaults(func=_cmd_quantify)

    p = sub.add_parser("multigen", help="multi-generator witness for maximally entangled states")
    p.add_argument("--d", required=True, help="Bob dimension or range")
    add_common(p)
    p.set_defaults(func=_cmd_multigen)

    p = sub.add_parser("estimate", help="Monte Carlo phase-estimator validation (Bell strategy)")
    p.add_argument("--theta", type=float, default=0.01)
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("witness", help="witness evaluation on a user-supplied state/assemblage")
    p.add_argument("input", help="JSON file with a bipartite pure state or assemblage")
    p.add_argument("--observable", required=True, help="JSON file with the generator matrix")
    p.add_argument(
        "--quantify",
        action="store_true",
        help="add the sampled lower bound on the maximal violation (assemblage input)",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for the quantifier sampling")
    add_common(p)
    p.set_defaults(func=_cmd_witness)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
