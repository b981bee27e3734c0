"""Command-line experiment driver.

.. code-block:: console

    $ ultralab weights prop21 gevrey:s=2 --jmax 60
    $ ultralab op ellipticity "1*D[2,0]+1*D[0,2]" --box -1,1,-1,1
    $ ultralab analyze norms --op "1*D[2,0]+1*D[0,2]" \\
        --fn "sin(pi*x1)*sin(pi*x2)" --box 0,1,0,1 --jmax 6
    $ ultralab metivier run --eps 0.1 --alpha-max 25 --q-max 6

Every run writes ``<out>.json`` and ``<out>.csv``.  Exit codes: 0 ok,
1 a property or verdict violation, 2 numeric failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field, fields
from typing import IO, Any, NoReturn

import numpy as np

from ultralab import __version__
from ultralab.analysis import (
    Box,
    QuadratureGrid,
    empirical_recursion_constant,
    iterate_norms,
    membership_report,
    npm_profile,
)
from ultralab.config import ExperimentConfig
from ultralab.exceptions import ConfigError, UltralabError, UsageError
from ultralab.metivier import MetivierParams, counterexample_report
from ultralab.pdo import (
    SymbolValue,
    compose,
    ellipticity_check,
    iterate,
    parse_operator,
    principal_symbol,
)
from ultralab.reports import build_report, load_report, merge_reports, write_csv, write_json
from ultralab.symbolic import parse
from ultralab.utils.text import format_index, parse_floats
from ultralab.weights import (
    YoungConjugate,
    bound_shift,
    check_axioms,
    check_prop21,
    conjugate_table,
    dyadic_ladder,
    weight_from_spec,
)
from ultralab.worker import EX_OK, EX_USAGE, EX_VIOLATION, Worker

__all__ = ["Outcome", "build_parser", "run", "main"]

#: oracle disagreement above this counts as a violation in conjugate tables
CONJUGATE_ORACLE_RTOL = 1e-8

#: shift-bound check radii
SHIFT_RHOS = (2.0, 10.0)

#: flags whose values may start with a minus sign
LIST_FLAGS = frozenset({"--box", "--x", "--xi", "--y"})


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Outcome:
    """Result of one subcommand before it is written out."""

    command: str
    result: Any
    rows: list[Mapping[str, Any]] = field(default_factory=list)
    violation: bool = False


def _common() -> ArgumentParser:
    """Global flags, accepted before or after the subcommand."""
    parser = ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    parser.add_argument("--config", default=s, help="INI file with experiment settings")
    parser.add_argument("--out", default=s, help="report path prefix (writes .json and .csv)")
    parser.add_argument("--seed", type=int, default=s, help="seed for sampled checks")
    parser.add_argument(
        "--dry-run", dest="dry_run", action="store_const", const=True, default=s,
        help="validate inputs and config without computing",
    )
    parser.add_argument("--log-level", dest="log_level", default=s, help="console log level")
    parser.add_argument("--log-file", dest="log_file", default=s, help="log to this file")
    parser.add_argument(
        "--quiet", "-q", action="store_const", const=True, default=s, help="no console output"
    )
    return parser


def build_parser() -> ArgumentParser:
    common = _common()
    parser = ArgumentParser(
        prog="ultralab",
        description="Ultradifferentiable function laboratory.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", metavar="GROUP")
    groups.required = True

    def command(sub: Any, name: str, handler: Callable, help: str) -> ArgumentParser:
        p = sub.add_parser(name, help=help, parents=[common])
        p.set_defaults(handler=handler)
        return p

    weights = groups.add_parser("weights", help="weight functions and conjugates")
    wsub = weights.add_subparsers(dest="action", metavar="ACTION")
    wsub.required = True
    p = command(wsub, "check", _weights_check, "sampled axiom verdicts")
    p.add_argument("weight", nargs="?", help="weight spec, e.g. gevrey:s=2")
    p = command(wsub, "conjugate", _weights_conjugate, "Young conjugate against the grid oracle")
    p.add_argument("weight", nargs="?")
    p.add_argument("--y", dest="ys", type=lambda t: tuple(parse_floats(t)), help="y values a,b,...")
    p = command(wsub, "prop21", _weights_prop21, "inequality suite of the associated sequence")
    p.add_argument("weight", nargs="?")
    p.add_argument("--jmax", type=int, help="largest j, h, r")
    p.add_argument("--ladder-min", dest="ladder_min", type=int, help="smallest log2 lambda")
    p.add_argument("--ladder-max", dest="ladder_max", type=int, help="largest log2 lambda")

    op = groups.add_parser("op", help="linear differential operators")
    osub = op.add_subparsers(dest="action", metavar="ACTION")
    osub.required = True
    p = command(osub, "parse", _op_parse, "parse and print canonically")
    p.add_argument("operator", nargs="?")
    p = command(osub, "compose", _op_compose, "composition P∘Q")
    p.add_argument("operator", nargs="?")
    p.add_argument("other", nargs="?")
    p = command(osub, "iterate", _op_iterate, "power P^q")
    p.add_argument("operator", nargs="?")
    p.add_argument("--power", type=int)
    p = command(osub, "symbol", _op_symbol, "principal symbol at (x, xi)")
    p.add_argument("operator", nargs="?")
    p.add_argument("--x", required=True, type=parse_floats)
    p.add_argument("--xi", required=True, type=parse_floats)
    p = command(osub, "ellipticity", _op_ellipticity, "sampled ellipticity verdict")
    p.add_argument("operator", nargs="?")
    p.add_argument("--box")

    analyze = groups.add_parser("analyze", help="norms, growth fits and seminorms")
    asub = analyze.add_subparsers(dest="action", metavar="ACTION")
    asub.required = True
    for name, handler, help in (
        ("norms", _analyze_norms, "iterate norm table"),
        ("growth", _analyze_growth, "iterate and derivative growth report"),
        ("npm", _analyze_npm, "shrinking-domain seminorm"),
        ("recursion", _analyze_recursion, "empirical recursion constants"),
    ):
        p = command(asub, name, handler, help)
        p.add_argument("--op", dest="operator")
        p.add_argument("--fn", dest="function")
        p.add_argument("--box")
        p.add_argument("--weight")
        p.add_argument("--nodes", type=int)
        p.add_argument("--workers", type=int)
        if name in ("norms", "growth"):
            p.add_argument("--jmax", dest="iterates", type=int)
        if name == "growth":
            p.add_argument("--nmax", dest="derivatives", type=int)
        if name == "npm":
            p.add_argument("--p", dest="p", type=int, default=1)
            p.add_argument("--m", dest="m", type=int, default=1)
        if name == "recursion":
            p.add_argument("--pmax", type=int)
            p.add_argument("--k", type=float)

    metivier = groups.add_parser("metivier", help="non-elliptic counterexample")
    msub = metivier.add_subparsers(dest="action", metavar="ACTION")
    msub.required = True
    p = command(msub, "run", _metivier_run, "counterexample report with elliptic control")
    for flag, kind in (("--s", float), ("--sigma", float), ("--eps", float), ("--delta", float), ("--tol", float)):
        p.add_argument(flag, type=kind)
    p.add_argument("--m", dest="m", type=int, help="use 1*D[m,0] as the operator")
    p.add_argument("--op", dest="metivier_operator")
    p.add_argument("--alpha-max", dest="alpha_max", type=int)
    p.add_argument("--q-max", dest="q_max", type=int)
    p.add_argument("--box", dest="metivier_box", help="box K for L2 iterate norms")
    p.add_argument("--weight", dest="metivier_weight")
    p.add_argument("--target-s", dest="target_s", type=float)
    p.add_argument("--no-control", dest="control", action="store_const", const=False)

    report = groups.add_parser("report", help="report files")
    rsub = report.add_subparsers(dest="action", metavar="ACTION")
    rsub.required = True
    p = command(rsub, "merge", _report_merge, "merge JSON reports")
    p.add_argument("inputs", nargs="+")
    return parser


def _attach_values(argv: Sequence[str]) -> list[str]:
    """Join ``--box -1,1`` into ``--box=-1,1`` so argparse does not read a flag."""
    out: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in LIST_FLAGS:
            value = next(tokens, None)
            if value is None:
                out.append(token)
                break
            out.append(f"{token}={value}")
        else:
            out.append(token)
    return out


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    path = getattr(args, "config", None)
    base = ExperimentConfig.from_file(path) if path else ExperimentConfig.defaults()
    overrides = {f.name: getattr(args, f.name, None) for f in fields(ExperimentConfig)}
    m = getattr(args, "m", None)
    if args.group == "metivier" and m is not None:
        overrides["metivier_operator"] = f"1*D[{m},0]"
    return base.merge(**overrides).validate()


def _grid(config: ExperimentConfig) -> QuadratureGrid:
    return QuadratureGrid(config.nodes)


def _delta_grid(config: ExperimentConfig) -> tuple[float, ...]:
    return tuple(np.geomspace(1e-3, 1.0, config.delta_points))


def _weights_check(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    w = weight_from_spec(config.weight, normalized=config.normalized)
    if config.dry_run:
        return None
    report = check_axioms(w)
    rows = [
        {"axiom": name, "verdict": v.verdict, "detail": v.detail}
        for name, v in report.verdicts.items()
    ]
    return Outcome("weights check", report, rows, not report.ok)


def _weights_conjugate(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    w = weight_from_spec(config.weight, normalized=config.normalized)
    if config.dry_run:
        return None
    table = conjugate_table(YoungConjugate(w, tol=config.conjugate_tol), config.ys)
    rows = [
        {"y": r.y, "value": r.value, "argmax": r.argmax, "oracle": r.oracle, "relative_gap": r.relative_gap}
        for r in table
    ]
    bad = any(r.relative_gap > CONJUGATE_ORACLE_RTOL for r in table)
    return Outcome("weights conjugate", {"weight": w.spec, "rows": rows}, rows, bad)


def _weights_prop21(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    w = weight_from_spec(config.weight, normalized=config.normalized)
    ladder = dyadic_ladder(config.ladder_min, config.ladder_max)
    if config.dry_run:
        return None
    conj = YoungConjugate(w, tol=config.conjugate_tol)
    report = check_prop21(conj, config.jmax, ladder, shift_L=config.shift_base)
    shifts = [
        bound_shift(conj, rho, lam, config.shift_base, config.jmax)
        for rho in SHIFT_RHOS
        for lam in ladder
    ]
    rows = [v.as_dict() for v in report.violations]
    violation = not report.ok or not all(s.verified for s in shifts)
    return Outcome("weights prop21", {"suite": report, "shift": shifts}, rows, violation)


def _term_rows(P: Any) -> list[dict[str, Any]]:
    return [
        {"alpha": format_index(alpha), "coefficient": P.d_coefficient(alpha).key}
        for alpha in P.coefficients
    ]


def _operator_result(P: Any) -> dict[str, Any]:
    return {**P.as_dict(), "d_form": P.to_text(form="d"), "terms": P.terms}


def _op_parse(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    P = parse_operator(config.operator)
    if config.dry_run:
        return None
    return Outcome("op parse", _operator_result(P), _term_rows(P))


def _op_compose(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    if not config.other:
        raise UsageError("op compose needs two operators")
    P = parse_operator(config.operator)
    Q = parse_operator(config.other, P.dim)
    if config.dry_run:
        return None
    PQ = compose(P, Q)
    return Outcome("op compose", _operator_result(PQ), _term_rows(PQ))


def _op_iterate(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    P = parse_operator(config.operator)
    if config.dry_run:
        return None
    Pq = iterate(P, config.power)
    return Outcome("op iterate", {"power": config.power, **_operator_result(Pq)}, _term_rows(Pq))


def _op_symbol(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    P = parse_operator(config.operator)
    if config.dry_run:
        return None
    value = SymbolValue(tuple(args.x), tuple(args.xi), principal_symbol(P, args.x, args.xi))
    return Outcome("op symbol", value, [value.as_dict()])


def _op_ellipticity(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    P = parse_operator(config.operator)
    K = _box_for(config, P.dim)
    if config.dry_run:
        return None
    verdict = ellipticity_check(P, K, seed=config.seed)
    return Outcome("op ellipticity", verdict, [verdict.as_dict()])


def _box_for(config: ExperimentConfig, dim: int) -> Box:
    K = Box.parse(config.box)
    if K.dim != dim:
        raise ConfigError(f"operator has dimension {dim} but the box has {K.dim}")
    return K


def _analysis_inputs(config: ExperimentConfig) -> tuple[Any, Any, Box]:
    P = parse_operator(config.operator)
    K = _box_for(config, P.dim)
    return P, parse(config.function, K.dim), K


def _analyze_norms(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    P, u, K = _analysis_inputs(config)
    if config.dry_run:
        return None
    table = iterate_norms(P, u, K, config.iterates, _grid(config))
    rows = [{"j": j, "norm": n} for j, n in enumerate(table.rows)]
    return Outcome("analyze norms", table, rows)


def _analyze_growth(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    P, u, K = _analysis_inputs(config)
    w = weight_from_spec(config.weight, normalized=config.normalized)
    if config.dry_run:
        return None
    report = membership_report(
        u, P, K, w, config.iterates, config.derivatives, grid=_grid(config), workers=config.workers
    )
    rows = [
        {"side": side.side, "j": j, "norm": n}
        for side in (report.iterate, report.derivative)
        for j, n in enumerate(side.norms)
    ]
    return Outcome("analyze growth", report, rows)


def _analyze_npm(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    _, u, K = _analysis_inputs(config)
    if config.dry_run:
        return None
    value, delta = npm_profile(
        u, args.p, args.m, K, _delta_grid(config), _grid(config), workers=config.workers
    )
    result = {"p": args.p, "m": args.m, "value": value, "delta": delta}
    return Outcome("analyze npm", result, [result])


def _analyze_recursion(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    P, u, K = _analysis_inputs(config)
    w = weight_from_spec(config.weight, normalized=config.normalized)
    if config.dry_run:
        return None
    rows = empirical_recursion_constant(
        u, P, config.pmax, config.k, K, w, _delta_grid(config), _grid(config), workers=config.workers
    )
    return Outcome("analyze recursion", {"rows": rows}, [r.as_dict() for r in rows])


def _metivier_run(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    params = MetivierParams(
        s=config.s,
        sigma=config.sigma,
        eps=config.eps,
        delta=config.delta,
        operator=config.metivier_operator,
        x0=config.x0,
        xi0=config.xi0,
    )
    K = Box.parse(config.metivier_box) if config.metivier_box else None
    if config.dry_run:
        return None

    def report_for(p: MetivierParams) -> Any:
        return counterexample_report(
            p,
            config.metivier_weight,
            config.target_s,
            config.q_max,
            config.alpha_max,
            K,
            config.tol,
            workers=config.workers,
        )

    primary = report_for(params)
    control = report_for(params.control()) if config.control else None
    rows: list[dict[str, Any]] = [
        {"run": "main", "side": "derivative", "order": d.alpha, "abs": abs(d.closed), "leading": d.leading_closed}
        for d in primary.derivatives
    ]
    rows += [
        {"run": "main", "side": "iterate", "order": q * params.m, "abs": abs(z)}
        for q, z in enumerate(primary.iterates)
    ]
    if control is not None:
        rows += [
            {"run": "control", "side": "iterate", "order": q * control.params.m, "abs": abs(z)}
            for q, z in enumerate(control.iterates)
        ]
    violation = primary.verdict not in (None, "counterexample") or (
        control is not None and control.verdict not in (None, "no counterexample")
    )
    return Outcome("metivier run", {"report": primary, "control": control}, rows, violation)


def _report_merge(config: ExperimentConfig, args: argparse.Namespace) -> Outcome | None:
    reports = [load_report(path) for path in args.inputs]
    if config.dry_run:
        return None
    merged = merge_reports(reports)
    return Outcome("report merge", merged["result"], [
        {"command": r.get("command"), "status": r.get("status")} for r in reports
    ], merged["status"] != "ok")


def _emit(worker: Worker, config: ExperimentConfig, outcome: Outcome | None, label: str) -> int:
    if outcome is None:
        worker.say(f"{label}: dry run, inputs and config are valid")
        return EX_OK
    status = "violation" if outcome.violation else "ok"
    report = build_report(outcome.command, outcome.result, config=config, status=status)
    if config.json:
        worker.say(f"wrote {write_json(f'{config.out}.json', report)}")
    if config.csv and outcome.rows:
        worker.say(f"wrote {write_csv(f'{config.out}.csv', outcome.rows)}")
    worker.say(f"{label}: {status}")
    return EX_VIOLATION if outcome.violation else EX_OK


def run(
    argv: Sequence[str] | None = None,
    *,
    stdout: IO | None = None,
    stderr: IO | None = None,
) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        argv = list(sys.argv[1:] if argv is None else argv)
        args = build_parser().parse_args(_attach_values(argv))
        config = _load_config(args)
    except SystemExit as exc:  # --help, --version
        return int(exc.code or 0)
    except UltralabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return EX_USAGE

    label = f"{args.group} {args.action}"
    worker = Worker(
        label=label,
        quiet=bool(getattr(args, "quiet", False)),
        log_level=config.log_level,
        log_file=config.log_file or None,
        stdout=stdout,
        stderr=stderr,
    )
    return worker.execute(lambda w: _emit(w, config, args.handler(config, args), label))


def main(argv: Iterable[str] | None = None) -> NoReturn:
    raise SystemExit(run(list(argv) if argv is not None else None))
