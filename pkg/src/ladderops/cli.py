"""Command-line front end.

    ladderops verify --lmax 8 --tol 1e-10 --format json
    ladderops kernel --op Q.z --m 0 --lmax 4
    ladderops generate --lmax 6 --format csv
    ladderops dump-operator --op R.z --lmax 2

Exit status is 0 on success, 1 when a gating verification check fails (the
report is still written) and 2 for invalid arguments.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import ladder, operators as ops, report, verification
from .basis import BasisSpec, build_grid
from .errors import LadderOpsError
from .operators import SparseOperator

COMMANDS = ("verify", "kernel", "generate", "dump-operator")
DUMP_THRESHOLD = 1e-14


@dataclass(frozen=True)
class RunConfig:
    command: str
    l_max: int
    tolerance: float = verification.DEFAULT_TOLERANCE
    operator_selector: str | None = None
    m: int | None = None
    output_format: str = "json"
    output_path: Path | None = None


class UsageError(Exception):
    pass


def validate(config: RunConfig) -> None:
    if config.command not in COMMANDS:
        raise UsageError(f"unknown command {config.command!r}")
    if config.output_format not in ("json", "csv"):
        raise UsageError(f"unknown format {config.output_format!r}")
    if config.l_max < 0:
        raise UsageError("--lmax must be non-negative")
    if config.command == "verify" and config.l_max < 4:
        raise UsageError("verify needs --lmax >= 4")
    if config.command == "kernel":
        if config.m is None:
            raise UsageError("kernel needs --m")
        if config.l_max < abs(config.m) + 1:
            raise UsageError(f"kernel at m={config.m} needs --lmax >= {abs(config.m) + 1}")
    if config.command == "generate" and config.l_max < 2:
        raise UsageError("generate needs --lmax >= 2")
    if config.command == "dump-operator" and not config.operator_selector:
        raise UsageError("dump-operator needs --op")


_SELECTOR = re.compile(r"^(L|N|NxL|R|Q|Z)\.(z|plus|minus|squared)(?:@(.+))?$")


def build_selected(selector: str, basis: BasisSpec, grid) -> SparseOperator:
    """Operator named by a selector such as ``R.z``, ``Q.plus@analytic``, ``R.z@l=2``
    or ``Z.z@spectral-last``."""
    match = _SELECTOR.match(selector)
    if not match:
        raise UsageError(f"cannot parse operator selector {selector!r}")
    name, comp, variant = match.groups()
    if comp == "squared" and name != "L":
        raise UsageError(f"{name} has no 'squared' component")
    if name == "L":
        if variant:
            raise UsageError("L takes no variant")
        kind = {"z": "Lz", "plus": "Lplus", "minus": "Lminus", "squared": "Lsquared"}[comp]
        return ops.build_angular(basis, kind)
    if name == "N":
        return ops.build_direction(basis, grid, {"z": "Nz", "plus": "Nplus", "minus": "Nminus"}[comp])
    if name == "NxL":
        return ops.n_cross_l(basis, grid, comp)
    if name == "Z":
        return ops.build_kr_z(basis, grid, comp, variant or "spectral-first")
    if variant is None:
        return ops.build_shift(basis, grid, name, comp)
    if variant == "analytic":
        return ops.build_analytic_shift(basis, name, comp)
    half = re.fullmatch(r"l=(\d+)", variant)
    if half:
        return ops.build_half_finished(basis, grid, name, int(half.group(1)), comp)
    raise UsageError(f"unknown variant {variant!r} for {name}")


def _verify(config: RunConfig, basis, grid) -> tuple[str, int]:
    checks = verification.run_suite(basis, grid, config.tolerance)
    ok = verification.gating_pass(checks)
    if config.output_format == "json":
        text = report.dumps({
            "l_max": basis.l_max,
            "tolerance": config.tolerance,
            "pass": ok,
            "checks": [c.to_record() for c in checks if not c.exploratory],
            "exploratory": [c.to_record() for c in checks if c.exploratory],
        })
    else:
        rows = [
            (c.id, "exploratory" if c.exploratory else "gating", c.margin, c.residual_max,
             c.residual_fro, c.tolerance, str(c.passed).lower(), c.note)
            for c in checks
        ]
        text = report.csv_text(
            ["id", "kind", "margin", "residual_max", "residual_fro", "tolerance", "pass", "note"],
            rows,
            [f"pass={str(ok).lower()}"],
        )
    return text, 0 if ok else 1


def _kernel(config: RunConfig, basis, grid) -> tuple[str, int]:
    op_id = {"Q.z": "Qz", "Q.plus": "Qplus", "Q.minus": "Qminus"}.get(config.operator_selector or "Q.z")
    if op_id is None:
        raise UsageError(f"kernel --op must be Q.z, Q.plus or Q.minus, got {config.operator_selector!r}")
    sol = ladder.kernel_basis(op_id, config.m, basis, grid)
    if config.output_format == "json":
        return report.dumps(sol.to_record()), 0
    rows = [
        (k, l, m, re_, im_)
        for k, vec in enumerate(sol.to_record()["vectors"])
        for l, m, re_, im_ in vec
    ]
    comments = [f"dimension={sol.dimension}", f"matches_prediction={str(sol.matches_prediction()).lower()}"]
    return report.csv_text(["vector", "l", "m", "re", "im"], rows, comments), 0


def _generate(config: RunConfig, basis, grid) -> tuple[str, int]:
    states, summary = ladder.generate_all(basis, grid)
    findings = [
        ladder.literal_negative_m_recipe(m, basis, grid) for m in range(-(basis.l_max - 1), 0)
    ]
    if config.output_format == "json":
        return report.dumps({
            "l_max": basis.l_max,
            "states": [
                {"l": s.target.l, "m": s.target.m, "fidelity": s.fidelity, "recipe": s.recipe_text,
                 "scale_factors": s.scale_factors}
                for s in states
            ],
            "summary": summary.to_record(),
            "findings": {"literal_q_plus_recipe": findings},
        }), 0
    rows = [(s.target.l, s.target.m, s.fidelity, s.recipe_text) for s in states]
    comments = [
        f"summary count={summary.count} min_fidelity={report.fmt_float(summary.min_fidelity)} "
        f"max_residual={report.fmt_float(summary.max_residual)}"
    ]
    comments += [
        f"finding literal Q_plus^{abs(f['m'])}|0,0> zero_ket_at_step={f['zero_ket_at_step']}" for f in findings
    ]
    return report.csv_text(["l", "m", "fidelity", "recipe"], rows, comments), 0


def _dump(config: RunConfig, basis, grid) -> tuple[str, int]:
    op = build_selected(config.operator_selector, basis, grid)
    entries = sorted(
        op.entries(DUMP_THRESHOLD).items(),
        key=lambda kv: (basis.index(kv[0][1]), basis.index(kv[0][0])),
    )
    rows = [(r.l, r.m, c.l, c.m, v.real, v.imag) for (r, c), v in entries]
    header = ["row_l", "row_m", "col_l", "col_m", "re", "im"]
    if config.output_format == "csv":
        return report.csv_text(header, rows), 0
    return report.dumps({
        "operator": config.operator_selector,
        "l_max": basis.l_max,
        "entries": [dict(zip(header, row)) for row in rows],
    }), 0


_HANDLERS = {"verify": _verify, "kernel": _kernel, "generate": _generate, "dump-operator": _dump}


def run(config: RunConfig) -> tuple[str, int]:
    """Execute one command and return (report text, exit status)."""
    validate(config)
    basis = BasisSpec(config.l_max)
    grid = build_grid(basis)
    return _HANDLERS[config.command](config, basis, grid)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ladderops", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = {"verify": 8, "kernel": 4, "generate": 6, "dump-operator": 2}
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--lmax", type=int, default=defaults[name], help="truncation degree")
        p.add_argument("--tol", type=float, default=verification.DEFAULT_TOLERANCE)
        p.add_argument("--op", dest="op", default=None, help="operator selector, e.g. R.z or Z.z@spectral-first")
        p.add_argument("--m", type=int, default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json" if name != "dump-operator" else "csv")
        p.add_argument("--out", type=Path, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    config = RunConfig(
        command=args.command,
        l_max=args.lmax,
        tolerance=args.tol,
        operator_selector=args.op,
        m=args.m,
        output_format=args.format,
        output_path=args.out,
    )
    try:
        text, status = run(config)
    except (UsageError, LadderOpsError) as exc:
        parser.print_usage(sys.stderr)
        print(f"ladderops: error: {exc}", file=sys.stderr)
        return 2
    if config.output_path is not None:
        config.output_path.write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
