"""Command-line front end.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure
(tolerance exceeded, truncation violation, vanishing measurement outcome).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as iox
from .analysis import reduced_density_matrix, wigner_grid
from .dynamics import JointSpace
from .errors import DegenerateOutcomeError, TruncationError
from .scenarios import CATALOG, make_spec, measure_internal, run_scenario, scenario_schema

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
FIDELITY_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for numerical failures here.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_out() -> Path:
    return Path(os.environ.get("OUTPUT_DIR", "."))


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ioncats", description="Trapped-ion cat and squeezed state simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ls = sub.add_parser("list-scenarios", help="print the scenario catalog and parameter schemas")
    ls.add_argument("--json", action="store_true", help="machine-readable output")

    run = sub.add_parser("run", help="run one scenario; writes result.json and manifest.json")
    run.add_argument("--scenario", help="catalog name (may also come from the config)")
    run.add_argument("--config", type=Path, help="JSON or key=value file of parameter overrides")
    run.add_argument("--out", type=Path, help="output directory (default $OUTPUT_DIR or .)")

    meas = sub.add_parser("measure", help="project a joint state onto an internal outcome")
    meas.add_argument("--state", type=Path, required=True)
    meas.add_argument("--outcome", required=True, help="bitstring such as du")
    meas.add_argument("--out", type=Path, help="output file (default <out dir>/measurement.json)")

    ver = sub.add_parser("verify", help="closed form vs brute force and analytic oracles")
    ver.add_argument("--deep", action="store_true", help="also rerun every figure at doubled cutoffs")
    ver.add_argument("--json", type=Path, help="also write the report as JSON")

    wig = sub.add_parser("wigner", help="Wigner function of one mode on a grid, as CSV")
    wig.add_argument("--state", type=Path, required=True)
    wig.add_argument("--mode", default="cm", choices=("cm", "stretch"))
    wig.add_argument("--xmin", type=float, required=True)
    wig.add_argument("--xmax", type=float, required=True)
    wig.add_argument("--pmin", type=float, required=True)
    wig.add_argument("--pmax", type=float, required=True)
    wig.add_argument("--res", type=int, required=True)
    wig.add_argument("--out", type=Path, required=True)
    return parser


def cmd_list(args) -> int:
    doc = {name: {"description": entry.description, "params": scenario_schema(name)} for name, entry in CATALOG.items()}
    if args.json:
        print(json.dumps(doc, indent=1, sort_keys=True))
        return EXIT_OK
    for name, info in doc.items():
        print(f"{name}: {info['description']}")
        for key, meta in info["params"].items():
            extra = f" choices={meta['choices']}" if "choices" in meta else ""
            fixed = "" if meta["tunable"] else " (fixed)"
            print(f"    {key} = {meta['default']!r}{fixed}{extra}")
    return EXIT_OK


def _run_spec(args):
    try:
        overrides = iox.load_config(args.config) if args.config else {}
    except ValueError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    name = overrides.pop("scenario", None) or overrides.pop("name", None)
    if args.scenario:
        name = args.scenario
    if not name:
        raise UsageError("no scenario given (use --scenario or a 'scenario' config key)")
    if name not in CATALOG:
        raise UsageError(f"unknown scenario {name!r}; see 'ioncats list-scenarios'")
    try:
        return make_spec(name, **overrides)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_run(args) -> int:
    try:
        spec = _run_spec(args)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    out = args.out or _default_out()
    manifest = {
        "subcommand": "run",
        "scenario": spec.name,
        "config": str(args.config) if args.config else None,
        "output_dir": str(out),
        "version": __version__,
    }
    try:
        result = run_scenario(spec)
    except TruncationError as exc:
        manifest.update({"passed": False, "error": str(exc), "timestamp": _timestamp()})
        iox.write_json_atomic(out / "manifest.json", manifest)
        print(f"truncation: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DegenerateOutcomeError as exc:
        manifest.update({"passed": False, "error": str(exc), "timestamp": _timestamp()})
        iox.write_json_atomic(out / "manifest.json", manifest)
        print(f"measurement: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    passed = 1 - result.reference_fidelity <= FIDELITY_TOL
    iox.write_json_atomic(out / "result.json", iox.result_to_dict(result))
    manifest.update(
        {
            "passed": passed,
            "fidelity": result.reference_fidelity,
            "tails": result.tails,
            "wall_time": result.wall_time,
            "timestamp": _timestamp(),
        }
    )
    iox.write_json_atomic(out / "manifest.json", manifest)
    print(f"{spec.name}: fidelity {result.reference_fidelity:.15f}, max tail {max(result.tails.values()):.2e}")
    if result.measurement is not None:
        print(f"outcome {result.measurement.outcome}: probability {result.measurement.probability:.12g}")
    if not passed:
        print(f"fidelity deficit exceeds {FIDELITY_TOL:g}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_NUMERICAL


def _load_state(path: Path):
    try:
        return iox.read_state(path)
    except OSError as exc:
        raise UsageError(f"cannot read state: {exc}") from None
    except (ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_measure(args) -> int:
    psi, n_ions, cutoffs = _load_state(args.state)
    if n_ions < 1:
        raise UsageError("state carries no ions to measure")
    js = JointSpace.build(n_ions, cutoffs)
    if len(args.outcome) != n_ions or set(args.outcome) - {"d", "u"}:
        raise UsageError(f"outcome must be {n_ions} characters from 'd'/'u', got {args.outcome!r}")
    try:
        record = measure_internal(psi, js, args.outcome)
    except DegenerateOutcomeError as exc:
        print(f"measurement: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out = args.out or _default_out() / "measurement.json"
    iox.write_json_atomic(out, iox.measurement_to_dict(record, cutoffs))
    print(f"outcome {record.outcome}: probability {record.probability:.12g}")
    return EXIT_OK


def mode_density(psi: np.ndarray, n_ions: int, cutoffs, mode: str) -> np.ndarray:
    """Reduced density matrix of one mode from any stored state."""
    names = ("cm", "stretch")[: len(cutoffs)]
    if mode not in names:
        raise UsageError(f"state has modes {names}, not {mode!r}")
    if n_ions:
        return reduced_density_matrix(psi, JointSpace.build(n_ions, cutoffs), mode)
    x = psi.reshape(cutoffs)
    x = np.moveaxis(x, names.index(mode), 0).reshape(cutoffs[names.index(mode)], -1)
    return x @ x.conj().T


def cmd_wigner(args) -> int:
    if args.res < 2:
        raise UsageError("--res must be at least 2")
    if not (args.xmin < args.xmax and args.pmin < args.pmax):
        raise UsageError("grid bounds must satisfy xmin < xmax and pmin < pmax")
    psi, n_ions, cutoffs = _load_state(args.state)
    rho = mode_density(psi, n_ions, cutoffs, args.mode)
    xs = np.linspace(args.xmin, args.xmax, args.res)
    ps = np.linspace(args.pmin, args.pmax, args.res)
    grid = wigner_grid(rho, xs, ps)
    iox.write_wigner_csv(args.out, grid)
    flagged = int(grid.flagged.sum())
    print(f"wrote {args.res}x{args.res} grid to {args.out}; integral {grid.integral():.6f}")
    if flagged:
        print(f"{flagged} grid points reach the Fock cutoff; their values are unreliable", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_checks

    checks = run_checks(deep=args.deep)
    width = max(len(c.name) for c in checks)
    print(f"{'check':<{width}}  status  {'value':>9}  {'tol':>7}  detail")
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{c.name:<{width}}  {status:<6}  {c.value:9.2e}  {c.tolerance:7.0e}  {c.detail}")
    passed = bool(all(c.passed for c in checks))
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    if args.json:
        doc = {
            "version": __version__,
            "timestamp": _timestamp(),
            "passed": passed,
            "checks": [
                {
                    "name": c.name,
                    "passed": bool(c.passed),
                    "value": float(c.value),
                    "tolerance": c.tolerance,
                    "detail": c.detail,
                }
                for c in checks
            ],
        }
        iox.write_json_atomic(args.json, doc)
    return EXIT_OK if passed else EXIT_NUMERICAL


COMMANDS = {
    "list-scenarios": cmd_list,
    "run": cmd_run,
    "measure": cmd_measure,
    "verify": cmd_verify,
    "wigner": cmd_wigner,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
