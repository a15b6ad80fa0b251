"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 unsupported scenario or capacity, 4 numerical contract.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import audit
from .bounds import METHODS, bound_report
from .errors import CapabilityError, ContractError
from .functionals import build_assembly, functional_value, optimal_assembly
from .noise import noise_curve
from .schemes import (
    KINDS,
    ObservableDocument,
    ScenarioSpec,
    coefficient_scheme,
    dumps_observables,
    generated_observables,
    load_observables,
    explicit_observables,
)
from .sos import sos_report

FORMATS = ("json", "csv", "text")


@dataclass
class RunConfig:
    command: str
    scenario: str | None = None
    n: int | None = None
    method: str = "all"
    tol: float = 1e-9
    seed: int = 42
    out: str | None = None
    format: str = "json"
    observables: str | None = None
    refine: float = 1e-6
    source: str = "explicit"
    samples: int = 1000
    points: int = 101


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--scenario", choices=KINDS)
    p.add_argument("--n", type=int)
    p.add_argument("--method", choices=METHODS, default="all")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--observables", help="observable file to audit instead of the built-in sets")
    p.add_argument("--refine", type=float, default=1e-6, help="bisection tolerance for critical visibility")
    p.add_argument("--source", choices=("explicit", "generated"), default="explicit")
    p.add_argument("--samples", type=int, default=1000, help="random perturbations in the gamma audit")
    p.add_argument("--points", type=int, default=101, help="visibility grid size")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asymnet", description="Nonlinear network Bell functionals: values, bounds, certificates, noise.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    sub.add_parser("evaluate", parents=[common], help="functional value of the optimal assembly")
    sub.add_parser("bounds", parents=[common], help="classical bounds by formula, enumeration and mixtures")
    sub.add_parser("sos", parents=[common], help="optimality certificate and constraint table")
    sub.add_parser("noise", parents=[common], help="Werner-noise sweep and critical visibility")
    sub.add_parser("report", parents=[common], help="run every check and print a pass/fail table")
    sub.add_parser("observables", parents=[common], help="export an observable file")
    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(ns).items() if k != "format"})
    if ns.format:
        cfg.format = ns.format
    elif ns.out and Path(ns.out).suffix in (".csv", ".txt"):
        cfg.format = "csv" if ns.out.endswith(".csv") else "text"
    return cfg


def _spec(cfg: RunConfig) -> ScenarioSpec:
    if cfg.scenario is None:
        raise UsageError(f"{cfg.command} requires --scenario")
    return ScenarioSpec(cfg.scenario, cfg.n)


def _flat_text(data: dict, prefix: str = "") -> list[str]:
    lines = []
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            lines += _flat_text(v, key + ".")
        else:
            lines.append(f"{key}: {json.dumps(v)}")
    return lines


def _render(data: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    if fmt == "csv":
        rows = _flat_text(data)
        return "key,value\n" + "".join(f"{r.split(': ', 1)[0]},\"{r.split(': ', 1)[1].replace(chr(34), chr(39))}\"\n" for r in rows)
    return "\n".join(_flat_text(data)) + "\n"


def _custom_assembly(cfg: RunConfig, spec: ScenarioSpec):
    doc = load_observables(cfg.observables)
    if doc.spec != spec:
        raise ContractError(f"observable file is for {doc.spec.kind} n={doc.spec.n}, not {spec.kind} n={spec.n}")
    return build_assembly(spec, doc.observables, coefficient_scheme(spec, generated=cfg.source == "generated"))


def cmd_evaluate(cfg: RunConfig) -> str:
    spec = _spec(cfg)
    asm = _custom_assembly(cfg, spec) if cfg.observables else optimal_assembly(spec, source=cfg.source)
    result = functional_value(asm)
    if cfg.format == "text":
        terms = " ".join(f"{t:.9f}" for t in result.terms)
        return f"scenario {spec.kind} n {spec.n}\nterms {terms}\ntotal {result.total:.9f}\n"
    return _render(result.to_dict(), cfg.format)


def cmd_bounds(cfg: RunConfig) -> str:
    spec = _spec(cfg)
    rep = bound_report(spec, cfg.method, max(cfg.tol, 1e-12))
    if cfg.format == "text":
        lines = [f"scenario {spec.kind} n {spec.n}"]
        if rep.formula is not None:
            lines.append(f"formula {rep.formula:.6f}")
        if rep.mixed is not None:
            lines.append(f"mixed {rep.mixed.value:.6f}")
        if rep.deterministic is not None:
            lines.append(f"deterministic {rep.deterministic.value:.6f}")
        lines += [f"flag {k} {v}" for k, v in rep.flags.items()]
        return "\n".join(lines) + "\n"
    return _render(rep.to_dict(), cfg.format)


def cmd_sos(cfg: RunConfig) -> str:
    spec = _spec(cfg)
    asm = _custom_assembly(cfg, spec) if cfg.observables else optimal_assembly(spec, source=cfg.source)
    rep = sos_report(spec, asm, cfg.samples if not cfg.observables else 0, cfg.seed, cfg.source)
    if cfg.format == "text":
        lines = [
            f"scenario {spec.kind} n {spec.n}",
            f"predicted {rep.predicted:.6f}",
            f"value {rep.value:.6f}",
            f"max residual {rep.residuals.max():.3e}",
            f"gamma {rep.gamma:.3e}",
            f"constraints {'pass' if rep.constraints.passed else 'FAIL'} (max violation {rep.constraints.max_violation:.3e})",
        ]
        lines += [f"note {n}" for n in rep.notes]
        return "\n".join(lines) + "\n"
    return _render(rep.to_dict(), cfg.format)


def cmd_noise(cfg: RunConfig) -> str:
    spec = _spec(cfg)
    curve = noise_curve(spec, cfg.points, cfg.refine)
    if cfg.format == "csv":
        return curve.to_csv()
    if cfg.format == "text":
        emp = curve.v_critical_empirical
        return (
            f"scenario {spec.kind} n {spec.n}\n"
            f"v_critical_empirical {'none' if emp is None else f'{emp:.6f}'}\n"
            f"v_critical_formula {curve.v_critical_formula:.6f}\n"
        )
    return curve.to_json() + "\n"


def cmd_report(cfg: RunConfig) -> str:
    data = audit.report(cfg.seed, cfg.samples)
    if cfg.format == "text":
        return audit.report_text(data)
    return audit.report_json(data)


def cmd_observables(cfg: RunConfig) -> str:
    spec = _spec(cfg)
    generated = cfg.source == "generated"
    obs = generated_observables(spec) if generated else explicit_observables(spec)
    asm = build_assembly(spec, obs, coefficient_scheme(spec, generated=generated))
    return dumps_observables(ObservableDocument(spec, {p: asm.observables[p] for p in asm.parties}, cfg.source))


COMMANDS = {
    "evaluate": cmd_evaluate,
    "bounds": cmd_bounds,
    "sos": cmd_sos,
    "noise": cmd_noise,
    "report": cmd_report,
    "observables": cmd_observables,
}


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"asymnet: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"asymnet: error: {exc}", file=sys.stderr)
        return 2
    except CapabilityError as exc:
        print(f"asymnet: unsupported: {exc}", file=sys.stderr)
        return 3
    except (ContractError, ValueError, KeyError) as exc:
        print(f"asymnet: contract violation: {exc}", file=sys.stderr)
        return 4
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
