"""Command-line entry point.

Indices are zero-based everywhere: a transformation on n points is written
``[i0,i1,...,in-1]`` with ``ik`` the image of point k.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

from . import __version__
from .classifier import analyze, explain
from .ellismodel import StreamParseError, fiber, parse_stream
from .finsemi import (
    CapExceeded, DegreeMismatch, generate_semigroup, kernel,
    parse_generators, rees_decomposition, structure_groups, semigroup_to_json,
    verify_kernel_laws,
)
from .substitution import (
    HypothesisError, SubstitutionError, column_maps, invariants, parse_substitution,
    substitution_report,
)

COMMANDS = ("analyze", "columns", "semigroup", "rees", "fiber", "classify")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None = None
    generators: str | None = None
    stream: str | None = None
    level: int = 24
    samples: int = 32
    seed: int = 0
    format: str = "text"
    element_cap: int = 100_000

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        if self.format not in ("text", "json"):
            raise ValueError("format must be text or json")


def _read_substitution(cfg: RunConfig):
    if not cfg.input_path:
        raise ValueError(f"{cfg.command} needs a substitution file")
    with open(cfg.input_path, encoding="utf-8") as fh:
        return parse_substitution(fh.read())


def _semigroup_payload(cfg: RunConfig, with_rees: bool) -> dict:
    if not cfg.generators:
        raise ValueError(f"{cfg.command} needs --generators")
    S = generate_semigroup(parse_generators(cfg.generators), cap=cfg.element_cap)
    ideals = kernel(S)
    rees = groups = None
    if with_rees:
        rees = rees_decomposition(S, ideals=ideals)
        groups = structure_groups(S, ideals=ideals)
    out = semigroup_to_json(S, ideals, rees, groups)
    out["size"] = len(S)
    out["minimal_left_ideals"] = [list(L) for L in ideals.minimal_left_ideals]
    out["minimal_right_ideals"] = [list(R) for R in ideals.minimal_right_ideals]
    if with_rees:
        out["kernel_laws_pass"] = verify_kernel_laws(S, ideals).passed
    return out


def _semigroup_text(payload: dict) -> str:
    el = payload["elements"]
    lines = [f"degree {payload['degree']}, size {payload['size']}",
             f"kernel ({len(payload['kernel'])}): " + " ".join(format_transformation_list(el[i]) for i in payload["kernel"]),
             f"minimal left ideals: {len(payload['minimal_left_ideals'])}, "
             f"minimal right ideals: {len(payload['minimal_right_ideals'])}, "
             f"minimal idempotents: {len(payload['minimal_idempotents'])}"]
    if "rees" in payload:
        r, g = payload["rees"], payload["structure_groups"]
        lines += [f"|I| = {len(r['I'])}, |Lambda| = {len(r['Lambda'])}, |H| = {len(r['H'])}",
                  "sandwich (rows Lambda, columns I): " + str(r["sandwich"]),
                  f"|Gamma_e| = {len(g['Gamma_e'])}, orthodox = {g['orthodox']}",
                  f"kernel laws pass = {payload['kernel_laws_pass']}"]
    return "\n".join(lines) + "\n"


def format_transformation_list(images) -> str:
    return "[" + ",".join(map(str, images)) + "]"


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one command; returns (exit status, text for stdout)."""
    cmd = cfg.command
    text = None
    if cmd in ("analyze", "classify"):
        theta = _read_substitution(cfg)
        report = analyze(theta, cfg.level, cfg.samples, cfg.seed, cfg.element_cap)
        if cmd == "analyze":
            payload = report.to_json()
            text = explain(report)
        else:
            full = report.to_json()
            payload = {k: full[k] for k in ("verdict", "rule_trace", "evidence") if k in full}
            if "function_group_form" in full:
                payload["function_group_form"] = full["function_group_form"]
            text = f"{report.verdict}: {report.verdict_detail}\n"
    elif cmd == "columns":
        theta = _read_substitution(cfg)
        cols = column_maps(theta, cap=cfg.element_cap)
        payload = substitution_report(theta, cols, invariants(theta, cols))
        text = "".join(f"{k}: {v}\n" for k, v in payload.items())
    elif cmd in ("semigroup", "rees"):
        payload = _semigroup_payload(cfg, with_rees=cmd == "rees")
        text = _semigroup_text(payload)
    else:
        theta = _read_substitution(cfg)
        if not cfg.stream:
            raise ValueError("fiber needs --stream")
        xi = parse_stream(cfg.stream, theta.length)
        payload = fiber(theta, xi, cfg.level).to_json()
        text = "".join(f"{k}: {v}\n" for k, v in payload.items())
    if cfg.format == "json":
        payload = dict(payload)
        payload["tool"] = {"name": "ellislab", "version": __version__}
        payload["config"] = asdict(cfg)
        return 0, json.dumps(payload, indent=2, sort_keys=True) + "\n"
    return 0, text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # exit status 2 is reserved for an exceeded element cap
        self.exit(1, f"error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ellislab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", nargs="?", help="substitution file")
    p.add_argument("--generators", help='comma-separated literals, e.g. "[0,0,1],[1,2,0]"')
    p.add_argument("--stream", help="digits=<d1,...>;tail=<zero|max|cycle:d,...>")
    p.add_argument("--level", type=int, default=24)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--element-cap", type=int, default=100_000)
    p.add_argument("--version", action="version", version=f"ellislab {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.input, args.generators, args.stream, args.level,
                        args.samples, args.seed, args.format, args.element_cap)
        status, out = run(cfg)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SubstitutionError, StreamParseError, DegreeMismatch, HypothesisError,
            ValueError, OSError) as exc:
        print(f"error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
