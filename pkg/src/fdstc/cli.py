"""Command-line front end.

Every command accepts ``--preset`` (built-in code) or a code file written by
``construct``, plus an optional YAML ``--config`` whose keys mirror the
command's dataclass fields. Exit codes: 0 ok, 2 hypothesis violated,
3 budget exceeded, 4 input/output or configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import platform
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np
import yaml

from . import chansim, presets
from .decode import (DecodeProblem, grouped_decode, min_det, min_rank, ml_exhaustive,
                     sphere_decode)
from .errors import BudgetExceeded, FdstcError, HypothesisViolated, Infeasible, TooLarge
from .fdan import analyze, verify_r_structure
from .numfield import Automorphism, NumberField
from .stcode import (STCode, SimoTower, build_mimo_code, build_simo_code, enumerate_codebook,
                     load_code, random_block_code, save_code)

EXIT_OK, EXIT_HYPOTHESIS, EXIT_BUDGET, EXIT_IO = 0, 2, 3, 4


class ConfigError(FdstcError):
    pass


@dataclass
class CodeSource:
    """Where a code comes from: a preset name, a file, or an explicit construction tree."""
    preset: str | None = None
    file: str | None = None
    construction: dict | None = None


@dataclass
class ConstructConfig:
    source: CodeSource = field(default_factory=CodeSource)


@dataclass
class AnalyzeConfig:
    source: CodeSource = field(default_factory=CodeSource)
    budget: int = 2_000_000
    r_trials: int = 100
    include_matrix: bool = False


@dataclass
class MindetConfig:
    source: CodeSource = field(default_factory=CodeSource)
    alphabet: list = field(default_factory=lambda: [-1, 1])
    mode: str = "linear"
    budget: int = 1 << 20
    strict: bool = False


@dataclass
class DecodeTestConfig:
    source: CodeSource = field(default_factory=CodeSource)
    instances: int = 100
    alphabet: list = field(default_factory=lambda: [-1, 1])
    snr_db: float = 10.0


@dataclass
class SimulateConfig:
    source: CodeSource = field(default_factory=CodeSource)
    scenario: dict = field(default_factory=lambda: {"kind": "relay"})
    decoder: str = "sphere"
    snr_grid: list = field(default_factory=lambda: [0, 5, 10, 15, 20])
    trials: int = 1000
    alphabet: list = field(default_factory=lambda: [-1, 1])


@dataclass
class ReportConfig:
    source: CodeSource = field(default_factory=CodeSource)
    mindet_budget: int = 1 << 16


CONFIGS = {"construct": ConstructConfig, "analyze": AnalyzeConfig, "mindet": MindetConfig,
           "decode-test": DecodeTestConfig, "simulate": SimulateConfig, "report": ReportConfig}


def _fill(cls, tree: dict, where: str):
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(tree) - set(names))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    kwargs = {}
    for k, v in tree.items():
        if k == "source":
            if not isinstance(v, dict):
                raise ConfigError(f"{where}.source must be a mapping")
            v = _fill(CodeSource, v, f"{where}.source")
        kwargs[k] = v
    return cls(**kwargs)


def load_config(command: str, path: str | None) -> object:
    tree = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        tree = yaml.safe_load(text) or {}
        if not isinstance(tree, dict):
            raise ConfigError("config root must be a mapping")
    return _fill(CONFIGS[command], tree, command)


# ---------------------------------------------------------------------------
# code construction from a parameter tree

def _elem(K: NumberField, v):
    if isinstance(v, list):
        return K([Fraction(str(x)) for x in v])
    return K(Fraction(str(v)))


CONSTRUCTION_KEYS = {
    "simo": {"kind", "N", "field", "eta", "m", "a", "gamma", "certify_q", "allow_unverified",
             "override_reason", "label"},
    "mimo": {"kind", "p", "a", "gamma", "theta", "allow_unverified", "override_reason", "label"},
    "random": {"kind", "block_size", "blocks", "seed", "random_kind"},
}


def build_from_tree(tree: dict) -> STCode:
    kind = tree.get("kind")
    if kind not in CONSTRUCTION_KEYS:
        raise ConfigError(f"construction.kind must be one of {sorted(CONSTRUCTION_KEYS)}")
    unknown = sorted(set(tree) - CONSTRUCTION_KEYS[kind])
    if unknown:
        raise ConfigError(f"unknown key(s) in construction: {', '.join(unknown)}")
    if kind == "simo":
        K = NumberField.from_config(tree["field"])
        tower = SimoTower(K, Automorphism(K, _elem(K, tree["eta"]), "eta"), m=int(tree["m"]),
                          a=int(tree["a"]), gamma=_elem(K, tree["gamma"]),
                          certify_q=tree.get("certify_q"),
                          allow_unverified=bool(tree.get("allow_unverified", False)),
                          override_reason=tree.get("override_reason", ""),
                          label=tree.get("label", ""))
        return build_simo_code(int(tree["N"]), tower)
    if kind == "mimo":
        from .numfield import cyclotomic_real
        K = cyclotomic_real(int(tree["p"]))
        return build_mimo_code(int(tree["p"]), int(tree["a"]), _elem(K, tree["gamma"]),
                               _elem(K, tree["theta"]), label=tree.get("label", ""),
                               allow_unverified=bool(tree.get("allow_unverified", False)),
                               override_reason=tree.get("override_reason", ""))
    return random_block_code(int(tree["block_size"]), int(tree["blocks"]), int(tree.get("seed", 0)),
                             tree.get("random_kind", "gaussian"))


def resolve_code(src: CodeSource) -> STCode:
    given = [x is not None for x in (src.preset, src.file, src.construction)]
    if sum(given) != 1:
        raise ConfigError("give exactly one of --preset, a code file, or a construction tree")
    if src.preset is not None:
        try:
            return presets.build(src.preset)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    if src.file is not None:
        try:
            return load_code(src.file)
        except OSError as exc:
            raise ConfigError(f"cannot read code file: {exc}") from exc
    return build_from_tree(src.construction)


# ---------------------------------------------------------------------------
# commands; each returns the report text

def _provenance_text(code: STCode) -> list:
    p = code.provenance
    lines = [f"construction {p.get('construction', '?')}", f"label {p.get('label', '')}",
             f"k {code.k}", f"n {code.n}", f"T {code.T}", f"rate {code.rate}"]
    if p.get("warning"):
        lines.append(f"WARNING {p['warning']}")
    for c in p.get("checks", []):
        lines.append(f"check {c}")
    cert = p.get("certificate")
    lines.append(f"certificate {cert['summary'] if cert else 'none'}")
    return lines


def cmd_construct(cfg: ConstructConfig, args) -> str:
    code = resolve_code(cfg.source)
    if args.out:
        save_code(code, args.out)
    return "\n".join(_provenance_text(code)) + "\n"


def cmd_analyze(cfg: AnalyzeConfig, args) -> str:
    code = resolve_code(cfg.source)
    rep = analyze(code, cfg.budget)
    if cfg.r_trials > 0:
        rs = verify_r_structure(code, rep.partition, trials=cfg.r_trials, seed=args.seed, strict=False)
        rep.r_max_violation = rs.max_violation
    head = rep.partition.describe(code.k)
    return head + "\n" + rep.to_text(cfg.include_matrix)


def cmd_mindet(cfg: MindetConfig, args) -> str:
    code = resolve_code(cfg.source)
    cb = enumerate_codebook(code, cfg.alphabet, materialize=False)
    d = min_det(cb, cfg.mode, cfg.budget, args.seed, cfg.strict)
    r = min_rank(cb, cfg.mode, min(cfg.budget, 10_000), args.seed)
    kind = "exact" if d.exhaustive else "sampled"
    lines = [f"delta_min {d.value:.12g} ({kind}, {d.evaluated} of {d.total} differences)",
             f"min_rank {int(r.value)} of {min(code.n, code.T)}"]
    if d.argmin is not None:
        lines.append("argmin " + " ".join(f"{v:g}" for v in d.argmin))
    return "\n".join(lines) + "\n"


def cmd_decode_test(cfg: DecodeTestConfig, args) -> str:
    code = resolve_code(cfg.source)
    S = tuple(sorted(int(v) for v in cfg.alphabet))
    if len(S) ** code.k > 1 << 22:
        raise Infeasible(f"exhaustive reference needs |S|^{code.k} leaves")
    part = analyze(code).partition
    mismatch = 0
    nodes = {"sphere": 0, "grouped": 0, "ml": 0}
    n_d = max(1, -(-code.k // (2 * code.T)))
    amp = 10 ** (cfg.snr_db / 20)
    for t in range(cfg.instances):
        rng = np.random.default_rng([args.seed, t])
        s = np.asarray(S, float)[rng.integers(0, len(S), code.k)]
        H = chansim.cgauss(rng, (n_d, code.n)) * amp
        Y = H @ code.codeword(s) + chansim.cgauss(rng, (n_d, code.T))
        p = DecodeProblem(Y, H, code, S)
        ref = ml_exhaustive(p)
        for name, fn in (("sphere", sphere_decode), ("grouped", lambda q: grouped_decode(q, part))):
            r = fn(p)
            nodes[name] += r.nodes
            if not np.array_equal(r.s, ref.s):
                mismatch += 1
        nodes["ml"] += ref.nodes
    lines = [f"instances {cfg.instances}", f"mismatches {mismatch}",
             f"partition {part.describe(code.k)}"]
    lines += [f"avg_nodes_{k} {v / cfg.instances:.6g}" for k, v in nodes.items()]
    return "\n".join(lines) + "\n"


def _scenario(tree: dict, code: STCode):
    tree = dict(tree)
    kind = tree.pop("kind", "relay")
    if kind == "relay":
        cls = chansim.RelayScenario
        n_s = int(tree.get("n_s", code.provenance.get("n_s", 1)))
        tree.setdefault("n_s", n_s)
        tree.setdefault("N", max(1, code.n // (2 * n_s)))
    elif kind == "mac":
        cls = chansim.MacScenario
    else:
        raise ConfigError(f"scenario.kind must be relay or mac, not {kind!r}")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(tree) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in scenario: {', '.join(unknown)}")
    for key in ("pi", "snr_db"):
        if key in tree:
            tree[key] = tuple(tree[key])
    return cls(**tree)


def cmd_simulate(cfg: SimulateConfig, args) -> str:
    code = resolve_code(cfg.source)
    scn = _scenario(cfg.scenario, code)
    rows = chansim.run_bler(code, scn, cfg.decoder, cfg.snr_grid, cfg.trials, args.seed,
                            cfg.alphabet, args.threads)
    return chansim.to_csv(rows)


def cmd_report(cfg: ReportConfig, args) -> str:
    code = resolve_code(cfg.source)
    lines = _provenance_text(code)
    rep = analyze(code)
    lines.append(rep.partition.describe(code.k))
    cb = enumerate_codebook(code, (-1, 1), materialize=False)
    d = min_det(cb, "linear", cfg.mindet_budget, args.seed)
    lines.append(f"delta_min {d.value:.12g} ({'exact' if d.exhaustive else 'sampled'})")
    return "\n".join(lines) + "\n"


COMMANDS = {"construct": cmd_construct, "analyze": cmd_analyze, "mindet": cmd_mindet,
            "decode-test": cmd_decode_test, "simulate": cmd_simulate, "report": cmd_report}


# ---------------------------------------------------------------------------

def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "scipy", "sympy", "pyyaml"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def manifest(command: str, cfg, seed: int, threads: int) -> dict:
    resolved = json.dumps(dataclasses.asdict(cfg), sort_keys=True, default=str)
    return {"command": command, "config": json.loads(resolved),
            "config_sha256": hashlib.sha256(resolved.encode()).hexdigest(),
            "seed": seed, "threads": threads, "versions": _versions()}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_IO)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fdstc", description="Fast-decodable space-time codes for relay and MAC channels.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("code", nargs="?", help="code file written by construct")
        p.add_argument("--preset", help=f"built-in code: {', '.join(sorted(presets.PRESETS))}")
        p.add_argument("--config", help="YAML file with command settings")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", help="output path (code file for construct, report or CSV otherwise)")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config)
        if args.preset is not None:
            cfg.source = CodeSource(preset=args.preset)
        elif args.code is not None:
            cfg.source = CodeSource(file=args.code)
        text = COMMANDS[args.command](cfg, args)
        if args.out and args.command != "construct":
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        if args.out:
            man = manifest(args.command, cfg, args.seed, args.threads)
            Path(args.out + ".manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
    except HypothesisViolated as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (BudgetExceeded, Infeasible, TooLarge) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, OSError, yaml.YAMLError, ValueError, TypeError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
