"""Batch front end: ``quasiapprox {build,verify,haar,latin,semigroup}``.

Every command reads a flat ``key = value`` config (see docs/config_grammar.md)
and writes JSON or CSV artifacts atomically into ``--out``.

Exit codes: 0 success, 1 config or input error, 2 construction failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import haar
from .approximation import (SCHEMA_VERSION, ApproximationFailed, ApproximationProblem,
                            approximation_from_json, approximation_to_json, build_approximation,
                            verify_approximation)
from .group_models import CapExceeded, CompactRegion, DEFAULT_CAP, Neighborhood, get_model
from .latin import (GroupWindow, PartialLatinSquare, box_window, embed_partial, verify_latin,
                    window_to_partial)
from .semigroup import (FiniteSemigroup, chain_factors, classify, extract_group,
                        maximal_ideal_chain)

EXIT_OK, EXIT_CONFIG, EXIT_BUILD, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config field {key!r}: {message}")
        self.key = key


@dataclass
class ExperimentConfig:
    command: str = ""
    model: str = ""
    C: list | None = None
    U: float | None = None
    side: str = "left"
    cap: int = DEFAULT_CAP
    max_retries: int = 4
    seed: int = 0
    # verify
    artifact: str = ""
    # haar
    refinements: list = field(default_factory=list)
    function: str = "trig"
    f_params: dict = field(default_factory=dict)
    V: list | None = None
    shifts: list | None = None
    n_shifts: int = 0
    # latin
    window: list | None = None
    window_radius: int | None = None
    universe: list | None = None
    partial: str = ""
    # semigroup
    table: str = ""
    near_unit: int | None = None


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_config(text: str) -> ExperimentConfig:
    """``key = value`` per line; ``#`` starts a comment line. Values are JSON
    literals when they parse as JSON, bare strings otherwise."""
    cfg = ExperimentConfig()
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(key, "unknown key")
        if key in seen:
            raise ConfigError(key, "given twice")
        seen.add(key)
        value = _parse_value(raw)
        kind = _TYPES[key]
        if kind.startswith("int") and not (isinstance(value, int) and not isinstance(value, bool)):
            raise ConfigError(key, f"expected an integer, got {raw!r}")
        if kind.startswith("float") and not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {raw!r}")
        if kind.startswith("str") and not isinstance(value, str):
            value = raw
        if kind.startswith("list") and not isinstance(value, list):
            raise ConfigError(key, f"expected a JSON array, got {raw!r}")
        if kind.startswith("dict") and not isinstance(value, dict):
            raise ConfigError(key, f"expected a JSON object, got {raw!r}")
        setattr(cfg, key, float(value) if kind.startswith("float") else value)
    return cfg


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    return parse_config(text)


# helpers --------------------------------------------------------------------------

def _region(key: str, bounds) -> CompactRegion:
    try:
        return CompactRegion(tuple((float(lo), float(hi)) for lo, hi in bounds))
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"bad region {bounds!r}: {exc}") from None


def _model(cfg: ExperimentConfig, key: str = "model"):
    if not cfg.model:
        raise ConfigError(key, "required")
    try:
        return get_model(cfg.model)
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def _problem(cfg: ExperimentConfig, U: float | None = None) -> ApproximationProblem:
    m = _model(cfg)
    U = cfg.U if U is None else U
    if U is None:
        raise ConfigError("U", "required")
    if not U > 0:
        raise ConfigError("U", f"radius must be positive, got {U}")
    if cfg.side not in ("left", "right"):
        raise ConfigError("side", f"must be left or right, got {cfg.side!r}")
    if cfg.C is None:
        full = m.full_region()
        if full is None:
            raise ConfigError("C", f"required for non-compact model {m.name}")
        C = full
    else:
        C = _region("C", cfg.C)
    if C.dim != m.dim:
        raise ConfigError("C", f"{m.name} needs {m.dim} intervals, got {C.dim}")
    return ApproximationProblem(m, C, Neighborhood(float(U)), cfg.side)


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(key: str, path: str):
    if not path:
        raise ConfigError(key, "required")
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(key, f"cannot read {path}: {exc}") from None


def _verification_json(report) -> dict:
    out = report.to_json()
    for key in ("retries", "o_radius"):
        out.pop(key)
    return out


# commands ----------------------------------------------------------------------

def cmd_build(cfg: ExperimentConfig, out: Path, fmt: str, threads: int) -> int:
    p = _problem(cfg)
    try:
        q, report = build_approximation(p, cfg.max_retries, cfg.cap, threads)
    except (ApproximationFailed, CapExceeded) as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_BUILD
    data = approximation_to_json(q, p, report)
    # verify what was serialized, so a later verify run reproduces it bit for bit
    q2, p2 = approximation_from_json(json.loads(dumps(data)))
    check = verify_approximation(q2, p2)
    data["report"] = {"construction": {"retries": report.retries, "o_radius": report.o_radius},
                      "verification": _verification_json(check)}
    write_atomic(out / "approximation.json", dumps(data))
    write_atomic(out / "report.json", dumps({"schema_version": SCHEMA_VERSION,
                                            **data["report"]}))
    if not check.passed:
        print(f"verification failed: witness {check.witness}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig, out: Path, fmt: str, threads: int) -> int:
    data = _read_json("artifact", cfg.artifact)
    try:
        q, stored = approximation_from_json(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError("artifact", f"malformed approximation: {exc}") from None
    p = stored
    if cfg.model:
        if _model(cfg).name != stored.model.name:
            raise ConfigError("model", f"artifact is for {stored.model.name}, config says {cfg.model}")
        C = _region("C", cfg.C) if cfg.C is not None else stored.C
        if C.dim != stored.model.dim:
            raise ConfigError("C", f"{stored.model.name} needs {stored.model.dim} intervals")
        U = stored.U
        if cfg.U is not None:
            if not cfg.U > 0:
                raise ConfigError("U", f"radius must be positive, got {cfg.U}")
            U = Neighborhood(cfg.U)
        p = ApproximationProblem(stored.model, C, U, stored.side)
    table = q.table
    if table.min() < 0 or table.max() >= q.n:
        raise ConfigError("artifact", "table entries out of range")
    report = verify_approximation(q, p)
    lines_ok = q.lines_permute()
    result = {"schema_version": SCHEMA_VERSION, "verification": _verification_json(report),
              "lines_permute": lines_ok}
    write_atomic(out / "verify.json", dumps(result))
    if not (report.passed and lines_ok):
        print(f"verification failed: witness {report.witness}, lines permute: {lines_ok}",
              file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _test_function(cfg: ExperimentConfig, m):
    kw = dict(cfg.f_params)
    try:
        if cfg.function == "constant":
            return haar.constant(kw.get("value", 1.0))
        if cfg.function == "bump":
            center = kw.get("center", list(m.identity))
            return haar.bump(m, center, kw.get("width", 0.2), kw.get("height", 1.0))
        if cfg.function == "trig":
            return haar.trig(m, kw.get("freq", 1))
    except (TypeError, ValueError) as exc:
        raise ConfigError("f_params", str(exc)) from None
    raise ConfigError("function", f"unknown kind {cfg.function!r}; use constant, bump or trig")


def _shifts(cfg: ExperimentConfig, p: ApproximationProblem) -> list:
    if cfg.shifts is not None:
        return [tuple(float(x) for x in np.atleast_1d(h)) for h in cfg.shifts]
    if cfg.n_shifts <= 0:
        return []
    rng = np.random.default_rng(cfg.seed)
    lo = np.array([b[0] for b in p.C.bounds])
    hi = np.array([b[1] for b in p.C.bounds])
    m = p.model
    pts = m.canonical(rng.uniform(lo, hi, size=(cfg.n_shifts, m.dim)))
    if m.exact:
        pts = np.round(pts)
    return [tuple(float(x) for x in h) for h in pts]


def cmd_haar(cfg: ExperimentConfig, out: Path, fmt: str, threads: int) -> int:
    if not cfg.refinements:
        raise ConfigError("refinements", "need a non-empty list of U radii")
    base = _problem(cfg, cfg.refinements[0])
    m = base.model
    f = _test_function(cfg, m)
    V = _region("V", cfg.V) if cfg.V is not None else base.C
    shifts = _shifts(cfg, base)
    rows = []
    for u in cfg.refinements:
        p = _problem(cfg, u)
        try:
            q, report = build_approximation(p, cfg.max_retries, cfg.cap, threads)
        except (ApproximationFailed, CapExceeded) as exc:
            print(f"construction failed at U={u}: {exc}", file=sys.stderr)
            return EXIT_BUILD
        rows.append(haar.sweep_row(q, f, V, shifts, float(u)))
    if fmt == "csv":
        write_atomic(out / "haar.csv", haar.rows_to_csv(rows))
    else:
        write_atomic(out / "haar.json", dumps({"schema_version": SCHEMA_VERSION,
                                               "model": m.name, "function": cfg.function,
                                               "shifts": [list(h) for h in shifts],
                                               "rows": rows}))
    return EXIT_OK


def _hashable(label):
    return tuple(_hashable(x) for x in label) if isinstance(label, list) else label


def _partial_from_config(cfg: ExperimentConfig):
    if cfg.partial:
        data = _read_json("partial", cfg.partial)
        try:
            triples = [(i, j, _hashable(s)) for i, j, s in data["triples"]]
            symbols = data.get("symbols")
            if symbols is not None:
                symbols = [_hashable(s) for s in symbols]
            return PartialLatinSquare.from_triples(int(data["n"]), triples, symbols)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("partial", str(exc)) from None
    m = _model(cfg)
    universe = _region("universe", cfg.universe) if cfg.universe is not None else None
    try:
        if cfg.window is not None:
            w = GroupWindow(m, cfg.window, universe)
        elif cfg.window_radius is not None:
            w = box_window(m, cfg.window_radius, universe)
        else:
            raise ConfigError("window", "give window, window_radius or partial")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("window", str(exc)) from None
    return window_to_partial(w)


def _label(s):
    return list(s) if isinstance(s, tuple) else s


def cmd_latin(cfg: ExperimentConfig, out: Path, fmt: str, threads: int) -> int:
    partial = _partial_from_config(cfg)
    emb = embed_partial(partial)
    ok = bool(verify_latin(emb.square.table)) and emb.restriction_matches()
    data = {"schema_version": SCHEMA_VERSION, "n": partial.order, "k": partial.symbol_count,
            "order": emb.order, "square": emb.square.to_json(),
            "symbols": [[_label(s), emb.symbol_index[s]] for s in partial.symbols],
            "partial": [[i, j, _label(s)] for i, j, s in partial.triples()],
            "verified": ok}
    write_atomic(out / "latin.json", dumps(data))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_semigroup(cfg: ExperimentConfig, out: Path, fmt: str, threads: int) -> int:
    data = _read_json("table", cfg.table)
    try:
        s = FiniteSemigroup.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("table", str(exc)) from None
    if cfg.near_unit is None or not 0 <= cfg.near_unit < s.n:
        raise ConfigError("near_unit", f"need an element index in 0..{s.n - 1}")
    chain = maximal_ideal_chain(s)
    factors = chain_factors(s, chain)
    result = {"schema_version": SCHEMA_VERSION, "semigroup": s.to_json(),
              "classification": classify(s).to_json(), "chain": chain.to_json(),
              "factors": [{"size": fa.n, **classify(fa).to_json()} for fa in factors],
              "extraction": extract_group(s, cfg.near_unit).to_json()}
    write_atomic(out / "semigroup.json", dumps(result))
    return EXIT_OK


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "haar": cmd_haar,
            "latin": cmd_latin, "semigroup": cmd_semigroup}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasiapprox", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--format", choices=["json", "csv"], default="json")
    ap.add_argument("--threads", type=int, default=1, help="affects speed only")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.command and cfg.command != args.command:
            raise ConfigError("command", f"config is for {cfg.command!r}, not {args.command!r}")
        if args.threads < 1:
            raise ConfigError("--threads", "must be at least 1")
        return COMMANDS[args.command](cfg, Path(args.out), args.format, args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
