"""Command-line entry point: ``dforge <command> --config <path>``.

A config is a YAML or JSON mapping. Unknown keys are rejected. Example::

    command: spectrum
    source:
      gadget: {preset: fig1, params: [0.3, 1.1]}
    t: 1

Exit codes: 0 success, 2 invalid input, 3 size cap exceeded, 1 anything
else (numerical non-convergence, I/O).
"""

from __future__ import annotations

import argparse
import contextlib
import datetime
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .bounds import DEFAULT_C, bounds_report, speedup_params
from .ensembles import UnitaryEnsemble, classify_invertibility
from .errors import CapacityError, DforgeError, DomainError
from .gadgets import GraphGadget, apply_outcomes, build_gadget, enumerate_ensemble
from .moments import (block_factorization_check, design_epsilon, design_report, tpe_eta,
                      write_eigenvalues_csv)
from .sampler import (L1_WINDOW, anticoncentration_estimate, exact_distribution,
                      porter_thomas_histogram, sample_distribution, tv_distance)
from .universality import check_universal

SCHEMA = 1
EXIT_OK, EXIT_FAILURE, EXIT_DOMAIN, EXIT_CAPACITY = 0, 1, 2, 3


class ConfigError(DomainError):
    """Invalid config; the message starts with the offending key path."""


# --------------------------------------------------------------------------
# parameter validation


def _pos_int(path, v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{path}: expected a positive integer, got {v!r}")
    return v


def _nonneg_int(path, v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConfigError(f"{path}: expected a non-negative integer, got {v!r}")
    return v


def _real(path, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}: expected a finite number, got {v!r}")
    return float(v)


def _unit_open(path, v):
    v = _real(path, v)
    if not 0 < v < 1:
        raise ConfigError(f"{path}: {v!r} must lie in (0, 1)")
    return v


def _unit_half_open(path, v):
    v = _real(path, v)
    if not 0 < v <= 1:
        raise ConfigError(f"{path}: {v!r} must lie in (0, 1]")
    return v


def _positive(path, v):
    v = _real(path, v)
    if v <= 0:
        raise ConfigError(f"{path}: {v!r} must be positive")
    return v


def _bool(path, v):
    if not isinstance(v, bool):
        raise ConfigError(f"{path}: expected true or false, got {v!r}")
    return v


def _choice(*options):
    def check(path, v):
        if v not in options:
            raise ConfigError(f"{path}: {v!r} is not one of {list(options)}")
        return v
    return check


def _path(path, v):
    if not isinstance(v, str) or not v:
        raise ConfigError(f"{path}: expected a file path")
    return v


def _constant(path, v):
    # C is validated against (0, 1] here; C = 1 passes parsing and fails in
    # the bound itself, which has no finite solution there
    return _unit_half_open(path, v)


PARAMS = {
    "t": _pos_int, "n": _pos_int, "shots": _pos_int, "seed": _nonneg_int, "q_max": _pos_int,
    "alpha": _unit_open, "eps_d": _unit_open, "eps_prime": _unit_open,
    "a": _unit_half_open, "C": _constant,
    "tol": _positive, "exact_tol": _positive,
    "method": _choice("auto", "dense", "arnoldi", "iterative"),
    "log": _choice("natural", "log2"),
    "epsilon": _bool,
    "eigenvalues_csv": _path, "samples_csv": _path, "histogram_json": _path,
    "distribution_json": _path,
}

# command -> (allowed source kinds, required params, defaults)
COMMANDS = {
    "spectrum": ({"gadget", "ensemble"}, {"t"}, {"method": "auto"}),
    "eta": ({"gadget", "ensemble"}, {"t"}, {"method": "auto"}),
    "design-check": ({"gadget", "ensemble"}, {"t"},
                     {"method": "auto", "epsilon": True, "exact_tol": 1e-10}),
    "universality": ({"gadget", "ensemble"}, set(), {"tol": 1e-8, "q_max": 10_000}),
    "classify": ({"gadget", "ensemble"}, set(), {"tol": 1e-8}),
    "bounds": (set(), {"n", "t"},
               {"C": DEFAULT_C, "a": 1.0, "eps_d": 0.1, "log": "natural"}),
    "sample": ({"gadget"}, {"shots", "seed"}, {}),
    "anticoncentration": ({"gadget", "ensemble", "haar"}, {"alpha", "eps_d", "shots", "seed"}, {}),
    "factorization-check": ({"gadget", "ensemble"}, {"n"}, {"t": 1}),
}
OPTIONAL = {
    "spectrum": {"eigenvalues_csv"},
    "design-check": {"eigenvalues_csv"},
    "bounds": {"eps_prime", "speedup"},
    "sample": {"samples_csv", "histogram_json", "distribution_json"},
    "anticoncentration": set(),
}
TOP_KEYS = {"command", "source", "caps", "out"}
CAP_KEYS = {"max_dim"}
SPEEDUP_KEYS = {"mu", "delta", "alpha", "eps_d"}


@dataclass
class RunConfig:
    command: str
    source: Optional[dict]
    params: dict
    caps: dict = field(default_factory=dict)
    out: Optional[str] = None
    base_dir: str = "."
    # worker threads for shot sampling; a scheduling choice, not part of the report
    threads: int = 1

    def to_dict(self) -> dict:
        d = {"command": self.command}
        if self.source is not None:
            d["source"] = self.source
        d.update(self.params)
        if self.caps:
            d["caps"] = dict(self.caps)
        if self.out is not None:
            d["out"] = self.out
        return d


def _load_text(text: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<root>: not valid YAML or JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError("<root>: config must be a mapping")
    return data


def _parse_source(kinds, raw, command):
    if not kinds:
        if raw is not None:
            raise ConfigError(f"source: command {command!r} takes no source")
        return None
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError(f"source: expected exactly one of {sorted(kinds)}")
    (kind, body), = raw.items()
    if kind not in kinds:
        raise ConfigError(f"source.{kind}: command {command!r} accepts {sorted(kinds)}")
    if not isinstance(body, dict):
        raise ConfigError(f"source.{kind}: expected a mapping")
    if kind == "haar":
        if set(body) != {"n"}:
            raise ConfigError("source.haar: expected exactly the key 'n'")
        _pos_int("source.haar.n", body["n"])
    elif kind == "gadget":
        try:
            build_gadget(body)
        except DomainError as exc:
            raise ConfigError(f"source.gadget: {exc}") from exc
    else:
        extra = set(body) - {"file", "probs", "unitaries"}
        if extra:
            raise ConfigError(f"source.ensemble.{sorted(extra)[0]}: unknown key")
        if ("file" in body) == ("unitaries" in body):
            raise ConfigError("source.ensemble: give either 'file' or 'unitaries'")
        if "file" in body:
            _path("source.ensemble.file", body["file"])
    return {kind: body}


def parse_config(text: str, command: Optional[str] = None, seed: Optional[int] = None,
                 base_dir: str = ".") -> RunConfig:
    """Validate a YAML/JSON config and fill defaults.

    ``command`` and ``seed`` come from the command line and take precedence;
    a command given both ways must agree.
    """
    data = _load_text(text)
    cfg_command = data.get("command")
    if command is not None and cfg_command is not None and command != cfg_command:
        raise ConfigError(f"command: config says {cfg_command!r}, command line says {command!r}")
    command = command or cfg_command
    if command not in COMMANDS:
        raise ConfigError(f"command: {command!r} is not one of {sorted(COMMANDS)}")
    kinds, required, defaults = COMMANDS[command]
    allowed = set(required) | set(defaults) | OPTIONAL.get(command, set())
    params = {}
    for key, value in data.items():
        if key in TOP_KEYS:
            continue
        if key not in allowed:
            raise ConfigError(f"{key}: unknown key for command {command!r}")
        if key == "speedup":
            if not isinstance(value, dict) or set(value) != SPEEDUP_KEYS:
                raise ConfigError(f"speedup: expected the keys {sorted(SPEEDUP_KEYS)}")
            params[key] = {k: _unit_open(f"speedup.{k}", v) for k, v in value.items()}
        else:
            params[key] = PARAMS[key](key, value)
    if seed is not None:
        if "seed" not in allowed:
            raise ConfigError(f"seed: command {command!r} takes no seed")
        params["seed"] = _nonneg_int("seed", seed)
    missing = sorted(set(required) - set(params))
    if missing:
        raise ConfigError(f"{missing[0]}: required for command {command!r}")
    for key, value in defaults.items():
        params.setdefault(key, value)
    caps = data.get("caps") or {}
    if not isinstance(caps, dict) or set(caps) - CAP_KEYS:
        raise ConfigError(f"caps: allowed keys are {sorted(CAP_KEYS)}")
    for key, value in caps.items():
        _pos_int(f"caps.{key}", value)
    out = data.get("out")
    if out is not None:
        _path("out", out)
    source = _parse_source(kinds, data.get("source"), command)
    return RunConfig(command, source, dict(sorted(params.items())), dict(caps), out, base_dir)


def serialize_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


# --------------------------------------------------------------------------
# dispatch


def _resolve(cfg: RunConfig, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else Path(cfg.base_dir) / p


def _load_source(cfg: RunConfig):
    (kind, body), = cfg.source.items()
    if kind == "gadget":
        return build_gadget(body)
    if kind == "haar":
        return "haar"
    if "file" in body:
        text = _resolve(cfg, body["file"]).read_text()
        return UnitaryEnsemble.from_json(text)
    return UnitaryEnsemble.from_dict(body)


def _ensemble(source) -> UnitaryEnsemble:
    if isinstance(source, GraphGadget):
        return enumerate_ensemble(source)
    return source


def _cmd_spectrum(cfg, src):
    p = cfg.params
    rep = design_report(_ensemble(src), p["t"], epsilon=False, method=_lambda_method(p))
    out = rep.to_dict()
    if "eigenvalues_csv" in p:
        write_eigenvalues_csv(_resolve(cfg, p["eigenvalues_csv"]),
                              [complex(*z) for z in out["metadata"]["lambda"]["top_eigenvalues"]])
    return out


def _lambda_method(p):
    m = p.get("method", "auto")
    if m == "iterative":
        return "arnoldi"
    return m


def _cmd_eta(cfg, src):
    p = cfg.params
    m = {"arnoldi": "iterative"}.get(p["method"], p["method"])
    return {"eta": tpe_eta(_ensemble(src), p["t"], method=m), "t": p["t"]}


def _cmd_design_check(cfg, src):
    p = cfg.params
    E = _ensemble(src)
    rep = design_report(E, p["t"], epsilon=False, exact_tol=p["exact_tol"],
                        method=_lambda_method(p))
    out = rep.to_dict()
    if p["epsilon"]:
        eps = design_epsilon(E, p["t"])
        out["epsilon_star"] = eps.to_dict()["epsilon_star"]
        out["epsilon"] = eps.to_dict()
    if "eigenvalues_csv" in p:
        write_eigenvalues_csv(_resolve(cfg, p["eigenvalues_csv"]),
                              [complex(*z) for z in out["metadata"]["lambda"]["top_eigenvalues"]])
    return out


def _cmd_universality(cfg, src):
    p = cfg.params
    return check_universal(_ensemble(src), tol=p["tol"], q_max=p["q_max"]).to_dict()


def _cmd_classify(cfg, src):
    return classify_invertibility(_ensemble(src), tol=cfg.params["tol"]).to_dict()


def _cmd_bounds(cfg, src):
    p = cfg.params
    out = bounds_report(p["n"], p["t"], p["C"], p["a"], p.get("eps_prime"), p["eps_d"], p["log"])
    if "speedup" in p:
        s = p["speedup"]
        sp = speedup_params(s["mu"], s["delta"], s["alpha"], s["eps_d"])
        out["speedup"] = {"relative_error": sp.relative_error, "fraction": sp.fraction,
                          "flag": sp.flag}
    return out


def _cmd_sample(cfg, g):
    p = cfg.params
    samples = sample_distribution(g, p["shots"], p["seed"], workers=cfg.threads)
    out = {"shots": p["shots"], "seed": p["seed"], "n_measured": g.n_measured, "rows": g.rows,
           "x_counts": np.bincount(samples.x, minlength=g.dim).tolist()}
    try:
        exact = exact_distribution(g)
    except CapacityError:
        out["comparison"] = "exact table above the size cap"
    else:
        dist = tv_distance(samples.empirical().ravel(), exact.table.ravel())
        out.update({"tv": dist.tv, "l1": dist.l1, "l1_window": L1_WINDOW,
                    "label": "within the hardness window" if dist.l1 <= L1_WINDOW
                    else "outside the hardness window",
                    "note": "illustrative comparison of an empirical sampler with the exact law"})
        if "distribution_json" in p:
            _resolve(cfg, p["distribution_json"]).write_text(exact.to_json())
    if "samples_csv" in p:
        samples.to_csv(_resolve(cfg, p["samples_csv"]))
    if "histogram_json" in p:
        # output probabilities of the first few thousand sampled branches
        psi = np.zeros(g.dim, dtype=np.complex128)
        psi[0] = 1.0
        ys = samples.y[:4096]
        amps = apply_outcomes(g, ys, np.broadcast_to(psi, (len(ys), g.dim)))
        hist = porter_thomas_histogram(np.abs(amps) ** 2, g.dim)
        _resolve(cfg, p["histogram_json"]).write_text(json.dumps(hist, sort_keys=True))
    return out


def _cmd_anticoncentration(cfg, src):
    p = cfg.params
    n = cfg.source.get("haar", {}).get("n")
    return anticoncentration_estimate(src, p["alpha"], p["eps_d"], p["shots"], p["seed"], n=n,
                                      workers=cfg.threads).to_dict()


def _cmd_factorization(cfg, src):
    p = cfg.params
    E = _ensemble(src)
    return {"n": p["n"], "t": p["t"], "residual": block_factorization_check(E, p["n"], p["t"])}


DISPATCH = {
    "spectrum": _cmd_spectrum, "eta": _cmd_eta, "design-check": _cmd_design_check,
    "universality": _cmd_universality, "classify": _cmd_classify, "bounds": _cmd_bounds,
    "sample": _cmd_sample, "anticoncentration": _cmd_anticoncentration,
    "factorization-check": _cmd_factorization,
}


@contextlib.contextmanager
def _caps(caps: dict):
    if "max_dim" not in caps:
        yield
        return
    old = os.environ.get("DFORGE_MAX_DIM")
    os.environ["DFORGE_MAX_DIM"] = str(caps["max_dim"])
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("DFORGE_MAX_DIM", None)
        else:
            os.environ["DFORGE_MAX_DIM"] = old


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, UnitaryEnsemble):
        return {"size": len(obj), "dim": obj.dim}
    return repr(obj)


def _error(exc) -> dict:
    return {"type": type(exc).__name__, "message": str(exc)}


def run_report(cfg: RunConfig) -> tuple:
    """Run one command; returns ``(report dict, exit code)``. Never raises for library errors."""
    report = {"schema": SCHEMA, "version": __version__, "command": cfg.command,
              "config": cfg.to_dict()}
    code = EXIT_OK
    try:
        with _caps(cfg.caps):
            src = _load_source(cfg) if cfg.source is not None else None
            report["result"] = DISPATCH[cfg.command](cfg, src)
    except CapacityError as exc:
        report["error"], code = _error(exc), EXIT_CAPACITY
    except DomainError as exc:
        report["error"], code = _error(exc), EXIT_DOMAIN
    except (DforgeError, OSError) as exc:
        report["error"], code = _error(exc), EXIT_FAILURE
    report["exit_code"] = code
    return _jsonable(report), code


def dump_report(report: dict, timestamp: Optional[str] = None) -> str:
    """Canonical JSON text; ``timestamp`` is the only run-dependent field."""
    body = dict(report)
    if timestamp is not None:
        body["timestamp"] = timestamp
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dforge",
                                 description="Moment, design and sampling analyses of "
                                             "measurement-based gadget ensembles.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="YAML or JSON config file")
    ap.add_argument("--out", help="report path (default: the config's 'out', else stdout)")
    ap.add_argument("--seed", type=int, help="overrides the config seed")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for shot sampling (results do not depend on it)")
    ap.add_argument("--version", action="version", version=f"dforge {__version__}")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg_path = Path(args.config)
    try:
        text = cfg_path.read_text()
    except OSError as exc:
        print(f"dforge: cannot read config: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        cfg = parse_config(text, command=args.command, seed=args.seed,
                           base_dir=str(cfg_path.parent))
        if args.threads is not None:
            cfg.threads = _pos_int("--threads", args.threads)
    except DomainError as exc:
        report = {"schema": SCHEMA, "version": __version__, "command": args.command,
                  "error": _error(exc), "exit_code": EXIT_DOMAIN}
        print(dump_report(report), end="", file=sys.stderr)
        return EXIT_DOMAIN
    report, code = run_report(cfg)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    text = dump_report(report, stamp)
    if args.out:
        Path(args.out).write_text(text)
    elif cfg.out:
        _resolve(cfg, cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code:
        print(f"dforge: {report['error']['type']}: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
