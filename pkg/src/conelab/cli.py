"""Command-line front end: ``conelab <command> --config PATH [--out DIR]``.

Every command writes ``<command>.json`` (deterministic for a fixed config,
seed and thread count) and ``<command>.timings.json`` (wall-clock times) to
the output directory, or prints the report when no directory is given.

Exit codes: 0 success, 2 invalid configuration, 3 budget exceeded,
4 failed invariant.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numba
import numpy as np
import scipy
import sympy

from . import __version__
from .archimedean import QuadratureSpec, WeightFunction, singular_integral
from .arith import crt_pair, is_prime
from .enumerate import points_in_support, primitive_mask, weighted_counts
from .errors import BadExtents, BudgetExceeded, ConfigInvalid, InvalidCondition, InsufficientGrid
from .expsums import SumContext, TruncationPolicy, eta_coefficient, sum_Sq
from .harness import (
    conic_count,
    fit_integral_counts,
    fit_primitive_counts,
    invariant_suite,
    obstruction_probe,
    slope_eta_check,
)
from .localdens import CongruenceCondition, local_density, singular_series, singular_series_exact
from .quadform import TernaryQuadraticForm, dual_eval

SCHEMA_VERSION = 1
COMMANDS = ("count", "count-primitive", "density", "singular-series", "singular-integral", "expsum", "eta",
            "fit", "conic", "probe", "verify")
EXIT_CONFIG, EXIT_BUDGET, EXIT_INVARIANT = 2, 3, 4


class InvariantFailure(Exception):
    pass


@dataclass
class RunConfig:
    form: tuple[int, ...]
    L: int = 1
    gamma: tuple[int, int, int] = (0, 0, 0)
    weight: dict = field(default_factory=lambda: {"kind": "radial-bump", "center": [0, 0, 0], "radius": 1.0,
                                                  "symmetric": True})
    B_grid: tuple[float, ...] = (250, 500, 1000, 2000)
    primes: tuple[int, ...] = (2, 3, 5, 7)
    q_values: tuple[int, ...] = (1, 2, 3, 4, 5)
    c_vectors: tuple[tuple[int, int, int], ...] = ((1, 0, 1),)
    X: int = 500
    truncation: dict = field(default_factory=lambda: {"u_max": 4096, "x_max": 10**4, "P": 100})
    quadrature: dict = field(default_factory=lambda: {"method": "leray", "samples": 10**6})
    threads: int = 1
    seed: int = 0x5EED
    budget: float = 2 * 10**11
    name: str = ""
    residues: Optional[dict] = None
    schema_version: int = SCHEMA_VERSION

    # -- derived objects

    @property
    def quadratic_form(self) -> TernaryQuadraticForm:
        return TernaryQuadraticForm(tuple(self.form))

    @property
    def condition(self) -> CongruenceCondition:
        return CongruenceCondition(self.L, tuple(self.gamma))

    @property
    def weight_function(self) -> WeightFunction:
        return WeightFunction.from_dict(self.weight)

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(int(self.truncation.get("u_max", 4096)), int(self.truncation.get("x_max", 10**4)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["form"] = list(self.form)
        d["gamma"] = list(self.gamma)
        d["B_grid"] = list(self.B_grid)
        d["primes"] = list(self.primes)
        d["q_values"] = list(self.q_values)
        d["c_vectors"] = [list(c) for c in self.c_vectors]
        if self.residues is None:
            del d["residues"]
        else:
            # L and gamma are derived from the residues
            del d["L"], d["gamma"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigInvalid(f"unsupported schema_version {version}")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        if "form" not in d:
            raise ConfigInvalid("config needs 'form'")
        residues = d.get("residues")
        if residues is not None:
            if "L" in d or "gamma" in d:
                raise ConfigInvalid("give either 'residues' or 'L'/'gamma', not both")
            d["L"], d["gamma"] = combine_residues(residues)
        try:
            cfg = cls(
                form=tuple(int(v) for v in d["form"]),
                L=int(d.get("L", 1)),
                gamma=tuple(int(v) for v in d.get("gamma", (0, 0, 0))),
                weight=dict(d.get("weight", cls.__dataclass_fields__["weight"].default_factory())),
                B_grid=tuple(float(b) for b in d.get("B_grid", cls.B_grid)),
                primes=tuple(int(p) for p in d.get("primes", cls.primes)),
                q_values=tuple(int(q) for q in d.get("q_values", cls.q_values)),
                c_vectors=tuple(tuple(int(v) for v in c) for c in d.get("c_vectors", cls.c_vectors)),
                X=int(d.get("X", cls.X)),
                truncation=dict(d.get("truncation", cls.__dataclass_fields__["truncation"].default_factory())),
                quadrature=dict(d.get("quadrature", cls.__dataclass_fields__["quadrature"].default_factory())),
                threads=int(d.get("threads", 1)),
                seed=int(d.get("seed", 0x5EED)),
                budget=float(d.get("budget", 2 * 10**11)),
                name=str(d.get("name", "")),
                residues=residues,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"malformed config value: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> "RunConfig":
        if len(self.form) != 6:
            raise ConfigInvalid("form needs six coefficients (x1^2, x2^2, x3^2, x1x2, x1x3, x2x3)")
        if len(self.gamma) != 3:
            raise ConfigInvalid("gamma needs three residues")
        try:
            form = self.quadratic_form
            self.condition.validate(form)
            self.weight_function
        except InvalidCondition as exc:
            raise ConfigInvalid(f"invalid congruence condition: {exc}") from exc
        except (BadExtents, KeyError) as exc:
            raise ConfigInvalid(f"invalid weight: {exc}") from exc
        except ValueError as exc:
            raise ConfigInvalid(f"invalid form: {exc}") from exc
        B = list(self.B_grid)
        if any(b < 1 for b in B) or any(b2 <= b1 for b1, b2 in zip(B, B[1:])):
            raise ConfigInvalid("B_grid must be strictly increasing and >= 1")
        if any(not is_prime(p) for p in self.primes):
            raise ConfigInvalid("primes must be prime")
        if self.threads < 1:
            raise ConfigInvalid("threads must be >= 1")
        return self


def combine_residues(residues: dict) -> tuple[int, tuple[int, int, int]]:
    """CRT-combine {modulus: vector} into (L, gamma); moduli must be pairwise coprime."""
    L, gamma = 1, [0, 0, 0]
    for key, vec in residues.items():
        try:
            m = int(key)
            vec = [int(v) for v in vec]
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad residue entry {key!r}: {exc}") from exc
        if m < 1 or len(vec) != 3:
            raise ConfigInvalid(f"bad residue entry {key!r}")
        if math.gcd(m, L) != 1:
            raise ConfigInvalid(f"residue moduli must be pairwise coprime ({m} and {L})")
        gamma = [crt_pair(g, L, v, m) for g, v in zip(gamma, vec)]
        L *= m
    return L, tuple(gamma)


def load_config(path: str) -> RunConfig:
    p = Path(path)
    if not p.exists():
        bundled = resources.files("conelab") / "configs" / f"{path}.json"
        if bundled.is_file():
            text = bundled.read_text()
        else:
            raise ConfigInvalid(f"config {path!r} not found (nor a bundled config of that name)")
    else:
        text = p.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data)


# -- serialisation helpers ---------------------------------------------------------


def jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, np.generic):
        return jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def versions() -> dict:
    return {
        "conelab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
        "numba": numba.__version__,
    }


# -- commands ----------------------------------------------------------------------


def _count(cfg: RunConfig, primitive: bool, timings: dict) -> dict:
    t = time.perf_counter()
    counts = weighted_counts(cfg.quadratic_form, cfg.weight_function, cfg.condition, cfg.B_grid, primitive,
                             cfg.threads, budget=cfg.budget)
    timings["enumeration"] = time.perf_counter() - t
    return {"primitive": primitive, "B": list(cfg.B_grid), "counts": counts.tolist()}


def cmd_count(cfg, timings):
    return _count(cfg, False, timings)


def cmd_count_primitive(cfg, timings):
    return _count(cfg, True, timings)


def cmd_density(cfg, timings):
    form, cond = cfg.quadratic_form, cfg.condition
    out = []
    for p in cfg.primes:
        row = {"p": p,
               "plain": local_density(form, p).to_dict(),
               "primitive": local_density(form, p, primitive=True).to_dict()}
        if cond.L % p == 0:
            row["conditioned"] = local_density(form, p, cond).to_dict()
        out.append(row)
    return {"densities": out}


def cmd_singular_series(cfg, timings):
    form, cond = cfg.quadratic_form, cfg.condition
    S = singular_series(form, cond, int(cfg.truncation.get("P", 100)))
    return {"singular_series": S.to_dict(), "exact_good_primes": singular_series_exact(form, cond)}


def cmd_singular_integral(cfg, timings):
    q = cfg.quadrature
    spec = QuadratureSpec(samples=int(q.get("samples", 10**6)), seed=cfg.seed)
    out = {}
    methods = q.get("methods", [q.get("method", "leray")])
    for m in methods:
        t = time.perf_counter()
        out[m] = singular_integral(cfg.quadratic_form, cfg.weight_function, spec, m).to_dict()
        timings[m] = time.perf_counter() - t
    return {"weight": cfg.weight, "singular_integral": out}


def cmd_expsum(cfg, timings):
    ctx = SumContext(cfg.quadratic_form, cfg.L, cfg.gamma)
    rows = []
    for q in cfg.q_values:
        for c in cfg.c_vectors:
            rows.append({"q": q, "c": list(c), "S": sum_Sq(ctx, q, c, budget=int(min(cfg.budget, 2**62)))})
    return {"sums": rows}


def cmd_eta(cfg, timings):
    ctx = SumContext(cfg.quadratic_form, cfg.L, cfg.gamma)
    return {"eta": [{"c": list(c), "dual_value": dual_eval(cfg.quadratic_form, c),
                     **eta_coefficient(ctx, c, cfg.policy).to_dict()} for c in cfg.c_vectors]}


def cmd_fit(cfg, timings):
    form, w, cond = cfg.quadratic_form, cfg.weight_function, cfg.condition
    t = time.perf_counter()
    integral = fit_integral_counts(form, w, cond, cfg.B_grid, threads=cfg.threads, seed=cfg.seed, budget=cfg.budget)
    timings["integral"] = time.perf_counter() - t
    t = time.perf_counter()
    primitive = fit_primitive_counts(form, w, cond, cfg.B_grid, threads=cfg.threads, seed=cfg.seed,
                                     budget=cfg.budget)
    timings["primitive"] = time.perf_counter() - t
    return {"integral": integral.to_dict(), "primitive": primitive.to_dict()}


def cmd_conic(cfg, timings):
    rep = conic_count(cfg.quadratic_form, cfg.weight_function, cfg.condition, cfg.B_grid, threads=cfg.threads,
                      seed=cfg.seed, budget=cfg.budget)
    return {"conic": rep.to_dict()}


def cmd_probe(cfg, timings):
    rep = obstruction_probe(cfg.quadratic_form, cfg.weight_function, cfg.condition, cfg.B_grid,
                            threads=cfg.threads, seed=cfg.seed, budget=cfg.budget)
    return {"verdict": rep.verdict, "probe": rep.to_dict()}


def cmd_verify(cfg, timings):
    checks = invariant_suite(cfg.quadratic_form, cfg.condition, cfg.c_vectors)
    slopes = [slope_eta_check(SumContext(cfg.quadratic_form, cfg.L, cfg.gamma), c, min(cfg.X, 1000), cfg.policy)
              for c in cfg.c_vectors[:2]]
    report = {"checks": [c.to_dict() for c in checks], "slope_eta": slopes}
    report["passed"] = all(c.passed for c in checks) and all(s["pass"] for s in slopes)
    return report


HANDLERS = {
    "count": cmd_count,
    "count-primitive": cmd_count_primitive,
    "density": cmd_density,
    "singular-series": cmd_singular_series,
    "singular-integral": cmd_singular_integral,
    "expsum": cmd_expsum,
    "eta": cmd_eta,
    "fit": cmd_fit,
    "conic": cmd_conic,
    "probe": cmd_probe,
    "verify": cmd_verify,
}


def _write_csv(path: Path, command: str, result: dict, cfg: RunConfig) -> None:
    if command in ("count", "count-primitive"):
        rows = [("B", "count")] + list(zip(result["B"], result["counts"]))
    elif command == "fit":
        rep = result["integral"]
        a, b = rep["coefficients"]["a"], rep["coefficients"]["b"]
        rows = [("B", "count", "prediction")] + [(B, n, a * B * math.log(B) + b * B)
                                                 for B, n in zip(rep["B"], rep["counts"])]
    elif command in ("conic", "probe"):
        rep = result.get("conic") or result.get("probe")
        rows = [("B", "count")] + list(zip(rep["B"], rep["counts"]))
    else:
        return
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _write_solutions(path: Path, cfg: RunConfig, primitive: bool) -> None:
    pts = points_in_support(cfg.quadratic_form, cfg.weight_function, max(cfg.B_grid), cfg.condition,
                            cfg.threads, cfg.budget)
    if cfg.L > 1:
        pts = pts[np.all((pts - np.array(cfg.gamma)) % cfg.L == 0, axis=1)]
    if primitive:
        pts = pts[primitive_mask(pts)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("x1", "x2", "x3"))
        w.writerows(pts.tolist())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conelab", description="Integral points on ternary quadratic cones.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True,
                        help="JSON config path, or the name of a bundled config (pythagorean, obstruction)")
        sp.add_argument("--out", help="directory for <command>.json and <command>.timings.json")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--budget", type=float, help="enumeration budget in visited pairs")
        sp.add_argument("--csv", action="store_true", help="also write a CSV table where one applies")
        if name in ("count", "count-primitive"):
            sp.add_argument("--solutions", action="store_true",
                            help="write every counted solution at max(B) to <command>.solutions.csv")
    return ap


def run(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    timings: dict = {}
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if args.threads is not None:
            cfg.threads = args.threads
        if args.seed is not None:
            cfg.seed = args.seed
        if args.budget is not None:
            cfg.budget = args.budget
        cfg.validate()
        result = HANDLERS[args.command](cfg, timings)
        if args.command == "verify" and not result["passed"]:
            raise InvariantFailure("invariant suite failed")
    except (ConfigInvalid, InsufficientGrid) as exc:
        print(f"conelab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"conelab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvariantFailure, AssertionError) as exc:
        print(f"conelab: invariant failure: {exc}", file=sys.stderr)
        if "result" in locals():
            _emit(args, cfg, result, timings, t0)
        return EXIT_INVARIANT
    _emit(args, cfg, result, timings, t0)
    return 0


def _emit(args, cfg: RunConfig, result: dict, timings: dict, t0: float) -> None:
    report = {
        "command": args.command,
        "config": cfg.to_dict(),
        "threads": cfg.threads,
        "seed": cfg.seed,
        "versions": versions(),
        "result": result,
    }
    text = json.dumps(jsonable(report), indent=2, sort_keys=True)
    timings["total"] = time.perf_counter() - t0
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text + "\n")
        (out / f"{args.command}.timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
        if args.csv:
            _write_csv(out / f"{args.command}.csv", args.command, result, cfg)
        if getattr(args, "solutions", False):
            _write_solutions(out / f"{args.command}.solutions.csv", cfg, args.command == "count-primitive")
        if "verdict" in result:
            summary = result["verdict"]
        elif "passed" in result:
            summary = "passed" if result["passed"] else "failed"
        else:
            summary = "done"
        print(f"{args.command}: {summary}; report written to {out / (args.command + '.json')}")
    else:
        print(text)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
