"""Command line driver: run analyses from a JSON config and emit JSON reports.

Subcommands::

    perfect-poisson run CONFIG.json [--truncation N] [--t-grid G] [--tol TOL]
                                    [--divisor-floor F] [--seed S] [--out FILE]
    perfect-poisson gallery [--write DIR] [--run] [--out FILE]
    perfect-poisson verify-certificate FILE [--tol TOL]

Exit codes: 0 success (obstructions are results, not failures), 2 invalid
configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .diophantine import classify, profile
from .fourier import TrigPolynomial
from .homology import (
    decompose_commutators,
    degree_table,
    kunneth_compose,
    kunneth_homology,
    modular_class,
    perfectness_verdict,
    top_poisson_cohomology_dim,
    verify_certificate,
    zeroth_homology,
)
from .mapping_torus import MappingTorusSolverFailure
from .models import (
    GOLDEN,
    CosymplecticTorusModel,
    MappingTorusModel,
    ModelError,
    ProductModel,
    build_model,
    cat_mapping_torus,
    fibration_cosymplectic_t3,
    kronecker_cosymplectic_t3,
    symplectic_t2,
)

log = logging.getLogger("perfect_poisson")

SCHEMA = "perfect-poisson-report/1"
ANALYSES = ("homology", "decompose", "modular", "perfectness", "kunneth", "poisson-cohomology", "diophantine")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    model: dict
    name: str = "run"
    truncation: int = 8
    t_grid: int = 64
    divisor_floor: float = 1e-9
    tol: float = 1e-8
    seam_tol: float = 1e-8
    seed: int = 0
    trials: int = 20
    decompose_samples: int = 3
    analyses: list = field(default_factory=lambda: list(ANALYSES))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if "model" not in data:
            raise ConfigError("config needs a 'model' descriptor")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        for name in ("truncation", "t_grid", "trials"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("divisor_floor", "tol", "seam_tol"):
            if not float(getattr(self, name)) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.decompose_samples < 0:
            raise ConfigError("decompose_samples must be non-negative")
        bad = [a for a in self.analyses if a not in ANALYSES]
        if bad:
            raise ConfigError(f"unknown analyses {bad}; choose from {list(ANALYSES)}")
        try:
            model = build_model(self.model)
        except (ModelError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"model descriptor: {exc}") from exc
        failed = model.validate()
        if failed:
            raise ConfigError("model validation failed: " + "; ".join(f"{c.name} ({c.detail})" for c in failed))
        return model

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# analyses


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if math.isinf(x) or math.isnan(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _slopes(model) -> dict:
    """Slopes whose arithmetic governs the small divisors of the model."""
    if isinstance(model, ProductModel):
        out = {f"left.{k}": v for k, v in _slopes(model.left).items()}
        out.update({f"right.{k}": v for k, v in _slopes(model.right).items()})
        return out
    if isinstance(model, MappingTorusModel):
        return {"contracting-eigenvector": abs(model.slope)}
    if isinstance(model, CosymplecticTorusModel):
        th = model.theta
        if th[2] != 0 and th[1] == 0:
            alpha = abs(-th[0] / th[2])
            return {"kronecker": alpha - math.floor(alpha)} if alpha else {}
    return {}


def _diophantine(model, cfg: RunConfig) -> dict:
    out = {}
    for key, alpha in _slopes(model).items():
        prof = profile(alpha, depth=30, N_max=max(cfg.truncation, 1))
        cls = classify(prof)
        out[key] = {"profile": prof.to_dict(), "classification": cls.label, "exponent": cls.exponent,
                    "caveat": cls.caveat}
    return out


def _homology(model, cfg: RunConfig):
    return zeroth_homology(model, cfg.truncation, cfg.divisor_floor, G=cfg.t_grid, trials=cfg.trials,
                           tol=cfg.tol, seed=cfg.seed, seam_tol=cfg.seam_tol)


def _decompose(model, cfg: RunConfig) -> dict:
    if isinstance(model, ProductModel) and model.is_torus():
        target = model.as_torus()
    else:
        target = model
    if getattr(target, "rank", None) != 2 or isinstance(target, MappingTorusModel):
        return {"supported": False, "reason": "commutator certificates need a rank-two torus model"}
    rng = np.random.default_rng(cfg.seed)
    degree = min(cfg.truncation, 4)
    certs = []
    inputs = [TrigPolynomial.random_real(model.dim, degree, rng, n_terms=6) for _ in range(cfg.decompose_samples)]
    inputs.append(TrigPolynomial.constant(model.dim, 1.0))
    try:
        for f in inputs:
            certs.append(decompose_commutators(model, f, cfg.truncation, cfg.divisor_floor).to_dict())
    except ModelError as exc:
        # obstructions beyond the mean: a property of the model, reported as data
        return {"supported": False, "reason": str(exc)}
    return {"supported": True, "certificates": certs, "max_residual": max(c["residual"] for c in certs)}


def _kunneth(model, cfg: RunConfig) -> dict:
    if not isinstance(model, ProductModel):
        return {"applicable": False, "reason": "not a product model"}
    opts = dict(G=cfg.t_grid, trials=cfg.trials, tol=cfg.tol, seed=cfg.seed, seam_tol=cfg.seam_tol)
    left = degree_table(model.left, cfg.truncation, cfg.divisor_floor, **opts)
    right = degree_table(model.right, cfg.truncation, cfg.divisor_floor, **opts)
    composed = kunneth_compose(left, right)
    out = {"applicable": True, "left": left.to_dict(), "right": right.to_dict(), "composed": composed.to_dict()}
    top = kunneth_homology(composed)
    out["top"] = top.to_dict()
    if model.is_torus():
        direct = degree_table(model, cfg.truncation, cfg.divisor_floor)
        out["direct"] = direct.to_dict()
        out["matches_direct"] = direct.dims == composed.dims
    return out


def run(cfg: RunConfig) -> dict:
    """Execute the requested analyses; raises NumericalFailure on solver breakdown."""
    model = cfg.validate()
    requested = set(cfg.analyses)
    results, timings, notes = {}, {}, []

    def timed(key, fn):
        t0 = time.perf_counter()
        try:
            value = fn()
        finally:
            timings[key] = time.perf_counter() - t0
        return value

    homology = modular = None
    try:
        if requested & {"homology", "perfectness"}:
            homology = timed("homology", lambda: _homology(model, cfg))
            results["homology"] = homology.to_dict()
        if requested & {"modular", "perfectness"}:
            modular = timed("modular", lambda: modular_class(model, N=cfg.truncation, G=cfg.t_grid, tol=cfg.tol))
            results["modular"] = modular.to_dict()
        if "perfectness" in requested:
            results["perfectness"] = perfectness_verdict(homology, modular).to_dict()
        if "decompose" in requested:
            results["decompose"] = timed("decompose", lambda: _decompose(model, cfg))
        if "kunneth" in requested:
            results["kunneth"] = timed("kunneth", lambda: _kunneth(model, cfg))
        if "poisson-cohomology" in requested:
            if isinstance(model, MappingTorusModel) or (isinstance(model, ProductModel) and not model.is_torus()):
                results["poisson-cohomology"] = {"applicable": False, "reason": "needs a constant bivector"}
            else:
                pc = timed("poisson-cohomology",
                           lambda: top_poisson_cohomology_dim(model, cfg.truncation, cfg.divisor_floor))
                results["poisson-cohomology"] = pc.to_dict()
        if "diophantine" in requested:
            results["diophantine"] = timed("diophantine", lambda: _diophantine(model, cfg))
    except MappingTorusSolverFailure as exc:
        raise NumericalFailure(f"{exc}: {json.dumps(_jsonable(exc.report))[:2000]}") from exc
    notes.append(f"all dimensions are at Fourier truncation N={cfg.truncation}"
                 + (f" and t-grid G={cfg.t_grid}" if _has_mapping_torus(model) else ""))
    return {
        "schema": SCHEMA,
        "tool_version": __version__,
        "config": cfg.to_dict(),
        "results": _jsonable(results),
        "notes": notes,
        "timings": timings,
    }


def _has_mapping_torus(model) -> bool:
    if isinstance(model, ProductModel):
        return _has_mapping_torus(model.left) or _has_mapping_torus(model.right)
    return isinstance(model, MappingTorusModel)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def without_timings(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}


# ---------------------------------------------------------------------------
# gallery


def gallery() -> list[RunConfig]:
    T2, C = symplectic_t2(), cat_mapping_torus()
    K, Fb = kronecker_cosymplectic_t3(GOLDEN), fibration_cosymplectic_t3()
    silver = math.sqrt(2.0) - 1.0
    K2 = CosymplecticTorusModel(np.array([-silver, 0.0, 1.0]), K.eta, name="kronecker-cosymplectic-t3-silver")
    entries = [
        ("symplectic-t2", T2),
        ("fibration-cosymplectic-t3", Fb),
        ("kronecker-cosymplectic-t3", K),
        ("mapping-torus-cat", C),
        ("mapping-torus-cat-x-symplectic-t2", ProductModel(C, T2, name="mapping-torus-cat-x-symplectic-t2")),
        ("kronecker-t3-x-symplectic-t2", ProductModel(K, T2, name="kronecker-t3-x-symplectic-t2")),
        ("kronecker-t3-x-kronecker-t3-silver", ProductModel(K, K2, name="kronecker-t3-x-kronecker-t3-silver")),
        ("kronecker-t3-x-mapping-torus-cat", ProductModel(K, C, name="kronecker-t3-x-mapping-torus-cat")),
    ]
    out = []
    for name, model in entries:
        truncation = 4 if isinstance(model, ProductModel) else 8
        out.append(RunConfig(model=model.descriptor(), name=name, truncation=truncation))
    return out


# ---------------------------------------------------------------------------
# entry point


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _apply_flags(data: dict, args) -> dict:
    data = dict(data)
    for flag, key in (("truncation", "truncation"), ("t_grid", "t_grid"), ("tol", "tol"),
                      ("divisor_floor", "divisor_floor"), ("seed", "seed")):
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    return data


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--truncation", type=int, help="Fourier truncation N")
    p.add_argument("--t-grid", dest="t_grid", type=int, help="t-grid nodes G on the mapping torus")
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--divisor-floor", dest="divisor_floor", type=float, help="smallest divisor that is inverted")
    p.add_argument("--seed", type=int, help="RNG seed")
    p.add_argument("--out", help="write the report here instead of stdout")


def _certificates_in(data: dict) -> list:
    if data.get("kind") == "commutator-certificate":
        return [data]
    found = []
    if isinstance(data, dict):
        for v in data.values():
            if isinstance(v, dict):
                found += _certificates_in(v)
            elif isinstance(v, list):
                for item in v:
                    if isinstance(item, dict):
                        found += _certificates_in(item)
    return found


def cmd_run(args) -> int:
    data = _apply_flags(_load_json(args.config), args)
    cfg = RunConfig.from_dict(data)
    report = run(cfg)
    _emit(dumps(report), args.out)
    return EXIT_OK


def cmd_gallery(args) -> int:
    configs = gallery()
    if args.write:
        outdir = Path(args.write)
        outdir.mkdir(parents=True, exist_ok=True)
        for cfg in configs:
            (outdir / f"{cfg.name}.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
        log.info("wrote %d configs to %s", len(configs), outdir)
    if not args.run:
        if not args.write:
            _emit(json.dumps([c.to_dict() for c in configs], indent=2) + "\n", args.out)
        return EXIT_OK
    reports = []
    for cfg in configs:
        cfg = RunConfig.from_dict(_apply_flags(cfg.to_dict(), args))
        log.info("running %s", cfg.name)
        reports.append(run(cfg))
    _emit(dumps({"schema": SCHEMA, "reports": reports}), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    data = _load_json(args.file)
    certs = _certificates_in(data)
    if not certs:
        log.error("no commutator certificates in %s", args.file)
        return EXIT_CONFIG
    rows = [verify_certificate(c) for c in certs]
    ok = all(r["difference"] <= args.tol for r in rows)
    sys.stdout.write(json.dumps({"verified": ok, "tol": args.tol, "certificates": rows}, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perfect-poisson", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the analyses of one config")
    p.add_argument("config", help="JSON config file")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gallery", help="list, write or run the built-in configs")
    p.add_argument("--write", metavar="DIR", help="write each config to DIR/<name>.json")
    p.add_argument("--run", action="store_true", help="run every gallery config")
    _add_run_flags(p)
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("verify-certificate", help="re-check commutator certificates in a file")
    p.add_argument("file", help="certificate or report JSON")
    p.add_argument("--tol", type=float, default=1e-12, help="allowed residual discrepancy")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (NumericalFailure, np.linalg.LinAlgError, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
