"""Command-line interface.

    plap <command> --config spec.json [--out path] [--format csv|json]
                   [--n N] [--jmax J] [--id ID] [--cores a1,a2,...]

Commands: validate, diagram, solve, profile, verify, structure, regularity.
Exit codes: 0 ok, 1 usage/config error, 2 hypothesis failure, 3 verification
failure.  Outputs are deterministic: identical configs yield byte-identical
files (floats are printed with 17 significant digits).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bifurcation, profile, solver, timemap
from .errors import ConfigError, HypothesisViolated, PlapError
from .nonlinearity import build_nonlinearity

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HYPOTHESIS = 2
EXIT_VERIFICATION = 3

ENERGY_TOL = 1e-8
ORACLE_TOL = 1e-6


@dataclass
class Numerics:
    quad_tol: float = 1e-10
    scan_points: int = 1024
    grid: int = 2048
    ode_steps: int = 100_000

    def validate(self):
        if self.quad_tol <= 0.0:
            raise ConfigError("quad_tol must be positive")
        if min(self.scan_points, self.grid, self.ode_steps) <= 0:
            raise ConfigError("scan_points, grid, and ode_steps must be positive")


@dataclass
class RunConfig:
    p: float
    q: float
    lam: float
    nonlinearity: dict
    numerics: Numerics = field(default_factory=Numerics)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        try:
            nl_spec = dict(raw["nonlinearity"])
            q = float(raw.get("q", nl_spec.get("q")))
            cfg = cls(
                p=float(raw["p"]),
                q=q,
                lam=float(raw.get("lambda", 1.0)),
                nonlinearity=nl_spec,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        num = raw.get("numerics", {})
        cfg.numerics = Numerics(
            quad_tol=float(num.get("quad_tol", 1e-10)),
            scan_points=int(num.get("scan_points", 1024)),
            grid=int(num.get("grid", 2048)),
            ode_steps=int(num.get("ode_steps", 100_000)),
        )
        cfg.numerics.validate()
        if cfg.p <= 1.0 or cfg.q <= 1.0:
            raise ConfigError("p and q must exceed 1")
        if cfg.lam <= 0.0:
            raise ConfigError("lambda must be positive")
        return cfg

    def build_nl(self):
        spec = dict(self.nonlinearity)
        kind = spec.pop("kind", None)
        if kind is None:
            raise ConfigError("nonlinearity.kind missing")
        spec.pop("q", None)
        return build_nonlinearity(kind, self.q, spec)

    def build_problem(self) -> timemap.Problem:
        return timemap.Problem(p=self.p, nl=self.build_nl(), lam=self.lam)


def _fmt(v) -> str:
    if isinstance(v, float):
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_validate(cfg: RunConfig, args) -> int:
    try:
        nl = cfg.build_nl()
    except HypothesisViolated as exc:
        report = exc.report.to_json_dict() if exc.report else {"passed": False}
        _emit(_json_text(report), args.out)
        return EXIT_HYPOTHESIS
    from .nonlinearity import validate_hypotheses

    report = validate_hypotheses(nl).to_json_dict()
    report["z_plus"] = nl.z_plus
    report["z_minus"] = nl.z_minus
    _emit(_json_text(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_HYPOTHESIS


def cmd_diagram(cfg: RunConfig, args) -> int:
    n = args.n if args.n is not None else 8
    if n < 1 or n > 64:
        print(f"diagram index bound must be in 1..64, got {n}", file=sys.stderr)
        return EXIT_USAGE
    nl = cfg.build_nl()
    table = bifurcation.bifurcation_table(nl, cfg.p, n, tol=min(cfg.numerics.quad_tol, 1e-11))
    header = ["n", "lambda_tilde_plus", "lambda_tilde_minus", "lambda_star_plus", "lambda_star_minus"]
    if table.classical is not None:
        header.append("lambda_n")
    lines = [",".join(header)]
    for i, idx in enumerate(table.n):
        row = [str(idx), _fmt(table.tilde_plus[i]), _fmt(table.tilde_minus[i])]
        row.append(_fmt(table.star_plus[i]) if table.star_plus is not None else "")
        row.append(_fmt(table.star_minus[i]) if table.star_minus is not None else "")
        if table.classical is not None:
            row.append(_fmt(table.classical[i]))
        lines.append(",".join(row))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _enumerate(cfg: RunConfig, j_max: int):
    problem = cfg.build_problem()
    descs = solver.enumerate_solutions(
        problem,
        j_max,
        scan_points=cfg.numerics.scan_points,
        quad_tol=cfg.numerics.quad_tol,
    )
    return problem, descs


def cmd_solve(cfg: RunConfig, args) -> int:
    j_max = args.jmax if args.jmax is not None else 4
    problem, descs = _enumerate(cfg, j_max)
    payload = {
        "lambda": problem.lam,
        "p": problem.p,
        "q": problem.q,
        "descriptors": [d.to_json_dict() for d in descs],
    }
    _emit(_json_text(payload), args.out)
    return EXIT_OK


def _find_descriptor(cfg: RunConfig, args):
    if not args.id:
        raise ConfigError("--id is required for this command")
    j_max = args.jmax if args.jmax is not None else 8
    problem, descs = _enumerate(cfg, j_max)
    d = solver.find_descriptor(descs, args.id)
    if d is None:
        raise ConfigError(f"unknown descriptor id {args.id}")
    return problem, d


def _parse_cores(arg: str | None):
    if not arg:
        return None
    try:
        return [float(v) for v in arg.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --cores list: {exc}") from exc


def cmd_profile(cfg: RunConfig, args) -> int:
    problem, d = _find_descriptor(cfg, args)
    prof = profile.reconstruct(
        problem, d, M=cfg.numerics.grid, core_lengths=_parse_cores(args.cores),
        quad_tol=cfg.numerics.quad_tol,
    )
    lines = ["x,phi,dphi"]
    for x, ph, dp in zip(prof.x, prof.phi, prof.dphi):
        lines.append(f"{_fmt(float(x))},{_fmt(float(ph))},{_fmt(float(dp))}")
    _emit("\n".join(lines) + "\n", args.out)
    sidecar = {
        "descriptor": d.to_json_dict(),
        "flat_intervals": [[a, b] for a, b in prof.flat_intervals],
        "nodes": list(prof.nodes),
    }
    side_path = (args.out.rsplit(".", 1)[0] + ".json") if args.out else None
    _emit(_json_text(sidecar), side_path)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    problem, d = _find_descriptor(cfg, args)
    prof = profile.reconstruct(
        problem, d, M=cfg.numerics.grid, quad_tol=cfg.numerics.quad_tol
    )
    energy = profile.energy_residual(problem, prof)
    report = {
        "id": d.descriptor_id,
        "energy_residual": energy,
        "energy_tol": ENERGY_TOL,
        "energy_ok": energy < ENERGY_TOL,
    }
    oracle_ok = True
    if d.kind == "regular" and not d.degenerate:
        sup = profile.shoot_compare(problem, prof, n_steps=cfg.numerics.ode_steps)
        oracle_ok = sup < ORACLE_TOL
        report.update({"oracle_sup_diff": sup, "oracle_tol": ORACLE_TOL, "oracle_ok": oracle_ok})
    elif d.kind == "flat_core":
        sup = profile.shoot_compare(problem, prof, n_steps=cfg.numerics.ode_steps)
        oracle_ok = sup < ORACLE_TOL
        report.update(
            {
                "oracle_sup_diff": sup,
                "oracle_tol": ORACLE_TOL,
                "oracle_ok": oracle_ok,
                "oracle_note": "compared up to the first flat point only",
            }
        )
    else:
        report["oracle_note"] = "skipped (trivial or degenerate: shooting is uninformative)"
    _emit(_json_text(report), args.out)
    return EXIT_OK if (report["energy_ok"] and oracle_ok) else EXIT_VERIFICATION


def cmd_structure(cfg: RunConfig, args) -> int:
    n = args.n if args.n is not None else 4
    if n < 1:
        print("--n must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    problem = cfg.build_problem()
    rep = bifurcation.structure(
        problem, n, scan_points=cfg.numerics.scan_points, quad_tol=cfg.numerics.quad_tol
    )
    _emit(_json_text(rep.to_json_dict()), args.out)
    return EXIT_OK


def cmd_regularity(cfg: RunConfig, args) -> int:
    problem, d = _find_descriptor(cfg, args)
    prof = profile.reconstruct(
        problem, d, M=cfg.numerics.grid, quad_tol=cfg.numerics.quad_tol
    )
    rep = profile.classify_regularity(problem, prof)
    _emit(_json_text(rep.to_json_dict()), args.out)
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "diagram": cmd_diagram,
    "solve": cmd_solve,
    "profile": cmd_profile,
    "verify": cmd_verify,
    "structure": cmd_structure,
    "regularity": cmd_regularity,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plap", description=__doc__)
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", required=True, help="problem spec JSON")
    ap.add_argument("--out", default=None, help="output path (default stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default=None)
    ap.add_argument("--n", type=int, default=None, help="table/report depth")
    ap.add_argument("--jmax", type=int, default=None, help="largest class index")
    ap.add_argument("--id", default=None, help="descriptor id from a solve run")
    ap.add_argument("--cores", default=None, help="comma-separated plateau lengths")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisViolated as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except PlapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
