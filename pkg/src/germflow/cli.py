"""Command-line experiment harness with reproducible JSON/CSV reports.

Subcommands: check (C^r ratio criterion), check0 (C^0 variant), flow
(trajectory dumps), verify (equivalence residuals, round trips, Jacobians),
loja (gradient-inequality exponent), genpair (ideal-power test pairs),
distbound (gradient/distance bound). Flag precedence: command line over
--config file over built-in defaults; every JSON report embeds the fully
resolved configuration including the sampling seed, so runs are
bit-reproducible. Exit codes: 0 success or PASS, 1 analytic FAIL,
2 usage or runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .condition import (
    SamplingSpec,
    Verdict,
    c0_ratio_rows,
    check_c0_criterion,
    check_cr_criterion,
    compare_exponents,
    cr_ratio_rows,
    dist_ratio_rows,
    estimate_gradient_dist_bound,
    estimate_lojasiewicz,
    sample_domain,
)
from .flow import (
    DiffeoMap,
    Direction,
    HomotopySystem,
    IntegratorSettings,
    SingularSetApprox,
    integrate_trajectory,
    numeric_jacobian,
    verify_equivalence,
)
from .germ import parse, parse_poly, serialize
from .jacobi import (
    JacobiIdealBasis,
    assemble_element,
    generate_pair,
    ideal_power_generators,
    random_multipliers,
)

_INTEGRATOR_DEFAULTS = {
    "rel_tol": 1e-10,
    "abs_tol": 1e-10,
    "h_init": 1e-2,
    "h_min": 1e-12,
    "max_steps": 1_000_000,
}


def _sampling_defaults(command: str) -> dict:
    if command == "loja":
        return {
            "radius_min": 1e-4,
            "radius_max": 1e-1,
            "shells": 12,
            "points_per_shell": 64,
            "seed": 0,
            "grad_floor": 1e-14,
        }
    return {
        "radius_min": 1e-4,
        "radius_max": 0.2,
        "shells": 8,
        "points_per_shell": 8,
        "seed": 0,
        "grad_floor": 1e-14,
    }


class CLIError(ValueError):
    """Configuration or usage problem; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    f_expr: Optional[str]
    g_expr: Optional[str]
    n: int
    r: int
    delta: float
    backend: str
    sampling: SamplingSpec
    integrator: IntegratorSettings
    x0: Optional[tuple]
    direction: Optional[str]
    zero_points: Optional[tuple]
    multipliers: Optional[tuple]
    gen_seed: Optional[int]
    max_degree: Optional[int]
    output_path: Optional[str]
    format: str

    def as_dict(self):
        s = self.sampling
        it = self.integrator
        return {
            "command": self.command,
            "f_expr": self.f_expr,
            "g_expr": self.g_expr,
            "n": self.n,
            "r": self.r,
            "delta": self.delta,
            "backend": self.backend,
            "sampling": {
                "dimension": s.dimension,
                "radius_min": s.radius_min,
                "radius_max": s.radius_max,
                "shells": s.shells,
                "points_per_shell": s.points_per_shell,
                "seed": s.seed,
                "grad_floor": s.grad_floor,
            },
            "integrator": {
                "rel_tol": it.rel_tol,
                "abs_tol": it.abs_tol,
                "h_init": it.h_init,
                "h_min": it.h_min,
                "max_steps": it.max_steps,
            },
            "x0": list(self.x0) if self.x0 is not None else None,
            "direction": self.direction,
            "zero_points": [list(p) for p in self.zero_points]
            if self.zero_points is not None
            else None,
            "multipliers": list(self.multipliers) if self.multipliers is not None else None,
            "gen_seed": self.gen_seed,
            "max_degree": self.max_degree,
            "output_path": self.output_path,
            "format": self.format,
        }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="germflow",
        description="Numerical right-equivalence checks for polynomial germs.",
    )
    parser.add_argument("--version", action="version", version=f"germflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(sp, *, with_g: bool, with_r: bool, with_integrator: bool):
        sp.add_argument("--f", dest="f_expr", help="germ f in variables x1..xn, e.g. 'x1^2 + x2^2'")
        if with_g:
            sp.add_argument("--g", dest="g_expr", help="germ g in the same variables")
        sp.add_argument("--n", type=int, help="number of variables (required)")
        if with_r:
            sp.add_argument("--r", type=int, help="differentiability order r (default 1)")
        sp.add_argument("--config", help="JSON config file; flags override its values")
        sp.add_argument("--out", dest="output_path", help="report path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
        sp.add_argument("--radius-min", type=float, help="inner shell radius (default 1e-4)")
        sp.add_argument(
            "--radius-max", type=float, help="outer shell radius (default 0.2; loja 0.1)"
        )
        sp.add_argument("--shells", type=int, help="log-spaced shells (default 8; loja 12)")
        sp.add_argument(
            "--points-per-shell", type=int, help="points per shell (default 8; loja 64)"
        )
        sp.add_argument("--seed", type=int, help="sampling seed (default 0)")
        sp.add_argument(
            "--grad-floor", type=float, help="exclude samples with |grad f| below this (1e-14)"
        )
        sp.add_argument(
            "--backend",
            choices=("auto", "native", "fallback"),
            help="kernel backend (default auto: compiled extension if present)",
        )
        if with_integrator:
            sp.add_argument("--rel-tol", type=float, help="relative tolerance (default 1e-10)")
            sp.add_argument("--abs-tol", type=float, help="absolute tolerance (default 1e-10)")
            sp.add_argument("--h-init", type=float, help="initial step (default 1e-2)")
            sp.add_argument("--h-min", type=float, help="smallest step (default 1e-12)")
            sp.add_argument("--max-steps", type=int, help="step budget (default 1000000)")
            sp.add_argument("--delta", type=float, help="homotopy domain half-width (default 3)")

    sp = sub.add_parser("check", help="sampled C^r derivative-ratio criterion")
    common(sp, with_g=True, with_r=True, with_integrator=False)

    sp = sub.add_parser("check0", help="sampled C^0 value/gradient-ratio criterion")
    common(sp, with_g=True, with_r=False, with_integrator=False)

    sp = sub.add_parser("flow", help="integrate transport trajectories")
    common(sp, with_g=True, with_r=True, with_integrator=True)
    sp.add_argument("--x0", help="start point, comma-separated (default: sampled points)")
    sp.add_argument("--direction", choices=("forward", "inverse"), help="flow direction")

    sp = sub.add_parser("verify", help="equivalence residuals, round trips, Jacobians")
    common(sp, with_g=True, with_r=True, with_integrator=True)

    sp = sub.add_parser("loja", help="gradient-inequality exponent estimate")
    common(sp, with_g=True, with_r=False, with_integrator=False)

    sp = sub.add_parser("genpair", help="generate g from f via ideal-power multipliers")
    common(sp, with_g=False, with_r=True, with_integrator=False)
    sp.add_argument(
        "--multiplier",
        action="append",
        dest="multipliers",
        help="multiplier polynomial, one per generator (repeatable)",
    )
    sp.add_argument("--gen-seed", type=int, help="draw random multipliers with this seed")
    sp.add_argument("--max-degree", type=int, help="random multiplier degree bound (default 2)")

    sp = sub.add_parser("distbound", help="gradient vs distance-to-singular-set bound")
    common(sp, with_g=False, with_r=False, with_integrator=False)
    sp.add_argument(
        "--zero-points",
        help="singular-set points, e.g. '0,0;0.5,0' (default: the origin when critical)",
    )
    return parser


def _parse_vector(value, n: int, what: str) -> tuple:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
    else:
        parts = list(value)
    try:
        vec = tuple(float(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise CLIError(f"cannot parse {what}: {value!r}") from exc
    if len(vec) != n:
        raise CLIError(f"{what} must have {n} components, got {len(vec)}")
    return vec


def _parse_points(value, n: int) -> tuple:
    if isinstance(value, str):
        chunks = [c for c in value.split(";") if c.strip()]
    else:
        chunks = list(value)
    return tuple(_parse_vector(c, n, "zero point") for c in chunks)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise CLIError("config file must contain a JSON object")

    def flat(key, default=None):
        v = getattr(args, key, None)
        if v is None:
            v = file_cfg.get(key, default)
        return v

    def nested(group, key, default):
        v = getattr(args, key, None)
        if v is None:
            v = file_cfg.get(group, {}).get(key, default)
        return v

    command = args.command
    n = flat("n")
    if n is None:
        raise CLIError("--n is required (number of variables)")
    n = int(n)
    sdef = _sampling_defaults(command)
    sampling = SamplingSpec(
        dimension=n,
        radius_min=float(nested("sampling", "radius_min", sdef["radius_min"])),
        radius_max=float(nested("sampling", "radius_max", sdef["radius_max"])),
        shells=int(nested("sampling", "shells", sdef["shells"])),
        points_per_shell=int(nested("sampling", "points_per_shell", sdef["points_per_shell"])),
        seed=int(nested("sampling", "seed", sdef["seed"])),
        grad_floor=float(nested("sampling", "grad_floor", sdef["grad_floor"])),
    )
    integrator = IntegratorSettings(
        rel_tol=float(nested("integrator", "rel_tol", _INTEGRATOR_DEFAULTS["rel_tol"])),
        abs_tol=float(nested("integrator", "abs_tol", _INTEGRATOR_DEFAULTS["abs_tol"])),
        h_init=float(nested("integrator", "h_init", _INTEGRATOR_DEFAULTS["h_init"])),
        h_min=float(nested("integrator", "h_min", _INTEGRATOR_DEFAULTS["h_min"])),
        max_steps=int(nested("integrator", "max_steps", _INTEGRATOR_DEFAULTS["max_steps"])),
    )
    x0 = flat("x0")
    zero_points = flat("zero_points")
    multipliers = flat("multipliers")
    gen_seed = flat("gen_seed")
    max_degree = flat("max_degree")
    return RunConfig(
        command=command,
        f_expr=flat("f_expr"),
        g_expr=flat("g_expr"),
        n=n,
        r=int(flat("r", 1)),
        delta=float(flat("delta", 3.0)),
        backend=str(flat("backend", "auto")),
        sampling=sampling,
        integrator=integrator,
        x0=_parse_vector(x0, n, "--x0") if x0 is not None else None,
        direction=flat("direction"),
        zero_points=_parse_points(zero_points, n) if zero_points is not None else None,
        multipliers=tuple(str(m) for m in multipliers) if multipliers is not None else None,
        gen_seed=int(gen_seed) if gen_seed is not None else None,
        max_degree=int(max_degree) if max_degree is not None else None,
        output_path=flat("output_path"),
        format=str(flat("format", "json")),
    )


def _require(config: RunConfig, *fields):
    for name in fields:
        if getattr(config, name) is None:
            flag = {"f_expr": "--f", "g_expr": "--g"}.get(name, f"--{name}")
            raise CLIError(f"{config.command} requires {flag}")


def _germs(config: RunConfig, need_g: bool):
    _require(config, "f_expr")
    f = parse(config.f_expr, config.n)
    if not need_g:
        return f, None
    _require(config, "g_expr")
    return f, parse(config.g_expr, config.n)


def _run_check(config: RunConfig):
    f, g = _germs(config, need_g=True)
    if config.r < 1:
        raise CLIError("check requires r >= 1")
    report = check_cr_criterion(f, g, config.r, config.sampling)
    extras = {
        "verdict": report.verdict.value,
        "c_estimate": report.c_estimate,
        "excluded_count": report.excluded_count,
    }
    records = [rec.as_dict() for rec in report.records]
    code = 1 if report.verdict is Verdict.FAIL else 0
    payload = None
    if config.format == "csv":
        payload = cr_ratio_rows(f, g, config.r, config.sampling)
    return extras, records, code, payload


def _run_check0(config: RunConfig):
    f, g = _germs(config, need_g=True)
    report = check_c0_criterion(f, g, config.sampling)
    extras = {
        "verdict": report.verdict.value,
        "c_estimate": report.c_estimate,
        "excluded_count": report.excluded_count,
    }
    records = [rec.as_dict() for rec in report.records]
    code = 1 if report.verdict is Verdict.FAIL else 0
    payload = None
    if config.format == "csv":
        payload = c0_ratio_rows(f, g, config.sampling)
    return extras, records, code, payload


def _trajectory_rows(system: HomotopySystem, traj):
    header = ["t"] + [f"y{i + 1}" for i in range(system.n)] + ["F", "|W|"]
    rows = []
    for t, y, fv in zip(traj.t_nodes, traj.y_nodes, traj.f_values):
        w = system.transport_field(float(t), y)
        rows.append([float(t), *[float(v) for v in y], float(fv), float(np.sqrt(np.sum(w * w)))])
    return header, rows


def _run_flow(config: RunConfig):
    f, g = _germs(config, need_g=True)
    system = HomotopySystem(f, g, r=config.r, delta=config.delta, backend=config.backend)
    direction = Direction(config.direction or "forward")
    if config.x0 is not None:
        starts = [np.array(config.x0)]
    else:
        starts = sample_domain(config.sampling)
    records = []
    worst_drift = 0.0
    last_traj = None
    for x0 in starts:
        traj = integrate_trajectory(system, x0, direction, config.integrator)
        last_traj = traj
        worst_drift = max(worst_drift, traj.conservation_drift)
        records.append(
            {
                "x0": [float(v) for v in x0],
                "y_end": [float(v) for v in traj.y_end],
                "t_end": float(traj.t_nodes[-1]),
                "conservation_drift": traj.conservation_drift,
                "accepted_steps": traj.accepted_steps,
                "rejected_steps": traj.rejected_steps,
            }
        )
    extras = {"conservation_drift": worst_drift}
    payload = None
    if config.format == "csv":
        if config.x0 is None:
            raise CLIError("csv trajectory dump requires --x0 (one trajectory per file)")
        payload = _trajectory_rows(system, last_traj)
    return extras, records, 0, payload


def _run_verify(config: RunConfig):
    f, g = _germs(config, need_g=True)
    system = HomotopySystem(f, g, r=config.r, delta=config.delta, backend=config.backend)
    diffeo = DiffeoMap(system, config.integrator)
    eq = verify_equivalence(system, diffeo, config.sampling)
    records = []
    round_trip_max = 0.0
    for x, residual in zip(eq.points, eq.residuals):
        phi = diffeo.forward(np.array(x))
        back = diffeo.inverse(phi)
        rt = float(np.sqrt(np.sum((back - np.array(x)) ** 2)))
        round_trip_max = max(round_trip_max, rt)
        records.append({"x": list(x), "residual": residual, "round_trip_error": rt})
    dets = []
    jac_points = []
    pts = sample_domain(config.sampling)
    for shell in range(config.sampling.shells):
        x = pts[shell * config.sampling.points_per_shell]
        det = float(np.linalg.det(numeric_jacobian(diffeo, x)))
        dets.append(det)
        jac_points.append({"x": [float(v) for v in x], "det": det})
    extras = {
        "max_residual": eq.max_residual,
        "conservation_drift": eq.max_conservation_drift,
        "round_trip_max": round_trip_max,
        "jacobian": {"min_det": min(dets), "max_det": max(dets), "points": jac_points},
    }
    payload = None
    if config.format == "csv":
        header = [f"x{i + 1}" for i in range(config.n)]
        header += ["residual", "round_trip_error"]
        rows = [[*rec["x"], rec["residual"], rec["round_trip_error"]] for rec in records]
        payload = (header, rows)
    return extras, records, 0, payload


def _run_loja(config: RunConfig):
    f, g = _germs(config, need_g=False)
    if config.g_expr is not None:
        g = parse(config.g_expr, config.n)
        comp = compare_exponents(f, g, config.sampling)
        eta = {"eta_f": comp.eta_f, "eta_g": comp.eta_g, "delta": comp.delta}
    else:
        est = estimate_lojasiewicz(f, config.sampling)
        eta = est.as_dict()
    extras = {"eta": eta}
    payload = None
    if config.format == "csv":
        header = ["shell_radius"] + [f"x{i + 1}" for i in range(config.n)]
        header += ["abs_f", "grad_norm"]
        grads = f.gradient()
        radii = config.sampling.shell_radii()
        rows = []
        for k, x in enumerate(sample_domain(config.sampling)):
            shell = k // config.sampling.points_per_shell
            gn = float(np.sqrt(sum(gi.evaluate(x) ** 2 for gi in grads)))
            rows.append([radii[shell], *[float(v) for v in x], abs(f.evaluate(x)), gn])
        payload = (header, rows)
    return extras, [], 0, payload


def _run_genpair(config: RunConfig):
    f, _ = _germs(config, need_g=False)
    if config.format == "csv":
        raise CLIError("genpair emits JSON only")
    if config.r < 1:
        raise CLIError("genpair requires r >= 1")
    power = config.r + 2
    if config.multipliers is not None:
        mults = [parse_poly(s, config.n) for s in config.multipliers]
    elif config.gen_seed is not None:
        mults = random_multipliers(config.n, power, config.gen_seed, config.max_degree or 2)
    else:
        raise CLIError("genpair requires --multiplier ... or --gen-seed")
    basis = JacobiIdealBasis.of(f)
    element = assemble_element(basis, power, mults)
    generators = ideal_power_generators(basis, power)
    g = generate_pair(f, config.r, mults)
    records = [
        {"multiplier": serialize(m), "word": list(word), "generator": serialize(gen)}
        for (m, word), gen in zip(element.terms, generators)
    ]
    extras = {"g": serialize(g)}
    return extras, records, 0, None


def _run_distbound(config: RunConfig):
    f, _ = _germs(config, need_g=False)
    if config.zero_points is not None:
        pts = [np.array(p) for p in config.zero_points]
    elif all(not gi.constant_term() for gi in f.gradient()):
        pts = [np.zeros(config.n)]
    else:
        raise CLIError("grad f(0) != 0; provide --zero-points for the singular set")
    zero_set = SingularSetApprox(pts)
    report = estimate_gradient_dist_bound(f, zero_set, config.sampling)
    extras = {
        "a_estimate": report.a_estimate,
        "ratio_slope": report.ratio_slope,
        "verdict": report.verdict.value,
        "excluded_count": report.excluded_count,
    }
    records = [
        {
            "label": "grad_vs_dist",
            "worst_ratio": report.a_estimate,
            "worst_point": list(report.worst_point) if report.worst_point else None,
            "ratio_slope": report.ratio_slope,
        }
    ]
    code = 1 if report.verdict is Verdict.FAIL else 0
    payload = None
    if config.format == "csv":
        payload = dist_ratio_rows(f, zero_set, config.sampling)
    return extras, records, code, payload


_DISPATCH = {
    "check": _run_check,
    "check0": _run_check0,
    "flow": _run_flow,
    "verify": _run_verify,
    "loja": _run_loja,
    "genpair": _run_genpair,
    "distbound": _run_distbound,
}


def _emit_json(report: dict, path: Optional[str]):
    text = json.dumps(report, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_csv(payload, path: Optional[str]):
    header, rows = payload
    if path:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(rows)


def run(config: RunConfig) -> int:
    """Dispatch one resolved configuration and write its report."""
    t0 = time.perf_counter()
    extras, records, code, payload = _DISPATCH[config.command](config)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    if config.format == "csv" and payload is not None:
        _emit_csv(payload, config.output_path)
        return code
    report = {"command": config.command, "config": config.as_dict()}
    report.update(extras)
    report["records"] = records
    report["runtime_ms"] = runtime_ms
    _emit_json(report, config.output_path)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        return run(config)
    except (ValueError, RuntimeError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
