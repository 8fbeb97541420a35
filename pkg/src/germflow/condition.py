"""Sampled neighborhood checks for the right-equivalence criteria.

Everything here works on log-spaced radial shells around the origin: the
derivative-ratio bounds behind the C^r and C^0 equivalence criteria, the
gradient/distance bound, and the gradient-inequality exponent estimate. A
finite sample cannot certify an inequality on an open set, so verdicts come
from log-log slope diagnostics: a ratio whose slope against the radius stays
above ``SLOPE_BOUNDED`` counts as bounded, one that grows fast toward the
origin counts as divergent, anything in between is inconclusive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Optional

import numpy as np

from .germ import Poly, PolyGerm, _grlex_key

# verdict thresholds for the log-log slope of ratio vs radius; negative slope
# means growth toward the origin
SLOPE_BOUNDED = -0.1
SLOPE_DIVERGENT = -0.25
GROWTH_FACTOR = 10.0


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


class InsufficientSamplesError(RuntimeError):
    """Too few usable samples to draw any conclusion."""


@dataclass(frozen=True)
class SamplingSpec:
    """Seeded radial sampling plan for a punctured neighborhood of 0.

    ``shells`` log-spaced radii in [radius_min, radius_max], each carrying
    ``points_per_shell`` pseudorandom directions. shells*points_per_shell
    should be at least 16 for any statistical conclusion. Samples with
    gradient norm below ``grad_floor`` are excluded from ratio statistics
    and counted separately.
    """

    dimension: int
    radius_min: float = 1e-4
    radius_max: float = 0.2
    shells: int = 8
    points_per_shell: int = 8
    seed: int = 0
    grad_floor: float = 1e-14

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not (0.0 < self.radius_min < self.radius_max):
            raise ValueError("need 0 < radius_min < radius_max")
        if self.shells < 2:
            raise ValueError("need at least 2 shells")
        if self.points_per_shell < 1:
            raise ValueError("need at least 1 point per shell")
        if self.grad_floor < 0:
            raise ValueError("grad_floor must be >= 0")

    def shell_radii(self):
        lo, hi = math.log(self.radius_min), math.log(self.radius_max)
        last = self.shells - 1
        radii = [self.radius_min]
        for i in range(1, last):
            radii.append(math.exp(lo + (hi - lo) * i / last))
        radii.append(self.radius_max)
        return radii


def lojasiewicz_spec(dimension: int, seed: int = 0) -> SamplingSpec:
    """Default sampling for exponent estimation: 3 decades, 12x64 points."""
    return SamplingSpec(
        dimension, radius_min=1e-4, radius_max=1e-1, shells=12, points_per_shell=64, seed=seed
    )


def sample_domain(spec: SamplingSpec):
    """Deterministic sample points, shell-major, |x| equal to its shell radius."""
    rng = np.random.default_rng(spec.seed)
    points = []
    for radius in spec.shell_radii():
        for j in range(spec.points_per_shell):
            if spec.dimension == 1:
                u = np.array([1.0 if j % 2 == 0 else -1.0])
            else:
                v = rng.standard_normal(spec.dimension)
                norm = float(np.sqrt(np.sum(v * v)))
                while norm < 1e-12:
                    v = rng.standard_normal(spec.dimension)
                    norm = float(np.sqrt(np.sum(v * v)))
                u = v / norm
            points.append(radius * u)
    return points


@dataclass(frozen=True)
class RatioRecord:
    """Worst ratio, its location, and the log-log growth diagnostic."""

    label: str
    m: Optional[tuple]
    worst_ratio: float
    worst_point: Optional[tuple]
    ratio_slope: float
    outer_ratio: float
    samples_used: int

    def as_dict(self):
        return {
            "label": self.label,
            "m": list(self.m) if self.m is not None else None,
            "worst_ratio": self.worst_ratio,
            "worst_point": list(self.worst_point) if self.worst_point is not None else None,
            "ratio_slope": self.ratio_slope,
            "outer_ratio": self.outer_ratio,
            "samples_used": self.samples_used,
        }


@dataclass(frozen=True)
class ConditionReport:
    records: tuple
    c_estimate: float
    excluded_count: int
    verdict: Verdict

    def record(self, label: str) -> RatioRecord:
        for rec in self.records:
            if rec.label == label:
                return rec
        raise KeyError(label)

    def as_dict(self):
        return {
            "verdict": self.verdict.value,
            "c_estimate": self.c_estimate,
            "excluded_count": self.excluded_count,
            "records": [rec.as_dict() for rec in self.records],
        }


@dataclass(frozen=True)
class LojasiewiczEstimate:
    """Fitted gradient-inequality exponent |grad f| >= C |f|^eta."""

    eta_hat: float
    c_hat: float
    fit_points: int
    residual: float
    warning: Optional[str] = None

    def as_dict(self):
        return {
            "eta_hat": self.eta_hat,
            "c_hat": self.c_hat,
            "fit_points": self.fit_points,
            "residual": self.residual,
            "warning": self.warning,
        }


@dataclass(frozen=True)
class ExponentComparison:
    eta_f: float
    eta_g: float
    delta: float


@dataclass(frozen=True)
class DistBoundReport:
    a_estimate: float
    ratio_slope: float
    worst_point: Optional[tuple]
    verdict: Verdict
    excluded_count: int


def multi_indices_upto(n: int, order: int):
    """All multi-indices in N0^n with |m| <= order, graded-lex order."""
    ms = [m for m in product(range(order + 1), repeat=n) if sum(m) <= order]
    return sorted(ms, key=_grlex_key)


def _lsq(xs, ys):
    n = len(xs)
    xbar = sum(xs) / n
    ybar = sum(ys) / n
    sxx = sum((x - xbar) ** 2 for x in xs)
    if sxx == 0.0:
        return 0.0, ybar
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return slope, ybar - slope * xbar


def _gradient_norm(grads, x):
    s = 0.0
    for gi in grads:
        v = gi.evaluate(x)
        s += v * v
    return math.sqrt(s)


def _check_dimensions(spec, *polys):
    for p in polys:
        if p.n != spec.dimension:
            raise ValueError(f"dimension mismatch: germ has n={p.n}, sampling has n={spec.dimension}")


def _require_critical_origin(f: Poly):
    # symbolic check: every gradient component must vanish at 0
    for i, gi in enumerate(f.gradient()):
        if gi.constant_term():
            raise ValueError(f"grad f(0) != 0 (component {i + 1} has constant term {gi.constant_term()})")


class _Samples:
    """Shared per-point data: shell index, radius, point, |grad f|."""

    def __init__(self, f, spec):
        self.spec = spec
        grads = f.gradient()
        self.rows = []
        self.excluded = 0
        radii = spec.shell_radii()
        for k, x in enumerate(sample_domain(spec)):
            shell = k // spec.points_per_shell
            gn = _gradient_norm(grads, x)
            if gn < spec.grad_floor:
                self.excluded += 1
                continue
            self.rows.append((shell, radii[shell], x, gn))
        self.outer_shell = spec.shells - 1

    def require_nonempty(self):
        if not self.rows:
            raise InsufficientSamplesError(
                "all samples excluded by grad_floor; the neighborhood looks singular"
            )


def _build_record(label, m, entries, outer_shell):
    # entries: (shell, radius, point, ratio)
    worst = 0.0
    worst_point = None
    outer = 0.0
    log_pairs = []
    for shell, radius, x, ratio in entries:
        if ratio > worst:
            worst = ratio
            worst_point = tuple(float(v) for v in x)
        if shell == outer_shell and ratio > outer:
            outer = ratio
        if ratio > 0.0:
            log_pairs.append((math.log(radius), math.log(ratio)))
    if len(log_pairs) >= 2:
        slope, _ = _lsq([p[0] for p in log_pairs], [p[1] for p in log_pairs])
    else:
        slope = 0.0
    return RatioRecord(
        label=label,
        m=m,
        worst_ratio=worst,
        worst_point=worst_point,
        ratio_slope=slope,
        outer_ratio=outer,
        samples_used=len(entries),
    )


def _verdict(records) -> Verdict:
    for rec in records:
        if rec.ratio_slope < SLOPE_DIVERGENT and rec.worst_ratio > GROWTH_FACTOR * rec.outer_ratio:
            return Verdict.FAIL
    if all(rec.ratio_slope >= SLOPE_BOUNDED for rec in records):
        return Verdict.PASS
    return Verdict.INCONCLUSIVE


def _assemble(records, excluded) -> ConditionReport:
    c_estimate = max((rec.worst_ratio for rec in records), default=0.0)
    return ConditionReport(
        records=tuple(records),
        c_estimate=c_estimate,
        excluded_count=excluded,
        verdict=_verdict(records),
    )


def check_cr_criterion(f: PolyGerm, g: PolyGerm, r: int, spec: SamplingSpec) -> ConditionReport:
    """Test |d^m(g-f)(x)| <= C |grad f(x)|^(r+2-|m|) for all |m| <= r.

    For every multi-index m up to order r, the ratio of the two sides is
    sampled over the shells; each record keeps the worst ratio, where it
    occurred, and the least-squares slope of log ratio vs log |x|. PASS
    means every ratio stays bounded toward the origin, FAIL means some
    ratio demonstrably diverges (slope below SLOPE_DIVERGENT and worst
    value more than GROWTH_FACTOR times the outer-shell value).
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    _check_dimensions(spec, f, g)
    _require_critical_origin(f)
    samples = _Samples(f, spec)
    samples.require_nonempty()
    d = g - f
    records = []
    for m in multi_indices_upto(spec.dimension, r):
        dm = d.partial(m)
        exponent = r + 2 - sum(m)
        entries = [
            (shell, radius, x, abs(dm.evaluate(x)) / gn**exponent)
            for shell, radius, x, gn in samples.rows
        ]
        label = f"m=({','.join(map(str, m))})"
        records.append(_build_record(label, tuple(m), entries, samples.outer_shell))
    return _assemble(records, samples.excluded)


def check_c0_criterion(f: PolyGerm, g: PolyGerm, spec: SamplingSpec) -> ConditionReport:
    """Test |(g-f)| <= C |grad f|^2 and |grad(g-f)| <= C' |grad f|^2.

    The C^0 variant: both ratio families are analyzed exactly as in
    :func:`check_cr_criterion`; the two records report the C and C'
    estimates separately. Polynomial germs automatically satisfy the
    local Lipschitz requirement on the gradients.
    """
    _check_dimensions(spec, f, g)
    _require_critical_origin(f)
    samples = _Samples(f, spec)
    samples.require_nonempty()
    d = g - f
    grad_d = d.gradient()
    value_entries = []
    grad_entries = []
    for shell, radius, x, gn in samples.rows:
        gn2 = gn * gn
        value_entries.append((shell, radius, x, abs(d.evaluate(x)) / gn2))
        grad_entries.append((shell, radius, x, _gradient_norm(grad_d, x) / gn2))
    records = [
        _build_record("value", None, value_entries, samples.outer_shell),
        _build_record("gradient", None, grad_entries, samples.outer_shell),
    ]
    return _assemble(records, samples.excluded)


def estimate_gradient_dist_bound(f: PolyGerm, zero_set, spec: SamplingSpec) -> DistBoundReport:
    """Estimate A in |grad f(x)| <= A dist(x, Z) over the sampled shells.

    ``zero_set`` is a SingularSetApprox-like object exposing points() and
    distance(x).
    """
    _check_dimensions(spec, f)
    if not zero_set.points():
        raise ValueError("empty approximation of the singular set")
    grads = f.gradient()
    radii = spec.shell_radii()
    entries = []
    excluded = 0
    for k, x in enumerate(sample_domain(spec)):
        shell = k // spec.points_per_shell
        dist = zero_set.distance(x)
        if dist <= 0.0:
            excluded += 1
            continue
        entries.append((shell, radii[shell], x, _gradient_norm(grads, x) / dist))
    if not entries:
        raise InsufficientSamplesError("all samples sit on the singular-set approximation")
    rec = _build_record("grad_vs_dist", None, entries, spec.shells - 1)
    return DistBoundReport(
        a_estimate=rec.worst_ratio,
        ratio_slope=rec.ratio_slope,
        worst_point=rec.worst_point,
        verdict=_verdict([rec]),
        excluded_count=excluded,
    )


def estimate_lojasiewicz(f: PolyGerm, spec: SamplingSpec) -> LojasiewiczEstimate:
    """Fit the exponent of |grad f| >= C |f|^eta from the sampled envelope.

    The inequality is a lower envelope, so a plain regression over all
    samples would be biased by interior points. Instead each shell
    contributes its binding point (the sample minimizing |grad f|), the
    exponent is the least-squares slope of log |grad f| vs log |f| over
    those, and C comes from the envelope minimum over all samples so the
    fitted inequality actually holds on the sample set.
    """
    _check_dimensions(spec, f)
    if f.is_zero():
        raise ValueError("f must not be identically zero")
    grads = f.gradient()
    by_shell: dict = {}
    usable = []
    for k, x in enumerate(sample_domain(spec)):
        shell = k // spec.points_per_shell
        fv = abs(f.evaluate(x))
        gn = _gradient_norm(grads, x)
        if fv == 0.0 or gn == 0.0:
            continue
        pair = (math.log(fv), math.log(gn))
        usable.append(pair)
        best = by_shell.get(shell)
        if best is None or pair[1] < best[1]:
            by_shell[shell] = pair
    if len(usable) < 8:
        raise InsufficientSamplesError(f"fewer than 8 usable samples ({len(usable)})")
    binding = [by_shell[s] for s in sorted(by_shell)]
    if len(binding) < 4:
        raise InsufficientSamplesError("need binding points from at least 4 shells")
    eta_hat, intercept = _lsq([p[0] for p in binding], [p[1] for p in binding])
    log_c = min(lg - eta_hat * lf for lf, lg in usable)
    residual = max(abs(lg - (eta_hat * lf + intercept)) for lf, lg in binding)
    warning = None
    if not (0.0 < eta_hat < 1.0):
        warning = f"eta_hat={eta_hat:.4g} outside (0, 1); estimate may be unreliable"
        warnings.warn(warning)
    return LojasiewiczEstimate(
        eta_hat=eta_hat,
        c_hat=math.exp(log_c),
        fit_points=len(binding),
        residual=residual,
        warning=warning,
    )


def compare_exponents(f: PolyGerm, g: PolyGerm, spec: SamplingSpec) -> ExponentComparison:
    """Exponent estimates for f and g on the same samples, plus their gap."""
    ef = estimate_lojasiewicz(f, spec)
    eg = estimate_lojasiewicz(g, spec)
    return ExponentComparison(eta_f=ef.eta_hat, eta_g=eg.eta_hat, delta=abs(ef.eta_hat - eg.eta_hat))


def _sample_rows(f, spec, columns):
    # columns: (name, func(x, gn) -> float); excluded samples get blank cells
    header = ["shell_radius"] + [f"x{i + 1}" for i in range(spec.dimension)]
    header += [name for name, _ in columns]
    grads = f.gradient()
    radii = spec.shell_radii()
    rows = []
    for k, x in enumerate(sample_domain(spec)):
        shell = k // spec.points_per_shell
        gn = _gradient_norm(grads, x)
        cells = [radii[shell]] + [float(v) for v in x]
        if gn < spec.grad_floor:
            cells += [""] * len(columns)
        else:
            cells += [func(x, gn) for _, func in columns]
        rows.append(cells)
    return header, rows


def cr_ratio_rows(f: PolyGerm, g: PolyGerm, r: int, spec: SamplingSpec):
    """Per-sample CSV data matching check_cr_criterion's records."""
    d = g - f
    columns = []
    for m in multi_indices_upto(spec.dimension, r):
        dm = d.partial(m)
        exponent = r + 2 - sum(m)
        name = f"ratio_m=({','.join(map(str, m))})"
        columns.append((name, lambda x, gn, dm=dm, e=exponent: abs(dm.evaluate(x)) / gn**e))
    return _sample_rows(f, spec, columns)


def c0_ratio_rows(f: PolyGerm, g: PolyGerm, spec: SamplingSpec):
    """Per-sample CSV data matching check_c0_criterion's records."""
    d = g - f
    grad_d = d.gradient()
    columns = [
        ("ratio_value", lambda x, gn: abs(d.evaluate(x)) / (gn * gn)),
        ("ratio_gradient", lambda x, gn: _gradient_norm(grad_d, x) / (gn * gn)),
    ]
    return _sample_rows(f, spec, columns)


def dist_ratio_rows(f: PolyGerm, zero_set, spec: SamplingSpec):
    """Per-sample CSV data for the gradient/distance bound."""
    header = ["shell_radius"] + [f"x{i + 1}" for i in range(spec.dimension)]
    header.append("ratio_grad_vs_dist")
    grads = f.gradient()
    radii = spec.shell_radii()
    rows = []
    for k, x in enumerate(sample_domain(spec)):
        shell = k // spec.points_per_shell
        dist = zero_set.distance(x)
        cells = [radii[shell]] + [float(v) for v in x]
        cells.append(_gradient_norm(grads, x) / dist if dist > 0.0 else "")
        rows.append(cells)
    return header, rows
