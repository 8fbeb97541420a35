"""Transport along the homotopy F(xi, x) = f(x) + xi*(g-f)(x).

The equivalence map is built by flowing sample points along a
time-dependent vector field W chosen so that F is constant along
trajectories: with X = (d/|grad F|^2) grad F (the full (n+1)-gradient,
xi-component included) and W = (X_2..X_{n+1})/(X_1 - 1), the solution
y_x of dy/dt = W(t, y), y_x(0) = x, satisfies F(t, y_x(t)) = F(0, x),
hence g(y_x(1)) = f(x). The map phi(x) = y_x(1) is the candidate
equivalence; its inverse integrates the same field from t = 1 back to 0.

W vanishes on the singular set Z = {grad f = 0}, so points of Z are
fixed and trajectories never cross it. Numerically that structure is
preserved by an eps_Z short-circuit at Z, a per-step cap keeping |dy|
below half the distance to the known part of Z, and a monitor that
aborts if an accepted node ever lands inside the eps_Z band.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ._kernels import get_backend
from ._kernels.table import (
    SLOT_GRAD_F,
    STATUS_INCONSISTENT,
    STATUS_POLE,
    SystemTable,
)
from .condition import SamplingSpec, _lsq, sample_domain
from .germ import PolyGerm

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

# PI step-size controller (Hairer/Wanner style for a 5th-order pair)
_SAFETY = 0.9
_FACMIN = 0.2
_FACMAX = 5.0
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5


class FlowError(RuntimeError):
    """Base class for transport failures."""


class DomainError(FlowError):
    """xi outside the homotopy domain |xi| < delta."""


class SingularityError(FlowError):
    """Trajectory reached the singular set, or the gradient degenerated."""


class PoleError(FlowError):
    """Transport-field pole |X_1 - 1| <= 1/2; the neighborhood is too large."""


class IntegrationError(FlowError):
    """Step-count or step-size budget exhausted."""


class Direction(Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


@dataclass(frozen=True)
class IntegratorSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    h_init: float = 1e-2
    h_min: float = 1e-12
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if not (0.0 < self.h_min <= self.h_init):
            raise ValueError("need 0 < h_min <= h_init")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Accepted nodes of one flow line, with the conservation diagnostic.

    t_nodes run 0 to 1 for FORWARD trajectories and 1 to 0 for INVERSE
    ones; f_values[k] = F(t_k, y_k) and conservation_drift is the largest
    deviation of F from its initial value along the trajectory.
    """

    t_nodes: np.ndarray
    y_nodes: np.ndarray
    f_values: np.ndarray
    accepted_steps: int
    rejected_steps: int
    conservation_drift: float

    @property
    def y_end(self) -> np.ndarray:
        return self.y_nodes[-1]


class SingularSetApprox:
    """Finite under-approximation of Z = {grad f = 0} with distance queries.

    Distances to the true Z are overestimated by at most the grid pitch
    when the approximation comes from a grid refinement; user-declared
    points (the origin for every fixture here) are exact.
    """

    def __init__(self, points, pitch: float = 0.0):
        pts = [np.ascontiguousarray(np.asarray(p, dtype=np.float64)) for p in points]
        self._points = tuple(pts)
        self._stack = np.stack(pts) if pts else None
        self.pitch = float(pitch)

    def points(self):
        return self._points

    def distance(self, x) -> float:
        if self._stack is None:
            return math.inf
        diff = self._stack - np.asarray(x, dtype=np.float64)
        return float(np.sqrt(np.min(np.sum(diff * diff, axis=1))))


def _as_vec(x, n: int) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if arr.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {arr.shape}")
    return arr


class HomotopySystem:
    """Immutable bundle: the pair (f, g), cached d = g - f and gradients,
    the packed evaluation table, and the selected kernel backend.

    eps_z defaults to 1e-12*(1 + sum |coeff| over grad f), a band below
    the double-precision resolution of the gradient on the unit box.
    """

    __slots__ = (
        "f",
        "g",
        "r",
        "delta",
        "d",
        "grad_f",
        "grad_d",
        "eps_z",
        "n",
        "table",
        "backend_name",
        "_backend",
        "_default_zero_set",
    )

    def __init__(self, f: PolyGerm, g: PolyGerm, r: int = 1, delta: float = 3.0,
                 eps_z: Optional[float] = None, backend: str = "auto"):
        if not isinstance(f, PolyGerm) or not isinstance(g, PolyGerm):
            raise TypeError("f and g must be PolyGerm instances")
        if f.n != g.n:
            raise ValueError(f"dimension mismatch: f has n={f.n}, g has n={g.n}")
        if r < 0:
            raise ValueError("r must be >= 0")
        if not delta > 2.0:
            raise ValueError("delta must be > 2")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "delta", float(delta))
        d = PolyGerm.from_poly(g - f)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "grad_f", f.gradient())
        object.__setattr__(self, "grad_d", d.gradient())
        object.__setattr__(self, "n", f.n)
        if eps_z is None:
            scale = sum(p.coefficient_norm() for p in self.grad_f)
            eps_z = 1e-12 * (1.0 + scale)
        if eps_z <= 0:
            raise ValueError("eps_z must be > 0")
        object.__setattr__(self, "eps_z", float(eps_z))
        polys = [f, d, *self.grad_f, *self.grad_d]
        object.__setattr__(self, "table", SystemTable(polys, self.n, float(eps_z)))
        be = get_backend(backend)
        object.__setattr__(self, "_backend", be)
        object.__setattr__(self, "backend_name", be.NAME)
        object.__setattr__(self, "_default_zero_set", None)

    def __setattr__(self, name, value):
        raise AttributeError("HomotopySystem is immutable")

    def critical_origin(self) -> bool:
        return all(not gi.constant_term() for gi in self.grad_f)

    def _check_xi(self, xi: float):
        if not abs(xi) < self.delta:
            raise DomainError(f"|xi| = {abs(xi)} is outside the domain |xi| < {self.delta}")

    def homotopy_value(self, xi: float, x) -> float:
        """F(xi, x) = f(x) + xi*(g-f)(x)."""
        self._check_xi(xi)
        return self._backend.homotopy_value(self.table, float(xi), _as_vec(x, self.n))

    def homotopy_gradient(self, xi: float, x) -> np.ndarray:
        """Full (n+1)-gradient of F: component 0 is (g-f)(x), the rest grad_x F."""
        self._check_xi(xi)
        out = np.empty(self.n + 1)
        self._backend.homotopy_gradient(self.table, float(xi), _as_vec(x, self.n), out)
        return out

    def moser_field(self, xi: float, x) -> np.ndarray:
        """X(xi, x) = (d(x)/|grad F|^2) grad F, zero on the eps_z band around Z."""
        self._check_xi(xi)
        out = np.empty(self.n + 1)
        status = self._backend.moser_field(self.table, float(xi), _as_vec(x, self.n), out)
        self._raise_field_status(status, xi, x)
        return out

    def transport_field(self, xi: float, x) -> np.ndarray:
        """W(xi, x) = (X_2..X_{n+1})/(X_1 - 1); zero wherever X is zero."""
        self._check_xi(xi)
        out = np.empty(self.n)
        status = self._backend.transport_field(self.table, float(xi), _as_vec(x, self.n), out)
        self._raise_field_status(status, xi, x)
        return out

    def _raise_field_status(self, status: int, xi, x):
        if status == STATUS_INCONSISTENT:
            raise SingularityError(
                f"|grad F| vanishes while |grad f| >= eps_z at xi={xi}, x={np.asarray(x)}; "
                "the hypothesis fails at this point"
            )
        if status == STATUS_POLE:
            raise PoleError(
                f"|X_1 - 1| <= 1/2 at xi={xi}, x={np.asarray(x)}; "
                "shrink radius_max, the sampled neighborhood is too large"
            )

    def grad_f_norm(self, x) -> float:
        be = self._backend
        x = _as_vec(x, self.n)
        s = 0.0
        for i in range(self.n):
            v = be.poly_value(self.table, SLOT_GRAD_F + i, x)
            s += v * v
        return math.sqrt(s)

    def default_zero_set(self) -> SingularSetApprox:
        """The user-declarable part of Z: the origin when grad f(0) = 0."""
        cached = self._default_zero_set
        if cached is None:
            pts = [np.zeros(self.n)] if self.critical_origin() else []
            cached = SingularSetApprox(pts)
            object.__setattr__(self, "_default_zero_set", cached)
        return cached

    def refine_zero_set(self, radius: float, grid_points: int = 33) -> SingularSetApprox:
        """Grid scan of [-radius, radius]^n for |grad f| < eps_z.

        Pitch-limited: reported distances overestimate the true ones by at
        most the grid spacing. Known points (the origin) are always kept.
        """
        if radius <= 0 or grid_points < 2:
            raise ValueError("need radius > 0 and grid_points >= 2")
        axis = np.linspace(-radius, radius, grid_points)
        pitch = float(axis[1] - axis[0])
        hits = [np.zeros(self.n)] if self.critical_origin() else []
        for combo in itertools.product(axis, repeat=self.n):
            x = np.array(combo)
            if any(np.all(x == h) for h in hits):
                continue
            if self.grad_f_norm(x) < self.eps_z:
                hits.append(x)
        return SingularSetApprox(hits, pitch=pitch)


def integrate_trajectory(system: HomotopySystem, x0, direction: Direction = Direction.FORWARD,
                         settings: Optional[IntegratorSettings] = None,
                         zero_set: Optional[SingularSetApprox] = None) -> Trajectory:
    """Adaptive RK5(4) solve of dy/dt = W(t, y) across t in [0, 1].

    FORWARD starts at y(0) = x0 and reports nodes in increasing t; INVERSE
    starts at y(1) = x0 and reports them in decreasing t. Step sizes obey a
    PI controller on the embedded error estimate plus the near-Z cap
    |dy| <= dist(y, Z)/2. Two degenerate cases bypass the integrator: if
    g = f the field is identically zero and the identity trajectory is
    returned bit-exactly, and if x0 already lies in the eps_z band it is a
    fixed point.
    """
    if settings is None:
        settings = IntegratorSettings()
    n = system.n
    y = _as_vec(x0, n).copy()
    forward = direction == Direction.FORWARD
    if zero_set is None:
        zero_set = system.default_zero_set()

    def t_of(tau: float) -> float:
        return tau if forward else 1.0 - tau

    be = system._backend
    table = system.table

    def fvalue(tau: float, yv: np.ndarray) -> float:
        return be.homotopy_value(table, t_of(tau), yv)

    if system.d.is_zero() or system.grad_f_norm(y) < system.eps_z:
        f0 = fvalue(0.0, y)
        return Trajectory(
            t_nodes=np.array([t_of(0.0), t_of(1.0)]),
            y_nodes=np.stack([y, y.copy()]),
            f_values=np.array([f0, f0]),
            accepted_steps=0,
            rejected_steps=0,
            conservation_drift=0.0,
        )

    def rhs(tau: float, yv: np.ndarray) -> np.ndarray:
        out = np.empty(n)
        status = be.transport_field(table, t_of(tau), yv, out)
        if status == STATUS_INCONSISTENT or status == STATUS_POLE:
            system._raise_field_status(status, t_of(tau), yv)
        if not forward:
            np.negative(out, out)
        return out

    tau = 0.0
    ts = [t_of(0.0)]
    ys = [y.copy()]
    fvals = [fvalue(0.0, y)]
    accepted = 0
    rejected = 0
    err_old = 1e-4
    h = min(settings.h_init, 1.0)
    k1 = rhs(tau, y)
    ks = [k1] + [None] * 6

    while tau < 1.0:
        if accepted + rejected >= settings.max_steps:
            raise IntegrationError(f"max_steps = {settings.max_steps} exhausted at t = {t_of(tau)}")
        hit_end = h >= 1.0 - tau
        if hit_end:
            h = 1.0 - tau
        speed = float(np.sqrt(np.sum(ks[0] * ks[0])))
        dist = zero_set.distance(y)
        if speed > 0.0 and math.isfinite(dist) and h > dist / (2.0 * speed):
            h = dist / (2.0 * speed)
            hit_end = False
        if h < settings.h_min:
            raise IntegrationError(f"step size underflow (h = {h:.3e}) at t = {t_of(tau)}")

        for s in range(1, 7):
            ytmp = y.copy()
            for j, a in enumerate(_A[s]):
                if a != 0.0:
                    ytmp += (h * a) * ks[j]
            ks[s] = rhs(tau + _C[s] * h, ytmp)
        # row _A[6] equals _B5, so the last stage input is the 5th-order
        # solution and ks[6] is its FSAL derivative
        ynew = ytmp
        klast = ks[6]

        err_vec = np.zeros(n)
        for j, e in enumerate(_E):
            if e != 0.0:
                err_vec += e * ks[j]
        err_vec *= h
        scale = settings.abs_tol + settings.rel_tol * np.maximum(np.abs(y), np.abs(ynew))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if err <= 1.0:
            tau = 1.0 if hit_end else tau + h
            y = ynew
            ks[0] = klast
            if system.grad_f_norm(y) < system.eps_z:
                raise SingularityError(
                    f"trajectory reached the singular set at t = {t_of(tau)}, y = {y}"
                )
            ts.append(t_of(tau))
            ys.append(y.copy())
            fvals.append(fvalue(tau, y))
            accepted += 1
            if err == 0.0:
                fac = _FACMAX
            else:
                fac = _SAFETY * err ** (-_ALPHA) * err_old ** _BETA
                fac = min(_FACMAX, max(_FACMIN, fac))
            err_old = max(err, 1e-4)
            h *= fac
        else:
            rejected += 1
            fac = _SAFETY * err ** (-_ALPHA) * err_old ** _BETA
            h *= min(1.0, max(_FACMIN, fac))

    fv = np.array(fvals)
    return Trajectory(
        t_nodes=np.array(ts),
        y_nodes=np.stack(ys),
        f_values=fv,
        accepted_steps=accepted,
        rejected_steps=rejected,
        conservation_drift=float(np.max(np.abs(fv - fv[0]))),
    )


@dataclass(frozen=True)
class DiffeoMap:
    """The transport map phi(x) = y_x(1) and its flow-reversal inverse."""

    system: HomotopySystem
    settings: IntegratorSettings = IntegratorSettings()
    direction: Direction = Direction.FORWARD
    zero_set: Optional[SingularSetApprox] = None

    def trajectory(self, x, direction: Optional[Direction] = None) -> Trajectory:
        return integrate_trajectory(
            self.system, x, direction or self.direction, self.settings,
            self.zero_set if self.zero_set is not None else self.system.default_zero_set(),
        )

    def forward(self, x) -> np.ndarray:
        return self.trajectory(x, Direction.FORWARD).y_end

    def inverse(self, x) -> np.ndarray:
        return self.trajectory(x, Direction.INVERSE).y_end

    def __call__(self, x) -> np.ndarray:
        return self.trajectory(x).y_end


def diffeo_forward(diffeo: DiffeoMap, x) -> np.ndarray:
    return diffeo.forward(x)


def diffeo_inverse(diffeo: DiffeoMap, x) -> np.ndarray:
    return diffeo.inverse(x)


@dataclass(frozen=True)
class EquivalenceReport:
    max_residual: float
    residuals: tuple
    points: tuple
    max_conservation_drift: float

    def as_dict(self):
        return {
            "max_residual": self.max_residual,
            "max_conservation_drift": self.max_conservation_drift,
            "residuals": list(self.residuals),
        }


def verify_equivalence(system: HomotopySystem, diffeo: DiffeoMap,
                       spec: SamplingSpec) -> EquivalenceReport:
    """Max over sampled x of |f(x) - g(phi(x))|, plus the worst drift seen."""
    if spec.dimension != system.n:
        raise ValueError("sampling dimension does not match the system")
    residuals = []
    points = []
    max_drift = 0.0
    for x in sample_domain(spec):
        traj = diffeo.trajectory(x, Direction.FORWARD)
        phi = traj.y_end
        fx = system.f.evaluate(x)
        gphi = system.homotopy_value(1.0, phi)
        residuals.append(abs(fx - gphi))
        points.append(tuple(float(v) for v in x))
        max_drift = max(max_drift, traj.conservation_drift)
    return EquivalenceReport(
        max_residual=max(residuals) if residuals else 0.0,
        residuals=tuple(residuals),
        points=tuple(points),
        max_conservation_drift=max_drift,
    )


def conservation_check(traj: Trajectory) -> float:
    """Recompute max_t |F(t, y(t)) - F(0, y(0))| from the stored nodes."""
    return float(np.max(np.abs(traj.f_values - traj.f_values[0])))


def numeric_jacobian(diffeo: DiffeoMap, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of the forward map at x."""
    if h <= 0:
        raise ValueError("h must be > 0")
    n = diffeo.system.n
    x = _as_vec(x, n)
    jac = np.empty((n, n))
    for j in range(n):
        step = np.zeros(n)
        step[j] = h
        plus = diffeo.forward(x + step)
        minus = diffeo.forward(x - step)
        jac[:, j] = (plus - minus) / (2.0 * h)
    return jac


@dataclass(frozen=True)
class DisplacementProfile:
    slope: Optional[float]
    identity_within_noise: bool
    samples_used: int


def displacement_profile(diffeo: DiffeoMap, spec: SamplingSpec,
                         zero_set: Optional[SingularSetApprox] = None) -> DisplacementProfile:
    """Fit of log|phi(x) - x| against log dist(x, Z) over the sampled shells.

    The field bound makes the displacement decay at least like dist^{r+1},
    so the fitted slope should reach r+1 up to fit tolerance. If every
    displacement is below 1e-14 the map is the identity within noise and
    no slope is reported.
    """
    system = diffeo.system
    if spec.dimension != system.n:
        raise ValueError("sampling dimension does not match the system")
    if zero_set is None:
        zero_set = system.default_zero_set()
    pairs = []
    used = 0
    for x in sample_domain(spec):
        phi = diffeo.forward(x)
        disp = float(np.sqrt(np.sum((phi - x) ** 2)))
        used += 1
        dist = zero_set.distance(x)
        if disp > 1e-14 and 0.0 < dist < math.inf:
            pairs.append((math.log(dist), math.log(disp)))
    if not pairs:
        return DisplacementProfile(slope=None, identity_within_noise=True, samples_used=used)
    slope, _ = _lsq([p[0] for p in pairs], [p[1] for p in pairs])
    return DisplacementProfile(slope=slope, identity_within_noise=False, samples_used=used)
