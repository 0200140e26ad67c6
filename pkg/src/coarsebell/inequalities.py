"""CHSH and Leggett functions: assembly and optimization over settings.

Backends: "closed_form" (exact, qubit family, any variance) and "ensemble"
(Gauss-Hermite quadrature over the coherent engine, both state families).

Survey geometry.  The seven-direction survey pairs same-vector settings on
the two modes; because the shared state correlates the modes positively,
one party's azimuth must be mirrored (phi -> -phi on B) for same-vector
settings to read +1.  With that frame convention the ideal-limit
correlation is the scalar product of the setting vectors, the survey value
is 4 + 4 cos(phi), and the margin over the non-local-realistic bound
(8 - 2|sin(phi/2)| by default) peaks at 1/8 for sin(phi/2) = 1/8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from coarsebell import closedform, thermal
from coarsebell.closedform import ChshAngles, EtsParams
from coarsebell.numerics import OptimizerConfig, minimize

TSIRELSON = 2.0 * math.sqrt(2.0)
DEFAULT_SURVEY_PHI = 0.2507  # the margin-maximizing azimuth, 2*asin(1/8)


@dataclass(frozen=True)
class LeggettSetting:
    """Unit vector (theta, phi) in spherical polar coordinates."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("angles must be finite")
        theta = self.theta % (2.0 * math.pi)
        phi = self.phi
        if theta > math.pi:  # fold onto the canonical half sphere
            theta = 2.0 * math.pi - theta
            phi = phi + math.pi
        phi = (phi + math.pi) % (2.0 * math.pi) - math.pi
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def as_tuple(self) -> tuple[float, float]:
        return (self.theta, self.phi)


@dataclass(frozen=True)
class LeggettSuite:
    """The three a-settings and seven b-settings of the survey."""

    a1: LeggettSetting
    a2: LeggettSetting
    a3: LeggettSetting
    b1: LeggettSetting
    b2: LeggettSetting
    b3: LeggettSetting
    b4: LeggettSetting
    b5: LeggettSetting
    b6: LeggettSetting
    b7: LeggettSetting
    phi: float


def leggett_suite(phi: float) -> LeggettSuite:
    """Survey settings: a1=b5=(pi/2,0), a2=b6=(pi/2,pi/2), a3=b7=(0,0),
    b1=(pi/2,phi), b4=(phi,pi/2), with b2, b3 from b1, b4 by phi -> pi/2+phi."""
    if not math.isfinite(phi):
        raise ValueError("phi must be finite")
    half = 0.5 * math.pi
    a1 = LeggettSetting(half, 0.0)
    a2 = LeggettSetting(half, half)
    a3 = LeggettSetting(0.0, 0.0)
    return LeggettSuite(
        a1=a1,
        a2=a2,
        a3=a3,
        b1=LeggettSetting(half, phi),
        b2=LeggettSetting(half, half + phi),
        b3=LeggettSetting(half + phi, half),
        b4=LeggettSetting(phi, half),
        b5=a1,
        b6=a2,
        b7=a3,
        phi=phi,
    )


# ---------------------------------------------------------------------------
# backend dispatch


def _bell_correlation(theta_a, theta_b, params, backend, family, order):
    if backend == "closed_form":
        if family != "qubit":
            raise ValueError("closed form covers the qubit family only")
        return closedform.correlation(theta_a, theta_b, params)
    if backend == "ensemble":
        return thermal.ensemble_correlation(
            family, (theta_a, theta_b), params.V, params.d, params.eta, order
        )
    raise ValueError(f"unknown backend {backend!r}")


def bell_value(angles: ChshAngles, params: EtsParams, backend="closed_form",
               family="qubit", order=None) -> float:
    """CHSH combination for any backend/family."""
    if backend == "closed_form" and family == "qubit":
        return closedform.bell_value(angles, params)
    c = lambda x, y: _bell_correlation(x, y, params, backend, family, order)
    return (
        c(angles.theta_a, angles.theta_b)
        + c(angles.theta_a2, angles.theta_b)
        + c(angles.theta_a, angles.theta_b2)
        - c(angles.theta_a2, angles.theta_b2)
    )


def leggett_correlation(
    a: LeggettSetting,
    b: LeggettSetting,
    params: EtsParams,
    backend="closed_form",
    realization="rotation",
    order=None,
) -> float:
    """Correlation C^L(a, b) with B's azimuth mirrored (see module docstring)."""
    sa = a.as_tuple()
    sb = (b.theta, -b.phi)
    if backend == "closed_form":
        return closedform.leggett_correlation(sa, sb, params, realization=realization)
    kind = {"rotation": "rotation", "sequence": "leggett_sequence"}[realization]
    return thermal.ensemble_correlation(
        "qubit", (sa, sb), params.V, params.d, params.eta, order, kind=kind
    )


@dataclass
class ChshMaxResult:
    value: float
    angles: ChshAngles
    converged: bool


def _default_config(seed: int = 11) -> OptimizerConfig:
    return OptimizerConfig(
        bounds=((-math.pi, math.pi),) * 4,
        max_iters=400,
        tolerance=1e-8,
        restarts=16,
        seed=seed,
    )


def _chsh_hints() -> list[list[float]]:
    # scaled copies of the two-Kerr-rotation optimum pattern
    # (measurement direction turns by twice the setting angle)
    hints = []
    for s in (1.0, 0.5, 0.25, 0.125, 0.0625):
        base = s * math.pi / 8.0
        hints.append([0.0, base, 2.0 * base, -base])
        hints.append([-base, base, 3.0 * base, -3.0 * base])
    return hints


def chsh_max(
    params: EtsParams,
    backend: str = "closed_form",
    family: str = "qubit",
    opt: OptimizerConfig | None = None,
    order: int | None = None,
) -> ChshMaxResult:
    """Maximize |B| over the four angles with seeded multistart descent."""
    opt = opt or _default_config()

    def objective(v):
        return -abs(bell_value(ChshAngles(*v), params, backend, family, order))

    res = minimize(objective, opt, hints=_chsh_hints())
    return ChshMaxResult(
        value=-res.fun, angles=ChshAngles(*res.x), converged=res.converged
    )


# ---------------------------------------------------------------------------
# Leggett survey value and optimization


def leggett_L(
    params: EtsParams,
    phi: float,
    backend: str = "closed_form",
    realization: str = "rotation",
    order: int | None = None,
) -> float:
    """Two-group survey combination; the (a2, b6) term enters both groups."""
    s = leggett_suite(phi)
    c = lambda a, b: leggett_correlation(a, b, params, backend, realization, order)
    group1 = c(s.a1, s.b1) + c(s.a2, s.b2) + c(s.a1, s.b5) + c(s.a2, s.b6)
    group2 = c(s.a2, s.b3) + c(s.a3, s.b4) + c(s.a2, s.b6) + c(s.a3, s.b7)
    return abs(group1) + abs(group2)


def leggett_script(
    params: EtsParams,
    phi: float,
    sine_coeff: float = 2.0,
    backend: str = "closed_form",
    realization: str = "rotation",
    order: int | None = None,
) -> float:
    """Margin of the survey value over the non-local-realistic bound.

    Positive values violate the bound 8 - sine_coeff * |sin(phi/2)|.  The
    default coefficient 2 makes the ideal-limit margin peak at exactly 1/8
    for phi = 2 asin(1/8) ~ 0.2507.
    """
    L = leggett_L(params, phi, backend, realization, order)
    return L - 8.0 + sine_coeff * abs(math.sin(0.5 * phi))


@dataclass
class LeggettMaxResult:
    value: float
    phi: float
    converged: bool


def leggett_script_max(
    params: EtsParams,
    phi_mode: str = "fixed",
    sine_coeff: float = 2.0,
    backend: str = "closed_form",
    realization: str = "rotation",
    order: int | None = None,
) -> LeggettMaxResult:
    """Survey margin at phi = 0.2507 ("fixed") or maximized over phi."""
    if phi_mode == "fixed":
        val = leggett_script(
            params, DEFAULT_SURVEY_PHI, sine_coeff, backend, realization, order
        )
        return LeggettMaxResult(value=val, phi=DEFAULT_SURVEY_PHI, converged=True)
    if phi_mode != "optimize":
        raise ValueError("phi_mode must be 'fixed' or 'optimize'")
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(
        lambda ph: -leggett_script(params, ph, sine_coeff, backend, realization, order),
        bounds=(1e-3, 0.5 * math.pi - 1e-3),
        method="bounded",
        options={"xatol": 1e-6},
    )
    return LeggettMaxResult(value=-res.fun, phi=float(res.x), converged=res.success)


# ---------------------------------------------------------------------------
# coexistence window (CHSH violated while the survey bound holds)


@dataclass
class WindowScan:
    d_grid: np.ndarray
    bell: np.ndarray
    script: np.ndarray

    @property
    def mask(self) -> np.ndarray:
        return (self.bell > 2.0) & (self.script <= 0.0)

    @property
    def window(self) -> tuple[float, float] | None:
        idx = np.nonzero(self.mask)[0]
        if idx.size == 0:
            return None
        return float(self.d_grid[idx[0]]), float(self.d_grid[idx[-1]])

    @property
    def width(self) -> float:
        w = self.window
        return 0.0 if w is None else w[1] - w[0]


def coexistence_scan(
    V: float,
    eta: float,
    d_grid,
    backend: str = "closed_form",
    opt: OptimizerConfig | None = None,
    phi_mode: str = "optimize",
    order: int | None = None,
) -> WindowScan:
    """Optimized |B| and survey margin across a displacement grid."""
    d_grid = np.asarray(d_grid, dtype=float)
    bell = np.empty_like(d_grid)
    script = np.empty_like(d_grid)
    for i, d in enumerate(d_grid):
        p = EtsParams(V=V, d=float(d), eta=eta)
        bell[i] = chsh_max(p, backend=backend, opt=opt, order=order).value
        script[i] = leggett_script_max(
            p, phi_mode=phi_mode, backend=backend, order=order
        ).value
    return WindowScan(d_grid=d_grid, bell=bell, script=script)
