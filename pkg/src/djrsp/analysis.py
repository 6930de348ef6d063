"""State-independent average fidelity, closed-form results and optimization.

The state-independent average is taken uniformly over the population
``a1**2`` in [0, 1] and the phase ``theta`` in [0, 2pi) (not the Haar
measure). The averaged fidelity is a low-degree polynomial in ``a1**2`` and a
low-order trigonometric polynomial in ``theta``, so a Gauss-Legendre rule in
``a1**2`` times a periodic trapezoid rule in ``theta`` is exact up to
rounding at the default node counts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .channels import NO_PROTECTION, NoiseKind, ProtectionConfig
from .protocol import ProtocolMode, Resource, average_fidelity_many, noisy_resource

R_UPPER = 1.0 - 1e-6
R_GRID_POINTS = 101
R_TOL = 1e-8
VERDICT_TOL = 1e-10


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_a: int = 8
    nodes_theta: int = 16

    def __post_init__(self):
        if self.nodes_a < 8:
            raise ValueError(f"nodes_a must be >= 8, got {self.nodes_a}")
        if self.nodes_theta < 16:
            raise ValueError(f"nodes_theta must be >= 16, got {self.nodes_theta}")

    def rule(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Nodes and weights: ``(a1_squared, w_a, theta, w_theta)``.

        ``w_a`` sums to 1 (the length of [0, 1]) and ``w_theta`` to 2pi.
        """
        return _rule(self.nodes_a, self.nodes_theta)

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.nodes_a, 2 * self.nodes_theta)


@lru_cache(maxsize=16)
def _rule(nodes_a: int, nodes_theta: int):
    x, w = np.polynomial.legendre.leggauss(nodes_a)
    a1sq = 0.5 * (x + 1.0)
    w_a = 0.5 * w
    theta = 2.0 * math.pi * np.arange(nodes_theta) / nodes_theta
    w_theta = np.full(nodes_theta, 2.0 * math.pi / nodes_theta)
    for arr in (a1sq, w_a, theta, w_theta):
        arr.setflags(write=False)
    return a1sq, w_a, theta, w_theta


DEFAULT_QUADRATURE = QuadratureSpec()
# conditioning on m = 0 divides by a target-dependent probability, so the
# integrand is rational in a1**2 and needs more Gauss nodes
CONDITIONAL_QUADRATURE = QuadratureSpec(nodes_a=32)


def default_quadrature(mode: ProtocolMode | str) -> QuadratureSpec:
    if ProtocolMode.parse(mode) is ProtocolMode.JRSP_M0:
        return CONDITIONAL_QUADRATURE
    return DEFAULT_QUADRATURE


def resource_average(resource: Resource, mode: ProtocolMode | str = ProtocolMode.DJRSP,
                     quad: QuadratureSpec | None = None) -> float:
    """Average fidelity of an already prepared resource over all targets."""
    if quad is None:
        quad = default_quadrature(mode)
    a1sq, w_a, theta, w_theta = quad.rule()
    values = average_fidelity_many(resource, a1sq[:, None], theta[None, :], mode)
    return float(w_a @ values @ w_theta / (2.0 * math.pi))


def si_average_fidelity(
    kind: NoiseKind | str,
    lam: float,
    protection: ProtectionConfig = NO_PROTECTION,
    mode: ProtocolMode | str = ProtocolMode.DJRSP,
    quad: QuadratureSpec | None = None,
) -> float:
    return resource_average(noisy_resource(kind, lam, protection, mode), mode, quad)


# Closed-form results. Each function takes (lam, s, r); unused arguments are ignored.

class ClosedFormId(str, enum.Enum):
    F_AD = "F_AD"
    F_BF = "F_BF"
    F_PF = "F_PF"
    F_DE = "F_DE"
    FP_AD = "Fp_AD"
    R_OPT = "R_OPT"
    FP_AD_OPT = "Fp_AD_OPT"
    P_AD = "P_AD"
    FP_BF = "Fp_BF"
    FP_PF = "Fp_PF"
    FP_DE = "Fp_DE"
    FP_DE_OPT = "Fp_DE_OPT"
    DE_S_BOUND = "DE_S_BOUND"


def _f_ad(lam, s, r):
    return 1 - lam / 2


def _f_bf(lam, s, r):
    return 2 / 3 * lam**2 - lam + 1


def _f_pf(lam, s, r):
    return (4 * lam**2 - 4 * lam + 3) / 3


def _f_de(lam, s, r):
    return 16 / 27 * lam**2 - 10 / 9 * lam + 1


def _fp_ad(lam, s, r):
    num = (2 * (r**2 + r * (s - 3) + (s - 3) * s + 3)
           + lam**2 * r * (r + 1) * (s - 1) ** 2
           - lam * (s - 1) * (r * (3 * s - 1) + s - 3))
    den = 3 * (r * (lam**2 * r * (s - 1) ** 2 + r - 2 * lam * (s - 1) ** 2 - 2) + (s - 2) * s + 2)
    return num / den


def _delta(lam, s):
    return math.sqrt(lam * (s - 1) * (5 * lam * (s - 1) + 4) + 4)


def _r_opt(lam, s, r):
    d = _delta(lam, s)
    num = d + (d - 1) * lam * (s - 1) - d * s + lam**2 * (s - 3) * (s - 1) ** 2 - 2
    den = lam * (s - 1) * (lam * (s - 1) * (lam * (s - 1) - 2) - 1) - 2
    return num / den


def _fp_ad_opt(lam, s, r):
    root = math.sqrt(5 * lam**2 - 4 * lam + 5 * lam**2 * s**2 - 10 * lam**2 * s + 4 * lam * s + 4)
    return (4 - 2 * lam + 2 * lam * s + root) / 6


def _p_ad(lam, s, r):
    d = _delta(lam, s)
    u = lam * (s - 1)
    return d * (lam - 1) ** 2 * (s - 1) ** 2 / (d + u * (u * (d + 2 * u + 2) + 2))


def _fp_bf(lam, s, r):
    den = 3 * (r * (lam**2 * r * ((s - 2) * s + 2) - 2 * lam * (r + (s - 2) * s) + r - 2) + (s - 2) * s + 2)
    num = (-lam * (4 * r**2 + r * (s * (3 * s - 2) - 6) + (s - 6) * s + 6)
           + 2 * (r**2 + r * (s - 3) + (s - 3) * s + 3)
           + lam**2 * (r * (r * ((s - 2) * s + 3) + s * (s + 2) - 4) - 4 * s + 4))
    return num / den


def _fp_pf(lam, s, r):
    num = 2 * (r**2 + 4 * lam**2 * (r - 1) * (s - 1) - 4 * lam * (r - 1) * (s - 1)
               + r * s - 3 * r + s**2 - 3 * s + 3)
    return num / (3 * ((r - 2) * r + (s - 2) * s + 2))


def _fp_de(lam, s, r):
    den = (12 * lam**2 * r**2 * ((s - 2) * s + 2) - 36 * lam * r * (r + (s - 2) * s)
           + 27 * ((r - 2) * r + (s - 2) * s + 2))
    num = (-6 * lam * (4 * r**2 + r * (s * (3 * s + 2) - 10) + (s - 10) * s + 10)
           + 18 * (r**2 + r * (s - 3) + (s - 3) * s + 3)
           + 4 * lam**2 * (r * (r * ((s - 2) * s + 3) + s * (s + 6) - 8) - 8 * s + 8))
    return num / den


def _fp_de_opt(lam, s, r):
    common = 4 * lam**2 * s**2 - 12 * lam * s**2 + 9 * s**2 - 8 * lam**2 * s + 24 * lam * s - 18 * s + 9
    return 2 * (6 * lam**2 - 12 * lam + common) / (3 * (8 * lam**2 - 12 * lam + common))


def _de_s_bound(lam, s, r):
    radicand = -(8 * lam**4 - 15 * lam**3 + 9 * lam**2) / ((2 * lam - 3) ** 3 * (8 * lam - 3))
    if radicand < 0:
        raise ValueError(f"s-bound radicand is negative at lambda={lam!r}")
    return 1 - 2 * math.sqrt(2) * math.sqrt(radicand)


CLOSED_FORMS: dict[ClosedFormId, Callable[[float, float, float], float]] = {
    ClosedFormId.F_AD: _f_ad,
    ClosedFormId.F_BF: _f_bf,
    ClosedFormId.F_PF: _f_pf,
    ClosedFormId.F_DE: _f_de,
    ClosedFormId.FP_AD: _fp_ad,
    ClosedFormId.R_OPT: _r_opt,
    ClosedFormId.FP_AD_OPT: _fp_ad_opt,
    ClosedFormId.P_AD: _p_ad,
    ClosedFormId.FP_BF: _fp_bf,
    ClosedFormId.FP_PF: _fp_pf,
    ClosedFormId.FP_DE: _fp_de,
    ClosedFormId.FP_DE_OPT: _fp_de_opt,
    ClosedFormId.DE_S_BOUND: _de_s_bound,
}

# (lambda open at 1, s open at 1); s may be 0 for the optimal-reversal family
_OPEN_DOMAINS = {
    ClosedFormId.R_OPT: (True, True),
    ClosedFormId.FP_AD_OPT: (True, True),
    ClosedFormId.P_AD: (True, True),
    ClosedFormId.FP_DE_OPT: (False, True),
    ClosedFormId.DE_S_BOUND: (True, False),
}

PLAIN_FORM = {
    NoiseKind.AMPLITUDE_DAMPING: ClosedFormId.F_AD,
    NoiseKind.BIT_FLIP: ClosedFormId.F_BF,
    NoiseKind.PHASE_FLIP: ClosedFormId.F_PF,
    NoiseKind.DEPOLARIZING: ClosedFormId.F_DE,
}
PROTECTED_FORM = {
    NoiseKind.AMPLITUDE_DAMPING: ClosedFormId.FP_AD,
    NoiseKind.BIT_FLIP: ClosedFormId.FP_BF,
    NoiseKind.PHASE_FLIP: ClosedFormId.FP_PF,
    NoiseKind.DEPOLARIZING: ClosedFormId.FP_DE,
}


def closed_form(form: ClosedFormId | str, lam: float, s: float = 0.0, r: float = 0.0) -> float:
    """Evaluate a published closed-form result at ``(lam, s, r)``.

    ``R_OPT``, ``Fp_AD_OPT`` and ``P_AD`` assume the optimal reversal and
    ignore ``r``. Raises ``ValueError`` outside a formula's domain.
    """
    form = ClosedFormId(form)
    lam_open, s_open = _OPEN_DOMAINS.get(form, (False, False))
    if not (0.0 <= lam < 1.0 if lam_open else 0.0 <= lam <= 1.0):
        raise ValueError(f"{form.value}: lambda={lam!r} outside its domain")
    if not (0.0 <= s < 1.0 if s_open else 0.0 <= s <= 1.0):
        raise ValueError(f"{form.value}: s={s!r} outside its domain")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"{form.value}: r={r!r} outside [0, 1]")
    try:
        value = CLOSED_FORMS[form](float(lam), float(s), float(r))
    except ZeroDivisionError:
        raise ValueError(f"{form.value} is singular at lambda={lam!r}, s={s!r}, r={r!r}") from None
    return float(value)


# Reversal-strength optimization

@dataclass(frozen=True)
class OptimizationResult:
    r_star: float
    f_star: float
    iterations: int


_INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = R_TOL):
    """Maximize a unimodal ``f`` on [lo, hi] until the bracket is below ``tol``.

    Returns ``(x, f(x), iterations)``.
    """
    a, b = min(lo, hi), max(lo, hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), it


def optimize_r(
    kind: NoiseKind | str,
    lam: float,
    s: float,
    mode: ProtocolMode | str = ProtocolMode.DJRSP,
    quad: QuadratureSpec | None = None,
) -> OptimizationResult:
    """Best reversal strength for a given weak-measurement strength ``s``.

    A 101-point scan of r in [0, 1 - 1e-6] picks the bracket, then golden
    section refines it to ``R_TOL``.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must lie in [0, 1), got {lam!r}")
    if not 0.0 <= s < 1.0:
        raise ValueError(f"s must lie in [0, 1), got {s!r}")

    def objective(r: float) -> float:
        return si_average_fidelity(kind, lam, ProtectionConfig(s, r), mode, quad)

    grid = np.linspace(0.0, R_UPPER, R_GRID_POINTS)
    values = np.array([objective(r) for r in grid])
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, R_GRID_POINTS - 1)]
    r_star, f_star, it = golden_section_max(objective, lo, hi)
    if values[i] > f_star:
        r_star, f_star = float(grid[i]), float(values[i])
    return OptimizationResult(float(r_star), float(f_star), it)


# Inequality verdicts

@dataclass(frozen=True)
class VerdictReport:
    """Protected minus unprotected fidelity on a (lambda, s, r) grid."""

    kind: NoiseKind
    lambdas: np.ndarray
    s_values: np.ndarray
    r_values: np.ndarray
    margins: np.ndarray
    tolerance: float
    diagonal_gap: float | None = None

    @property
    def max_margin(self) -> float:
        return float(self.margins.max())

    @property
    def worst_point(self) -> tuple[float, float, float]:
        i, j, k = np.unravel_index(np.argmax(self.margins), self.margins.shape)
        return float(self.lambdas[i]), float(self.s_values[j]), float(self.r_values[k])

    @property
    def no_improvement(self) -> bool:
        return self.max_margin <= self.tolerance

    @property
    def passed(self) -> bool:
        diag_ok = self.diagonal_gap is None or self.diagonal_gap < self.tolerance
        return self.no_improvement and diag_ok


def improvement_margins(
    kind: NoiseKind | str,
    lambdas: Sequence[float],
    s_values: Sequence[float],
    r_values: Sequence[float],
    mode: ProtocolMode | str = ProtocolMode.DJRSP,
    quad: QuadratureSpec | None = None,
) -> np.ndarray:
    """``F(lam, s, r) - F(lam, 0, 0)`` from the simulator, shape (L, S, R)."""
    out = np.empty((len(lambdas), len(s_values), len(r_values)))
    for i, lam in enumerate(lambdas):
        plain = si_average_fidelity(kind, lam, NO_PROTECTION, mode, quad)
        for j, s in enumerate(s_values):
            for k, r in enumerate(r_values):
                out[i, j, k] = si_average_fidelity(kind, lam, ProtectionConfig(s, r), mode, quad) - plain
    return out


def _verdict(kind, lambdas, s_values, r_values, tol):
    lambdas, s_values, r_values = (np.asarray(g, dtype=float) for g in (lambdas, s_values, r_values))
    margins = improvement_margins(kind, lambdas, s_values, r_values)
    return VerdictReport(NoiseKind.parse(kind), lambdas, s_values, r_values, margins, tol)


def verdict_bitflip(lambda_grid, s_grid, r_grid, tol: float = VERDICT_TOL) -> VerdictReport:
    """Check that protection never beats plain bit-flip transmission."""
    return _verdict(NoiseKind.BIT_FLIP, lambda_grid, s_grid, r_grid, tol)


def verdict_phaseflip(lambda_grid, s_grid, r_grid, tol: float = VERDICT_TOL) -> VerdictReport:
    """As :func:`verdict_bitflip`, and require equality wherever ``r == s``."""
    rep = _verdict(NoiseKind.PHASE_FLIP, lambda_grid, s_grid, r_grid, tol)
    diag = np.isclose(rep.s_values[:, None], rep.r_values[None, :], rtol=0.0, atol=1e-15)
    gap = float(np.abs(rep.margins[:, diag]).max()) if diag.any() else None
    return VerdictReport(rep.kind, rep.lambdas, rep.s_values, rep.r_values, rep.margins, tol, gap)


DE_LAMBDA_WINDOW = (0.468, 0.75)


@dataclass(frozen=True)
class DERegion:
    improvable: bool
    s_bound: float
    delta_f: float


def de_improvement_region(lam: float, s: float) -> DERegion:
    """Whether protection can help under depolarizing noise at ``(lam, s)``.

    ``delta_f`` is the optimal protected fidelity minus the plain one;
    ``s_bound`` is 0 where the bound is undefined or negative.
    """
    if not 0.0 <= lam < 1.0 or not 0.0 <= s < 1.0:
        raise ValueError(f"need lambda, s in [0, 1), got {lam!r}, {s!r}")
    try:
        bound = max(closed_form(ClosedFormId.DE_S_BOUND, lam), 0.0)
    except ValueError:
        bound = 0.0
    lo, hi = DE_LAMBDA_WINDOW
    improvable = lo < lam < hi and 0.0 < s < bound
    delta = closed_form(ClosedFormId.FP_DE_OPT, lam, s) - closed_form(ClosedFormId.F_DE, lam)
    return DERegion(improvable, bound, delta)


# Simulator-versus-formula verification suite

VERIFY_TOL = 1e-9


@dataclass(frozen=True)
class FormCheck:
    form: ClosedFormId
    max_error: float
    # (lambda, s, r, error) for every point above tolerance
    offending: tuple[tuple[float, float, float, float], ...]

    @property
    def passed(self) -> bool:
        return not self.offending


def _checked(form, points, simulate, tol):
    errors = []
    for lam, s, r in points:
        errors.append((lam, s, r, abs(simulate(lam, s, r) - closed_form(form, lam, s, r))))
    worst = max(e for *_, e in errors)
    return FormCheck(form, worst, tuple(p for p in errors if not p[3] < tol))


def verify_closed_forms(
    density: int = 5,
    kinds: Sequence[NoiseKind | str] | None = None,
    tol: float = VERIFY_TOL,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> list[FormCheck]:
    """Compare every closed form that has a simulator counterpart.

    Grids use ``density`` points per axis: lambda in [0, 1] for the plain
    fidelities, lambda in [0, 0.9] and s, r in [0, 0.75] for the protected
    ones. The optimal-reversal forms are checked at ``r = R_OPT``.
    """
    if density < 2:
        raise ValueError(f"grid density must be >= 2, got {density}")
    kinds = [NoiseKind.parse(k) for k in (kinds or list(NoiseKind))]
    lam_full = np.linspace(0.0, 1.0, density)
    lam_open = np.linspace(0.0, 0.9, density)
    sr = np.linspace(0.0, 0.75, density)

    def fidelity(kind):
        return lambda lam, s, r: si_average_fidelity(kind, lam, ProtectionConfig(s, r), quad=quad)

    checks = []
    for kind in kinds:
        checks.append(_checked(PLAIN_FORM[kind], [(l, 0.0, 0.0) for l in lam_full], fidelity(kind), tol))
    for kind in kinds:
        pts = [(l, s, r) for l in lam_open for s in sr for r in sr]
        checks.append(_checked(PROTECTED_FORM[kind], pts, fidelity(kind), tol))
    if NoiseKind.AMPLITUDE_DAMPING in kinds:
        ad = NoiseKind.AMPLITUDE_DAMPING
        pts = [(l, s, 0.0) for l in lam_open for s in sr]

        def at_optimum(lam, s, _r):
            r = closed_form(ClosedFormId.R_OPT, lam, s)
            return si_average_fidelity(ad, lam, ProtectionConfig(s, r), quad=quad)

        def probability_at_optimum(lam, s, _r):
            r = closed_form(ClosedFormId.R_OPT, lam, s)
            return noisy_resource(ad, lam, ProtectionConfig(s, r)).success_probability

        checks.append(_checked(ClosedFormId.FP_AD_OPT, pts, at_optimum, tol))
        checks.append(_checked(ClosedFormId.P_AD, pts, probability_at_optimum, tol))
    return checks
