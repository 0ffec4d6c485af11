"""Explicit growth and logarithmic-derivative bounds, with exceptional-set
accounting in logarithmic measure.

Everything here compares quantities in log space: the right-hand sides of
the growth lemmas reach exp((1-r)^{-const}) scales, so the inequalities are
checked between log-LHS and log-RHS floats.  Radii where a bound fails are
collected into an :class:`ExceptionalSet`; the testable surrogate of "finite
logarithmic measure" is a configurable measure budget, and the surrogate of
"infinite logarithmic measure" is cumulative measure above 3 with a
non-decreasing tail of increments.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .funcs import Const, Expr, eval_log, eval_log_batch, log_derivative_ratios
from .growth import (
    EstimationError,
    Mode,
    OrderEstimate,
    RadialGrid,
    characteristic,
    estimate_from_args,
    max_modulus,
    order_estimate,
    sample_grid,
    type_estimate,
)
from .lognum import TowerOverflow
from .ode import OdeProblem
from .scale import ScaleTriple, log_iter

__all__ = [
    "ExceptionalSet",
    "BoundReport",
    "BorelShiftResult",
    "LowerSetReport",
    "OutOfRegimeError",
    "log_measure",
    "heittokangas_bound",
    "order_of_bound",
    "log_derivative_check",
    "proximity_bound_check",
    "borel_shift_check",
    "lower_set_measure",
    "write_bound_csv",
]

_trapz = getattr(np, "trapezoid", None) or np.trapz
_INTEGRAND_CAP = 700.0


class OutOfRegimeError(RuntimeError):
    """A bound's integrand left the regime where it can be exponentiated."""


@dataclass(frozen=True)
class ExceptionalSet:
    """Disjoint sorted subintervals of [0, 1)."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        prev = -math.inf
        for lo, hi in self.intervals:
            if not (0.0 <= lo <= hi < 1.0):
                raise ValueError(f"interval ({lo}, {hi}) not inside [0, 1)")
            if lo < prev:
                raise ValueError("intervals must be sorted and disjoint")
            prev = hi

    @classmethod
    def from_mask(cls, radii, mask) -> "ExceptionalSet":
        """Intervals around flagged grid radii, split at neighbor midpoints."""
        radii = [float(r) for r in radii]
        n = len(radii)
        ivals: list[tuple[float, float]] = []
        i = 0
        while i < n:
            if not mask[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            lo = radii[i] if i == 0 else 0.5 * (radii[i - 1] + radii[i])
            hi = radii[j] if j == n - 1 else 0.5 * (radii[j] + radii[j + 1])
            ivals.append((lo, hi))
            i = j + 1
        return cls(tuple(ivals))


def log_measure(s: ExceptionalSet) -> float:
    """Logarithmic measure: the integral of dr/(1-r) over the set."""
    return sum(math.log((1.0 - lo) / (1.0 - hi)) for lo, hi in s.intervals)


@dataclass(frozen=True)
class BoundReport:
    label: str
    radii: tuple[float, ...]
    lhs_log: tuple[float, ...]
    rhs_log: tuple[float, ...]
    violations: ExceptionalSet
    budget: float
    notes: str = ""

    @property
    def margins(self) -> tuple[float, ...]:
        return tuple(r - l for l, r in zip(self.lhs_log, self.rhs_log))

    @property
    def violation_measure(self) -> float:
        return log_measure(self.violations)

    @property
    def passed(self) -> bool:
        return self.violation_measure <= self.budget


def write_bound_csv(path, report: BoundReport):
    """Rows r,lhs_log,rhs_log,margin,violate; exceptional intervals in the
    footer."""
    viol = set()
    for lo, hi in report.violations.intervals:
        for i, r in enumerate(report.radii):
            if lo <= r <= hi:
                viol.add(i)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "lhs_log", "rhs_log", "margin", "violate"])
        for i, r in enumerate(report.radii):
            w.writerow([f"{r:.12g}", f"{report.lhs_log[i]:.12g}",
                        f"{report.rhs_log[i]:.12g}", f"{report.margins[i]:.12g}",
                        int(i in viol)])
        fh.write(f"# violations: {list(report.violations.intervals)}\n")
        fh.write(f"# log_measure: {report.violation_measure:.12g} (budget {report.budget:g})\n")


# ---------------------------------------------------------------------------
# coefficient-integral growth bound and its order
# ---------------------------------------------------------------------------

def _active_coeffs(p: OdeProblem) -> list[tuple[int, Expr]]:
    return [(j, a) for j, a in enumerate(p.coeffs)
            if not (isinstance(a, Const) and a.value == 0)]


def heittokangas_bound(
    p: OdeProblem,
    r: float,
    theta: float = 0.0,
    nu: float = 0.0,
    n_quad: int = 129,
    eps: float = 1.0,
    c_override: float | None = None,
    n_quad_max: int = 1 << 15,
) -> float:
    """log of the coefficient-integral solution bound along the ray angle
    ``theta``:

        log C + n_c * integral_nu^r max_j |A_j(t e^{i theta})|^{1/(k-j)} dt.

    The integrand is computed through log-space evaluation and exponentiated
    only while its log stays at or below 700; otherwise the call is out of
    regime and fails loudly.  The constant C uses the problem's initial data
    at nu = 0 (pass ``c_override`` for nu > 0); its undetermined exponent is
    read as (n_c * max_m |A_m|^{1/(k-m)})^j, the dimensionally consistent
    choice, and the whole constant is overridable.
    """
    if not (0.0 <= nu < r < 1.0):
        raise ValueError("need 0 <= nu < r < 1")
    active = _active_coeffs(p)
    if not active:
        raise ValueError("all coefficients vanish identically")
    n_c = len(active)

    def integrand(ts: np.ndarray) -> np.ndarray:
        zs = ts * np.exp(1j * theta)
        best = np.full(ts.shape, -np.inf)
        for j, a in active:
            lm, _ = eval_log_batch(a, zs)
            np.maximum(best, lm / (p.k - j), out=best)
        top = float(np.max(best))
        if top > _INTEGRAND_CAP:
            raise OutOfRegimeError(
                f"integrand log-magnitude {top:.4g} exceeds {_INTEGRAND_CAP:g} "
                f"at r={r:.6g}, theta={theta:.4g}")
        return np.exp(best)

    # nodes graded toward t = r where the integrand peaks
    def quad(m: int) -> float:
        q = np.concatenate([np.geomspace(1.0, 1e-10, m), [0.0]])
        ts = np.sort(r - (r - nu) * q)
        return float(_trapz(integrand(ts), ts))

    m = max(65, n_quad)
    val = quad(m)
    while m < n_quad_max:
        m *= 2
        new = quad(m)
        done = abs(new - val) <= 1e-6 * max(abs(new), 1e-300)
        val = new
        if done:
            break

    if c_override is not None:
        log_c = math.log(c_override)
    else:
        if nu != 0.0:
            raise ValueError("C from initial data requires nu = 0; pass c_override")
        z0 = nu * np.exp(1j * theta)
        lm0 = [eval_log(a, complex(z0)).logmag for _, a in active]
        base = max(lm / (p.k - j) for (j, _), lm in zip(active, lm0))
        if base == -math.inf:
            raise ValueError("every coefficient vanishes at nu; bound constant undefined")
        ics = p.ics_or_default()
        best = -math.inf
        for j in range(p.k):
            icj = abs(ics[j])
            lhs = (math.log(icj) if icj > 0 else -math.inf) - j * (math.log(n_c) + base)
            best = max(best, lhs)
        log_c = math.log1p(eps) + best
    return log_c + n_c * val


def order_of_bound(
    p: OdeProblem,
    triple: ScaleTriple,
    grid: RadialGrid,
    n_theta: int = 8,
    tail_k: int = 8,
    **bound_kwargs,
) -> OrderEstimate:
    """Treats B(r) = max over sampled angles of the coefficient-integral
    bound as a surrogate log M and runs the log-order ratio on it; radii out
    of regime are masked."""
    radii = [float(r) for r in grid.radii()]
    args = []
    thetas = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    for r in radii:
        try:
            b = max(heittokangas_bound(p, r, float(th), **bound_kwargs) for th in thetas)
            args.append(log_iter(b, 2))
        except (OutOfRegimeError, TowerOverflow):
            args.append(math.nan)
    return estimate_from_args(args, radii, triple, Mode.M_LOGORDER, tail_k)


# ---------------------------------------------------------------------------
# logarithmic-derivative and proximity bounds
# ---------------------------------------------------------------------------

def log_derivative_check(
    f: Expr,
    k: int,
    j: int,
    grid: RadialGrid,
    d: float = 0.5,
    eps: float = 1.0,
    n_theta: int = 512,
    budget: float = 0.5,
) -> BoundReport:
    """Pointwise derivative-quotient bound at the modulus-maximizing angle:

        |f^(k)/f^(j)| <= [ (1/(1-r))^{2+eps} max(log 1/(1-r), T(s(r))) ]^{k-j}

    with the shifted radius s(r) = 1 - d(1-r).  Violations are collected and
    measured; the pass criterion is a measure budget (default 0.5)."""
    if not (k > j >= 0):
        raise ValueError("need k > j >= 0")
    if not (0.0 < d < 1.0):
        raise ValueError("d must lie in (0,1)")
    ratios = log_derivative_ratios(f, k)
    radii, lhs, rhs = [], [], []
    for r in grid.radii():
        r = float(r)
        try:
            theta = max_modulus(f, r, n_theta).theta_argmax
            z = r * complex(math.cos(theta), math.sin(theta))
            dk = eval_log(ratios[k], z)
            dj = eval_log(ratios[j], z)
            if dj.is_zero:
                continue
            t_s, _, _ = characteristic(f, 1.0 - d * (1.0 - r))
        except TowerOverflow as exc:
            raise ValueError(
                f"T-based quotient bound unsupported here (overflow: {exc})") from exc
        ell = math.log(1.0 / (1.0 - r))
        radii.append(r)
        lhs.append(dk.logmag - dj.logmag)
        rhs.append((k - j) * ((2.0 + eps) * ell + math.log(max(ell, t_s))))
    mask = [l > h + 1e-9 for l, h in zip(lhs, rhs)]
    return BoundReport(
        label=f"derivative quotient k={k}, j={j}, d={d:g}, eps={eps:g}",
        radii=tuple(radii), lhs_log=tuple(lhs), rhs_log=tuple(rhs),
        violations=ExceptionalSet.from_mask(radii, mask), budget=budget,
    )


def proximity_bound_check(
    f: Expr,
    k: int,
    triple: ScaleTriple,
    grid: RadialGrid,
    eps: float = 1.0,
    budget: float = 0.5,
    n_quad: int = 4096,
    t_n_max: int = 1 << 16,
) -> BoundReport:
    """Proximity-function bound for the k-th derivative quotient:

        m(r, f^(k)/f) <= K exp( alpha^{-1}((rho+eps) beta(log gamma(1/(1-r)))) )

    with rho the measured T-based log-order of f.  K is fitted on the first
    half of the grid; the tail must then stay under the bound up to the
    exceptional-measure budget."""
    ratios = log_derivative_ratios(f, k)
    dk = ratios[k]
    radii = [float(r) for r in grid.radii()]
    m_vals = []
    for r in radii:
        m_r, _, _ = characteristic(dk, r, n_quad, n_max=t_n_max)  # m(r, D_k): D_k analytic
        m_vals.append(m_r)
    rho = order_estimate(f, triple, grid, Mode.T_LOGORDER, n_quad=n_quad, t_n_max=t_n_max).order

    parts = []
    for r in radii:
        den = triple.beta(math.log(triple.gamma(1.0 / (1.0 - r))))
        parts.append(triple.alpha.inverse((rho + eps) * den))
    log_m = [math.log(v) if v > 0 else -math.inf for v in m_vals]
    n_fit = max(4, len(radii) // 2)
    log_k = max(max(lm - p for lm, p in zip(log_m[:n_fit], parts[:n_fit])), -690.0)
    lhs = log_m
    rhs = [log_k + p for p in parts]
    mask = [l > h + 1e-9 for l, h in zip(lhs, rhs)]
    return BoundReport(
        label=f"proximity bound k={k}, eps={eps:g}",
        radii=tuple(radii), lhs_log=tuple(lhs), rhs_log=tuple(rhs),
        violations=ExceptionalSet.from_mask(radii, mask), budget=budget,
        notes=f"fitted log K = {log_k:.6g} on first {n_fit} radii; rho = {rho:.6g}",
    )


# ---------------------------------------------------------------------------
# shift absorption and lower-bound sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BorelShiftResult:
    passed: bool
    first_violation: float | None
    n_checked: int


def borel_shift_check(
    radii,
    g_vals,
    h_vals,
    bad: ExceptionalSet,
    d: float,
) -> BorelShiftResult:
    """Checks g(r) <= h(1 - d(1-r)) at every sampled radius whose shifted
    radius stays on the sample grid (h interpolated linearly).

    Inputs must be monotone non-decreasing samples with g <= h outside the
    ``bad`` set; the check reports the smallest violating radius honestly."""
    radii = [float(r) for r in radii]
    g_vals = [float(v) for v in g_vals]
    h_vals = [float(v) for v in h_vals]
    if len(radii) != len(g_vals) or len(radii) != len(h_vals):
        raise ValueError("sample arrays must share a grid")
    for name, vals in (("g", g_vals), ("h", h_vals)):
        if any(b < a - 1e-12 * max(1.0, abs(a)) for a, b in zip(vals, vals[1:])):
            raise ValueError(f"{name} samples are not monotone non-decreasing")
    if not (0.0 < d < 1.0):
        raise ValueError("d must lie in (0,1)")

    def in_bad(r: float) -> bool:
        return any(lo <= r <= hi for lo, hi in bad.intervals)

    for r, g in zip(radii, g_vals):
        if not in_bad(r) and g > np.interp(r, radii, h_vals) + 1e-9:
            raise ValueError(f"hypothesis g <= h fails outside the bad set at r={r:.6g}")

    first = None
    n = 0
    r_max = radii[-1]
    for r, g in zip(radii, g_vals):
        s = 1.0 - d * (1.0 - r)
        if s > r_max:
            continue
        n += 1
        h_s = float(np.interp(s, radii, h_vals))
        if g > h_s + 1e-9 and first is None:
            first = r
    return BorelShiftResult(first is None, first, n)


@dataclass(frozen=True)
class LowerSetReport:
    """Radii where the growth lower bound holds, with cumulative log-measure
    of the holding set as the grid tip advances."""

    radii: tuple[float, ...]
    holds: tuple[bool, ...]
    cumulative: tuple[float, ...]
    threshold: float
    passed: bool   # surrogate for infinite measure: final >= threshold and
                   # non-decreasing increments over the last 5 steps
    notes: str = ""


def lower_set_measure(
    f: Expr,
    triple: ScaleTriple,
    mu: float,
    grid: RadialGrid,
    typed: tuple[float, float] | None = None,
    n_theta: int = 1024,
    threshold: float = 3.0,
) -> LowerSetReport:
    """Measures the set where the order (or, with ``typed = (omega, rho)``,
    the type) lower bound strictly holds.

    Untyped:  alpha(log^[2] M(r)) > mu * beta(log gamma(1/(1-r))),
    requiring 0 < mu < the measured order.
    Typed:    exp(alpha(log^[2] M(r))) > omega * exp(beta(...))^rho,
    compared in log space, requiring 0 < omega < the measured type.
    """
    est = order_estimate(f, triple, grid, Mode.M_ORDER, n_theta=n_theta)
    if typed is None:
        if not (0.0 < mu < est.order):
            raise ValueError(f"mu = {mu:g} must lie in (0, measured order {est.order:.4g})")
    else:
        omega, rho = typed
        ty = type_estimate(f, triple, grid, Mode.M_ORDER, rho, n_theta=n_theta)
        if not (0.0 < omega < ty.value):
            raise ValueError(f"omega = {omega:g} must lie in (0, measured type {ty.value:.4g})")

    samples = sample_grid(f, grid, n_theta)
    radii = [float(r) for r in grid.radii()]
    holds = []
    for s, r in zip(samples, radii):
        if s is None or math.isnan(s.loglog_M):
            holds.append(False)
            continue
        num = triple.alpha(s.loglog_M)
        den = triple.beta(math.log(triple.gamma(1.0 / (1.0 - r))))
        if typed is None:
            holds.append(num > mu * den)
        else:
            omega, rho = typed
            holds.append(num > math.log(omega) + rho * den)

    cumulative = [0.0]
    for i in range(1, len(radii)):
        inc = 0.0
        if holds[i - 1] and holds[i]:
            inc = math.log((1.0 - radii[i - 1]) / (1.0 - radii[i]))
        cumulative.append(cumulative[-1] + inc)
    incs = [b - a for a, b in zip(cumulative, cumulative[1:])][-5:]
    tail_ok = all(b >= a - 1e-12 for a, b in zip(incs, incs[1:]))
    passed = cumulative[-1] >= threshold and tail_ok
    label = "typed" if typed is not None else f"mu={mu:g}"
    return LowerSetReport(
        radii=tuple(radii), holds=tuple(holds), cumulative=tuple(cumulative),
        threshold=threshold, passed=passed,
        notes=f"{label}: final measure {cumulative[-1]:.4g}",
    )
