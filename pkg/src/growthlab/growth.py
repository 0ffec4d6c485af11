"""Growth measurement: max modulus, characteristic, order and type estimates.

The maximum-modulus path never materializes M itself: for Exp-rooted
functions the evaluation peels exponential levels and works with
``log^[j] |f|`` directly (via log-of-real-part chains), so level-2 and
level-3 towers can be measured arbitrarily close to the boundary even when
``log M`` alone would overflow a float.

Orders are limsups as r -> 1-, which no finite grid can compute.  The
estimation policy is: per-radius ratios per the defining quotient, a
conservative ``value`` (max over the last ``tail_k`` valid ratios) and a
``slope`` (least-squares slope of the numerator against the denominator over
the same tail).  The slope cancels additive constants in the numerator that
bias the raw ratios by O(1/log(1/(1-r))) and is the headline estimator; the
ratio tail-max is kept as a diagnostic and agrees with the slope whenever
those constants vanish.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .funcs import Exp, Expr, Neg, eval_log_batch, expr_to_str
from .lognum import TowerOverflow
from .scale import ScaleTriple, log_iter, exp_iter

__all__ = [
    "Mode",
    "RadialGrid",
    "GrowthSample",
    "OrderEstimate",
    "TypeEstimate",
    "Ineq12Report",
    "Prop11Report",
    "EstimationError",
    "max_modulus",
    "characteristic",
    "growth_sample",
    "sample_grid",
    "order_estimate",
    "type_estimate",
    "estimate_from_args",
    "verify_ineq_12",
    "proposition11_check",
    "write_samples_csv",
]

_VALUE_MAX = 709.0  # exp() of anything above this is not a finite float


class EstimationError(RuntimeError):
    """Not enough valid samples to estimate."""


class Mode(Enum):
    M_ORDER = "M"        # alpha(log^[2] M) / beta(log gamma(1/(1-r)))
    T_ORDER = "T"        # alpha(log T) / ...
    M_LOGORDER = "Mlog"  # alpha(log^[3] M) / ...
    T_LOGORDER = "Tlog"  # alpha(log^[2] T) / ...

    @property
    def uses_T(self) -> bool:
        return self in (Mode.T_ORDER, Mode.T_LOGORDER)


@dataclass(frozen=True)
class RadialGrid:
    """Radii r_i = 1 - (1-r0) * q^i, i = 0..n-1; 1-r_i geometric toward 0."""

    r0: float = 0.5
    q: float = 0.72
    n: int = 24

    def __post_init__(self):
        if not (0.0 < self.r0 < 1.0 and 0.0 < self.q < 1.0 and self.n >= 1):
            raise ValueError("need 0<r0<1, 0<q<1, n>=1")

    def radii(self) -> np.ndarray:
        return 1.0 - (1.0 - self.r0) * self.q ** np.arange(self.n)

    def trimmed(self, r_max: float) -> "RadialGrid":
        """Largest prefix of the grid staying at or below r_max."""
        keep = int(np.sum(self.radii() <= r_max))
        if keep < 1:
            raise ValueError(f"grid entirely above r_max={r_max}")
        return RadialGrid(self.r0, self.q, keep)


@dataclass(frozen=True)
class GrowthSample:
    """Per-radius growth data; iterated-log entries are valid per tower depth
    (log_M may be inf while loglog_M is exact)."""

    r: float
    log_M: float
    loglog_M: float
    log3_M: float
    theta_argmax: float
    T: float | None = None
    T_rel_err: float | None = None


# ---------------------------------------------------------------------------
# chain evaluation with exponential peeling
# ---------------------------------------------------------------------------

def _strategies(f: Expr):
    """Evaluation strategies, shallow to deep.  Each returns (chain, depth)
    where chain[i] = log^[depth]|f(z_i)| (nan entries: value not in the open
    right half-plane at that peel, hence not the circle maximum)."""
    while isinstance(f, Neg):  # |f| unaffected
        f = f.arg

    def direct(zs):
        lm, _ = eval_log_batch(f, zs)
        return lm, 1

    strats = [direct]
    if isinstance(f, Exp):
        h = f.arg

        def peel1(zs):
            lm, ph = eval_log_batch(h, zs)
            c = np.cos(ph)
            with np.errstate(invalid="ignore", divide="ignore"):
                chain = np.where(c > 0, lm + np.log(np.where(c > 0, c, 1.0)), np.nan)
            return chain, 2

        strats.append(peel1)
        if isinstance(h, Exp):
            g = h.arg

            def peel2_value(zs):
                lm, ph = eval_log_batch(g, zs)
                if np.nanmax(lm) > _VALUE_MAX:
                    raise TowerOverflow(float(np.nanmax(lm)), "peel2 materialization")
                re_g = np.exp(lm) * np.cos(ph)
                im_g = np.exp(lm) * np.sin(ph)
                c = np.cos(im_g)
                with np.errstate(invalid="ignore", divide="ignore"):
                    chain = np.where(c > 0, re_g + np.log(np.where(c > 0, c, 1.0)), np.nan)
                return chain, 2

            def peel2_log(zs):
                # log^[3]|f| = log(Re g + log cos Im g) ~ log(Re g); the drop
                # is O(1/Re g), exact at the real axis.  Off-maximum entries
                # with small Re g carry the approximation, never the max.
                lm, ph = eval_log_batch(g, zs)
                c = np.cos(ph)
                with np.errstate(invalid="ignore", divide="ignore"):
                    chain = np.where(c > 0, lm + np.log(np.where(c > 0, c, 1.0)), np.nan)
                return chain, 3

            strats.extend([peel2_value, peel2_log])
    return strats


def _chain_batch(f: Expr, zs: np.ndarray):
    """Evaluate the deepest-needed chain; returns (chain, depth, strat)."""
    last_exc: TowerOverflow | None = None
    for strat in _strategies(f):
        try:
            chain, depth = strat(zs)
            return chain, depth, strat
        except TowerOverflow as exc:
            last_exc = exc
    raise TowerOverflow(last_exc.logmag if last_exc else math.nan,
                        f"evaluating {expr_to_str(f, 60)}")


def _chain_to_depth(x: float, have: int, want: int) -> float:
    """Convert log^[have]|f| into log^[want]|f| (saturating to inf/nan)."""
    if math.isnan(x):
        return math.nan
    if want >= have:
        return log_iter(x, want - have)
    return exp_iter(x, have - want)


def _golden_max(fn, a: float, b: float, tol: float = 1e-10) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def val(x):
        v = fn(x)
        return -math.inf if math.isnan(v) else v

    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = val(c), val(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = val(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = val(d)
    return (c, fc) if fc >= fd else (d, fd)


def max_modulus(f: Expr, r: float, n_theta: int = 1024, refine_tol: float = 1e-10) -> GrowthSample:
    """Maximum modulus on |z| = r via a uniform angle grid plus golden-section
    refinement around the best node."""
    if not (0.0 < r < 1.0):
        raise ValueError("r must lie in (0, 1)")
    if n_theta < 64:
        raise ValueError("n_theta must be at least 64")
    thetas = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    zs = r * np.exp(1j * thetas)
    chain, depth, strat = _chain_batch(f, zs)
    if np.all(np.isnan(chain)):
        raise EstimationError(f"no valid angle sample at r={r}")
    i = int(np.nanargmax(chain))
    x_grid = float(chain[i])

    def obj(theta: float) -> float:
        c, _ = strat(np.array([r * np.exp(1j * theta)]))
        return float(c[0])

    h = 2.0 * math.pi / n_theta
    theta_star, x_ref = _golden_max(obj, thetas[i] - h, thetas[i] + h, refine_tol)
    if x_ref >= x_grid:
        x, theta_best = x_ref, theta_star
    else:
        x, theta_best = x_grid, float(thetas[i])
    with np.errstate(over="ignore"):
        return GrowthSample(
            r=r,
            log_M=_chain_to_depth(x, depth, 1),
            loglog_M=_chain_to_depth(x, depth, 2),
            log3_M=_chain_to_depth(x, depth, 3),
            theta_argmax=float(theta_best),
        )


def characteristic(
    f: Expr,
    r: float,
    n_quad: int = 4096,
    rel_tol: float = 1e-8,
    n_max: int = 1 << 17,
) -> tuple[float, float, int]:
    """T(r, f) = circle average of log+|f| by the trapezoid rule on uniform
    nodes, doubled until the relative change drops below ``rel_tol`` or
    ``n_max`` is reached.

    Returns (T, achieved relative change, nodes used).  For analytic f the
    trapezoid rule is spectrally accurate away from the log+ kinks; extreme
    tower radii may stall above ``rel_tol`` (the returned achieved change
    makes that loud), which perturbs T by a bounded relative factor and is
    invisible to the iterated-log consumers.
    """
    if not (0.0 < r < 1.0):
        raise ValueError("r must lie in (0, 1)")
    n = max(64, n_quad)

    def mean_logplus(ths: np.ndarray) -> float:
        lm, _ = eval_log_batch(f, r * np.exp(1j * ths))
        return float(np.mean(np.maximum(lm, 0.0)))

    thetas = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    t = mean_logplus(thetas)
    change = math.inf
    while n < n_max:
        mids = thetas + math.pi / n
        t_mid = mean_logplus(mids)
        t_new = 0.5 * (t + t_mid)
        thetas = np.sort(np.concatenate([thetas, mids]))
        n *= 2
        change = abs(t_new - t) / max(abs(t_new), 1e-300)
        t = t_new
        if change < rel_tol:
            break
    return t, change, n


def growth_sample(
    f: Expr,
    r: float,
    n_theta: int = 1024,
    want_T: bool = False,
    n_quad: int = 4096,
    t_n_max: int = 1 << 17,
) -> GrowthSample:
    s = max_modulus(f, r, n_theta)
    if want_T:
        t, err, _ = characteristic(f, r, n_quad, n_max=t_n_max)
        s = GrowthSample(s.r, s.log_M, s.loglog_M, s.log3_M, s.theta_argmax, T=t, T_rel_err=err)
    return s


def sample_grid(
    f: Expr,
    grid: RadialGrid,
    n_theta: int = 1024,
    want_T: bool = False,
    n_quad: int = 4096,
    t_n_max: int = 1 << 17,
    threads: int = 1,
) -> list[GrowthSample | None]:
    """Samples over the grid; radii that error (overflow, no valid angle)
    yield None so estimators can mask gaps."""

    def one(r: float) -> GrowthSample | None:
        try:
            return growth_sample(f, float(r), n_theta, want_T, n_quad, t_n_max)
        except (TowerOverflow, EstimationError):
            return None

    radii = grid.radii()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, radii))
    return [one(r) for r in radii]


# ---------------------------------------------------------------------------
# order and type estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderEstimate:
    """Limsup estimate of a growth order.

    ``value`` is the max of the last ``tail_k`` valid ratios; ``slope`` the
    least-squares slope of numerator against denominator over that tail.
    ``order`` (the headline) is the slope clamped to be non-negative: it is
    exact for the catalog families whose numerators are affine in the
    denominator, where the raw ratios still carry an O(1/denominator) bias.
    """

    mode: Mode
    value: float
    slope: float
    ratios: tuple[float, ...]
    radii: tuple[float, ...]
    numerators: tuple[float, ...]
    denominators: tuple[float, ...]
    tail_k: int

    @property
    def order(self) -> float:
        if math.isinf(self.value):
            return math.inf
        return max(0.0, self.slope)


@dataclass(frozen=True)
class TypeEstimate:
    mode: Mode
    value: float
    rho_used: float
    samples: tuple[float, ...]
    radii: tuple[float, ...]


def _numerator_arg(s: GrowthSample | None, mode: Mode) -> float:
    if s is None:
        return math.nan
    if mode is Mode.M_ORDER:
        return s.loglog_M
    if mode is Mode.M_LOGORDER:
        return s.log3_M
    if s.T is None:
        return math.nan
    if mode is Mode.T_ORDER:
        return log_iter(s.T, 1)
    return log_iter(s.T, 2)


def _denominator(t: ScaleTriple, r: float) -> float:
    return t.beta(math.log(t.gamma(1.0 / (1.0 - r))))


def estimate_from_args(
    args: list[float],
    radii: list[float],
    triple: ScaleTriple,
    mode: Mode,
    tail_k: int = 8,
) -> OrderEstimate:
    """Assemble an OrderEstimate from precomputed numerator arguments.

    ``args[i]`` is the iterated-log growth quantity at radius ``radii[i]``
    (nan marks a gap).  Shared by the growth estimators and the bound-order
    surrogate.
    """
    nums, dens, ratios = [], [], []
    for arg, r in zip(args, radii):
        den = _denominator(triple, r)
        num = triple.alpha(arg) if not math.isnan(arg) else math.nan
        nums.append(num)
        dens.append(den)
        ratios.append(num / den if (den > 0 and not math.isnan(num)) else math.nan)

    valid = [i for i, v in enumerate(ratios) if not math.isnan(v)]
    tail = valid[-tail_k:]
    if len(tail) < 4:
        raise EstimationError(f"only {len(tail)} valid tail samples (need 4)")
    if any(math.isinf(nums[i]) for i in tail):
        value = slope = math.inf
    else:
        value = max(ratios[i] for i in tail)
        xs = np.array([dens[i] for i in tail])
        ys = np.array([nums[i] for i in tail])
        xm, ym = xs.mean(), ys.mean()
        denom = float(np.sum((xs - xm) ** 2))
        slope = float(np.sum((xs - xm) * (ys - ym)) / denom) if denom > 0 else math.nan
    return OrderEstimate(
        mode=mode,
        value=float(value),
        slope=float(slope),
        ratios=tuple(ratios),
        radii=tuple(radii),
        numerators=tuple(nums),
        denominators=tuple(dens),
        tail_k=tail_k,
    )


def order_estimate(
    f: Expr,
    triple: ScaleTriple,
    grid: RadialGrid,
    mode: Mode = Mode.M_ORDER,
    tail_k: int = 8,
    n_theta: int = 1024,
    n_quad: int = 4096,
    t_n_max: int = 1 << 17,
    threads: int = 1,
) -> OrderEstimate:
    """Order functional per the chosen mode over the radial grid."""
    samples = sample_grid(f, grid, n_theta, mode.uses_T, n_quad, t_n_max, threads)
    args = [_numerator_arg(s, mode) for s in samples]
    return estimate_from_args(args, [float(r) for r in grid.radii()], triple, mode, tail_k)


def type_estimate(
    f: Expr,
    triple: ScaleTriple,
    grid: RadialGrid,
    mode: Mode,
    rho: float,
    tail_k: int = 8,
    n_theta: int = 1024,
    n_quad: int = 4096,
    threads: int = 1,
) -> TypeEstimate:
    """Type functional: tail-max of exp(alpha(arg) - rho * beta(...)), the
    exponentials combined in log space before exponentiating."""
    if not (0.0 < rho < math.inf):
        raise ValueError("rho must be positive and finite")
    samples = sample_grid(f, grid, n_theta, mode.uses_T, n_quad, threads=threads)
    radii = [float(r) for r in grid.radii()]
    vals = []
    for s, r in zip(samples, radii):
        arg = _numerator_arg(s, mode)
        den = _denominator(triple, r)
        if math.isnan(arg) or den <= 0:
            vals.append(math.nan)
            continue
        expo = triple.alpha(arg) - rho * den
        vals.append(math.exp(expo) if expo < 709.0 else math.inf)
    valid = [v for v in vals if not math.isnan(v)]
    if len(valid) < 4:
        raise EstimationError("too few valid type samples")
    value = max(valid[-tail_k:])
    return TypeEstimate(mode, float(value), rho, tuple(vals), tuple(radii))


# ---------------------------------------------------------------------------
# sanity checks from the basic inequalities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ineq12Report:
    """T(r) <= log+ M(r) <= ((1+3r)/(1-r)) T((1+r)/2) margins per radius."""

    radii: tuple[float, ...]
    T_r: tuple[float, ...]
    logplus_M: tuple[float, ...]
    rhs: tuple[float, ...]
    margin_lower: tuple[float, ...]   # log+M - T
    margin_upper: tuple[float, ...]   # rhs - log+M
    passed: bool


def verify_ineq_12(
    f: Expr,
    grid: RadialGrid,
    n_theta: int = 1024,
    n_quad: int = 4096,
    t_n_max: int = 1 << 17,
) -> Ineq12Report:
    radii, T_r, lpm, rhs, m_lo, m_up = [], [], [], [], [], []
    for r in grid.radii():
        r = float(r)
        try:
            s = max_modulus(f, r, n_theta)
            t_here, _, _ = characteristic(f, r, n_quad, n_max=t_n_max)
            t_mid, _, _ = characteristic(f, (1.0 + r) / 2.0, n_quad, n_max=t_n_max)
        except (TowerOverflow, EstimationError):
            continue  # per-radius mask
        lp = max(0.0, s.log_M)
        bound = (1.0 + 3.0 * r) / (1.0 - r) * t_mid
        radii.append(r)
        T_r.append(t_here)
        lpm.append(lp)
        rhs.append(bound)
        m_lo.append(lp - t_here)
        m_up.append(bound - lp)
    if not radii:
        raise EstimationError("no radius was evaluable")
    ok = all(v >= 0.0 for v in m_lo) and all(v >= 0.0 for v in m_up)
    return Ineq12Report(tuple(radii), tuple(T_r), tuple(lpm), tuple(rhs),
                        tuple(m_lo), tuple(m_up), ok)


@dataclass(frozen=True)
class Prop11Report:
    """Agreement of the M-based and T-based log-order functionals."""

    m_based: OrderEstimate
    t_based: OrderEstimate
    difference: float        # |order difference| (headline estimators)
    value_difference: float  # |ratio tail-max difference|


def proposition11_check(
    f: Expr,
    triple: ScaleTriple,
    grid: RadialGrid,
    tail_k: int = 8,
    n_theta: int = 1024,
    n_quad: int = 4096,
    t_n_max: int = 1 << 17,
) -> Prop11Report:
    m_est = order_estimate(f, triple, grid, Mode.M_LOGORDER, tail_k, n_theta)
    t_est = order_estimate(f, triple, grid, Mode.T_LOGORDER, tail_k, n_theta, n_quad, t_n_max)
    return Prop11Report(
        m_based=m_est,
        t_based=t_est,
        difference=abs(m_est.order - t_est.order),
        value_difference=abs(m_est.value - t_est.value),
    )


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.12g}"


def write_samples_csv(path, samples: list[GrowthSample | None], ratios=None, mode: Mode | None = None):
    """One row per grid radius: r,one_minus_r,logM,loglogM,log3M,T,ratio,mode."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "one_minus_r", "logM", "loglogM", "log3M", "T", "ratio", "mode"])
        for i, s in enumerate(samples):
            if s is None:
                continue
            ratio = ratios[i] if ratios is not None else None
            w.writerow([
                _fmt(s.r), _fmt(1.0 - s.r), _fmt(s.log_M), _fmt(s.loglog_M),
                _fmt(s.log3_M), _fmt(s.T), _fmt(ratio),
                mode.value if mode else "",
            ])
