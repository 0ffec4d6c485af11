"""Growth-scale functions and their admissibility checks.

A scale function is a continuous, non-negative, non-decreasing map that is
constant below a cap point and increases to infinity above it.  Three kinds
are supported:

* ``iterlog:p`` -- the p-fold iterated logarithm, constant 1 below its cap,
* ``id``       -- the identity, clipped at 0,
* ``pow:s``    -- the concave power ``x**s`` with ``s`` in (0, 1], clipped at 0.

A :class:`ScaleTriple` groups the three scales used by the order and type
functionals.  Class membership (L1: subadditive up to a constant, L2: stable
under bounded shifts, L3: subadditive) and the admissibility conditions of
the triple are certified by sampled checks; limits are operationalized as
"the ratio at the largest grid point is below a threshold and the tail of
the ratio sequence is non-increasing".

Sampling for the triple conditions works on a log-domain grid (``ell = log x``
up to 1e300, i.e. x up to exp(1e300)) so that slowly-decaying ratios such as
those of ``iterlog:2`` exhibit their decay inside float range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

__all__ = [
    "ScaleFn",
    "ScaleTriple",
    "SampleSpec",
    "CheckResult",
    "ClassReport",
    "iterlog",
    "identity",
    "powcave",
    "parse_scale",
    "parse_triple",
    "check_class",
    "check_triple_conditions",
    "validate_triple",
    "log_iter",
    "exp_iter",
    "invert_monotone",
]

_EXP_MAX = 709.7  # exp() overflows above this


def exp_iter(x: float, k: int) -> float:
    """k-fold iterated exponential, saturating to +inf instead of raising."""
    for _ in range(k):
        if x > _EXP_MAX:
            return math.inf
        x = math.exp(x)
    return x


def log_iter(x: float, k: int) -> float:
    """k-fold iterated logarithm; non-positive intermediate values yield -inf/nan."""
    for _ in range(k):
        if math.isnan(x):
            return math.nan
        if x == 0.0:
            x = -math.inf
        elif x < 0.0:
            return math.nan
        elif math.isinf(x):
            return math.inf
        else:
            x = math.log(x)
    return x


@dataclass(frozen=True)
class ScaleFn:
    """One growth-scale function.

    ``kind`` is one of ``"iterlog"``, ``"id"``, ``"pow"``.  The function is
    constant ``cap_value`` for arguments at or below ``cap_x0`` and follows
    the kind's formula above it.  Defaults put the cap where the formula
    itself reaches ``cap_value`` so the function is continuous.
    """

    kind: str
    p: int = 1
    s: float = 1.0
    cap_x0: float = 0.0
    cap_value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("iterlog", "id", "pow"):
            raise ValueError(f"unknown scale kind {self.kind!r}")
        if self.kind == "iterlog" and self.p < 1:
            raise ValueError("iterlog requires p >= 1")
        if self.kind == "pow" and not (0.0 < self.s <= 1.0):
            raise ValueError("pow requires exponent in (0, 1]")
        if self.cap_value < 0.0:
            raise ValueError("cap_value must be non-negative")

    @property
    def name(self) -> str:
        if self.kind == "iterlog":
            return f"iterlog:{self.p}"
        if self.kind == "pow":
            return f"pow:{self.s:g}"
        return "id"

    def __call__(self, x: float) -> float:
        if math.isnan(x):
            return math.nan
        if x <= self.cap_x0:
            return self.cap_value
        if self.kind == "iterlog":
            return log_iter(x, self.p)
        if self.kind == "id":
            return x
        return x ** self.s

    def inverse(self, y: float) -> float:
        """Inverse of the increasing branch; defined for ``y >= cap_value``."""
        if math.isnan(y):
            return math.nan
        if y < self.cap_value:
            raise ValueError(
                f"{self.name}: inverse undefined below the cap value {self.cap_value}"
            )
        if self.kind == "iterlog":
            return exp_iter(y, self.p)
        if self.kind == "id":
            return y
        return y ** (1.0 / self.s)

    def log_at_exp(self, ell: float) -> float:
        """log of the function evaluated at x = exp(ell), overflow-free.

        Lets callers work with arguments far beyond float range by passing
        them already logged.
        """
        log_cap = math.log(self.cap_x0) if self.cap_x0 > 0 else -math.inf
        if ell <= log_cap:
            return math.log(self.cap_value) if self.cap_value > 0 else -math.inf
        if self.kind == "iterlog":
            # log(log^[p](e^ell)) = log^[p](ell)
            return log_iter(ell, self.p)
        if self.kind == "id":
            return ell
        return self.s * ell

    def inverse_log_ratio(self, k: float, y: float) -> float:
        """log( inverse(k*y) / inverse(y) ) for 0 <= k < 1, overflow-free."""
        if not 0.0 <= k < 1.0:
            raise ValueError("k must lie in [0, 1)")
        if self.kind == "id":
            return math.log(k) if k > 0 else -math.inf
        if self.kind == "pow":
            return (math.log(k) if k > 0 else -math.inf) / self.s
        # iterlog: log inverse = exp^[p-1]
        if self.p == 1:
            return (k - 1.0) * y
        a = exp_iter(k * y, self.p - 2)
        b = exp_iter(y, self.p - 2)
        if b > _EXP_MAX:
            return -math.inf  # ratio underflows: exp(a) - exp(b) with a << b
        return math.exp(a) - math.exp(b)


def iterlog(p: int, cap_x0: float | None = None, cap_value: float | None = None) -> ScaleFn:
    """p-fold iterated log; default cap at exp^[p-1](e) where the value is 1."""
    if cap_x0 is None:
        cap_x0 = exp_iter(math.e, p - 1)
    if cap_value is None:
        cap_value = log_iter(cap_x0, p)
    if not math.isfinite(cap_value) or cap_value < 0:
        raise ValueError("cap_x0 too small for iterlog depth")
    return ScaleFn("iterlog", p=p, cap_x0=cap_x0, cap_value=cap_value)


def identity() -> ScaleFn:
    return ScaleFn("id", cap_x0=0.0, cap_value=0.0)


def powcave(s: float) -> ScaleFn:
    return ScaleFn("pow", s=s, cap_x0=0.0, cap_value=0.0)


def parse_scale(text: str) -> ScaleFn:
    """Parse catalog names: ``iterlog:p``, ``id``, ``pow:s``."""
    t = text.strip().lower()
    if t == "id":
        return identity()
    if t.startswith("iterlog:"):
        return iterlog(int(t.split(":", 1)[1]))
    if t.startswith("pow:"):
        return powcave(float(t.split(":", 1)[1]))
    raise ValueError(f"unknown scale spec {text!r}")


@dataclass(frozen=True)
class ScaleTriple:
    """The (alpha, beta, gamma) scales feeding order/type functionals."""

    alpha: ScaleFn
    beta: ScaleFn
    gamma: ScaleFn

    @property
    def name(self) -> str:
        return f"{self.alpha.name},{self.beta.name},{self.gamma.name}"


def parse_triple(text: str) -> ScaleTriple:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"triple spec needs three comma-separated scales, got {text!r}")
    a, b, g = (parse_scale(p) for p in parts)
    return ScaleTriple(a, b, g)


# ---------------------------------------------------------------------------
# sampled class and condition checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    """Grid description for the sampled checks."""

    x_min: float = 10.0
    x_max: float = 1e300
    n: int = 24
    offsets: tuple[float, ...] = (1.0, 5.0, 25.0)
    o_threshold: float = 0.05   # "o(.)" surrogate: final ratio must be below this
    o_tail: int = 5             # ... and non-increasing over this many last points
    l1_c_max: float = 1.0       # largest acceptable L1 constant
    inv_y_min: float = 10.0     # grid for the inverse-ratio condition
    inv_y_max: float = 1e4
    inv_n: int = 16

    def xs(self) -> list[float]:
        if self.n < 2 or self.x_min <= 0 or self.x_max <= self.x_min:
            raise ValueError("empty or invalid sample grid")
        step = (math.log(self.x_max) - math.log(self.x_min)) / (self.n - 1)
        return [math.exp(math.log(self.x_min) + i * step) for i in range(self.n)]

    def ys(self) -> list[float]:
        step = (math.log(self.inv_y_max) - math.log(self.inv_y_min)) / (self.inv_n - 1)
        return [math.exp(math.log(self.inv_y_min) + i * step) for i in range(self.inv_n)]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    witness: object = None


@dataclass(frozen=True)
class ClassReport:
    passed: bool
    results: tuple[CheckResult, ...]

    def failing(self) -> tuple[CheckResult, ...]:
        return tuple(r for r in self.results if not r.passed)

    def describe(self) -> str:
        lines = []
        for r in self.results:
            status = "pass" if r.passed else "FAIL"
            w = f" witness={r.witness}" if (not r.passed and r.witness is not None) else ""
            lines.append(f"  [{status}] {r.name}: worst={r.worst:.6g}{w}")
        return "\n".join(lines)


def _as_fn(fn: ScaleFn | Callable[[float], float]) -> Callable[[float], float]:
    return fn if callable(fn) else fn  # ScaleFn is callable


def _o_tail_ok(seq: Sequence[float], spec: SampleSpec) -> tuple[bool, float, object]:
    """Testable surrogate for 'ratio tends to 0': final value below threshold
    and non-increasing over the last ``o_tail`` points."""
    vals = [v for v in seq if not math.isnan(v)]
    if len(vals) < spec.o_tail:
        return False, math.inf, "too few valid samples"
    tail = vals[-spec.o_tail:]
    decreasing = all(tail[i + 1] <= tail[i] + 1e-12 for i in range(len(tail) - 1))
    ok = decreasing and tail[-1] <= spec.o_threshold
    return ok, tail[-1], None


def check_class(
    fn: ScaleFn | Callable[[float], float],
    cls: str,
    spec: SampleSpec | None = None,
) -> ClassReport:
    """Sampled membership check for the classes L1, L2, L3.

    L1: f(a+b) <= f(a) + f(b) + c on a pair grid; the best constant c is
    reported and must not exceed ``spec.l1_c_max``.
    L2: |f(x+d)/f(x) - 1| tends to 0 for each fixed offset d.
    L3: subadditivity on the pair grid, plus f(m*r) <= m*f(r) for m = 2..5.
    """
    spec = spec or SampleSpec()
    f = _as_fn(fn)
    xs = spec.xs()
    results: list[CheckResult] = []

    if cls == "L1":
        worst = -math.inf
        witness = None
        for a in xs:
            for b in xs:
                c = f(a + b) - f(a) - f(b)
                if c > worst:
                    worst, witness = c, (a, b)
        results.append(CheckResult("L1 near-subadditive constant", worst <= spec.l1_c_max, worst, witness))
    elif cls == "L2":
        for d in spec.offsets:
            seq = []
            for x in xs:
                base = f(x)
                seq.append(abs(f(x + d) / base - 1.0) if base > 0 else math.inf)
            ok, last, why = _o_tail_ok(seq, spec)
            results.append(CheckResult(f"L2 shift stability (offset {d:g})", ok, last, why))
    elif cls == "L3":
        # slack is relative: the pair grid reaches 1e300 where float rounding
        # of a+b alone is far above any absolute epsilon
        worst = -math.inf
        witness = None
        for a in xs:
            for b in xs:
                s = abs(f(a)) + abs(f(b)) + abs(f(a + b))
                m = (f(a + b) - f(a) - f(b)) / max(s, 1.0)
                if m > worst:
                    worst, witness = m, (a, b)
        results.append(CheckResult("L3 subadditivity", worst <= 1e-12, worst, witness))
        worst_m = -math.inf
        witness_m = None
        for m in range(2, 6):
            for r in xs:
                s = abs(f(m * r)) + m * abs(f(r))
                g = (f(m * r) - m * f(r)) / max(s, 1.0)
                if g > worst_m:
                    worst_m, witness_m = g, (m, r)
        results.append(CheckResult("L3 dilation bound f(m*r) <= m*f(r)", worst_m <= 1e-12, worst_m, witness_m))
    else:
        raise ValueError(f"unknown class {cls!r}")

    return ClassReport(all(r.passed for r in results), tuple(results))


def check_triple_conditions(
    t: ScaleTriple,
    p_max: int = 3,
    spec: SampleSpec | None = None,
) -> ClassReport:
    """Sampled admissibility conditions for a triple.

    (a) alpha(log^[p] x) = o(beta(log gamma(x))) for p = 2..p_max,
    (b) alpha(log x) = o(alpha(x)),
    (c) alpha^{-1}(k x) = o(alpha^{-1}(x)) for k in {0.25, 0.5, 0.9}.

    (a) and (b) are sampled on a log-domain grid (ell = log x), so x ranges
    up to exp(1e300); (c) on a moderate plain grid.
    """
    if p_max < 2:
        raise ValueError("p_max must be at least 2")
    spec = spec or SampleSpec()
    ells = spec.xs()
    results: list[CheckResult] = []

    for p in range(2, p_max + 1):
        seq = []
        for ell in ells:
            num = t.alpha(log_iter(ell, p - 1))      # alpha(log^[p] x), x = e^ell
            den = t.beta(t.gamma.log_at_exp(ell))    # beta(log gamma(x))
            seq.append(num / den if den > 0 else math.nan)
        ok, last, why = _o_tail_ok(seq, spec)
        results.append(CheckResult(f"cond-ii-a: alpha(log^[{p}]x) = o(beta(log gamma(x)))", ok, last, why))

    seq_b = []
    for ell in ells:
        num = t.alpha(ell)                            # alpha(log x)
        log_den = t.alpha.log_at_exp(ell)             # log alpha(x)
        if num <= 0:
            seq_b.append(0.0)
        else:
            seq_b.append(math.exp(math.log(num) - log_den) if math.isfinite(log_den) else math.inf)
    ok, last, why = _o_tail_ok(seq_b, spec)
    results.append(CheckResult("cond-ii-b: alpha(log x) = o(alpha(x))", ok, last, why))

    for k in (0.25, 0.5, 0.9):
        seq_c = [math.exp(min(t.alpha.inverse_log_ratio(k, y), _EXP_MAX)) for y in spec.ys()]
        ok, last, why = _o_tail_ok(seq_c, spec)
        results.append(CheckResult(f"cond-ii-c: alpha^-1({k:g}x) = o(alpha^-1(x))", ok, last, why))

    return ClassReport(all(r.passed for r in results), tuple(results))


def validate_triple(t: ScaleTriple, p_max: int = 3, spec: SampleSpec | None = None) -> ClassReport:
    """Combined report: class membership of each component plus conditions."""
    spec = spec or SampleSpec()
    results: list[CheckResult] = []
    for fn, cls, label in ((t.alpha, "L1", "alpha"), (t.beta, "L2", "beta"), (t.gamma, "L3", "gamma")):
        rep = check_class(fn, cls, spec)
        for r in rep.results:
            results.append(CheckResult(f"{label} {r.name}", r.passed, r.worst, r.witness))
    cond = check_triple_conditions(t, p_max, spec)
    results.extend(cond.results)
    return ClassReport(all(r.passed for r in results), tuple(results))


def invert_monotone(
    fn: Callable[[float], float],
    y: float,
    lo: float,
    hi: float,
    iters: int = 200,
) -> float:
    """Bisection inverse of a non-decreasing function on [lo, hi]."""
    flo, fhi = fn(lo), fn(hi)
    if not (flo <= y <= fhi):
        raise ValueError(f"target {y} outside bracket values [{flo}, {fhi}]")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if fn(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
