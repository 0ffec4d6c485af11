"""Closed-form analytic functions on the unit disc as expression trees.

Node set: ``Z``, ``Const``, ``Add``, ``Neg``, ``Mul``, ``Exp``, ``IntPow``,
and ``PowOneMinusZ(e)`` which denotes ``(1-z)**(-e)`` (principal branch;
``1-z`` stays in the right half-plane on the disc, so no cut is crossed).
Every tree denotes a function analytic on the whole open disc.

Supported operations: exact symbolic differentiation, evaluation in
log-space (scalar and batched), Taylor coefficient extraction into
log-space series, and the derivative-quotient construction
``D_j = f^(j)/f`` for Exp-rooted ``f``.

Textual syntax (CLI / problem files): ``z``, numeric literals,
``const(1+2j)``, ``exp(E)``, ``pow1mz(mu)``, ``tower(level,c,mu)``,
``E+E``, ``E-E``, ``E*E``, ``E^n``, ``-E`` and parentheses.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .lognum import (
    EXP_ARG_LIMIT,
    LogComplex,
    TowerOverflow,
    arr_add,
    arr_exp,
    arr_from_values,
    arr_mul,
    arr_neg,
    arr_pow_int,
    arr_sum,
    arr_wrap,
    lc_add,
    lc_exp,
    lc_mul,
    lc_neg,
    lc_pow_int,
)

__all__ = [
    "Expr", "Z", "Const", "Add", "Neg", "Mul", "PowOneMinusZ", "Exp", "IntPow",
    "TowerSpec", "LogSeries", "NodeBudgetError",
    "add", "mul", "neg", "intpow",
    "diff", "eval_log", "eval_log_batch", "build_tower", "taylor",
    "log_derivative_ratios", "node_count", "exp_depth",
    "expr_to_str", "parse_expr", "CATALOG", "catalog_expr",
    "MAX_NODES", "MAX_SERIES_N",
]

MAX_NODES = 10_000
MAX_SERIES_N = 1 << 16


class NodeBudgetError(ValueError):
    """Expression tree exceeded the configured node budget."""


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, _coerce(other))

    def __sub__(self, other):
        return add(self, neg(_coerce(other)))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return neg(self)

    def __pow__(self, n: int):
        return intpow(self, n)

    def __repr__(self):
        return expr_to_str(self)


@dataclass(frozen=True, repr=False)
class Z(Expr):
    pass


@dataclass(frozen=True, repr=False)
class Const(Expr):
    value: complex


@dataclass(frozen=True, repr=False)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, repr=False)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class PowOneMinusZ(Expr):
    """(1 - z) ** (-exponent), principal branch."""

    exponent: float


@dataclass(frozen=True, repr=False)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True, repr=False)
class IntPow(Expr):
    base: Expr
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("IntPow requires a non-negative exponent")


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Const(complex(v))


def _is_const(e: Expr, v: complex | None = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


ZERO = Const(0j)
ONE = Const(1 + 0j)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0j):
        return b
    if _is_const(b, 0j):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0j) or _is_const(b, 0j):
        return ZERO
    if _is_const(a, 1 + 0j):
        return b
    if _is_const(b, 1 + 0j):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(a, PowOneMinusZ) and isinstance(b, PowOneMinusZ):
        return PowOneMinusZ(a.exponent + b.exponent)
    return Mul(a, b)


def intpow(a: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, PowOneMinusZ):
        return PowOneMinusZ(a.exponent * n)
    return IntPow(a, n)


def node_count(e: Expr) -> int:
    """Number of distinct nodes (shared subtrees counted once)."""
    seen: set[int] = set()

    def walk(x: Expr):
        if id(x) in seen:
            return
        seen.add(id(x))
        for name in ("left", "right", "arg", "base"):
            child = getattr(x, name, None)
            if isinstance(child, Expr):
                walk(child)

    walk(e)
    return len(seen)


def exp_depth(e: Expr) -> int:
    """Maximum nesting depth of Exp nodes."""
    if isinstance(e, Exp):
        return 1 + exp_depth(e.arg)
    out = 0
    for name in ("left", "right", "arg", "base"):
        child = getattr(e, name, None)
        if isinstance(child, Expr):
            out = max(out, exp_depth(child))
    return out


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def diff(e: Expr, max_nodes: int = MAX_NODES) -> Expr:
    """Exact symbolic derivative with structural sharing."""
    memo: dict[int, Expr] = {}

    def d(x: Expr) -> Expr:
        got = memo.get(id(x))
        if got is not None:
            return got
        if isinstance(x, (Z,)):
            out = ONE
        elif isinstance(x, Const):
            out = ZERO
        elif isinstance(x, Add):
            out = add(d(x.left), d(x.right))
        elif isinstance(x, Neg):
            out = neg(d(x.arg))
        elif isinstance(x, Mul):
            out = add(mul(d(x.left), x.right), mul(x.left, d(x.right)))
        elif isinstance(x, PowOneMinusZ):
            # d/dz (1-z)^(-e) = e * (1-z)^(-(e+1))
            out = mul(Const(complex(x.exponent)), PowOneMinusZ(x.exponent + 1.0))
        elif isinstance(x, Exp):
            out = mul(d(x.arg), x)
        elif isinstance(x, IntPow):
            out = mul(mul(Const(complex(x.n)), intpow(x.base, x.n - 1)), d(x.base))
        else:  # pragma: no cover
            raise TypeError(f"unknown node {type(x).__name__}")
        memo[id(x)] = out
        return out

    out = d(e)
    if node_count(out) > max_nodes:
        raise NodeBudgetError(f"derivative exceeds node budget ({max_nodes})")
    return out


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_log(e: Expr, z: complex) -> LogComplex:
    """Evaluate at a point of the open disc, in log space."""
    if abs(z) >= 1.0:
        raise ValueError(f"|z| = {abs(z):.6g} not inside the unit disc")
    return _ev(e, complex(z))


def _ev(e: Expr, z: complex) -> LogComplex:
    if isinstance(e, Z):
        return LogComplex.from_value(z)
    if isinstance(e, Const):
        return LogComplex.from_value(e.value)
    if isinstance(e, Add):
        return lc_add(_ev(e.left, z), _ev(e.right, z))
    if isinstance(e, Neg):
        return lc_neg(_ev(e.arg, z))
    if isinstance(e, Mul):
        return lc_mul(_ev(e.left, z), _ev(e.right, z))
    if isinstance(e, PowOneMinusZ):
        w = 1.0 - z
        return LogComplex(-e.exponent * math.log(abs(w)), -e.exponent * cmath.phase(w))
    if isinstance(e, Exp):
        try:
            return lc_exp(_ev(e.arg, z))
        except TowerOverflow as exc:
            if not exc.context:
                raise TowerOverflow(exc.logmag, f"exp({expr_to_str(e.arg, 40)})") from None
            raise
    if isinstance(e, IntPow):
        return lc_pow_int(_ev(e.base, z), e.n)
    raise TypeError(f"unknown node {type(e).__name__}")  # pragma: no cover


def eval_log_batch(e: Expr, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized eval_log over an array of points; returns (logmag, phase)."""
    zs = np.asarray(zs, dtype=complex)
    if np.any(np.abs(zs) >= 1.0):
        raise ValueError("all points must lie inside the unit disc")
    return _evb(e, zs)


def _evb(e: Expr, zs: np.ndarray):
    if isinstance(e, Z):
        return arr_from_values(zs)
    if isinstance(e, Const):
        lm, ph = arr_from_values(np.array([e.value]))
        return np.full(zs.shape, lm[0]), np.full(zs.shape, ph[0])
    if isinstance(e, Add):
        return arr_add(*_evb(e.left, zs), *_evb(e.right, zs))
    if isinstance(e, Neg):
        return arr_neg(*_evb(e.arg, zs))
    if isinstance(e, Mul):
        return arr_mul(*_evb(e.left, zs), *_evb(e.right, zs))
    if isinstance(e, PowOneMinusZ):
        w = 1.0 - zs
        return -e.exponent * np.log(np.abs(w)), arr_wrap(-e.exponent * np.angle(w))
    if isinstance(e, Exp):
        try:
            return arr_exp(*_evb(e.arg, zs))
        except TowerOverflow as exc:
            if not exc.context:
                raise TowerOverflow(exc.logmag, f"exp({expr_to_str(e.arg, 40)})") from None
            raise
    if isinstance(e, IntPow):
        return arr_pow_int(*_evb(e.base, zs), e.n)
    raise TypeError(f"unknown node {type(e).__name__}")  # pragma: no cover


# ---------------------------------------------------------------------------
# tower family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TowerSpec:
    """f(z) = exp^[level](c * (1-z)^(-mu)); the catalog family of prescribed
    order and type."""

    level: int
    c: float
    mu: float

    def __post_init__(self):
        if self.level not in (1, 2, 3):
            raise ValueError("tower level must be 1, 2 or 3")
        if self.c <= 0 or self.mu <= 0:
            raise ValueError("tower parameters c, mu must be positive")

    def expr(self) -> Expr:
        return build_tower(self)

    @property
    def name(self) -> str:
        return f"tower({self.level},{self.c:g},{self.mu:g})"


def build_tower(t: TowerSpec) -> Expr:
    e: Expr = mul(Const(complex(t.c)), PowOneMinusZ(t.mu))
    for _ in range(t.level):
        e = Exp(e)
    return e


# ---------------------------------------------------------------------------
# Taylor extraction
# ---------------------------------------------------------------------------

_RELIABLE_REL = 1e-12


@dataclass(frozen=True)
class LogSeries:
    """Truncated power series with log-space coefficients.

    ``r_reliable`` is the largest radius at which the retained tail still
    contributes below 1e-12 relative to the dominant term; evaluating beyond
    it is refused by the series evaluator.
    """

    logmag: np.ndarray
    phase: np.ndarray
    r_reliable: float = field(init=False, compare=False)

    def __post_init__(self):
        lm = np.asarray(self.logmag, dtype=float)
        ph = np.asarray(self.phase, dtype=float)
        if lm.shape != ph.shape or lm.ndim != 1 or lm.size == 0:
            raise ValueError("coefficient arrays must be equal-length 1-d")
        object.__setattr__(self, "logmag", lm)
        object.__setattr__(self, "phase", ph)
        object.__setattr__(self, "r_reliable", _reliable_radius(lm))

    @property
    def N(self) -> int:
        return int(self.logmag.size)

    def coeff(self, i: int) -> LogComplex:
        return LogComplex(float(self.logmag[i]), float(self.phase[i]))

    def coeffs(self) -> tuple[LogComplex, ...]:
        return tuple(self.coeff(i) for i in range(self.N))

    def derivative(self) -> "LogSeries":
        if self.N == 1:
            return LogSeries(np.array([-np.inf]), np.array([0.0]))
        n = np.arange(1, self.N, dtype=float)
        return LogSeries(self.logmag[1:] + np.log(n), self.phase[1:].copy())


def _reliable_radius(lm: np.ndarray) -> float:
    n_tail = min(16, max(1, lm.size // 8))
    tail_idx = np.arange(lm.size - n_tail, lm.size)
    if not np.any(np.isfinite(lm[tail_idx])):
        return 1.0
    idx = np.arange(lm.size)

    def ok(r: float) -> bool:
        w = lm + idx * math.log(r)
        peak = np.max(w)
        return bool(np.max(w[tail_idx]) <= peak + math.log(_RELIABLE_REL))

    if ok(1.0 - 1e-12):
        return 1.0
    lo, hi = 1e-12, 1.0 - 1e-12
    if not ok(lo):
        return 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def taylor(e: Expr, N: int) -> LogSeries:
    """First N Taylor coefficients at 0, computed by per-node series
    recurrences entirely in log space.

    Extraction of level-3 towers is refused: their coefficients are benign
    but the truncation length needed for accuracy at useful radii is
    astronomically large.
    """
    if N < 1 or N > MAX_SERIES_N:
        raise ValueError(f"series length must be in [1, {MAX_SERIES_N}]")
    if exp_depth(e) >= 3:
        raise ValueError("Taylor extraction of level-3 towers is not supported")
    lm, ph = _tay(e, N)
    return LogSeries(lm, ph)


def _tay(e: Expr, N: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(e, Z):
        lm = np.full(N, -np.inf)
        ph = np.zeros(N)
        if N > 1:
            lm[1] = 0.0
        return lm, ph
    if isinstance(e, Const):
        lm = np.full(N, -np.inf)
        ph = np.zeros(N)
        if e.value != 0:
            lm[0] = math.log(abs(e.value))
            ph[0] = cmath.phase(e.value)
        return lm, ph
    if isinstance(e, Add):
        return arr_add(*_tay(e.left, N), *_tay(e.right, N))
    if isinstance(e, Neg):
        return arr_neg(*_tay(e.arg, N))
    if isinstance(e, Mul):
        if isinstance(e.left, Const):
            return _scale(_tay(e.right, N), e.left.value)
        if isinstance(e.right, Const):
            return _scale(_tay(e.left, N), e.right.value)
        return _cauchy(_tay(e.left, N), _tay(e.right, N))
    if isinstance(e, PowOneMinusZ):
        return _binom_series(e.exponent, N)
    if isinstance(e, Exp):
        return _exp_series(_tay(e.arg, N))
    if isinstance(e, IntPow):
        out = None
        base = _tay(e.base, N)
        acc = base
        n = e.n
        if n == 0:
            lm = np.full(N, -np.inf)
            ph = np.zeros(N)
            lm[0] = 0.0
            return lm, ph
        while n:
            if n & 1:
                out = acc if out is None else _cauchy(out, acc)
            n >>= 1
            if n:
                acc = _cauchy(acc, acc)
        return out
    raise TypeError(f"unknown node {type(e).__name__}")  # pragma: no cover


def _scale(sp, c: complex):
    lm, ph = sp
    if c == 0:
        return np.full_like(lm, -np.inf), np.zeros_like(ph)
    dlm, dph = math.log(abs(c)), cmath.phase(c)
    zero = np.isneginf(lm)
    return np.where(zero, -np.inf, lm + dlm), np.where(zero, 0.0, arr_wrap(ph + dph))


def _dot(lm1, ph1, lm2, ph2) -> tuple[float, float]:
    """Log-space sum of elementwise products of two equal-length slices."""
    tlm = lm1 + lm2
    m = np.max(tlm) if tlm.size else -math.inf
    if not math.isfinite(m):
        return -math.inf, 0.0
    s = np.sum(np.exp(tlm - m) * np.exp(1j * (ph1 + ph2)))
    mag = abs(s)
    if mag == 0.0:
        return -math.inf, 0.0
    return m + math.log(mag), cmath.phase(s)


def _cauchy(a, b):
    alm, aph = a
    blm, bph = b
    N = alm.size
    lm = np.empty(N)
    ph = np.empty(N)
    for n in range(N):
        lm[n], ph[n] = _dot(alm[: n + 1], aph[: n + 1], blm[n::-1], bph[n::-1])
    return lm, ph


def _binom_series(mu: float, N: int):
    # coefficients of (1-z)^(-mu): c_0 = 1, c_{n+1} = c_n * (mu + n) / (n + 1)
    lm = np.full(N, -np.inf)
    ph = np.zeros(N)
    lm[0] = 0.0
    if N > 1:
        n = np.arange(N - 1, dtype=float)
        fac = (mu + n) / (n + 1.0)
        with np.errstate(divide="ignore"):
            steps = np.log(np.abs(fac))
        lm[1:] = np.cumsum(steps)
        ph[1:] = arr_wrap(math.pi * np.cumsum(fac < 0))
        dead = np.isneginf(lm)  # an exact zero factor kills the rest
        lm[dead] = -np.inf
        ph[dead] = 0.0
    return lm, ph


def _exp_series(a):
    # b = exp(a): (n+1) b_{n+1} = sum_{m=0..n} (m+1) a_{m+1} b_{n-m}
    alm, aph = a
    N = alm.size
    if alm[0] > EXP_ARG_LIMIT:
        raise TowerOverflow(float(alm[0]), "constant term of exp-series argument")
    a0 = cmath.rect(math.exp(alm[0]), aph[0]) if np.isfinite(alm[0]) else 0j
    blm = np.full(N, -np.inf)
    bph = np.zeros(N)
    blm[0], bph[0] = a0.real, arr_wrap(np.array([a0.imag]))[0]
    if N == 1:
        return blm, bph
    m = np.arange(1, N, dtype=float)
    wlm = alm[1:] + np.log(m)  # (m+1) a_{m+1} for m+1 = 1..N-1
    wph = aph[1:]
    for n in range(N - 1):
        lm, ph = _dot(wlm[: n + 1][::-1], wph[: n + 1][::-1], blm[: n + 1], bph[: n + 1])
        blm[n + 1] = lm - math.log(n + 1)
        bph[n + 1] = ph
    return blm, bph


# ---------------------------------------------------------------------------
# derivative quotients for Exp-rooted functions
# ---------------------------------------------------------------------------

def log_derivative_ratios(f: Expr, k: int) -> list[Expr]:
    """For f = exp(g): the quotients D_j = f^(j)/f for j = 0..k.

    Built by D_0 = 1, D_{j+1} = D_j' + g' * D_j; each D_j is analytic on the
    disc by construction (the only division in the artifact happens here,
    symbolically).
    """
    if not isinstance(f, Exp):
        raise ValueError("log_derivative_ratios requires a function of the form exp(g)")
    if k < 0:
        raise ValueError("k must be non-negative")
    gp = diff(f.arg)
    out = [ONE]
    for _ in range(k):
        out.append(add(diff(out[-1]), mul(gp, out[-1])))
    return out


# ---------------------------------------------------------------------------
# textual syntax
# ---------------------------------------------------------------------------

def expr_to_str(e: Expr, limit: int = 0) -> str:
    def go(x: Expr) -> str:
        if isinstance(x, Z):
            return "z"
        if isinstance(x, Const):
            v = x.value
            if v.imag == 0:
                return f"{v.real:g}" if v.real >= 0 else f"const({v.real:g})"
            return f"const({v.real:g}{v.imag:+g}j)"
        if isinstance(x, Add):
            return f"({go(x.left)} + {go(x.right)})"
        if isinstance(x, Neg):
            return f"(-{go(x.arg)})"
        if isinstance(x, Mul):
            return f"{go(x.left)}*{go(x.right)}"
        if isinstance(x, PowOneMinusZ):
            return f"pow1mz({x.exponent:g})"
        if isinstance(x, Exp):
            return f"exp({go(x.arg)})"
        if isinstance(x, IntPow):
            return f"{go(x.base)}^{x.n}"
        raise TypeError(type(x).__name__)

    s = go(e)
    if limit and len(s) > limit:
        s = s[: limit - 3] + "..."
    return s


class ExprSyntaxError(ValueError):
    pass


def parse_expr(text: str) -> Expr:
    """Parse the textual expression syntax into a tree."""
    toks = _tokenize(text)
    pos = [0]

    def peek():
        return toks[pos[0]] if pos[0] < len(toks) else None

    def take(expect: str | None = None):
        tok = peek()
        if tok is None:
            raise ExprSyntaxError(f"unexpected end of input in {text!r}")
        if expect is not None and tok != expect:
            raise ExprSyntaxError(f"expected {expect!r}, got {tok!r} in {text!r}")
        pos[0] += 1
        return tok

    def number() -> float:
        tok = take()
        try:
            return float(tok)
        except ValueError:
            raise ExprSyntaxError(f"expected number, got {tok!r}") from None

    def atom() -> Expr:
        tok = peek()
        if tok == "-":
            take()
            return neg(atom())
        if tok == "(":
            take()
            e = expr()
            take(")")
            return e
        if tok == "z":
            take()
            return Z()
        if tok == "exp":
            take()
            take("(")
            e = expr()
            take(")")
            return Exp(e)
        if tok == "pow1mz":
            take()
            take("(")
            mu = number()
            take(")")
            return PowOneMinusZ(mu)
        if tok == "tower":
            take()
            take("(")
            level = int(number())
            take(",")
            c = number()
            take(",")
            m = number()
            take(")")
            return build_tower(TowerSpec(level, c, m))
        if tok == "const":
            take()
            take("(")
            parts = []
            while peek() not in (")", None):
                parts.append(take())
            take(")")
            try:
                v = complex("".join(parts).replace(" ", ""))
            except ValueError:
                raise ExprSyntaxError(f"bad complex literal {''.join(parts)!r}") from None
            return Const(v)
        if tok is not None and _is_number_token(tok):
            return Const(complex(number()))
        raise ExprSyntaxError(f"unexpected token {tok!r} in {text!r}")

    def factor() -> Expr:
        e = atom()
        while peek() == "^":
            take()
            n = number()
            if n != int(n) or n < 0:
                raise ExprSyntaxError("^ requires a non-negative integer exponent")
            e = intpow(e, int(n))
        return e

    def term() -> Expr:
        e = factor()
        while peek() == "*":
            take()
            e = mul(e, factor())
        return e

    def expr() -> Expr:
        e = term()
        while peek() in ("+", "-"):
            op = take()
            rhs = term()
            e = add(e, rhs if op == "+" else neg(rhs))
        return e

    out = expr()
    if pos[0] != len(toks):
        raise ExprSyntaxError(f"trailing input {toks[pos[0]:]!r} in {text!r}")
    return out


def _is_number_token(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _tokenize(text: str) -> list[str]:
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()+-*,^":
            out.append(ch)
            i += 1
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[i:j])
            i = j
        elif ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eEjJ"
                             or (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            out.append(text[i:j].lower())
            i = j
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r} in {text!r}")
    return out


CATALOG: dict[str, str] = {
    "const(3)": "bounded constant",
    "exp(z)": "bounded on the disc",
    "pow1mz(1)": "1/(1-z), unbounded but of order 0",
    "tower(1,1,1)": "exp((1-z)^-1): log M ~ (1-r)^-1",
    "tower(2,1,1)": "exp^2((1-z)^-1): order 1 at level 2",
    "tower(2,2,1)": "level-2 tower with type constant 2",
    "tower(2,1,0.5)": "level-2 tower of order 1/2",
    "tower(3,1,1)": "level-3 tower: order 1 one level up",
    "tower(3,1,0.5)": "level-3 tower of order 1/2 one level up",
}


def catalog_expr(name: str) -> Expr:
    if name not in CATALOG:
        raise KeyError(f"{name!r} not in catalog")
    return parse_expr(name)
