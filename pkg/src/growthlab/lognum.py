"""Overflow-safe arithmetic for complex values of extreme magnitude.

A nonzero complex value ``v`` is stored as ``(logmag, phase)`` with
``logmag = log|v|`` and ``phase = arg v`` canonicalized into (-pi, pi].
Since ``logmag`` is an ordinary float, magnitudes up to ``exp(1.7e308)`` are
representable; the exact zero is the distinguished value ``logmag = -inf``.

Exponentials are the only operation that can leave this range: ``lc_exp``
requires its argument's log-magnitude to stay at or below
:data:`EXP_ARG_LIMIT` and raises :class:`TowerOverflow` loudly otherwise.
Phase is wrapped after every operation; the accumulated wrap error at huge
magnitudes is accepted (growth measurements consume magnitudes, phases feed
only cos/sin corrections).

Besides the scalar :class:`LogComplex`, the module provides vectorized
operations on ``(logmag, phase)`` ndarray pairs, used by batched function
evaluation, quadrature, and the series solver.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LogComplex",
    "TowerOverflow",
    "NonPositiveRealPart",
    "EXP_ARG_LIMIT",
    "CANCEL_EPS",
    "lc_mul",
    "lc_add",
    "lc_neg",
    "lc_exp",
    "lc_pow_int",
    "log_re",
    "lse_sum",
    "wrap_phase",
    "arr_wrap",
    "arr_mul",
    "arr_add",
    "arr_neg",
    "arr_exp",
    "arr_pow_int",
    "arr_log_re",
    "arr_sum",
    "arr_from_values",
]

EXP_ARG_LIMIT = 700.0   # lc_exp argument log-magnitude cap
CANCEL_EPS = 1e-14      # relative mantissa below which an addition is flagged

_TWO_PI = 2.0 * math.pi


class TowerOverflow(OverflowError):
    """Raised when an exponential would leave the representable range."""

    def __init__(self, logmag: float, context: str = ""):
        self.logmag = logmag
        self.context = context
        msg = f"exp argument log-magnitude {logmag:.6g} exceeds {EXP_ARG_LIMIT:g}"
        if context:
            msg += f" in {context}"
        super().__init__(msg)


class NonPositiveRealPart(ArithmeticError):
    """Raised by log_re when the represented value has no positive real part."""


def wrap_phase(phi: float) -> float:
    """Canonicalize a phase into (-pi, pi]."""
    if not math.isfinite(phi):
        return 0.0 if math.isnan(phi) else 0.0
    w = math.remainder(phi, _TWO_PI)
    if w <= -math.pi:
        w += _TWO_PI
    return w


@dataclass(frozen=True)
class LogComplex:
    """A complex value as (log-magnitude, phase); logmag = -inf encodes 0."""

    logmag: float
    phase: float = 0.0
    cancelled: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.logmag == -math.inf:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", wrap_phase(self.phase))

    @classmethod
    def from_value(cls, v: complex) -> "LogComplex":
        v = complex(v)
        if v == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(v)), cmath.phase(v))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(-math.inf, 0.0)

    @classmethod
    def one(cls) -> "LogComplex":
        return cls(0.0, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.logmag == -math.inf

    def to_value(self) -> complex:
        """Materialize as an ordinary complex; overflows to inf components."""
        if self.is_zero:
            return 0j
        return cmath.rect(math.exp(self.logmag), self.phase) if self.logmag <= 709.7 else (
            complex(math.inf * math.cos(self.phase), math.inf * math.sin(self.phase))
        )

    def __repr__(self) -> str:
        return f"LogComplex(logmag={self.logmag!r}, phase={self.phase!r})"


def lc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    if a.is_zero or b.is_zero:
        return LogComplex.zero()
    return LogComplex(a.logmag + b.logmag, a.phase + b.phase)


def lc_neg(a: LogComplex) -> LogComplex:
    if a.is_zero:
        return a
    return LogComplex(a.logmag, a.phase + math.pi)


def lc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """Sum via mantissa arithmetic relative to the larger magnitude.

    Exact cancellation yields zero; near-total cancellation (relative
    mantissa below :data:`CANCEL_EPS`) is flagged on the result so residual
    checks can tell noise from identity.
    """
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if a.logmag == b.logmag and abs(wrap_phase(a.phase - b.phase)) == math.pi:
        return LogComplex.zero()  # exact opposite values
    m = max(a.logmag, b.logmag)
    s = cmath.rect(math.exp(a.logmag - m), a.phase) + cmath.rect(math.exp(b.logmag - m), b.phase)
    if s == 0:
        return LogComplex.zero()
    mag = abs(s)
    return LogComplex(m + math.log(mag), cmath.phase(s), cancelled=(mag < CANCEL_EPS * 2.0))


def lc_exp(a: LogComplex, context: str = "") -> LogComplex:
    """exp of the represented value; requires a.logmag <= EXP_ARG_LIMIT."""
    if a.is_zero:
        return LogComplex.one()
    if a.logmag > EXP_ARG_LIMIT:
        raise TowerOverflow(a.logmag, context)
    r = math.exp(a.logmag)
    return LogComplex(r * math.cos(a.phase), wrap_phase(r * math.sin(a.phase)))


def lc_pow_int(a: LogComplex, n: int) -> LogComplex:
    if a.is_zero:
        return LogComplex.one() if n == 0 else LogComplex.zero()
    return LogComplex(n * a.logmag, n * a.phase)


def log_re(a: LogComplex) -> float:
    """log of the real part, without materializing the value.

    Requires cos(phase) > 0, i.e. the value lies in the open right
    half-plane.
    """
    if a.is_zero:
        raise NonPositiveRealPart("zero value has no positive real part")
    c = math.cos(a.phase)
    if c <= 0.0:
        raise NonPositiveRealPart(f"cos(phase) = {c:.6g} <= 0 at phase {a.phase:.6g}")
    return a.logmag + math.log(c)


def lse_sum(terms) -> LogComplex:
    """Deterministic pairwise-tree reduction of lc_add over a sequence."""
    items = list(terms)
    if not items:
        return LogComplex.zero()
    while len(items) > 1:
        nxt = [lc_add(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


# ---------------------------------------------------------------------------
# vectorized counterparts on (logmag, phase) ndarray pairs
# ---------------------------------------------------------------------------

def arr_wrap(ph: np.ndarray) -> np.ndarray:
    w = ph - _TWO_PI * np.round(ph / _TWO_PI)
    return np.where(w <= -math.pi, w + _TWO_PI, w)


def arr_from_values(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        lm = np.log(np.abs(z))
    ph = np.where(np.isneginf(lm), 0.0, np.angle(z))
    return lm, ph


def arr_mul(lm1, ph1, lm2, ph2):
    lm = lm1 + lm2
    ph = arr_wrap(ph1 + ph2)
    zero = np.isneginf(lm1) | np.isneginf(lm2)
    return np.where(zero, -np.inf, lm), np.where(zero, 0.0, ph)


def arr_neg(lm, ph):
    return lm, arr_wrap(np.where(np.isneginf(lm), 0.0, ph + math.pi))


def arr_add(lm1, ph1, lm2, ph2):
    m = np.maximum(lm1, lm2)
    safe_m = np.where(np.isneginf(m), 0.0, m)
    with np.errstate(invalid="ignore"):
        s = (np.exp(lm1 - safe_m) * np.exp(1j * ph1)
             + np.exp(lm2 - safe_m) * np.exp(1j * ph2))
    opposite = (lm1 == lm2) & (np.abs(arr_wrap(ph1 - ph2)) == math.pi)
    mag = np.where(opposite, 0.0, np.abs(s))
    with np.errstate(divide="ignore"):
        lm = np.where(mag > 0, safe_m + np.log(np.where(mag > 0, mag, 1.0)), -np.inf)
    lm = np.where(np.isneginf(m), -np.inf, lm)
    ph = np.where(mag > 0, np.angle(s), 0.0)
    return lm, ph


def arr_exp(lm, ph, context: str = ""):
    bad = lm > EXP_ARG_LIMIT
    if np.any(bad):
        raise TowerOverflow(float(np.max(lm[bad])), context)
    zero = np.isneginf(lm)
    r = np.exp(np.where(zero, -np.inf, lm))
    out_lm = np.where(zero, 0.0, r * np.cos(ph))
    out_ph = np.where(zero, 0.0, arr_wrap(r * np.sin(ph)))
    return out_lm, out_ph


def arr_pow_int(lm, ph, n: int):
    if n == 0:
        return np.zeros_like(lm), np.zeros_like(ph)
    zero = np.isneginf(lm)
    return np.where(zero, -np.inf, n * lm), np.where(zero, 0.0, arr_wrap(n * ph))


def arr_log_re(lm, ph):
    """log(Re value) elementwise; entries with cos(phase) <= 0 become nan."""
    c = np.cos(ph)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(c > 0, lm + np.log(np.where(c > 0, c, 1.0)), np.nan)
    return np.where(np.isneginf(lm), np.nan, out)


def arr_sum(lm: np.ndarray, ph: np.ndarray, axis: int = 0):
    """Log-space complex sum along an axis via single max-scaling."""
    m = np.max(lm, axis=axis, keepdims=True)
    safe_m = np.where(np.isneginf(m), 0.0, m)
    with np.errstate(invalid="ignore"):
        s = np.sum(np.exp(lm - safe_m) * np.exp(1j * ph), axis=axis)
    m = np.squeeze(safe_m, axis=axis)
    allzero = np.squeeze(np.isneginf(np.max(lm, axis=axis, keepdims=True)), axis=axis)
    mag = np.abs(s)
    with np.errstate(divide="ignore"):
        out_lm = np.where(mag > 0, m + np.log(np.where(mag > 0, mag, 1.0)), -np.inf)
    out_lm = np.where(allzero, -np.inf, out_lm)
    out_ph = np.where(mag > 0, np.angle(s), 0.0)
    return out_lm, out_ph
