"""Linear ODEs with analytic coefficients: series solving, residuals,
and manufactured problems.

The equation is f^(k) + A_{k-1} f^(k-1) + ... + A_0 f = 0 with k >= 2 and
every A_j analytic on the disc.  ``solve_series`` runs the coefficient
recurrence in log space (factorial ratios carried as log-magnitudes), so
coefficient sizes are unconstrained by float range.  ``manufacture`` inverts
the problem: given f = exp(g) and the higher coefficients, it solves for
A_0 so that f is an exact solution.

Power-series evaluation refuses radii beyond the series' reliability radius
(where the retained tail stops being negligible); ``residual`` can override
the guard, since measuring the breakdown of a truncation is exactly what a
residual is for.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from math import lgamma
from pathlib import Path

import numpy as np

from .funcs import (
    Const,
    Exp,
    Expr,
    LogSeries,
    add,
    eval_log,
    eval_log_batch,
    expr_to_str,
    log_derivative_ratios,
    mul,
    neg,
    parse_expr,
    taylor,
    MAX_SERIES_N,
)
from .lognum import LogComplex, arr_sum, arr_wrap, lc_mul

__all__ = [
    "OdeProblem",
    "LogSeries",
    "ReliabilityError",
    "solve_series",
    "solve_basis",
    "eval_series",
    "eval_series_batch",
    "residual",
    "manufacture",
    "parse_problem",
    "load_problem",
    "write_series_csv",
]


class ReliabilityError(RuntimeError):
    """Evaluation requested beyond the series' reliability radius."""

    def __init__(self, r: float, r_reliable: float):
        self.r = r
        self.r_reliable = r_reliable
        super().__init__(
            f"|z| = {r:.6g} exceeds the reliability radius {r_reliable:.6g} "
            f"of the truncated series"
        )


@dataclass(frozen=True)
class OdeProblem:
    """k-th order problem: coefficient list is A_0..A_{k-1}; initial
    conditions are f(0)..f^(k-1)(0) and default to the first canonical basis
    vector when omitted."""

    k: int
    coeffs: tuple[Expr, ...]
    initial_conditions: tuple[complex, ...] | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("equation order k must be at least 2")
        if len(self.coeffs) != self.k:
            raise ValueError(f"need {self.k} coefficients A_0..A_{self.k - 1}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if self.initial_conditions is not None:
            ics = tuple(complex(v) for v in self.initial_conditions)
            if len(ics) != self.k:
                raise ValueError(f"need {self.k} initial conditions")
            if any(not (math.isfinite(v.real) and math.isfinite(v.imag)) for v in ics):
                raise ValueError("initial conditions must be finite")
            object.__setattr__(self, "initial_conditions", ics)

    def ics_or_default(self) -> tuple[complex, ...]:
        if self.initial_conditions is not None:
            return self.initial_conditions
        return tuple(1 + 0j if i == 0 else 0j for i in range(self.k))


def _sum_scalar_terms(parts: list[tuple[float, float]]) -> tuple[float, float]:
    """Log-space complex sum of scalar (logmag, phase) terms."""
    m = max((lm for lm, _ in parts), default=-math.inf)
    if not math.isfinite(m):
        return -math.inf, 0.0
    s = sum(cmath.rect(math.exp(lm - m), ph) for lm, ph in parts if lm != -math.inf)
    mag = abs(s)
    if mag == 0.0:
        return -math.inf, 0.0
    return m + math.log(mag), cmath.phase(s)


def solve_series(p: OdeProblem, N: int, ics: tuple[complex, ...] | None = None) -> LogSeries:
    """First N Taylor coefficients of the solution by the log-space
    recurrence

        c_{n+k} (n+k)!/n! = - sum_j sum_{m<=n} a_{j,n-m} (m+j)!/m! c_{m+j}.
    """
    if N < p.k or N > MAX_SERIES_N:
        raise ValueError(f"series length must be in [{p.k}, {MAX_SERIES_N}]")
    ic = tuple(complex(v) for v in ics) if ics is not None else p.ics_or_default()
    if len(ic) != p.k:
        raise ValueError(f"need {p.k} initial conditions")

    active: list[tuple[int, np.ndarray, np.ndarray, np.ndarray]] = []
    for j, a in enumerate(p.coeffs):
        s = taylor(a, N)
        if np.all(np.isneginf(s.logmag)):
            continue  # identically zero coefficient
        logfr = np.array([lgamma(mm + j + 1) - lgamma(mm + 1) for mm in range(N)])
        active.append((j, s.logmag, s.phase, logfr))

    clm = np.full(N, -np.inf)
    cph = np.zeros(N)
    for i in range(p.k):
        v = ic[i] / math.factorial(i)
        if v != 0:
            clm[i] = math.log(abs(v))
            cph[i] = cmath.phase(v)

    k = p.k
    for n in range(N - k):
        parts: list[tuple[float, float]] = []
        for j, alm, aph, logfr in active:
            t_lm = alm[n::-1] + logfr[: n + 1] + clm[j : j + n + 1]
            m = float(np.max(t_lm)) if t_lm.size else -math.inf
            if not math.isfinite(m):
                continue
            t_ph = aph[n::-1] + cph[j : j + n + 1]
            s = np.sum(np.exp(t_lm - m) * np.exp(1j * t_ph))
            if abs(s) > 0:
                parts.append((m + math.log(abs(s)), cmath.phase(s)))
        lm, ph = _sum_scalar_terms(parts)
        if lm == -math.inf:
            clm[n + k] = -math.inf
            cph[n + k] = 0.0
        else:
            clm[n + k] = lm - (lgamma(n + k + 1) - lgamma(n + 1))
            cph[n + k] = float(arr_wrap(np.array([ph + math.pi]))[0])
    return LogSeries(clm, cph)


def solve_basis(p: OdeProblem, N: int) -> list[LogSeries]:
    """The k solutions with canonical initial-condition basis vectors."""
    out = []
    for i in range(p.k):
        ic = tuple(1 + 0j if j == i else 0j for j in range(p.k))
        out.append(solve_series(p, N, ics=ic))
    return out


def eval_series(s: LogSeries, z: complex, enforce_guard: bool = True) -> LogComplex:
    """Evaluate the truncated series at z (log-sum-exp accumulation)."""
    z = complex(z)
    r = abs(z)
    if enforce_guard and r > s.r_reliable:
        raise ReliabilityError(r, s.r_reliable)
    if r == 0.0:
        return s.coeff(0)
    n = np.arange(s.N, dtype=float)
    t_lm = s.logmag + n * math.log(r)
    t_ph = s.phase + n * cmath.phase(z)
    lm, ph = arr_sum(t_lm[:, None], t_ph[:, None], axis=0)
    return LogComplex(float(lm[0]), float(ph[0]))


def eval_series_batch(
    s: LogSeries, zs: np.ndarray, enforce_guard: bool = True, chunk: int = 128
) -> tuple[np.ndarray, np.ndarray]:
    zs = np.asarray(zs, dtype=complex)
    rmax = float(np.max(np.abs(zs))) if zs.size else 0.0
    if enforce_guard and rmax > s.r_reliable:
        raise ReliabilityError(rmax, s.r_reliable)
    n = np.arange(s.N, dtype=float)[:, None]
    out_lm = np.empty(zs.shape)
    out_ph = np.empty(zs.shape)
    flat = zs.ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.where(np.abs(flat) > 0, np.log(np.where(np.abs(flat) > 0, np.abs(flat), 1.0)), -np.inf)
    args = np.angle(flat)
    for lo in range(0, flat.size, chunk):
        hi = min(lo + chunk, flat.size)
        t_lm = s.logmag[:, None] + n * logr[None, lo:hi]
        t_lm[1:, np.abs(flat[lo:hi]) == 0] = -np.inf  # z = 0: only c_0 survives
        t_lm[0, :] = s.logmag[0]
        t_ph = s.phase[:, None] + n * args[None, lo:hi]
        lm, ph = arr_sum(t_lm, t_ph, axis=0)
        out_lm.ravel()[lo:hi] = lm
        out_ph.ravel()[lo:hi] = ph
    return out_lm, out_ph


def residual(
    p: OdeProblem,
    s: LogSeries,
    r_check: float,
    n_theta: int = 256,
    enforce_guard: bool = True,
) -> float:
    """Max over the circle |z| = r_check of the relative equation residual

        |f^(k) + sum_j A_j f^(j)| / (|f^(k)| + sum_j |A_j f^(j)|),

    with the series derivatives taken termwise."""
    if enforce_guard and r_check > s.r_reliable:
        raise ReliabilityError(r_check, s.r_reliable)
    thetas = np.linspace(0.0, 2.0 * math.pi, n_theta, endpoint=False)
    zs = r_check * np.exp(1j * thetas)

    ders = [s]
    for _ in range(p.k):
        ders.append(ders[-1].derivative())

    term_lm = np.empty((p.k + 1, n_theta))
    term_ph = np.empty((p.k + 1, n_theta))
    lm, ph = eval_series_batch(ders[p.k], zs, enforce_guard=False)
    term_lm[0], term_ph[0] = lm, ph
    for j in range(p.k):
        alm, aph = eval_log_batch(p.coeffs[j], zs)
        flm, fph = eval_series_batch(ders[j], zs, enforce_guard=False)
        term_lm[j + 1] = alm + flm
        term_ph[j + 1] = aph + fph
        zero = np.isneginf(alm) | np.isneginf(flm)
        term_lm[j + 1][zero] = -np.inf
        term_ph[j + 1][zero] = 0.0

    num_lm, _ = arr_sum(term_lm, term_ph, axis=0)
    den_lm, _ = arr_sum(term_lm, np.zeros_like(term_ph), axis=0)
    with np.errstate(invalid="ignore"):
        rel = np.exp(num_lm - den_lm)
    rel = np.where(np.isneginf(den_lm), 0.0, rel)
    return float(np.max(rel))


def manufacture(f: Expr, higher: list[Expr], k: int) -> OdeProblem:
    """Build a problem whose exact solution is f = exp(g).

    ``higher`` supplies A_1..A_{k-1}; A_0 is solved for via the derivative
    quotients:  A_0 = -(D_k + sum_{j>=1} A_j D_j).  Initial conditions come
    from f^(j)(0) = D_j(0) f(0).
    """
    if not isinstance(f, Exp):
        raise ValueError("manufacture requires f of the form exp(g)")
    if len(higher) != k - 1:
        raise ValueError(f"need {k - 1} higher coefficients A_1..A_{k - 1}")
    ratios = log_derivative_ratios(f, k)
    acc: Expr = ratios[k]
    for j in range(1, k):
        acc = add(acc, mul(higher[j - 1], ratios[j]))
    a0 = neg(acc)

    f0 = eval_log(f, 0j)
    ics = []
    for j in range(k):
        v = lc_mul(eval_log(ratios[j], 0j), f0).to_value()
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(
                f"initial condition f^({j})(0) overflows floats; "
                f"shrink the tower constant of {expr_to_str(f, 40)}"
            )
        ics.append(v)
    return OdeProblem(k, tuple([a0] + list(higher)), tuple(ics))


# ---------------------------------------------------------------------------
# problem files and series export
# ---------------------------------------------------------------------------

def parse_problem(text: str) -> OdeProblem:
    """Parse the problem-file format: ``k = 2``, ``A0 = <expr>`` ... and an
    optional ``ic = v0, v1, ...`` line (values in Python complex syntax)."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key in entries:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = val

    if "k" not in entries:
        raise ValueError("problem file must set k")
    k = int(entries.pop("k"))
    ics = None
    if "ic" in entries:
        ics = tuple(complex(tok.strip()) for tok in entries.pop("ic").split(","))
    coeffs = []
    for j in range(k):
        key = f"a{j}"
        if key not in entries:
            raise ValueError(f"problem file missing {key.upper()}")
        coeffs.append(parse_expr(entries.pop(key)))
    if entries:
        raise ValueError(f"unknown problem keys: {sorted(entries)}")
    return OdeProblem(k, tuple(coeffs), ics)


def load_problem(path: str | Path) -> OdeProblem:
    return parse_problem(Path(path).read_text())


def write_series_csv(path, s: LogSeries):
    """Series export, one coefficient per row: n,logmag,phase."""
    with open(path, "w", newline="") as fh:
        fh.write("n,logmag,phase\n")
        for i in range(s.N):
            fh.write(f"{i},{s.logmag[i]:.12g},{s.phase[i]:.12g}\n")
