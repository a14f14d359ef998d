"""Approximating functions and volume-sum diagnostics.

An approximating function psi maps integers q >= 1 to positive reals and is
non-increasing beyond a certified index q0.  Three concrete families are
provided (power-log, finite table, max/min combinations) together with the
two standard "tilde" reductions that floor psi from below before the dyadic
covering arguments, partial sums of the three volume series that govern the
zero-full dichotomies, and a closed-form classifier for pure power-log data.

All logarithms are natural unless a name says otherwise.  The h = 1 term of
any log-weighted series is defined as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_SCAN_CAP = 10**4
_CHUNK = 1 << 19


class ApproxError(ValueError):
    """Bad approximating-function configuration or domain violation."""


def _check_q(q: int) -> None:
    if q < 1:
        raise ApproxError(f"q must be a positive integer, got {q}")


class ApproxFn:
    """Base class; subclasses implement eval / eval_array / spec."""

    q0: int = 1

    def eval(self, q: int) -> float:
        raise NotImplementedError

    def eval_array(self, q: np.ndarray) -> np.ndarray:
        """Vectorized eval over a float64 array of q values (all >= 1)."""
        raise NotImplementedError

    def spec(self) -> str:
        """Canonical text form, parseable by parse_approx."""
        raise NotImplementedError

    def values_upto(self, Q: int) -> np.ndarray:
        """psi(q) for q = 0..Q as float64; index 0 is a NaN placeholder."""
        out = np.empty(Q + 1, dtype=np.float64)
        out[0] = np.nan
        out[1:] = self.eval_array(np.arange(1, Q + 1, dtype=np.float64))
        return out


def _scan_q0(fn: ApproxFn) -> int:
    # First index from which consecutive values stop increasing.  The
    # families used here are unimodal in q, so this is the true peak.
    prev = fn.eval(1)
    for q in range(1, _SCAN_CAP + 1):
        cur = fn.eval(q + 1)
        if cur <= prev:
            return q
        prev = cur
    raise ApproxError(f"no decreasing index found while scanning up to {_SCAN_CAP}")


@dataclass(frozen=True)
class PowerLog(ApproxFn):
    """psi(q) = c * q^(-tau) * ln(q+1)^(-beta)."""

    c: float = 1.0
    tau: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("c", "tau", "beta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.c <= 0:
            raise ApproxError("c must be positive")
        object.__setattr__(self, "q0", 1 if self.beta >= 0 and self.tau >= 0 else _scan_q0(self))

    def eval(self, q: int) -> float:
        _check_q(q)
        return self.c * math.pow(q, -self.tau) * math.pow(math.log(q + 1.0), -self.beta)

    def eval_array(self, q: np.ndarray) -> np.ndarray:
        qf = np.asarray(q, dtype=np.float64)
        return self.c * np.power(qf, -self.tau) * np.power(np.log(qf + 1.0), -self.beta)

    def spec(self) -> str:
        return f"powerlog:{self.c!r},{self.tau!r},{self.beta!r}"


@dataclass(frozen=True)
class Table(ApproxFn):
    """Finite non-increasing table of values for q = 1..len(values).

    Beyond the table the default tail rule scales the last value by
    (last index / q), which keeps the function non-increasing; with
    tail="error" evaluation beyond the table is a domain error.
    """

    values: tuple
    tail: str = "scale"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ApproxError("table needs at least one value")
        if any(v <= 0 for v in vals):
            raise ApproxError("table values must be positive")
        if any(b > a for a, b in zip(vals, vals[1:])):
            raise ApproxError("table values must be non-increasing")
        if self.tail not in ("scale", "error"):
            raise ApproxError(f"unknown tail rule {self.tail!r}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "q0", 1)

    def eval(self, q: int) -> float:
        _check_q(q)
        n = len(self.values)
        if q <= n:
            return self.values[q - 1]
        if self.tail == "error":
            raise ApproxError(f"q={q} beyond table of length {n} with tail=error")
        return self.values[-1] * (n / q)

    def eval_array(self, q: np.ndarray) -> np.ndarray:
        n = len(self.values)
        if self.tail == "error" and np.any(q > n):
            raise ApproxError(f"q beyond table of length {n} with tail=error")
        idx = np.minimum(q.astype(np.int64), n) - 1
        out = np.asarray(self.values, dtype=np.float64)[idx]
        beyond = q > n
        if np.any(beyond):
            out = np.where(beyond, self.values[-1] * (n / q), out)
        return out

    def spec(self) -> str:
        body = ",".join(repr(v) for v in self.values)
        suffix = "" if self.tail == "scale" else "|tail=error"
        return f"table:{body}{suffix}"


class _Combine(ApproxFn):
    _op = None
    _np_op = None
    _name = ""

    def __init__(self, *parts: ApproxFn):
        if len(parts) < 2:
            raise ApproxError(f"{self._name} needs at least two branches")
        self.parts = tuple(parts)
        self.q0 = max(p.q0 for p in self.parts)

    def eval(self, q: int) -> float:
        return self._op(p.eval(q) for p in self.parts)

    def eval_array(self, q: np.ndarray) -> np.ndarray:
        out = self.parts[0].eval_array(q)
        for p in self.parts[1:]:
            out = self._np_op(out, p.eval_array(q))
        return out

    def spec(self) -> str:
        return self._name + ":" + ",".join(f"({p.spec()})" for p in self.parts)

    def __repr__(self):
        return self.spec()

    def __eq__(self, other):
        return type(self) is type(other) and self.parts == other.parts

    def __hash__(self):
        return hash((type(self).__name__, self.parts))


class MaxOf(_Combine):
    """Pointwise maximum of branches (non-increasing beyond max q0)."""

    _op = staticmethod(max)
    _np_op = staticmethod(np.maximum)
    _name = "max"


class MinOf(_Combine):
    """Pointwise minimum of branches."""

    _op = staticmethod(min)
    _np_op = staticmethod(np.minimum)
    _name = "min"


@dataclass(frozen=True)
class MultFloor(ApproxFn):
    """The multiplicative covering floor q^(1-2/s) * (ln q)^(-2-1/s).

    Defined for q >= 2; the q = 1 value is clamped to the q = 2 value so
    that the function stays finite and non-increasing on the whole domain.
    """

    s: float

    def __post_init__(self):
        if not 0 < self.s <= 1:
            raise ApproxError(f"s must lie in (0, 1], got {self.s}")
        object.__setattr__(self, "q0", _scan_q0(self))

    def eval(self, q: int) -> float:
        _check_q(q)
        if q == 1:
            q = 2
        return math.pow(q, 1.0 - 2.0 / self.s) * math.pow(math.log(q), -2.0 - 1.0 / self.s)

    def eval_array(self, q: np.ndarray) -> np.ndarray:
        qq = np.maximum(q, 2.0)
        return np.power(qq, 1.0 - 2.0 / self.s) * np.power(np.log(qq), -2.0 - 1.0 / self.s)

    def spec(self) -> str:
        return f"multfloor:{self.s!r}"


def tilde_psi_mult(psi: ApproxFn, s: float) -> ApproxFn:
    """Floor psi from below for the multiplicative covering argument.

    Returns max(psi, q^(1-2/s) (ln q)^(-2-1/s)); the result satisfies the
    floor precondition of the case-split covering by construction.
    """
    return MaxOf(psi, MultFloor(s))


def tilde_psi_sim(psi: ApproxFn) -> ApproxFn:
    """Floor psi from below at q^(-2/3) for the simultaneous argument."""
    return MaxOf(psi, PowerLog(1.0, 2.0 / 3.0, 0.0))


def sim_ordered(psi: ApproxFn, phi: ApproxFn) -> tuple:
    """(max branch, min branch) pair for the simultaneous reduction."""
    return MaxOf(psi, phi), MinOf(psi, phi)


# --- volume series -------------------------------------------------------

@dataclass(frozen=True)
class KhintchineSeries:
    """sum_h psi_1(h) * ... * psi_n(h)."""

    psis: tuple

    def __post_init__(self):
        if not self.psis:
            raise ApproxError("need at least one psi")
        object.__setattr__(self, "psis", tuple(self.psis))

    def terms(self, h: np.ndarray) -> np.ndarray:
        out = self.psis[0].eval_array(h)
        for p in self.psis[1:]:
            out = out * p.eval_array(h)
        return out


@dataclass(frozen=True)
class GallagherSeries:
    """sum_h psi(h)^n * (ln h)^(n-1)."""

    psi: ApproxFn
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ApproxError("dimension n must be >= 1")

    def terms(self, h: np.ndarray) -> np.ndarray:
        return np.power(self.psi.eval_array(h), self.n) * np.power(np.log(h), self.n - 1)


@dataclass(frozen=True)
class Theorem2Series:
    """sum_h h^(1-s) * (ln h)^s * psi(h)^s."""

    psi: ApproxFn
    s: float

    def __post_init__(self):
        if not 0 < self.s <= 1:
            raise ApproxError(f"s must lie in (0, 1], got {self.s}")

    def terms(self, h: np.ndarray) -> np.ndarray:
        return np.power(h, 1.0 - self.s) * np.power(np.log(h), self.s) * np.power(
            self.psi.eval_array(h), self.s
        )


def partial_sum(series, H: int, start: int = 1) -> float:
    """Sum of series terms for h = start..H (inclusive).

    Chunked float64 accumulation with fixed chunk boundaries, so results are
    reproducible; additivity over index ranges holds to ~1e-12 relative.
    """
    if H < start:
        return 0.0
    total = 0.0
    lo = start
    while lo <= H:
        hi = min(H, ((lo // _CHUNK) + 1) * _CHUNK - 1)
        h = np.arange(lo, hi + 1, dtype=np.float64)
        total += float(np.sum(series.terms(h)))
        lo = hi + 1
    return total


@dataclass(frozen=True)
class SeriesVerdict:
    verdict: str            # "converges" | "diverges"
    reason: str
    critical_exponent: float


def _powerlog_params(fn: ApproxFn):
    if not isinstance(fn, PowerLog):
        raise ApproxError(f"classifier needs PowerLog data, got {type(fn).__name__}")
    return fn.c, fn.tau, fn.beta


def classify_powerlaw(series) -> SeriesVerdict:
    """Closed-form convergence verdict for power-log series data.

    The borderline cases (power exponent exactly -1) are decided by the
    aggregate log exponent; critical_exponent reports where the primary
    parameter would sit exactly on the boundary.
    """
    if isinstance(series, KhintchineSeries):
        taus, betas = zip(*((_powerlog_params(p)[1], _powerlog_params(p)[2]) for p in series.psis))
        T, B = sum(taus), sum(betas)
        if T > 1 or (T == 1 and B > 1):
            v, why = "converges", f"sum(tau) = {T:g} > 1" if T > 1 else f"sum(tau) = 1, sum(beta) = {B:g} > 1"
        else:
            v, why = "diverges", f"sum(tau) = {T:g}, sum(beta) = {B:g}"
        return SeriesVerdict(v, why, 1.0)
    if isinstance(series, GallagherSeries):
        _, tau, beta = _powerlog_params(series.psi)
        n = series.n
        nt = n * tau
        if nt > 1 or (nt == 1 and n * beta - (n - 1) > 1):
            v = "converges"
            why = f"n*tau = {nt:g} > 1" if nt > 1 else f"n*tau = 1, n*beta-(n-1) = {n * beta - (n - 1):g} > 1"
        else:
            v, why = "diverges", f"n*tau = {nt:g}, n*beta-(n-1) = {n * beta - (n - 1):g}"
        return SeriesVerdict(v, why, 1.0 / n)
    if isinstance(series, Theorem2Series):
        _, tau, beta = _powerlog_params(series.psi)
        s = series.s
        a = s * (1.0 + tau)
        if a > 2 or (a == 2 and s * (1.0 - beta) < -1):
            v = "converges"
            why = f"s(1+tau) = {a:g} > 2" if a > 2 else f"s(1+tau) = 2, s(1-beta) = {s * (1.0 - beta):g} < -1"
        else:
            v, why = "diverges", f"s(1+tau) = {a:g}, s(1-beta) = {s * (1.0 - beta):g}"
        return SeriesVerdict(v, why, 2.0 / (1.0 + tau))
    raise ApproxError(f"unknown series kind {type(series).__name__}")


def power_exponent(series) -> float:
    """Exponent e in term(h) ~ h^e (ln h)^(...) for power-log data."""
    if isinstance(series, KhintchineSeries):
        return -sum(_powerlog_params(p)[1] for p in series.psis)
    if isinstance(series, GallagherSeries):
        return -series.n * _powerlog_params(series.psi)[1]
    if isinstance(series, Theorem2Series):
        return 1.0 - series.s - series.s * _powerlog_params(series.psi)[1]
    raise ApproxError(f"unknown series kind {type(series).__name__}")


# --- text form -----------------------------------------------------------

def _split_top(body: str) -> list:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ApproxError(f"unbalanced parentheses in {body!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ApproxError(f"unbalanced parentheses in {body!r}")
    parts.append("".join(cur))
    return parts


def parse_approx(text: str) -> ApproxFn:
    """Parse the canonical text form, e.g. "powerlog:1,0.5,0"."""
    text = text.strip()
    kind, sep, body = text.partition(":")
    if not sep:
        raise ApproxError(f"missing ':' in approx spec {text!r}")
    try:
        if kind == "powerlog":
            c, tau, beta = (float(x) for x in body.split(","))
            return PowerLog(c, tau, beta)
        if kind == "multfloor":
            return MultFloor(float(body))
        if kind == "table":
            body, _, opt = body.partition("|")
            tail = "scale"
            if opt:
                key, _, val = opt.partition("=")
                if key != "tail":
                    raise ApproxError(f"unknown table option {opt!r}")
                tail = val
            return Table(tuple(float(x) for x in body.split(",")), tail=tail)
        if kind in ("max", "min"):
            parts = []
            for piece in _split_top(body):
                piece = piece.strip()
                if not (piece.startswith("(") and piece.endswith(")")):
                    raise ApproxError(f"branch {piece!r} must be parenthesized")
                parts.append(parse_approx(piece[1:-1]))
            return (MaxOf if kind == "max" else MinOf)(*parts)
    except ApproxError:
        raise
    except ValueError as e:
        raise ApproxError(f"bad approx spec {text!r}: {e}") from None
    raise ApproxError(f"unknown approx family {kind!r}")
