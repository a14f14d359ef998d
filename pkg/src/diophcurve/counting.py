"""Counting rational points (p1/q, p2/q) near a monotone curve arc.

Three counters share one certified-window core:

- count_near_curve: q <= Q, p1/q in [a, b], |q f(p1/q) - p2| < delta with p2
  the nearest integer (valid since delta < 1/2).
- count_block_mult: dyadic block 2^t <= q < 2^(t+1), unbalanced windows
  |x - p1/q| < 2^m gamma_t, |y - p2/q| < 2^-m gamma_t.
- count_block_sim: same block, fixed windows psi(2^t)/2^t by phi(2^t)/2^t.

Ratios compare against the expected order of growth: delta Q^3 for the near
count, 2^(2t) 2^|m| sqrt(psi) and 2^(2t) psi for the blocks.

Kernels decide strict inequalities in binary64 and flag anything within the
ambiguity band; flagged pairs are settled here, in exact rational arithmetic
for polynomial curves, and excluded (but reported) otherwise.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import _kernels
from .approx import ApproxFn
from .curve import Curve

MODE_TRIPLES = "Triples"
MODE_REDUCED = "ReducedOnly"
MODE_SIM = "Simultaneous"
MODE_MULT = "Multiplicative"

_CHUNK_Q = 64


class CountError(ValueError):
    pass


@dataclass(frozen=True)
class CountReport:
    count: int
    predicted_bound: float
    ratio: float
    mode: str
    boundary_ambiguous: int

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "predicted_bound": self.predicted_bound,
            "ratio": self.ratio,
            "mode": self.mode,
            "boundary_ambiguous": self.boundary_ambiguous,
        }


def resolve_threads(threads=None) -> int:
    """--threads / DIOPH_THREADS / 1, with "auto" mapping to the cpu count."""
    if threads is None:
        threads = os.environ.get("DIOPH_THREADS", 1)
    if threads == "auto":
        return os.cpu_count() or 1
    n = int(threads)
    if n < 1:
        raise CountError("threads must be >= 1")
    return n


def chunk_ranges(q_lo: int, q_hi: int, size: int = _CHUNK_Q):
    """[q_lo, q_hi] split at fixed absolute boundaries (multiples of size),
    so the partition (and hence every folded total) is thread-independent."""
    out = []
    lo = q_lo
    while lo <= q_hi:
        hi = min(q_hi, (lo // size + 1) * size - 1)
        out.append((lo, hi))
        lo = hi + 1
    return out


def run_chunks(fn, chunks, threads: int):
    """Map fn over chunks, folding results in ascending chunk order."""
    if threads <= 1 or len(chunks) <= 1:
        return [fn(lo, hi) for lo, hi in chunks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda c: fn(c[0], c[1]), chunks))


def _sorted_rows(flag_arrays):
    rows = sorted(tuple(int(v) for v in row)
                  for arr in flag_arrays for row in arr)
    return rows


# --- exact settlement of flagged pairs --------------------------------------

def _in_closed(curve: Curve, q: int, p1: int) -> bool:
    x = Fraction(p1, q)
    return Fraction(curve.a) <= x <= Fraction(curve.b)


def _near_resolve(curve: Curve, delta: float, reduced: bool, rows):
    """Settle flagged (q, p1, code) pairs from the near count.

    Membership in the closed interval is always decidable exactly.  The
    err-vs-delta comparison is exact for polynomial curves; for analytic
    curves the pair stays excluded and is reported as ambiguous.
    """
    extra = 0
    ambiguous = 0
    d = Fraction(delta)
    for q, p1, _code in rows:
        if not _in_closed(curve, q, p1):
            continue
        if reduced and math.gcd(p1, q) != 1:
            continue
        if not curve.exact:
            ambiguous += 1
            continue
        v = q * curve.f_frac(Fraction(p1, q))
        n0 = math.floor(v)
        r = v - n0
        if r > Fraction(1, 2) or (r == Fraction(1, 2) and n0 % 2):
            n0 += 1
        if abs(v - n0) < d:
            extra += 1
    return extra, ambiguous


def _window_resolve(curve: Curve, wx: float, wy: float, rows):
    """Settle flagged (q, p1) window pairs from the block counts.

    Window-meets-interval is decidable exactly for any curve; the certified
    p2 interval (q(f(x_lo) - wy), q(f(x_hi) + wy)) is exact for polynomial
    curves only.
    """
    extra = 0
    ambiguous = 0
    a, b = Fraction(curve.a), Fraction(curve.b)
    fwx, fwy = Fraction(wx), Fraction(wy)
    for q, p1 in rows:
        cx = Fraction(p1, q)
        if not (cx + fwx > a and cx - fwx < b):
            continue
        if not curve.exact:
            ambiguous += 1
            continue
        xl = min(max(cx - fwx, a), b)
        xh = min(max(cx + fwx, a), b)
        lo = q * (curve.f_frac(xl) - fwy)
        hi = q * (curve.f_frac(xh) + fwy)
        extra += max(0, math.ceil(hi) - math.floor(lo) - 1)
    return extra, ambiguous


# --- public counters ---------------------------------------------------------

def count_near_curve(curve: Curve, Q: int, delta: float,
                     mode: str = MODE_TRIPLES, threads=None) -> CountReport:
    if not 0 < delta < 0.5:
        raise CountError("delta must lie in (0, 1/2) so the nearest p2 is unique")
    if Q < 1:
        raise CountError("Q must be >= 1")
    if mode not in (MODE_TRIPLES, MODE_REDUCED):
        raise CountError(f"unknown mode {mode!r}")
    reduced = mode == MODE_REDUCED
    kind, coeffs, _, a, b, _, _ = curve.kernel_params()
    nthreads = resolve_threads(threads)

    parts = run_chunks(
        lambda lo, hi: _kernels.near_count_chunk(kind, coeffs, a, b, lo, hi,
                                                 delta, reduced),
        chunk_ranges(1, Q), nthreads)
    count = sum(p[0] for p in parts)
    extra, ambiguous = _near_resolve(curve, delta, reduced,
                                     _sorted_rows([p[1] for p in parts]))
    count += extra
    predicted = delta * Q ** 3
    return CountReport(count, predicted, count / predicted, mode, ambiguous)


def _block_windows(curve: Curve, t: int, wx: float, wy: float, threads,
                   predicted: float, mode: str) -> CountReport:
    kind, coeffs, _, a, b, _, _ = curve.kernel_params()
    nthreads = resolve_threads(threads)
    parts = run_chunks(
        lambda lo, hi: _kernels.window_count_chunk(kind, coeffs, a, b, lo, hi,
                                                   wx, wy),
        chunk_ranges(2 ** t, 2 ** (t + 1) - 1), nthreads)
    count = sum(p[0] for p in parts)
    extra, ambiguous = _window_resolve(curve, wx, wy,
                                       _sorted_rows([p[1] for p in parts]))
    count += extra
    return CountReport(count, predicted, count / predicted, mode, ambiguous)


def gamma_t(psi: ApproxFn, t: int) -> float:
    return math.ldexp(math.sqrt(2.0 * float(psi.eval(2 ** t))), -t)


def count_block_mult(curve: Curve, psi: ApproxFn, t: int, m: int,
                     threads=None) -> CountReport:
    if t < 1:
        raise CountError("t must be >= 1")
    psi_t = float(psi.eval(2 ** t))
    g = gamma_t(psi, t)
    wx = math.ldexp(g, m)
    wy = math.ldexp(g, -m)
    predicted = math.ldexp(math.sqrt(psi_t), 2 * t + abs(m))
    return _block_windows(curve, t, wx, wy, threads, predicted, MODE_MULT)


def count_block_sim(curve: Curve, psi: ApproxFn, phi: ApproxFn, t: int,
                    threads=None) -> CountReport:
    if t < 1:
        raise CountError("t must be >= 1")
    psi_t = float(psi.eval(2 ** t))
    phi_t = float(phi.eval(2 ** t))
    if psi_t < phi_t:
        raise CountError(
            "psi must dominate phi on the block; swap the pair "
            "(or reduce via sim_ordered, which takes max/min pointwise)")
    wx = math.ldexp(psi_t, -t)
    wy = math.ldexp(phi_t, -t)
    predicted = math.ldexp(psi_t, 2 * t)
    return _block_windows(curve, t, wx, wy, threads, predicted, MODE_SIM)
