"""Hit detection and dyadic bookkeeping for the limsup sets.

A "hit" at denominator q is a strict solution of the simultaneous system
||q x|| < psi1(q), ||q y|| < psi2(q) or of the multiplicative inequality
||q x|| ||q y|| < psi(q), with y = f(x) on the curve.  Hits at dyadic level
t are sliced by the m-index: the unique m with
2^(m-1) gamma_t <= |x - p1/q| < 2^m gamma_t, gamma_t = sqrt(2 psi(2^t))/2^t.
Balanced m (2^-|m| >= t sqrt(psi(2^t)), ties included) are CaseA, the rest
CaseB; exact rationals (err 0) fall outside the bracket and are tagged Exact.

empirical_tail_measure and mc_classical estimate how often points are hit:
on an equispaced grid along the curve, and for seeded uniform samples of the
unit cube (the independent-coordinates setting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .approx import ApproxFn
from .counting import MODE_MULT, MODE_SIM, resolve_threads, run_chunks
from .curve import Curve

CASE_A = "CaseA"
CASE_B = "CaseB"
CASE_EXACT = "Exact"

_GRID_CHUNK = 256
_SAMPLE_CHUNK = 4096


class DomainError(ValueError):
    pass


def dist_to_int(x):
    """||x||: distance to the nearest integer, in [0, 1/2]."""
    x = np.asarray(x, dtype=float)
    d = np.abs(x - np.rint(x))
    return float(d) if d.ndim == 0 else d


@dataclass(frozen=True)
class HitRecord:
    q: int
    p1: int
    p2: int
    err_x: float
    err_y: float
    product_err: float
    mode: str


def find_hits(curve: Curve, x: float, q_min: int, q_max: int, mode: str,
              psi1: ApproxFn, psi2: Optional[ApproxFn] = None):
    """All hits at x in increasing q; p1, p2 are the minimizing integers."""
    if not curve.a <= x <= curve.b:
        raise DomainError(f"x={x} outside [{curve.a}, {curve.b}]")
    if mode == MODE_SIM and psi2 is None:
        raise DomainError("Simultaneous mode needs psi2")
    y = curve.f(x)
    qs = np.arange(q_min, q_max + 1, dtype=np.int64)
    if len(qs) == 0:
        return []
    v1 = qs * x
    v2 = qs * y
    p1 = np.rint(v1)
    p2 = np.rint(v2)
    e1 = np.abs(v1 - p1)
    e2 = np.abs(v2 - p2)
    t1 = psi1.eval_array(qs)
    if mode == MODE_SIM:
        sel = (e1 < t1) & (e2 < psi2.eval_array(qs))
    elif mode == MODE_MULT:
        sel = e1 * e2 < t1
    else:
        raise DomainError(f"unknown mode {mode!r}")
    out = []
    for i in np.flatnonzero(sel):
        q = int(qs[i])
        ex = float(e1[i]) / q
        ey = float(e2[i]) / q
        out.append(HitRecord(q, int(p1[i]), int(p2[i]), ex, ey, ex * ey, mode))
    return out


# --- m-index -----------------------------------------------------------------

@dataclass(frozen=True)
class MIndex:
    m: Optional[int]
    t: int
    gamma_t: float
    case: str


def m_index(err_x: float, t: int, psi: ApproxFn) -> MIndex:
    """The unique m with 2^(m-1) gamma_t <= err_x < 2^m gamma_t.

    The float log only seeds the search; the bracket is then fixed up by
    direct ldexp comparisons, so the result is exact for binary64 inputs.
    """
    psi_t = float(psi.eval(2 ** t))
    g = math.ldexp(math.sqrt(2.0 * psi_t), -t)
    if err_x < 0:
        raise DomainError("err_x must be nonnegative")
    if err_x == 0:
        return MIndex(None, t, g, CASE_EXACT)
    m = 1 + math.floor(math.log2(err_x / g))
    while err_x < math.ldexp(g, m - 1):
        m -= 1
    while err_x >= math.ldexp(g, m):
        m += 1
    case = CASE_A if math.ldexp(1.0, -abs(m)) >= t * math.sqrt(psi_t) else CASE_B
    return MIndex(m, t, g, case)


def m_bound_case_a(t: int, s: float) -> float:
    """Truncation bound for CaseA |m|: t(2-s)/(2s) + log2(t)/(2s)."""
    if t < 1 or not 0 < s <= 1:
        raise DomainError("need t >= 1 and s in (0, 1]")
    return t * (2.0 - s) / (2.0 * s) + math.log2(t) / (2.0 * s)


# --- empirical measures --------------------------------------------------------

def empirical_tail_measure(curve: Curve, psi1: ApproxFn, psi2: Optional[ApproxFn],
                           mode: str, grid_size: int, n: int, Q: int,
                           threads=None) -> float:
    """Fraction of grid_size equispaced x in [a, b] hit by some q in [2^n, Q].

    The q range is never split (a point counts once no matter how many q hit
    it); parallelism goes over grid slices instead.
    """
    q_lo = 2 ** n
    if q_lo > Q:
        return 0.0
    if mode == MODE_SIM and psi2 is None:
        raise DomainError("Simultaneous mode needs psi2")
    mult = mode == MODE_MULT
    if not mult and mode != MODE_SIM:
        raise DomainError(f"unknown mode {mode!r}")
    kind, coeffs, _, a, b, _, _ = curve.kernel_params()
    xs = np.linspace(a, b, grid_size)
    qs = np.arange(q_lo, Q + 1, dtype=np.int64)
    th1 = np.ascontiguousarray(psi1.eval_array(qs), dtype=np.float64)
    th2 = (np.ascontiguousarray(psi2.eval_array(qs), dtype=np.float64)
           if not mult else th1)
    slices = [(i, min(i + _GRID_CHUNK, grid_size))
              for i in range(0, grid_size, _GRID_CHUNK)]
    parts = run_chunks(
        lambda lo, hi: _kernels.measure_chunk(
            kind, coeffs, np.ascontiguousarray(xs[lo:hi]), q_lo, Q,
            th1, th2, mult),
        slices, resolve_threads(threads))
    return sum(parts) / grid_size


def mc_classical(n_dim: int, kind: str, psis, samples: int, Q: int,
                 seed: int, q_min: int = 1, threads=None) -> float:
    """Fraction of seeded uniform samples in [0,1]^n_dim with a hit q <= Q.

    kind "khintchine": per-coordinate system ||q x_j|| < psi_j(q);
    kind "gallagher": product system prod_j ||q x_j|| < psi(q)^n_dim.
    Coordinates come from a counter-mode splitmix64, so sample i is the same
    whatever the chunking; q_min restricts to the tail of the q range.
    """
    if n_dim < 1:
        raise DomainError("n_dim must be >= 1")
    if seed < 0 or seed >= 2 ** 64:
        raise DomainError("seed must fit in 64 bits")
    qs = np.arange(q_min, Q + 1, dtype=np.int64)
    if len(qs) == 0:
        return 0.0
    if kind == "khintchine":
        ps = list(psis) if isinstance(psis, (list, tuple)) else [psis] * n_dim
        if len(ps) != n_dim:
            raise DomainError("khintchine needs one psi per coordinate")
        th = np.stack([p.eval_array(qs) for p in ps])
        gallagher = False
    elif kind == "gallagher":
        p = psis[0] if isinstance(psis, (list, tuple)) else psis
        th = p.eval_array(qs)[None, :] ** n_dim
        gallagher = True
    else:
        raise DomainError(f"unknown kind {kind!r}")
    th = np.ascontiguousarray(th, dtype=np.float64)
    slices = [(i, min(i + _SAMPLE_CHUNK, samples))
              for i in range(0, samples, _SAMPLE_CHUNK)]
    parts = run_chunks(
        lambda lo, hi: _kernels.mc_chunk(seed, lo, hi, n_dim, q_min, Q,
                                         th, gallagher),
        slices, resolve_threads(threads))
    return sum(parts) / samples
