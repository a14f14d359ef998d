"""Covers of the dyadic-block approximable sets, and their s-sums.

Multiplicative blocks are covered two ways at once, following the case split
on the m-index: balanced rectangles RectA(q, p1, p2, m) with half-widths
2^m gamma_t by 2^-m gamma_t for every m that is both CaseA and within the
truncation bound, plus degenerate strips StripX(q, p1) / StripY(q, p2) of
half-width 2 t psi(2^t)/2^t that absorb the unbalanced hits.  Simultaneous
blocks use fixed rectangles RectSim(q, p1, p2).  Every element is reduced to
its x-interval on the curve; diameter is the chord bound.

Two evaluation paths share the same kernels:

- build_cover_mult / build_cover_sim materialize the element list for one
  block (guarded at 1e8 predicted elements);
- tail_sum aggregates summaries over t in [n, T] without materializing,
  guarded by a total streamed budget of 1e10 predicted elements.

Sums depend on float accumulation order, so the two paths agree to ~1e-12
relative; element counts agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _kernels
from ._kernels import pyfallback as _ref
from .approx import ApproxFn, MultFloor
from .counting import chunk_ranges, resolve_threads, run_chunks
from .curve import Curve
from .limsup import m_bound_case_a

SRC_RECT_A = "RectA"
SRC_STRIP_X = "StripX"
SRC_STRIP_Y = "StripY"
SRC_RECT_SIM = "RectSim"
_SRC_RANK = {SRC_RECT_A: 0, SRC_STRIP_X: 1, SRC_STRIP_Y: 2, SRC_RECT_SIM: 3}

GUARD_MATERIALIZE = 1e8
GUARD_STREAM = 1e10


class CoverError(ValueError):
    pass


class ResourceGuardError(RuntimeError):
    """Refusal to run a block whose predicted element count is too large.

    predictions: list of (t, predicted_elements) that broke the budget.
    """

    def __init__(self, message: str, predictions):
        super().__init__(message)
        self.predictions = list(predictions)


@dataclass(frozen=True)
class CoverElement:
    t: int
    source: str
    q: int
    p1: Optional[int]
    p2: Optional[int]
    m: Optional[int]
    x_lo: float
    x_hi: float
    diameter: float

    @property
    def x_interval(self):
        return (self.x_lo, self.x_hi)

    def sort_key(self):
        idx = self.p1 if self.p1 is not None else self.p2
        return (self.q, _SRC_RANK[self.source], idx,
                self.p2 if self.p2 is not None else -1,
                self.m if self.m is not None else 0)


@dataclass(frozen=True)
class PerT:
    t: int
    count: int
    hausdorff_sum: float
    lebesgue_sum: float


@dataclass(frozen=True)
class CoverSummary:
    t_range: tuple
    element_count: int
    s: float
    hausdorff_sum: float
    lebesgue_sum: float
    per_t_breakdown: tuple
    boundary_ambiguous: int = 0

    def to_json(self) -> dict:
        return {
            "t_range": list(self.t_range),
            "element_count": self.element_count,
            "s": self.s,
            "hausdorff_sum": self.hausdorff_sum,
            "lebesgue_sum": self.lebesgue_sum,
            "per_t_breakdown": [[e.t, e.count, e.hausdorff_sum, e.lebesgue_sum]
                                for e in self.per_t_breakdown],
            "boundary_ambiguous": self.boundary_ambiguous,
        }


# --- geometry helpers --------------------------------------------------------

def _params(curve: Curve):
    kind, coeffs, _, a, b, c1, _ = curve.kernel_params()
    fa, fb = curve.f(a), curve.f(b)
    k1 = math.sqrt(1.0 + c1 * c1)
    return kind, coeffs, a, b, fa, fb, c1, curve.d2_sign(), k1


def _finv1(kind, coeffs, a, b, d2s, y: float) -> float:
    return float(_ref._finv(kind, coeffs, a, b, d2s, np.float64(y)))


def _rect_piece(kind, coeffs, a, b, fa, fb, d2s, k1, q, p1, p2, wx, wy):
    cx = p1 / q
    xl = min(max(cx - wx, a), b)
    xh = min(max(cx + wx, a), b)
    cy = p2 / q
    yl = min(max(cy - wy, fa), fb)
    yh = min(max(cy + wy, fa), fb)
    exl = max(xl, _finv1(kind, coeffs, a, b, d2s, yl))
    exh = min(xh, _finv1(kind, coeffs, a, b, d2s, yh))
    if exh < exl:
        exh = exl
    return exl, exh, (exh - exl) * k1


def _strip_piece(kind, coeffs, a, b, fa, fb, d2s, k1, src, q, idx, w):
    c = idx / q
    if src == 1:
        xl = min(max(c - w, a), b)
        xh = min(max(c + w, a), b)
    else:
        yl = min(max(c - w, fa), fb)
        yh = min(max(c + w, fa), fb)
        xl = _finv1(kind, coeffs, a, b, d2s, yl)
        xh = max(_finv1(kind, coeffs, a, b, d2s, yh), xl)
    return xl, xh, (xh - xl) * k1


def _meets_open(lo: float, hi: float, center: Fraction, half: float) -> bool:
    """Exact decision of (center - half, center + half) meeting (lo, hi)."""
    return center + Fraction(half) > Fraction(lo) \
        and center - Fraction(half) < Fraction(hi)


def _exact_p2_range(curve: Curve, q: int, p1: int, wx: float, wy: float):
    """None if the window misses [a, b]; "ambiguous" when f is not exact;
    otherwise the certified open-interval p2 range."""
    a, b = Fraction(curve.a), Fraction(curve.b)
    cx = Fraction(p1, q)
    if not _meets_open(curve.a, curve.b, cx, wx):
        return None
    if not curve.exact:
        return "ambiguous"
    fwx = Fraction(wx)
    xl = min(max(cx - fwx, a), b)
    xh = min(max(cx + fwx, a), b)
    lo = q * (curve.f_frac(xl) - Fraction(wy))
    hi = q * (curve.f_frac(xh) + Fraction(wy))
    return range(math.floor(lo) + 1, math.ceil(hi))


# --- per-block accumulation ----------------------------------------------------

class _BlockAcc:
    """Counts, per-s Hausdorff sums, Lebesgue sum, elements, ambiguity."""

    def __init__(self, n_s: int, emit: bool):
        self.count = 0
        self.hsums = np.zeros(n_s)
        self.lsum = 0.0
        self.elements = [] if emit else None
        self.ambiguous = 0

    def add_sums(self, count, hsums, lsum):
        self.count += int(count)
        self.hsums += hsums
        self.lsum += float(lsum)

    def add_piece(self, s_vals, d):
        for j, s in enumerate(s_vals):
            self.hsums[j] += d ** s
        self.lsum += d
        self.count += 1


def _m_case_max(t: int, psi_t: float) -> int:
    """Largest |m| kept in CaseA: 2^(-|m|) >= t sqrt(psi(2^t)), ties kept.
    -1 when even m = 0 fails (CaseA empty)."""
    rhs = t * math.sqrt(psi_t)
    mm = 0
    while math.ldexp(1.0, -(mm + 1)) >= rhs and mm < 64:
        mm += 1
    return mm if math.ldexp(1.0, -mm) >= rhs else -1


def _m_abs_max(t: int, s: float, psi_t: float) -> int:
    """CaseA m-range bound: the case condition capped by the truncation
    m_bound_case_a(t, s) + 2.  -1 means no CaseA rectangles at all."""
    cap = math.floor(m_bound_case_a(t, s) + 2.0)
    return min(_m_case_max(t, psi_t), cap)


def _check_mult_floor(psi_t: float, s: float, t: int):
    floor_t = float(MultFloor(s).eval(2 ** t))
    if psi_t < floor_t:
        raise CoverError(
            f"psi(2^{t}) = {psi_t:.3e} is below the multiplicative floor "
            f"{floor_t:.3e} for s={s}; lift it with tilde_psi_mult(psi, s)")


def _predict_rect_mult(t: int, psi_t: float, M: int) -> float:
    if M < 0:
        return 0.0
    return math.ldexp(math.sqrt(psi_t), 2 * t) * (2.0 ** (M + 2) - 3.0)


def _predict_strips(curve: Curve, t: int, w: float) -> float:
    span = (curve.b - curve.a) + (curve.f(curve.b) - curve.f(curve.a)) + 4 * w
    return span * 1.5 * 4.0 ** t + 8.0 * 2.0 ** t


def _predict_rect_sim(t: int, psi_t: float) -> float:
    return math.ldexp(psi_t, 2 * t) + 4.0 * 2.0 ** t


def _sorted_flag_rows(parts, idx):
    return sorted(tuple(int(v) for v in row) for p in parts for row in p[idx])


def _mult_block(curve: Curve, psi: ApproxFn, s_vals, t: int, threads,
                emit: bool, s_groups=None):
    """One multiplicative block.  s_groups maps M -> list of s-indices; by
    default every s in s_vals shares the full M range of its own bound."""
    if t < 1:
        raise CoverError("t must be >= 1")
    psi_t = float(psi.eval(2 ** t))
    for s in s_vals:
        _check_mult_floor(psi_t, s, t)
    gamma = math.ldexp(math.sqrt(2.0 * psi_t), -t)
    w = math.ldexp(2.0 * t * psi_t, -t)
    kind, coeffs, a, b, fa, fb, c1, d2s, k1 = _params(curve)
    f2max = curve.d2_max_abs()
    nthreads = resolve_threads(threads)
    chunks = chunk_ranges(2 ** t, 2 ** (t + 1) - 1)

    if s_groups is None:
        s_groups = {}
        for j, s in enumerate(s_vals):
            s_groups.setdefault(_m_abs_max(t, s, psi_t), []).append(j)

    accs = {M: _BlockAcc(len(js), emit) for M, js in s_groups.items()}
    strip_acc = _BlockAcc(len(s_vals), emit)

    # CaseA rectangles, one kernel pass per distinct m-range
    for M, js in s_groups.items():
        if M < 0:
            continue
        sub = np.ascontiguousarray([s_vals[j] for j in js], dtype=np.float64)
        parts = run_chunks(
            lambda lo, hi, M=M, sub=sub: _kernels.rect_cover_mult_chunk(
                kind, coeffs, a, b, fa, fb, c1, d2s, f2max, lo, hi,
                gamma, -M, M, sub, emit),
            chunks, nthreads)
        acc = accs[M]
        for p in parts:
            acc.add_sums(p[0], p[1], p[2])
            if emit and p[3] is not None:
                qs, p1s, p2s, ms, xls, xhs = p[3]
                ds = (xhs - xls) * k1
                acc.elements.extend(
                    CoverElement(t, SRC_RECT_A, int(qi), int(pi), int(pj),
                                 int(mi), float(xl), float(xh), float(d))
                    for qi, pi, pj, mi, xl, xh, d
                    in zip(qs, p1s, p2s, ms, xls, xhs, ds))
        svs = [s_vals[j] for j in js]
        for q, p1, m in _sorted_flag_rows(parts, 4):
            wx = math.ldexp(gamma, m)
            wy = math.ldexp(gamma, -m)
            rng = _exact_p2_range(curve, q, p1, wx, wy)
            if rng is None:
                continue
            if rng == "ambiguous":
                acc.ambiguous += 1
                continue
            for p2 in rng:
                xl, xh, d = _rect_piece(kind, coeffs, a, b, fa, fb, d2s, k1,
                                        q, p1, p2, wx, wy)
                acc.add_piece(svs, d)
                if emit:
                    acc.elements.append(CoverElement(
                        t, SRC_RECT_A, q, p1, p2, m, xl, xh, d))

    # CaseB strips, s-independent geometry shared by all s values
    sv_all = np.ascontiguousarray(s_vals, dtype=np.float64)
    parts = run_chunks(
        lambda lo, hi: _kernels.strip_cover_chunk(
            kind, coeffs, a, b, fa, fb, c1, d2s, lo, hi, w, sv_all, emit),
        chunks, nthreads)
    for p in parts:
        strip_acc.add_sums(p[0] + p[1], p[2], p[3])
        if emit and p[4] is not None:
            srcs, qs, idxs, xls, xhs = p[4]
            ds = (xhs - xls) * k1
            strip_acc.elements.extend(
                CoverElement(t, SRC_STRIP_X if si == 1 else SRC_STRIP_Y,
                             int(qi), int(ii) if si == 1 else None,
                             int(ii) if si == 2 else None, None,
                             float(xl), float(xh), float(d))
                for si, qi, ii, xl, xh, d
                in zip(srcs, qs, idxs, xls, xhs, ds))
    for src, q, idx in _sorted_flag_rows(parts, 5):
        lo, hi = (a, b) if src == 1 else (fa, fb)
        if not _meets_open(lo, hi, Fraction(idx, q), w):
            continue
        xl, xh, d = _strip_piece(kind, coeffs, a, b, fa, fb, d2s, k1,
                                 src, q, idx, w)
        strip_acc.add_piece(list(s_vals), d)
        if emit:
            strip_acc.elements.append(CoverElement(
                t, SRC_STRIP_X if src == 1 else SRC_STRIP_Y, q,
                idx if src == 1 else None, idx if src == 2 else None,
                None, xl, xh, d))
    return accs, strip_acc, s_groups


def _sim_block(curve: Curve, psi: ApproxFn, phi: ApproxFn, s_vals, t: int,
               threads, emit: bool):
    if t < 1:
        raise CoverError("t must be >= 1")
    psi_t = float(psi.eval(2 ** t))
    phi_t = float(phi.eval(2 ** t))
    if psi_t < phi_t:
        raise CoverError("psi must dominate phi on the block; swap the pair "
                         "(sim_ordered reduces any pair to this form)")
    wx = math.ldexp(psi_t, -t)
    wy = math.ldexp(phi_t, -t)
    kind, coeffs, a, b, fa, fb, c1, d2s, k1 = _params(curve)
    nthreads = resolve_threads(threads)
    sv = np.ascontiguousarray(s_vals, dtype=np.float64)
    parts = run_chunks(
        lambda lo, hi: _kernels.rect_cover_sim_chunk(
            kind, coeffs, a, b, fa, fb, c1, d2s, lo, hi, wx, wy, sv, emit),
        chunk_ranges(2 ** t, 2 ** (t + 1) - 1), nthreads)
    acc = _BlockAcc(len(s_vals), emit)
    for p in parts:
        acc.add_sums(p[0], p[1], p[2])
        if emit and p[3] is not None:
            qs, p1s, p2s, xls, xhs = p[3]
            ds = (xhs - xls) * k1
            acc.elements.extend(
                CoverElement(t, SRC_RECT_SIM, int(qi), int(pi), int(pj), None,
                             float(xl), float(xh), float(d))
                for qi, pi, pj, xl, xh, d in zip(qs, p1s, p2s, xls, xhs, ds))
    for q, p1 in _sorted_flag_rows(parts, 4):
        rng = _exact_p2_range(curve, q, p1, wx, wy)
        if rng is None:
            continue
        if rng == "ambiguous":
            acc.ambiguous += 1
            continue
        for p2 in rng:
            xl, xh, d = _rect_piece(kind, coeffs, a, b, fa, fb, d2s, k1,
                                    q, p1, p2, wx, wy)
            acc.add_piece(list(s_vals), d)
            if emit:
                acc.elements.append(CoverElement(
                    t, SRC_RECT_SIM, q, p1, p2, None, xl, xh, d))
    return acc


# --- public API ----------------------------------------------------------------

def _guard_materialize(t, predicted):
    if predicted > GUARD_MATERIALIZE:
        raise ResourceGuardError(
            f"block t={t}: predicted {predicted:.3e} elements exceeds the "
            f"materialization guard {GUARD_MATERIALIZE:.0e}; use tail_sum "
            "(streaming) or a smaller t", [(t, predicted)])


def build_cover_mult(curve: Curve, psi: ApproxFn, s: float, t: int,
                     threads=None):
    """All cover elements for one multiplicative block, canonically sorted."""
    if not 0 < s <= 1:
        raise CoverError("s must lie in (0, 1]")
    psi_t = float(psi.eval(2 ** t))
    _check_mult_floor(psi_t, s, t)
    M = _m_abs_max(t, s, psi_t)
    w = math.ldexp(2.0 * t * psi_t, -t)
    _guard_materialize(t, _predict_rect_mult(t, psi_t, M)
                       + _predict_strips(curve, t, w))
    accs, strip_acc, _ = _mult_block(curve, psi, [s], t, threads, emit=True)
    elements = strip_acc.elements
    for acc in accs.values():
        elements.extend(acc.elements)
    elements.sort(key=CoverElement.sort_key)
    return elements


def build_cover_sim(curve: Curve, psi: ApproxFn, phi: ApproxFn, t: int,
                    threads=None):
    """All simultaneous-block rectangles, canonically sorted."""
    psi_t = float(psi.eval(2 ** t))
    _guard_materialize(t, _predict_rect_sim(t, psi_t))
    acc = _sim_block(curve, psi, phi, [1.0], t, threads, emit=True)
    acc.elements.sort(key=CoverElement.sort_key)
    return acc.elements


def summarize(elements, s: float) -> CoverSummary:
    """Hausdorff s-sum, Lebesgue sum and per-t breakdown of an element list."""
    if not 0 < s <= 1:
        raise CoverError("s must lie in (0, 1]")
    by_t = {}
    for e in elements:
        by_t.setdefault(e.t, []).append(e)
    breakdown = []
    for t in sorted(by_t):
        h = 0.0
        l = 0.0
        for e in by_t[t]:
            h += e.diameter ** s
            l += e.diameter
        breakdown.append(PerT(t, len(by_t[t]), h, l))
    count = 0
    h_tot = 0.0
    l_tot = 0.0
    for e in breakdown:
        count += e.count
        h_tot += e.hausdorff_sum
        l_tot += e.lebesgue_sum
    t_range = (breakdown[0].t, breakdown[-1].t) if breakdown else (0, -1)
    return CoverSummary(t_range, count, s, h_tot, l_tot, tuple(breakdown))


def tail_sum_multi(curve: Curve, psi: ApproxFn, mode: str, n: int, T: int,
                   s_list, phi: Optional[ApproxFn] = None, threads=None):
    """Streaming cover summaries for every s in s_list over blocks [n, T].

    One pass over each block serves every s whose m-range agrees, so probing
    several exponents costs barely more than one.
    """
    if n > T:
        raise CoverError("need n <= T")
    if mode not in ("mult", "sim"):
        raise CoverError(f"unknown mode {mode!r}")
    if mode == "sim" and phi is None:
        raise CoverError("sim mode needs phi")
    for s in s_list:
        if not 0 < s <= 1:
            raise CoverError("s must lie in (0, 1]")

    # refuse over-budget runs up front, with per-block predictions
    predictions = []
    total = 0.0
    for t in range(n, T + 1):
        psi_t = float(psi.eval(2 ** t))
        if mode == "mult":
            w = math.ldexp(2.0 * t * psi_t, -t)
            ms = {_m_abs_max(t, s, psi_t) for s in s_list}
            p = (_predict_strips(curve, t, w)
                 + sum(_predict_rect_mult(t, psi_t, M) for M in ms))
        else:
            p = _predict_rect_sim(t, psi_t)
        predictions.append((t, p))
        total += p
    if total > GUARD_STREAM:
        raise ResourceGuardError(
            f"blocks [{n}, {T}]: predicted {total:.3e} elements exceeds the "
            f"streaming budget {GUARD_STREAM:.0e}; shrink [n, T]", predictions)

    per_s_breakdown = [[] for _ in s_list]
    ambiguous = [0 for _ in s_list]
    for t in range(n, T + 1):
        if mode == "mult":
            accs, strip_acc, s_groups = _mult_block(
                curve, psi, list(s_list), t, threads, emit=False)
            for M, js in s_groups.items():
                acc = accs[M]
                for k, j in enumerate(js):
                    per_s_breakdown[j].append(PerT(
                        t, acc.count + strip_acc.count,
                        float(acc.hsums[k] + strip_acc.hsums[j]),
                        acc.lsum + strip_acc.lsum))
                    ambiguous[j] += acc.ambiguous
        else:
            acc = _sim_block(curve, psi, phi, list(s_list), t, threads,
                             emit=False)
            for j in range(len(s_list)):
                per_s_breakdown[j].append(PerT(
                    t, acc.count, float(acc.hsums[j]), acc.lsum))
                ambiguous[j] += acc.ambiguous

    out = []
    for j, s in enumerate(s_list):
        entries = per_s_breakdown[j]
        count = 0
        h_tot = 0.0
        l_tot = 0.0
        for e in entries:
            count += e.count
            h_tot += e.hausdorff_sum
            l_tot += e.lebesgue_sum
        out.append(CoverSummary((n, T), count, s, h_tot, l_tot,
                                tuple(entries), ambiguous[j]))
    return out


def tail_sum(curve: Curve, psi: ApproxFn, mode: str, n: int, T: int,
             s: Optional[float] = None, phi: Optional[ApproxFn] = None,
             threads=None) -> CoverSummary:
    """Aggregated cover summary over blocks t in [n, T] (streaming)."""
    if mode == "mult" and s is None:
        raise CoverError("mult mode needs s")
    return tail_sum_multi(curve, psi, mode, n, T,
                          [s if s is not None else 1.0], phi, threads)[0]
