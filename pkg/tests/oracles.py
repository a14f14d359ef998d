"""Exact brute-force oracles for the counting and cover tests.

Everything here is deliberately slow and simple: plain Python loops over
(q, p1, p2) with Fraction arithmetic throughout, no numpy, no code shared
with the library kernels.  Window half-widths enter as binary64 values (the
same values the library derives), converted exactly via Fraction(float); all
decisions made from them are exact, so an oracle count is the ground truth
for the library's resolved count.

Only exact-rational curves (polynomials with float coefficients) are
supported, and the arc must be increasing; that covers the parabola and the
cubic from the catalog.
"""

import math
from fractions import Fraction


def _interval(curve):
    return Fraction(curve.a), Fraction(curve.b)


def near_count(curve, Q, delta, reduced=False):
    """Triples (q <= Q, p1/q in [a,b], nearest p2) with |q f(p1/q) - p2| < delta."""
    assert curve.exact
    a, b = _interval(curve)
    dl = Fraction(delta)
    count = 0
    for q in range(1, Q + 1):
        for p1 in range(math.ceil(q * a), math.floor(q * b) + 1):
            if reduced and math.gcd(p1, q) != 1:
                continue
            v = q * curve.f_frac(Fraction(p1, q))
            fr = v - math.floor(v)
            if min(fr, 1 - fr) < dl:
                count += 1
    return count


def near_error_table(curve, q_max):
    """Sorted exact errors per q, for sweeping many delta thresholds at once.

    Returns {q: (all_errs, reduced_errs)} with each list ascending; the
    number of triples counted by near_count(curve, Q, delta, reduced) equals
    sum over q <= Q of bisect_left(errs[q], Fraction(delta)) because the
    defining inequality is strict.
    """
    assert curve.exact
    a, b = _interval(curve)
    table = {}
    for q in range(1, q_max + 1):
        errs, errs_red = [], []
        for p1 in range(math.ceil(q * a), math.floor(q * b) + 1):
            v = q * curve.f_frac(Fraction(p1, q))
            fr = v - math.floor(v)
            e = min(fr, 1 - fr)
            errs.append(e)
            if math.gcd(p1, q) == 1:
                errs_red.append(e)
        table[q] = (sorted(errs), sorted(errs_red))
    return table


def window_triples(curve, t, wx, wy):
    """Certified (q, p1, p2) for uniform open windows over 2^t <= q < 2^(t+1).

    A pair (q, p1) certifies when the open window (p1/q - wx, p1/q + wx)
    meets [a, b]; its p2 are the integers strictly inside
    (q(f(x_lo) - wy), q(f(x_hi) + wy)) for the clipped window [x_lo, x_hi].
    """
    assert curve.exact
    a, b = _interval(curve)
    fwx, fwy = Fraction(wx), Fraction(wy)
    out = []
    for q in range(2 ** t, 2 ** (t + 1)):
        for p1 in range(math.floor(q * (a - fwx)) - 1,
                        math.ceil(q * (b + fwx)) + 2):
            cx = Fraction(p1, q)
            if not (cx + fwx > a and cx - fwx < b):
                continue
            xl = min(max(cx - fwx, a), b)
            xh = min(max(cx + fwx, a), b)
            lo = q * (curve.f_frac(xl) - fwy)
            hi = q * (curve.f_frac(xh) + fwy)
            for p2 in range(math.floor(lo) + 1, math.ceil(hi)):
                out.append((q, p1, p2))
    return out


def strip_keys(curve, t, w):
    """(source, q, index) of every strip whose open window meets the arc box.

    Vertical strips |x - p1/q| < w are tested against (a, b); horizontal
    strips |y - p2/q| < w against (f(a), f(b)), both strictly, with the
    float endpoint values the library also uses.
    """
    assert curve.exact
    a, b = _interval(curve)
    fa = Fraction(float(curve.f(curve.a)))
    fb = Fraction(float(curve.f(curve.b)))
    assert fa < fb, "oracle expects an increasing arc"
    fw = Fraction(w)
    out = []
    for q in range(2 ** t, 2 ** (t + 1)):
        for p1 in range(math.floor(q * (a - fw)) - 1,
                        math.ceil(q * (b + fw)) + 2):
            c = Fraction(p1, q)
            if c + fw > a and c - fw < b:
                out.append(("StripX", q, p1))
        for p2 in range(math.floor(q * (fa - fw)) - 1,
                        math.ceil(q * (fb + fw)) + 2):
            c = Fraction(p2, q)
            if c + fw > fa and c - fw < fb:
                out.append(("StripY", q, p2))
    return out


def _case_a_m_max(t, psi_t, s):
    """Largest |m| kept for balanced rectangles; -1 when even m = 0 fails."""
    if 1.0 < t * math.sqrt(psi_t):
        return -1
    mm = 0
    while mm < 64 and math.ldexp(1.0, -(mm + 1)) >= t * math.sqrt(psi_t):
        mm += 1
    cap = math.floor(t * (2.0 - s) / (2.0 * s) + math.log2(t) / (2.0 * s) + 2.0)
    return min(mm, cap)


def cover_mult_keys(curve, psi, t, s):
    """(source, q, p1, p2, m) keys of the multiplicative cover of one block."""
    psi_t = float(psi.eval(2.0 ** t))
    gamma = math.ldexp(math.sqrt(2.0 * psi_t), -t)
    keys = []
    M = _case_a_m_max(t, psi_t, s)
    for m in range(-M, M + 1):
        for q, p1, p2 in window_triples(curve, t, math.ldexp(gamma, m),
                                        math.ldexp(gamma, -m)):
            keys.append(("RectA", q, p1, p2, m))
    w = 2.0 * t * psi_t / 2.0 ** t
    for src, q, idx in strip_keys(curve, t, w):
        p1 = idx if src == "StripX" else None
        p2 = idx if src == "StripY" else None
        keys.append((src, q, p1, p2, None))
    return keys


def cover_sim_keys(curve, psi, phi, t):
    """(source, q, p1, p2, m) keys of the simultaneous cover of one block."""
    psi_t = float(psi.eval(2.0 ** t))
    phi_t = float(phi.eval(2.0 ** t))
    wx = psi_t / 2.0 ** t
    wy = phi_t / 2.0 ** t
    return [("RectSim", q, p1, p2, None)
            for q, p1, p2 in window_triples(curve, t, wx, wy)]


def element_keys(elements):
    """Library CoverElement list reduced to comparable keys."""
    return [(e.source, e.q, e.p1, e.p2, e.m) for e in elements]


def key_sort(keys):
    none = -(10 ** 9)
    return sorted(keys, key=lambda k: (k[1], k[0],
                                       k[2] if k[2] is not None else none,
                                       k[3] if k[3] is not None else none,
                                       k[4] if k[4] is not None else none))
