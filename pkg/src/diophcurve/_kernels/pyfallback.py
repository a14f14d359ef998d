"""Vectorized numpy kernels (fallback backend).

Each function processes one chunk of denominators [q_lo, q_hi] and returns
plain ints/arrays so results can be folded deterministically by the caller.
Both backends share these signatures and decision rules exactly:

- All defining inequalities are strict, evaluated in binary64.
- Any strict comparison landing within 2^-46 * max(1, |value|) of equality
  is not decided here: the pair is excluded from the returned count and
  reported in the flags array for the caller to settle (exactly for
  polynomial curves, by documented exclusion otherwise).
- Integer counts in an open interval (L, U) use ceil(U) - floor(L) - 1.

Counts are exact given resolved flags; floating sums (Hausdorff/Lebesgue)
may differ between backends in the last bits because accumulation order and
pow implementations differ.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

KIND_POLY = 0
KIND_CIRCLE = 1
KIND_HYPERBOLA = 2

_BAND_EXP = -46
_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)

_I64 = lambda v: np.asarray(v, dtype=np.int64)


def _band(v):
    return np.ldexp(np.maximum(1.0, np.abs(v)), _BAND_EXP)


def _f(kind, coeffs, x):
    if kind == KIND_POLY:
        acc = np.zeros_like(x)
        for c in coeffs[::-1]:
            acc = acc * x + c
        return acc
    if kind == KIND_CIRCLE:
        return 1.0 - np.sqrt(1.0 - x * x)
    return np.sqrt(x * x - 1.0)


def _fprime(kind, coeffs, x):
    if kind == KIND_POLY:
        acc = np.zeros_like(x)
        for k in range(len(coeffs) - 1, 0, -1):
            acc = acc * x + k * coeffs[k]
        return acc
    if kind == KIND_CIRCLE:
        return x / np.sqrt(1.0 - x * x)
    return x / np.sqrt(x * x - 1.0)


def _finv(kind, coeffs, a, b, d2sign, y):
    """Preimage of y (already clipped into [f(a), f(b)]) under increasing f."""
    if kind == KIND_CIRCLE:
        return np.clip(np.sqrt(np.maximum(0.0, y * (2.0 - y))), a, b)
    if kind == KIND_HYPERBOLA:
        return np.clip(np.sqrt(1.0 + y * y), a, b)
    n = len(coeffs)
    if n <= 2:
        return np.clip((y - coeffs[0]) / coeffs[1], a, b)
    if n == 3:
        c0, c1, c2 = coeffs
        disc = np.maximum(c1 * c1 - 4.0 * c2 * (c0 - y), 0.0)
        return np.clip((-c1 + np.sqrt(disc)) / (2.0 * c2), a, b)
    # monotone Newton from the safe end (convex: from b, concave: from a)
    x = np.full_like(y, b if d2sign > 0 else a)
    for _ in range(12):
        x = np.clip(x - (_f(kind, coeffs, x) - y) / _fprime(kind, coeffs, x), a, b)
    return x


def _flatten(lo, hi):
    """Concatenate the integer ranges [lo_i, hi_i]; returns (values, row index)."""
    counts = np.maximum(hi - lo + 1, 0)
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    rows = np.repeat(np.arange(len(lo), dtype=np.int64), counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    vals = np.arange(total, dtype=np.int64) - np.repeat(starts, counts) + np.repeat(lo, counts)
    return vals, rows


# --- counting --------------------------------------------------------------

def near_count_chunk(kind, coeffs, a, b, q_lo, q_hi, delta, reduced):
    """Triples (q, p1, nearest p2) with p1/q in [a, b] and |q f(p1/q) - p2| < delta.

    Flag codes: 1 = p1 membership within the band, 2 = err-vs-delta within
    the band.  Flagged pairs contribute nothing to the returned count.
    """
    qs = np.arange(q_lo, q_hi + 1, dtype=np.int64)
    va = qs * a
    vb = qs * b
    p1, rows = _flatten(_I64(np.ceil(va)) - 1, _I64(np.floor(vb)) + 1)
    q = qs[rows]
    vaf = va[rows]
    vbf = vb[rows]

    d_lo = p1 - vaf
    d_hi = vbf - p1
    border = (np.abs(d_lo) <= _band(vaf)) | (np.abs(d_hi) <= _band(vbf))
    inside = (d_lo >= 0) & (d_hi >= 0) & ~border
    if reduced:
        inside &= np.gcd(p1, q) == 1

    x = p1 / q
    tv = q * _f(kind, coeffs, np.clip(x, a, b))
    p2 = np.rint(tv)
    err = np.abs(tv - p2)
    amb = inside & (np.abs(err - delta) <= _band(tv))
    hit = inside & ~amb & (err < delta)

    flagged = border | amb
    flags = np.stack(
        [q[flagged], p1[flagged], np.where(border[flagged], 1, 2)], axis=1
    ) if np.any(flagged) else np.empty((0, 3), dtype=np.int64)
    return int(np.count_nonzero(hit)), flags


def _window_scan(kind, coeffs, a, b, qs, wx, wy):
    """Shared (q, p1) window certification; returns per-pair arrays.

    A pair certifies when its x-window (p1/q - wx, p1/q + wx) meets [a, b];
    the certified p2 for that pair are the integers in the open interval
    (q(f(x_lo) - wy), q(f(x_hi) + wy)) over the clipped window [x_lo, x_hi].
    """
    p1, rows = _flatten(_I64(np.floor(qs * (a - wx))), _I64(np.ceil(qs * (b + wx))))
    q = qs[rows]
    cx = p1 / q
    t1 = (cx + wx) - a
    t2 = b - (cx - wx)
    tol = _band(cx)
    border = (np.abs(t1) <= tol) | (np.abs(t2) <= tol)
    ok = (t1 > 0) & (t2 > 0) & ~border

    xl = np.clip(cx - wx, a, b)
    xh = np.clip(cx + wx, a, b)
    L = q * (_f(kind, coeffs, xl) - wy)
    U = q * (_f(kind, coeffs, xh) + wy)
    lu_band = (np.abs(L - np.rint(L)) <= _band(L)) | (np.abs(U - np.rint(U)) <= _band(U))
    flagged = border | (ok & lu_band)
    counted = ok & ~lu_band
    p2_lo = _I64(np.floor(L)) + 1
    p2_hi = _I64(np.ceil(U)) - 1
    n = np.where(counted, np.maximum(p2_hi - p2_lo + 1, 0), 0)
    return q, p1, counted, flagged, xl, xh, p2_lo, p2_hi, n


def window_count_chunk(kind, coeffs, a, b, q_lo, q_hi, wx, wy):
    """Certified triple count for one dyadic window geometry."""
    qs = np.arange(q_lo, q_hi + 1, dtype=np.int64)
    q, p1, counted, flagged, _, _, _, _, n = _window_scan(kind, coeffs, a, b, qs, wx, wy)
    flags = np.stack([q[flagged], p1[flagged]], axis=1) if np.any(flagged) \
        else np.empty((0, 2), dtype=np.int64)
    return int(n.sum()), flags


# --- covers ----------------------------------------------------------------

def _rect_pieces(kind, coeffs, a, b, fa, fb, d2sign, q, cx_lo, cx_hi, p2, rows, wy, k1):
    qq = q[rows]
    cy = p2 / qq
    yl = np.clip(cy - wy, fa, fb)
    yh = np.clip(cy + wy, fa, fb)
    xl = np.maximum(cx_lo[rows], _finv(kind, coeffs, a, b, d2sign, yl))
    xh = np.minimum(cx_hi[rows], _finv(kind, coeffs, a, b, d2sign, yh))
    xh = np.maximum(xh, xl)
    return xl, xh, (xh - xl) * k1


def rect_cover_sim_chunk(kind, coeffs, a, b, fa, fb, c1, d2sign,
                         q_lo, q_hi, wx, wy, s_vals, emit):
    """Rectangle cover pieces for one block chunk (shared window geometry)."""
    k1 = np.sqrt(1.0 + c1 * c1)
    qs = np.arange(q_lo, q_hi + 1, dtype=np.int64)
    q, p1, counted, flagged, xl, xh, p2_lo, p2_hi, n = _window_scan(
        kind, coeffs, a, b, qs, wx, wy)
    sel = counted & (n > 0)
    p2, rows = _flatten(p2_lo[sel], p2_hi[sel])
    exl, exh, d = _rect_pieces(kind, coeffs, a, b, fa, fb, d2sign,
                               q[sel], xl[sel], xh[sel], p2, rows, wy, k1)
    hsums = np.array([float(np.sum(d ** s)) for s in s_vals])
    flags = np.stack([q[flagged], p1[flagged]], axis=1) if np.any(flagged) \
        else np.empty((0, 2), dtype=np.int64)
    elems = (q[sel][rows], p1[sel][rows], p2, exl, exh) if emit else None
    return int(n.sum()), hsums, float(np.sum(d)), elems, flags


def rect_cover_mult_chunk(kind, coeffs, a, b, fa, fb, c1, d2sign, f2max,
                          q_lo, q_hi, gamma, m_lo, m_hi, s_vals, emit):
    """Case-(a) rectangles for every m in [m_lo, m_hi] over one chunk.

    The compiled backend prunes the m loop per (q, p1) using the necessary
    condition dist(q f(p1/q), Z) < q(f'(p1/q) wx + f''max wx^2 + wy); here the
    full per-m window scan is vectorized instead.  Counts agree exactly.
    """
    k1 = np.sqrt(1.0 + c1 * c1)
    qs = np.arange(q_lo, q_hi + 1, dtype=np.int64)
    count = 0
    hsums = np.zeros(len(s_vals))
    lsum = 0.0
    flags_parts = []
    elems_parts = []
    for m in range(m_lo, m_hi + 1):
        wx = np.ldexp(gamma, m)
        wy = np.ldexp(gamma, -m)
        q, p1, counted, flagged, xl, xh, p2_lo, p2_hi, n = _window_scan(
            kind, coeffs, a, b, qs, wx, wy)
        sel = counted & (n > 0)
        p2, rows = _flatten(p2_lo[sel], p2_hi[sel])
        exl, exh, d = _rect_pieces(kind, coeffs, a, b, fa, fb, d2sign,
                                   q[sel], xl[sel], xh[sel], p2, rows, wy, k1)
        count += int(n.sum())
        for j, s in enumerate(s_vals):
            hsums[j] += float(np.sum(d ** s))
        lsum += float(np.sum(d))
        if np.any(flagged):
            mm = np.full(int(np.count_nonzero(flagged)), m, dtype=np.int64)
            flags_parts.append(np.stack([q[flagged], p1[flagged], mm], axis=1))
        if emit and len(p2):
            mcol = np.full(len(p2), m, dtype=np.int64)
            elems_parts.append((q[sel][rows], p1[sel][rows], p2, mcol, exl, exh))
    flags = np.concatenate(flags_parts) if flags_parts else np.empty((0, 3), dtype=np.int64)
    elems = None
    if emit:
        elems = tuple(np.concatenate([p[i] for p in elems_parts]) if elems_parts
                      else np.empty(0, dtype=np.int64 if i < 4 else np.float64)
                      for i in range(6))
    return count, hsums, lsum, elems, flags


def strip_cover_chunk(kind, coeffs, a, b, fa, fb, c1, d2sign,
                      q_lo, q_hi, w, s_vals, emit):
    """Case-(b) strips: vertical around p1/q, horizontal around p2/q pulled back.

    A strip is emitted whenever its open window meets [a, b] (vertical) or
    [f(a), f(b)] (horizontal); the piece is the clipped window, so every
    emitted piece has positive width.
    """
    k1 = np.sqrt(1.0 + c1 * c1)
    qs = np.arange(q_lo, q_hi + 1, dtype=np.int64)

    # vertical strips: |x - p1/q| < w
    p1, rows = _flatten(_I64(np.floor(qs * (a - w))), _I64(np.ceil(qs * (b + w))))
    q1 = qs[rows]
    cx = p1 / q1
    tol = _band(cx)
    border_x = (np.abs((cx + w) - a) <= tol) | (np.abs(b - (cx - w)) <= tol)
    ok_x = ((cx + w) > a) & ((cx - w) < b) & ~border_x
    xl1 = np.clip(cx - w, a, b)
    xh1 = np.clip(cx + w, a, b)
    d1 = np.where(ok_x, (xh1 - xl1) * k1, 0.0)

    # horizontal strips: |y - p2/q| < w, pulled back through the inverse
    p2, rows2 = _flatten(_I64(np.floor(qs * (fa - w))), _I64(np.ceil(qs * (fb + w))))
    q2 = qs[rows2]
    cy = p2 / q2
    tol2 = _band(cy)
    border_y = (np.abs((cy + w) - fa) <= tol2) | (np.abs(fb - (cy - w)) <= tol2)
    ok_y = ((cy + w) > fa) & ((cy - w) < fb) & ~border_y
    yl = np.clip(cy - w, fa, fb)
    yh = np.clip(cy + w, fa, fb)
    xl2 = _finv(kind, coeffs, a, b, d2sign, yl)
    xh2 = np.maximum(_finv(kind, coeffs, a, b, d2sign, yh), xl2)
    d2 = np.where(ok_y, (xh2 - xl2) * k1, 0.0)

    hsums = np.array([float(np.sum(d1[ok_x] ** s)) + float(np.sum(d2[ok_y] ** s))
                      for s in s_vals])
    lsum = float(np.sum(d1[ok_x])) + float(np.sum(d2[ok_y]))

    fparts = []
    if np.any(border_x):
        one = np.ones(int(np.count_nonzero(border_x)), dtype=np.int64)
        fparts.append(np.stack([one, q1[border_x], p1[border_x]], axis=1))
    if np.any(border_y):
        two = np.full(int(np.count_nonzero(border_y)), 2, dtype=np.int64)
        fparts.append(np.stack([two, q2[border_y], p2[border_y]], axis=1))
    flags = np.concatenate(fparts) if fparts else np.empty((0, 3), dtype=np.int64)

    elems = None
    if emit:
        src = np.concatenate([np.ones(int(ok_x.sum()), dtype=np.int64),
                              np.full(int(ok_y.sum()), 2, dtype=np.int64)])
        elems = (src,
                 np.concatenate([q1[ok_x], q2[ok_y]]),
                 np.concatenate([p1[ok_x], p2[ok_y]]),
                 np.concatenate([xl1[ok_x], xl2[ok_y]]),
                 np.concatenate([xh1[ok_x], xh2[ok_y]]))
    return (int(np.count_nonzero(ok_x)), int(np.count_nonzero(ok_y)),
            hsums, lsum, elems, flags)


# --- hit scans -------------------------------------------------------------

def measure_chunk(kind, coeffs, xs, q_lo, q_hi, th1, th2, mult):
    """Number of grid points x with at least one hit in [q_lo, q_hi].

    th1/th2 are the per-q thresholds (psi values) indexed by q - q_lo.
    Boundary bands are not applied here: empirical measures tolerate
    measure-zero boundary effects by design.
    """
    qs = np.arange(q_lo, q_hi + 1, dtype=np.float64)
    ys = _f(kind, coeffs, xs)
    hits = 0
    for x, y in zip(xs, ys):
        e1 = np.abs(x * qs - np.rint(x * qs))
        e2 = np.abs(y * qs - np.rint(y * qs))
        cond = (e1 * e2 < th1) if mult else ((e1 < th1) & (e2 < th2))
        hits += bool(np.any(cond))
    return hits


_PHI = np.uint64(0x9E3779B97F4A7C15)


def _splitmix(z):
    z = (z + _PHI) & _M64
    z ^= z >> np.uint64(30)
    z = (z * np.uint64(0xBF58476D1CE4E5B9)) & _M64
    z ^= z >> np.uint64(27)
    z = (z * np.uint64(0x94D049BB133111EB)) & _M64
    z ^= z >> np.uint64(31)
    return z


def unit_coords(seed, i_lo, i_hi, n_dim):
    """Deterministic uniforms in [0,1): coordinate j of sample i is
    splitmix64(seed + PHI*(i*n_dim + j + 1)) / 2^64."""
    idx = np.arange(i_lo * n_dim + 1, i_hi * n_dim + 1, dtype=np.uint64)
    z = (np.uint64(seed) + _PHI * idx) & _M64
    return (_splitmix(z) / 18446744073709551616.0).reshape(i_hi - i_lo, n_dim)


def mc_chunk(seed, i_lo, i_hi, n_dim, q_lo, q_hi, th, gallagher):
    """Samples in [i_lo, i_hi) with at least one q in [q_lo, q_hi] hitting.

    th has shape (n_dim, nq) for the per-coordinate system and (1, nq) for
    the product system (threshold already raised to the n-th power).
    """
    pts = unit_coords(seed, i_lo, i_hi, n_dim)
    alive = np.ones(len(pts), dtype=bool)
    for qi, q in enumerate(range(q_lo, q_hi + 1)):
        if not alive.any():
            break
        v = q * pts[alive]
        e = np.abs(v - np.rint(v))
        if gallagher:
            hit = np.prod(e, axis=1) < th[0, qi]
        else:
            hit = np.all(e < th[:, qi].reshape(1, -1), axis=1)
        idx = np.nonzero(alive)[0]
        alive[idx[hit]] = False
    return int(len(pts) - np.count_nonzero(alive))
