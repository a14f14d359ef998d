# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels.

Semantics mirror pyfallback exactly: same strict inequalities, the same
2^-46 ambiguity band with flagged exclusions, the same open-interval integer
counts.  Counts agree with the fallback bit-for-bit (given resolved flags);
floating sums may differ in the last bits because accumulation order and pow
differ.

The multiplicative rectangle scan prunes the m loop per (q, p1) with the
necessary condition dist(q f(p1/q), Z) < q (f' wx + f''max wx^2 + wy), whose
right side is unimodal in m; candidates therefore form a prefix and a suffix
of the m range and are enumerated by walking in from both ends.  The margin
added to the right side strictly covers the float rounding of both sides, so
pruning never drops a certifiable triple.
"""

import numpy as np

from libc.math cimport ceil, fabs, floor, fmax, fmin, ldexp, rint, sqrt
from libc.math cimport pow as cpow
from libc.stdint cimport int64_t, uint64_t

BACKEND = "cython"


cdef inline double _band(double v) noexcept:
    return ldexp(fmax(1.0, fabs(v)), -46)


cdef inline double _dpow(double d, double s) noexcept:
    if s == 1.0:
        return d
    if s == 0.5:
        return sqrt(d)
    return cpow(d, s)


cdef inline double _feval(int kind, double[::1] c, double x) noexcept:
    cdef double acc = 0.0
    cdef Py_ssize_t k
    if kind == 0:
        for k in range(c.shape[0] - 1, -1, -1):
            acc = acc * x + c[k]
        return acc
    if kind == 1:
        return 1.0 - sqrt(1.0 - x * x)
    return sqrt(x * x - 1.0)


cdef inline double _fprime(int kind, double[::1] c, double x) noexcept:
    cdef double acc = 0.0
    cdef Py_ssize_t k
    if kind == 0:
        for k in range(c.shape[0] - 1, 0, -1):
            acc = acc * x + k * c[k]
        return acc
    if kind == 1:
        return x / sqrt(1.0 - x * x)
    return x / sqrt(x * x - 1.0)


cdef inline double _clip(double v, double lo, double hi) noexcept:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef inline double _finv(int kind, double[::1] c, double a, double b,
                         int d2sign, double y) noexcept:
    cdef double disc, x
    cdef int it
    if kind == 1:
        return _clip(sqrt(fmax(0.0, y * (2.0 - y))), a, b)
    if kind == 2:
        return _clip(sqrt(1.0 + y * y), a, b)
    if c.shape[0] <= 2:
        return _clip((y - c[0]) / c[1], a, b)
    if c.shape[0] == 3:
        disc = fmax(c[1] * c[1] - 4.0 * c[2] * (c[0] - y), 0.0)
        return _clip((-c[1] + sqrt(disc)) / (2.0 * c[2]), a, b)
    x = b if d2sign > 0 else a
    for it in range(12):
        x = _clip(x - (_feval(kind, c, x) - y) / _fprime(kind, c, x), a, b)
    return x


cdef inline int64_t _gcd(int64_t u, int64_t v) noexcept:
    cdef int64_t t
    if u < 0:
        u = -u
    if v < 0:
        v = -v
    while v:
        t = u % v
        u = v
        v = t
    return u


cdef class _Buf:
    """Growable int64/float64 column store for emitted elements."""
    cdef object arrs
    cdef list views_i
    cdef list views_f
    cdef Py_ssize_t n, cap, ni, nf

    def __init__(self, int ni, int nf):
        self.ni = ni
        self.nf = nf
        self.cap = 1024
        self.n = 0
        self.arrs = ([np.empty(self.cap, np.int64) for _ in range(ni)]
                     + [np.empty(self.cap, np.float64) for _ in range(nf)])
        self._rebind()

    cdef _rebind(self):
        self.views_i = [memoryview(a) for a in self.arrs[:self.ni]]
        self.views_f = [memoryview(a) for a in self.arrs[self.ni:]]

    cdef void _grow(self):
        self.cap *= 2
        self.arrs = [np.concatenate([a, np.empty(self.cap // 2, a.dtype)])
                     for a in self.arrs]
        self._rebind()

    cdef void push(self, int64_t* ivals, double* fvals):
        cdef Py_ssize_t j
        cdef int64_t[::1] vi
        cdef double[::1] vf
        if self.n == self.cap:
            self._grow()
        for j in range(self.ni):
            vi = self.views_i[j]
            vi[self.n] = ivals[j]
        for j in range(self.nf):
            vf = self.views_f[j]
            vf[self.n] = fvals[j]
        self.n += 1

    cdef object take(self):
        return tuple(a[:self.n].copy() for a in self.arrs)


cdef object _flag_array(list flags, int width):
    if flags:
        return np.asarray(flags, dtype=np.int64).reshape(-1, width)
    return np.empty((0, width), dtype=np.int64)


# --- counting --------------------------------------------------------------

def near_count_chunk(int kind, double[::1] coeffs, double a, double b,
                     int64_t q_lo, int64_t q_hi, double delta, bint reduced):
    cdef int64_t q, p1, p_lo, p_hi, count = 0
    cdef double va, vb, ba, bb, d_lo, d_hi, x, tv, err
    cdef list flags = []
    for q in range(q_lo, q_hi + 1):
        va = q * a
        vb = q * b
        ba = _band(va)
        bb = _band(vb)
        p_lo = <int64_t>ceil(va) - 1
        p_hi = <int64_t>floor(vb) + 1
        for p1 in range(p_lo, p_hi + 1):
            d_lo = p1 - va
            d_hi = vb - p1
            if fabs(d_lo) <= ba or fabs(d_hi) <= bb:
                flags.append((q, p1, 1))
                continue
            if d_lo < 0 or d_hi < 0:
                continue
            if reduced and _gcd(p1, q) != 1:
                continue
            x = _clip(p1 / <double>q, a, b)
            tv = q * _feval(kind, coeffs, x)
            err = fabs(tv - rint(tv))
            if fabs(err - delta) <= _band(tv):
                flags.append((q, p1, 2))
            elif err < delta:
                count += 1
    return count, _flag_array(flags, 3)


def window_count_chunk(int kind, double[::1] coeffs, double a, double b,
                       int64_t q_lo, int64_t q_hi, double wx, double wy):
    cdef int64_t q, p1, p_lo, p_hi, n, count = 0
    cdef double cx, t1, t2, tol, xl, xh, L, U
    cdef list flags = []
    for q in range(q_lo, q_hi + 1):
        p_lo = <int64_t>floor(q * (a - wx))
        p_hi = <int64_t>ceil(q * (b + wx))
        for p1 in range(p_lo, p_hi + 1):
            cx = p1 / <double>q
            t1 = (cx + wx) - a
            t2 = b - (cx - wx)
            tol = _band(cx)
            if fabs(t1) <= tol or fabs(t2) <= tol:
                flags.append((q, p1))
                continue
            if t1 <= 0 or t2 <= 0:
                continue
            xl = _clip(cx - wx, a, b)
            xh = _clip(cx + wx, a, b)
            L = q * (_feval(kind, coeffs, xl) - wy)
            U = q * (_feval(kind, coeffs, xh) + wy)
            if fabs(L - rint(L)) <= _band(L) or fabs(U - rint(U)) <= _band(U):
                flags.append((q, p1))
                continue
            n = (<int64_t>ceil(U) - 1) - (<int64_t>floor(L) + 1) + 1
            if n > 0:
                count += n
    return count, _flag_array(flags, 2)


# --- covers ----------------------------------------------------------------

cdef struct _Acc:
    int64_t count
    double lsum


cdef inline void _rect_p2_one(int kind, double[::1] coeffs, double a, double b,
                              double fa, double fb, int d2sign, double k1,
                              int64_t q, int64_t p1, int64_t m, int64_t p2,
                              double xl, double xh, double wy,
                              double[::1] s_vals, double[::1] hs,
                              _Acc* acc, _Buf buf):
    cdef double cy, yl, yh, exl, exh, d
    cdef Py_ssize_t j
    cdef int64_t ivals[4]
    cdef double fvals[2]
    cy = p2 / <double>q
    yl = _clip(cy - wy, fa, fb)
    yh = _clip(cy + wy, fa, fb)
    exl = fmax(xl, _finv(kind, coeffs, a, b, d2sign, yl))
    exh = fmin(xh, _finv(kind, coeffs, a, b, d2sign, yh))
    if exh < exl:
        exh = exl
    d = (exh - exl) * k1
    for j in range(s_vals.shape[0]):
        hs[j] += _dpow(d, s_vals[j])
    acc.lsum += d
    acc.count += 1
    if buf is not None:
        ivals[0] = q
        ivals[1] = p1
        ivals[2] = p2
        ivals[3] = m
        fvals[0] = exl
        fvals[1] = exh
        buf.push(ivals, fvals)


cdef inline void _rect_p2_loop(int kind, double[::1] coeffs, double a, double b,
                               double fa, double fb, int d2sign, double k1,
                               int64_t q, int64_t p1, int64_t m,
                               double xl, double xh, double fxl, double fxh,
                               double wy,
                               double[::1] s_vals, double[::1] hs,
                               _Acc* acc, _Buf buf, double L, double U,
                               bint with_m):
    cdef int64_t p2, p2_lo, p2_hi, f_lo, f_hi, n_full
    cdef double dfull
    cdef Py_ssize_t j
    p2_lo = <int64_t>floor(L) + 1
    p2_hi = <int64_t>ceil(U) - 1
    if buf is None:
        # streaming only: p2 whose y-window spans [f(xl), f(xh)] all share
        # the piece [xl, xh]; fold them in one step (same count, sums agree
        # with the per-element path to rounding)
        f_lo = <int64_t>ceil(q * (fxh - wy))
        f_hi = <int64_t>floor(q * (fxl + wy))
        if f_lo < p2_lo:
            f_lo = p2_lo
        if f_hi > p2_hi:
            f_hi = p2_hi
        n_full = f_hi - f_lo + 1
        if n_full > 0:
            for p2 in range(p2_lo, f_lo):
                _rect_p2_one(kind, coeffs, a, b, fa, fb, d2sign, k1, q, p1, m,
                             p2, xl, xh, wy, s_vals, hs, acc, buf)
            dfull = (xh - xl) * k1
            for j in range(s_vals.shape[0]):
                hs[j] += n_full * _dpow(dfull, s_vals[j])
            acc.lsum += n_full * dfull
            acc.count += n_full
            for p2 in range(f_hi + 1, p2_hi + 1):
                _rect_p2_one(kind, coeffs, a, b, fa, fb, d2sign, k1, q, p1, m,
                             p2, xl, xh, wy, s_vals, hs, acc, buf)
            return
    for p2 in range(p2_lo, p2_hi + 1):
        _rect_p2_one(kind, coeffs, a, b, fa, fb, d2sign, k1, q, p1, m,
                     p2, xl, xh, wy, s_vals, hs, acc, buf)


cdef inline int _rect_try(int kind, double[::1] coeffs, double a, double b,
                          double fa, double fb, int d2sign, double k1,
                          int64_t q, int64_t p1, int64_t m,
                          double wx, double wy,
                          double[::1] s_vals, double[::1] hs,
                          _Acc* acc, _Buf buf, list flags,
                          bint with_m) except -1:
    """Certified window test + p2 loop for one (q, p1) and one geometry.

    Returns 1 when the pair was flagged (excluded pending exact resolution).
    """
    cdef double cx = p1 / <double>q
    cdef double t1 = (cx + wx) - a
    cdef double t2 = b - (cx - wx)
    cdef double tol = _band(cx)
    cdef double xl, xh, fxl, fxh, L, U
    if fabs(t1) <= tol or fabs(t2) <= tol:
        if with_m:
            flags.append((q, p1, m))
        else:
            flags.append((q, p1))
        return 1
    if t1 <= 0 or t2 <= 0:
        return 0
    xl = _clip(cx - wx, a, b)
    xh = _clip(cx + wx, a, b)
    fxl = _feval(kind, coeffs, xl)
    fxh = _feval(kind, coeffs, xh)
    L = q * (fxl - wy)
    U = q * (fxh + wy)
    if fabs(L - rint(L)) <= _band(L) or fabs(U - rint(U)) <= _band(U):
        if with_m:
            flags.append((q, p1, m))
        else:
            flags.append((q, p1))
        return 1
    _rect_p2_loop(kind, coeffs, a, b, fa, fb, d2sign, k1, q, p1, m,
                  xl, xh, fxl, fxh, wy, s_vals, hs, acc, buf, L, U, with_m)
    return 0


def rect_cover_sim_chunk(int kind, double[::1] coeffs, double a, double b,
                         double fa, double fb, double c1, int d2sign,
                         int64_t q_lo, int64_t q_hi, double wx, double wy,
                         double[::1] s_vals, bint emit):
    cdef double k1 = sqrt(1.0 + c1 * c1)
    cdef int64_t q, p1, p_lo, p_hi
    cdef _Acc acc
    cdef list flags = []
    cdef _Buf buf = _Buf(4, 2) if emit else None
    hs_arr = np.zeros(s_vals.shape[0])
    cdef double[::1] hs = hs_arr
    acc.count = 0
    acc.lsum = 0.0
    for q in range(q_lo, q_hi + 1):
        p_lo = <int64_t>floor(q * (a - wx))
        p_hi = <int64_t>ceil(q * (b + wx))
        for p1 in range(p_lo, p_hi + 1):
            _rect_try(kind, coeffs, a, b, fa, fb, d2sign, k1, q, p1, 0,
                      wx, wy, s_vals, hs, &acc, buf, flags, 0)
    elems = None
    if emit:
        cols = buf.take()
        elems = (cols[0], cols[1], cols[2], cols[4], cols[5])
    return acc.count, hs_arr, acc.lsum, elems, _flag_array(flags, 2)


def rect_cover_mult_chunk(int kind, double[::1] coeffs, double a, double b,
                          double fa, double fb, double c1, int d2sign,
                          double f2max, int64_t q_lo, int64_t q_hi,
                          double gamma, int64_t m_lo, int64_t m_hi,
                          double[::1] s_vals, bint emit):
    cdef double k1 = sqrt(1.0 + c1 * c1)
    cdef double wx_max = ldexp(gamma, <int>m_hi)
    cdef int64_t q, p1, p_lo, p_hi, m, m_top
    cdef double cx, g, d0adj, fp, u, h, wx, wy
    cdef _Acc acc
    cdef list flags = []
    cdef _Buf buf = _Buf(4, 2) if emit else None
    hs_arr = np.zeros(s_vals.shape[0])
    cdef double[::1] hs = hs_arr
    acc.count = 0
    acc.lsum = 0.0
    for q in range(q_lo, q_hi + 1):
        p_lo = <int64_t>floor(q * (a - wx_max))
        p_hi = <int64_t>ceil(q * (b + wx_max))
        for p1 in range(p_lo, p_hi + 1):
            cx = p1 / <double>q
            if cx - wx_max > a + 1e-12 and cx + wx_max < b - 1e-12:
                # interior: all windows stay inside I, prune by the
                # distance of q f(p1/q) to the nearest integer
                g = q * _feval(kind, coeffs, cx)
                d0adj = fabs(g - rint(g)) - _band(g)
                fp = _fprime(kind, coeffs, cx)
                m = m_hi
                while m >= m_lo:
                    u = ldexp(gamma, <int>m)
                    h = q * (u * fp + f2max * u * u + ldexp(gamma, <int>(-m)))
                    if d0adj >= h * 1.0000000001 + 1e-18:
                        break
                    wx = u
                    wy = ldexp(gamma, <int>(-m))
                    _rect_try(kind, coeffs, a, b, fa, fb, d2sign, k1, q, p1, m,
                              wx, wy, s_vals, hs, &acc, buf, flags, 1)
                    m -= 1
                m_top = m
                m = m_lo
                while m <= m_top:
                    u = ldexp(gamma, <int>m)
                    h = q * (u * fp + f2max * u * u + ldexp(gamma, <int>(-m)))
                    if d0adj >= h * 1.0000000001 + 1e-18:
                        break
                    wx = u
                    wy = ldexp(gamma, <int>(-m))
                    _rect_try(kind, coeffs, a, b, fa, fb, d2sign, k1, q, p1, m,
                              wx, wy, s_vals, hs, &acc, buf, flags, 1)
                    m += 1
            else:
                for m in range(m_lo, m_hi + 1):
                    wx = ldexp(gamma, <int>m)
                    wy = ldexp(gamma, <int>(-m))
                    _rect_try(kind, coeffs, a, b, fa, fb, d2sign, k1, q, p1, m,
                              wx, wy, s_vals, hs, &acc, buf, flags, 1)
    elems = None
    if emit:
        cols = buf.take()
        elems = (cols[0], cols[1], cols[2], cols[3], cols[4], cols[5])
    return acc.count, hs_arr, acc.lsum, elems, _flag_array(flags, 3)


def strip_cover_chunk(int kind, double[::1] coeffs, double a, double b,
                      double fa, double fb, double c1, int d2sign,
                      int64_t q_lo, int64_t q_hi, double w,
                      double[::1] s_vals, bint emit):
    cdef double k1 = sqrt(1.0 + c1 * c1)
    cdef double d_int = 2.0 * w * k1
    cdef int64_t q, p1, p2, p_lo, p_hi, i_lo, i_hi, n_int
    cdef int64_t count_x = 0, count_y = 0
    cdef double cx, cy, tol, xl, xh, yl, yh, d, lsum = 0.0
    cdef Py_ssize_t j
    cdef list flags = []
    cdef _Buf buf = _Buf(3, 2) if emit else None
    hs_arr = np.zeros(s_vals.shape[0])
    cdef double[::1] hs = hs_arr
    cdef int64_t ivals[3]
    cdef double fvals[2]

    for q in range(q_lo, q_hi + 1):
        # vertical strips
        p_lo = <int64_t>floor(q * (a - w))
        p_hi = <int64_t>ceil(q * (b + w))
        i_lo = <int64_t>ceil(q * (a + w)) + 1
        i_hi = <int64_t>floor(q * (b - w)) - 1
        if emit or i_hi < i_lo:
            i_lo, i_hi = 1, 0  # disable the closed-form shortcut
        else:
            n_int = i_hi - i_lo + 1
            count_x += n_int
            for j in range(s_vals.shape[0]):
                hs[j] += n_int * _dpow(d_int, s_vals[j])
            lsum += n_int * d_int
        for p1 in range(p_lo, p_hi + 1):
            if i_lo <= p1 <= i_hi:
                continue
            cx = p1 / <double>q
            tol = _band(cx)
            if fabs((cx + w) - a) <= tol or fabs(b - (cx - w)) <= tol:
                flags.append((1, q, p1))
                continue
            if (cx + w) <= a or (cx - w) >= b:
                continue
            xl = _clip(cx - w, a, b)
            xh = _clip(cx + w, a, b)
            d = (xh - xl) * k1
            count_x += 1
            for j in range(s_vals.shape[0]):
                hs[j] += _dpow(d, s_vals[j])
            lsum += d
            if emit:
                ivals[0] = 1
                ivals[1] = q
                ivals[2] = p1
                fvals[0] = xl
                fvals[1] = xh
                buf.push(ivals, fvals)
        # horizontal strips, pulled back through the inverse
        p_lo = <int64_t>floor(q * (fa - w))
        p_hi = <int64_t>ceil(q * (fb + w))
        for p2 in range(p_lo, p_hi + 1):
            cy = p2 / <double>q
            tol = _band(cy)
            if fabs((cy + w) - fa) <= tol or fabs(fb - (cy - w)) <= tol:
                flags.append((2, q, p2))
                continue
            if (cy + w) <= fa or (cy - w) >= fb:
                continue
            yl = _clip(cy - w, fa, fb)
            yh = _clip(cy + w, fa, fb)
            xl = _finv(kind, coeffs, a, b, d2sign, yl)
            xh = fmax(_finv(kind, coeffs, a, b, d2sign, yh), xl)
            d = (xh - xl) * k1
            count_y += 1
            for j in range(s_vals.shape[0]):
                hs[j] += _dpow(d, s_vals[j])
            lsum += d
            if emit:
                ivals[0] = 2
                ivals[1] = q
                ivals[2] = p2
                fvals[0] = xl
                fvals[1] = xh
                buf.push(ivals, fvals)
    elems = buf.take() if emit else None
    return count_x, count_y, hs_arr, lsum, elems, _flag_array(flags, 3)


# --- hit scans -------------------------------------------------------------

def measure_chunk(int kind, double[::1] coeffs, double[::1] xs,
                  int64_t q_lo, int64_t q_hi,
                  double[::1] th1, double[::1] th2, bint mult):
    cdef int64_t q, hits = 0
    cdef Py_ssize_t i, qi
    cdef double x, y, v1, v2, e1, e2
    for i in range(xs.shape[0]):
        x = xs[i]
        y = _feval(kind, coeffs, x)
        for q in range(q_lo, q_hi + 1):
            qi = q - q_lo
            v1 = q * x
            e1 = fabs(v1 - rint(v1))
            v2 = q * y
            e2 = fabs(v2 - rint(v2))
            if mult:
                if e1 * e2 < th1[qi]:
                    hits += 1
                    break
            elif e1 < th1[qi] and e2 < th2[qi]:
                hits += 1
                break
    return hits


cdef inline uint64_t _mix(uint64_t z) noexcept:
    z = z + <uint64_t>0x9E3779B97F4A7C15
    z ^= z >> 30
    z = z * <uint64_t>0xBF58476D1CE4E5B9
    z ^= z >> 27
    z = z * <uint64_t>0x94D049BB133111EB
    z ^= z >> 31
    return z


def unit_coords(uint64_t seed, int64_t i_lo, int64_t i_hi, int n_dim):
    out = np.empty((i_hi - i_lo, n_dim))
    cdef double[:, ::1] v = out
    cdef int64_t i
    cdef int j
    cdef uint64_t idx
    for i in range(i_lo, i_hi):
        for j in range(n_dim):
            idx = <uint64_t>(i * n_dim + j + 1)
            v[i - i_lo, j] = _mix(seed + <uint64_t>0x9E3779B97F4A7C15 * idx) \
                / 18446744073709551616.0
    return out


def mc_chunk(uint64_t seed, int64_t i_lo, int64_t i_hi, int n_dim,
             int64_t q_lo, int64_t q_hi, double[:, ::1] th, bint gallagher):
    cdef int64_t i, q, hits = 0
    cdef int j
    cdef Py_ssize_t qi
    cdef double e, prod, v
    cdef bint ok
    pts = unit_coords(seed, i_lo, i_hi, n_dim)
    cdef double[:, ::1] p = pts
    for i in range(i_hi - i_lo):
        for q in range(q_lo, q_hi + 1):
            qi = q - q_lo
            if gallagher:
                prod = 1.0
                for j in range(n_dim):
                    v = q * p[i, j]
                    prod *= fabs(v - rint(v))
                ok = prod < th[0, qi]
            else:
                ok = 1
                for j in range(n_dim):
                    v = q * p[i, j]
                    e = fabs(v - rint(v))
                    if e >= th[j, qi]:
                        ok = 0
                        break
            if ok:
                hits += 1
                break
    return hits
