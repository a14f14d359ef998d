"""Planar curves y = f(x) with certified derivative bounds.

A curve carries its interval [a, b] and two certified constants:

- c1: upper bound for |f'| on [a, b]
- c2: positive lower bound for |f'| on [a, b]

so the curve is monotone with slope in [c2, c1] (up to sign).  The second
derivative must be continuous, of constant sign, and bounded away from zero
(non-degeneracy); that is checked on a grid rather than stored, see
verify_nondegeneracy.  Polynomial curves keep exact Fraction coefficients so
boundary decisions can be settled in integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

KIND_POLY = 0
KIND_CIRCLE = 1
KIND_HYPERBOLA = 2

_KIND_IDS = {"poly": KIND_POLY, "circle": KIND_CIRCLE, "hyperbola": KIND_HYPERBOLA}


class CurveError(ValueError):
    """Bad curve configuration or domain violation."""


@dataclass(frozen=True)
class Curve:
    name: str
    kind: str                       # "poly" | "circle" | "hyperbola"
    coeffs: tuple                   # Fractions, low degree first (poly only)
    a: float
    b: float
    c1: float                       # sup |f'| <= c1
    c2: float                       # inf |f'| >= c2 > 0

    def __post_init__(self):
        if self.kind not in _KIND_IDS:
            raise CurveError(f"unknown curve kind {self.kind!r}")
        if not self.a < self.b:
            raise CurveError(f"empty interval [{self.a}, {self.b}]")
        if not 0 < self.c2 <= self.c1:
            raise CurveError("need 0 < c2 <= c1")
        if self.kind == "poly":
            object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        elif self.kind == "circle" and not (-1.0 < self.a and self.b < 1.0):
            raise CurveError("circle arc needs [a, b] inside (-1, 1)")
        elif self.kind == "hyperbola" and not self.a > 1.0:
            raise CurveError("hyperbola branch needs a > 1")

    # float evaluation ----------------------------------------------------

    def f(self, x: float) -> float:
        if self.kind == "poly":
            acc = 0.0
            for c in reversed(self.coeffs):
                acc = acc * x + float(c)
            return acc
        if self.kind == "circle":
            return 1.0 - math.sqrt(1.0 - x * x)
        return math.sqrt(x * x - 1.0)

    def df(self, x: float) -> float:
        if self.kind == "poly":
            acc = 0.0
            for k in range(len(self.coeffs) - 1, 0, -1):
                acc = acc * x + k * float(self.coeffs[k])
            return acc
        if self.kind == "circle":
            return x / math.sqrt(1.0 - x * x)
        return x / math.sqrt(x * x - 1.0)

    def d2f(self, x: float) -> float:
        if self.kind == "poly":
            acc = 0.0
            for k in range(len(self.coeffs) - 1, 1, -1):
                acc = acc * x + k * (k - 1) * float(self.coeffs[k])
            return acc
        if self.kind == "circle":
            return (1.0 - x * x) ** -1.5
        return -((x * x - 1.0) ** -1.5)

    def f_array(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "poly":
            acc = np.zeros_like(x)
            for c in reversed(self.coeffs):
                acc = acc * x + float(c)
            return acc
        if self.kind == "circle":
            return 1.0 - np.sqrt(1.0 - x * x)
        return np.sqrt(x * x - 1.0)

    # exact evaluation (poly only) -----------------------------------------

    def f_frac(self, x: Fraction) -> Fraction:
        """Exact f(x) for polynomial curves."""
        if self.kind != "poly":
            raise CurveError(f"exact evaluation needs a poly curve, not {self.kind}")
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    @property
    def exact(self) -> bool:
        return self.kind == "poly"

    # helpers ----------------------------------------------------------------

    def chord_diameter(self, x_lo: float, x_hi: float) -> float:
        """Diameter bound (x_hi - x_lo) * sqrt(1 + c1^2) for a curve piece."""
        return (x_hi - x_lo) * math.sqrt(1.0 + self.c1 * self.c1)

    def d2_sign(self) -> int:
        """Certified sign of f'' on [a, b] (+1 convex, -1 concave)."""
        return 1 if self.d2f(0.5 * (self.a + self.b)) > 0 else -1

    def d2_max_abs(self) -> float:
        """Upper bound for |f''| on [a, b]."""
        if self.kind == "circle":
            x = max(abs(self.a), abs(self.b))
            return (1.0 - x * x) ** -1.5
        if self.kind == "hyperbola":
            return (self.a * self.a - 1.0) ** -1.5
        if len(self.coeffs) <= 4:
            # f'' is affine for degree <= 3, extremes at the endpoints
            return max(abs(self.d2f(self.a)), abs(self.d2f(self.b)))
        xs = np.linspace(self.a, self.b, 4097)
        return float(np.max(np.abs([self.d2f(float(x)) for x in xs]))) * 1.05

    def kernel_params(self) -> tuple:
        """(kind_id, coeffs, dcoeffs, a, b, c1, c2) as plain floats/arrays."""
        cs = np.asarray([float(c) for c in self.coeffs], dtype=np.float64)
        if cs.size == 0:
            cs = np.zeros(1, dtype=np.float64)
        dcs = np.asarray(
            [k * float(c) for k, c in enumerate(self.coeffs)][1:] or [0.0],
            dtype=np.float64,
        )
        return (_KIND_IDS[self.kind], cs, dcs, self.a, self.b, self.c1, self.c2)

    def spec(self) -> str:
        if self.kind == "poly":
            body = ",".join(str(c) for c in self.coeffs)
            return f"poly:{body}@[{self.a!r},{self.b!r}]"
        return f"{self.kind}@[{self.a!r},{self.b!r}]"


def catalog() -> dict:
    """The four reference curves used throughout the tests and examples."""
    return {
        "parabola": Curve("parabola", "poly", (0, 0, 1), 0.1, 1.0, 2.5, 0.1),
        "circle-arc": Curve("circle-arc", "circle", (), 0.3, 0.8, 1.4, 0.15),
        "hyperbola": Curve("hyperbola", "hyperbola", (), 1.1, 2.0, 2.5, 1.1),
        "cubic": Curve("cubic", "poly", (0, 1, 0, 1), 0.1, 1.0, 4.1, 1.0),
    }


@dataclass(frozen=True)
class NondegReport:
    ok: bool
    samples: int
    min_slope: float
    max_slope: float
    min_abs_f2: float
    max_abs_f2: float
    f2_sign_constant: bool
    sim_k_ok: bool
    messages: tuple


def verify_nondegeneracy(curve: Curve, samples: int = 1000) -> NondegReport:
    """Grid certificate for the declared constants and non-degeneracy.

    Evaluates f' and f'' on an equispaced grid including both endpoints.
    ok requires c1 > f'(x) > c2 at every sample and f'' nonzero with constant
    sign.  The extra flag sim_k_ok records 2/min f' <= 1 + 1/c2, which the
    pulled-back strip diameter bound relies on.  A grid check is evidence,
    not a proof; the catalog constants carry wide margins.
    """
    if samples < 2:
        raise CurveError("need at least 2 samples")
    xs = np.linspace(curve.a, curve.b, samples)
    d1 = np.array([curve.df(float(x)) for x in xs])
    d2 = np.array([curve.d2f(float(x)) for x in xs])
    msgs = []

    min_d1, max_d1 = float(np.min(d1)), float(np.max(d1))
    min_d2, max_d2 = float(np.min(np.abs(d2))), float(np.max(np.abs(d2)))

    sign_const = bool(np.all(d2 > 0) or np.all(d2 < 0))
    if not sign_const:
        msgs.append("f'' changes sign on the grid")
    if min_d2 == 0:
        msgs.append("f'' vanishes on the grid")
    if not max_d1 < curve.c1:
        msgs.append(f"max f' = {max_d1:.6g} not below c1 = {curve.c1}")
    if not 0 < curve.c2 < min_d1:
        msgs.append(f"min f' = {min_d1:.6g} not above c2 = {curve.c2}")

    sim_k_ok = min_d1 > 0 and 2.0 / min_d1 <= 1.0 + 1.0 / curve.c2
    if not sim_k_ok:
        msgs.append("inverse-slope bound 2/min f' <= 1 + 1/c2 fails")

    ok = sign_const and min_d2 > 0 and max_d1 < curve.c1 and 0 < curve.c2 < min_d1
    return NondegReport(
        ok=ok,
        samples=samples,
        min_slope=min_d1,
        max_slope=max_d1,
        min_abs_f2=min_d2,
        max_abs_f2=max_d2,
        f2_sign_constant=sign_const,
        sim_k_ok=sim_k_ok,
        messages=tuple(msgs),
    )


def _solve_increasing(curve: Curve, y: float) -> float:
    """x in [a, b] with f(x) = y, for y already inside [f(a), f(b)]."""
    a, b = curve.a, curve.b
    if curve.kind == "circle":
        x = math.sqrt(max(0.0, y * (2.0 - y)))
        return min(max(x, a), b)
    if curve.kind == "hyperbola":
        x = math.sqrt(1.0 + y * y)
        return min(max(x, a), b)
    # exact-sign bisection: midpoints are floats, sign decisions are exact
    yF = Fraction(y)
    lo, hi = a, b
    tol = math.ldexp(max(1.0, abs(b)), -50)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if curve.f_frac(Fraction(mid)) <= yF:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def invert_on_interval(curve: Curve, y_lo: float, y_hi: float) -> Optional[tuple]:
    """Preimage {x in I : y_lo < f(x) < y_hi} as an interval, or None.

    f is strictly increasing, so the preimage is a single interval; crossing
    endpoints are located to absolute tolerance 2^-50 (closed forms for the
    circle and hyperbola arcs, exact-sign bisection for polynomials).
    """
    if y_lo > y_hi:
        raise CurveError(f"empty y-range ({y_lo}, {y_hi})")
    fa, fb = curve.f(curve.a), curve.f(curve.b)
    if y_hi <= fa or y_lo >= fb:
        return None
    x_lo = curve.a if y_lo < fa else _solve_increasing(curve, y_lo)
    x_hi = curve.b if y_hi > fb else _solve_increasing(curve, y_hi)
    if x_lo > x_hi:
        x_lo = x_hi = 0.5 * (x_lo + x_hi)
    return (x_lo, x_hi)


def chord_diameter(curve: Curve, x_interval: Optional[tuple]) -> float:
    """Euclidean diameter bound for the curve piece over x_interval (0 if empty)."""
    if x_interval is None:
        return 0.0
    x_lo, x_hi = x_interval
    if x_hi <= x_lo:
        return 0.0
    return curve.chord_diameter(x_lo, x_hi)


def parse_curve(text: str) -> Curve:
    """Parse a catalog name or "poly:a0,a1,...@[a,b]".

    For custom polynomials the slope constants are certified from a dense
    grid with a 2 percent safety factor, then re-checked.
    """
    text = text.strip()
    cat = catalog()
    if text in cat:
        return cat[text]
    kind, sep, body = text.partition(":")
    if kind != "poly" or not sep:
        raise CurveError(f"unknown curve {text!r} (catalog: {', '.join(sorted(cat))})")
    coeff_part, sep, iv_part = body.partition("@")
    if not sep or not (iv_part.startswith("[") and iv_part.endswith("]")):
        raise CurveError(f"curve spec {text!r} needs @[a,b]")
    try:
        coeffs = tuple(Fraction(c.strip()) for c in coeff_part.split(","))
        a_s, b_s = iv_part[1:-1].split(",")
        a, b = float(a_s), float(b_s)
    except (ValueError, ZeroDivisionError) as e:
        raise CurveError(f"bad curve spec {text!r}: {e}") from None

    probe = Curve("custom", "poly", coeffs, a, b, 1.0, 0.5)  # placeholder bounds
    xs = np.linspace(a, b, 4097)
    d1 = np.abs([probe.df(float(x)) for x in xs])
    c1 = float(np.max(d1)) * 1.02
    m = float(np.min(d1))
    if m <= 0:
        raise CurveError(f"curve {text!r} is not monotone on [{a}, {b}]")
    c2 = m / 1.02
    if m < 2.0:
        # keep 2/min|f'| <= 1 + 1/c2 satisfiable for shallow slopes
        c2 = min(c2, 0.98 * m / (2.0 - m))
    cur = Curve("custom", "poly", coeffs, a, b, c1, c2)
    rep = verify_nondegeneracy(cur)
    if not rep.ok:
        raise CurveError(f"curve {text!r} fails certification: {'; '.join(rep.messages)}")
    return cur
