"""Rational points near planar curves: counting, covers, hit statistics.

The package follows the dyadic-block structure of the underlying estimates:
approx (approximating functions and volume series), curve (monotone arcs
with certified slope/curvature bounds), counting (certified triple counts),
limsup (hits, m-index, empirical measures), cover (block covers and their
Hausdorff s-sums).  Numeric kernels live in _kernels with a compiled backend
and a numpy fallback selected at import (DIOPH_PURE=1 forces the fallback).
"""

from ._kernels import BACKEND
from .approx import (ApproxError, ApproxFn, GallagherSeries, KhintchineSeries,
                     MaxOf, MinOf, MultFloor, PowerLog, SeriesVerdict, Table,
                     Theorem2Series, classify_powerlaw, parse_approx,
                     partial_sum, power_exponent, sim_ordered, tilde_psi_mult,
                     tilde_psi_sim)
from .counting import (MODE_REDUCED, MODE_TRIPLES, CountError, CountReport,
                       count_block_mult, count_block_sim, count_near_curve,
                       gamma_t)
from .cover import (CoverElement, CoverError, CoverSummary,
                    ResourceGuardError, build_cover_mult, build_cover_sim,
                    summarize, tail_sum, tail_sum_multi)
from .curve import (Curve, CurveError, NondegReport, catalog, chord_diameter,
                    invert_on_interval, parse_curve, verify_nondegeneracy)
from .limsup import (CASE_A, CASE_B, CASE_EXACT, MODE_MULT, MODE_SIM,
                     HitRecord, MIndex, dist_to_int, empirical_tail_measure,
                     find_hits, m_bound_case_a, m_index, mc_classical)

__version__ = "0.1.0"
