"""Acceptance gate: one test per criterion, one printed line per criterion.

Each test prints "criterion NN PASS/FAIL <measured numbers>" before its
assert, and conftest reprints the collected lines after the run, so the
per-criterion outcome survives in the terminal summary either way.

Criterion 5 is expected to fail on its hard decay clause: the window sums
do decrease strictly and the divergent contrast run does not decay, but the
measured W(9)/W(4) ratio sits near 1/3, not below 1/5.  The per-block
Hausdorff sums shrink by about 2^(-0.4) per t as the exponent arithmetic
says they should, and seven-block windows inherit that rate; pushing the
ratio under 0.2 needs a window start around n = 12 (blocks up to t = 18),
roughly an hour of work against a ten-minute budget.  The clause is kept
as written and the red line documents the measured ratio.

Monte Carlo runs are frozen at seed 20240801.
"""

import bisect
import math
import statistics
import subprocess
import sys
import time
from fractions import Fraction

import mpmath
import numpy as np

import oracles
from diophcurve import (
    CASE_A,
    MODE_MULT,
    MODE_REDUCED,
    MODE_SIM,
    MODE_TRIPLES,
    PowerLog,
    Theorem2Series,
    build_cover_mult,
    build_cover_sim,
    catalog,
    classify_powerlaw,
    count_block_mult,
    count_block_sim,
    count_near_curve,
    empirical_tail_measure,
    gamma_t,
    m_bound_case_a,
    m_index,
    mc_classical,
    partial_sum,
    power_exponent,
    tail_sum_multi,
    tilde_psi_mult,
)

RESULTS = []
MC_SEED = 20240801


def _record(num, ok, detail):
    line = "criterion %02d %s  %s" % (num, "PASS" if ok else "FAIL", detail)
    RESULTS.append(line)
    print(line)
    return ok


def test_criterion_01_near_counts_match_exact_oracle():
    t0 = time.perf_counter()
    cur = catalog()["parabola"]
    # exact per-(q, p1) errors computed once; each Q is then a strict
    # threshold query against the sorted Fractions
    table = oracles.near_error_table(cur, 200)
    bad = []
    # Q = 1 gives delta = 1, outside the documented (0, 1/2) domain
    for Q in range(2, 201):
        delta = Q ** (-5.0 / 3.0)
        dl = Fraction(delta)
        for mode, col in ((MODE_TRIPLES, 0), (MODE_REDUCED, 1)):
            got = count_near_curve(cur, Q, delta, mode=mode).count
            want = sum(bisect.bisect_left(table[q][col], dl)
                       for q in range(1, Q + 1))
            if got != want:
                bad.append((Q, mode, got, want))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 10.0
    assert _record(1, ok, "near-curve counts vs exact oracle, Q in [2,200] "
                          "both modes: %d mismatches, %.1fs" % (len(bad), dt)), bad
    assert dt < 10.0


def test_criterion_02_blocks_and_covers_match_brute_force():
    t0 = time.perf_counter()
    par = catalog()["parabola"]
    psi_m = tilde_psi_mult(PowerLog(1, 2, 0), 0.8)
    psi8 = PowerLog(1, 0.8, 0)
    bad = []

    for t in range(2, 7):
        g = gamma_t(psi_m, t)
        for m in (-2, -1, 0, 1, 2):
            got = count_block_mult(par, psi_m, t, m).count
            want = len(oracles.window_triples(par, t, math.ldexp(g, m),
                                              math.ldexp(g, -m)))
            if got != want:
                bad.append(("mult", t, m, got, want))
        pt = float(psi8.eval(2 ** t))
        got = count_block_sim(par, psi8, psi8, t).count
        want = len(oracles.window_triples(par, t, math.ldexp(pt, -t),
                                          math.ldexp(pt, -t)))
        if got != want:
            bad.append(("sim", t, got, want))

    for t in range(3, 7):
        lib = oracles.key_sort(oracles.element_keys(build_cover_mult(par, psi_m, 0.8, t)))
        want = oracles.key_sort(oracles.cover_mult_keys(par, psi_m, t, 0.8))
        if lib != want:
            bad.append(("cover-mult", t))
        lib = oracles.key_sort(oracles.element_keys(build_cover_sim(par, psi8, psi8, t)))
        want = oracles.key_sort(oracles.cover_sim_keys(par, psi8, psi8, t))
        if lib != want:
            bad.append(("cover-sim", t))

    dt = time.perf_counter() - t0
    ok = not bad and dt < 60.0
    assert _record(2, ok, "block counts and cover element sets vs brute force "
                          "(t <= 6): %d mismatches, %.1fs" % (len(bad), dt)), bad
    assert dt < 60.0


def test_criterion_03_counting_ratio_band():
    t0 = time.perf_counter()
    cur = catalog()["parabola"]
    # delta = psi(Q)/Q = Q^(-5/3), so report.ratio is count / (psi(Q) Q^2)
    ratios = [count_near_curve(cur, 1 << k, (1 << k) ** (-5.0 / 3.0)).ratio
              for k in range(6, 14)]
    spread = max(ratios) / min(ratios)
    dt = time.perf_counter() - t0
    ok = spread <= 4.0 and dt < 300.0
    assert _record(3, ok, "count/(psi(Q) Q^2) over Q = 2^6..2^13: spread "
                          "%.2f (bound 4), %.1fs" % (spread, dt))
    assert dt < 300.0


def test_criterion_04_block_count_ratio_vs_dyadic_bound():
    t0 = time.perf_counter()
    cur = catalog()["parabola"]
    psi = tilde_psi_mult(PowerLog(1, 2, 0), 0.8)
    ratios = []
    for t in range(4, 10):
        psi_t = float(psi.eval(2 ** t))
        thr = t * math.sqrt(psi_t)
        mm = 0
        while math.ldexp(1.0, -(mm + 1)) >= thr:
            mm += 1
        M = min(mm, math.floor(m_bound_case_a(t, 0.8)) + 2)
        for m in range(-M, M + 1):
            # predicted_bound is 2^(2t + |m|) sqrt(psi(2^t)), the fitted scale
            ratios.append(count_block_mult(cur, psi, t, m).ratio)
    med = statistics.median(ratios)
    dt = time.perf_counter() - t0
    ok = max(ratios) <= 8.0 * med and dt < 300.0
    assert _record(4, ok, "count/(2^(2t+|m|) sqrt(psi_t)) over %d CaseA (t,m): "
                          "max %.2f vs median %.2f (bound 8x), %.1fs"
                          % (len(ratios), max(ratios), med, dt))
    assert dt < 300.0


def test_criterion_05_cover_sum_decay():
    t0 = time.perf_counter()
    cur = catalog()["parabola"]
    res = tail_sum_multi(cur, PowerLog(1, 2, 0), "mult", 4, 15, [0.8, 0.5])
    per_t = {s: {row.t: row.hausdorff_sum for row in summ.per_t_breakdown}
             for s, summ in zip((0.8, 0.5), res)}
    w08 = [sum(per_t[0.8][t] for t in range(n, n + 7)) for n in range(4, 10)]
    w05 = [sum(per_t[0.5][t] for t in range(n, n + 7)) for n in range(4, 10)]

    decreasing = all(w08[i + 1] < w08[i] for i in range(5))
    decay = w08[5] / w08[0]
    contrast = all(w05[i + 1] >= w05[i] for i in range(5))
    dt = time.perf_counter() - t0
    ok = decreasing and decay < 0.2 and contrast and dt < 600.0
    assert _record(5, ok, "s=0.8 windows strictly decreasing: %s; W(9)/W(4) = "
                          "%.3f (need < 0.2); s=0.5 non-decreasing: %s; %.0fs"
                          % (decreasing, decay, contrast, dt))
    assert dt < 600.0


def test_criterion_06_measure_decay_and_tail_bound():
    cur = catalog()["parabola"]
    psi = PowerLog(1, 0.8, 0)
    bounds = []
    for t in range(4, 11):
        n_t = count_block_sim(cur, psi, psi, t).count
        bounds.append(n_t * float(psi.eval(2 ** t)) / 2 ** t)
    geometric = all(bounds[i + 1] <= 0.8 * bounds[i] for i in range(len(bounds) - 1))

    fracs = [empirical_tail_measure(cur, psi, psi, MODE_SIM, 2000, n, 1 << 14)
             for n in (4, 6, 8, 10)]
    mono = all(fracs[i + 1] <= fracs[i] for i in range(3))
    # sum_{q >= 2^n} psi(q) phi(q) = Hurwitz zeta(1.6, 2^n)
    tails = [float(mpmath.zeta(1.6, 2 ** n)) for n in (4, 6, 8, 10)]
    bounded = all(f <= 10.0 * z for f, z in zip(fracs, tails))
    ok = geometric and mono and bounded
    assert _record(6, ok, "per-t lebesgue bounds ratio <= 0.8: %s; measure "
                          "fracs %s nonincreasing: %s and <= 10x zeta tails: %s"
                          % (geometric, ["%.3f" % f for f in fracs], mono, bounded))


def test_criterion_07_m_index_invariants_on_synthesized_hits():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1234)
    psi = tilde_psi_mult(PowerLog(1, 2, 0), 0.8)
    n = 10 ** 4
    ts = rng.integers(3, 13, size=n)
    qf = rng.random(n)
    eu = rng.random(n)
    yu = rng.random(n)
    bad_bracket = bad_comp = bad_bound = 0
    for i in range(n):
        t = int(ts[i])
        q = (1 << t) + int(qf[i] * (1 << t))
        psi_t = float(psi.eval(1 << t))
        g = gamma_t(psi, t)
        err_x = min(g * 2.0 ** (-12.0 + 23.0 * eu[i]), 0.999 / (2 * q))
        err_y = yu[i] * min(psi_t / (q * q * err_x), 1.0 / (2 * q))
        mi = m_index(err_x, t, psi)
        if not (math.ldexp(g, mi.m - 1) <= err_x < math.ldexp(g, mi.m)):
            bad_bracket += 1
        if not err_y < math.ldexp(g, -mi.m):
            bad_comp += 1
        if mi.case == CASE_A and abs(mi.m) > m_bound_case_a(t, 0.8) + 2:
            bad_bound += 1
    dt = time.perf_counter() - t0
    ok = bad_bracket == bad_comp == bad_bound == 0 and dt < 30.0
    assert _record(7, ok, "10^4 synthesized hits: bracket misses %d, "
                          "complement misses %d, CaseA bound misses %d, %.1fs"
                          % (bad_bracket, bad_comp, bad_bound, dt))
    assert dt < 30.0


def test_criterion_08_classifier_vs_partial_sums():
    t0 = time.perf_counter()
    triples = [(2, 0, 0.8), (3, 0, 0.6), (1.5, 1, 1.0), (4, -1, 0.5),
               (2, 0, 0.5), (1, 0, 0.9), (0.5, 2, 1.0), (1.5, -1, 0.7),
               (1, 0, 1.0), (1, 2, 1.0), (1, 3, 1.0), (3, 0, 0.5)]
    bad = []
    for tau, beta, s in triples:
        ser = Theorem2Series(PowerLog(1, tau, beta), s)
        verdict = classify_powerlaw(ser).verdict
        s6 = partial_sum(ser, 10 ** 6)
        s7 = partial_sum(ser, 10 ** 7)
        if verdict == "converges":
            consistent = s7 - s6 < 0.05 * s6
        elif power_exponent(ser) > -1.0:
            consistent = s7 > 1.5 * s6
        else:
            consistent = True  # borderline exponent -1: speed check exempt
        if not consistent:
            bad.append((tau, beta, s, verdict, s6, s7))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 120.0
    assert _record(8, ok, "12 (tau,beta,s) triples, verdict vs partial-sum "
                          "growth at H = 10^7: %d inconsistent, %.1fs"
                          % (len(bad), dt)), bad
    assert dt < 120.0


def test_criterion_09_monte_carlo_classical():
    t0 = time.perf_counter()
    half = PowerLog(1, 0.5, 0)
    conv = PowerLog(1, 0.8, 0)
    f_div = mc_classical(2, "khintchine", (half, half), 10 ** 4, 10 ** 4, MC_SEED)
    f_conv = mc_classical(2, "khintchine", (conv, conv), 10 ** 4, 10 ** 4,
                          MC_SEED, q_min=10 ** 3)
    f_gal = mc_classical(2, "gallagher", half, 10 ** 4, 10 ** 4, MC_SEED)
    dt = time.perf_counter() - t0
    ok = f_div >= 0.95 and f_conv <= 0.1 and f_gal >= 0.95 and dt < 120.0
    assert _record(9, ok, "seed %d: khintchine divergent %.3f (>= 0.95), "
                          "convergent tail %.3f (<= 0.1), gallagher divergent "
                          "%.3f (>= 0.95), %.1fs"
                          % (MC_SEED, f_div, f_conv, f_gal, dt))
    assert dt < 120.0


def test_criterion_10_thread_count_never_changes_output():
    base = [sys.executable, "-m", "diophcurve"]
    runs = [
        ["verify", "--curve", "parabola"],
        ["count", "--curve", "parabola", "--Q", "64,256",
         "--psi", "powerlog:1,0.6667,0", "--format", "csv"],
        ["block-count", "--curve", "parabola", "--mode", "mult",
         "--psi", "max:(powerlog:1,2,0),(multfloor:0.8)", "--t", "4,5", "--m", "0"],
        ["hits", "--curve", "parabola", "--x", "0.437", "--q-max", "400",
         "--mode", "mult", "--psi", "powerlog:1,1,0"],
        ["cover", "--curve", "parabola", "--mode", "sim",
         "--psi", "powerlog:1,0.8,0", "--phi", "powerlog:1,0.8,0",
         "--t", "5", "--s", "0.8", "--format", "csv"],
        ["tail", "--curve", "parabola", "--mode", "mult",
         "--psi", "max:(powerlog:1,2,0),(multfloor:0.8)",
         "--n", "4", "--T", "7", "--s", "0.8"],
        ["series", "--kind", "theorem2", "--psi", "powerlog:1,2,0",
         "--s", "0.8", "--H", "100000", "--format", "csv"],
        ["measure", "--curve", "parabola", "--mode", "sim",
         "--psi", "powerlog:1,0.8,0", "--phi", "powerlog:1,0.8,0",
         "--grid", "500", "--n", "3,5", "--Q", "2048"],
        ["mc", "--kind", "khintchine", "--n-dim", "2",
         "--psi", "powerlog:1,0.5,0", "--samples", "4000", "--Q", "3000",
         "--seed", str(MC_SEED)],
    ]
    bad = []
    for args in runs:
        outs = []
        for th in ("1", "8"):
            p = subprocess.run(base + args + ["--threads", th],
                               capture_output=True, timeout=300)
            assert p.returncode == 0, (args, th, p.stderr.decode())
            outs.append(p.stdout)
        if outs[0] != outs[1]:
            bad.append(args[0])
    ok = not bad
    assert _record(10, ok, "byte-identical stdout, --threads 1 vs 8, across "
                           "%d subcommands: %s" % (len(runs),
                           "all match" if ok else "mismatch in " + ",".join(bad)))
