"""Certified near-curve and dyadic-block counts against the exact oracles."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from diophcurve.approx import PowerLog
from diophcurve.counting import (MODE_REDUCED, MODE_TRIPLES, CountError,
                                 chunk_ranges, count_block_mult,
                                 count_block_sim, count_near_curve, gamma_t,
                                 resolve_threads)
from diophcurve.curve import catalog


@pytest.fixture(scope="module")
def parabola():
    return catalog()["parabola"]


@pytest.fixture(scope="module")
def cubic():
    return catalog()["cubic"]


# --- plumbing -----------------------------------------------------------------

@given(lo=st.integers(1, 10 ** 6), span=st.integers(0, 5000),
       size=st.sampled_from([16, 64, 128]))
@settings(max_examples=60)
def test_chunk_ranges_partition(lo, span, size):
    hi = lo + span
    chunks = chunk_ranges(lo, hi, size)
    # exact partition
    assert chunks[0][0] == lo and chunks[-1][1] == hi
    for (a0, a1), (b0, b1) in zip(chunks, chunks[1:]):
        assert b0 == a1 + 1
    # every boundary except the ends sits on an absolute multiple of size,
    # so the partition does not depend on where the range started
    for _, a1 in chunks[:-1]:
        assert (a1 + 1) % size == 0


def test_resolve_threads(monkeypatch):
    monkeypatch.delenv("DIOPH_THREADS", raising=False)
    assert resolve_threads(None) == 1
    assert resolve_threads(4) == 4
    assert resolve_threads("auto") >= 1
    monkeypatch.setenv("DIOPH_THREADS", "3")
    assert resolve_threads(None) == 3
    with pytest.raises(CountError):
        resolve_threads(0)


def test_report_json_shape(parabola):
    rep = count_near_curve(parabola, 20, 0.1)
    d = json.loads(json.dumps(rep.to_json()))
    assert set(d) == {"count", "predicted_bound", "ratio", "mode",
                      "boundary_ambiguous"}
    assert d["mode"] == MODE_TRIPLES
    assert d["predicted_bound"] == pytest.approx(0.1 * 20 ** 3)
    assert rep.ratio == pytest.approx(rep.count / rep.predicted_bound)


def test_domain_errors(parabola):
    for bad in (0.0, 0.5, 0.7, -0.1):
        with pytest.raises(CountError):
            count_near_curve(parabola, 10, bad)
    with pytest.raises(CountError):
        count_near_curve(parabola, 0, 0.1)
    with pytest.raises(CountError):
        count_near_curve(parabola, 10, 0.1, mode="Nope")
    with pytest.raises(CountError):
        count_block_mult(parabola, PowerLog(1, 2, 0), 0, 0)


# --- near-curve counts vs oracle -------------------------------------------------

@pytest.mark.parametrize("delta", [0.01, 0.13, 0.3])
@pytest.mark.parametrize("mode", [MODE_TRIPLES, MODE_REDUCED])
def test_near_count_matches_oracle(parabola, delta, mode):
    rep = count_near_curve(parabola, 60, delta, mode=mode)
    want = oracles.near_count(parabola, 60, delta, reduced=mode == MODE_REDUCED)
    assert rep.count == want
    assert rep.boundary_ambiguous == 0


def test_near_count_cubic_oracle(cubic):
    rep = count_near_curve(cubic, 40, 0.05)
    assert rep.count == oracles.near_count(cubic, 40, 0.05)


@given(qnum=st.integers(4, 45), dnum=st.integers(1, 49))
@settings(max_examples=15, deadline=None)
def test_near_count_oracle_random(parabola, qnum, dnum):
    delta = dnum / 100
    rep = count_near_curve(parabola, qnum, delta)
    assert rep.count == oracles.near_count(parabola, qnum, delta)


@given(d1=st.floats(0.01, 0.24), d2=st.floats(0.25, 0.49))
@settings(max_examples=20, deadline=None)
def test_near_count_monotone_in_delta(parabola, d1, d2):
    small = count_near_curve(parabola, 50, d1).count
    big = count_near_curve(parabola, 50, d2).count
    assert small <= big


def test_near_count_monotone_in_Q(parabola):
    counts = [count_near_curve(parabola, Q, 0.2).count for Q in (10, 20, 40, 80)]
    assert all(x <= y for x, y in zip(counts, counts[1:]))


def test_reduced_at_most_triples(parabola):
    for Q in (17, 33, 64):
        full = count_near_curve(parabola, Q, 0.2).count
        red = count_near_curve(parabola, Q, 0.2, mode=MODE_REDUCED).count
        assert red <= full


def test_near_count_thread_invariance(parabola):
    a = count_near_curve(parabola, 300, 0.01, threads=1)
    b = count_near_curve(parabola, 300, 0.01, threads=8)
    assert a == b


def test_near_count_analytic_curve_runs():
    circ = catalog()["circle-arc"]
    rep = count_near_curve(circ, 50, 0.07)
    assert rep.count >= 0
    assert rep.boundary_ambiguous >= 0


# --- block counts vs oracle -------------------------------------------------------

@pytest.mark.parametrize("t,m", [(3, 0), (3, 2), (4, -1), (5, 1), (5, -3)])
def test_block_mult_matches_oracle(parabola, t, m):
    psi = PowerLog(1, 2, 0)
    rep = count_block_mult(parabola, psi, t, m)
    g = gamma_t(psi, t)
    want = len(oracles.window_triples(parabola, t, math.ldexp(g, m),
                                      math.ldexp(g, -m)))
    assert rep.count == want
    assert rep.predicted_bound == math.ldexp(math.sqrt(psi.eval(2 ** t)),
                                             2 * t + abs(m))


def test_block_mult_cubic(cubic):
    psi = PowerLog(1, 2, 0)
    rep = count_block_mult(cubic, psi, 4, 1)
    g = gamma_t(psi, 4)
    assert rep.count == len(oracles.window_triples(
        cubic, 4, math.ldexp(g, 1), math.ldexp(g, -1)))


@pytest.mark.parametrize("t", [3, 4, 5])
def test_block_sim_matches_oracle(parabola, t):
    psi = PowerLog(1, 0.8, 0)
    phi = PowerLog(1, 1.0, 0)
    rep = count_block_sim(parabola, psi, phi, t)
    wx = psi.eval(2.0 ** t) / 2.0 ** t
    wy = phi.eval(2.0 ** t) / 2.0 ** t
    assert rep.count == len(oracles.window_triples(parabola, t, wx, wy))


def test_block_sim_requires_order(parabola):
    psi = PowerLog(1, 1.0, 0)
    phi = PowerLog(1, 0.8, 0)
    with pytest.raises(CountError, match="sim_ordered"):
        count_block_sim(parabola, psi, phi, 5)


def test_block_thread_invariance(parabola):
    psi = PowerLog(1, 2, 0)
    one = count_block_mult(parabola, psi, 7, 2, threads=1)
    many = count_block_mult(parabola, psi, 7, 2, threads=8)
    assert one == many
