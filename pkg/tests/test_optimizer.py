import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xychain.chain import ChainSpec
from xychain.encodings import make_psi_k, top_singular_series
from xychain.fidelity import (
    FieldDecomposition,
    field_decomposition,
    fidelity_direct,
    fidelity_field_term,
    psi_fidelity_series,
)
from xychain.optimizer import (
    ParityPrediction,
    SweepError,
    coarse_grid,
    envelope_peak,
    find_peak,
    golden_section_max,
    h0_parity_prediction,
    optimal_field,
    sweep,
)


def _psi_objective(chain, k):
    return lambda ts: psi_fidelity_series(chain, k, ts)


def test_peak_trivial_case():
    chain = ChainSpec(3)
    psi = make_psi_k(chain, 2)
    res = find_peak(chain, lambda t: fidelity_direct(chain, psi, t).fidelity, (0, 3))
    assert res.t0 == 0.0
    assert res.F == pytest.approx(1.0, abs=1e-12)


def test_peak_table_cell_k2_n100():
    chain = ChainSpec(100)
    res = find_peak(chain, _psi_objective(chain, 2), vectorized=True)
    assert res.window == (0.0, 100.0)
    assert round(res.F, 2) == 0.83
    assert abs(res.t0 - 51.75) <= 0.1


def test_peak_optimal_encoding_n200_r5():
    chain = ChainSpec(200)
    res = find_peak(chain, lambda ts: top_singular_series(chain, 5, ts), vectorized=True)
    assert round(res.F, 2) == 0.91
    assert abs(res.t0 - 101.74) <= 0.1


def test_peak_matches_fine_scan():
    chain = ChainSpec(150)
    obj = _psi_objective(chain, 3)
    res = find_peak(chain, obj, vectorized=True)
    fine = coarse_grid(0, 150, 0.01)
    vals = obj(fine)
    assert res.F >= vals.max() - 1e-6
    assert abs(res.t0 - fine[np.argmax(vals)]) < 0.02


def test_peak_errors():
    with pytest.raises(ValueError):
        find_peak(None, math.sin, (1.0, 1.0))
    with pytest.raises(ValueError):
        find_peak(None, math.sin)


def test_peak_tie_breaks_to_earliest():
    res = find_peak(None, lambda t: 1.0, (0.0, 5.0))
    assert res.t0 == 0.0


@given(st.floats(0.2, 3.0), st.floats(0.0, 6.0), st.floats(1.0, 20.0))
def test_peak_dominates_coarse_grid(freq, shift, width):
    obj = lambda t: math.exp(-((t - 10) / width) ** 2) * math.cos(freq * t + shift) ** 2
    res = find_peak(None, obj, (0.0, 20.0))
    grid = coarse_grid(0.0, 20.0, res.coarse_step)
    assert res.F >= max(obj(t) for t in grid) - 1e-12
    assert 0.0 <= res.t0 <= 20.0


def test_golden_section_unimodal():
    t, f = golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-6)
    assert t == pytest.approx(0.3, abs=1e-6)
    t, f = golden_section_max(lambda x: x, 0.0, 1.0)
    assert t == 1.0


def test_coarse_grid_includes_endpoint():
    g = coarse_grid(0.0, 1.05, 0.1)
    assert g[0] == 0.0 and g[-1] == 1.05 and len(g) == 12


def test_envelope_peak_dominates_full_scan():
    chain = ChainSpec(2000)
    obj = _psi_objective(chain, 2)
    res = envelope_peak(chain, obj)
    assert res.check_step == 1.0
    assert 900 <= res.t0 <= 1100
    assert res.F >= obj(coarse_grid(0, 2000, 1.0)).max() - 1e-9


def test_envelope_falls_back_to_full_window():
    chain = ChainSpec(100)
    res = envelope_peak(chain, lambda ts: np.exp(-((np.asarray(ts) - 10.0) ** 2)))
    assert res.window == (0.0, 100.0)
    assert res.t0 == pytest.approx(10.0, abs=1e-3)


def _decomp(big_l, t):
    return FieldDecomposition(5, 1, t, complex(big_l), np.zeros(5, dtype=complex))


def test_optimal_field_examples():
    assert optimal_field(_decomp(0.4, 3.0)).h_star == 0.0
    opt = optimal_field(_decomp(-0.4, 3.0))
    assert opt.h_star == pytest.approx(math.pi / 6)
    assert opt.period == pytest.approx(math.pi / 3)
    assert opt.attains == pytest.approx(0.2)
    zero = optimal_field(_decomp(0.0, 3.0))
    assert zero.h_star == 0.0 and zero.attains == 0.0


def test_optimal_field_vs_grid_scan():
    chain = ChainSpec(201)
    t = find_peak(chain, _psi_objective(chain, 3), vectorized=True).t0
    d = field_decomposition(chain, 3, t)
    opt = optimal_field(d)
    assert 0 <= opt.h_star < opt.period
    hs = np.linspace(0, opt.period, 100_000)
    scan = np.sin(math.pi / 2) ** 2 / 2 * np.real(np.exp(2j * hs * t) * d.L)
    assert fidelity_field_term(d, math.pi / 2, opt.h_star) >= scan.max() - 1e-12


@given(st.floats(-math.pi, math.pi), st.floats(0.01, 1.0), st.floats(0.1, 500.0))
def test_optimal_field_maximizes_term(arg, mag, t):
    d = _decomp(mag * complex(math.cos(arg), math.sin(arg)), t)
    opt = optimal_field(d)
    assert 0 <= opt.h_star < opt.period
    hs = np.linspace(0, opt.period, 2001)
    best = fidelity_field_term(d, 1.2, opt.h_star)
    assert all(best >= fidelity_field_term(d, 1.2, h) - 1e-12 for h in hs)
    assert best == pytest.approx(math.sin(1.2) ** 2 / 2 * mag, abs=1e-12)


def test_parity_examples():
    assert h0_parity_prediction(203, 2) is ParityPrediction.MAX_AT_ZERO_FIELD
    assert h0_parity_prediction(201, 3) is ParityPrediction.MAX_AT_ZERO_FIELD
    assert h0_parity_prediction(52, 2) is ParityPrediction.INDETERMINATE
    assert h0_parity_prediction(201, 2) is ParityPrediction.MIN_AT_ZERO_FIELD
    assert h0_parity_prediction(203, 3) is ParityPrediction.MIN_AT_ZERO_FIELD


@pytest.mark.parametrize("n", [5, 17, 31, 47])
def test_parity_rule_matches_sign_of_l(n):
    for k in range(1, min(5, (n + 1) // 2) + 1):
        chain = ChainSpec(n)
        t = find_peak(chain, _psi_objective(chain, k), vectorized=True).t0
        big_l = field_decomposition(chain, k, t).L
        pred = h0_parity_prediction(n, k)
        assert (big_l.real > 0) == (pred is ParityPrediction.MAX_AT_ZERO_FIELD)


def _square(x):
    return x * x


def _fail_on_three(x):
    if x == 3:
        raise ValueError("boom")
    return x


def test_sweep_order_and_parallel_equivalence():
    pts = list(range(12))
    assert sweep(pts, _square) == [p * p for p in pts]
    assert sweep(pts, _square, workers=4) == [p * p for p in pts]
    assert sweep([7], _square) == [_square(7)]


def test_sweep_wraps_errors():
    for workers in (1, 3):
        with pytest.raises(SweepError) as info:
            sweep(range(6), _fail_on_three, workers=workers)
        assert info.value.index == 3 and info.value.point == 3
        assert isinstance(info.value.cause, ValueError)


def test_sweep_progress():
    seen = []
    sweep(range(3), _square, progress=lambda i, n: seen.append((i, n)))
    assert seen == [(1, 3), (2, 3), (3, 3)]
