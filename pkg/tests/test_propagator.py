import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xychain.chain import ChainSpec, NumericalAssertionError, make_encoding, site_state, vacuum
from xychain.encodings import make_psi_k
from xychain import propagator
from xychain.propagator import (
    ParityClass,
    amplitude,
    amplitude_blocks,
    amplitude_row,
    amplitudes,
    dense_oracle,
    dense_propagator,
    propagate,
    reduced_amplitude,
    window_amplitudes,
)

# 30-digit values from mpmath.expm of the tridiagonal block (J = 1, h = 0)
F_5_1_4_T13 = complex(0.0, -0.25747113778140733349637189821)
FT_4_2_3_T07 = 0.53936756920565578483351655838
FT_5_1_3_T20 = -0.649481065280609253704042936277


def test_identity_at_zero_time():
    assert amplitude(ChainSpec(5), 2, 2, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert abs(amplitude(ChainSpec(5), 2, 3, 0.0)) < 1e-14


@pytest.mark.parametrize("t", [0.0, 0.4, 1.7, 12.3])
def test_two_site_closed_form(t):
    chain = ChainSpec(2)
    assert amplitude(chain, 1, 2, t) == pytest.approx(1j * math.sin(t), abs=1e-14)
    assert amplitude(chain, 1, 1, t) == pytest.approx(math.cos(t), abs=1e-14)
    w = dense_oracle(chain, site_state(2, 1), t).site_amplitudes
    np.testing.assert_allclose(w, [math.cos(t), 1j * math.sin(t)], atol=1e-14)


def test_frozen_amplitude():
    chain = ChainSpec(5)
    assert amplitude(chain, 1, 4, 1.3) == pytest.approx(F_5_1_4_T13, abs=1e-14)
    dense = dense_oracle(chain, site_state(5, 1), 1.3).site_amplitudes[3]
    assert dense == pytest.approx(F_5_1_4_T13, abs=1e-10)


def test_reduced_amplitude_examples():
    r = reduced_amplitude(ChainSpec(9), 1, 1, 0.0)
    assert r.parity_class is ParityClass.PURELY_REAL and r.value == pytest.approx(1.0, abs=1e-14)

    r = reduced_amplitude(ChainSpec(4, field=0.37), 2, 3, 0.7)
    assert r.parity_class is ParityClass.PURELY_IMAGINARY
    assert r.value == pytest.approx(FT_4_2_3_T07, abs=1e-14)
    via_oracle = dense_oracle(ChainSpec(4, field=0.37), site_state(4, 2), 0.7).site_amplitudes[2]
    assert (via_oracle * np.exp(2j * 0.37 * 0.7)).imag == pytest.approx(r.value, abs=1e-10)

    r = reduced_amplitude(ChainSpec(5), 1, 3, 2.0)
    assert r.parity_class is ParityClass.PURELY_REAL
    assert r.value == pytest.approx(FT_5_1_3_T20, abs=1e-14)


def test_reduced_amplitude_asserts_on_violation(monkeypatch):
    monkeypatch.setattr(propagator, "PARITY_TOL", -1.0)
    with pytest.raises(NumericalAssertionError):
        reduced_amplitude(ChainSpec(4), 1, 2, 0.3)


@pytest.mark.parametrize("bad", [(0, 1), (1, 6), (7, 7)])
def test_out_of_range_sites(bad):
    with pytest.raises(ValueError):
        amplitude(ChainSpec(5), *bad, 0.1)
    with pytest.raises(ValueError):
        amplitude_row(ChainSpec(5), bad[0] if bad[0] != 1 else 9, 0.1)


def test_amplitude_row_examples():
    np.testing.assert_allclose(amplitude_row(ChainSpec(3), 1, 0.0), [1, 0, 0], atol=1e-15)
    row = amplitude_row(ChainSpec(5), 3, 1.0)
    assert np.sum(np.abs(row) ** 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n,s,t", [(3, 2, 0.9), (17, 5, 3.3), (64, 1, 20.0), (101, 50, 51.75), (100, 1, 51.75)])
def test_amplitude_row_matches_direct_sums(n, s, t):
    chain = ChainSpec(n, field=0.11)
    row = amplitude_row(chain, s, t)
    direct = np.array([amplitude(chain, s, j, t) for j in range(1, n + 1)])
    np.testing.assert_allclose(row, direct, atol=1e-10, rtol=0)


def test_amplitudes_switches_path_consistently():
    chain = ChainSpec(49)
    few = amplitudes(chain, 3, [1, 2, 40], 7.0)
    many = amplitudes(chain, 3, list(range(1, 20)), 7.0)
    np.testing.assert_allclose(few, [amplitude(chain, 3, j, 7.0) for j in (1, 2, 40)], atol=1e-13)
    np.testing.assert_allclose(many[:2], few[:2], atol=1e-13)


def test_propagate_vacuum_and_identity():
    chain = ChainSpec(12, field=0.4)
    state = propagate(chain, vacuum(12), 8.0)
    assert state.vacuum_amplitude == 1 and np.allclose(state.site_amplitudes, 0)
    psi2 = make_psi_k(ChainSpec(100), 2)
    state = propagate(ChainSpec(100), psi2, 0.0)
    np.testing.assert_allclose(state.site_amplitudes, psi2.vector(100), atol=1e-14)


def test_propagate_matches_oracle():
    chain = ChainSpec(6, field=0.2)
    psi2 = make_psi_k(chain, 2)
    np.testing.assert_allclose(
        propagate(chain, psi2, 2.5).site_amplitudes,
        dense_oracle(chain, psi2, 2.5).site_amplitudes,
        atol=1e-10,
    )
    chain = ChainSpec(8)
    psi3 = make_psi_k(chain, 3)
    np.testing.assert_allclose(
        propagate(chain, psi3, 3.1).site_amplitudes,
        dense_oracle(chain, psi3, 3.1).site_amplitudes,
        atol=1e-9,
    )


@pytest.mark.parametrize("h,t", [(0.0, 0.0), (0.3, 1.1), (-2.0, 7.5)])
def test_single_site_oracle(h, t):
    w = dense_oracle(ChainSpec(1, field=h), site_state(1, 1), t).site_amplitudes
    assert w[0] == pytest.approx(np.exp(-2j * h * t), abs=1e-14)


def test_dense_oracle_guard():
    with pytest.raises(ValueError):
        dense_propagator(ChainSpec(5000), 1.0)


def test_window_and_block_batches_match_pointwise():
    chain = ChainSpec(30, field=0.25)
    enc = make_encoding(30, 0.3, [(1, 0.5), (2, -0.5j), (4, math.sqrt(1 - 0.09 - 0.5))])
    times = np.array([0.0, 1.5, 14.2])
    w = window_amplitudes(chain, enc, [28, 29, 30], times)
    for i, t in enumerate(times):
        np.testing.assert_allclose(w[i], propagate(chain, enc, t).site_amplitudes[27:], atol=1e-12)
    blocks = amplitude_blocks(chain, [1, 2], [29, 30], times)
    assert blocks[2, 1, 0] == pytest.approx(amplitude(chain, 1, 30, 14.2), abs=1e-12)


sites_and_times = st.integers(1, 50).flatmap(
    lambda n: st.tuples(
        st.just(n), st.integers(1, n), st.integers(1, n),
        st.floats(0, 3 * n, allow_nan=False), st.floats(-2, 2, allow_nan=False),
    )
)


@given(sites_and_times)
def test_symmetries_and_unitarity(args):
    n, s, j, t, h = args
    chain = ChainSpec(n, field=h)
    f = amplitude(chain, s, j, t)
    assert abs(f - amplitude(chain, j, s, t)) < 1e-12
    assert abs(f - amplitude(chain, n + 1 - s, n + 1 - j, t)) < 1e-10
    assert abs(f - np.exp(-2j * h * t) * amplitude(chain.with_field(0.0), s, j, t)) < 1e-10
    assert abs(np.sum(np.abs(amplitude_row(chain, s, t)) ** 2) - 1) < 1e-10


@given(sites_and_times)
def test_parity_lemma(args):
    n, s, j, t, _ = args
    r = reduced_amplitude(ChainSpec(n), s, j, t)
    expected = ParityClass.PURELY_REAL if (s - j) % 2 == 0 else ParityClass.PURELY_IMAGINARY
    assert r.parity_class is expected
