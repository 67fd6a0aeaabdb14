"""Single-excitation transition amplitudes and state propagation.

    f_{s,j}(t) = 2/(N+1) sum_m sin(q_m s) sin(q_m j) exp(-i E_m t)

Single amplitudes are direct mode sums. Whole rows over j are a type-I
discrete sine transform of ``sin(q_m s) exp(-i E_m t)`` and go through
``scipy.fft.dst``. ``dense_oracle`` diagonalizes the tridiagonal block
numerically and is the independent check on both paths.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.fft import dst

from .chain import (
    ChainSpec,
    EncodingState,
    NumericalAssertionError,
    PropagatedState,
    mode_table,
)

PARITY_TOL = 1e-10
DENSE_ORACLE_MAX_N = 4096
# elements of the (times x modes) phase matrix built per chunk in batch evaluations
_CHUNK_ELEMENTS = 2_000_000


class ParityClass(enum.Enum):
    PURELY_REAL = "real"
    PURELY_IMAGINARY = "imaginary"


@dataclass(frozen=True)
class ReducedAmplitude:
    """Field-free amplitude, stored as its single non-vanishing component."""

    parity_class: ParityClass
    value: float
    s: int
    j: int
    time: float

    @property
    def complex_value(self) -> complex:
        if self.parity_class is ParityClass.PURELY_REAL:
            return complex(self.value, 0.0)
        return complex(0.0, self.value)


def _phases(chain: ChainSpec, t: float) -> np.ndarray:
    return np.exp(-1j * mode_table(chain).energies * t)


def amplitude(chain: ChainSpec, s: int, j: int, t: float) -> complex:
    """Transition amplitude ``<j| exp(-iHt) |s>`` by direct mode summation."""
    s = chain.check_site(s, "s")
    j = chain.check_site(j, "j")
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    modes = mode_table(chain)
    terms = modes.sines(s) * modes.sines(j) * _phases(chain, t)
    return complex(2.0 / (chain.n_sites + 1) * np.sum(terms))


def reduced_amplitude(chain: ChainSpec, s: int, j: int, t: float) -> ReducedAmplitude:
    """``f~_{s,j}(t) = exp(2iht) f_{s,j}(t)``, which is real for equal site
    parity and imaginary otherwise. The dropped component is checked."""
    s = chain.check_site(s, "s")
    j = chain.check_site(j, "j")
    modes = mode_table(chain)
    terms = modes.sines(s) * modes.sines(j) * np.exp(1j * modes.hopping_phases * t)
    value = complex(2.0 / (chain.n_sites + 1) * np.sum(terms))
    if (s - j) % 2 == 0:
        kind, kept, dropped = ParityClass.PURELY_REAL, value.real, value.imag
    else:
        kind, kept, dropped = ParityClass.PURELY_IMAGINARY, value.imag, value.real
    if abs(dropped) >= PARITY_TOL:
        raise NumericalAssertionError(
            f"reduced amplitude f~({s},{j}) at t={t} on N={chain.n_sites} should be "
            f"{kind.value} but the other component is {dropped:.3e}"
        )
    return ReducedAmplitude(kind, float(kept), s, j, float(t))


def _row_from_spectrum(spectrum: np.ndarray) -> np.ndarray:
    # scipy's DST-I carries a factor 2: y_k = 2 sum_n x_n sin(pi (k+1)(n+1)/(N+1))
    n = spectrum.shape[-1]
    return dst(spectrum, type=1, axis=-1) / (n + 1)


def amplitude_row(chain: ChainSpec, s: int, t: float) -> np.ndarray:
    """``[f_{s,1}(t), ..., f_{s,N}(t)]`` in O(N log N)."""
    s = chain.check_site(s, "s")
    modes = mode_table(chain)
    return _row_from_spectrum(modes.sines(s) * _phases(chain, t))


def amplitudes(chain: ChainSpec, s: int, sites: Sequence[int], t: float) -> np.ndarray:
    """``f_{s,j}(t)`` for the requested j.

    Uses direct sums for a handful of sites and one sine transform once at
    least sqrt(N) sites are needed.
    """
    sites = [chain.check_site(j, "j") for j in sites]
    if len(sites) >= math.isqrt(chain.n_sites):
        row = amplitude_row(chain, s, t)
        return row[np.asarray(sites, dtype=int) - 1]
    return np.array([amplitude(chain, s, j, t) for j in sites], dtype=complex)


def _check_encoding(chain: ChainSpec, enc: EncodingState) -> None:
    if enc.n_sites != chain.n_sites:
        raise ValueError(f"encoding is for N={enc.n_sites}, chain has N={chain.n_sites}")


def _spectral_weights(chain: ChainSpec, enc: EncodingState) -> np.ndarray:
    """``b_m = sum_s alpha_s sin(q_m s)``."""
    modes = mode_table(chain)
    b = np.zeros(chain.n_sites, dtype=complex)
    for s, a in enc.excitation_amplitudes:
        b += a * modes.sines(s)
    return b


def propagate(chain: ChainSpec, enc: EncodingState, t: float) -> PropagatedState:
    """``w_j(t) = sum_s alpha_s f_{s,j}(t)`` for all j, via one sine transform.

    The vacuum amplitude is an eigenstate component with zero energy and is
    carried through unchanged.
    """
    _check_encoding(chain, enc)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    w = _row_from_spectrum(_spectral_weights(chain, enc) * _phases(chain, t))
    return PropagatedState(enc.vacuum_amplitude, w, float(t))


def _time_chunks(times: np.ndarray, n: int) -> Iterable[np.ndarray]:
    size = max(1, _CHUNK_ELEMENTS // max(n, 1))
    for start in range(0, len(times), size):
        yield times[start:start + size]


def window_amplitudes(
    chain: ChainSpec, enc: EncodingState, sites: Sequence[int], times
) -> np.ndarray:
    """``w_j(t)`` for a few sites over many times, shape (len(times), len(sites)).

    Mode sums batched over time; this is the fast path for time scans where
    only the receiver window matters.
    """
    _check_encoding(chain, enc)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    modes = mode_table(chain)
    sines = modes.sine_matrix([chain.check_site(j, "j") for j in sites])
    b = _spectral_weights(chain, enc) * (2.0 / (chain.n_sites + 1))
    out = np.empty((len(times), len(sites)), dtype=complex)
    pos = 0
    for chunk in _time_chunks(times, chain.n_sites):
        phases = np.exp(-1j * np.outer(chunk, modes.energies))
        out[pos:pos + len(chunk)] = (phases * b) @ sines.T
        pos += len(chunk)
    return out


def amplitude_blocks(
    chain: ChainSpec, sources: Sequence[int], targets: Sequence[int], times
) -> np.ndarray:
    """``K[t, b, a] = f_{sources[a], targets[b]}(t)``, shape (T, len(targets), len(sources))."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    modes = mode_table(chain)
    src = modes.sine_matrix([chain.check_site(s, "s") for s in sources])
    dst_ = modes.sine_matrix([chain.check_site(j, "j") for j in targets])
    dst_ = dst_ * (2.0 / (chain.n_sites + 1))
    out = np.empty((len(times), len(targets), len(sources)), dtype=complex)
    pos = 0
    for chunk in _time_chunks(times, chain.n_sites * max(len(targets), 1)):
        phases = np.exp(-1j * np.outer(chunk, modes.energies))
        out[pos:pos + len(chunk)] = (phases[:, None, :] * dst_[None]) @ src.T
        pos += len(chunk)
    return out


def single_excitation_hamiltonian(chain: ChainSpec) -> np.ndarray:
    """Dense N x N block: ``2h`` on the diagonal, ``-J`` between neighbours."""
    n = chain.n_sites
    h = np.diag(np.full(n, 2.0 * chain.field))
    off = np.full(n - 1, -chain.coupling)
    return h + np.diag(off, 1) + np.diag(off, -1)


def dense_propagator(chain: ChainSpec, t: float) -> np.ndarray:
    """``exp(-iHt)`` on the single-excitation block from a numerical
    eigendecomposition (no closed-form modes)."""
    if chain.n_sites > DENSE_ORACLE_MAX_N:
        raise ValueError(
            f"dense oracle limited to N <= {DENSE_ORACLE_MAX_N}, got N={chain.n_sites}"
        )
    evals, evecs = np.linalg.eigh(single_excitation_hamiltonian(chain))
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def dense_oracle(chain: ChainSpec, enc: EncodingState, t: float) -> PropagatedState:
    _check_encoding(chain, enc)
    u = dense_propagator(chain, t)
    w = u @ enc.vector(chain.n_sites)
    return PropagatedState(enc.vacuum_amplitude, w, float(t))
