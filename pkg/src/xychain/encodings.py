"""Encoding families and the sender-to-receiver transfer block.

``make_psi_k`` builds the alternating odd-site states, ``make_xi_k`` the
qubit spanned by the vacuum and such a state. ``optimal_encoding`` returns
the top right singular vector of the r x r block of the propagator that
maps the first r sites onto the last r sites; its singular value is the
post-decoding fidelity ``sqrt(C_B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, EncodingState, make_encoding
from .propagator import amplitude_blocks

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class XiParameters:
    theta: float
    phi: float
    k: int

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")


def check_k(chain: ChainSpec, k: int) -> int:
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if 2 * k - 1 > chain.n_sites:
        raise ValueError(f"k={k} needs {2 * k - 1} sites, chain has {chain.n_sites}")
    return int(k)


def psi_k_vector(k: int, length: int | None = None) -> np.ndarray:
    """Alternating ``+-1/sqrt(k)`` on sites 1, 3, ..., 2k-1 (dense, 0-based array)."""
    length = 2 * k - 1 if length is None else length
    v = np.zeros(length)
    v[0:2 * k - 1:2] = np.where(np.arange(k) % 2 == 0, 1.0, -1.0) / math.sqrt(k)
    return v


def make_psi_k(chain: ChainSpec, k: int) -> EncodingState:
    k = check_k(chain, k)
    amp = 1.0 / math.sqrt(k)
    return make_encoding(
        chain.n_sites, 0.0, [(2 * m + 1, amp if m % 2 == 0 else -amp) for m in range(k)]
    )


def make_xi_k(chain: ChainSpec, params: XiParameters) -> EncodingState:
    """``cos(theta/2)|0> + exp(i phi) sin(theta/2)|Psi_k>``."""
    psi = make_psi_k(chain, params.k)
    c = math.cos(params.theta / 2)
    w = complex(math.cos(params.phi), math.sin(params.phi)) * math.sin(params.theta / 2)
    return make_encoding(
        chain.n_sites, c, [(s, w * a) for s, a in psi.excitation_amplitudes]
    )


def check_r(chain: ChainSpec, r: int) -> int:
    if int(r) != r or not 1 <= r <= chain.n_sites:
        raise ValueError(f"region size r={r} outside 1..{chain.n_sites}")
    return int(r)


def transfer_blocks(chain: ChainSpec, r: int, times) -> np.ndarray:
    """Batch of transfer blocks, shape (len(times), r, r)."""
    r = check_r(chain, r)
    n = chain.n_sites
    return amplitude_blocks(chain, range(1, r + 1), range(n - r + 1, n + 1), times)


def transfer_block(chain: ChainSpec, r: int, t: float) -> np.ndarray:
    """``K[b, a] = f_{a, N-r+b}(t)``: the single-excitation matrix of
    ``P_B exp(-iHt) P_A``. ``C_B = ||K v||^2`` for an encoding vector v."""
    return transfer_blocks(chain, r, [t])[0]


def capture_probability(chain: ChainSpec, enc: EncodingState, t: float) -> float:
    """Probability that the excitation sits in the last r sites at time t."""
    r = enc.region_size
    if r == 0:
        return 0.0
    v = enc.vector(r)
    return float(np.linalg.norm(transfer_block(chain, r, t) @ v) ** 2)


def top_singular_series(chain: ChainSpec, r: int, times) -> np.ndarray:
    """Largest singular value of the transfer block at each time."""
    return np.linalg.svd(transfer_blocks(chain, r, times), compute_uv=False)[:, 0]


@dataclass(frozen=True, eq=False)
class OptimalEncodingResult:
    region_size: int
    time: float
    top_singular_value: float
    encoding: np.ndarray
    spectral_gap: float
    singular_values: np.ndarray

    @property
    def fidelity(self) -> float:
        return self.top_singular_value

    @property
    def capture_probability(self) -> float:
        return self.top_singular_value**2

    def as_state(self, n_sites: int) -> EncodingState:
        return make_encoding(
            n_sites, 0.0, [(i + 1, a) for i, a in enumerate(self.encoding)]
        )


def _reference_vector(r: int) -> np.ndarray:
    if r % 2 == 1:
        return psi_k_vector((r + 1) // 2).astype(complex)
    return np.full(r, 1.0 / math.sqrt(r), dtype=complex)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return v * np.exp(-1j * np.angle(v[i]))


def optimal_encoding(chain: ChainSpec, r: int, t: float) -> OptimalEncodingResult:
    """Top right singular vector of the transfer block.

    If the top singular value is degenerate (gap < 1e-10), the vector is the
    normalized projection of a reference state onto the top singular
    subspace: ``Psi_{(r+1)/2}`` for odd r, the uniform vector for even r.
    The returned vector's largest-magnitude component is real and positive.
    """
    k_block = transfer_block(chain, r, t)
    _, sv, vh = np.linalg.svd(k_block)
    top = sv[0]
    gap = top - (sv[1] if len(sv) > 1 else 0.0)
    vec = vh[0].conj()
    if gap < DEGENERACY_TOL:
        subspace = vh[sv >= top - DEGENERACY_TOL].conj()
        ref = _reference_vector(len(sv))
        proj = subspace.T @ (subspace.conj() @ ref)
        norm = np.linalg.norm(proj)
        if norm > DEGENERACY_TOL:
            vec = proj / norm
    vec = _fix_phase(vec / np.linalg.norm(vec))
    return OptimalEncodingResult(int(r), float(t), float(top), vec, float(gap), sv)


def encoding_distance(opt: OptimalEncodingResult, psi: EncodingState) -> float:
    """Euclidean distance between the optimal vector and ``psi``'s excitation
    amplitudes over sites 1..r, after rotating the optimal vector's global
    phase to maximize the real part of the overlap."""
    r = opt.region_size
    if psi.region_size > r:
        raise ValueError(f"psi occupies site {psi.region_size}, beyond region size {r}")
    target = psi.vector(r)
    overlap = np.vdot(target, opt.encoding)
    aligned = opt.encoding * np.exp(-1j * np.angle(overlap)) if abs(overlap) > 0 else opt.encoding
    return float(np.linalg.norm(aligned - target))
