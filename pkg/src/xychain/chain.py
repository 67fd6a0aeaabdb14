"""Chain parameters, the vacuum + single-excitation state model and mode tables.

Only the sector spanned by the all-down state ``|0>`` and the N one-flip
states ``|j>`` (j = 1..N) is ever represented. Sites are 1-based at every
public interface.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORM_INPUT_TOL = 1e-6
NORM_STATE_TOL = 1e-12


class NumericalAssertionError(AssertionError):
    """A numerical identity that must hold by construction was violated."""


@dataclass(frozen=True)
class ChainSpec:
    """Uniform XY chain: N sites, exchange coupling J > 0, global field h."""

    n_sites: int
    coupling: float = 1.0
    field: float = 0.0

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites:
            raise ValueError(f"n_sites must be an integer, got {self.n_sites!r}")
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {self.n_sites}")
        if not math.isfinite(self.coupling) or self.coupling <= 0:
            raise ValueError(f"coupling must be finite and > 0, got {self.coupling}")
        if not math.isfinite(self.field):
            raise ValueError(f"field must be finite, got {self.field}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "coupling", float(self.coupling))
        object.__setattr__(self, "field", float(self.field))

    def with_field(self, field: float) -> "ChainSpec":
        return ChainSpec(self.n_sites, self.coupling, field)

    def check_site(self, site: int, name: str = "site") -> int:
        if int(site) != site or not 1 <= site <= self.n_sites:
            raise ValueError(f"{name}={site} outside 1..{self.n_sites}")
        return int(site)


def make_chain(n_sites: int, coupling: float = 1.0, field: float = 0.0) -> ChainSpec:
    return ChainSpec(n_sites, coupling, field)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ModeTable:
    """Normal modes of the single-excitation block.

    ``wavenumbers[m-1] = pi m / (N+1)`` and
    ``energies[m-1] = 2h - 2J cos(q_m)``; both arrays are read-only.
    """

    chain: ChainSpec
    wavenumbers: np.ndarray
    energies: np.ndarray

    @property
    def n(self) -> int:
        return self.chain.n_sites

    @property
    def hopping_phases(self) -> np.ndarray:
        """``2 J cos(q_m)``: the field-free part of ``-E_m``."""
        return _hopping(self.chain.n_sites, self.chain.coupling)

    def sines(self, site: int) -> np.ndarray:
        """``sin(q_m * site)`` for m = 1..N."""
        return _sine_column(self.chain.n_sites, int(site))

    def sine_matrix(self, sites: Iterable[int]) -> np.ndarray:
        """Rows ``sin(q_m * s)`` for each requested site, shape (len(sites), N)."""
        return np.stack([self.sines(s) for s in sites])


@functools.lru_cache(maxsize=64)
def _hopping(n: int, coupling: float) -> np.ndarray:
    m = np.arange(1, n + 1)
    return _readonly(2.0 * coupling * np.cos(np.pi * m / (n + 1)))


@functools.lru_cache(maxsize=4096)
def _sine_column(n: int, site: int) -> np.ndarray:
    # reduce m*s modulo 2(N+1) in integers so the argument stays in [0, 2pi)
    m = np.arange(1, n + 1, dtype=np.int64)
    phase = (m * site) % (2 * (n + 1))
    return _readonly(np.sin(np.pi * phase / (n + 1)))


@functools.lru_cache(maxsize=64)
def mode_table(chain: ChainSpec) -> ModeTable:
    n = chain.n_sites
    q = np.pi * np.arange(1, n + 1) / (n + 1)
    energies = 2.0 * chain.field - _hopping(n, chain.coupling)
    return ModeTable(chain, _readonly(q), _readonly(np.array(energies)))


@dataclass(frozen=True)
class EncodingState:
    """``alpha0 |0> + sum_j alpha_j |j>`` with sparse excitation support."""

    n_sites: int
    vacuum_amplitude: complex
    excitation_amplitudes: tuple[tuple[int, complex], ...]

    @property
    def region_size(self) -> int:
        if not self.excitation_amplitudes:
            return 0
        return self.excitation_amplitudes[-1][0]

    @property
    def sites(self) -> np.ndarray:
        return np.array([s for s, _ in self.excitation_amplitudes], dtype=int)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([a for _, a in self.excitation_amplitudes], dtype=complex)

    def vector(self, length: int | None = None) -> np.ndarray:
        """Dense excitation amplitudes over sites 1..length (default: region size)."""
        length = self.region_size if length is None else length
        out = np.zeros(length, dtype=complex)
        for s, a in self.excitation_amplitudes:
            if s > length:
                raise ValueError(f"site {s} outside requested length {length}")
            out[s - 1] = a
        return out

    def norm_sq(self) -> float:
        return abs(self.vacuum_amplitude) ** 2 + float(np.sum(np.abs(self.amplitudes) ** 2))

    def to_json(self) -> str:
        return encoding_to_json(self)


def make_encoding(
    n_sites: int,
    vacuum_amplitude: complex,
    amplitudes: Sequence[tuple[int, complex]],
) -> EncodingState:
    """Validate and normalize an encoding.

    Inputs within 1e-6 of unit norm are rescaled to unit norm; anything
    further off is rejected. Zero amplitudes are kept, so an explicitly
    listed site still counts toward the region size.
    """
    if int(n_sites) != n_sites or n_sites < 1:
        raise ValueError(f"n_sites must be a positive integer, got {n_sites!r}")
    items = sorted(((int(s), complex(a)) for s, a in amplitudes), key=lambda item: item[0])
    sites = [s for s, _ in items]
    if len(set(sites)) != len(sites):
        raise ValueError(f"duplicate sites in encoding: {sites}")
    for s in sites:
        if not 1 <= s <= n_sites:
            raise ValueError(f"site {s} outside 1..{n_sites}")
    a0 = complex(vacuum_amplitude)
    values = [a0] + [a for _, a in items]
    if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in values):
        raise ValueError("amplitudes must be finite")
    norm = math.sqrt(math.fsum(abs(v) ** 2 for v in values))
    if abs(norm - 1.0) > NORM_INPUT_TOL:
        raise ValueError(f"encoding norm {norm!r} deviates from 1 by more than {NORM_INPUT_TOL}")
    return EncodingState(
        int(n_sites),
        a0 / norm,
        tuple((s, a / norm) for s, a in items),
    )


def vacuum(n_sites: int) -> EncodingState:
    return make_encoding(n_sites, 1.0, [])


def site_state(n_sites: int, site: int) -> EncodingState:
    return make_encoding(n_sites, 0.0, [(site, 1.0)])


@dataclass(frozen=True, eq=False)
class PropagatedState:
    """``alpha0 |0> + sum_j w_j(t) |j>`` with dense w over all N sites."""

    vacuum_amplitude: complex
    site_amplitudes: np.ndarray
    time: float

    def norm_sq(self) -> float:
        return abs(self.vacuum_amplitude) ** 2 + float(np.sum(np.abs(self.site_amplitudes) ** 2))


def format_number(x: float) -> str:
    """17 significant digits, locale independent."""
    return f"{float(x):.17g}"


def encoding_to_dict(enc: EncodingState) -> dict:
    a0 = complex(enc.vacuum_amplitude)
    return {
        "n": enc.n_sites,
        "alpha0": [a0.real, a0.imag],
        "amps": [{"site": s, "re": a.real, "im": a.imag} for s, a in enc.excitation_amplitudes],
    }


def encoding_to_json(enc: EncodingState) -> str:
    a0 = complex(enc.vacuum_amplitude)
    amps = ", ".join(
        f'{{"site": {s}, "re": {format_number(a.real)}, "im": {format_number(a.imag)}}}'
        for s, a in enc.excitation_amplitudes
    )
    return (
        f'{{"n": {enc.n_sites}, '
        f'"alpha0": [{format_number(a0.real)}, {format_number(a0.imag)}], '
        f'"amps": [{amps}]}}'
    )


def encoding_from_dict(data: dict) -> EncodingState:
    try:
        re0, im0 = data["alpha0"]
        amps = [(int(item["site"]), complex(item["re"], item["im"])) for item in data["amps"]]
        n = int(data["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed encoding record: {exc}") from exc
    return make_encoding(n, complex(re0, im0), amps)


def encoding_from_json(text: str) -> EncodingState:
    return encoding_from_dict(json.loads(text))
