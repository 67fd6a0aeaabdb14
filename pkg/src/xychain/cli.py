"""Command-line front end: peak tables, parameter sweeps, encodings, unit conversion.

Every command writes data to stdout (or ``--out``) and progress to stderr.
CSV output starts with one ``#`` metadata line, then a header row; floats
use 17 significant digits.
"""

from __future__ import annotations

import argparse
import functools
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import constants

from . import __version__
from .chain import (
    ChainSpec,
    EncodingState,
    NumericalAssertionError,
    encoding_from_json,
    format_number,
)
from .encodings import (
    XiParameters,
    encoding_distance,
    make_psi_k,
    make_xi_k,
    optimal_encoding,
    top_singular_series,
)
from .fidelity import (
    QuadratureError,
    Variant,
    average_fidelity,
    field_decomposition,
    field_projection,
    fidelity_series,
    fidelity_xi,
    psi_fidelity_series,
    xi_fidelity_from_components,
)
from .optimizer import (
    COARSE_STEP,
    REFINE_TOL,
    PeakResult,
    SweepError,
    envelope_peak,
    find_peak,
    sweep,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

# chains at least this long search the arrival envelope, confirmed by a coarse full scan
ENVELOPE_MIN_N = 2000
DELTA_FLOOR = -1e-9

PHYS_TIME_CAVEAT = (
    "note: t_phys = t0 * hbar / (k_B * J); t0 = 51.75 at J = 4.1 K is about "
    "9.6e-11 s under this conversion, not 1.12 microseconds"
)


# ---------------------------------------------------------------- computations


def _peak(chain: ChainSpec, objective: Callable, window=None) -> PeakResult:
    if window is None and chain.n_sites >= ENVELOPE_MIN_N:
        return envelope_peak(chain, objective, vectorized=True)
    return find_peak(chain, objective, window, vectorized=True)


def psi_peak(chain: ChainSpec, k: int, window=None) -> PeakResult:
    return _peak(chain, functools.partial(psi_fidelity_series, chain, k), window)


def optimal_peak(chain: ChainSpec, r: int, window=None) -> PeakResult:
    return _peak(chain, functools.partial(top_singular_series, chain, r), window)


def encoding_peak(chain: ChainSpec, enc: EncodingState, window=None) -> PeakResult:
    return _peak(chain, functools.partial(fidelity_series, chain, enc), window)


def table1_cell(point: tuple[int, int]) -> dict:
    k, n = point
    peak = psi_peak(ChainSpec(n), k)
    return {"N": n, "k": k, "F": peak.F, "t0": peak.t0, "variant": "eq6"}


def scaling_cell(point: tuple[int, int]) -> dict:
    k, n = point
    peak = psi_peak(ChainSpec(n), k)
    return {"N": n, "k": k, "F_max": peak.F, "t0": peak.t0, "variant": "eq6"}


@dataclass(frozen=True)
class ComparisonRow:
    N: int
    r: int
    F_r: float
    delta_r: float
    d_r: float
    t0: float
    t0_psi: float

    def as_dict(self) -> dict:
        return {
            "N": self.N, "r": self.r, "F_r": self.F_r, "delta_r": self.delta_r,
            "d_r": self.d_r, "t0": self.t0, "t0_psi": self.t0_psi, "variant": "eq6",
        }


def table2_cell(point: tuple[int, int]) -> ComparisonRow:
    r, n = point
    chain = ChainSpec(n)
    k = (r + 1) // 2
    opt_peak = optimal_peak(chain, r)
    psi = psi_peak(chain, k)
    delta = opt_peak.F - psi.F
    if delta < DELTA_FLOOR:
        raise NumericalAssertionError(
            f"optimal encoding (F={opt_peak.F}) beaten by Psi_{k} (F={psi.F}) at N={n}, r={r}"
        )
    opt = optimal_encoding(chain, r, opt_peak.t0)
    d = encoding_distance(opt, make_psi_k(chain, k))
    return ComparisonRow(n, r, opt.top_singular_value, delta, d, opt_peak.t0, psi.t0)


def avg_cell(point: tuple[int, int], variants: tuple[Variant, ...]) -> list[dict]:
    k, n = point
    chain = ChainSpec(n)
    peak = psi_peak(chain, k)
    decomp = field_decomposition(chain, k, peak.t0)
    spread = decomp.spread()
    return [
        {"N": n, "k": k, "t0": peak.t0, "variant": v.value,
         "F_avg": average_fidelity(decomp.abs_L, spread, k, v)}
        for v in variants
    ]


def field_sweep_rows(
    n: int, k: int, theta: float, hs: np.ndarray, t: float, variants: tuple[Variant, ...]
) -> list[dict]:
    chain = ChainSpec(n)
    decomp = field_decomposition(chain, k, t)
    spread = decomp.spread()
    rows = []
    for h in hs:
        for v in variants:
            if v is Variant.PRINTED_EQ8:
                f = float(xi_fidelity_from_components(
                    theta, float(field_projection(decomp, h)), decomp.abs_L, spread, k, v))
            else:
                f = fidelity_xi(chain.with_field(float(h)), XiParameters(theta, 0.0, k), t, v).fidelity
            rows.append({"h": float(h), "t": t, "variant": v.value, "F": f})
    return rows


def theta_sweep_rows(
    n: int, k: int, thetas: np.ndarray, h: float, t: float, variant: Variant
) -> list[dict]:
    chain = ChainSpec(n, field=h)
    return [
        {"theta": float(th), "t": t, "h": h, "variant": variant.value,
         "F": fidelity_xi(chain, XiParameters(float(th), 0.0, k), t, variant).fidelity}
        for th in thetas
    ]


def to_physical_time(t0: float, j_kelvin: float) -> float:
    """Dimensionless time (units hbar/J) to seconds for J given in kelvin."""
    if not math.isfinite(j_kelvin) or j_kelvin <= 0:
        raise ValueError(f"J must be a positive temperature in kelvin, got {j_kelvin}")
    return t0 * constants.hbar / (constants.k * j_kelvin)


# ---------------------------------------------------------------- argument parsing


def parse_number(text: str) -> float:
    """A float, or a multiple/fraction of pi such as ``pi/2`` or ``2pi/3``."""
    text = text.strip().replace(" ", "")
    m = re.fullmatch(r"([0-9.eE+-]*)\*?pi(?:/([0-9.eE+-]+))?", text)
    if m:
        num = float(m.group(1)) if m.group(1) not in ("", "+") else 1.0
        if m.group(1) == "-":
            num = -1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:step`` (hi inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be lo:hi:step, got {text!r}")
        lo, hi, step = (parse_number(p) for p in parts)
        if step <= 0 or hi < lo:
            raise argparse.ArgumentTypeError(f"invalid grid {text!r}")
        count = int(math.floor((hi - lo) / step + 1e-9))
        # clamp so float accumulation cannot step past hi (e.g. 0:pi:pi/100)
        return np.minimum(lo + step * np.arange(count + 1), hi)
    return np.array([parse_number(p) for p in text.split(",") if p.strip()])


def parse_int_list(text: str) -> list[int]:
    """Like ``parse_grid``; ``lo:hi`` steps by one."""
    if text.count(":") == 1:
        text += ":1"
    values = parse_grid(text)
    if len(values) == 0 or any(v != round(v) for v in values):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(round(v)) for v in values]


def parse_window(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"window must be lo:hi, got {text!r}")
    lo, hi = (parse_number(p) for p in parts)
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return lo, hi


@dataclass
class RunConfig:
    command: str
    n: list[int] = field(default_factory=list)
    k: list[int] = field(default_factory=list)
    r: list[int] = field(default_factory=list)
    theta: float | None = None
    phi: float = 0.0
    h: float = 0.0
    t: float | None = None
    window: tuple[float, float] | None = None
    grid: np.ndarray | None = None
    encoding: str | None = None
    j_kelvin: float | None = None
    variant: Variant | None = None
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1
    quiet: bool = False

    def validate(self) -> None:
        need_n = {"table1", "table2", "scaling", "field-sweep", "theta-sweep", "avg", "peak", "encode"}
        if self.command in need_n and not self.n:
            raise ValueError(f"{self.command} requires --n")
        if any(v < 1 for v in self.n):
            raise ValueError("--n values must be >= 1")
        if any(v < 1 for v in self.k) or any(v < 1 for v in self.r):
            raise ValueError("--k and --r values must be >= 1")
        if self.command in ("table1", "scaling", "avg") and not self.k:
            raise ValueError(f"{self.command} requires --k")
        if self.command == "table2" and not self.r:
            raise ValueError("table2 requires --r")
        if self.command in ("field-sweep", "theta-sweep"):
            if len(self.n) != 1 or len(self.k) != 1:
                raise ValueError(f"{self.command} takes exactly one --n and one --k")
            if self.grid is None:
                raise ValueError(f"{self.command} requires --grid")
            if self.command == "field-sweep" and self.theta is None:
                raise ValueError("field-sweep requires --theta")
        if self.command == "peak":
            chosen = sum(bool(x) for x in (self.k, self.r, self.encoding))
            if chosen != 1:
                raise ValueError("peak takes exactly one of --k, --r, --encoding")
        if self.command == "encode":
            if bool(self.k) == bool(self.r):
                raise ValueError("encode takes exactly one of --k or --r")
        if self.theta is not None and not 0.0 <= self.theta <= math.pi:
            raise ValueError("--theta must lie in [0, pi]")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ValueError("--phi must lie in [0, 2pi)")
        if self.command == "phys-time":
            if self.t is None or self.j_kelvin is None:
                raise ValueError("phys-time requires --t and --j-kelvin")
        if self.fmt not in ("csv", "json"):
            raise ValueError("--format must be csv or json")
        if self.workers < 1:
            raise ValueError("--workers must be >= 1")


DEFAULT_VARIANT = {"avg": Variant.PRINTED_EQ8, "field-sweep": Variant.PRINTED_EQ8}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xychain",
        description="State-transfer fidelities over uniform XY spin chains (J = 1, hbar = 1).",
    )
    parser.add_argument("--version", action="version", version=f"xychain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--n", type=parse_int_list, default=[], help="chain lengths: 100,200 or 100:600:100")
        p.add_argument("--k", type=parse_int_list, default=[], help="Psi_k family members")
        p.add_argument("--r", type=parse_int_list, default=[], help="encoding region sizes")
        p.add_argument("--theta", type=parse_number, help="polar angle, e.g. pi/2")
        p.add_argument("--phi", type=parse_number, default=0.0)
        p.add_argument("--h", type=parse_number, default=0.0, help="magnetic field")
        p.add_argument("--t", type=parse_number, help="fixed time (default: Psi_k peak)")
        p.add_argument("--window", type=parse_window, help="time window lo:hi")
        p.add_argument("--grid", type=parse_grid, help="sweep grid lo:hi:step")
        p.add_argument("--variant", choices=["eq6", "eq8"])
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", dest="fmt", choices=["csv", "json"],
                       help="default csv (json for encode)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--quiet", action="store_true", help="no progress on stderr")

    helps = {
        "table1": "peak fidelity and arrival time of Psi_k over a (k, N) grid",
        "table2": "optimal encodings vs Psi_(r+1)/2 over an (r, N) grid",
        "scaling": "peak Psi_k fidelity as a function of N",
        "field-sweep": "qubit fidelity vs magnetic field",
        "theta-sweep": "qubit fidelity vs polar angle",
        "avg": "theta-averaged qubit fidelity with optimal field",
        "peak": "peak fidelity and time for one encoding",
        "encode": "emit an encoding as JSON",
        "phys-time": "convert a dimensionless time to seconds",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        common(p)
        if name == "peak":
            p.add_argument("--encoding", help="JSON encoding file")
        if name == "phys-time":
            p.add_argument("--j-kelvin", type=parse_number, help="exchange coupling in kelvin")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    variant = Variant.parse(ns.variant) if ns.variant else DEFAULT_VARIANT.get(
        ns.command, Variant.CANONICAL_EQ6
    )
    cfg = RunConfig(
        command=ns.command, n=ns.n, k=ns.k, r=ns.r, theta=ns.theta, phi=ns.phi % (2 * math.pi),
        h=ns.h, t=ns.t, window=ns.window, grid=ns.grid,
        encoding=getattr(ns, "encoding", None), j_kelvin=getattr(ns, "j_kelvin", None),
        variant=variant, out=ns.out,
        fmt=ns.fmt or ("json" if ns.command == "encode" else "csv"), workers=ns.workers, quiet=ns.quiet,
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- output


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _describe(value: Any) -> str:
    """Compact metadata form; floats use their shortest round-trip repr."""
    if isinstance(value, np.ndarray):
        value = [float(v) for v in value]
        if len(value) > 2 and np.allclose(np.diff(value), value[1] - value[0]):
            return f"{value[0]!r}:{value[-1]!r}:{value[1] - value[0]!r}"
    if isinstance(value, (list, tuple)):
        return ",".join(_describe(v) for v in value)
    if isinstance(value, Variant):
        return value.value
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return _cell(value)


def render(rows: list[dict], meta: dict, fmt: str) -> str:
    if fmt == "json":
        payload = {
            "meta": {k: _describe(v) for k, v in meta.items()},
            "rows": [{k: _json_value(v) for k, v in row.items()} for row in rows],
        }
        return json.dumps(payload, indent=1) + "\n"
    lines = ["# " + " ".join(f"{k}={_describe(v)}" for k, v in meta.items())]
    if rows:
        header = list(rows[0].keys())
        lines.append(",".join(header))
        lines.extend(",".join(_cell(row[h]) for h in header) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------- commands


def _progress(cfg: RunConfig):
    if cfg.quiet:
        return None

    def report(done: int, total: int) -> None:
        print(f"[{cfg.command}] {done}/{total}", file=sys.stderr, flush=True)

    return report


def _variants(cfg: RunConfig) -> tuple[Variant, ...]:
    other = Variant.CANONICAL_EQ6 if cfg.variant is Variant.PRINTED_EQ8 else Variant.PRINTED_EQ8
    return (cfg.variant, other)


def _meta(cfg: RunConfig, peak_search: bool = True, **extra) -> dict:
    meta = {"xychain": __version__, "command": cfg.command, "variant": cfg.variant}
    meta.update({k: v for k, v in extra.items() if v is not None})
    if peak_search:
        meta.update(step=COARSE_STEP, tol=REFINE_TOL)
    return meta


def cmd_table1(cfg: RunConfig) -> tuple[list[dict], dict]:
    points = [(k, n) for k in cfg.k for n in cfg.n]
    rows = sweep(points, table1_cell, workers=cfg.workers, progress=_progress(cfg))
    return rows, _meta(cfg, k=cfg.k, n=cfg.n)


def cmd_table2(cfg: RunConfig) -> tuple[list[dict], dict]:
    if not cfg.quiet and any(r % 2 == 0 for r in cfg.r):
        print("warning: for even r, Psi_(r/2) covers only r-1 of the r sites", file=sys.stderr)
    points = [(r, n) for r in cfg.r for n in cfg.n]
    bad = [(r, n) for r, n in points if r > n]
    if bad:
        raise ValueError(f"r exceeds N for {bad}")
    rows = sweep(points, table2_cell, workers=cfg.workers, progress=_progress(cfg))
    return [row.as_dict() for row in rows], _meta(cfg, r=cfg.r, n=cfg.n)


def cmd_scaling(cfg: RunConfig) -> tuple[list[dict], dict]:
    points = [(k, n) for k in cfg.k for n in cfg.n]
    rows = sweep(points, scaling_cell, workers=cfg.workers, progress=_progress(cfg))
    return rows, _meta(cfg, k=cfg.k, n=cfg.n)


def cmd_avg(cfg: RunConfig) -> tuple[list[dict], dict]:
    points = [(k, n) for k in cfg.k for n in cfg.n]
    cell = functools.partial(avg_cell, variants=_variants(cfg))
    nested = sweep(points, cell, workers=cfg.workers, progress=_progress(cfg))
    return [row for group in nested for row in group], _meta(cfg, k=cfg.k, n=cfg.n)


def _policy_time(cfg: RunConfig, chain: ChainSpec, k: int) -> float:
    if cfg.t is not None:
        return cfg.t
    return psi_peak(chain, k, cfg.window).t0


def cmd_field_sweep(cfg: RunConfig) -> tuple[list[dict], dict]:
    n, k = cfg.n[0], cfg.k[0]
    t = _policy_time(cfg, ChainSpec(n), k)
    rows = field_sweep_rows(n, k, cfg.theta, cfg.grid, t, _variants(cfg))
    return rows, _meta(cfg, n=n, k=k, theta=cfg.theta, h_grid=cfg.grid,
                       t_policy="fixed" if cfg.t is not None else "psi-peak")


def cmd_theta_sweep(cfg: RunConfig) -> tuple[list[dict], dict]:
    n, k = cfg.n[0], cfg.k[0]
    t = _policy_time(cfg, ChainSpec(n), k)
    rows = theta_sweep_rows(n, k, cfg.grid, cfg.h, t, cfg.variant)
    return rows, _meta(cfg, n=n, k=k, h=cfg.h, theta_grid=cfg.grid,
                       t_policy="fixed" if cfg.t is not None else "psi-peak")


def _load_encoding(path: str) -> EncodingState:
    with open(path, encoding="utf-8") as fh:
        return encoding_from_json(fh.read())


def cmd_peak(cfg: RunConfig) -> tuple[list[dict], dict]:
    rows = []
    enc = _load_encoding(cfg.encoding) if cfg.encoding else None
    for n in cfg.n:
        chain = ChainSpec(n, field=cfg.h)
        if enc is not None:
            if enc.n_sites != n:
                raise ValueError(f"encoding file is for N={enc.n_sites}, not {n}")
            res = encoding_peak(chain, enc, cfg.window)
            rows.append({"N": n, "objective": "encoding", "F": res.F, "t0": res.t0})
        for k in cfg.k:
            res = psi_peak(chain, k, cfg.window)
            rows.append({"N": n, "objective": f"psi{k}", "F": res.F, "t0": res.t0})
        for r in cfg.r:
            res = optimal_peak(chain, r, cfg.window)
            rows.append({"N": n, "objective": f"optimal{r}", "F": res.F, "t0": res.t0})
    for row in rows:
        row["variant"] = "eq6"
    return rows, _meta(cfg, n=cfg.n, k=cfg.k or None, r=cfg.r or None, window=cfg.window)


def build_encoding(cfg: RunConfig) -> EncodingState:
    chain = ChainSpec(cfg.n[0], field=cfg.h)
    if cfg.k:
        if cfg.theta is None:
            return make_psi_k(chain, cfg.k[0])
        return make_xi_k(chain, XiParameters(cfg.theta, cfg.phi, cfg.k[0]))
    r = cfg.r[0]
    t = cfg.t if cfg.t is not None else optimal_peak(chain, r, cfg.window).t0
    return optimal_encoding(chain, r, t).as_state(chain.n_sites)


def cmd_phys_time(cfg: RunConfig) -> tuple[list[dict], dict]:
    seconds = to_physical_time(cfg.t, cfg.j_kelvin)
    if not cfg.quiet:
        print(PHYS_TIME_CAVEAT, file=sys.stderr)
    return [{"t": cfg.t, "J_kelvin": cfg.j_kelvin, "seconds": seconds}], _meta(cfg, False)


COMMANDS = {
    "table1": cmd_table1,
    "table2": cmd_table2,
    "scaling": cmd_scaling,
    "field-sweep": cmd_field_sweep,
    "theta-sweep": cmd_theta_sweep,
    "avg": cmd_avg,
    "peak": cmd_peak,
    "phys-time": cmd_phys_time,
}


def run(cfg: RunConfig) -> None:
    if cfg.command == "encode":
        enc = build_encoding(cfg)
        if cfg.fmt == "json":
            _emit(enc.to_json() + "\n", cfg.out)
        else:
            rows = [{"site": 0, "re": complex(enc.vacuum_amplitude).real,
                     "im": complex(enc.vacuum_amplitude).imag}]
            rows += [{"site": s, "re": a.real, "im": a.imag} for s, a in enc.excitation_amplitudes]
            _emit(render(rows, _meta(cfg, False, n=enc.n_sites), "csv"), cfg.out)
        return
    rows, meta = COMMANDS[cfg.command](cfg)
    _emit(render(rows, meta, cfg.fmt), cfg.out)


def _is_numerical(exc: BaseException) -> bool:
    return isinstance(exc, (NumericalAssertionError, QuadratureError, FloatingPointError))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"xychain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        run(cfg)
    except SweepError as exc:
        print(f"xychain: error: {exc}", file=sys.stderr)
        if _is_numerical(exc.cause):
            return EXIT_NUMERICAL
        if isinstance(exc.cause, OSError):
            return EXIT_IO
        return EXIT_USAGE
    except OSError as exc:
        print(f"xychain: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:
        if _is_numerical(exc):
            print(f"xychain: numerical check failed: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        if isinstance(exc, ValueError):
            print(f"xychain: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
