"""Monte Carlo BER sweeps, configuration files and CSV output.

Every trial batch ("chunk") draws from its own random stream keyed by
``(master_seed, point index, chunk index)``. Chunk sizes depend only on the
configuration, so the output is byte-identical for any number of workers.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .channel import KIDNEY_PHANTOM, FadingModel, NakagamiParams
from .codebook import build_codebook, frames_for_bits, generate_reader_code
from .errors import ConfigError
from .kernels import energy_statistics
from .tagphy import FrameGrid, delay_samples, make_monocycle
from .theory import ber_conditional, ber_faded, db_to_linear

__all__ = [
    "SimConfig",
    "BerRow",
    "BerCurve",
    "SNR_CSV_HEADER",
    "K_CSV_HEADER",
    "derive_substream",
    "parse_grid",
    "parse_config_text",
    "load_config",
    "config_from_mapping",
    "simulate_chunk",
    "run_ber_vs_snr",
    "run_ber_vs_k",
]

log = logging.getLogger(__name__)

SNR_CSV_HEADER = ("snr_db", "ber_sim", "ber_theory_cond", "ber_theory_faded", "trials", "errors", "std_error")
K_CSV_HEADER = ("k",) + SNR_CSV_HEADER
DEFAULT_SNR_DB = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
PULSE_ENERGY = 1.0
# Spawn key reserved for the Monte Carlo fading average of the theory column.
THEORY_STREAM = 2**40


def derive_substream(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one ``(point, trial)`` cell of a sweep."""
    if min(master_seed, point_index, trial_index) < 0:
        raise ValueError("seed and indices must be non-negative")
    ss = np.random.SeedSequence(master_seed, spawn_key=(point_index, trial_index))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class SimConfig:
    k: int = 1
    n_f: int | None = None
    snr_db: tuple[float, ...] = DEFAULT_SNR_DB
    scatters: int = 1
    trials: int = 200_000
    tfwrx: float = 25.0
    tag: NakagamiParams = KIDNEY_PHANTOM
    scatter: NakagamiParams = KIDNEY_PHANTOM
    normalize: bool = True
    roundtrip: str = "single"
    # Later multipath arrivals of the tag signal: (delay in samples, z, omega, s).
    multipath: tuple[tuple[int, float, float, float], ...] = ()
    master_seed: int = 0
    out: str | None = None
    workers: int = 1
    theory_method: str = "quadrature"

    def __post_init__(self) -> None:
        object.__setattr__(self, "snr_db", tuple(float(x) for x in self.snr_db))
        object.__setattr__(
            self, "multipath", tuple((int(d), float(z), float(o), float(s)) for d, z, o, s in self.multipath)
        )
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.snr_db:
            raise ConfigError("the SNR grid is empty")
        if self.scatters < 0:
            raise ConfigError("scatters must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.theory_method not in ("quadrature", "montecarlo"):
            raise ConfigError(f"theory_method must be quadrature or montecarlo, got {self.theory_method!r}")
        try:
            build_codebook(self.n_f, self.k)
            grid = FrameGrid.from_product(self.frames, self.tfwrx)
            model = self.fading
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if any(d >= grid.samples_per_frame for d, *_ in self.multipath):
            raise ConfigError("multipath delays must fall inside the frame")
        del model

    @property
    def frames(self) -> int:
        return self.n_f if self.n_f is not None else frames_for_bits(self.k)

    @property
    def samples_per_frame(self) -> int:
        return int(round(2 * self.tfwrx))

    @property
    def fading(self) -> FadingModel:
        taps = tuple((NakagamiParams(z, o, s), d) for d, z, o, s in self.multipath)
        return FadingModel(self.tag, self.scatter, self.normalize, self.roundtrip, taps)

    @property
    def chunk_trials(self) -> int:
        """Trials per random-stream chunk; about 2**21 noise samples per chunk."""
        return int(min(max(2**21 // (self.frames * self.samples_per_frame), 256), 16384))


# --- configuration files --------------------------------------------------


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (stop inclusive), a comma list, or a single value."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step == 0 or (stop - start) * step < 0:
                raise ConfigError(f"grid {text!r} never reaches its stop value")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return tuple(round(start + i * step, 10) for i in range(n))
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc


def _parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_taps(text: str) -> tuple[tuple[int, float, float, float], ...]:
    taps = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"multipath tap needs delay,z,omega,s: {chunk!r}")
        taps.append((int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3])))
    return tuple(taps)


_CONVERTERS = {
    "k": int,
    "n_f": lambda v: None if v.strip().lower() in ("", "auto", "none") else int(v),
    "snr_db": parse_grid,
    "scatters": int,
    "trials": int,
    "tfwrx": float,
    "z": float,
    "omega": float,
    "s": float,
    "scatter_z": float,
    "scatter_omega": float,
    "scatter_s": float,
    "normalize": _parse_bool,
    "roundtrip": str.strip,
    "multipath": _parse_taps,
    "seed": int,
    "out": str.strip,
    "workers": int,
    "theory_method": str.strip,
}
CONFIG_KEYS = tuple(_CONVERTERS)


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _CONVERTERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return values


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def config_from_mapping(values: Mapping, base: SimConfig | None = None) -> SimConfig:
    """Overlay parsed key/values on ``base`` (defaults when omitted)."""
    base = base or SimConfig()
    unknown = set(values) - set(_CONVERTERS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    v = dict(values)
    updates: dict = {}
    for key in ("k", "n_f", "snr_db", "scatters", "trials", "tfwrx", "normalize",
                "roundtrip", "multipath", "out", "workers", "theory_method"):
        if key in v:
            updates[key] = v[key]
    if "seed" in v:
        updates["master_seed"] = v["seed"]
    try:
        tag = NakagamiParams(
            v.get("z", base.tag.z), v.get("omega", base.tag.omega), v.get("s", base.tag.s)
        )
        scatter_default = tag if {"z", "omega", "s"} & set(v) else base.scatter
        scatter = NakagamiParams(
            v.get("scatter_z", scatter_default.z),
            v.get("scatter_omega", scatter_default.omega),
            v.get("scatter_s", scatter_default.s),
        )
        return replace(base, tag=tag, scatter=scatter, **updates)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


# --- simulation -------------------------------------------------------------


@dataclass(frozen=True)
class _Setup:
    book: np.ndarray
    code: np.ndarray
    pulse: np.ndarray
    echo_pulses: np.ndarray
    n_bc: int
    n_f: int
    m: int
    fading: FadingModel


@lru_cache(maxsize=32)
def _setup(cfg: SimConfig) -> _Setup:
    book = build_codebook(cfg.n_f, cfg.k)
    grid = FrameGrid.from_product(book.n_f, cfg.tfwrx)
    pulse = make_monocycle(grid, PULSE_ENERGY).samples
    echoes = np.array([delay_samples(pulse, d) for d, *_ in cfg.multipath]).reshape(-1, pulse.size)
    return _Setup(
        book=book.codewords.astype(float),
        code=generate_reader_code(book.n_f, cfg.master_seed).elements.astype(float),
        pulse=pulse,
        echo_pulses=echoes,
        n_bc=book.n_bc,
        n_f=book.n_f,
        m=grid.samples_per_frame,
        fading=cfg.fading,
    )


def noise_density(cfg: SimConfig, snr_db: float) -> float:
    """N0 giving mean received E_b/N0 of ``snr_db`` with unit pulse energy."""
    e_b = cfg.frames * PULSE_ENERGY / cfg.k
    return e_b / float(db_to_linear(snr_db))


def simulate_chunk(cfg: SimConfig, point_index: int, snr_db: float, chunk_index: int, n: int) -> tuple[int, int]:
    """Simulate ``n`` symbols; returns (bit errors, sum of squared per-symbol bit errors).

    Bits, tag fading, scatter fading and noise come from separate child
    streams, so runs that differ only in the scatter count see the same
    bits, tag gains and noise.
    """
    st = _setup(cfg)
    bits_rng, tag_rng, scatter_rng, noise_rng = derive_substream(
        cfg.master_seed, point_index, chunk_index
    ).spawn(4)
    tx = bits_rng.integers(0, st.n_bc, n)
    alpha2 = st.fading.sample_tag_gain(tag_rng, n)
    tag_wave = alpha2[:, None] * st.pulse[None, :]
    if st.echo_pulses.shape[0]:
        tag_wave = tag_wave + st.fading.sample_echo_gains(tag_rng, n) @ st.echo_pulses
    beta2 = st.fading.sample_scatter_gains(scatter_rng, (n, cfg.scatters)).sum(axis=1)
    noise = noise_rng.standard_normal((n, st.n_f, st.m))
    sigma = math.sqrt(noise_density(cfg, snr_db) / 2.0)
    stats = energy_statistics(st.book, st.code, tx, tag_wave, beta2, st.pulse, noise, sigma)
    det = np.argmax(stats, axis=1)
    e = np.bitwise_count((tx ^ det).astype(np.uint64)).astype(np.int64)
    return int(e.sum()), int((e * e).sum())


def _run_job(job):
    return simulate_chunk(*job)


@dataclass(frozen=True)
class BerRow:
    snr_db: float
    k: int
    ber_sim: float
    ber_theory_cond: float
    ber_theory_faded: float
    trials: int
    errors: int
    errors_sq: int = field(default=0, compare=False)

    @property
    def std_error(self) -> float:
        bits = self.trials * self.k
        return math.sqrt(self.ber_sim * (1.0 - self.ber_sim) / bits)

    @property
    def symbol_std_error(self) -> float:
        """BER standard error with symbols (not bits) as the independent unit."""
        n = self.trials
        mean = self.errors / n
        var = max(self.errors_sq / n - mean * mean, 0.0)
        return math.sqrt(var / n) / self.k


def _fmt(x: float) -> str:
    return format(x, ".10g")


@dataclass
class BerCurve:
    rows: list[BerRow]
    axis: str = "snr_db"

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = K_CSV_HEADER if self.axis == "k" else SNR_CSV_HEADER
        w.writerow(header)
        for r in self.rows:
            body = [_fmt(r.snr_db), _fmt(r.ber_sim), _fmt(r.ber_theory_cond),
                    _fmt(r.ber_theory_faded), r.trials, r.errors, _fmt(r.std_error)]
            w.writerow(([r.k] if self.axis == "k" else []) + body)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _chunks(total: int, size: int) -> Iterable[tuple[int, int]]:
    for i, start in enumerate(range(0, total, size)):
        yield i, min(size, total - start)


def _run_points(points: Sequence[tuple[SimConfig, int, float]], workers: int) -> list[BerRow]:
    jobs = [
        (cfg, pidx, snr, cidx, n)
        for cfg, pidx, snr in points
        for cidx, n in _chunks(cfg.trials, cfg.chunk_trials)
    ]
    if workers > 1:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            results = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_job(job) for job in jobs]

    totals: dict[int, list[int]] = {}
    for job, (e, e2) in zip(jobs, results):
        acc = totals.setdefault(job[1], [0, 0])
        acc[0] += e
        acc[1] += e2

    rows = []
    for cfg, pidx, snr in points:
        errors, errors_sq = totals[pidx]
        gamma = float(db_to_linear(snr))
        cond = ber_conditional(gamma, cfg.k, cfg.tfwrx)
        faded = ber_faded(
            gamma, cfg.k, cfg.fading, cfg.tfwrx, method=cfg.theory_method,
            rng=derive_substream(cfg.master_seed, pidx, THEORY_STREAM),
        )
        row = BerRow(snr, cfg.k, errors / (cfg.trials * cfg.k), cond, faded, cfg.trials, errors, errors_sq)
        log.info("k=%d snr=%g dB: ber_sim=%.4g theory=%.4g/%.4g", cfg.k, snr, row.ber_sim, cond, faded)
        rows.append(row)
    return rows


def run_ber_vs_snr(cfg: SimConfig) -> BerCurve:
    """Simulated and theoretical BER over ``cfg.snr_db``; writes ``cfg.out`` if set."""
    points = [(cfg, i, snr) for i, snr in enumerate(cfg.snr_db)]
    curve = BerCurve(_run_points(points, cfg.workers), axis="snr_db")
    if cfg.out:
        curve.to_csv(cfg.out)
    return curve


def run_ber_vs_k(cfg: SimConfig, k_grid: Sequence[int], snr_db: Sequence[float] = (6.0, 9.0)) -> BerCurve:
    """BER against bits per symbol at each fixed SNR; rows ordered by SNR, then k."""
    if not k_grid:
        raise ConfigError("k grid is empty")
    points = []
    for snr in snr_db:
        for k in k_grid:
            try:
                cfg_k = replace(cfg, k=int(k))
            except ConfigError as exc:
                raise ConfigError(f"k={k}: {exc}") from exc
            points.append((cfg_k, len(points), float(snr)))
    curve = BerCurve(_run_points(points, cfg.workers), axis="k")
    if cfg.out:
        curve.to_csv(cfg.out)
    return curve
