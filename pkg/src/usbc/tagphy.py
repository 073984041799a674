"""Tag reflection physics, switch states and sampled waveform synthesis.

Signals live on a noise-equivalent grid of ``M = round(2 T_f W_rx)``
samples per frame: white noise of spectral density ``N0`` is i.i.d.
``N(0, N0/2)`` per sample and a pulse's energy is its sum of squares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .channel import ChannelRealization
from .codebook import ReaderCode
from .errors import LengthMismatchError

__all__ = [
    "FrameGrid",
    "Pulse",
    "Off",
    "MatchA",
    "ShortB",
    "DelayC",
    "SwitchState",
    "reflection_coefficient",
    "make_monocycle",
    "make_rectangular",
    "switch_response",
    "switch_state",
    "codeword_states",
    "delay_samples",
    "assemble_interrogation",
    "tag_waveform",
    "synthesize_received",
]


def reflection_coefficient(z1: float, z2: float) -> float:
    """Pressure reflection coefficient ``(z2 - z1) / (z2 + z1)`` at a boundary.

    ``z2`` may be ``math.inf`` (rigid boundary), giving +1.
    """
    if z1 < 0 or z2 < 0 or math.isnan(z1) or math.isnan(z2):
        raise ValueError("acoustic impedances must be non-negative")
    if math.isinf(z1):
        raise ValueError("incident-medium impedance must be finite")
    if math.isinf(z2):
        return 1.0
    if z1 + z2 == 0:
        raise ValueError("reflection coefficient undefined for two zero impedances")
    return (z2 - z1) / (z2 + z1)


@dataclass(frozen=True)
class FrameGrid:
    n_f: int
    t_f: float  # seconds
    w_rx: float  # Hz

    def __post_init__(self) -> None:
        if self.n_f < 1:
            raise ValueError("n_f must be >= 1")
        if not self.t_f * self.w_rx > 20:
            raise ValueError(f"T_f * W_rx must exceed 20, got {self.t_f * self.w_rx:g}")

    @classmethod
    def from_product(cls, n_f: int, tfwrx: float = 25.0, w_rx: float = 1e6) -> "FrameGrid":
        return cls(n_f, tfwrx / w_rx, w_rx)

    @property
    def tfwrx(self) -> float:
        return self.t_f * self.w_rx

    @property
    def samples_per_frame(self) -> int:
        return int(round(2 * self.tfwrx))

    @property
    def symbol_duration(self) -> float:
        return self.n_f * self.t_f


@dataclass(frozen=True)
class Pulse:
    samples: np.ndarray
    energy: float

    def __post_init__(self) -> None:
        x = np.array(self.samples, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        e = float(np.dot(x, x))
        if not math.isclose(e, self.energy, rel_tol=1e-9, abs_tol=1e-300):
            raise ValueError(f"pulse energy {self.energy} disagrees with sample energy {e}")

    def __len__(self) -> int:
        return self.samples.shape[0]


def _scaled_pulse(shape: np.ndarray, grid: FrameGrid, e_p: float) -> Pulse:
    m = grid.samples_per_frame
    x = np.zeros(m)
    x[: shape.size] = shape * math.sqrt(e_p / np.dot(shape, shape))
    return Pulse(x, float(np.dot(x, x)))


def make_monocycle(grid: FrameGrid, e_p: float = 1.0) -> Pulse:
    """Gaussian monocycle over the first quarter of the frame, energy ``e_p``."""
    if e_p <= 0:
        raise ValueError("pulse energy must be positive")
    n = max(grid.samples_per_frame // 4, 2)
    t = np.linspace(-3.0, 3.0, n)
    return _scaled_pulse(-t * np.exp(-0.5 * t * t), grid, e_p)


def make_rectangular(grid: FrameGrid, e_p: float = 1.0) -> Pulse:
    """Constant-amplitude pulse over the same support as the monocycle."""
    if e_p <= 0:
        raise ValueError("pulse energy must be positive")
    n = max(grid.samples_per_frame // 4, 2)
    return _scaled_pulse(np.ones(n), grid, e_p)


@dataclass(frozen=True)
class Off:
    """Switch open: the pulse comes back inverted."""


@dataclass(frozen=True)
class MatchA:
    """Load matched to the transducer; ``load_fraction`` of the pulse is absorbed."""

    load_fraction: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.load_fraction <= 1.0:
            raise ValueError("load_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class ShortB:
    """Short circuit: the pulse is reflected unchanged."""


@dataclass(frozen=True)
class DelayC:
    """Variable delay line: the reflected pulse is shifted by ``delay`` samples."""

    delay: int

    def __post_init__(self) -> None:
        if self.delay < 0:
            raise ValueError("delay must be non-negative")


SwitchState = Union[Off, MatchA, ShortB, DelayC]


def switch_state(name: str, load_fraction: float = 1.0, delay: int = 0) -> SwitchState:
    """Switch state from its short name: ``off``, ``a``, ``b`` or ``c``."""
    key = name.strip().lower()
    if key == "off":
        return Off()
    if key == "a":
        return MatchA(load_fraction)
    if key == "b":
        return ShortB()
    if key == "c":
        return DelayC(delay)
    raise ValueError(f"unknown switch state {name!r}; expected off, a, b or c")


def delay_samples(x: np.ndarray, delay: int) -> np.ndarray:
    """Shift right by ``delay`` samples within the same window, zero-filled."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    if delay < x.shape[-1]:
        out[..., delay:] = x[..., : x.shape[-1] - delay]
    return out


def switch_response(state: SwitchState, incident) -> np.ndarray:
    x = incident.samples if isinstance(incident, Pulse) else np.asarray(incident, dtype=float)
    if isinstance(state, Off):
        return -x
    if isinstance(state, ShortB):
        return x.copy()
    if isinstance(state, MatchA):
        return (1.0 - state.load_fraction) * x
    if isinstance(state, DelayC):
        if state.delay >= x.shape[-1]:
            raise ValueError(f"delay {state.delay} does not fit in a {x.shape[-1]}-sample frame")
        return delay_samples(x, state.delay)
    raise TypeError(f"not a switch state: {state!r}")


def codeword_states(codeword: Sequence[int]) -> list[SwitchState]:
    """Per-frame switch states that reflect with the codeword's +/-1 chips."""
    states: list[SwitchState] = []
    for c in codeword:
        if c == 1:
            states.append(ShortB())
        elif c == -1:
            states.append(Off())
        else:
            raise ValueError(f"codeword chips must be +/-1, got {c}")
    return states


def assemble_interrogation(code: ReaderCode, pulse: Pulse, grid: FrameGrid) -> np.ndarray:
    """One symbol of reader pulses, shape ``(n_f, M)``: frame j is ``d_j * pulse``."""
    if code.n_f != grid.n_f:
        raise LengthMismatchError(f"reader code has {code.n_f} frames, grid has {grid.n_f}")
    if len(pulse) != grid.samples_per_frame:
        raise LengthMismatchError("pulse length does not match the frame grid")
    return code.elements[:, None] * pulse.samples[None, :]


def tag_waveform(pulse: Pulse, ch: ChannelRealization) -> np.ndarray:
    """Pulse after the tag's round-trip channel, first arrival plus echoes."""
    out = ch.tag_roundtrip_gain * pulse.samples
    for gain, delay in ch.echoes:
        out = out + gain * delay_samples(pulse.samples, delay)
    return out


def synthesize_received(
    codeword: Sequence[int],
    code: ReaderCode,
    pulse: Pulse,
    ch: ChannelRealization,
    n0: float,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Received frames for one symbol, shape ``(n_f, M)``.

    Frame j is ``a_kj d_j x(t) + beta2 d_j p(t) + n_j(t)`` where ``x`` is the
    pulse through the tag channel and ``beta2`` the summed scatter gain.
    Noise is drawn as one ``(n_f, M)`` standard-normal block from ``rng``.
    """
    codeword = np.asarray(codeword)
    if codeword.shape[0] != code.n_f:
        raise LengthMismatchError(f"codeword has {codeword.shape[0]} chips, reader code {code.n_f}")
    if n0 < 0:
        raise ValueError("noise spectral density must be non-negative")
    d = code.elements.astype(float)
    x = tag_waveform(pulse, ch)
    tag = np.stack([switch_response(st, dj * x) for st, dj in zip(codeword_states(codeword), d)])
    frames = tag + (ch.interference_gain * d)[:, None] * pulse.samples[None, :]
    if rng is not None:
        frames = frames + math.sqrt(n0 / 2.0) * rng.standard_normal(frames.shape)
    elif n0 > 0:
        raise ValueError("a random generator is required when n0 > 0")
    return frames
