"""Intra-body channel: generalized Nakagami fading, tissue attenuation, multipath.

The generalized Nakagami amplitude ``h`` with shaping ``z``, spreading
``omega`` and generalization ``s`` has density

    f(h) = 2 s z**z h**(2 s z - 1) / (Gamma(z) omega**z) * exp(-z h**(2 s) / omega)

Substituting ``X = h**(2 s)`` gives ``X ~ Gamma(shape=z, scale=omega/z)``,
which is how amplitudes are drawn here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "NakagamiParams",
    "KIDNEY_PHANTOM",
    "AttenuationParams",
    "MultipathProfile",
    "ChannelRealization",
    "FadingModel",
    "sample_nakagami",
    "sample_channel_realization",
    "attenuate",
    "build_cir",
]

ROUNDTRIP_MODES = ("single", "product")


@dataclass(frozen=True)
class NakagamiParams:
    z: float
    omega: float
    s: float

    def __post_init__(self) -> None:
        for name in ("z", "omega", "s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"Nakagami parameter {name} must be finite and > 0, got {v}")

    def pdf(self, h):
        h = np.asarray(h, dtype=float)
        z, om, s = self.z, self.omega, self.s
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = (
                math.log(2 * s)
                + z * math.log(z)
                - gammaln(z)
                - z * math.log(om)
                + (2 * s * z - 1) * np.log(h)
                - z / om * h ** (2 * s)
            )
            out = np.where(h > 0, np.exp(logf), 0.0)
        return out

    def moment(self, p: float) -> float:
        """E[h**p] from the Gamma moments of ``h**(2 s)``."""
        q = p / (2 * self.s)
        return math.exp(q * math.log(self.omega / self.z) + gammaln(self.z + q) - gammaln(self.z))


# Kidney-phantom fit of the generalized Nakagami law.
KIDNEY_PHANTOM = NakagamiParams(z=0.59, omega=0.05, s=1.12)


def sample_nakagami(params: NakagamiParams, rng: np.random.Generator, size=None):
    """Draw generalized Nakagami amplitudes as ``Gamma(z, omega/z) ** (1/(2 s))``."""
    x = rng.gamma(params.z, params.omega / params.z, size=size)
    return x ** (1.0 / (2.0 * params.s))


@dataclass(frozen=True)
class AttenuationParams:
    a: float  # np / (cm * MHz**b)
    b: float
    f: float  # MHz
    d: float  # cm

    def __post_init__(self) -> None:
        if self.a < 0 or self.f <= 0 or self.d < 0:
            raise ValueError("attenuation requires a >= 0, f > 0, d >= 0")

    @property
    def atten_coeff(self) -> float:
        """Amplitude attenuation coefficient ``a * f**b`` in np/cm."""
        return self.a * self.f**self.b


def attenuate(p0: float, params: AttenuationParams) -> float:
    if p0 < 0:
        raise ValueError("initial amplitude must be non-negative")
    return p0 * math.exp(-params.atten_coeff * params.d)


@dataclass(frozen=True)
class MultipathProfile:
    """Tap list of ``(amplitude distribution, delay in samples)`` pairs."""

    taps: tuple[tuple[NakagamiParams, int], ...]

    def __post_init__(self) -> None:
        taps = tuple((p, int(d)) for p, d in self.taps)
        if not taps:
            raise ValueError("a multipath profile needs at least one tap")
        delays = [d for _, d in taps]
        if delays[0] < 0 or any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError(f"tap delays must be non-negative and strictly increasing, got {delays}")
        object.__setattr__(self, "taps", taps)

    @classmethod
    def single(cls, params: NakagamiParams = KIDNEY_PHANTOM) -> "MultipathProfile":
        return cls(((params, 0),))

    def __len__(self) -> int:
        return len(self.taps)


def build_cir(profile: MultipathProfile, rng: np.random.Generator) -> list[tuple[float, int]]:
    """One quasi-static channel impulse response: a Nakagami draw per tap."""
    return [(float(sample_nakagami(p, rng)), d) for p, d in profile.taps]


@dataclass(frozen=True)
class ChannelRealization:
    """Fading state held constant over one symbol.

    ``echoes`` are later multipath arrivals of the tag signal as
    ``(gain, delay relative to the first arrival)``; empty for a flat channel.
    """

    tag_roundtrip_gain: float
    scatter_gains: tuple[float, ...] = ()
    echoes: tuple[tuple[float, int], ...] = ()

    def __post_init__(self) -> None:
        gains = (self.tag_roundtrip_gain, *self.scatter_gains, *(g for g, _ in self.echoes))
        if not all(math.isfinite(g) and g >= 0 for g in gains):
            raise ValueError("channel gains must be finite and non-negative")
        object.__setattr__(self, "scatter_gains", tuple(float(g) for g in self.scatter_gains))

    @property
    def interference_gain(self) -> float:
        """Aggregate scatter round-trip gain, the sum of the per-scatter gains."""
        return float(sum(self.scatter_gains))

    @classmethod
    def from_cir(
        cls, cir: Sequence[tuple[float, int]], scatter_gains: Sequence[float] = (), scale: float = 1.0
    ) -> "ChannelRealization":
        (h0, d0), rest = cir[0], cir[1:]
        return cls(scale * h0, tuple(scatter_gains), tuple((scale * h, d - d0) for h, d in rest))


@dataclass(frozen=True)
class FadingModel:
    """How per-symbol round-trip gains are drawn from the Nakagami laws.

    ``roundtrip="single"`` uses one amplitude draw as the round-trip gain,
    ``"product"`` multiplies two independent draws (forward and return
    paths). With ``normalize`` the gains are scaled so that
    E[(round-trip gain)**2] = 1.
    """

    tag: NakagamiParams = KIDNEY_PHANTOM
    scatter: NakagamiParams = KIDNEY_PHANTOM
    normalize: bool = True
    roundtrip: str = "single"
    extra_taps: tuple[tuple[NakagamiParams, int], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.roundtrip not in ROUNDTRIP_MODES:
            raise ValueError(f"roundtrip must be one of {ROUNDTRIP_MODES}, got {self.roundtrip!r}")
        if self.extra_taps:
            MultipathProfile(((self.tag, 0), *self.extra_taps))

    def _scale(self, params: NakagamiParams) -> float:
        if not self.normalize:
            return 1.0
        m2 = params.moment(2.0)
        return 1.0 / math.sqrt(m2) if self.roundtrip == "single" else 1.0 / m2

    @property
    def tag_scale(self) -> float:
        return self._scale(self.tag)

    @property
    def scatter_scale(self) -> float:
        return self._scale(self.scatter)

    @property
    def profile(self) -> MultipathProfile:
        return MultipathProfile(((self.tag, 0), *self.extra_taps))

    def _draw(self, params: NakagamiParams, rng: np.random.Generator, size):
        h = sample_nakagami(params, rng, size)
        if self.roundtrip == "product":
            h = h * sample_nakagami(params, rng, size)
        return h

    def sample_tag_gain(self, rng: np.random.Generator, size=None):
        return self.tag_scale * self._draw(self.tag, rng, size)

    def sample_scatter_gains(self, rng: np.random.Generator, size=None):
        return self.scatter_scale * self._draw(self.scatter, rng, size)

    def sample_echo_gains(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Gains of the taps after the first, shape ``(n, L - 1)``, scaled like the tag gain."""
        out = np.empty((n, len(self.extra_taps)))
        for i, (p, _) in enumerate(self.extra_taps):
            out[:, i] = self.tag_scale * self._draw(p, rng, n)
        return out

    def tag_power_from_gamma(self, u):
        """(round-trip gain)**2 as a function of a standard Gamma(z, 1) variate (single mode)."""
        if self.roundtrip != "single":
            raise ValueError("closed-form gain transform only exists for roundtrip='single'")
        p = self.tag
        h2 = (np.asarray(u, dtype=float) * p.omega / p.z) ** (1.0 / p.s)
        return self.tag_scale**2 * h2


def sample_channel_realization(
    tag_dist: NakagamiParams,
    scatter_dist: NakagamiParams,
    s_count: int,
    rng: np.random.Generator,
    normalize: bool = True,
    roundtrip: str = "single",
) -> ChannelRealization:
    """Independent tag and per-scatter round-trip gains for one symbol."""
    if s_count < 0:
        raise ValueError(f"scatter count must be >= 0, got {s_count}")
    model = FadingModel(tag_dist, scatter_dist, normalize, roundtrip)
    alpha2 = float(model.sample_tag_gain(rng))
    betas = tuple(float(b) for b in model.sample_scatter_gains(rng, s_count))
    return ChannelRealization(alpha2, betas)
