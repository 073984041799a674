"""Semi-analytic BER of codeword matching + energy detection, and a Monte Carlo oracle.

Normalising every statistic by the matched signal energy
``alpha**4 N_f**2 E_p`` leaves three terms for the correct branch and one
for each wrong branch:

* cross term ``n_1``  ~ N(0, 2 / (K gamma))
* squared noise ``eta_m`` ~ N(T W / (K gamma), T W / (K gamma)**2)   (CLT)

with ``gamma = alpha**4 N_f E_p / (K N0)`` the received SNR per bit and
``T W`` the frame time-bandwidth product. Conditioning on the correct
branch's noise ``n_x = n_1 + eta_1`` makes the wrong branches independent,
so

    P_correct = E_{n_x}[(1 - Q((1 + n_x - T W/(K gamma)) / sqrt(T W/(K gamma)**2)))**(N_bc - 1)]

which is evaluated by Gauss-Hermite quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn
from scipy.special import ndtr, roots_hermite

from .channel import FadingModel, NakagamiParams
from .errors import QuadratureError

__all__ = [
    "TheoryParams",
    "NoiseStatistic",
    "OracleEstimate",
    "q_function",
    "decision_noise",
    "p_correct_conditional",
    "ber_from_pcorrect",
    "ber_conditional",
    "ber_faded",
    "ber_theoretical",
    "statistic_oracle",
    "db_to_linear",
]

MAX_NODES = 4096


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def q_function(x):
    """Gaussian tail probability ``P(Z > x)``."""
    out = ndtr(-np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class NoiseStatistic:
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not self.variance > 0:
            raise ValueError("variance must be positive")


def decision_noise(k: int, tfwrx: float, snr_per_bit: float) -> dict[str, NoiseStatistic]:
    """Gaussian models of the normalised noise terms at SNR per bit ``snr_per_bit``.

    Keys: ``cross`` (n_1), ``square`` (eta_m), ``matched`` (n_1 + eta_1).
    """
    kg = k * snr_per_bit
    cross = NoiseStatistic(0.0, 2.0 / kg)
    square = NoiseStatistic(tfwrx / kg, tfwrx / kg**2)
    matched = NoiseStatistic(square.mean, cross.variance + square.variance)
    return {"cross": cross, "square": square, "matched": matched}


@dataclass(frozen=True)
class TheoryParams:
    k: int
    snr_per_bit: float
    tfwrx: float = 25.0
    fading: Union[FadingModel, NakagamiParams, None] = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.tfwrx > 20:
            raise ValueError("T_f * W_rx must exceed 20")
        if not self.snr_per_bit > 0:
            raise ValueError("SNR per bit must be positive")
        if isinstance(self.fading, NakagamiParams):
            object.__setattr__(self, "fading", FadingModel(self.fading, self.fading))

    @property
    def n_bc(self) -> int:
        return 2**self.k


@lru_cache(maxsize=None)
def _hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_hermite(n)
    return x, w / math.sqrt(math.pi)


def _gh_pcorrect(g: np.ndarray, k: int, tfwrx: float, n: int) -> np.ndarray:
    x, w = _hermite(n)
    kg = (k * g)[:, None]
    mean_sq = tfwrx / kg
    sd_nx = np.sqrt(2.0 / kg + tfwrx / kg**2)
    nx = mean_sq + math.sqrt(2.0) * sd_nx * x
    arg = (1.0 + nx - mean_sq) / np.sqrt(tfwrx / kg**2)
    return (ndtr(arg) ** (2**k - 1)) @ w


def p_correct_conditional(
    snr_per_bit, k: int, tfwrx: float = 25.0, nodes: int = 64, tol: float = 1e-8
):
    """Probability of detecting the right codeword at a fixed SNR per bit.

    Starts at ``nodes`` Gauss-Hermite points and doubles until two
    successive rules agree to ``tol``; raises :class:`QuadratureError`
    if that has not happened by ``MAX_NODES`` points.
    """
    g = np.atleast_1d(np.asarray(snr_per_bit, dtype=float))
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise ValueError("SNR per bit must be non-negative")
    out = np.full(g.shape, 1.0 / 2**k)
    live = g > 0
    idx = np.flatnonzero(live)
    n = nodes
    prev = _gh_pcorrect(g[idx], k, tfwrx, n)
    while idx.size:
        n *= 2
        if n > MAX_NODES:
            raise QuadratureError(
                f"Gauss-Hermite did not converge to {tol:g} with {MAX_NODES} nodes "
                f"(k={k}, snr={g[idx][0]:g})"
            )
        cur = _gh_pcorrect(g[idx], k, tfwrx, n)
        done = np.abs(cur - prev) <= tol
        out[idx[done]] = cur[done]
        idx, prev = idx[~done], cur[~done]
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(snr_per_bit) == 0 else out.reshape(np.shape(snr_per_bit))


def ber_from_pcorrect(p_correct, k: int):
    """Bit error probability from the codeword detection probability.

    A codeword error lands on each of the ``2**K - 1`` wrong codewords with
    equal probability, which flips ``2**(K-1)/(2**K - 1)`` of the bits on
    average.
    """
    p = np.asarray(p_correct, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probability of correct detection must be in [0, 1]")
    out = np.clip(2 ** (k - 1) / (2**k - 1) * (1.0 - p), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def ber_conditional(snr_per_bit, k: int, tfwrx: float = 25.0):
    """BER at a fixed (non-fading) SNR per bit."""
    return ber_from_pcorrect(p_correct_conditional(snr_per_bit, k, tfwrx), k)


def ber_faded(
    mean_snr_per_bit: float,
    k: int,
    fading: FadingModel,
    tfwrx: float = 25.0,
    method: str = "quadrature",
    draws: int = 100_000,
    rng: np.random.Generator | None = None,
) -> float:
    """BER averaged over the per-symbol round-trip fading.

    The instantaneous SNR per bit is ``mean_snr_per_bit * gain**2`` with
    ``gain`` the normalised round-trip gain. ``method="quadrature"``
    integrates over the Gamma variate behind the Nakagami draw (single
    round-trip draw only); ``"montecarlo"`` averages over ``draws`` samples.
    Multipath echoes are not part of this model.
    """
    if method == "quadrature" and fading.roundtrip == "single":
        z = fading.tag.z
        # u ~ Gamma(z, 1); with t = u**z the density becomes exp(-t**(1/z)) / Gamma(z + 1).
        def integrand(t: float) -> float:
            u = t ** (1.0 / z)
            power = fading.tag_power_from_gamma(u)
            return ber_conditional(mean_snr_per_bit * power, k, tfwrx) * math.exp(-u)

        t_max = 200.0**z
        val, err = integrate.quad(integrand, 0.0, t_max, epsabs=1e-11, epsrel=1e-9, limit=400)
        if err > 1e-8:
            raise QuadratureError(f"fading average did not converge (error estimate {err:g})")
        return float(min(max(val / gamma_fn(z + 1.0), 0.0), 1.0))
    if method not in ("quadrature", "montecarlo"):
        raise ValueError(f"unknown averaging method {method!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    gain = fading.sample_tag_gain(rng, draws)
    return float(np.mean(ber_conditional(mean_snr_per_bit * gain**2, k, tfwrx)))


def ber_theoretical(params: TheoryParams, **kwargs) -> float:
    """Conditional BER without fading, fading-averaged BER otherwise."""
    if params.fading is None:
        return ber_conditional(params.snr_per_bit, params.k, params.tfwrx)
    return ber_faded(params.snr_per_bit, params.k, params.fading, params.tfwrx, **kwargs)


@dataclass(frozen=True)
class OracleEstimate:
    errors: int
    trials: int
    k: int
    errors_sq: int = 0  # sum over symbols of (bit errors in the symbol)**2

    @property
    def bits(self) -> int:
        return self.trials * self.k

    @property
    def ber(self) -> float:
        return self.errors / self.bits

    @property
    def std_error(self) -> float:
        p = self.ber
        return math.sqrt(p * (1.0 - p) / self.bits)

    @property
    def symbol_std_error(self) -> float:
        """Standard error of the BER treating symbols, not bits, as independent."""
        n = self.trials
        mean = self.errors / n
        var = max(self.errors_sq / n - mean * mean, 0.0)
        return math.sqrt(var / n) / self.k


def statistic_oracle(
    params: TheoryParams,
    trials: int,
    rng: np.random.Generator,
    exact_noise: bool = True,
    samples_per_frame: int | None = None,
    batch: int = 65_536,
) -> OracleEstimate:
    """Monte Carlo BER drawn directly at the decision-statistic level.

    Statistics are in units of the aggregated per-sample noise variance,
    where the matched signal energy is ``2 K gamma``. With ``exact_noise``
    the matched branch is non-central chi-square and the wrong branches
    central chi-square, each with ``M = round(2 T W)`` degrees of freedom
    (exactly the sampled waveform model). Otherwise every noise term is the
    Gaussian approximation from :func:`decision_noise`.
    """
    if trials < 10_000:
        raise ValueError("statistic_oracle needs at least 10**4 trials")
    k, n_bc, tw = params.k, params.n_bc, params.tfwrx
    m = samples_per_frame or int(round(2 * tw))
    fading = params.fading
    errors = errors_sq = 0
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        tx = rng.integers(0, n_bc, n)
        g = np.full(n, params.snr_per_bit)
        if fading is not None:
            g = g * fading.sample_tag_gain(rng, n) ** 2
        lam = 2.0 * k * g
        if exact_noise:
            stats = rng.chisquare(m, (n, n_bc))
            stats[np.arange(n), tx] = rng.noncentral_chisquare(m, lam)
        else:
            stats = 2 * tw + math.sqrt(4 * tw) * rng.standard_normal((n, n_bc))
            matched = lam + 2.0 * np.sqrt(lam) * rng.standard_normal(n)
            stats[np.arange(n), tx] += matched
        det = np.argmax(stats, axis=1)
        e = np.bitwise_count((tx ^ det).astype(np.uint64)).astype(np.int64)
        errors += int(e.sum())
        errors_sq += int((e * e).sum())
        done += n
    return OracleEstimate(errors, trials, k, errors_sq)
