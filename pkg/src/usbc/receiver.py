"""Reader-side codeword matching, energy detection and codeword decision."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codebook import Codebook, ReaderCode, demap_codeword
from .errors import LengthMismatchError

__all__ = [
    "Detection",
    "match_and_aggregate",
    "energy_detect",
    "decision_statistics",
    "detect",
]


@dataclass(frozen=True)
class Detection:
    codeword_index: int
    bits: tuple[int, ...]
    statistics: np.ndarray


def match_and_aggregate(received: np.ndarray, candidate: Sequence[int], code: ReaderCode) -> np.ndarray:
    """Sum over frames of ``a_mj * d_j * r_j``, one aggregated frame of M samples.

    A balanced candidate cancels any component that is identical in every
    frame up to the reader code, which is how scatter echoes are removed.
    """
    received = np.asarray(received, dtype=float)
    candidate = np.asarray(candidate)
    if received.ndim != 2:
        raise LengthMismatchError("received signal must be a (frames, samples) array")
    n_f = received.shape[0]
    if candidate.shape[0] != n_f or code.n_f != n_f:
        raise LengthMismatchError(
            f"{n_f} frames received, candidate has {candidate.shape[0]}, reader code {code.n_f}"
        )
    weights = candidate.astype(float) * code.elements
    return weights @ received


def energy_detect(aggregated: np.ndarray, window: slice | None = None) -> float:
    """Energy of the aggregated frame: the sum of squared samples in ``window``."""
    y = np.asarray(aggregated, dtype=float)
    if y.size == 0:
        raise ValueError("cannot energy-detect an empty signal")
    if window is not None:
        y = y[window]
    return float(np.dot(y, y))


def decision_statistics(
    received: np.ndarray, book: Codebook, code: ReaderCode, window: slice | None = None
) -> np.ndarray:
    return np.array(
        [energy_detect(match_and_aggregate(received, cw, code), window) for cw in book.codewords]
    )


def detect(
    received: np.ndarray, book: Codebook, code: ReaderCode, window: slice | None = None
) -> Detection:
    """Pick the codeword with the largest energy statistic (ties go to the lowest index)."""
    stats = decision_statistics(received, book, code, window)
    index = int(np.argmax(stats))
    return Detection(index, demap_codeword(index, book), stats)
