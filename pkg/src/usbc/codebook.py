"""Balanced orthogonal block codes for the tag and the reader's +/-1 code.

The tag maps ``K`` information bits onto one of ``2**K`` codewords of length
``N_f`` (one chip per frame). Codewords are rows of a Sylvester-Hadamard
matrix with the all-ones row removed, so every codeword sums to zero and any
two distinct codewords are orthogonal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CodebookSizeError, LengthMismatchError

__all__ = [
    "Codebook",
    "ReaderCode",
    "sylvester_hadamard",
    "frames_for_bits",
    "build_codebook",
    "bits_to_index",
    "map_bits",
    "demap_codeword",
    "generate_reader_code",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def sylvester_hadamard(order: int) -> np.ndarray:
    """Sylvester-Hadamard matrix of the given power-of-two order (int8)."""
    if not _is_power_of_two(order):
        raise CodebookSizeError(f"Hadamard order must be a power of two, got {order}")
    h = np.ones((1, 1), dtype=np.int8)
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    return h


def frames_for_bits(k: int) -> int:
    """Smallest power-of-two frame count whose Hadamard order offers 2**k balanced rows."""
    if k < 1:
        raise CodebookSizeError(f"bits per symbol must be >= 1, got {k}")
    n_f = 4
    while n_f - 1 < 2**k:
        n_f *= 2
    return n_f


@dataclass(frozen=True)
class Codebook:
    """``2**K`` balanced, mutually orthogonal +/-1 codewords of length ``N_f``.

    ``codewords[i]`` is the codeword for the bit block whose big-endian
    value is ``i``.
    """

    codewords: np.ndarray
    bits_per_symbol: int

    def __post_init__(self) -> None:
        cw = np.array(self.codewords, dtype=np.int8)
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)
        if cw.ndim != 2 or cw.shape[0] != 2**self.bits_per_symbol:
            raise CodebookSizeError(
                f"expected {2**self.bits_per_symbol} codewords, got shape {cw.shape}"
            )

    @property
    def n_bc(self) -> int:
        return self.codewords.shape[0]

    @property
    def n_f(self) -> int:
        return self.codewords.shape[1]

    def gram(self) -> np.ndarray:
        c = self.codewords.astype(np.int64)
        return c @ c.T

    def to_csv_rows(self) -> list[str]:
        return [",".join(f"{int(v):+d}" for v in row) for row in self.codewords]


@dataclass(frozen=True)
class ReaderCode:
    """The reader's per-frame +/-1 pulse polarities ``d_j`` for one symbol."""

    elements: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        el = np.array(self.elements, dtype=np.int8)
        if el.ndim != 1 or not np.all(np.abs(el) == 1):
            raise ValueError("reader code elements must be a 1-D sequence of +/-1")
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)

    @property
    def n_f(self) -> int:
        return self.elements.shape[0]


def build_codebook(n_f: int | None, k: int) -> Codebook:
    """Build the codebook for ``k`` bits per symbol over ``n_f`` frames.

    Rows 1..2**k of the Sylvester-Hadamard matrix of order ``n_f`` are used;
    row 0 is all ones and therefore unbalanced. ``n_f=None`` picks the
    smallest admissible order.
    """
    if k < 1:
        raise CodebookSizeError(f"bits per symbol must be >= 1, got {k}")
    if n_f is None:
        n_f = frames_for_bits(k)
    if not _is_power_of_two(n_f) or n_f < 4:
        raise CodebookSizeError(f"n_f must be a power of two >= 4, got {n_f}")
    if 2**k > n_f - 1:
        raise CodebookSizeError(
            f"order {n_f} has only {n_f - 1} balanced rows; {2**k} needed for k={k}"
        )
    h = sylvester_hadamard(n_f)
    return Codebook(h[1 : 2**k + 1], k)


def bits_to_index(bits: Sequence[int], book: Codebook) -> int:
    if len(bits) != book.bits_per_symbol:
        raise LengthMismatchError(
            f"bit block has {len(bits)} bits, codebook carries {book.bits_per_symbol}"
        )
    index = 0
    for b in bits:
        index = (index << 1) | (1 if b else 0)
    return index


def map_bits(bits: Sequence[int], book: Codebook) -> np.ndarray:
    """Codeword for a bit block (big-endian value indexes the codebook)."""
    return book.codewords[bits_to_index(bits, book)]


def demap_codeword(index: int, book: Codebook) -> tuple[int, ...]:
    """Inverse of :func:`map_bits`: the K-bit block for codeword ``index``."""
    if not 0 <= index < book.n_bc:
        raise IndexError(f"codeword index {index} outside [0, {book.n_bc})")
    k = book.bits_per_symbol
    return tuple((index >> (k - 1 - i)) & 1 for i in range(k))


def generate_reader_code(n_f: int, seed: int) -> ReaderCode:
    """Seeded pseudorandom +/-1 reader code; a pure function of ``(n_f, seed)``."""
    if n_f < 1:
        raise ValueError(f"n_f must be >= 1, got {n_f}")
    rng = np.random.default_rng(seed)
    elements = 1 - 2 * rng.integers(0, 2, size=n_f, dtype=np.int8)
    return ReaderCode(elements, seed)
