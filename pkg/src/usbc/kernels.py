"""Hot Monte Carlo kernel with a compiled core and a numpy fallback.

The compiled extension ``usbc._ckernels`` is used when it was built and
``USBC_PURE_PYTHON`` is unset; otherwise the numpy version runs. Both
compute, for a batch of B symbols, the received frames

    r[b, j, :] = a[tx_b, j] d_j x_b + beta2_b d_j p + sigma n[b, j, :]

and return the energy statistics ``J[b, m] = sum_i (sum_j a[m, j] d_j r[b, j, i])**2``.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

__all__ = ["BACKEND", "energy_statistics", "python_energy_statistics", "compiled_energy_statistics"]

python_energy_statistics = _pykernels.energy_statistics
compiled_energy_statistics = None if _ckernels is None else _ckernels.energy_statistics

if compiled_energy_statistics is not None and not os.environ.get("USBC_PURE_PYTHON"):
    BACKEND = "cython"
    _impl = compiled_energy_statistics
else:
    BACKEND = "python"
    _impl = python_energy_statistics


def _coerce(book, code, tx, tag_wave, beta2, pulse, noise):
    f = lambda a: np.ascontiguousarray(a, dtype=np.float64)
    return (
        f(book),
        f(code),
        np.ascontiguousarray(tx, dtype=np.intp),
        f(tag_wave),
        f(beta2),
        f(pulse),
        f(noise),
    )


def energy_statistics(book, code, tx, tag_wave, beta2, pulse, noise, sigma, impl=None):
    """Energy statistics for a batch of symbols, shape ``(B, N_bc)``.

    Parameters
    ----------
    book : (N_bc, N_f) array of +/-1 codewords.
    code : (N_f,) reader code.
    tx : (B,) transmitted codeword indices.
    tag_wave : (B, M) pulse after the tag channel, per symbol.
    beta2 : (B,) summed scatter gain per symbol.
    pulse : (M,) transmitted pulse.
    noise : (B, N_f, M) standard-normal draws.
    sigma : noise standard deviation per sample, ``sqrt(N0 / 2)``.
    impl : optional explicit backend callable (for benchmarks and tests).
    """
    args = _coerce(book, code, tx, tag_wave, beta2, pulse, noise)
    n_bc = args[0].shape[0]
    if args[2].size and (args[2].min() < 0 or args[2].max() >= n_bc):
        raise IndexError("transmitted codeword index out of range")
    return (impl or _impl)(*args, float(sigma))
