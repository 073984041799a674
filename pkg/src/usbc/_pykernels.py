"""Numpy implementation of the batched synthesize-match-detect kernel."""
import numpy as np


def energy_statistics(book, code, tx, tag_wave, beta2, pulse, noise, sigma):
    chips = book[tx] * code
    received = (
        chips[:, :, None] * tag_wave[:, None, :]
        + (beta2[:, None] * code)[:, :, None] * pulse
        + sigma * noise
    )
    aggregated = np.matmul(book * code, received)
    return np.einsum("bmi,bmi->bm", aggregated, aggregated)
