"""Independent reference computations shared by several test modules."""
import numpy as np
from scipy import integrate


def nakagami_cdf_by_quadrature(params, grid_max=None, n_grid=4000):
    """CDF of the generalized Nakagami law by integrating its pdf on a grid.

    Deliberately avoids the Gamma-function substitution used by the sampler.
    Returns a callable interpolating the cumulative integral.
    """
    if grid_max is None:
        # far tail: h**(2s) beyond 60 * omega / z carries negligible mass
        grid_max = (60.0 * params.omega / params.z + 60.0 * params.omega) ** (1 / (2 * params.s))
    edges = np.concatenate(([0.0], np.geomspace(grid_max * 1e-9, grid_max, n_grid)))
    pieces = [integrate.quad(params.pdf, a, b, epsabs=1e-14, epsrel=1e-12)[0] for a, b in zip(edges[:-1], edges[1:])]
    cum = np.concatenate(([0.0], np.cumsum(pieces)))

    def cdf(x):
        return np.interp(x, edges, cum, right=cum[-1])

    cdf.total = cum[-1]
    return cdf


def ks_statistic(samples, cdf):
    x = np.sort(np.asarray(samples))
    n = x.size
    f = cdf(x)
    i = np.arange(1, n + 1)
    return max(np.max(i / n - f), np.max(f - (i - 1) / n))
