"""Density estimation and one-dimensional distances (scipy.stats backed)."""
import numpy as np
from scipy import stats

from src.domain.diagnostics import DistanceReport
from src.domain.errors import ConfigError
from src.domain.meanfield import Density1D


def kde(samples, eval_nodes) -> Density1D:
    """
    Gaussian kernel estimate with Silverman's bandwidth 1.06 std N^(-1/5), evaluated on
    equally spaced nodes and normalized to unit trapezoidal mass on that window.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    nodes = np.asarray(eval_nodes, dtype=float)
    if samples.size < 2:
        raise ConfigError("kde needs at least two samples")
    if np.ptp(samples) == 0.0:
        # all samples coincide: the whole mass sits on the nearest node
        values = np.zeros(nodes.size)
        k = int(np.argmin(np.abs(nodes - samples[0])))
        h = nodes[1] - nodes[0]
        values[k] = 1.0 / (h if 0 < k < nodes.size - 1 else 0.5 * h)
        return Density1D(x_nodes=nodes, values=values)
    factor = 1.06 * samples.size ** (-0.2)
    values = stats.gaussian_kde(samples, bw_method=factor)(nodes)
    mass = np.trapezoid(values, nodes)
    if mass <= 0.0:
        raise ConfigError("Samples fall entirely outside the evaluation window")
    return Density1D(x_nodes=nodes, values=values / mass)


def wasserstein1_1d(samples_a, samples_b) -> float:
    """Exact W1 of two empirical measures on the line (quantile coupling)."""
    a = np.asarray(samples_a, dtype=float).ravel()
    b = np.asarray(samples_b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ConfigError("wasserstein1_1d needs non-empty sample sets")
    return float(stats.wasserstein_distance(a, b))


def wasserstein1_grid(a: Density1D, b: Density1D) -> float:
    """W1 between two grid densities, each normalized to a probability measure."""
    return float(stats.wasserstein_distance(a.x_nodes, b.x_nodes,
                                            np.maximum(a.values, 0.0), np.maximum(b.values, 0.0)))


def wasserstein1_samples_grid(samples, density: Density1D) -> float:
    samples = np.asarray(samples, dtype=float).ravel()
    return float(stats.wasserstein_distance(samples, density.x_nodes,
                                            v_weights=np.maximum(density.values, 0.0)))


def density_distance(a: Density1D, b: Density1D) -> DistanceReport:
    """W1, L1 and sup distances; b is interpolated onto a's nodes when the grids differ."""
    if a.x_nodes.shape == b.x_nodes.shape and np.array_equal(a.x_nodes, b.x_nodes):
        b_values = b.values
    else:
        b_values = np.interp(a.x_nodes, b.x_nodes, b.values, left=0.0, right=0.0)
    diff = np.abs(a.values - b_values)
    return DistanceReport(
        w1=wasserstein1_grid(a, b),
        l1=float(np.trapezoid(diff, a.x_nodes)),
        sup=float(diff.max()),
    )
