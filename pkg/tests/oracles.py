"""Independent reference implementations used to check the package.

Everything here deliberately avoids the code paths under test: brute
force enumeration, exact rational arithmetic, and grid search.
"""

from fractions import Fraction
from itertools import product
from math import comb

import numpy as np


def exact_binomial_two_sided(k: int, n: int) -> Fraction:
    """Two-sided binomial p-value against 1/2 with exact rational arithmetic."""
    pmf = [Fraction(comb(n, j), 2**n) for j in range(n + 1)]
    observed = pmf[k]
    return sum(p for p in pmf if p <= observed)


def chi2_stat_observed_expected(table) -> float:
    """Pearson statistic via the sum over cells of (O-E)^2/E."""
    obs = np.asarray(table, dtype=float)
    row = obs.sum(axis=1, keepdims=True)
    col = obs.sum(axis=0, keepdims=True)
    expected = row * col / obs.sum()
    return float(((obs - expected) ** 2 / expected).sum())


def brute_kendall_tau_b(xs, ys) -> float:
    """Tau-b by explicit enumeration of all item pairs."""
    n = len(xs)
    concordant = discordant = tied_x = tied_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = int(xs[i] > xs[j]) - int(xs[i] < xs[j])
            dy = int(ys[i] > ys[j]) - int(ys[i] < ys[j])
            if dx == 0:
                tied_x += 1
            if dy == 0:
                tied_y += 1
            if dx * dy > 0:
                concordant += 1
            elif dx * dy < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    return (concordant - discordant) / np.sqrt((n0 - tied_x) * (n0 - tied_y))


def brute_percentile_rank(value, sample) -> float:
    below = sum(1 for s in sample if s < value)
    equal = sum(1 for s in sample if s == value)
    return 100.0 * (below + 0.5 * equal) / len(sample)


def _objective_on_grid(log_scores, duels, alpha):
    """Regularized Bradley-Terry objective for a batch of log-score vectors.

    log_scores: (m, n) candidate vectors; anchor fixed at score 1.
    """
    s = np.exp(log_scores)
    total = np.zeros(len(log_scores))
    for w, l in duels:
        total += log_scores[:, w] - np.log(s[:, w] + s[:, l])
    if alpha > 0:
        total += alpha * np.sum(
            log_scores - 2.0 * np.log(s + 1.0), axis=1
        )
    return total


def grid_search_log_likelihood(
    n_items, duels, alpha, span=3.0, final_step=0.01
):
    """Maximize the regularized objective by refining grid search.

    Returns the best objective value found with a final grid step of 0.01
    in log-score space. The objective is concave in log-scores, so
    refining around the best coarse point converges to the optimum.
    """
    center = np.zeros(n_items)
    step = span / 5.0
    offsets = np.arange(-5, 6)
    for _ in range(200):
        axes = [center[i] + step * offsets for i in range(n_items)]
        grid = np.array(list(product(*axes)))
        values = _objective_on_grid(grid, duels, alpha)
        best = int(np.argmax(values))
        on_boundary = np.any(np.abs(grid[best] - center) >= 5 * step - 1e-12)
        center = grid[best]
        if on_boundary:
            continue  # optimum may lie outside the span; recenter, same step
        if step <= final_step:
            return float(values[best])
        step = max(step / 5.0, final_step)
    raise RuntimeError("grid search failed to converge")
