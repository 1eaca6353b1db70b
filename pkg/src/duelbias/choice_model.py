"""Bradley-Terry model: fit latent quality scores from pairwise duels.

The win probability of item a over item b is s(a) / (s(a) + s(b)) for
strictly positive latent scores. Fitting uses minorization-maximization
sweeps, optionally regularized by pseudo-duels against a virtual anchor
item, which makes the maximizer exist for any data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateFitError, UnidentifiableItemsError, ValidationError

GEOMETRIC_MEAN_ONE = "geometric-mean-one"
SUM_ONE = "sum-one"

_SCORE_FLOOR = 1e-150
_SCORE_CEIL = 1e150


@dataclass(frozen=True)
class ComparisonGraph:
    """Duel outcomes over an ordered item set.

    ``duels`` holds (winner_index, loser_index) pairs into ``items``.
    """

    items: tuple[Hashable, ...]
    duels: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(set(self.items)) != len(self.items):
            raise ValidationError("duplicate item ids in comparison graph")
        n = len(self.items)
        for w, l in self.duels:
            if not (0 <= w < n and 0 <= l < n):
                raise ValidationError(f"duel index out of range: ({w}, {l})")
            if w == l:
                raise ValidationError(f"item {self.items[w]!r} dueled itself")

    @classmethod
    def from_pairs(
        cls,
        winner_loser_pairs: Iterable[tuple[Hashable, Hashable]],
        items: Sequence[Hashable] | None = None,
    ) -> "ComparisonGraph":
        """Build a graph from (winner_id, loser_id) pairs.

        If ``items`` is omitted, the item set is the sorted union of ids
        seen in the pairs.
        """
        pairs = list(winner_loser_pairs)
        if items is None:
            items = sorted({x for pair in pairs for x in pair})
        index = {item: i for i, item in enumerate(items)}
        duels = tuple((index[w], index[l]) for w, l in pairs)
        return cls(items=tuple(items), duels=duels)

    @property
    def n_items(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 10_000
    tolerance: float = 1e-8
    regularization_alpha: float = 0.1
    normalization: str = GEOMETRIC_MEAN_ONE

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")
        if self.regularization_alpha < 0:
            raise ValidationError("regularization_alpha must be nonnegative")
        if self.normalization not in (GEOMETRIC_MEAN_ONE, SUM_ONE):
            raise ValidationError(f"unknown normalization {self.normalization!r}")


@dataclass(frozen=True)
class ScoreTable:
    """Fitted latent scores for one tournament, plus fit diagnostics.

    ``anchor_score`` is the regularization anchor expressed in the same
    gauge as ``scores``; the regularized objective is invariant under
    joint rescaling of scores and anchor.
    """

    scores: dict[Hashable, float]
    normalization: str
    log_likelihood: float
    iterations: int
    converged: bool
    regularization: float
    anchor_score: float = 1.0

    def __post_init__(self):
        for item, s in self.scores.items():
            if not (s > 0 and math.isfinite(s)):
                raise ValidationError(f"non-positive score for {item!r}: {s}")

    def score_array(self, items: Sequence[Hashable]) -> np.ndarray:
        return np.array([self.scores[i] for i in items], dtype=float)


def win_probability(score_a: float, score_b: float) -> float:
    """Probability that the first item wins a duel, s_a / (s_a + s_b)."""
    for s in (score_a, score_b):
        if not (s > 0 and math.isfinite(s)):
            raise ValidationError(f"scores must be positive and finite, got {s}")
    return score_a / (score_a + score_b)


def log_likelihood(graph: ComparisonGraph, scores) -> float:
    """Sum of log win probabilities over all duels; always <= 0."""
    if isinstance(scores, ScoreTable):
        scores = scores.scores
    try:
        s = np.array([scores[item] for item in graph.items], dtype=float)
    except KeyError as exc:
        raise LookupError(f"missing score for item {exc.args[0]!r}") from exc
    if not graph.duels:
        return 0.0
    d = np.array(graph.duels, dtype=np.intp)
    sw, sl = s[d[:, 0]], s[d[:, 1]]
    return float(np.sum(np.log(sw) - np.log(sw + sl)))


def regularized_log_likelihood(
    graph: ComparisonGraph, scores, alpha: float, anchor: float = 1.0
) -> float:
    """Duel log-likelihood plus alpha pseudo-wins and pseudo-losses per item
    against a virtual item with score ``anchor``."""
    if isinstance(scores, ScoreTable):
        scores = scores.scores
    base = log_likelihood(graph, scores)
    if alpha == 0.0:
        return base
    s = np.array([scores[item] for item in graph.items], dtype=float)
    reg = np.sum(np.log(s) + np.log(anchor) - 2.0 * np.log(s + anchor))
    return base + alpha * float(reg)


def _strongly_connected(n: int, duels: Sequence[tuple[int, int]]) -> bool:
    """Is the directed win graph strongly connected? Iterative Kosaraju."""
    if n == 1:
        return True
    fwd = [[] for _ in range(n)]
    bwd = [[] for _ in range(n)]
    for w, l in duels:
        fwd[w].append(l)
        bwd[l].append(w)

    def reaches_all(adj):
        seen = [False] * n
        seen[0] = True
        stack = [0]
        count = 1
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        return count == n

    return reaches_all(fwd) and reaches_all(bwd)


def fit(
    graph: ComparisonGraph,
    config: FitConfig | None = None,
    initial_scores: Mapping[Hashable, float] | None = None,
) -> ScoreTable:
    """Maximize the (regularized) Bradley-Terry likelihood by MM sweeps.

    Each sweep applies s_i <- (W_i + a) / (sum over i's duels of
    1/(s_i + s_opponent) + 2a/(s_i + 1)) and stops once the largest
    absolute change in log-score falls below the configured tolerance.
    The result is expressed in the configured gauge; the regularization
    anchor is rescaled along with the scores so the reported fit is the
    exact optimum of the regularized objective.
    """
    if config is None:
        config = FitConfig()
    n = graph.n_items
    if n == 0:
        raise DegenerateFitError("comparison graph has no items")
    alpha = config.regularization_alpha

    appearances = np.zeros(n, dtype=np.intp)
    wins = np.zeros(n, dtype=float)
    if graph.duels:
        d = np.array(graph.duels, dtype=np.intp)
        wi, li = d[:, 0], d[:, 1]
        np.add.at(appearances, wi, 1)
        np.add.at(appearances, li, 1)
        np.add.at(wins, wi, 1.0)
    else:
        wi = li = np.empty(0, dtype=np.intp)

    if alpha == 0.0:
        if not graph.duels:
            raise DegenerateFitError(
                "no duels and no regularization: likelihood has no maximizer"
            )
        silent = [graph.items[i] for i in range(n) if appearances[i] == 0]
        if silent:
            raise UnidentifiableItemsError(silent)
        identifiable = _strongly_connected(n, graph.duels)
    else:
        identifiable = True

    if initial_scores is not None:
        s = np.array([initial_scores[item] for item in graph.items], dtype=float)
    else:
        s = np.ones(n, dtype=float)
    log_s = np.log(s)

    converged = False
    iterations = 0
    denom = np.empty(n, dtype=float)
    for iterations in range(1, config.max_iterations + 1):
        denom[:] = 0.0
        if len(wi):
            inv = 1.0 / (s[wi] + s[li])
            np.add.at(denom, wi, inv)
            np.add.at(denom, li, inv)
        if alpha > 0.0:
            denom += 2.0 * alpha / (s + 1.0)
        s_new = (wins + alpha) / denom
        np.clip(s_new, _SCORE_FLOOR, _SCORE_CEIL, out=s_new)
        log_new = np.log(s_new)
        delta = float(np.max(np.abs(log_new - log_s)))
        s, log_s = s_new, log_new
        if delta < config.tolerance:
            converged = True
            break

    if not identifiable:
        converged = False

    if config.normalization == GEOMETRIC_MEAN_ONE:
        scale = math.exp(float(np.mean(log_s)))
    else:
        scale = float(np.sum(s))
    s = s / scale
    anchor = 1.0 / scale

    scores = {item: float(v) for item, v in zip(graph.items, s)}
    return ScoreTable(
        scores=scores,
        normalization=config.normalization,
        log_likelihood=log_likelihood(graph, scores),
        iterations=iterations,
        converged=converged,
        regularization=alpha,
        anchor_score=anchor,
    )


def rank_items(table: ScoreTable) -> list[Hashable]:
    """Item ids sorted by descending score; ties broken by ascending id."""
    if not table.scores:
        raise ValidationError("cannot rank an empty score table")
    return sorted(table.scores, key=lambda item: (-table.scores[item], item))
