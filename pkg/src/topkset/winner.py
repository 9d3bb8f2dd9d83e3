"""Winner probability estimators: P(c is the true best) for each candidate.

Two estimators share one shape, a product of pairwise beat terms per
candidate followed by normalization:

- prob_ind treats every pairwise comparison on the candidates' full score
  pdfs, ignoring score dependence through shared questions.
- prob_dep first pins the unknowns shared by each compared pair to the
  range minimum, so terms that would move both scores identically drop
  out of the comparison. On candidates that share no entities it
  degenerates to prob_ind.

brute_force_dist enumerates every grid completion of the unknowns and is
the exact reference the estimators are tested against.

Construct weights must keep candidate scores on one common grid for the
pdf comparisons; the default weight 1.0 always does.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import Interval, elimination_cut, score_bounds
from .distributions import DiscretePdf, geq_probability, geq_probability_naive, uniform_pdf
from .model import (Candidate, KnownStore, ScoringSpec, question_universe,
                    questions_of, unknown_questions)


class CapExceededError(RuntimeError):
    """Exhaustive enumeration would exceed the configured assignment cap."""


@dataclass(frozen=True)
class WinnerDistribution:
    """Normalized winner probabilities aligned with candidate indices.

    `raw` keeps the unnormalized per-candidate products for traces.
    `zero_raw` marks the degenerate case where every product vanished and
    the probabilities fell back to uniform.
    """

    probs: tuple[float, ...]
    raw: tuple[float, ...]
    zero_raw: bool = False

    def top_index(self) -> int:
        """Index of the most probable candidate; ties go to the lowest index."""
        best = 0
        for i in range(1, len(self.probs)):
            if self.probs[i] > self.probs[best]:
                best = i
        return best


def normalize(raw: Sequence[float]) -> tuple[tuple[float, ...], bool]:
    """Scale raw weights to sum to 1; an all-zero vector becomes uniform."""
    if any(r < 0 for r in raw):
        raise ValueError("raw weights must be nonnegative")
    total = sum(raw)
    if total == 0:
        n = len(raw)
        return (1.0 / n,) * n, True
    return tuple(r / total for r in raw), False


def _candidate_pdfs(candidates: Sequence[Candidate], spec: ScoringSpec,
                    knowns: KnownStore) -> list[DiscretePdf]:
    return [uniform_pdf(score_bounds(c, spec, knowns), spec.grid_step)
            for c in candidates]


def prob_ind(candidates: Sequence[Candidate], spec: ScoringSpec,
             knowns: KnownStore) -> WinnerDistribution:
    """Independence estimate: product of P(c beats c_i) over full pdfs."""
    pdfs = _candidate_pdfs(candidates, spec, knowns)
    m = len(candidates)
    raw = []
    for i in range(m):
        r = 1.0
        for j in range(m):
            if j != i:
                r *= geq_probability(pdfs[i], pdfs[j])
        raw.append(r)
    probs, flagged = normalize(raw)
    return WinnerDistribution(probs, tuple(raw), flagged)


def prob_dep(candidates: Sequence[Candidate], spec: ScoringSpec,
             knowns: KnownStore) -> WinnerDistribution:
    """Pairwise estimate with shared-unknown elimination.

    Each beat term P(c >= c_i) is evaluated on the pair's eliminated pdfs
    by the quadratic double sum, visiting opponents in candidate order.
    """
    m = len(candidates)
    full = [score_bounds(c, spec, knowns) for c in candidates]
    unk = [frozenset(q for q in questions_of(c, spec) if q not in knowns)
           for c in candidates]
    raw = [1.0] * m
    for i in range(m):
        for j in range(i + 1, m):
            cut = elimination_cut(unk[i] & unk[j], spec)
            pi = uniform_pdf(Interval(full[i].lb, full[i].ub - cut), spec.grid_step)
            pj = uniform_pdf(Interval(full[j].lb, full[j].ub - cut), spec.grid_step)
            raw[i] *= geq_probability_naive(pi, pj)
            raw[j] *= geq_probability_naive(pj, pi)
    probs, flagged = normalize(raw)
    return WinnerDistribution(probs, tuple(raw), flagged)


def brute_force_dist(candidates: Sequence[Candidate], spec: ScoringSpec,
                     knowns: KnownStore, cap: int = 10_000_000,
                     chunk: int = 65_536) -> WinnerDistribution:
    """Exact winner distribution by enumerating all unknown completions.

    Every grid assignment of the unknown questions is equally likely; per
    assignment the top scorer wins, with exact ties splitting the win
    fractionally. Raises CapExceededError when the assignment count
    exceeds `cap`.
    """
    unknowns = unknown_questions(question_universe(spec, candidates), knowns)
    grid = np.array(spec.grid_values())
    g, u, m = len(grid), len(unknowns), len(candidates)
    total = g ** u
    if total > cap:
        raise CapExceededError(f"{g}^{u} assignments exceed cap {cap}")

    base = np.zeros(m)
    incidence = np.zeros((u, m))
    qpos = {q: r for r, q in enumerate(unknowns)}
    for ci, c in enumerate(candidates):
        for q in questions_of(c, spec):
            w = spec.construct_named(q.construct).weight
            v = knowns.get(q)
            if v is not None:
                base[ci] += w * v
            else:
                incidence[qpos[q], ci] += w

    counts = np.zeros(m)
    powers = g ** np.arange(u - 1, -1, -1, dtype=np.int64) if u else np.array([], dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % g if u else np.zeros((len(idx), 0), dtype=np.int64)
        scores = base[None, :] + grid[digits] @ incidence
        top = scores.max(axis=1)
        tied = np.isclose(scores, top[:, None], rtol=0.0, atol=1e-9)
        counts += (tied / tied.sum(axis=1, keepdims=True)).sum(axis=0)

    probs, flagged = normalize([float(x) for x in counts])
    return WinnerDistribution(probs, tuple(float(x) for x in counts), flagged)
