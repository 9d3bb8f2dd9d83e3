"""Candidate score intervals from partial knowledge, and dominance tests.

A candidate's lower bound assumes every unknown construct scores the range
minimum; the upper bound assumes the maximum. Comparing two candidates
first fixes their shared unknown questions to the minimum score for both
sides, which removes terms that would move both totals in lockstep and
can therefore never decide the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Candidate, KnownStore, Question, ScoringSpec, questions_of


@dataclass(frozen=True)
class Interval:
    lb: float
    ub: float

    def __post_init__(self):
        if self.lb > self.ub:
            raise ValueError(f"invalid interval ({self.lb}, {self.ub})")

    @property
    def width(self) -> float:
        return self.ub - self.lb

    def contains(self, other: "Interval") -> bool:
        return self.lb <= other.lb and other.ub <= self.ub


def score_bounds(c: Candidate, spec: ScoringSpec, knowns: KnownStore) -> Interval:
    """Tightest interval containing c's total score given the known answers.

    With every question answered the interval collapses to the exact score.
    """
    lb = ub = 0.0
    for q in questions_of(c, spec):
        w = spec.construct_named(q.construct).weight
        v = knowns.get(q)
        if v is None:
            lb += w * spec.min_score
            ub += w * spec.max_score
        else:
            lb += w * v
            ub += w * v
    return Interval(lb, ub)


def shared_unknowns(ca: Candidate, cb: Candidate, spec: ScoringSpec,
                    knowns: KnownStore) -> tuple[Question, ...]:
    """Unknown questions contributing to both candidates' scores."""
    qb = set(questions_of(cb, spec))
    return tuple(q for q in questions_of(ca, spec)
                 if q in qb and q not in knowns)


def elimination_cut(shared, spec: ScoringSpec) -> float:
    """Upper-bound reduction from pinning the shared unknowns to the minimum.

    Summed per construct in spec order so the float result does not depend
    on the iteration order of `shared`.
    """
    span = spec.max_score - spec.min_score
    cut = 0.0
    for con in spec.constructs:
        n = sum(1 for q in shared if q.construct == con.name)
        cut += n * con.weight * span
    return cut


def eliminated_bounds(ca: Candidate, cb: Candidate, spec: ScoringSpec,
                      knowns: KnownStore) -> tuple[Interval, Interval]:
    """Score bounds of ca and cb with their shared unknowns pinned to the minimum.

    Pinning to min_score leaves each lower bound unchanged and shrinks each
    upper bound by weight * (max - min) per shared unknown, so the support
    of the eliminated interval is a prefix of the full one. Shared known
    questions stay in place; they shift both totals equally and cancel in
    any comparison.
    """
    if ca == cb:
        raise ValueError("eliminated_bounds requires distinct candidates")
    cut = elimination_cut(shared_unknowns(ca, cb, spec, knowns), spec)
    a = score_bounds(ca, spec, knowns)
    b = score_bounds(cb, spec, knowns)
    return Interval(a.lb, a.ub - cut), Interval(b.lb, b.ub - cut)


def dominates(ca: Candidate, cb: Candidate, spec: ScoringSpec,
              knowns: KnownStore, strict: bool = False) -> bool:
    """Whether ca's score provably reaches cb's under every completion.

    True when ca's eliminated lower bound >= cb's eliminated upper bound
    (> when strict). Weak dominance certifies F(ca) >= F(cb) for every
    assignment of the remaining unknowns; strict certifies cb can never
    win alone, which is what pruning needs.
    """
    ia, ib = eliminated_bounds(ca, cb, spec, knowns)
    return ia.lb > ib.ub if strict else ia.lb >= ib.ub
