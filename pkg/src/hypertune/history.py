"""Evaluation records shared by every optimizer.

A :class:`History` is the ordered log of one optimization run: successful
evaluations plus failed attempts, each stamped with a strictly increasing
iteration index.  Optimizers append one record per objective call so that
evaluation budgets are comparable across methods.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .space import ParamPoint


@dataclass(frozen=True)
class EvalRecord:
    """One successful objective evaluation (maximize orientation)."""

    iteration: int
    point: ParamPoint
    score: float
    wall_time: float
    objective_id: str


@dataclass(frozen=True)
class FailureRecord:
    """One failed objective evaluation, kept for auditing and replay."""

    iteration: int
    point: ParamPoint
    error: str


@dataclass
class History:
    records: list[EvalRecord] = field(default_factory=list)
    failures: list[FailureRecord] = field(default_factory=list)

    def best(self) -> EvalRecord:
        """The maximal-score record; ties go to the earliest iteration."""
        if not self.records:
            raise ValueError("empty history has no best record")
        best = self.records[0]
        for rec in self.records[1:]:
            if rec.score > best.score:
                best = rec
        return best

    def best_so_far(self) -> list[float]:
        """Running maximum of the score sequence."""
        out = []
        cur = float("-inf")
        for rec in self.records:
            cur = max(cur, rec.score)
            out.append(cur)
        return out

    def evaluations_to_reach(self, threshold: float) -> int | None:
        """1-based count of evaluations until a score >= threshold, if ever."""
        for i, rec in enumerate(self.records, start=1):
            if rec.score >= threshold:
                return i
        return None
