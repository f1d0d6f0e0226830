"""Window sub-additivity and monotonicity of path costs."""

from __future__ import annotations

from dataclasses import dataclass

from ..params import ReservoirParams
from ..pde.path import DensityPath
from .direct import rate_direct


@dataclass(frozen=True)
class PathCostReport:
    i_full: float
    i_head: float
    i_tail: float
    tol: float
    subadditive: bool
    head_monotone: bool
    tail_monotone: bool
    additivity_gap: float

    @property
    def ok(self) -> bool:
        return self.subadditive and self.head_monotone and self.tail_monotone


def path_cost_algebra_check(u: DensityPath, split: float, params: ReservoirParams | None = None,
                            evaluator=rate_direct) -> PathCostReport:
    """Compare the cost on ``[0, T]`` with the costs on ``[0, S]`` and ``[S, T]``.

    Checks ``I[0,T] <= I[0,S] + I[S,T]``, ``I[0,S] <= I[0,T]`` and
    ``I[S,T] <= I[0,T]``, each up to ``1e-3 (1 + I[0,T])``.
    """
    params = params or u.params
    t0, t1 = u.times[0], u.times[-1]
    if not t0 < split < t1:
        raise ValueError("split must lie strictly inside the time range")
    full = evaluator(u, params).i_total
    head = evaluator(u.window(t0, split), params).i_total
    tail = evaluator(u.window(split, t1), params).i_total
    tol = 1e-3 * (1 + full)
    return PathCostReport(
        i_full=full, i_head=head, i_tail=tail, tol=tol,
        subadditive=full <= head + tail + tol,
        head_monotone=head <= full + tol,
        tail_monotone=tail <= full + tol,
        additivity_gap=full - head - tail,
    )
