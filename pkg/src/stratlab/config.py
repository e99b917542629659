"""Dataclass configuration shared by the numeric pipeline and the CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from .arcs import LimitSchedule
from .groebner import GroebnerBudgets


@dataclass(frozen=True)
class DescentConfig:
    """Knobs for the cancellation-descent arc search."""

    enabled: bool = True
    max_abs_order: int = 6       # cap on |alpha| in Taylor layers (n <= 6)
    max_abs_order_big: int = 3   # cap for n >= 7
    max_level: int = 8           # give up past this weighted order
    random_weights: int = 2
    max_weight: int = 3
    null_dirs: int = 8
    ls_starts: int = 30
    ls_residual_tol: float = 1e-9
    max_solutions: int = 6
    free_variants: int = 2

    def reduced(self) -> "DescentConfig":
        """Cheaper settings for auxiliary (approach-curve) points."""
        return replace(
            self,
            random_weights=0,
            null_dirs=max(4, self.null_dirs // 2),
            ls_starts=max(8, self.ls_starts // 3),
            max_solutions=min(4, self.max_solutions),
            free_variants=1,
        )


@dataclass(frozen=True)
class Budgets:
    arc_count: int = 48
    max_exponent: int = 6
    max_depth: int = 3
    symbolic: bool = False
    groebner: GroebnerBudgets = field(default_factory=GroebnerBudgets)
    descent: DescentConfig = field(default_factory=DescentConfig)
    approach_directions: int = 3
    approach_samples: int = 9
    aux_arc_count: int = 24      # arc budget at auxiliary (non-probe) points


@dataclass(frozen=True)
class Tolerances:
    rank_tol: float = 1e-6
    limit_tol: float = 1e-9
    ortho_tol: float = 1e-6
    t0: float = 0.25
    ratio: float = 0.5
    t_min: float = 1e-6
    sing_tol: float = 1e-10
    memo_round: int = 9          # decimal digits for memo keys
    subspace_tol: float = 1e-6
    stab_tol: float = 1e-3       # residual below which a depth step is a fixed point
    approach_t0: float = 0.125
    approach_ratio: float = 0.5

    def schedule(self, max_steps: int = 14) -> LimitSchedule:
        return LimitSchedule(
            t0=self.t0, ratio=self.ratio, max_steps=max_steps,
            limit_tol=self.limit_tol, t_min=self.t_min,
        )


@dataclass(frozen=True)
class RunConfig:
    field_name: str = "R"        # "R" or "C"
    seed: int = 0
    budgets: Budgets = field(default_factory=Budgets)
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def real(self) -> bool:
        return self.field_name == "R"

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)


def preset(name: str) -> Budgets:
    if name == "quick":
        return Budgets(
            arc_count=32, aux_arc_count=24,
            descent=DescentConfig(ls_starts=20, null_dirs=6),
            approach_directions=2, approach_samples=6,
        )
    if name == "thorough":
        return Budgets(
            arc_count=96, aux_arc_count=40,
            descent=DescentConfig(ls_starts=60, null_dirs=12, max_solutions=10),
            approach_directions=4, approach_samples=8,
        )
    raise ValueError(f"unknown budget preset {name!r}")


def thread_count() -> int:
    raw = os.environ.get("STRATLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
