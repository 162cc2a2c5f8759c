"""Diagonal decoding groups: position (r, c) belongs to group c + r*delta.

delta trades sequential steps against context quality. delta=0 reveals one
column per step (32 groups on a 32-wide patch); delta=1 gives 63 diagonal
groups; delta=2 gives 94 steeper diagonals. Within a group every position
is predicted from the same context, so the whole group codes in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .tiling import PATCH_SIDE


@dataclass(frozen=True)
class GroupSchedule:
    delta: int
    patch_side: int
    group_of: np.ndarray          # (side, side) int array of group indices
    group_count: int
    groups: tuple                  # groups[g] = tuple of (row, col), sorted
    flat_groups: tuple = field(repr=False)  # groups[g] as flat row*side+col arrays

    def positions(self, g: int) -> tuple:
        return self.groups[g]


def build_schedule(delta: int, patch_side: int = PATCH_SIDE) -> GroupSchedule:
    if delta < 0:
        raise ContractViolation("delta must be non-negative")
    if patch_side < 1:
        raise ContractViolation("patch side must be at least 1")

    rows = np.arange(patch_side).reshape(-1, 1)
    cols = np.arange(patch_side).reshape(1, -1)
    group_of = cols + rows * delta
    group_count = (delta + 1) * (patch_side - 1) + 1

    groups: list[list[tuple[int, int]]] = [[] for _ in range(group_count)]
    for r in range(patch_side):
        for c in range(patch_side):
            groups[group_of[r, c]].append((r, c))
    flat = tuple(
        np.array([r * patch_side + c for r, c in g], dtype=np.int64) for g in groups
    )
    return GroupSchedule(
        delta=delta,
        patch_side=patch_side,
        group_of=group_of,
        group_count=group_count,
        groups=tuple(tuple(g) for g in groups),
        flat_groups=flat,
    )


def mask_pattern(schedule: GroupSchedule, step: int) -> np.ndarray:
    """Boolean (side, side) array: True where the position is still masked.

    Step 0 masks everything; step == group_count masks nothing.
    """
    if not 0 <= step <= schedule.group_count:
        raise ContractViolation(
            f"step {step} outside [0, {schedule.group_count}]"
        )
    return schedule.group_of >= step
