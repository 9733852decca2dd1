"""Runtime limits shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_MEM_BUDGET = 1 << 30


@dataclass(frozen=True)
class Budget:
    # bytes of materialized symbols (one byte per symbol is assumed)
    mem_bytes: int = DEFAULT_MEM_BUDGET
    # hole-rank recursion cap for pointwise evaluation
    max_recursion: int = 10_000
    # phase certification window, in multiples of the period
    phase_factor: int = 3
    # cap on radius of composed window maps
    max_radius: int = 5_000

    @classmethod
    def from_env(cls) -> "Budget":
        raw = os.environ.get("TOEPLITZ_MEM_BUDGET")
        if raw is None:
            return cls()
        return cls(mem_bytes=int(raw))

    def check_length(self, length: int, what: str = "window") -> None:
        if length > self.mem_bytes:
            raise MemoryError(
                f"{what} of length {length} exceeds memory budget {self.mem_bytes}"
            )


def current_budget() -> Budget:
    return Budget.from_env()
