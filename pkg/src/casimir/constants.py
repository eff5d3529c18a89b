"""Physical constants (exact SI 2019 values)."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.054571817e-34   # J s
    c_light: float = 299792458.0     # m/s
    k_B: float = 1.380649e-23        # J/K

    def __post_init__(self):
        for name in ("hbar", "c_light", "k_B"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


CODATA = Constants()
