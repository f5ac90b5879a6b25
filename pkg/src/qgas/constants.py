"""Physical constants used for SI conversions (exact 2019 SI values)."""

import json
from dataclasses import dataclass
from pathlib import Path

PLANCK_H = 6.62607015e-34  # J s
BOLTZMANN_K = 1.380649e-23  # J / K


@dataclass(frozen=True)
class Constants:
    h: float = PLANCK_H
    k: float = BOLTZMANN_K

    @classmethod
    def load(cls, path):
        """Read ``{"h": ..., "k": ...}`` overrides from a JSON file."""
        data = json.loads(Path(path).read_text())
        unknown = set(data) - {"h", "k"}
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")
        merged = {"h": PLANCK_H, "k": BOLTZMANN_K, **data}
        for name, value in merged.items():
            if not (isinstance(value, (int, float)) and value > 0):
                raise ValueError(f"constant {name!r} must be a positive number")
        return cls(h=float(merged["h"]), k=float(merged["k"]))


SI = Constants()
REDUCED = Constants(h=1.0, k=1.0)
