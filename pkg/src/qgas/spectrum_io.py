"""Plain-text spectrum files: one ``energy [degeneracy]`` row per line, '#' comments."""

from __future__ import annotations

import math
from pathlib import Path

from .thermo_discrete import Spectrum


class SpectrumFileError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def parse_spectrum(text: str) -> Spectrum:
    """Parse spectrum text.  A missing degeneracy column means degeneracy 1."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) > 2:
            raise SpectrumFileError(f"expected 'energy [degeneracy]', got {len(fields)} fields", lineno)
        try:
            energy = float(fields[0])
        except ValueError:
            raise SpectrumFileError(f"bad energy {fields[0]!r}", lineno) from None
        if not math.isfinite(energy):
            raise SpectrumFileError(f"energy {fields[0]!r} is not finite", lineno)
        degeneracy = 1
        if len(fields) == 2:
            try:
                degeneracy = int(fields[1])
            except ValueError:
                raise SpectrumFileError(f"bad degeneracy {fields[1]!r}", lineno) from None
            if degeneracy < 1:
                raise SpectrumFileError(f"degeneracy {degeneracy} must be positive", lineno)
        pairs.append((energy, degeneracy))
    if not pairs:
        raise SpectrumFileError("spectrum file has no levels")
    return Spectrum.from_energies([e for e, _ in pairs], [g for _, g in pairs])


def read_spectrum(path) -> Spectrum:
    return parse_spectrum(Path(path).read_text())


def format_spectrum(spec: Spectrum) -> str:
    return "".join(f"{e!r} {g}\n" for e, g in spec.levels)
