"""Truncated diagonal state models.

The analyses in this package act on finite truncations of a diagonal
generator together with a scalar control column: eigenvalues in the open
left half-plane and one control coefficient per mode.  Basis geometry
enters only through an optional Riesz condition number that scales
reported constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["DiagonalSystem"]


@dataclass(frozen=True)
class DiagonalSystem:
    """Diagonal generator with eigenvalues Re < 0 and control column b."""

    eigenvalues: tuple[complex, ...]
    coefficients: tuple[complex, ...]
    condition_number: float = 1.0

    def __post_init__(self) -> None:
        eigs = tuple(complex(z) for z in self.eigenvalues)
        coef = tuple(complex(z) for z in self.coefficients)
        object.__setattr__(self, "eigenvalues", eigs)
        object.__setattr__(self, "coefficients", coef)
        if len(eigs) != len(coef):
            raise ValueError("eigenvalues and coefficients must have equal length")
        for lam in eigs:
            if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
                raise ValueError("eigenvalues must be finite")
            if lam.real >= 0.0:
                raise ValueError("eigenvalues must satisfy Re < 0")
        for b in coef:
            if not (math.isfinite(b.real) and math.isfinite(b.imag)):
                raise ValueError("control coefficients must be finite")
        if len(set(eigs)) != len(eigs):
            raise ValueError("eigenvalues must be pairwise distinct")
        if not (math.isfinite(self.condition_number) and self.condition_number >= 1.0):
            raise ValueError("condition number must be >= 1")

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalues)

    @property
    def lam(self) -> np.ndarray:
        return np.array(self.eigenvalues, dtype=complex)

    @property
    def b(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=complex)

    @property
    def stability_margin(self) -> float:
        """Distance of the spectrum to the imaginary axis."""
        if not self.eigenvalues:
            return math.inf
        return float(-max(z.real for z in self.eigenvalues))

    @property
    def graph_norm_surrogate(self) -> float:
        """The recorded value of sum |b_n / lambda_n|^2."""
        return float(
            math.fsum(abs(b / z) ** 2 for z, b in zip(self.eigenvalues, self.coefficients))
        )

    def truncated(self, n: int) -> "DiagonalSystem":
        """Keep the first n modes in the stored order."""
        if n < 0:
            raise ValueError("truncation level must be nonnegative")
        return DiagonalSystem(
            self.eigenvalues[:n], self.coefficients[:n], self.condition_number
        )
