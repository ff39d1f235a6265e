"""Physical constants and unit conversions used throughout the package."""

from dataclasses import dataclass

ELEMENTARY_CHARGE = 1.602176634e-19  # J per eV


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants entering the exotic-field and mass-range relations.

    ``gamma_e`` is the magnitude of the electron gyromagnetic ratio. Its value
    cancels in every accumulated phase, so it only matters for field values.
    """

    hbar: float = 1.054572e-34  # J s
    c: float = 299792458.0  # m/s
    gamma_e: float = 1.760859e11  # rad s^-1 T^-1

    def __post_init__(self):
        for name in ("hbar", "c", "gamma_e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def hbar_c(self):
        """hbar * c in eV m."""
        return self.hbar * self.c / ELEMENTARY_CHARGE


DEFAULT_CONSTANTS = PhysicalConstants()
