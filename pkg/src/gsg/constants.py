"""Physical constants (CODATA 2018, SI units)."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.054571817e-34  # J s
    mu_B: float = 9.2740100783e-24  # J/T
    mu_0: float = 1.25663706212e-6  # T m / A
    G: float = 6.67430e-11  # m^3 / (kg s^2)
    c: float = 299792458.0  # m/s


CODATA2018 = Constants()
