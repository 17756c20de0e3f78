"""Nuclear polarization readout from a density matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedPolarizationError

#: Below this total m_s = 0 population the contrast is undefined.
POPULATION_FLOOR = 1e-12


@dataclass(frozen=True)
class PolarizationResult:
    """Population contrast of the two m_s = 0 readout states.

    Attributes:
        p: (pop_up - pop_down) / (pop_up + pop_down), in [-1, 1].
        pop_up: Population of |0,up>.
        pop_down: Population of |0,down>.
    """

    p: float
    pop_up: float
    pop_down: float


def polarization_of_state(rho: np.ndarray) -> PolarizationResult:
    """Polarization read from the m_s = 0 diagonal of a 6x6 density matrix.

    Raises:
        UndefinedPolarizationError: If both readout populations are below
            the floor (no m_s = 0 population to read out).
    """
    pop_up = float(np.real(rho[0, 0]))
    pop_down = float(np.real(rho[1, 1]))
    total = pop_up + pop_down
    if total <= POPULATION_FLOOR:
        raise UndefinedPolarizationError(
            f"total m_s = 0 population {total:.3e} is below {POPULATION_FLOOR:.0e}"
        )
    return PolarizationResult(
        p=(pop_up - pop_down) / total, pop_up=pop_up, pop_down=pop_down
    )
