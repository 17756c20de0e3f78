"""Closed-form eigensystem of the secular Hamiltonian.

The lab-frame Hamiltonian is block diagonal in m_s, so each manifold reduces
to a 2x2 problem in the nuclear space. Index convention (energies and states
are consistent eigenpairs):

    E1,2 = +-gamma_c B_z / 2                        psi_1,2 = |0,up>, |0,down>
    E3,4 = D - gamma_e B_z -+ R-/2                  psi_3,4 in m_s = -1
    E5,6 = D + gamma_e B_z -+ R+/2                  psi_5,6 in m_s = +1

with R+- = sqrt(A_ani^2 + (A_zz +- gamma_c B_z)^2). Odd (even) indices within
a manifold are the lower (upper) eigenstates. The nuclear mixing angles are

    theta  = atan2(A_ani,  A_zz + gamma_c B_z)      (m_s = +1)
    theta' = atan2(A_ani, -A_zz + gamma_c B_z)      (m_s = -1)

For a traceless 2x2 block (1/2) [[w, a e^{-i chi}], [a e^{i chi}, -w]] with
a >= 0 and mixing angle alpha = atan2(a, w), the eigenvectors are

    upper: ( cos(alpha/2),            sin(alpha/2) e^{i chi} )
    lower: (-sin(alpha/2) e^{-i chi}, cos(alpha/2)           )

For m_s = -1 the S_z factor flips the sign of the transverse term, which is
absorbed as chi = phi + pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import DIM
from .params import SystemParams


@dataclass(frozen=True)
class EigenSystem:
    """Closed-form energies, eigenstates, and mixing angles.

    Attributes:
        energies: The six energies E1..E6 (Hz).
        states: 6x6 complex array; column i is psi_{i+1} in the fixed basis.
        theta: Nuclear mixing angle of the m_s = +1 manifold (rad).
        theta_prime: Nuclear mixing angle of the m_s = -1 manifold (rad).
    """

    energies: np.ndarray
    states: np.ndarray
    theta: float
    theta_prime: float

    @property
    def splitting_plus(self) -> float:
        """Intra-manifold splitting E6 - E5 of m_s = +1 (Hz)."""
        return float(self.energies[5] - self.energies[4])

    @property
    def splitting_minus(self) -> float:
        """Intra-manifold splitting E4 - E3 of m_s = -1 (Hz)."""
        return float(self.energies[3] - self.energies[2])


def mixing_angles(p: SystemParams) -> tuple[float, float]:
    """Return (theta, theta_prime), each in [0, pi] since a_ani >= 0."""
    w_plus = p.a_zz + p.nuclear_zeeman
    w_minus = -p.a_zz + p.nuclear_zeeman
    return (
        float(np.arctan2(p.a_ani, w_plus)),
        float(np.arctan2(p.a_ani, w_minus)),
    )


def _manifold_states(alpha: float, chi: float) -> tuple[np.ndarray, np.ndarray]:
    """(lower, upper) nuclear eigenvectors for mixing angle alpha, phase chi."""
    c, s = np.cos(alpha / 2.0), np.sin(alpha / 2.0)
    upper = np.array([c, s * np.exp(1j * chi)])
    lower = np.array([-s * np.exp(-1j * chi), c])
    return lower, upper


def eigen_system(p: SystemParams) -> EigenSystem:
    """Closed-form eigensystem of the lab-frame secular Hamiltonian."""
    theta, theta_prime = mixing_angles(p)
    zeeman = p.nuclear_zeeman
    r_plus = np.hypot(p.a_ani, p.a_zz + zeeman)
    r_minus = np.hypot(p.a_ani, -p.a_zz + zeeman)
    off_plus = p.d + p.gamma_e * p.b_z
    off_minus = p.d - p.gamma_e * p.b_z

    energies = np.array(
        [
            +zeeman / 2.0,
            -zeeman / 2.0,
            off_minus - r_minus / 2.0,
            off_minus + r_minus / 2.0,
            off_plus - r_plus / 2.0,
            off_plus + r_plus / 2.0,
        ]
    )

    states = np.zeros((DIM, DIM), dtype=complex)
    states[0, 0] = 1.0  # |0,up>
    states[1, 1] = 1.0  # |0,down>
    lower_m, upper_m = _manifold_states(theta_prime, p.phi + np.pi)
    states[4:6, 2] = lower_m
    states[4:6, 3] = upper_m
    lower_p, upper_p = _manifold_states(theta, p.phi)
    states[2:4, 4] = lower_p
    states[2:4, 5] = upper_p

    return EigenSystem(
        energies=energies, states=states, theta=theta, theta_prime=theta_prime
    )
