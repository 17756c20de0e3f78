"""Closed-form eigensystem against dense diagonalization."""

import numpy as np

from nvpolar.eigensystem import eigen_system, mixing_angles
from nvpolar.hamiltonian import static_hamiltonian
from nvpolar.params import SystemParams

A_ZZ = -686.5546e3
A_ANI = 215.3535e3


def _random_params(rng) -> SystemParams:
    return SystemParams(
        b_z=float(rng.uniform(50.0, 900.0)),
        a_zz=float(rng.uniform(-1e6, 1e6)),
        a_ani=float(rng.uniform(0.0, 5e5)),
        phi=float(rng.uniform(0.0, 2.0 * np.pi)),
    )


def test_energies_match_dense_diagonalization():
    """1000 random parameter draws, closed form vs eigh at 1e-10 relative."""
    rng = np.random.default_rng(42)
    for _ in range(1000):
        p = _random_params(rng)
        es = eigen_system(p)
        dense = np.linalg.eigvalsh(static_hamiltonian(p))
        assert np.allclose(np.sort(es.energies), dense, rtol=1e-10, atol=1e-4)


def test_states_diagonalize_the_hamiltonian():
    rng = np.random.default_rng(43)
    for _ in range(200):
        p = _random_params(rng)
        es = eigen_system(p)
        h = static_hamiltonian(p)
        recon = es.states.conj().T @ h @ es.states
        assert np.allclose(recon, np.diag(es.energies), atol=1e-4)


def test_states_subspace_overlap_with_dense_vectors():
    """Each closed-form state lies in the matching dense eigenspace."""
    rng = np.random.default_rng(44)
    for _ in range(300):
        p = _random_params(rng)
        es = eigen_system(p)
        vals, vecs = np.linalg.eigh(static_hamiltonian(p))
        for k in range(6):
            close = np.abs(vals - es.energies[k]) < 1.0 + 1e-9 * abs(es.energies[k])
            if not np.any(close):
                raise AssertionError("no dense eigenvalue near a closed-form energy")
            overlap = np.sum(np.abs(vecs[:, close].conj().T @ es.states[:, k]) ** 2)
            assert overlap >= 1.0 - 1e-9


def test_states_are_orthonormal():
    rng = np.random.default_rng(45)
    for _ in range(100):
        es = eigen_system(_random_params(rng))
        gram = es.states.conj().T @ es.states
        assert np.max(np.abs(gram - np.eye(6))) < 1e-12


def test_readout_levels_are_bare_product_states():
    es = eigen_system(SystemParams(a_zz=A_ZZ, a_ani=A_ANI))
    assert abs(es.states[0, 0] - 1.0) < 1e-15
    assert abs(es.states[1, 1] - 1.0) < 1e-15
    assert abs(es.energies[0] - 556.4e3 / 2.0) < 1e-6
    assert abs(es.energies[1] + 556.4e3 / 2.0) < 1e-6


def test_mixing_angle_is_right_angle_at_cancellation():
    """theta hits pi/2 when the +1 hyperfine shift cancels the Zeeman term."""
    p = SystemParams(b_z=520.0, a_zz=-1.07e3 * 520.0, a_ani=80e3)
    theta, _ = mixing_angles(p)
    assert abs(theta - np.pi / 2.0) < 1e-12


def test_fitted_point_angles_and_splittings():
    """Documented values of the fitted coupling at 520 G."""
    es = eigen_system(SystemParams(a_zz=A_ZZ, a_ani=A_ANI))
    assert abs(es.theta - 2.114428) < 1e-5
    assert abs(es.theta_prime - 0.171556) < 1e-5
    assert abs(es.splitting_plus - 251.629e3) < 50.0
    assert abs(es.splitting_minus - 1261.473e3) < 50.0


def test_axial_only_coupling_has_no_mixing():
    es = eigen_system(SystemParams(a_zz=-3e5, a_ani=0.0))
    assert es.theta in (0.0, np.pi)
    # Eigenstates remain bare product states: one unit entry per column.
    mags = np.abs(es.states)
    assert np.allclose(np.max(mags, axis=0), 1.0, atol=1e-15)
    assert np.allclose(np.sum(mags, axis=0), 1.0, atol=1e-15)
