"""Lindblad master equation for piecewise-constant schedules.

The density matrix is propagated exactly on each segment by exponentiating
the constant generator

    d rho / dt = -i 2 pi [H, rho]
                 + sum_L ( L rho L+ - (1/2) {L+ L, rho} )

with H in cyclic Hz and channel amplitudes sqrt(Gamma), Gamma a linear rate
in 1/s. Density matrices are vectorized row-major, so

    vec(A rho B) = (A kron B^T) vec(rho).

Within one schedule every distinct segment signature is exponentiated once
and the resulting propagator reused, so a polarization sequence costs a
handful of matrix exponentials regardless of cycle count.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.linalg import expm

from .eigensystem import eigen_system
from .errors import ConfigError, NumericalError
from .hamiltonian import rotating_hamiltonian
from .operators import DIM, basis_index
from .params import RelaxationRates, SystemParams
from .polarization import polarization_of_state
from .schedule import PulseSegment, Schedule

OpticalVariant = Literal["driven", "printed", "both"]
Subspace = Literal["full", "driven"]

#: Indices of the {m_s = 0, +1} sub-block used by the reduced mode.
DRIVEN_INDICES = (0, 1, 2, 3)

#: A segment's mw_rabi is the Rabi (flop) frequency of the driven transition.
#: The drive term is (mw_rabi / sqrt 2) * S_x, whose 0 <-> +1 matrix element
#: is mw_rabi / 2, so a resonant pulse with mw_rabi * duration = 1/2 is a pi
#: rotation; the bundled parameter sets satisfy that product exactly.
DRIVE_SCALE = 2.0**-0.5

_HERM_DRIFT_FIX = 1e-12
_HERM_DRIFT_FAIL = 1e-9


def initial_mixed_state() -> np.ndarray:
    """Fully mixed nuclear state in m_s = 0: diag(1/2, 1/2, 0, 0, 0, 0)."""
    rho = np.zeros((DIM, DIM), dtype=complex)
    rho[0, 0] = rho[1, 1] = 0.5
    return rho


def validate_density_matrix(
    rho: np.ndarray,
    *,
    herm_tol: float = 1e-9,
    trace_tol: float = 1e-9,
    positivity_tol: float = 1e-9,
) -> None:
    """Raise NumericalError if rho is not a valid 6x6 density matrix."""
    if rho.shape != (DIM, DIM):
        raise NumericalError(f"density matrix must be {DIM}x{DIM}, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise NumericalError(f"Hermiticity violated by {herm:.3e}")
    trace = abs(np.trace(rho) - 1.0)
    if trace > trace_tol:
        raise NumericalError(f"trace deviates from 1 by {trace:.3e}")
    lowest = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0])
    if lowest < -positivity_tol:
        raise NumericalError(f"negative eigenvalue {lowest:.3e}")


def _optical_pairs(variant: OpticalVariant) -> list[tuple[int, int]]:
    """(ground, excited) basis-index pairs for the optical channels."""
    driven = [
        (basis_index(0, True), basis_index(+1, True)),
        (basis_index(0, False), basis_index(+1, False)),
    ]
    printed = [
        (basis_index(0, True), basis_index(-1, True)),
        (basis_index(0, False), basis_index(-1, False)),
    ]
    if variant == "driven":
        return driven
    if variant == "printed":
        return printed
    if variant == "both":
        return driven + printed
    raise ConfigError(f"unknown optical variant {variant!r}")


def build_channels(
    rates: RelaxationRates,
    p: SystemParams,
    *,
    laser_on: bool,
    optical: OpticalVariant = "driven",
) -> list[np.ndarray]:
    """Collapse operators active for one segment (zero-rate channels omitted).

    Laser-gated channels: nuclear-conserving optical decay from the excited
    manifold at gamma_gl (1 + n_th) with the reverse channel at gamma_gl n_th,
    and symmetric nuclear cross-relaxation between the two m_s = 0 states
    (both carry the laser in their rate definitions). The dephasing projectors
    on the four driven-subspace eigenstates are generic and stay active in
    every segment.
    """
    ops: list[np.ndarray] = []
    needs_states = any(g > 0 for g in rates.gamma_d) or (
        laser_on and rates.gamma_n_gl > 0
    )
    states = eigen_system(p).states if needs_states else None

    if laser_on:
        down = rates.gamma_gl * (1.0 + rates.n_th)
        up = rates.gamma_gl * rates.n_th
        for g_idx, e_idx in _optical_pairs(optical):
            if down > 0:
                op = np.zeros((DIM, DIM), dtype=complex)
                op[g_idx, e_idx] = np.sqrt(down)
                ops.append(op)
            if up > 0:
                op = np.zeros((DIM, DIM), dtype=complex)
                op[e_idx, g_idx] = np.sqrt(up)
                ops.append(op)
        if rates.gamma_n_gl > 0:
            amp = np.sqrt(rates.gamma_n_gl)
            psi1, psi2 = states[:, 0], states[:, 1]
            ops.append(amp * np.outer(psi1, psi2.conj()))
            ops.append(amp * np.outer(psi2, psi1.conj()))

    # Dephasing targets the driven subspace: psi_1, psi_2 and the lower and
    # upper m_s = +1 eigenstates (columns 4 and 5).
    for rate, col in zip(rates.gamma_d, (0, 1, 4, 5)):
        if rate > 0:
            psi = states[:, col]
            ops.append(np.sqrt(rate) * np.outer(psi, psi.conj()))
    return ops


def liouvillian(h: np.ndarray, channels: Iterable[np.ndarray]) -> np.ndarray:
    """Generator matrix acting on row-major vectorized density matrices.

    Args:
        h: Hermitian Hamiltonian in Hz (any dimension n).
        channels: Collapse operators with sqrt(rate) amplitudes.

    Raises:
        ValueError: If h is not Hermitian to 1e-12 relative.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * scale:
        raise ValueError("Hamiltonian must be Hermitian")
    eye = np.eye(n)
    gen = -1j * 2.0 * np.pi * (np.kron(h, eye) - np.kron(eye, h.T))
    for op in channels:
        op = np.asarray(op, dtype=complex)
        opdag_op = op.conj().T @ op
        gen = gen + np.kron(op, op.conj())
        gen = gen - 0.5 * (np.kron(opdag_op, eye) + np.kron(eye, opdag_op.T))
    return gen


class SchedulePropagator:
    """Exact segment-wise propagation for one parameter set.

    Holds a cache of segment propagators keyed by the segment controls and
    duration, so repeated chop and microwave segments are exponentiated once.
    Segments without microwave still live in the rotating frame of the
    schedule's drive (frame_delta), which matters for pulse-to-pulse
    coherence; frame_delta is inferred from the first microwave segment when
    not given.
    """

    def __init__(
        self,
        p: SystemParams,
        rates: RelaxationRates,
        *,
        frame_delta: float | None = None,
        optical: OpticalVariant = "driven",
        subspace: Subspace = "full",
        full_drive: bool = False,
    ) -> None:
        if subspace not in ("full", "driven"):
            raise ConfigError(f"unknown subspace {subspace!r}")
        if subspace == "driven" and optical != "driven":
            raise ConfigError(
                "the reduced subspace cannot host optical channels on m_s = -1"
            )
        self.params = p
        self.rates = rates
        self.frame_delta = frame_delta
        self.optical: OpticalVariant = optical
        self.subspace: Subspace = subspace
        self.full_drive = full_drive
        self._propagators: dict[tuple, np.ndarray] = {}
        self._generators: dict[tuple, np.ndarray] = {}

    # -- generator / propagator construction --------------------------------

    def _segment_key(self, seg: PulseSegment, frame_delta: float) -> tuple:
        return (
            seg.laser_on,
            seg.mw_on,
            seg.mw_delta if seg.mw_on else frame_delta,
            seg.mw_rabi,
        )

    def _resolve_frame(self, schedule: Sequence[PulseSegment] | Schedule) -> float:
        if self.frame_delta is not None:
            return self.frame_delta
        for seg in schedule:
            if seg.mw_on:
                return seg.mw_delta
        return 0.0

    def segment_generator(self, seg: PulseSegment, frame_delta: float = 0.0) -> np.ndarray:
        """Constant Liouvillian for one segment (cached)."""
        key = self._segment_key(seg, frame_delta)
        gen = self._generators.get(key)
        if gen is None:
            delta = seg.mw_delta if seg.mw_on else frame_delta
            omega = seg.mw_rabi * DRIVE_SCALE if seg.mw_on else 0.0
            h = rotating_hamiltonian(
                self.params, delta, omega, full_drive=self.full_drive
            )
            channels = build_channels(
                self.rates, self.params, laser_on=seg.laser_on, optical=self.optical
            )
            if self.subspace == "driven":
                idx = np.array(DRIVEN_INDICES)
                h = h[np.ix_(idx, idx)]
                channels = [op[np.ix_(idx, idx)] for op in channels]
            gen = liouvillian(h, channels)
            self._generators[key] = gen
        return gen

    def segment_propagator(
        self, seg: PulseSegment, frame_delta: float = 0.0, duration_ns: int | None = None
    ) -> np.ndarray:
        """expm(generator * duration) for one segment (cached)."""
        ns = seg.duration_ns if duration_ns is None else duration_ns
        key = self._segment_key(seg, frame_delta) + (ns,)
        prop = self._propagators.get(key)
        if prop is None:
            gen = self.segment_generator(seg, frame_delta)
            prop = expm(gen * (ns * 1e-9))
            self._propagators[key] = prop
        return prop

    # -- state handling -----------------------------------------------------

    def _to_vec(self, rho: np.ndarray) -> np.ndarray:
        if self.subspace == "driven":
            idx = np.array(DRIVEN_INDICES)
            minus_pop = float(np.sum(np.abs(np.diag(rho)[4:])))
            if minus_pop > 1e-9:
                raise NumericalError(
                    "reduced subspace requested but m_s = -1 holds population"
                )
            rho = rho[np.ix_(idx, idx)]
        return np.ascontiguousarray(rho, dtype=complex).reshape(-1)

    def _from_vec(self, vec: np.ndarray) -> np.ndarray:
        n = len(DRIVEN_INDICES) if self.subspace == "driven" else DIM
        rho = vec.reshape(n, n)
        if self.subspace == "driven":
            full = np.zeros((DIM, DIM), dtype=complex)
            idx = np.array(DRIVEN_INDICES)
            full[np.ix_(idx, idx)] = rho
            rho = full
        return rho

    @staticmethod
    def _guard(rho: np.ndarray) -> np.ndarray:
        """Restore Hermiticity and trace if roundoff drift is detectable."""
        drift = max(
            float(np.max(np.abs(rho - rho.conj().T))),
            abs(float(np.real(np.trace(rho))) - 1.0),
            abs(float(np.imag(np.trace(rho)))),
        )
        if drift > _HERM_DRIFT_FAIL:
            raise NumericalError(f"propagation drift {drift:.3e} exceeds 1e-9")
        if drift > _HERM_DRIFT_FIX:
            rho = (rho + rho.conj().T) / 2.0
            rho = rho / np.real(np.trace(rho))
        return rho

    # -- propagation --------------------------------------------------------

    def propagate(self, rho: np.ndarray, schedule: Schedule) -> np.ndarray:
        """Final state after the whole schedule."""
        frame = self._resolve_frame(schedule)
        vec = self._to_vec(rho)
        for seg in schedule:
            if seg.duration_ns == 0:
                continue
            vec = self.segment_propagator(seg, frame) @ vec
        return self._guard(self._from_vec(vec))

    def trajectory(
        self,
        rho: np.ndarray,
        schedule: Schedule,
        sample_ns: int | None = None,
    ) -> list[tuple[int, np.ndarray]]:
        """States along the schedule.

        With sample_ns None, returns the state at t = 0 and after every
        segment. Otherwise returns the state at every multiple of sample_ns
        (plus t = 0 and the final time), splitting segments as needed.
        """
        frame = self._resolve_frame(schedule)
        vec = self._to_vec(rho)
        out: list[tuple[int, np.ndarray]] = [(0, self._from_vec(vec).copy())]
        t = 0
        if sample_ns is None:
            for seg in schedule:
                if seg.duration_ns > 0:
                    vec = self.segment_propagator(seg, frame) @ vec
                t += seg.duration_ns
                out.append((t, self._guard(self._from_vec(vec))))
            return out
        if sample_ns <= 0:
            raise ConfigError("sample_ns must be positive")
        for seg in schedule:
            remaining = seg.duration_ns
            while remaining > 0:
                until_sample = sample_ns - (t % sample_ns)
                step = min(until_sample, remaining)
                vec = self.segment_propagator(seg, frame, duration_ns=step) @ vec
                t += step
                remaining -= step
                if t % sample_ns == 0:
                    out.append((t, self._guard(self._from_vec(vec))))
        if out[-1][0] != t:
            out.append((t, self._guard(self._from_vec(vec))))
        return out


def propagate_segment(
    rho: np.ndarray,
    seg: PulseSegment,
    p: SystemParams,
    rates: RelaxationRates,
    **kwargs,
) -> np.ndarray:
    """Evolve rho through a single segment (convenience wrapper)."""
    prop = SchedulePropagator(p, rates, **kwargs)
    return prop.propagate(rho, Schedule((seg,)))


def evolve_schedule(
    rho0: np.ndarray,
    schedule: Schedule,
    p: SystemParams,
    rates: RelaxationRates,
    *,
    sample_ns: int | None = None,
    **kwargs,
) -> list[tuple[int, np.ndarray]]:
    """Propagate rho0 through a schedule, returning sampled states.

    Returns [(0, rho0)] for an empty schedule. See
    SchedulePropagator.trajectory for the sampling rules.
    """
    prop = SchedulePropagator(p, rates, **kwargs)
    return prop.trajectory(rho0, schedule, sample_ns=sample_ns)


def write_trajectory_csv(
    trajectory: Sequence[tuple[int, np.ndarray]], path: str | Path
) -> None:
    """CSV export: time_ns, interleaved Re/Im of rho (row-major), P.

    The polarization column is left empty at times when both readout
    populations vanish.
    """
    header = ["time_ns"]
    for i in range(DIM):
        for j in range(DIM):
            header += [f"rho_re_{i}{j}", f"rho_im_{i}{j}"]
    header.append("P")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, rho in trajectory:
            row: list[str] = [repr(int(t))]
            for i in range(DIM):
                for j in range(DIM):
                    row.append(repr(float(np.real(rho[i, j]))))
                    row.append(repr(float(np.imag(rho[i, j]))))
            try:
                row.append(repr(polarization_of_state(rho).p))
            except Exception:
                row.append("")
            writer.writerow(row)
