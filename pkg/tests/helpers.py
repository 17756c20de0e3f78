"""Numerical oracles shared across the test modules."""

from __future__ import annotations

import numpy as np

from nvpolar.lindblad import SchedulePropagator
from nvpolar.schedule import PulseSegment, Schedule


def rk4_propagate(
    generator: np.ndarray, vec: np.ndarray, duration_s: float, dt_s: float = 1e-10
) -> np.ndarray:
    """Integrate dv/dt = G v with classic fixed-step RK4."""
    n = max(1, int(round(duration_s / dt_s)))
    h = duration_s / n
    for _ in range(n):
        k1 = generator @ vec
        k2 = generator @ (vec + 0.5 * h * k1)
        k3 = generator @ (vec + 0.5 * h * k2)
        k4 = generator @ (vec + h * k3)
        vec = vec + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return vec


def rk4_schedule(
    prop: SchedulePropagator,
    rho: np.ndarray,
    schedule: Schedule,
    dt_s: float = 1e-10,
) -> np.ndarray:
    """Propagate a schedule with the RK4 oracle instead of expm."""
    frame = prop._resolve_frame(schedule)
    vec = np.ascontiguousarray(rho, dtype=complex).reshape(-1)
    for seg in schedule:
        if seg.duration_ns == 0:
            continue
        gen = prop.segment_generator(seg, frame)
        vec = rk4_propagate(gen, vec, seg.duration_ns * 1e-9, dt_s)
    return vec.reshape(rho.shape)


def random_density_matrix(rng: np.random.Generator, dim: int = 6) -> np.ndarray:
    """A random full-rank density matrix (Hermitian, unit trace, PSD)."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.real(np.trace(rho))


def random_schedule(rng: np.random.Generator) -> Schedule:
    """A short block schedule mixing laser, rest, and microwave segments."""
    segments = []
    for _ in range(int(rng.integers(2, 6))):
        kind = int(rng.integers(0, 3))
        duration = int(rng.integers(10, 200))
        if kind == 0:
            segments.append(PulseSegment(duration, laser_on=True))
        elif kind == 1:
            segments.append(PulseSegment(duration))
        else:
            segments.append(
                PulseSegment(
                    duration,
                    mw_on=True,
                    mw_delta=float(rng.normal(0.0, 4e5)),
                    mw_rabi=float(rng.uniform(5e4, 4e5)),
                )
            )
    return Schedule(tuple(segments))
