"""Parameter sweeps of the polarization sequence.

Every sweep point propagates the full density matrix through the standard
schedule plus the terminal relaxation train and records the readout
polarization. Points are pure functions of (preset, grid), so sweeps can fan
out over a process pool; results are always assembled by grid index and the
CSV bytes do not depend on the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .eigensystem import eigen_system
from .errors import ConfigError
from .lindblad import SchedulePropagator, initial_mixed_state
from .polarization import polarization_of_state
from .presets import Preset

#: Default grid steps; the coefficient tables give none, so these are
#: artifact choices sized to resolve the narrowest simulated features.
DELTA_STEP = 5e3
FIELD_STEP = 5.0
ANI_STEP = 12.5e3

#: Half-width of the per-field detuning window used when a sweep re-optimizes
#: the drive detuning at every grid point. Centered on the eigen-predicted
#: resonance, +-600 kHz covers both driven lines at every field of interest.
INNER_HALFWIDTH = 600e3

_METADATA_SCHEMA = "nvpolar-sweep/1"


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter: a name, a unit label, and its grid values."""

    name: str
    unit: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ConfigError(f"axis {self.name!r} has an empty grid")

    @property
    def header(self) -> str:
        return f"{self.name}_{self.unit}"


@dataclass(frozen=True)
class SweepResult:
    """Polarization over one or two swept parameters.

    The grid shape always matches the axis lengths: 1-D sweeps store p with
    shape (n,), 2-D sweeps with shape (n_axis0, n_axis1).
    """

    axes: tuple[SweepAxis, ...]
    p: np.ndarray
    metadata: dict

    def __post_init__(self) -> None:
        expected = tuple(len(ax.values) for ax in self.axes)
        if self.p.shape != expected:
            raise ConfigError(f"grid shape {self.p.shape} != axis lengths {expected}")

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def write_csv(self, path: str | Path) -> None:
        """1-D sweeps as (x, P); 2-D sweeps as long-form (x, y, P)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([ax.header for ax in self.axes] + ["P"])
            if self.ndim == 1:
                for x, value in zip(self.axes[0].values, self.p):
                    writer.writerow([_cell(x, self.axes[0]), repr(float(value))])
            else:
                for i, x in enumerate(self.axes[0].values):
                    for j, y in enumerate(self.axes[1].values):
                        writer.writerow(
                            [
                                _cell(x, self.axes[0]),
                                _cell(y, self.axes[1]),
                                repr(float(self.p[i, j])),
                            ]
                        )

    def write_metadata(self, path: str | Path) -> None:
        """JSON sidecar with the resolved configuration and its content hash."""
        doc = dict(self.metadata)
        doc["schema"] = _METADATA_SCHEMA
        doc["axes"] = [
            {"name": ax.name, "unit": ax.unit, "count": len(ax.values), "values": list(ax.values)}
            for ax in self.axes
        ]
        doc["config_hash"] = content_hash(doc)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _cell(value: float, axis: SweepAxis) -> str:
    if axis.unit == "count":
        return repr(int(value))
    return repr(float(value))


def content_hash(doc: dict) -> str:
    """Hash of the canonical JSON form, excluding any embedded hash field."""
    stripped = {k: v for k, v in doc.items() if k != "config_hash"}
    blob = json.dumps(stripped, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def grid(lo: float, hi: float, step: float) -> tuple[float, ...]:
    """Closed uniform grid from lo to hi (hi included when step divides)."""
    if step <= 0:
        raise ConfigError("grid step must be positive")
    if hi < lo:
        raise ConfigError("grid upper bound below lower bound")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(lo + k * step for k in range(count))


# -- point evaluation ---------------------------------------------------------


def sequence_polarization(
    preset: Preset,
    delta: float,
    *,
    n_cycles: int | None = None,
) -> float:
    """Readout polarization after the full sequence at one drive detuning."""
    schedule = preset.schedule(delta, n_cycles=n_cycles) + preset.readout_tail()
    prop = SchedulePropagator(preset.system, preset.rates, frame_delta=delta)
    rho = prop.propagate(initial_mixed_state(), schedule)
    return polarization_of_state(rho).p


def _eval_task(task: tuple[Preset, float, int | None]) -> float:
    preset, delta, n_cycles = task
    return sequence_polarization(preset, delta, n_cycles=n_cycles)


def _run_tasks(tasks: list[tuple[Preset, float, int | None]], workers: int) -> list[float]:
    if workers <= 1 or len(tasks) <= 1:
        return [_eval_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_eval_task, tasks, chunksize=chunk))


def predicted_resonance(preset: Preset) -> float:
    """Detuning of the outer nuclear-state-flipping line, from the eigensystem.

    The two drive resonances that deplete the lower-frequency nuclear state
    sit at (gamma_c B_z -+ R)/2 where R is the m_s = +1 eigen-splitting; the
    returned value is their upper edge, so a symmetric window around it of
    +-R or more covers both lines.
    """
    es = eigen_system(preset.system)
    return (preset.system.nuclear_zeeman + es.splitting_plus) / 2.0


def _base_metadata(preset: Preset, kind: str, n_cycles: int | None = None) -> dict:
    doc = {"sweep": kind, "preset": preset.to_dict()}
    if n_cycles is not None:
        doc["preset"]["n_cycles"] = n_cycles
    return doc


# -- sweeps -------------------------------------------------------------------


def sweep_detuning(
    preset: Preset,
    deltas: Sequence[float] | None = None,
    *,
    n_cycles: int | None = None,
    workers: int = 1,
) -> SweepResult:
    """Polarization vs drive detuning (the two-lobed response curve)."""
    if deltas is None:
        deltas = grid(-1e6, 1e6, DELTA_STEP)
    values = tuple(float(d) for d in deltas)
    tasks = [(preset, d, n_cycles) for d in values]
    p = np.array(_run_tasks(tasks, workers))
    axis = SweepAxis("delta", "hz", values)
    return SweepResult((axis,), p, _base_metadata(preset, "detuning", n_cycles))


def sweep_repetitions(
    preset: Preset,
    n_max: int = 20,
    *,
    delta: float | None = None,
) -> SweepResult:
    """Polarization after each complete cycle 0..n_max at fixed detuning.

    With delta None, the drive is placed at the |P|-maximizing detuning of a
    standard detuning sweep. The cycles are propagated incrementally, so the
    cost is one sequence regardless of n_max.
    """
    if n_max < 0:
        raise ConfigError("n_max must be >= 0")
    if delta is None:
        base = sweep_detuning(preset)
        delta = base.axes[0].values[int(np.argmax(np.abs(base.p)))]
    delta = float(delta)
    cycle = preset.schedule(delta, n_cycles=1)
    tail = preset.readout_tail()
    prop = SchedulePropagator(preset.system, preset.rates, frame_delta=delta)
    values = []
    rho = initial_mixed_state()
    for n in range(n_max + 1):
        if n > 0:
            rho = prop.propagate(rho, cycle)
        relaxed = prop.propagate(rho, tail)
        values.append(polarization_of_state(relaxed).p)
    axis = SweepAxis("n_cycles", "count", tuple(float(n) for n in range(n_max + 1)))
    meta = _base_metadata(preset, "repetitions")
    meta["delta_hz"] = delta
    return SweepResult((axis,), np.array(values), meta)


def _max_over_inner(
    presets_and_centers: list[tuple[Preset, float]],
    inner_halfwidth: float,
    inner_step: float,
    workers: int,
) -> np.ndarray:
    """Signed P of largest magnitude over a detuning window per outer point."""
    inner_counts = []
    tasks: list[tuple[Preset, float, int | None]] = []
    for preset, center in presets_and_centers:
        inner = grid(center - inner_halfwidth, center + inner_halfwidth, inner_step)
        inner_counts.append(len(inner))
        tasks.extend((preset, d, None) for d in inner)
    flat = _run_tasks(tasks, workers)
    out = np.empty(len(presets_and_centers))
    pos = 0
    for i, count in enumerate(inner_counts):
        window = np.array(flat[pos : pos + count])
        out[i] = window[int(np.argmax(np.abs(window)))]
        pos += count
    return out


def sweep_field(
    preset: Preset,
    b_values: Sequence[float] | None = None,
    *,
    inner_halfwidth: float = INNER_HALFWIDTH,
    inner_step: float = DELTA_STEP,
    workers: int = 1,
) -> SweepResult:
    """Best polarization vs axial field, re-optimizing the detuning per field.

    The resonances move with B_z, so each field gets its own detuning window
    centered on the eigen-predicted line position; the recorded value is the
    signed P of largest magnitude in that window.
    """
    if b_values is None:
        b_values = grid(450.0, 850.0, FIELD_STEP)
    values = tuple(float(b) for b in b_values)
    pts = []
    for b in values:
        q = preset.with_system(b_z=b)
        pts.append((q, predicted_resonance(q)))
    p = _max_over_inner(pts, inner_halfwidth, inner_step, workers)
    axis = SweepAxis("b_z", "gauss", values)
    meta = _base_metadata(preset, "field")
    meta["inner_halfwidth_hz"] = inner_halfwidth
    meta["inner_step_hz"] = inner_step
    return SweepResult((axis,), p, meta)


def sweep_ani_detuning(
    preset: Preset,
    ani_values: Sequence[float] | None = None,
    deltas: Sequence[float] | None = None,
    *,
    workers: int = 1,
) -> SweepResult:
    """Polarization over a (transverse coupling, detuning) grid."""
    if ani_values is None:
        ani_values = grid(0.0, 400e3, ANI_STEP)
    if deltas is None:
        deltas = grid(-600e3, 600e3, DELTA_STEP)
    ani = tuple(float(a) for a in ani_values)
    dts = tuple(float(d) for d in deltas)
    tasks = []
    for a in ani:
        q = preset.with_system(a_ani=a)
        tasks.extend((q, d, None) for d in dts)
    flat = _run_tasks(tasks, workers)
    p = np.array(flat).reshape(len(ani), len(dts))
    axes = (SweepAxis("a_ani", "hz", ani), SweepAxis("delta", "hz", dts))
    return SweepResult(axes, p, _base_metadata(preset, "ani-detuning"))


def sweep_field_ani(
    preset: Preset,
    b_values: Sequence[float] | None = None,
    ani_values: Sequence[float] | None = None,
    *,
    inner_halfwidth: float = INNER_HALFWIDTH,
    inner_step: float = DELTA_STEP,
    workers: int = 1,
) -> SweepResult:
    """Max-over-detuning polarization per (field, transverse coupling) cell."""
    if b_values is None:
        b_values = grid(450.0, 850.0, 10.0)
    if ani_values is None:
        ani_values = grid(0.0, 400e3, 50e3)
    bs = tuple(float(b) for b in b_values)
    ani = tuple(float(a) for a in ani_values)
    pts = []
    for b in bs:
        for a in ani:
            q = preset.with_system(b_z=b, a_ani=a)
            pts.append((q, predicted_resonance(q)))
    p = _max_over_inner(pts, inner_halfwidth, inner_step, workers).reshape(len(bs), len(ani))
    axes = (SweepAxis("b_z", "gauss", bs), SweepAxis("a_ani", "hz", ani))
    meta = _base_metadata(preset, "field-ani")
    meta["inner_halfwidth_hz"] = inner_halfwidth
    meta["inner_step_hz"] = inner_step
    return SweepResult(axes, p, meta)


def max_trace(sweep: SweepResult, axis: int = 0) -> SweepResult:
    """Reduce a 2-D sweep to the per-row extremum of |P|, sign retained.

    Args:
        sweep: 2-D sweep result.
        axis: Index of the axis to keep (the other one is reduced).
    """
    if sweep.ndim != 2:
        raise ConfigError("max_trace needs a 2-D sweep")
    if axis not in (0, 1):
        raise ConfigError("axis must be 0 or 1")
    reduce_axis = 1 - axis
    idx = np.argmax(np.abs(sweep.p), axis=reduce_axis)
    if axis == 0:
        values = sweep.p[np.arange(sweep.p.shape[0]), idx]
    else:
        values = sweep.p[idx, np.arange(sweep.p.shape[1])]
    meta = dict(sweep.metadata)
    meta["reduced_axis"] = sweep.axes[reduce_axis].name
    return SweepResult((sweep.axes[axis],), np.asarray(values), meta)
