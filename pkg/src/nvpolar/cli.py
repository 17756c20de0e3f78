"""Command-line interface.

Every data-producing subcommand resolves a parameter set (a named preset or
a JSON config), runs the simulation, and writes a small artifact directory:
a CSV data file, a metadata sidecar with a content hash, and a standalone
gnuplot script. Outputs are deterministic; metadata carries no timestamps,
so reruns of the same configuration are byte-identical.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure,
4 fit did not converge. Errors print a single machine-parseable line to
stderr of the form ``error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from . import ramsey as rm
from .errors import (
    ConfigError,
    FitConvergenceError,
    FitModelError,
    NumericalError,
    UndefinedPolarizationError,
)
from .fitting import CURVE_FIT_INIT, fit_polarization_curve
from .lindblad import SchedulePropagator, initial_mixed_state, write_trajectory_csv
from .params import RelaxationRates, SystemParams
from .polarization import polarization_of_state
from .presets import Preset, format_presets, get_preset

CONFIG_SCHEMA = "nvpolar-run/1"

#: Environment variable naming the default output root directory.
OUT_ENV = "NVPOLAR_OUT"

_SYSTEM_KEYS = {"d", "gamma_e", "gamma_c", "b_z", "a_zz", "a_ani", "phi"}
_RATE_KEYS = {"gamma_gl", "n_th", "gamma_d", "gamma_n_gl"}
_INLINE_KEYS = {
    "schema",
    "name",
    "system",
    "rates",
    "omega",
    "t_mw_ns",
    "n_cycles",
    "t_gl_ns",
    "chop_on_ns",
    "chop_off_ns",
    "chop_reps",
    "rest_ns",
}


def _load_config(path: str) -> Preset:
    """Build a Preset from a JSON config file.

    The file must carry ``schema: nvpolar-run/1`` and exactly one of a
    ``preset`` name or an inline definition (``system`` plus drive fields).
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(
            f"config schema must be {CONFIG_SCHEMA!r}, got {doc.get('schema')!r}"
        )
    named = "preset" in doc
    inline = "system" in doc
    if named == inline:
        raise ConfigError("config needs exactly one of 'preset' or 'system'")
    if named:
        extra = set(doc) - {"schema", "preset"}
        if extra:
            raise ConfigError(
                f"unexpected keys alongside 'preset': {sorted(extra)}"
            )
        return get_preset(doc["preset"])
    return _inline_preset(doc)


def _inline_preset(doc: dict) -> Preset:
    extra = set(doc) - _INLINE_KEYS
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    for key in ("omega", "t_mw_ns", "n_cycles"):
        if key not in doc:
            raise ConfigError(f"inline config requires {key!r}")
    sys_doc = doc["system"]
    if not isinstance(sys_doc, dict):
        raise ConfigError("'system' must be an object")
    if set(sys_doc) - _SYSTEM_KEYS:
        raise ConfigError(f"unknown system keys: {sorted(set(sys_doc) - _SYSTEM_KEYS)}")
    rate_doc = doc.get("rates", {})
    if not isinstance(rate_doc, dict):
        raise ConfigError("'rates' must be an object")
    if set(rate_doc) - _RATE_KEYS:
        raise ConfigError(f"unknown rate keys: {sorted(set(rate_doc) - _RATE_KEYS)}")
    if "gamma_d" in rate_doc:
        rate_doc = dict(rate_doc, gamma_d=tuple(rate_doc["gamma_d"]))
    try:
        system = SystemParams(**{k: float(v) for k, v in sys_doc.items()})
        rates = RelaxationRates(**rate_doc)
    except TypeError as exc:
        raise ConfigError(f"bad config field: {exc}") from exc
    chop = {
        key: int(doc[key])
        for key in ("t_gl_ns", "chop_on_ns", "chop_off_ns", "chop_reps", "rest_ns")
        if key in doc
    }
    return Preset(
        name=str(doc.get("name", "custom")),
        description="user configuration",
        system=system,
        rates=rates,
        omega=float(doc["omega"]),
        t_mw_ns=int(doc["t_mw_ns"]),
        n_cycles=int(doc["n_cycles"]),
        **chop,
    )


def _resolve_preset(args: argparse.Namespace) -> Preset:
    if args.config is not None and args.preset is not None:
        raise ConfigError("pass --preset or --config, not both")
    if args.config is not None:
        return _load_config(args.config)
    return get_preset(args.preset or "table-a1-fit")


def _out_dir(command: str, flag: str | None) -> Path:
    if flag:
        root = Path(flag)
    else:
        env = os.environ.get(OUT_ENV)
        root = Path(env) / command if env else Path(f"nvpolar-{command}")
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {root}: {exc}") from exc
    return root


def _write_json(path: Path, doc: dict) -> None:
    doc = dict(doc)
    doc["config_hash"] = ex.content_hash(doc)
    path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _plot_xy(csv_name: str, xlabel: str, ylabel: str, ycol: int = 2) -> str:
    return (
        "set datafile separator ','\n"
        "set terminal pngcairo size 900,600\n"
        "set output 'plot.png'\n"
        f"set xlabel '{xlabel}'\n"
        f"set ylabel '{ylabel}'\n"
        "set grid\n"
        f"plot '{csv_name}' skip 1 using 1:{ycol} "
        "with linespoints pointtype 7 pointsize 0.5 notitle\n"
    )


def _plot_map(csv_name: str, xlabel: str, ylabel: str) -> str:
    return (
        "set datafile separator ','\n"
        "set terminal pngcairo size 900,700\n"
        "set output 'plot.png'\n"
        f"set xlabel '{xlabel}'\n"
        f"set ylabel '{ylabel}'\n"
        "set view map\n"
        "set cblabel 'P'\n"
        f"splot '{csv_name}' skip 1 using 1:2:3 "
        "with points pointtype 5 pointsize 1.6 palette notitle\n"
    )


def _report_extreme(result: ex.SweepResult) -> tuple[float, float]:
    idx = int(np.argmax(np.abs(result.p)))
    return float(result.axes[0].values[idx]), float(result.p[idx])


# -- subcommands --------------------------------------------------------------


def _cmd_sweep_detuning(args: argparse.Namespace) -> int:
    preset = _resolve_preset(args)
    deltas = ex.grid(args.min, args.max, args.step)
    result = ex.sweep_detuning(preset, deltas, n_cycles=args.n, workers=args.workers)
    out = _out_dir("sweep-detuning", args.out)
    result.write_csv(out / "data.csv")
    result.write_metadata(out / "metadata.json")
    (out / "plot.gp").write_text(_plot_xy("data.csv", "drive detuning (Hz)", "P"))
    at, best = _report_extreme(result)
    print(f"wrote {out} ({len(result.p)} points); peak P = {best:+.4f} at {at:+.0f} Hz")
    return 0


def _cmd_sweep_n(args: argparse.Namespace) -> int:
    preset = _resolve_preset(args)
    result = ex.sweep_repetitions(preset, args.n, delta=args.delta)
    out = _out_dir("sweep-n", args.out)
    result.write_csv(out / "data.csv")
    result.write_metadata(out / "metadata.json")
    (out / "plot.gp").write_text(_plot_xy("data.csv", "completed cycles", "P"))
    print(
        f"wrote {out} ({len(result.p)} points); "
        f"P({args.n}) = {float(result.p[-1]):+.4f} "
        f"at delta = {result.metadata['delta_hz']:+.0f} Hz"
    )
    return 0


def _cmd_sweep_field(args: argparse.Namespace) -> int:
    preset = _resolve_preset(args)
    fields = ex.grid(args.min, args.max, args.step)
    result = ex.sweep_field(
        preset,
        fields,
        inner_halfwidth=args.inner_halfwidth,
        inner_step=args.inner_step,
        workers=args.workers,
    )
    out = _out_dir("sweep-field", args.out)
    result.write_csv(out / "data.csv")
    result.write_metadata(out / "metadata.json")
    (out / "plot.gp").write_text(_plot_xy("data.csv", 'field B_z (G)', "best P"))
    at, best = _report_extreme(result)
    print(f"wrote {out} ({len(result.p)} points); peak P = {best:+.4f} at {at:.0f} G")
    return 0


def _cmd_sweep_ani(args: argparse.Namespace) -> int:
    preset = _resolve_preset(args)
    ani = ex.grid(args.min, args.max, args.step)
    deltas = ex.grid(args.delta_min, args.delta_max, args.delta_step)
    result = ex.sweep_ani_detuning(preset, ani, deltas, workers=args.workers)
    out = _out_dir("sweep-ani", args.out)
    result.write_csv(out / "data.csv")
    result.write_metadata(out / "metadata.json")
    reduced = ex.max_trace(result, axis=0)
    reduced.write_csv(out / "max.csv")
    (out / "plot.gp").write_text(
        _plot_map("data.csv", "transverse coupling (Hz)", "drive detuning (Hz)")
    )
    at, best = _report_extreme(reduced)
    print(
        f"wrote {out} ({result.p.size} points); "
        f"best |P| over detuning peaks at {best:+.4f} for a_ani = {at:.0f} Hz"
    )
    return 0


def _cmd_sweep_field_ani(args: argparse.Namespace) -> int:
    preset = _resolve_preset(args)
    fields = ex.grid(args.min, args.max, args.step)
    ani = ex.grid(args.ani_min, args.ani_max, args.ani_step)
    result = ex.sweep_field_ani(
        preset,
        fields,
        ani,
        inner_halfwidth=args.inner_halfwidth,
        inner_step=args.inner_step,
        workers=args.workers,
    )
    out = _out_dir("sweep-field-ani", args.out)
    result.write_csv(out / "data.csv")
    result.write_metadata(out / "metadata.json")
    (out / "plot.gp").write_text(
        _plot_map("data.csv", "field B_z (G)", "transverse coupling (Hz)")
    )
    print(f"wrote {out} ({result.p.size} points)")
    return 0


def _cmd_ramsey(args: argparse.Namespace) -> int:
    preset = _resolve_preset(args)
    delta = args.delta if args.delta is not None else ex.predicted_resonance(preset)
    schedule = preset.schedule(delta) + preset.readout_tail()
    prop = SchedulePropagator(preset.system, preset.rates, frame_delta=delta)
    rho = prop.propagate(initial_mixed_state(), schedule)
    model = rm.ramsey_model(
        preset.system,
        args.manifold,
        rho=rho,
        probe_detuning=args.probe_detuning,
        t2_star=args.t2_star,
    )
    t, s = rm.synthesize_ramsey(model, args.duration, args.dt)
    spectrum = rm.fft_spectrum(s, args.dt)
    guesses = rm.dominant_line_pair(model.peaks)
    spectral = rm.fit_lorentzian_pair(spectrum, guesses, manifold=args.manifold)
    time_fit = rm.fit_time_domain(t, s, guesses, manifold=args.manifold)

    out = _out_dir("ramsey", args.out)
    rm.write_signal_csv(out / "data.csv", t, s)
    rm.write_spectrum_csv(out / "spectrum.csv", spectrum)
    base = {
        "command": "ramsey",
        "schema": "nvpolar-ramsey/1",
        "preset": preset.to_dict(),
        "delta_hz": float(delta),
        "manifold": args.manifold,
        "probe_detuning_hz": args.probe_detuning,
        "t2_star_s": args.t2_star,
        "duration_s": args.duration,
        "dt_s": args.dt,
        "polarization_model": model.polarization(),
    }
    _write_json(out / "metadata.json", base)
    for name, est in (("fit_spectrum.json", spectral), ("fit_time.json", time_fit)):
        _write_json(
            out / name,
            {
                "schema": "nvpolar-ramsey-fit/1",
                "p": est.p,
                "frequency_up_hz": est.frequency_up,
                "frequency_down_hz": est.frequency_down,
                "report": json.loads(est.report.to_json()),
            },
        )
    (out / "plot.gp").write_text(
        "set datafile separator ','\n"
        "set terminal pngcairo size 900,900\n"
        "set output 'plot.png'\n"
        "set multiplot layout 2,1\n"
        "set xlabel 'time (ns)'\nset ylabel 'fringe signal'\n"
        "plot 'data.csv' skip 1 using 1:2 with lines notitle\n"
        "set xlabel 'frequency (Hz)'\nset ylabel 'magnitude'\n"
        "plot 'spectrum.csv' skip 1 using 1:2 with lines notitle\n"
        "unset multiplot\n"
    )
    print(
        f"wrote {out}; P(model) = {model.polarization():+.4f}, "
        f"P(spectral fit) = {spectral.p:+.4f}, P(time fit) = {time_fit.p:+.4f}"
    )
    return 0


def _read_curve(path: str) -> list[tuple[float, float]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read data file {path}: {exc}") from exc
    pairs = []
    for row in rows:
        if len(row) < 2:
            continue
        try:
            pairs.append((float(row[0]), float(row[1])))
        except ValueError:
            continue  # header or comment row
    if not pairs:
        raise ConfigError(f"no numeric (detuning, P) rows in {path}")
    return pairs


def _cmd_fit_curve(args: argparse.Namespace) -> int:
    preset = _resolve_preset(args)
    pairs = _read_curve(args.data)
    report = fit_polarization_curve(
        pairs, preset, n_cycles=args.n, budget=args.budget
    )
    out = _out_dir("fit-curve", args.out)
    _write_json(
        out / "report.json",
        {
            "schema": "nvpolar-fit/1",
            "preset": preset.to_dict(),
            "data_file": str(args.data),
            "n_points": len(pairs),
            "init": list(CURVE_FIT_INIT),
            "report": json.loads(report.to_json()),
        },
    )
    f_rel, azz_mag, a_ani = report.params
    sign = -1.0 if preset.system.a_zz < 0 else 1.0
    fitted_preset = preset.with_system(a_zz=sign * azz_mag, a_ani=a_ani)
    with open(out / "fitted.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta_hz", "P_data", "P_fit"])
        for delta, value in pairs:
            model_p = ex.sequence_polarization(
                fitted_preset, delta - f_rel, n_cycles=args.n
            )
            writer.writerow([repr(delta), repr(value), repr(model_p)])
    (out / "plot.gp").write_text(
        "set datafile separator ','\n"
        "set terminal pngcairo size 900,600\n"
        "set output 'plot.png'\n"
        "set xlabel 'drive detuning (Hz)'\nset ylabel 'P'\nset grid\n"
        "plot 'fitted.csv' skip 1 using 1:2 with points pointtype 7 title 'data', \\\n"
        "     'fitted.csv' skip 1 using 1:3 with lines title 'fit'\n"
    )
    print(
        f"wrote {out}; f_rel = {f_rel:+.1f} Hz, |A_zz| = {azz_mag:.1f} Hz, "
        f"A_ani = {a_ani:.1f} Hz ({report.n_evaluations} evaluations)"
    )
    if report.warnings:
        for line in report.warnings:
            print(f"warning: {line}")
    if not report.converged:
        raise FitConvergenceError(
            f"curve fit used {report.n_evaluations} evaluations "
            f"without converging: {report.message}"
        )
    return 0


def _cmd_trajectory(args: argparse.Namespace) -> int:
    preset = _resolve_preset(args)
    delta = args.delta if args.delta is not None else ex.predicted_resonance(preset)
    schedule = preset.schedule(delta, n_cycles=args.n) + preset.readout_tail()
    prop = SchedulePropagator(preset.system, preset.rates, frame_delta=delta)
    trajectory = prop.trajectory(
        initial_mixed_state(), schedule, sample_ns=args.sample_ns
    )
    out = _out_dir("trajectory", args.out)
    write_trajectory_csv(trajectory, out / "trajectory.csv")
    _write_json(
        out / "metadata.json",
        {
            "command": "trajectory",
            "schema": "nvpolar-trajectory/1",
            "preset": preset.to_dict(),
            "delta_hz": float(delta),
            "n_cycles": args.n if args.n is not None else preset.n_cycles,
            "sample_ns": args.sample_ns,
            "rows": len(trajectory),
        },
    )
    (out / "plot.gp").write_text(
        _plot_xy("trajectory.csv", "time (ns)", "P", ycol=74)
    )
    final = polarization_of_state(trajectory[-1][1])
    print(f"wrote {out} ({len(trajectory)} rows); final P = {final.p:+.4f}")
    return 0


def _cmd_list_presets(args: argparse.Namespace) -> int:
    print(format_presets())
    return 0


# -- parser -------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvpolar",
        description=(
            "Simulate optically assisted microwave polarization transfer to a "
            "weakly coupled nuclear spin and analyze the results."
        ),
    )
    parser.add_argument("--version", action="version", version=f"nvpolar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--preset", help="named parameter set (see list-presets); default table-a1-fit"
    )
    common.add_argument("--config", help="JSON run configuration file")
    common.add_argument(
        "--out",
        help=f"output directory (default: ${OUT_ENV}/<command> or ./nvpolar-<command>)",
    )
    parallel = argparse.ArgumentParser(add_help=False)
    parallel.add_argument(
        "--workers", type=int, default=1, help="worker processes (default 1)"
    )

    p = sub.add_parser(
        "sweep-detuning",
        parents=[common, parallel],
        help="polarization vs drive detuning",
    )
    p.add_argument("--min", type=float, default=-1e6, help="lowest detuning (Hz)")
    p.add_argument("--max", type=float, default=1e6, help="highest detuning (Hz)")
    p.add_argument("--step", type=float, default=ex.DELTA_STEP, help="grid step (Hz)")
    p.add_argument("--n", type=int, default=None, help="override cycle count")
    p.set_defaults(func=_cmd_sweep_detuning)

    p = sub.add_parser(
        "sweep-n", parents=[common], help="polarization vs number of cycles"
    )
    p.add_argument("--n", type=int, default=20, help="largest cycle count")
    p.add_argument(
        "--delta",
        type=float,
        default=None,
        help="drive detuning (Hz); default: best detuning of a standard sweep",
    )
    p.set_defaults(func=_cmd_sweep_n)

    p = sub.add_parser(
        "sweep-field",
        parents=[common, parallel],
        help="best polarization vs axial magnetic field",
    )
    p.add_argument("--min", type=float, default=450.0, help="lowest field (G)")
    p.add_argument("--max", type=float, default=850.0, help="highest field (G)")
    p.add_argument("--step", type=float, default=ex.FIELD_STEP, help="field step (G)")
    p.add_argument(
        "--inner-step",
        type=float,
        default=ex.DELTA_STEP,
        help="detuning step of the per-field search window (Hz)",
    )
    p.add_argument(
        "--inner-halfwidth",
        type=float,
        default=ex.INNER_HALFWIDTH,
        help="half width of the per-field detuning window (Hz)",
    )
    p.set_defaults(func=_cmd_sweep_field)

    p = sub.add_parser(
        "sweep-ani",
        parents=[common, parallel],
        help="polarization over a (transverse coupling, detuning) grid",
    )
    p.add_argument("--min", type=float, default=0.0, help="lowest coupling (Hz)")
    p.add_argument("--max", type=float, default=400e3, help="highest coupling (Hz)")
    p.add_argument("--step", type=float, default=ex.ANI_STEP, help="coupling step (Hz)")
    p.add_argument("--delta-min", type=float, default=-600e3)
    p.add_argument("--delta-max", type=float, default=600e3)
    p.add_argument("--delta-step", type=float, default=ex.DELTA_STEP)
    p.set_defaults(func=_cmd_sweep_ani)

    p = sub.add_parser(
        "sweep-field-ani",
        parents=[common, parallel],
        help="best polarization per (field, transverse coupling) cell",
    )
    p.add_argument("--min", type=float, default=450.0, help="lowest field (G)")
    p.add_argument("--max", type=float, default=850.0, help="highest field (G)")
    p.add_argument("--step", type=float, default=10.0, help="field step (G)")
    p.add_argument("--ani-min", type=float, default=0.0)
    p.add_argument("--ani-max", type=float, default=400e3)
    p.add_argument("--ani-step", type=float, default=50e3)
    p.add_argument("--inner-step", type=float, default=ex.DELTA_STEP)
    p.add_argument("--inner-halfwidth", type=float, default=ex.INNER_HALFWIDTH)
    p.set_defaults(func=_cmd_sweep_field_ani)

    p = sub.add_parser(
        "ramsey",
        parents=[common],
        help="electron fringe readout of the prepared nuclear state",
    )
    p.add_argument(
        "--delta",
        type=float,
        default=None,
        help="drive detuning of the preparation sequence (Hz); default: predicted line",
    )
    p.add_argument(
        "--manifold",
        type=int,
        choices=(1, -1),
        default=-1,
        help="electron manifold probed by the fringe sequence",
    )
    p.add_argument("--probe-detuning", type=float, default=rm.PROBE_DETUNING)
    p.add_argument("--t2-star", type=float, default=rm.T2_STAR)
    p.add_argument("--duration", type=float, default=4e-6, help="record length (s)")
    p.add_argument("--dt", type=float, default=2e-8, help="sample spacing (s)")
    p.set_defaults(func=_cmd_ramsey)

    p = sub.add_parser(
        "fit-curve",
        parents=[common],
        help="recover hyperfine couplings from a measured detuning curve",
    )
    p.add_argument("data", help="CSV file with (detuning_hz, P) rows")
    p.add_argument("--budget", type=int, default=200, help="max model evaluations")
    p.add_argument("--n", type=int, default=None, help="override cycle count")
    p.set_defaults(func=_cmd_fit_curve)

    p = sub.add_parser(
        "trajectory",
        parents=[common],
        help="density-matrix trajectory of one full sequence",
    )
    p.add_argument("--delta", type=float, default=None, help="drive detuning (Hz)")
    p.add_argument("--sample-ns", type=int, default=10, help="sampling period (ns)")
    p.add_argument("--n", type=int, default=None, help="override cycle count")
    p.set_defaults(func=_cmd_trajectory)

    p = sub.add_parser("list-presets", help="show the bundled parameter sets")
    p.set_defaults(func=_cmd_list_presets)

    return parser


def _fail(category: str, exc: Exception) -> None:
    message = " ".join(str(exc).split())
    print(f"error: {category}: {message}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        return args.func(args)
    except ConfigError as exc:
        _fail("config", exc)
        return 2
    except (NumericalError, UndefinedPolarizationError, FitModelError) as exc:
        _fail("numerical", exc)
        return 3
    except FitConvergenceError as exc:
        _fail("fit", exc)
        return 4


if __name__ == "__main__":
    sys.exit(main())
