"""Command line interface: single runs, the full experiment matrix,
re-aggregation of stored records and a one-shot PFL calculator."""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .control import ReactionPolicy
from .dynamics import effective_mass, moving_mass_up_to
from .harness import (MatrixConfig, aggregate, emit, load_records,
                      record_from_result, run_matrix, write_records)
from .kinematics import JointState, point_jacobian
from .safety import (PflParams, PolicyKind, force_to_threshold, pfl_max_force,
                     pfl_max_velocity)
from .sim import Scenario, SimConfig, run_scenario
from .skin import BodyPart

EXIT_CONFIG = 2
EXIT_RUN = 3
EXIT_IO = 4

_POLICIES = [p.value for p in PolicyKind]
_REACTIONS = [r.value for r in ReactionPolicy]
_PARTS = [b.value for b in BodyPart]
_AXES = ["+y", "-z", "-x"]


def _write_manifest(out_dir: Path, command: str, params: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"tool": "skinsafe", "version": __version__,
                "command": command, "parameters": params}
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


@click.group()
@click.version_option(__version__)
def main():
    """Adaptive skin collision-sensitivity simulator and safety engine."""


@main.command()
@click.option("--policy", type=click.Choice(_POLICIES), default="UNIFORM",
              show_default=True)
@click.option("--reaction", type=click.Choice(_REACTIONS), default="STOP",
              show_default=True)
@click.option("--axis", type=click.Choice(_AXES), default="+y", show_default=True,
              help="Task segment during which the contact is injected.")
@click.option("--part", type=click.Choice(_PARTS), default="HAND",
              show_default=True, help="Body part receiving the contact.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dt", type=float, default=0.002, show_default=True)
@click.option("--effort", type=float, default=0.8, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("out/run"),
              show_default=True)
@click.option("--fast/--paced", "fast", default=True,
              help="Run as fast as possible or paced to real time.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Robot/skin config file (default: shipped UR10e).")
def run(policy, reaction, axis, part, seed, dt, effort, out, fast, config_path):
    """Execute one run and export its tick log and threshold timeline."""
    try:
        model, pads = load_config(config_path)
    except (ConfigError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    scenario = Scenario(policy=PolicyKind(policy),
                        reaction=ReactionPolicy(reaction),
                        body_part=BodyPart(part), axis=axis, effort=effort)
    sim = SimConfig(dt=dt, seed=seed, real_time_paced=not fast)
    result = run_scenario(model, pads, scenario, sim, keep_ticks=True)
    if result.aborted:
        click.echo(f"run aborted: {result.diagnostic}", err=True)

    out.mkdir(parents=True, exist_ok=True)
    _write_manifest(out, "run", {
        "policy": policy, "reaction": reaction, "axis": axis, "part": part,
        "seed": seed, "dt": dt, "effort": effort, "fast": fast,
        "config": str(config_path) if config_path else "builtin:ur10e",
    })

    ticks = result.ticks
    pad_ids = [p.id for p in sorted(pads, key=lambda p: p.id)]
    with open(out / "ticks.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        n = model.n
        header = (["time"] + [f"q{i}" for i in range(n)]
                  + [f"qd{i}" for i in range(n)]
                  + [f"level_pad{i}" for i in pad_ids]
                  + [f"pressure_pad{i}" for i in pad_ids]
                  + ["contact_active", "reaction_state", "ee_x", "ee_y", "ee_z"])
        writer.writerow(header)
        for k in range(len(ticks.time)):
            writer.writerow(
                [repr(ticks.time[k])]
                + [repr(v) for v in ticks.q[k]]
                + [repr(v) for v in ticks.qdot[k]]
                + list(ticks.levels[k])
                + [repr(v) for v in ticks.pressures[k]]
                + [int(ticks.contact_active[k]), ticks.reaction_state[k]]
                + [repr(v) for v in ticks.ee_position[k]])

    # Threshold timeline: pad x time grid of levels at 25 Hz boundaries.
    times, grid = [], []
    last = None
    for k in range(len(ticks.time)):
        lv = ticks.levels[k]
        if lv != last:
            times.append(ticks.time[k])
            grid.append(lv)
            last = lv
        elif k == len(ticks.time) - 1:
            times.append(ticks.time[k])
            grid.append(lv)
    with open(out / "timeline.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time"] + [f"pad{i}" for i in pad_ids])
        for t, lv in zip(times, grid):
            writer.writerow([repr(t)] + list(lv))
    if len(times) >= 2:
        from .plots import threshold_timeline_figure
        threshold_timeline_figure(times, grid, pad_ids, out / "timeline.png")

    rec = record_from_result(0, 0, result)
    with open(out / "run.json", "w", encoding="utf-8") as fh:
        json.dump(asdict(rec), fh, indent=2, sort_keys=True,
                  default=lambda v: None if isinstance(v, float) and math.isnan(v) else v)
        fh.write("\n")
    click.echo(f"run complete: reacted={result.reacted} "
               f"task_time={result.task_time:.3f}s -> {out}")
    sys.exit(EXIT_RUN if result.aborted else 0)


@main.command()
@click.option("--reps", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dt", type=float, default=0.002, show_default=True)
@click.option("--effort", type=float, default=0.8, show_default=True)
@click.option("--workers", type=int, default=0, show_default=True,
              help="Parallel worker processes (0 = sequential).")
@click.option("--out", type=click.Path(path_type=Path), default=Path("out/matrix"),
              show_default=True)
@click.option("--no-figures", is_flag=True, default=False)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def matrix(reps, seed, dt, effort, workers, out, no_figures, config_path):
    """Run the full policy x reaction x case experiment matrix."""
    cfg = MatrixConfig(reps=reps, master_seed=seed, dt=dt, effort=effort,
                       workers=workers, config_path=config_path)
    try:
        records = run_matrix(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    tables = aggregate(records)
    _write_manifest(out, "matrix", {
        "reps": reps, "seed": seed, "dt": dt, "effort": effort,
        "workers": workers,
        "config": str(config_path) if config_path else "builtin:ur10e",
    })
    emit(tables, records, out, figures=not no_figures)
    click.echo(out / "summary.txt")
    click.echo(open(out / "summary.txt", encoding="utf-8").read())
    if tables.n_aborted:
        click.echo(f"warning: {tables.n_aborted} aborted runs", err=True)


@main.command()
@click.option("--records", "records_path", type=click.Path(exists=True),
              required=True, help="records.csv produced by `matrix` or `run`.")
@click.option("--out", type=click.Path(path_type=Path), default=Path("out/report"),
              show_default=True)
@click.option("--no-figures", is_flag=True, default=False)
def report(records_path, out, no_figures):
    """Aggregate an existing records file and render the report."""
    try:
        records = load_records(records_path)
    except OSError as exc:
        click.echo(f"I/O error reading {records_path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    tables = aggregate(records)
    _write_manifest(out, "report", {"records": str(records_path)})
    emit(tables, records, out, figures=not no_figures)
    click.echo(open(out / "summary.txt", encoding="utf-8").read())


@main.command()
@click.option("--q", "q_str", default="0,0,0,0,0,0", show_default=True,
              help="Joint positions [rad], comma separated.")
@click.option("--qdot", "qdot_str", default="0,0,0,0,0,0", show_default=True,
              help="Joint velocities [rad/s], comma separated.")
@click.option("--pad", "pad_id", type=int, required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def pfl(q_str, qdot_str, pad_id, config_path):
    """One-shot contact-force / threshold calculator for a pad and state."""
    try:
        model, pads = load_config(config_path)
    except (ConfigError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    pad = next((p for p in pads if p.id == pad_id), None)
    if pad is None:
        click.echo(f"no pad with id {pad_id}", err=True)
        sys.exit(EXIT_CONFIG)
    q = np.array([float(v) for v in q_str.split(",")])
    qdot = np.array([float(v) for v in qdot_str.split(",")])
    params = PflParams()

    J = point_jacobian(model, q, pad.link, pad.center)
    v_vec = J[:3] @ qdot
    speed = float(np.linalg.norm(v_vec))
    m_half = 0.5 * moving_mass_up_to(model, pad.link)
    F_lv = pfl_max_force(speed, params.k, m_half, params.m_H)
    out = {
        "pad": pad_id, "body_part": pad.body_part.value,
        "pad_speed_m_s": speed,
        "m_half_moving_kg": m_half,
        "force_link_velocity_N": F_lv,
        "level_link_velocity": force_to_threshold(F_lv, params),
        "v_max_at_limit_m_s": pfl_max_velocity(params.F_limit, params.k,
                                               m_half, params.m_H),
    }
    if speed > 1e-4:
        em = effective_mass(model, q, pad.link, pad.center, v_vec / speed)
        m_u = model.total_mass if em.is_unbounded else em.value
        F_em = pfl_max_force(speed, params.k, m_u, params.m_H)
        out.update({
            "effective_mass_kg": None if em.is_unbounded else em.value,
            "effective_mass_unbounded": em.is_unbounded,
            "force_effective_mass_N": F_em,
            "level_effective_mass": force_to_threshold(F_em, params),
        })
    click.echo(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
