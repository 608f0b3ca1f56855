"""Experiment matrix runner, metrics aggregation and result emission.

The matrix sweeps 4 threshold policies x 2 reactions x 3 body parts x 3
collision axes x N repetitions.  Per-run seeds derive from the master seed
by run index, so parallel fan-out never changes results; the +5 s penalty
for reacted runs is applied here, not in the simulator, keeping raw logs
penalty-free.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, field
from pathlib import Path

import numpy as np

from .config import load_config
from .control import ReactionPolicy
from .safety import PflParams, PolicyKind
from .sim import (AXIS_TO_SEGMENT, RunResult, Scenario, SimConfig,
                  run_scenario, DEFAULT_Q0)
from .skin import BodyPart, TriggerTable

REACTION_PENALTY_S = 5.0

POLICY_ORDER = (PolicyKind.UNIFORM, PolicyKind.BODY_PARTS,
                PolicyKind.LINK_VELOCITY, PolicyKind.EFFECTIVE_MASS)
REACTION_ORDER = (ReactionPolicy.STOP, ReactionPolicy.AVOID)
PART_ORDER = (BodyPart.UPPER, BodyPart.LOWER, BodyPart.HAND)
AXIS_ORDER = ("+y", "-z", "-x")


@dataclass(frozen=True)
class RunRecord:
    """One experiment run reduced to its aggregation-level metrics."""

    run_index: int
    policy: str
    reaction: str
    body_part: str
    axis: str
    rep: int
    seed: int
    pad_id: int
    reacted: bool
    onset_time: float
    detection_time: float
    reaction_time: float
    task_time: float
    total_time: float
    avoid_distance: float
    level_at_pad: int
    estimated_force: float
    level0_ticks: int
    level1_ticks: int
    level2_ticks: int
    peak_speed_upper: float
    peak_speed_lower: float
    peak_speed_hand: float
    clamp_events: int
    aborted: bool
    diagnostic: str


@dataclass
class MatrixConfig:
    reps: int = 10
    master_seed: int = 0
    dt: float = 0.002
    effort: float = 0.8
    workers: int = 0  # 0 = sequential
    config_path: str | None = None
    pfl: PflParams = field(default_factory=PflParams)
    triggers: TriggerTable = field(default_factory=TriggerTable)


def run_seed(master_seed: int, run_index: int) -> int:
    """Stable per-run seed; independent of execution order."""
    return int(np.random.SeedSequence([master_seed, run_index]).generate_state(1)[0])


def matrix_cells(reps: int):
    """(run_index, policy, reaction, part, axis, rep) in the canonical order."""
    idx = 0
    for policy in POLICY_ORDER:
        for reaction in REACTION_ORDER:
            for part in PART_ORDER:
                for axis in AXIS_ORDER:
                    for rep in range(reps):
                        yield idx, policy, reaction, part, axis, rep
                        idx += 1


_WORKER_MODEL = {}


def _load_model_cached(config_path):
    key = config_path or "__default__"
    if key not in _WORKER_MODEL:
        _WORKER_MODEL[key] = load_config(config_path)
    return _WORKER_MODEL[key]


def _execute_cell(args) -> RunRecord:
    (idx, policy, reaction, part, axis, rep, cfg) = args
    model, pads = _load_model_cached(cfg.config_path)
    seed = run_seed(cfg.master_seed, idx)
    scenario = Scenario(policy=policy, reaction=reaction, body_part=part,
                        axis=axis, effort=cfg.effort)
    result = run_scenario(model, pads, scenario,
                          SimConfig(dt=cfg.dt, seed=seed),
                          pfl=cfg.pfl, triggers=cfg.triggers)
    return record_from_result(idx, rep, result)


def record_from_result(run_index: int, rep: int, r: RunResult) -> RunRecord:
    rt = r.reaction_time
    total = r.task_time + (REACTION_PENALTY_S if r.reacted else 0.0)
    return RunRecord(
        run_index=run_index,
        policy=r.scenario.policy.value,
        reaction=r.scenario.reaction.value,
        body_part=r.scenario.body_part.value if r.scenario.body_part else "",
        axis=r.scenario.axis or "",
        rep=rep,
        seed=r.seed,
        pad_id=-1 if r.pad_id is None else r.pad_id,
        reacted=r.reacted,
        onset_time=math.nan if r.onset_time is None else r.onset_time,
        detection_time=math.nan if r.detection_time is None else r.detection_time,
        reaction_time=math.nan if rt is None else rt,
        task_time=r.task_time,
        total_time=total,
        avoid_distance=r.avoid_distance,
        level_at_pad=-1 if r.level_at_pad is None else r.level_at_pad,
        estimated_force=math.nan if r.estimated_force is None else r.estimated_force,
        level0_ticks=r.level_counts[0],
        level1_ticks=r.level_counts[1],
        level2_ticks=r.level_counts[2],
        peak_speed_upper=r.peak_part_speed.get("UPPER", 0.0),
        peak_speed_lower=r.peak_part_speed.get("LOWER", 0.0),
        peak_speed_hand=r.peak_part_speed.get("HAND", 0.0),
        clamp_events=r.clamp_events,
        aborted=r.aborted,
        diagnostic=r.diagnostic,
    )


def run_matrix(cfg: MatrixConfig) -> list[RunRecord]:
    """Execute the full experiment matrix; deterministic given master_seed."""
    cells = [(idx, pol, rea, part, axis, rep, cfg)
             for idx, pol, rea, part, axis, rep in matrix_cells(cfg.reps)]
    if cfg.workers and cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_execute_cell, cells, chunksize=8))
    else:
        records = [_execute_cell(c) for c in cells]
    records.sort(key=lambda r: r.run_index)
    return records


# -- aggregation -------------------------------------------------------------


def _mean_sd(values) -> tuple[float, float, int]:
    values = [v for v in values if not math.isnan(v)]
    n = len(values)
    if n == 0:
        return math.nan, math.nan, 0
    mean = sum(values) / n
    if n < 2:
        return mean, math.nan, n
    sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    return mean, sd, n


def pearson_r(xs, ys) -> float | None:
    """Standard-formula Pearson correlation; None when undefined."""
    pairs = [(x, y) for x, y in zip(xs, ys)
             if not (math.isnan(x) or math.isnan(y))]
    if len(pairs) < 2:
        return None
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    sx, sy = xs.std(), ys.std()
    if sx == 0 or sy == 0:
        return None
    return float(((xs - xs.mean()) * (ys - ys.mean())).mean() / (sx * sy))


@dataclass
class SummaryTables:
    """Aggregated metrics mirroring the experiment's reporting tables."""

    # (policy, reaction) -> [mean, sd, n] of total time (penalty included)
    total_time: dict
    # (policy, body_part) -> reaction percentage, averaged over reactions
    reaction_rate: dict
    # policy -> aggregate reaction percentage
    reaction_rate_aggregate: dict
    # policy -> [share0, share1, share2] percentages per 25 Hz update tick
    level_shares: dict
    # policy -> [mean, sd, n] reaction time over reacted runs
    reaction_time: dict
    # policy -> [mean, sd, n] avoidance distance over reacted AVOID runs
    avoid_distance: dict
    # Pearson r between reaction time and predicted contact force, or None
    reaction_force_correlation: float | None
    # body_part -> peak pad speed observed anywhere in the matrix [m/s]
    peak_part_speed: dict
    n_records: int = 0
    n_aborted: int = 0


def aggregate(records: list[RunRecord]) -> SummaryTables:
    if not records:
        raise ValueError("cannot aggregate an empty record set")
    ok = [r for r in records if not r.aborted]

    total_time = {}
    for pol in POLICY_ORDER:
        for rea in REACTION_ORDER:
            sel = [r.total_time for r in ok
                   if r.policy == pol.value and r.reaction == rea.value]
            if sel:
                total_time[f"{pol.value}/{rea.value}"] = list(_mean_sd(sel))

    reaction_rate = {}
    for pol in POLICY_ORDER:
        for part in PART_ORDER:
            sel = [r for r in ok
                   if r.policy == pol.value and r.body_part == part.value]
            if sel:
                pct = 100.0 * sum(r.reacted for r in sel) / len(sel)
                reaction_rate[f"{pol.value}/{part.value}"] = pct

    reaction_rate_aggregate = {}
    for pol in POLICY_ORDER:
        sel = [r for r in ok if r.policy == pol.value]
        if sel:
            reaction_rate_aggregate[pol.value] = (
                100.0 * sum(r.reacted for r in sel) / len(sel))

    level_shares = {}
    for pol in POLICY_ORDER:
        sel = [r for r in ok if r.policy == pol.value]
        counts = [sum(r.level0_ticks for r in sel),
                  sum(r.level1_ticks for r in sel),
                  sum(r.level2_ticks for r in sel)]
        total = sum(counts)
        if total:
            level_shares[pol.value] = [100.0 * c / total for c in counts]

    reaction_time = {}
    avoid_distance = {}
    for pol in POLICY_ORDER:
        rts = [r.reaction_time for r in ok if r.policy == pol.value and r.reacted]
        if rts:
            reaction_time[pol.value] = list(_mean_sd(rts))
        ads = [r.avoid_distance for r in ok
               if r.policy == pol.value and r.reacted
               and r.reaction == ReactionPolicy.AVOID.value]
        if ads:
            avoid_distance[pol.value] = list(_mean_sd(ads))

    reacted = [r for r in ok if r.reacted]
    corr = pearson_r([r.reaction_time for r in reacted],
                     [r.estimated_force for r in reacted])

    peak = {}
    for part, attr in (("UPPER", "peak_speed_upper"),
                       ("LOWER", "peak_speed_lower"),
                       ("HAND", "peak_speed_hand")):
        vals = [getattr(r, attr) for r in ok]
        if vals:
            peak[part] = max(vals)

    return SummaryTables(
        total_time=total_time,
        reaction_rate=reaction_rate,
        reaction_rate_aggregate=reaction_rate_aggregate,
        level_shares=level_shares,
        reaction_time=reaction_time,
        avoid_distance=avoid_distance,
        reaction_force_correlation=corr,
        peak_part_speed=peak,
        n_records=len(records),
        n_aborted=len(records) - len(ok),
    )


# -- serialization -----------------------------------------------------------

_RECORD_FIELDS = list(RunRecord.__dataclass_fields__)
_FLOAT_FIELDS = {name for name, f in RunRecord.__dataclass_fields__.items()
                 if f.type == "float"}
_BOOL_FIELDS = {name for name, f in RunRecord.__dataclass_fields__.items()
                if f.type == "bool"}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)  # round-trips exactly
    return str(value)


def write_records(records: list[RunRecord], path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_RECORD_FIELDS)
        for rec in records:
            d = asdict(rec)
            writer.writerow([_fmt(d[k]) for k in _RECORD_FIELDS])


def load_records(path: Path) -> list[RunRecord]:
    records = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            kwargs = {}
            for name in _RECORD_FIELDS:
                raw = row[name]
                if name in _BOOL_FIELDS:
                    kwargs[name] = raw == "1"
                elif name in _FLOAT_FIELDS:
                    kwargs[name] = float(raw)
                elif name in ("diagnostic", "policy", "reaction",
                              "body_part", "axis"):
                    kwargs[name] = raw
                else:
                    kwargs[name] = int(raw)
            records.append(RunRecord(**kwargs))
    return records


def summary_text(tables: SummaryTables) -> str:
    """Human-readable summary mirroring the reporting tables."""
    lines = []
    lines.append("Average total time [s] (penalty included, mean +/- sd)")
    lines.append(f"  {'policy':<16}{'STOP':>18}{'AVOID':>18}")
    for pol in POLICY_ORDER:
        row = [f"  {pol.value:<16}"]
        for rea in REACTION_ORDER:
            cell = tables.total_time.get(f"{pol.value}/{rea.value}")
            row.append(f"{cell[0]:9.2f} +/-{cell[1]:5.2f}" if cell else " " * 18)
        lines.append("".join(row))
    lines.append("")
    lines.append("Reaction rate [%] per body part (averaged over reactions)")
    lines.append(f"  {'policy':<16}{'UPPER':>10}{'LOWER':>10}{'HAND':>10}")
    for pol in POLICY_ORDER:
        row = [f"  {pol.value:<16}"]
        for part in PART_ORDER:
            pct = tables.reaction_rate.get(f"{pol.value}/{part.value}")
            row.append(f"{pct:10.1f}" if pct is not None else " " * 10)
        lines.append("".join(row))
    lines.append("")
    lines.append("Sensitivity level shares [%] per 25 Hz update tick")
    lines.append(f"  {'policy':<16}{'level 0':>10}{'level 1':>10}{'level 2':>10}")
    for pol in POLICY_ORDER:
        shares = tables.level_shares.get(pol.value)
        if shares:
            lines.append(f"  {pol.value:<16}" +
                         "".join(f"{s:10.2f}" for s in shares))
    lines.append("")
    lines.append("Mean reaction time [s] over reacted runs")
    for pol in POLICY_ORDER:
        cell = tables.reaction_time.get(pol.value)
        if cell:
            lines.append(f"  {pol.value:<16}{cell[0]:8.3f} +/-{cell[1]:6.3f}  (n={cell[2]})")
    lines.append("")
    lines.append("Mean avoidance distance [m] over reacted AVOID runs")
    for pol in POLICY_ORDER:
        cell = tables.avoid_distance.get(pol.value)
        if cell:
            lines.append(f"  {pol.value:<16}{cell[0]:8.4f} +/-{cell[1]:7.4f}  (n={cell[2]})")
    lines.append("")
    corr = tables.reaction_force_correlation
    lines.append("Pearson r(reaction time, predicted force): "
                 + (f"{corr:.3f}" if corr is not None else "undefined"))
    lines.append("Peak pad speeds [m/s]: "
                 + ", ".join(f"{k}={v:.3f}" for k, v in tables.peak_part_speed.items()))
    lines.append(f"Records: {tables.n_records} ({tables.n_aborted} aborted)")
    return "\n".join(lines) + "\n"


def emit(tables: SummaryTables, records: list[RunRecord], out_dir: Path,
         figures: bool = True) -> list[Path]:
    """Write machine-readable results, the text summary and report figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    records_path = out_dir / "records.csv"
    write_records(records, records_path)
    written.append(records_path)

    summary_path = out_dir / "summary.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(asdict(tables), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(summary_path)

    text_path = out_dir / "summary.txt"
    text_path.write_text(summary_text(tables), encoding="utf-8")
    written.append(text_path)

    if figures:
        from . import plots
        written.extend(plots.render_report_figures(tables, out_dir))
    return written
