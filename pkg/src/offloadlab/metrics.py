"""Evaluation metrics, parameter sweeps, and their CSV emission.

Column order in every table is part of the contract; percentages are
written with 2 decimals, energies and rewards with full precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel
from .cost import Action, SystemParams, total_cost
from .env import OffloadEnv, RewardParams
from .policies import Policy
from .queueing import QueueModel
from .scenario import ScenarioTrace


@dataclass(slots=True)
class ActionStats:
    count: int = 0
    freq_pct: float = 0.0
    amap_pct: float = float("nan")
    realized_amap_pct: float = float("nan")


@dataclass(slots=True)
class StepRecord:
    seed: int
    frame_index: int
    action: Action
    map_full: float
    realized_map: float
    e_total_j: float
    deadline_met: bool
    reward: float


@dataclass(slots=True)
class EvalReport:
    policy: str
    n_seeds: int
    n_frames: int
    actions: dict[str, ActionStats]
    risky_pct: float
    robust_pct: float
    total_energy_j: float
    energy_reduction_pct: float
    deadline_miss_pct: float
    mean_reward: float
    steps: list[StepRecord] = field(default_factory=list, repr=False)


def _resolve_seeds(seeds) -> list[int]:
    if isinstance(seeds, int):
        return list(range(seeds))
    out = [int(s) for s in seeds]
    if not out:
        raise ValueError("need at least one seed")
    return out


def evaluate(
    policy: Policy,
    trace: ScenarioTrace,
    channel: ChannelModel,
    queue: QueueModel,
    params: SystemParams,
    reward_params: RewardParams | None = None,
    seeds=5,
    reward_basis: str = "observed",
    keep_steps: bool = False,
) -> EvalReport:
    """Replay the trace once per seed and pool the per-step outcomes.

    ``total_energy_j`` is the per-replay total (pooled energy divided by the
    seed count); ``energy_reduction_pct`` compares it against the all-local
    policy, whose per-frame cost is draw-independent.
    """
    seed_list = _resolve_seeds(seeds)
    env = OffloadEnv(trace, channel, queue, params,
                     reward_params=reward_params, reward_basis=reward_basis)
    records: list[StepRecord] = []
    for seed in seed_list:
        state = env.reset(seed=seed)
        while not env.done:
            frame = trace.frames[env.frame_index]
            decision = policy.decide(state, frame.map_full)
            result = env.step(decision.action)
            records.append(
                StepRecord(
                    seed=seed,
                    frame_index=result.frame_index,
                    action=result.action,
                    map_full=frame.map_full,
                    realized_map=result.realized_map,
                    e_total_j=result.cost.e_total_j,
                    deadline_met=result.deadline_met,
                    reward=result.reward,
                )
            )
            state = result.next_state
    n = len(records)
    actions: dict[str, ActionStats] = {}
    for action in params.action_set:
        chosen = [r for r in records if r.action == action]
        stats = ActionStats(count=len(chosen), freq_pct=100.0 * len(chosen) / n)
        if chosen:
            stats.amap_pct = 100.0 * float(np.mean([r.map_full for r in chosen]))
            stats.realized_amap_pct = 100.0 * float(np.mean([r.realized_map for r in chosen]))
        actions[action.name] = stats
    offloading = [r for r in records if r.action.i > 0]
    if offloading:
        risky = sum(1 for r in offloading if r.map_full < params.map_th)
        risky_pct = 100.0 * risky / len(offloading)
    else:
        risky_pct = 0.0
    total_energy = sum(r.e_total_j for r in records) / len(seed_list)
    e_local_frame = total_cost(params, Action(0), 1.0, 1.0, 0.0).e_total_j
    e_local_total = e_local_frame * len(trace)
    report = EvalReport(
        policy=policy.name,
        n_seeds=len(seed_list),
        n_frames=len(trace),
        actions=actions,
        risky_pct=risky_pct,
        robust_pct=100.0 - risky_pct,
        total_energy_j=total_energy,
        energy_reduction_pct=100.0 * (1.0 - total_energy / e_local_total),
        deadline_miss_pct=100.0 * sum(1 for r in records if not r.deadline_met) / n,
        mean_reward=float(np.mean([r.reward for r in records])),
        steps=records if keep_steps else [],
    )
    return report


def eval_report_header(params: SystemParams) -> list[str]:
    cols = ["policy", "n_seeds", "n_frames"]
    for action in params.action_set:
        cols.append(f"freq_pct_{action.name}")
    for action in params.action_set:
        cols.append(f"amap_pct_{action.name}")
    for action in params.action_set:
        cols.append(f"realized_amap_pct_{action.name}")
    cols.extend(
        [
            "risky_pct",
            "robust_pct",
            "total_energy_j",
            "energy_reduction_pct",
            "deadline_miss_pct",
            "mean_reward",
        ]
    )
    return cols


def _fmt_pct(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.2f}"


def eval_report_row(report: EvalReport, params: SystemParams) -> list[str]:
    row = [report.policy, str(report.n_seeds), str(report.n_frames)]
    stats = [report.actions[a.name] for a in params.action_set]
    row.extend(_fmt_pct(s.freq_pct) for s in stats)
    row.extend(_fmt_pct(s.amap_pct) for s in stats)
    row.extend(_fmt_pct(s.realized_amap_pct) for s in stats)
    row.append(_fmt_pct(report.risky_pct))
    row.append(_fmt_pct(report.robust_pct))
    row.append(repr(report.total_energy_j))
    row.append(_fmt_pct(report.energy_reduction_pct))
    row.append(_fmt_pct(report.deadline_miss_pct))
    row.append(repr(report.mean_reward))
    return row


def write_eval_reports(reports, params: SystemParams, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(eval_report_header(params)) + "\n")
        for report in reports:
            fh.write(",".join(eval_report_row(report, params)) + "\n")


@dataclass(slots=True)
class SweepRow:
    swept_value: float
    l_total_ms: dict[str, float]
    e_total_j: dict[str, float]
    feasible: dict[str, bool]


def _sweep_row(params: SystemParams, value: float, phi: float, q: float) -> SweepRow:
    l_total, e_total, feas = {}, {}, {}
    for action in params.action_set:
        cb = total_cost(params, action, phi, phi, q)
        l_total[action.name] = cb.l_total_ms
        e_total[action.name] = cb.e_total_j
        feas[action.name] = cb.l_total_ms <= params.l_th_ms
    return SweepRow(value, l_total, e_total, feas)


def sweep_channel(params: SystemParams, phi_grid, fixed_q_ms: float) -> list[SweepRow]:
    """Deterministic cost table over uplink capacities at a fixed queue delay."""
    rows = [_sweep_row(params, phi, phi, fixed_q_ms) for phi in phi_grid]
    if not rows:
        raise ValueError("empty sweep grid")
    return rows


def sweep_queue(params: SystemParams, q_grid, fixed_phi_mbps: float) -> list[SweepRow]:
    """Deterministic cost table over queue delays at a fixed capacity."""
    rows = [_sweep_row(params, q, fixed_phi_mbps, q) for q in q_grid]
    if not rows:
        raise ValueError("empty sweep grid")
    return rows


def sweep_header(params: SystemParams, swept_name: str) -> list[str]:
    cols = [swept_name]
    for action in params.action_set:
        cols.extend(
            (
                f"l_total_ms_{action.name}",
                f"e_total_j_{action.name}",
                f"feasible_{action.name}",
            )
        )
    return cols


def write_sweep(rows, params: SystemParams, swept_name: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(sweep_header(params, swept_name)) + "\n")
        for row in rows:
            cells = [repr(float(row.swept_value))]
            for action in params.action_set:
                cells.append(repr(row.l_total_ms[action.name]))
                cells.append(repr(row.e_total_j[action.name]))
                cells.append("1" if row.feasible[action.name] else "0")
            fh.write(",".join(cells) + "\n")
