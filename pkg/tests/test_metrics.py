import csv
import math

import numpy as np
import pytest

from offloadlab.channel import ChannelModel
from offloadlab.cost import Action, SystemParams, total_cost
from offloadlab.metrics import (
    evaluate,
    eval_report_header,
    eval_report_row,
    sweep_channel,
    sweep_header,
    sweep_queue,
    write_eval_reports,
    write_sweep,
)
from offloadlab.policies import LocalPolicy, OraclePolicy, RAgnosticPolicy
from offloadlab.queueing import QueueModel

A0, A2, A3 = Action(0), Action(2), Action(3)


def _eval(policy, trace, params=None, seeds=3, rho=0.9, **kw):
    return evaluate(
        policy,
        trace,
        ChannelModel(sigma=8.0),
        QueueModel(rho=rho),
        params if params is not None else SystemParams(),
        seeds=seeds,
        **kw,
    )


def test_local_policy_report_structure(small_trace):
    r = _eval(LocalPolicy(), small_trace)
    assert r.actions["offload_0"].freq_pct == 100.0
    assert r.actions["offload_2"].count == 0
    assert math.isnan(r.actions["offload_2"].amap_pct)
    assert r.energy_reduction_pct == pytest.approx(0.0, abs=1e-9)
    assert r.risky_pct == 0.0
    assert r.robust_pct == 100.0
    assert r.deadline_miss_pct == 0.0
    assert r.n_frames == len(small_trace)


def test_frequencies_sum_to_one_hundred(small_trace, params):
    for pol in (LocalPolicy(), RAgnosticPolicy(params), OraclePolicy(params)):
        r = _eval(pol, small_trace)
        total = sum(s.freq_pct for s in r.actions.values())
        assert total == pytest.approx(100.0, abs=0.01)


def test_risky_plus_robust_partition_offloads(small_trace, params):
    r = _eval(RAgnosticPolicy(params), small_trace)
    assert r.risky_pct + r.robust_pct == pytest.approx(100.0, abs=0.01)


def test_weighted_amap_recovers_trace_mean(small_trace, params):
    r = _eval(RAgnosticPolicy(params), small_trace)
    mix = sum(
        s.freq_pct / 100.0 * s.amap_pct for s in r.actions.values() if s.count > 0
    )
    want = np.mean(small_trace.map_full_values()) * 100.0
    assert mix == pytest.approx(want, abs=1e-9)


def test_energy_accounting_reconciles_with_steps(small_trace, params):
    r = _eval(RAgnosticPolicy(params), small_trace, seeds=2, keep_steps=True)
    pooled = sum(s.e_total_j for s in r.steps)
    assert r.total_energy_j == pytest.approx(pooled / 2, abs=1e-9)


def test_oracle_never_offloads_hard_frames(small_trace, params):
    r = _eval(OraclePolicy(params), small_trace, seeds=5)
    assert r.risky_pct == 0.0


def test_evaluate_is_deterministic(small_trace, params):
    a = _eval(RAgnosticPolicy(params), small_trace, seeds=[0, 1])
    b = _eval(RAgnosticPolicy(params), small_trace, seeds=[0, 1])
    assert a == b


def test_seed_list_and_count_agree(small_trace, params):
    a = _eval(RAgnosticPolicy(params), small_trace, seeds=3)
    b = _eval(RAgnosticPolicy(params), small_trace, seeds=[0, 1, 2])
    assert a == b


def test_energy_reduction_against_local_baseline(small_trace, params):
    r = _eval(RAgnosticPolicy(params), small_trace, seeds=2)
    e_local = total_cost(params, A0, 1.0, 1.0, 0.0).e_total_j * len(small_trace)
    want = (1.0 - r.total_energy_j / e_local) * 100.0
    assert r.energy_reduction_pct == pytest.approx(want, abs=1e-9)
    assert r.energy_reduction_pct > 0.0


def test_report_row_formatting(small_trace, params):
    header = eval_report_header(params)
    r = _eval(LocalPolicy(), small_trace, seeds=2)
    row = eval_report_row(r, params)
    assert len(row) == len(header)
    assert row[0] == "local"
    m = dict(zip(header, row))
    assert m["freq_pct_offload_0"] == "100.00"
    assert m["amap_pct_offload_2"] == "nan"
    assert m["risky_pct"] == "0.00"
    assert float(m["total_energy_j"]) == r.total_energy_j


def test_write_eval_reports_is_stable(tmp_path, small_trace, params):
    r = _eval(LocalPolicy(), small_trace, seeds=2)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_eval_reports([r], params, p1)
    write_eval_reports([r], params, p2)
    assert p1.read_bytes() == p2.read_bytes()
    rows = list(csv.DictReader(p1.read_text().splitlines()))
    assert rows[0]["policy"] == "local"


def test_sweep_channel_crossovers():
    # frozen from the deadline algebra: with q=15 ms and no downlink payload,
    # offload_2 turns feasible past 185.12/38 Mbps and offload_3 past 277.68/38
    p = SystemParams(b_down_kbit=0.0)
    grid = [2.0, 3.0, 4.0, 4.5, 5.0, 6.0, 7.0, 7.5, 8.0, 10.0, 12.0]
    rows = sweep_channel(p, grid, fixed_q_ms=15.0)
    feas2 = {r.swept_value: r.feasible["offload_2"] for r in rows}
    feas3 = {r.swept_value: r.feasible["offload_3"] for r in rows}
    assert not feas2[4.5] and feas2[5.0]
    assert not feas3[7.0] and feas3[7.5]
    assert all(r.feasible["offload_0"] for r in rows)


def test_sweep_energy_ordering(params):
    rows = sweep_channel(params, [2 + 0.5 * i for i in range(21)], fixed_q_ms=15.0)
    for r in rows:
        assert r.e_total_j["offload_3"] < r.e_total_j["offload_2"] < r.e_total_j["offload_0"]


def test_sweep_channel_latency_decreases_with_capacity(params):
    rows = sweep_channel(params, [2.0, 4.0, 8.0, 16.0], fixed_q_ms=15.0)
    l2 = [r.l_total_ms["offload_2"] for r in rows]
    assert l2 == sorted(l2, reverse=True)
    assert all(r.l_total_ms["offload_0"] == pytest.approx(68.12) for r in rows)


def test_sweep_queue_zero_matches_channel_row(params):
    qrow = sweep_queue(params, [0.0], fixed_phi_mbps=8.0)[0]
    crow = sweep_channel(params, [8.0], fixed_q_ms=0.0)[0]
    assert qrow.l_total_ms == crow.l_total_ms
    assert qrow.e_total_j == crow.e_total_j


def test_sweep_queue_additive_has_unit_slope(params):
    p = params.with_updates(latency_composition="additive")
    rows = sweep_queue(p, [0.0, 10.0, 20.0], fixed_phi_mbps=8.0)
    for a in ("offload_2", "offload_3"):
        deltas = [
            rows[i + 1].l_total_ms[a] - rows[i].l_total_ms[a] for i in range(len(rows) - 1)
        ]
        assert deltas == pytest.approx([10.0, 10.0], rel=1e-12)
    assert rows[0].l_total_ms["offload_0"] == rows[2].l_total_ms["offload_0"]


def test_sweep_queue_large_delay_kills_offloads(params):
    row = sweep_queue(params, [500.0], fixed_phi_mbps=8.0)[0]
    assert row.feasible["offload_0"]
    assert not row.feasible["offload_2"]
    assert not row.feasible["offload_3"]


def test_write_sweep_format(tmp_path, params):
    rows = sweep_channel(params, [2.0, 8.0], fixed_q_ms=15.0)
    path = tmp_path / "sweep.csv"
    write_sweep(rows, params, "phi_mbps", path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(sweep_header(params, "phi_mbps"))
    first = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert first["phi_mbps"] == "2.0"
    assert first["feasible_offload_0"] == "1"
    assert first["feasible_offload_2"] == "0"


def test_sweep_rejects_empty_grid(params):
    with pytest.raises(ValueError):
        sweep_channel(params, [], fixed_q_ms=15.0)
    with pytest.raises(ValueError):
        sweep_queue(params, [], fixed_phi_mbps=8.0)
