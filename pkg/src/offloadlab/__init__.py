"""Trace-driven simulator and policy laboratory for multi-sensor task offloading.

The package models a perception stack of N sensor pipelines that can ship the
tail of the i lowest-value pipelines to an edge server over a fading uplink,
and asks when doing so is worth the latency and accuracy risk.  It provides
the deterministic cost model, stochastic channel and server-queue models, a
synthetic scenario generator, a gym-style environment with a piecewise
penalty-based reward, a from-scratch double-DQN agent, baseline policies, and
batch evaluation utilities.  Everything is numpy-only and reproducible from
seeds.
"""

__version__ = "0.1.0"

from .agent import (
    QNetwork,
    ReplayBuffer,
    TrainConfig,
    TrainingDiverged,
    act,
    ddqn_target,
    epsilon_at,
    load_checkpoint,
    save_checkpoint,
    train,
    train_step,
    write_training_log,
)
from .channel import (
    ChannelModel,
    capacity_from_uniform,
    fit_rayleigh,
    read_rate_trace,
    sample_capacities,
    sample_capacity,
)
from .config import (
    ConfigError,
    channel_model,
    dump_config,
    generator_params,
    parse_config_file,
    parse_overrides,
    queue_model,
    resolve_config,
    reward_params,
    system_params,
    train_config,
)
from .cost import (
    Action,
    CostBreakdown,
    SystemParams,
    comm_cost,
    energy_local,
    feasible_actions,
    latency_local,
    min_energy_feasible,
    total_cost,
)
from .env import OffloadEnv, RewardParams, State, StepResult, compute_reward, reward_with_case
from .metrics import (
    EvalReport,
    evaluate,
    sweep_channel,
    sweep_queue,
    write_eval_reports,
    write_sweep,
)
from .policies import (
    DrlPolicy,
    LocalPolicy,
    OraclePolicy,
    PolicyDecision,
    RAgnosticPolicy,
    drl_policy,
    local_policy,
    make_policy,
    oracle_policy,
    r_agnostic_policy,
)
from .queueing import (
    QueueModel,
    mean_delay_ms,
    queue_pmf,
    sample_delay,
    sample_delays,
    sample_position,
)
from .scenario import (
    FrameRecord,
    GeneratorParams,
    ScenarioTrace,
    generate_synthetic,
    load_trace,
    realized_map,
    save_trace,
)

__all__ = [
    "__version__",
    "Action",
    "ChannelModel",
    "ConfigError",
    "CostBreakdown",
    "DrlPolicy",
    "EvalReport",
    "FrameRecord",
    "GeneratorParams",
    "LocalPolicy",
    "OffloadEnv",
    "OraclePolicy",
    "PolicyDecision",
    "QNetwork",
    "QueueModel",
    "RAgnosticPolicy",
    "ReplayBuffer",
    "RewardParams",
    "ScenarioTrace",
    "State",
    "StepResult",
    "SystemParams",
    "TrainConfig",
    "TrainingDiverged",
    "act",
    "capacity_from_uniform",
    "channel_model",
    "comm_cost",
    "compute_reward",
    "ddqn_target",
    "drl_policy",
    "dump_config",
    "energy_local",
    "epsilon_at",
    "evaluate",
    "feasible_actions",
    "fit_rayleigh",
    "generate_synthetic",
    "generator_params",
    "latency_local",
    "load_checkpoint",
    "load_trace",
    "local_policy",
    "make_policy",
    "mean_delay_ms",
    "min_energy_feasible",
    "oracle_policy",
    "parse_config_file",
    "parse_overrides",
    "queue_model",
    "queue_pmf",
    "r_agnostic_policy",
    "read_rate_trace",
    "realized_map",
    "resolve_config",
    "reward_params",
    "reward_with_case",
    "sample_capacities",
    "sample_capacity",
    "sample_delay",
    "sample_delays",
    "sample_position",
    "save_checkpoint",
    "save_trace",
    "sweep_channel",
    "sweep_queue",
    "system_params",
    "total_cost",
    "train",
    "train_config",
    "train_step",
    "write_eval_reports",
    "write_sweep",
    "write_training_log",
]
