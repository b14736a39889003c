"""Flat key-value configuration shared by the CLI and the experiment helpers.

Files hold one ``key = value`` pair per line with ``#`` comments. Keys match
the dataclass field names; scenario-generator keys live under ``scenario.``
and training keys under ``train.``. Precedence: command-line overrides beat
the file, which beats the built-in defaults.
"""

from __future__ import annotations

from .agent import TrainConfig
from .channel import ChannelModel
from .cost import Action, SystemParams
from .env import RewardParams
from .queueing import QueueModel
from .scenario import GeneratorParams


class ConfigError(ValueError):
    pass


def _fmt_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt_value(v) for v in value)
    return str(value)


# key -> (parser kind, default, help); kinds: int, float, str,
# "ints" / "floats" for comma lists, "actions" for offload indices
DEFAULTS: dict[str, tuple[str, object, str]] = {
    "n_pipelines": ("int", 4, "number of sensor pipelines"),
    "l_encoder_ms": ("float", 3.78, "per-pipeline encoder latency"),
    "l_tail_ms": ("float", 13.25, "per-pipeline tail latency"),
    "p_local_w": ("float", 7.046, "on-vehicle compute power"),
    "p_tx_w": ("float", 1.3, "radio power while transmitting or receiving"),
    "p_idle_w": ("float", 0.0, "power while waiting on the server"),
    "b_up_kbit": ("float", 92.56, "uplink payload per offloaded pipeline"),
    "b_down_kbit": ("float", 4.0, "downlink payload per offloaded pipeline"),
    "l_th_ms": ("float", 68.12, "end-to-end latency deadline"),
    "map_th": ("float", 0.68, "robustness threshold on full-fusion quality"),
    "action_set": ("actions", (0, 2, 3), "offload counts available to policies"),
    "offload_order": ("strs", ("camera_left", "camera_right", "lidar"), "offload priority"),
    "latency_composition": ("str", "overlapped", "overlapped or additive"),
    "reward_basis": ("str", "observed", "energy-rank basis: observed or realized"),
    "p_penalty": ("float", -2.0, "penalty magnitude of the reward"),
    "sigma": ("float", 8.0, "Rayleigh scale of the uplink capacity, Mbit/s"),
    "floor_mbps": ("float", 0.1, "lower clamp on sampled capacity"),
    "rho": ("float", 0.9, "server utilization"),
    "queue_cap": ("int", 4000, "maximum queue position"),
    "t_service_ms": ("float", 1.5, "service time per queue slot"),
    "scenario.k": ("int", 16, "feature vector width"),
    "scenario.n_frames": ("int", 10000, "frames per generated trace"),
    "scenario.base": ("float", 0.85, "full-fusion quality of an easy scene"),
    "scenario.span": ("float", 0.5, "quality drop across the difficulty range"),
    "scenario.alpha": ("float", 0.95, "AR(1) persistence of scene difficulty"),
    "scenario.mu": ("float", 0.4, "stationary mean difficulty"),
    "scenario.z_noise": ("float", 0.05, "difficulty innovation spread"),
    "scenario.map_noise": ("float", 0.01, "observation noise on quality scores"),
    "scenario.feature_noise": ("float", 0.02, "noise on the feature embedding"),
    "scenario.deg_base": ("float", 0.02, "reduced-fusion drop per offloaded pipeline"),
    "scenario.deg_span": ("float", 0.10, "extra drop per pipeline on hard scenes"),
    "scenario.seed": ("int", 7, "generator seed"),
    "train.gamma": ("float", 0.9, "discount factor"),
    "train.lr": ("float", 1e-3, "learning rate"),
    "train.batch_size": ("int", 64, "replay batch size"),
    "train.buffer_capacity": ("int", 100000, "replay capacity"),
    "train.target_sync": ("int", 500, "steps between target syncs"),
    "train.eps_start": ("float", 1.0, "initial exploration rate"),
    "train.eps_end": ("float", 0.05, "final exploration rate"),
    "train.eps_decay_steps": ("int", 50000, "steps to reach eps_end"),
    "train.episodes": ("int", 6, "training episodes"),
    "train.seed": ("int", 0, "training seed"),
    "train.ctx_hidden": ("ints", (32,), "contextual encoder hidden sizes"),
    "train.ctx_out": ("int", 8, "contextual embedding width"),
    "train.state_hidden": ("ints", (64, 64), "head hidden sizes"),
    "train.phi_max_mbps": ("float", 20.0, "capacity normalizer for the network input"),
    "train.optimizer": ("str", "adam", "adam or sgd"),
    "train.loss_ceiling": ("float", 1000.0, "divergence detector threshold"),
    "train.loss_patience": ("int", 200, "steps above the ceiling before aborting"),
    "train.rho_cycle": ("floats", (0.9, 0.97, 0.99), "server loads cycled across episodes"),
}


def _parse_value(key: str, kind: str, raw) -> object:
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "str":
            return text
        if kind == "ints":
            return tuple(int(p) for p in text.split(",") if p.strip())
        if kind == "floats":
            return tuple(float(p) for p in text.split(",") if p.strip())
        if kind == "actions":
            return tuple(Action.parse(p).i for p in text.split(",") if p.strip())
        if kind == "strs":
            return tuple(p.strip() for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"config key {key}: cannot parse {raw!r} as {kind}") from None
    raise ConfigError(f"config key {key}: unknown kind {kind}")


def parse_config_file(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}: line {lineno}: expected key = value")
            key, _, value = text.partition("=")
            out[key.strip()] = value.strip()
    return out


def parse_overrides(pairs) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        out[key.strip()] = value.strip()
    return out


def resolve_config(file_values: dict | None = None, overrides: dict | None = None) -> dict:
    """Typed configuration dict after applying defaults < file < overrides."""
    merged: dict[str, object] = {key: default for key, (_, default, _) in DEFAULTS.items()}
    for source in (file_values or {}, overrides or {}):
        for key, raw in source.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = _parse_value(key, DEFAULTS[key][0], raw)
    return merged


def dump_config(cfg: dict | None = None) -> str:
    cfg = cfg if cfg is not None else resolve_config()
    lines = []
    for key, (_, _, help_text) in DEFAULTS.items():
        lines.append(f"# {help_text}")
        lines.append(f"{key} = {_fmt_value(cfg[key])}")
    return "\n".join(lines) + "\n"


def system_params(cfg: dict) -> SystemParams:
    try:
        return SystemParams(
            n_pipelines=cfg["n_pipelines"],
            l_encoder_ms=cfg["l_encoder_ms"],
            l_tail_ms=cfg["l_tail_ms"],
            p_local_w=cfg["p_local_w"],
            p_tx_w=cfg["p_tx_w"],
            p_idle_w=cfg["p_idle_w"],
            b_up_kbit=cfg["b_up_kbit"],
            b_down_kbit=cfg["b_down_kbit"],
            l_th_ms=cfg["l_th_ms"],
            map_th=cfg["map_th"],
            action_set=tuple(Action(i) for i in cfg["action_set"]),
            offload_order=tuple(cfg["offload_order"]),
            latency_composition=cfg["latency_composition"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def channel_model(cfg: dict) -> ChannelModel:
    try:
        return ChannelModel(sigma=cfg["sigma"], floor_mbps=cfg["floor_mbps"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def queue_model(cfg: dict, rho: float | None = None) -> QueueModel:
    try:
        return QueueModel(
            rho=cfg["rho"] if rho is None else rho,
            cap=cfg["queue_cap"],
            t_service_ms=cfg["t_service_ms"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def reward_params(cfg: dict) -> RewardParams:
    try:
        return RewardParams(p_penalty=cfg["p_penalty"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def generator_params(cfg: dict) -> GeneratorParams:
    try:
        return GeneratorParams(
            k=cfg["scenario.k"],
            base=cfg["scenario.base"],
            span=cfg["scenario.span"],
            alpha=cfg["scenario.alpha"],
            mu=cfg["scenario.mu"],
            z_noise=cfg["scenario.z_noise"],
            map_noise=cfg["scenario.map_noise"],
            feature_noise=cfg["scenario.feature_noise"],
            deg_base=cfg["scenario.deg_base"],
            deg_span=cfg["scenario.deg_span"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def train_config(cfg: dict) -> TrainConfig:
    try:
        return TrainConfig(
            gamma=cfg["train.gamma"],
            lr=cfg["train.lr"],
            batch_size=cfg["train.batch_size"],
            buffer_capacity=cfg["train.buffer_capacity"],
            target_sync=cfg["train.target_sync"],
            eps_start=cfg["train.eps_start"],
            eps_end=cfg["train.eps_end"],
            eps_decay_steps=cfg["train.eps_decay_steps"],
            episodes=cfg["train.episodes"],
            seed=cfg["train.seed"],
            ctx_hidden=cfg["train.ctx_hidden"],
            ctx_out=cfg["train.ctx_out"],
            state_hidden=cfg["train.state_hidden"],
            phi_max_mbps=cfg["train.phi_max_mbps"],
            optimizer=cfg["train.optimizer"],
            loss_ceiling=cfg["train.loss_ceiling"],
            loss_patience=cfg["train.loss_patience"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
