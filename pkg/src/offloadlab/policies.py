"""Decision policies compared in the laboratory.

Every policy sees the same observations the agent would (frame features,
probed channel capacity, probed queue delay); the oracle additionally reads
the current frame's full-fusion quality, which no runtime policy could.
"""

from __future__ import annotations

from dataclasses import dataclass

from .agent import QNetwork, act
from .cost import Action, SystemParams, min_energy_feasible
from .env import State

TAG_LOCAL = "local_fixed"
TAG_ENERGY = "energy_min"
TAG_OVERRIDE = "robustness_override"
TAG_GREEDY = "q_greedy"


@dataclass(frozen=True, slots=True)
class PolicyDecision:
    action: Action
    rationale_tag: str


def local_policy(state: State | None = None) -> PolicyDecision:
    """Never offload."""
    return PolicyDecision(Action(0), TAG_LOCAL)


def r_agnostic_policy(params: SystemParams, phi_obs: float, q_obs: float) -> PolicyDecision:
    """Energy-greedy under the probed draw, blind to frame difficulty."""
    action = min_energy_feasible(params, phi_obs, phi_obs, q_obs)
    return PolicyDecision(action, TAG_ENERGY)


def oracle_policy(
    params: SystemParams, phi_obs: float, q_obs: float, frame_map_full: float
) -> PolicyDecision:
    """Energy-greedy, except it keeps low-confidence frames on the vehicle."""
    if frame_map_full < params.map_th:
        return PolicyDecision(Action(0), TAG_OVERRIDE)
    return PolicyDecision(min_energy_feasible(params, phi_obs, phi_obs, q_obs), TAG_ENERGY)


def drl_policy(net: QNetwork, state: State) -> PolicyDecision:
    """Greedy over the learned action values."""
    return PolicyDecision(net.actions[act(net, state, 0.0)], TAG_GREEDY)


class Policy:
    """Uniform callable interface used by the evaluation harness."""

    name = "policy"

    def decide(self, state: State, frame_map_full: float) -> PolicyDecision:
        raise NotImplementedError


class LocalPolicy(Policy):
    name = "local"

    def decide(self, state, frame_map_full):
        return local_policy(state)


class RAgnosticPolicy(Policy):
    name = "ragnostic"

    def __init__(self, params: SystemParams):
        self.params = params

    def decide(self, state, frame_map_full):
        return r_agnostic_policy(self.params, state.phi_obs, state.q_obs)


class OraclePolicy(Policy):
    name = "oracle"

    def __init__(self, params: SystemParams):
        self.params = params

    def decide(self, state, frame_map_full):
        return oracle_policy(self.params, state.phi_obs, state.q_obs, frame_map_full)


class DrlPolicy(Policy):
    name = "drl"

    def __init__(self, net: QNetwork):
        self.net = net

    def decide(self, state, frame_map_full):
        return drl_policy(self.net, state)


def make_policy(name: str, params: SystemParams, net: QNetwork | None = None) -> Policy:
    if name == "local":
        return LocalPolicy()
    if name == "ragnostic":
        return RAgnosticPolicy(params)
    if name == "oracle":
        return OraclePolicy(params)
    if name == "drl":
        if net is None:
            raise ValueError("drl policy needs a trained network")
        return DrlPolicy(net)
    raise ValueError(f"unknown policy {name!r}; expected local, ragnostic, oracle, or drl")
