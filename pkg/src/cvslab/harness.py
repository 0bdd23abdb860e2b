"""Seeded experiment harness.

An experiment is (environment, algorithm, hyper-parameters, episodes, runs,
seed).  Run ``i`` draws its generator from ``SeedSequence(seed, spawn_key=(i,))``,
so results are bit-reproducible from the config alone and independent of run
order or worker count.  Runs may execute in parallel processes; the
``CVS_LAB_THREADS`` environment variable caps the worker count (default: the
number of available processors).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .agents import (
    ALGORITHM_NAMES,
    ORDER_ACCUMULATE,
    ORDER_LITERAL,
    EligibilityTraces,
    cvs_episode,
    mc_episode,
    n_step_sarsa_episode,
    q_learning_episode,
    watkins_qlambda_episode,
)
from .core import AgentParams, Environment, QTable, greedy_actions
from .roadtree import BUILTIN_TREES, RoadTreeEnv, TreeSpec, fig6_tree, optimal_return_oracle
from .shooter import ShooterConfig, ShooterEnv
from .tennis import TennisConfig, TennisEnv

ENVIRONMENT_NAMES = (
    "roadtree:fig1",
    "roadtree:fig3",
    "roadtree:fig4",
    "roadtree:fig6",
    "roadtree",
    "shooter",
    "tennis",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def make_env(env_cfg: dict) -> Environment:
    """Build an environment from its config block (``name`` plus parameters)."""
    if not isinstance(env_cfg, dict):
        raise ConfigError("environment", "must be an object with a 'name' entry")
    name = env_cfg.get("name")
    if not isinstance(name, str):
        raise ConfigError("environment.name", "missing or not a string")
    params = {k: v for k, v in env_cfg.items() if k != "name"}

    def reject_unknown() -> None:
        if params:
            key = sorted(params)[0]
            raise ConfigError(f"environment.{key}", "unknown environment parameter")

    if name.startswith("roadtree:"):
        variant = name.split(":", 1)[1]
        if variant not in BUILTIN_TREES:
            raise ConfigError("environment.name", f"unknown built-in tree {variant!r}")
        if variant == "fig6":
            k = params.pop("k", 10)
            distance = params.pop("distance", 10)
            reject_unknown()
            try:
                return RoadTreeEnv(fig6_tree(k=int(k), distance=int(distance)))
            except (TypeError, ValueError) as exc:
                raise ConfigError("environment.k", str(exc)) from exc
        reject_unknown()
        return RoadTreeEnv(BUILTIN_TREES[variant]())
    if name == "roadtree":
        tree_doc = params.pop("tree", None)
        reject_unknown()
        if tree_doc is None:
            raise ConfigError("environment.tree", "a custom roadtree needs a 'tree' document")
        try:
            return RoadTreeEnv(TreeSpec.from_dict(tree_doc))
        except ValueError as exc:
            raise ConfigError("environment.tree", str(exc)) from exc
    if name == "shooter":
        obstacle_rows = params.pop("obstacle_rows", (4, 5, 6))
        max_steps = params.pop("max_steps", 200)
        reject_unknown()
        try:
            return ShooterEnv(ShooterConfig(tuple(obstacle_rows), int(max_steps)))
        except (TypeError, ValueError) as exc:
            raise ConfigError("environment.obstacle_rows", str(exc)) from exc
    if name == "tennis":
        p_optimal = params.pop("p_optimal", 0.8)
        max_steps = params.pop("max_steps", 1000)
        reject_unknown()
        try:
            return TennisEnv(TennisConfig(float(p_optimal), int(max_steps)))
        except (TypeError, ValueError) as exc:
            raise ConfigError("environment.p_optimal", str(exc)) from exc
    raise ConfigError("environment.name", f"unknown environment {name!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    environment: dict = field(default_factory=lambda: {"name": "roadtree:fig3"})
    algorithm: str = "cvs"
    params: AgentParams = AgentParams()
    episodes: int = 100
    runs: int = 1
    seed: int = 0
    window: int = 10
    q_init: float = 0.0
    cvs_order: str = ORDER_ACCUMULATE

    def validate(self) -> None:
        if self.algorithm not in ALGORITHM_NAMES:
            raise ConfigError("algorithm", f"unknown algorithm {self.algorithm!r}")
        if not isinstance(self.episodes, int) or self.episodes < 1:
            raise ConfigError("episodes", "must be a positive integer")
        if not isinstance(self.runs, int) or self.runs < 1:
            raise ConfigError("runs", "must be a positive integer")
        if not isinstance(self.seed, int):
            raise ConfigError("seed", "must be an integer")
        if not isinstance(self.window, int) or self.window < 1:
            raise ConfigError("window", "must be a positive integer")
        if self.cvs_order not in (ORDER_ACCUMULATE, ORDER_LITERAL):
            raise ConfigError("cvs_order", f"must be '{ORDER_ACCUMULATE}' or '{ORDER_LITERAL}'")
        make_env(self.environment)


@dataclass
class RunResult:
    """Per-episode returns of one run, plus the greedy-vs-oracle flag where
    the environment has an exact oracle (road trees)."""

    returns: list[float]
    greedy_optimal: list[bool] | None = None


def greedy_policy_return(env: Environment, q: QTable, max_steps: int = 100_000) -> float:
    """Roll out the greedy policy (ties to the lowest action) and sum rewards.

    Only meaningful on deterministic environments such as road trees.
    """
    rng = np.random.default_rng(0)
    s = env.reset(rng)
    total = 0.0
    for _ in range(max_steps):
        a = greedy_actions(q, s)[0]
        tr = env.step(s, a, rng)
        total += tr.reward
        if tr.terminal:
            return total
        s = tr.next_state
    raise RuntimeError("greedy rollout did not terminate")


def _run_one(cfg: ExperimentConfig, run_index: int) -> RunResult:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(run_index,)))
    env = make_env(cfg.environment)
    q = QTable.for_env(env, cfg.q_init)
    params = cfg.params
    algorithm = cfg.algorithm
    traces = EligibilityTraces() if algorithm == "qlambda" else None
    h = env.criticality() if algorithm == "cvs" else None

    oracle_return: float | None = None
    flags: list[bool] | None = None
    if isinstance(env, RoadTreeEnv):
        oracle_return, _ = optimal_return_oracle(env)
        flags = []

    returns: list[float] = []
    for _ in range(cfg.episodes):
        if algorithm == "cvs":
            log = cvs_episode(env, q, h, params, rng, order=cfg.cvs_order)
        elif algorithm == "qlearning":
            log = q_learning_episode(env, q, params, rng)
        elif algorithm == "nstep_sarsa":
            log = n_step_sarsa_episode(env, q, params, rng)
        elif algorithm == "qlambda":
            log = watkins_qlambda_episode(env, q, traces, params, rng)
        elif algorithm == "mc":
            log = mc_episode(env, q, params, rng)
        else:  # pragma: no cover - validate() rejects this earlier
            raise ConfigError("algorithm", f"unknown algorithm {algorithm!r}")
        returns.append(log.total_reward)
        if flags is not None:
            flags.append(greedy_policy_return(env, q) == oracle_return)
    return RunResult(returns, flags)


def _resolve_workers(max_workers: int | None) -> int:
    if max_workers is not None:
        if max_workers < 1:
            raise ConfigError("max_workers", "must be a positive integer")
        return max_workers
    raw = os.environ.get("CVS_LAB_THREADS")
    if raw is not None:
        try:
            value = int(raw)
        except ValueError:
            value = 0
        if value < 1:
            raise ConfigError("CVS_LAB_THREADS", f"must be a positive integer, got {raw!r}")
        return value
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux fallback
        return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, max_workers: int | None = None) -> list[RunResult]:
    """Execute all runs of an experiment; results are ordered by run index."""
    cfg.validate()
    workers = min(_resolve_workers(max_workers), cfg.runs)
    if workers <= 1:
        return [_run_one(cfg, i) for i in range(cfg.runs)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_one, cfg, i) for i in range(cfg.runs)]
        return [f.result() for f in futures]


# ----------------------------------------------------------------------
# Curve utilities
# ----------------------------------------------------------------------


def running_average(series, window: int) -> list[float]:
    """Trailing mean over ``window`` points; shorter prefixes average what exists."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    values = np.asarray(series, dtype=np.float64)
    if values.size == 0:
        return []
    csum = np.cumsum(values)
    out = np.empty_like(values)
    if values.size <= window:
        out[:] = csum / np.arange(1, values.size + 1)
    else:
        out[:window] = csum[:window] / np.arange(1, window + 1)
        out[window:] = (csum[window:] - csum[:-window]) / window
    return out.tolist()


def average_over_runs(results: list[RunResult]) -> list[float]:
    """Element-wise mean of per-run return series (all runs same length)."""
    if not results:
        raise ValueError("no runs to average")
    lengths = {len(r.returns) for r in results}
    if len(lengths) != 1:
        raise ValueError(f"runs have differing episode counts: {sorted(lengths)}")
    stacked = np.array([r.returns for r in results], dtype=np.float64)
    return stacked.mean(axis=0).tolist()


def episodes_to_threshold(curve, threshold: float) -> int | None:
    """First index at which ``curve`` reaches ``threshold``, or None."""
    for i, v in enumerate(curve):
        if v >= threshold:
            return i
    return None


def episodes_to_convergence(flags) -> int | None:
    """Episode count (1-based) after which the flag stays True to the end.

    ``None`` when the final flag is False (never converged) or the series is
    empty.
    """
    flags = list(flags)
    if not flags or not flags[-1]:
        return None
    i = len(flags)
    while i > 0 and flags[i - 1]:
        i -= 1
    return i + 1
