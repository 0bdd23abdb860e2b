from __future__ import annotations

import numpy as np
import pytest

from cvslab import (
    AgentParams,
    ConfigError,
    ExperimentConfig,
    QTable,
    RoadTreeEnv,
    RunResult,
    ShooterEnv,
    TennisEnv,
    average_over_runs,
    episodes_to_convergence,
    episodes_to_threshold,
    fig3_tree,
    greedy_policy_return,
    make_env,
    q_update,
    run_experiment,
    running_average,
)
from cvslab.harness import _run_one


def small_cfg(**overrides):
    base = dict(
        environment={"name": "roadtree:fig3"},
        algorithm="cvs",
        params=AgentParams(),
        episodes=10,
        runs=3,
        seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_running_average_spec_examples():
    assert running_average([1, 1, 1], 2) == [1, 1, 1]
    assert running_average([0, 2, 4], 2) == [0, 1, 3]
    assert running_average([7], 100) == [7]


def test_running_average_window_and_prefix():
    out = running_average([0, 0, 0, 4, 4, 4], 3)
    assert out == [0, 0, 0, 4 / 3, 8 / 3, 4]
    assert running_average([], 5) == []
    with pytest.raises(ValueError):
        running_average([1.0], 0)


def test_episodes_to_threshold_index_semantics():
    assert episodes_to_threshold([-1, 0, 1], 0) == 1
    assert episodes_to_threshold([5], 0) == 0
    assert episodes_to_threshold([-1, -1], 0) is None
    assert episodes_to_threshold([], 0) is None


def test_episodes_to_convergence():
    assert episodes_to_convergence([]) is None
    assert episodes_to_convergence([True]) == 1
    assert episodes_to_convergence([False, True, True]) == 2
    assert episodes_to_convergence([True, False, True]) == 3
    assert episodes_to_convergence([True, True, False]) is None
    assert episodes_to_convergence([True] * 5) == 1


def test_average_over_runs():
    results = [RunResult([1.0, 2.0]), RunResult([3.0, 6.0])]
    assert average_over_runs(results) == [2.0, 4.0]
    with pytest.raises(ValueError, match="no runs"):
        average_over_runs([])
    with pytest.raises(ValueError, match="differing episode counts"):
        average_over_runs([RunResult([1.0]), RunResult([1.0, 2.0])])


def test_make_env_builds_every_name():
    assert isinstance(make_env({"name": "roadtree:fig1"}), RoadTreeEnv)
    assert isinstance(make_env({"name": "roadtree:fig6", "k": 3, "distance": 2}), RoadTreeEnv)
    assert isinstance(make_env({"name": "shooter", "max_steps": 50}), ShooterEnv)
    assert isinstance(make_env({"name": "tennis", "p_optimal": 0.5}), TennisEnv)
    custom = {"name": "roadtree", "tree": fig3_tree().to_dict()}
    env = make_env(custom)
    assert isinstance(env, RoadTreeEnv)
    assert env.tree == fig3_tree()


@pytest.mark.parametrize(
    "cfg, key",
    [
        ({"name": "nowhere"}, "environment.name"),
        ({"name": "roadtree:fig9"}, "environment.name"),
        ({}, "environment.name"),
        ({"name": "shooter", "bogus": 1}, "environment.bogus"),
        ({"name": "roadtree"}, "environment.tree"),
        ({"name": "roadtree", "tree": {"root": 0}}, "environment.tree"),
        ({"name": "tennis", "p_optimal": 7}, "environment.p_optimal"),
        ({"name": "shooter", "obstacle_rows": [55]}, "environment.obstacle_rows"),
        ({"name": "roadtree:fig6", "k": 0}, "environment.k"),
    ],
)
def test_make_env_names_offending_key(cfg, key):
    with pytest.raises(ConfigError) as info:
        make_env(cfg)
    assert info.value.key == key


def test_config_validation_names_offending_key():
    cases = [
        (small_cfg(algorithm="sarsa99"), "algorithm"),
        (small_cfg(episodes=0), "episodes"),
        (small_cfg(runs=0), "runs"),
        (small_cfg(seed=1.5), "seed"),
        (small_cfg(window=0), "window"),
        (small_cfg(cvs_order="sideways"), "cvs_order"),
        (small_cfg(environment={"name": "nope"}), "environment.name"),
    ]
    for cfg, key in cases:
        with pytest.raises(ConfigError) as info:
            cfg.validate()
        assert info.value.key == key, key


def test_run_experiment_is_reproducible():
    cfg = small_cfg()
    first = run_experiment(cfg, max_workers=1)
    second = run_experiment(cfg, max_workers=1)
    assert [r.returns for r in first] == [r.returns for r in second]
    assert [r.greedy_optimal for r in first] == [r.greedy_optimal for r in second]


def test_runs_are_independent_of_execution_order():
    cfg = small_cfg()
    whole = run_experiment(cfg, max_workers=1)
    for i in range(cfg.runs):
        alone = _run_one(cfg, i)
        assert alone.returns == whole[i].returns


def test_parallel_runs_match_sequential():
    cfg = small_cfg(runs=4)
    sequential = run_experiment(cfg, max_workers=1)
    parallel = run_experiment(cfg, max_workers=2)
    assert [r.returns for r in sequential] == [r.returns for r in parallel]
    assert [r.greedy_optimal for r in sequential] == [r.greedy_optimal for r in parallel]


def test_worker_env_var_is_validated(monkeypatch):
    cfg = small_cfg(runs=2)
    monkeypatch.setenv("CVS_LAB_THREADS", "nonsense")
    with pytest.raises(ConfigError, match="CVS_LAB_THREADS"):
        run_experiment(cfg)
    monkeypatch.setenv("CVS_LAB_THREADS", "0")
    with pytest.raises(ConfigError, match="CVS_LAB_THREADS"):
        run_experiment(cfg)
    monkeypatch.setenv("CVS_LAB_THREADS", "1")
    assert len(run_experiment(cfg)) == 2


def test_explicit_worker_count_is_validated():
    with pytest.raises(ConfigError, match="max_workers"):
        run_experiment(small_cfg(), max_workers=0)


def test_result_shapes():
    cfg = small_cfg(episodes=7, runs=2)
    results = run_experiment(cfg, max_workers=1)
    assert len(results) == 2
    for r in results:
        assert len(r.returns) == 7
        assert len(r.greedy_optimal) == 7


def test_oracle_flags_only_on_road_trees():
    cfg = small_cfg(
        environment={"name": "shooter", "max_steps": 30}, episodes=2, runs=1, algorithm="qlearning"
    )
    result = run_experiment(cfg, max_workers=1)[0]
    assert result.greedy_optimal is None


def test_every_algorithm_runs_end_to_end():
    for algorithm in ("cvs", "qlearning", "nstep_sarsa", "qlambda", "mc"):
        cfg = small_cfg(algorithm=algorithm, episodes=3, runs=1)
        result = run_experiment(cfg, max_workers=1)[0]
        assert len(result.returns) == 3
        assert all(v in (1.0, 2.0) for v in result.returns)


def test_greedy_policy_return_follows_the_table():
    env = RoadTreeEnv(fig3_tree())
    q = QTable.for_env(env)
    # all-zero table ties at the root; ties resolve to the lower action
    assert greedy_policy_return(env, q) == 1.0
    q_update(q, env.root_state, 1, 1.0, 1.0)
    assert greedy_policy_return(env, q) == 2.0


def test_q_init_seeds_the_tables():
    cfg = small_cfg(q_init=5.0, episodes=1, runs=1)
    optimistic = run_experiment(cfg, max_workers=1)[0]
    assert optimistic.returns[0] in (1.0, 2.0)
