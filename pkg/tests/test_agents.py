from __future__ import annotations

import numpy as np
import pytest

from cvslab import (
    AgentParams,
    EligibilityTraces,
    Environment,
    QTable,
    RoadTreeEnv,
    ShooterEnv,
    Transition,
    TreeEdge,
    TreeNode,
    TreeSpec,
    cvs_episode,
    fig1_tree,
    fig3_tree,
    mc_episode,
    n_step_sarsa_episode,
    q_learning_episode,
    q_update,
    watkins_qlambda_episode,
)
from cvslab.agents import ORDER_ACCUMULATE, ORDER_LITERAL
from cvslab.roadtree import KIND_JUNCTION, KIND_TERMINAL

approx = lambda x: pytest.approx(x, rel=1e-12, abs=0.0)


class ChainEnv(Environment):
    """Single-action corridor: step i pays rewards[i], the last one terminates."""

    def __init__(self, rewards):
        self._rewards = tuple(float(r) for r in rewards)

    @property
    def num_states(self):
        return len(self._rewards) + 1

    @property
    def terminal(self):
        return len(self._rewards)

    def num_actions(self, s):
        return 0 if s == self.terminal else 1

    def reset(self, rng):
        return 0

    def step(self, s, a, rng):
        nxt = s + 1
        return Transition(self._rewards[s], nxt, nxt == self.terminal)

    def criticality(self):
        return lambda s: 1.0


def fresh(env, initial=0.0):
    return QTable.for_env(env, initial)


def rng_for(seed):
    return np.random.default_rng(np.random.SeedSequence(seed))


def test_q_learning_targets_on_chain():
    env = ChainEnv([0.5, 2.0])
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=0.5, epsilon=0.1)
    log = q_learning_episode(env, q, params, rng_for(0))
    assert log.total_reward == 2.5
    assert log.steps == 2
    assert q[0, 0] == approx(0.1 * (0.5 + 0.5 * 0.0))
    assert q[1, 0] == approx(0.1 * 2.0)
    q_learning_episode(env, q, params, rng_for(0))
    assert q[1, 0] == approx(0.2 + 0.1 * (2.0 - 0.2))
    assert q[0, 0] == approx(0.05 + 0.1 * (0.5 + 0.5 * 0.2 - 0.05))


def test_n_step_sarsa_two_step_targets():
    env = ChainEnv([1.0, 2.0])
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=0.5, n=2)
    n_step_sarsa_episode(env, q, params, rng_for(0))
    assert q[0, 0] == approx(0.1 * (1.0 + 0.5 * 2.0))
    assert q[1, 0] == approx(0.1 * 2.0)


def test_n_step_sarsa_bootstraps_inside_long_episodes():
    env = ChainEnv([0.0, 0.0, 1.0])
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=1.0, n=2)
    n_step_sarsa_episode(env, q, params, rng_for(0))
    assert q[0, 0] == 0.0
    assert q[1, 0] == approx(0.1)
    assert q[2, 0] == approx(0.1)
    n_step_sarsa_episode(env, q, params, rng_for(0))
    # second pass sees Q(2) = 0.1 through the two-step bootstrap
    assert q[0, 0] == approx(0.1 * (0.0 + 0.0 + 0.1))


def test_n_step_longer_than_episode_falls_back_to_full_return():
    env = ChainEnv([1.0, 2.0])
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=1.0, n=5)
    n_step_sarsa_episode(env, q, params, rng_for(0))
    assert q[0, 0] == approx(0.3)
    assert q[1, 0] == approx(0.2)


def test_mc_discounted_returns_on_chain():
    env = ChainEnv([1.0, 2.0])
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=0.5)
    log = mc_episode(env, q, params, rng_for(0))
    assert log.steps == 2
    assert q[0, 0] == approx(0.1 * (1.0 + 0.5 * 2.0))
    assert q[1, 0] == approx(0.1 * 2.0)


def test_watkins_trace_decay_on_chain():
    env = ChainEnv([0.0, 0.0, 1.0])
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=1.0, lam=0.9)
    watkins_qlambda_episode(env, q, EligibilityTraces(), params, rng_for(0))
    assert q[2, 0] == approx(0.1)
    assert q[1, 0] == approx(0.1 * 0.9)
    assert q[0, 0] == approx(0.1 * 0.81)


def test_eligibility_traces_operations():
    e = EligibilityTraces()
    assert len(e) == 0
    e.bump(3, 1)
    e.bump(3, 1)
    assert e.get(3, 1) == 2.0
    e.scale(0.5)
    assert e.get(3, 1) == 1.0
    e.bump(0, 0)
    assert len(e) == 2
    e.scale(0.0)
    assert len(e) == 0
    e.bump(1, 0)
    e.clear()
    assert e.get(1, 0) == 0.0


def mini_two_junction_tree() -> TreeSpec:
    return TreeSpec(
        root=0,
        nodes=(
            TreeNode(0, 0.0, KIND_JUNCTION),
            TreeNode(1, 3.0, KIND_JUNCTION),
            TreeNode(2, 5.0, KIND_TERMINAL),
        ),
        edges=(TreeEdge(0, 1, 2), TreeEdge(1, 2, 2)),
    )


def test_cvs_matures_at_the_first_critical_state():
    env = RoadTreeEnv(mini_two_junction_tree())
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=1.0)
    log = cvs_episode(env, q, env.criticality(), params, rng_for(0), record_updates=True)
    assert log.total_reward == 8.0
    j1 = env.node_state(1)
    root = env.root_state
    # pairs queued before the junction update toward it; later ones ride to the end
    assert q[root, 0] == approx(0.3)
    assert q[j1, 0] == approx(0.5)
    by_pair = {(u.state, u.action): u for u in log.updates}
    assert by_pair[(root, 0)].bootstrap == j1
    assert by_pair[(j1, 0)].bootstrap is None


def test_cvs_discounts_waiting_rewards():
    env = RoadTreeEnv(mini_two_junction_tree())
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=0.5)
    cvs_episode(env, q, env.criticality(), params, rng_for(0))
    root = env.root_state
    j1 = env.node_state(1)
    road1 = root + 1
    assert q[root, 0] == approx(0.1 * (0.5 * 3.0))
    assert q[road1, 0] == approx(0.1 * 3.0)
    assert q[j1, 0] == approx(0.1 * (0.5 * 5.0))


def test_cvs_literal_order_defers_maturity_one_step():
    env = RoadTreeEnv(mini_two_junction_tree())
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=1.0)
    log = cvs_episode(
        env, q, env.criticality(), params, rng_for(0), order=ORDER_LITERAL, record_updates=True
    )
    root = env.root_state
    j1 = env.node_state(1)
    by_pair = {(u.state, u.action): u for u in log.updates}
    # maturity is checked before the junction's criticality lands, so the
    # root pair bootstraps one state past the junction
    assert by_pair[(root, 0)].bootstrap == j1 + 1
    assert env.state_kind(j1 + 1) == "road"


def test_cvs_flushes_whole_branch_on_terminal():
    env = RoadTreeEnv(fig3_tree())
    q = fresh(env)
    params = AgentParams(alpha=0.1, gamma=1.0, epsilon=0.1)
    log = cvs_episode(env, q, env.criticality(), params, rng_for(5), record_trace=True)
    first_action = log.trace[0][1]
    branch_value = 2.0 if first_action == 1 else 1.0
    assert log.total_reward == branch_value
    for s, a, _r in log.trace:
        assert q[s, a] == approx(0.1 * branch_value)
    assert q[env.root_state, 1 - first_action] == 0.0


def test_cvs_rejects_criticality_outside_unit_interval():
    env = ChainEnv([0.0, 1.0])
    q = fresh(env)
    with pytest.raises(ValueError, match="criticality"):
        cvs_episode(env, q, lambda s: 1.5, AgentParams(), rng_for(0))


def test_cvs_rejects_unknown_order():
    env = ChainEnv([1.0])
    q = fresh(env)
    with pytest.raises(ValueError, match="order"):
        cvs_episode(env, q, lambda s: 1.0, AgentParams(), rng_for(0), order="bogus")


def test_watkins_cuts_traces_after_exploratory_action():
    env = RoadTreeEnv(fig3_tree())
    q = fresh(env)
    root = env.root_state
    q_update(q, root, 0, 0.5, 1.0)
    params = AgentParams(alpha=0.1, gamma=1.0, lam=0.9, epsilon=1.0)
    seed = next(
        s
        for s in range(50)
        if (lambda g: g.random() < 1.0 and int(g.integers(2)) == 1)(np.random.default_rng(s))
    )
    log = watkins_qlambda_episode(
        env, q, EligibilityTraces(), params, np.random.default_rng(seed), record_trace=True
    )
    assert log.trace[0][1] == 1
    assert log.total_reward == 2.0
    # the exploratory root choice was cut from the traces, so the terminal
    # reward never reached it; the final pair got its plain 1-step update
    assert q[root, 1] == 0.0
    assert q[root, 0] == 0.5
    last_s, last_a, _ = log.trace[-1]
    assert q[last_s, last_a] == approx(0.2)


def paired_tables_match(env_factory, run_a, run_b, seeds, episodes):
    for seed in seeds:
        env_a, env_b = env_factory(), env_factory()
        q_a, q_b = fresh(env_a), fresh(env_b)
        rng_a, rng_b = rng_for(seed), rng_for(seed)
        for ep in range(episodes):
            run_a(env_a, q_a, rng_a)
            run_b(env_b, q_b, rng_b)
            if not np.array_equal(q_a.as_array(), q_b.as_array()):
                return False, (seed, ep)
    return True, None


def const_h(value):
    return lambda s: value


@pytest.mark.parametrize("h, n", [(1.0, 1), (0.5, 2), (1 / 3, 3), (0.4, 3), (0.26, 4)])
def test_cvs_constant_criticality_equals_n_step_sarsa(h, n):
    params = AgentParams(alpha=0.1, gamma=1.0, epsilon=0.1, n=n)
    ok, where = paired_tables_match(
        lambda: RoadTreeEnv(fig3_tree()),
        lambda env, q, rng: cvs_episode(env, q, const_h(h), params, rng),
        lambda env, q, rng: n_step_sarsa_episode(env, q, params, rng),
        seeds=(0, 1, 2),
        episodes=15,
    )
    assert ok, f"tables diverged at (seed, episode) {where}"


def test_cvs_literal_order_equals_two_step_sarsa():
    params = AgentParams(alpha=0.1, gamma=1.0, epsilon=0.1, n=2)
    ok, where = paired_tables_match(
        lambda: RoadTreeEnv(fig3_tree()),
        lambda env, q, rng: cvs_episode(env, q, const_h(1.0), params, rng, order=ORDER_LITERAL),
        lambda env, q, rng: n_step_sarsa_episode(env, q, params, rng),
        seeds=(0, 1),
        episodes=15,
    )
    assert ok, f"tables diverged at (seed, episode) {where}"


@pytest.mark.parametrize("gamma", [1.0, 0.5])
def test_cvs_zero_criticality_equals_monte_carlo(gamma):
    params = AgentParams(alpha=0.1, gamma=gamma, epsilon=0.1)
    ok, where = paired_tables_match(
        lambda: RoadTreeEnv(fig1_tree()),
        lambda env, q, rng: cvs_episode(env, q, const_h(0.0), params, rng),
        lambda env, q, rng: mc_episode(env, q, params, rng),
        seeds=(0, 1),
        episodes=15,
    )
    assert ok, f"tables diverged at (seed, episode) {where}"


def test_cvs_unit_criticality_equals_sarsa_on_shooter():
    params = AgentParams(alpha=0.1, gamma=1.0, epsilon=0.1, n=1)
    ok, where = paired_tables_match(
        ShooterEnv,
        lambda env, q, rng: cvs_episode(env, q, const_h(1.0), params, rng),
        lambda env, q, rng: n_step_sarsa_episode(env, q, params, rng),
        seeds=(0,),
        episodes=10,
    )
    assert ok, f"tables diverged at (seed, episode) {where}"


def test_qlambda_zero_lambda_equals_q_learning():
    params = AgentParams(alpha=0.1, gamma=1.0, epsilon=0.1, lam=0.0)
    ok, where = paired_tables_match(
        lambda: RoadTreeEnv(fig3_tree()),
        lambda env, q, rng: watkins_qlambda_episode(env, q, EligibilityTraces(), params, rng),
        lambda env, q, rng: q_learning_episode(env, q, params, rng),
        seeds=(0, 1),
        episodes=20,
    )
    assert ok, f"tables diverged at (seed, episode) {where}"


def test_episode_log_bookkeeping():
    env = RoadTreeEnv(fig1_tree())
    q = fresh(env)
    params = AgentParams()
    log = cvs_episode(
        env, q, env.criticality(), params, rng_for(3), record_trace=True, record_updates=True
    )
    assert log.total_reward == sum(r for _, _, r in log.trace)
    assert log.steps == len(log.trace)
    assert q.writes == len(log.updates)
    # every pair acted on received exactly one update
    assert sorted((s, a) for s, a, _ in log.trace) == sorted(
        (u.state, u.action) for u in log.updates
    )


def test_terminal_row_stays_zero_across_agents():
    env = RoadTreeEnv(fig3_tree())
    params = AgentParams()
    runs = [
        lambda e, q, r: cvs_episode(e, q, e.criticality(), params, r),
        lambda e, q, r: q_learning_episode(e, q, params, r),
        lambda e, q, r: n_step_sarsa_episode(e, q, params, r),
        lambda e, q, r: watkins_qlambda_episode(e, q, EligibilityTraces(), params, r),
        lambda e, q, r: mc_episode(e, q, params, r),
    ]
    for i, run in enumerate(runs):
        q = fresh(env)
        rng = rng_for(i)
        for _ in range(5):
            run(env, q, rng)
        assert np.all(q.as_array()[env.terminal] == 0.0)
