"""Tabular control algorithms.

Five episodic learners over the shared :class:`~cvslab.core.QTable`:

* ``cvs_episode`` - criticality-driven variable-stepnumber TD control: every
  visited pair waits on a list, absorbing rewards, until the criticality of
  the states encountered since has accumulated to 1; it then updates toward
  the current on-policy pair.  Constant criticality 1 reduces it to 1-step
  SARSA, constant 1/n to n-step SARSA, constant 0 to Monte-Carlo targets.
* ``q_learning_episode`` - 1-step Q-Learning.
* ``n_step_sarsa_episode`` - on-policy n-step SARSA.
* ``watkins_qlambda_episode`` - Watkins Q(lambda) with accumulating traces,
  cut after exploratory actions.
* ``mc_episode`` - every-visit constant-alpha Monte-Carlo control.

All of them pick actions with the same epsilon-greedy rule, mutate values
only through ``q_update``, and treat the TERMINAL state as worth zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    AgentParams,
    CriticalityFn,
    Environment,
    QTable,
    epsilon_greedy,
    greedy_actions,
    q_update,
)

ORDER_ACCUMULATE = "accumulate"
ORDER_LITERAL = "literal"

ALGORITHM_NAMES = ("cvs", "qlearning", "nstep_sarsa", "qlambda", "mc")

# Maturity threshold slack: a pair whose accumulated criticality is within one
# part in 10^9 of 1 counts as mature, so constant criticalities like 1/n are
# not betrayed by float rounding.
_CRT_EPS = 1e-9


@dataclass(frozen=True)
class UpdateRecord:
    """One applied value update; ``bootstrap`` is the bootstrap state, if any."""

    state: int
    action: int
    target: float
    bootstrap: int | None = None


@dataclass
class EpisodeLog:
    total_reward: float
    steps: int
    trace: list[tuple[int, int, float]] | None = None
    updates: list[UpdateRecord] | None = None


@dataclass
class _WaitEntry:
    state: int
    action: int
    reward_acc: float = 0.0
    crt_cum: float = 0.0
    steps: int = 0


class EligibilityTraces:
    """Accumulating eligibility traces, stored sparsely (absent means zero)."""

    def __init__(self) -> None:
        self._e: dict[tuple[int, int], float] = {}

    def clear(self) -> None:
        self._e.clear()

    def bump(self, s: int, a: int) -> None:
        key = (s, a)
        self._e[key] = self._e.get(key, 0.0) + 1.0

    def scale(self, factor: float) -> None:
        if factor == 0.0:
            self._e.clear()
            return
        for key in self._e:
            self._e[key] *= factor

    def get(self, s: int, a: int) -> float:
        return self._e.get((s, a), 0.0)

    def items(self) -> list[tuple[tuple[int, int], float]]:
        return list(self._e.items())

    def __len__(self) -> int:
        return len(self._e)


def cvs_episode(
    env: Environment,
    q: QTable,
    h: CriticalityFn,
    params: AgentParams,
    rng: np.random.Generator,
    *,
    order: str = ORDER_ACCUMULATE,
    record_trace: bool = False,
    record_updates: bool = False,
) -> EpisodeLog:
    """One episode of criticality-driven variable-stepnumber control.

    Each step enqueues the pair just acted on.  Every queued pair absorbs the
    step's reward; a pair whose criticality sum has reached 1 updates toward
    the newly selected on-policy pair and leaves the queue (overshoot is
    discarded).  At episode end every remaining pair updates toward its plain
    accumulated return, the TERMINAL state being worth zero.

    ``order`` controls when the current state's criticality is added: the
    default adds it before the maturity check, so the update target is the
    first state at which the accumulated criticality reaches 1; ``"literal"``
    checks maturity first and accumulates afterwards, deferring every update
    by one step.
    """
    if order not in (ORDER_ACCUMULATE, ORDER_LITERAL):
        raise ValueError(f"order must be '{ORDER_ACCUMULATE}' or '{ORDER_LITERAL}', got {order!r}")
    alpha, gamma, eps = params.alpha, params.gamma, params.epsilon
    trace = [] if record_trace else None
    updates = [] if record_updates else None
    waitlist: list[_WaitEntry] = []
    total = 0.0
    steps = 0

    s = env.reset(rng)
    a = epsilon_greedy(q, s, eps, rng)
    while True:
        tr = env.step(s, a, rng)
        steps += 1
        total += tr.reward
        if trace is not None:
            trace.append((s, a, tr.reward))
        waitlist.append(_WaitEntry(s, a))
        for e in waitlist:
            e.reward_acc += (gamma**e.steps) * tr.reward
            e.steps += 1

        if tr.terminal:
            for e in waitlist:
                q_update(q, e.state, e.action, e.reward_acc, alpha)
                if updates is not None:
                    updates.append(UpdateRecord(e.state, e.action, e.reward_acc, None))
            break

        s2 = tr.next_state
        a2 = epsilon_greedy(q, s2, eps, rng)
        hs = float(h(s2))
        if not 0.0 <= hs <= 1.0:
            raise ValueError(f"criticality {hs} outside [0, 1] at state {s2}")

        if order == ORDER_ACCUMULATE:
            for e in waitlist:
                e.crt_cum += hs
        boot = q[s2, a2]
        keep: list[_WaitEntry] = []
        for e in waitlist:
            if e.crt_cum >= 1.0 - _CRT_EPS:
                target = e.reward_acc + (gamma**e.steps) * boot
                q_update(q, e.state, e.action, target, alpha)
                if updates is not None:
                    updates.append(UpdateRecord(e.state, e.action, target, s2))
            else:
                if order == ORDER_LITERAL:
                    e.crt_cum += hs
                keep.append(e)
        waitlist = keep
        s, a = s2, a2

    return EpisodeLog(total, steps, trace, updates)


def q_learning_episode(
    env: Environment,
    q: QTable,
    params: AgentParams,
    rng: np.random.Generator,
    *,
    record_trace: bool = False,
    record_updates: bool = False,
) -> EpisodeLog:
    """One episode of 1-step Q-Learning (off-policy max bootstrap)."""
    alpha, gamma, eps = params.alpha, params.gamma, params.epsilon
    trace = [] if record_trace else None
    updates = [] if record_updates else None
    total = 0.0
    steps = 0
    s = env.reset(rng)
    while True:
        a = epsilon_greedy(q, s, eps, rng)
        tr = env.step(s, a, rng)
        steps += 1
        total += tr.reward
        if trace is not None:
            trace.append((s, a, tr.reward))
        if tr.terminal:
            target = tr.reward
            boot = None
        else:
            target = tr.reward + gamma * q.row_max(tr.next_state)
            boot = tr.next_state
        q_update(q, s, a, target, alpha)
        if updates is not None:
            updates.append(UpdateRecord(s, a, target, boot))
        if tr.terminal:
            break
        s = tr.next_state
    return EpisodeLog(total, steps, trace, updates)


def n_step_sarsa_episode(
    env: Environment,
    q: QTable,
    params: AgentParams,
    rng: np.random.Generator,
    *,
    record_trace: bool = False,
    record_updates: bool = False,
) -> EpisodeLog:
    """One episode of on-policy n-step SARSA (``params.n`` rewards, then bootstrap)."""
    n, alpha, gamma, eps = params.n, params.alpha, params.gamma, params.epsilon
    trace = [] if record_trace else None
    updates = [] if record_updates else None
    total = 0.0

    s0 = env.reset(rng)
    states = [s0]
    actions = [epsilon_greedy(q, s0, eps, rng)]
    rewards: list[float] = []
    T: int | None = None
    t = 0
    while True:
        if T is None:
            tr = env.step(states[t], actions[t], rng)
            rewards.append(tr.reward)
            total += tr.reward
            if trace is not None:
                trace.append((states[t], actions[t], tr.reward))
            states.append(tr.next_state)
            if tr.terminal:
                T = t + 1
            else:
                actions.append(epsilon_greedy(q, tr.next_state, eps, rng))
        tau = t - n + 1
        if tau >= 0:
            hi = tau + n if T is None else min(tau + n, T)
            g = 0.0
            for i in range(tau, hi):
                g += (gamma ** (i - tau)) * rewards[i]
            if T is None or tau + n < T:
                g += (gamma**n) * q[states[tau + n], actions[tau + n]]
                boot = states[tau + n]
            else:
                boot = None
            q_update(q, states[tau], actions[tau], g, alpha)
            if updates is not None:
                updates.append(UpdateRecord(states[tau], actions[tau], g, boot))
        if T is not None and tau >= T - 1:
            break
        t += 1
    return EpisodeLog(total, T, trace, updates)


def watkins_qlambda_episode(
    env: Environment,
    q: QTable,
    traces: EligibilityTraces,
    params: AgentParams,
    rng: np.random.Generator,
    *,
    record_trace: bool = False,
    record_updates: bool = False,
) -> EpisodeLog:
    """One episode of Watkins Q(lambda) with accumulating traces.

    Traces start the episode at zero, decay by gamma*lambda per step, and are
    cut (after the step's updates) whenever the action taken was exploratory,
    i.e. not among the greedy actions at selection time.
    """
    alpha, gamma, eps, lam = params.alpha, params.gamma, params.epsilon, params.lam
    trace = [] if record_trace else None
    updates = [] if record_updates else None
    traces.clear()
    total = 0.0
    steps = 0
    s = env.reset(rng)
    while True:
        exploratory_pool = greedy_actions(q, s)
        a = epsilon_greedy(q, s, eps, rng)
        exploratory = a not in exploratory_pool
        tr = env.step(s, a, rng)
        steps += 1
        total += tr.reward
        if trace is not None:
            trace.append((s, a, tr.reward))
        boot_value = 0.0 if tr.terminal else q.row_max(tr.next_state)
        td_target = tr.reward + gamma * boot_value
        delta = td_target - q[s, a]
        traces.bump(s, a)
        for (es, ea), e in traces.items():
            if es == s and ea == a and e == 1.0:
                # Fresh trace of the pair just acted on: apply the TD target
                # directly so that lambda = 0 matches 1-step updates exactly.
                q_update(q, es, ea, td_target, alpha)
                if updates is not None:
                    updates.append(
                        UpdateRecord(es, ea, td_target, None if tr.terminal else tr.next_state)
                    )
            else:
                partial = q[es, ea] + delta * e
                q_update(q, es, ea, partial, alpha)
                if updates is not None:
                    updates.append(
                        UpdateRecord(es, ea, partial, None if tr.terminal else tr.next_state)
                    )
        if tr.terminal:
            break
        if exploratory:
            traces.clear()
        else:
            traces.scale(gamma * lam)
        s = tr.next_state
    return EpisodeLog(total, steps, trace, updates)


def mc_episode(
    env: Environment,
    q: QTable,
    params: AgentParams,
    rng: np.random.Generator,
    *,
    record_trace: bool = False,
    record_updates: bool = False,
) -> EpisodeLog:
    """One episode of every-visit constant-alpha Monte-Carlo control.

    The whole episode runs first; afterwards every visited pair updates toward
    its discounted return from that visit, in visit order.
    """
    alpha, gamma, eps = params.alpha, params.gamma, params.epsilon
    trace = [] if record_trace else None
    updates = [] if record_updates else None
    total = 0.0
    visited: list[tuple[int, int]] = []
    rewards: list[float] = []
    s = env.reset(rng)
    while True:
        a = epsilon_greedy(q, s, eps, rng)
        tr = env.step(s, a, rng)
        total += tr.reward
        if trace is not None:
            trace.append((s, a, tr.reward))
        visited.append((s, a))
        rewards.append(tr.reward)
        if tr.terminal:
            break
        s = tr.next_state

    g = 0.0
    targets = [0.0] * len(rewards)
    for i in range(len(rewards) - 1, -1, -1):
        g = rewards[i] + gamma * g
        targets[i] = g
    for (vs, va), tgt in zip(visited, targets):
        q_update(q, vs, va, tgt, alpha)
        if updates is not None:
            updates.append(UpdateRecord(vs, va, tgt, None))
    return EpisodeLog(total, len(rewards), trace, updates)
