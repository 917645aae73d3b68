"""Exact gridworld action-value tables solved by value iteration.

This is the oracle backend: the fixed point of the Bellman optimality
operator for the sparse goal-conditioned reward, computed for every
(state, action, goal) cell triple. Approximate components are tested
against it.
"""
from __future__ import annotations

import numpy as np

from .envs import GridWorld


class TabularQ:
    """Optimal action values on an N x N grid, indexed by flat state,
    action, and flat goal."""

    def __init__(self, size: int, gamma: float, table: np.ndarray):
        self.size = size
        self.gamma = gamma
        self.table = table
        self.residuals: list[float] = []

    def index(self, cell) -> int:
        x, y = np.asarray(cell, dtype=float)
        return int(round(x)) * self.size + int(round(y))

    def value(self, state, action, goal) -> float:
        return float(self.table[self.index(state), int(action), self.index(goal)])

    def state_value(self, state, goal) -> float:
        return float(np.max(self.table[self.index(state), :, self.index(goal)]))

    def greedy(self, state, goal) -> int:
        """Best action; ties broken toward the lowest index."""
        return int(np.argmax(self.table[self.index(state), :, self.index(goal)]))

    def greedy_policy(self):
        return lambda s, g: self.greedy(s, g)

    def q_fn(self):
        return lambda s, a, g: self.value(s, a, g)


def value_iteration(env: GridWorld, gamma: float, tol: float = 0.0,
                    max_iter: int = 100_000) -> TabularQ:
    """Iterate the Bellman optimality operator to its float64 fixed point.

    With ``tol=0`` the loop runs until the table stops changing at all,
    which the monotone-from-above iteration reaches in finitely many
    sweeps; pass a positive ``tol`` to stop at that sup-norm residual.
    """
    if not isinstance(env, GridWorld):
        raise ValueError("value iteration is defined for the gridworld only")
    if not 0.0 < gamma < 1.0:
        raise ValueError("discount must lie in (0, 1)")
    n = env.size
    n_states = n * n
    cells = np.array([[x, y] for x in range(n) for y in range(n)], dtype=float)
    nxt = np.zeros((n_states, env.n_actions), dtype=np.int64)
    for s in range(n_states):
        for a in range(env.n_actions):
            nx, ny = env.step(cells[s], a)
            nxt[s, a] = int(nx) * n + int(ny)
    # reward[s, a, g] depends only on the successor cell
    rewards = np.where(nxt[:, :, None] == np.arange(n_states)[None, None, :], 0.0, -1.0)

    q = np.zeros((n_states, env.n_actions, n_states))
    residuals = []
    for _ in range(max_iter):
        v = q.max(axis=1)  # (state, goal)
        q_new = rewards + gamma * v[nxt, :]
        delta = float(np.max(np.abs(q_new - q)))
        residuals.append(delta)
        q = q_new
        if delta <= tol:
            break
    else:
        raise RuntimeError("value iteration failed to reach its fixed point")
    out = TabularQ(n, gamma, q)
    out.residuals = residuals
    return out
