"""Deterministic goal-reaching environments.

Two desk-scale tasks share one protocol: a pure ``step`` function, an
achieved-goal projection, a sparse reward, and task sampling through a
caller-owned random generator. Episodes always run the full horizon;
reaching the goal never ends an episode, so a policy only succeeds if it
is still on the goal at the final step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Discrete grid actions. "up" increases y; the convention is arbitrary
# but fixed, and pinned by tests.
UP, DOWN, LEFT, RIGHT, STAY = range(5)
GRID_DELTAS = np.array(
    [[0.0, 1.0], [0.0, -1.0], [-1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]
)


def sparse_reward(achieved: np.ndarray, goal: np.ndarray, eps: float) -> float:
    """0 when the achieved goal matches the desired one, else -1.

    Matching means Euclidean distance < ``eps``; with ``eps <= 0`` it
    degrades to exact coordinate equality (the gridworld convention).
    """
    achieved = np.asarray(achieved, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if achieved.shape != goal.shape:
        raise ValueError(
            f"achieved/goal dimension mismatch: {achieved.shape} vs {goal.shape}"
        )
    d = float(np.linalg.norm(achieved - goal))
    if eps > 0.0:
        return 0.0 if d < eps else -1.0
    return 0.0 if d == 0.0 else -1.0


@dataclass
class Trajectory:
    """One episode: states s_0..s_T, actions a_0..a_{T-1}, the achieved
    goals of every state, and the episode's desired goal.

    ``behavior_probs`` optionally records, per action, the probability
    the collecting policy assigned to it (needed for importance-ratio
    estimators; None for continuous actions).
    """

    states: np.ndarray
    actions: np.ndarray
    achieved: np.ndarray
    goal: np.ndarray
    behavior_probs: np.ndarray | None = None

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def validate(self) -> None:
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("trajectory needs exactly one more state than actions")
        if len(self.achieved) != len(self.states):
            raise ValueError("one achieved goal per state required")
        if self.behavior_probs is not None and len(self.behavior_probs) != len(self.actions):
            raise ValueError("one behavior probability per action required")


class GridWorld:
    """N x N grid with five discrete actions and exact-cell goal test.

    States are integer coordinates stored as float vectors; the achieved
    goal of a state is the state itself. The horizon defaults to three
    times the edge length.
    """

    discrete = True
    n_actions = 5

    def __init__(self, size: int, horizon: int | None = None):
        if size < 2:
            raise ValueError("grid size must be at least 2")
        self.size = int(size)
        self.horizon = 3 * self.size if horizon is None else int(horizon)
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        self.eps = 0.0
        self.state_dim = 2
        self.goal_dim = 2
        self.action_dim = self.n_actions  # one-hot width for critics

    def step(self, state: np.ndarray, action: int) -> np.ndarray:
        a = int(action)
        if not 0 <= a < self.n_actions:
            raise ValueError(f"invalid grid action {action!r}")
        nxt = np.asarray(state, dtype=float) + GRID_DELTAS[a]
        return np.clip(nxt, 0.0, self.size - 1.0)

    def achieved_goal(self, state: np.ndarray) -> np.ndarray:
        return np.asarray(state, dtype=float).copy()

    def reward(self, achieved: np.ndarray, goal: np.ndarray) -> float:
        return sparse_reward(achieved, goal, self.eps)

    def reward_batch(self, achieved: np.ndarray, goal: np.ndarray) -> np.ndarray:
        hits = np.all(np.asarray(achieved, dtype=float) == np.asarray(goal, dtype=float), axis=1)
        return np.where(hits, 0.0, -1.0)

    def sample_state(self, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.size, size=2).astype(float)

    def sample_goal(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_state(rng)

    def sample_task(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Uniform (start, goal) pair with the start not already on the goal."""
        start = self.sample_state(rng)
        goal = self.sample_goal(rng)
        while self.reward(self.achieved_goal(start), goal) == 0.0:
            goal = self.sample_goal(rng)
        return start, goal


class PointReach:
    """Continuous reach task on the unit square.

    Actions are velocities in [-1, 1]^2 scaled by ``step_scale``; the
    goal counts as reached within Euclidean distance ``eps``.
    """

    discrete = False

    def __init__(self, horizon: int = 50, eps: float = 0.05, step_scale: float = 0.05):
        if horizon < 1:
            raise ValueError("horizon must be positive")
        if eps < 0:
            raise ValueError("tolerance must be non-negative")
        self.horizon = int(horizon)
        self.eps = float(eps)
        self.step_scale = float(step_scale)
        self.state_dim = 2
        self.goal_dim = 2
        self.action_dim = 2

    def step(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
        nxt = np.asarray(state, dtype=float) + self.step_scale * a
        return np.clip(nxt, 0.0, 1.0)

    def achieved_goal(self, state: np.ndarray) -> np.ndarray:
        return np.asarray(state, dtype=float).copy()

    def reward(self, achieved: np.ndarray, goal: np.ndarray) -> float:
        return sparse_reward(achieved, goal, self.eps)

    def reward_batch(self, achieved: np.ndarray, goal: np.ndarray) -> np.ndarray:
        d = np.linalg.norm(np.asarray(achieved, dtype=float) - np.asarray(goal, dtype=float), axis=1)
        return np.where(d < self.eps, 0.0, -1.0)

    def sample_state(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 1.0, size=2)

    def sample_goal(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_state(rng)

    def sample_task(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        start = self.sample_state(rng)
        goal = self.sample_goal(rng)
        while self.reward(self.achieved_goal(start), goal) == 0.0:
            goal = self.sample_goal(rng)
        return start, goal


@dataclass(frozen=True)
class EnvSpec:
    """Declarative environment description used by experiment configs."""

    kind: str  # "grid" | "point"
    size: int = 10
    horizon: int | None = None
    eps: float = 0.05
    step_scale: float = 0.05

    def __post_init__(self):
        if self.kind not in ("grid", "point"):
            raise ValueError(f"unknown environment kind {self.kind!r}")


def make_env(spec: EnvSpec):
    if spec.kind == "grid":
        return GridWorld(spec.size, horizon=spec.horizon)
    return PointReach(
        horizon=spec.horizon if spec.horizon is not None else 50,
        eps=spec.eps,
        step_scale=spec.step_scale,
    )


def env_from_task(task: str):
    """Build an environment from a task name: ``grid<N>`` or ``point``."""
    name = task.strip().lower()
    if name == "point":
        return PointReach()
    if name.startswith("grid"):
        try:
            size = int(name[len("grid"):])
        except ValueError:
            raise ValueError(f"malformed grid task name {task!r}") from None
        return GridWorld(size)
    raise ValueError(f"unknown task {task!r}")


def rollout(env, policy, goal: np.ndarray, start: np.ndarray) -> Trajectory:
    """Run ``policy`` for the environment's full horizon, no early exit.

    ``policy`` maps (state, goal) to an action in the environment's
    native form (int for discrete, vector for continuous).
    """
    goal = np.asarray(goal, dtype=float)
    state = np.asarray(start, dtype=float)
    states = [state]
    achieved = [env.achieved_goal(state)]
    actions = []
    for _ in range(env.horizon):
        a = policy(state, goal)
        state = env.step(state, a)
        actions.append(a)
        states.append(state)
        achieved.append(env.achieved_goal(state))
    if env.discrete:
        acts = np.array([int(a) for a in actions], dtype=np.int64)
    else:
        acts = np.array([np.asarray(a, dtype=float) for a in actions])
    traj = Trajectory(
        states=np.array(states),
        actions=acts,
        achieved=np.array(achieved),
        goal=goal.copy(),
    )
    traj.validate()
    return traj


def is_success(traj: Trajectory, env) -> bool:
    return env.reward(traj.achieved[-1], traj.goal) == 0.0
