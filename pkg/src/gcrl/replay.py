"""Episode-granular replay with hindsight goal relabeling.

Episodes are stored whole and immutable; relabeling happens per sampled
segment at sampling time, so the buffer always holds the data exactly as
collected. Eviction is whole-episode FIFO measured in transitions.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np

from .envs import Trajectory


@dataclass(frozen=True)
class HindsightSpec:
    """Future-strategy relabeling: with probability ``p_relabel`` a
    sampled segment's goal is replaced by a goal actually achieved later
    in the same episode."""

    p_relabel: float = 0.8
    strategy: str = "future"

    def __post_init__(self):
        if not 0.0 <= self.p_relabel <= 1.0:
            raise ValueError("relabel probability must lie in [0, 1]")
        if self.strategy != "future":
            raise ValueError(f"unsupported relabel strategy {self.strategy!r}")


class TrajectoryBuffer:
    """Ring of whole episodes with a transition-count capacity."""

    def __init__(self, capacity: int = 1_000_000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self._episodes: deque[Trajectory] = deque()
        self._transitions = 0

    def __len__(self) -> int:
        return len(self._episodes)

    @property
    def transition_count(self) -> int:
        return self._transitions

    def store(self, traj: Trajectory) -> None:
        traj.validate()
        self._episodes.append(traj)
        self._transitions += traj.horizon
        while self._transitions > self.capacity and len(self._episodes) > 1:
            dropped = self._episodes.popleft()
            self._transitions -= dropped.horizon

    def episode(self, index: int) -> Trajectory:
        return self._episodes[index]

    def sample_episode(self, rng: np.random.Generator) -> Trajectory:
        if not self._episodes:
            raise ValueError("cannot sample from an empty buffer")
        return self._episodes[int(rng.integers(len(self._episodes)))]


def relabel_goal(
    t: int, traj: Trajectory, spec: HindsightSpec, rng: np.random.Generator
) -> np.ndarray:
    """Original goal with probability 1-p, otherwise an achieved goal of
    a uniformly drawn future step t' in {t+1, ..., T}."""
    if not 0 <= t < traj.horizon:
        raise ValueError(f"step {t} outside horizon {traj.horizon}")
    if rng.random() < spec.p_relabel:
        t_future = int(rng.integers(t + 1, traj.horizon + 1))
        return traj.achieved[t_future].copy()
    return traj.goal.copy()


@dataclass
class SampledSegment:
    """An n-step slice of a stored trajectory, with a possibly relabeled
    goal and the slice's rewards recomputed against that goal.

    ``rewards[i]`` is the reward of arriving in the state ``i+1`` steps
    after the segment start.
    """

    traj: Trajectory
    t: int
    n_eff: int
    goal: np.ndarray
    rewards: np.ndarray

    @property
    def states(self) -> np.ndarray:
        """States s_t .. s_{t+n_eff} (n_eff+1 rows)."""
        return self.traj.states[self.t : self.t + self.n_eff + 1]

    @property
    def actions(self) -> np.ndarray:
        """Actions a_t .. a_{t+n_eff-1}."""
        return self.traj.actions[self.t : self.t + self.n_eff]

    @property
    def achieved(self) -> np.ndarray:
        return self.traj.achieved[self.t : self.t + self.n_eff + 1]

    @property
    def behavior_probs(self) -> np.ndarray | None:
        if self.traj.behavior_probs is None:
            return None
        return self.traj.behavior_probs[self.t : self.t + self.n_eff]


def sample_segments(
    buffer: TrajectoryBuffer,
    batch_size: int,
    n: int,
    spec: HindsightSpec,
    rng: np.random.Generator,
    env,
) -> list[SampledSegment]:
    """Draw ``batch_size`` segments of up to ``n`` steps.

    Episodes and start steps are uniform; segments never read past the
    final state, so the effective length is min(n, T - t). Each segment
    carries one goal, used for every recomputed reward and for the
    bootstrap.
    """
    if len(buffer) == 0:
        raise ValueError("cannot sample from an empty buffer")
    if n < 1:
        raise ValueError("segment length must be at least 1")
    out = []
    for _ in range(batch_size):
        traj = buffer.sample_episode(rng)
        t = int(rng.integers(traj.horizon))
        n_eff = min(n, traj.horizon - t)
        goal = relabel_goal(t, traj, spec, rng)
        rewards = env.reward_batch(traj.achieved[t + 1 : t + 1 + n_eff], goal)
        out.append(SampledSegment(traj=traj, t=t, n_eff=n_eff, goal=goal, rewards=rewards))
    return out


def save_trajectories(path, trajs: list[Trajectory]) -> None:
    """Write episodes to CSV, one row per step.

    Rows carry (episode, t, s_t, a_t, achieved_t, goal, behavior_prob);
    the final state of each episode appears as a row with an empty
    action. Continuous actions are stored component-wise.
    """
    if not trajs:
        raise ValueError("nothing to save")
    ds = trajs[0].states.shape[1]
    dg = trajs[0].achieved.shape[1]
    discrete = trajs[0].actions.ndim == 1
    da = 1 if discrete else trajs[0].actions.shape[1]
    header = (
        ["episode", "t"]
        + [f"s{i}" for i in range(ds)]
        + [f"a{i}" for i in range(da)]
        + [f"ag{i}" for i in range(dg)]
        + [f"g{i}" for i in range(dg)]
        + ["behavior_prob"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for ep, traj in enumerate(trajs):
            for t in range(traj.horizon + 1):
                row = [ep, t]
                row += [repr(v) for v in traj.states[t]]
                if t < traj.horizon:
                    act = [traj.actions[t]] if discrete else list(traj.actions[t])
                    row += [repr(v) for v in np.atleast_1d(np.asarray(act, dtype=float))]
                else:
                    row += [""] * da
                row += [repr(v) for v in traj.achieved[t]]
                row += [repr(v) for v in traj.goal]
                if t < traj.horizon and traj.behavior_probs is not None:
                    row.append(repr(float(traj.behavior_probs[t])))
                else:
                    row.append("")
                writer.writerow(row)


def load_trajectories(path, discrete: bool) -> list[Trajectory]:
    """Inverse of :func:`save_trajectories`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ds = sum(1 for h in header if h.startswith("s") and h[1:].isdigit())
        da = sum(1 for h in header if h.startswith("a") and h[1:].isdigit())
        dg = sum(1 for h in header if h.startswith("ag"))
        episodes: dict[int, list[list[str]]] = {}
        for row in reader:
            episodes.setdefault(int(row[0]), []).append(row)
    trajs = []
    for ep in sorted(episodes):
        rows = sorted(episodes[ep], key=lambda r: int(r[1]))
        states = np.array([[float(v) for v in r[2 : 2 + ds]] for r in rows])
        achieved = np.array([[float(v) for v in r[2 + ds + da : 2 + ds + da + dg]] for r in rows])
        goal = np.array([float(v) for v in rows[0][2 + ds + da + dg : 2 + ds + da + 2 * dg]])
        act_rows = rows[:-1]
        if discrete:
            actions = np.array([int(float(r[2 + ds])) for r in act_rows], dtype=np.int64)
        else:
            actions = np.array([[float(v) for v in r[2 + ds : 2 + ds + da]] for r in act_rows])
        probs_raw = [r[-1] for r in act_rows]
        probs = None
        if all(p != "" for p in probs_raw) and probs_raw:
            probs = np.array([float(p) for p in probs_raw])
        traj = Trajectory(states=states, actions=actions, achieved=achieved, goal=goal, behavior_probs=probs)
        traj.validate()
        trajs.append(traj)
    return trajs
