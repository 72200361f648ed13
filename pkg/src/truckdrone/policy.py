"""Learned drone-scheduling policy with hard feasibility masks.

The policy scores each feasible launch-serve-rendezvous candidate with a
linear function of hand-crafted features (flight time, endurance slack,
edge time, detour saved, tour position, predicted drone idle, bias) and
turns the scores into a softmax over {no-op} + candidates. The no-op
action has a fixed score of zero, so theta = 0 gives a uniform policy.

Training is REINFORCE with a self-critical baseline: the reward is the
negative simulated makespan of a sampled rollout, the baseline the
negative makespan of the greedy rollout, and the gradient of the
surrogate (advantage * log-prob + entropy bonus) is available in closed
form. Decoding is best-of-K sampling or a masked beam ranked by
log-probability with final selection by true simulated makespan.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import Instance, TravelMatrices, generate_uniform_instance, build_matrices
from .construct import nearest_neighbor
from .local_search import local_search
from .scheduler import ScheduleState, initial_state, _advance_noop, _advance_sortie
from .simulator import EPS, Solution, Sortie, simulate, validate_solution

FEATURE_NAMES = ("flight_time", "slack", "edge_time", "detour_saved",
                 "tour_position", "drone_idle", "bias")
N_FEATURES = len(FEATURE_NAMES)


class TrainingError(RuntimeError):
    """Non-finite gradient or reward during SCST."""


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    epochs: int = 500
    learning_rate: float = 0.01
    entropy_coef: float = 0.01
    grad_clip: float = 1.0
    temperature: float = 1.0
    n: int = 20
    pool_size: int = 128
    seed: int = 0
    instance_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.grad_clip <= 0:
            raise ValueError("grad_clip must be positive")


def step_features(state: ScheduleState, mats: TravelMatrices,
                  inst: Instance) -> tuple[list[int], np.ndarray]:
    """Feasible candidate customers at the current edge and their features.

    Returns (candidate_customers, Phi) where Phi[i] is the feature vector
    of serving candidate_customers[i] by drone on the upcoming edge.
    Infeasible candidates are masked out entirely.
    """
    rem = np.asarray(state.remaining)
    u = state.stop
    if len(rem) < 2:
        return [], np.zeros((0, N_FEATURES))
    ks = rem[:-1]
    vs = np.full(len(ks), rem[0])
    vs[0] = rem[1]
    tD, tT, d = mats.tD, mats.tT, mats.d
    F = tD[u, ks] + tD[ks, vs] + inst.ell + inst.r
    feasible = F <= inst.E + EPS
    if not feasible.any():
        return [], np.zeros((0, N_FEATURES))
    prev = np.concatenate(([u], rem[:-2])) if len(rem) >= 2 else np.array([u])
    nxt = rem[1:]
    detour = d[prev, ks] + d[ks, nxt] - d[prev, nxt]
    total_edges = state.visited_edges + len(rem)
    norm_pos = state.visited_edges / total_edges
    idle = max(0.0, state.drone_ready - state.truck_clock)

    ks = ks[feasible]
    Phi = np.column_stack([
        F[feasible],
        inst.E - F[feasible],
        tT[u, vs[feasible]],
        detour[feasible],
        np.full(feasible.sum(), norm_pos),
        np.full(feasible.sum(), idle),
        np.ones(feasible.sum()),
    ])
    return [int(k) for k in ks], Phi


def action_distribution(state: ScheduleState, theta: np.ndarray, temperature: float,
                        mats: TravelMatrices, inst: Instance):
    """Masked softmax over {no-op} + feasible candidates.

    Returns (candidates, probs, Phi_full): candidates[0] is None (no-op)
    and Phi_full carries a zero feature row for it, so the no-op logit is
    fixed at zero and theta = 0 yields the uniform distribution.
    """
    ks, Phi = step_features(state, mats, inst)
    Phi_full = np.vstack([np.zeros((1, N_FEATURES)), Phi])
    logits = Phi_full @ theta / temperature
    logits -= logits.max()
    w = np.exp(logits)
    probs = w / w.sum()
    return [None] + ks, probs, Phi_full


def rollout(tour: tuple[int, ...], mats: TravelMatrices, inst: Instance,
            theta: np.ndarray, mode: str = "greedy",
            rng: np.random.Generator | None = None,
            temperature: float = 1.0, record: bool = False):
    """Sweep the tour drawing actions from the policy.

    mode "greedy" takes the argmax (ties to the first action, which is the
    no-op); mode "sample" draws from the distribution using `rng`. Returns
    (Solution, log_probability) and, with record=True, also the frozen
    trajectory [(Phi_full, chosen_index), ...] for gradient computation.
    """
    if mode == "sample" and rng is None:
        raise ValueError("sampling mode needs an rng")
    state = initial_state(tour)
    logp = 0.0
    traj = []
    while not state.done:
        actions, probs, Phi = action_distribution(state, theta, temperature, mats, inst)
        if mode == "greedy":
            idx = int(np.argmax(probs))
        else:
            idx = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
            idx = min(idx, len(actions) - 1)
        logp += float(np.log(probs[idx]))
        if record:
            traj.append((Phi, idx))
        if actions[idx] is None:
            state = _advance_noop(state, mats)
        else:
            state = _advance_sortie(state, actions[idx], mats, inst)
    reduced = tuple(c for c in tour if c == 0 or c not in state.drone_served)
    sol = Solution(tour=reduced, sorties=state.sorties)
    assert not validate_solution(sol, inst)
    if record:
        return sol, logp, traj
    return sol, logp


def surrogate_value_and_grad(trajectories, advantages, theta: np.ndarray,
                             temperature: float, entropy_coef: float):
    """Mean over the batch of adv * log pi(traj) + entropy bonus, with its
    closed-form gradient. Trajectories are frozen (Phi, chosen) pairs, so
    finite differences on the value must match the gradient."""
    value = 0.0
    grad = np.zeros(N_FEATURES)
    B = len(trajectories)
    for traj, adv in zip(trajectories, advantages):
        for Phi, idx in traj:
            logits = Phi @ theta / temperature
            logits -= logits.max()
            w = np.exp(logits)
            p = w / w.sum()
            mean_phi = p @ Phi
            value += adv * float(np.log(p[idx]))
            grad += adv * (Phi[idx] - mean_phi) / temperature
            if entropy_coef:
                logp = np.log(p)
                value += entropy_coef * float(-(p * logp).sum())
                grad += entropy_coef * (-(p * logp) @ (Phi - mean_phi)) / temperature
    return value / B, grad / B


def scst_step(batch, theta: np.ndarray, cfg: TrainConfig,
              rng: np.random.Generator):
    """One REINFORCE step with the self-critical (greedy rollout) baseline.

    `batch` is a list of (instance, matrices, tour) triples. Returns the
    updated theta and a diagnostics dict.
    """
    if not batch:
        raise ValueError("batch is empty")
    trajectories, advantages = [], []
    sampled_mks, greedy_mks = [], []
    for inst, mats, tour in batch:
        sol_s, _, traj = rollout(tour, mats, inst, theta, "sample", rng,
                                 cfg.temperature, record=True)
        sol_g, _ = rollout(tour, mats, inst, theta, "greedy",
                           temperature=cfg.temperature)
        mk_s = simulate(sol_s, mats, inst).makespan
        mk_g = simulate(sol_g, mats, inst).makespan
        trajectories.append(traj)
        advantages.append(mk_g - mk_s)     # reward = -makespan
        sampled_mks.append(mk_s)
        greedy_mks.append(mk_g)
    value, grad = surrogate_value_and_grad(trajectories, advantages, theta,
                                           cfg.temperature, cfg.entropy_coef)
    if not np.all(np.isfinite(grad)):
        raise TrainingError(f"non-finite gradient: {grad}")
    norm = float(np.linalg.norm(grad))
    if norm > cfg.grad_clip:
        grad = grad * (cfg.grad_clip / norm)
    new_theta = theta + cfg.learning_rate * grad
    diag = {
        "surrogate": value,
        "grad_norm": norm,
        "mean_sampled_makespan": float(np.mean(sampled_mks)),
        "mean_greedy_makespan": float(np.mean(greedy_mks)),
        "mean_advantage": float(np.mean(advantages)),
    }
    return new_theta, diag


def make_training_pool(cfg: TrainConfig):
    """Instance/tour pool the trainer samples batches from: NN + local
    search tours on fresh uniform instances, all seeded from cfg.seed."""
    pool = []
    for i in range(cfg.pool_size):
        inst = generate_uniform_instance(cfg.n, seed=cfg.seed * 1_000_003 + i,
                                         **cfg.instance_params)
        mats = build_matrices(inst)
        tour = local_search(nearest_neighbor(inst, mats), mats)
        pool.append((inst, mats, tour))
    return pool


def train(cfg: TrainConfig, theta0: np.ndarray | None = None,
          callback=None):
    """Run cfg.epochs SCST steps over a seeded instance pool."""
    theta = np.zeros(N_FEATURES) if theta0 is None else np.array(theta0, dtype=float)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    pool = make_training_pool(cfg)
    history = []
    for step in range(cfg.epochs):
        picks = rng.choice(len(pool), size=min(cfg.batch_size, len(pool)), replace=False)
        batch = [pool[int(i)] for i in picks]
        theta, diag = scst_step(batch, theta, cfg, rng)
        diag["step"] = step
        history.append(diag)
        if callback:
            callback(step, theta, diag)
    return theta, history


def best_of_k_decode(tour: tuple[int, ...], mats: TravelMatrices, inst: Instance,
                     theta: np.ndarray, K: int, seed: int,
                     temperature: float = 1.0) -> Solution:
    """K sampled rollouts plus the greedy rollout; keep the simulator-best."""
    if K < 1:
        raise ValueError("K must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    best = None
    sol, _ = rollout(tour, mats, inst, theta, "greedy", temperature=temperature)
    mk = simulate(sol, mats, inst).makespan
    best = ((mk, len(sol.sorties), sol.sorties), sol)
    for _ in range(K):
        sol, _ = rollout(tour, mats, inst, theta, "sample", rng, temperature)
        mk = simulate(sol, mats, inst).makespan
        key = (mk, len(sol.sorties), sol.sorties)
        if key < best[0]:
            best = (key, sol)
    return best[1]


def masked_beam_decode(tour: tuple[int, ...], mats: TravelMatrices, inst: Instance,
                       theta: np.ndarray, B: int,
                       temperature: float = 1.0) -> Solution:
    """Beam over trajectories ranked by cumulative log-probability; the
    final winner among completed beams is chosen by simulated makespan."""
    if B < 1:
        raise ValueError("beam width must be >= 1")
    frontier = [(0.0, initial_state(tour))]
    completed = []
    while frontier:
        nxt = []
        for logp, state in frontier:
            actions, probs, _ = action_distribution(state, theta, temperature, mats, inst)
            for idx, act in enumerate(actions):
                child_logp = logp + float(np.log(probs[idx]))
                child = (_advance_noop(state, mats) if act is None
                         else _advance_sortie(state, act, mats, inst))
                (completed if child.done else nxt).append((child_logp, child))
        nxt.sort(key=lambda t: (-t[0], len(t[1].sorties), t[1].sorties))
        frontier = nxt[:B]
    scored = []
    for logp, state in completed:
        reduced = tuple(c for c in tour if c == 0 or c not in state.drone_served)
        sol = Solution(tour=reduced, sorties=state.sorties)
        mk = simulate(sol, mats, inst).makespan
        scored.append(((mk, len(sol.sorties), sol.sorties), sol))
    scored.sort(key=lambda t: t[0])
    return scored[0][1]


def save_checkpoint(theta: np.ndarray, path, temperature: float = 1.0) -> None:
    doc = {"temperature": temperature,
           "weights": {name: float(w) for name, w in zip(FEATURE_NAMES, theta)}}
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def load_checkpoint(path) -> tuple[np.ndarray, float]:
    with open(path) as f:
        doc = json.load(f)
    theta = np.array([doc["weights"][name] for name in FEATURE_NAMES])
    return theta, float(doc.get("temperature", 1.0))
