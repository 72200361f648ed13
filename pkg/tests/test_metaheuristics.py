import numpy as np
import pytest

from oracles import brute_force_tsp
from truckdrone.construct import nearest_neighbor
from truckdrone.core import build_matrices, generate_uniform_instance
from truckdrone.metaheuristics import (GAParams, SAParams, TabuParams, VNSParams,
                                       _apply_relocate, _apply_two_opt, _draw_move,
                                       genetic_algorithm, ordered_crossover,
                                       simulated_annealing, tabu_search, vns)
from truckdrone.simulator import Solution, tour_length, validate_solution


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(seed))


def setup(n, seed):
    inst = generate_uniform_instance(n, seed=seed)
    mats = build_matrices(inst)
    return inst, mats, nearest_neighbor(inst, mats)


def test_param_validation():
    with pytest.raises(ValueError):
        SAParams(cooling=1.0)
    with pytest.raises(ValueError):
        SAParams(T0=1e-5, T_min=1e-4)
    with pytest.raises(ValueError):
        TabuParams(tenure=0)
    with pytest.raises(ValueError):
        GAParams(pop_size=4, elite=4)
    with pytest.raises(ValueError):
        VNSParams(k_max=0)


def test_apply_two_opt_reverses_segment():
    assert _apply_two_opt([0, 1, 2, 3, 4, 0], 1, 3) == [0, 3, 2, 1, 4, 0]


def test_apply_relocate_both_directions():
    assert _apply_relocate([0, 1, 2, 3, 4, 0], 1, 3) == [0, 2, 3, 1, 4, 0]
    assert _apply_relocate([0, 1, 2, 3, 4, 0], 3, 0) == [0, 3, 1, 2, 4, 0]


@pytest.mark.parametrize("seed", range(5))
def test_draw_move_delta_matches_recomputation(seed):
    inst, mats, tour = setup(9, seed)
    rng = rng_for(seed)
    a = list(tour)
    base = tour_length(a, mats.d)
    for _ in range(40):
        delta, cand = _draw_move(a, mats.d, rng)
        assert tour_length(cand, mats.d) == pytest.approx(base + delta)
        assert sorted(cand) == sorted(a)
        a, base = cand, base + delta


@pytest.mark.parametrize("method", ["sa", "tabu", "ga", "vns"])
def test_metaheuristics_valid_and_deterministic(method):
    inst, mats, tour = setup(12, 3)

    def run(seed):
        rng = rng_for(seed)
        if method == "sa":
            return simulated_annealing(tour, mats, SAParams(), rng)
        if method == "tabu":
            return tabu_search(tour, mats, TabuParams(max_iters=200), rng)
        if method == "ga":
            return genetic_algorithm(inst, mats, GAParams(generations=30), rng)
        return vns(tour, mats, VNSParams(max_iters=100), rng)

    a, b = run(7), run(7)
    assert a == b
    assert validate_solution(Solution(tour=a), inst) == []
    assert run(8) is not None   # different seed still runs


@pytest.mark.parametrize("method", ["sa", "tabu", "ga", "vns"])
def test_metaheuristics_not_worse_than_start(method):
    inst, mats, tour = setup(15, 5)
    start = tour_length(tour, mats.d)
    rng = rng_for(1)
    if method == "sa":
        out = simulated_annealing(tour, mats, SAParams(), rng)
    elif method == "tabu":
        out = tabu_search(tour, mats, TabuParams(max_iters=300), rng)
    elif method == "ga":
        out = genetic_algorithm(inst, mats, GAParams(generations=40), rng)
    else:
        out = vns(tour, mats, VNSParams(max_iters=150), rng)
    assert tour_length(out, mats.d) <= start + 1e-9


@pytest.mark.parametrize("seed", range(3))
def test_metaheuristics_reach_optimum_tiny(seed):
    # n = 6: every method should land on (or at) the exact optimum
    inst, mats, tour = setup(6, 20 + seed)
    opt, _ = brute_force_tsp(mats, inst.n)
    rng = rng_for(seed)
    for out in (simulated_annealing(tour, mats, SAParams(), rng_for(seed)),
                tabu_search(tour, mats, TabuParams(max_iters=300), rng_for(seed)),
                genetic_algorithm(inst, mats, GAParams(generations=40), rng),
                vns(tour, mats, VNSParams(max_iters=100), rng_for(seed))):
        assert tour_length(out, mats.d) <= opt * 1.001 + 1e-9


def test_ordered_crossover_is_permutation():
    rng = rng_for(2)
    p1 = [3, 1, 4, 5, 2, 6]
    p2 = [6, 5, 4, 3, 2, 1]
    for _ in range(50):
        child = ordered_crossover(p1, p2, rng)
        assert sorted(child) == [1, 2, 3, 4, 5, 6]


def test_ordered_crossover_identical_parents():
    rng = rng_for(0)
    p = [2, 1, 3]
    assert ordered_crossover(p, p, rng) == p


def test_trivial_tours_passthrough():
    inst, mats, tour = setup(1, 0)
    rng = rng_for(0)
    assert simulated_annealing(tour, mats, SAParams(), rng) == tour
    assert tabu_search(tour, mats, TabuParams(), rng) == tour
    assert vns(tour, mats, VNSParams(max_iters=5), rng) == tour
