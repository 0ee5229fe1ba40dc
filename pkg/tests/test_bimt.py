import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipinn.autodiff import backward
from bipinn.bimt import (
    PhaseSchedule,
    RegularizerConfig,
    distance,
    edge_distances,
    lambda_at,
    penalty,
    penalty_flags,
    penalty_grad,
    reg_penalty,
    try_swaps,
)
from bipinn.network import forward_value, lift_params, swap

from conftest import random_net, zero_net


class TestSchedule:
    @pytest.mark.parametrize("epoch,expected", [
        (0, (0.001, False)),
        (50_000, (0.01, False)),
        (90_000, (0.001, True)),
    ])
    def test_examples(self, epoch, expected):
        assert lambda_at(epoch, PhaseSchedule(100_000)) == expected

    @pytest.mark.parametrize("T", [4, 7, 100, 1001, 100_000])
    def test_jumps_exactly_at_quarter_points(self, T):
        sched = PhaseSchedule(T)
        b1, b2 = T // 4, 3 * T // 4
        values = [lambda_at(e, sched) for e in range(T)] if T < 2000 else None
        if values is not None:
            changes = [e for e in range(1, T) if values[e] != values[e - 1]]
            assert changes == [e for e in (b1, b2) if 0 < e < T]
        assert lambda_at(b1, sched)[0] == 0.01
        if b1 > 0:
            assert lambda_at(b1 - 1, sched)[0] == 0.001
        assert lambda_at(b2, sched) == (0.001, True)
        assert lambda_at(b2 - 1, sched) == (0.01, False)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            lambda_at(10, PhaseSchedule(10))
        with pytest.raises(ValueError):
            lambda_at(-1, PhaseSchedule(10))

    def test_flags_can_drop_weight_term_in_last_phase(self):
        sched = PhaseSchedule(100, weight_penalty_in_phase3=False)
        assert penalty_flags(10, sched) == (0.001, True, False)
        assert penalty_flags(80, sched) == (0.001, False, True)
        assert penalty_flags(80, PhaseSchedule(100)) == (0.001, True, True)

    def test_validation(self):
        with pytest.raises(ValueError):
            PhaseSchedule(0)
        with pytest.raises(ValueError):
            PhaseSchedule(10, lambda_phase2=-1.0)
        with pytest.raises(ValueError):
            RegularizerConfig(A=-1)
        with pytest.raises(ValueError):
            RegularizerConfig(swap_interval=0)


class TestDistance:
    def test_vertical_neighbour(self):
        net = zero_net((1, 3, 1))
        assert distance(net, (0, 0), (1, 1)) == 1.0

    def test_collapsed_geometry(self):
        net = zero_net((1, 5, 4, 1), A=0.0)
        assert all(np.all(D == 1.0) for D in edge_distances(net))

    def test_end_slot(self):
        net = zero_net((1, 21, 1), A=2.0)
        assert distance(net, (1, 20), (2, 0)) == pytest.approx(math.sqrt(2.0), rel=1e-15)
        assert distance(net, (1, 0), (0, 0)) == pytest.approx(math.sqrt(2.0), rel=1e-15)

    def test_non_adjacent(self):
        with pytest.raises(ValueError):
            distance(zero_net((1, 2, 2, 1)), (0, 0), (2, 0))

    def test_edge_distances_match_pointwise(self):
        net = zero_net((1, 4, 3, 1))
        for l, D in enumerate(edge_distances(net)):
            for i, j in np.ndindex(D.shape):
                assert D[i, j] == pytest.approx(distance(net, (l + 1, i), (l, j)), rel=1e-15)


class TestPenalty:
    def test_two_edge_example(self):
        net = zero_net((1, 1, 1))
        net.weights[0][0, 0], net.weights[1][0, 0] = 0.5, -0.25
        D = [np.array([[1.0]]), np.array([[2.0]])]
        assert penalty(net, 0.01, False, D).total == pytest.approx(0.01, rel=1e-15)

    def test_zero_lambda(self):
        assert penalty(random_net((1, 5, 1)), 0.0, True).total == 0.0

    def test_plain_lasso_when_collapsed(self):
        net = random_net((1, 5, 3, 1), A=0.0)
        expected = 0.003 * sum(np.abs(W).sum() for W in net.weights)
        assert penalty(net, 0.003, False).total == pytest.approx(expected, rel=1e-14)

    def test_bias_term_only_when_on(self):
        net = random_net((1, 4, 1))
        off, on = penalty(net, 0.01, False), penalty(net, 0.01, True)
        assert on.total - off.total == pytest.approx(0.01 * sum(np.abs(b).sum() for b in net.biases))

    def test_taped_penalty_matches_numpy(self):
        net = random_net((1, 3, 2, 1), seed=1)
        params = lift_params(net)
        reg = reg_penalty(net, params, 0.01, True)
        assert reg.value == pytest.approx(penalty(net, 0.01, True).total, rel=1e-13)
        grads = backward(reg)
        ref = penalty_grad(net, 0.01, True)
        for p_idx, i, j, leaf in params.leaves():
            idx = (i, j) if j is not None else (i,)
            assert grads[leaf] == pytest.approx(ref[p_idx][idx], rel=1e-13)

    def test_subgradient_is_zero_at_zero(self):
        net = zero_net((1, 3, 1))
        assert all(np.all(g == 0.0) for g in penalty_grad(net, 0.01, True))

    def test_weight_term_can_be_switched_off(self):
        net = random_net((1, 3, 1))
        assert penalty(net, 0.01, True, weights_on=False).weight_term == 0.0
        assert all(np.all(g == 0) for g in penalty_grad(net, 0.01, False, weights_on=False))


def weight_cost(net):
    return sum(float(np.sum(D * np.abs(W))) for D, W in zip(edge_distances(net), net.weights))


class TestSwaps:
    def test_collapsed_geometry_never_swaps(self):
        net = random_net((1, 8, 6, 1), A=0.0, seed=3)
        _, made = try_swaps(net, 0.01)
        assert made == 0

    def test_zero_lambda_never_swaps(self):
        _, made = try_swaps(random_net((1, 8, 1), seed=3), 0.0)
        assert made == 0

    def test_two_unit_example_matches_brute_force(self):
        # the heavy unit sits in the left slot but talks only to right-hand neighbours
        net = zero_net((2, 2, 2))
        net.weights[0][0, 1] = 2.0
        net.weights[1][1, 0] = 3.0
        net.weights[0][1, 0] = 0.1
        net.weights[1][0, 1] = 0.1
        alt = net.copy()
        swap(alt, 1, 0, 1)
        best = min(weight_cost(net), weight_cost(alt))
        assert weight_cost(alt) < weight_cost(net)
        _, made = try_swaps(net, 0.01)
        assert made == 1
        assert weight_cost(net) == pytest.approx(best, rel=1e-15)
        assert net == alt

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.lists(st.integers(2, 6), min_size=1, max_size=2))
    def test_swaps_never_raise_cost_and_keep_function(self, seed, hidden):
        net = random_net((1, *hidden, 1), seed=seed)
        t = np.random.default_rng(seed).uniform(0, 2 * np.pi, 100)
        before_cost, before_out = weight_cost(net), forward_value(net, t)
        try_swaps(net, 0.01)
        assert weight_cost(net) <= before_cost + 1e-12
        assert np.max(np.abs(forward_value(net, t) - before_out)) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 5))
    def test_result_is_a_local_optimum(self, seed, n):
        net = random_net((2, n, 2), seed=seed)
        _, first = try_swaps(net, 0.01)
        cost = weight_cost(net)
        for i, j in itertools.combinations(range(n), 2):
            trial = net.copy()
            swap(trial, 1, i, j)
            assert weight_cost(trial) >= cost - 1e-12 * max(cost, 1.0)
        _, again = try_swaps(net, 0.01)
        assert again == 0

    def test_callback_sees_every_swap(self):
        net = random_net((1, 9, 1), seed=21)
        seen = []
        _, made = try_swaps(net, 0.01, on_swap=lambda *a: seen.append(a))
        assert len(seen) == made
        assert all(layer == 1 and i != j for layer, i, j in seen)
