import numpy as np
import pytest
from hypothesis import strategies as st

from bipinn.network import Architecture, GeometricNetwork, init_xavier

# (criterion number, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def zero_net(sizes, output_bias=0.0, activation="sinlu", A=2.0) -> GeometricNetwork:
    net = init_xavier(Architecture(tuple(sizes), activation, A=A), seed=0, bias=0.0)
    for W in net.weights:
        W[:] = 0.0
    net.biases[-1][:] = output_bias
    return net


def random_net(sizes, seed=0, activation="sinlu", A=2.0, bias_scale=0.3) -> GeometricNetwork:
    """Xavier weights plus random (not constant) biases, so bias gradients are exercised."""
    net = init_xavier(Architecture(tuple(sizes), activation, A=A), seed=seed)
    rng = np.random.default_rng(seed + 10_000)
    for b in net.biases:
        b[:] = rng.uniform(-bias_scale, bias_scale, size=b.shape)
    return net


@st.composite
def small_architectures(draw, max_hidden_layers=2, max_units=8):
    depth = draw(st.integers(1, max_hidden_layers))
    hidden = draw(st.lists(st.integers(1, max_units), min_size=depth, max_size=depth))
    return (1, *hidden, 1)


@pytest.fixture
def net_1_21_1():
    return init_xavier(Architecture((1, 21, 1)), seed=0)
