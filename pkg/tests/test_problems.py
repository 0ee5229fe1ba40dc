import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipinn.autodiff import Jet, Tape
from bipinn.problems import (
    CollocationSet,
    ProblemSpec,
    analytic_solution,
    boundary_residual,
    error_report,
    residual,
    sample_collocation,
    test_error as evaluate_error,
)


def const_jet(u, du=0.0, ddu=0.0):
    tape = Tape()
    return Jet(tape.constant(u), tape.constant(du), tape.constant(ddu))


class TestSpec:
    def test_defaults(self):
        spec = ProblemSpec.poisson()
        assert spec.coefficients == (1.0, 4.0, 9.0, 16.0)
        assert spec.domain == (0.0, 2 * math.pi)
        assert spec.boundary_conditions == [(0.0, 0.0), (2 * math.pi, 0.0)]

    def test_logistic_has_one_condition(self):
        spec = ProblemSpec.logistic()
        assert spec.boundary_conditions == [(0.0, 0.5)]

    def test_rejects_unknown_kind_and_empty_domain(self):
        with pytest.raises(ValueError):
            ProblemSpec("heat")
        with pytest.raises(ValueError):
            ProblemSpec.poisson(domain=(1.0, 1.0))

    def test_name(self):
        assert ProblemSpec.poisson((0, 4)).name == "4sin(2t)"
        assert ProblemSpec.logistic().name == "logistic"


class TestCollocation:
    def test_deterministic(self):
        a = sample_collocation(ProblemSpec.poisson(), seed=3)
        b = sample_collocation(ProblemSpec.poisson(), seed=3)
        assert np.array_equal(a.interior, b.interior)
        assert np.array_equal(a.test, b.test)

    def test_grid_step(self):
        c = sample_collocation(ProblemSpec.poisson())
        assert len(c.test) == 100
        assert np.allclose(np.diff(c.test), 2 * np.pi / 99, rtol=1e-12)
        assert c.test[-1] == 2 * np.pi

    def test_even_boundary_split(self):
        c = sample_collocation(ProblemSpec.poisson(), n_boundary=50)
        assert [len(b) for b in c.boundary] == [25, 25]
        assert np.all(c.boundary[0] == 0.0) and np.all(c.boundary[1] == 2 * np.pi)
        assert len(sample_collocation(ProblemSpec.logistic(), n_boundary=50).boundary[0]) == 50

    def test_uneven_split_rejected(self):
        with pytest.raises(ValueError):
            sample_collocation(ProblemSpec.poisson(), n_boundary=51)

    def test_interior_strictly_inside(self):
        c = sample_collocation(ProblemSpec.poisson(), n_interior=5000)
        assert np.all((c.interior > 0) & (c.interior < 2 * np.pi))


class TestResiduals:
    def test_zero_network_single_harmonic(self):
        spec = ProblemSpec.poisson((1, 0, 0, 0))
        assert residual(spec, const_jet(0.0), math.pi / 2).value == pytest.approx(-1.0, rel=1e-15)

    def test_source_vanishes_at_pi(self):
        spec = ProblemSpec.poisson()
        assert residual(spec, const_jet(0.3, 0.1, 0.7), math.pi).value == pytest.approx(0.7, abs=1e-13)

    @pytest.mark.parametrize("t", np.linspace(0.1, 6.0, 9))
    def test_exact_solution_zeroes_residual(self, t):
        spec = ProblemSpec.poisson()
        u = float(analytic_solution(spec, t))
        ddu = float(sum(c * math.sin(k * t) for k, c in enumerate(spec.coefficients, 1)))
        assert abs(residual(spec, const_jet(u, 0.0, ddu), t).value) < 1e-9

    def test_boundary_residuals(self):
        poisson, logistic = ProblemSpec.poisson(), ProblemSpec.logistic()
        tape = Tape()
        assert boundary_residual(poisson, tape.constant(0.3), 0).value == 0.3
        assert boundary_residual(poisson, tape.constant(0.0), 1).value == 0.0
        assert boundary_residual(logistic, tape.constant(0.5), 0).value == 0.0

    def test_logistic_residual(self):
        spec = ProblemSpec.logistic()
        t = 1.3
        u = float(analytic_solution(spec, t))
        assert abs(residual(spec, const_jet(u, u * (1 - u)), t).value) < 1e-15


class TestAnalytic:
    def test_benchmark_at_half_pi(self):
        assert float(analytic_solution(ProblemSpec.poisson(), math.pi / 2)) == pytest.approx(0.0, abs=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-20, 20), min_size=1, max_size=6))
    def test_boundaries_vanish_for_any_coefficients(self, coeffs):
        spec = ProblemSpec.poisson(coeffs)
        x = analytic_solution(spec, np.array([0.0, 2 * np.pi]))
        scale = max(1.0, sum(abs(c) for c in coeffs))
        assert x[0] == 0.0
        assert abs(x[1]) < 1e-14 * scale

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-20, 20), min_size=1, max_size=6), st.floats(0.05, 6.2))
    def test_second_derivative_is_source(self, coeffs, t):
        spec = ProblemSpec.poisson(coeffs)
        h = 1e-4
        x = lambda v: float(analytic_solution(spec, v))
        fd = (x(t + h) - 2 * x(t) + x(t - h)) / h**2
        assert fd == pytest.approx(float(spec.source(t)), abs=1e-5 * max(1.0, sum(map(abs, coeffs))))

    def test_logistic(self):
        spec = ProblemSpec.logistic()
        assert float(analytic_solution(spec, 0.0)) == 0.5
        assert float(analytic_solution(spec, 40.0)) == pytest.approx(1.0, abs=1e-15)


class _Fixed:
    def __init__(self, fn):
        self.fn = fn

    def predict(self, t):
        return self.fn(t)


class TestErrors:
    def test_exact_predictor(self):
        spec = ProblemSpec.poisson()
        colloc = sample_collocation(spec)
        rep = evaluate_error(_Fixed(lambda t: analytic_solution(spec, t)), spec, colloc)
        assert (rep.mse, rep.euclidean) == (0.0, 0.0)

    def test_constant_offset(self):
        spec = ProblemSpec.poisson()
        colloc = sample_collocation(spec)
        rep = evaluate_error(_Fixed(lambda t: analytic_solution(spec, t) + 0.01), spec, colloc)
        assert rep.mse == pytest.approx(1e-4, rel=1e-10)
        assert rep.euclidean == pytest.approx(0.1, rel=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=100, max_size=100))
    def test_euclidean_is_ten_root_mse_on_100_points(self, errs):
        rep = error_report(np.array(errs), np.zeros(100))
        assert rep.euclidean == pytest.approx(10 * math.sqrt(rep.mse), rel=1e-12, abs=1e-300)
