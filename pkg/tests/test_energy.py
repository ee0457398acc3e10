import math

import numpy as np
import pytest

from nlhomog import (
    ArgumentRangeError,
    PeriodicStepKernel,
    StepFunction,
    TripleWellPotential,
    evaluate,
    evaluate_quadrature,
    kernel_mean,
    make_lambda_kernel,
    optimal_profile,
    oscillating_profile,
    rect_integral,
)

INF_POT = TripleWellPotential()


def correlation_integral_unit_square(k):
    """Independent oracle for Int_{[0,1]^2} a(x-y) dx dy at eps=1:
    Int_{-1}^{1} (1-|d|) a(d) dd, done exactly segment by segment."""
    ends = np.append(k.breakpoints, 1.0)

    def seg_int(p, q):  # integral of (1-x) over [p, q]
        return (q - p) - 0.5 * (q * q - p * p)

    pos = sum(v * seg_int(b0, b1) for v, b0, b1 in zip(k.values, ends[:-1], ends[1:]))
    # negative side: a(-d) = a(1-d); substitute to reuse the same segments
    neg = sum(v * seg_int(1.0 - b1, 1.0 - b0) for v, b0, b1 in zip(k.values, ends[:-1], ends[1:]))
    return pos + neg


class TestRectIntegral:
    def test_constant_kernel_area(self):
        k = PeriodicStepKernel([0.0], [3.0])
        assert rect_integral(k, 0.1, 0.0, 0.5, 0.2, 0.7) == pytest.approx(0.75, abs=1e-14)

    def test_unit_square_eps_one(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        oracle = correlation_integral_unit_square(k)
        assert oracle == pytest.approx(1.5, abs=1e-14)
        assert rect_integral(k, 1.0, 0.0, 1.0, 0.0, 1.0) == pytest.approx(oracle, abs=1e-13)

    def test_unit_square_whole_periods_is_exact_mean(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        val = rect_integral(k, 1.0 / 64.0, 0.0, 1.0, 0.0, 1.0)
        assert val == pytest.approx(1.5, abs=1e-14)

    def test_against_quadrature(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        for eps, rect in [(1.0, (0.0, 1.0, 0.0, 1.0)), (0.22, (0.1, 0.7, 0.3, 0.9))]:
            exact = rect_integral(k, eps, *rect)
            n = 4000
            xs = np.linspace(rect[0], rect[1], n + 1)
            ys = np.linspace(rect[2], rect[3], n + 1)
            xm = 0.5 * (xs[:-1] + xs[1:])
            ym = 0.5 * (ys[:-1] + ys[1:])
            vals = k.eval((xm[:, None] - ym[None, :]) / eps)
            approx = vals.mean() * (rect[1] - rect[0]) * (rect[3] - rect[2])
            assert exact == pytest.approx(approx, abs=2e-3)

    def test_degenerate_rectangle(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        with pytest.raises(ValueError):
            rect_integral(k, 0.5, 0.3, 0.3, 0.0, 1.0)

    def test_eps_range_guard(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        with pytest.raises(ValueError):
            rect_integral(k, 0.0, 0.0, 1.0, 0.0, 1.0)
        with pytest.raises(ArgumentRangeError):
            rect_integral(k, 1e-13, 0.0, 1.0, 0.0, 1.0)


class TestEvaluate:
    def test_constant_function_matches_rect_oracle(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        for eps in (0.17, 1.0 / 3.0, 0.04):
            rep = evaluate(StepFunction.constant(0.4), INF_POT, k, eps)
            assert rep.value == pytest.approx(rect_integral(k, eps, 0, 1, 0, 1), abs=1e-14)
            assert rep.method == "exact"
            assert rep.bound == 0.0

    def test_constant_function_whole_periods_gives_mean(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        for m in (3, 8, 17, 256):
            rep = evaluate(StepFunction.constant(0.0), INF_POT, k, 1.0 / m)
            assert rep.value == pytest.approx(kernel_mean(k), abs=1e-12)

    def test_half_gap_is_infinite(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        rep = evaluate(StepFunction([0.0, 0.5], [0.0, 0.5]), INF_POT, k, 0.1)
        assert rep.value == math.inf

    def test_recovery_profile_hits_cell_minimum(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        u = oscillating_profile(-0.5, optimal_profile(0.5), 1.0 / 256.0)
        rep = evaluate(u, INF_POT, k, 1.0 / 256.0)
        assert abs(rep.value - 0.625) <= 1e-2
        # whole-period evaluation reproduces the cell energy to roundoff
        assert abs(rep.value - 0.625) <= 1e-10

    def test_translation_invariance_is_exact(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        u = StepFunction([0.0, 0.2, 0.5, 0.9], [-0.2, 0.8, -0.2, 0.8])
        shifted = u.shifted(0.37)
        assert evaluate(u, INF_POT, k, 0.2).value == evaluate(shifted, INF_POT, k, 0.2).value

    def test_indicator_complement_symmetry_is_exact(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        u = StepFunction([0.0, 0.2, 0.5, 0.9], [0.0, 1.0, 0.0, 1.0])
        flipped = StepFunction(u.breakpoints, 1.0 - u.values)
        assert evaluate(u, INF_POT, k, 0.13).value == evaluate(flipped, INF_POT, k, 0.13).value

    def test_constant_kernel_reduces_to_weighted_areas(self):
        # constant weight c: energy == c * sum_ij f(v_i - v_j) |I_i| |I_j|
        c = 1.7
        k = PeriodicStepKernel([0.0], [c])
        u = StepFunction([0.0, 0.2, 0.5, 0.9], [0.0, 1.0, 0.0, 1.0])
        lens = u.lengths
        w = np.array(
            [[1.0 if vi == vj else 0.0 for vj in u.values] for vi in u.values]
        )
        oracle = c * float(lens @ w @ lens)
        assert evaluate(u, INF_POT, k, 0.3).value == pytest.approx(oracle, abs=1e-15)

    def test_capped_monotone_in_cap(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        u = StepFunction([0.0, 0.5], [0.0, 0.5])
        vals = [
            evaluate(u, TripleWellPotential(cap=M), k, 0.1).value for M in (1.0, 2.0, 4.0, 8.0)
        ]
        assert vals == sorted(vals)
        assert vals[0] < vals[-1]

    def test_capped_equals_infinite_on_admissible(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        u = StepFunction([0.0, 0.2, 0.5, 0.9], [0.0, 1.0, 0.0, 1.0])
        ref = evaluate(u, INF_POT, k, 0.1).value
        for M in (1.0, 7.0, 100.0):
            assert evaluate(u, TripleWellPotential(cap=M), k, 0.1).value == pytest.approx(
                ref, abs=1e-12
            )

    def test_eps_validation(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        with pytest.raises(ValueError):
            evaluate(StepFunction.constant(0.0), INF_POT, k, -1.0)


class TestQuadrature:
    def test_self_consistency_flat(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        exact = evaluate(StepFunction.constant(0.0), INF_POT, k, 0.125)
        quad = evaluate_quadrature(StepFunction.constant(0.0), INF_POT, k, 0.125, n=4096)
        assert abs(exact.value - quad.value) <= quad.bound
        assert quad.method == "quadrature"

    def test_constant_kernel_is_exact(self):
        k = PeriodicStepKernel([0.0], [1.7])
        u = StepFunction([0.0, 0.3, 0.8], [0.0, 1.0, 0.0])
        exact = evaluate(u, INF_POT, k, 0.2)
        quad = evaluate_quadrature(u, INF_POT, k, 0.2, n=64)
        assert abs(exact.value - quad.value) <= 1e-12
        assert abs(exact.value - quad.value) <= quad.bound

    def test_step_function_capped(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        u = StepFunction([0.0, 0.5], [1.0, 0.0])
        exact = evaluate(u, TripleWellPotential(cap=10.0), k, 1.0 / 16.0)
        quad = evaluate_quadrature(u, TripleWellPotential(cap=10.0), k, 1.0 / 16.0, n=4096)
        assert abs(exact.value - quad.value) <= quad.bound

    def test_infinite_and_inadmissible_rejected(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        u = StepFunction([0.0, 0.5], [0.0, 0.5])
        with pytest.raises(ValueError):
            evaluate_quadrature(u, INF_POT, k, 0.1, n=64)

    def test_n_validation(self):
        k = make_lambda_kernel(1.0, 2.0, 0.5)
        with pytest.raises(ValueError):
            evaluate_quadrature(StepFunction.constant(0.0), INF_POT, k, 0.1, n=1)

    def test_randomized_agreement_within_bound(self):
        rng = np.random.default_rng(11)
        for i in range(10):
            nseg = int(rng.integers(1, 5))
            bp = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, nseg - 1))]) if nseg > 1 else np.array([0.0])
            bp = bp[np.concatenate([[True], np.diff(bp) > 1e-3])] if nseg > 1 else bp
            k = PeriodicStepKernel(bp, rng.uniform(0.5, 3.0, bp.size))
            ubp = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 0.9, 3))])
            z = float(rng.uniform(-1, 1))
            u = StepFunction(ubp, z + rng.integers(0, 2, 4).astype(float))
            eps = float(rng.uniform(1.0 / 64.0, 0.3))
            exact = evaluate(u, INF_POT, k, eps)
            quad = evaluate_quadrature(u, INF_POT, k, eps, n=1024)
            assert abs(exact.value - quad.value) <= quad.bound
