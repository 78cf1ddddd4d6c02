import numpy as np
import pytest

from syncrds.grid import GridFunction, GridSpec, lap_apply_array, lap_solve_array
from syncrds.orders import (
    Interval,
    OrderRelation,
    closedness_check,
    interval_contains,
    leq,
    normality_probe,
)

POINTWISE = OrderRelation("pointwise_leq")
DUAL = OrderRelation("dual_preceq")


def gf(spec, values):
    return GridFunction(spec, np.asarray(values, dtype=float))


def test_reflexivity():
    spec = GridSpec(1.0, 8)
    rng = np.random.default_rng(0)
    x = gf(spec, rng.standard_normal(8))
    for order in (POINTWISE, DUAL):
        assert leq(order, x, x)


def test_constant_shift_is_increasing_in_both_orders():
    spec = GridSpec(1.0, 8)
    rng = np.random.default_rng(1)
    x = gf(spec, rng.standard_normal(8))
    y = gf(spec, x.u + 0.7)
    assert leq(POINTWISE, x, y)
    assert leq(DUAL, x, y)  # inverse monotonicity of the grid Laplacian


def test_dual_positive_with_mixed_nodal_signs():
    # v = hat at the middle of a 3-node grid; x = -Lap v has entries of both
    # signs yet is dual-nonnegative (its inverse-Laplacian image is v >= 0)
    spec = GridSpec(1.0, 3)  # h = 1/4
    v = np.array([0.0, 1.0, 0.0])
    x = -lap_apply_array(v.copy(), spec.h)
    np.testing.assert_allclose(x, [-16.0, 32.0, -16.0])
    assert (x < 0).any() and (x > 0).any()
    zero = gf(spec, np.zeros(3))
    assert leq(DUAL, zero, gf(spec, x))
    assert not leq(POINTWISE, zero, gf(spec, x))


def test_leq_rejects_grid_mismatch():
    a = gf(GridSpec(1.0, 4), np.zeros(4))
    b = gf(GridSpec(2.0, 4), np.zeros(4))
    with pytest.raises(ValueError):
        leq(POINTWISE, a, b)


def test_interval_membership():
    spec = GridSpec(1.0, 6)
    rng = np.random.default_rng(2)
    f = gf(spec, rng.standard_normal(6))
    # degenerate interval contains its endpoint
    assert interval_contains(Interval(f, f, POINTWISE), f)
    g = gf(spec, f.u + np.abs(rng.standard_normal(6)))
    iv = Interval(f, g, POINTWISE)
    mid = gf(spec, 0.5 * (f.u + g.u))
    assert interval_contains(iv, mid)
    outside = gf(spec, g.u + 1.0)
    assert not interval_contains(iv, outside)


def test_interval_dual_reduction():
    # under the dual order with f = 0, g = -Lap g_tilde (g_tilde >= 0),
    # x = -Lap (g_tilde / 2) is contained
    spec = GridSpec(1.0, 8)
    rng = np.random.default_rng(3)
    g_tilde = np.abs(rng.standard_normal(8))
    zero = gf(spec, np.zeros(8))
    g = gf(spec, -lap_apply_array(g_tilde.copy(), spec.h))
    x = gf(spec, -lap_apply_array(g_tilde / 2.0, spec.h))
    iv = Interval(zero, g, DUAL)
    assert interval_contains(iv, x)


def test_interval_requires_ordered_endpoints():
    spec = GridSpec(1.0, 4)
    lo = gf(spec, np.ones(4))
    hi = gf(spec, np.zeros(4))
    with pytest.raises(ValueError):
        Interval(lo, hi, POINTWISE)


def test_normality_probe_closed_form():
    # seminorm^2 = 2 + pi n^2, so ratio -> sqrt(pi)
    for n in (1, 8, 32, 64):
        res = normality_probe(n, 1e-4)
        exact = 2.0 + np.pi * n * n
        assert abs(res.seminorm**2 - exact) / exact <= 1e-4
    assert normality_probe(1, 1e-4).seminorm == pytest.approx(np.sqrt(2 + np.pi), rel=1e-4)
    for n in (32, 64):
        assert abs(normality_probe(n, 1e-4).ratio - np.sqrt(np.pi)) <= 0.02 * np.sqrt(np.pi)


def test_normality_probe_ratio_grows_toward_limit():
    # interval endpoints fixed, seminorm grows ~ n: non-normality evidence
    r8 = normality_probe(8, 1e-4)
    r64 = normality_probe(64, 1e-4)
    growth = r64.seminorm / r8.seminorm
    assert growth == pytest.approx(8.0, rel=0.01)


def test_normality_probe_argument_validation():
    with pytest.raises(ValueError):
        normality_probe(0, 1e-4)
    with pytest.raises(ValueError):
        normality_probe(4, 0.0)
    with pytest.raises(ValueError):
        normality_probe(4, 1e-2)


def test_closedness_constant_and_shrinking_sequences():
    spec = GridSpec(1.0, 5)
    rng = np.random.default_rng(4)
    x = gf(spec, rng.standard_normal(5))
    y = gf(spec, x.u + 1.0)
    assert closedness_check(POINTWISE, [x, x, x], [y, y, y], x, y)
    seq_x = [gf(spec, x.u - 1.0 / k) for k in range(1, 6)]
    assert closedness_check(POINTWISE, seq_x, [x] * 5, x, x)


def test_closedness_random_perturbed_sequences():
    spec = GridSpec(1.0, 6)
    rng = np.random.default_rng(5)
    for order in (POINTWISE, DUAL):
        for _ in range(200):
            base = rng.standard_normal(6)
            if order.kind == "dual_preceq":
                sep = -lap_apply_array(np.abs(rng.standard_normal(6)), spec.h)
            else:
                sep = np.abs(rng.standard_normal(6))
            x_lim, y_lim = gf(spec, base), gf(spec, base + sep)
            xs, ys = [], []
            for k in range(1, 6):
                # O(1/k) perturbations that keep the pair ordered
                if order.kind == "dual_preceq":
                    wiggle = -lap_apply_array(np.abs(rng.standard_normal(6)) / k, spec.h)
                else:
                    wiggle = np.abs(rng.standard_normal(6)) / k
                xs.append(gf(spec, base - wiggle))
                ys.append(gf(spec, base + sep + wiggle))
            assert closedness_check(order, xs, ys, x_lim, y_lim)


def test_closedness_reports_precondition_violation():
    spec = GridSpec(1.0, 4)
    x = gf(spec, np.zeros(4))
    y = gf(spec, -np.ones(4))
    with pytest.raises(ValueError, match="precondition"):
        closedness_check(POINTWISE, [x], [y], x, x)
    with pytest.raises(ValueError):
        closedness_check(POINTWISE, [], [], x, x)


def test_order_axioms_on_random_triples():
    spec = GridSpec(1.0, 8)
    rng = np.random.default_rng(6)
    for order in (POINTWISE, DUAL):
        for _ in range(1000):
            x = rng.standard_normal(8)
            if order.kind == "dual_preceq":
                d1 = -lap_apply_array(np.abs(rng.standard_normal(8)), spec.h)
                d2 = -lap_apply_array(np.abs(rng.standard_normal(8)), spec.h)
            else:
                d1 = np.abs(rng.standard_normal(8))
                d2 = np.abs(rng.standard_normal(8))
            fx, fy, fz = gf(spec, x), gf(spec, x + d1), gf(spec, x + d1 + d2)
            assert leq(order, fx, fy) and leq(order, fy, fz)
            assert leq(order, fx, fz)  # transitivity


def test_antisymmetry_up_to_tolerance():
    spec = GridSpec(1.0, 8)
    rng = np.random.default_rng(7)
    for order in (POINTWISE, DUAL):
        for _ in range(200):
            x = gf(spec, rng.standard_normal(8))
            y = gf(spec, x.u + rng.uniform(-order.tol / 4, order.tol / 4, size=8))
            if leq(order, x, y) and leq(order, y, x):
                gap = np.abs(order.representation(x) - order.representation(y)).max()
                assert gap <= 2 * order.tol


def test_dual_equals_pointwise_on_transformed():
    spec = GridSpec(1.0, 8)
    rng = np.random.default_rng(8)
    for _ in range(1000):
        x = gf(spec, rng.standard_normal(8))
        y = gf(spec, rng.standard_normal(8))
        lhs = leq(DUAL, x, y)
        vx = lap_solve_array(x.u, spec.h)
        vy = lap_solve_array(y.u, spec.h)
        rhs = bool(np.all(vx <= vy + DUAL.tol))
        assert lhs == rhs


def test_order_relation_validation():
    with pytest.raises(ValueError):
        OrderRelation("lexicographic")
    with pytest.raises(ValueError):
        OrderRelation("pointwise_leq", tol=-1.0)
