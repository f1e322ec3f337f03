import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_instance, unit
from spherereg import cost
from spherereg.cost import Agg, CostSpec, Lip, check_log_lipschitz, evaluate, evaluate_many, from_residuals
from spherereg.instance import RegressionInstance

PRESETS = {
    "l1": cost.lp(1.0),
    "l2": cost.lp(2.0),
    "l3.5": cost.lp(3.5),
    "l0.5": cost.lp(0.5),
    "l2sq": cost.lp_power(2.0),
    "l1.5^1.5": cost.lp_power(1.5),
    "huber": cost.huber(2.0),
    "huber_p2": cost.huber(5.0, 2.0),
    "trimmed": cost.trimmed(1.0, 2),
    "trimmed_p2": cost.trimmed(2.0, 1),
}


def _residual_instance(r):
    # x = e_1 gives residuals |1 - b_i| = r_i
    r = np.asarray(r, dtype=float)
    A = np.tile([1.0, 0.0], (r.size, 1))
    return RegressionInstance(A, 1.0 - r)


E1 = np.array([1.0, 0.0])


def test_consistent_instance_costs_zero(rng):
    inst, x = random_instance(rng, 10, 3, planted=True)
    assert evaluate(cost.lp(2.0), inst, x) <= 1e-12


def test_clipped_sum():
    spec = CostSpec(Lip("huber_clip", 2.0), Agg("sum"))
    assert evaluate(spec, _residual_instance([5.0, 1.0]), E1) == 3.0


def test_trimmed_example():
    assert evaluate(cost.trimmed(1.0, 1), _residual_instance([3.0, 1.0, 7.0]), E1) == 4.0


def test_trim_count_must_leave_rows():
    inst = _residual_instance([3.0, 1.0, 7.0])
    with pytest.raises(ValueError, match="trim count exceeds rows"):
        evaluate(cost.trimmed(1.0, 3), inst, E1)
    with pytest.raises(ValueError, match="trim count exceeds rows"):
        evaluate_many(cost.trimmed(1.0, 3), inst, E1[None])


def test_constants():
    assert cost.lp(3.0).r == 1 and cost.lp(3.0).s == 1
    assert cost.lp_power(2.5).r == 2.5
    assert cost.huber(3.0).r == 1
    assert cost.trimmed(2.0, 4).s == 1


def test_lifted_factor_examples():
    assert cost.lifted_factor(cost.lp(1.0), 2) == 4
    assert cost.lifted_factor(cost.lp_power(2.0), 3) == 256
    for d in range(2, 7):
        assert cost.lifted_factor(cost.lp(1.0), d) == 4 ** (d - 1)


def test_loose_factor_never_tighter():
    for z in (0.5, 1.0, 2.0, 3.0):
        spec = cost.lp_power(z)
        assert cost.loose_factor(spec, 3) >= cost.lifted_factor(spec, 3)
    assert cost.loose_factor(cost.lp_power(0.5), 3) == 16
    assert cost.lifted_factor(cost.lp_power(0.5), 3) == 4


def test_log_lipschitz_examples():
    assert check_log_lipschitz(Lip(), 1.0)
    assert check_log_lipschitz(Lip("power", 2.0), 2.0)
    assert not check_log_lipschitz(Lip("power", 2.0), 1.5)
    assert check_log_lipschitz(Lip("huber_clip", 2.0), 1.0)
    assert not check_log_lipschitz(Lip(), 0.9)


def test_log_lipschitz_aggregators():
    for agg in (Agg("lp_norm", 1.0), Agg("lp_norm", 2.0), Agg("lp_norm", 0.3), Agg("sum"), Agg("lp_norm_trimmed", 1.0, 2)):
        assert check_log_lipschitz(agg, 1.0)
        assert not check_log_lipschitz(agg, 0.8)


def test_log_lipschitz_needs_samples():
    with pytest.raises(ValueError):
        check_log_lipschitz(Lip(), 1.0, samples=10)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(PRESETS)), st.integers(0, 10_000), st.floats(1.0, 16.0))
def test_per_row_factor_lifts_to_cost(name, seed, c):
    spec = PRESETS[name]
    rng = np.random.default_rng(seed)
    n = 8
    r_star = rng.uniform(0.0, 50.0, n)
    r_prime = r_star * rng.uniform(0.0, c, n)
    w = rng.uniform(0.1, 2.0, n)
    lhs = from_residuals(spec, r_prime, w)
    rhs = from_residuals(spec, r_star, w)
    assert lhs <= c ** (spec.r * spec.s) * rhs + 1e-9 * (1 + rhs)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(PRESETS)), st.integers(0, 10_000))
def test_monotone(name, seed):
    spec = PRESETS[name]
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.0, 50.0, 7)
    bigger = r + rng.uniform(0.0, 5.0, 7)
    assert from_residuals(spec, bigger, np.ones(7)) >= from_residuals(spec, r, np.ones(7)) - 1e-12


def test_trimming_never_increases(rng):
    for _ in range(50):
        r = rng.uniform(0, 10, 9)
        for p in (0.5, 1.0, 2.0):
            base = from_residuals(cost.lp(p), r, np.ones(9))
            for k in (1, 3, 8):
                assert from_residuals(cost.trimmed(p, k), r, np.ones(9)) <= base + 1e-12


def test_integer_weights_match_duplicated_rows(rng):
    inst = random_instance(rng, 6, 3)
    reps = rng.integers(1, 4, 6)
    weighted = RegressionInstance(inst.A, inst.b, reps)
    dup = RegressionInstance(np.repeat(inst.A, reps, axis=0), np.repeat(inst.b, reps))
    x = unit(rng, 3)
    for name in ("l1", "l2", "l3.5", "l0.5", "l2sq", "huber"):
        spec = PRESETS[name]
        assert evaluate(spec, weighted, x) == pytest.approx(evaluate(spec, dup, x), rel=1e-12)


def test_zero_weight_rows_ignored(rng):
    inst = random_instance(rng, 6, 3)
    w = np.array([1, 1, 0, 1, 0, 1.0])
    x = unit(rng, 3)
    for spec in PRESETS.values():
        full = evaluate(spec, RegressionInstance(inst.A, inst.b, w), x)
        keep = w > 0
        assert full == pytest.approx(evaluate(spec, RegressionInstance(inst.A[keep], inst.b[keep]), x), rel=1e-12)


def test_power_norm_matches_direct_formula(rng):
    r = rng.uniform(0, 3, 10)
    for p in (0.1, 0.5, 1.5, 3.5):
        assert from_residuals(cost.lp(p), r, np.ones(10)) == pytest.approx(np.sum(r**p) ** (1 / p), rel=1e-12)


def test_power_norm_no_overflow():
    r = np.array([1e300, 2e300, 0.0])
    val = from_residuals(cost.lp(3.5), r, np.ones(3))
    assert np.isfinite(val) and val == pytest.approx((1 + 2**3.5) ** (1 / 3.5) * 1e300, rel=1e-10)
    assert from_residuals(cost.lp(0.5), np.zeros(3), np.ones(3)) == 0.0


def test_batch_equals_single(rng):
    inst = random_instance(rng, 15, 3)
    X = unit(rng, 3, 40)
    for spec in PRESETS.values():
        batch = evaluate_many(spec, inst, X)
        single = np.array([evaluate(spec, inst, x) for x in X])
        assert np.allclose(batch, single, rtol=1e-9, atol=1e-9)


def test_quadratic_fast_path(rng):
    inst = RegressionInstance(rng.uniform(0, 200, (50, 3)), rng.uniform(0, 200, 50), rng.uniform(0, 2, 50))
    X = unit(rng, 3, 100)
    fast = evaluate_many(cost.lp_power(2.0), inst, X)
    slow = (inst.residuals(X) ** 2) @ inst.weights
    assert np.allclose(fast, slow, rtol=1e-9)


def test_record_round_trip():
    for spec in PRESETS.values():
        assert CostSpec.from_record(spec.to_record()) == spec
    assert cost.lp_power(2.0).to_record() == "lip=power z=2.0 agg=sum"


@pytest.mark.parametrize(
    "make",
    [
        lambda: Lip("cubic"),
        lambda: Lip("power"),
        lambda: Lip("huber_clip", -1.0),
        lambda: Lip("identity", 2.0),
        lambda: Agg("median"),
        lambda: Agg("lp_norm", 0.0),
        lambda: Agg("lp_norm", 1.0, 2),
    ],
)
def test_invalid_descriptors(make):
    with pytest.raises(ValueError):
        make()
