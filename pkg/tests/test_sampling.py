from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from protogame.catalog import get_protocol, list_protocols
from protogame.model import Param, check_constraints, eq, le, lt, ref
from protogame.sampling import SamplerConfig, SamplingError, sample_one, sample_params

PROTOCOLS = list_protocols()[0]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(PROTOCOLS), st.integers(-10**6, 10**6))
def test_samples_satisfy_every_constraint(name, seed):
    m = get_protocol(name).model
    for params in sample_params(m.constraints, m.params, seed, 5):
        assert check_constraints(params, m.constraints) is None
        assert set(params) == set(m.param_names)
        assert all(isinstance(v, F) for v in params.values())


def test_seeded_and_sliceable():
    m = get_protocol("s2pc").model
    a = sample_params(m.constraints, m.params, 42, 10)
    b = sample_params(m.constraints, m.params, 42, 10)
    assert a == b
    assert a[7] == sample_one(m.constraints, m.params, 49)
    assert a != sample_params(m.constraints, m.params, 43, 10)


def test_denominators_are_capped():
    cfg = SamplerConfig(denominator_cap=7)
    u, v = ref("u"), ref("v")
    for p in sample_params([lt(0, u), lt(u, v)], [Param("u"), Param("v")], 0, 50, cfg):
        assert all(x.denominator <= 7 for x in p.values())


def test_equality_constraints_are_pinned():
    u, v, w = ref("u"), ref("v"), ref("w")
    cs = [lt(0, u), eq(v, 2 * u + 1), le(v, w)]
    for p in sample_params(cs, [Param("u"), Param("v"), Param("w")], 3, 20):
        assert p["v"] == 2 * p["u"] + 1
        assert p["v"] <= p["w"]


def test_nonlinear_constraint_uses_fallback():
    u, v = ref("u"), ref("v")
    cs = [lt(0, u), lt(u * u, v), lt(v, 5)]
    for p in sample_params(cs, [Param("u"), Param("v")], 1, 10):
        assert check_constraints(p, cs) is None


def test_unsatisfiable_raises():
    u = ref("u")
    cfg = SamplerConfig(constructive_attempts=3, rejection_budget=200)
    with pytest.raises(SamplingError, match="unsatisfied after budget"):
        sample_params([lt(u, 0), lt(0, u)], [Param("u")], 0, 1, cfg)


def test_sample_count_must_be_positive():
    with pytest.raises(ValueError):
        sample_params([], [Param("u")], 0, 0)


def test_unconstrained_parameters_stay_in_magnitude():
    cfg = SamplerConfig(magnitude=3)
    for p in sample_params([], [Param("u")], 0, 50, cfg):
        assert -3 <= p["u"] <= 3
