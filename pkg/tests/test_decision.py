import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrdpm import PosteriorSummary, global_null_probability, local_rejections, prune_decision
from mrdpm.decision import EXPAND, PRUNE, log_global_null_probability
from mrdpm.errors import DomainError


def summary(omegas):
    omegas = np.asarray(omegas, dtype=float)
    return PosteriorSummary(omegas, float(np.prod(1 - omegas)), 10, 1, 1.0)


unit = st.floats(0.0, 1.0)
xis = st.floats(0.001, 0.999)


class TestLocalRejections:
    def test_examples(self):
        assert local_rejections(summary([0.9, 0.2, 0.95]), 0.5) == {0, 2}
        assert local_rejections(summary([0.0, 0.0]), 0.5) == set()

    def test_boundary_is_not_rejected(self):
        assert local_rejections(summary([0.99]), 0.99) == set()

    @pytest.mark.parametrize("xi", [0.0, 1.0, -0.2, 1.5])
    def test_xi_range(self, xi):
        with pytest.raises(DomainError):
            local_rejections(summary([0.5]), xi)


class TestGlobalNull:
    @pytest.mark.parametrize(
        "omegas, expected", [([0, 0, 0], 1.0), ([0.5, 0.5], 0.25), ([1.0, 0.3], 0.0), ([1.0, 1.0], 0.0)]
    )
    def test_examples(self, omegas, expected):
        assert global_null_probability(summary(omegas)) == pytest.approx(expected, abs=1e-15)

    def test_accepts_plain_arrays(self):
        assert global_null_probability([0.5, 0.5]) == pytest.approx(0.25)

    def test_empty(self):
        with pytest.raises(DomainError):
            global_null_probability(np.array([]))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(unit, min_size=1, max_size=1000))
    def test_log_space_matches_product(self, omegas):
        direct = float(np.prod(1.0 - np.array(omegas)))
        assert global_null_probability(omegas) == pytest.approx(direct, abs=1e-12)


class TestPruneDecision:
    def test_examples(self):
        assert prune_decision(summary([0.9, 0.9]), 0.5) == EXPAND
        assert prune_decision(summary([0.1, 0.1]), 0.5) == PRUNE

    def test_all_certain(self):
        assert prune_decision(summary([1.0, 0.0, 0.0]), 0.5) == EXPAND
        assert log_global_null_probability([1.0]) == -np.inf

    @settings(max_examples=300, deadline=None)
    @given(w=unit, xi=xis)
    def test_single_position_matches_local_rule(self, w, xi):
        s = summary([w])
        assert (prune_decision(s, xi) == EXPAND) == (local_rejections(s, xi) == {0})

    @settings(max_examples=300, deadline=None)
    @given(omegas=st.lists(unit, min_size=1, max_size=50), xi=xis, data=st.data())
    def test_monotone_in_each_omega(self, omegas, xi, data):
        i = data.draw(st.integers(0, len(omegas) - 1))
        raised = list(omegas)
        raised[i] = data.draw(st.floats(omegas[i], 1.0))
        if prune_decision(summary(omegas), xi) == EXPAND:
            assert prune_decision(summary(raised), xi) == EXPAND

    def test_empty(self):
        with pytest.raises(DomainError):
            prune_decision(summary([]), 0.5)
