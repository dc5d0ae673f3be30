"""Tests for PST inverse designs, the dimerized bound and PGT search."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstc import chains, design, dynamics
from qstc.errors import InfeasibleDesignError, ValidationError


def feasible_v1(family, k, frac):
    lo, hi = design.feasible_interval(family, k)
    return math.sqrt(lo + frac * (hi - lo))


class TestFeasibleInterval:
    def test_n8_k1(self):
        lo, hi = design.feasible_interval("n8", 1)
        assert lo == pytest.approx(15.0 / 6.0)
        assert hi == pytest.approx(4.0)

    def test_nonempty_for_many_k(self):
        for family in design.FAMILIES:
            for k in range(1, 30):
                lo, hi = design.feasible_interval(family, k)
                assert lo < hi

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValidationError):
            design.feasible_interval("n8", 0)
        with pytest.raises(ValidationError):
            design.feasible_interval("n20", 1)


class TestPstN8:
    @pytest.mark.parametrize("k", [1, 2, 3, 5])
    def test_spectrum_is_consecutive_integers(self, k):
        d = design.design_pst_n8(k, feasible_v1("n8", k, 0.5))
        lam = np.linalg.eigvalsh(chains.build_hamiltonian(d.chain()).toarray())
        target = np.sort([0, 0, k, -k, k + 1, -(k + 1), k + 2, -(k + 2)])
        assert np.max(np.abs(lam - target)) < 1e-9

    def test_perfect_arrival_at_pi(self):
        d = design.design_pst_n8(2, feasible_v1("n8", 2, 0.3))
        trace = dynamics.transfer_probability(d.chain(), [math.pi, 2 * math.pi])
        assert abs(trace.probability[0] - 1.0) < 1e-9
        assert abs(trace.probability[1]) < 1e-9

    def test_infeasible_rejected_with_interval(self):
        with pytest.raises(InfeasibleDesignError) as err:
            design.design_pst_n8(1, 2.5)
        lo, hi = err.value.interval
        assert lo == pytest.approx(2.5)
        assert hi == pytest.approx(4.0)

    def test_trace_identity(self):
        # sum of squared eigenvalues equals twice the sum of squared couplings
        k = 3
        d = design.design_pst_n8(k, feasible_v1("n8", k, 0.6))
        spec = d.chain()
        coupling_sq = sum(c * c for c in spec.t + spec.w + spec.g)
        target_sq = 2 * (k * k + (k + 1) ** 2 + (k + 2) ** 2)
        assert coupling_sq * 2 == pytest.approx(target_sq, abs=1e-10)

    def test_closed_form_independent_of_v1(self):
        k = 2
        series = design.probability_closed_form_pst("n8", k)
        times = np.linspace(0.0, 10.0, 200)
        for frac in (0.2, 0.5, 0.8):
            d = design.design_pst_n8(k, feasible_v1("n8", k, frac))
            trace = dynamics.transfer_probability(d.chain(), times)
            assert np.max(np.abs(series.probability(times) - trace.probability)) < 1e-10


class TestPstN11:
    def test_reference_couplings(self):
        # k=1, v1=2 has the closed-form solution
        # (v2, v3, g1, g2) = (sqrt(63)/4, sqrt(5), sqrt(3/2), 3/4)
        d = design.design_pst_n11(1, 2.0)
        assert d.couplings["v2"] == pytest.approx(math.sqrt(63.0) / 4.0, abs=1e-12)
        assert d.couplings["v3"] == pytest.approx(math.sqrt(5.0), abs=1e-12)
        assert d.couplings["g1"] == pytest.approx(math.sqrt(1.5), abs=1e-12)
        assert d.couplings["g2"] == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 4])
    def test_spectrum(self, k):
        d = design.design_pst_n11(k, feasible_v1("n11", k, 0.5))
        lam = np.linalg.eigvalsh(chains.build_hamiltonian(d.chain()).toarray())
        target = np.sort([0] * 3 + [s * (k + j) for j in range(4) for s in (1, -1)])
        assert np.max(np.abs(lam - target)) < 1e-9

    def test_perfect_arrival_at_pi(self):
        d = design.design_pst_n11(1, 2.0)
        trace = dynamics.transfer_probability(d.chain(), [math.pi])
        assert abs(trace.probability[0] - 1.0) < 1e-9

    def test_infeasible_rejected(self):
        lo, hi = design.feasible_interval("n11", 1)
        with pytest.raises(InfeasibleDesignError) as err:
            design.design_pst_n11(1, math.sqrt(hi) + 0.1)
        assert err.value.interval == (lo, hi)

    def test_closed_form_matches_numerics(self):
        series = design.probability_closed_form_pst("n11", 1)
        times = np.linspace(0.0, 10.0, 200)
        d = design.design_pst_n11(1, 2.0)
        trace = dynamics.transfer_probability(d.chain(), times)
        assert np.max(np.abs(series.probability(times) - trace.probability)) < 1e-10


class TestDimerized:
    def test_bound_at_unity(self):
        assert design.dimerized_upper_bound(1.0) == pytest.approx(1.0, abs=1e-15)

    def test_bound_value(self):
        w = 0.8
        expected = (w * (1 + w * w) / (1 + w**4)) ** 2
        assert design.dimerized_upper_bound(w) == pytest.approx(expected)

    def test_series_matches_numerics(self):
        w, g = 0.7, 1.3
        times = np.linspace(0.0, 200.0, 2000)
        series = design.dimerized_series(w, g)
        trace = dynamics.transfer_probability(design.dimerized_chain(w, g), times)
        assert np.max(np.abs(series.probability(times) - trace.probability)) < 1e-12

    def test_amplitude_ceiling_equals_bound(self):
        # the coefficient absolute sum squares to the g-independent envelope
        for w in (0.3, 0.6, 0.9):
            series = design.dimerized_series(w, 1.1)
            assert series.amplitude_ceiling**2 == pytest.approx(
                design.dimerized_upper_bound(w), abs=1e-12
            )

    def test_coefficient_sum_zero(self):
        series = design.dimerized_series(0.5, 0.9)
        assert abs(series.coefficient_sum) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(
        w=st.floats(min_value=0.2, max_value=1.5),
        g=st.floats(min_value=0.2, max_value=2.5),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_probability_never_exceeds_bound(self, w, g, seed):
        rng = np.random.default_rng(seed)
        times = rng.uniform(0.0, 500.0, 200)
        prob = design.dimerized_probability_exact(w, g, times).probability
        assert max(prob) <= design.dimerized_upper_bound(w) + 1e-9

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            design.dimerized_upper_bound(0.0)
        with pytest.raises(ValidationError):
            design.dimerized_chain(1.0, -1.0)


class TestPgtSearch:
    def test_finds_pst_arrival(self):
        series = design.probability_closed_form_pst("n8", 1)
        result = design.pgt_search(series, 1e-6, 10.0)
        assert result.reached
        assert abs(result.t_found - math.pi) < 1e-6
        assert result.best_infidelity < 1e-6

    def test_not_reached_record(self):
        series = dynamics.chain_series(chains.homogeneous_chain(17))
        result = design.pgt_search(series, 1e-6, 50.0)
        assert not result.reached
        assert result.t_found is None
        assert 0.0 <= result.best_t <= 50.0
        assert 0.0 < result.best_infidelity < 1.0

    def test_homogeneous_n17_epsilon_5_percent(self):
        series = dynamics.chain_series(chains.homogeneous_chain(17))
        result = design.pgt_search(series, 0.05, 1000.0)
        assert result.reached
        assert 1.0 - series.probability(result.t_found)[0] < 0.05

    def test_input_validation(self):
        series = design.probability_closed_form_pst("n8", 1)
        with pytest.raises(ValidationError):
            design.pgt_search(series, 0.0, 10.0)
        with pytest.raises(ValidationError):
            design.pgt_search(series, 0.5, -1.0)

    def test_to_dict(self):
        series = design.probability_closed_form_pst("n8", 1)
        payload = design.pgt_search(series, 1e-6, 10.0).to_dict()
        assert payload["reached"] is True
        assert payload["epsilon"] == 1e-6
