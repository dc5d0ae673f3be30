"""Tests for time evolution, cosine series and peak searches."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qstc import chains, dynamics, spectral
from qstc.errors import UnsupportedInputError, ValidationError

SQRT3 = math.sqrt(3.0)

# Frozen oracle: exact corner-to-corner amplitude of the homogeneous N=17
# chain as a six-frequency cosine series (coefficients sum to zero, absolute
# values sum to one).
P17_FREQS = (
    1.0,
    2.0,
    math.sqrt(2.0),
    SQRT3,
    math.sqrt(3.0 - SQRT3),
    math.sqrt(3.0 + SQRT3),
)
P17_COEFFS = (
    -2.0 / 12.0,
    -1.0 / 12.0,
    -3.0 / 12.0,
    2.0 / 12.0,
    (2.0 + SQRT3) / 12.0,
    (2.0 - SQRT3) / 12.0,
)


def p17_reference(times):
    times = np.asarray(times, dtype=float)
    amp = np.cos(np.outer(times, P17_FREQS)) @ np.asarray(P17_COEFFS)
    return amp**2


class TestFidelity:
    def test_endpoints(self):
        assert dynamics.fidelity_from_probability(0.0) == pytest.approx(0.5)
        assert dynamics.fidelity_from_probability(1.0) == pytest.approx(1.0)

    def test_monotone(self):
        p = np.linspace(0.0, 1.0, 50)
        f = dynamics.fidelity_from_probability(p)
        assert np.all(np.diff(f) > 0)


class TestTransferProbability:
    def test_starts_at_zero(self):
        trace = dynamics.transfer_probability(chains.homogeneous_chain(11), [0.0])
        assert trace.probability[0] < 1e-28

    def test_matches_matrix_exponential(self):
        spec = chains.homogeneous_chain(8)
        h = chains.build_hamiltonian(spec)
        a, b = h.corner_sites
        times = np.linspace(0.0, 20.0, 40)
        trace = dynamics.transfer_probability(spec, times)
        dense = h.toarray()
        for t, p in zip(times, trace.probability):
            u = expm(-1j * dense * t)
            assert abs(p - abs(u[b, a]) ** 2) < 1e-12

    def test_probability_bounded(self):
        rng = np.random.default_rng(7)
        spec = chains.ChainSpec(
            n_cells=3,
            t=rng.uniform(0.1, 3.0, 3),
            w=rng.uniform(0.1, 3.0, 3),
            g=rng.uniform(0.1, 3.0, 4),
        )
        trace = dynamics.transfer_probability(spec, np.linspace(0.0, 100.0, 500))
        assert max(trace.probability) <= 1.0
        assert min(trace.probability) >= 0.0

    def test_input_validation(self):
        spec = chains.homogeneous_chain(5)
        with pytest.raises(ValidationError):
            dynamics.transfer_probability(spec, [])
        with pytest.raises(ValidationError):
            dynamics.transfer_probability(spec, [0.0, np.inf])

    def test_csv_format(self, tmp_path):
        trace = dynamics.transfer_probability(chains.homogeneous_chain(5), [0.0, 1.0])
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,P,f"
        assert len(lines) == 3
        assert lines[2].startswith("1,")


class TestCosineSeries:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            dynamics.CosineSeries((1.0, 2.0), (0.5,))

    def test_negative_frequency_rejected(self):
        with pytest.raises(ValidationError):
            dynamics.CosineSeries((-1.0,), (0.5,))

    def test_amplitude_ceiling(self):
        series = dynamics.CosineSeries((1.0, 2.0), (0.5, -0.5))
        assert series.amplitude_ceiling == 1.0
        assert series.coefficient_sum == 0.0
        t = np.linspace(0.0, 50.0, 2000)
        assert np.max(np.abs(series.amplitude(t))) <= series.amplitude_ceiling + 1e-12


class TestClosedForm:
    def test_homogeneous_n17_reference(self):
        # the derived series must agree with the frozen six-term oracle
        series = dynamics.chain_series(chains.homogeneous_chain(17))
        assert np.allclose(np.sort(series.frequencies), np.sort(P17_FREQS), atol=1e-12)
        order = np.argsort(series.frequencies)
        ref_order = np.argsort(P17_FREQS)
        assert np.allclose(
            np.asarray(series.coefficients)[order],
            np.asarray(P17_COEFFS)[ref_order],
            atol=1e-12,
        )

    def test_series_matches_numerics(self):
        spec = chains.homogeneous_chain(17)
        times = np.linspace(0.0, 100.0, 1000)
        series = dynamics.chain_series(spec)
        trace = dynamics.transfer_probability(spec, times)
        assert np.max(np.abs(series.probability(times) - trace.probability)) < 1e-12

    def test_coefficient_sum_zero(self):
        series = dynamics.chain_series(chains.homogeneous_chain(11))
        assert abs(series.coefficient_sum) < 1e-12

    def test_non_mirror_pair_rejected(self):
        h = chains.build_hamiltonian(chains.homogeneous_chain(11))
        s = spectral.decompose(h)
        with pytest.raises(UnsupportedInputError):
            dynamics.closed_form_probability(s, 0, 1)

    @settings(max_examples=20, deadline=None)
    @given(
        k=st.integers(min_value=0, max_value=5),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_series_equals_numerics_random_symmetric(self, k, seed):
        rng = np.random.default_rng(seed)
        v = rng.uniform(0.2, 2.5, k + 1)
        n_g = k // 2 + 1 if k % 2 == 0 else (k + 1) // 2
        g = rng.uniform(0.2, 2.5, n_g)
        spec = chains.expand_symmetric(chains.SymmetricChainSpec(k=k, v=v, g=g))
        times = rng.uniform(0.0, 200.0, 50)
        series = dynamics.chain_series(spec)
        trace = dynamics.transfer_probability(spec, times)
        assert np.max(np.abs(series.probability(times) - trace.probability)) < 1e-9


class TestPeakSearch:
    def test_finds_exact_peak(self):
        # P(t) = cos^2((t - pi) / 2) shifted: use a two-term series whose
        # amplitude hits 1 at t = pi: 0.5 cos(t) - 0.5 cos(2t) has |amp| 1 at pi
        series = dynamics.CosineSeries((1.0, 2.0), (-0.5, 0.5))
        t_star, p_star = dynamics.peak_search(series, 10.0)
        assert abs(t_star - math.pi) < 1e-6
        assert abs(p_star - 1.0) < 1e-12

    def test_respects_window(self):
        series = dynamics.CosineSeries((1.0, 2.0), (-0.5, 0.5))
        t_star, p_star = dynamics.peak_search(series, 1.0)
        assert t_star <= 1.0
        assert p_star < 1.0

    def test_rejects_bad_window(self):
        series = dynamics.CosineSeries((1.0,), (1.0,))
        with pytest.raises(ValidationError):
            dynamics.peak_search(series, 0.0)


class TestP17Oracle:
    def test_numerics_match_reference(self):
        spec = chains.homogeneous_chain(17)
        times = np.linspace(0.0, 500.0, 5000)
        trace = dynamics.transfer_probability(spec, times)
        assert np.max(np.abs(np.asarray(trace.probability) - p17_reference(times))) < 1e-9
