"""Tests for eigendecomposition, glueing and the solvable-sequence catalogue."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstc import chains, spectral
from qstc.errors import StructuralError, UnsupportedSequenceError, ValidationError


def random_symmetric_chain(rng, k):
    v = rng.uniform(0.1, 3.0, k + 1)
    n_g = k // 2 + 1 if k % 2 == 0 else (k + 1) // 2
    g = rng.uniform(0.1, 3.0, n_g)
    return chains.expand_symmetric(chains.SymmetricChainSpec(k=k, v=v, g=g))


class TestDecompose:
    def test_orthonormal_eigenvectors(self):
        h = chains.build_hamiltonian(chains.homogeneous_chain(14))
        s = spectral.decompose(h)
        assert np.allclose(s.eigenvectors.T @ s.eigenvectors, np.eye(14), atol=1e-12)

    def test_reconstruction(self):
        h = chains.build_hamiltonian(chains.homogeneous_chain(11)).toarray()
        s = spectral.decompose(h)
        rebuilt = s.eigenvectors @ np.diag(s.eigenvalues) @ s.eigenvectors.T
        assert np.allclose(rebuilt, h, atol=1e-12)

    def test_null_multiplicity_homogeneous(self):
        for n in (5, 8, 11, 14, 17):
            spec = chains.homogeneous_chain(n)
            assert spectral.null_multiplicity(chains.build_hamiltonian(spec)) == spec.k + 1

    def test_paired_flag(self):
        h = chains.build_hamiltonian(chains.homogeneous_chain(8))
        assert spectral.decompose(h).paired


class TestGlue:
    def test_child_length(self):
        parent = chains.homogeneous_chain(5)
        result = spectral.glue(parent, 1.0)
        assert result.child.n == 11

    def test_homogeneous_glue_is_homogeneous(self):
        parent = chains.homogeneous_chain(11)
        result = spectral.glue(parent, 1.0)
        assert result.child == chains.homogeneous_chain(23)

    def test_containment(self):
        rng = np.random.default_rng(3)
        parent = random_symmetric_chain(rng, 2)
        result = spectral.glue(parent, 1.3)
        lam_p = np.linalg.eigvalsh(chains.build_hamiltonian(parent).toarray())
        lam_c = np.linalg.eigvalsh(chains.build_hamiltonian(result.child).toarray())
        ok, worst = spectral.match_contained(lam_p, lam_c, tol=1e-10)
        assert ok and worst < 1e-10

    def test_block_diagonalization(self):
        rng = np.random.default_rng(4)
        parent = random_symmetric_chain(rng, 4)
        result = spectral.glue(parent, 0.7)
        h_c = chains.build_hamiltonian(result.child).toarray()
        block = result.transform.T @ h_c @ result.transform
        n = parent.n
        off = block.copy()
        off[: n + 1, : n + 1] = 0.0
        off[n + 1 :, n + 1 :] = 0.0
        assert np.max(np.abs(off)) < 1e-12
        assert np.allclose(block[: n + 1, : n + 1], result.block_a, atol=1e-12)

    def test_rejects_even_length(self):
        with pytest.raises(StructuralError):
            spectral.glue(chains.homogeneous_chain(8), 1.0)

    def test_rejects_asymmetric(self):
        spec = chains.ChainSpec(n_cells=3, t=(1, 2, 1), w=(1, 1, 1), g=(1,) * 4)
        with pytest.raises(StructuralError):
            spectral.glue(spec, 1.0)

    def test_rejects_nonpositive_bridge(self):
        with pytest.raises(ValidationError):
            spectral.glue(chains.homogeneous_chain(5), 0.0)


class TestMatchContained:
    def test_respects_multiplicity(self):
        ok, _ = spectral.match_contained([1.0, 1.0], [1.0, 2.0], tol=1e-12)
        assert not ok
        ok, worst = spectral.match_contained([1.0, 1.0], [1.0, 1.0, 2.0], tol=1e-12)
        assert ok and worst == 0.0

    def test_deviation_reported(self):
        ok, worst = spectral.match_contained([1.0], [1.0 + 5e-11, 2.0], tol=1e-10)
        assert ok
        assert math.isclose(worst, 5e-11, rel_tol=1e-3)


class TestVerifyLemmas:
    def test_homogeneous_all_pass(self):
        report = spectral.verify_lemmas(chains.homogeneous_chain(11))
        assert report.lemma1 and report.lemma2 and report.lemma3 and report.lemma4

    def test_even_length_partial(self):
        report = spectral.verify_lemmas(chains.homogeneous_chain(8))
        assert report.lemma1 is None and report.lemma4 is None
        assert report.lemma2 and report.lemma3

    @settings(max_examples=20, deadline=None)
    @given(
        k=st.integers(min_value=0, max_value=6),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_random_symmetric_chains(self, k, seed):
        rng = np.random.default_rng(seed)
        spec = random_symmetric_chain(rng, k)
        report = spectral.verify_lemmas(spec)
        assert report.lemma2 and report.lemma3
        if spec.n % 2 == 1:
            assert report.lemma1 and report.lemma4


class TestSequenceSpectrum:
    def test_base_lengths(self):
        assert spectral.sequence_lengths() == (5, 8, 14, 44)
        assert spectral.chain_length(5, 0) == 5
        assert spectral.chain_length(5, 2) == 23
        assert spectral.chain_length(8, 1) == 17

    @pytest.mark.parametrize(
        "n0,level",
        [(5, 0), (5, 1), (5, 2), (8, 0), (8, 1), (8, 2), (14, 0), (14, 1), (44, 0)],
    )
    def test_matches_numerics(self, n0, level):
        seq = spectral.sequence_spectrum(n0, level)
        h = chains.build_hamiltonian(chains.homogeneous_chain(seq.n))
        lam = np.linalg.eigvalsh(h.toarray())
        assert np.max(np.abs(np.sort(seq.eigenvalues) - lam)) < 1e-10

    def test_tag_count(self):
        seq = spectral.sequence_spectrum(8, 1)
        assert len(seq.tags) == seq.n
        assert seq.tags.count("0") == seq.k + 1

    def test_unknown_base_rejected(self):
        with pytest.raises(UnsupportedSequenceError):
            spectral.sequence_spectrum(7, 0)

    def test_negative_level_rejected(self):
        with pytest.raises(ValidationError):
            spectral.sequence_spectrum(5, -1)

    def test_to_dict(self):
        seq = spectral.sequence_spectrum(5, 0)
        payload = spectral.spectrum_to_dict(seq)
        assert payload["null_multiplicity"] == 1
        assert len(payload["eigenvalues"]) == 5
        assert len(payload["tags"]) == 5
