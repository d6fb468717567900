import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tritopic.corpus import EmbeddingMatrix, Segment, VideoCorpus, attach
from tritopic.errors import ConfigError, DimensionError
from tritopic.fusion import (
    FusionWeights,
    build_mode_matrix,
    concat_pair,
    fuse,
    fuse_corpus,
    fuse_segment,
    gate,
    normalize_truncate,
    scale_from_sims,
)


def make_corpus(n, d_t=6, d_a=5, d_v=4, seed=0):
    rng = np.random.default_rng(seed)
    segments = [
        Segment(video_id="v", index=i, t_start=float(i), t_end=float(i + 1), text=f"s{i}")
        for i in range(n)
    ]
    corpus = VideoCorpus(video_id="v", segments=segments)
    for modality, d in (("text", d_t), ("audio", d_a), ("visual", d_v)):
        data = rng.normal(size=(n, d))
        attach(corpus, EmbeddingMatrix(modality=modality, data=data))
    return corpus


class TestNormalizeTruncate:
    def test_three_four_five(self):
        out = normalize_truncate(np.array([3.0, 4.0, 0.0, 0.0]), 2)
        assert np.allclose(out, [0.6, 0.8])

    def test_unit_vector_unchanged(self):
        v = np.array([0.6, 0.8])
        assert np.allclose(normalize_truncate(v, 2), v)

    def test_zero_stays_zero(self):
        out = normalize_truncate(np.zeros(5), 3)
        assert np.array_equal(out, np.zeros(3))
        assert np.isfinite(out).all()

    def test_too_short_rejected(self):
        with pytest.raises(DimensionError):
            normalize_truncate(np.ones(2), 3)


class TestGate:
    def test_aligned_inputs_gate_one(self):
        e = np.array([1.0, 0.0, 0.0])
        sims, s = gate(e, e, e)
        assert sims == (1.0, 1.0, 1.0)
        assert s == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_inputs_gate_half(self):
        t, a, v = np.eye(3)
        sims, s = gate(t, a, v)
        assert sims == (0.0, 0.0, 0.0)
        assert s == pytest.approx(0.5, abs=1e-12)

    def test_mixed_signs_gate_third(self):
        t = np.array([1.0, 0.0])
        a = -t
        v = t.copy()
        sims, s = gate(t, a, v)
        assert sims == (-1.0, 1.0, -1.0)
        assert s == pytest.approx(1.0 / 3.0, abs=1e-12)

    @given(
        sims=st.tuples(*[st.floats(-1, 1) for _ in range(3)]),
        bump=st.floats(1e-6, 0.5),
        coord=st.integers(0, 2),
    )
    @settings(max_examples=100, deadline=None)
    def test_strictly_increasing_per_similarity(self, sims, bump, coord):
        raised = list(sims)
        raised[coord] = min(1.0, raised[coord] + bump)
        if raised[coord] - sims[coord] < 1e-9:  # below float64 resolution after +3
            return
        assert scale_from_sims(*raised) > scale_from_sims(*sims)

    @given(sims=st.tuples(*[st.floats(-1, 1) for _ in range(3)]))
    @settings(max_examples=100, deadline=None)
    def test_bounds(self, sims):
        s = scale_from_sims(*sims)
        assert 0.0 <= s <= 1.0
        if s == 1.0:  # up to rounding, only all-ones reaches the ceiling
            assert all(x >= 1.0 - 1e-12 for x in sims)


class TestFuse:
    def test_output_length_seven_blocks(self):
        e = np.zeros(4)
        e[0] = 1.0
        out = fuse(e, e, e, FusionWeights(), 1.0)
        assert out.vector.shape == (28,)

    def test_basis_vector_fixture(self):
        e = np.zeros(4)
        e[0] = 1.0
        out = fuse(e, e, e, FusionWeights(0.34, 0.33, 0.33), 1.0)
        expected = np.zeros(28)
        expected[[0, 4, 8, 12, 16, 20, 24]] = [0.34, 0.33, 0.33, 1.0, 1.0, 1.0, 1.0]
        expected /= np.linalg.norm(expected)
        assert np.allclose(out.vector, expected, atol=1e-12)
        nonzero = np.flatnonzero(out.vector)
        assert nonzero.tolist() == [0, 4, 8, 12, 16, 20, 24]

    def test_gate_shrinks_weighted_blocks_relative_to_interactions(self):
        # dense mutually orthogonal unit vectors (rows of a scaled Hadamard)
        h1 = np.array([1.0, 1.0, 1.0, 1.0]) / 2
        h2 = np.array([1.0, -1.0, 1.0, -1.0]) / 2
        h3 = np.array([1.0, 1.0, -1.0, -1.0]) / 2
        consistent = fuse_segment(h1, h1.copy(), h1.copy(), FusionWeights())
        orthogonal = fuse_segment(h1, h2, h3, FusionWeights())
        assert consistent.gate == pytest.approx(1.0)
        assert orthogonal.gate == pytest.approx(0.5)

        def block_ratio(rec):
            d = rec.min_dim
            weighted = np.linalg.norm(rec.vector[: 3 * d])
            interactions = np.linalg.norm(rec.vector[3 * d:])
            return weighted / interactions

        assert block_ratio(orthogonal) < block_ratio(consistent)

    def test_zero_inputs_degenerate(self):
        z = np.zeros(4)
        out = fuse(z, z, z, FusionWeights(), 0.5)
        assert out.degenerate
        assert np.array_equal(out.vector, np.zeros(28))

    def test_rescaling_inputs_is_invariant(self):
        rng = np.random.default_rng(5)
        t, a, v = rng.normal(size=(3, 6))
        base = fuse_segment(t, a, v, FusionWeights())
        scaled = fuse_segment(3.7 * t, 0.01 * a, 120.0 * v, FusionWeights())
        assert np.allclose(base.vector, scaled.vector, atol=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        t, a, v = rng.normal(size=(3, 8))
        first = fuse_segment(t, a, v, FusionWeights())
        second = fuse_segment(t.copy(), a.copy(), v.copy(), FusionWeights())
        assert np.array_equal(first.vector, second.vector)

    @given(seed=st.integers(0, 10_000), d=st.sampled_from([3, 8, 32]))
    @settings(max_examples=80, deadline=None)
    def test_unit_norm_and_gate_bounds(self, seed, d):
        rng = np.random.default_rng(seed)
        t, a, v = rng.normal(size=(3, d))
        rec = fuse_segment(t, a, v, FusionWeights())
        assert 0.0 <= rec.gate <= 1.0
        assert rec.vector.shape == (7 * d,)
        assert abs(np.linalg.norm(rec.vector) - 1.0) < 1e-6


class TestFuseCorpus:
    def test_dimension_contract(self):
        corpus = make_corpus(3, d_t=6, d_a=5, d_v=4)
        matrix, records = fuse_corpus(corpus, FusionWeights())
        assert matrix.data.shape == (3, 28)
        assert matrix.modality == "fused"
        assert len(records) == 3

    def test_missing_modality_named(self):
        corpus = make_corpus(3)
        del corpus.matrices["audio"]
        with pytest.raises(ConfigError, match="audio"):
            fuse_corpus(corpus, FusionWeights())

    def test_gate_higher_when_audio_matches_text(self):
        n, d = 4, 6
        rng = np.random.default_rng(7)
        text = rng.normal(size=(n, d))
        visual = rng.normal(size=(n, d))

        base = make_corpus(n, d_t=d, d_a=d, d_v=d)
        attach(base, EmbeddingMatrix(modality="text", data=text))
        attach(base, EmbeddingMatrix(modality="visual", data=visual))
        attach(base, EmbeddingMatrix(modality="audio", data=text.copy()))
        _, aligned = fuse_corpus(base, FusionWeights())

        # replace audio with vectors orthogonal to the text rows
        noise = rng.normal(size=(n, d))
        tn = text / np.linalg.norm(text, axis=1, keepdims=True)
        noise -= (noise * tn).sum(axis=1, keepdims=True) * tn
        attach(base, EmbeddingMatrix(modality="audio", data=noise))
        _, orthogonal = fuse_corpus(base, FusionWeights())

        for rec_a, rec_o in zip(aligned, orthogonal):
            assert rec_a.gate > rec_o.gate

    def test_zero_text_row_still_finite(self):
        corpus = make_corpus(3, d_t=4, d_a=4, d_v=4)
        text = corpus.matrices["text"].data.copy()
        text[1] = 0.0
        attach(corpus, EmbeddingMatrix(modality="text", data=text))
        matrix, records = fuse_corpus(corpus, FusionWeights())
        assert np.isfinite(matrix.data).all()
        # zero text pulls both text-involving sims to 0
        assert records[1].sim_text_audio == 0.0
        assert records[1].sim_text_visual == 0.0

    def test_permuting_rows_permutes_output(self):
        corpus = make_corpus(5)
        matrix, _ = fuse_corpus(corpus, FusionWeights())
        perm = np.array([3, 0, 4, 1, 2])
        permuted = make_corpus(5)
        for modality in ("text", "audio", "visual"):
            attach(
                permuted,
                EmbeddingMatrix(modality=modality, data=corpus.matrices[modality].data[perm]),
            )
        matrix_p, _ = fuse_corpus(permuted, FusionWeights())
        assert np.allclose(matrix_p.data, matrix.data[perm])


class TestModeMatrix:
    def test_bimodal_length_is_twice_pairwise_min(self):
        corpus = make_corpus(3, d_t=6, d_a=5, d_v=4)
        ta, gates = build_mode_matrix(corpus, "text_audio")
        assert ta.data.shape == (3, 10)
        assert gates is None
        tv, _ = build_mode_matrix(corpus, "text_visual")
        assert tv.data.shape == (3, 8)

    def test_bimodal_rows_unit_norm(self):
        corpus = make_corpus(4)
        ta, _ = build_mode_matrix(corpus, "text_audio")
        assert np.allclose(np.linalg.norm(ta.data, axis=1), 1.0, atol=1e-6)

    def test_concat_pair_has_no_interactions(self):
        x = np.array([1.0, 0.0, 0.0])
        y = np.array([0.0, 2.0, 0.0])
        out = concat_pair(x, y)
        assert out.shape == (6,)
        assert np.allclose(out, np.array([1, 0, 0, 0, 1, 0]) / np.sqrt(2))

    def test_text_only_passthrough(self):
        corpus = make_corpus(3)
        m, gates = build_mode_matrix(corpus, "text_only")
        assert np.allclose(m.data, corpus.matrices["text"].data)
        assert gates is None

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            build_mode_matrix(make_corpus(2), "audio_only")
