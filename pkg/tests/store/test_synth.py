import numpy as np
import pytest

from ahesim.store import (Uniform, PlantedPattern, ArtistClusters,
                          synth_corpus, pattern_direction, default_schema)
from ahesim.errors import ValidationError


def test_uniform_is_deterministic(schema):
    a = synth_corpus(1, 20, schema)
    b = synth_corpus(1, 20, schema)
    c = synth_corpus(2, 20, schema)
    assert a.vectors == b.vectors
    assert a.vectors != c.vectors
    assert a[0].id == "track_00000"
    values = np.stack([v.values for v in a])
    assert values.shape == (20, 128)
    assert np.all(np.abs(values) <= 0.5)
    assert a.planted_ids == frozenset()


def test_planted_pattern(schema):
    profile = PlantedPattern(block_label="melody",
                             pattern_seed=5,
                             strength=2.5,
                             planted_fraction=0.2)
    corpus = synth_corpus(9, 100, schema, profile)
    assert len(corpus.planted_ids) == 20
    assert np.isclose(np.linalg.norm(corpus.pattern), 1.0)
    assert np.array_equal(corpus.pattern, pattern_direction(5, 32))

    block = schema.block("melody")
    for v in corpus:
        projection = float(v.values[block.slice] @ corpus.pattern)
        if v.id in corpus.planted_ids:
            assert projection > 1.0
        else:
            assert abs(projection) < 1.5
    # other blocks stay pure noise
    for v in corpus:
        assert np.all(np.abs(v.block(schema, "rhythm")) <= 0.5)


def test_artist_clusters(schema):
    corpus = synth_corpus(4, 40, schema,
                          ArtistClusters(num_artists=4, spread=0.05))
    assert corpus.creators == [
        "artist_00", "artist_01", "artist_02", "artist_03"
    ]
    assert [v.creator for v in corpus[:5]] == [
        "artist_00", "artist_01", "artist_02", "artist_03", "artist_00"
    ]
    for v in corpus:
        own = float(v.values @ corpus.centroids[v.creator])
        others = [
            float(v.values @ c) for name, c in corpus.centroids.items()
            if name != v.creator
        ]
        assert own > max(others)

    probe = corpus.sample_near("artist_02", seed=3, vector_id="probe")
    assert probe.id == "probe"
    assert probe.creator is None
    with pytest.raises(ValidationError):
        corpus.sample_near("artist_99", seed=3)


def test_invalid_profiles(schema):
    with pytest.raises(ValidationError):
        synth_corpus(0, 2, schema, ArtistClusters(num_artists=3, spread=0.1))
    with pytest.raises(ValidationError):
        synth_corpus(0, -1, schema)
    with pytest.raises(ValidationError):
        synth_corpus(0, 10, schema,
                     PlantedPattern(block_label="bass",
                                    pattern_seed=1,
                                    strength=1.0))


def test_normalize_and_clip():
    schema = default_schema(8)
    corpus = synth_corpus(0, 10, schema, noise_scale=10.0, max_abs=1.0)
    assert all(np.max(np.abs(v.values)) <= 1.0 for v in corpus)
    unit = synth_corpus(0, 10, schema, normalize=True)
    assert all(np.isclose(np.linalg.norm(v.values), 1.0) for v in unit)
    assert Uniform().to_json() == {"profile": "uniform"}
