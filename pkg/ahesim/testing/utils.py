import typing

import numpy as np

from ahesim.similarity import RetrievalResult
from ahesim.store import BlockSchema, EmbeddingVector


def kahan_dot(x, y) -> float:
    """ Compensated summation of ``x_i * y_i``; an independent reference for the float inner product. """
    total, comp = 0.0, 0.0
    for a, b in zip(x, y):
        term = float(a) * float(b) - comp
        t = total + term
        comp = (t - total) - term
        total = t
    return total


def random_vector(rng: np.random.Generator,
                  schema: BlockSchema,
                  vector_id: str = "v",
                  scale: float = 1.0) -> EmbeddingVector:
    return EmbeddingVector(id=vector_id,
                           values=rng.uniform(-scale, scale,
                                              size=schema.total_dim),
                           schema_ref=schema.schema_id)


def random_pairs(seed: int,
                 schema: BlockSchema,
                 count: int,
                 scale: float = 1.0
                 ) -> typing.List[typing.Tuple[EmbeddingVector, EmbeddingVector]]:
    rng = np.random.default_rng(seed)
    return [(random_vector(rng, schema, f"x{i}", scale),
             random_vector(rng, schema, f"y{i}", scale))
            for i in range(count)]


def oracle_ranking(query: EmbeddingVector,
                   vectors: typing.Sequence[EmbeddingVector],
                   k_top: typing.Optional[int] = None) -> typing.List[str]:
    """ Ids ranked by descending float inner product, ties by ascending id. """
    scored = [(-float(np.dot(query.values, v.values)), v.id) for v in vectors]
    ids = [vid for _, vid in sorted(scored)]
    return ids if k_top is None else ids[:k_top]


def scores_close(name: str,
                 expected: RetrievalResult,
                 result: RetrievalResult,
                 rtol: float = 1e-5,
                 atol: float = 1e-5):
    """ Assert that two results rank the same ids with close values. """
    assert expected.ids == result.ids, f'{name}: rankings differ'
    np.testing.assert_allclose([s.value for s in expected.entries],
                               [s.value for s in result.entries],
                               rtol=rtol,
                               atol=atol,
                               err_msg=f'{name} not close')


def grid_vector(rng: np.random.Generator,
                schema: BlockSchema,
                vector_id: str = "v",
                frac_bits: int = 16,
                scale: float = 0.5,
                creator: typing.Optional[str] = None) -> EmbeddingVector:
    """ A random vector whose coordinates are multiples of ``2^-frac_bits``.

        Such coordinates encode without rounding and their float inner products are exact, so encrypted and
        plaintext rankings agree to the last bit, ties included.
    """
    bound = int(scale * (1 << frac_bits))
    ticks = rng.integers(-bound, bound + 1, size=schema.total_dim)
    return EmbeddingVector(id=vector_id,
                           values=ticks / float(1 << frac_bits),
                           schema_ref=schema.schema_id,
                           creator=creator)


def grid_corpus(seed: int,
                schema: BlockSchema,
                count: int,
                scale: float = 0.5) -> typing.List[EmbeddingVector]:
    rng = np.random.default_rng(seed)
    return [
        grid_vector(rng, schema, f"track_{i:05d}", scale=scale)
        for i in range(count)
    ]
