import numpy as np
import pytest

from ahesim.store import BlockSchema, default_schema, WeightVector
from ahesim.errors import ValidationError, CodecRangeError
from ahesim.encoding import ScaleConfig


def test_default_schema():
    schema = default_schema(128)
    assert schema.k == 4
    assert schema.labels == ["rhythm", "melody", "harmony", "timbre"]
    assert [b.length for b in schema.blocks] == [32, 32, 32, 32]
    assert schema.block("harmony").offset == 64


def test_uneven_partition():
    schema = BlockSchema.equal_partition(10, k=3)
    assert [b.length for b in schema.blocks] == [4, 3, 3]
    assert schema.labels == ["block0", "block1", "block2"]
    with pytest.raises(ValidationError):
        BlockSchema.equal_partition(2, k=3)


def test_parse():
    assert BlockSchema.parse("4", 16) == default_schema(16)
    schema = BlockSchema.parse("a:2, b:4", 6)
    assert schema.labels == ["a", "b"]
    assert schema.block("b").slice == slice(2, 6)
    with pytest.raises(ValidationError):
        BlockSchema.parse("a:2,b:4", 7)
    with pytest.raises(ValidationError):
        BlockSchema.parse("a2,b4", 6)


@pytest.mark.parametrize("lengths,labels", [
    ([2, 0], ["a", "b"]),
    ([2, 2], ["a", "a"]),
    ([2, 2], ["a", ""]),
    ([], []),
])
def test_invalid_schemas(lengths, labels):
    with pytest.raises(ValidationError):
        BlockSchema.from_lengths(lengths, labels)


def test_project_concat():
    schema = BlockSchema.from_lengths([1, 2, 3], ["x", "y", "z"])
    values = np.arange(6.0)
    parts = schema.project(values)
    assert [list(p) for p in parts] == [[0.0], [1.0, 2.0], [3.0, 4.0, 5.0]]
    assert np.array_equal(schema.concat(parts), values)
    with pytest.raises(ValidationError):
        schema.project(values[:5])
    with pytest.raises(ValidationError):
        schema.concat(parts[:2])


def test_schema_id_is_stable():
    a = BlockSchema.parse("a:2,b:4", 6)
    assert a.schema_id == BlockSchema.from_json(a.to_json()).schema_id
    assert a.schema_id != BlockSchema.parse("a:3,b:3", 6).schema_id
    with pytest.raises(ValidationError):
        a.index("c")


def test_weights(schema):
    assert WeightVector.uniform(schema).weights == (1.0, 1.0, 1.0, 1.0)
    assert WeightVector.one_hot(schema, "melody").weights == (0.0, 1.0, 0.0,
                                                              0.0)
    assert WeightVector.parse("groove", schema).weights == (2.0, 0.5, 0.5,
                                                            1.0)
    assert WeightVector.parse("timbre=3", schema).weights == (0.0, 0.0, 0.0,
                                                              3.0)
    assert WeightVector.parse("1, 2, 3, 4", schema).weights == (1.0, 2.0, 3.0,
                                                                4.0)
    with pytest.raises(ValidationError):
        WeightVector.parse("bass=1", schema)
    with pytest.raises(ValidationError):
        WeightVector.parse("1,x", schema)
    with pytest.raises(ValidationError):
        WeightVector.preset("nope", schema)


def test_weight_validation(schema):
    with pytest.raises(ValidationError):
        WeightVector((1.0, 2.0)).validate(schema)
    with pytest.raises(ValidationError):
        WeightVector((1.0, 2.0, float("nan"), 0.0)).validate(schema)
    with pytest.raises(CodecRangeError):
        WeightVector((1.0, 2.0, 9.0, 0.0)).validate(schema, ScaleConfig())
