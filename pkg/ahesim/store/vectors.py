""" Plaintext, encrypted and weight vectors. """
import dataclasses
import logging
import math
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ahesim.crypto import Ciphertext, PublicKey
from ahesim.encoding import ScaleConfig
from ahesim.errors import ValidationError, CodecRangeError, KeyMismatchError
from ahesim.store.schema import BlockSchema

log = logging.getLogger(__name__)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(
            f"Expected a one-dimensional vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclasses.dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """ A real-valued music embedding laid out according to a :class:`BlockSchema`. """
    id: str
    values: np.ndarray  #: read-only float64 coordinates
    schema_ref: str  #: ``schema_id`` of the layout
    creator: Optional[str] = None  #: artist metadata; never encrypted

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))

    @property
    def dim(self) -> int:
        return len(self.values)

    def validate(self, schema: BlockSchema, cfg: Optional[ScaleConfig] = None):
        """ Check the vector against a schema and, optionally, the codec range.

            :raises ValidationError: on dimension or schema mismatch, or non-finite values.
            :raises CodecRangeError: if a coordinate exceeds ``cfg.max_abs``.
        """
        if self.schema_ref != schema.schema_id:
            raise ValidationError(
                f"Vector '{self.id}' uses schema {self.schema_ref}, expected "
                f"{schema.schema_id}")
        if self.dim != schema.total_dim:
            raise ValidationError(
                f"Vector '{self.id}' has {self.dim} coordinates, expected "
                f"{schema.total_dim}")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError(f"Vector '{self.id}' has non-finite values")
        if cfg is not None and self.dim > 0 and np.max(np.abs(
                self.values)) > cfg.max_abs:
            raise CodecRangeError(
                f"Vector '{self.id}' exceeds max_abs = {cfg.max_abs}")

    def block(self, schema: BlockSchema, label: str) -> np.ndarray:
        return self.values[schema.block(label).slice]

    def normalized(self) -> "EmbeddingVector":
        """ Return the L2-normalized vector; the zero vector is returned unchanged. """
        norm = float(np.linalg.norm(self.values))
        if norm == 0.0:
            return self
        return dataclasses.replace(self, values=self.values / norm)

    def to_json(self) -> dict:
        obj = {"id": self.id, "values": [float(v) for v in self.values]}
        if self.creator is not None:
            obj["creator"] = self.creator
        return obj

    def __eq__(self, other):
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return (self.id == other.id and self.creator == other.creator
                and self.schema_ref == other.schema_ref
                and np.array_equal(self.values, other.values))

    __hash__ = None


@dataclasses.dataclass(frozen=True)
class EncryptedVector:
    """ Element-wise encryption of an :class:`EmbeddingVector`; the block layout is kept through ``schema_ref``. """
    id: str
    cells: Tuple[Ciphertext, ...]
    schema_ref: str
    key_id: str
    creator: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        for cell in self.cells:
            if cell.key_id != self.key_id:
                raise KeyMismatchError(
                    f"Encrypted vector '{self.id}' mixes cells under keys "
                    f"{self.key_id} and {cell.key_id}")

    @property
    def dim(self) -> int:
        return len(self.cells)

    def validate(self, schema: BlockSchema):
        if self.schema_ref != schema.schema_id:
            raise ValidationError(
                f"Vector '{self.id}' uses schema {self.schema_ref}, expected "
                f"{schema.schema_id}")
        if self.dim != schema.total_dim:
            raise ValidationError(
                f"Vector '{self.id}' has {self.dim} cells, expected "
                f"{schema.total_dim}")

    def nbytes(self, public_key: PublicKey) -> int:
        """ Size of the cells in fixed-width binary form. """
        return self.dim * public_key.ciphertext_bytes

    def to_json(self) -> dict:
        obj = {
            "id": self.id,
            "key_id": self.key_id,
            "cells": [c.to_hex() for c in self.cells]
        }
        if self.creator is not None:
            obj["creator"] = self.creator
        return obj

    @classmethod
    def from_json(cls, obj: dict, public_key: PublicKey,
                  schema_ref: str) -> "EncryptedVector":
        try:
            vid, key_id, cells = obj["id"], obj["key_id"], obj["cells"]
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Malformed encrypted vector: {e}") from e
        if key_id != public_key.key_id:
            raise KeyMismatchError(
                f"Encrypted vector '{vid}' was produced under key {key_id}, "
                f"expected {public_key.key_id}")
        return cls(id=str(vid),
                   cells=tuple(Ciphertext.from_hex(c, public_key)
                               for c in cells),
                   schema_ref=schema_ref,
                   key_id=key_id,
                   creator=obj.get("creator"))


#: named weightings for the default four-block schema, keyed by retrieval task
WEIGHT_PRESETS: Dict[str, Dict[str, float]] = {
    "uniform": {
        "rhythm": 1.0,
        "melody": 1.0,
        "harmony": 1.0,
        "timbre": 1.0
    },
    # similar groove: rhythm first, timbre second
    "groove": {
        "rhythm": 2.0,
        "melody": 0.5,
        "harmony": 0.5,
        "timbre": 1.0
    },
    "melodic": {
        "rhythm": 0.5,
        "melody": 2.0,
        "harmony": 1.0,
        "timbre": 0.0
    },
}


@dataclasses.dataclass(frozen=True)
class WeightVector:
    """ Public per-block weights, aligned with the blocks of a schema. """
    weights: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights",
                           tuple(float(w) for w in self.weights))

    @property
    def k(self) -> int:
        return len(self.weights)

    def validate(self, schema: BlockSchema, cfg: Optional[ScaleConfig] = None):
        if self.k != schema.k:
            raise ValidationError(
                f"Got {self.k} weights for a schema with {schema.k} blocks")
        for w in self.weights:
            if not math.isfinite(w):
                raise ValidationError("Weights must be finite")
            if cfg is not None and abs(w) > cfg.max_abs:
                raise CodecRangeError(
                    f"|weight| = {abs(w)} exceeds max_abs = {cfg.max_abs}")

    @classmethod
    def uniform(cls, schema: BlockSchema, value: float = 1.0) -> "WeightVector":
        return cls(weights=(value, ) * schema.k)

    @classmethod
    def one_hot(cls, schema: BlockSchema, label: str) -> "WeightVector":
        idx = schema.index(label)
        return cls(weights=tuple(1.0 if i == idx else 0.0
                                 for i in range(schema.k)))

    @classmethod
    def from_mapping(cls, schema: BlockSchema,
                     mapping: Mapping[str, float]) -> "WeightVector":
        """ Build weights from ``{label: weight}``; unnamed blocks get weight 0. """
        for label in mapping:
            schema.index(label)
        return cls(weights=tuple(
            float(mapping.get(label, 0.0)) for label in schema.labels))

    @classmethod
    def preset(cls, name: str, schema: BlockSchema) -> "WeightVector":
        if name not in WEIGHT_PRESETS:
            raise ValidationError(
                f"Unknown weight preset '{name}'; expected one of "
                f"{sorted(WEIGHT_PRESETS)}")
        return cls.from_mapping(schema, WEIGHT_PRESETS[name])

    @classmethod
    def parse(cls, text: str, schema: BlockSchema) -> "WeightVector":
        """ Parse a command line weighting: a preset name, ``label=w`` pairs, or a comma separated list of ``k``
            numbers.
        """
        text = text.strip()
        if text in WEIGHT_PRESETS:
            return cls.preset(text, schema)
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            if all("=" in p for p in parts):
                mapping = {}
                for p in parts:
                    label, _, w = p.partition("=")
                    mapping[label.strip()] = float(w)
                return cls.from_mapping(schema, mapping)
            return cls(weights=tuple(float(p) for p in parts))
        except ValueError as e:
            raise ValidationError(f"Malformed weights '{text}': {e}") from e

    def to_json(self) -> list:
        return list(self.weights)


def check_same_layout(a, b):
    """ Check that two vectors share a schema and a dimension. """
    if a.schema_ref != b.schema_ref:
        raise ValidationError(
            f"Schema mismatch: '{a.id}' uses {a.schema_ref}, '{b.id}' uses "
            f"{b.schema_ref}")
    if a.dim != b.dim:
        raise ValidationError(
            f"Dimension mismatch: '{a.id}' has {a.dim}, '{b.id}' has {b.dim}")
