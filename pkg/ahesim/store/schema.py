""" Block layouts of embedding vectors. """
import dataclasses
import hashlib
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ahesim import config
from ahesim.errors import ValidationError
from ahesim.util import canonical_json

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Block:
    """ A labelled, contiguous range of coordinates. """
    label: str
    offset: int
    length: int

    @property
    def stop(self) -> int:
        return self.offset + self.length

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.stop)


@dataclasses.dataclass(frozen=True)
class BlockSchema:
    """ A partition of ``[0, total_dim)`` into ``k >= 1`` contiguous blocks with unique labels. """
    blocks: Tuple[Block, ...]
    total_dim: int

    def __post_init__(self):
        if len(self.blocks) == 0:
            raise ValidationError("A schema needs at least one block")
        labels = [b.label for b in self.blocks]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"Block labels must be unique, got {labels}")
        expected_offset = 0
        for block in self.blocks:
            if not block.label:
                raise ValidationError("Block labels must be non-empty")
            if block.length < 1:
                raise ValidationError(
                    f"Block '{block.label}' must have positive length")
            if block.offset != expected_offset:
                raise ValidationError(
                    f"Block '{block.label}' starts at {block.offset}, expected "
                    f"{expected_offset}: blocks must be contiguous")
            expected_offset = block.stop
        if expected_offset != self.total_dim:
            raise ValidationError(
                f"Blocks cover [0, {expected_offset}) but the dimension is "
                f"{self.total_dim}")

    @classmethod
    def from_lengths(cls, lengths: Sequence[int],
                     labels: Sequence[str]) -> "BlockSchema":
        if len(lengths) != len(labels):
            raise ValidationError(
                f"Got {len(lengths)} block lengths but {len(labels)} labels")
        blocks = []
        offset = 0
        for label, length in zip(labels, lengths):
            blocks.append(Block(label=str(label), offset=offset,
                                length=int(length)))
            offset += int(length)
        return cls(blocks=tuple(blocks), total_dim=offset)

    @classmethod
    def equal_partition(cls,
                        d: int,
                        k: Optional[int] = None,
                        labels: Optional[Sequence[str]] = None
                        ) -> "BlockSchema":
        """ Split ``d`` coordinates into ``k`` nearly equal blocks; the first ``d % k`` blocks get one extra
            coordinate.

            :param d: the dimension.
            :param k: the number of blocks; defaults to ``len(labels)``.
            :param labels: block labels; defaults to the four musical feature families when ``k`` is 4 or unset,
                           and to ``block0 ... block{k-1}`` otherwise.
        """
        if labels is None:
            if k is None or k == len(config.DEFAULT_BLOCK_LABELS):
                labels = config.DEFAULT_BLOCK_LABELS
            else:
                labels = [f"block{i}" for i in range(k)]
        k = len(labels) if k is None else k
        if k != len(labels):
            raise ValidationError(f"Got k={k} but {len(labels)} labels")
        if k < 1 or d < k:
            raise ValidationError(
                f"Cannot split {d} coordinates into {k} non-empty blocks")
        base, extra = divmod(d, k)
        lengths = [base + (1 if i < extra else 0) for i in range(k)]
        return cls.from_lengths(lengths, labels)

    @classmethod
    def parse(cls, layout: str, d: int) -> "BlockSchema":
        """ Parse a command line block layout.

            Accepts either a block count (``"4"``) or a list of ``label:length`` pairs
            (``"rhythm:32,melody:32,harmony:32,timbre:32"``).
        """
        layout = layout.strip()
        if layout.isdigit():
            return cls.equal_partition(d, k=int(layout))
        labels, lengths = [], []
        for part in layout.split(","):
            label, sep, length = part.partition(":")
            if not sep or not length.strip().isdigit():
                raise ValidationError(
                    f"Malformed block '{part}'; expected label:length")
            labels.append(label.strip())
            lengths.append(int(length))
        schema = cls.from_lengths(lengths, labels)
        if schema.total_dim != d:
            raise ValidationError(
                f"Block lengths sum to {schema.total_dim}, expected {d}")
        return schema

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def labels(self) -> List[str]:
        return [b.label for b in self.blocks]

    @property
    def schema_id(self) -> str:
        """ A short digest of the layout; vectors reference their schema by this id. """
        return hashlib.sha256(canonical_json(
            self.to_json()).encode()).hexdigest()[:12]

    def index(self, label: str) -> int:
        for i, block in enumerate(self.blocks):
            if block.label == label:
                return i
        raise ValidationError(
            f"Unknown block label '{label}'; expected one of {self.labels}")

    def block(self, label: str) -> Block:
        return self.blocks[self.index(label)]

    def project(self, values: Sequence) -> List:
        """ Split a vector into its per-block parts. """
        if len(values) != self.total_dim:
            raise ValidationError(
                f"Vector has {len(values)} coordinates, schema expects "
                f"{self.total_dim}")
        return [values[b.slice] for b in self.blocks]

    def concat(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        """ Inverse of :meth:`project`. """
        if len(parts) != self.k:
            raise ValidationError(f"Expected {self.k} parts, got {len(parts)}")
        for block, part in zip(self.blocks, parts):
            if len(part) != block.length:
                raise ValidationError(
                    f"Part for block '{block.label}' has {len(part)} "
                    f"coordinates, expected {block.length}")
        return np.concatenate([np.asarray(p, dtype=np.float64) for p in parts])

    def to_json(self) -> dict:
        return {
            "total_dim": self.total_dim,
            "blocks": [dataclasses.asdict(b) for b in self.blocks]
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BlockSchema":
        try:
            blocks = tuple(
                Block(label=str(b["label"]),
                      offset=int(b["offset"]),
                      length=int(b["length"])) for b in obj["blocks"])
            return cls(blocks=blocks, total_dim=int(obj["total_dim"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed block schema: {e}") from e


def default_schema(d: int) -> BlockSchema:
    """ Equal partition of ``d`` into rhythm, melody, harmony and timbre blocks. """
    return BlockSchema.equal_partition(d, labels=config.DEFAULT_BLOCK_LABELS)
