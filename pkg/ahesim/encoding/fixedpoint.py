""" Fixed-point mapping between real embedding coordinates and plaintext integers.

    A coordinate ``v`` is carried as ``round(v * 2^f)``; an inner product of two encoded vectors therefore carries the
    scale ``2^(2f)``, and a weighted sum of block products carries ``2^(2f + f_w)``.
"""
import dataclasses
import logging
import math
from typing import Iterable, List

import numpy as np

from ahesim import config
from ahesim.errors import ValidationError, CodecRangeError, BudgetError

log = logging.getLogger(__name__)

# coordinates pass through float64 before rounding; encoded magnitudes must stay exact there
_MAX_EXACT = 1 << 53


@dataclasses.dataclass(frozen=True)
class ScaleConfig:
    """ Scale bookkeeping for the fixed-point codec. """
    frac_bits: int = config.FRAC_BITS  #: fractional bits ``f`` of coordinates
    weight_frac_bits: int = config.WEIGHT_FRAC_BITS  #: fractional bits ``f_w`` of block weights
    max_abs: float = config.MAX_ABS  #: bound on ``|coordinate|`` and ``|weight|``

    def __post_init__(self):
        if self.frac_bits < 1:
            raise ValidationError(
                f"frac_bits must be at least 1, got {self.frac_bits}")
        if self.weight_frac_bits < 0:
            raise ValidationError(
                f"weight_frac_bits must be non-negative, got "
                f"{self.weight_frac_bits}")
        if not (math.isfinite(self.max_abs) and self.max_abs > 0):
            raise ValidationError(
                f"max_abs must be a positive finite number, got {self.max_abs}"
            )
        if self.max_abs * max(self.scale, self.weight_scale) >= _MAX_EXACT:
            raise ValidationError(
                "max_abs and the fractional bits exceed float64 precision")

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def weight_scale(self) -> int:
        return 1 << self.weight_frac_bits

    def product_scale(self, weighted: bool = False) -> int:
        """ The scale carried by a decrypted inner product accumulator. """
        if weighted:
            return 1 << (2 * self.frac_bits + self.weight_frac_bits)
        return 1 << (2 * self.frac_bits)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "ScaleConfig":
        try:
            return cls(frac_bits=int(obj["frac_bits"]),
                       weight_frac_bits=int(obj["weight_frac_bits"]),
                       max_abs=float(obj["max_abs"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed scale configuration: {e}") from e


def _quantize(v: float, scale: int, cfg: ScaleConfig, what: str) -> int:
    v = float(v)
    if not math.isfinite(v):
        raise CodecRangeError(f"Cannot encode non-finite {what} {v}")
    if abs(v) > cfg.max_abs:
        raise CodecRangeError(
            f"|{what}| = {abs(v)} exceeds max_abs = {cfg.max_abs}")
    # scaling by a power of two is exact; round() breaks ties to even
    return round(v * scale)


def encode(v: float, cfg: ScaleConfig) -> int:
    """ Encode a coordinate as ``round_half_even(v * 2^f)``.

        :raises CodecRangeError: if ``|v| > max_abs`` or ``v`` is not finite.
    """
    return _quantize(v, cfg.scale, cfg, "coordinate")


def encode_weight(w: float, cfg: ScaleConfig) -> int:
    """ Encode a block weight as ``round_half_even(w * 2^f_w)``. """
    return _quantize(w, cfg.weight_scale, cfg, "weight")


def encode_vector(values: Iterable[float], cfg: ScaleConfig) -> List[int]:
    """ Encode every coordinate of a vector; same rounding as :func:`encode`. """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return []
    if not np.all(np.isfinite(arr)):
        raise CodecRangeError("Cannot encode non-finite coordinates")
    worst = float(np.max(np.abs(arr)))
    if worst > cfg.max_abs:
        raise CodecRangeError(
            f"|coordinate| = {worst} exceeds max_abs = {cfg.max_abs}")
    # np.rint rounds half to even, like round()
    return [int(x) for x in np.rint(arr * cfg.scale)]


def decode(m: int, cfg: ScaleConfig) -> float:
    """ Inverse of :func:`encode`, up to rounding. """
    return int(m) / cfg.scale


def decode_product(m: int, cfg: ScaleConfig, weighted: bool = False) -> float:
    """ Decode a decrypted inner product accumulator.

        :param m: the signed accumulator.
        :param cfg: the scale configuration it was computed under.
        :param weighted: whether the accumulator carries the weight scale.
        :return: ``m / 2^(2f)``, or ``m / 2^(2f + f_w)`` when weighted.
    """
    # int / int is correctly rounded, even when m exceeds float range before division
    return int(m) / cfg.product_scale(weighted)


@dataclasses.dataclass(frozen=True)
class BudgetCheck:
    """ The outcome of :func:`overflow_budget`. """
    holds: bool  #: whether the budget holds for the requested dimension
    dimension: int  #: the requested dimension
    max_dimension: int  #: the largest dimension for which the budget holds


def _term_bound(cfg: ScaleConfig) -> int:
    coord = max(1, math.ceil(cfg.max_abs * cfg.scale))
    weight = max(1, math.ceil(cfg.max_abs * cfg.weight_scale))
    return coord * coord * weight


def overflow_budget(cfg: ScaleConfig, d: int, n: int) -> BudgetCheck:
    """ Evaluate ``d * (max_abs * 2^f)^2 * (max_abs * 2^f_w) < n / 2``.

        The bound covers weighted sums, so a dimension that passes is safe for every similarity kind.

        :param cfg: the scale configuration.
        :param d: the vector dimension.
        :param n: the plaintext modulus.
        :return: whether the budget holds for ``d``, and the largest ``d`` for which it does.
    """
    if d < 0:
        raise ValidationError(f"Dimension must be non-negative, got {d}")
    term = _term_bound(cfg)
    n = int(n)
    # d * term < n / 2  <=>  2 * d * term < n
    max_d = (n - 1) // (2 * term)
    return BudgetCheck(holds=2 * d * term < n,
                       dimension=d,
                       max_dimension=max_d)


def require_budget(cfg: ScaleConfig, d: int, n: int) -> BudgetCheck:
    """ Like :func:`overflow_budget`, but raise if the budget does not hold.

        :raises BudgetError: carrying the largest safe dimension.
    """
    check = overflow_budget(cfg, d, n)
    if not check.holds:
        raise BudgetError(
            f"Overflow budget violated for d={d}: the largest safe dimension "
            f"under this modulus and scale is {check.max_dimension}",
            max_safe_dimension=check.max_dimension)
    return check
