import concurrent.futures
import hashlib
import json
import logging
from typing import Callable, Iterable, List, TypeVar

log = logging.getLogger(__name__)

__all__ = [
    "int_to_hex", "hex_to_int", "fingerprint", "canonical_json",
    "sha256_hex", "parallel_map"
]

T = TypeVar("T")
R = TypeVar("R")

#: length of key fingerprints, in bytes
FINGERPRINT_BYTES = 16


def int_to_hex(value: int) -> str:
    """ Encode a non-negative integer as lowercase hex without a prefix. """
    value = int(value)
    if value < 0:
        raise ValueError("Only non-negative integers can be hex encoded")
    return format(value, "x")


def hex_to_int(text: str) -> int:
    """ Decode an integer written by :func:`int_to_hex`.

        :param text: the hex string.
        :return: the integer.
        :raises ValueError: if ``text`` is not a hex string.
    """
    if not isinstance(text, str) or len(text) == 0:
        raise ValueError("Expected a non-empty hex string")
    if text.startswith(("0x", "0X", "-", "+")):
        raise ValueError(f"Expected bare hex digits, got '{text[:8]}...'")
    return int(text, 16)


def fingerprint(modulus: int) -> str:
    """ Fingerprint of a public modulus: the first 16 bytes of its SHA-256 digest, as hex. """
    modulus = int(modulus)
    raw = modulus.to_bytes((modulus.bit_length() + 7) // 8, "big")
    return hashlib.sha256(raw).digest()[:FINGERPRINT_BYTES].hex()


def canonical_json(obj) -> str:
    """ Serialize ``obj`` to JSON with sorted keys and no insignificant whitespace. """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def parallel_map(func: Callable[[T], R],
                 items: Iterable[T],
                 workers: int = 1) -> List[R]:
    """ Apply ``func`` to every item, optionally on a thread pool. Results keep the order of ``items``.

        :param func: a pure function.
        :param items: the inputs.
        :param workers: the number of threads. ``1`` runs inline.
        :return: the list of results.
    """
    items = list(items)
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]

    log.debug(f"Mapping over {len(items)} items with {workers} threads")
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
