""" Randomness sources for key generation and encryption.

    A source is stateful and must be confined to one thread. Work that fans out over threads calls
    :meth:`RandomSource.spawn` once per task, which gives every task its own independent source.
"""
import abc
import hashlib
import logging
import secrets

import gmpy2

log = logging.getLogger(__name__)


class RandomSource(abc.ABC):
    """ ABC for sources of uniformly random integers. """

    #: whether the source replays the same stream for the same construction arguments
    deterministic: bool = False

    @abc.abstractmethod
    def randbits(self, k: int) -> gmpy2.mpz:
        """ Return a uniform integer in ``[0, 2**k)``. """
        ...

    @abc.abstractmethod
    def randbelow(self, n: int) -> gmpy2.mpz:
        """ Return a uniform integer in ``[0, n)``. """
        ...

    @abc.abstractmethod
    def spawn(self, index: int) -> "RandomSource":
        """ Return an independent source for subtask ``index``. """
        ...

    def unit_below(self, n: int) -> gmpy2.mpz:
        """ Return a uniform integer ``r`` in ``[1, n)`` with ``gcd(r, n) = 1``. """
        n = gmpy2.mpz(n)
        while True:
            r = self.randbelow(n)
            if r > 0 and gmpy2.gcd(r, n) == 1:
                return r


class SystemRandomSource(RandomSource):
    """ Randomness from the operating system's entropy pool. This is the only source production paths use. """
    deterministic = False

    def randbits(self, k: int) -> gmpy2.mpz:
        return gmpy2.mpz(secrets.randbits(k))

    def randbelow(self, n: int) -> gmpy2.mpz:
        return gmpy2.mpz(secrets.randbelow(int(n)))

    def spawn(self, index: int) -> "SystemRandomSource":
        return SystemRandomSource()


class SeededRandomSource(RandomSource):
    """ A reproducible stream for tests and benchmarks. Not suitable for protecting real data.

        :param seed: the seed; equal seeds give equal streams.
    """
    deterministic = True

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._state = gmpy2.random_state(self.seed)

    def randbits(self, k: int) -> gmpy2.mpz:
        return gmpy2.mpz_urandomb(self._state, k)

    def randbelow(self, n: int) -> gmpy2.mpz:
        return gmpy2.mpz_random(self._state, gmpy2.mpz(n))

    def spawn(self, index: int) -> "SeededRandomSource":
        digest = hashlib.sha256(f"{self.seed}:{index}".encode()).digest()
        return SeededRandomSource(int.from_bytes(digest[:8], "big"))

    def __repr__(self):
        return f"SeededRandomSource(seed={self.seed})"


def default_source() -> RandomSource:
    return SystemRandomSource()
