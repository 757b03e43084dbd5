""" Paillier key material, key generation and key files. """
import dataclasses
import json
import logging
import os
from typing import Optional

import gmpy2

from ahesim import config
from ahesim.crypto.randomness import RandomSource, default_source
from ahesim.errors import ValidationError, KeyMismatchError
from ahesim.util import int_to_hex, hex_to_int, fingerprint

log = logging.getLogger(__name__)

PUBLIC_KEY_FILE = "public.json"
PRIVATE_KEY_FILE = "private.json"


@dataclasses.dataclass(frozen=True)
class PublicKey:
    """ A Paillier public key with generator ``g = n + 1``. Use :meth:`from_modulus` to construct one. """
    n: gmpy2.mpz  #: the modulus, a product of two distinct primes
    n_squared: gmpy2.mpz  #: ``n * n``
    g: gmpy2.mpz  #: the generator, always ``n + 1``
    bits: int  #: the bit length of ``n``
    key_id: str  #: fingerprint of ``n``

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValidationError("The modulus must be an odd integer > 2")
        if self.n.bit_length() != self.bits:
            raise ValidationError(
                f"Modulus has {self.n.bit_length()} bits, expected {self.bits}"
            )
        if self.g != self.n + 1:
            raise ValidationError("The generator must be n + 1")
        if self.n_squared != self.n * self.n:
            raise ValidationError("n_squared does not equal n * n")
        if self.key_id != fingerprint(self.n):
            raise ValidationError("key_id does not match the modulus")

    @classmethod
    def from_modulus(cls, n: int) -> "PublicKey":
        n = gmpy2.mpz(n)
        return cls(n=n,
                   n_squared=n * n,
                   g=n + 1,
                   bits=n.bit_length(),
                   key_id=fingerprint(n))

    @property
    def ciphertext_bytes(self) -> int:
        """ The fixed width, in bytes, of a serialized ciphertext residue under this key. """
        return (self.n_squared.bit_length() + 7) // 8

    @property
    def max_plaintext(self) -> int:
        """ The largest magnitude that decodes without sign ambiguity, ``(n - 1) // 2``. """
        return int((self.n - 1) // 2)

    def to_json(self) -> dict:
        return {
            "type": "PublicKey",
            "key_id": self.key_id,
            "bits": self.bits,
            "n": int_to_hex(self.n),
            "g": int_to_hex(self.g),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PublicKey":
        try:
            n = hex_to_int(obj["n"])
            g = hex_to_int(obj["g"])
            bits = int(obj["bits"])
            key_id = str(obj["key_id"])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed public key: {e}") from e
        n = gmpy2.mpz(n)
        return cls(n=n,
                   n_squared=n * n,
                   g=gmpy2.mpz(g),
                   bits=bits,
                   key_id=key_id)


@dataclasses.dataclass(frozen=True)
class PrivateKey:
    """ The decryption exponent and its inverse for a :class:`PublicKey`. """
    lam: gmpy2.mpz  #: the Carmichael value ``lcm(p - 1, q - 1)``
    mu: gmpy2.mpz  #: ``L(g^lam mod n²)^-1 mod n`` where ``L(u) = (u - 1) / n``
    bits: int  #: bit length of the matching modulus
    key_id: str  #: fingerprint of the matching modulus

    def check(self, public_key: PublicKey):
        """ Check that this key decrypts under ``public_key``.

            :raises KeyMismatchError: if the fingerprints differ.
            :raises ValidationError: if ``mu * L(g^lam mod n²) != 1 (mod n)``.
        """
        if self.key_id != public_key.key_id:
            raise KeyMismatchError(
                f"Private key {self.key_id} does not belong to public key "
                f"{public_key.key_id}")
        n = public_key.n
        u = gmpy2.powmod(public_key.g, self.lam, public_key.n_squared)
        if (self.mu * ((u - 1) // n)) % n != 1:
            raise ValidationError("Private key is inconsistent with its modulus")

    def to_json(self) -> dict:
        return {
            "type": "PrivateKey",
            "key_id": self.key_id,
            "bits": self.bits,
            "lambda": int_to_hex(self.lam),
            "mu": int_to_hex(self.mu),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PrivateKey":
        try:
            return cls(lam=gmpy2.mpz(hex_to_int(obj["lambda"])),
                       mu=gmpy2.mpz(hex_to_int(obj["mu"])),
                       bits=int(obj["bits"]),
                       key_id=str(obj["key_id"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed private key: {e}") from e


@dataclasses.dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    private: PrivateKey

    @property
    def key_id(self) -> str:
        return self.public.key_id


def check_key_bits(bits: int, allow_insecure: bool = True):
    """ Validate a requested modulus size.

        :param bits: the requested size.
        :param allow_insecure: whether test-only sizes are acceptable.
        :raises ValidationError: if ``bits`` is not allowed.
    """
    if bits not in config.ALLOWED_KEY_BITS:
        raise ValidationError(
            f"Unsupported key size {bits}; expected one of "
            f"{', '.join(str(b) for b in config.ALLOWED_KEY_BITS)}")
    if bits in config.INSECURE_KEY_BITS and not allow_insecure:
        raise ValidationError(
            f"{bits}-bit keys are for testing only; pass "
            f"--insecure-test-keys to use them")


def _random_prime(bits: int, rng: RandomSource) -> gmpy2.mpz:
    # the two top bits are set so that the product of two such primes has exactly 2 * bits bits
    top = gmpy2.mpz(3) << (bits - 2)
    attempts = 0
    while True:
        attempts += 1
        candidate = rng.randbits(bits) | top | 1
        if gmpy2.is_prime(candidate, config.PRIMALITY_ROUNDS):
            log.debug(f"Found a {bits}-bit prime after {attempts} candidates")
            return candidate


def keygen(bits: int = config.KEY_BITS,
           rng: Optional[RandomSource] = None) -> KeyPair:
    """ Generate a Paillier key pair.

        :param bits: the bit length of the modulus ``n``; one of ``config.ALLOWED_KEY_BITS``.
        :param rng: the randomness source. Defaults to system entropy.
        :return: the key pair.
    """
    check_key_bits(bits)
    if bits in config.INSECURE_KEY_BITS:
        log.warning(f"Generating insecure {bits}-bit test keys")
    rng = rng or default_source()

    half = bits // 2
    while True:
        p = _random_prime(half, rng)
        q = _random_prime(half, rng)
        if p == q:
            log.debug("Drew p == q, retrying")
            continue
        n = p * q
        if gmpy2.gcd(n, (p - 1) * (q - 1)) != 1:
            continue
        if n.bit_length() != bits:
            continue
        break

    public = PublicKey.from_modulus(n)
    lam = gmpy2.lcm(p - 1, q - 1)
    u = gmpy2.powmod(public.g, lam, public.n_squared)
    mu = gmpy2.invert((u - 1) // n, n)
    private = PrivateKey(lam=lam, mu=mu, bits=bits, key_id=public.key_id)
    log.info(f"Generated {bits}-bit key pair {public.key_id}")
    return KeyPair(public=public, private=private)


def save_keypair(keypair: KeyPair, directory: str, force: bool = False):
    """ Write ``public.json`` and ``private.json`` to ``directory``.

        :param keypair: the keys.
        :param directory: the target directory, created if missing.
        :param force: overwrite existing key files.
        :raises FileExistsError: if a key file exists and ``force`` is not set.
    """
    os.makedirs(directory, exist_ok=True)
    paths = [
        os.path.join(directory, PUBLIC_KEY_FILE),
        os.path.join(directory, PRIVATE_KEY_FILE)
    ]
    if not force:
        for path in paths:
            if os.path.exists(path):
                raise FileExistsError(
                    f"Refusing to overwrite existing key file '{path}'")

    for path, obj in zip(paths,
                         [keypair.public.to_json(),
                          keypair.private.to_json()]):
        with open(path, "w") as f:
            json.dump(obj, f, indent=2)
    log.info(f"Wrote key pair {keypair.key_id} to {directory}")


def _read_json(path: str) -> dict:
    with open(path, "r") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"'{path}' is not valid JSON: {e}") from e


def load_public_key(path: str) -> PublicKey:
    """ Load a public key from a file, or from ``public.json`` if ``path`` is a directory. """
    if os.path.isdir(path):
        path = os.path.join(path, PUBLIC_KEY_FILE)
    return PublicKey.from_json(_read_json(path))


def load_private_key(path: str) -> PrivateKey:
    """ Load a private key from a file, or from ``private.json`` if ``path`` is a directory. """
    if os.path.isdir(path):
        path = os.path.join(path, PRIVATE_KEY_FILE)
    return PrivateKey.from_json(_read_json(path))


def load_keypair(directory: str) -> KeyPair:
    public = load_public_key(directory)
    private = load_private_key(directory)
    private.check(public)
    return KeyPair(public=public, private=private)
