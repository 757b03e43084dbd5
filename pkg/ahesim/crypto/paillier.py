""" Homomorphic operations of the Paillier cryptosystem.

    Plaintexts are signed Python integers in ``(-n/2, n/2)``; internally they are carried as their canonical residue
    in ``[0, n)``, and residues above ``n/2`` decode as negative values. All functions are pure and every key and
    ciphertext is immutable, so they can be shared freely between threads.
"""
import dataclasses
import functools
import logging
from typing import Iterable, Optional

import gmpy2

from ahesim.crypto.keys import PublicKey, PrivateKey
from ahesim.crypto.randomness import RandomSource, default_source
from ahesim.errors import (ValidationError, KeyMismatchError,
                           DegenerateCiphertextError)
from ahesim.util import int_to_hex, hex_to_int

log = logging.getLogger(__name__)

#: largest scalar accepted by the literal repeated-addition path
FOLD_LIMIT = 1 << 16


@dataclasses.dataclass(frozen=True)
class Ciphertext:
    """ One encrypted integer. """
    value: gmpy2.mpz  #: the residue, in ``[0, n²)``
    key_id: str  #: fingerprint of the public key that produced it

    def to_hex(self) -> str:
        return int_to_hex(self.value)

    def to_bytes(self, width: int) -> bytes:
        """ Big-endian encoding of the residue, zero-padded to ``width`` bytes. """
        return int(self.value).to_bytes(width, "big")

    def to_json(self) -> dict:
        return {"c": self.to_hex(), "key_id": self.key_id}

    @classmethod
    def from_hex(cls, text: str, public_key: PublicKey) -> "Ciphertext":
        """ Parse a hex residue produced under ``public_key``.

            :raises ValidationError: if the text is not hex or the residue is out of range.
        """
        try:
            value = gmpy2.mpz(hex_to_int(text))
        except ValueError as e:
            raise ValidationError(f"Malformed ciphertext: {e}") from e
        if not 0 <= value < public_key.n_squared:
            raise ValidationError("Ciphertext residue is out of range")
        return cls(value=value, key_id=public_key.key_id)

    @classmethod
    def from_json(cls, obj: dict, public_key: PublicKey) -> "Ciphertext":
        try:
            text, key_id = obj["c"], obj["key_id"]
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Malformed ciphertext: {e}") from e
        if key_id != public_key.key_id:
            raise KeyMismatchError(
                f"Ciphertext was produced under key {key_id}, "
                f"expected {public_key.key_id}")
        return cls.from_hex(text, public_key)


def _check_key(public_key: PublicKey, *cts: Ciphertext):
    for ct in cts:
        if ct.key_id != public_key.key_id:
            raise KeyMismatchError(
                f"Ciphertext under key {ct.key_id} used with key "
                f"{public_key.key_id}")


def to_residue(m: int, public_key: PublicKey) -> gmpy2.mpz:
    """ Map a signed plaintext to its canonical residue modulo n.

        :raises ValidationError: if ``|m| >= n/2``.
    """
    m = int(m)
    if abs(m) > public_key.max_plaintext:
        raise ValidationError(
            f"Plaintext of {abs(m).bit_length()} bits does not fit in a "
            f"{public_key.bits}-bit modulus")
    return gmpy2.mpz(m) % public_key.n


def from_residue(r: int, public_key: PublicKey) -> int:
    """ Map a residue in ``[0, n)`` back to a signed plaintext. """
    r = int(r)
    if r > public_key.max_plaintext:
        return r - int(public_key.n)
    return r


def encrypt(public_key: PublicKey,
            m: int,
            rng: Optional[RandomSource] = None) -> Ciphertext:
    """ Encrypt a signed integer: ``c = g^m * r^n mod n²``.

        :param public_key: the key to encrypt under.
        :param m: the plaintext, ``|m| < n/2``.
        :param rng: the randomness source; defaults to system entropy.
        :return: the ciphertext.
    """
    rng = rng or default_source()
    n, n2 = public_key.n, public_key.n_squared
    residue = to_residue(m, public_key)
    # g = n + 1, so g^m = 1 + m * n (mod n²)
    gm = (1 + residue * n) % n2
    r = rng.unit_below(n)
    return Ciphertext(value=(gm * gmpy2.powmod(r, n, n2)) % n2,
                      key_id=public_key.key_id)


def decrypt(private_key: PrivateKey, public_key: PublicKey,
            c: Ciphertext) -> int:
    """ Decrypt to a signed integer: ``m = L(c^lam mod n²) * mu mod n``.

        :raises KeyMismatchError: if the ciphertext or private key belong to a different public key.
    """
    if private_key.key_id != public_key.key_id:
        raise KeyMismatchError(
            f"Private key {private_key.key_id} does not belong to public key "
            f"{public_key.key_id}")
    _check_key(public_key, c)
    n, n2 = public_key.n, public_key.n_squared
    if c.value == 0:
        raise ValidationError("Zero is not a valid ciphertext")
    # the exponent is secret: use the constant-time exponentiation
    u = gmpy2.powmod_sec(c.value, private_key.lam, n2)
    m = (((u - 1) // n) * private_key.mu) % n
    return from_residue(m, public_key)


def add_ct(public_key: PublicKey, a: Ciphertext, b: Ciphertext) -> Ciphertext:
    """ Homomorphic addition: the result decrypts to ``Dec(a) + Dec(b)``. """
    _check_key(public_key, a, b)
    return Ciphertext(value=(a.value * b.value) % public_key.n_squared,
                      key_id=public_key.key_id)


def sum_ct(public_key: PublicKey, cts: Iterable[Ciphertext]) -> Ciphertext:
    """ Fold :func:`add_ct` over a non-empty sequence of ciphertexts. """
    cts = list(cts)
    if len(cts) == 0:
        raise ValidationError("Cannot sum an empty sequence of ciphertexts")
    return functools.reduce(lambda a, b: add_ct(public_key, a, b), cts)


def _invert(public_key: PublicKey, c: Ciphertext) -> gmpy2.mpz:
    try:
        return gmpy2.invert(c.value, public_key.n_squared)
    except ZeroDivisionError:
        raise DegenerateCiphertextError(
            "Ciphertext is not invertible modulo n²; encrypt the value again")


def scalar_mul(public_key: PublicKey, c: Ciphertext, s: int) -> Ciphertext:
    """ Multiply the plaintext under ``c`` by a plaintext scalar: the result decrypts to ``s * Dec(c)``.

        Computed as ``c^s mod n²`` by square-and-multiply, the logarithmic equivalent of adding ``c`` to itself ``s``
        times. Negative scalars exponentiate the inverse of ``c``; ``s = 0`` yields the trivial encryption of zero.

        :raises KeyMismatchError: if ``c`` belongs to a different key.
        :raises DegenerateCiphertextError: if ``s < 0`` and ``c`` is not invertible.
    """
    _check_key(public_key, c)
    s = int(s)
    n2 = public_key.n_squared
    if s >= 0:
        value = gmpy2.powmod(c.value, s, n2)
    else:
        value = gmpy2.powmod(_invert(public_key, c), -s, n2)
    return Ciphertext(value=value, key_id=public_key.key_id)


def fold_scalar_mul(public_key: PublicKey, c: Ciphertext,
                    s: int) -> Ciphertext:
    """ Scalar multiplication by literal repeated addition, ``|s|`` applications of :func:`add_ct`.

        This is the slow reference for :func:`scalar_mul`; it is limited to ``|s| <= FOLD_LIMIT``.
    """
    _check_key(public_key, c)
    s = int(s)
    if abs(s) > FOLD_LIMIT:
        raise ValidationError(
            f"Repeated addition is limited to |s| <= {FOLD_LIMIT}, got {s}")
    base = c if s >= 0 else Ciphertext(value=_invert(public_key, c),
                                       key_id=c.key_id)
    acc = Ciphertext(value=gmpy2.mpz(1), key_id=public_key.key_id)
    for _ in range(abs(s)):
        acc = add_ct(public_key, acc, base)
    return acc


def rerandomize(public_key: PublicKey,
                c: Ciphertext,
                rng: Optional[RandomSource] = None) -> Ciphertext:
    """ Multiply by a fresh encryption of zero. The plaintext is unchanged, the residue is not. """
    _check_key(public_key, c)
    rng = rng or default_source()
    n, n2 = public_key.n, public_key.n_squared
    r = rng.unit_below(n)
    return Ciphertext(value=(c.value * gmpy2.powmod(r, n, n2)) % n2,
                      key_id=public_key.key_id)
