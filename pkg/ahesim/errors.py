""" Exceptions raised by ahesim.

    Every error the package raises on purpose derives from :class:`AHESimException`. The command line maps each
    class below to one exit code (see :mod:`ahesim.cli`), and the service maps them to HTTP status codes.
"""
from typing import Optional

__all__ = [
    "AHESimException", "ValidationError", "CodecRangeError", "BudgetError",
    "IntegrityError", "KeyMismatchError", "MissingKeyError",
    "DegenerateCiphertextError", "CorrectnessError", "ServiceError"
]


class AHESimException(Exception):
    """ Base class for all exceptions raised by ahesim. """
    pass


class ValidationError(AHESimException, ValueError):
    """ An argument, file or request failed validation (shape, schema, range or format). """
    pass


class CodecRangeError(ValidationError):
    """ A real value lies outside the ``max_abs`` bound of the active scale configuration. """
    pass


class BudgetError(ValidationError):
    """ The overflow budget does not hold: an inner product could wrap around the plaintext modulus.

        :param message: the error message.
        :param max_safe_dimension: the largest dimension for which the budget holds.
    """
    def __init__(self, message: str, max_safe_dimension: Optional[int] = None):
        super().__init__(message)
        self.max_safe_dimension = max_safe_dimension


class IntegrityError(ValidationError):
    """ A persisted database does not match its manifest. """
    pass


class KeyMismatchError(AHESimException):
    """ Ciphertexts or keys produced under different public keys were combined. """
    pass


class MissingKeyError(AHESimException):
    """ An operation needs a key that was not provided. """
    pass


class DegenerateCiphertextError(AHESimException):
    """ A ciphertext is not invertible modulo n²; the encryption randomness was degenerate and the value must be
        encrypted again.
    """
    pass


class CorrectnessError(AHESimException):
    """ An encrypted computation disagreed with its plaintext oracle. """
    pass


class ServiceError(ValidationError):
    """ The search service rejected a request.

        :param message: the error detail returned by the service.
        :param status_code: the HTTP status of the response.
    """
    def __init__(self, message: str, status_code: int):
        super().__init__(message)
        self.status_code = status_code
