"""Exception types shared across the library.

Predicate-failure results are in-band (``None`` stands for the bottom
symbol); exceptions are reserved for contract violations and bad state.
"""


class CondEncError(Exception):
    """Base class for all library errors."""


class ParameterError(CondEncError):
    """Requested parameters are unsatisfiable (e.g. prime bounds vs modulus size)."""


class DomainError(CondEncError, ValueError):
    """An input is outside its documented domain (range, length, alphabet)."""


class NonceError(CondEncError, ValueError):
    """An encryption nonce is not a unit modulo N."""


class MalformedCiphertextError(CondEncError, ValueError):
    """A ciphertext does not have the shape or group membership it claims."""


class MalformedPaddingError(DomainError):
    """A padded string has a pad symbol before a non-pad symbol."""


class IntegrityError(CondEncError):
    """Persistent vault state is corrupt; the operation was not applied."""
