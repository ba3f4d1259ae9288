"""Conditional encryption for typo-class predicates.

A conditional encryption scheme extends public-key encryption with a
``cenc`` algorithm: given a ciphertext of a hidden message, a control
message and a payload, it produces a ciphertext that decrypts to the
payload exactly when a predicate relates the hidden and control messages,
and to nothing otherwise — even for the holder of the secret key.

Supported predicates: equality, CAPSLOCK inversion, padded Hamming distance
at most l, insert/delete edit distance at most 1, and their OR (the
password-typo predicate).  The :mod:`condenc.typtop` module builds a
typo-tolerant password vault on top.
"""

from .encoding import Alphabet, BYTES, as_message
from .errors import (
    CondEncError,
    DomainError,
    IntegrityError,
    MalformedCiphertextError,
    MalformedPaddingError,
    NonceError,
    ParameterError,
)
from .predicates import PredicateSpec, p_capslock, p_ed1, p_eq, p_ham, p_typo
from .schemes import (
    CondCiphertext,
    SchemeParams,
    deserialize_ciphertext,
    make_scheme,
    scheme_keygen,
    serialize_ciphertext,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BYTES",
    "CondCiphertext",
    "CondEncError",
    "DomainError",
    "IntegrityError",
    "MalformedCiphertextError",
    "MalformedPaddingError",
    "NonceError",
    "ParameterError",
    "PredicateSpec",
    "SchemeParams",
    "as_message",
    "deserialize_ciphertext",
    "make_scheme",
    "p_capslock",
    "p_ed1",
    "p_eq",
    "p_ham",
    "p_typo",
    "scheme_keygen",
    "serialize_ciphertext",
    "__version__",
]
