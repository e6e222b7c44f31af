"""The protocol hash: Keccak-256, as used by Ethereum."""

from Crypto.Hash import keccak

HASH_FAMILY = "keccak-256"
DIGEST_SIZE = 32


def keccak256(*parts: bytes) -> bytes:
    """Hash the concatenation of ``parts``."""
    h = keccak.new(digest_bits=256)
    for part in parts:
        h.update(part)
    return h.digest()


def u64(value: int) -> bytes:
    return value.to_bytes(8, "big")
