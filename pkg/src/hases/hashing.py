"""Domain-separated hashing primitives.

All signing, key-evolution, and commitment material in this package is
derived from three hash functions obtained from SHA-256 by prefixing a
single domain byte:

    H_k(x) = SHA-256( byte(k) || x ),  k in {0, 1, 2}

The prefix byte is our convention; any collision-free split of SHA-256
into three independent functions would do.  Domain 0 covers message
digests and key derivation, domain 1 covers one-way chains and secret
expansion, domain 2 covers public commitment images and challenge
scalars.

Integers are encoded into hash inputs as fixed-width big-endian strings
(8 bytes for epochs and indices) so that concatenations parse uniquely.
Signer identities are exactly 16 bytes everywhere.

A module-level call counter backs the benchmark harness.  Increments are
plain integer adds: safe under the GIL, but reset/read is only
meaningful while a single benchmark runs at a time.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

DIGEST_LEN = 32
ID_LEN = 16

#: hash domains
DOM_MESSAGE = 0
DOM_CHAIN = 1
DOM_COMMIT = 2


@dataclass
class HashCounters:
    """Tally of primitive hash invocations, one slot per domain."""

    calls_h0: int = 0
    calls_h1: int = 0
    calls_h2: int = 0

    def reset(self) -> None:
        self.calls_h0 = self.calls_h1 = self.calls_h2 = 0

    def snapshot(self) -> tuple[int, int, int]:
        return (self.calls_h0, self.calls_h1, self.calls_h2)

    def total(self) -> int:
        return self.calls_h0 + self.calls_h1 + self.calls_h2


counters = HashCounters()

_PREFIX = (b"\x00", b"\x01", b"\x02")
_sha256 = hashlib.sha256


def domain_hash(domain: int, data: bytes) -> bytes:
    """Return the 32-byte digest of ``data`` under hash domain 0, 1 or 2."""
    if domain == 0:
        counters.calls_h0 += 1
    elif domain == 1:
        counters.calls_h1 += 1
    elif domain == 2:
        counters.calls_h2 += 1
    else:
        raise ValueError(f"hash domain must be 0, 1 or 2, got {domain}")
    return _sha256(_PREFIX[domain] + data).digest()


def iter_hash(domain: int, seed: bytes, steps: int) -> bytes:
    """Apply ``domain_hash(domain, .)`` to ``seed`` ``steps`` times.

    ``steps == 0`` returns the seed unchanged.  Splitting holds by
    construction: iterating a+b steps equals iterating b steps on the
    result of iterating a steps, which is what lets mid-chain anchors
    stand in for the chain head.
    """
    if steps < 0:
        raise ValueError("step count must be non-negative")
    value = seed
    for _ in range(steps):
        value = domain_hash(domain, value)
    return value


def hash_to_scalar(domain: int, data: bytes, order: int) -> int:
    """Hash ``data`` into a nonzero scalar modulo ``order``.

    The digest is read as a big-endian integer and reduced.  A zero
    result is retried with a one-byte counter appended, which keeps the
    map well defined for the tiny test groups; for ~252-bit orders the
    retry never fires and the reduction bias is negligible.
    """
    if order <= 2:
        raise ValueError("group order must exceed 2")
    value = int.from_bytes(domain_hash(domain, data), "big") % order
    retry = 0
    while value == 0:
        if retry > 255:  # unreachable for any order > 2
            raise RuntimeError("hash_to_scalar retry counter exhausted")
        value = int.from_bytes(domain_hash(domain, data + bytes((retry,))), "big") % order
        retry += 1
    return value


def encode_index(value: int) -> bytes:
    """8-byte big-endian encoding used for epochs and per-item indices."""
    if value < 0:
        raise ValueError("indices are non-negative")
    return value.to_bytes(8, "big")


def check_signer_id(signer_id: bytes) -> bytes:
    if len(signer_id) != ID_LEN:
        raise ValueError(f"signer id must be exactly {ID_LEN} bytes, got {len(signer_id)}")
    return signer_id
