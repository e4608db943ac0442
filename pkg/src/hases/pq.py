"""Forward-secure hash-based signatures with oracle-built commitments.

The signer holds a single 32-byte seed key that evolves through a
one-way chain: seed(j+1) = H1(seed(j)), with the old seed erased after
every signature.  Epoch j's signature reveals k chain-derived secret
strings selected by hashing the message into k indices over a t-entry
one-time commitment (the classic hash-to-obtain-random-subset shape).
Commitments are never sent by the signer; the key store rebuilds any
epoch's commitment from the master key, optionally accelerated by
precomputed mid-chain anchors.

Epoch factorization: with J = j1 * j2 total epochs, the store keeps
j1 - 1 anchors (the seeds at epochs j2+1, 2*j2+1, ...), bounding the
chain walk for any request to at most j2 - 1 hash steps.  j1 = 1 means
no anchors and a worst case of J - 1 steps: a pure storage/latency
trade-off, the commitments themselves are policy-invariant.

Commitment entries carry labels 1..t; a message index x in [0, t-1]
selects the entry at position x, whose label is x + 1.  Both the signer
and the store derive entry preimages as H1(seed || label), and both the
construction and verification sides map preimages to entries with H2.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import EpochExhausted, EpochOutOfRange, UnknownSigner
from .hashing import (
    DIGEST_LEN,
    DOM_CHAIN,
    DOM_COMMIT,
    DOM_MESSAGE,
    check_signer_id,
    domain_hash,
    encode_index,
    iter_hash,
)

SIGNATURE_TAG = 0x01
COMMITMENT_TAG = 0x11
HEADER_LEN = 1 + 16 + 8  # tag || id || epoch

MASTER_KEY_LEN = 32


@dataclass(frozen=True)
class PqParams:
    """System parameters for the forward-secure scheme.

    t: commitment entries per epoch (power of two)
    k: entries revealed per signature
    l: bit length of each secret string (the digest width)
    j1, j2: epoch factorization, J = j1 * j2
    """

    t: int = 1024
    k: int = 16
    l: int = 256
    j1: int = 1
    j2: int = 1024

    def __post_init__(self):
        if self.t < 2 or self.t & (self.t - 1):
            raise ValueError("t must be a power of two >= 2")
        if self.k < 1 or self.k * self.index_bits > 256:
            raise ValueError("k * log2(t) must fit in one 256-bit digest")
        if self.l != 8 * DIGEST_LEN:
            raise ValueError("secret string length is fixed at the digest width")
        if self.j1 < 1 or self.j2 < 1:
            raise ValueError("epoch factors must be >= 1")

    @property
    def index_bits(self) -> int:
        return (self.t - 1).bit_length()

    @property
    def epochs(self) -> int:
        """Total number of signing epochs J."""
        return self.j1 * self.j2


#: exhaustively testable profile
TOY_PARAMS = PqParams(t=8, k=4, j1=4, j2=4)


@dataclass
class PqSignerState:
    """Mutable signer side: current seed key and epoch counter.

    Single-writer: sign/advance must be externally serialized.  The
    seed is held in a bytearray so the previous key bytes can be
    overwritten (best-effort) on every update.
    """

    signer_id: bytes
    seed: bytearray
    epoch: int
    params: PqParams

    @property
    def exhausted(self) -> bool:
        return self.epoch > self.params.epochs


@dataclass(frozen=True)
class PqSignature:
    signer_id: bytes
    epoch: int
    parts: tuple[bytes, ...]

    def to_bytes(self) -> bytes:
        return (
            bytes((SIGNATURE_TAG,))
            + self.signer_id
            + encode_index(self.epoch)
            + b"".join(self.parts)
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "PqSignature":
        signer_id, epoch, rest = _split_header(data, SIGNATURE_TAG, "signature")
        if not rest or len(rest) % DIGEST_LEN:
            raise ValueError("signature body is not a whole number of digests")
        parts = tuple(rest[i : i + DIGEST_LEN] for i in range(0, len(rest), DIGEST_LEN))
        return cls(signer_id, epoch, parts)


@dataclass(frozen=True)
class PqCommitment:
    signer_id: bytes
    epoch: int
    entries: tuple[bytes, ...]

    def to_bytes(self) -> bytes:
        return (
            bytes((COMMITMENT_TAG,))
            + self.signer_id
            + encode_index(self.epoch)
            + b"".join(self.entries)
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "PqCommitment":
        signer_id, epoch, rest = _split_header(data, COMMITMENT_TAG, "commitment")
        if not rest or len(rest) % DIGEST_LEN:
            raise ValueError("commitment body is not a whole number of digests")
        entries = tuple(rest[i : i + DIGEST_LEN] for i in range(0, len(rest), DIGEST_LEN))
        return cls(signer_id, epoch, entries)


def _split_header(data: bytes, tag: int, what: str) -> tuple[bytes, int, bytes]:
    if len(data) < HEADER_LEN or data[0] != tag:
        raise ValueError(f"not a serialized {what}")
    signer_id = data[1:17]
    epoch = int.from_bytes(data[17:25], "big")
    return signer_id, epoch, data[25:]


@dataclass(frozen=True)
class PqKeyMaterial:
    """Store side: master key plus per-signer anchor tables.

    anchors[id][i] is the seed at epoch (i+1)*j2 + 1; the epoch-1 seed
    is never stored, it is re-derived from the master key on demand.
    """

    msk: bytes
    params: PqParams
    anchors: Mapping[bytes, tuple[bytes, ...]]

    @property
    def signer_ids(self) -> Iterable[bytes]:
        return self.anchors.keys()


def initial_seed(msk: bytes, signer_id: bytes) -> bytes:
    """Epoch-1 seed key of a signer, derived from the master key."""
    return domain_hash(DOM_MESSAGE, msk + signer_id)


def derive_anchors(msk: bytes, signer_id: bytes, params: PqParams) -> tuple[bytes, ...]:
    """Walk the chain once and collect the j1 - 1 anchor seeds."""
    anchors = []
    seed = initial_seed(msk, signer_id)
    for _ in range(params.j1 - 1):
        seed = iter_hash(DOM_CHAIN, seed, params.j2)
        anchors.append(seed)
    return tuple(anchors)


def keygen(
    ids: Iterable[bytes],
    params: PqParams,
    rng: Callable[[int], bytes] = secrets.token_bytes,
) -> tuple[dict[bytes, PqSignerState], PqKeyMaterial]:
    """Generate the master key, per-signer initial states, and store material.

    The signer states receive only their own epoch-1 seed; the master
    key and anchors go to the key store alone.
    """
    id_list = [check_signer_id(i) for i in ids]
    if not id_list:
        raise ValueError("at least one signer id required")
    if len(set(id_list)) != len(id_list):
        raise ValueError("duplicate signer ids")
    msk = rng(MASTER_KEY_LEN)
    states = {
        sid: PqSignerState(sid, bytearray(initial_seed(msk, sid)), 1, params)
        for sid in id_list
    }
    anchors = {sid: derive_anchors(msk, sid, params) for sid in id_list}
    return states, PqKeyMaterial(msk, params, anchors)


def advance_key(state: PqSignerState) -> None:
    """One-way key update: replace the seed, erase the old bytes."""
    if state.exhausted:
        raise EpochExhausted(f"all {state.params.epochs} epochs used")
    new_seed = domain_hash(DOM_CHAIN, bytes(state.seed))
    state.seed[:] = new_seed
    state.epoch += 1


def message_indices(message: bytes, params: PqParams) -> tuple[int, ...]:
    """Hash the message and slice the digest into k commitment indices.

    The first k*log2(t) bits are consumed most-significant-first; each
    log2(t)-bit window is one big-endian index in [0, t-1].
    """
    digest = domain_hash(DOM_MESSAGE, message)
    return indices_from_digest(digest, params)


def indices_from_digest(digest: bytes, params: PqParams) -> tuple[int, ...]:
    value = int.from_bytes(digest, "big")
    bits = params.index_bits
    shift = 8 * DIGEST_LEN - bits
    mask = params.t - 1
    out = []
    for _ in range(params.k):
        out.append((value >> shift) & mask)
        shift -= bits
    return tuple(out)


def _secret_string(seed: bytes, label: int) -> bytes:
    return domain_hash(DOM_CHAIN, seed + encode_index(label))


def sign(state: PqSignerState, message: bytes) -> PqSignature:
    """Sign at the current epoch, then advance the key.

    Costs exactly 1 + k + 1 primitive hash calls.  The returned
    signature carries the epoch it was produced at (the pre-update
    value), which is the epoch whose commitment verifies it.
    """
    if state.exhausted:
        raise EpochExhausted(f"all {state.params.epochs} epochs used")
    indices = message_indices(message, state.params)
    seed = bytes(state.seed)
    parts = tuple(_secret_string(seed, x + 1) for x in indices)
    signature = PqSignature(state.signer_id, state.epoch, parts)
    advance_key(state)
    return signature


def commitment_from_seed(seed: bytes, signer_id: bytes, epoch: int, params: PqParams) -> PqCommitment:
    entries = tuple(
        domain_hash(DOM_COMMIT, _secret_string(seed, label))
        for label in range(1, params.t + 1)
    )
    return PqCommitment(signer_id, epoch, entries)


def construct_commitment(material: PqKeyMaterial, signer_id: bytes, epoch: int) -> PqCommitment:
    """Rebuild the one-time commitment for (signer, epoch) at the store.

    The seed is recovered from the nearest anchor at or below the
    requested epoch (the master key itself when the epoch falls in the
    first segment), then walked forward at most j2 - 1 steps.
    """
    params = material.params
    if signer_id not in material.anchors:
        raise UnknownSigner(f"signer {signer_id.hex()} not provisioned")
    if not 1 <= epoch <= params.epochs:
        raise EpochOutOfRange(f"epoch {epoch} outside [1, {params.epochs}]")
    segment, offset = divmod(epoch - 1, params.j2)
    if segment == 0:
        base = initial_seed(material.msk, signer_id)
    else:
        base = material.anchors[signer_id][segment - 1]
    seed = iter_hash(DOM_CHAIN, base, offset)
    return commitment_from_seed(seed, signer_id, epoch, params)


def verify(
    commitment: PqCommitment,
    message: bytes,
    signature: PqSignature,
    params: PqParams,
) -> bool:
    """Check the k revealed strings against the epoch commitment.

    Structural mismatches (identity/epoch disagreement, wrong part or
    entry counts, epoch outside [1, J]) reject before any hashing.
    """
    if signature.signer_id != commitment.signer_id or signature.epoch != commitment.epoch:
        return False
    if not 1 <= signature.epoch <= params.epochs:
        return False
    if len(signature.parts) != params.k or len(commitment.entries) != params.t:
        return False
    indices = message_indices(message, params)
    return all(
        domain_hash(DOM_COMMIT, part) == commitment.entries[x]
        for part, x in zip(signature.parts, indices)
    )
