"""Single-signer aggregate signatures over a prime-order group.

One batch of L messages yields one constant-size tag.  The signer never
performs a group exponentiation: all nonces are derived from the
private scalar by hashing, so the matching aggregate nonce commitment
R = alpha^(sum of nonces) can be rebuilt by the key store from the
master key and handed to verifiers out of band.

Per batch j the signer derives a public seed x_j = H0(y || j) and a
nonce seed r_j = H1(y || j) (y encoded as 32 bytes big-endian, j as 8
bytes).  For each item l in 1..L:

    x_j_l = H0(x_j || l)                      per-item public seed
    r_j_l = H1(r_j || l) reduced into Z_q*    per-item nonce
    e_j_l = H2(m_l || x_j_l) reduced          per-item challenge
    s_j_l = r_j_l - e_j_l * y  (mod q)        per-item response

The tag is (sum of s_j_l, x_j, id, j); verification recomputes the
challenge sum from the messages and checks

    R  ==  Y^(sum e)  *  alpha^(sum s).

The nonce seed stays a full 32-byte digest during derivation and only
the per-item leaves are reduced to scalars, keeping every derivation
step domain-uniform.  Signing is fully deterministic: the same key,
counter, and batch always produce byte-identical tags.

Truncation resistance is structural: verification is defined only over
the full batch, and any proper prefix changes the challenge sum.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import EpochExhausted, EpochOutOfRange, UnknownSigner
from .group import PrimeOrderGroup, encode_scalar
from .hashing import (
    DOM_CHAIN,
    DOM_COMMIT,
    DOM_MESSAGE,
    check_signer_id,
    domain_hash,
    encode_index,
    hash_to_scalar,
)

SIGNATURE_TAG = 0x02
COMMITMENT_TAG = 0x12
SIGNATURE_LEN = 1 + 16 + 8 + 32 + 32
COMMITMENT_LEN = 1 + 16 + 8 + 4 + 32

MASTER_KEY_LEN = 32


@dataclass(frozen=True)
class LaParams:
    group: PrimeOrderGroup
    max_batches: int  # J
    batch_size: int  # L

    def __post_init__(self):
        if self.max_batches < 1 or self.batch_size < 1:
            raise ValueError("batch count and batch size must be >= 1")


@dataclass
class LaSignerState:
    """Private scalar plus the batch counter.  Single-writer."""

    signer_id: bytes
    key: int
    epoch: int
    params: LaParams

    @property
    def exhausted(self) -> bool:
        return self.epoch > self.params.max_batches


@dataclass(frozen=True)
class LaSignature:
    """Aggregate tag: response sum plus the per-batch public seed."""

    signer_id: bytes
    epoch: int
    agg: int
    seed: bytes

    def to_bytes(self) -> bytes:
        return (
            bytes((SIGNATURE_TAG,))
            + self.signer_id
            + encode_index(self.epoch)
            + encode_scalar(self.agg)
            + self.seed
        )

    @classmethod
    def from_bytes(cls, data: bytes, group: PrimeOrderGroup) -> "LaSignature":
        if len(data) != SIGNATURE_LEN or data[0] != SIGNATURE_TAG:
            raise ValueError("not a serialized aggregate signature")
        epoch = int.from_bytes(data[17:25], "big")
        agg = group.decode_scalar(data[25:57])
        return cls(data[1:17], epoch, agg, data[57:89])


@dataclass(frozen=True)
class LaCommitment:
    """Aggregate nonce commitment for one (signer, batch) pair."""

    signer_id: bytes
    epoch: int
    batch_size: int
    value: object  # group element

    def to_bytes(self, group: PrimeOrderGroup) -> bytes:
        return (
            bytes((COMMITMENT_TAG,))
            + self.signer_id
            + encode_index(self.epoch)
            + self.batch_size.to_bytes(4, "big")
            + group.encode_element(self.value)
        )

    @classmethod
    def from_bytes(cls, data: bytes, group: PrimeOrderGroup) -> "LaCommitment":
        if len(data) != COMMITMENT_LEN or data[0] != COMMITMENT_TAG:
            raise ValueError("not a serialized aggregate commitment")
        epoch = int.from_bytes(data[17:25], "big")
        batch_size = int.from_bytes(data[25:29], "big")
        return cls(data[1:17], epoch, batch_size, group.decode_element(data[29:]))


@dataclass(frozen=True)
class LaKeyMaterial:
    """Store side: the master key and the registered identities."""

    msk: bytes
    params: LaParams
    signer_ids: frozenset[bytes]


def private_scalar(msk: bytes, signer_id: bytes, group: PrimeOrderGroup) -> int:
    return hash_to_scalar(DOM_MESSAGE, msk + signer_id, group.q)


def keygen(
    ids: Iterable[bytes],
    group: PrimeOrderGroup,
    max_batches: int,
    batch_size: int,
    rng: Callable[[int], bytes] = secrets.token_bytes,
) -> tuple[dict[bytes, LaSignerState], dict[bytes, object], LaKeyMaterial]:
    """Derive per-signer keys from a fresh master key.

    Returns (signer states, public keys, store material); the master
    key goes to the store only, each private scalar to its signer only.
    """
    id_list = [check_signer_id(i) for i in ids]
    if not id_list:
        raise ValueError("at least one signer id required")
    if len(set(id_list)) != len(id_list):
        raise ValueError("duplicate signer ids")
    params = LaParams(group, max_batches, batch_size)
    msk = rng(MASTER_KEY_LEN)
    states = {}
    public = {}
    for sid in id_list:
        y = private_scalar(msk, sid, group)
        states[sid] = LaSignerState(sid, y, 1, params)
        public[sid] = group.exp(group.generator, y)
    return states, public, LaKeyMaterial(msk, params, frozenset(id_list))


def aggregate(parts: Sequence[int], q: int) -> int:
    """Sum of response scalars mod q; order-independent."""
    total = 0
    for part in parts:
        if not 0 <= part < q:
            raise ValueError("aggregate parts must be canonical scalars")
        total = (total + part) % q
    return total


def _epoch_seeds(key: int, epoch: int) -> tuple[bytes, bytes]:
    key_bytes = encode_scalar(key)
    public_seed = domain_hash(DOM_MESSAGE, key_bytes + encode_index(epoch))
    nonce_seed = domain_hash(DOM_CHAIN, key_bytes + encode_index(epoch))
    return public_seed, nonce_seed


def _item_nonce(nonce_seed: bytes, item: int, q: int) -> int:
    return hash_to_scalar(DOM_CHAIN, nonce_seed + encode_index(item), q)


def _item_challenge(message: bytes, item_seed: bytes, q: int) -> int:
    return hash_to_scalar(DOM_COMMIT, message + item_seed, q)


def sign_batch(state: LaSignerState, messages: Sequence[bytes]) -> LaSignature:
    """Produce the aggregate tag for one full batch and bump the counter."""
    params = state.params
    if state.exhausted:
        raise EpochExhausted(f"all {params.max_batches} batches signed")
    if len(messages) != params.batch_size:
        raise ValueError(f"batch must contain exactly {params.batch_size} messages")
    q = params.group.q
    public_seed, nonce_seed = _epoch_seeds(state.key, state.epoch)
    responses = []
    for item, message in enumerate(messages, start=1):
        item_seed = domain_hash(DOM_MESSAGE, public_seed + encode_index(item))
        nonce = _item_nonce(nonce_seed, item, q)
        challenge = _item_challenge(message, item_seed, q)
        responses.append((nonce - challenge * state.key) % q)
    signature = LaSignature(state.signer_id, state.epoch, aggregate(responses, q), public_seed)
    state.epoch += 1
    return signature


def commitment_from_key(
    key: int,
    signer_id: bytes,
    epoch: int,
    batch_size: int,
    group: PrimeOrderGroup,
) -> LaCommitment:
    """Aggregate nonce commitment derived straight from the private scalar."""
    if batch_size < 1:
        raise ValueError("batch size must be >= 1")
    _, nonce_seed = _epoch_seeds(key, epoch)
    total = 0
    for item in range(1, batch_size + 1):
        total = (total + _item_nonce(nonce_seed, item, group.q)) % group.q
    return LaCommitment(signer_id, epoch, batch_size, group.exp(group.generator, total))


def construct_commitment(
    material: LaKeyMaterial,
    signer_id: bytes,
    epoch: int,
    batch_size: int | None = None,
) -> LaCommitment:
    """Rebuild the aggregate nonce commitment exactly as the signer would."""
    params = material.params
    if signer_id not in material.signer_ids:
        raise UnknownSigner(f"signer {signer_id.hex()} not provisioned")
    if not 1 <= epoch <= params.max_batches:
        raise EpochOutOfRange(f"epoch {epoch} outside [1, {params.max_batches}]")
    size = params.batch_size if batch_size is None else batch_size
    key = private_scalar(material.msk, signer_id, params.group)
    return commitment_from_key(key, signer_id, epoch, size, params.group)


def verify_batch(
    public_key,
    commitment: LaCommitment,
    messages: Sequence[bytes],
    signature: LaSignature,
    group: PrimeOrderGroup,
) -> bool:
    """Check R == Y^(sum e) * alpha^(sum s) over the full batch.

    Structural mismatches (identity/epoch disagreement, wrong batch
    length) reject before any group work.
    """
    if signature.signer_id != commitment.signer_id or signature.epoch != commitment.epoch:
        return False
    if len(messages) != commitment.batch_size:
        return False
    if not 0 <= signature.agg < group.q:
        return False
    challenge_sum = 0
    for item, message in enumerate(messages, start=1):
        item_seed = domain_hash(DOM_MESSAGE, signature.seed + encode_index(item))
        challenge_sum = (challenge_sum + _item_challenge(message, item_seed, group.q)) % group.q
    expected = group.mul(
        group.exp(public_key, challenge_sum),
        group.exp(group.generator, signature.agg),
    )
    return commitment.value == expected
