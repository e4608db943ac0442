"""Hybrid signing: aggregate tag wrapped by a forward-secure signature.

Each batch is first folded into an order-binding nested digest vector

    n_1 = H0(m_1)
    n_l = H0(m_l || H0(n_(l-1)))   for l >= 2

whose last element is a holistic digest of the whole batch.  The
aggregate layer signs the digest vector (not the raw messages); the
forward-secure layer then signs the 64-byte string

    s_agg (32 bytes big-endian) || n_last

binding the aggregate response to the batch content.  A hybrid tag
verifies only if both component checks pass, so it stays unforgeable
while either layer does.  Permuting the batch changes the nested
vector, so item order is enforced even though scalar aggregation
itself is commutative.

The two signer states live in one wrapper and advance in lockstep;
an epoch mismatch fails hard before any signing.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from . import la, pq
from .errors import EpochDesync
from .group import PrimeOrderGroup, encode_scalar
from .hashing import DOM_MESSAGE, domain_hash

SIGNATURE_TAG = 0x03
COMMITMENT_TAG = 0x13
HEADER_LEN = 1 + 16 + 8  # tag || shared id || shared epoch


def nest(messages: Sequence[bytes]) -> list[bytes]:
    """Nested digest vector of a batch; the last entry binds the whole."""
    if not messages:
        raise ValueError("cannot nest an empty batch")
    digests = [domain_hash(DOM_MESSAGE, messages[0])]
    for message in messages[1:]:
        link = domain_hash(DOM_MESSAGE, digests[-1])
        digests.append(domain_hash(DOM_MESSAGE, message + link))
    return digests


def inner_message(agg: int, last_digest: bytes) -> bytes:
    """The 64-byte string the forward-secure layer signs."""
    return encode_scalar(agg) + last_digest


@dataclass
class HySignerState:
    """Lockstep pair of component signer states."""

    la: la.LaSignerState
    pq: pq.PqSignerState

    def __post_init__(self):
        if self.la.signer_id != self.pq.signer_id:
            raise ValueError("component states belong to different signers")

    @property
    def signer_id(self) -> bytes:
        return self.la.signer_id

    def check_lockstep(self) -> None:
        if self.la.epoch != self.pq.epoch:
            raise EpochDesync(
                f"component epochs diverged: {self.la.epoch} vs {self.pq.epoch}"
            )

    @property
    def epoch(self) -> int:
        self.check_lockstep()
        return self.la.epoch


@dataclass(frozen=True)
class HySignature:
    la: la.LaSignature
    pq: pq.PqSignature

    def __post_init__(self):
        if self.la.signer_id != self.pq.signer_id or self.la.epoch != self.pq.epoch:
            raise ValueError("component signatures disagree on signer or epoch")

    def to_bytes(self) -> bytes:
        # shared id/epoch header, then the two cryptographic payloads
        return (
            bytes((SIGNATURE_TAG,))
            + self.la.signer_id
            + self.la.epoch.to_bytes(8, "big")
            + encode_scalar(self.la.agg)
            + self.la.seed
            + b"".join(self.pq.parts)
        )

    @classmethod
    def from_bytes(cls, data: bytes, group: PrimeOrderGroup) -> "HySignature":
        if len(data) < HEADER_LEN + 64 + 32 or data[0] != SIGNATURE_TAG:
            raise ValueError("not a serialized hybrid signature")
        signer_id = data[1:17]
        epoch = int.from_bytes(data[17:25], "big")
        agg = group.decode_scalar(data[25:57])
        seed = data[57:89]
        rest = data[89:]
        if len(rest) % 32:
            raise ValueError("hybrid signature body is not a whole number of digests")
        parts = tuple(rest[i : i + 32] for i in range(0, len(rest), 32))
        return cls(
            la.LaSignature(signer_id, epoch, agg, seed),
            pq.PqSignature(signer_id, epoch, parts),
        )


@dataclass(frozen=True)
class HyCommitment:
    la: la.LaCommitment
    pq: pq.PqCommitment

    def __post_init__(self):
        if self.la.signer_id != self.pq.signer_id or self.la.epoch != self.pq.epoch:
            raise ValueError("component commitments disagree on signer or epoch")

    def to_bytes(self, group: PrimeOrderGroup) -> bytes:
        return (
            bytes((COMMITMENT_TAG,))
            + self.la.signer_id
            + self.la.epoch.to_bytes(8, "big")
            + self.la.batch_size.to_bytes(4, "big")
            + group.encode_element(self.la.value)
            + b"".join(self.pq.entries)
        )

    @classmethod
    def from_bytes(cls, data: bytes, group: PrimeOrderGroup) -> "HyCommitment":
        if len(data) < HEADER_LEN + 4 + 32 + 32 or data[0] != COMMITMENT_TAG:
            raise ValueError("not a serialized hybrid commitment")
        signer_id = data[1:17]
        epoch = int.from_bytes(data[17:25], "big")
        batch_size = int.from_bytes(data[25:29], "big")
        value = group.decode_element(data[29:61])
        rest = data[61:]
        if not rest or len(rest) % 32:
            raise ValueError("hybrid commitment body is not a whole number of digests")
        entries = tuple(rest[i : i + 32] for i in range(0, len(rest), 32))
        return cls(
            la.LaCommitment(signer_id, epoch, batch_size, value),
            pq.PqCommitment(signer_id, epoch, entries),
        )


@dataclass(frozen=True)
class HyKeyMaterial:
    la: la.LaKeyMaterial
    pq: pq.PqKeyMaterial


def keygen(
    ids: Iterable[bytes],
    group: PrimeOrderGroup,
    batch_size: int,
    pq_params: pq.PqParams,
    rng: Callable[[int], bytes] = secrets.token_bytes,
) -> tuple[dict[bytes, HySignerState], dict[bytes, object], HyKeyMaterial]:
    """Run both component key ceremonies over the same identity list.

    The aggregate layer is sized for the same number of epochs as the
    forward-secure chain, so the pair can advance in lockstep for the
    whole key lifetime.
    """
    id_list = list(ids)
    la_states, public, la_material = la.keygen(
        id_list, group, pq_params.epochs, batch_size, rng
    )
    pq_states, pq_material = pq.keygen(id_list, pq_params, rng)
    states = {
        sid: HySignerState(la_states[sid], pq_states[sid]) for sid in la_states
    }
    return states, public, HyKeyMaterial(la_material, pq_material)


def sign_batch(state: HySignerState, messages: Sequence[bytes]) -> HySignature:
    """Aggregate-sign the nested digests, then wrap with the FS layer."""
    state.check_lockstep()  # hard failure before any signing
    digests = nest(messages)
    la_sig = la.sign_batch(state.la, digests)
    pq_sig = pq.sign(state.pq, inner_message(la_sig.agg, digests[-1]))
    return HySignature(la_sig, pq_sig)


def verify_batch(
    public_key,
    commitment: HyCommitment,
    messages: Sequence[bytes],
    signature: HySignature,
    group: PrimeOrderGroup,
    pq_params: pq.PqParams,
) -> bool:
    """Both component checks must pass on the recomputed nested vector."""
    if (
        signature.la.signer_id != commitment.la.signer_id
        or signature.la.epoch != commitment.la.epoch
    ):
        return False
    if not messages:
        return False
    digests = nest(messages)
    ok_la = la.verify_batch(public_key, commitment.la, digests, signature.la, group)
    ok_pq = pq.verify(
        commitment.pq,
        inner_message(signature.la.agg, digests[-1]),
        signature.pq,
        pq_params,
    )
    return ok_la and ok_pq
