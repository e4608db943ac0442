"""Commitment-oracle service: store, wire protocol, server, client.

The store is the only holder of master secrets.  It answers per-epoch
commitment requests for all three schemes and never exposes key bytes:
every response carries only public commitment material.  The trust
boundary is the process boundary; hosting the same store inside a
hardware enclave is a deployment substitution, not a code change.

Wire protocol (stream transport): each frame is a 4-byte big-endian
length followed by a 1-byte message type and the body.  Request types:

    0x01  commitment, forward-secure     body: id(16) epoch(8)
    0x02  commitment, aggregate          body: id(16) epoch(8) L(4)
    0x03  commitment, hybrid             body: id(16) epoch(8)
    0x04  batch export                   body: scheme(1) id(16) from(8) to(8)

Responses mirror the request type with bit 0x80 set; the body starts
with a status byte (0x00 OK, 0x01 unknown id, 0x02 epoch out of range,
0x03 malformed) followed by the serialized commitment, or for exports
an 8-byte entry count and the concatenated equal-sized commitments.
Hybrid requests and all exports use the batch size registered at
provisioning time.

The protocol is binary so commitments travel bit-exactly, and it is
deliberately small: there is no verification entry point (the store
only supplies commitments) and no provisioning entry point (secrets
are installed at process start, they never cross this interface).
Responses are unauthenticated; deployments that do not co-locate the
service with the verifier should wrap the transport accordingly.

Concurrency: key material objects are immutable; readers grab the
current reference under a short lock and hash outside it, writers
(provision, storage policy changes) swap in replacement objects.
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading
from typing import BinaryIO, Union

from . import hy, la, pq
from .errors import CcoRequestError, EpochOutOfRange, MalformedFrame, UnknownSigner

MSG_PQ = 0x01
MSG_LA = 0x02
MSG_HY = 0x03
MSG_EXPORT = 0x04
RESPONSE_BIT = 0x80

STATUS_OK = 0x00
STATUS_UNKNOWN_ID = 0x01
STATUS_EPOCH_RANGE = 0x02
STATUS_MALFORMED = 0x03

MAX_FRAME = 1 << 27  # generous: a full toy-scale batch export stays far below

_REQUEST_BODY_LEN = {MSG_PQ: 24, MSG_LA: 28, MSG_HY: 24, MSG_EXPORT: 33}


class CcoStore:
    """Thread-safe holder of per-scheme master secrets and anchors."""

    def __init__(self):
        self._lock = threading.Lock()
        self._pq: pq.PqKeyMaterial | None = None
        self._la: la.LaKeyMaterial | None = None

    # -- provisioning (exclusive writers) --------------------------------

    def provision(self, material: Union[pq.PqKeyMaterial, la.LaKeyMaterial, hy.HyKeyMaterial]) -> None:
        """Install keygen output.  Rejects id collisions and incompatible
        master keys/parameters; a rejected call changes nothing."""
        with self._lock:
            if isinstance(material, hy.HyKeyMaterial):
                new_pq = self._merged_pq(material.pq)
                new_la = self._merged_la(material.la)
                self._pq, self._la = new_pq, new_la
            elif isinstance(material, pq.PqKeyMaterial):
                self._pq = self._merged_pq(material)
            elif isinstance(material, la.LaKeyMaterial):
                self._la = self._merged_la(material)
            else:
                raise TypeError(f"cannot provision {type(material).__name__}")

    def _merged_pq(self, incoming: pq.PqKeyMaterial) -> pq.PqKeyMaterial:
        current = self._pq
        if current is None:
            return incoming
        if current.msk != incoming.msk or current.params != incoming.params:
            raise ValueError("incompatible forward-secure master key or parameters")
        overlap = set(current.anchors) & set(incoming.anchors)
        if overlap:
            raise ValueError(f"signer already provisioned: {sorted(overlap)[0].hex()}")
        merged = dict(current.anchors)
        merged.update(incoming.anchors)
        return pq.PqKeyMaterial(current.msk, current.params, merged)

    def _merged_la(self, incoming: la.LaKeyMaterial) -> la.LaKeyMaterial:
        current = self._la
        if current is None:
            return incoming
        if current.msk != incoming.msk or current.params != incoming.params:
            raise ValueError("incompatible aggregate master key or parameters")
        overlap = current.signer_ids & incoming.signer_ids
        if overlap:
            raise ValueError(f"signer already provisioned: {sorted(overlap)[0].hex()}")
        return la.LaKeyMaterial(
            current.msk, current.params, current.signer_ids | incoming.signer_ids
        )

    def set_storage_policy(self, j1: int) -> None:
        """Rebuild the anchor tables for a new epoch factorization.

        The new j1 must divide the configured epoch count; commitments
        are unaffected (chain splitting), only the worst-case on-demand
        chain walk changes, to j2 - 1 = J/j1 - 1 hashes.
        """
        with self._lock:
            if self._pq is None:
                raise ValueError("no forward-secure material provisioned")
            old = self._pq.params
            if j1 < 1 or old.epochs % j1:
                raise ValueError(f"{j1} does not divide the epoch count {old.epochs}")
            params = pq.PqParams(t=old.t, k=old.k, l=old.l, j1=j1, j2=old.epochs // j1)
            anchors = {
                sid: pq.derive_anchors(self._pq.msk, sid, params)
                for sid in self._pq.anchors
            }
            self._pq = pq.PqKeyMaterial(self._pq.msk, params, anchors)

    # -- snapshots for readers -------------------------------------------

    def pq_material(self) -> pq.PqKeyMaterial:
        with self._lock:
            if self._pq is None:
                raise UnknownSigner("no forward-secure material provisioned")
            return self._pq

    def la_material(self) -> la.LaKeyMaterial:
        with self._lock:
            if self._la is None:
                raise UnknownSigner("no aggregate material provisioned")
            return self._la

    # -- commitment construction -----------------------------------------

    def pq_commitment(self, signer_id: bytes, epoch: int) -> pq.PqCommitment:
        return pq.construct_commitment(self.pq_material(), signer_id, epoch)

    def la_commitment(self, signer_id: bytes, epoch: int, batch_size: int | None = None) -> la.LaCommitment:
        return la.construct_commitment(self.la_material(), signer_id, epoch, batch_size)

    def hy_commitment(self, signer_id: bytes, epoch: int) -> hy.HyCommitment:
        return hy.HyCommitment(
            self.la_commitment(signer_id, epoch),
            self.pq_commitment(signer_id, epoch),
        )

    def batch_export(self, scheme: int, signer_id: bytes, epoch_from: int, epoch_to: int) -> list:
        """Commitments for every epoch in [epoch_from, epoch_to], in order."""
        if epoch_from < 1 or epoch_from > epoch_to:
            raise EpochOutOfRange(f"bad export range [{epoch_from}, {epoch_to}]")
        build = {
            MSG_PQ: self.pq_commitment,
            MSG_LA: self.la_commitment,
            MSG_HY: self.hy_commitment,
        }.get(scheme)
        if build is None:
            raise MalformedFrame(f"unknown export scheme {scheme:#04x}")
        return [build(signer_id, epoch) for epoch in range(epoch_from, epoch_to + 1)]

    # -- request dispatch --------------------------------------------------

    def handle_request(self, payload: bytes) -> bytes:
        """Map one request frame payload (type byte + body) to a response
        payload.  Never raises: protocol errors become status bytes."""
        if not payload:
            return bytes((RESPONSE_BIT, STATUS_MALFORMED))
        msg_type, body = payload[0], payload[1:]
        response_type = bytes(((msg_type | RESPONSE_BIT) & 0xFF,))
        expected = _REQUEST_BODY_LEN.get(msg_type)
        if expected is None or len(body) != expected:
            return response_type + bytes((STATUS_MALFORMED,))
        try:
            if msg_type == MSG_EXPORT:
                scheme = body[0]
                signer_id = body[1:17]
                epoch_from = int.from_bytes(body[17:25], "big")
                epoch_to = int.from_bytes(body[25:33], "big")
                blobs = [
                    self._serialize(commitment)
                    for commitment in self.batch_export(scheme, signer_id, epoch_from, epoch_to)
                ]
                return (
                    response_type
                    + bytes((STATUS_OK,))
                    + len(blobs).to_bytes(8, "big")
                    + b"".join(blobs)
                )
            signer_id = body[:16]
            epoch = int.from_bytes(body[16:24], "big")
            if msg_type == MSG_PQ:
                commitment = self.pq_commitment(signer_id, epoch)
            elif msg_type == MSG_LA:
                batch_size = int.from_bytes(body[24:28], "big")
                if batch_size < 1:
                    return response_type + bytes((STATUS_MALFORMED,))
                commitment = self.la_commitment(signer_id, epoch, batch_size)
            else:
                commitment = self.hy_commitment(signer_id, epoch)
            return response_type + bytes((STATUS_OK,)) + self._serialize(commitment)
        except UnknownSigner:
            return response_type + bytes((STATUS_UNKNOWN_ID,))
        except EpochOutOfRange:
            return response_type + bytes((STATUS_EPOCH_RANGE,))
        except (MalformedFrame, ValueError):
            return response_type + bytes((STATUS_MALFORMED,))

    def _serialize(self, commitment) -> bytes:
        if isinstance(commitment, pq.PqCommitment):
            return commitment.to_bytes()
        group = self.la_material().params.group
        return commitment.to_bytes(group)


# --- framing -----------------------------------------------------------------


def write_frame(stream: BinaryIO, payload: bytes) -> None:
    if len(payload) > MAX_FRAME:
        raise MalformedFrame("frame exceeds maximum size")
    stream.write(struct.pack(">I", len(payload)) + payload)
    stream.flush()


def read_frame(stream: BinaryIO) -> bytes | None:
    """Read one frame; None on clean EOF before a length prefix."""
    header = stream.read(4)
    if not header:
        return None
    if len(header) < 4:
        raise MalformedFrame("truncated frame length")
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME:
        raise MalformedFrame("frame exceeds maximum size")
    payload = b""
    while len(payload) < length:
        chunk = stream.read(length - len(payload))
        if not chunk:
            raise MalformedFrame("truncated frame body")
        payload += chunk
    return payload


# --- TCP server / client -------------------------------------------------


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        try:
            while True:
                try:
                    payload = read_frame(self.rfile)
                except MalformedFrame:
                    write_frame(self.wfile, bytes((RESPONSE_BIT, STATUS_MALFORMED)))
                    return
                if payload is None:
                    return
                write_frame(self.wfile, self.server.store.handle_request(payload))
        except OSError:
            return  # peer went away; nothing to clean up


class CcoServer(socketserver.ThreadingTCPServer):
    """Serves one store over TCP; use as a context manager in tests."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, store: CcoStore, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.store = store
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "CcoServer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


class CcoClient:
    """Blocking client for the commitment service."""

    def __init__(self, host: str, port: int, timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._stream = self._sock.makefile("rwb")

    def close(self) -> None:
        self._stream.close()
        self._sock.close()

    def __enter__(self) -> "CcoClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def request_raw(self, payload: bytes) -> bytes:
        write_frame(self._stream, payload)
        response = read_frame(self._stream)
        if response is None:
            raise MalformedFrame("connection closed mid-request")
        return response

    def _request_ok(self, msg_type: int, body: bytes) -> bytes:
        response = self.request_raw(bytes((msg_type,)) + body)
        if len(response) < 2 or response[0] != (msg_type | RESPONSE_BIT):
            raise MalformedFrame("unexpected response type")
        if response[1] != STATUS_OK:
            raise CcoRequestError(response[1])
        return response[2:]

    def pq_commitment(self, signer_id: bytes, epoch: int) -> pq.PqCommitment:
        body = signer_id + epoch.to_bytes(8, "big")
        return pq.PqCommitment.from_bytes(self._request_ok(MSG_PQ, body))

    def la_commitment(self, signer_id: bytes, epoch: int, batch_size: int, group) -> la.LaCommitment:
        body = signer_id + epoch.to_bytes(8, "big") + batch_size.to_bytes(4, "big")
        return la.LaCommitment.from_bytes(self._request_ok(MSG_LA, body), group)

    def hy_commitment(self, signer_id: bytes, epoch: int, group) -> hy.HyCommitment:
        body = signer_id + epoch.to_bytes(8, "big")
        return hy.HyCommitment.from_bytes(self._request_ok(MSG_HY, body), group)

    def batch_export(self, scheme: int, signer_id: bytes, epoch_from: int, epoch_to: int) -> list[bytes]:
        body = (
            bytes((scheme,))
            + signer_id
            + epoch_from.to_bytes(8, "big")
            + epoch_to.to_bytes(8, "big")
        )
        blob = self._request_ok(MSG_EXPORT, body)
        if len(blob) < 8:
            raise MalformedFrame("short export response")
        count = int.from_bytes(blob[:8], "big")
        body = blob[8:]
        if count == 0 or not body or len(body) % count:
            raise MalformedFrame("export payload does not divide evenly")
        size = len(body) // count
        return [body[i : i + size] for i in range(0, len(body), size)]
