"""Command-line interface.

Exit codes: 0 success / all signatures valid, 1 cryptographic
rejection, 2 operational error (bad arguments, I/O, framing).  The
``HASES_BACKEND`` environment variable (``production`` or ``tiny``)
selects the group backend at key generation; every file records the
backend it was created with.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from . import bench, cco, hy, keyfiles, la, pq, stream
from .errors import CcoRequestError, HasesError
from .group import production_group, small_test_group

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_ERROR = 2

_HEX_ID = re.compile(r"^[0-9a-fA-F]{32}$")


def parse_signer_id(text: str) -> bytes:
    """16-byte id: 32 hex chars, or short text padded with NUL bytes."""
    text = text.strip()
    if _HEX_ID.match(text):
        return bytes.fromhex(text)
    raw = text.encode("utf-8")
    if not raw or len(raw) > 16:
        raise ValueError(f"id {text!r} must be 32 hex chars or at most 16 bytes of text")
    return raw.ljust(16, b"\x00")


def read_ids_file(path: str) -> list[bytes]:
    ids = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            ids.append(parse_signer_id(line))
    if not ids:
        raise ValueError(f"no ids found in {path}")
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate ids in input file")
    return ids


def backend_group():
    name = os.environ.get("HASES_BACKEND", "production")
    if name == "production":
        return production_group()
    if name == "tiny":
        return small_test_group()
    raise ValueError(f"HASES_BACKEND must be 'production' or 'tiny', not {name!r}")


def _pq_params_from_args(args) -> pq.PqParams:
    j1 = args.J1 or 1
    if args.J % j1:
        raise ValueError(f"--J1 {j1} does not divide --J {args.J}")
    return pq.PqParams(t=args.t, k=args.k, j1=j1, j2=args.J // j1)


# --- keygen -----------------------------------------------------------------


def cmd_keygen(args) -> int:
    ids = read_ids_file(args.ids)
    out = Path(args.out)
    files: dict[Path, bytes] = {}
    store = cco.CcoStore()

    if args.scheme == "pq":
        states, material = pq.keygen(ids, _pq_params_from_args(args))
        store.provision(material)
        bundle = keyfiles.VerifierBundle(
            keyfiles.SCHEME_PQ, material.params, None, {sid: None for sid in ids}
        )
    elif args.scheme == "la":
        if not args.L:
            raise ValueError("--L is required for the aggregate scheme")
        group = backend_group()
        states, public, material = la.keygen(ids, group, args.J, args.L)
        store.provision(material)
        bundle = keyfiles.VerifierBundle(keyfiles.SCHEME_LA, None, material.params, public)
    else:
        if not args.L:
            raise ValueError("--L is required for the hybrid scheme")
        group = backend_group()
        pq_params = _pq_params_from_args(args)
        states, public, material = hy.keygen(ids, group, args.L, pq_params)
        store.provision(material)
        bundle = keyfiles.VerifierBundle(
            keyfiles.SCHEME_HY, pq_params, material.la.params, public
        )

    for sid, state in states.items():
        files[out / f"signer_{sid.hex()}.key"] = keyfiles.signer_key_bytes(state)
    files[out / "cco.store"] = keyfiles.store_bytes(store)
    files[out / "verifier.pub"] = bundle.to_bytes()

    # everything validated; only now touch the filesystem
    out.mkdir(parents=True, exist_ok=True)
    for path, blob in files.items():
        path.write_bytes(blob)
    print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


# --- sign ------------------------------------------------------------------


def cmd_sign(args) -> int:
    state = keyfiles.load_signer_key(args.key)
    records = stream.read_stream(args.input, args.format, args.hex)
    blobs: list[bytes] = []
    if isinstance(state, pq.PqSignerState):
        for record in records:
            blobs.append(pq.sign(state, record.payload).to_bytes())
    elif isinstance(state, la.LaSignerState):
        for batch in stream.into_batches(records, state.params.batch_size):
            blobs.append(la.sign_batch(state, batch).to_bytes())
    else:
        for batch in stream.into_batches(records, state.la.params.batch_size):
            blobs.append(hy.sign_batch(state, batch).to_bytes())
    # persist the evolved key before the signatures: a failure in between
    # loses tags, never reuses a burned epoch
    keyfiles.save_signer_key(args.key, state)
    keyfiles.save_signatures(args.out, blobs)
    print(f"signed {len(records)} records into {len(blobs)} signatures")
    return EXIT_OK


# --- verify -----------------------------------------------------------------


def _parse_host_port(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"expected HOST:PORT, got {text!r}")
    return host, int(port)


class _CommitmentSource:
    """On-demand service connection or a preloaded offline export."""

    def __init__(self, args, bundle: keyfiles.VerifierBundle):
        self.bundle = bundle
        self.client = None
        self.offline: dict[tuple[bytes, int], bytes] = {}
        if args.cco:
            host, port = _parse_host_port(args.cco)
            self.client = cco.CcoClient(host, port)
        elif args.commits:
            for blob in keyfiles.load_commitments(args.commits):
                if len(blob) >= 25:
                    key = (blob[1:17], int.from_bytes(blob[17:25], "big"))
                    self.offline[key] = blob
        else:
            raise ValueError("either --cco or --commits is required")

    def close(self):
        if self.client:
            self.client.close()

    def commitment_blob(self, scheme: int, signer_id: bytes, epoch: int) -> bytes | None:
        if self.client is None:
            return self.offline.get((signer_id, epoch))
        group = self.bundle.la_params.group if self.bundle.la_params else None
        if scheme == keyfiles.SCHEME_PQ:
            return self.client.pq_commitment(signer_id, epoch).to_bytes()
        if scheme == keyfiles.SCHEME_LA:
            size = self.bundle.la_params.batch_size
            return self.client.la_commitment(signer_id, epoch, size, group).to_bytes(group)
        return self.client.hy_commitment(signer_id, epoch, group).to_bytes(group)


def cmd_verify(args) -> int:
    bundle = keyfiles.load_verifier_bundle(args.pub)
    records = stream.read_stream(args.input, args.format, args.hex)
    try:
        blobs = keyfiles.load_signatures(args.sigs)
    except ValueError as exc:
        # a mangled signature container is a cryptographic reject, not an
        # operational failure: the data offered for verification is bad
        print(f"invalid signature file: {exc}", file=sys.stderr)
        return EXIT_REJECT
    source = _CommitmentSource(args, bundle)
    try:
        results = _verify_all(bundle, records, blobs, source)
    finally:
        source.close()
    good = sum(results)
    print(f"{good}/{len(results)} signatures valid")
    return EXIT_OK if results and all(results) else EXIT_REJECT


def _verify_all(bundle, records, blobs, source) -> list[bool]:
    scheme = bundle.scheme
    if scheme == keyfiles.SCHEME_PQ:
        messages = [r.payload for r in records]
    else:
        messages = stream.into_batches(records, bundle.la_params.batch_size)
    if len(messages) != len(blobs):
        raise ValueError(f"{len(blobs)} signatures for {len(messages)} signing units")

    results = []
    for message, blob in zip(messages, blobs):
        results.append(_verify_one(bundle, scheme, message, blob, source))
    return results


def _verify_one(bundle, scheme, message, blob, source) -> bool:
    # malformed signature bytes and unservable epochs/ids are cryptographic
    # rejects; only transport and file-level failures escape as errors
    try:
        if scheme == keyfiles.SCHEME_PQ:
            signature = pq.PqSignature.from_bytes(blob)
        elif scheme == keyfiles.SCHEME_LA:
            signature = la.LaSignature.from_bytes(blob, bundle.la_params.group)
        else:
            signature = hy.HySignature.from_bytes(blob, bundle.la_params.group)
        signer_id = signature.signer_id if scheme != keyfiles.SCHEME_HY else signature.la.signer_id
        epoch = signature.epoch if scheme != keyfiles.SCHEME_HY else signature.la.epoch
        if signer_id not in bundle.public_keys:
            return False
        commit_blob = source.commitment_blob(scheme, signer_id, epoch)
        if commit_blob is None:
            return False
        if scheme == keyfiles.SCHEME_PQ:
            commitment = pq.PqCommitment.from_bytes(commit_blob)
            return pq.verify(commitment, message, signature, bundle.pq_params)
        group = bundle.la_params.group
        if scheme == keyfiles.SCHEME_LA:
            commitment = la.LaCommitment.from_bytes(commit_blob, group)
            return la.verify_batch(
                bundle.public_keys[signer_id], commitment, message, signature, group
            )
        commitment = hy.HyCommitment.from_bytes(commit_blob, group)
        return hy.verify_batch(
            bundle.public_keys[signer_id],
            commitment,
            message,
            signature,
            group,
            bundle.pq_params,
        )
    except (ValueError, CcoRequestError):
        return False


# --- serve / request ----------------------------------------------------------


def cmd_serve(args) -> int:
    store = keyfiles.load_store(args.store)
    if args.policy_j1:
        store.set_storage_policy(args.policy_j1)
    server = cco.CcoServer(store, args.host, args.port)
    print(f"listening on {args.host}:{server.port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def cmd_request(args) -> int:
    host, port = _parse_host_port(args.cco)
    scheme = keyfiles.SCHEME_TAGS[args.scheme]
    signer_id = parse_signer_id(args.id)
    with cco.CcoClient(host, port) as client:
        if args.export:
            lo, _, hi = args.export.partition(":")
            blobs = client.batch_export(scheme, signer_id, int(lo), int(hi))
            keyfiles.save_commitments(args.out, blobs)
            print(f"exported {len(blobs)} commitments to {args.out}")
            return EXIT_OK
        if args.epoch is None:
            raise ValueError("--epoch or --export is required")
        body = signer_id + args.epoch.to_bytes(8, "big")
        if scheme == keyfiles.SCHEME_LA:
            if not args.L:
                raise ValueError("--L is required for aggregate requests")
            body += args.L.to_bytes(4, "big")
        response = client.request_raw(bytes((scheme,)) + body)
        if len(response) < 2 or response[1] != cco.STATUS_OK:
            status = response[1] if len(response) > 1 else -1
            raise HasesError(f"service returned status {status:#04x}")
        blob = response[2:]
        if args.out:
            keyfiles.save_commitments(args.out, [blob])
            print(f"wrote commitment ({len(blob)} bytes) to {args.out}")
        else:
            print(blob.hex())
    return EXIT_OK


# --- bench ---------------------------------------------------------------------


def cmd_bench(args) -> int:
    if args.scheme == "pq":
        params = pq.PqParams(t=args.t, k=args.k, j1=args.J1 or 1, j2=args.J2 or 64)
        report = bench.bench_pq(params, args.trials)
    elif args.scheme == "la":
        report = bench.bench_la(
            backend_group(), max_batches=max(args.trials, 64), batch_size=args.L or 8,
            trials=args.trials,
        )
    else:
        params = pq.PqParams(t=args.t, k=args.k, j1=args.J1 or 1, j2=args.J2 or 64)
        report = bench.bench_hy(params, backend_group(), args.L or 8, args.trials)
    print(report.table())
    print()
    for line in report.machine_lines():
        print(line)
    return EXIT_OK


# --- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hases",
        description="forward-secure, aggregate, and hybrid signing with an "
        "oracle-served commitment service",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    kg = sub.add_parser("keygen", help="run a key ceremony")
    kg.add_argument("--scheme", choices=("pq", "la", "hy"), required=True)
    kg.add_argument("--ids", required=True, help="file with one signer id per line")
    kg.add_argument("--J", type=int, required=True, help="total signing epochs/batches")
    kg.add_argument("--J1", type=int, default=0, help="precomputed anchor segments (pq/hy)")
    kg.add_argument("--L", type=int, default=0, help="batch size (la/hy)")
    kg.add_argument("--t", type=int, default=1024)
    kg.add_argument("--k", type=int, default=16)
    kg.add_argument("--out", required=True, help="output directory")
    kg.set_defaults(func=cmd_keygen)

    sg = sub.add_parser("sign", help="sign a message stream")
    sg.add_argument("--key", required=True, help="signer key file (rewritten after use)")
    sg.add_argument("--in", dest="input", required=True)
    sg.add_argument("--format", choices=("csv", "bin"), default="csv")
    sg.add_argument("--hex", action="store_true", help="CSV payloads are hex-encoded")
    sg.add_argument("--out", required=True, help="signature file")
    sg.set_defaults(func=cmd_sign)

    vf = sub.add_parser("verify", help="verify a signed message stream")
    vf.add_argument("--pub", required=True, help="verifier bundle from keygen")
    vf.add_argument("--in", dest="input", required=True)
    vf.add_argument("--format", choices=("csv", "bin"), default="csv")
    vf.add_argument("--hex", action="store_true")
    vf.add_argument("--sigs", required=True)
    vf.add_argument("--cco", help="HOST:PORT of a live commitment service")
    vf.add_argument("--commits", help="offline commitment export file")
    vf.set_defaults(func=cmd_verify)

    sv = sub.add_parser("serve", help="serve a provisioned key store")
    sv.add_argument("--store", required=True)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=0)
    sv.add_argument("--policy-j1", type=int, default=0, help="rebuild anchors for this j1")
    sv.set_defaults(func=cmd_serve)

    rq = sub.add_parser("request", help="fetch commitments from a service")
    rq.add_argument("--cco", required=True, help="HOST:PORT")
    rq.add_argument("--scheme", choices=("pq", "la", "hy"), required=True)
    rq.add_argument("--id", required=True)
    rq.add_argument("--epoch", type=int)
    rq.add_argument("--L", type=int, default=0)
    rq.add_argument("--export", help="epoch range FROM:TO for offline export")
    rq.add_argument("--out", help="write commitment(s) to this file")
    rq.set_defaults(func=cmd_request)

    bn = sub.add_parser("bench", help="measure signer costs and sizes")
    bn.add_argument("--scheme", choices=("pq", "la", "hy"), required=True)
    bn.add_argument("--trials", type=int, default=32)
    bn.add_argument("--t", type=int, default=1024)
    bn.add_argument("--k", type=int, default=16)
    bn.add_argument("--J1", type=int, default=0)
    bn.add_argument("--J2", type=int, default=0)
    bn.add_argument("--L", type=int, default=0)
    bn.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HasesError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
