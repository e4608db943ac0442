import random
import threading

import pytest

from hases import cco, hy, keyfiles, la, pq
from hases.errors import CcoRequestError, MalformedFrame
from hases.group import production_group, small_test_group
from hases.hashing import counters

ID_A = bytes([0xA1]) * 16
ID_B = bytes([0xB2]) * 16
ID_C = bytes([0xC3]) * 16
PQ_TOY = pq.PqParams(t=8, k=4, j1=4, j2=4)


def fixed_rng(seed: int):
    rng = random.Random(seed)
    return lambda n: rng.randbytes(n)


def provisioned_store(seed=1):
    group = small_test_group()
    states, public, material = hy.keygen([ID_A, ID_B], group, 3, PQ_TOY, fixed_rng(seed))
    store = cco.CcoStore()
    store.provision(material)
    return store, states, public, material, group


class TestProvisioning:
    def test_two_signers_both_served(self):
        store, *_ = provisioned_store()
        for sid in (ID_A, ID_B):
            assert len(store.pq_commitment(sid, 1).entries) == PQ_TOY.t
            assert store.la_commitment(sid, 1).batch_size == 3

    def test_unknown_id(self):
        store, *_ = provisioned_store()
        from hases.errors import UnknownSigner

        with pytest.raises(UnknownSigner):
            store.pq_commitment(ID_C, 1)

    def test_reprovision_same_id_rejected(self):
        store, _, _, material, _ = provisioned_store()
        with pytest.raises(ValueError):
            store.provision(material.pq)
        with pytest.raises(ValueError):
            store.provision(material.la)

    def test_incompatible_master_key_rejected(self):
        store, *_ = provisioned_store(seed=1)
        _, foreign = pq.keygen([ID_C], PQ_TOY, fixed_rng(99))
        with pytest.raises(ValueError):
            store.provision(foreign)

    def test_compatible_extension_accepted(self):
        _, material = pq.keygen([ID_A], PQ_TOY, fixed_rng(5))
        store = cco.CcoStore()
        store.provision(material)
        extension = pq.PqKeyMaterial(
            material.msk,
            material.params,
            {ID_C: pq.derive_anchors(material.msk, ID_C, material.params)},
        )
        store.provision(extension)
        assert store.pq_commitment(ID_C, 1)


class TestStoragePolicy:
    def test_policy_invariance_and_chain_bound(self):
        states, material = pq.keygen([ID_A], pq.PqParams(t=8, k=4, j1=1, j2=16), fixed_rng(6))
        store = cco.CcoStore()
        store.provision(material)
        baseline = [store.pq_commitment(ID_A, j).to_bytes() for j in range(1, 17)]
        for j1 in (1, 2, 4, 8, 16):
            store.set_storage_policy(j1)
            j2 = 16 // j1
            for epoch in range(1, 17):
                counters.reset()
                blob = store.pq_commitment(ID_A, epoch).to_bytes()
                chain_steps = counters.calls_h1 - 8
                assert blob == baseline[epoch - 1]
                assert chain_steps <= j2 - 1

    def test_anchor_count_follows_policy(self):
        _, material = pq.keygen([ID_A], pq.PqParams(t=8, k=4, j1=1, j2=16), fixed_rng(7))
        store = cco.CcoStore()
        store.provision(material)
        for j1 in (1, 4, 16):
            store.set_storage_policy(j1)
            anchors = store.pq_material().anchors[ID_A]
            assert len(anchors) == j1 - 1

    def test_non_divisor_rejected(self):
        store, *_ = provisioned_store()
        with pytest.raises(ValueError):
            store.set_storage_policy(5)  # 16 % 5 != 0


class TestRequestHandling:
    def setup_method(self):
        self.store, self.states, self.public, self.material, self.group = provisioned_store()

    def request(self, msg_type, body):
        return self.store.handle_request(bytes((msg_type,)) + body)

    def test_pq_request_ok(self):
        response = self.request(cco.MSG_PQ, ID_A + (1).to_bytes(8, "big"))
        assert response[0] == 0x81 and response[1] == cco.STATUS_OK
        commitment = pq.PqCommitment.from_bytes(response[2:])
        assert len(commitment.entries) == PQ_TOY.t

    def test_la_request_ok(self):
        response = self.request(cco.MSG_LA, ID_A + (2).to_bytes(8, "big") + (3).to_bytes(4, "big"))
        assert response[:2] == bytes((0x82, cco.STATUS_OK))
        commitment = la.LaCommitment.from_bytes(response[2:], self.group)
        assert commitment.epoch == 2

    def test_hy_request_ok(self):
        response = self.request(cco.MSG_HY, ID_A + (1).to_bytes(8, "big"))
        assert response[:2] == bytes((0x83, cco.STATUS_OK))
        hy.HyCommitment.from_bytes(response[2:], self.group)

    def test_unknown_id_status(self):
        response = self.request(cco.MSG_PQ, ID_C + (1).to_bytes(8, "big"))
        assert response == bytes((0x81, cco.STATUS_UNKNOWN_ID))

    def test_epoch_range_status(self):
        for bad_epoch in (0, PQ_TOY.epochs + 1):
            response = self.request(cco.MSG_PQ, ID_A + bad_epoch.to_bytes(8, "big"))
            assert response == bytes((0x81, cco.STATUS_EPOCH_RANGE))

    def test_malformed_lengths(self):
        assert self.request(cco.MSG_PQ, b"short")[1] == cco.STATUS_MALFORMED
        assert self.request(cco.MSG_LA, ID_A + (1).to_bytes(8, "big"))[1] == cco.STATUS_MALFORMED
        assert self.store.handle_request(b"")[1] == cco.STATUS_MALFORMED

    def test_unknown_type(self):
        response = self.store.handle_request(bytes((0x6E,)) + bytes(24))
        assert response == bytes((0xEE, cco.STATUS_MALFORMED))

    def test_export_matches_single_requests(self):
        body = bytes((cco.MSG_PQ,)) + ID_A + (1).to_bytes(8, "big") + (4).to_bytes(8, "big")
        response = self.request(cco.MSG_EXPORT, body)
        assert response[:2] == bytes((0x84, cco.STATUS_OK))
        count = int.from_bytes(response[2:10], "big")
        assert count == 4
        blob = response[10:]
        size = len(blob) // count
        for offset, epoch in zip(range(0, len(blob), size), range(1, 5)):
            single = self.store.pq_commitment(ID_A, epoch).to_bytes()
            assert blob[offset : offset + size] == single

    def test_export_range_validation(self):
        for lo, hi in ((0, 4), (3, 2), (1, PQ_TOY.epochs + 1)):
            body = bytes((cco.MSG_PQ,)) + ID_A + lo.to_bytes(8, "big") + hi.to_bytes(8, "big")
            assert self.request(cco.MSG_EXPORT, body)[1] == cco.STATUS_EPOCH_RANGE

    def test_no_secret_bytes_in_any_response(self):
        # production group: tiny-backend encodings are zero-padded, so a
        # small private scalar would collide with unrelated public bytes
        group = production_group()
        _, _, material = hy.keygen([ID_A, ID_B], group, 3, PQ_TOY, fixed_rng(77))
        store = cco.CcoStore()
        store.provision(material)
        secrets_to_scan = [material.pq.msk, material.la.msk]
        secrets_to_scan += [a for sid in (ID_A, ID_B) for a in material.pq.anchors[sid]]
        secrets_to_scan += [pq.initial_seed(material.pq.msk, sid) for sid in (ID_A, ID_B)]
        secrets_to_scan += [
            la.private_scalar(material.la.msk, sid, group).to_bytes(32, "big")
            for sid in (ID_A, ID_B)
        ]
        frames = []
        for epoch in range(1, PQ_TOY.epochs + 1):
            frames.append(store.handle_request(bytes((cco.MSG_PQ,)) + ID_A + epoch.to_bytes(8, "big")))
            frames.append(store.handle_request(bytes((cco.MSG_HY,)) + ID_A + epoch.to_bytes(8, "big")))
        body = bytes((cco.MSG_PQ,)) + ID_A + (1).to_bytes(8, "big") + (16).to_bytes(8, "big")
        frames.append(store.handle_request(bytes((cco.MSG_EXPORT,)) + body))
        for frame in frames:
            assert len(frame) > 2
            for secret in secrets_to_scan:
                assert secret not in frame

    def test_concurrent_reads(self):
        failures = []

        def worker(epoch):
            try:
                for _ in range(20):
                    assert self.store.pq_commitment(ID_A, epoch).epoch == epoch
            except Exception as exc:  # pragma: no cover
                failures.append(exc)

        threads = [threading.Thread(target=worker, args=(e,)) for e in (1, 5, 9, 13)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not failures


class TestWireProtocol:
    def test_round_trip_over_tcp(self):
        store, states, public, material, group = provisioned_store(seed=8)
        batch = [b"a", b"b", b"c"]
        signature = hy.sign_batch(states[ID_A], batch)
        with cco.CcoServer(store) as server:
            with cco.CcoClient("127.0.0.1", server.port) as client:
                commitment = client.hy_commitment(ID_A, 1, group)
                assert hy.verify_batch(
                    public[ID_A], commitment, batch, signature, group, PQ_TOY
                )

    def test_error_statuses_over_tcp(self):
        store, *_ = provisioned_store(seed=9)
        with cco.CcoServer(store) as server:
            with cco.CcoClient("127.0.0.1", server.port) as client:
                with pytest.raises(CcoRequestError) as info:
                    client.pq_commitment(ID_C, 1)
                assert info.value.status == cco.STATUS_UNKNOWN_ID
                with pytest.raises(CcoRequestError) as info:
                    client.pq_commitment(ID_A, 99)
                assert info.value.status == cco.STATUS_EPOCH_RANGE

    def test_batch_export_over_tcp(self):
        store, *_ = provisioned_store(seed=10)
        with cco.CcoServer(store) as server:
            with cco.CcoClient("127.0.0.1", server.port) as client:
                blobs = client.batch_export(cco.MSG_PQ, ID_A, 2, 5)
                assert len(blobs) == 4
                for blob, epoch in zip(blobs, range(2, 6)):
                    assert pq.PqCommitment.from_bytes(blob).epoch == epoch

    def test_multiple_requests_per_connection(self):
        store, *_ = provisioned_store(seed=11)
        with cco.CcoServer(store) as server:
            with cco.CcoClient("127.0.0.1", server.port) as client:
                first = client.pq_commitment(ID_A, 1)
                second = client.pq_commitment(ID_A, 2)
                assert first.epoch == 1 and second.epoch == 2

    def test_malformed_frame_answered(self):
        store, *_ = provisioned_store(seed=12)
        with cco.CcoServer(store) as server:
            with cco.CcoClient("127.0.0.1", server.port) as client:
                response = client.request_raw(bytes((cco.MSG_PQ,)) + b"nonsense")
                assert response == bytes((0x81, cco.STATUS_MALFORMED))

    def test_oversized_frame_rejected_client_side(self):
        store, *_ = provisioned_store(seed=13)
        with cco.CcoServer(store) as server:
            with cco.CcoClient("127.0.0.1", server.port) as client:
                with pytest.raises(MalformedFrame):
                    cco.write_frame(client._stream, bytes(cco.MAX_FRAME + 1))


class TestStorePersistence:
    def test_store_file_round_trip(self):
        store, states, public, material, group = provisioned_store(seed=14)
        restored = keyfiles.store_from_bytes(keyfiles.store_bytes(store))
        for epoch in (1, 7, 16):
            assert (
                restored.pq_commitment(ID_A, epoch).to_bytes()
                == store.pq_commitment(ID_A, epoch).to_bytes()
            )
        assert (
            restored.la_commitment(ID_B, 2).to_bytes(group)
            == store.la_commitment(ID_B, 2).to_bytes(group)
        )

    def test_partial_store_round_trip(self):
        _, material = pq.keygen([ID_A], PQ_TOY, fixed_rng(15))
        store = cco.CcoStore()
        store.provision(material)
        restored = keyfiles.store_from_bytes(keyfiles.store_bytes(store))
        assert restored.pq_commitment(ID_A, 3).to_bytes() == store.pq_commitment(ID_A, 3).to_bytes()

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            keyfiles.store_from_bytes(b"not a store")
