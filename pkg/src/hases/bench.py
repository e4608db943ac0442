"""Signer-cost and size measurements.

Hash-call figures come straight from the instrumented counters in
``hashing`` and are exact; wall-clock numbers are mean microseconds
over the requested trial count and carry the usual noise.  Reports
render both as an aligned human table and as line-oriented ``key=value``
pairs so harnesses can diff them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import hy, la, pq
from .group import PrimeOrderGroup, production_group
from .hashing import counters


@dataclass
class OpStats:
    name: str
    hash_calls: int
    wall_us: float


@dataclass
class BenchReport:
    scheme: str
    params: dict[str, object] = field(default_factory=dict)
    ops: list[OpStats] = field(default_factory=list)
    sizes: dict[str, int] = field(default_factory=dict)

    def machine_lines(self) -> list[str]:
        lines = [f"scheme={self.scheme}"]
        lines += [f"{key}={value}" for key, value in self.params.items()]
        for op in self.ops:
            lines.append(f"{self.scheme}.{op.name}.hash_calls={op.hash_calls}")
            lines.append(f"{self.scheme}.{op.name}.wall_us={op.wall_us:.2f}")
        lines += [f"{self.scheme}.{key}={value}" for key, value in self.sizes.items()]
        return lines

    def table(self) -> str:
        rows = [f"scheme: {self.scheme}"]
        rows += [f"  {key} = {value}" for key, value in self.params.items()]
        rows.append(f"  {'operation':<24} {'hash calls':>10} {'wall (us)':>12}")
        for op in self.ops:
            rows.append(f"  {op.name:<24} {op.hash_calls:>10} {op.wall_us:>12.2f}")
        for key, value in self.sizes.items():
            rows.append(f"  {key:<24} {value:>10} bytes")
        return "\n".join(rows)


def _measure(fn, trials: int) -> tuple[int, float, object]:
    """Run ``fn(trial_index)`` ``trials`` times; exact hash count of the
    last run, mean wall time, and the last return value."""
    result = None
    start = time.perf_counter()
    for index in range(trials - 1):
        fn(index)
    counters.reset()
    result = fn(trials - 1)
    calls = counters.total()
    elapsed = time.perf_counter() - start
    return calls, elapsed / trials * 1e6, result


_BENCH_ID = bytes(range(16))


def bench_pq(params: pq.PqParams, trials: int = 32) -> BenchReport:
    if trials > params.epochs:
        raise ValueError("trial count exceeds the configured epoch count")
    report = BenchReport(
        "pq",
        params={
            "t": params.t,
            "k": params.k,
            "policy.j1": params.j1,
            "policy.j2": params.j2,
            "policy.anchor_bytes_per_signer": (params.j1 - 1) * 32,
            "trials": trials,
        },
    )
    states = materials = None

    def do_keygen(_):
        nonlocal states, materials
        states, materials = pq.keygen([_BENCH_ID], params)
        return states

    calls, wall, _ = _measure(do_keygen, max(1, trials // 8))
    report.ops.append(OpStats("keygen_per_signer", calls, wall))

    state = states[_BENCH_ID]
    messages = [b"bench message %08d" % i for i in range(trials)]
    calls, wall, signature = _measure(lambda i: pq.sign(state, messages[i]), trials)
    report.ops.append(OpStats("sign", calls, wall))

    # worst-case chain walk within a segment: last epoch of segment one
    worst_epoch = min(params.j2, params.epochs)
    calls, wall, commitment = _measure(
        lambda _: pq.construct_commitment(materials, _BENCH_ID, worst_epoch), trials
    )
    report.ops.append(OpStats("commitment_worst_case", calls, wall))

    last = pq.construct_commitment(materials, _BENCH_ID, signature.epoch)
    calls, wall, ok = _measure(
        lambda _: pq.verify(last, messages[-1], signature, params), trials
    )
    assert ok
    report.ops.append(OpStats("verify", calls, wall))

    report.sizes["signature.payload_bytes"] = params.k * 32
    report.sizes["signature.total_bytes"] = len(signature.to_bytes())
    report.sizes["commitment.total_bytes"] = len(commitment.to_bytes())
    return report


def bench_la(
    group: PrimeOrderGroup | None = None,
    max_batches: int = 1024,
    batch_size: int = 8,
    trials: int = 32,
) -> BenchReport:
    group = group or production_group()
    if trials > max_batches:
        raise ValueError("trial count exceeds the configured batch count")
    report = BenchReport(
        "la",
        params={"L": batch_size, "J": max_batches, "trials": trials},
    )
    states = public = material = None

    def do_keygen(_):
        nonlocal states, public, material
        states, public, material = la.keygen([_BENCH_ID], group, max_batches, batch_size)

    calls, wall, _ = _measure(do_keygen, max(1, trials // 8))
    report.ops.append(OpStats("keygen_per_signer", calls, wall))

    state = states[_BENCH_ID]
    batch = [b"bench item %08d" % i for i in range(batch_size)]
    calls, wall, signature = _measure(lambda _: la.sign_batch(state, batch), trials)
    report.ops.append(OpStats("sign_batch", calls, wall))

    epoch = signature.epoch
    calls, wall, commitment = _measure(
        lambda _: la.construct_commitment(material, _BENCH_ID, epoch), trials
    )
    report.ops.append(OpStats("commitment", calls, wall))

    calls, wall, ok = _measure(
        lambda _: la.verify_batch(public[_BENCH_ID], commitment, batch, signature, group),
        trials,
    )
    assert ok
    report.ops.append(OpStats("verify_batch", calls, wall))

    report.sizes["signature.payload_bytes"] = 64
    report.sizes["signature.total_bytes"] = len(signature.to_bytes())
    report.sizes["commitment.total_bytes"] = len(commitment.to_bytes(group))
    return report


def bench_hy(
    pq_params: pq.PqParams,
    group: PrimeOrderGroup | None = None,
    batch_size: int = 8,
    trials: int = 32,
) -> BenchReport:
    group = group or production_group()
    if trials > pq_params.epochs:
        raise ValueError("trial count exceeds the configured epoch count")
    report = BenchReport(
        "hy",
        params={
            "L": batch_size,
            "J": pq_params.epochs,
            "t": pq_params.t,
            "k": pq_params.k,
            "policy.j1": pq_params.j1,
            "trials": trials,
        },
    )
    states, public, material = hy.keygen([_BENCH_ID], group, batch_size, pq_params)
    state = states[_BENCH_ID]
    batch = [b"bench item %08d" % i for i in range(batch_size)]

    calls, wall, signature = _measure(lambda _: hy.sign_batch(state, batch), trials)
    report.ops.append(OpStats("sign_batch", calls, wall))

    epoch = signature.la.epoch
    commitment = hy.HyCommitment(
        la.construct_commitment(material.la, _BENCH_ID, epoch),
        pq.construct_commitment(material.pq, _BENCH_ID, epoch),
    )
    calls, wall, ok = _measure(
        lambda _: hy.verify_batch(
            public[_BENCH_ID], commitment, batch, signature, group, pq_params
        ),
        trials,
    )
    assert ok
    report.ops.append(OpStats("verify_batch", calls, wall))

    report.sizes["signature.payload_bytes"] = 64 + pq_params.k * 32
    report.sizes["signature.total_bytes"] = len(signature.to_bytes())
    report.sizes["commitment.total_bytes"] = len(commitment.to_bytes(group))
    return report
