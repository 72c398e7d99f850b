"""Simulated lookahead parallelism: shard one step's layout across devices.

Window columns are split into contiguous ranges (one per logical device)
and candidate branches are round-robined.  Each device additionally holds
redundant copies of query 0 and the oldest-level cells left of its range,
which closes every shard under visibility: no data crosses devices during
the forward pass.  After all shards finish, a single synchronization
gathers the generated tokens and candidate distributions, and the step
concludes exactly as on one device -- the merged outcome is bit-identical
to the single-device step because the model forward is pure and each
query's conditioning chain is the same in any shard that contains it.

Communication is accounted in tokens under an all-gather model: each
device contributes one generated token per owned column plus N values per
owned candidate, sent to the D-1 peers.  No real transport is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Sequence

import numpy as np

from .decoding import DecodeState, StepOutcome, finish_step, prepare_step, start_session
from .layout import QueryToken, StepLayout
from .models import ModelInterface
from .pool import NGramPool
from .types import GenerationConfig, LayoutError, SamplerSpec


@dataclass
class DevicePlan:
    """Work assigned to one logical device for one step.

    ``owned_queries`` are the layout indices whose outputs this device is
    responsible for; ``redundant_queries`` are extra context queries
    evaluated locally only to satisfy visibility.
    """

    device: int
    columns: range
    candidates: list[int]
    owned_queries: list[int]
    redundant_queries: list[int]

    @property
    def query_indices(self) -> list[int]:
        return sorted(set(self.owned_queries) | set(self.redundant_queries))


@dataclass
class CommStats:
    """Per-step (or aggregated) synchronization accounting."""

    tokens_synchronized: int = 0
    sync_events: int = 0

    def add(self, other: "CommStats") -> None:
        self.tokens_synchronized += other.tokens_synchronized
        self.sync_events += other.sync_events


def partition_layout(
    layout: StepLayout,
    window: int,
    ngram: int,
    devices: int,
) -> list[DevicePlan]:
    """Split a built step layout into visibility-closed device shards."""
    if not 1 <= devices <= window:
        raise ValueError(f"device count must lie in [1, {window}], got {devices}")

    base, extra = divmod(window, devices)
    plans: list[DevicePlan] = []
    start = 1
    for d in range(devices):
        size = base + (1 if d < extra else 0)
        cols = range(start, start + size)
        start += size

        owned = [
            layout.window_cells[(level, col)]
            for level in range(ngram - 1)
            for col in cols
            if (level, col) in layout.window_cells
        ]
        # Closure: query 0 plus the oldest-level prefix left of this range.
        # Device 0 owns query 0; the other devices carry duplicates.
        redundant = [
            layout.window_cells[(0, col)]
            for col in range(2, cols.start)
            if (0, col) in layout.window_cells
        ]
        if d == 0:
            owned.insert(0, 0)
        else:
            redundant.insert(0, 0)
        plans.append(
            DevicePlan(
                device=d,
                columns=cols,
                candidates=[],
                owned_queries=owned,
                redundant_queries=redundant,
            )
        )

    for i, branch in enumerate(layout.branch_slices):
        plan = plans[i % devices]
        plan.candidates.append(i)
        plan.owned_queries.extend(branch)

    for plan in plans:
        check_closure(layout, plan)
    return plans


def check_closure(layout: StepLayout, plan: DevicePlan) -> None:
    """Assert the shard can resolve every visible reference locally."""
    local = set(plan.query_indices)
    for idx in plan.query_indices:
        for v in layout.queries[idx].visible:
            if v not in local:
                raise LayoutError(
                    f"device {plan.device}: query {idx} needs off-device query {v}"
                )


def _shard_layout(layout: StepLayout, plan: DevicePlan) -> tuple[StepLayout, list[int]]:
    """Sub-layout for one device, with visibility indices remapped."""
    indices = plan.query_indices
    local_of = {g: l for l, g in enumerate(indices)}
    queries = [
        QueryToken(
            token=layout.queries[g].token,
            rel_pos=layout.queries[g].rel_pos,
            visible=tuple(local_of[v] for v in layout.queries[g].visible),
        )
        for g in indices
    ]
    return StepLayout(queries=queries), indices


def lp_step(model: ModelInterface, state: DecodeState, devices: int) -> tuple[StepOutcome, CommStats]:
    """One lookahead step executed as independent device shards.

    All generator draws happen after the merge, on the coordinator, in the
    same order as the single-device step, so the outcome (and the whole
    decode) is bit-identical to ``lookahead_step`` for every device count.
    """
    layout, suffixes = prepare_step(state)
    plans = partition_layout(layout, state.config.window, state.config.ngram, devices)

    context = state.prefix[:-1]
    merged: dict[int, np.ndarray] = {}
    synchronized = 0
    for plan in plans:
        shard, indices = _shard_layout(layout, plan)
        shard_dists = model.forward(context, shard)
        for local, global_idx in enumerate(indices):
            if global_idx not in merged:
                merged[global_idx] = shard_dists[local]
        synchronized += len(plan.columns) + len(plan.candidates) * state.config.ngram

    dists = [merged[i] for i in range(len(layout))]
    outcome = finish_step(state, layout, suffixes, dists)
    comm = CommStats(tokens_synchronized=synchronized * (devices - 1), sync_events=1)
    return outcome, comm


def decode_lookahead_devices(
    model: ModelInterface,
    prompt: Sequence[int],
    config: GenerationConfig,
    sampler: SamplerSpec,
    devices: int,
    pool: NGramPool | None = None,
):
    """Full decode via lp_step; returns (tokens, RunMetrics, CommStats totals)."""
    from .analytics import RunMetrics
    from .decoding import collect_output

    state = start_session(model, prompt, config, sampler, pool=pool)
    out: list[int] = []
    totals = CommStats()
    done = False
    while not done:
        outcome, comm = lp_step(model, state, devices)
        totals.add(comm)
        done = collect_output(out, outcome.accepted, config.max_tokens, config.eos_token)
    return out, RunMetrics.from_records(len(out), state.records, config.ngram), totals
