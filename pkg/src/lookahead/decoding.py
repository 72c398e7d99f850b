"""Decoding orchestrators: autoregressive, Jacobi, and lookahead modes.

All three run over any :class:`~lookahead.models.ModelInterface`.  The
autoregressive baseline is the correctness oracle; Jacobi decoding solves
the whole continuation as a fixed-point system, one parallel update per
iteration; lookahead decoding combines a Jacobi-style 2D window (which
generates candidate n-grams) with parallel verification of cached n-grams,
accepting 1..N confirmed tokens per step while reproducing the baseline's
output exactly under greedy sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Sequence

import numpy as np

from .layout import (
    CandidateBranch,
    StepLayout,
    Window2D,
    build_layout,
    chain_layout,
    collect_ngrams,
    window_init,
    window_update,
)
from .models import ModelInterface
from .pool import NGramPool
from .sampling import adjusted_distribution, greedy_token, sample_token
from .types import GenerationConfig, NGramTuple, SamplerSpec, StepRecord
from .verification import Candidate, verify_greedy, verify_sample


@dataclass
class JacobiTrajectory:
    """The iterates of one Jacobi decoding run, initial guess first."""

    iterates: list[list[int]]


@dataclass
class StepOutcome:
    """Result of one lookahead step."""

    accepted: list[int]
    new_top: list[int]
    candidate_count: int
    query_count: int


@dataclass
class DecodeState:
    """Mutable per-session state for lookahead decoding."""

    model: ModelInterface
    prefix: list[int]
    window: Window2D
    pool: NGramPool
    config: GenerationConfig
    sampler: SamplerSpec
    rng: np.random.Generator
    records: list[StepRecord] = field(default_factory=list)


def start_session(
    model: ModelInterface,
    prompt: Sequence[int],
    config: GenerationConfig,
    sampler: SamplerSpec,
    pool: NGramPool | None = None,
) -> DecodeState:
    """Initialize window, pool, and generator state for one decode."""
    if not len(prompt):
        raise ValueError("prompt must be nonempty")
    if pool is None:
        pool = NGramPool(config.ngram)
    elif pool.ngram != config.ngram:
        raise ValueError("pool n-gram size does not match the generation config")
    if config.seed_pool_from_prompt:
        pool.seed_from_prompt([int(t) for t in prompt])
    rng = np.random.default_rng(sampler.seed)
    window = window_init(config.window, config.ngram, model.vocab_size, rng)
    return DecodeState(
        model=model,
        prefix=[int(t) for t in prompt],
        window=window,
        pool=pool,
        config=config,
        sampler=sampler,
        rng=rng,
    )


def decode_autoregressive(
    model: ModelInterface,
    prompt: Sequence[int],
    sampler: SamplerSpec,
    max_tokens: int,
    eos_token: int | None = None,
) -> list[int]:
    """Generate one token per forward pass; the exactness baseline."""
    if not len(prompt):
        raise ValueError("prompt must be nonempty")
    rng = np.random.default_rng(sampler.seed)
    prefix = [int(t) for t in prompt]
    out: list[int] = []
    while len(out) < max_tokens:
        dist = model.forward(prefix[:-1], chain_layout(prefix[-1], []))[0]
        token = sample_token(dist, sampler, rng)
        out.append(token)
        prefix.append(token)
        if eos_token is not None and token == eos_token:
            break
    return out


def decode_jacobi(
    model: ModelInterface,
    prompt: Sequence[int],
    m: int,
    rng: np.random.Generator,
) -> tuple[list[int], JacobiTrajectory, int]:
    """Solve an m-token greedy continuation by parallel fixed-point iteration.

    Starting from a random guess, every iteration recomputes all m
    positions in one forward pass over a triangular chain; the first
    unconverged position becomes correct each round, so at most m
    iterations reach the fixed point, which equals the greedy
    autoregressive output.
    """
    if not len(prompt):
        raise ValueError("prompt must be nonempty")
    if m < 1:
        raise ValueError("generation length m must be >= 1")
    prefix = [int(t) for t in prompt]
    current = [int(t) for t in rng.integers(0, model.vocab_size, size=m)]
    trajectory = [list(current)]
    iterations = 0
    for _ in range(m):
        dists = model.forward(prefix[:-1], chain_layout(prefix[-1], current))
        new = [greedy_token(dists[j]) for j in range(m)]
        iterations += 1
        trajectory.append(list(new))
        if new == current:
            break
        current = new
    return new, JacobiTrajectory(trajectory), iterations


def prepare_step(state: DecodeState) -> tuple[StepLayout, list[NGramTuple]]:
    """Look up speculation candidates and build this step's layout."""
    last = state.prefix[-1]
    suffixes = state.pool.lookup(last, state.config.max_candidates)
    branches = [CandidateBranch(suffix=s, source=(last,) + s) for s in suffixes]
    return build_layout(state.window, last, branches), suffixes


def finish_step(
    state: DecodeState,
    layout: StepLayout,
    suffixes: list[NGramTuple],
    dists: Sequence[np.ndarray],
) -> StepOutcome:
    """Verify candidates, harvest n-grams, and advance window and prefix.

    ``dists`` holds one distribution per layout query; how they were
    computed (single pass or sharded across devices) does not matter.
    """
    base = dists[0]
    new_top = [greedy_token(dists[g]) for g in layout.generators]

    candidates: list[Candidate] = [
        (suffix, [base] + [dists[i] for i in branch])
        for suffix, branch in zip(suffixes, layout.branch_slices)
    ]
    if state.sampler.mode == "greedy":
        accepted = verify_greedy(base, candidates)
    else:
        # Verify against the distributions the sampler actually draws from.
        spec = state.sampler
        adjusted = [
            (suffix, [adjusted_distribution(d, spec) for d in ds]) for suffix, ds in candidates
        ]
        accepted = verify_sample(adjusted_distribution(base, spec), adjusted, state.rng)

    state.pool.insert_all(collect_ngrams(state.window, new_top, state.prefix[-1]))
    state.window = window_update(state.window, new_top, len(accepted), state.rng)
    state.prefix.extend(accepted)
    state.records.append(
        StepRecord(
            accepted_count=len(accepted),
            candidate_count=len(suffixes),
            query_count=len(layout),
            pool_size=len(state.pool),
        )
    )
    return StepOutcome(
        accepted=accepted,
        new_top=new_top,
        candidate_count=len(suffixes),
        query_count=len(layout),
    )


def lookahead_step(state: DecodeState) -> StepOutcome:
    """One combined generate-and-verify step on a single device."""
    layout, suffixes = prepare_step(state)
    dists = state.model.forward(state.prefix[:-1], layout)
    return finish_step(state, layout, suffixes, dists)


def collect_output(
    out: list[int],
    accepted: Sequence[int],
    max_tokens: int,
    eos_token: int | None,
) -> bool:
    """Fold one step's accepted tokens into the output stream.

    Mirrors autoregressive stopping: tokens past the first end-of-sequence
    token or past the budget are discarded.  Returns True when decoding
    should stop.
    """
    for token in accepted:
        out.append(token)
        if eos_token is not None and token == eos_token:
            return True
        if len(out) >= max_tokens:
            return True
    return False


def decode_lookahead(
    model: ModelInterface,
    prompt: Sequence[int],
    config: GenerationConfig,
    sampler: SamplerSpec,
    pool: NGramPool | None = None,
):
    """Full lookahead decode; returns (tokens, RunMetrics).

    Under a greedy sampler the token stream is identical to
    :func:`decode_autoregressive` on the same inputs.
    """
    from .analytics import RunMetrics

    state = start_session(model, prompt, config, sampler, pool=pool)
    out: list[int] = []
    done = False
    while not done:
        outcome = lookahead_step(state)
        done = collect_output(out, outcome.accepted, config.max_tokens, config.eos_token)
    return out, RunMetrics.from_records(len(out), state.records, config.ngram)
