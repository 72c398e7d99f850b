"""Shared value types, configuration records, and error classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Token = int
NGramTuple = tuple[int, ...]


class LayoutError(ValueError):
    """A step layout violates the visibility contract (cycle, forward
    reference, or a malformed candidate branch)."""


class DegenerateDistributionError(ValueError):
    """A probability vector collapsed to zero mass after truncation or
    renormalization."""


def validate_distribution(probs: np.ndarray, vocab_size: int | None = None) -> np.ndarray:
    """Check that ``probs`` is a proper probability vector.

    Entries must be non-negative and sum to 1 within 1e-9. Returns the
    array as float64 for downstream arithmetic.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"distribution must be 1-D, got shape {p.shape}")
    if vocab_size is not None and p.shape[0] != vocab_size:
        raise ValueError(f"distribution has {p.shape[0]} entries, expected {vocab_size}")
    if np.any(p < 0):
        raise ValueError("distribution has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"distribution sums to {total!r}, expected 1")
    return p


@dataclass(frozen=True)
class SamplerSpec:
    """How next tokens are drawn from model distributions.

    ``greedy`` mode ignores the temperature and truncation knobs and always
    picks the argmax (ties broken toward the lowest token id, so greedy
    decoding is an exact, order-independent function of the distribution).
    ``temperature`` mode applies temperature scaling, then top-k, then top-p
    truncation, renormalizes, and draws from the seeded generator.
    """

    mode: str = "greedy"
    temperature: float = 1.0
    top_k: int | None = None
    top_p: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("greedy", "temperature"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be a positive integer")
        if self.top_p is not None and not (0.0 < self.top_p <= 1.0):
            raise ValueError("top_p must lie in (0, 1]")


@dataclass(frozen=True)
class GenerationConfig:
    """Engine knobs for one decoding session.

    ``window`` (W) is the number of future positions decoded in parallel,
    ``ngram`` (N) the n-gram size (so the window looks back N-1 trajectory
    steps), and ``max_candidates`` (G) caps how many cached n-grams are
    verified per step.  G defaults to W.
    """

    window: int = 15
    ngram: int = 5
    max_candidates: int | None = None
    max_tokens: int = 64
    eos_token: int | None = None
    seed_pool_from_prompt: bool = False

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window size W must be >= 1")
        if self.ngram < 2:
            raise ValueError("n-gram size N must be >= 2")
        if self.max_candidates is None:
            object.__setattr__(self, "max_candidates", self.window)
        if self.max_candidates < 0:
            raise ValueError("max candidate count G must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


@dataclass
class StepRecord:
    """Per-step accounting for one parallel decoding step."""

    accepted_count: int
    candidate_count: int
    query_count: int
    pool_size: int

    def __post_init__(self) -> None:
        if self.accepted_count < 1:
            raise ValueError("every step must accept at least one token")
