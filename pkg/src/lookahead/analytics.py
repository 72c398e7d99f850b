"""Acceptance-rate analytics: closed forms, Monte Carlo checks, run metrics.

For speculation with per-token acceptance rate ``alpha`` and draft length
``gamma``, the expected number of tokens confirmed per step (including the
one guaranteed token and the bonus on full acceptance) is

    E1(alpha, gamma) = (1 - alpha**(gamma+1)) / (1 - alpha)

and with ``b`` independent parallel drafts per step

    Eb(alpha, gamma, b) = (gamma + 1) - sum_{i=1..gamma} (1 - alpha**i)**b

which reduces to E1 at b=1.  Mapping the engine's knobs onto these
parameters uses gamma = N - 1 and b = G (= W in the default setting).
Assuming one good speculation every ``f`` steps and plain autoregressive
progress otherwise, the predicted step compression ratio is
``(f - 1 + Eb) / f``.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Iterable, Sequence

import numpy as np

from .types import GenerationConfig, StepRecord


def expected_accepted_single(alpha: float, gamma: int) -> float:
    """Expected accepted tokens per step for one draft of length gamma."""
    _check_alpha(alpha)
    if gamma < 1:
        raise ValueError("speculation length gamma must be >= 1")
    return (1.0 - alpha ** (gamma + 1)) / (1.0 - alpha)


def expected_accepted_batched(alpha: float, gamma: int, b: int) -> float:
    """Expected accepted tokens per step for b independent drafts."""
    _check_alpha(alpha)
    if gamma < 1 or b < 1:
        raise ValueError("need gamma >= 1 and b >= 1")
    i = np.arange(1, gamma + 1, dtype=np.float64)
    return float(gamma + 1 - np.sum((1.0 - alpha**i) ** b))


def mc_expected_accepted(
    alpha: float,
    gamma: int,
    b: int,
    trials: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of the batched expectation; returns (mean, stderr).

    Each trial draws b independent drafts whose tokens pass verification
    i.i.d. with probability alpha; the accepted count is one forced token
    plus the longest leading accepted run across drafts (the full-draft
    case yields gamma + 1, the bonus token).  Leading-run lengths are drawn
    directly from their geometric law P(run >= i) = alpha**i.
    """
    _check_alpha(alpha)
    if gamma < 1 or b < 1 or trials < 1:
        raise ValueError("need gamma >= 1, b >= 1, trials >= 1")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    remaining = trials
    chunk_rows = max(1, int(4_000_000 // b))
    log_alpha = np.log(alpha) if alpha > 0.0 else None
    while remaining:
        rows = min(chunk_rows, remaining)
        if log_alpha is None:
            runs = np.zeros((rows, b))
        else:
            u = rng.random((rows, b))
            with np.errstate(divide="ignore"):
                runs = np.minimum(np.floor(np.log(u) / log_alpha), gamma)
        accepted = 1.0 + runs.max(axis=1)
        total += float(accepted.sum())
        total_sq += float(np.square(accepted).sum())
        remaining -= rows
    mean = total / trials
    if trials < 2:
        return mean, 0.0
    var = max(0.0, (total_sq - trials * mean * mean) / (trials - 1))
    return mean, float(np.sqrt(var / trials))


def compression_ratio(tokens: int, steps: int) -> float:
    """Generated tokens per decoding step."""
    if steps < 1:
        raise ValueError("step count must be >= 1")
    return tokens / steps


def predicted_compression(alpha: float, f: float, gamma: int, b: int) -> float:
    """Predicted step compression when one step in f has a good speculation."""
    if f < 1:
        raise ValueError("good-speculation period f must be >= 1")
    return (f - 1.0 + expected_accepted_batched(alpha, gamma, b)) / f


def flops_proxy(window: int, ngram: int, max_candidates: int) -> int:
    """Per-step extra input tokens, (W + G) * (N - 1), standing in for FLOPs."""
    if window < 1 or ngram < 2 or max_candidates < 0:
        raise ValueError("need W >= 1, N >= 2, G >= 0")
    return (window + max_candidates) * (ngram - 1)


def speculation_params(config: GenerationConfig) -> tuple[int, int]:
    """(gamma, b) for an engine config: drafts are G suffixes of N-1 tokens."""
    return config.ngram - 1, config.max_candidates


@dataclass(frozen=True)
class AcceptanceParams:
    """Parameters of the acceptance model behind the closed forms."""

    alpha: float
    gamma: int
    b: int = 1
    f: float = 1.0

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if self.gamma < 1 or self.b < 1 or self.f < 1:
            raise ValueError("need gamma >= 1, b >= 1, f >= 1")


@dataclass
class RunMetrics:
    """Aggregated accounting for one decoding run."""

    tokens_generated: int
    steps: int
    compression: float
    acceptance_histogram: dict[int, int]
    total_queries: int
    mean_queries_per_step: float

    @classmethod
    def from_records(cls, tokens_generated: int, records: Sequence[StepRecord], ngram: int) -> "RunMetrics":
        steps = len(records)
        histogram = {k: 0 for k in range(1, ngram + 1)}
        for rec in records:
            histogram[rec.accepted_count] += 1
        total_queries = sum(rec.query_count for rec in records)
        return cls(
            tokens_generated=tokens_generated,
            steps=steps,
            compression=compression_ratio(tokens_generated, steps),
            acceptance_histogram=histogram,
            total_queries=total_queries,
            mean_queries_per_step=total_queries / steps,
        )


def scaling_rows(
    alpha: float,
    f: float,
    gamma: int,
    batch_sizes: Iterable[int],
    trials: int = 200_000,
    seed: int = 0,
) -> list[dict[str, float]]:
    """Predicted-vs-simulated compression across speculation batch sizes.

    One row per b with keys (alpha, f, gamma, b, predicted_S, mc_mean,
    mc_stderr); the Monte Carlo columns are on the same compression scale
    as ``predicted_S``, so at f=1 they are plain expected-token counts.
    """
    rows = []
    for i, b in enumerate(batch_sizes):
        mc_mean, mc_err = mc_expected_accepted(alpha, gamma, b, trials, seed + i)
        rows.append(
            {
                "alpha": alpha,
                "f": f,
                "gamma": gamma,
                "b": b,
                "predicted_S": predicted_compression(alpha, f, gamma, b),
                "mc_mean": (f - 1.0 + mc_mean) / f,
                "mc_stderr": mc_err / f,
            }
        )
    return rows


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha < 1.0:
        raise ValueError("acceptance rate alpha must lie in [0, 1)")
