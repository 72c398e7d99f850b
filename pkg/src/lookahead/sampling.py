"""Token sampling: greedy argmax and temperature/top-k/top-p draws.

The greedy rule breaks argmax ties toward the lowest token id, making it a
pure, order-independent function of the distribution; the exactness tests
for parallel decoding rely on this.  Temperature sampling composes the
standard filters in the order temperature -> top-k -> top-p, renormalizes,
and draws by inverse CDF from the supplied generator.
"""

from __future__ import annotations

import numpy as np

from .types import DegenerateDistributionError, SamplerSpec


def greedy_token(probs: np.ndarray) -> int:
    """Lowest index attaining the maximum probability."""
    return int(np.argmax(probs))


def adjusted_distribution(probs: np.ndarray, spec: SamplerSpec) -> np.ndarray:
    """Distribution actually sampled from under ``spec``.

    Greedy mode collapses to a one-hot vector on the argmax token.  In
    temperature mode the raw probabilities are sharpened/flattened by
    ``p ** (1/T)``, truncated to the top-k entries and the top-p nucleus,
    and renormalized.
    """
    p = np.asarray(probs, dtype=np.float64)
    if spec.mode == "greedy":
        out = np.zeros_like(p)
        out[greedy_token(p)] = 1.0
        return out

    if spec.temperature != 1.0:
        p = np.power(p, 1.0 / spec.temperature)
    else:
        p = p.copy()

    # Rank tokens by probability, lowest id first among ties, so top-k=1
    # always keeps exactly the greedy token.
    order = np.lexsort((np.arange(p.size), -p))
    if spec.top_k is not None and spec.top_k < p.size:
        p_out = np.zeros_like(p)
        keep = order[: spec.top_k]
        p_out[keep] = p[keep]
        p = p_out
    if spec.top_p is not None and spec.top_p < 1.0:
        ranked = p[order]
        cum = np.cumsum(ranked)
        total = cum[-1]
        if total <= 0.0:
            raise DegenerateDistributionError("no probability mass before nucleus truncation")
        # Keep the minimal prefix whose mass reaches top_p (at least one token).
        cutoff = int(np.searchsorted(cum, spec.top_p * total, side="left"))
        cutoff = min(cutoff, p.size - 1)
        p_out = np.zeros_like(p)
        keep = order[: cutoff + 1]
        p_out[keep] = p[keep]
        p = p_out

    total = p.sum()
    if total <= 0.0:
        raise DegenerateDistributionError("all probability mass truncated away")
    return p / total


def draw(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from an (already normalized) distribution."""
    u = rng.random()
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, u * cum[-1], side="right"))
    return min(idx, probs.shape[0] - 1)


def sample_token(probs: np.ndarray, spec: SamplerSpec, rng: np.random.Generator) -> int:
    """Draw one token from ``probs`` under the sampler spec.

    Greedy mode never touches the generator; temperature mode advances it
    by exactly one uniform draw.
    """
    if spec.mode == "greedy":
        return greedy_token(probs)
    return draw(adjusted_distribution(probs, spec), rng)
