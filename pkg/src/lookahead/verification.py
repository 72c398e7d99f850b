"""Verification of disjoint speculation branches.

Candidates are (N-1)-token suffixes whose leading token already matched the
last confirmed token.  Each candidate j carries N distributions ``D[j]``:
the base next-token distribution followed by the model outputs at its N-1
suffix tokens.  Verification walks positions left to right; at each
position the surviving candidates all share the verified prefix, so their
current-position distributions coincide and candidates are scanned in
order against that single distribution.  At least one token is always
emitted, and full acceptance earns a bonus token from the survivor's final
distribution, so a step accepts between 1 and N tokens.

Greedy verification accepts a candidate token iff it equals the argmax.
Sampling verification accepts token ``s`` with probability ``P(s)``,
zeroing and renormalizing on rejection; the resulting output law equals
sampling from the unmodified distribution no matter what the speculations
were, which :func:`exact_accept_distribution` computes in closed form and
the test-suite uses as the independent oracle.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .sampling import draw, greedy_token
from .types import DegenerateDistributionError

Candidate = tuple[Sequence[int], Sequence[np.ndarray]]


def _split(candidates: Sequence[Candidate]) -> tuple[list[tuple[int, ...]], list[list[np.ndarray]], int]:
    suffixes = [tuple(int(t) for t in suffix) for suffix, _ in candidates]
    dists = [list(d) for _, d in candidates]
    positions = len(suffixes[0])
    for suffix, d in zip(suffixes, dists):
        if len(suffix) != positions or len(d) != positions + 1:
            raise ValueError("every candidate needs an (N-1)-token suffix and N distributions")
    return suffixes, dists, positions


def verify_greedy(base: np.ndarray, candidates: Sequence[Candidate]) -> list[int]:
    """Accept the longest candidate prefix matching greedy decoding.

    Falls back to the argmax of the current position's distribution when
    every candidate mismatches, guaranteeing one token of progress.
    """
    if not candidates:
        return [greedy_token(base)]
    suffixes, dists, positions = _split(candidates)
    out: list[int] = []
    accepted = False
    for i in range(positions):
        p = dists[0][i]
        target = greedy_token(p)
        accepted = False
        for j, suffix in enumerate(suffixes):
            if suffix[i] == target:
                out.append(target)
                accepted = True
                keep = [k for k in range(j, len(suffixes)) if suffixes[k][i] == target]
                suffixes = [suffixes[k] for k in keep]
                dists = [dists[k] for k in keep]
                break
        if not accepted:
            out.append(target)
            break
    if accepted:
        out.append(greedy_token(dists[0][positions]))
    return out


def verify_sample(
    base: np.ndarray,
    candidates: Sequence[Candidate],
    rng: np.random.Generator,
) -> list[int]:
    """Distribution-preserving acceptance of greedily drafted candidates.

    Per position, each candidate token ``s`` is accepted when a fresh
    uniform draw lands at or below ``P(s)``; on rejection ``P(s)`` is
    zeroed and the distribution renormalized before the next candidate.
    Exhausting all candidates samples from the final renormalized
    distribution.  Tokens with zero current probability are rejected
    outright (their acceptance event has probability zero).
    """
    if not candidates:
        return [draw(base, rng)]
    suffixes, dists, positions = _split(candidates)
    out: list[int] = []
    accepted = False
    for i in range(positions):
        p = np.array(dists[0][i], dtype=np.float64)
        accepted = False
        j = 0
        while j < len(suffixes):
            s = suffixes[j][i]
            r = rng.random()
            if p[s] > 0.0 and r <= p[s]:
                out.append(s)
                accepted = True
                keep = [k for k in range(j, len(suffixes)) if suffixes[k][i] == s]
                suffixes = [suffixes[k] for k in keep]
                dists = [dists[k] for k in keep]
                break
            p[s] = 0.0
            total = p.sum()
            if total <= 0.0:
                raise DegenerateDistributionError("verification renormalized to zero mass")
            p = p / total
            j += 1
        if not accepted:
            out.append(draw(p, rng))
            break
    if accepted:
        out.append(draw(dists[0][positions], rng))
    return out


def exact_accept_distribution(
    probs: np.ndarray,
    speculations: Sequence[int],
) -> np.ndarray:
    """Closed-form output law of one sampling-verification position.

    Simulates the accept/reject/renormalize chain exactly: token ``v``
    gains mass ``P_j(v)`` times the probability of reaching trial ``j``
    when speculation j guesses ``v``, and whatever survives all rejections
    is sampled from the final renormalized distribution.  The result equals
    ``probs`` for every speculation list -- the preservation guarantee the
    sampling verifier is tested against.
    """
    p = np.asarray(probs, dtype=np.float64)
    q = np.zeros_like(p)
    current = p.copy()
    reach = 1.0  # probability that the chain reaches the current trial
    for s in speculations:
        s = int(s)
        accept = current[s]
        q[s] += reach * accept
        current[s] = 0.0
        total = current.sum()
        if total <= 0.0:
            reach = 0.0
            break
        current = current / total
        reach *= 1.0 - accept
    q += reach * current
    return q
