"""N-gram pool: recency-ordered cache of n-grams keyed by leading token.

N-grams harvested from the parallel-decoding trajectory are stored as
(leading token -> suffix) entries.  Lookups return the most recently
inserted suffixes whose leading token matches the last confirmed token;
those become the speculation candidates for the verification branch.
"""

from __future__ import annotations

from collections import OrderedDict
from collections.abc import Iterable, Sequence

from .types import NGramTuple


class NGramPool:
    """Associative n-gram store with recency order and optional LRU cap.

    Entries are deduplicated on (leading token, suffix); re-inserting an
    existing n-gram refreshes its recency.  When ``capacity`` is set, the
    globally least-recently-inserted entry is evicted to make room.
    """

    def __init__(self, ngram: int, capacity: int | None = None):
        if ngram < 2:
            raise ValueError("n-gram size must be >= 2")
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be a positive integer")
        self.ngram = ngram
        self.capacity = capacity
        self.insertion_counter = 0
        # Global recency order (oldest first) over (lead, suffix) pairs.
        self._entries: OrderedDict[tuple[int, NGramTuple], int] = OrderedDict()
        # Per-lead recency order (oldest first) for lookups.
        self._buckets: dict[int, OrderedDict[NGramTuple, int]] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def insert(self, gram: Sequence[int]) -> None:
        """Insert one n-gram, refreshing recency on duplicates."""
        g = tuple(int(t) for t in gram)
        if len(g) != self.ngram:
            raise ValueError(f"expected {self.ngram}-gram, got {len(g)} tokens")
        lead, suffix = g[0], g[1:]
        self.insertion_counter += 1
        key = (lead, suffix)
        if key in self._entries:
            self._entries.move_to_end(key)
            self._entries[key] = self.insertion_counter
            bucket = self._buckets[lead]
            bucket.move_to_end(suffix)
            bucket[suffix] = self.insertion_counter
            return
        if self.capacity is not None and len(self._entries) >= self.capacity:
            (old_lead, old_suffix), _ = self._entries.popitem(last=False)
            old_bucket = self._buckets[old_lead]
            del old_bucket[old_suffix]
            if not old_bucket:
                del self._buckets[old_lead]
        self._entries[key] = self.insertion_counter
        self._buckets.setdefault(lead, OrderedDict())[suffix] = self.insertion_counter

    def insert_all(self, grams: Iterable[Sequence[int]]) -> None:
        for g in grams:
            self.insert(g)

    def lookup(self, last_token: int, limit: int) -> list[NGramTuple]:
        """Return up to ``limit`` suffixes led by ``last_token``, newest first."""
        if limit <= 0:
            return []
        bucket = self._buckets.get(int(last_token))
        if not bucket:
            return []
        out: list[NGramTuple] = []
        for suffix in reversed(bucket):
            out.append(suffix)
            if len(out) == limit:
                break
        return out

    def seed_from_prompt(self, prompt: Sequence[int]) -> None:
        """Insert every contiguous n-gram of the prompt, left to right.

        Prompts shorter than the n-gram size leave the pool unchanged.
        """
        n = self.ngram
        for i in range(len(prompt) - n + 1):
            self.insert(prompt[i : i + n])
