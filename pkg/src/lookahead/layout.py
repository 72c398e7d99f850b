"""Step-layout geometry for combined lookahead + verification decoding.

One decoding step evaluates, in a single masked forward pass:

* query 0 -- the last confirmed token (relative position 0);
* the 2D lookahead window -- N-1 staggered levels of W columns holding
  the recent trajectory of the parallel fixed-point iteration, where the
  cell at (level, column) sits at relative position ``column + level - 1``
  and level 0 drops column 1 (it would collide with position 0);
* up to G disjoint candidate branches -- cached n-gram suffixes placed at
  relative positions 1..N-1 for verification.

Visibility encodes the usual causal rule restricted to each token's own
trajectory chain: every query sees the full confirmed prefix and query 0;
window cells see the oldest level up to their own column plus their own
column in the levels between; branch tokens see only earlier tokens of the
same branch.  Lookahead and verification queries are mutually invisible.
Consequently each query's visible set contains exactly one token per
relative position below its own, which is what lets the reference models
condition exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Sequence

import numpy as np

from .types import LayoutError, NGramTuple


@dataclass(frozen=True)
class QueryToken:
    """One query slot in a step layout.

    ``visible`` lists the indices of other layout queries this token may
    attend to, always with strictly smaller relative position.
    """

    token: int
    rel_pos: int
    visible: tuple[int, ...] = ()


@dataclass
class StepLayout:
    """Ordered query list plus the structural maps the engine needs.

    Index 0 is always the rel_pos-0 query.  ``window_cells`` maps a window
    (level, column) to its query index, ``branch_slices`` gives the index
    range of each candidate branch, and ``generators`` holds the query
    index whose output distribution generates the new token of each window
    column (layouts built by hand, e.g. plain chains, leave these empty).
    """

    queries: list[QueryToken]
    window_cells: dict[tuple[int, int], int] = field(default_factory=dict)
    branch_slices: list[range] = field(default_factory=list)
    generators: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.queries)

    def visibility_matrix(self) -> str:
        """Textual visibility matrix (row = query, column = visible query)."""
        lines = []
        for i, q in enumerate(self.queries):
            seen = set(q.visible)
            row = "".join("#" if j == i else "1" if j in seen else "." for j in range(len(self.queries)))
            lines.append(f"{i:3d} rel={q.rel_pos:<3d} {row}")
        return "\n".join(lines)


@dataclass(frozen=True)
class CandidateBranch:
    """A speculation branch: an (N-1)-token suffix from the n-gram pool."""

    suffix: NGramTuple
    source: NGramTuple = ()


@dataclass
class Window2D:
    """Fixed-size 2D lookahead window.

    ``levels[0]`` is the oldest trajectory row and holds columns 2..W;
    every later row holds columns 1..W.  ``levels[-1]`` is the newest row.
    For n-gram size 2 there is a single row.
    """

    window: int
    ngram: int
    vocab_size: int
    levels: list[list[int]]

    def columns(self, level: int) -> range:
        return range(2, self.window + 1) if level == 0 else range(1, self.window + 1)

    def get(self, level: int, col: int) -> int:
        offset = 2 if level == 0 else 1
        return self.levels[level][col - offset]

    @staticmethod
    def rel_pos(level: int, col: int) -> int:
        return col + level - 1

    def check_geometry(self) -> None:
        if len(self.levels) != self.ngram - 1:
            raise ValueError(f"window must have {self.ngram - 1} levels")
        for level, row in enumerate(self.levels):
            expected = len(self.columns(level))
            if len(row) != expected:
                raise ValueError(f"level {level} has {len(row)} cells, expected {expected}")


def window_init(window: int, ngram: int, vocab_size: int, rng: np.random.Generator) -> Window2D:
    """Fresh window with every cell drawn uniformly from the vocabulary."""
    if window < 1 or ngram < 2:
        raise ValueError("need W >= 1 and N >= 2")
    levels = []
    for level in range(ngram - 1):
        ncols = window - 1 if level == 0 else window
        levels.append([int(t) for t in rng.integers(0, vocab_size, size=ncols)])
    return Window2D(window=window, ngram=ngram, vocab_size=vocab_size, levels=levels)


def build_layout(
    window: Window2D,
    last_token: int,
    candidates: Sequence[CandidateBranch] = (),
) -> StepLayout:
    """Assemble the per-step query list for window and candidate branches."""
    window.check_geometry()
    n = window.ngram
    queries: list[QueryToken] = [QueryToken(token=int(last_token), rel_pos=0)]
    cells: dict[tuple[int, int], int] = {}

    for level in range(n - 1):
        for col in window.columns(level):
            if level == 0:
                # Oldest row: columns up to (own - 1), query 0 implicitly first.
                visible = [0] + [cells[(0, c)] for c in range(2, col)]
            else:
                visible = (
                    [0]
                    + [cells[(0, c)] for c in range(2, col + 1)]
                    + [cells[(m, col)] for m in range(1, level)]
                )
            idx = len(queries)
            cells[(level, col)] = idx
            queries.append(
                QueryToken(
                    token=window.get(level, col),
                    rel_pos=Window2D.rel_pos(level, col),
                    visible=tuple(visible),
                )
            )

    branch_slices: list[range] = []
    for branch in candidates:
        if len(branch.suffix) != n - 1:
            raise LayoutError(
                f"candidate suffix must have {n - 1} tokens, got {len(branch.suffix)}"
            )
        start = len(queries)
        for k, token in enumerate(branch.suffix, start=1):
            visible = (0,) + tuple(range(start, start + k - 1))
            queries.append(QueryToken(token=int(token), rel_pos=k, visible=visible))
        branch_slices.append(range(start, start + n - 1))

    # The new token of column j comes from the top-level cell's output; with
    # N=2 the top row lacks column 1, whose token comes from query 0 itself.
    top = n - 2
    generators = tuple(cells.get((top, col), 0) for col in range(1, window.window + 1))

    return StepLayout(
        queries=queries,
        window_cells=cells,
        branch_slices=branch_slices,
        generators=generators,
    )


def chain_layout(last_token: int, tokens: Sequence[int]) -> StepLayout:
    """Triangular chain layout: token i sees query 0 and tokens before it.

    This is the layout of plain parallel fixed-point iteration; feeding it
    through a model is equivalent to len(tokens)+1 sequential calls.
    """
    queries = [QueryToken(token=int(last_token), rel_pos=0)]
    for i, token in enumerate(tokens, start=1):
        queries.append(QueryToken(token=int(token), rel_pos=i, visible=tuple(range(i))))
    return StepLayout(queries=queries)


def collect_ngrams(window: Window2D, new_top: Sequence[int], last_token: int) -> list[NGramTuple]:
    """Harvest one n-gram per window column from the trajectory.

    Column j spans consecutive positions: its cells across levels plus the
    newly generated token.  Column 1 has no oldest-level cell; the confirmed
    token at position 0 is its first element instead.
    """
    window.check_geometry()
    if len(new_top) != window.window:
        raise ValueError(f"expected {window.window} new tokens, got {len(new_top)}")
    grams: list[NGramTuple] = []
    for col in range(1, window.window + 1):
        if col == 1:
            first = [int(last_token)]
            rest = [window.get(level, col) for level in range(1, window.ngram - 1)]
        else:
            first = []
            rest = [window.get(level, col) for level in range(window.ngram - 1)]
        grams.append(tuple(first + rest + [int(new_top[col - 1])]))
    return grams


def window_update(
    window: Window2D,
    new_top: Sequence[int],
    accepted_count: int,
    rng: np.random.Generator,
) -> Window2D:
    """Advance the window after a step that accepted ``accepted_count`` tokens.

    The oldest level is dropped, the freshly generated tokens become the
    newest level, and all columns shift left by ``accepted_count - 1`` so
    relative positions stay anchored on the new last confirmed token.
    Cells shifted off the right edge are refilled with seeded uniform draws.
    """
    window.check_geometry()
    n, w = window.ngram, window.window
    if not 1 <= accepted_count <= n:
        raise ValueError(f"accepted_count must be in [1, {n}], got {accepted_count}")
    if len(new_top) != w:
        raise ValueError(f"expected {w} new tokens, got {len(new_top)}")

    shift = accepted_count - 1
    # Source rows for the new levels 0..N-2: old levels 1..N-2, then new_top.
    sources = [list(row) for row in window.levels[1:]] + [[int(t) for t in new_top]]
    levels: list[list[int]] = []
    for level, source in enumerate(sources):
        row = []
        for col in (range(2, w + 1) if level == 0 else range(1, w + 1)):
            src_col = col + shift
            if src_col <= w:
                row.append(source[src_col - 1])
            else:
                row.append(int(rng.integers(0, window.vocab_size)))
        levels.append(row)
    return Window2D(window=w, ngram=n, vocab_size=window.vocab_size, levels=levels)
