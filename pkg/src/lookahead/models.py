"""Reference autoregressive models with a masked multi-query forward pass.

A model evaluates a :class:`~lookahead.layout.StepLayout` against a confirmed
prefix and returns one next-token distribution per query.  Each query's
distribution is conditioned on the full prefix, query 0, its visible
queries, and itself.  Because every valid layout gives each query exactly
one visible token per relative position below its own, that conditioning
set is a plain token sequence -- the query's *chain* -- and the forward
pass evaluates each chain independently, in ascending position order.
This makes the results bit-identical to feeding the chain one token at a
time, which the exactness guarantees of parallel decoding rest on.

Two reference models are provided: a Laplace-smoothed k-th order Markov
model trained on a token corpus, and a tiny deterministic transformer with
seeded weights and sinusoidal absolute positions.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .layout import StepLayout
from .types import LayoutError

MARKOV_FORMAT_VERSION = 1


def conditioning_chain(prefix: Sequence[int], layout: StepLayout, index: int) -> list[int]:
    """Token sequence a query is conditioned on (prefix through the query).

    Raises :class:`LayoutError` on forward references, on two visible
    tokens sharing a relative position, or on gaps in the chain.
    """
    queries = layout.queries
    q = queries[index]
    if index == 0:
        if q.rel_pos != 0:
            raise LayoutError("query 0 must sit at relative position 0")
        return list(prefix) + [q.token]

    by_rel: dict[int, int] = {0: queries[0].token}
    for v in set(q.visible):
        if not 0 <= v < len(queries) or v == index:
            raise LayoutError(f"query {index} has out-of-range visible index {v}")
        ref = queries[v]
        if ref.rel_pos >= q.rel_pos:
            raise LayoutError(
                f"query {index} (rel_pos {q.rel_pos}) sees query {v} at rel_pos {ref.rel_pos}"
            )
        if ref.rel_pos in by_rel and by_rel[ref.rel_pos] != ref.token:
            raise LayoutError(f"query {index} sees two tokens at rel_pos {ref.rel_pos}")
        by_rel[ref.rel_pos] = ref.token
    chain = list(prefix)
    for rel in range(q.rel_pos):
        if rel not in by_rel:
            raise LayoutError(f"query {index} has no visible token at rel_pos {rel}")
        chain.append(by_rel[rel])
    chain.append(q.token)
    return chain


class ModelInterface(ABC):
    """Abstract autoregressive model over a fixed vocabulary.

    ``forward`` is a pure function of (prefix, layout): repeated calls with
    identical arguments return bit-identical distributions.
    """

    vocab_size: int

    @abstractmethod
    def next_distribution(self, sequence: Sequence[int]) -> np.ndarray:
        """Next-token distribution conditioned on the whole sequence."""

    def forward(self, prefix: Sequence[int], layout: StepLayout) -> list[np.ndarray]:
        """One distribution per layout query, in query order."""
        for t in prefix:
            self._check_token(int(t))
        for q in layout.queries:
            self._check_token(q.token)
        return [
            self.next_distribution(conditioning_chain(prefix, layout, i))
            for i in range(len(layout.queries))
        ]

    def _check_token(self, token: int) -> None:
        if not 0 <= token < self.vocab_size:
            raise ValueError(f"token {token} outside vocabulary of size {self.vocab_size}")


class MarkovModel(ModelInterface):
    """Order-k Markov model with Laplace smoothing.

    Seen contexts take probability (count(c, t) + lam) / (count(c) + lam*V);
    unseen contexts fall back to the smoothed next-token marginal, so every
    distribution is strictly positive.
    """

    def __init__(self, order: int, smoothing: float, vocab_size: int):
        if order < 1:
            raise ValueError("order must be >= 1")
        if smoothing <= 0:
            raise ValueError("smoothing constant must be positive")
        self.order = order
        self.smoothing = smoothing
        self.vocab_size = vocab_size
        self._counts: dict[tuple[int, ...], np.ndarray] = {}
        self._marginal = np.zeros(vocab_size, dtype=np.float64)

    def observe(self, context: Sequence[int], target: int) -> None:
        key = tuple(int(t) for t in context)
        row = self._counts.get(key)
        if row is None:
            row = np.zeros(self.vocab_size, dtype=np.float64)
            self._counts[key] = row
        row[target] += 1.0
        self._marginal[target] += 1.0

    def next_distribution(self, sequence: Sequence[int]) -> np.ndarray:
        context = tuple(int(t) for t in sequence[-self.order :])
        row = self._counts.get(context) if len(context) == self.order else None
        if row is None:
            row = self._marginal
        smoothed = row + self.smoothing
        return smoothed / smoothed.sum()

    def save(self, path: str | Path) -> None:
        payload = {
            "format_version": MARKOV_FORMAT_VERSION,
            "order": self.order,
            "smoothing": self.smoothing,
            "vocab_size": self.vocab_size,
            "counts": {
                ",".join(map(str, ctx)): {str(t): row[t] for t in np.nonzero(row)[0]}
                for ctx, row in sorted(self._counts.items())
            },
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "MarkovModel":
        payload = json.loads(Path(path).read_text())
        if payload.get("format_version") != MARKOV_FORMAT_VERSION:
            raise ValueError(f"unsupported model file version {payload.get('format_version')!r}")
        model = cls(payload["order"], payload["smoothing"], payload["vocab_size"])
        for ctx_key, row in payload["counts"].items():
            ctx = tuple(int(t) for t in ctx_key.split(","))
            for token, count in row.items():
                t = int(token)
                model._counts.setdefault(ctx, np.zeros(model.vocab_size))[t] = count
                model._marginal[t] += count
        return model


def markov_train(
    corpus: Sequence[Sequence[int]],
    order: int,
    smoothing: float,
    vocab_size: int,
) -> MarkovModel:
    """Count k-token contexts over the corpus sequences."""
    model = MarkovModel(order=order, smoothing=smoothing, vocab_size=vocab_size)
    for seq in corpus:
        for i in range(order, len(seq)):
            model.observe(seq[i - order : i], int(seq[i]))
    return model


def _sinusoidal_encoding(positions: np.ndarray, dim: int) -> np.ndarray:
    inv_freq = np.power(10000.0, -np.arange(0, dim, 2, dtype=np.float64) / dim)
    angles = positions[:, None] * inv_freq[None, :]
    enc = np.zeros((positions.shape[0], dim), dtype=np.float64)
    enc[:, 0::2] = np.sin(angles)
    enc[:, 1::2] = np.cos(angles[:, : dim // 2])
    return enc


def _layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + 1e-8) * gain + bias


class TinyTransformer(ModelInterface):
    """Small decoder-only transformer with deterministic seeded weights.

    Everything runs in float64 numpy.  A chain is evaluated as one causal
    sequence with absolute sinusoidal positions, so attention contributions
    accumulate in ascending key-position order regardless of how queries
    were batched into a layout -- identical chains give bit-identical
    distributions.
    """

    def __init__(
        self,
        seed: int,
        vocab_size: int,
        d_model: int = 16,
        n_layers: int = 2,
        n_heads: int = 2,
    ):
        if min(vocab_size, d_model, n_layers, n_heads) < 1:
            raise ValueError("all dimensions must be positive")
        if d_model % n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        self.seed = seed
        self.vocab_size = vocab_size
        self.d_model = d_model
        self.n_layers = n_layers
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        d_ff = 4 * d_model

        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(d_model)
        self.embedding = rng.normal(0.0, scale, size=(vocab_size, d_model))
        self.blocks = []
        for _ in range(n_layers):
            self.blocks.append(
                {
                    "wq": rng.normal(0.0, scale, size=(d_model, d_model)),
                    "wk": rng.normal(0.0, scale, size=(d_model, d_model)),
                    "wv": rng.normal(0.0, scale, size=(d_model, d_model)),
                    "wo": rng.normal(0.0, scale, size=(d_model, d_model)),
                    "ln1_g": np.ones(d_model),
                    "ln1_b": np.zeros(d_model),
                    "w1": rng.normal(0.0, scale, size=(d_model, d_ff)),
                    "b1": np.zeros(d_ff),
                    "w2": rng.normal(0.0, 1.0 / np.sqrt(d_ff), size=(d_ff, d_model)),
                    "b2": np.zeros(d_model),
                    "ln2_g": np.ones(d_model),
                    "ln2_b": np.zeros(d_model),
                }
            )
        self.ln_f_g = np.ones(d_model)
        self.ln_f_b = np.zeros(d_model)
        self.unembed = rng.normal(0.0, scale, size=(d_model, vocab_size))

    def next_distribution(self, sequence: Sequence[int]) -> np.ndarray:
        tokens = np.asarray(sequence, dtype=np.int64)
        positions = np.arange(tokens.shape[0], dtype=np.float64)
        x = self.embedding[tokens] + _sinusoidal_encoding(positions, self.d_model)

        L = tokens.shape[0]
        mask = np.triu(np.full((L, L), -np.inf), k=1)
        for block in self.blocks:
            h = _layer_norm(x, block["ln1_g"], block["ln1_b"])
            q = (h @ block["wq"]).reshape(L, self.n_heads, self.d_head).transpose(1, 0, 2)
            k = (h @ block["wk"]).reshape(L, self.n_heads, self.d_head).transpose(1, 0, 2)
            v = (h @ block["wv"]).reshape(L, self.n_heads, self.d_head).transpose(1, 0, 2)
            scores = q @ k.transpose(0, 2, 1) / np.sqrt(self.d_head) + mask
            scores -= scores.max(axis=-1, keepdims=True)
            weights = np.exp(scores)
            weights /= weights.sum(axis=-1, keepdims=True)
            ctx = (weights @ v).transpose(1, 0, 2).reshape(L, self.d_model)
            x = x + ctx @ block["wo"]

            h = _layer_norm(x, block["ln2_g"], block["ln2_b"])
            inner = h @ block["w1"] + block["b1"]
            x = x + (inner * (inner > 0)) @ block["w2"] + block["b2"]

        final = _layer_norm(x[-1], self.ln_f_g, self.ln_f_b)
        logits = final @ self.unembed
        logits -= logits.max()
        probs = np.exp(logits)
        return probs / probs.sum()


def transformer_init(
    seed: int,
    vocab_size: int,
    d_model: int = 16,
    n_layers: int = 2,
    n_heads: int = 2,
) -> TinyTransformer:
    """Build a transformer whose weights are a pure function of the seed."""
    return TinyTransformer(
        seed=seed, vocab_size=vocab_size, d_model=d_model, n_layers=n_layers, n_heads=n_heads
    )


def tokenize(data: bytes | str, scheme: str, vocab_size: int | None = None) -> list[int]:
    """Map text to token ids.

    ``bytes`` maps each byte to its value (vocabulary 256); ``ints`` parses
    whitespace-separated decimal ids, validating against ``vocab_size`` when
    given.  Parse failures report the 1-based field offset.
    """
    if scheme == "bytes":
        raw = data.encode("utf-8") if isinstance(data, str) else bytes(data)
        return list(raw)
    if scheme == "ints":
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        tokens = []
        for i, fieldtext in enumerate(text.split(), start=1):
            try:
                value = int(fieldtext)
            except ValueError:
                raise ValueError(f"parse error at field {i}: {fieldtext!r} is not an integer") from None
            if value < 0 or (vocab_size is not None and value >= vocab_size):
                raise ValueError(f"parse error at field {i}: token id {value} out of range")
            tokens.append(value)
        return tokens
    raise ValueError(f"unknown tokenizer scheme {scheme!r}")


def detokenize(tokens: Sequence[int], scheme: str) -> str:
    """Inverse of :func:`tokenize` for report/output files."""
    if scheme == "bytes":
        return bytes(int(t) for t in tokens).decode("latin-1")
    if scheme == "ints":
        return " ".join(str(int(t)) for t in tokens)
    raise ValueError(f"unknown tokenizer scheme {scheme!r}")
