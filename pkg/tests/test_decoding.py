import numpy as np
import pytest

from lookahead import (
    GenerationConfig,
    NGramPool,
    SamplerSpec,
    decode_autoregressive,
    decode_jacobi,
    decode_lookahead,
    greedy_token,
    lookahead_step,
    markov_train,
    start_session,
)
from tests.conftest import make_phrase_corpus

GREEDY = SamplerSpec(mode="greedy", seed=0)


def cycle_model(vocab=4):
    """Deterministic cycle 0 -> 1 -> 2 -> ... -> 0 under greedy decoding."""
    corpus = list(range(vocab)) * 50
    return markov_train([corpus], order=1, smoothing=0.01, vocab_size=vocab)


class TestAutoregressive:
    def test_single_token_is_argmax(self, phrase_model):
        out = decode_autoregressive(phrase_model, [1, 2], GREEDY, 1)
        assert out == [greedy_token(phrase_model.next_distribution([1, 2]))]

    def test_alternating_model_by_hand(self, ab_model):
        assert decode_autoregressive(ab_model, [0], GREEDY, 6) == [1, 0, 1, 0, 1, 0]

    def test_eos_stops_inclusive(self):
        model = cycle_model()
        out = decode_autoregressive(model, [0], GREEDY, 10, eos_token=3)
        assert out == [1, 2, 3]

    def test_empty_prompt_rejected(self, ab_model):
        with pytest.raises(ValueError):
            decode_autoregressive(ab_model, [], GREEDY, 4)


class TestJacobi:
    def test_m1_single_iteration(self, phrase_model):
        tokens, trajectory, iterations = decode_jacobi(
            phrase_model, [1, 2], 1, np.random.default_rng(0)
        )
        assert iterations == 1
        assert tokens == decode_autoregressive(phrase_model, [1, 2], GREEDY, 1)
        assert len(trajectory.iterates) == 2

    @pytest.mark.parametrize("m", [1, 3, 8])
    def test_matches_autoregressive_oracle(self, m, phrase_model, tiny_transformer):
        for model in (phrase_model, tiny_transformer):
            rng = np.random.default_rng(m)
            for trial in range(5):
                prompt = [int(t) for t in rng.integers(0, model.vocab_size, size=3)]
                tokens, _, iterations = decode_jacobi(model, prompt, m, rng)
                assert iterations <= m
                assert tokens == decode_autoregressive(model, prompt, GREEDY, m)

    def test_first_update_first_token_matches_autoregressive(self, phrase_model):
        rng = np.random.default_rng(4)
        tokens, trajectory, _ = decode_jacobi(phrase_model, [2, 3], 6, rng)
        base = decode_autoregressive(phrase_model, [2, 3], GREEDY, 1)
        assert trajectory.iterates[1][0] == base[0]

    def test_converged_prefix_never_shrinks(self, phrase_model):
        rng = np.random.default_rng(9)
        for trial in range(10):
            prompt = [int(t) for t in rng.integers(0, 8, size=4)]
            tokens, trajectory, _ = decode_jacobi(phrase_model, prompt, 8, rng)
            final = tokens
            prev = 0
            for iterate in trajectory.iterates[1:]:
                agree = 0
                for a, b in zip(iterate, final):
                    if a != b:
                        break
                    agree += 1
                assert agree >= prev
                prev = agree

    def test_iterate_lengths_equal(self, phrase_model):
        _, trajectory, _ = decode_jacobi(phrase_model, [1], 5, np.random.default_rng(1))
        assert {len(it) for it in trajectory.iterates} == {5}


class TestLookaheadStep:
    def test_empty_pool_accepts_one_base_token(self, phrase_model):
        config = GenerationConfig(window=4, ngram=3, max_tokens=10)
        state = start_session(phrase_model, [1, 2, 3], config, GREEDY)
        outcome = lookahead_step(state)
        assert outcome.candidate_count == 0
        assert outcome.accepted == [greedy_token(phrase_model.next_distribution([1, 2, 3]))]

    def test_planted_candidate_gives_full_acceptance(self, ab_model):
        config = GenerationConfig(window=3, ngram=3, max_tokens=10)
        pool = NGramPool(3)
        pool.insert((0, 1, 0))  # the true continuation of ...0 is 1,0,1
        state = start_session(ab_model, [0, 1, 0], config, GREEDY, pool=pool)
        outcome = lookahead_step(state)
        assert outcome.candidate_count == 1
        assert outcome.accepted == [1, 0, 1]

    def test_query_count_formula(self, phrase_model):
        config = GenerationConfig(window=5, ngram=4, max_candidates=4, max_tokens=40)
        prompt = make_phrase_corpus(3)[:6]
        _, metrics = decode_lookahead(phrase_model, prompt, config, GREEDY)
        state = start_session(phrase_model, prompt, config, GREEDY)
        for _ in range(12):
            outcome = lookahead_step(state)
            expected = 1 + (3 * 5 - 1) + outcome.candidate_count * 3
            assert outcome.query_count == expected

    def test_pool_grows_with_collected_ngrams(self, phrase_model):
        config = GenerationConfig(window=4, ngram=3, max_tokens=10)
        state = start_session(phrase_model, [1, 2, 3], config, GREEDY)
        lookahead_step(state)
        assert 1 <= len(state.pool) <= 4  # W n-grams, minus duplicates


class TestLookaheadDecode:
    @pytest.mark.parametrize("window,ngram,cands", [(1, 2, 0), (5, 3, 5), (8, 4, 8)])
    def test_lossless_vs_autoregressive(self, window, ngram, cands, phrase_model, tiny_transformer):
        for model in (phrase_model, tiny_transformer):
            rng = np.random.default_rng(window * 100 + ngram)
            config = GenerationConfig(
                window=window, ngram=ngram, max_candidates=cands, max_tokens=24
            )
            for trial in range(8):
                prompt = [int(t) for t in rng.integers(0, model.vocab_size, size=4)]
                sampler = SamplerSpec(mode="greedy", seed=trial)
                expected = decode_autoregressive(model, prompt, sampler, 24)
                got, metrics = decode_lookahead(model, prompt, config, sampler)
                assert got == expected
                assert 1.0 <= metrics.compression <= ngram

    def test_degenerate_config_is_autoregressive(self, phrase_model):
        config = GenerationConfig(window=1, ngram=2, max_candidates=0, max_tokens=20)
        out, metrics = decode_lookahead(phrase_model, [1, 2], config, GREEDY)
        assert out == decode_autoregressive(phrase_model, [1, 2], GREEDY, 20)
        assert metrics.steps == metrics.tokens_generated == 20
        assert metrics.compression == 1.0

    def test_eos_truncates_within_acceptance(self):
        model = cycle_model(vocab=5)
        config = GenerationConfig(
            window=4, ngram=3, max_tokens=12, eos_token=2, seed_pool_from_prompt=True
        )
        prompt = [0, 1, 2, 3, 4, 0]
        out, _ = decode_lookahead(model, prompt, config, GREEDY)
        assert out == decode_autoregressive(model, prompt, GREEDY, 12, eos_token=2)
        assert out == [1, 2]

    def test_max_tokens_truncates_final_step(self, ab_model):
        config = GenerationConfig(window=4, ngram=3, max_tokens=7, seed_pool_from_prompt=True)
        out, metrics = decode_lookahead(ab_model, [0, 1, 0, 1, 0], config, GREEDY)
        assert len(out) == 7
        assert out == decode_autoregressive(ab_model, [0, 1, 0, 1, 0], GREEDY, 7)

    def test_prompt_seeding_flag_uses_prompt_ngrams(self, ab_model):
        config = GenerationConfig(window=2, ngram=3, max_tokens=6, seed_pool_from_prompt=True)
        state = start_session(ab_model, [0, 1, 0, 1], config, GREEDY)
        outcome = lookahead_step(state)
        # (0,1,0) and (1,0,1) are in the pool; last token 1 matches (1,0,1).
        assert outcome.candidate_count == 1
        assert outcome.accepted == [0, 1, 0]

    def test_sampling_mode_reproducible_and_bounded(self, phrase_model):
        config = GenerationConfig(window=4, ngram=3, max_tokens=15, seed_pool_from_prompt=True)
        sampler = SamplerSpec(mode="temperature", temperature=1.0, seed=5)
        prompt = make_phrase_corpus(11)[:8]
        out1, m1 = decode_lookahead(phrase_model, prompt, config, sampler)
        out2, m2 = decode_lookahead(phrase_model, prompt, config, sampler)
        assert out1 == out2
        assert len(out1) == 15
        assert 1.0 <= m1.compression <= 3.0

    def test_progress_and_acceptance_bounds(self, phrase_model):
        config = GenerationConfig(window=6, ngram=4, max_tokens=30, seed_pool_from_prompt=True)
        prompt = make_phrase_corpus(19)[:10]
        out, metrics = decode_lookahead(phrase_model, prompt, config, GREEDY)
        assert metrics.steps <= metrics.tokens_generated
        assert all(count >= 0 for count in metrics.acceptance_histogram.values())
        assert set(metrics.acceptance_histogram) == {1, 2, 3, 4}

    def test_pool_capacity_respected(self, phrase_model):
        config = GenerationConfig(window=5, ngram=3, max_tokens=40)
        pool = NGramPool(3, capacity=8)
        decode_lookahead(phrase_model, [1, 2, 3], config, GREEDY, pool=pool)
        assert len(pool) <= 8

    def test_mismatched_pool_ngram_rejected(self, phrase_model):
        config = GenerationConfig(window=5, ngram=3, max_tokens=10)
        with pytest.raises(ValueError):
            decode_lookahead(phrase_model, [1], config, GREEDY, pool=NGramPool(4))
