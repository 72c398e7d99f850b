"""Jacobi decoding: solve a whole continuation as a fixed-point system.

Autoregressive decoding produces one token per model call.  Jacobi decoding
guesses all m positions at once and refines every position in parallel per
iteration; the fixed point is exactly the greedy autoregressive output, and
convergence takes at most m iterations because the first unconverged
position becomes correct each round.
"""

import numpy as np

from lookahead import SamplerSpec, decode_autoregressive, decode_jacobi, markov_train

# A tiny order-2 model of a looping token stream.
corpus = [0, 1, 2, 3, 4, 2, 3, 1] * 60
model = markov_train([corpus], order=2, smoothing=0.05, vocab_size=5)

prompt = [0, 1]
m = 10

baseline = decode_autoregressive(model, prompt, SamplerSpec(mode="greedy"), m)
print(f"autoregressive ({m} model calls): {baseline}")

tokens, trajectory, iterations = decode_jacobi(model, prompt, m, np.random.default_rng(0))
print(f"jacobi        ({iterations} model calls): {tokens}")
print(f"identical: {tokens == baseline}\n")

print("trajectory (x = position agrees with the final answer):")
for step, iterate in enumerate(trajectory.iterates):
    marks = "".join("x" if a == b else "." for a, b in zip(iterate, tokens))
    label = "guess" if step == 0 else f"it {step:2d}"
    print(f"  {label}: {iterate}  [{marks}]")

# The converged prefix only ever grows, which is what caps the iteration
# count at m; adjacent iterates also supply meaningful 2-grams, the idea
# the lookahead window generalizes to n-grams.
