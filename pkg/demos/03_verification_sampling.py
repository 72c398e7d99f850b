"""Why verification preserves the sampling distribution.

Speculated tokens are accepted with their model probability; a rejection
zeroes the token and renormalizes before trying the next speculation.  The
resulting law over the emitted token equals the unmodified distribution no
matter which tokens were speculated -- speculation changes only how many
tokens confirm per step, never what gets sampled.
"""

import numpy as np

from lookahead import exact_accept_distribution, verify_sample

base = np.array([0.40, 0.30, 0.20, 0.10])

# Closed form: exactly simulate the accept/reject/renormalize chain.
for speculations in ([], [2], [1, 1], [3, 2, 1, 0]):
    q = exact_accept_distribution(base, speculations)
    print(f"speculations {speculations!s:>12}: Q = {np.round(q, 12)}  max|Q-P| = {np.abs(q - base).max():.1e}")

# Monte Carlo over the actual verifier, single speculation of token 2.
candidate = ((2,), [base, np.full(4, 0.25)])
runs = 50_000
counts = np.zeros(4)
accepted_lengths = np.zeros(3)
for seed in range(runs):
    out = verify_sample(base, [candidate], np.random.default_rng(seed))
    counts[out[0]] += 1
    accepted_lengths[len(out)] += 1

empirical = counts / runs
print(f"\nverifier first-token frequencies over {runs} runs: {np.round(empirical, 4)}")
print(f"total variation distance to the base law:          {0.5 * np.abs(empirical - base).sum():.4f}")
print(f"speculation accepted (2 tokens emitted) in {accepted_lengths[2] / runs:.1%} of runs")
# Acceptance of token 2 happens with probability P(2) = 0.2: speculation
# quality moves the acceptance rate, the output law stays put.
