"""Speedup analytics: how step compression scales with speculation width.

With acceptance rate alpha and drafts of length gamma, one draft confirms
(1 - alpha**(gamma+1)) / (1 - alpha) tokens per step in expectation -- a
bounded geometric sum.  Speculating b drafts in parallel instead gives
(gamma+1) - sum_i (1 - alpha**i)**b, which keeps growing roughly linearly
in log(b): spending exponentially more parallel compute per step buys a
steady reduction in steps.  The engine maps onto these parameters as
gamma = N - 1 and b = G = W.
"""

from lookahead import (
    expected_accepted_batched,
    expected_accepted_single,
    mc_expected_accepted,
    predicted_compression,
    scaling_rows,
)

alpha, gamma = 0.425, 4

print(f"single draft, alpha={alpha}, gamma={gamma}: "
      f"E = {expected_accepted_single(alpha, gamma):.4f} tokens/step (upper bound {1/(1-alpha):.4f})")

print("\nparallel drafts (closed form vs 1e5-trial simulation):")
print("     b   E[#tokens]   simulated     stderr")
for b in (1, 2, 4, 16, 64, 256):
    closed = expected_accepted_batched(alpha, gamma, b)
    mean, stderr = mc_expected_accepted(alpha, gamma, b, trials=100_000, seed=b)
    print(f"  {b:>4}   {closed:9.4f}   {mean:9.4f}   {stderr:.4f}")

# Not every step has a usable cached n-gram; assume one good speculation
# every f steps and autoregressive fallback in between.
f = 3.106
print(f"\npredicted step compression with f={f} (one good speculation per {f:.1f} steps):")
for b in (1, 4, 16, 64, 256):
    print(f"  b={b:>3}: S = {predicted_compression(alpha, f, gamma, b):.3f}")

rows = scaling_rows(alpha, f, gamma, [2**k for k in range(9)], trials=50_000, seed=1)
gaps = [abs(r["predicted_S"] - r["mc_mean"]) for r in rows]
print(f"\nscaling_rows emits the same table as CSV rows; max |predicted - simulated| = {max(gaps):.4f}")
