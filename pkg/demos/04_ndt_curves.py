# %% [markdown]
# Uplink NDT against the cache ratio for K=10 users and L=4 antennas,
# proposed scheme against the spatial-multiplexing-only (A) and
# coded-caching-only (B) baselines.  Points where gamma*K is not an
# integer use the closed forms with real t.

# %%
from fractions import Fraction

from codedmir.ndt import sweep_csv, sweep_gamma

rows = sweep_gamma(10, 4, [Fraction(i, 20) for i in range(21)])
for r in rows:
    flag = "" if r.integral else "  (non-integer t)"
    print(f"gamma={float(r.gamma):.2f}  A={float(r.T_A):.4f}  B={float(r.T_B):.4f}  "
          f"proposed={float(r.T_proposed):.4f}{flag}")

# %%
print(sweep_csv(10, 4, rows)[:200])
