# %% [markdown]
# Bit-error rate against SNR for K=3, t=1, L=2 with QPSK.
#
# Two DL mixing codebooks are compared.  A fresh Gaussian draw per stage
# occasionally produces a badly conditioned per-user matrix, which makes
# the error rate fall only about as 1/sqrt(SNR).  A fixed well-conditioned
# codebook restores the usual slope.

# %%
from codedmir import SimConfig, SystemParams, run_experiment

snrs = (0.0, 10.0, 20.0, 30.0)
for codebook in ("random", "predefined"):
    cfg = SimConfig(params=SystemParams(K=3, L=2, t=1, f=32), mode="noisy", snr_grid_db=snrs,
                    trials=200, seed=1, codebook=codebook)
    res = run_experiment(cfg)
    row = []
    for snr in snrs:
        e = sum(res.bit_errors[(snr, k)][0] for k in (1, 2, 3))
        n = sum(res.bit_errors[(snr, k)][1] for k in (1, 2, 3))
        row.append(f"{e / n:.2e}")
    print(f"{codebook:>10}: " + "  ".join(row))
