# %% [markdown]
# Three users, one cached packet each, two BS antennas (K=3, t=1, L=2).
#
# We run one stage symbolically so every signal is a readable linear
# combination of subpackets.  Files are named A, B, C.

# %%
from codedmir import SymbolicBackend, SystemParams, enumerate_stages, generate_channels
from codedmir import generate_library, build_cache
from codedmir.channel import stage_beamformers
from codedmir.uplink import run_uplink_stage, ul_transmit_signal

p = SystemParams(K=3, L=2, t=1)
lib = generate_library(p, seed=0)
caches = {k: build_cache(lib, k) for k in range(1, 4)}
channels = generate_channels(p, seed=0)
backend = SymbolicBackend(p)
(stage,) = enumerate_stages(p)


def name(sid):
    return "ABC"[sid.n - 1] + "".join(map(str, sid.P))


def show(sig):
    return " ".join(f"{'+' if c.real > 0 else '-'}{abs(c):.3f}*{name(s)}" for s, c in sig.terms.items())


# %% [markdown]
# Uplink: in each transmission S the users in S send one cached subpacket,
# the other user sends a negated pair.

# %%
for S in stage.transmissions:
    for k in stage.users:
        print(f"S={S} user {k}: {show(ul_transmit_signal(k, S, stage, caches[k], p, backend))}")

# %% [markdown]
# The BS zero-forces and extracts one codeword per 2-user set.  The
# codeword for {2,3} comes from adding both receptions, the interference
# of the outsider cancels out.

# %%
bf = stage_beamformers(stage, channels)
_, codewords = run_uplink_stage(stage, caches, channels, bf, p, backend)
for Q, cw in codewords.items():
    print(Q, show(cw.payload), "| noise from", cw.sources)

# %% [markdown]
# Downlink: after broadcasting mixed codewords, each user removes what it
# caches and solves a 2x2 system.  The equalized result is exactly the
# wanted subpacket plus noise.

# %%
from codedmir import run_scheme

out = run_scheme(p, lib, channels, backend)
for k, dec in out.decoded.items():
    for sid, sig in dec.items():
        print(f"user {k} gets {name(sid)}: signal {show(sig.signal_part())}, "
              f"{len(sig.noise)} noise terms")
