# %% [markdown]
# # From tree to signals and back
#
# Every node gets a one-second slot, bottom up. The slow channel carries
# the category as a carrier phase (shifted by depth), the fast channel
# carries the leaves' features, and spikes follow the category phase.

# %%
import numpy as np

from neurosyntax.codec import EncodingConfig, decode_tree, encode_tree
from neurosyntax.syntax import canonical_json
from neurosyntax.synthetic import random_lexicon, random_tree

lex = random_lexicon(np.random.default_rng(0), n_items=48, n_dim=4)
tree = random_tree(np.random.default_rng(1), lex, max_depth=4)

bundle = encode_tree(tree, lex, EncodingConfig())
for e in bundle.schedule[:6]:
    print(f"{e.start:4.1f} s  {e.node_id:8s} {e.category}  depth {e.depth}")
print("...", len(bundle.schedule), "slots,", sum(len(t) for t in bundle.spike_trains), "spikes")

# %%
for snr in (None, 20.0, 5.0):
    cfg = EncodingConfig(snr_db=snr)
    try:
        back = decode_tree(encode_tree(tree, lex, cfg), lex, cfg)
        ok = canonical_json(back) == canonical_json(tree)
    except Exception as exc:
        ok = f"failed ({type(exc).__name__})"
    print(f"SNR {snr}: exact = {ok}")
