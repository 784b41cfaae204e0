# %% [markdown]
# # Building trees with MERGE
#
# A workspace is a set. Merging two members replaces them with the
# unordered pair, so the workspace shrinks by one each step.

# %%
from neurosyntax.synthetic import demo_lexicon
from neurosyntax.syntax import (Leaf, Workspace, check_markov, depth, derive, label_tree,
                                linearize, merge, node_closures, node_count)

lex = demo_lexicon()
old, dog, saw, the = (Leaf(lex[w]) for w in ("old", "dog", "saw", "the"))

ws = Workspace.of(old, dog, saw, the)
print("start:", len(ws), "objects")
ws = merge(ws, old, dog)
print("after merging old+dog:", len(ws), "objects")

# %% [markdown]
# Order of the operands does not matter.

# %%
assert merge(Workspace.of(old, dog), old, dog) == merge(Workspace.of(old, dog), dog, old)

# %% [markdown]
# Labels come from the head. An adjective and a noun make a noun phrase;
# a verb and a noun phrase make a verb phrase.

# %%
(np_,) = [so for so in ws if so not in (saw, the)]
np_ = label_tree(np_)
print("old+dog ->", np_.label)

steps = [(old, dog)]
d = derive(Workspace.of(old, dog, saw, the), steps)
print("markov:", check_markov(d))

# %%
from neurosyntax.syntax import Node

vp = label_tree(Node.of(saw, Node.of(the, np_)))
print("label:", vp.label, "| depth:", depth(vp), "| nodes:", node_count(vp))
order = linearize(vp)
print("head-initial order:", " ".join(i.id for i in order))
print("node closures:", node_closures(vp, order))
