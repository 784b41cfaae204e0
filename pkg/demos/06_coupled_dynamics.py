# %% [markdown]
# # The coupled state over a derivation
#
# Lexical input, population rates, the composition frontier and the
# oscillator phases evolve together; merges happen at scheduled times.

# %%
from neurosyntax.config import RunConfig, SimConfig, build_dynamics, run_script
from neurosyntax.codec import EncodingConfig
from neurosyntax.signals import order_parameter
from neurosyntax.sim import run
from neurosyntax.synthetic import demo_lexicon

lex = demo_lexicon()
script = run_script("select old\nselect dog\nmerge old dog\nselect saw\nmerge saw m1\n", lex)
cfg = RunConfig(None, None, EncodingConfig(), EncodingConfig(), SimConfig(duration=1.0), seed=2)
dyn, initial = build_dynamics(cfg, lex, script)

log = []
traj = run(dyn, initial, cfg.sim.duration, cfg.sim.dt, log)
for ev in log:
    print(f"{ev['time']:.2f} s  {ev['kind']:7s} {ev['ref']}")
for t, s in traj[::200]:
    print(f"t={t:.1f}  |frontier|={len(s.frontier)}  R={order_parameter(s.e):.3f}  rates={s.o.round(1)}")
