# %% [markdown]
# # Slow waves, fast bursts and their coupling
#
# A 2 Hz traveling wave sets the phase. A 60 Hz component's amplitude
# follows that phase. The modulation index measures how strongly.

# %%
import numpy as np

from neurosyntax.codec import modulation_index, preferred_phase
from neurosyntax.signals import (HighFreqComponent, PacConfig, TravelingWave, synth_modulated,
                                 wave_phase)

wave = TravelingWave(amplitude=1.0, frequency=2.0, wavenumber=0.5)
print("phase at x=0 vs x=1, t=0.1:", wave_phase(wave, 0.1, 0.0), wave_phase(wave, 0.1, 1.0))

# %%
fs, dur = 1000.0, 20.0
for depth_frac in (0.0, 0.5, 1.0):
    bank = [HighFreqComponent(1.0, depth_frac, 60.0)]
    hf = synth_modulated(bank, wave, PacConfig(preferred_phase=2.0), fs, dur)
    trace = hf.with_samples(hf.samples + np.cos(2 * np.pi * 2.0 * hf.times))
    mi = modulation_index(trace, 2.0, 60.0)
    line = f"A1/A0 = {depth_frac:.1f}  MI = {mi:.5f}"
    if depth_frac:
        line += f"  preferred phase = {preferred_phase(trace, 2.0, 60.0):.3f} rad"
    print(line)
