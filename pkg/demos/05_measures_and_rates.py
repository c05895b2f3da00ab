"""Entanglement measures on familiar state families.

Concurrence, Bell-state fidelity, and logarithmic negativity on the Werner
family p|Bell><Bell| + (1-p) I/4, plus the ebit-rate arithmetic that turns
a heralded-state negativity and a kept data fraction into an effective
entanglement generation rate.

Run:  python3 demos/05_measures_and_rates.py
Writes measures_demo.png next to this script.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import bouncesim as bs
from bouncesim import measures

bell = np.zeros((4, 4), dtype=complex)
bell[1, 1] = bell[2, 2] = bell[1, 2] = bell[2, 1] = 0.5

ps = np.linspace(0.0, 1.0, 101)
werner = [p * bell + (1 - p) * np.eye(4) / 4 for p in ps]
cs = [bs.concurrence(r) for r in werner]
ens = [bs.log_negativity(r) for r in werner]
fbs = [bs.bell_fidelity(r, "odd")[0] for r in werner]

# analytic threshold: Werner states are separable up to p = 1/3
print(f"concurrence first nonzero at p = {ps[np.nonzero(cs)[0][0]]:.2f} "
      "(expected 0.34)")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
ax1.plot(ps, cs, label="concurrence")
ax1.plot(ps, ens, label="log-negativity")
ax1.plot(ps, fbs, label="Bell fidelity")
ax1.axvline(1 / 3, color="gray", ls=":", lw=1)
ax1.set_xlabel("Werner parameter p")
ax1.legend(fontsize=8)
ax1.set_title("measures on the Werner family")

# ebit rate for a fixed heralded state: linear in the kept fraction, so
# the interesting shape only appears when the conditional state improves
# as the fraction shrinks (see demo 03)
fractions = np.linspace(0.05, 1.0, 20)
for p in (0.5, 0.7, 0.9):
    rho = p * bell + (1 - p) * np.eye(4) / 4
    rates = [
        measures.ebit_rate(bs.log_negativity(rho), f, rep_rate=10e3)
        for f in fractions
    ]
    ax2.plot(fractions, rates, label=f"Werner p = {p}")
ax2.set_xlabel("fraction kept")
ax2.set_ylabel("ebit rate (1/s) at 10 kHz")
ax2.legend(fontsize=8)
ax2.set_title("rate arithmetic at fixed state quality")
fig.tight_layout()
out = Path(__file__).with_name("measures_demo.png")
fig.savefig(out, dpi=150)
print(f"wrote {out}")
